//! Factor trees: an ordered product of register-padded factors and a global phase.
//!
//! A factor at level `l` acts on the first `l` qubits of an `n_total`-qubit
//! register and is padded with identities on the trailing qubits.

use num_complex::Complex64;

use crate::basis::{kg_basis, CartanKind};
use crate::error::{Error, Result};
use crate::linalg::{expm_skew, identity, kron, kron_identity, ComplexMatrix};
use crate::metrics::DecompositionReport;
use crate::pauli::PauliWord;

#[derive(Debug, Clone, PartialEq)]
pub enum FactorKind {
    GlobalPhase { phase: f64 },
    /// `payload in SU(2^(l-1))`, expanded as `payload (x) I_2 (x) I^(n_total - l)`.
    SubUnitary { level: usize, payload: ComplexMatrix },
    /// `payload in SU(2)` on qubit `l`.
    LastQubit { level: usize, payload: ComplexMatrix },
    /// `exp(sum c_i w_i)` over words of the named Cartan basis at level `l`.
    CartanExp { level: usize, basis: CartanKind, terms: Vec<(String, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub label: String,
    pub kind: FactorKind,
    /// `E_s` of the Cartan element before projection; zero for every other kind.
    pub subspace_error: f64,
}

impl Factor {
    pub fn k_type(label: impl Into<String>, kind: FactorKind) -> Self {
        Self { label: label.into(), kind, subspace_error: 0.0 }
    }

    pub fn level(&self) -> Option<usize> {
        match &self.kind {
            FactorKind::GlobalPhase { .. } => None,
            FactorKind::SubUnitary { level, .. }
            | FactorKind::LastQubit { level, .. }
            | FactorKind::CartanExp { level, .. } => Some(*level),
        }
    }

    pub fn is_cartan(&self) -> bool {
        matches!(self.kind, FactorKind::CartanExp { .. })
    }

    /// Generator `sum c_i w_i` of a Cartan factor.
    pub fn cartan_generator(&self) -> Result<Option<ComplexMatrix>> {
        let FactorKind::CartanExp { level, basis, terms } = &self.kind else {
            return Ok(None);
        };
        let allowed = kg_basis(*level)?.cartan(*basis);
        let dim = 1usize << level;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (label, coeff) in terms {
            let word = PauliWord::new(label)?;
            if !allowed.contains(&word) {
                return Err(Error::BadLabel { label: label.clone(), reason: "not in the declared Cartan basis" });
            }
            word.add_scaled_to(&mut acc, *coeff);
        }
        Ok(Some(acc))
    }

    /// Matrix of this factor on its own `l` qubits (`payload (x) I_2` for sub-unitaries).
    pub fn local_matrix(&self) -> Result<ComplexMatrix> {
        match &self.kind {
            FactorKind::GlobalPhase { phase } => {
                Ok(ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, *phase)))
            }
            FactorKind::SubUnitary { payload, .. } => Ok(kron_identity(payload, 2)),
            FactorKind::LastQubit { level, payload } => Ok(kron(&identity(1 << (level - 1)), payload)),
            FactorKind::CartanExp { .. } => {
                let gen = self.cartan_generator()?.expect("cartan kind");
                expm_skew(&gen)
            }
        }
    }

    /// The factor as a `2^n_total` square matrix.
    pub fn expand(&self, n_total: usize) -> Result<ComplexMatrix> {
        let dim = 1usize << n_total;
        if let FactorKind::GlobalPhase { phase } = self.kind {
            return Ok(identity(dim) * Complex64::from_polar(1.0, phase));
        }
        let level = self.level().expect("non-phase factors have a level");
        // a lone SU(4) block for a two-qubit register sits one level above it
        let two_qubit_leaf = matches!(self.kind, FactorKind::SubUnitary { .. }) && level == n_total + 1;
        if two_qubit_leaf {
            let FactorKind::SubUnitary { payload, .. } = &self.kind else { unreachable!() };
            return Ok(payload.clone());
        }
        if level > n_total || level < 2 {
            return Err(Error::LevelExceedsRegister { level, n_total });
        }
        let local = self.local_matrix()?;
        if local.nrows() != 1 << level {
            return Err(Error::DimMismatch { expected: 1 << level, found: local.nrows() });
        }
        Ok(kron_identity(&local, 1 << (n_total - level)))
    }
}

/// Ordered factorization with an aggregated global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTree {
    pub n_total: usize,
    pub phase: f64,
    pub factors: Vec<Factor>,
    pub report: DecompositionReport,
}

impl FactorTree {
    pub fn new(n_total: usize, phase: f64, factors: Vec<Factor>) -> Self {
        Self { n_total, phase, factors, report: DecompositionReport::default() }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_total
    }

    /// `e^{i phase} F_0 F_1 ... F_last`.
    pub fn product(&self) -> Result<ComplexMatrix> {
        let mut acc = identity(self.dim()) * Complex64::from_polar(1.0, self.phase);
        for f in &self.factors {
            acc = match f.kind {
                FactorKind::GlobalPhase { phase } => acc * Complex64::from_polar(1.0, phase),
                _ => acc * f.expand(self.n_total)?,
            };
        }
        Ok(acc)
    }

    /// `(label, E_s)` for every Cartan factor in order.
    pub fn subspace_errors(&self) -> Vec<(String, f64)> {
        self.factors.iter().filter(|f| f.is_cartan()).map(|f| (f.label.clone(), f.subspace_error)).collect()
    }

    pub fn count_where(&self, pred: impl Fn(&Factor) -> bool) -> usize {
        self.factors.iter().filter(|f| pred(f)).count()
    }
}
