//! One full recursion level and the recursive driver.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{child_seed, DecomposeConfig, OptimizerConfig};
use super::optimizer::{minimize_named, CartanSolution};
use super::stage::{
    extract_last_qubit, extract_subunitary, khk_stage_named, phase_split, repair, residual_k, secondary_m_pair,
};
use crate::basis::{kg_basis, z_word, CartanKind};
use crate::error::{Error, Result};
use crate::factor::{Factor, FactorKind, FactorTree};
use crate::involution::AxisInvolution;
use crate::linalg::{determinant, unitarity_defect, AlgebraElement, ComplexMatrix};
use crate::metrics::{subspace_error_raw, DecompositionReport};

/// Largest `|det G - 1|` accepted as special unitary.
pub const DET_TOL: f64 = 1e-8;

/// Factors of one level, in product order:
///
/// `e^{i phase} (K0 (x) I) e^{f0} (K1 (x) I) (I (x) Kt0) e^{h0} (K2 (x) I) e^{f1} (K3 (x) I) (I (x) Kt1)`.
#[derive(Debug, Clone)]
pub struct LevelDecomposition {
    pub n: usize,
    pub phase: f64,
    /// `K(0..4)` in `SU(2^(n-1))`.
    pub k: [ComplexMatrix; 4],
    /// `Kt(0..2)` in `SU(2)`.
    pub k_tilde: [ComplexMatrix; 2],
    pub h0: CartanSolution,
    pub f: [CartanSolution; 2],
    pub m0: AlgebraElement,
    pub m1: AlgebraElement,
    pub m2: AlgebraElement,
    /// `[K00 K01, K01^dag]`: the elements whose `Theta_X` logarithms are `m1`, `m2`.
    pub secondary_inputs: [ComplexMatrix; 2],
    /// `||G - product||_F` of this level alone.
    pub reconstruction_error: f64,
}

fn optimizer_for(cfg: &OptimizerConfig, index: u64) -> OptimizerConfig {
    OptimizerConfig { seed: child_seed(cfg.seed, index), ..cfg.clone() }
}

fn cartan_factor(label: &str, level: usize, kind: CartanKind, sol: &CartanSolution, cartan: &[crate::PauliWord]) -> Factor {
    let coords = sol.h.coords.as_ref().expect("optimizer attaches coordinates");
    let terms = coords.labels.iter().cloned().zip(coords.values.iter().copied()).collect();
    Factor {
        label: label.to_owned(),
        kind: FactorKind::CartanExp { level, basis: kind, terms },
        subspace_error: subspace_error_raw(&sol.h_raw, cartan),
    }
}

impl LevelDecomposition {
    /// The nine factors with labels prefixed by `prefix`; `K` blocks are
    /// sub-unitaries at this level.
    pub fn factors(&self, prefix: &str) -> Vec<Factor> {
        let n = self.n;
        let basis = kg_basis(n).expect("level was built from this basis");
        let (h, f) = (basis.cartan_h(), basis.cartan_f());
        let sub = |i: usize| Factor::k_type(format!("{prefix}K{i}"), FactorKind::SubUnitary { level: n, payload: self.k[i].clone() });
        let last = |i: usize| {
            Factor::k_type(format!("{prefix}Kt{i}"), FactorKind::LastQubit { level: n, payload: self.k_tilde[i].clone() })
        };
        vec![
            sub(0),
            cartan_factor(&format!("{prefix}f0"), n, CartanKind::F, &self.f[0], &f),
            sub(1),
            last(0),
            cartan_factor(&format!("{prefix}h0"), n, CartanKind::H, &self.h0, &h),
            sub(2),
            cartan_factor(&format!("{prefix}f1"), n, CartanKind::F, &self.f[1], &f),
            sub(3),
            last(1),
        ]
    }

    pub fn product(&self) -> Result<ComplexMatrix> {
        let tree = FactorTree::new(self.n, self.phase, self.factors(""));
        tree.product()
    }

    pub fn optimizer_iterations(&self) -> [usize; 3] {
        [self.h0.iterations, self.f[0].iterations, self.f[1].iterations]
    }
}

/// Splits `g in SU(2^n)`, `n >= 3`, into the nine-factor form of one level.
pub fn decompose_one_level(g: &ComplexMatrix, n: usize, cfg: &DecomposeConfig) -> Result<LevelDecomposition> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("one level needs n >= 3, got {n}")));
    }
    if g.nrows() != 1 << n || g.ncols() != 1 << n {
        return Err(Error::DimMismatch { expected: 1 << n, found: g.nrows() });
    }
    let tol = &cfg.tol;
    let basis = kg_basis(n)?;
    let (h_sorted, f_sorted) = (basis.cartan_h(), basis.cartan_f());
    let h_name = CartanKind::H.name(n);
    let f_name = CartanKind::F.name(n);
    let inv_z = AxisInvolution::theta_z(n);
    let inv_x = AxisInvolution::theta_x(n);

    let stage = khk_stage_named(
        g,
        &inv_z,
        &basis.k_set,
        &basis.m_set,
        &h_sorted,
        &optimizer_for(&cfg.optimizer, 0),
        tol,
        &h_name,
    )?;
    let (k00, k01) = (&stage.k0, &stage.k1);

    let span = basis.k1_with_z();
    let (m1, m2) = secondary_m_pair(k00, k01, &inv_x, &span, tol.subspace)?;
    let (k10, _) = repair(residual_k(&(k00 * k01), &m1)?)?;
    let (k20, _) = repair(residual_k(&k01.adjoint(), &m2)?)?;

    let z = z_word(n);
    let (m1_hat, m1_tilde) = phase_split(&m1, &basis.k1_set, &z, tol.subspace)?;
    let (m2_hat, m2_tilde) = phase_split(&m2, &basis.k1_set, &z, tol.subspace)?;

    let solve_f = |m: &AlgebraElement, index: u64| {
        minimize_named(m, &basis.k0_set, &basis.k1_set, &f_sorted, &optimizer_for(&cfg.optimizer, index), tol, &f_name)
    };
    let f0 = solve_f(&m1_hat, 1)?;
    let f1 = solve_f(&m2_hat, 2)?;
    let (k11, _) = repair(f0.k1.clone())?;
    let (k21, _) = repair(f1.k1.clone())?;

    let (big_k0, p0) = extract_subunitary(&(&k10 * &k11), tol.structure)?;
    let (big_k1, p1) = extract_subunitary(&k11.adjoint(), tol.structure)?;
    let (big_k2, p2) = extract_subunitary(&(&k20 * &k21), tol.structure)?;
    let (big_k3, p3) = extract_subunitary(&k21.adjoint(), tol.structure)?;
    let kt0 = extract_last_qubit(&m1_tilde, tol.subspace)?;
    let kt1 = extract_last_qubit(&m2_tilde, tol.subspace)?;

    let mut level = LevelDecomposition {
        n,
        phase: p0 + p1 + p2 + p3,
        k: [big_k0, big_k1, big_k2, big_k3],
        k_tilde: [kt0, kt1],
        h0: stage.solution,
        f: [f0, f1],
        m0: stage.m,
        m1,
        m2,
        secondary_inputs: [k00 * k01, k01.adjoint()],
        reconstruction_error: f64::NAN,
    };
    level.reconstruction_error = (level.product()? - g).norm();
    Ok(level)
}

struct Partial {
    factors: Vec<Factor>,
    phase: f64,
    stats: Vec<(String, usize)>,
}

fn decompose_rec(g: &ComplexMatrix, n: usize, cfg: &DecomposeConfig, prefix: &str) -> Result<Partial> {
    if n == 2 {
        let leaf = Factor::k_type(format!("{prefix}U"), FactorKind::SubUnitary { level: 3, payload: g.clone() });
        return Ok(Partial { factors: vec![leaf], phase: 0.0, stats: Vec::new() });
    }
    let level = decompose_one_level(g, n, cfg)?;
    let mut stats: Vec<(String, usize)> = ["h0", "f0", "f1"]
        .iter()
        .zip(level.optimizer_iterations())
        .map(|(l, it)| (format!("{prefix}{l}"), it))
        .collect();
    let flat = level.factors(prefix);
    if n == 3 {
        return Ok(Partial { factors: flat, phase: level.phase, stats });
    }

    let child = |i: usize| {
        let sub_cfg = DecomposeConfig {
            optimizer: OptimizerConfig { seed: child_seed(cfg.optimizer.seed, 10 + i as u64), ..cfg.optimizer.clone() },
            ..cfg.clone()
        };
        let (k, phase) = repair(level.k[i].clone())?;
        let mut part = decompose_rec(&k, n - 1, &sub_cfg, &format!("{prefix}K{i}."))?;
        part.phase += phase;
        Ok(part)
    };
    let children: Vec<Partial> = if cfg.parallel {
        (0..4).into_par_iter().map(child).collect::<Result<_>>()?
    } else {
        (0..4).map(child).collect::<Result<_>>()?
    };

    let mut phase = level.phase;
    let mut factors = Vec::new();
    let mut children = children.into_iter();
    for f in flat {
        if matches!(f.kind, FactorKind::SubUnitary { .. }) {
            let part = children.next().expect("four sub-unitaries per level");
            phase += part.phase;
            factors.extend(part.factors);
            stats.extend(part.stats);
        } else {
            factors.push(f);
        }
    }
    Ok(Partial { factors, phase, stats })
}

/// Checks that `g` is a `2^n x 2^n` special unitary.
pub fn check_special_unitary(g: &ComplexMatrix, n: usize) -> Result<()> {
    let dim = 1usize << n;
    if g.nrows() != dim || g.ncols() != dim {
        return Err(Error::DimMismatch { expected: dim, found: g.nrows() });
    }
    let defect = unitarity_defect(g);
    if defect > crate::linalg::STRUCTURE_TOL * dim as f64 {
        return Err(Error::NotUnitary { defect });
    }
    let det_defect = (determinant(g) - 1.0).norm();
    if det_defect > DET_TOL {
        return Err(Error::NotSpecial { defect: det_defect });
    }
    Ok(())
}

/// Recursive factorization of `g in SU(2^n)` down to `SU(4)` blocks.
pub fn decompose_full(g: &ComplexMatrix, n: usize, cfg: &DecomposeConfig) -> Result<FactorTree> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least two qubits, got {n}")));
    }
    check_special_unitary(g, n)?;
    cfg.optimizer.validate()?;
    let start = Instant::now();
    let part = decompose_rec(g, n, cfg, "")?;
    let mut tree = FactorTree::new(n, part.phase, part.factors);
    let approx_error = (tree.product()? - g).norm();
    tree.report = DecompositionReport {
        approx_error,
        subspace_errors: tree.subspace_errors(),
        wall_time: start.elapsed().as_secs_f64(),
        optimizer_stats: part.stats,
    };
    Ok(tree)
}
