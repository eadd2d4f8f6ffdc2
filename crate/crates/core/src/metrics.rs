//! Error metrics and Haar sampling.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorTree;
use crate::linalg::{determinant, AlgebraElement, ComplexMatrix};
use crate::pauli::PauliWord;

/// Per-decomposition diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `E_a = ||G - product||_F`.
    pub approx_error: f64,
    /// `E_s` of every Cartan factor, by label.
    pub subspace_errors: Vec<(String, f64)>,
    /// Seconds.
    pub wall_time: f64,
    /// Optimizer iterations per Cartan conjugation, by factor label.
    pub optimizer_stats: Vec<(String, usize)>,
}

impl DecompositionReport {
    /// Mean `E_s` over all Cartan factors; zero when there are none.
    pub fn mean_subspace_error(&self) -> f64 {
        if self.subspace_errors.is_empty() {
            return 0.0;
        }
        self.subspace_errors.iter().map(|(_, e)| e).sum::<f64>() / self.subspace_errors.len() as f64
    }

    pub fn max_subspace_error(&self) -> f64 {
        self.subspace_errors.iter().map(|(_, e)| *e).fold(0.0, f64::max)
    }
}

/// `||g - product(tree)||_F`.
pub fn approx_error(g: &ComplexMatrix, tree: &FactorTree) -> Result<f64> {
    if g.nrows() != tree.dim() || g.ncols() != tree.dim() {
        return Err(Error::DimMismatch { expected: tree.dim(), found: g.nrows() });
    }
    Ok((g - tree.product()?).norm())
}

/// `E_s(h) = (1/m) sqrt(sum_i ||[h, h_i]||_F^2)` over the `m` Cartan words.
pub fn subspace_error(h: &AlgebraElement, cartan: &[PauliWord]) -> f64 {
    subspace_error_raw(&h.matrix, cartan)
}

pub fn subspace_error_raw(h: &ComplexMatrix, cartan: &[PauliWord]) -> f64 {
    if cartan.is_empty() {
        return 0.0;
    }
    let sum: f64 = cartan.iter().map(|w| w.commutator_with(h).norm_squared()).sum();
    sum.sqrt() / cartan.len() as f64
}

fn ginibre(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    // row-major draw order so the stream does not depend on storage layout
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        entries.push(Complex64::new(re, im));
    }
    ComplexMatrix::from_row_slice(dim, dim, &entries)
}

/// Haar-distributed unitary of size `dim`: QR of a Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary_dim(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut q, r) = ginibre(dim, &mut rng).qr().unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Haar-distributed element of `SU(2^n)`, deterministic in `seed`.
pub fn haar_special_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let dim = 1usize << n;
    let u = haar_unitary_dim(dim, seed);
    let det = determinant(&u);
    let root = Complex64::from_polar(1.0, -det.arg() / dim as f64);
    u * root
}

/// Element of `su(2^n)` with Gaussian Pauli coordinates, rescaled to Frobenius norm `norm`.
pub fn random_algebra_element(n: usize, norm: f64, seed: u64) -> Result<ComplexMatrix> {
    let words = crate::basis::kg_basis(n)?.full();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = words.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = crate::pauli::combination(&words, &coeffs);
    let scale = norm / x.norm();
    Ok(x * Complex64::new(scale, 0.0))
}
