//! Dense complex matrix backbone.
//!
//! Everything here works on square `DMatrix<Complex64>` values whose size is a
//! power of two. Norms are Frobenius throughout, and the trace inner product
//! is `<a, b> = Re tr(a^dag b)`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Default structural tolerance, multiplied by the matrix dimension.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Eigenvalues closer than this to -1 make the principal logarithm ambiguous.
pub const BRANCH_TOL: f64 = 1e-8;

/// Smallest singular value accepted by [`nearest_special_unitary`].
pub const SINGULAR_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(dim, dim)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Kronecker product `a (x) b`; the first factor indexes the most significant bits.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `a (x) I_k` without materializing the identity.
pub fn kron_identity(a: &ComplexMatrix, k: usize) -> ComplexMatrix {
    if k == 1 {
        return a.clone();
    }
    let (r, cc) = a.shape();
    let mut out = ComplexMatrix::zeros(r * k, cc * k);
    for i in 0..r {
        for j in 0..cc {
            let v = a[(i, j)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for t in 0..k {
                out[(i * k + t, j * k + t)] = v;
            }
        }
    }
    out
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// `Re tr(a^dag b)`.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.norm()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.trace()
}

pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn skew_defect(a: &ComplexMatrix) -> f64 {
    (a + a.adjoint()).norm()
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_defect(u) <= tol
}

pub fn is_skew_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_square() && skew_defect(a) <= tol
}

pub fn is_traceless(a: &ComplexMatrix, tol: f64) -> bool {
    a.trace().norm() <= tol
}

/// Skew-Hermitian part `(a - a^dag) / 2`.
pub fn skew_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a - a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn determinant(a: &ComplexMatrix) -> Complex64 {
    a.clone().determinant()
}

/// Principal argument in `(-pi, pi]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

fn check_square(a: &ComplexMatrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::DimMismatch { expected: a.nrows(), found: a.ncols() });
    }
    Ok(a.nrows())
}

/// `V diag(f(lambda)) V^dag` for a unitary `V`.
fn reassemble(v: &ComplexMatrix, diag: &[Complex64]) -> ComplexMatrix {
    let mut scaled = v.clone();
    for (j, d) in diag.iter().enumerate() {
        for x in scaled.column_mut(j).iter_mut() {
            *x *= d;
        }
    }
    scaled * v.adjoint()
}

/// Exponential of a skew-Hermitian matrix through the Hermitian eigenproblem
/// of `-i a`. The result is unitary to working precision.
pub fn expm_skew(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = check_square(a)?;
    expm_skew_tol(a, STRUCTURE_TOL * dim as f64)
}

pub fn expm_skew_tol(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let dim = check_square(a)?;
    let defect = skew_defect(a);
    if defect > tol {
        return Err(Error::NotSkewHermitian { defect });
    }
    if dim == 1 {
        return Ok(ComplexMatrix::from_element(1, 1, Complex64::new(0.0, a[(0, 0)].im).exp()));
    }
    let h = a * (-I);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let phases: Vec<Complex64> =
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
    Ok(reassemble(&eig.eigenvectors, &phases))
}

/// Principal logarithm of a unitary, with a flag for eigenvalues near -1.
#[derive(Debug, Clone)]
pub struct UnitaryLog {
    pub log: ComplexMatrix,
    pub branch_ambiguous: bool,
}

/// Schur-diagonalizes a unitary: returns eigenvectors and eigenvalues.
fn unitary_eigen(u: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let dim = u.nrows();
    if dim == 1 {
        return Ok((identity(1), vec![u[(0, 0)]]));
    }
    // machine-epsilon deflation stalls on round-off around repeated eigenvalues
    // (e.g. Q Q^dag); loosen it a step at a time
    let schur = [f64::EPSILON, 1e-14, 1e-12]
        .iter()
        .find_map(|&eps| Schur::try_new(u.clone(), eps, 2_000))
        .ok_or(Error::NoConvergence("Schur iteration"))?;
    let (q, t) = schur.unpack();
    let diag = (0..dim).map(|i| t[(i, i)]).collect();
    Ok((q, diag))
}

/// Principal (skew-Hermitian) logarithm of a unitary matrix, `arg` in `(-pi, pi]`.
pub fn logm_unitary(u: &ComplexMatrix) -> Result<UnitaryLog> {
    let dim = check_square(u)?;
    logm_unitary_tol(u, STRUCTURE_TOL * dim as f64)
}

pub fn logm_unitary_tol(u: &ComplexMatrix, tol: f64) -> Result<UnitaryLog> {
    check_square(u)?;
    let defect = unitarity_defect(u);
    if defect > tol {
        return Err(Error::NotUnitary { defect });
    }
    let (q, eigs) = unitary_eigen(u)?;
    let mut branch_ambiguous = false;
    let logs: Vec<Complex64> = eigs
        .iter()
        .map(|&z| {
            let z = z / z.norm();
            if (z + 1.0).norm() < BRANCH_TOL {
                branch_ambiguous = true;
            }
            Complex64::new(0.0, principal_arg(z))
        })
        .collect();
    let log = skew_part(&reassemble(&q, &logs));
    Ok(UnitaryLog { log, branch_ambiguous })
}

/// Traceless logarithm of a special unitary: the principal logarithm with the
/// `m` eigenphases nearest the cut moved by `2 pi`, where `2 pi i m` is the
/// principal trace. Exponentiates back to `u`, unlike the traceless part of
/// the principal logarithm, which loses a central phase.
pub fn logm_special_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = check_square(u)?;
    let defect = unitarity_defect(u);
    if defect > STRUCTURE_TOL * dim as f64 {
        return Err(Error::NotUnitary { defect });
    }
    let (q, eigs) = unitary_eigen(u)?;
    let mut phases: Vec<f64> = eigs.iter().map(|&z| principal_arg(z / z.norm())).collect();
    let winding = (phases.iter().sum::<f64>() / std::f64::consts::TAU).round() as i64;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    if winding > 0 {
        for &j in order.iter().rev().take(winding as usize) {
            phases[j] -= std::f64::consts::TAU;
        }
    } else {
        for &j in order.iter().take(winding.unsigned_abs() as usize) {
            phases[j] += std::f64::consts::TAU;
        }
    }
    let logs: Vec<Complex64> = phases.iter().map(|&p| Complex64::new(0.0, p)).collect();
    Ok(skew_part(&reassemble(&q, &logs)))
}

/// Eigenvalue phases of a unitary, sorted ascending in `(-pi, pi]`.
pub fn eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let (_, eigs) = unitary_eigen(u)?;
    let mut phases: Vec<f64> = eigs.into_iter().map(principal_arg).collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// Largest circular distance in a greedy matching of two phase multisets.
/// Returns `f64::INFINITY` if the sizes differ.
pub fn phase_multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let circ = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(std::f64::consts::TAU);
        d.min(std::f64::consts::TAU - d)
    };
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, &y)| (j, circ(x, y)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Coordinates of a projection onto a trace-orthogonal span.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coords: Vec<f64>,
    pub residual: ComplexMatrix,
}

/// Projects `x` onto the span of a trace-orthogonal basis.
///
/// Fails with [`Error::NonOrthogonalBasis`] when any normalized off-diagonal
/// Gram entry exceeds the structural tolerance.
pub fn project_onto_span(x: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<Projection> {
    let norms: Vec<f64> = basis.iter().map(|b| inner(b, b)).collect();
    for i in 0..basis.len() {
        if basis[i].shape() != x.shape() {
            return Err(Error::DimMismatch { expected: x.nrows(), found: basis[i].nrows() });
        }
        for j in (i + 1)..basis.len() {
            let overlap = inner(&basis[i], &basis[j]) / (norms[i] * norms[j]).sqrt();
            if overlap.abs() > STRUCTURE_TOL * x.nrows() as f64 {
                return Err(Error::NonOrthogonalBasis { i, j, overlap });
            }
        }
    }
    let mut residual = x.clone();
    let coords = basis
        .iter()
        .zip(&norms)
        .map(|(b, &nb)| {
            let ci = if nb > 0.0 { inner(b, x) / nb } else { 0.0 };
            residual -= b * Complex64::new(ci, 0.0);
            ci
        })
        .collect();
    Ok(Projection { coords, residual })
}

/// Polar unitary factor of `a`, rescaled to determinant one.
///
/// Returns the special unitary and the phase `arg det` that was removed.
pub fn nearest_special_unitary(a: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let dim = check_square(a)?;
    let svd = SVD::new(a.clone(), true, true);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if sigma_min.is_nan() || sigma_min < SINGULAR_TOL {
        return Err(Error::Singular { sigma_min });
    }
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^dag");
    let w = u * vt;
    let phase = principal_arg(determinant(&w));
    let fix = Complex64::from_polar(1.0, -phase / dim as f64);
    Ok((w * fix, phase))
}

/// Builds a diagonal matrix.
pub fn diag(entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

/// A traceless skew-Hermitian matrix, optionally carrying coordinates in a
/// named basis.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub matrix: ComplexMatrix,
    pub coords: Option<Coordinates>,
}

/// Real coordinates of an algebra element in a labeled basis, plus the
/// Frobenius norm of whatever the basis did not capture.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub basis_name: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub residual_norm: f64,
}

impl Coordinates {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.values[i])
    }
}

impl AlgebraElement {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self { matrix, coords: None }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn coord(&self, label: &str) -> Option<f64> {
        self.coords.as_ref().and_then(|c| c.get(label))
    }

    /// Membership in `su(N)` within `tol`.
    pub fn is_member(&self, tol: f64) -> bool {
        is_skew_hermitian(&self.matrix, tol) && is_traceless(&self.matrix, tol)
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}
