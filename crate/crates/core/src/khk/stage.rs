//! One `G = K0 K1 exp(h) K1^dag` stage and the helpers around it.

use num_complex::Complex64;

use super::config::{OptimizerConfig, Tolerances};
use super::optimizer::{minimize_named, CartanSolution};
use crate::error::{Error, Result};
use crate::involution::AxisInvolution;
use crate::linalg::{
    c, determinant, expm_skew, logm_unitary, nearest_special_unitary, principal_arg, unitarity_defect,
    AlgebraElement, ComplexMatrix, Coordinates,
};
use crate::pauli::{combination, labels, PauliWord};

/// Defect above which a `K` factor is pulled back onto `SU(N)`.
pub const REPAIR_THRESHOLD: f64 = 1e-12;

/// Result of [`khk_stage`]: `G = k0 k1 exp(h) k1^dag`.
#[derive(Debug, Clone)]
pub struct StageResult {
    pub k0: ComplexMatrix,
    pub k1: ComplexMatrix,
    pub h: AlgebraElement,
    pub m: AlgebraElement,
    pub objective_final: f64,
    pub optimizer_iters: usize,
    pub solution: CartanSolution,
}

impl StageResult {
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        Ok(&self.k0 * &self.k1 * expm_skew(&self.h.matrix)? * self.k1.adjoint())
    }
}

fn span_coordinates(x: &ComplexMatrix, span: &[PauliWord], name: &str) -> (Vec<f64>, ComplexMatrix, Coordinates) {
    let values: Vec<f64> = span.iter().map(|w| w.coordinate(x)).collect();
    let projected = combination(span, &values);
    let residual_norm = (x - &projected).norm();
    let coords = Coordinates { basis_name: name.to_owned(), labels: labels(span), values: values.clone(), residual_norm };
    (values, projected, coords)
}

/// `m = (1/2) log(Theta(g^dag) g)`, replaced by its projection onto `target_span`.
///
/// The projection residual is kept in `coords.residual_norm`. A residual above
/// `tol_subspace` means the input was not special unitary or the logarithm hit
/// the branch cut.
pub fn compute_m(
    g: &ComplexMatrix,
    inv: &AxisInvolution,
    target_span: &[PauliWord],
    tol_subspace: f64,
) -> Result<AlgebraElement> {
    let p = inv.apply(&g.adjoint())? * g;
    let log = logm_unitary(&p)?;
    let m = log.log * c(0.5, 0.0);
    let (_, projected, coords) = span_coordinates(&m, target_span, "target");
    if coords.residual_norm > tol_subspace {
        return Err(Error::SubspaceViolation {
            context: "involution logarithm",
            residual: coords.residual_norm,
            tol: tol_subspace,
        });
    }
    Ok(AlgebraElement { matrix: projected, coords: Some(coords) })
}

/// `g exp(-m)`.
pub fn residual_k(g: &ComplexMatrix, m: &AlgebraElement) -> Result<ComplexMatrix> {
    Ok(g * expm_skew(&(-&m.matrix))?)
}

/// Returns `k` unchanged when it is unitary to [`REPAIR_THRESHOLD`], else the
/// nearest special unitary and the scalar phase `theta` with `k ~ e^{i theta} repaired`.
pub(crate) fn repair(k: ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    if unitarity_defect(&k) <= REPAIR_THRESHOLD {
        return Ok((k, 0.0));
    }
    let dim = k.nrows() as f64;
    let (u, phase) = nearest_special_unitary(&k)?;
    Ok((u, phase / dim))
}

/// First stage: `G = k0 exp(m)`, `m = k1 h k1^dag`.
pub fn khk_stage(
    g: &ComplexMatrix,
    inv: &AxisInvolution,
    k_basis: &[PauliWord],
    m_span: &[PauliWord],
    cartan: &[PauliWord],
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<StageResult> {
    khk_stage_named(g, inv, k_basis, m_span, cartan, cfg, tol, "cartan")
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn khk_stage_named(
    g: &ComplexMatrix,
    inv: &AxisInvolution,
    k_basis: &[PauliWord],
    m_span: &[PauliWord],
    cartan: &[PauliWord],
    cfg: &OptimizerConfig,
    tol: &Tolerances,
    basis_name: &str,
) -> Result<StageResult> {
    let m = compute_m(g, inv, m_span, tol.subspace)?;
    let (k0, _) = repair(residual_k(g, &m)?)?;
    let sol = minimize_named(&m, k_basis, m_span, cartan, cfg, tol, basis_name)?;
    let (k1, _) = repair(sol.k1.clone())?;
    Ok(StageResult {
        k0,
        k1,
        h: sol.h.clone(),
        m,
        objective_final: sol.objective_final,
        optimizer_iters: sol.iterations,
        solution: sol,
    })
}

/// The two `Theta_X` logarithms of the secondary stage:
/// `m1` for `k00 k01` and `m2` for `k01^dag`.
pub fn secondary_m_pair(
    k00: &ComplexMatrix,
    k01: &ComplexMatrix,
    inv_x: &AxisInvolution,
    span_k1z: &[PauliWord],
    tol_subspace: f64,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let m1 = compute_m(&(k00 * k01), inv_x, span_k1z, tol_subspace)?;
    let m2 = compute_m(&k01.adjoint(), inv_x, span_k1z, tol_subspace)?;
    Ok((m1, m2))
}

/// Splits `m` into its part in `span(k1_span)` and the `z_word` remainder.
pub fn phase_split(
    m: &AlgebraElement,
    k1_span: &[PauliWord],
    z_word: &PauliWord,
    tol_subspace: f64,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let (_, hat, hat_coords) = span_coordinates(&m.matrix, k1_span, "K1");
    let alpha = z_word.coordinate(&m.matrix);
    let tilde = z_word.matrix() * c(alpha, 0.0);
    let residual = (&m.matrix - &hat - &tilde).norm();
    if residual > tol_subspace {
        return Err(Error::SubspaceViolation { context: "phase split", residual, tol: tol_subspace });
    }
    let tilde = AlgebraElement {
        matrix: tilde,
        coords: Some(Coordinates {
            basis_name: "Z".into(),
            labels: vec![z_word.label().to_owned()],
            values: vec![alpha],
            residual_norm: residual,
        }),
    };
    Ok((AlgebraElement { matrix: hat, coords: Some(hat_coords) }, tilde))
}

/// Defect of the `A (x) I2` pattern: odd/even cross terms plus the mismatch
/// between the even and odd sub-blocks.
pub fn tensor_identity_defect(k: &ComplexMatrix) -> f64 {
    let half = k.nrows() / 2;
    let mut acc = 0.0;
    for p in 0..half {
        for q in 0..half {
            acc += k[(2 * p + 1, 2 * q)].norm_sqr() + k[(2 * p, 2 * q + 1)].norm_sqr();
            acc += (k[(2 * p, 2 * q)] - k[(2 * p + 1, 2 * q + 1)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `k = e^{i phi} (sub (x) I2)` with `det sub = 1`; returns `(sub, phi)`.
pub fn extract_subunitary(k: &ComplexMatrix, tol_structure: f64) -> Result<(ComplexMatrix, f64)> {
    let defect = tensor_identity_defect(k);
    if defect > tol_structure {
        return Err(Error::NotTensorWithIdentity { defect });
    }
    let half = k.nrows() / 2;
    let sub = ComplexMatrix::from_fn(half, half, |p, q| k[(2 * p, 2 * q)]);
    let phi = principal_arg(determinant(&sub)) / half as f64;
    Ok((sub * Complex64::from_polar(1.0, -phi), phi))
}

/// `exp` of the top-left 2x2 block of `alpha u_{I..IZ}`: `diag(e^{i alpha/2}, e^{-i alpha/2})`.
pub fn extract_last_qubit(m_tilde: &AlgebraElement, tol_subspace: f64) -> Result<ComplexMatrix> {
    let z = crate::basis::z_word(m_tilde.dim().trailing_zeros() as usize);
    let alpha = z.coordinate(&m_tilde.matrix);
    let residual = (&m_tilde.matrix - z.matrix() * c(alpha, 0.0)).norm();
    if residual > tol_subspace {
        return Err(Error::SubspaceViolation { context: "last-qubit phase", residual, tol: tol_subspace });
    }
    let block = m_tilde.matrix.view((0, 0), (2, 2)).into_owned();
    expm_skew(&block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_kg_basis, z_word};
    use crate::linalg::{diag, identity, kron};
    use crate::metrics::haar_special_unitary;
    use crate::pauli::pauli_word;
    use std::f64::consts::PI;

    fn small_k(b: &crate::KGBasis, seed: f64, scale: f64) -> ComplexMatrix {
        let th: Vec<f64> = (0..b.k_set.len()).map(|i| scale * (seed + i as f64 * 1.7).sin()).collect();
        expm_skew(&combination(&b.k_set, &th)).unwrap()
    }

    #[test]
    fn compute_m_on_exponential_of_m() {
        let b = build_kg_basis(3).unwrap();
        let m0 = pauli_word("XXX").unwrap().matrix() * c(0.1, 0.0);
        let g = expm_skew(&m0).unwrap();
        let m = compute_m(&g, &AxisInvolution::theta_z(3), &b.m_set, 1e-3).unwrap();
        assert!((&m.matrix - &m0).norm() < 1e-12);
        assert!((m.coord("XXX").unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn compute_m_vanishes_on_fixed_group() {
        let b = build_kg_basis(3).unwrap();
        let g = small_k(&b, 0.3, 0.4);
        let m = compute_m(&g, &AxisInvolution::theta_z(3), &b.m_set, 1e-3).unwrap();
        assert!(m.norm() < 1e-12);
        assert!((residual_k(&g, &m).unwrap() - g).norm() < 1e-12);
    }

    #[test]
    fn residual_k_recovers_k() {
        let b = build_kg_basis(3).unwrap();
        let k = small_k(&b, 1.1, 0.3);
        let mc: Vec<f64> = (0..b.m_set.len()).map(|i| 0.05 * (i as f64).cos()).collect();
        let m = AlgebraElement::new(combination(&b.m_set, &mc));
        let g = &k * expm_skew(&m.matrix).unwrap();
        let inv = AxisInvolution::theta_z(3);
        let got_m = compute_m(&g, &inv, &b.m_set, 1e-3).unwrap();
        assert!((&got_m.matrix - &m.matrix).norm() < 1e-12);
        let got_k = residual_k(&g, &got_m).unwrap();
        assert!((got_k - &k).norm() < 1e-12);
        assert!(inv.fixedness_defect(&k) < 1e-12);
    }

    #[test]
    fn stage_reconstructs_haar_sample() {
        let b = build_kg_basis(3).unwrap();
        let g = haar_special_unitary(3, 11);
        let inv = AxisInvolution::theta_z(3);
        let st = khk_stage(&g, &inv, &b.k_set, &b.m_set, &b.cartan_h(), &Default::default(), &Default::default())
            .unwrap();
        assert!((st.reconstruct().unwrap() - &g).norm() < 1e-10);
        assert!(inv.fixedness_defect(&st.k0) < 1e-10);
        assert!(inv.fixedness_defect(&st.k1) < 1e-10);
        assert!(st.solution.subspace_residual < 1e-3);
    }

    #[test]
    fn stage_on_identity() {
        let b = build_kg_basis(3).unwrap();
        let st = khk_stage(
            &identity(8),
            &AxisInvolution::theta_z(3),
            &b.k_set,
            &b.m_set,
            &b.cartan_h(),
            &Default::default(),
            &Default::default(),
        )
        .unwrap();
        assert!(st.h.norm() < 1e-14);
        assert!((st.reconstruct().unwrap() - identity(8)).norm() < 1e-12);
    }

    #[test]
    fn secondary_logs() {
        let b = build_kg_basis(3).unwrap();
        let span = b.k1_with_z();
        let inv_x = AxisInvolution::theta_x(3);
        let (_, m2) = secondary_m_pair(&small_k(&b, 0.2, 0.1), &identity(8), &inv_x, &span, 1e-3).unwrap();
        assert!(m2.norm() < 1e-14);

        let wc: Vec<f64> = (0..b.k1_set.len()).map(|i| 0.02 * (i as f64 + 0.5).sin()).collect();
        let w = combination(&b.k1_set, &wc);
        let prod = expm_skew(&w).unwrap();
        let (m1, _) = secondary_m_pair(&prod, &identity(8), &inv_x, &span, 1e-3).unwrap();
        assert!((m1.matrix - w).norm() < 1e-12);
    }

    #[test]
    fn phase_split_cases() {
        let b = build_kg_basis(3).unwrap();
        let z = z_word(3);
        let m = AlgebraElement::new(z.matrix() * c(0.7, 0.0));
        let (hat, tilde) = phase_split(&m, &b.k1_set, &z, 1e-3).unwrap();
        assert!(hat.norm() < 1e-15 && (tilde.matrix - &m.matrix).norm() < 1e-15);

        let m = AlgebraElement::new(combination(&b.k1_set[..3], &[0.1, 0.2, 0.3]));
        let (hat, tilde) = phase_split(&m, &b.k1_set, &z, 1e-3).unwrap();
        assert!(tilde.norm() == 0.0 && (hat.matrix - &m.matrix).norm() < 1e-15);

        let k = combination(&b.k_set, &vec![0.3; b.k_set.len()]);
        let tilde = z.matrix() * c(0.4, 0.0);
        assert!((&k * &tilde - &tilde * &k).norm() < 1e-14);
    }

    #[test]
    fn subunitary_extraction() {
        let u = haar_special_unitary(2, 5);
        let (sub, phi) = extract_subunitary(&kron(&u, &identity(2)), 1e-8).unwrap();
        assert!((sub - &u).norm() < 1e-14 && phi.abs() < 1e-12);

        let shifted = kron(&(&u * Complex64::from_polar(1.0, PI / 4.0)), &identity(2));
        let (sub, phi) = extract_subunitary(&shifted, 1e-8).unwrap();
        assert!((sub - &u).norm() < 1e-12);
        assert!((phi - PI / 4.0).abs() < 1e-12);

        let bad = kron(&identity(2), &u);
        assert!(matches!(extract_subunitary(&bad, 1e-8), Err(Error::NotTensorWithIdentity { .. })));
    }

    #[test]
    fn last_qubit_extraction() {
        let z = z_word(3);
        let zero = AlgebraElement::zero(8);
        assert!((extract_last_qubit(&zero, 1e-3).unwrap() - identity(2)).norm() < 1e-15);
        let m = AlgebraElement::new(z.matrix() * c(PI, 0.0));
        let got = extract_last_qubit(&m, 1e-3).unwrap();
        assert!((got - diag(&[c(0.0, 1.0), c(0.0, -1.0)])).norm() < 1e-15);
        let bad = AlgebraElement::new(pauli_word("XXX").unwrap().matrix().clone());
        assert!(extract_last_qubit(&bad, 1e-3).is_err());
    }
}
