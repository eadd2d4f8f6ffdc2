//! Truncated Baker-Campbell-Hausdorff series and the series-based `G = e^k e^m`
//! split, kept as a comparison baseline for the involution method.
//!
//! Dynkin's form of `log(e^a e^b)` is a sum over words in `{a, b}`. Grouping
//! by word, the coefficient of the right-nested bracket of a word `w` of
//! length `L` is
//!
//! ```text
//! (1/L) sum_n (-1)^(n-1)/n sum over splits of w into n blocks a^r b^s (r+s > 0) of prod 1/(r! s!)
//! ```
//!
//! which a small dynamic program evaluates per word.

use crate::basis::KGBasis;
use crate::error::{Error, Result};
use crate::involution::AxisInvolution;
use crate::khk::compute_m;
use crate::linalg::{expm_skew, logm_special_unitary, AlgebraElement, ComplexMatrix};
use crate::pauli::{combination, PauliWord};
use nalgebra::{DMatrix, DVector};

pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct BchConfig {
    pub truncation_order: usize,
    /// Target Euclidean norm of the residual coordinate vector.
    pub root_tol: f64,
    pub max_root_iters: usize,
}

impl Default for BchConfig {
    fn default() -> Self {
        Self { truncation_order: 6, root_tol: 1e-12, max_root_iters: 100 }
    }
}

/// One term of the series: a word over `{a = false, b = true}` and its coefficient.
#[derive(Debug, Clone)]
struct Term {
    word: Vec<bool>,
    coeff: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// `Some((r, s))` if `w` is `a^r b^s`.
fn block_shape(w: &[bool]) -> Option<(usize, usize)> {
    let r = w.iter().take_while(|&&x| !x).count();
    if w[r..].iter().all(|&x| x) {
        Some((r, w.len() - r))
    } else {
        None
    }
}

fn word_coefficient(w: &[bool]) -> f64 {
    let len = w.len();
    // f[j][n]: weighted count of splits of w[..j] into n blocks
    let mut f = vec![vec![0.0; len + 1]; len + 1];
    f[0][0] = 1.0;
    for j in 1..=len {
        for i in 0..j {
            let Some((r, s)) = block_shape(&w[i..j]) else { continue };
            let weight = 1.0 / (factorial(r) * factorial(s));
            for n in 1..=j {
                f[j][n] += f[i][n - 1] * weight;
            }
        }
    }
    let sum: f64 = (1..=len).map(|n| if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64 * f[len][n]).sum();
    sum / len as f64
}

fn series_terms(order: usize) -> Vec<Term> {
    let mut out = Vec::new();
    for len in 1..=order {
        for bits in 0..(1u32 << len) {
            let word: Vec<bool> = (0..len).rev().map(|q| bits >> q & 1 == 1).collect();
            // the innermost bracket [x, x] vanishes
            if len >= 2 && word[len - 1] == word[len - 2] {
                continue;
            }
            let coeff = word_coefficient(&word);
            if coeff != 0.0 {
                out.push(Term { word, coeff });
            }
        }
    }
    out
}

fn cached_terms(order: usize) -> &'static [Term] {
    use std::sync::OnceLock;
    static TABLES: OnceLock<Vec<Vec<Term>>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_ORDER).map(series_terms).collect())[order]
}

/// Right-nested brackets `[w1, [w2, ... [w_{L-1}, w_L]]]`, sharing suffixes.
fn nested(word: &[bool], a: &ComplexMatrix, b: &ComplexMatrix, memo: &mut std::collections::HashMap<Vec<bool>, ComplexMatrix>) -> ComplexMatrix {
    if let Some(m) = memo.get(word) {
        return m.clone();
    }
    let head = if word[0] { b } else { a };
    let value = if word.len() == 1 {
        head.clone()
    } else {
        let tail = nested(&word[1..], a, b, memo);
        head * &tail - &tail * head
    };
    memo.insert(word.to_vec(), value.clone());
    value
}

fn bch_matrix(a: &ComplexMatrix, b: &ComplexMatrix, order: usize) -> Result<ComplexMatrix> {
    if order == 0 {
        return Err(Error::InvalidInput("truncation order must be at least 1".into()));
    }
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh { order, max: MAX_ORDER });
    }
    if a.shape() != b.shape() {
        return Err(Error::DimMismatch { expected: a.nrows(), found: b.nrows() });
    }
    let mut memo = std::collections::HashMap::new();
    let mut acc = ComplexMatrix::zeros(a.nrows(), a.ncols());
    for t in cached_terms(order) {
        acc += nested(&t.word, a, b, &mut memo) * crate::linalg::c(t.coeff, 0.0);
    }
    Ok(acc)
}

/// `log(e^a e^b)` truncated after total degree `order`.
pub fn truncated_bch(a: &AlgebraElement, b: &AlgebraElement, order: usize) -> Result<AlgebraElement> {
    Ok(AlgebraElement::new(bch_matrix(&a.matrix, &b.matrix, order)?))
}

fn project(x: &ComplexMatrix, words: &[PauliWord]) -> (Vec<f64>, ComplexMatrix) {
    let coords: Vec<f64> = words.iter().map(|w| w.coordinate(x)).collect();
    let m = combination(words, &coords);
    (coords, m)
}

/// The `k`- and `m`-space parts of the truncated series for `(k, m)`.
pub fn split_pk_pm(
    k: &AlgebraElement,
    m: &AlgebraElement,
    basis: &KGBasis,
    order: usize,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let t = bch_matrix(&k.matrix, &m.matrix, order)?;
    let (_, pk) = project(&t, &basis.k_set);
    let (_, pm) = project(&t, &basis.m_set);
    Ok((AlgebraElement::new(pk), AlgebraElement::new(pm)))
}

#[derive(Debug, Clone)]
pub struct BchSplit {
    pub k: AlgebraElement,
    pub m: AlgebraElement,
    /// `||g - e^k e^m||_F` with `k` projected onto the `k`-span.
    pub residual: f64,
    /// Norm of the series residual coordinates at the returned `m`.
    pub root_residual: f64,
    pub iterations: usize,
}

struct RootProblem<'a> {
    log_g: ComplexMatrix,
    target: DVector<f64>,
    basis: &'a KGBasis,
    order: usize,
}

impl RootProblem<'_> {
    /// `P_m(proj_k Q(m), m) - proj_m(log g)`, with `Q(m) = BCH(log g, -m)`.
    fn residual(&self, mc: &[f64]) -> Result<DVector<f64>> {
        let m = combination(&self.basis.m_set, mc);
        let q = bch_matrix(&self.log_g, &(-&m), self.order)?;
        let (_, k) = project(&q, &self.basis.k_set);
        let joint = bch_matrix(&k, &m, self.order)?;
        let (pm, _) = project(&joint, &self.basis.m_set);
        Ok(DVector::from_vec(pm) - &self.target)
    }

    fn jacobian(&self, mc: &[f64], r0: &DVector<f64>) -> Result<DMatrix<f64>> {
        let dim = mc.len();
        let mut jac = DMatrix::zeros(r0.len(), dim);
        let mut x = mc.to_vec();
        for j in 0..dim {
            let h = 1e-7 * mc[j].abs().max(1e-2);
            x[j] = mc[j] + h;
            let rp = self.residual(&x)?;
            x[j] = mc[j] - h;
            let rm = self.residual(&x)?;
            x[j] = mc[j];
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        Ok(jac)
    }
}

/// Series-based split `g = e^k e^m`, `k` in the `k`-span, `m` in the `m`-span.
///
/// Converges only when `log g` is well inside the series' convergence region;
/// outside it the root search stalls and [`Error::RootSearchFailed`] is returned.
pub fn solve_bch_split(g: &ComplexMatrix, basis: &KGBasis, cfg: &BchConfig) -> Result<BchSplit> {
    if g.nrows() != basis.dim() {
        return Err(Error::DimMismatch { expected: basis.dim(), found: g.nrows() });
    }
    let log_g = logm_special_unitary(g)?;
    let (target, _) = project(&log_g, &basis.m_set);
    let target = DVector::from_vec(target);
    let problem = RootProblem { log_g, target: target.clone(), basis, order: cfg.truncation_order };

    let mut mc: Vec<f64> = target.iter().copied().collect();
    let mut r = problem.residual(&mc)?;
    let mut lambda = 1e-6;
    let mut iterations = 0;
    while r.norm() > cfg.root_tol && iterations < cfg.max_root_iters {
        iterations += 1;
        let jac = problem.jacobian(&mc, &r)?;
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let rhs = -(&jt * &r);
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = normal.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * (1.0 + normal[(i, i)]);
            }
            let Some(step) = damped.lu().solve(&rhs) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = mc.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let rt = problem.residual(&trial)?;
            if rt.norm() < r.norm() {
                mc = trial;
                r = rt;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if r.norm() > cfg.root_tol {
        return Err(Error::RootSearchFailed { iters: iterations, residual: r.norm() });
    }
    let m = combination(&basis.m_set, &mc);
    let k_full = logm_special_unitary(&(g * expm_skew(&(-&m))?))?;
    let (_, k) = project(&k_full, &basis.k_set);
    let residual = (g - expm_skew(&k)? * expm_skew(&m)?).norm();
    Ok(BchSplit {
        k: AlgebraElement::new(k),
        m: AlgebraElement::new(m),
        residual,
        root_residual: r.norm(),
        iterations,
    })
}

/// The same split through `m = (1/2) log(Theta_Z(g^dag) g)`, with `k` and the
/// residual computed as in [`solve_bch_split`] so the two are comparable.
pub fn involution_split(g: &ComplexMatrix, basis: &KGBasis, tol_subspace: f64) -> Result<BchSplit> {
    if g.nrows() != basis.dim() {
        return Err(Error::DimMismatch { expected: basis.dim(), found: g.nrows() });
    }
    let m = compute_m(g, &AxisInvolution::theta_z(basis.n), &basis.m_set, tol_subspace)?.matrix;
    let k_full = logm_special_unitary(&(g * expm_skew(&(-&m))?))?;
    let (_, k) = project(&k_full, &basis.k_set);
    let residual = (g - expm_skew(&k)? * expm_skew(&m)?).norm();
    Ok(BchSplit { k: AlgebraElement::new(k), m: AlgebraElement::new(m), residual, root_residual: 0.0, iterations: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_kg_basis;
    use crate::linalg::{c, commutator, diag, identity, logm_unitary};
    use crate::pauli::pauli_word;

    fn el(m: ComplexMatrix) -> AlgebraElement {
        AlgebraElement::new(m)
    }

    fn random_element(words: &[PauliWord], seed: f64, norm: f64) -> ComplexMatrix {
        let coeffs: Vec<f64> = (0..words.len()).map(|i| (seed + 1.37 * i as f64).sin()).collect();
        let m = combination(words, &coeffs);
        let s = norm / m.norm();
        m * c(s, 0.0)
    }

    #[test]
    fn low_order_coefficients() {
        let find = |w: &[bool]| cached_terms(4).iter().find(|t| t.word == w).map(|t| t.coeff);
        assert_eq!(find(&[false]), Some(1.0));
        assert_eq!(find(&[true]), Some(1.0));
        // [a,b]/2 appears as 1/4 [a,b] - 1/4 [b,a]
        assert!((find(&[false, true]).unwrap() - 0.25).abs() < 1e-15);
        assert!((find(&[true, false]).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn order_two_closed_form() {
        let a = pauli_word("XY").unwrap().matrix() * c(0.3, 0.0);
        let b = pauli_word("ZI").unwrap().matrix() * c(-0.7, 0.0);
        let got = truncated_bch(&el(a.clone()), &el(b.clone()), 2).unwrap().matrix;
        let want = &a + &b + commutator(&a, &b) * c(0.5, 0.0);
        assert!((got - want).norm() < 1e-15);
        let swapped = truncated_bch(&el(b.clone()), &el(a.clone()), 2).unwrap().matrix;
        let want = &a + &b + commutator(&b, &a) * c(0.5, 0.0);
        assert!((swapped - want).norm() < 1e-15);
    }

    #[test]
    fn commuting_case_collapses() {
        let a = diag(&[c(0.0, 0.3), c(0.0, -0.1), c(0.0, -0.2), c(0.0, 0.0)]);
        let b = diag(&[c(0.0, -0.5), c(0.0, 0.4), c(0.0, 0.2), c(0.0, -0.1)]);
        for order in 1..=MAX_ORDER {
            let got = truncated_bch(&el(a.clone()), &el(b.clone()), order).unwrap().matrix;
            assert_eq!(got, &a + &b);
        }
    }

    #[test]
    fn order_limits() {
        let z = el(ComplexMatrix::zeros(2, 2));
        assert!(matches!(truncated_bch(&z, &z, 9), Err(Error::OrderTooHigh { .. })));
        assert!(truncated_bch(&z, &z, 0).is_err());
    }

    #[test]
    fn matches_exact_logarithm_for_small_inputs() {
        let b3 = build_kg_basis(3).unwrap();
        let all = b3.full();
        let a = random_element(&all, 0.1, 0.05);
        let b = random_element(&all, 2.3, 0.05);
        let exact = logm_unitary(&(expm_skew(&a).unwrap() * expm_skew(&b).unwrap())).unwrap().log;
        let got = truncated_bch(&el(a), &el(b), 6).unwrap().matrix;
        assert!((got - exact).norm() < 1e-8);
    }

    #[test]
    fn split_properties() {
        let b3 = build_kg_basis(3).unwrap();
        let k = random_element(&b3.k_set, 0.4, 0.3);
        let m = random_element(&b3.m_set, 1.4, 0.3);
        let (pk, pm) = split_pk_pm(&el(k.clone()), &el(ComplexMatrix::zeros(8, 8)), &b3, 4).unwrap();
        assert!((pk.matrix - &k).norm() < 1e-15 && pm.norm() < 1e-15);

        let (pk, pm) = split_pk_pm(&el(k.clone()), &el(m.clone()), &b3, 2).unwrap();
        let want_m = &m + commutator(&k, &m) * c(0.5, 0.0);
        assert!((&pm.matrix - want_m).norm() < 1e-14);
        let total = bch_matrix(&k, &m, 2).unwrap();
        assert!((pk.matrix + pm.matrix - total).norm() < 1e-12);
    }

    #[test]
    fn recovers_small_m() {
        let b3 = build_kg_basis(3).unwrap();
        let m0 = random_element(&b3.m_set, 0.9, 0.04);
        let g = expm_skew(&m0).unwrap();
        let split = solve_bch_split(&g, &b3, &BchConfig::default()).unwrap();
        assert!((split.m.matrix - &m0).norm() < 1e-8);
        assert!(split.residual < 1e-8);
    }

    #[test]
    fn commuting_parts_split_at_order_one() {
        let b3 = build_kg_basis(3).unwrap();
        // XXI is in k, XXX in m, and the two commute
        let k = pauli_word("XXI").unwrap().matrix() * c(0.02, 0.0);
        let m = pauli_word("XXX").unwrap().matrix() * c(0.03, 0.0);
        assert!(commutator(&k, &m).norm() < 1e-15);
        let g = expm_skew(&(&k + &m)).unwrap();
        let cfg = BchConfig { truncation_order: 1, ..Default::default() };
        let split = solve_bch_split(&g, &b3, &cfg).unwrap();
        assert!((split.m.matrix - &m).norm() < 1e-12);
        assert!((split.k.matrix - &k).norm() < 1e-12);
    }

    #[test]
    fn involution_split_matches_series_near_identity() {
        let b3 = build_kg_basis(3).unwrap();
        let x = random_element(&b3.full(), 0.4, 0.03);
        let g = expm_skew(&x).unwrap();
        let exact = involution_split(&g, &b3, 1e-3).unwrap();
        let series = solve_bch_split(&g, &b3, &BchConfig::default()).unwrap();
        assert!(exact.residual < 1e-12);
        assert!((exact.m.matrix - series.m.matrix).norm() < 1e-9);
        assert!(matches!(involution_split(&identity(4), &b3, 1e-3), Err(Error::DimMismatch { .. })));
    }
}
