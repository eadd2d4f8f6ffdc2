//! Conjugating an `m`-element into the Cartan subalgebra.
//!
//! The search runs on the group directly: the iterate is a unitary `K`, and a
//! step with coordinates `xi` moves to `K exp(sum xi_j k_j)`. Since
//! `d/dxi_j <v, exp(-X) M exp(X)> = Re tr([v, M] k_j)` at `xi = 0`, the
//! gradient never needs the differential of the exponential.
//!
//! A BFGS phase minimizes the Killing objective until the relative commutator
//! `||[v, K^dag m K]|| / (||v|| ||m||)` falls below `convergence_tol`. From
//! there a Gauss-Newton iteration drives the component of `K^dag m K`
//! orthogonal to the Cartan span to zero, which converges quadratically
//! because `k -> [h, k]` maps onto that complement at regular `h`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{GradientMode, OptimizerConfig, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{expm_skew, identity, AlgebraElement, ComplexMatrix, Coordinates};
use crate::pauli::{combination, labels, PauliWord};

const POLISH_ITERS: usize = 25;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

/// Outcome of one Cartan conjugation: `h = k1^dag m k1` in the Cartan span.
#[derive(Debug, Clone)]
pub struct CartanSolution {
    pub k1: ComplexMatrix,
    /// Projection of `h_raw` onto the Cartan span, with coordinates.
    pub h: AlgebraElement,
    /// `k1^dag m k1` before projection.
    pub h_raw: ComplexMatrix,
    /// `||[h_raw, v]|| / (||h_raw|| ||v||)`.
    pub relative_commutator: f64,
    /// `||h_raw - h||_F`.
    pub subspace_residual: f64,
    pub objective_final: f64,
    pub iterations: usize,
    /// Index of the start that produced this solution (0 is `theta = 0`).
    pub start: usize,
}

/// `v = sum_i pi^(i-1) u_i` over a canonically ordered Cartan basis.
pub fn build_v(cartan: &[PauliWord]) -> AlgebraElement {
    let weights: Vec<f64> = (0..cartan.len()).map(|i| std::f64::consts::PI.powi(i as i32)).collect();
    let mut v = AlgebraElement::new(combination(cartan, &weights));
    v.coords = Some(Coordinates {
        basis_name: "cartan".into(),
        labels: labels(cartan),
        values: weights,
        residual_norm: 0.0,
    });
    v
}

/// Killing normalization on `su(N)`: `B(a, b) = 2N tr(ab)`.
fn killing_scale(dim: usize) -> f64 {
    2.0 * dim as f64
}

/// `Re tr(a b)`, without forming the product.
fn re_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `c_N Re tr(v K^dag m0 K)` with `K = exp(sum theta_j k_j)`.
pub fn objective(v: &AlgebraElement, m0: &AlgebraElement, theta: &[f64], k_basis: &[PauliWord]) -> Result<f64> {
    let k = expm_skew(&combination(k_basis, theta))?;
    let moved = k.adjoint() * &m0.matrix * &k;
    Ok(killing_scale(v.dim()) * re_trace_product(&v.matrix, &moved))
}

struct Problem<'a> {
    m0: &'a ComplexMatrix,
    v: ComplexMatrix,
    v_norm: f64,
    k_basis: &'a [PauliWord],
    perp: Vec<PauliWord>,
    cartan: &'a [PauliWord],
    scale: f64,
}

/// Iterate state: the unitary and its derived quantities.
struct Point {
    k: ComplexMatrix,
    moved: ComplexMatrix,
    value: f64,
}

impl Problem<'_> {
    fn point(&self, k: ComplexMatrix) -> Point {
        let moved = k.adjoint() * self.m0 * &k;
        let value = self.scale * re_trace_product(&self.v, &moved);
        Point { k, moved, value }
    }

    fn step(&self, k: &ComplexMatrix, xi: &[f64]) -> Result<ComplexMatrix> {
        Ok(k * expm_skew(&combination(self.k_basis, xi))?)
    }

    fn commutator(&self, moved: &ComplexMatrix) -> ComplexMatrix {
        &self.v * moved - moved * &self.v
    }

    fn relative_commutator(&self, moved: &ComplexMatrix) -> f64 {
        let denom = self.v_norm * moved.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.commutator(moved).norm() / denom
        }
    }

    fn gradient(&self, p: &Point, mode: GradientMode, h: f64) -> Result<DVector<f64>> {
        match mode {
            GradientMode::Analytic => {
                let comm = self.commutator(&p.moved);
                // Re tr(k_j C) = -<k_j, C> because k_j is skew-Hermitian
                Ok(DVector::from_iterator(
                    self.k_basis.len(),
                    self.k_basis.iter().map(|w| -self.scale * w.inner(&comm)),
                ))
            }
            GradientMode::FiniteDifference => {
                let mut g = DVector::zeros(self.k_basis.len());
                let mut xi = vec![0.0; self.k_basis.len()];
                for j in 0..xi.len() {
                    xi[j] = h;
                    let plus = self.point(self.step(&p.k, &xi)?).value;
                    xi[j] = -h;
                    let minus = self.point(self.step(&p.k, &xi)?).value;
                    xi[j] = 0.0;
                    g[j] = (plus - minus) / (2.0 * h);
                }
                Ok(g)
            }
        }
    }

    fn bfgs(&self, start: Point, cfg: &OptimizerConfig) -> Result<(Point, usize)> {
        let dim = self.k_basis.len();
        let mut p = start;
        let mut g = self.gradient(&p, cfg.gradient, cfg.gradient_step)?;
        let mut hinv = DMatrix::identity(dim, dim) * (0.5 / g.norm().max(f64::MIN_POSITIVE));
        let mut iters = 0;
        while iters < cfg.max_iters {
            if self.relative_commutator(&p.moved) <= cfg.convergence_tol {
                break;
            }
            iters += 1;
            let mut d = -(&hinv * &g);
            let mut slope = g.dot(&d);
            if slope >= 0.0 {
                hinv = DMatrix::identity(dim, dim) * (0.5 / g.norm());
                d = -(&hinv * &g);
                slope = g.dot(&d);
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let xi: Vec<f64> = d.iter().map(|x| x * t).collect();
                let trial = self.point(self.step(&p.k, &xi)?);
                if trial.value <= p.value + ARMIJO * t * slope {
                    accepted = Some(trial);
                    break;
                }
                t *= 0.5;
            }
            let Some(next) = accepted else { break };
            let g_next = self.gradient(&next, cfg.gradient, cfg.gradient_step)?;
            let s = &d * t;
            let y = &g_next - &g;
            let sy = s.dot(&y);
            if sy > 1e-12 * s.norm() * y.norm() {
                if iters == 1 {
                    hinv = DMatrix::identity(dim, dim) * (sy / y.dot(&y));
                }
                let rho = 1.0 / sy;
                let hy = &hinv * &y;
                let yhy = y.dot(&hy);
                // H+ = H - rho (H y s^T + s y^T H) + (rho^2 y^T H y + rho) s s^T
                hinv -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
                hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
            }
            p = next;
            g = g_next;
        }
        Ok((p, iters))
    }

    fn perp_coords(&self, x: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(self.perp.len(), self.perp.iter().map(|w| w.coordinate(x)))
    }

    /// Gauss-Newton on the off-Cartan part of `K^dag m0 K`, minimum-norm steps.
    fn polish(&self, start: Point) -> Result<(Point, usize)> {
        let mut p = start;
        let mut r = self.perp_coords(&p.moved);
        let floor = 1e-15 * p.moved.norm().max(1e-300);
        let mut iters = 0;
        while iters < POLISH_ITERS && r.norm() > floor {
            iters += 1;
            let mut jac = DMatrix::zeros(self.perp.len(), self.k_basis.len());
            for (j, w) in self.k_basis.iter().enumerate() {
                let col = self.perp_coords(&w.commutator_with(&p.moved));
                jac.set_column(j, &col);
            }
            let svd = jac.svd(true, true);
            let smax = svd.singular_values.max();
            let delta = match svd.solve(&(-&r), smax * 1e-10) {
                Ok(d) => d,
                Err(_) => break,
            };
            let xi: Vec<f64> = delta.iter().copied().collect();
            let trial = self.point(self.step(&p.k, &xi)?);
            let r_trial = self.perp_coords(&trial.moved);
            if r_trial.norm() >= r.norm() {
                break;
            }
            p = trial;
            r = r_trial;
        }
        Ok((p, iters))
    }

    /// BFGS down to the hand-off threshold, then polish. Near degenerate
    /// Cartan elements the needed rotation is not small and the polish stalls;
    /// descent then resumes with a threshold 100x tighter, down to `target`.
    fn descend(&self, start: Point, cfg: &OptimizerConfig, target: f64) -> Result<(Point, usize)> {
        let mut p = start;
        let mut iterations = 0;
        let mut handoff = cfg.convergence_tol;
        loop {
            let budget = OptimizerConfig {
                convergence_tol: handoff,
                max_iters: cfg.max_iters.saturating_sub(iterations),
                ..cfg.clone()
            };
            let (q, descent_iters) = self.bfgs(p, &budget)?;
            let (q, polish_iters) = self.polish(q)?;
            iterations += descent_iters + polish_iters;
            p = q;
            if self.relative_commutator(&p.moved) <= target || handoff <= target || iterations >= cfg.max_iters {
                return Ok((p, iterations));
            }
            handoff = (handoff * 1e-2).max(target);
        }
    }

    fn finish(&self, p: Point, iterations: usize, start: usize, basis_name: &str) -> CartanSolution {
        let coords: Vec<f64> = self.cartan.iter().map(|w| w.coordinate(&p.moved)).collect();
        let h = combination(self.cartan, &coords);
        let subspace_residual = (&p.moved - &h).norm();
        let relative_commutator = self.relative_commutator(&p.moved);
        CartanSolution {
            h: AlgebraElement {
                matrix: h,
                coords: Some(Coordinates {
                    basis_name: basis_name.to_owned(),
                    labels: labels(self.cartan),
                    values: coords,
                    residual_norm: subspace_residual,
                }),
            },
            h_raw: p.moved,
            k1: p.k,
            relative_commutator,
            subspace_residual,
            objective_final: p.value,
            iterations,
            start,
        }
    }
}

/// Finds `k1 in exp(span k_basis)` with `k1^dag m0 k1` in the span of `cartan`.
///
/// `m_span` is the `-1` eigenspace containing `m0` and `cartan`; its words
/// outside `cartan` define the residual that the polish phase cancels.
/// Fails with [`Error::OptimizerFailed`] carrying the best attempt when no
/// start reaches `tol.cartan` with a projection residual within `tol.subspace`.
pub fn minimize_to_cartan(
    m0: &AlgebraElement,
    k_basis: &[PauliWord],
    m_span: &[PauliWord],
    cartan: &[PauliWord],
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<CartanSolution> {
    minimize_named(m0, k_basis, m_span, cartan, cfg, tol, "cartan")
}

pub(crate) fn minimize_named(
    m0: &AlgebraElement,
    k_basis: &[PauliWord],
    m_span: &[PauliWord],
    cartan: &[PauliWord],
    cfg: &OptimizerConfig,
    tol: &Tolerances,
    basis_name: &str,
) -> Result<CartanSolution> {
    cfg.validate()?;
    if cartan.is_empty() || k_basis.is_empty() {
        return Err(Error::InvalidInput("Cartan and k bases must be nonempty".into()));
    }
    let dim = m0.dim();
    let v = build_v(cartan).matrix;
    let problem = Problem {
        m0: &m0.matrix,
        v_norm: v.norm(),
        v,
        k_basis,
        perp: m_span.iter().filter(|w| !cartan.contains(w)).cloned().collect(),
        cartan,
        scale: killing_scale(dim),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<CartanSolution> = None;
    for start in 0..=cfg.restarts {
        let k_start = if start == 0 {
            identity(dim)
        } else {
            let theta: Vec<f64> = (0..k_basis.len()).map(|_| rng.random_range(-0.5..=0.5)).collect();
            expm_skew(&combination(k_basis, &theta))?
        };
        let (p, iterations) = problem.descend(problem.point(k_start), cfg, tol.cartan)?;
        let sol = problem.finish(p, iterations, start, basis_name);
        let ok = sol.relative_commutator <= tol.cartan && sol.subspace_residual <= tol.subspace;
        if ok {
            return Ok(sol);
        }
        if best.as_ref().map_or(true, |b| sol.relative_commutator < b.relative_commutator) {
            best = Some(sol);
        }
    }
    Err(Error::OptimizerFailed { best: Box::new(best.expect("at least one start")) })
}

/// Adjoint action `k^dag x k`.
pub fn conjugate(k: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    k.adjoint() * x * k
}
