//! Batch decomposition of Haar samples with summary statistics.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::factor::{FactorKind, FactorTree};
use crate::khk::{decompose_full, DecomposeConfig};
use crate::linalg::{determinant, unitarity_defect};
use crate::metrics::haar_special_unitary;

/// Seed of the `index`-th sample of a batch.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

/// Outcome for one sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleResult {
    pub index: usize,
    pub seed: u64,
    pub approx_error: Option<f64>,
    pub mean_subspace_error: Option<f64>,
    pub seconds: f64,
    /// Worst `max(||K^dag K - I||, |det K - 1|)` over K-type factors.
    pub k_factor_defect: Option<f64>,
    /// Number of K-type factors with a nonzero subspace residual.
    pub misattributed_residuals: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BenchSummary {
    pub n: usize,
    pub count: usize,
    pub failures: usize,
    pub mean_approx_error: f64,
    pub std_approx_error: f64,
    pub mean_subspace_error: f64,
    pub std_subspace_error: f64,
    pub mean_seconds: f64,
    pub samples: Vec<SampleResult>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Largest unitarity or determinant defect over the K-type factors of `tree`,
/// and the number of K-type factors that carry a subspace residual.
pub fn k_factor_audit(tree: &FactorTree) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut misattributed = 0;
    for f in &tree.factors {
        let payload = match &f.kind {
            FactorKind::SubUnitary { payload, .. } | FactorKind::LastQubit { payload, .. } => payload,
            _ => continue,
        };
        worst = worst.max(unitarity_defect(payload)).max((determinant(payload) - 1.0).norm());
        if f.subspace_error != 0.0 {
            misattributed += 1;
        }
    }
    (worst, misattributed)
}

fn run_one(n: usize, index: usize, seed: u64, cfg: &DecomposeConfig) -> SampleResult {
    let sample_seed = sample_seed(seed, index);
    let g = haar_special_unitary(n, sample_seed);
    let start = Instant::now();
    let sample_cfg = cfg.clone().with_seed(sample_seed);
    let outcome = decompose_full(&g, n, &sample_cfg);
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(tree) => {
            let (defect, misattributed) = k_factor_audit(&tree);
            SampleResult {
                index,
                seed: sample_seed,
                approx_error: Some(tree.report.approx_error),
                mean_subspace_error: Some(tree.report.mean_subspace_error()),
                seconds,
                k_factor_defect: Some(defect),
                misattributed_residuals: misattributed,
                error: None,
            }
        }
        Err(e) => SampleResult {
            index,
            seed: sample_seed,
            approx_error: None,
            mean_subspace_error: None,
            seconds,
            k_factor_defect: None,
            misattributed_residuals: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Decomposes `count` Haar samples of `SU(2^n)`. Failures are counted, not fatal.
pub fn run_benchmark(n: usize, count: usize, seed: u64, cfg: &DecomposeConfig, parallel: bool) -> BenchSummary {
    let samples: Vec<SampleResult> = if parallel {
        (0..count).into_par_iter().map(|i| run_one(n, i, seed, cfg)).collect()
    } else {
        (0..count).map(|i| run_one(n, i, seed, cfg)).collect()
    };
    let ea: Vec<f64> = samples.iter().filter_map(|s| s.approx_error).collect();
    let es: Vec<f64> = samples.iter().filter_map(|s| s.mean_subspace_error).collect();
    let secs: Vec<f64> = samples.iter().map(|s| s.seconds).collect();
    let (mean_approx_error, std_approx_error) = mean_std(&ea);
    let (mean_subspace_error, std_subspace_error) = mean_std(&es);
    BenchSummary {
        n,
        count,
        failures: samples.iter().filter(|s| s.error.is_some()).count(),
        mean_approx_error,
        std_approx_error,
        mean_subspace_error,
        std_subspace_error,
        mean_seconds: mean_std(&secs).0,
        samples,
    }
}

impl BenchSummary {
    /// Aligned text table, one header and one data row.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>3} {:>6} {:>12} {:>12} {:>12} {:>12} {:>9}",
            "n", "count", "mean E_a", "mean E_s", "std E_s", "mean sec", "failures"
        );
        let _ = writeln!(
            out,
            "{:>3} {:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.4} {:>9}",
            self.n,
            self.count,
            self.mean_approx_error,
            self.mean_subspace_error,
            self.std_subspace_error,
            self.mean_seconds,
            self.failures
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_batch() {
        let s = run_benchmark(3, 0, 7, &DecomposeConfig::default(), true);
        assert_eq!(s.count, 0);
        assert_eq!(s.failures, 0);
        assert_eq!(s.mean_approx_error, 0.0);
        assert_eq!(s.table().lines().count(), 2);
    }

    #[test]
    fn small_batch_is_reproducible() {
        let cfg = DecomposeConfig::default();
        let a = run_benchmark(3, 3, 5, &cfg, true);
        let b = run_benchmark(3, 3, 5, &cfg, false);
        assert_eq!(a.failures, 0);
        assert!(a.mean_approx_error < 1e-10);
        let ea: Vec<_> = a.samples.iter().map(|s| s.approx_error).collect();
        let eb: Vec<_> = b.samples.iter().map(|s| s.approx_error).collect();
        assert_eq!(ea, eb);
    }

    #[test]
    fn statistics() {
        assert_eq!(mean_std(&[]), (0.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
