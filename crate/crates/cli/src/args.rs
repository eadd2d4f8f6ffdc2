use std::path::PathBuf;

use cartan_core::{DecomposeConfig, OptimizerConfig, Tolerances};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cartan", version, about = "Recursive Cartan decomposition of SU(2^n) matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a matrix file into a factor-tree file.
    Decompose(DecomposeArgs),
    /// Check a factor tree against a matrix.
    Verify(VerifyArgs),
    /// Decompose a batch of Haar-random matrices and summarize the errors.
    Bench(BenchArgs),
    /// Print the Khaneja-Glaser basis sets.
    Basis(BasisArgs),
    /// Compare the truncated-series split with the involution split.
    CompareBch(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Tuning {
    /// Largest projection residual accepted in a subspace.
    #[arg(long, default_value_t = Tolerances::default().subspace)]
    pub tol_subspace: f64,
    /// Largest accepted ||G - product||_F.
    #[arg(long, default_value_t = Tolerances::default().reconstruct)]
    pub tol_reconstruct: f64,
    /// Random restarts of the Cartan optimizer after the first start.
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    pub restarts: usize,
    /// Quasi-Newton iterations per start.
    #[arg(long, default_value_t = OptimizerConfig::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl Tuning {
    pub fn config(&self) -> DecomposeConfig {
        let mut cfg = DecomposeConfig::default().with_seed(self.seed);
        cfg.tol.subspace = self.tol_subspace;
        cfg.tol.reconstruct = self.tol_reconstruct;
        cfg.optimizer.restarts = self.restarts;
        cfg.optimizer.max_iters = self.max_iters;
        cfg.parallel = self.threads != 1;
        cfg
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("--tol-subspace", self.tol_subspace), ("--tol-reconstruct", self.tol_reconstruct)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        if self.max_iters == 0 {
            return Err("--max-iters must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Matrix file (`n` and row-major `entries`).
    pub input: PathBuf,
    /// Where to write the factor tree.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Replace the input by its nearest special unitary; the removed phase goes into the tree.
    #[arg(long)]
    pub repair: bool,
    /// Unitarity and determinant tolerance for inputs taken as-is.
    #[arg(long, default_value_t = 1e-8)]
    pub ingest_tol: f64,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Factor-tree file.
    pub tree: PathBuf,
    /// Matrix file the tree should reproduce.
    pub matrix: PathBuf,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Also write the full summary as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Series truncation order.
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    /// Use `exp(x)` with random `||x||_F = radius` instead of Haar samples.
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub tuning: Tuning,
}
