use serde::{Deserialize, Serialize};

/// How the optimizer obtains gradients of the Killing objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientMode {
    /// Closed form `c_N Re tr([v, K^dag m K] k_j)`.
    Analytic,
    /// Central differences with step `gradient_step`.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Quasi-Newton iterations per restart.
    pub max_iters: usize,
    /// Step for central differences when `gradient` is [`GradientMode::FiniteDifference`].
    pub gradient_step: f64,
    /// Normalized gradient norm at which the quasi-Newton phase hands over to
    /// the Gauss-Newton polish. The normalized gradient equals the relative
    /// commutator `||[v, h]|| / (||v|| ||h||)`.
    pub convergence_tol: f64,
    /// Extra random starts after the first one at `theta = 0`.
    pub restarts: usize,
    pub seed: u64,
    pub gradient: GradientMode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 3000,
            gradient_step: 1e-6,
            convergence_tol: 1e-3,
            restarts: 4,
            seed: 0,
            gradient: GradientMode::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Per-level `||G - product||_F`.
    pub reconstruct: f64,
    /// Relative commutator `||[h, v]|| / (||h|| ||v||)`.
    pub cartan: f64,
    /// Largest projection residual accepted before failing.
    pub subspace: f64,
    /// Block-pattern defect accepted by sub-unitary extraction.
    pub structure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { reconstruct: 1e-9, cartan: 1e-8, subspace: 1e-3, structure: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub optimizer: OptimizerConfig,
    pub tol: Tolerances,
    /// Run the four sub-decompositions of a level on the rayon pool.
    pub parallel: bool,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { optimizer: OptimizerConfig::default(), tol: Tolerances::default(), parallel: true }
    }
}

impl DecomposeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.optimizer.seed = seed;
        self
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if self.max_iters == 0 || !positive(self.gradient_step) || !positive(self.convergence_tol) {
            return Err(crate::Error::InvalidInput(
                "optimizer max_iters, gradient_step and convergence_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Seed for the `index`-th child of a computation seeded with `seed` (splitmix64 step).
pub(crate) fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
