//! The `K H K` engine: involution logarithms, Cartan conjugation, the
//! secondary `Theta_X` split, and the recursion.

mod config;
mod level;
mod optimizer;
mod stage;

pub use config::{DecomposeConfig, GradientMode, OptimizerConfig, Tolerances};
pub use level::{check_special_unitary, decompose_full, decompose_one_level, LevelDecomposition, DET_TOL};
pub use optimizer::{build_v, conjugate, minimize_to_cartan, objective, CartanSolution};
pub use stage::{
    compute_m, extract_last_qubit, extract_subunitary, khk_stage, phase_split, residual_k, secondary_m_pair,
    tensor_identity_defect, StageResult, REPAIR_THRESHOLD,
};
