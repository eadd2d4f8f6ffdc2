//! Recursive Cartan (Khaneja-Glaser) factorization of special unitary matrices
//! on `n >= 3` qubits.
//!
//! A matrix `G` in `SU(2^n)` is split as
//!
//! ```text
//! G = e^{i phi} (K0 (x) I) e^{f0} (K1 (x) I) (I..I (x) Kt0) e^{h0} (K2 (x) I) e^{f1} (K3 (x) I) (I..I (x) Kt1)
//! ```
//!
//! where the `K` factors live in `SU(2^(n-1))`, the `Kt` factors in `SU(2)`,
//! and `h0`, `f0`, `f1` in Abelian Cartan subalgebras built from Pauli words.
//! The `K` factors are decomposed again until only two-qubit blocks remain.
//!
//! The group-to-algebra step uses the involution identity
//! `exp(2m) = Theta(G^dag) G` instead of truncated series, so every logarithm
//! that is taken is the principal one and lands in the right subspace.

pub mod basis;
pub mod bch;
pub mod benchmark;
pub mod error;
pub mod factor;
pub mod involution;
pub mod io;
pub mod khk;
pub mod linalg;
pub mod metrics;
pub mod pauli;

pub use basis::{build_kg_basis, kg_basis, order_cartan_basis, CartanKind, KGBasis};
pub use error::{Error, Result};
pub use factor::{Factor, FactorKind, FactorTree};
pub use involution::{Axis, AxisInvolution};
pub use khk::{decompose_full, decompose_one_level, DecomposeConfig, OptimizerConfig, Tolerances};
pub use linalg::{AlgebraElement, ComplexMatrix};
pub use metrics::{approx_error, haar_special_unitary, subspace_error, DecompositionReport};
pub use pauli::{pauli_word, PauliWord};
