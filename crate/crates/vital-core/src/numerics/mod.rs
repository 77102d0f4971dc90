//! Self-contained numeric substrate: dense matrices, MLP forward pass,
//! softmax, sinusoidal positional encodings, seeded initialization, and
//! a finite-difference gradient checker.
//!
//! Everything here is pure and double-precision; values are immutable
//! after construction and safe to share across threads.

mod gradcheck;
mod matrix;
mod mlp;
mod pe;
mod rng;

pub use gradcheck::finite_diff_check;
pub use matrix::{softmax_rows, Matrix};
pub(crate) use matrix::softmax_in_place;
pub use mlp::{mlp_forward, mlp_jvp, Activation, MlpLayer, MlpParams};
pub use pe::sinusoidal_pe;
pub use rng::{derive_seed, seeded_init, SeededRng};
