//! # vital-core
//!
//! Desk-scale vision-tactile-language pipeline for physical property
//! inference: toy modality encoders project object images and tactile
//! frame sequences into a shared embedding space, the assembly stage
//! concatenates them with boundary markers and embedded text, a backend
//! (deterministic toy decoder, scripted fixture, or a remote
//! chat-completion service) produces a structured property rating, and
//! the evaluation stage scores the ratings against instrument ground
//! truth with tie-aware Spearman rank correlation and permutation
//! p-values.
//!
//! Module map:
//! - [`numerics`] — dense matrices, MLP forward pass, softmax,
//!   sinusoidal positional encodings, seeded init, gradient checker
//! - [`encoders`] — region/frame featurization, vision and tactile
//!   encoders, boundary tokens
//! - [`assembly`] — byte tokenizer, token embedding, multimodal
//!   sequence assembly
//! - [`backend`] — the `Backend` trait plus ToyLM, scripted, and
//!   remote implementations
//! - [`prompting`] — rating scales, two-phase prompt builder,
//!   strict/lenient response parser
//! - [`evaluation`] — ranks, Spearman rho, permutation p-values,
//!   report rendering
//! - [`pipeline`] — manifest ingestion, frame sampling, end-to-end run
//!   orchestration

pub mod assembly;
pub mod backend;
pub mod encoders;
pub mod error;
pub mod evaluation;
pub mod numerics;
pub mod pipeline;
pub mod prompting;

pub use error::{CoreError, Result};
pub use prompting::Property;
