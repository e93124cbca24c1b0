//! Maximum-likelihood difference scaling.
//!
//! A trial shows two pairs of frames from one seven-step sequence,
//! `(i, j)` and `(k, l)`, and the observer reports which pair looks more
//! alike. With perceptual values `ψ`, `Δ₁ = |ψⱼ − ψᵢ|` and
//! `Δ₂ = |ψₗ − ψₖ|`, the decision model is
//!
//! ```text
//! P(FirstPairMoreSimilar) = Φ((Δ₂ − Δ₁) / σ)
//! ```
//!
//! where `σ` is the observer noise factor. Fits pool every response of a
//! class pair with equal weight.

mod fit;
mod likelihood;
mod optimize;
mod types;
mod validity;

pub use fit::{fit_mlds, FitConfig, FitResult};
pub use likelihood::{
    grad_log_likelihood, log_likelihood, pair_log_prob, ResponseTally, ScaleGradient,
};
pub use types::{Choice, ClassPair, PerceptualScale, Quadruple, TrialResponse, SEQUENCE_LEN};
pub use validity::{
    ordering_check, six_point_check, OrderingReport, SixPointReport, ORDERING_THRESHOLD,
    SIX_POINT_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MldsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("invalid perceptual scale: {0}")]
    InvalidScale(String),
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("every restart diverged")]
    NonConvergence,
}
