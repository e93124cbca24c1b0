//! Perceptual-scale estimation toolkit.
//!
//! The crate turns pairs of pre-rendered object images into blended
//! seven-frame sequences, collects two-alternative forced-choice (2AFC)
//! responses over quadruples of sequence positions from machine, synthetic
//! or human observers, fits perceptual scales by maximum-likelihood
//! difference scaling (MLDS) and summarises them with a skewness statistic
//! whose rank correlation against a human reference gives the
//! Psychophysical-Score.
//!
//! Module map:
//!
//! - [`mlds`]: decision model, likelihood, fitting and validity checks.
//! - [`stimuli`]: grayscale, blur, alpha blending, Jaccard pair selection.
//! - [`observers`]: Gabor-bank and embedding-file machine observers,
//!   synthetic and random observers.
//! - [`trials`]: trial plans, machine sessions, response pooling.
//! - [`metrics`]: skewness, Spearman's rho, chi-squared null test,
//!   variance tables and the Brain-Score comparison.
//! - [`pipeline`]: directory-level orchestration shared by the CLI and
//!   the service.

pub mod doc;
pub mod jsonl;
pub mod metrics;
pub mod mlds;
pub mod normal;
pub mod observers;
pub mod pipeline;
pub mod stimuli;
pub mod trials;

pub use mlds::{
    fit_mlds, log_likelihood, Choice, ClassPair, FitConfig, FitResult, PerceptualScale, Quadruple,
    TrialResponse,
};
pub use stimuli::{GrayImage, InstanceSequence, ObjectMask, SequenceSpec};
