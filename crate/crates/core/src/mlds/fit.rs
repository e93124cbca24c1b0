use super::likelihood::ResponseTally;
use super::optimize::{minimize, Options};
use super::types::{PerceptualScale, TrialResponse, SEQUENCE_LEN};
use super::MldsError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Number of free increments; the last increment is pinned to `exp(0)`.
const FREE_INCREMENTS: usize = SEQUENCE_LEN - 2;
const N_PARAMS: usize = FREE_INCREMENTS + 1;
const INITIAL_SIGMA: f64 = 0.2;
const MIN_INCREMENT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Absolute change in log-likelihood that ends an optimisation run.
    pub ll_tolerance: f64,
    /// Infinity norm of the gradient that ends an optimisation run.
    pub grad_tolerance: f64,
    pub n_restarts: usize,
    pub rng_seed: u64,
    /// Fewest responses accepted for a fit.
    pub min_responses: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ll_tolerance: 1e-8,
            grad_tolerance: 1e-8,
            n_restarts: 5,
            rng_seed: 0,
            min_responses: 35,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), MldsError> {
        if self.max_iterations < 1 {
            return Err(MldsError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.ll_tolerance.is_nan() || self.ll_tolerance <= 0.0 {
            return Err(MldsError::InvalidConfig("ll_tolerance must be > 0".into()));
        }
        if self.grad_tolerance.is_nan() || self.grad_tolerance < 0.0 {
            return Err(MldsError::InvalidConfig("grad_tolerance must be >= 0".into()));
        }
        if self.n_restarts < 1 {
            return Err(MldsError::InvalidConfig("n_restarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub scale: PerceptualScale,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations_used: usize,
}

/// Maps unconstrained parameters to an anchored, monotone scale.
///
/// `params[..5]` are log increments (the sixth increment is fixed at 1) and
/// `params[5]` is `ln σ`. Cumulative sums divided by their total keep the
/// scale non-decreasing with `ψ₀ = 0` and `ψ₆ = 1` exactly.
fn decode(params: &[f64]) -> ([f64; SEQUENCE_LEN], [f64; SEQUENCE_LEN - 1], f64) {
    let mut increments = [1.0; SEQUENCE_LEN - 1];
    for (inc, u) in increments.iter_mut().zip(&params[..FREE_INCREMENTS]) {
        *inc = u.exp();
    }
    let total: f64 = increments.iter().sum();
    let mut psi = [0.0; SEQUENCE_LEN];
    let mut running = 0.0;
    for i in 1..SEQUENCE_LEN - 1 {
        running += increments[i - 1];
        psi[i] = running / total;
    }
    psi[SEQUENCE_LEN - 1] = 1.0;
    (psi, increments, params[FREE_INCREMENTS].exp())
}

/// Negative log-likelihood and its gradient in the unconstrained space.
fn objective(tally: &ResponseTally, params: &[f64]) -> (f64, Vec<f64>) {
    let (psi, increments, sigma) = decode(params);
    let ll = tally.log_likelihood_at(&psi, sigma);
    let (d_psi, d_sigma) = tally.gradient_at(&psi, sigma);
    let total: f64 = increments.iter().sum();

    let mut grad = vec![0.0; N_PARAMS];
    for (m, g) in grad.iter_mut().take(FREE_INCREMENTS).enumerate() {
        // ∂ψᵢ/∂uₘ = dₘ (1[m < i] − ψᵢ) / D with increments indexed from 0
        let mut acc = 0.0;
        for i in 1..SEQUENCE_LEN - 1 {
            let below = if m < i { 1.0 } else { 0.0 };
            acc += d_psi[i] * (below - psi[i]);
        }
        *g = -acc * increments[m] / total;
    }
    grad[FREE_INCREMENTS] = -d_sigma * sigma;
    (-ll, grad)
}

fn initial_points(config: &FitConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let jitter = Normal::new(0.0, 0.5).expect("valid normal");
    let log_sigma = Normal::new(INITIAL_SIGMA.ln(), 1.0).expect("valid normal");
    let mut starts = Vec::with_capacity(config.n_restarts);
    let mut linear = vec![0.0; N_PARAMS];
    linear[FREE_INCREMENTS] = INITIAL_SIGMA.ln();
    starts.push(linear);
    for _ in 1..config.n_restarts {
        let mut p: Vec<f64> = (0..FREE_INCREMENTS).map(|_| jitter.sample(&mut rng)).collect();
        p.push(log_sigma.sample(&mut rng));
        starts.push(p);
    }
    starts
}

/// Maximum-likelihood fit of a perceptual scale to pooled responses.
///
/// Runs a quasi-Newton ascent from the linear scale and from
/// `n_restarts - 1` seeded perturbations of it, keeping the best. The
/// result is bit-identical for identical responses and configuration.
///
/// A fit whose increments collapse below `1e-9` is clamped and returned
/// with `converged = false`; an error is returned only when no restart
/// produced a finite likelihood.
pub fn fit_mlds(responses: &[TrialResponse], config: &FitConfig) -> Result<FitResult, MldsError> {
    config.validate()?;
    if responses.is_empty() || responses.len() < config.min_responses {
        return Err(MldsError::InsufficientData(format!(
            "{} responses, at least {} required",
            responses.len(),
            config.min_responses.max(1)
        )));
    }
    let tally = ResponseTally::from_responses(responses)?;
    if let Some(pos) = tally.covered_positions().iter().position(|c| !c) {
        return Err(MldsError::InsufficientData(format!(
            "sequence position {pos} never appears in a response"
        )));
    }

    let opts = Options {
        max_iterations: config.max_iterations,
        value_tolerance: config.ll_tolerance,
        grad_tolerance: config.grad_tolerance,
    };
    let mut best: Option<super::optimize::Outcome> = None;
    for start in initial_points(config) {
        let outcome = minimize(|p| objective(&tally, p), start, &opts);
        if !outcome.value.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| outcome.value < b.value) {
            best = Some(outcome);
        }
    }
    let best = best.ok_or(MldsError::NonConvergence)?;

    let (mut psi, increments, sigma) = decode(&best.x);
    let mut converged = best.converged;
    let total: f64 = increments.iter().sum();
    if increments.iter().any(|d| d / total < MIN_INCREMENT) {
        let clamped: Vec<f64> = increments.iter().map(|d| (d / total).max(MIN_INCREMENT)).collect();
        let norm: f64 = clamped.iter().sum();
        let mut running = 0.0;
        for i in 1..SEQUENCE_LEN - 1 {
            running += clamped[i - 1];
            psi[i] = running / norm;
        }
        converged = false;
    }
    let log_likelihood = tally.log_likelihood_at(&psi, sigma);
    let scale = PerceptualScale::new(psi, sigma)?.with_responses(tally.total());
    Ok(FitResult {
        scale,
        log_likelihood,
        converged,
        iterations_used: best.iterations,
    })
}
