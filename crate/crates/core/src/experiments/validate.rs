//! Monte Carlo check of the sufficient shot count.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundError, BoundInputs};
use crate::rfe::{run_with_rng, KStrategy, RfeConfig, Sampler};
use crate::rng;
use crate::stats::{failure_test, FailureTest};

/// How the true phase is chosen in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    Uniform,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationSettings {
    pub trials: u64,
    pub seed: u64,
    /// Distinguishes independent cells sharing one seed.
    pub cell: u32,
    pub strategy: KStrategy,
    pub sampler: Sampler,
    pub theta: ThetaMode,
    pub confidence: f64,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            cell: 0,
            strategy: KStrategy::Maintext,
            sampler: Sampler::default(),
            theta: ThetaMode::Uniform,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    #[serde(rename = "J")]
    pub grid: u64,
    #[serde(rename = "K")]
    pub max_depth: u64,
    #[serde(rename = "M")]
    pub shots: u64,
    pub test: FailureTest,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.test.pass
    }
}

/// Runs `settings.trials` independent RFE trials at `M = sample_bound` and
/// tests the observed failure count against `δ`.
pub fn validate_bound(
    epsilon: f64,
    delta: f64,
    lambda: f64,
    settings: &ValidationSettings,
) -> Result<ValidationReport, BoundError> {
    let inputs = BoundInputs::new(epsilon, delta, lambda, settings.strategy)?;
    let m = bounds::sample_bound(&inputs)?;
    if m > u64::MAX as f64 {
        return Err(BoundError::Overflow { ln_m: m.ln() });
    }
    let shots = m as u64;
    let base = RfeConfig::new(0.0, epsilon, lambda, inputs.grid, inputs.max_depth, shots, settings.seed)
        .map_err(|e| BoundError::InvalidInputs(e.to_string()))?;
    let cell = u64::from(settings.cell) << 32;
    let failures: u64 = (0..settings.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::stream(settings.seed, cell | trial);
            let theta = match settings.theta {
                ThetaMode::Uniform => TAU * rng.random::<f64>(),
                ThetaMode::Fixed(t) => t,
            };
            let cfg = base.with_theta(theta);
            let (_, est) = run_with_rng(&cfg, settings.sampler, &mut rng)
                .expect("validated configuration");
            u64::from(!est.success)
        })
        .sum();
    Ok(ValidationReport {
        epsilon,
        delta,
        lambda,
        grid: inputs.grid,
        max_depth: inputs.max_depth,
        shots,
        test: failure_test(failures, settings.trials, delta, settings.confidence),
    })
}
