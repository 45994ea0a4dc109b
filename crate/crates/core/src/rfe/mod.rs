//! Randomized Fourier estimation.
//!
//! Each shot picks a depth `k` uniformly from `{0,…,K−1}` and an offset `φ`
//! uniformly from `[0, 2π)`, then draws `z = ±1` from the Hadamard-test
//! outcome distribution `½(1 + z·e^{−λk}·cos(kθ+φ))`. The shot contributes
//! `2z·e^{−i2πkj/J}·e^{−iφ}` to every Fourier bin `j`, and the estimate of
//! `θ` is `2π/J` times the bin of largest averaged magnitude.

mod sampler;
mod spectrum;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sampler::Sampler;
pub use spectrum::FourierSpectrum;

use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RfeError {
    #[error("phase must lie in [0, 2π), got {0}")]
    InvalidPhase(f64),
    #[error("accuracy must be positive and finite, got {0}")]
    InvalidAccuracy(f64),
    #[error("decay rate must be non-negative, got {0}")]
    InvalidDecay(f64),
    #[error("Fourier grid J = {0} must be at least 2")]
    GridTooSmall(u64),
    #[error("maximal depth K = {k} must satisfy 2 ≤ K ≤ J (J = {j})")]
    InvalidDepth { k: u64, j: u64 },
    #[error("grid resolution 2π/J = {resolution} is coarser than the accuracy {epsilon}")]
    ResolutionTooCoarse { resolution: f64, epsilon: f64 },
    #[error("campaign has no shots (M = 0)")]
    EmptyCampaign,
}

/// How the maximal depth `K` is derived from `(ε, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KStrategy {
    /// `max{10·⌊1/(10(2λ + 1.5ε/2π))⌋, 2}`.
    #[default]
    Maintext,
    /// `max{⌊(λ + ε/2π)^{−1}⌋, 2}`, a harmonic mean of `1/λ` and `J`.
    Harmonic,
}

impl KStrategy {
    /// Maximal depth for `(ε, λ)`, clamped to the grid size `J = ⌈2π/ε⌉`.
    pub fn depth(self, epsilon: f64, lambda: f64) -> u64 {
        let raw = match self {
            KStrategy::Maintext => {
                let inner = 1.0 / (10.0 * (2.0 * lambda + 1.5 * epsilon / TAU));
                10 * floor_to_u64(inner)
            }
            KStrategy::Harmonic => floor_to_u64(1.0 / (lambda + epsilon / TAU)),
        };
        raw.max(2).min(grid_size(epsilon))
    }
}

impl std::str::FromStr for KStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "maintext" => Ok(KStrategy::Maintext),
            "harmonic" => Ok(KStrategy::Harmonic),
            other => Err(format!("unknown K strategy `{other}` (expected maintext|harmonic)")),
        }
    }
}

fn floor_to_u64(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.floor() as u64
    }
}

/// Maximal circuit depth from the main-text rule with `a = 2`, `b = 1.5`,
/// `c = 10`, clamped to `J`.
#[allow(non_snake_case)]
pub fn choose_K(epsilon: f64, lambda: f64) -> u64 {
    KStrategy::Maintext.depth(epsilon, lambda)
}

/// `J = ⌈2π/ε⌉`. Values within a relative `1e-9` of an integer snap to it,
/// so `ε = 2π/64` gives `J = 64` rather than 65.
pub fn grid_size(epsilon: f64) -> u64 {
    let x = TAU / epsilon;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest.max(1.0) as u64
    } else {
        x.ceil() as u64
    }
}

/// Circular distance between two phases.
pub fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Parameters of one RFE run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfeConfig {
    pub theta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    #[serde(rename = "J")]
    pub grid: u64,
    #[serde(rename = "K")]
    pub max_depth: u64,
    #[serde(rename = "M")]
    pub shots: u64,
    pub seed: u64,
}

impl RfeConfig {
    pub fn new(
        theta: f64,
        epsilon: f64,
        lambda: f64,
        grid: u64,
        max_depth: u64,
        shots: u64,
        seed: u64,
    ) -> Result<Self, RfeError> {
        let cfg = Self {
            theta,
            epsilon,
            lambda,
            grid,
            max_depth,
            shots,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Derives `J = ⌈2π/ε⌉` and `K` from `strategy`.
    pub fn from_accuracy(
        theta: f64,
        epsilon: f64,
        lambda: f64,
        shots: u64,
        seed: u64,
        strategy: KStrategy,
    ) -> Result<Self, RfeError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(RfeError::InvalidAccuracy(epsilon));
        }
        if !(lambda >= 0.0) {
            return Err(RfeError::InvalidDecay(lambda));
        }
        let grid = grid_size(epsilon);
        let depth = strategy.depth(epsilon, lambda);
        Self::new(theta, epsilon, lambda, grid, depth, shots, seed)
    }

    pub fn validate(&self) -> Result<(), RfeError> {
        if !(self.theta >= 0.0 && self.theta < TAU) {
            return Err(RfeError::InvalidPhase(self.theta));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(RfeError::InvalidAccuracy(self.epsilon));
        }
        if !(self.lambda >= 0.0) {
            return Err(RfeError::InvalidDecay(self.lambda));
        }
        if self.grid < 2 {
            return Err(RfeError::GridTooSmall(self.grid));
        }
        if self.max_depth < 2 || self.max_depth > self.grid {
            return Err(RfeError::InvalidDepth {
                k: self.max_depth,
                j: self.grid,
            });
        }
        let resolution = TAU / self.grid as f64;
        if resolution > self.epsilon * (1.0 + 1e-12) {
            return Err(RfeError::ResolutionTooCoarse {
                resolution,
                epsilon: self.epsilon,
            });
        }
        Ok(())
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }
}

/// One Hadamard-test draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub k: u64,
    pub phi: f64,
    pub z: i8,
}

/// Decoded phase and success flag of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_hat: f64,
    pub peak_index: u64,
    pub success: bool,
}

/// `P(z = +1 | k, φ) = ½(1 + e^{−λk}·cos(kθ+φ))`.
pub fn outcome_probability(k: u64, phi: f64, theta: f64, lambda: f64) -> f64 {
    let k = k as f64;
    let decay = if lambda == 0.0 { 1.0 } else { (-lambda * k).exp() };
    0.5 * (1.0 + decay * (k * theta + phi).cos())
}

/// Samples `z ∈ {−1, +1}` with one uniform compare.
pub fn draw_outcome<R: Rng + ?Sized>(k: u64, phi: f64, theta: f64, lambda: f64, rng: &mut R) -> i8 {
    let u: f64 = rng.random();
    if u < outcome_probability(k, phi, theta, lambda) {
        1
    } else {
        -1
    }
}

pub fn draw_shot<R: Rng + ?Sized>(config: &RfeConfig, rng: &mut R) -> ShotRecord {
    let k = rng.random_range(0..config.max_depth);
    let phi = TAU * rng.random::<f64>();
    let z = draw_outcome(k, phi, config.theta, config.lambda, rng);
    ShotRecord { k, phi, z }
}

/// Single-shot Fourier estimate `2z·e^{−i2πkj/J}·e^{−iφ}`.
pub fn shot_estimate(shot: &ShotRecord, j: u64, grid: u64) -> Complex64 {
    let m = ((shot.k % grid) * (j % grid)) % grid;
    let angle = -TAU * m as f64 / grid as f64 - shot.phi;
    Complex64::from_polar(2.0 * f64::from(shot.z), angle)
}

/// Decodes `θ̂ = 2π·j*/J` from the spectrum and scores it against `θ`.
pub fn decode(spectrum: &FourierSpectrum, theta: f64, epsilon: f64) -> EstimateResult {
    let peak = spectrum.peak_index();
    let theta_hat = TAU * peak as f64 / spectrum.grid() as f64;
    EstimateResult {
        theta_hat,
        peak_index: peak as u64,
        success: wrapped_distance(theta_hat, theta) <= epsilon,
    }
}

/// Runs trial 0 of `config` with per-shot sampling.
pub fn run_rfe(config: &RfeConfig) -> Result<(FourierSpectrum, EstimateResult), RfeError> {
    run_rfe_trial(config, 0, Sampler::PerShot)
}

/// Runs one trial on the random stream `(config.seed, trial)`.
pub fn run_rfe_trial(
    config: &RfeConfig,
    trial: u64,
    sampler: Sampler,
) -> Result<(FourierSpectrum, EstimateResult), RfeError> {
    let mut rng = rng::stream(config.seed, trial);
    run_with_rng(config, sampler, &mut rng)
}

/// Runs `config` on a caller-supplied random source.
pub fn run_with_rng<R: Rng + ?Sized>(
    config: &RfeConfig,
    sampler: Sampler,
    rng: &mut R,
) -> Result<(FourierSpectrum, EstimateResult), RfeError> {
    config.validate()?;
    if config.shots == 0 {
        return Err(RfeError::EmptyCampaign);
    }
    let depth_sums = sampler.depth_sums(config, rng);
    let spectrum =
        FourierSpectrum::from_depth_sums(&depth_sums, config.shots, config.grid as usize);
    let estimate = decode(&spectrum, config.theta, config.epsilon);
    Ok((spectrum, estimate))
}

/// `exp(z) − 1` for complex `z` without cancellation near zero.
fn complex_exp_m1(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

/// Reduces an angle to `[−π, π)`.
fn reduce_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

/// Expected Fourier estimate per bin under exponential decay:
/// `(1/K)·(1 − e^{K(iy−λ)})/(1 − e^{iy−λ})` with `y = θ − 2πj/J`.
pub fn expected_spectrum(theta: f64, grid: u64, max_depth: u64, lambda: f64) -> Vec<Complex64> {
    (0..grid)
        .map(|j| expected_bin(theta - TAU * j as f64 / grid as f64, max_depth, lambda))
        .collect()
}

fn expected_bin(offset: f64, max_depth: u64, lambda: f64) -> Complex64 {
    let w = Complex64::new(-lambda, reduce_angle(offset));
    if w.re == 0.0 && w.im == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let k = max_depth as f64;
    complex_exp_m1(w * k) / (complex_exp_m1(w) * k)
}

/// Expected noiseless-shape signal `g(k) = e^{−λk}·e^{ikθ}` for `k = 0..K`.
pub fn expected_signal(theta: f64, max_depth: u64, lambda: f64) -> Vec<Complex64> {
    (0..max_depth)
        .map(|k| {
            let k = k as f64;
            Complex64::from_polar((-lambda * k).exp(), k * theta)
        })
        .collect()
}

/// `|f_j|²` in closed form,
/// `(e^{−(K−1)λ}/K²)·(cosh Kλ − cos Ky)/(cosh λ − cos y)`, evaluated as
/// `[(1−a^K)² + 4a^K sin²(Ky/2)] / (K²[(1−a)² + 4a sin²(y/2)])` with `a = e^{−λ}`.
pub fn closed_form_peak_power(theta: f64, j: u64, grid: u64, max_depth: u64, lambda: f64) -> f64 {
    peak_power_at_offset(theta - TAU * j as f64 / grid as f64, max_depth, lambda)
}

/// `|f|²` as a function of the frequency offset `y = θ − 2πj/J`.
pub fn peak_power_at_offset(offset: f64, max_depth: u64, lambda: f64) -> f64 {
    let y = reduce_angle(offset);
    let k = max_depth as f64;
    let a = (-lambda).exp();
    let a_k = (-lambda * k).exp();
    let one_minus_a = -(-lambda).exp_m1();
    let one_minus_a_k = -(-lambda * k).exp_m1();
    let s_half = (0.5 * y).sin();
    let s_k_half = (0.5 * k * y).sin();
    let den = one_minus_a * one_minus_a + 4.0 * a * s_half * s_half;
    if den == 0.0 {
        return 1.0;
    }
    let num = one_minus_a_k * one_minus_a_k + 4.0 * a_k * s_k_half * s_k_half;
    num / (den * k * k)
}

/// Serializable record of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub config: RfeConfig,
    pub peak_index: u64,
    pub theta_hat: f64,
    pub success: bool,
    pub wallclock_ns: u128,
}
