//! Physical-to-algorithmic noise chain.
//!
//! Maps surface-code architecture parameters to a logical error rate, treats
//! that rate as a single-qubit depolarizing probability, and derives the
//! trajectory-state statistics of a Pauli observable and the per-call signal
//! decay `λ` seen by the phase-estimation layer.
//!
//! Everything that raises a probability to a large power is evaluated in log
//! space, so exponents such as `N·D·k = 10⁸` do not flush to zero early.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("architecture prefactor A must be positive and finite, got {0}")]
    InvalidPrefactor(f64),
    #[error("architecture decay constant B must be positive and finite, got {0}")]
    InvalidDecayConstant(f64),
    #[error("code distance must be at least 1")]
    InvalidDistance,
    #[error("depolarizing probability must lie in [0, 1], got {0}")]
    InvalidRate(f64),
    #[error("circuit shape needs N ≥ 1 and D ≥ 1 (got N={n}, D={d})")]
    InvalidShape { n: u64, d: u64 },
    #[error("fully depolarizing channel (r = 1) has infinite decay rate")]
    DegenerateChannel,
    #[error("Pauli weight vector must have 4^N entries, got {0}")]
    WeightLength(usize),
    #[error("Pauli weights must be non-negative and sum to 1 (sum = {0})")]
    WeightNormalization(f64),
    #[error("enumeration over {0} composite error slots is too large")]
    EnumerationTooLarge(u64),
    #[error("heatmap grids must be non-empty")]
    EmptyGrid,
}

/// Architecture constants of the `p_logical = A·exp(−B·d)` overhead model,
/// without a chosen distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

impl ArchitectureParams {
    /// High physical error rate setting (A = 0.5, B = 1.6).
    pub const HIGH_ERROR: Self = Self { a: 0.5, b: 1.6 };
    /// Moderate physical error rate setting (A = 0.4, B = 1.1).
    pub const MODERATE_ERROR: Self = Self { a: 0.4, b: 1.1 };

    pub fn new(a: f64, b: f64) -> Result<Self, NoiseError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(NoiseError::InvalidPrefactor(a));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(NoiseError::InvalidDecayConstant(b));
        }
        Ok(Self { a, b })
    }

    /// `A·exp(−B·d)` for any non-negative distance, including the `d = 0`
    /// boundary where it returns the prefactor.
    pub fn logical_rate_at(&self, d: u32) -> f64 {
        (self.a.ln() - self.b * f64::from(d)).exp()
    }

    pub fn with_distance(self, d: u32) -> Result<FtModel, NoiseError> {
        FtModel::new(self, d)
    }
}

/// Overhead model at a fixed code distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtModel {
    #[serde(flatten)]
    pub arch: ArchitectureParams,
    pub d: u32,
}

impl FtModel {
    pub fn new(arch: ArchitectureParams, d: u32) -> Result<Self, NoiseError> {
        let arch = ArchitectureParams::new(arch.a, arch.b)?;
        if d == 0 {
            return Err(NoiseError::InvalidDistance);
        }
        Ok(Self { arch, d })
    }
}

/// Logical error rate per logical operation, `A·exp(−B·d)`.
pub fn logical_rate(model: &FtModel) -> f64 {
    model.arch.logical_rate_at(model.d)
}

/// Physical qubits for `n_logical` surface-code patches of distance `d`: `2·d²·n`.
pub fn physical_qubits(model: &FtModel, n_logical: u64) -> u64 {
    physical_qubits_at(model.d, n_logical)
}

pub fn physical_qubits_at(d: u32, n_logical: u64) -> u64 {
    let d = u64::from(d);
    2 * d * d * n_logical
}

/// Single-qubit depolarizing channel with Kraus weights `(1−r, r/3, r/3, r/3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingChannel {
    r: f64,
}

impl DepolarizingChannel {
    pub fn new(r: f64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(NoiseError::InvalidRate(r));
        }
        Ok(Self { r })
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    /// Weights for `I, X, Y, Z`. The identity weight is `1 − (x + x + x)`
    /// with `x = r/3`, which makes [`Self::weight_sum`] exactly one in
    /// floating point.
    pub fn kraus_weights(&self) -> [f64; 4] {
        let x = self.r / 3.0;
        let err = x + x + x;
        [1.0 - err, x, x, x]
    }

    /// `w_I + (w_X + w_Y + w_Z)`.
    pub fn weight_sum(&self) -> f64 {
        let [i, x, y, z] = self.kraus_weights();
        i + (x + y + z)
    }
}

/// `N` logical qubits, `D` unitary layers per c-U, `k` c-U repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitShape {
    pub n: u64,
    pub d: u64,
    pub k: u64,
}

impl CircuitShape {
    pub fn new(n: u64, d: u64, k: u64) -> Result<Self, NoiseError> {
        if n == 0 || d == 0 {
            return Err(NoiseError::InvalidShape { n, d });
        }
        Ok(Self { n, d, k })
    }

    /// Number of single-qubit error slots, `N·D·k`.
    pub fn error_slots(&self) -> f64 {
        self.n as f64 * self.d as f64 * self.k as f64
    }
}

/// Mean scale and variance of `⟨P⟩` under the unitary 2-design trajectory model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub mean_scale: f64,
    pub variance: f64,
}

/// `ln((1−r)^(N·D·k))`.
pub fn ln_survival_probability(channel: &DepolarizingChannel, shape: &CircuitShape) -> f64 {
    let slots = shape.error_slots();
    if slots == 0.0 {
        return 0.0;
    }
    slots * (-channel.r).ln_1p()
}

/// Probability that no error hits any of the `N·D·k` slots, `(1−r)^(N·D·k)`.
pub fn survival_probability(channel: &DepolarizingChannel, shape: &CircuitShape) -> f64 {
    ln_survival_probability(channel, shape).exp()
}

/// `Var[⟨P⟩] = (Σ_{j≠0} p_j²)/(2^N+1)` for the composite depolarizing channel:
/// `[((1−r)² + r²/3)^(NDk) − (1−r)^(2NDk)] / (2^N+1)`.
pub fn trajectory_variance(channel: &DepolarizingChannel, shape: &CircuitShape) -> f64 {
    let slots = shape.error_slots();
    let r = channel.r;
    if slots == 0.0 || r == 0.0 {
        return 0.0;
    }
    let norm = haar_norm(shape.n);
    if r == 1.0 {
        // only the three non-identity terms survive: (1/3)^(NDk)
        return (-slots * 3f64.ln()).exp() / norm;
    }
    // q^n − s^(2n) = s^(2n)·expm1(n·ln(q/s²)),  q/s² = 1 + r²/(3(1−r)²)
    let s = 1.0 - r;
    let ln_noiseless_sq = 2.0 * slots * (-r).ln_1p();
    let excess = slots * (r * r / (3.0 * s * s)).ln_1p();
    (ln_noiseless_sq + ln_exp_m1(excess)).exp() / norm
}

/// `ln(e^x − 1)` for `x > 0` without overflowing at large `x`.
fn ln_exp_m1(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

pub fn trajectory_stats(channel: &DepolarizingChannel, shape: &CircuitShape) -> TrajectoryStats {
    TrajectoryStats {
        mean_scale: survival_probability(channel, shape),
        variance: trajectory_variance(channel, shape),
    }
}

fn haar_norm(n: u64) -> f64 {
    let n = i32::try_from(n).unwrap_or(i32::MAX);
    2f64.powi(n) + 1.0
}

/// Per-c-U decay rate `λ = −N·D·ln(1−r)`, so that `e^(−λ) = (1−r)^(N·D)`.
pub fn lambda_from_depolarizing(
    channel: &DepolarizingChannel,
    n: u64,
    d: u64,
) -> Result<f64, NoiseError> {
    if n == 0 || d == 0 {
        return Err(NoiseError::InvalidShape { n, d });
    }
    if channel.r >= 1.0 {
        return Err(NoiseError::DegenerateChannel);
    }
    Ok(-(n as f64) * (d as f64) * (-channel.r).ln_1p())
}

/// Generic `N`-qubit Pauli channel given by an explicit weight vector over
/// `{I,X,Y,Z}^⊗N` (index 0 is the identity). Only usable for tiny `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    n_qubits: u32,
    weights: Vec<f64>,
}

impl PauliChannel {
    pub fn new(n_qubits: u32, weights: Vec<f64>) -> Result<Self, NoiseError> {
        let expected = 4usize
            .checked_pow(n_qubits)
            .ok_or(NoiseError::WeightLength(weights.len()))?;
        if weights.len() != expected {
            return Err(NoiseError::WeightLength(weights.len()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(NoiseError::WeightNormalization(sum));
        }
        Ok(Self { n_qubits, weights })
    }

    /// Tensor power of a single-qubit depolarizing channel. Index digits in
    /// base 4 are the per-qubit Pauli labels, qubit 0 least significant.
    pub fn composite_depolarizing(channel: &DepolarizingChannel, n_qubits: u32) -> Self {
        let single = channel.kraus_weights();
        let mut weights = vec![1.0];
        for _ in 0..n_qubits {
            weights = weights
                .iter()
                .flat_map(|w| single.iter().map(move |s| w * s))
                .collect();
        }
        Self { n_qubits, weights }
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exhaustive trajectory statistics for `layers` applications of the
    /// channel: `p_0 = w_0^layers` and `Σ_{j≠0} p_j² / (2^N+1)` over all
    /// `(4^N)^layers` composite index tuples.
    pub fn enumerate_stats(&self, layers: u32) -> Result<TrajectoryStats, NoiseError> {
        let total_slots = u64::from(self.n_qubits) * u64::from(layers);
        if total_slots > 10 {
            return Err(NoiseError::EnumerationTooLarge(total_slots));
        }
        let base = self.weights.len();
        let count = base.pow(layers);
        let mut sum_sq = 0.0;
        for tuple in 1..count {
            let mut idx = tuple;
            let mut p = 1.0;
            for _ in 0..layers {
                p *= self.weights[idx % base];
                idx /= base;
            }
            sum_sq += p * p;
        }
        Ok(TrajectoryStats {
            mean_scale: self.weights[0].powi(layers as i32),
            variance: sum_sq / haar_norm(u64::from(self.n_qubits)),
        })
    }
}

/// Row-major grid of `σ_⟨P⟩ = √Var[⟨P⟩]`: one row per depolarizing rate, one
/// column per total depth `D·k` (taken as `D = depth`, `k = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct StddevHeatmap {
    pub n: u64,
    pub rates: Vec<f64>,
    pub depths: Vec<u64>,
    pub sigma: Vec<Vec<f64>>,
}

pub fn stddev_heatmap(rates: &[f64], depths: &[u64], n: u64) -> Result<StddevHeatmap, NoiseError> {
    if rates.is_empty() || depths.is_empty() {
        return Err(NoiseError::EmptyGrid);
    }
    if n == 0 {
        return Err(NoiseError::InvalidShape { n, d: 1 });
    }
    let channels = rates
        .iter()
        .map(|&r| DepolarizingChannel::new(r))
        .collect::<Result<Vec<_>, _>>()?;
    let sigma = channels
        .iter()
        .map(|ch| {
            depths
                .iter()
                .map(|&depth| {
                    let shape = CircuitShape { n, d: depth, k: 1 };
                    trajectory_variance(ch, &shape).sqrt()
                })
                .collect()
        })
        .collect();
    Ok(StddevHeatmap {
        n,
        rates: rates.to_vec(),
        depths: depths.to_vec(),
        sigma,
    })
}

impl StddevHeatmap {
    /// Iterates `(r, depth, sigma)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, u64, f64)> + '_ {
        self.rates.iter().enumerate().flat_map(move |(i, &r)| {
            self.depths
                .iter()
                .enumerate()
                .map(move |(j, &depth)| (r, depth, self.sigma[i][j]))
        })
    }
}
