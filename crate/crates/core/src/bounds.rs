//! Sufficient shot counts for RFE.
//!
//! The failure event "a non-adjacent bin beats the peak" is controlled by
//! three functions of `(K, J, λ)`: an upper bound `Q` on the second moment of
//! the estimator difference, a lower bound `R` on the adjacent peak power and
//! an upper bound `S` on every non-adjacent power. A union bound over the `J`
//! bins then gives `M ≥ 128π²·ln(8J/δ)·Q/(R−S)²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rfe::{grid_size, peak_power_at_offset, KStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("bound is vacuous at K = {k}, J = {j}, λ = {lambda}: R − S ≤ 0")]
    VacuousBound { k: u64, j: u64, lambda: f64 },
    #[error("sufficient shot count exceeds the floating-point range (ln M = {ln_m:.3})")]
    Overflow { ln_m: f64 },
    #[error("invalid bound inputs: {0}")]
    InvalidInputs(String),
}

/// Whether the per-shot cost is the mean depth `(K−1)/2` or the maximum `K−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthPolicy {
    #[default]
    Expected,
    WorstCase,
}

/// `certified` where the non-adjacent upper bound `S` has been checked to
/// dominate the true power (`K = 2`, or `λ ≤ 1/(2K)`); `extrapolated`
/// elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validity {
    Certified,
    Extrapolated,
}

impl Validity {
    pub fn classify(max_depth: u64, lambda: f64) -> Self {
        if max_depth == 2 || 2.0 * max_depth as f64 * lambda <= 1.0 {
            Validity::Certified
        } else {
            Validity::Extrapolated
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Validity::Certified => "certified",
            Validity::Extrapolated => "extrapolated",
        }
    }
}

/// `Q = (32/3)·(1 − exp(−(4K²/7)·(2π/J)²))`.
pub fn q_bound(max_depth: u64, grid: u64) -> f64 {
    let k = max_depth as f64;
    let x = 2.0 * PI / grid as f64;
    -(32.0 / 3.0) * (-(4.0 * k * k / 7.0) * x * x).exp_m1()
}

/// Peak power at the worst adjacent offset `π/J`.
pub fn r_bound(max_depth: u64, grid: u64, lambda: f64) -> f64 {
    peak_power_at_offset(PI / grid as f64, max_depth, lambda)
}

/// `(1 − e^{−Kλ})² / (1 − e^{−λ})²`, tending to `K²` as `λ → 0`.
fn geometric_gain(max_depth: u64, lambda: f64) -> f64 {
    let k = max_depth as f64;
    if lambda == 0.0 {
        return k * k;
    }
    let ratio = (-k * lambda).exp_m1() / (-lambda).exp_m1();
    ratio * ratio
}

/// `1 − cos^{K²/2}(π/J)`.
fn cos_power_gap(max_depth: u64, grid: u64) -> f64 {
    let k = max_depth as f64;
    let c = (PI / grid as f64).cos();
    if c <= 0.0 {
        return 1.0;
    }
    -(0.5 * k * k * c.ln()).exp_m1()
}

/// `S = (G/K²)·(1 − 0.89·sech²(λ/2)·(1 − cos^{K²/2}(π/J)))` with
/// `G = (cosh Kλ − 1)/(cosh λ − 1)·e^{−(K−1)λ}`.
pub fn s_bound(max_depth: u64, grid: u64, lambda: f64) -> f64 {
    let k = max_depth as f64;
    let sech = 1.0 / (0.5 * lambda).cosh();
    let shrink = 1.0 - 0.89 * sech * sech * cos_power_gap(max_depth, grid);
    geometric_gain(max_depth, lambda) / (k * k) * shrink
}

/// `ln(R − S)`, computed without subtracting the two closed forms.
///
/// With `a = e^{−λ}`, `s₁ = sin(π/2J)`, `s_K = sin(πK/2J)`,
/// `D = (1−a)² + 4a·s₁²` and `h = 1 − cos^{K²/2}(π/J)`,
/// `R − S = (4a/K²)·[a^{K−1}s_K²/D − G·s₁²/D + 0.89·G·h/(1+a)²]`.
pub fn ln_margin(max_depth: u64, grid: u64, lambda: f64) -> Result<f64, BoundError> {
    let vacuous = || BoundError::VacuousBound {
        k: max_depth,
        j: grid,
        lambda,
    };
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(vacuous());
    }
    let k = max_depth as f64;
    let jf = grid as f64;
    let a = (-lambda).exp();
    if a == 0.0 {
        return Err(vacuous());
    }
    let s1 = (PI / (2.0 * jf)).sin();
    let sk = (PI * k / (2.0 * jf)).sin();
    let em1 = (-lambda).exp_m1();
    let d1 = em1 * em1 + 4.0 * a * s1 * s1;
    let g = geometric_gain(max_depth, lambda);
    let h = cos_power_gap(max_depth, grid);
    let bracket = (-(k - 1.0) * lambda).exp() * sk * sk / d1 - g * s1 * s1 / d1
        + 0.89 * g * h / ((1.0 + a) * (1.0 + a));
    if !(bracket > 0.0) || !bracket.is_finite() {
        return Err(vacuous());
    }
    Ok(4f64.ln() - lambda - 2.0 * k.ln() + bracket.ln())
}

/// `W = 16π²·Q/(R−S)²`.
pub fn w_ratio(max_depth: u64, grid: u64, lambda: f64) -> Result<f64, BoundError> {
    let ln_w = ln_w_ratio(max_depth, grid, lambda)?;
    let w = ln_w.exp();
    if w.is_finite() {
        Ok(w)
    } else {
        Err(BoundError::Overflow { ln_m: ln_w })
    }
}

fn ln_w_ratio(max_depth: u64, grid: u64, lambda: f64) -> Result<f64, BoundError> {
    let margin = ln_margin(max_depth, grid, lambda)?;
    Ok((16.0 * PI * PI).ln() + q_bound(max_depth, grid).ln() - 2.0 * margin)
}

/// Exact `E|d̂|²` for the difference of two bins `Δ = j* − j` apart:
/// `8 − 8·cos(π(K−1)Δ/J)·sin(πKΔ/J)/(K·sin(πΔ/J))`.
pub fn exact_difference_second_moment(max_depth: u64, grid: u64, offset: i64) -> f64 {
    let k = max_depth as f64;
    let x = PI * offset as f64 / grid as f64;
    let dirichlet = (k * x).sin() / (k * x.sin());
    8.0 - 8.0 * ((k - 1.0) * x).cos() * dirichlet
}

/// Inputs of the sample-count bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    #[serde(rename = "J")]
    pub grid: u64,
    #[serde(rename = "K")]
    pub max_depth: u64,
}

impl BoundInputs {
    /// Derives `J = ⌈2π/ε⌉` and `K` from `strategy`.
    pub fn new(epsilon: f64, delta: f64, lambda: f64, strategy: KStrategy) -> Result<Self, BoundError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(BoundError::InvalidInputs(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(lambda >= 0.0) {
            return Err(BoundError::InvalidInputs(format!("lambda must be non-negative, got {lambda}")));
        }
        Self::explicit(
            epsilon,
            delta,
            lambda,
            grid_size(epsilon),
            strategy.depth(epsilon, lambda),
        )
    }

    pub fn explicit(
        epsilon: f64,
        delta: f64,
        lambda: f64,
        grid: u64,
        max_depth: u64,
    ) -> Result<Self, BoundError> {
        let inputs = Self {
            epsilon,
            delta,
            lambda,
            grid,
            max_depth,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        let bad = |m: String| Err(BoundError::InvalidInputs(m));
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.lambda >= 0.0) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if self.max_depth < 2 || self.max_depth > self.grid {
            return bad(format!(
                "need 2 ≤ K ≤ J, got K = {}, J = {}",
                self.max_depth, self.grid
            ));
        }
        Ok(())
    }
}

/// Every intermediate of the bound at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub ln_m: f64,
    pub runtime_cu: f64,
    pub validity: Validity,
}

/// `ln` of the unrounded bound `128π²·ln(8J/δ)·Q/(R−S)²`.
pub fn ln_sample_bound(inputs: &BoundInputs) -> Result<f64, BoundError> {
    inputs.validate()?;
    let ln_w = ln_w_ratio(inputs.max_depth, inputs.grid, inputs.lambda)?;
    let log_term = (8.0 * inputs.grid as f64 / inputs.delta).ln();
    Ok(8f64.ln() + ln_w + log_term.ln())
}

/// `M = ⌈128π²·ln(8J/δ)·Q/(R−S)²⌉`, as a float since it can exceed `u64`.
pub fn sample_bound(inputs: &BoundInputs) -> Result<f64, BoundError> {
    let ln_m = ln_sample_bound(inputs)?;
    let m = ln_m.exp().ceil();
    if m.is_finite() {
        Ok(m.max(1.0))
    } else {
        Err(BoundError::Overflow { ln_m })
    }
}

/// Total c-U calls for `M` shots at uniform depth in `{0,…,K−1}`.
pub fn runtime_cu(shots: f64, max_depth: u64, policy: DepthPolicy) -> f64 {
    let span = (max_depth - 1) as f64;
    match policy {
        DepthPolicy::Expected => shots * span / 2.0,
        DepthPolicy::WorstCase => shots * span,
    }
}

pub fn breakdown(inputs: &BoundInputs, policy: DepthPolicy) -> Result<BoundBreakdown, BoundError> {
    let ln_m = ln_sample_bound(inputs)?;
    let m = sample_bound(inputs)?;
    let (k, j, lambda) = (inputs.max_depth, inputs.grid, inputs.lambda);
    Ok(BoundBreakdown {
        q: q_bound(k, j),
        r: r_bound(k, j, lambda),
        s: s_bound(k, j, lambda),
        w: w_ratio(k, j, lambda)?,
        m,
        ln_m,
        runtime_cu: runtime_cu(m, k, policy),
        validity: Validity::classify(k, lambda),
    })
}

/// One row of a runtime sweep. `m` and `runtime_cu` are `None` when the
/// bound is vacuous or overflows; `status` says which.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub epsilon: f64,
    #[serde(rename = "J")]
    pub grid: u64,
    #[serde(rename = "K")]
    pub max_depth: u64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub runtime_cu: Option<f64>,
    pub validity: String,
}

/// `points_per_decade` log-spaced accuracies from `10^lo` to `10^hi`
/// inclusive, in decreasing order of `ε`.
pub fn epsilon_grid(lo: f64, hi: f64, points_per_decade: usize) -> Vec<f64> {
    let steps = ((hi - lo) * points_per_decade as f64).round().max(0.0) as usize;
    (0..=steps)
        .map(|i| {
            let e = if steps == 0 {
                hi
            } else {
                hi - (hi - lo) * i as f64 / steps as f64
            };
            10f64.powf(e)
        })
        .collect()
}

pub fn sweep_runtime_curves(
    lambdas: &[f64],
    epsilons: &[f64],
    delta: f64,
    strategy: KStrategy,
    policy: DepthPolicy,
) -> Result<Vec<SweepRow>, BoundError> {
    if lambdas.is_empty() || epsilons.is_empty() {
        return Err(BoundError::InvalidInputs("empty sweep grid".into()));
    }
    let mut rows = Vec::with_capacity(lambdas.len() * epsilons.len());
    for &lambda in lambdas {
        for &epsilon in epsilons {
            let inputs = BoundInputs::new(epsilon, delta, lambda, strategy)?;
            let row = match breakdown(&inputs, policy) {
                Ok(b) => SweepRow {
                    lambda,
                    epsilon,
                    grid: inputs.grid,
                    max_depth: inputs.max_depth,
                    m: Some(b.m),
                    runtime_cu: Some(b.runtime_cu),
                    validity: b.validity.as_str().into(),
                },
                Err(e @ (BoundError::VacuousBound { .. } | BoundError::Overflow { .. })) => SweepRow {
                    lambda,
                    epsilon,
                    grid: inputs.grid,
                    max_depth: inputs.max_depth,
                    m: None,
                    runtime_cu: None,
                    validity: match e {
                        BoundError::VacuousBound { .. } => "vacuous".into(),
                        _ => "overflow".into(),
                    },
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q_small_ratio_matches_taylor() {
        for (k, j) in [(2u64, 1000u64), (3, 2000), (5, 10_000)] {
            let x = 2.0 * PI / j as f64;
            let kf = k as f64;
            assert!(kf * kf * x * x < 1e-3);
            let taylor = (32.0 / 3.0) * (4.0 * kf * kf / 7.0) * x * x;
            assert!((q_bound(k, j) / taylor - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn q_at_full_depth() {
        let expected = (32.0 / 3.0) * (1.0 - (-16.0 * PI * PI / 7.0).exp());
        assert_relative_eq!(q_bound(40, 40), expected, max_relative = 1e-14);
        let expected = (32.0 / 3.0) * (1.0 - (-(16.0 / 7.0) * (PI / 32.0).powi(2)).exp());
        assert_relative_eq!(q_bound(2, 64), expected, max_relative = 1e-12);
    }

    #[test]
    fn q_increases_with_depth() {
        let j = 200;
        let qs: Vec<f64> = (2..=j).map(|k| q_bound(k, j)).collect();
        assert!(qs.windows(2).all(|w| w[1] > w[0]));
        assert!(qs.iter().all(|&q| q > 0.0 && q < 32.0 / 3.0));
    }

    #[test]
    fn r_noiseless_limits() {
        // K = 2: (1/4)(1 − cos(2π/J))/(1 − cos(π/J)) → 1
        let r = r_bound(2, 1_000_000, 0.0);
        assert!((r - 1.0).abs() < 1e-10);
        for k in [4u64, 16, 64] {
            let expected = (2.0 / (k * k) as f64) / (1.0 - (PI / k as f64).cos());
            assert_relative_eq!(r_bound(k, k, 0.0), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn r_is_minimum_over_adjacent_offsets() {
        let (k, j, lambda) = (2, 4, 0.5);
        let cosh_form = |y: f64| {
            let kf = k as f64;
            (-(kf - 1.0) * lambda).exp() / (kf * kf) * ((kf * lambda).cosh() - (kf * y).cos())
                / (lambda.cosh() - y.cos())
        };
        let r = r_bound(k, j, lambda);
        assert_relative_eq!(r, cosh_form(PI / j as f64), max_relative = 1e-13);
        let min = (0..=1000)
            .map(|i| cosh_form(PI / j as f64 * i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(r <= min * (1.0 + 1e-12));
    }

    #[test]
    fn s_small_lambda_gain() {
        for k in [2u64, 10, 50] {
            let g = geometric_gain(k, 1e-8);
            assert_relative_eq!(g, (k * k) as f64, max_relative = 1e-6);
        }
    }

    #[test]
    fn s_cos_power_factor() {
        let lambda = 0.3f64;
        let sech2 = 1.0 - (lambda / 2.0).tanh().powi(2);
        let expected_shrink = 1.0 - 0.89 * sech2 * (1.0 - (PI / 8.0).cos().powi(2));
        let s = s_bound(2, 8, lambda);
        let gain = (-lambda).exp() * ((2.0 * lambda).cosh() - 1.0) / (lambda.cosh() - 1.0);
        assert_relative_eq!(s, gain / 4.0 * expected_shrink, max_relative = 1e-12);
    }

    #[test]
    fn margin_matches_naive_difference() {
        for (k, j) in [(2u64, 63u64), (10, 40), (50, 500), (20, 20)] {
            for lambda in [0.0, 1e-4, 0.01, 0.3, 2.0] {
                let naive = r_bound(k, j, lambda) - s_bound(k, j, lambda);
                if naive <= 1e-8 {
                    continue;
                }
                let stable = ln_margin(k, j, lambda).unwrap().exp();
                assert_relative_eq!(stable, naive, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn w_is_compositional() {
        for (k, j, lambda) in [(2u64, 63u64, 2.0), (10, 63, 0.01), (40, 629, 0.001)] {
            let w = w_ratio(k, j, lambda).unwrap();
            let direct = 16.0 * PI * PI * q_bound(k, j)
                / (r_bound(k, j, lambda) - s_bound(k, j, lambda)).powi(2);
            assert_relative_eq!(w, direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn high_noise_point_is_not_vacuous() {
        assert!(w_ratio(2, 63, 2.0).unwrap().is_finite());
    }

    #[test]
    fn infinite_decay_is_vacuous() {
        assert!(matches!(
            w_ratio(2, 63, f64::INFINITY),
            Err(BoundError::VacuousBound { .. })
        ));
        assert!(matches!(
            w_ratio(10, 63, 800.0),
            Err(BoundError::VacuousBound { .. })
        ));
    }

    #[test]
    fn w_increases_with_lambda() {
        for (k, j) in [(2u64, 63u64), (10, 100)] {
            let ws: Vec<f64> = (0..40)
                .map(|i| w_ratio(k, j, 1e-4 * 1.3f64.powi(i)).unwrap())
                .collect();
            assert!(ws.windows(2).all(|w| w[1] >= w[0]), "{k} {j}");
        }
    }

    #[test]
    fn sample_bound_identity() {
        let inputs = BoundInputs::new(0.1, 0.1, 0.01, KStrategy::Maintext).unwrap();
        let w = w_ratio(inputs.max_depth, inputs.grid, inputs.lambda).unwrap();
        let l = (8.0 * inputs.grid as f64 / inputs.delta).ln();
        let m = sample_bound(&inputs).unwrap();
        assert!((m - (8.0 * w * l).ceil()).abs() <= 1.0);
    }

    #[test]
    fn unrounded_grid_gives_accuracy_log() {
        let eps = 2.0 * PI / 500.0;
        let delta = 0.05;
        let j = grid_size(eps);
        assert_eq!(j, 500);
        let lhs = (8.0 * j as f64 / delta).ln();
        let rhs = (16.0 * PI / (delta * eps)).ln();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }

    #[test]
    fn runtime_examples() {
        assert_eq!(runtime_cu(1.0, 2, DepthPolicy::Expected), 0.5);
        assert_eq!(runtime_cu(1000.0, 11, DepthPolicy::Expected), 5000.0);
        assert_eq!(runtime_cu(1000.0, 11, DepthPolicy::WorstCase), 10_000.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(BoundInputs::new(0.1, 1.5, 0.0, KStrategy::Maintext).is_err());
        assert!(BoundInputs::explicit(0.1, 0.1, 0.0, 63, 64).is_err());
    }

    #[test]
    fn noiseless_sweep_is_finite() {
        let rows = sweep_runtime_curves(
            &[0.0],
            &epsilon_grid(-3.0, -1.0, 4),
            0.1,
            KStrategy::Maintext,
            DepthPolicy::Expected,
        )
        .unwrap();
        for r in &rows {
            assert!(r.runtime_cu.unwrap().is_finite());
            assert!(r.max_depth <= r.grid);
        }
    }

    #[test]
    fn sweep_flags_vacuous_rows() {
        let rows = sweep_runtime_curves(
            &[1000.0],
            &[0.1],
            0.1,
            KStrategy::Maintext,
            DepthPolicy::Expected,
        )
        .unwrap();
        assert_eq!(rows[0].validity, "vacuous");
        assert!(rows[0].m.is_none());
    }

    #[test]
    fn epsilon_grid_spans_decades() {
        let g = epsilon_grid(-3.0, -1.0, 10);
        assert_eq!(g.len(), 21);
        assert_relative_eq!(g[0], 0.1, max_relative = 1e-14);
        assert_relative_eq!(g[20], 1e-3, max_relative = 1e-14);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        assert_relative_eq!(log_log_slope(&xs, &ys), 1.7, max_relative = 1e-12);
    }
}
