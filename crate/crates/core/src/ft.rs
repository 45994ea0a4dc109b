//! Fault-tolerant cost comparison between textbook QPE and RFE.
//!
//! Both algorithms run on surface-code patches of distance `d` with
//! `2d²` physical qubits each and logical error rate `A·e^{−Bd}`. Runtime is
//! counted in QEC cycles, taking `d` cycles per logical layer, so one c-U call
//! of depth `D` costs `D·d` cycles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundError, BoundInputs, DepthPolicy};
use crate::noise::{lambda_from_depolarizing, physical_qubits_at, ArchitectureParams, DepolarizingChannel};
use crate::rfe::{grid_size, KStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FtError {
    #[error("problem instance needs N ≥ 1 and D ≥ 1")]
    InvalidShape,
    #[error("accuracy must be positive and finite, got {0}")]
    InvalidAccuracy(f64),
    #[error("failure budget must lie in (0, 1), got {0}")]
    InvalidBudget(f64),
    #[error("distance range {0}..={1} is empty or starts at 0")]
    InvalidRange(u32, u32),
}

/// Target computation: `N` system qubits, c-U depth `D`, accuracy `ε` and
/// total failure probability `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInstance {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "D")]
    pub depth: u64,
    pub epsilon: f64,
    pub delta: f64,
}

impl ProblemInstance {
    /// 100 qubits, depth 1000, `ε = 10⁻³`, `δ = 10⁻²`.
    pub const REFERENCE: Self = Self {
        n: 100,
        depth: 1000,
        epsilon: 1e-3,
        delta: 1e-2,
    };

    pub fn new(n: u64, depth: u64, epsilon: f64, delta: f64) -> Result<Self, FtError> {
        let inst = Self {
            n,
            depth,
            epsilon,
            delta,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), FtError> {
        if self.n == 0 || self.depth == 0 {
            return Err(FtError::InvalidShape);
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(FtError::InvalidAccuracy(self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(FtError::InvalidBudget(self.delta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "QPE")]
    Qpe,
    #[serde(rename = "RFE")]
    Rfe,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Qpe => "QPE",
            Algorithm::Rfe => "RFE",
        }
    }
}

/// Resources of one algorithm at one code distance. Costs are `None` when
/// the RFE bound cannot be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub algorithm: Algorithm,
    pub d: u32,
    pub physical_qubits: u64,
    pub cu_calls: Option<f64>,
    pub qec_cycles: Option<f64>,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// `⌈x⌉`, treating values within `1e-12` of an integer as that integer.
fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 {
        r
    } else {
        x.ceil()
    }
}

/// `⌈log₂(1/ε)⌉ + ⌈log₂(1/δ + ½)⌉`.
pub fn qpe_ancillas(epsilon: f64, delta: f64) -> u64 {
    let a = ceil_tol((1.0 / epsilon).log2()).max(0.0);
    let b = ceil_tol((1.0 / delta + 0.5).log2()).max(0.0);
    (a + b) as u64
}

/// `(1/ε)·(1/δ + ½)` controlled-unitary calls.
pub fn qpe_cu_calls(epsilon: f64, delta: f64) -> f64 {
    (1.0 / epsilon) * (1.0 / delta + 0.5)
}

/// Largest per-c-U failure probability compatible with the QPE budget,
/// `εδ²/(1+δ)`.
pub fn qpe_cu_failure_budget(instance: &ProblemInstance) -> f64 {
    instance.epsilon * instance.delta * instance.delta / (1.0 + instance.delta)
}

/// `⌈(1/B)·ln(A·N·D·(1+δ)/(ε·δ²))⌉`, at least 1.
pub fn qpe_min_distance(instance: &ProblemInstance, arch: &ArchitectureParams) -> u32 {
    let n = instance.n as f64;
    let dd = instance.depth as f64;
    let arg = arch.a * n * dd * (1.0 + instance.delta)
        / (instance.epsilon * instance.delta * instance.delta);
    let d = ceil_tol(arg.ln() / arch.b).max(1.0);
    d as u32
}

pub fn qpe_cost_at_distance(
    instance: &ProblemInstance,
    arch: &ArchitectureParams,
    d: u32,
) -> CostReport {
    let logical = instance.n + qpe_ancillas(instance.epsilon, instance.delta);
    let calls = qpe_cu_calls(instance.epsilon, instance.delta);
    let min_d = qpe_min_distance(instance, arch);
    let feasible = d >= min_d;
    CostReport {
        algorithm: Algorithm::Qpe,
        d,
        physical_qubits: physical_qubits_at(d, logical),
        cu_calls: Some(calls),
        qec_cycles: Some(calls * instance.depth as f64 * f64::from(d)),
        feasible,
        diagnostic: (!feasible).then(|| format!("below minimal distance {min_d}")),
    }
}

/// Settings for the RFE side of the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RfeCostOptions {
    pub strategy: KStrategy,
    pub policy: DepthPolicy,
}

/// Per-c-U decay rate at distance `d`: the logical rate is used as the
/// depolarizing probability of every qubit in every layer.
pub fn lambda_at_distance(instance: &ProblemInstance, arch: &ArchitectureParams, d: u32) -> f64 {
    let r = arch.logical_rate_at(d).min(1.0);
    DepolarizingChannel::new(r)
        .ok()
        .and_then(|ch| lambda_from_depolarizing(&ch, instance.n, instance.depth).ok())
        .unwrap_or(f64::INFINITY)
}

pub fn rfe_cost_at_distance(
    instance: &ProblemInstance,
    arch: &ArchitectureParams,
    d: u32,
    options: RfeCostOptions,
) -> CostReport {
    let lambda = lambda_at_distance(instance, arch, d);
    let physical = physical_qubits_at(d, instance.n + 1);
    let infeasible = |diag: String| CostReport {
        algorithm: Algorithm::Rfe,
        d,
        physical_qubits: physical,
        cu_calls: None,
        qec_cycles: None,
        feasible: false,
        diagnostic: Some(diag),
    };
    let max_depth = if lambda.is_finite() {
        options.strategy.depth(instance.epsilon, lambda)
    } else {
        2
    };
    let inputs = match BoundInputs::explicit(
        instance.epsilon,
        instance.delta,
        lambda,
        grid_size(instance.epsilon),
        max_depth,
    ) {
        Ok(i) => i,
        Err(e) => return infeasible(e.to_string()),
    };
    match bounds::sample_bound(&inputs) {
        Ok(m) => {
            let calls = bounds::runtime_cu(m, max_depth, options.policy);
            CostReport {
                algorithm: Algorithm::Rfe,
                d,
                physical_qubits: physical,
                cu_calls: Some(calls),
                qec_cycles: Some(calls * instance.depth as f64 * f64::from(d)),
                feasible: true,
                diagnostic: None,
            }
        }
        Err(e @ (BoundError::VacuousBound { .. } | BoundError::Overflow { .. })) => {
            infeasible(format!("λ = {lambda:.6e}, K = {max_depth}: {e}"))
        }
        Err(e) => infeasible(e.to_string()),
    }
}

/// One QPE row and one RFE row per distance in `d_min..=d_max`.
pub fn compare_sweep(
    instance: &ProblemInstance,
    arch: &ArchitectureParams,
    d_min: u32,
    d_max: u32,
    options: RfeCostOptions,
) -> Result<Vec<CostReport>, FtError> {
    instance.validate()?;
    if d_min == 0 || d_min > d_max {
        return Err(FtError::InvalidRange(d_min, d_max));
    }
    let mut rows = Vec::with_capacity(2 * (d_max - d_min + 1) as usize);
    for d in d_min..=d_max {
        rows.push(qpe_cost_at_distance(instance, arch, d));
        rows.push(rfe_cost_at_distance(instance, arch, d, options));
    }
    Ok(rows)
}
