//! Figure campaigns and Monte Carlo validation.
//!
//! [`run_campaign`] writes a campaign's CSV files (and optional SVG plots)
//! into an output directory together with `manifest.json`, which echoes the
//! configuration and records a SHA-256 checksum per output file. Stochastic
//! campaigns draw every trial from its own `(seed, trial)` stream, so the
//! checksums are reproducible from the configuration alone.

pub mod plot;
mod validate;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{validate_bound, ThetaMode, ValidationReport, ValidationSettings};

use crate::bounds::{self, BoundError, DepthPolicy};
use crate::config::{CampaignKind, ConfigError, RunConfig};
use crate::ft::{self, FtError, ProblemInstance, RfeCostOptions};
use crate::noise::{self, ArchitectureParams, NoiseError};
use crate::output::{self, fmt_float, OutputError, Table};
use crate::rfe::{self, KStrategy, RfeConfig, RfeError, Sampler};
use plot::Chart;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("cannot create output directory {path}: {source}")]
    OutputDir {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Rfe(#[from] RfeError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Ft(#[from] FtError),
    #[error("configuration has no campaign block")]
    MissingCampaign,
}

/// A campaign: a validated configuration with a campaign block, and the
/// directory its outputs go to.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub config: RunConfig,
    pub output_dir: PathBuf,
}

impl CampaignSpec {
    pub fn new(config: RunConfig, output_dir: impl Into<PathBuf>) -> Result<Self, CampaignError> {
        config.validate()?;
        if config.campaign.is_none() {
            return Err(CampaignError::MissingCampaign);
        }
        Ok(Self {
            config,
            output_dir: output_dir.into(),
        })
    }

    pub fn kind(&self) -> CampaignKind {
        self.config.campaign.as_ref().expect("checked in new").kind
    }

    pub fn seed(&self) -> u64 {
        self.config.campaign.as_ref().and_then(|c| c.seed).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignManifest {
    pub kind: String,
    pub spec: RunConfig,
    pub outputs: Vec<OutputFile>,
    pub versions: BTreeMap<String, String>,
    pub wallclock_ms: f64,
    pub summary: serde_json::Value,
}

impl CampaignManifest {
    pub fn checksums(&self) -> BTreeMap<&str, &str> {
        self.outputs
            .iter()
            .map(|o| (o.file.as_str(), o.sha256.as_str()))
            .collect()
    }
}

struct Emitter {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
    plots: bool,
}

impl Emitter {
    fn table(&mut self, name: &str, table: &Table) -> Result<(), CampaignError> {
        let bytes = table.to_csv_bytes()?;
        self.bytes(name, &bytes)
    }

    fn chart(&mut self, name: &str, chart: &Chart) -> Result<(), CampaignError> {
        if self.plots {
            self.bytes(name, chart.to_svg().as_bytes())?;
        }
        Ok(())
    }

    fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CampaignError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| OutputError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.outputs.push(OutputFile {
            file: name.into(),
            sha256: output::sha256_hex(bytes),
        });
        Ok(())
    }
}

pub const DEFAULT_THETA: f64 = TAU * 0.3;
pub const DEFAULT_GRID: u64 = 32;
pub const DEFAULT_SHOTS: u64 = 10_000;
pub const FIG3_LAMBDAS: [f64; 3] = [0.01, 0.1, 0.5];
pub const FIG4_LAMBDAS: [f64; 5] = [0.1, 0.01, 0.001, 0.0001, 0.00001];
pub const FIG6_N: [u64; 3] = [1, 10, 100];
pub const VALIDATION_EPSILONS: [f64; 3] = [0.05, 0.1, 0.2];
pub const VALIDATION_LAMBDAS: [f64; 3] = [0.001, 0.01, 0.1];

/// Runs the campaign and writes its outputs and `manifest.json`.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignManifest, CampaignError> {
    let start = Instant::now();
    fs::create_dir_all(&spec.output_dir).map_err(|source| CampaignError::OutputDir {
        path: spec.output_dir.display().to_string(),
        source,
    })?;
    let campaign = spec.config.campaign.as_ref().ok_or(CampaignError::MissingCampaign)?;
    let mut out = Emitter {
        dir: spec.output_dir.clone(),
        outputs: Vec::new(),
        plots: campaign.plots.unwrap_or(false),
    };
    let summary = match spec.kind() {
        CampaignKind::Fig2 => spectrum_campaign(spec, &[0.0], &mut out)?,
        CampaignKind::Fig3 => {
            let lambdas = campaign.lambdas.clone().unwrap_or(FIG3_LAMBDAS.to_vec());
            spectrum_campaign(spec, &lambdas, &mut out)?
        }
        CampaignKind::Fig4 => runtime_campaign(spec, &mut out)?,
        CampaignKind::Fig5 => comparison_campaign(spec, &mut out)?,
        CampaignKind::Fig6 => heatmap_campaign(spec, &mut out)?,
        CampaignKind::ValidateBound => validation_campaign(spec, &mut out)?,
    };
    let mut versions = BTreeMap::new();
    versions.insert("rfe-lab".to_string(), env!("CARGO_PKG_VERSION").to_string());
    versions.insert("schema".to_string(), crate::config::SCHEMA.to_string());
    let manifest = CampaignManifest {
        kind: spec.kind().name().into(),
        spec: spec.config.clone(),
        outputs: out.outputs,
        versions,
        wallclock_ms: start.elapsed().as_secs_f64() * 1e3,
        summary,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = spec.output_dir.join("manifest.json");
    fs::write(&path, text + "\n").map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(manifest)
}

fn label(lambda: f64) -> String {
    format!("lambda{lambda}")
}

fn strategy(config: &RunConfig) -> KStrategy {
    config
        .algorithm
        .as_ref()
        .and_then(|a| a.k_strategy)
        .unwrap_or_default()
}

fn policy(config: &RunConfig) -> DepthPolicy {
    config
        .algorithm
        .as_ref()
        .and_then(|a| a.depth_policy)
        .unwrap_or_default()
}

/// Expected signal and spectrum for each `λ`, plus one sampled spectrum.
fn spectrum_campaign(
    spec: &CampaignSpec,
    lambdas: &[f64],
    out: &mut Emitter,
) -> Result<serde_json::Value, CampaignError> {
    let alg = spec.config.algorithm.clone().unwrap_or_default();
    let theta = alg.theta.unwrap_or(DEFAULT_THETA);
    let grid = alg
        .grid
        .or_else(|| alg.epsilon.map(rfe::grid_size))
        .unwrap_or(DEFAULT_GRID);
    let max_depth = alg.max_depth.unwrap_or(grid);
    let shots = alg.shots.unwrap_or(DEFAULT_SHOTS);
    let epsilon = alg.epsilon.unwrap_or(TAU / grid as f64);
    let single = lambdas.len() == 1;

    let mut signal_chart = Chart::new("Expected signal", "k", "Re g(k)");
    let mut spectrum_chart = Chart::new("Expected spectrum", "j", "|f_j|");
    let mut peaks = serde_json::Map::new();
    for &lambda in lambdas {
        let suffix = if single { String::new() } else { format!("_{}", label(lambda)) };
        let signal = rfe::expected_signal(theta, max_depth, lambda);
        let expected = rfe::expected_spectrum(theta, grid, max_depth, lambda);
        out.table(&format!("signal{suffix}.csv"), &output::signal_table(&signal))?;
        out.table(&format!("spectrum{suffix}.csv"), &output::spectrum_table(&expected))?;

        let cfg = RfeConfig::new(theta, epsilon, lambda, grid, max_depth, shots, spec.seed())?;
        let (sampled, est) = rfe::run_rfe_trial(&cfg, 0, Sampler::PerShot)?;
        out.table(
            &format!("empirical_spectrum{suffix}.csv"),
            &output::spectrum_table(&sampled.values()),
        )?;
        peaks.insert(
            label(lambda),
            serde_json::json!({
                "peak_index": est.peak_index,
                "theta_hat": est.theta_hat,
                "success": est.success,
            }),
        );

        let name = format!("λ = {lambda}");
        signal_chart = signal_chart.with_series(
            &name,
            signal.iter().enumerate().map(|(k, g)| (k as f64, g.re)).collect(),
        );
        spectrum_chart = spectrum_chart.with_series(
            &name,
            expected.iter().enumerate().map(|(j, f)| (j as f64, f.norm())).collect(),
        );
    }
    out.chart("signal.svg", &signal_chart)?;
    out.chart("spectrum.svg", &spectrum_chart)?;
    Ok(serde_json::json!({
        "theta": theta,
        "J": grid,
        "K": max_depth,
        "M": shots,
        "sampled": peaks,
    }))
}

fn runtime_campaign(spec: &CampaignSpec, out: &mut Emitter) -> Result<serde_json::Value, CampaignError> {
    let c = spec.config.campaign.as_ref().expect("campaign present");
    let lambdas = c.lambdas.clone().unwrap_or(FIG4_LAMBDAS.to_vec());
    let epsilons = match &c.epsilons {
        Some(e) => e.clone(),
        None => {
            let [lo, hi] = c.epsilon_decades.unwrap_or([-5.0, -1.0]);
            bounds::epsilon_grid(lo, hi, c.points_per_decade.unwrap_or(10))
        }
    };
    let delta = spec
        .config
        .algorithm
        .as_ref()
        .and_then(|a| a.delta)
        .unwrap_or(0.1);
    let rows =
        bounds::sweep_runtime_curves(&lambdas, &epsilons, delta, strategy(&spec.config), policy(&spec.config))?;
    out.table("runtime.csv", &output::sweep_table(&rows))?;

    let mut chart = Chart::new("Runtime bound", "1/epsilon", "c-U calls").log_axes(true, true);
    let mut slopes = serde_json::Map::new();
    for &lambda in &lambdas {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.lambda == lambda)
            .filter_map(|r| r.runtime_cu.map(|t| (1.0 / r.epsilon, t)))
            .collect();
        if pts.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().cloned().unzip();
            slopes.insert(label(lambda), bounds::log_log_slope(&xs, &ys).into());
        }
        chart = chart.with_series(&format!("λ = {lambda}"), pts);
    }
    out.chart("runtime.svg", &chart)?;
    Ok(serde_json::json!({ "delta": delta, "log_log_slopes": slopes }))
}

fn instance_and_model(config: &RunConfig) -> Result<(ProblemInstance, ArchitectureParams, u32, u32), CampaignError> {
    let instance = config.instance.unwrap_or(ProblemInstance::REFERENCE);
    instance.validate()?;
    let (arch, d_min, d_max) = match &config.model {
        Some(m) => (
            ArchitectureParams::new(m.a, m.b)?,
            m.d_min.unwrap_or(3),
            m.d_max.unwrap_or(30),
        ),
        None => (ArchitectureParams::HIGH_ERROR, 3, 30),
    };
    Ok((instance, arch, d_min, d_max))
}

fn comparison_campaign(spec: &CampaignSpec, out: &mut Emitter) -> Result<serde_json::Value, CampaignError> {
    let (instance, arch, d_min, d_max) = instance_and_model(&spec.config)?;
    let options = RfeCostOptions {
        strategy: strategy(&spec.config),
        policy: policy(&spec.config),
    };
    let rows = ft::compare_sweep(&instance, &arch, d_min, d_max, options)?;
    out.table("comparison.csv", &output::comparison_table(&rows))?;

    let series = |alg: ft::Algorithm| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.algorithm == alg && r.feasible)
            .filter_map(|r| r.qec_cycles.map(|c| (r.physical_qubits as f64, c)))
            .collect()
    };
    let chart = Chart::new("Runtime bound vs physical qubits", "physical qubits", "QEC cycles")
        .log_axes(true, true)
        .with_series("RFE", series(ft::Algorithm::Rfe))
        .with_series("QPE", series(ft::Algorithm::Qpe));
    out.chart("comparison.svg", &chart)?;

    let qpe_min = ft::qpe_min_distance(&instance, &arch);
    let depths: Vec<(u32, u64)> = (d_min..=d_max)
        .map(|d| {
            let lambda = ft::lambda_at_distance(&instance, &arch, d);
            let k = if lambda.is_finite() {
                options.strategy.depth(instance.epsilon, lambda)
            } else {
                2
            };
            (d, k)
        })
        .collect();
    let switch = depths
        .windows(2)
        .find(|w| w[0].1 == 2 && w[1].1 > 2)
        .map(|w| w[1].0);
    let at = |alg: ft::Algorithm, d: u32| {
        rows.iter()
            .find(|r| r.algorithm == alg && r.d == d)
            .and_then(|r| r.qec_cycles)
    };
    let ratio = match (at(ft::Algorithm::Rfe, qpe_min), at(ft::Algorithm::Qpe, qpe_min)) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    };
    Ok(serde_json::json!({
        "qpe_min_distance": qpe_min,
        "qpe_physical_qubits_at_min": noise::physical_qubits_at(qpe_min, instance.n + ft::qpe_ancillas(instance.epsilon, instance.delta)),
        "first_feasible_rfe_distance": rows.iter().find(|r| r.algorithm == ft::Algorithm::Rfe && r.feasible).map(|r| r.d),
        "k_switch_distance": switch,
        "rfe_over_qpe_cycles_at_qpe_min": ratio,
    }))
}

fn log_grid_u64(lo_exp: i32, hi_exp: i32, per_decade: i32) -> Vec<u64> {
    let mut v: Vec<u64> = (lo_exp * per_decade..=hi_exp * per_decade)
        .map(|i| 10f64.powf(f64::from(i) / f64::from(per_decade)).round() as u64)
        .collect();
    v.dedup();
    v
}

fn heatmap_campaign(spec: &CampaignSpec, out: &mut Emitter) -> Result<serde_json::Value, CampaignError> {
    let c = spec.config.campaign.as_ref().expect("campaign present");
    let n_values = c.n_values.clone().unwrap_or(FIG6_N.to_vec());
    let rates = c.rates.clone().unwrap_or_else(|| {
        std::iter::once(0.0)
            .chain((-20..=-4).map(|i| 10f64.powf(f64::from(i) / 4.0)))
            .collect()
    });
    let depths = c.depths.clone().unwrap_or_else(|| log_grid_u64(0, 5, 4));
    let maps: Vec<noise::StddevHeatmap> = n_values
        .par_iter()
        .map(|&n| noise::stddev_heatmap(&rates, &depths, n))
        .collect::<Result<_, _>>()?;
    let mut maxima = serde_json::Map::new();
    for map in &maps {
        out.table(&format!("heatmap_N{}.csv", map.n), &output::heatmap_table(map))?;
        let max = map.cells().map(|(_, _, s)| s).fold(0.0, f64::max);
        maxima.insert(format!("N{}", map.n), max.into());
        if out.plots {
            let mut chart = Chart::new(&format!("sigma, N = {}", map.n), "D·k", "sigma").log_axes(true, true);
            for (i, &r) in map.rates.iter().enumerate().filter(|(_, r)| **r > 0.0).step_by(4) {
                chart = chart.with_series(
                    &format!("r = {}", fmt_float(r)),
                    map.depths.iter().zip(&map.sigma[i]).map(|(&d, &s)| (d as f64, s)).collect(),
                );
            }
            out.chart(&format!("heatmap_N{}.svg", map.n), &chart)?;
        }
    }
    Ok(serde_json::json!({ "max_sigma": maxima }))
}

fn validation_campaign(spec: &CampaignSpec, out: &mut Emitter) -> Result<serde_json::Value, CampaignError> {
    let c = spec.config.campaign.as_ref().expect("campaign present");
    let alg = spec.config.algorithm.clone().unwrap_or_default();
    let epsilons = c
        .epsilons
        .clone()
        .or_else(|| alg.epsilon.map(|e| vec![e]))
        .unwrap_or(VALIDATION_EPSILONS.to_vec());
    let lambdas = c
        .lambdas
        .clone()
        .or_else(|| alg.lambda.map(|l| vec![l]))
        .unwrap_or(VALIDATION_LAMBDAS.to_vec());
    let delta = alg.delta.unwrap_or(0.1);
    let base = ValidationSettings {
        trials: c.trials.unwrap_or(500),
        seed: spec.seed(),
        strategy: strategy(&spec.config),
        theta: alg.theta.map_or(ThetaMode::Uniform, ThetaMode::Fixed),
        ..ValidationSettings::default()
    };
    let reports = validation_grid(&epsilons, &lambdas, delta, &base)?;
    out.table("validation.csv", &validation_table(&reports))?;
    Ok(serde_json::json!({
        "all_pass": reports.iter().all(ValidationReport::pass),
        "cells": reports,
    }))
}

/// Validates every `(ε, λ)` cell; cell `i` uses the streams `(seed, i·2³² + trial)`.
pub fn validation_grid(
    epsilons: &[f64],
    lambdas: &[f64],
    delta: f64,
    base: &ValidationSettings,
) -> Result<Vec<ValidationReport>, BoundError> {
    let mut reports = Vec::new();
    let mut cell = 0u32;
    for &epsilon in epsilons {
        for &lambda in lambdas {
            let settings = ValidationSettings { cell, ..*base };
            reports.push(validate_bound(epsilon, delta, lambda, &settings)?);
            cell += 1;
        }
    }
    Ok(reports)
}

pub fn validation_table(reports: &[ValidationReport]) -> Table {
    let mut t = Table::new(&[
        "epsilon", "lambda", "delta", "J", "K", "M", "trials", "failures", "rate", "ci_lower", "ci_upper",
        "p_value", "pass",
    ]);
    for r in reports {
        t.push(vec![
            fmt_float(r.epsilon),
            fmt_float(r.lambda),
            fmt_float(r.delta),
            r.grid.to_string(),
            r.max_depth.to_string(),
            r.shots.to_string(),
            r.test.trials.to_string(),
            r.test.failures.to_string(),
            fmt_float(r.test.rate),
            fmt_float(r.test.lower),
            fmt_float(r.test.upper),
            fmt_float(r.test.p_value),
            r.pass().to_string(),
        ]);
    }
    t
}

/// Reads a manifest back from a campaign directory.
pub fn read_manifest(dir: &Path) -> Result<CampaignManifest, CampaignError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CampaignError::Config(ConfigError::Syntax(e.to_string())))
}
