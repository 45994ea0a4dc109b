use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rfe_lab::bounds::{self, BoundInputs, DepthPolicy};
use rfe_lab::config::{parse_config, CampaignKind, RunConfig};
use rfe_lab::experiments::{run_campaign, CampaignSpec};
use rfe_lab::ft::{self, ProblemInstance, RfeCostOptions};
use rfe_lab::noise::ArchitectureParams;
use rfe_lab::output::{self, Table};
use rfe_lab::rfe::{self, KStrategy, RfeConfig, Sampler, TrialReport};

#[derive(Parser)]
#[command(name = "rfe-lab", version, about = "Randomized Fourier estimation under exponential decay noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noiseless expected signal and spectrum
    Fig2(CampaignArgs),
    /// Expected signal and spectrum under decay
    Fig3(CampaignArgs),
    /// Runtime bound versus 1/ε for several decay rates
    Fig4(CampaignArgs),
    /// QPE/RFE cost comparison over code distance
    Fig5(CampaignArgs),
    /// Standard deviation of a Pauli expectation under depolarizing noise
    Fig6(CampaignArgs),
    /// Monte Carlo check of the sufficient shot count
    Validate(CampaignArgs),
    /// QPE/RFE cost table for one problem instance
    FtCompare(FtCompareArgs),
    /// Runtime bound table over λ and ε
    Sweep(SweepArgs),
    /// Bound breakdown (Q, R, S, W, M) at one point
    Bound(BoundArgs),
    /// One simulated RFE run
    Trial(TrialArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// JSON run configuration (schema rfe-lab/1)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Base seed, overriding the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Number of Monte Carlo trials, overriding the configuration
    #[arg(long)]
    trials: Option<u64>,
    /// Also write SVG plots
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct BoundOptions {
    /// Charge K−1 c-U calls per shot instead of the mean (K−1)/2
    #[arg(long)]
    worst_case_depth: bool,
    #[arg(long, default_value = "maintext")]
    k_strategy: KStrategy,
}

impl BoundOptions {
    fn policy(&self) -> DepthPolicy {
        if self.worst_case_depth {
            DepthPolicy::WorstCase
        } else {
            DepthPolicy::Expected
        }
    }
}

#[derive(Args)]
struct FtCompareArgs {
    #[arg(long = "N", default_value_t = 100)]
    n: u64,
    #[arg(long = "D", default_value_t = 1000)]
    depth: u64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
    #[arg(long = "A", default_value_t = 0.5)]
    a: f64,
    #[arg(long = "B", default_value_t = 1.6)]
    b: f64,
    #[arg(long, default_value_t = 3)]
    d_min: u32,
    #[arg(long, default_value_t = 30)]
    d_max: u32,
    #[command(flatten)]
    bound: BoundOptions,
    /// CSV destination (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated decay rates
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001,0.00001")]
    lambda_list: Vec<f64>,
    /// Accuracy range as base-10 exponents `lo,hi`
    #[arg(long, value_delimiter = ',', default_value = "-5,-1", allow_hyphen_values = true)]
    epsilon_decades: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    points_per_decade: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[command(flatten)]
    bound: BoundOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    bound: BoundOptions,
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Shot count
    #[arg(long = "M")]
    shots: u64,
    #[arg(long = "J")]
    grid: Option<u64>,
    #[arg(long = "K")]
    max_depth: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "maintext")]
    k_strategy: KStrategy,
    /// Write the sampled spectrum as CSV
    #[arg(long)]
    spectrum_out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fig2(a) => campaign(CampaignKind::Fig2, a),
        Command::Fig3(a) => campaign(CampaignKind::Fig3, a),
        Command::Fig4(a) => campaign(CampaignKind::Fig4, a),
        Command::Fig5(a) => campaign(CampaignKind::Fig5, a),
        Command::Fig6(a) => campaign(CampaignKind::Fig6, a),
        Command::Validate(a) => campaign(CampaignKind::ValidateBound, a),
        Command::FtCompare(a) => ft_compare(a),
        Command::Sweep(a) => sweep(a),
        Command::Bound(a) => bound(a),
        Command::Trial(a) => trial(a),
    }
}

fn load_config(kind: CampaignKind, path: Option<&Path>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::for_kind(kind),
    };
    match &cfg.campaign {
        Some(c) if c.kind != kind => bail!(
            "config describes a `{}` campaign but `{}` was requested",
            c.kind.name(),
            kind.name()
        ),
        Some(_) => {}
        None => cfg.campaign = RunConfig::for_kind(kind).campaign,
    }
    Ok(cfg)
}

fn campaign(kind: CampaignKind, args: CampaignArgs) -> Result<()> {
    let mut cfg = load_config(kind, args.config.as_deref())?;
    if let Some(c) = cfg.campaign.as_mut() {
        if args.seed.is_some() {
            c.seed = args.seed;
        }
        if args.trials.is_some() {
            c.trials = args.trials;
        }
        if args.plots {
            c.plots = Some(true);
        }
    }
    let spec = CampaignSpec::new(cfg, &args.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()?;
    let manifest = pool.install(|| run_campaign(&spec))?;
    for o in &manifest.outputs {
        println!("{}  {}", o.sha256, args.out.join(&o.file).display());
    }
    println!("{}", serde_json::to_string_pretty(&manifest.summary)?);
    Ok(())
}

fn emit(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => table.write(p)?,
        None => print!("{}", String::from_utf8(table.to_csv_bytes()?)?),
    }
    Ok(())
}

fn ft_compare(a: FtCompareArgs) -> Result<()> {
    let instance = ProblemInstance::new(a.n, a.depth, a.epsilon, a.delta)?;
    let arch = ArchitectureParams::new(a.a, a.b)?;
    let options = RfeCostOptions {
        strategy: a.bound.k_strategy,
        policy: a.bound.policy(),
    };
    let rows = ft::compare_sweep(&instance, &arch, a.d_min, a.d_max, options)?;
    emit(&output::comparison_table(&rows), a.out.as_deref())?;
    eprintln!(
        "QPE minimal distance: {}",
        ft::qpe_min_distance(&instance, &arch)
    );
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let [lo, hi] = a.epsilon_decades[..] else {
        bail!("--epsilon-decades takes two values");
    };
    if lo >= hi {
        bail!("--epsilon-decades needs lo < hi");
    }
    let eps = bounds::epsilon_grid(lo, hi, a.points_per_decade);
    let rows = bounds::sweep_runtime_curves(&a.lambda_list, &eps, a.delta, a.bound.k_strategy, a.bound.policy())?;
    emit(&output::sweep_table(&rows), a.out.as_deref())
}

fn bound(a: BoundArgs) -> Result<()> {
    let inputs = BoundInputs::new(a.epsilon, a.delta, a.lambda, a.bound.k_strategy)?;
    let b = bounds::breakdown(&inputs, a.bound.policy())?;
    let value = serde_json::json!({ "inputs": inputs, "bound": b });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn trial(a: TrialArgs) -> Result<()> {
    let cfg = match (a.grid, a.max_depth) {
        (None, None) => RfeConfig::from_accuracy(a.theta, a.epsilon, a.lambda, a.shots, a.seed, a.k_strategy)?,
        (grid, depth) => {
            let grid = grid.unwrap_or_else(|| rfe::grid_size(a.epsilon));
            let depth = depth.unwrap_or_else(|| a.k_strategy.depth(a.epsilon, a.lambda).min(grid));
            RfeConfig::new(a.theta, a.epsilon, a.lambda, grid, depth, a.shots, a.seed)?
        }
    };
    let start = Instant::now();
    let (spectrum, est) = rfe::run_rfe_trial(&cfg, 0, Sampler::default())?;
    let report = TrialReport {
        config: cfg,
        peak_index: est.peak_index,
        theta_hat: est.theta_hat,
        success: est.success,
        wallclock_ns: start.elapsed().as_nanos(),
    };
    if let Some(p) = &a.spectrum_out {
        output::spectrum_table(&spectrum.values()).write(p)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
