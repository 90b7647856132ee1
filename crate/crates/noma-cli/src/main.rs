//! `noma` — command-line front end for the NOMA power-allocation library.
//!
//! Subcommands: `solve` (one minimum-power equal-rate allocation, JSON to
//! stdout), `experiment` (declarative Monte Carlo sweeps from a config file
//! or a named preset, CSV/JSON to an output directory), and `ee-curve`
//! (energy-efficiency curve with the joint optimum marked).
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 infeasible (power
//! budget or optimizer), 4 I/O failure.

mod config;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;

use noma_core::channel::{ChannelRealization, Fading};
use noma_core::ee::dinkelbach_joint;
use noma_core::erpa::solve_erpa;
use noma_core::error::Error as CoreError;
use noma_core::fairness::it_fairness;
use noma_core::rate::PowerModel;
use noma_core::scenario::{Scenario, FIGURE_NOISE_W};
use noma_core::sim::{run_experiment, ExperimentConfig, Strategy, Sweep};

use output::{config_hash, ensure_out_dir, write_aggregate_json, write_sweep_csv, RunManifest};
use presets::PresetOverrides;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "NOMA_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(CoreError),
    Io(std::io::Error),
    Config(config::ConfigError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "config: {e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::BudgetExceeded { .. }
                | CoreError::NoInteriorMaximum { .. }
                | CoreError::NotConverged { .. }
                | CoreError::BracketFailure { .. }
                | CoreError::DegenerateChannel => 3,
                _ => 2,
            },
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "noma", version, about = "Downlink NOMA power allocation: solvers and Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one minimum-power equal-rate allocation and print it as JSON.
    Solve(SolveArgs),
    /// Run a Monte Carlo experiment from a config file or preset.
    Experiment(ExperimentArgs),
    /// Emit the energy-efficiency curve over a rate grid with the joint
    /// optimum marked.
    EeCurve(EeCurveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FadingArg {
    Unit,
    Rayleigh,
}

impl From<FadingArg> for Fading {
    fn from(f: FadingArg) -> Fading {
        match f {
            FadingArg::Unit => Fading::Unit,
            FadingArg::Rayleigh => Fading::Rayleigh,
        }
    }
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel power gains, comma separated (mutually exclusive with --scenario).
    #[arg(long, value_delimiter = ',', conflicts_with = "scenario")]
    gains: Option<Vec<f64>>,
    /// Fixed scenario index (1..=3).
    #[arg(long)]
    scenario: Option<usize>,
    /// Path-loss exponent for --scenario.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Noise power in watts (defaults to 1e-6 with --scenario).
    #[arg(long)]
    noise: Option<f64>,
    /// Fading model for --scenario.
    #[arg(long, value_enum, default_value_t = FadingArg::Unit)]
    fading: FadingArg,
    /// Seed for the fading draw when --fading rayleigh.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ChannelArgs {
    fn realize(&self) -> Result<ChannelRealization, CliError> {
        match (&self.gains, self.scenario) {
            (Some(gains), None) => {
                let noise = self
                    .noise
                    .ok_or_else(|| CliError::Usage("--gains requires --noise".into()))?;
                Ok(ChannelRealization::new(gains.clone(), noise)?)
            }
            (None, Some(index)) => {
                let scenario = Scenario::fixed(
                    index,
                    self.alpha,
                    self.noise.unwrap_or(FIGURE_NOISE_W),
                    self.fading.into(),
                )?;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
                Ok(scenario.realize(&mut rng)?)
            }
            (None, None) => Err(CliError::Usage("provide --gains or --scenario".into())),
            (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
        }
    }
}

#[derive(Args)]
struct PowerArgs {
    /// RF amplifier inefficiency (>= 1).
    #[arg(long, default_value_t = 1.4)]
    rho: f64,
    /// Circuit power per user in watts.
    #[arg(long, default_value_t = 0.25)]
    circuit_power: f64,
    /// Transmit power budget in watts.
    #[arg(long, default_value_t = 120.0)]
    budget: f64,
}

impl PowerArgs {
    fn model(&self) -> PowerModel {
        PowerModel {
            amplifier_inefficiency: self.rho,
            circuit_power_per_user: self.circuit_power,
            power_budget: self.budget,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Target equal rate in bit/s/Hz.
    #[arg(long)]
    rate: f64,
    #[command(flatten)]
    power: PowerArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset: fig-rate-power, table3, table4, ee-curve.
    #[arg(long)]
    preset: Option<String>,
    /// Path-loss exponent override (presets only).
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed scenario override (presets only).
    #[arg(long)]
    scenario: Option<usize>,
    /// Sample-count override (presets only).
    #[arg(long)]
    samples: Option<usize>,
    /// Trial-count override (presets only).
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed override (presets only).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $NOMA_OUT_DIR or ./noma-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EeCurveArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Rate grid: comma list or start:stop:step, bit/s/Hz.
    #[arg(long, default_value = "0.05:3.0:0.05")]
    rates: String,
    /// Samples per grid point (fading average when > 1 with rayleigh).
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[command(flatten)]
    power: PowerArgs,
    /// Output directory (default: $NOMA_OUT_DIR or ./noma-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("noma-out"))
    })
}

fn parse_rate_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = CliError::Usage;
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("rate grid '{spec}' must be start:stop:step")));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("cannot parse rate grid '{spec}'")))?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || start <= 0.0 || stop < start {
            return Err(bad(format!("degenerate rate grid '{spec}'")));
        }
        let mut grid = Vec::new();
        let mut i = 0usize;
        loop {
            let r = start + step * i as f64;
            if r > stop + 1e-12 {
                break;
            }
            grid.push(r);
            i += 1;
        }
        Ok(grid)
    } else {
        let grid: Vec<f64> = spec
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("cannot parse rate list '{spec}'")))?;
        if grid.is_empty() {
            return Err(bad("rate grid is empty".into()));
        }
        Ok(grid)
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let ch = args.channel.realize()?;
    let pm = args.power.model();
    let sol = solve_erpa(args.rate, &ch, &pm)?;
    // Single-user channels have no deviation estimate; report null indices.
    let report = it_fairness(&sol.rates, &sol.fractions, sol.min_power, &ch).ok();
    let consumed = pm.consumed_power(sol.min_power, ch.user_count());
    let sum_rate: f64 = sol.rates.iter().sum();

    #[derive(serde::Serialize)]
    struct SolveOutput<'a> {
        target_rate: f64,
        min_power: f64,
        fractions: &'a [f64],
        rates: &'a [f64],
        sum_rate: f64,
        residual: f64,
        rf_power: f64,
        consumed_power: f64,
        energy_efficiency: f64,
        jain: Option<f64>,
        it_fairness: Option<f64>,
    }
    let out = SolveOutput {
        target_rate: sol.target_rate,
        min_power: sol.min_power,
        fractions: &sol.fractions,
        rates: &sol.rates,
        sum_rate,
        residual: sol.residual,
        rf_power: pm.amplifier_inefficiency * sol.min_power,
        consumed_power: consumed,
        energy_efficiency: sum_rate / consumed,
        jain: report.as_ref().map(|r| r.jain),
        it_fairness: report.as_ref().map(|r| r.info_theoretic),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("solution serializes"));
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let out = ensure_out_dir(&out_dir(args.out))?;
    if let Some(preset) = &args.preset {
        let overrides = PresetOverrides {
            alpha: args.alpha,
            scenario: args.scenario,
            samples: args.samples,
            trials: args.trials,
            seed: args.seed,
        };
        return presets::run_preset(preset, overrides, &out);
    }
    let path = args
        .config
        .ok_or_else(|| CliError::Usage("experiment needs --config FILE or --preset NAME".into()))?;
    let text = std::fs::read_to_string(&path)?;
    let config = config::parse(&text).map_err(CliError::Config)?;

    let canonical = config::canonical(&config);
    let hash = config_hash(&canonical);
    let aggregate = run_experiment(&config)?;

    let csv_name = match &config.sweep {
        Sweep::Rate { .. } => "rate_sweep.csv",
        Sweep::UserCount { .. } => "user_count_sweep.csv",
        Sweep::Radius { .. } => "radius_sweep.csv",
        Sweep::EeCurve { .. } => "ee_curve.csv",
    };
    std::fs::write(out.join("config.canonical.cfg"), &canonical)?;
    write_sweep_csv(&out.join(csv_name), &hash, &aggregate)?;
    write_aggregate_json(&out.join("aggregate.json"), &hash, &aggregate)?;
    RunManifest::new(
        hash.clone(),
        config.master_seed,
        vec![csv_name.to_string(), "aggregate.json".into(), "config.canonical.cfg".into()],
    )
    .write(&out)?;
    eprintln!("wrote {csv_name}, aggregate.json, manifest.json to {} ({hash})", out.display());
    Ok(())
}

fn cmd_ee_curve(args: EeCurveArgs) -> Result<(), CliError> {
    let rate_grid = parse_rate_grid(&args.rates)?;
    let out = ensure_out_dir(&out_dir(args.out.clone()))?;
    let pm = args.power.model();

    if args.channel.gains.is_some() {
        return ee_curve_from_gains(&args, &rate_grid, &pm, &out);
    }
    let index = args
        .channel
        .scenario
        .ok_or_else(|| CliError::Usage("provide --gains or --scenario".into()))?;
    let scenario = Scenario::fixed(
        index,
        args.channel.alpha,
        args.channel.noise.unwrap_or(FIGURE_NOISE_W),
        args.channel.fading.into(),
    )?;

    let config = ExperimentConfig {
        scenario,
        power_model: pm,
        sweep: Sweep::EeCurve { rate_grid },
        strategy: Strategy::Erpa,
        samples: args.samples,
        trials: 1,
        master_seed: args.channel.seed,
        xi0: noma_core::scenario::DEFAULT_XI0,
    };
    let canonical = config::canonical(&config);
    let hash = config_hash(&canonical);
    let aggregate = run_experiment(&config)?;

    std::fs::write(out.join("config.canonical.cfg"), &canonical)?;
    write_sweep_csv(&out.join("ee_curve.csv"), &hash, &aggregate)?;
    write_aggregate_json(&out.join("aggregate.json"), &hash, &aggregate)?;
    RunManifest::new(
        hash.clone(),
        config.master_seed,
        vec!["ee_curve.csv".into(), "aggregate.json".into(), "config.canonical.cfg".into()],
    )
    .write(&out)?;

    if let Some(opt) = &aggregate.ee_optimum {
        let users = config.scenario.user_count() as f64;
        eprintln!(
            "optimum: EE* = {:.4} bit/J/Hz at R_s = {:.4} bit/s/Hz \
             (transmit {:.4} W, RF consumed {:.4} W, total consumed {:.4} W)",
            opt.energy_efficiency.mean,
            opt.sum_rate.mean,
            opt.transmit_power.mean,
            pm.amplifier_inefficiency * opt.transmit_power.mean,
            pm.amplifier_inefficiency * opt.transmit_power.mean
                + users * pm.circuit_power_per_user,
        );
    }
    eprintln!("wrote ee_curve.csv, aggregate.json, manifest.json to {}", out.display());
    Ok(())
}

/// Energy-efficiency curve on an explicit gain vector: no placement or
/// fading, just the one realization.
fn ee_curve_from_gains(
    args: &EeCurveArgs,
    rate_grid: &[f64],
    pm: &PowerModel,
    out: &std::path::Path,
) -> Result<(), CliError> {
    let gains = args.channel.gains.clone().expect("caller checked");
    let noise =
        args.channel.noise.ok_or_else(|| CliError::Usage("--gains requires --noise".into()))?;
    let ch = ChannelRealization::new(gains, noise)?;
    let users = ch.user_count();

    let mut file = std::fs::File::create(out.join("ee_curve.csv"))?;
    use std::io::Write;
    writeln!(file, "# run (single realization, no config)")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["rate", "sum_rate", "transmit_power", "rf_power", "consumed_power", "ee", "optimum"])?;
    for &r in rate_grid {
        match solve_erpa(r, &ch, pm) {
            Ok(sol) => {
                let consumed = pm.consumed_power(sol.min_power, users);
                let sum_rate: f64 = sol.rates.iter().sum();
                w.write_record(&[
                    r.to_string(),
                    sum_rate.to_string(),
                    sol.min_power.to_string(),
                    (pm.amplifier_inefficiency * sol.min_power).to_string(),
                    consumed.to_string(),
                    (sum_rate / consumed).to_string(),
                    "0".to_string(),
                ])?;
            }
            Err(CoreError::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e.into()),
        }
    }
    let sol = dinkelbach_joint(
        &ch,
        pm,
        noma_core::ee::DEFAULT_EPSILON,
        noma_core::ee::DEFAULT_RATE_BRACKET,
    )?;
    let consumed = pm.consumed_power(sol.optimal_power, users);
    w.write_record(&[
        sol.optimal_rate.to_string(),
        sol.sum_rate(users).to_string(),
        sol.optimal_power.to_string(),
        (pm.amplifier_inefficiency * sol.optimal_power).to_string(),
        consumed.to_string(),
        sol.q_star.to_string(),
        "1".to_string(),
    ])?;
    w.flush()?;
    eprintln!(
        "optimum: EE* = {:.4} bit/J/Hz at R_s = {:.4} bit/s/Hz (transmit {:.4} W, consumed {:.4} W)",
        sol.q_star,
        sol.sum_rate(users),
        sol.optimal_power,
        consumed
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::EeCurve(args) => cmd_ee_curve(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
