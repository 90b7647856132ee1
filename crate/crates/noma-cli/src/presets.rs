//! Named reproduction presets. Each preset pins every constant it uses,
//! prints the pinned values, and writes its data files plus a manifest.
//!
//! Noise powers differ by preset on purpose: the deterministic figure
//! points are only consistent with 1 uW, while the fairness and
//! trade-off tables line up with the parameter table's 0.1 uW. Each preset
//! states which one it pins.

use std::path::Path;

use noma_core::channel::Fading;
use noma_core::rate::PowerModel;
use noma_core::scenario::{
    Scenario, DEFAULT_SAMPLES, DEFAULT_TRIALS, DEFAULT_XI0, DISC_RADII_M, FIGURE_NOISE_W,
    TABLE_NOISE_W,
};
use noma_core::sim::{re_tradeoff, run_experiment, ExperimentConfig, ReTradeoff, Strategy, Sweep};

use crate::config;
use crate::output::{
    config_hash, write_aggregate_json, write_sweep_csv, RunManifest,
};
use crate::CliError;

/// Flag overrides a preset accepts.
#[derive(Debug, Clone, Copy, Default)]
pub struct PresetOverrides {
    pub alpha: Option<f64>,
    pub scenario: Option<usize>,
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

pub const PRESET_NAMES: [&str; 4] = ["fig-rate-power", "table3", "table4", "ee-curve"];

pub fn run_preset(name: &str, ov: PresetOverrides, out: &Path) -> Result<(), CliError> {
    match name {
        "fig-rate-power" => fig_rate_power(ov, out),
        "table3" => table3(ov, out),
        "table4" => table4(ov, out),
        "ee-curve" => ee_curve(ov, out),
        other => Err(CliError::Usage(format!(
            "unknown preset '{other}'; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

fn write_standard_outputs(
    config: &ExperimentConfig,
    out: &Path,
    csv_name: &str,
) -> Result<String, CliError> {
    let canonical = config::canonical(config);
    let hash = config_hash(&canonical);
    let aggregate = run_experiment(config)?;
    std::fs::write(out.join("config.canonical.cfg"), &canonical)?;
    write_sweep_csv(&out.join(csv_name), &hash, &aggregate)?;
    write_aggregate_json(&out.join("aggregate.json"), &hash, &aggregate)?;
    RunManifest::new(
        hash.clone(),
        config.master_seed,
        vec![csv_name.to_string(), "aggregate.json".to_string(), "config.canonical.cfg".to_string()],
    )
    .write(out)?;
    Ok(hash)
}

/// Equal-rate vs inverse-channel rate curves over allocated power: the
/// deterministic per-user-rate figure for a fixed layout.
fn fig_rate_power(ov: PresetOverrides, out: &Path) -> Result<(), CliError> {
    let scenario_index = ov.scenario.unwrap_or(1);
    if !(1..=3).contains(&scenario_index) {
        return Err(CliError::Usage("fig-rate-power takes --scenario 1..=3".into()));
    }
    let rates = vec![0.5, 1.0, 1.5, 2.0, 2.5];
    let config = ExperimentConfig {
        scenario: Scenario::fixed(scenario_index, ov.alpha.unwrap_or(2.0), FIGURE_NOISE_W, Fading::Unit)
            .map_err(CliError::Core)?,
        power_model: PowerModel::simulation_default(),
        sweep: Sweep::Rate { targets: rates.clone() },
        strategy: Strategy::Both,
        samples: ov.samples.unwrap_or(1),
        trials: ov.trials.unwrap_or(1),
        master_seed: ov.seed.unwrap_or(42),
        xi0: DEFAULT_XI0,
    };
    println!("preset fig-rate-power pinned constants:");
    println!("  scenario {scenario_index}, alpha {}", config.scenario.path_loss_exponent);
    println!("  rates: {rates:?} bit/s/Hz; strategies: erpa + ica at matched power");
    println!("  noise: {FIGURE_NOISE_W:e} W (figure-consistent value); fading: unit");
    print_power_model(&config.power_model);
    let hash = write_standard_outputs(&config, out, "rate_power.csv")?;
    println!("wrote rate_power.csv, aggregate.json, manifest.json ({hash})");
    Ok(())
}

/// Information-theoretic fairness grid: three fixed layouts at line-of-sight
/// attenuation plus the first layout at exponent 3.
fn table3(ov: PresetOverrides, out: &Path) -> Result<(), CliError> {
    let rates = vec![1.0, 1.5, 2.0, 2.5, 3.0];
    let combos: [(usize, f64, &str); 4] = [
        (1, 2.0, "scenario1_alpha2"),
        (2, 2.0, "scenario2_alpha2"),
        (3, 2.0, "scenario3_alpha2"),
        (1, 3.0, "scenario1_alpha3"),
    ];
    let samples = ov.samples.unwrap_or(DEFAULT_SAMPLES);
    let trials = ov.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = ov.seed.unwrap_or(42);

    println!("preset table3 pinned constants:");
    println!("  combos: scenarios 1-3 at alpha 2, scenario 1 at alpha 3");
    println!("  rates: {rates:?} bit/s/Hz; fading: rayleigh");
    println!("  noise: {TABLE_NOISE_W:e} W (parameter-table value)");
    println!("  samples: {samples}; trials: {trials}; seed: {seed}");
    print_power_model(&PowerModel::simulation_default());

    let mut canonical_all = String::new();
    let mut aggregates = Vec::new();
    for (idx, alpha, label) in combos {
        let config = ExperimentConfig {
            scenario: Scenario::fixed(idx, alpha, TABLE_NOISE_W, Fading::Rayleigh)
                .map_err(CliError::Core)?,
            power_model: PowerModel::simulation_default(),
            sweep: Sweep::Rate { targets: rates.clone() },
            strategy: Strategy::Erpa,
            samples,
            trials,
            master_seed: seed,
            xi0: DEFAULT_XI0,
        };
        canonical_all.push_str(&format!("# combo {label}\n"));
        canonical_all.push_str(&config::canonical(&config));
        canonical_all.push('\n');
        let aggregate = run_experiment(&config)?;
        aggregates.push((label, aggregate));
    }
    let hash = config_hash(&canonical_all);
    std::fs::write(out.join("config.canonical.cfg"), &canonical_all)?;

    // Table layout: one row per rate, one fairness column per combo.
    let mut file = std::fs::File::create(out.join("table3.csv"))?;
    use std::io::Write;
    writeln!(file, "# run {hash}")?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["rate".to_string()];
    header.extend(aggregates.iter().map(|(label, _)| format!("it_fairness_{label}")));
    w.write_record(&header)?;
    for (i, r) in rates.iter().enumerate() {
        let mut rec = vec![r.to_string()];
        for (_, agg) in &aggregates {
            rec.push(agg.points[i].it_fairness.mean.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    let map: std::collections::BTreeMap<&str, &noma_core::sim::ExperimentAggregate> =
        aggregates.iter().map(|(l, a)| (*l, a)).collect();
    write_aggregate_json(&out.join("aggregate.json"), &hash, &map)?;
    RunManifest::new(
        hash.clone(),
        seed,
        vec!["table3.csv".into(), "aggregate.json".into(), "config.canonical.cfg".into()],
    )
    .write(out)?;
    println!("wrote table3.csv, aggregate.json, manifest.json ({hash})");
    Ok(())
}

/// Energy-vs-spectral-efficiency trade-off over the user count for each
/// disc radius: best user count by mean resource efficiency.
fn table4(ov: PresetOverrides, out: &Path) -> Result<(), CliError> {
    let alpha = ov.alpha.unwrap_or(2.0);
    let user_counts: Vec<usize> = (2..=12).collect();
    let samples = ov.samples.unwrap_or(DEFAULT_SAMPLES);
    let trials = ov.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = ov.seed.unwrap_or(42);

    println!("preset table4 pinned constants:");
    println!("  alpha {alpha}; radii {DISC_RADII_M:?} m; user counts 2..=12");
    println!("  noise: {TABLE_NOISE_W:e} W (parameter-table value); fading: rayleigh");
    println!("  resource-efficiency weight xi0 = {DEFAULT_XI0} W");
    println!("  samples: {samples}; trials: {trials}; seed: {seed}");
    print_power_model(&PowerModel::simulation_default());

    let mut canonical_all = String::new();
    let mut tradeoffs: Vec<ReTradeoff> = Vec::new();
    for &radius in &DISC_RADII_M {
        let config = ExperimentConfig {
            scenario: Scenario::uniform_disc(radius, 2, alpha, TABLE_NOISE_W, Fading::Rayleigh)
                .map_err(CliError::Core)?,
            power_model: PowerModel::simulation_default(),
            sweep: Sweep::UserCount { user_counts: user_counts.clone(), radius_m: radius },
            strategy: Strategy::Erpa,
            samples,
            trials,
            master_seed: seed,
            xi0: DEFAULT_XI0,
        };
        canonical_all.push_str(&format!("# radius {radius} m\n"));
        canonical_all.push_str(&config::canonical(&config));
        canonical_all.push('\n');
        tradeoffs.push(re_tradeoff(&config)?);
    }
    let hash = config_hash(&canonical_all);
    std::fs::write(out.join("config.canonical.cfg"), &canonical_all)?;

    let alpha_tag = alpha.to_string().replace('.', "_");
    let summary_name = format!("table4_alpha{alpha_tag}.csv");
    let profile_name = format!("table4_alpha{alpha_tag}_profile.csv");

    use std::io::Write;
    let mut file = std::fs::File::create(out.join(&summary_name))?;
    writeln!(file, "# run {hash}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["radius_m", "best_user_count", "ee_mean", "sum_rate_mean", "power_mean", "re_mean"])?;
    for t in &tradeoffs {
        let best = t
            .profile
            .iter()
            .find(|r| r.user_count == t.best_user_count)
            .expect("best row present");
        w.write_record(&[
            t.radius_m.to_string(),
            t.best_user_count.to_string(),
            best.energy_efficiency.to_string(),
            best.sum_rate.to_string(),
            best.transmit_power.to_string(),
            best.resource_efficiency.to_string(),
        ])?;
    }
    w.flush()?;

    let mut file = std::fs::File::create(out.join(&profile_name))?;
    writeln!(file, "# run {hash}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["radius_m", "user_count", "re_mean", "ee_mean", "sum_rate_mean", "power_mean"])?;
    for t in &tradeoffs {
        for row in &t.profile {
            w.write_record(&[
                t.radius_m.to_string(),
                row.user_count.to_string(),
                row.resource_efficiency.to_string(),
                row.energy_efficiency.to_string(),
                row.sum_rate.to_string(),
                row.transmit_power.to_string(),
            ])?;
        }
    }
    w.flush()?;

    write_aggregate_json(&out.join("aggregate.json"), &hash, &tradeoffs)?;
    RunManifest::new(
        hash.clone(),
        seed,
        vec![summary_name.clone(), profile_name, "aggregate.json".into(), "config.canonical.cfg".into()],
    )
    .write(out)?;

    println!("best user count per radius:");
    for t in &tradeoffs {
        println!("  radius {:>5} m -> {} users", t.radius_m, t.best_user_count);
    }
    println!("wrote {summary_name}, profiles, aggregate.json, manifest.json ({hash})");
    Ok(())
}

/// Energy-efficiency curve along the equal-rate family with the joint
/// optimum marked.
fn ee_curve(ov: PresetOverrides, out: &Path) -> Result<(), CliError> {
    let scenario_index = ov.scenario.unwrap_or(1);
    if !(1..=3).contains(&scenario_index) {
        return Err(CliError::Usage("ee-curve takes --scenario 1..=3".into()));
    }
    let grid: Vec<f64> = (1..=60).map(|i| i as f64 * 0.05).collect();
    let config = ExperimentConfig {
        scenario: Scenario::fixed(
            scenario_index,
            ov.alpha.unwrap_or(2.0),
            FIGURE_NOISE_W,
            Fading::Unit,
        )
        .map_err(CliError::Core)?,
        power_model: PowerModel::simulation_default(),
        sweep: Sweep::EeCurve { rate_grid: grid },
        strategy: Strategy::Erpa,
        samples: ov.samples.unwrap_or(1),
        trials: ov.trials.unwrap_or(1),
        master_seed: ov.seed.unwrap_or(42),
        xi0: DEFAULT_XI0,
    };
    println!("preset ee-curve pinned constants:");
    println!("  scenario {scenario_index}, alpha {}", config.scenario.path_loss_exponent);
    println!("  rate grid: 0.05..=3.0 step 0.05 bit/s/Hz");
    println!("  noise: {FIGURE_NOISE_W:e} W (figure-consistent value); fading: unit");
    print_power_model(&config.power_model);
    let hash = write_standard_outputs(&config, out, "ee_curve.csv")?;
    println!("wrote ee_curve.csv, aggregate.json, manifest.json ({hash})");
    Ok(())
}

fn print_power_model(pm: &PowerModel) {
    println!(
        "  power model: budget {} W, amplifier inefficiency {}, circuit power {} W/user",
        pm.power_budget, pm.amplifier_inefficiency, pm.circuit_power_per_user
    );
}
