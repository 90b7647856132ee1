//! Seeded Monte Carlo experiment engine.
//!
//! Every sample's random stream is derived from
//! `(master_seed, trial, point, sample)` packed into a 32-byte cipher seed,
//! so aggregates are a pure function of the configuration: samples may be
//! evaluated on any number of worker threads and the result is identical to
//! sequential execution. Reduction runs sequentially over the ordered sample
//! rows with compensated (Neumaier) summation.
//!
//! Samples whose minimum power exceeds the budget are recorded as rejected
//! and excluded from the statistics; a sweep never aborts because of them.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelRealization, PlacementSpec};
use crate::ee::{dinkelbach_joint, DEFAULT_EPSILON, DEFAULT_RATE_BRACKET};
use crate::erpa::{beta_recursion, solve_erpa};
use crate::error::{Error, Result};
use crate::fairness::{it_fairness, jain_index};
use crate::rate::{ica_allocation, rates_for_allocation, resource_efficiency, PowerModel};
use crate::scenario::Scenario;

/// Which allocation strategies a rate sweep scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    Erpa,
    Ica,
    Both,
}

impl Strategy {
    fn wants_erpa(self) -> bool {
        matches!(self, Strategy::Erpa | Strategy::Both)
    }

    fn wants_ica(self) -> bool {
        matches!(self, Strategy::Ica | Strategy::Both)
    }
}

/// What is swept across the experiment's points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Sweep {
    /// Equal-rate targets in bit/s/Hz, scored by the minimum-power solver.
    Rate { targets: Vec<f64> },
    /// User counts on a disc of the given radius, scored by the joint
    /// energy-efficiency optimum.
    UserCount { user_counts: Vec<usize>, radius_m: f64 },
    /// Disc radii at the scenario's user count, scored by the joint
    /// energy-efficiency optimum.
    Radius { radii_m: Vec<f64> },
    /// Rate grid for an energy-efficiency curve, plus the joint optimum
    /// reported separately.
    EeCurve { rate_grid: Vec<f64> },
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub power_model: PowerModel,
    pub sweep: Sweep,
    pub strategy: Strategy,
    /// Samples per sweep point and trial.
    pub samples: usize,
    /// Independent repetitions whose spread estimates aggregate uncertainty.
    pub trials: usize,
    pub master_seed: u64,
    /// Resource-efficiency weight in watts.
    pub xi0: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.power_model.validate()?;
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !self.xi0.is_finite() || self.xi0 < 0.0 {
            return Err(Error::InvalidParameter { what: "resource-efficiency weight", value: self.xi0 });
        }
        match &self.sweep {
            Sweep::Rate { targets } => {
                if targets.is_empty() {
                    return Err(Error::InvalidConfig("rate sweep needs at least one target".into()));
                }
                for &r in targets {
                    if !r.is_finite() || r <= 0.0 {
                        return Err(Error::InvalidParameter { what: "target rate", value: r });
                    }
                }
            }
            Sweep::EeCurve { rate_grid } => {
                if rate_grid.is_empty() {
                    return Err(Error::InvalidConfig("ee-curve sweep needs a nonempty rate grid".into()));
                }
                for &r in rate_grid {
                    if !r.is_finite() || r <= 0.0 {
                        return Err(Error::InvalidParameter { what: "grid rate", value: r });
                    }
                }
                if self.strategy != Strategy::Erpa {
                    return Err(Error::InvalidConfig(
                        "ee-curve sweeps score the equal-rate allocation only; use strategy erpa".into(),
                    ));
                }
            }
            Sweep::UserCount { user_counts, radius_m } => {
                if user_counts.is_empty() {
                    return Err(Error::InvalidConfig("user-count sweep needs at least one count".into()));
                }
                if user_counts.contains(&0) {
                    return Err(Error::InvalidConfig("user counts must be at least 1".into()));
                }
                if !radius_m.is_finite() || *radius_m <= 0.0 {
                    return Err(Error::InvalidParameter { what: "sweep radius", value: *radius_m });
                }
                if self.strategy != Strategy::Erpa {
                    return Err(Error::InvalidConfig(
                        "user-count sweeps score the joint EE optimum only; use strategy erpa".into(),
                    ));
                }
            }
            Sweep::Radius { radii_m } => {
                if radii_m.is_empty() {
                    return Err(Error::InvalidConfig("radius sweep needs at least one radius".into()));
                }
                for &r in radii_m {
                    if !r.is_finite() || r <= 0.0 {
                        return Err(Error::InvalidParameter { what: "sweep radius", value: r });
                    }
                }
                if self.strategy != Strategy::Erpa {
                    return Err(Error::InvalidConfig(
                        "radius sweeps score the joint EE optimum only; use strategy erpa".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Mean, per-sample standard deviation, and across-trial standard deviation
/// of one metric at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std_dev: f64,
    pub trial_std: f64,
}

/// Aggregated metrics for one sweep point and strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointStats {
    /// Target rate, user count, or radius depending on the sweep.
    pub sweep_value: f64,
    /// `"erpa"`, `"ica"`, or `"ee-joint"`.
    pub strategy: String,
    pub transmit_power: MetricStats,
    pub sum_rate: MetricStats,
    pub energy_efficiency: MetricStats,
    pub resource_efficiency: MetricStats,
    pub jain: MetricStats,
    pub it_fairness: MetricStats,
    /// Per-user mean power fractions over accepted samples.
    pub mean_fractions: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

/// All sweep points of one experiment plus seed provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentAggregate {
    pub points: Vec<PointStats>,
    /// Joint energy-efficiency optimum, present for ee-curve sweeps. Its
    /// sweep value is the mean optimal per-user rate.
    pub ee_optimum: Option<PointStats>,
    pub samples_per_trial: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// How fairness was averaged: indices are computed per realization and
    /// then averaged, not computed on averaged rates.
    pub fairness_averaging: String,
}

/// Resource-efficiency profile over user counts at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReProfileRow {
    pub user_count: usize,
    pub resource_efficiency: f64,
    pub energy_efficiency: f64,
    pub sum_rate: f64,
    pub transmit_power: f64,
}

/// Best user count by mean resource efficiency, with the full profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReTradeoff {
    pub radius_m: f64,
    pub best_user_count: usize,
    pub profile: Vec<ReProfileRow>,
}

/// Derives the random stream for one sample. The four coordinates fill the
/// 32-byte cipher seed, so distinct samples get independent streams and the
/// mapping is stable across runs and worker counts.
pub fn sample_rng(master_seed: u64, trial: u64, point: u64, sample: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&trial.to_le_bytes());
    seed[16..24].copy_from_slice(&point.to_le_bytes());
    seed[24..32].copy_from_slice(&sample.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Compensated (Neumaier) summation; the running order is fixed by the
/// caller, so results do not depend on scheduling.
fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Metrics of one accepted sample.
#[derive(Debug, Clone)]
struct SampleMetrics {
    transmit_power: f64,
    sum_rate: f64,
    energy_efficiency: f64,
    resource_efficiency: f64,
    jain: f64,
    it_fairness: f64,
    fractions: Vec<f64>,
}

type Outcome = Option<SampleMetrics>;

/// Draws the channel realization for one sample, retrying the (practically
/// impossible) degenerate draws on fresh sub-streams.
fn realize_sample(
    scenario: &Scenario,
    placement: &PlacementSpec,
    master_seed: u64,
    trial: u64,
    point: u64,
    sample: u64,
) -> Result<Option<ChannelRealization>> {
    for retry in 0..8u64 {
        let mut rng = sample_rng(master_seed, trial, point, sample | (retry << 48));
        match crate::channel::realize_channels(
            placement,
            scenario.path_loss_exponent,
            scenario.noise_power,
            scenario.fading,
            &mut rng,
        ) {
            Ok(ch) => return Ok(Some(ch)),
            Err(Error::DegenerateChannel) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn score_allocation(
    ch: &ChannelRealization,
    fractions: Vec<f64>,
    total_power: f64,
    pm: &PowerModel,
    xi0: f64,
) -> Result<SampleMetrics> {
    let (rates, sum_rate) = rates_for_allocation(&fractions, total_power, ch)?;
    let consumed = pm.consumed_power(total_power, ch.user_count());
    let ee = sum_rate / consumed;
    let report = it_fairness(&rates, &fractions, total_power, ch)?;
    Ok(SampleMetrics {
        transmit_power: total_power,
        sum_rate,
        energy_efficiency: ee,
        resource_efficiency: resource_efficiency(ee, sum_rate, xi0),
        jain: jain_index(&rates)?,
        it_fairness: report.info_theoretic,
        fractions,
    })
}

/// Scores one ERPA sample; budget overruns become rejections.
fn erpa_sample(
    target_rate: f64,
    ch: &ChannelRealization,
    pm: &PowerModel,
    xi0: f64,
) -> Result<Outcome> {
    match solve_erpa(target_rate, ch, pm) {
        Ok(sol) => Ok(Some(score_allocation(ch, sol.fractions, sol.min_power, pm, xi0)?)),
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Scores one joint energy-efficiency sample; budget overruns become
/// rejections.
fn joint_sample(ch: &ChannelRealization, pm: &PowerModel, xi0: f64) -> Result<Outcome> {
    match dinkelbach_joint(ch, pm, DEFAULT_EPSILON, DEFAULT_RATE_BRACKET) {
        Ok(sol) => {
            let fractions = beta_recursion(sol.optimal_rate, sol.optimal_power, ch);
            Ok(Some(score_allocation(ch, fractions, sol.optimal_power, pm, xi0)?))
        }
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Scores one ICA sample at a fixed matched power.
fn ica_sample(
    matched_power: f64,
    ch: &ChannelRealization,
    pm: &PowerModel,
    xi0: f64,
) -> Result<Outcome> {
    let fractions = ica_allocation(ch);
    Ok(Some(score_allocation(ch, fractions, matched_power, pm, xi0)?))
}

/// Evaluates all `(trial, sample)` cells of one sweep point in parallel,
/// returning rows in deterministic `(trial, sample)` order.
fn evaluate_rows<F>(config: &ExperimentConfig, eval: F) -> Result<Vec<Vec<Outcome>>>
where
    F: Fn(u64, u64) -> Result<Outcome> + Sync,
{
    (0..config.trials as u64)
        .map(|trial| {
            (0..config.samples as u64)
                .into_par_iter()
                .map(|sample| eval(trial, sample))
                .collect::<Result<Vec<Outcome>>>()
        })
        .collect()
}

fn stats_over<F>(rows: &[Vec<Outcome>], metric: F) -> MetricStats
where
    F: Fn(&SampleMetrics) -> f64,
{
    let pooled: Vec<f64> =
        rows.iter().flatten().filter_map(|o| o.as_ref().map(&metric)).collect();
    if pooled.is_empty() {
        return MetricStats { mean: 0.0, std_dev: 0.0, trial_std: 0.0 };
    }
    let n = pooled.len() as f64;
    let mean = neumaier_sum(pooled.iter().copied()) / n;
    let std_dev = if pooled.len() > 1 {
        (neumaier_sum(pooled.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)).sqrt()
    } else {
        0.0
    };

    let trial_means: Vec<f64> = rows
        .iter()
        .filter_map(|row| {
            let vals: Vec<f64> = row.iter().filter_map(|o| o.as_ref().map(&metric)).collect();
            if vals.is_empty() {
                None
            } else {
                Some(neumaier_sum(vals.iter().copied()) / vals.len() as f64)
            }
        })
        .collect();
    let trial_std = if trial_means.len() > 1 {
        let tm = neumaier_sum(trial_means.iter().copied()) / trial_means.len() as f64;
        (neumaier_sum(trial_means.iter().map(|x| (x - tm) * (x - tm)))
            / (trial_means.len() as f64 - 1.0))
            .sqrt()
    } else {
        0.0
    };
    MetricStats { mean, std_dev, trial_std }
}

fn assemble_point(
    sweep_value: f64,
    strategy: &str,
    user_count: usize,
    rows: &[Vec<Outcome>],
) -> PointStats {
    let accepted = rows.iter().flatten().filter(|o| o.is_some()).count();
    let rejected = rows.iter().flatten().filter(|o| o.is_none()).count();
    let mut mean_fractions = vec![0.0; user_count];
    if accepted > 0 {
        for m in rows.iter().flatten().flatten() {
            for (acc, b) in mean_fractions.iter_mut().zip(&m.fractions) {
                *acc += b;
            }
        }
        for b in &mut mean_fractions {
            *b /= accepted as f64;
        }
    }
    PointStats {
        sweep_value,
        strategy: strategy.to_string(),
        transmit_power: stats_over(rows, |m| m.transmit_power),
        sum_rate: stats_over(rows, |m| m.sum_rate),
        energy_efficiency: stats_over(rows, |m| m.energy_efficiency),
        resource_efficiency: stats_over(rows, |m| m.resource_efficiency),
        jain: stats_over(rows, |m| m.jain),
        it_fairness: stats_over(rows, |m| m.it_fairness),
        mean_fractions,
        accepted,
        rejected,
    }
}

/// One rate-sweep point: ERPA rows, plus ICA rows at the ERPA-matched mean
/// power when requested.
fn rate_point(
    config: &ExperimentConfig,
    point: u64,
    target_rate: f64,
) -> Result<Vec<PointStats>> {
    let placement = config.scenario.placement.clone();
    let erpa_rows = evaluate_rows(config, |trial, sample| {
        match realize_sample(&config.scenario, &placement, config.master_seed, trial, point, sample)? {
            Some(ch) => erpa_sample(target_rate, &ch, &config.power_model, config.xi0),
            None => Ok(None),
        }
    })?;

    let mut out = Vec::new();
    if config.strategy.wants_erpa() {
        out.push(assemble_point(target_rate, "erpa", placement.user_count(), &erpa_rows));
    }
    if config.strategy.wants_ica() {
        let powers: Vec<f64> = erpa_rows
            .iter()
            .flatten()
            .filter_map(|o| o.as_ref().map(|m| m.transmit_power))
            .collect();
        if powers.is_empty() {
            // Every sample blew the budget; report an empty ICA point.
            out.push(assemble_point(target_rate, "ica", placement.user_count(), &erpa_rows));
            return Ok(out);
        }
        let matched_power = neumaier_sum(powers.iter().copied()) / powers.len() as f64;
        let ica_rows = evaluate_rows(config, |trial, sample| {
            // Score the same realizations the ERPA pass accepted.
            if erpa_rows[trial as usize][sample as usize].is_none() {
                return Ok(None);
            }
            match realize_sample(&config.scenario, &placement, config.master_seed, trial, point, sample)? {
                Some(ch) => ica_sample(matched_power, &ch, &config.power_model, config.xi0),
                None => Ok(None),
            }
        })?;
        out.push(assemble_point(target_rate, "ica", placement.user_count(), &ica_rows));
    }
    Ok(out)
}

/// One joint energy-efficiency point (user-count, radius, or the ee-curve
/// optimum).
fn joint_point(
    config: &ExperimentConfig,
    point: u64,
    placement: &PlacementSpec,
    sweep_value: f64,
) -> Result<PointStats> {
    let rows = evaluate_rows(config, |trial, sample| {
        match realize_sample(&config.scenario, placement, config.master_seed, trial, point, sample)? {
            Some(ch) => joint_sample(&ch, &config.power_model, config.xi0),
            None => Ok(None),
        }
    })?;
    let mut stats = assemble_point(sweep_value, "ee-joint", placement.user_count(), &rows);
    if sweep_value.is_nan() {
        // The ee-curve optimum reports the mean optimal per-user rate as its
        // sweep value so every emitted number stays finite.
        let m = placement.user_count() as f64;
        stats.sweep_value = if stats.accepted > 0 { stats.sum_rate.mean / m } else { 0.0 };
    }
    Ok(stats)
}

/// Runs the configured sweep. Deterministic for a fixed master seed
/// regardless of how many worker threads evaluate the samples.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentAggregate> {
    config.validate()?;
    let mut points = Vec::new();
    let mut ee_optimum = None;
    match &config.sweep {
        Sweep::Rate { targets } => {
            for (i, &r) in targets.iter().enumerate() {
                points.extend(rate_point(config, i as u64, r)?);
            }
        }
        Sweep::EeCurve { rate_grid } => {
            for (i, &r) in rate_grid.iter().enumerate() {
                points.extend(rate_point(config, i as u64, r)?);
            }
            ee_optimum = Some(joint_point(
                config,
                rate_grid.len() as u64,
                &config.scenario.placement.clone(),
                f64::NAN,
            )?);
        }
        Sweep::UserCount { user_counts, radius_m } => {
            for (i, &m) in user_counts.iter().enumerate() {
                let placement = PlacementSpec::uniform_disc(*radius_m, m)?;
                points.push(joint_point(config, i as u64, &placement, m as f64)?);
            }
        }
        Sweep::Radius { radii_m } => {
            for (i, &radius) in radii_m.iter().enumerate() {
                let placement =
                    PlacementSpec::uniform_disc(radius, config.scenario.user_count())?;
                points.push(joint_point(config, i as u64, &placement, radius)?);
            }
        }
    }
    Ok(ExperimentAggregate {
        points,
        ee_optimum,
        samples_per_trial: config.samples,
        trials: config.trials,
        master_seed: config.master_seed,
        fairness_averaging: "per-realization indices, then averaged".to_string(),
    })
}

/// Runs a user-count sweep and returns the count with the best mean
/// resource efficiency. With a zero weight this reduces to the best sum
/// rate.
pub fn re_tradeoff(config: &ExperimentConfig) -> Result<ReTradeoff> {
    let radius_m = match &config.sweep {
        Sweep::UserCount { radius_m, .. } => *radius_m,
        _ => {
            return Err(Error::InvalidConfig(
                "resource-efficiency trade-off needs a user-count sweep".into(),
            ))
        }
    };
    let aggregate = run_experiment(config)?;
    let profile: Vec<ReProfileRow> = aggregate
        .points
        .iter()
        .map(|p| ReProfileRow {
            user_count: p.sweep_value as usize,
            resource_efficiency: p.resource_efficiency.mean,
            energy_efficiency: p.energy_efficiency.mean,
            sum_rate: p.sum_rate.mean,
            transmit_power: p.transmit_power.mean,
        })
        .collect();
    let best = profile
        .iter()
        .max_by(|a, b| a.resource_efficiency.total_cmp(&b.resource_efficiency))
        .expect("validated sweep is nonempty");
    Ok(ReTradeoff { radius_m, best_user_count: best.user_count, profile })
}
