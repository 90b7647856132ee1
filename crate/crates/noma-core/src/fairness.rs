//! Fairness indices: the Jain index and the information-theoretic index
//! built on deviations from allocation-implied fair rates.

use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::rate::user_rate;

/// Both fairness indices plus the intermediate quantities of the
/// information-theoretic one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    /// Jain index, in `(0, 1]`.
    pub jain: f64,
    /// Information-theoretic index, clamped to `[0, 1]`.
    pub info_theoretic: f64,
    /// Fair rates: interference-free per-user rates rescaled to the actual
    /// sum rate. They sum to the sum rate by construction.
    pub fair_rates: Vec<f64>,
    /// Squared deviations of actual rates from the fair rates.
    pub squared_deviations: Vec<f64>,
}

/// Jain index `(sum r)^2 / (M sum r^2)`: 1 when all rates are equal,
/// `1/M` when one user takes everything.
pub fn jain_index(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::InvalidConfig("jain index needs at least one rate".into()));
    }
    for &r in rates {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidParameter { what: "rate", value: r });
        }
    }
    let sum: f64 = rates.iter().sum();
    let sum_sq: f64 = rates.iter().map(|r| r * r).sum();
    if sum_sq == 0.0 {
        return Err(Error::InvalidParameter { what: "all-zero rates", value: 0.0 });
    }
    Ok(sum * sum / (rates.len() as f64 * sum_sq))
}

/// Information-theoretic fairness of an allocation.
///
/// The fair rate of user `m` is its interference-free rate
/// `log2(1 + P |h_m|^2 beta_m / noise)` rescaled so the fair rates sum to
/// the actual sum rate; the index is one minus the unbiased mean-square
/// deviation normalized by `R_s^2 / M`, clamped at zero from below.
///
/// Needs at least two users (the unbiased estimator divides by `M - 1`) and
/// a positive sum rate.
pub fn it_fairness(
    rates: &[f64],
    fractions: &[f64],
    total_power: f64,
    ch: &ChannelRealization,
) -> Result<FairnessReport> {
    let m = ch.user_count();
    if m < 2 {
        return Err(Error::InvalidConfig("information-theoretic fairness needs at least 2 users".into()));
    }
    if rates.len() != m || fractions.len() != m {
        return Err(Error::InvalidConfig(format!(
            "{} rates / {} fractions for {} users",
            rates.len(),
            fractions.len(),
            m
        )));
    }
    let sum_rate: f64 = rates.iter().sum();
    if sum_rate <= 0.0 {
        return Err(Error::InvalidParameter { what: "sum rate", value: sum_rate });
    }

    // Interference-free per-user rates and their sum (the cumulative rate).
    let orthogonal: Vec<f64> = ch
        .gains()
        .iter()
        .zip(fractions)
        .map(|(gain, beta)| user_rate(total_power * gain * beta / ch.noise_power()))
        .collect();
    let cumulative: f64 = orthogonal.iter().sum();
    if cumulative <= 0.0 {
        return Err(Error::InvalidParameter { what: "cumulative rate", value: cumulative });
    }

    let fair_rates: Vec<f64> = orthogonal.iter().map(|r| r * sum_rate / cumulative).collect();
    let squared_deviations: Vec<f64> =
        fair_rates.iter().zip(rates).map(|(f, r)| (f - r) * (f - r)).collect();
    let mean_sq_dev: f64 =
        squared_deviations.iter().sum::<f64>() / (m as f64 - 1.0);
    let mean_sq_rate = sum_rate * sum_rate / m as f64;
    let info_theoretic = (1.0 - mean_sq_dev / mean_sq_rate).clamp(0.0, 1.0);

    Ok(FairnessReport {
        jain: jain_index(rates)?,
        info_theoretic,
        fair_rates,
        squared_deviations,
    })
}
