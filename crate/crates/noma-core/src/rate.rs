//! SIC-ordered SINR and rate arithmetic, consumed-power and efficiency
//! metrics, and the inverse-channel baseline allocation.
//!
//! Users are indexed `0..M` in ascending channel order (user 0 has the
//! weakest channel). Under successive interference cancellation, user `m`
//! sees interference only from the power fractions of users `m+1..M`; the
//! strongest user decodes interference-free.

use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Amplifier inefficiency, per-user circuit power, and the transmit power
/// budget used for feasibility checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerModel {
    /// RF amplifier inefficiency, >= 1 (1 = ideal amplifier).
    pub amplifier_inefficiency: f64,
    /// Circuit power per user in watts.
    pub circuit_power_per_user: f64,
    /// Maximum transmit power in watts.
    pub power_budget: f64,
}

impl PowerModel {
    /// Simulation defaults: inefficiency 1.4, 250 mW circuit power per user,
    /// 120 W budget.
    pub fn simulation_default() -> Self {
        Self { amplifier_inefficiency: 1.4, circuit_power_per_user: 0.25, power_budget: 120.0 }
    }

    /// Ideal amplifier, no circuit power, and an effectively unlimited budget.
    pub fn ideal(power_budget: f64) -> Self {
        Self { amplifier_inefficiency: 1.0, circuit_power_per_user: 0.0, power_budget }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplifier_inefficiency.is_finite() || self.amplifier_inefficiency < 1.0 {
            return Err(Error::InvalidParameter {
                what: "amplifier inefficiency",
                value: self.amplifier_inefficiency,
            });
        }
        if !self.circuit_power_per_user.is_finite() || self.circuit_power_per_user < 0.0 {
            return Err(Error::InvalidParameter {
                what: "circuit power",
                value: self.circuit_power_per_user,
            });
        }
        if !self.power_budget.is_finite() || self.power_budget <= 0.0 {
            return Err(Error::InvalidParameter { what: "power budget", value: self.power_budget });
        }
        Ok(())
    }

    /// Total consumed power for a transmit power with fractions summing
    /// to one: `inefficiency * P + M * P_c`.
    pub fn consumed_power(&self, transmit_power: f64, users: usize) -> f64 {
        self.amplifier_inefficiency * transmit_power
            + users as f64 * self.circuit_power_per_user
    }
}

/// A total transmit power, its split across users, and the per-user rates
/// that split induces on a given channel realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// Total transmit power in watts.
    pub total_power: f64,
    /// Power fraction per user, ascending channel order.
    pub fractions: Vec<f64>,
    /// Rate per user in bit/s/Hz, derived at construction.
    pub rates: Vec<f64>,
}

impl Allocation {
    /// Builds an allocation and derives its rates. Fractions must be
    /// positive and sum to one within `1e-9`.
    pub fn new(total_power: f64, fractions: Vec<f64>, ch: &ChannelRealization) -> Result<Self> {
        if !total_power.is_finite() || total_power <= 0.0 {
            return Err(Error::InvalidParameter { what: "total power", value: total_power });
        }
        if fractions.len() != ch.user_count() {
            return Err(Error::InvalidConfig(format!(
                "{} fractions for {} users",
                fractions.len(),
                ch.user_count()
            )));
        }
        for &b in &fractions {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::InvalidParameter { what: "power fraction", value: b });
            }
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter { what: "fraction sum", value: sum });
        }
        let (rates, _) = rates_for_allocation(&fractions, total_power, ch)?;
        Ok(Self { total_power, fractions, rates })
    }

    /// Sum rate in bit/s/Hz.
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// SINR of `user` (0-based, ascending channel order) under SIC.
///
/// Interior users see interference from the fractions of stronger users;
/// the strongest user sees only noise.
pub fn sinr(
    user: usize,
    fractions: &[f64],
    total_power: f64,
    ch: &ChannelRealization,
) -> Result<f64> {
    let m = ch.user_count();
    if user >= m || fractions.len() != m {
        return Err(Error::UserIndexOutOfRange { index: user, users: m });
    }
    let gain = ch.gains()[user];
    let signal = total_power * gain * fractions[user];
    let interference: f64 = if user + 1 < m {
        total_power * gain * fractions[user + 1..].iter().sum::<f64>()
    } else {
        0.0
    };
    Ok(signal / (interference + ch.noise_power()))
}

/// Shannon rate `log2(1 + sinr)` in bit/s/Hz.
pub fn user_rate(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// Per-user rates and the sum rate for a fraction vector at a total power.
pub fn rates_for_allocation(
    fractions: &[f64],
    total_power: f64,
    ch: &ChannelRealization,
) -> Result<(Vec<f64>, f64)> {
    let mut rates = Vec::with_capacity(ch.user_count());
    for user in 0..ch.user_count() {
        rates.push(user_rate(sinr(user, fractions, total_power, ch)?));
    }
    let sum = rates.iter().sum();
    Ok((rates, sum))
}

/// Total consumed RF power: `inefficiency * sum(beta_i * P) + M * P_c`.
pub fn consumed_power(alloc: &Allocation, pm: &PowerModel) -> f64 {
    let transmit: f64 = alloc.fractions.iter().map(|b| b * alloc.total_power).sum();
    pm.amplifier_inefficiency * transmit
        + alloc.fractions.len() as f64 * pm.circuit_power_per_user
}

/// Energy efficiency in bit/J/Hz: sum rate over consumed power.
pub fn energy_efficiency(sum_rate: f64, consumed: f64) -> Result<f64> {
    if !consumed.is_finite() || consumed <= 0.0 {
        return Err(Error::InvalidParameter { what: "consumed power", value: consumed });
    }
    Ok(sum_rate / consumed)
}

/// Resource efficiency `xi0 * EE + SE`, the weighted sum used to trade the
/// two metrics off. `xi0` is in watts; zero reduces the metric to the SE.
pub fn resource_efficiency(ee: f64, se: f64, xi0: f64) -> f64 {
    assert!(xi0 >= 0.0, "resource-efficiency weight must be non-negative");
    xi0 * ee + se
}

/// Baseline power split proportional to inverse channel gain, normalized to
/// sum to one so comparisons run at the same total power.
pub fn ica_allocation(ch: &ChannelRealization) -> Vec<f64> {
    let inv: Vec<f64> = ch.gains().iter().map(|g| 1.0 / g).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|w| w / total).collect()
}
