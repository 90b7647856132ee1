//! Browser demo bindings: three interactive operations over the fixed
//! four-user layouts, returned as JSON strings for a plain-JS page to plot.
//!
//! The demo works on deterministic unit-fading channels so every slider
//! move maps to one exact solution. Build for the web with
//! `wasm-pack build --target web` (see `www/index.html`).

use rand_chacha::rand_core::SeedableRng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use noma_core::channel::{ChannelRealization, Fading};
use noma_core::ee::{dinkelbach_joint, DEFAULT_EPSILON, DEFAULT_RATE_BRACKET};
use noma_core::erpa::solve_erpa;
use noma_core::fairness::it_fairness;
use noma_core::rate::{ica_allocation, rates_for_allocation, PowerModel};
use noma_core::scenario::Scenario;

fn channel(scenario: u8, alpha: f64, noise_w: f64) -> Result<ChannelRealization, String> {
    let scenario = Scenario::fixed(scenario as usize, alpha, noise_w, Fading::Unit)
        .map_err(|e| e.to_string())?;
    // Unit fading consumes no randomness; any seed works.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    scenario.realize(&mut rng).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SolveView {
    min_power: f64,
    fractions: Vec<f64>,
    rates: Vec<f64>,
    sum_rate: f64,
    rf_power: f64,
    consumed_power: f64,
    energy_efficiency: f64,
    jain: f64,
    it_fairness: f64,
}

/// Minimum-power equal-rate allocation for one fixed layout.
pub fn solve_json(scenario: u8, alpha: f64, noise_w: f64, rate: f64) -> Result<String, String> {
    let ch = channel(scenario, alpha, noise_w)?;
    let pm = PowerModel::simulation_default();
    let sol = solve_erpa(rate, &ch, &pm).map_err(|e| e.to_string())?;
    let report = it_fairness(&sol.rates, &sol.fractions, sol.min_power, &ch)
        .map_err(|e| e.to_string())?;
    let consumed = pm.consumed_power(sol.min_power, ch.user_count());
    let sum_rate: f64 = sol.rates.iter().sum();
    let view = SolveView {
        min_power: sol.min_power,
        fractions: sol.fractions,
        rates: sol.rates,
        sum_rate,
        rf_power: pm.amplifier_inefficiency * sol.min_power,
        consumed_power: consumed,
        energy_efficiency: sum_rate / consumed,
        jain: report.jain,
        it_fairness: report.info_theoretic,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct EeCurvePoint {
    rate: f64,
    sum_rate: f64,
    power: f64,
    ee: f64,
}

#[derive(Serialize)]
struct EeCurveView {
    curve: Vec<EeCurvePoint>,
    optimum: EeCurvePoint,
    optimum_rf_power: f64,
    optimum_consumed_power: f64,
}

/// Energy-efficiency curve along the equal-rate family plus the joint
/// optimum found by the Dinkelbach solver.
pub fn ee_curve_json(
    scenario: u8,
    alpha: f64,
    noise_w: f64,
    max_rate: f64,
    points: u32,
) -> Result<String, String> {
    if points < 2 || !max_rate.is_finite() || max_rate <= 0.0 {
        return Err("need at least 2 grid points and a positive max rate".into());
    }
    let ch = channel(scenario, alpha, noise_w)?;
    let pm = PowerModel::simulation_default();
    let users = ch.user_count();

    let mut curve = Vec::new();
    for i in 1..=points {
        let rate = max_rate * i as f64 / points as f64;
        match solve_erpa(rate, &ch, &pm) {
            Ok(sol) => {
                let sum_rate: f64 = sol.rates.iter().sum();
                let consumed = pm.consumed_power(sol.min_power, users);
                curve.push(EeCurvePoint {
                    rate,
                    sum_rate,
                    power: sol.min_power,
                    ee: sum_rate / consumed,
                });
            }
            Err(noma_core::Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e.to_string()),
        }
    }
    let sol = dinkelbach_joint(&ch, &pm, DEFAULT_EPSILON, DEFAULT_RATE_BRACKET)
        .map_err(|e| e.to_string())?;
    let consumed = pm.consumed_power(sol.optimal_power, users);
    let view = EeCurveView {
        curve,
        optimum: EeCurvePoint {
            rate: sol.optimal_rate,
            sum_rate: sol.sum_rate(users),
            power: sol.optimal_power,
            ee: sol.q_star,
        },
        optimum_rf_power: pm.amplifier_inefficiency * sol.optimal_power,
        optimum_consumed_power: consumed,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RatePowerPoint {
    target_rate: f64,
    power: f64,
    erpa_rates: Vec<f64>,
    ica_rates: Vec<f64>,
    erpa_sum: f64,
    ica_sum: f64,
}

/// Per-user rates against the minimum total power, for the equal-rate
/// allocation and the inverse-channel baseline at the same power.
pub fn rate_power_json(
    scenario: u8,
    alpha: f64,
    noise_w: f64,
    max_rate: f64,
    points: u32,
) -> Result<String, String> {
    if points < 2 || !max_rate.is_finite() || max_rate <= 0.0 {
        return Err("need at least 2 grid points and a positive max rate".into());
    }
    let ch = channel(scenario, alpha, noise_w)?;
    let pm = PowerModel::simulation_default();

    let mut rows = Vec::new();
    for i in 1..=points {
        let rate = max_rate * i as f64 / points as f64;
        match solve_erpa(rate, &ch, &pm) {
            Ok(sol) => {
                let ica = ica_allocation(&ch);
                let (ica_rates, ica_sum) =
                    rates_for_allocation(&ica, sol.min_power, &ch).map_err(|e| e.to_string())?;
                let erpa_sum: f64 = sol.rates.iter().sum();
                rows.push(RatePowerPoint {
                    target_rate: rate,
                    power: sol.min_power,
                    erpa_rates: sol.rates,
                    ica_rates,
                    erpa_sum,
                    ica_sum,
                });
            }
            Err(noma_core::Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e.to_string()),
        }
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve_allocation(
    scenario: u8,
    alpha: f64,
    noise_w: f64,
    rate: f64,
) -> Result<String, JsValue> {
    solve_json(scenario, alpha, noise_w, rate).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ee_curve(
    scenario: u8,
    alpha: f64,
    noise_w: f64,
    max_rate: f64,
    points: u32,
) -> Result<String, JsValue> {
    ee_curve_json(scenario, alpha, noise_w, max_rate, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rate_power_curves(
    scenario: u8,
    alpha: f64,
    noise_w: f64,
    max_rate: f64,
    points: u32,
) -> Result<String, JsValue> {
    rate_power_json(scenario, alpha, noise_w, max_rate, points).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_json_worked_scenario() {
        let json = solve_json(1, 2.0, 1e-6, 2.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let p = v["min_power"].as_f64().unwrap();
        assert!((p - 7.9995).abs() < 1e-3, "{p}");
        assert_eq!(v["fractions"].as_array().unwrap().len(), 4);
        assert!((v["jain"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ee_curve_json_contains_optimum() {
        let json = ee_curve_json(1, 2.0, 1e-6, 3.0, 40).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let curve = v["curve"].as_array().unwrap();
        assert!(curve.len() >= 30);
        let best_on_curve =
            curve.iter().map(|p| p["ee"].as_f64().unwrap()).fold(f64::MIN, f64::max);
        let optimum = v["optimum"]["ee"].as_f64().unwrap();
        assert!(optimum >= best_on_curve - 1e-9, "optimum {optimum} vs curve {best_on_curve}");
    }

    #[test]
    fn rate_power_json_orders_strategies() {
        let json = rate_power_json(1, 2.0, 1e-6, 2.5, 10).unwrap();
        let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
        for row in rows.as_array().unwrap() {
            let erpa_sum = row["erpa_sum"].as_f64().unwrap();
            let ica_sum = row["ica_sum"].as_f64().unwrap();
            // The unequal split always buys some sum rate at matched power.
            assert!(ica_sum >= erpa_sum, "{ica_sum} < {erpa_sum}");
            let erpa_common = row["erpa_rates"][0].as_f64().unwrap();
            let ica_far = row["ica_rates"][0].as_f64().unwrap();
            let ica_near = row["ica_rates"][3].as_f64().unwrap();
            assert!(ica_far <= erpa_common + 1e-12);
            assert!(ica_near >= erpa_common - 1e-12);
        }
    }

    #[test]
    fn bad_arguments_are_reported() {
        assert!(solve_json(0, 2.0, 1e-6, 1.0).is_err());
        assert!(solve_json(1, 1.0, 1e-6, 1.0).is_err());
        assert!(ee_curve_json(1, 2.0, 1e-6, 3.0, 1).is_err());
        assert!(rate_power_json(1, 2.0, 1e-6, -1.0, 10).is_err());
    }
}
