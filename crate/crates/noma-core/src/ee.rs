//! Energy-efficiency maximization along the equal-rate feasible family.
//!
//! Because the equal-rate constraints pin the total power to `P_min(R)`, the
//! feasible set is a one-parameter curve in `R`, and
//!
//! ```text
//! EE(R) = M R / (inefficiency * P_min(R) + M P_c)
//! ```
//!
//! is quasi-concave. The Dinkelbach scheme iterates
//! `q <- U_R / U_T` where each inner step maximizes `U_R - q U_T`; for the
//! fixed-rate problem the inner step is a single evaluation, for the joint
//! problem it is a golden-section search over the rate. A dense grid scan
//! ([`ee_max_oracle`]) provides an independent maximizer for cross-checks.

use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::erpa::{max_rate_within_budget, min_power_closed_form};
use crate::error::{Error, Result};
use crate::rate::PowerModel;

/// Default Dinkelbach stopping threshold on `U_R - q U_T`.
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// Default rate bracket in bit/s/Hz; the upper end exceeds every operating
/// point of interest.
pub const DEFAULT_RATE_BRACKET: (f64, f64) = (1e-3, 12.0);
/// Golden-section tolerance on the rate.
const GOLDEN_TOL: f64 = 1e-6;
/// Outer iteration cap.
const MAX_ITERATIONS: usize = 50;

/// One outer Dinkelbach evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DinkelbachIterate {
    pub n: usize,
    /// Ratio parameter entering this iteration.
    pub q: f64,
    /// Transmit power of the inner solution.
    pub power: f64,
    /// Per-user rate of the inner solution.
    pub rate: f64,
}

/// Converged energy-efficiency optimum with its iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EeSolution {
    /// Per-user rate at the optimum, bit/s/Hz.
    pub optimal_rate: f64,
    /// Transmit power at the optimum, watts.
    pub optimal_power: f64,
    /// Optimal energy efficiency in bit/J/Hz; equals
    /// `M * optimal_rate / consumed_power(optimal_power)`.
    pub q_star: f64,
    pub iterations: Vec<DinkelbachIterate>,
    pub converged: bool,
    /// `U_R - q U_T` at the final iterate.
    pub final_gap: f64,
}

impl EeSolution {
    /// Sum rate `M * R*`.
    pub fn sum_rate(&self, users: usize) -> f64 {
        users as f64 * self.optimal_rate
    }
}

/// Result of the independent grid-scan maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleMax {
    pub rate: f64,
    pub ee: f64,
    /// True when the best grid cell touches an end of the requested bracket,
    /// meaning the maximum is not interior.
    pub at_boundary: bool,
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter { what: "epsilon", value: epsilon });
    }
    Ok(())
}

fn validate_bracket(bracket: (f64, f64)) -> Result<()> {
    let (lo, hi) = bracket;
    if !lo.is_finite() || lo <= 0.0 {
        return Err(Error::InvalidParameter { what: "rate bracket low end", value: lo });
    }
    if !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidParameter { what: "rate bracket high end", value: hi });
    }
    Ok(())
}

/// Minimum power for the target rate, rejected if it breaks the budget.
fn min_power_budgeted(rate: f64, ch: &ChannelRealization, pm: &PowerModel) -> Result<f64> {
    let p = min_power_closed_form(rate, ch)?;
    if !p.is_finite() || p > pm.power_budget {
        return Err(Error::BudgetExceeded { required: p, budget: pm.power_budget });
    }
    Ok(p)
}

/// Energy efficiency achieved by the minimum-power equal-rate allocation at
/// rate `R`: `M R / (inefficiency * P_min(R) + M P_c)`.
pub fn ee_of_rate(rate: f64, ch: &ChannelRealization, pm: &PowerModel) -> Result<f64> {
    let p = min_power_budgeted(rate, ch, pm)?;
    let m = ch.user_count();
    Ok(m as f64 * rate / pm.consumed_power(p, m))
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
/// Returns `(x_max, f_max)` once the bracket is narrower than `tol`.
fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Dinkelbach iteration for a fixed target rate.
///
/// The equal-rate constraints leave a single feasible power, so the inner
/// "solve" is an evaluation and the scheme converges on the second pass:
/// the first ratio update lands on `EE(R)` and the gap then vanishes.
pub fn dinkelbach_fixed_rate(
    rate: f64,
    ch: &ChannelRealization,
    pm: &PowerModel,
    epsilon: f64,
) -> Result<EeSolution> {
    validate_epsilon(epsilon)?;
    pm.validate()?;
    let power = min_power_budgeted(rate, ch, pm)?;
    let m = ch.user_count();
    let u_r = m as f64 * rate;
    let u_t = pm.consumed_power(power, m);

    let mut iterations = Vec::new();
    let mut q = 0.0;
    for n in 0..=MAX_ITERATIONS {
        iterations.push(DinkelbachIterate { n, q, power, rate });
        let gap = u_r - q * u_t;
        if gap <= epsilon {
            return Ok(EeSolution {
                optimal_rate: rate,
                optimal_power: power,
                q_star: u_r / u_t,
                iterations,
                converged: true,
                final_gap: gap,
            });
        }
        q = u_r / u_t;
    }
    let gap = u_r - q * u_t;
    Err(Error::NotConverged {
        max_iterations: MAX_ITERATIONS,
        gap,
        trace: iterations.iter().map(|i| (i.n, i.q, i.power, i.rate)).collect(),
    })
}

/// Joint power-and-rate energy-efficiency maximization.
///
/// Outer Dinkelbach loop on `q`; each inner step maximizes
/// `M R - q (inefficiency * P_min(R) + M P_c)` over the rate bracket by
/// golden section (the objective is strictly concave in `R` for `q > 0`).
/// The bracket is truncated to the budget-feasible region. Converging onto
/// an end of the caller's bracket is reported as
/// [`Error::NoInteriorMaximum`].
pub fn dinkelbach_joint(
    ch: &ChannelRealization,
    pm: &PowerModel,
    epsilon: f64,
    rate_bracket: (f64, f64),
) -> Result<EeSolution> {
    validate_epsilon(epsilon)?;
    validate_bracket(rate_bracket)?;
    pm.validate()?;
    let (lo, hi) = rate_bracket;
    let rate_cap = max_rate_within_budget(ch, pm)?;
    // A feasible rate window collapsed onto the bracket floor means the
    // budget admits no usable operating point. The guard is two orders
    // wider than the pinned-endpoint margin below so the two cases cannot
    // overlap.
    if rate_cap <= lo + 100.0 * GOLDEN_TOL {
        return Err(Error::BudgetExceeded {
            required: min_power_closed_form(lo, ch)?,
            budget: pm.power_budget,
        });
    }
    let hi_eff = hi.min(rate_cap);
    let m = ch.user_count();
    let consumed_at =
        |r: f64| pm.consumed_power(min_power_closed_form(r, ch).unwrap_or(f64::INFINITY), m);

    let mut iterations = Vec::new();
    let mut q = 0.0;
    let mut converged = false;
    let mut r_star = lo;
    let mut gap = f64::INFINITY;
    for n in 0..=MAX_ITERATIONS {
        let (r_n, obj) = golden_section_max(
            |r| m as f64 * r - q * consumed_at(r),
            lo,
            hi_eff,
            GOLDEN_TOL,
        );
        let p_n = min_power_closed_form(r_n, ch)?;
        iterations.push(DinkelbachIterate { n, q, power: p_n, rate: r_n });
        gap = obj;
        r_star = r_n;
        if gap <= epsilon {
            converged = true;
            break;
        }
        if n == MAX_ITERATIONS {
            return Err(Error::NotConverged {
                max_iterations: MAX_ITERATIONS,
                gap,
                trace: iterations.iter().map(|i| (i.n, i.q, i.power, i.rate)).collect(),
            });
        }
        q = m as f64 * r_n / consumed_at(r_n);
    }

    // An optimum glued to the caller's bracket means the peak lies outside
    // it (budget truncation is a legitimate constrained optimum and is not
    // flagged). Golden section localizes the peak to GOLDEN_TOL, so only
    // points within a few tolerances of an endpoint count as pinned.
    let edge = GOLDEN_TOL * 10.0;
    let pinned_low = r_star - lo <= edge;
    let pinned_high = hi_eff == hi && hi - r_star <= edge;
    if pinned_low || pinned_high {
        return Err(Error::NoInteriorMaximum { lo, hi, at: r_star });
    }

    let p_star = min_power_closed_form(r_star, ch)?;
    Ok(EeSolution {
        optimal_rate: r_star,
        optimal_power: p_star,
        q_star: m as f64 * r_star / pm.consumed_power(p_star, m),
        iterations,
        converged,
        final_gap: gap,
    })
}

/// Independent energy-efficiency maximizer: dense grid scan (1000 points)
/// over the bracket with golden-section refinement around the best cell.
pub fn ee_max_oracle(
    ch: &ChannelRealization,
    pm: &PowerModel,
    rate_bracket: (f64, f64),
    tol: f64,
) -> Result<OracleMax> {
    validate_bracket(rate_bracket)?;
    pm.validate()?;
    let (lo, hi) = rate_bracket;
    let rate_cap = max_rate_within_budget(ch, pm)?;
    if rate_cap <= lo {
        return Err(Error::BudgetExceeded {
            required: min_power_closed_form(lo, ch)?,
            budget: pm.power_budget,
        });
    }
    let hi_eff = hi.min(rate_cap);

    const GRID: usize = 1000;
    let step = (hi_eff - lo) / (GRID - 1) as f64;
    let mut best_idx = 0;
    let mut best_ee = f64::MIN;
    for i in 0..GRID {
        let r = lo + i as f64 * step;
        let ee = ee_of_rate(r, ch, pm)?;
        if ee > best_ee {
            best_ee = ee;
            best_idx = i;
        }
    }
    let a = lo + best_idx.saturating_sub(1) as f64 * step;
    let b = lo + (best_idx + 1).min(GRID - 1) as f64 * step;
    let (rate, ee) =
        golden_section_max(|r| ee_of_rate(r, ch, pm).unwrap_or(f64::MIN), a, b, tol);
    let at_boundary = best_idx == 0 || (best_idx == GRID - 1 && hi_eff == hi);
    Ok(OracleMax { rate, ee, at_boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_user() -> ChannelRealization {
        ChannelRealization::new(vec![0.5, 1.0], 1.0).unwrap()
    }

    fn two_user_model() -> PowerModel {
        PowerModel { amplifier_inefficiency: 1.0, circuit_power_per_user: 0.5, power_budget: 120.0 }
    }

    fn scenario1() -> ChannelRealization {
        let gains = [340.0f64, 290.0, 220.0, 150.0]
            .iter()
            .map(|d| 1.0 / (1.0 + d * d))
            .collect();
        ChannelRealization::new(gains, 1e-6).unwrap()
    }

    #[test]
    fn ee_of_rate_worked_case() {
        let ee = ee_of_rate(1.0, &two_user(), &two_user_model()).unwrap();
        assert!((ee - 0.4).abs() < 1e-12, "{ee}");
    }

    #[test]
    fn ee_vanishes_at_both_rate_extremes() {
        let ch = two_user();
        let pm = two_user_model();
        assert!(ee_of_rate(1e-9, &ch, &pm).unwrap() < 1e-8);
        // Lift the budget so the blow-up of P_min(R) itself drives EE down.
        let unbounded = PowerModel { power_budget: 1e12, ..pm };
        assert!(ee_of_rate(6.0, &ch, &unbounded).unwrap() < 0.01);
    }

    #[test]
    fn fixed_rate_converges_in_two_iterations() {
        let sol = dinkelbach_fixed_rate(1.0, &two_user(), &two_user_model(), 1e-8).unwrap();
        assert!(sol.converged);
        assert!((sol.q_star - 0.4).abs() < 1e-12, "{}", sol.q_star);
        assert_eq!(sol.iterations.len(), 2);
        assert!(sol.final_gap <= 1e-8);
    }

    #[test]
    fn fixed_rate_matches_ee_of_rate() {
        let ch = scenario1();
        let pm = PowerModel::simulation_default();
        for r in [0.3, 0.9, 1.7, 2.4] {
            let sol = dinkelbach_fixed_rate(r, &ch, &pm, 1e-9).unwrap();
            let ee = ee_of_rate(r, &ch, &pm).unwrap();
            assert!((sol.q_star - ee).abs() <= 1e-9 * (1.0 + ee));
            assert_eq!(sol.iterations.len(), 2);
        }
    }

    #[test]
    fn joint_worked_two_user_case() {
        let sol =
            dinkelbach_joint(&two_user(), &two_user_model(), 1e-8, DEFAULT_RATE_BRACKET).unwrap();
        assert!(sol.converged);
        // Independent grid maximum of 2R / (P_min(R) + 1).
        assert!((sol.q_star - 0.4292).abs() < 5e-4, "q* = {}", sol.q_star);
        assert!((sol.optimal_rate - 0.68).abs() < 0.02, "R* = {}", sol.optimal_rate);
    }

    #[test]
    fn joint_trace_monotone_and_gap_small() {
        let ch = scenario1();
        let pm = PowerModel::simulation_default();
        let sol = dinkelbach_joint(&ch, &pm, 1e-8, DEFAULT_RATE_BRACKET).unwrap();
        assert!(sol.converged);
        assert!(sol.final_gap <= 1e-8);
        for w in sol.iterations.windows(2) {
            if w[0].n >= 1 {
                assert!(w[1].q >= w[0].q, "q trace decreased: {:?}", sol.iterations);
            }
        }
        let m = ch.user_count();
        let recon = m as f64 * sol.optimal_rate / pm.consumed_power(sol.optimal_power, m);
        assert!((sol.q_star - recon).abs() < 1e-9);
    }

    #[test]
    fn joint_agrees_with_oracle_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pm = PowerModel::simulation_default();
        for _ in 0..100 {
            let m = rng.gen_range(2..=12);
            let gains: Vec<f64> = (0..m)
                .map(|_| {
                    let d = rng.gen::<f64>() * 800.0 + 20.0;
                    (0.3 + rng.gen::<f64>() * 3.0) / (1.0 + d * d)
                })
                .collect();
            let ch = ChannelRealization::new(gains, 1e-6).unwrap();
            let sol = dinkelbach_joint(&ch, &pm, 1e-8, DEFAULT_RATE_BRACKET).unwrap();
            let oracle = ee_max_oracle(&ch, &pm, DEFAULT_RATE_BRACKET, 1e-9).unwrap();
            assert!(
                (sol.q_star - oracle.ee).abs() <= 1e-6 * (1.0 + oracle.ee),
                "dinkelbach {} vs oracle {}",
                sol.q_star,
                oracle.ee
            );
        }
    }

    #[test]
    fn oracle_matches_joint_on_worked_case() {
        let oracle =
            ee_max_oracle(&two_user(), &two_user_model(), DEFAULT_RATE_BRACKET, 1e-9).unwrap();
        let sol =
            dinkelbach_joint(&two_user(), &two_user_model(), 1e-8, DEFAULT_RATE_BRACKET).unwrap();
        assert!(!oracle.at_boundary);
        assert!((oracle.ee - sol.q_star).abs() <= 1e-6 * (1.0 + oracle.ee));
    }

    #[test]
    fn ee_curve_is_unimodal_on_grid() {
        let ch = scenario1();
        let pm = PowerModel::simulation_default();
        let n = 400;
        let lo = 0.01;
        let hi = 3.0;
        let ee: Vec<f64> = (0..n)
            .map(|i| ee_of_rate(lo + (hi - lo) * i as f64 / (n - 1) as f64, &ch, &pm).unwrap())
            .collect();
        let peak = ee
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        for i in 0..peak {
            assert!(ee[i] <= ee[i + 1] + 1e-12, "dip before the peak at {i}");
        }
        for i in peak..n - 1 {
            assert!(ee[i] >= ee[i + 1] - 1e-12, "rise after the peak at {i}");
        }
    }

    #[test]
    fn zero_circuit_power_pushes_optimum_to_low_boundary() {
        let pm = PowerModel::ideal(120.0);
        let oracle = ee_max_oracle(&two_user(), &pm, DEFAULT_RATE_BRACKET, 1e-9).unwrap();
        assert!(oracle.at_boundary, "expected a boundary solution, got {oracle:?}");
        assert!(oracle.rate < 0.05);
        assert!(matches!(
            dinkelbach_joint(&two_user(), &pm, 1e-8, DEFAULT_RATE_BRACKET),
            Err(Error::NoInteriorMaximum { .. })
        ));
    }

    #[test]
    fn circuit_power_raises_rate_and_lowers_ee() {
        let ch = scenario1();
        let mut prev_q = f64::INFINITY;
        let mut prev_r = 0.0;
        for pc in [0.1, 0.25, 0.5, 1.0] {
            let pm = PowerModel {
                amplifier_inefficiency: 1.4,
                circuit_power_per_user: pc,
                power_budget: 120.0,
            };
            let sol = dinkelbach_joint(&ch, &pm, 1e-8, DEFAULT_RATE_BRACKET).unwrap();
            assert!(sol.q_star < prev_q, "EE* did not fall when P_c rose to {pc}");
            assert!(sol.optimal_rate > prev_r, "R* did not rise when P_c rose to {pc}");
            prev_q = sol.q_star;
            prev_r = sol.optimal_rate;
        }
    }

    #[test]
    fn joint_rejects_bad_arguments() {
        let ch = two_user();
        let pm = two_user_model();
        assert!(dinkelbach_joint(&ch, &pm, 0.0, DEFAULT_RATE_BRACKET).is_err());
        assert!(dinkelbach_joint(&ch, &pm, 1e-8, (0.0, 12.0)).is_err());
        assert!(dinkelbach_joint(&ch, &pm, 1e-8, (2.0, 1.0)).is_err());
    }

    #[test]
    fn joint_respects_budget() {
        // Gains so weak that even the lowest rate in the bracket needs more
        // than the budget.
        let ch = ChannelRealization::new(vec![1e-9, 2e-9], 1.0).unwrap();
        let pm = PowerModel::simulation_default();
        assert!(matches!(
            dinkelbach_joint(&ch, &pm, 1e-8, (1.0, 2.0)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
