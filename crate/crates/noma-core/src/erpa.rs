//! Minimum-power equal-rate allocation.
//!
//! For a target common rate `R` the SIC rate constraints pin every power
//! fraction once the total power is known: with `t = 2^R - 1` and
//! `a_m = noise / gain_m`,
//!
//! ```text
//! beta_M = t * a_M / P
//! beta_m = t * (beta_{m+1} + ... + beta_M + a_m / P)    m = M-1, ..., 1
//! ```
//!
//! Summing the recursion telescopes to `sum(beta) = P_min / P` with
//!
//! ```text
//! P_min = t * sum_m a_m * 2^{R (m-1)}
//! ```
//!
//! so the normalization constraint `sum(beta) = 1` has exactly one root in
//! `P`, returned in closed form by [`min_power_closed_form`] and cross-checked
//! numerically by the bisection solver [`min_power_numeric`].

use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::rate::{rates_for_allocation, PowerModel};

/// Bisection floor for the total-power bracket, in watts.
const BRACKET_FLOOR: f64 = 1e-12;
/// Bisection bracket expansion cap, in watts.
const BRACKET_CAP: f64 = 1e30;
/// Default relative tolerance for the numeric root.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

/// Solution of the minimum-power equal-rate problem on one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErpaSolution {
    /// The common per-user rate the solution achieves, bit/s/Hz.
    pub target_rate: f64,
    /// Minimum total transmit power in watts.
    pub min_power: f64,
    /// Power fractions, descending (weakest channel first).
    pub fractions: Vec<f64>,
    /// Per-user rates recomputed from the fractions; all equal the target.
    pub rates: Vec<f64>,
    /// Normalization residual `sum(fractions) - 1` at the solution.
    pub residual: f64,
}

fn validate_rate(target_rate: f64) -> Result<()> {
    if !target_rate.is_finite() || target_rate <= 0.0 {
        return Err(Error::InvalidParameter { what: "target rate", value: target_rate });
    }
    Ok(())
}

/// Power fractions forced by the equal-rate constraints at a given total
/// power, weakest user first. The output sums to one only when
/// `total_power` equals the minimum power for `target_rate`.
pub fn beta_recursion(
    target_rate: f64,
    total_power: f64,
    ch: &ChannelRealization,
) -> Vec<f64> {
    debug_assert!(target_rate > 0.0 && total_power > 0.0);
    let m = ch.user_count();
    let t = (2f64).powf(target_rate) - 1.0;
    let noise = ch.noise_power();
    let mut fractions = vec![0.0; m];
    let mut tail = 0.0; // sum of fractions for users stronger than the current one
    for user in (0..m).rev() {
        let a = noise / ch.gains()[user];
        let beta = t * (tail + a / total_power);
        fractions[user] = beta;
        tail += beta;
    }
    fractions
}

/// Normalization residual `sum(beta(R, P)) - 1`.
///
/// Strictly decreasing in `P`, positive for small `P`, approaching `-1` as
/// `P` grows; its unique zero is the minimum power.
pub fn constraint_residual(target_rate: f64, total_power: f64, ch: &ChannelRealization) -> f64 {
    beta_recursion(target_rate, total_power, ch).iter().sum::<f64>() - 1.0
}

/// Minimum total power meeting the equal-rate constraints, in closed form.
pub fn min_power_closed_form(target_rate: f64, ch: &ChannelRealization) -> Result<f64> {
    validate_rate(target_rate)?;
    let t = (2f64).powf(target_rate) - 1.0;
    let growth = (2f64).powf(target_rate); // 2^R, the per-user weight ratio
    let noise = ch.noise_power();
    let mut weight = 1.0;
    let mut sum = 0.0;
    for &gain in ch.gains() {
        sum += noise / gain * weight;
        weight *= growth;
    }
    Ok(t * sum)
}

/// Minimum total power by bracketed bisection on [`constraint_residual`].
///
/// Kept deliberately independent of the closed form so the two can
/// cross-check each other. `rel_tol` bounds the final bracket width
/// relative to the root.
pub fn min_power_numeric(
    target_rate: f64,
    ch: &ChannelRealization,
    rel_tol: f64,
) -> Result<f64> {
    validate_rate(target_rate)?;
    if !rel_tol.is_finite() || rel_tol <= 0.0 {
        return Err(Error::InvalidParameter { what: "tolerance", value: rel_tol });
    }
    let f = |p: f64| constraint_residual(target_rate, p, ch);

    let mut lo = BRACKET_FLOOR;
    if f(lo) <= 0.0 {
        // The root sits at or below the floor; treat the floor as the answer.
        return Ok(lo);
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(Error::BracketFailure { power: hi, residual: f(hi) });
        }
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * mid {
            return Ok(mid);
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves the minimum-power equal-rate problem and validates the solution:
/// fractions sum to one, descend with channel order, and reproduce the
/// target rate for every user.
pub fn solve_erpa(
    target_rate: f64,
    ch: &ChannelRealization,
    pm: &PowerModel,
) -> Result<ErpaSolution> {
    pm.validate()?;
    let min_power = min_power_closed_form(target_rate, ch)?;
    if !min_power.is_finite() || min_power > pm.power_budget {
        return Err(Error::BudgetExceeded { required: min_power, budget: pm.power_budget });
    }
    let fractions = beta_recursion(target_rate, min_power, ch);
    let residual = fractions.iter().sum::<f64>() - 1.0;
    if residual.abs() > 1e-9 {
        return Err(Error::InvalidParameter { what: "normalization residual", value: residual });
    }
    for w in fractions.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter { what: "fraction ordering", value: w[1] - w[0] });
        }
    }
    let (rates, _) = rates_for_allocation(&fractions, min_power, ch)?;
    for &r in &rates {
        if (r - target_rate).abs() > 1e-6 {
            return Err(Error::InvalidParameter { what: "round-trip rate", value: r });
        }
    }
    Ok(ErpaSolution { target_rate, min_power, fractions, rates, residual })
}

/// Largest equal rate whose minimum power stays within the budget, found by
/// bisection on the strictly increasing map `R -> P_min(R)`.
pub fn max_rate_within_budget(ch: &ChannelRealization, pm: &PowerModel) -> Result<f64> {
    pm.validate()?;
    let p_of = |r: f64| min_power_closed_form(r, ch).unwrap_or(f64::INFINITY);
    let mut lo = 1e-9;
    if p_of(lo) > pm.power_budget {
        return Err(Error::BudgetExceeded { required: p_of(lo), budget: pm.power_budget });
    }
    let mut hi = 1.0;
    while p_of(hi) <= pm.power_budget {
        hi *= 2.0;
        if hi > 1024.0 {
            return Ok(hi); // budget is never binding at any realistic rate
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= 1e-12 * mid {
            break;
        }
        if p_of(mid) <= pm.power_budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
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

    fn scenario(distances: &[f64], noise: f64) -> ChannelRealization {
        let gains = distances.iter().map(|d| 1.0 / (1.0 + d * d)).collect();
        ChannelRealization::new(gains, noise).unwrap()
    }

    fn scenario1() -> ChannelRealization {
        scenario(&[340.0, 290.0, 220.0, 150.0], 1e-6)
    }

    fn random_channel(rng: &mut ChaCha8Rng) -> ChannelRealization {
        let m = rng.gen_range(2..=12);
        let gains: Vec<f64> = (0..m)
            .map(|_| {
                let d = rng.gen::<f64>() * 1500.0 + 10.0;
                (1.0 + rng.gen::<f64>() * 3.0) / (1.0 + d * d)
            })
            .collect();
        ChannelRealization::new(gains, 1e-6).unwrap()
    }

    #[test]
    fn recursion_worked_case() {
        let beta = beta_recursion(1.0, 4.0, &two_user());
        assert!((beta[0] - 0.75).abs() < 1e-15, "{beta:?}");
        assert!((beta[1] - 0.25).abs() < 1e-15, "{beta:?}");
    }

    #[test]
    fn recursion_vanishes_with_rate() {
        let beta = beta_recursion(1e-12, 4.0, &two_user());
        assert!(beta.iter().all(|b| *b < 1e-11), "{beta:?}");
    }

    #[test]
    fn recursion_scenario1_far_user_share() {
        // At R = 1.5 the minimum power is ~2.285 W and the weakest user
        // carries ~0.679 of it (hand-unrolled recursion).
        let ch = scenario1();
        let p = min_power_closed_form(1.5, &ch).unwrap();
        let beta = beta_recursion(1.5, p, &ch);
        assert!((beta[0] - 0.679).abs() < 1e-3, "beta_1 = {}", beta[0]);
    }

    #[test]
    fn residual_reference_points() {
        let ch = two_user();
        assert!(constraint_residual(1.0, 4.0, &ch).abs() < 1e-15);
        assert!((constraint_residual(1.0, 8.0, &ch) + 0.5).abs() < 1e-15);
        assert!(constraint_residual(1.0, 1e-9, &ch) > 1e6);
    }

    #[test]
    fn residual_strictly_decreasing_in_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let ch = random_channel(&mut rng);
            let r = 0.1 + rng.gen::<f64>() * 2.9;
            let mut prev = f64::INFINITY;
            let mut p = 1e-3;
            while p < 1e4 {
                let f = constraint_residual(r, p, &ch);
                assert!(f < prev, "residual not decreasing at P = {p}");
                prev = f;
                p *= 3.0;
            }
        }
    }

    #[test]
    fn closed_form_single_user() {
        let ch = ChannelRealization::new(vec![1.0], 1.0).unwrap();
        let p = min_power_closed_form(1.0, &ch).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let beta = beta_recursion(1.0, p, &ch);
        assert!((beta[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_worked_case() {
        assert!((min_power_closed_form(1.0, &two_user()).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_scenario1_reference_power() {
        // R = 2: t = 3, weights 1, 4, 16, 64 over a_m = 1e-6 * (1 + d^2).
        let p = min_power_closed_form(2.0, &scenario1()).unwrap();
        let expect = 3.0 * (0.115601 + 4.0 * 0.084101 + 16.0 * 0.048401 + 64.0 * 0.022501);
        assert!((p - expect).abs() / expect < 1e-9, "{p} vs {expect}");
        assert!((p - 7.999455).abs() < 1e-5);
    }

    #[test]
    fn numeric_matches_worked_case() {
        let p = min_power_numeric(1.0, &two_user(), 1e-10).unwrap();
        assert!((p - 4.0).abs() / 4.0 < 1e-10, "{p}");
    }

    #[test]
    fn numeric_scenario2_reference_power() {
        let ch = scenario(&[800.0, 600.0, 400.0, 200.0], 1e-6);
        let p = min_power_numeric(1.5, &ch, 1e-10).unwrap();
        assert!((p - 7.0273).abs() / 7.0273 < 1e-3, "{p}");
    }

    #[test]
    fn closed_form_agrees_with_numeric_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let ch = random_channel(&mut rng);
            let r = 0.1 + rng.gen::<f64>() * 2.9;
            let exact = min_power_closed_form(r, &ch).unwrap();
            let numeric = min_power_numeric(r, &ch, 1e-12).unwrap();
            assert!(
                (exact - numeric).abs() / exact < 1e-9,
                "closed {exact} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn min_power_increasing_and_convex_in_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let ch = random_channel(&mut rng);
            let p: Vec<f64> = (1..60)
                .map(|i| min_power_closed_form(i as f64 * 0.05, &ch).unwrap())
                .collect();
            for w in p.windows(2) {
                assert!(w[1] > w[0], "P*(R) not increasing");
            }
            for w in p.windows(3) {
                assert!(w[2] - w[1] > w[1] - w[0] - 1e-12, "P*(R) not convex");
            }
        }
    }

    #[test]
    fn solve_worked_case() {
        let pm = PowerModel::ideal(120.0);
        let sol = solve_erpa(1.0, &two_user(), &pm).unwrap();
        assert!((sol.min_power - 4.0).abs() < 1e-12);
        assert!((sol.fractions[0] - 0.75).abs() < 1e-12);
        assert!((sol.fractions[1] - 0.25).abs() < 1e-12);
        assert!((sol.rates[0] - 1.0).abs() < 1e-12);
        assert!((sol.rates[1] - 1.0).abs() < 1e-12);
        assert!(sol.residual.abs() < 1e-12);
    }

    #[test]
    fn solve_scenario1_reference_power() {
        let pm = PowerModel::simulation_default();
        let sol = solve_erpa(1.5, &scenario1(), &pm).unwrap();
        assert!((sol.min_power - 2.285237).abs() / 2.285237 < 1e-4, "{}", sol.min_power);
    }

    #[test]
    fn solve_rejects_over_budget() {
        let pm = PowerModel::simulation_default();
        match solve_erpa(3.2, &scenario1(), &pm) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert!(required > budget);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_degenerate_rate() {
        let pm = PowerModel::ideal(120.0);
        assert!(solve_erpa(0.0, &two_user(), &pm).is_err());
        assert!(solve_erpa(-1.0, &two_user(), &pm).is_err());
        assert!(solve_erpa(f64::NAN, &two_user(), &pm).is_err());
    }

    #[test]
    fn solutions_roundtrip_and_order_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pm = PowerModel::ideal(f64::MAX);
        for _ in 0..200 {
            let ch = random_channel(&mut rng);
            let r = 0.1 + rng.gen::<f64>() * 2.9;
            let sol = solve_erpa(r, &ch, &pm).unwrap();
            for rate in &sol.rates {
                assert!((rate - r).abs() < 1e-6, "rate {rate} vs target {r}");
            }
            for w in sol.fractions.windows(2) {
                assert!(w[0] >= w[1], "fractions not descending: {:?}", sol.fractions);
            }
            assert!(sol.residual.abs() < 1e-9);
        }
    }

    #[test]
    fn budget_rate_boundary_is_tight() {
        let pm = PowerModel::simulation_default();
        let ch = scenario1();
        let r_max = max_rate_within_budget(&ch, &pm).unwrap();
        assert!(min_power_closed_form(r_max, &ch).unwrap() <= pm.power_budget);
        assert!(min_power_closed_form(r_max * (1.0 + 1e-9), &ch).unwrap() > pm.power_budget);
    }

    // Numerical check that the normalization constraint, viewed as a free
    // function of (beta_1..beta_M, P), has a positive-semidefinite Hessian
    // with exactly one significantly positive eigenvalue.
    #[test]
    fn free_constraint_hessian_is_psd_at_m4() {
        let ch = scenario1();
        let r: f64 = 1.5;
        let t = 2f64.powf(r) - 1.0;
        let a: Vec<f64> = ch.gains().iter().map(|g| ch.noise_power() / g).collect();
        let m = a.len();

        let f = |x: &[f64]| {
            let (beta, p) = x.split_at(m);
            let p = p[0];
            let mut acc = 0.0;
            for i in 0..m - 1 {
                let tail: f64 = beta[i + 1..].iter().sum();
                acc += t * (tail + a[i] / p);
            }
            acc += t * a[m - 1] / p;
            acc - 1.0
        };

        let p_star = min_power_closed_form(r, &ch).unwrap();
        let mut x0 = beta_recursion(r, p_star, &ch);
        x0.push(p_star);
        let n = x0.len();

        // Step large enough that cancellation noise (~eps/h^2) stays well
        // below the 1e-8 eigenvalue floor.
        let h = |i: usize| 1e-3 * (1.0 + x0[i].abs());
        let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut xpp = x0.clone();
                let mut xpm = x0.clone();
                let mut xmp = x0.clone();
                let mut xmm = x0.clone();
                xpp[i] += h(i);
                xpp[j] += h(j);
                xpm[i] += h(i);
                xpm[j] -= h(j);
                xmp[i] -= h(i);
                xmp[j] += h(j);
                xmm[i] -= h(i);
                xmm[j] -= h(j);
                hess[(i, j)] =
                    (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h(i) * h(j));
            }
        }
        // Symmetrize away finite-difference noise before decomposing.
        let hess = (hess.clone() + hess.transpose()) * 0.5;
        let eigen = hess.symmetric_eigen();
        let max_eig = eigen.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        assert!(max_eig > 0.0, "expected one positive eigenvalue");
        let mut positive = 0;
        for &lambda in eigen.eigenvalues.iter() {
            assert!(lambda >= -1e-8, "negative eigenvalue {lambda}");
            if lambda > 1e-4 * max_eig {
                positive += 1;
            }
        }
        assert_eq!(positive, 1, "eigenvalues: {:?}", eigen.eigenvalues.as_slice());
    }
}
