//! Channel generation: path loss, Rayleigh fading, user placement, and the
//! SIC-ordered channel realization consumed by every optimizer.
//!
//! The large-scale model attenuates a fading power gain `|g|^2` by
//! `1 / (1 + d^alpha)`, so a user at distance zero sees the fading gain
//! unchanged. Per-user gains are always reported sorted ascending,
//! `|h_1|^2 <= ... <= |h_M|^2`, which is the decoding order the power
//! allocation recursion relies on.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Where the users sit relative to the base station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Placement {
    /// Explicit per-user distances in meters.
    FixedDistances(Vec<f64>),
    /// Users drawn uniformly over a disc of the given radius (meters),
    /// area-uniform: `r = radius * sqrt(u)`.
    UniformDisc { radius_m: f64 },
}

/// Validated placement description: a [`Placement`] plus the user count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementSpec {
    placement: Placement,
    user_count: usize,
}

impl PlacementSpec {
    /// Fixed per-user distances in meters. The user count is the list length.
    pub fn fixed(distances_m: Vec<f64>) -> Result<Self> {
        if distances_m.is_empty() {
            return Err(Error::InvalidConfig("fixed placement needs at least one distance".into()));
        }
        for &d in &distances_m {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidParameter { what: "distance", value: d });
            }
        }
        let user_count = distances_m.len();
        Ok(Self { placement: Placement::FixedDistances(distances_m), user_count })
    }

    /// Area-uniform placement over a disc of `radius_m` meters.
    pub fn uniform_disc(radius_m: f64, user_count: usize) -> Result<Self> {
        if !radius_m.is_finite() || radius_m <= 0.0 {
            return Err(Error::InvalidParameter { what: "disc radius", value: radius_m });
        }
        if user_count == 0 {
            return Err(Error::InvalidConfig("user count must be at least 1".into()));
        }
        Ok(Self { placement: Placement::UniformDisc { radius_m }, user_count })
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    /// Same placement geometry with a different user count. Only valid for
    /// disc placements, where the count is free.
    pub fn with_user_count(&self, user_count: usize) -> Result<Self> {
        match self.placement {
            Placement::UniformDisc { radius_m } => Self::uniform_disc(radius_m, user_count),
            Placement::FixedDistances(_) => Err(Error::InvalidConfig(
                "cannot change the user count of a fixed-distance placement".into(),
            )),
        }
    }
}

/// Small-scale fading applied on top of path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fading {
    /// `|g|^2 = 1` for every user: deterministic channels, used to reproduce
    /// single-realization figure points.
    Unit,
    /// `|g|^2` exponential with unit mean (squared Rayleigh amplitude).
    Rayleigh,
}

/// Per-user channel power gains sorted ascending, plus the noise power.
///
/// Construction sorts and validates, so holders can rely on
/// `gains()[0] <= gains()[1] <= ...`, every gain positive and finite, and a
/// positive noise power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelRealization {
    gains: Vec<f64>,
    noise_power: f64,
}

impl ChannelRealization {
    /// Sorts `gains` ascending (stable, ties keep their input order) and
    /// validates positivity/finiteness.
    pub fn new(mut gains: Vec<f64>, noise_power: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidConfig("channel realization needs at least one user".into()));
        }
        if !noise_power.is_finite() || noise_power <= 0.0 {
            return Err(Error::InvalidParameter { what: "noise power", value: noise_power });
        }
        if gains.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::DegenerateChannel);
        }
        gains.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { gains, noise_power })
    }

    /// Power gains `|h_m|^2`, ascending.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Noise power `sigma_n^2` in watts.
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn user_count(&self) -> usize {
        self.gains.len()
    }
}

/// Channel power gain `|h|^2 = |g|^2 / (1 + d^alpha)`.
///
/// The `1 +` keeps the gain equal to the fading gain at distance zero.
pub fn pathloss_gain(fading_power: f64, distance_m: f64, alpha: f64) -> Result<f64> {
    if !fading_power.is_finite() || fading_power <= 0.0 {
        return Err(Error::InvalidParameter { what: "fading power", value: fading_power });
    }
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(Error::InvalidParameter { what: "distance", value: distance_m });
    }
    if !alpha.is_finite() || alpha < 2.0 {
        return Err(Error::InvalidParameter { what: "path-loss exponent", value: alpha });
    }
    Ok(fading_power / (1.0 + distance_m.powf(alpha)))
}

/// One squared-Rayleigh fading power draw: exponential with unit mean.
///
/// Uses the inverse CDF `-ln(1 - u)` with `u` uniform on `[0, 1)`, so the
/// sequence is a pure function of the rng stream.
pub fn sample_rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln()
}

/// Inverse-CDF map for area-uniform placement on a disc: `r = radius * sqrt(u)`.
pub fn disc_radius(radius_m: f64, u: f64) -> f64 {
    radius_m * u.sqrt()
}

/// Per-user distances in meters. Fixed placements return their list
/// verbatim; disc placements draw one `u` per user from `(0, 1]`.
pub fn place_users<R: Rng + ?Sized>(spec: &PlacementSpec, rng: &mut R) -> Vec<f64> {
    match spec.placement() {
        Placement::FixedDistances(d) => d.clone(),
        Placement::UniformDisc { radius_m } => (0..spec.user_count())
            .map(|_| {
                // 1 - gen() lies in (0, 1], so the boundary r = radius is
                // attainable and r = 0 is not.
                let u = 1.0 - rng.gen::<f64>();
                disc_radius(*radius_m, u)
            })
            .collect(),
    }
}

/// Draws distances and fading, applies path loss, and returns the sorted
/// [`ChannelRealization`].
///
/// A zero or non-finite gain yields [`Error::DegenerateChannel`], which
/// Monte Carlo callers treat as a resample signal.
pub fn realize_channels<R: Rng + ?Sized>(
    spec: &PlacementSpec,
    alpha: f64,
    noise_power: f64,
    fading: Fading,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let distances = place_users(spec, rng);
    let mut gains = Vec::with_capacity(distances.len());
    for &d in &distances {
        let g = match fading {
            Fading::Unit => 1.0,
            Fading::Rayleigh => sample_rayleigh_power(rng),
        };
        if g <= 0.0 || !g.is_finite() {
            return Err(Error::DegenerateChannel);
        }
        gains.push(pathloss_gain(g, d, alpha)?);
    }
    ChannelRealization::new(gains, noise_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn pathloss_zero_distance_is_identity() {
        assert_eq!(pathloss_gain(4.0, 0.0, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn pathloss_direct_evaluation() {
        let g = pathloss_gain(1.0, 1000.0, 2.0).unwrap();
        assert!((g - 1.0 / (1.0 + 1.0e6)).abs() < 1e-18, "got {g}");

        // Far user of the 340 m fixed layout.
        let g = pathloss_gain(1.0, 340.0, 2.0).unwrap();
        assert!((g - 8.6505e-6).abs() / 8.6505e-6 < 1e-4, "got {g}");
    }

    #[test]
    fn pathloss_rejects_bad_inputs() {
        assert!(pathloss_gain(-1.0, 10.0, 2.0).is_err());
        assert!(pathloss_gain(1.0, -10.0, 2.0).is_err());
        assert!(pathloss_gain(1.0, f64::NAN, 2.0).is_err());
        assert!(pathloss_gain(1.0, 10.0, 1.5).is_err());
        assert!(pathloss_gain(f64::INFINITY, 10.0, 2.0).is_err());
    }

    #[test]
    fn pathloss_decreasing_in_distance_and_alpha() {
        let mut r = rng(7);
        for _ in 0..200 {
            let d = 1.0 + r.gen::<f64>() * 2000.0;
            let alpha = 2.0 + r.gen::<f64>() * 2.5;
            let base = pathloss_gain(1.0, d, alpha).unwrap();
            assert!(pathloss_gain(1.0, d * 1.01, alpha).unwrap() < base);
            assert!(pathloss_gain(1.0, d, alpha + 0.1).unwrap() < base);
        }
    }

    #[test]
    fn rayleigh_power_unit_mean_and_tail() {
        let mut r = rng(42);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut above_one = 0usize;
        for _ in 0..n {
            let g = sample_rayleigh_power(&mut r);
            sum += g;
            if g > 1.0 {
                above_one += 1;
            }
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        // 3-sigma statistical bound on the mean (sigma = 1/sqrt(n)).
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
        let p = above_one as f64 / n as f64;
        assert!((p - (-1.0f64).exp()).abs() < 0.01, "P(g > 1) = {p}");
    }

    #[test]
    fn rayleigh_power_same_seed_same_sequence() {
        let mut a = rng(9);
        let mut b = rng(9);
        for _ in 0..100 {
            assert_eq!(sample_rayleigh_power(&mut a), sample_rayleigh_power(&mut b));
        }
    }

    #[test]
    fn fixed_placement_returns_distances_verbatim() {
        let spec = PlacementSpec::fixed(vec![800.0, 600.0, 400.0, 200.0]).unwrap();
        let d = place_users(&spec, &mut rng(1));
        assert_eq!(d, vec![800.0, 600.0, 400.0, 200.0]);
    }

    #[test]
    fn disc_radius_boundary() {
        assert_eq!(disc_radius(137.0, 1.0), 137.0);
        assert_eq!(disc_radius(137.0, 0.0), 0.0);
    }

    #[test]
    fn disc_mean_radius_is_two_thirds() {
        let spec = PlacementSpec::uniform_disc(100.0, 1).unwrap();
        let mut r = rng(4);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += place_users(&spec, &mut r)[0];
        }
        let mean = sum / n as f64;
        assert!((mean - 200.0 / 3.0).abs() < 0.5, "mean radius {mean}");
    }

    #[test]
    fn realize_sorted_ascending() {
        let spec = PlacementSpec::uniform_disc(400.0, 6).unwrap();
        let mut r = rng(11);
        for _ in 0..200 {
            let ch = realize_channels(&spec, 2.0, 1e-6, Fading::Rayleigh, &mut r).unwrap();
            for w in ch.gains().windows(2) {
                assert!(w[0] <= w[1], "gains not sorted: {:?}", ch.gains());
            }
        }
    }

    #[test]
    fn realize_fixed_unit_fading_reference_gains() {
        let spec = PlacementSpec::fixed(vec![340.0, 290.0, 220.0, 150.0]).unwrap();
        let ch = realize_channels(&spec, 2.0, 1e-6, Fading::Unit, &mut rng(0)).unwrap();
        let expect = [1.0 / 115_601.0, 1.0 / 84_101.0, 1.0 / 48_401.0, 1.0 / 22_501.0];
        for (g, e) in ch.gains().iter().zip(expect) {
            assert!((g - e).abs() / e < 1e-12, "gain {g} vs {e}");
        }
    }

    #[test]
    fn realize_permutation_invariant() {
        let a = PlacementSpec::fixed(vec![340.0, 150.0, 290.0, 220.0]).unwrap();
        let b = PlacementSpec::fixed(vec![150.0, 220.0, 290.0, 340.0]).unwrap();
        let ca = realize_channels(&a, 2.0, 1e-6, Fading::Unit, &mut rng(0)).unwrap();
        let cb = realize_channels(&b, 2.0, 1e-6, Fading::Unit, &mut rng(0)).unwrap();
        assert_eq!(ca.gains(), cb.gains());
    }

    #[test]
    fn realize_equal_distances_orders_by_fading() {
        let spec = PlacementSpec::fixed(vec![100.0, 100.0, 100.0]).unwrap();
        let ch = realize_channels(&spec, 2.0, 1e-6, Fading::Rayleigh, &mut rng(3)).unwrap();
        for w in ch.gains().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn realization_rejects_degenerate_gain() {
        assert!(matches!(
            ChannelRealization::new(vec![0.5, 0.0], 1.0),
            Err(Error::DegenerateChannel)
        ));
        assert!(matches!(
            ChannelRealization::new(vec![0.5, f64::NAN], 1.0),
            Err(Error::DegenerateChannel)
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(PlacementSpec::fixed(vec![]).is_err());
        assert!(PlacementSpec::fixed(vec![-1.0]).is_err());
        assert!(PlacementSpec::uniform_disc(0.0, 4).is_err());
        assert!(PlacementSpec::uniform_disc(50.0, 0).is_err());
        assert!(ChannelRealization::new(vec![1.0], 0.0).is_err());
    }
}
