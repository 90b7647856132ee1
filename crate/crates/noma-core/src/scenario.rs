//! Named simulation scenarios and their constants.
//!
//! Distances are stored in meters. The three fixed layouts place four users
//! at increasing spreads from the base station; the disc layouts draw users
//! area-uniformly inside a cell. Two noise powers are provided because the
//! published operating points are only consistent with 1 uW while the
//! parameter table lists 0.1 uW; both are selectable, neither is hard-coded
//! into the solvers.

use rand::Rng;
use serde::Serialize;

use crate::channel::{realize_channels, ChannelRealization, Fading, PlacementSpec};
use crate::error::{Error, Result};

/// Fixed four-user layouts, meters (total spreads 1.0, 2.0 and 4.0 km).
pub const FIXED_DISTANCES_M: [[f64; 4]; 3] = [
    [340.0, 290.0, 220.0, 150.0],
    [800.0, 600.0, 400.0, 200.0],
    [1800.0, 1200.0, 700.0, 300.0],
];

/// Disc radii swept in the resource-efficiency study, meters.
pub const DISC_RADII_M: [f64; 5] = [50.0, 100.0, 200.0, 300.0, 400.0];

/// Target equal-rate grid, bit/s/Hz.
pub const RATE_GRID: [f64; 7] = [0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// Path-loss exponents studied.
pub const PATH_LOSS_EXPONENTS: [f64; 3] = [2.0, 3.0, 4.5];

/// Noise power consistent with the published figure operating points, watts.
pub const FIGURE_NOISE_W: f64 = 1e-6;

/// Noise power as listed in the parameter table, watts.
pub const TABLE_NOISE_W: f64 = 1e-7;

/// Default resource-efficiency weight, watts.
pub const DEFAULT_XI0: f64 = 1.8;

/// Default Monte Carlo sample count per sweep point and trial.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Default number of independent Monte Carlo trials.
pub const DEFAULT_TRIALS: usize = 5;

/// User placement plus propagation parameters: everything needed to draw
/// channel realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub placement: PlacementSpec,
    pub path_loss_exponent: f64,
    pub noise_power: f64,
    pub fading: Fading,
}

impl Scenario {
    pub fn new(
        placement: PlacementSpec,
        path_loss_exponent: f64,
        noise_power: f64,
        fading: Fading,
    ) -> Result<Self> {
        let s = Self { placement, path_loss_exponent, noise_power, fading };
        s.validate()?;
        Ok(s)
    }

    /// One of the fixed four-user layouts, `index` in `1..=3`.
    pub fn fixed(index: usize, path_loss_exponent: f64, noise_power: f64, fading: Fading) -> Result<Self> {
        let distances = FIXED_DISTANCES_M
            .get(index.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidConfig(format!("no fixed scenario {index}; use 1..=3")))?;
        Self::new(PlacementSpec::fixed(distances.to_vec())?, path_loss_exponent, noise_power, fading)
    }

    /// Area-uniform placement on a disc.
    pub fn uniform_disc(
        radius_m: f64,
        user_count: usize,
        path_loss_exponent: f64,
        noise_power: f64,
        fading: Fading,
    ) -> Result<Self> {
        Self::new(
            PlacementSpec::uniform_disc(radius_m, user_count)?,
            path_loss_exponent,
            noise_power,
            fading,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !self.path_loss_exponent.is_finite() || self.path_loss_exponent < 2.0 {
            return Err(Error::InvalidParameter {
                what: "path-loss exponent",
                value: self.path_loss_exponent,
            });
        }
        if !self.noise_power.is_finite() || self.noise_power <= 0.0 {
            return Err(Error::InvalidParameter { what: "noise power", value: self.noise_power });
        }
        Ok(())
    }

    pub fn user_count(&self) -> usize {
        self.placement.user_count()
    }

    /// Draws one channel realization from this scenario.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelRealization> {
        realize_channels(
            &self.placement,
            self.path_loss_exponent,
            self.noise_power,
            self.fading,
            rng,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_scenarios_have_four_users() {
        for i in 1..=3 {
            let s = Scenario::fixed(i, 2.0, FIGURE_NOISE_W, Fading::Unit).unwrap();
            assert_eq!(s.user_count(), 4);
        }
        assert!(Scenario::fixed(0, 2.0, 1e-6, Fading::Unit).is_err());
        assert!(Scenario::fixed(4, 2.0, 1e-6, Fading::Unit).is_err());
    }

    #[test]
    fn fixed_scenario_distances_sum_to_spread() {
        let sums: Vec<f64> = FIXED_DISTANCES_M.iter().map(|d| d.iter().sum()).collect();
        assert_eq!(sums, vec![1000.0, 2000.0, 4000.0]);
    }

    #[test]
    fn scenario_realizes_sorted_channels() {
        let s = Scenario::uniform_disc(100.0, 6, 3.0, TABLE_NOISE_W, Fading::Rayleigh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = s.realize(&mut rng).unwrap();
        assert_eq!(ch.user_count(), 6);
        for w in ch.gains().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn scenario_rejects_bad_parameters() {
        let p = PlacementSpec::uniform_disc(50.0, 2).unwrap();
        assert!(Scenario::new(p.clone(), 1.0, 1e-6, Fading::Unit).is_err());
        assert!(Scenario::new(p, 2.0, 0.0, Fading::Unit).is_err());
    }
}
