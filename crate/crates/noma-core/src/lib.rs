//! Downlink NOMA power allocation.
//!
//! A power-domain NOMA downlink serves `M` single-antenna users on one band,
//! separated by successive interference cancellation. This crate solves the
//! allocation problems that arise on that link:
//!
//! - [`erpa`] finds the minimum total power and the per-user power fractions
//!   that give every user the same rate (the maximum-fairness operating
//!   point), in closed form with an independent bisection cross-check.
//! - [`ee`] maximizes energy efficiency along the equal-rate family with the
//!   Dinkelbach method, both at a fixed rate and jointly over power and rate,
//!   guarded by a grid-scan oracle.
//! - [`fairness`] scores any allocation with the Jain index and an
//!   information-theoretic fairness index.
//! - [`channel`] generates path-loss/Rayleigh channel realizations with the
//!   SIC gain ordering, and [`scenario`] names the standard layouts.
//! - [`sim`] runs seeded, reproducible Monte Carlo sweeps over target rate,
//!   user count, and cell radius, including the energy-vs-spectral-efficiency
//!   trade-off.
//!
//! ```
//! use noma_core::channel::ChannelRealization;
//! use noma_core::erpa::solve_erpa;
//! use noma_core::rate::PowerModel;
//!
//! let ch = ChannelRealization::new(vec![0.5, 1.0], 1.0).unwrap();
//! let sol = solve_erpa(1.0, &ch, &PowerModel::ideal(120.0)).unwrap();
//! assert!((sol.min_power - 4.0).abs() < 1e-12);
//! assert!((sol.fractions[0] - 0.75).abs() < 1e-12);
//! ```

pub mod channel;
pub mod ee;
pub mod erpa;
pub mod error;
pub mod fairness;
pub mod rate;
pub mod scenario;
pub mod sim;

pub use channel::{ChannelRealization, Fading, Placement, PlacementSpec};
pub use ee::{EeSolution, OracleMax};
pub use erpa::ErpaSolution;
pub use error::{Error, Result};
pub use fairness::FairnessReport;
pub use rate::{Allocation, PowerModel};
pub use scenario::Scenario;
pub use sim::{ExperimentAggregate, ExperimentConfig, ReTradeoff, Strategy, Sweep};
