//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A numeric argument violated its domain (negative, zero, or non-finite
    /// where positivity/finiteness is required).
    #[error("invalid {what}: {value}")]
    InvalidParameter { what: &'static str, value: f64 },

    /// The transmit power needed to meet the target rate exceeds the
    /// configured power budget.
    #[error("required transmit power {required:.6} W exceeds budget {budget:.6} W")]
    BudgetExceeded { required: f64, budget: f64 },

    /// A channel draw produced a zero or non-finite gain. Callers running
    /// Monte Carlo loops should resample; single-shot callers should treat
    /// this as a failed realization.
    #[error("degenerate channel realization (zero or non-finite gain); resample")]
    DegenerateChannel,

    /// User index outside `0..user_count`.
    #[error("user index {index} out of range for {users} users")]
    UserIndexOutOfRange { index: usize, users: usize },

    /// Root bracketing for the minimum-power search could not find a sign
    /// change before hitting the expansion cap.
    #[error("bracket expansion failed: residual still {residual:.3e} at P = {power:.3e} W")]
    BracketFailure { power: f64, residual: f64 },

    /// The rate bracket handed to the joint energy-efficiency optimizer does
    /// not contain an interior maximizer; the optimum sits on an endpoint.
    #[error("no interior maximum in rate bracket [{lo}, {hi}]; optimum pinned at {at}")]
    NoInteriorMaximum { lo: f64, hi: f64, at: f64 },

    /// Dinkelbach iteration exhausted its iteration budget without meeting
    /// the stopping criterion. Carries the `(n, q, power, rate)` trace for
    /// diagnosis.
    #[error("Dinkelbach did not converge in {max_iterations} iterations (last gap {gap:.3e})")]
    NotConverged { max_iterations: usize, gap: f64, trace: Vec<(usize, f64, f64, f64)> },

    /// An experiment configuration failed validation.
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}
