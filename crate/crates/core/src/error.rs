//! Shared error type for the engine.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller handed an argument that violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Input data is malformed (bad table sizes, unnormalized distributions,
    /// values outside their declared space, ...).
    #[error("invalid data: {0}")]
    Data(String),

    /// A function oracle produced NaN or an infinity.
    #[error("non-finite value from {context} at {point:?}")]
    NonFinite { context: String, point: Vec<f64> },

    /// The utility of a user barely responds to the intervention action, so
    /// no finite intervention rate exists. `user` is 1-based.
    #[error("singular intervention rate for user {user}: |du/da0| = {magnitude:e} is below {floor:e}")]
    SingularRate {
        user: usize,
        magnitude: f64,
        floor: f64,
    },

    /// A profile enumeration would visit more grid points than allowed.
    #[error("{profiles} grid profiles exceed the enumeration cap {cap}; use a coarser grid")]
    EnumerationCap { profiles: u128, cap: u64 },

    /// The supportable set restricted to the evaluation grid is empty.
    #[error("no supportable profile on the evaluation grid")]
    NoSupportableProfile,
}
