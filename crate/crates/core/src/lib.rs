//! Intervention games: a manager (player 0) observes what N selfish users do
//! and reacts with an intervention action that degrades their payoffs. By
//! committing to a reaction rule (a *mechanism*), the manager reshapes the
//! users' incentives so that a desired profile becomes a Nash equilibrium of
//! the induced game, without intervening on the equilibrium path.
//!
//! The crate is organized around that pipeline:
//!
//! * [`game`] — action spaces, utility oracles, monitoring, and the expected
//!   payoffs users face once a mechanism is fixed;
//! * [`numerics`] — clamping, boundary-aware finite differences, and a
//!   deterministic grid maximizer;
//! * [`mechanisms`] — construction of constant, maximum-punishment, affine,
//!   and tabulated mechanisms, intervention-rate design, and second-order
//!   sufficiency checks for affine rules;
//! * [`equilibrium`] — support verification, the supportable set, optimal
//!   intervention equilibria, and conservative (maximin) mechanism choice;
//! * [`models`] — concrete applications: random-access contention control,
//!   linear pricing, and asymmetric per-user intervention.

pub mod equilibrium;
pub mod error;
pub mod game;
pub mod mechanisms;
pub mod models;
pub mod numerics;

pub use error::{Error, Result};
pub use game::{
    ActionProfile, ActionSpace, InterventionBounds, InterventionGame, InterventionMechanism,
    ManagerActionSpace, MechanismKind, MonitoringTechnology, Player, UtilityOracle,
};
pub use numerics::{FdSpec, GridSpec};
