//! Game descriptions and payoff evaluation.
//!
//! An intervention game couples N regular users with a manager, player 0.
//! Each user i picks an action a_i from its own space; the manager observes a
//! signal s of the joint profile a = (a_1, ..., a_N) and answers with an
//! intervention action a_0 = f(s) prescribed by a committed mechanism f. The
//! payoff user i finally receives is the expectation over signals
//!
//! ```text
//!     v_i(a) = E[ u_i(f(s), a) ],    s ~ rho(a),
//! ```
//!
//! which collapses to `u_i(f(a), a)` under perfect monitoring. Fixing f turns
//! the strategic situation among the users into an ordinary N-player game,
//! the *induced game*; everything in [`crate::equilibrium`] reasons about its
//! Nash profiles.
//!
//! The engine's design ops assume a benevolent manager (u_0 is the weighted
//! sum of user utilities) and an intervention ordering: a minimal action that
//! every player weakly prefers and a maximal action that every player weakly
//! dislikes, regardless of the user profile. [`InterventionGame::validate_assumption1`]
//! spot-checks both orderings on a deterministic sample.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics;

/// Tolerance for membership tests and profile/target comparisons.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Tolerance on the normalization of monitoring distributions.
pub const PROBABILITY_TOL: f64 = 1e-9;
/// Slack below which an intervention-ordering violation is reported.
pub const ORDERING_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// players, actions, profiles
// ---------------------------------------------------------------------------

/// Identifies whose utility is being evaluated. `User(0)` is the first
/// regular user.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    Manager,
    User(usize),
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Manager => write!(f, "manager"),
            Player::User(i) => write!(f, "user {}", i + 1),
        }
    }
}

/// Action space of one regular user: a closed interval or a finite ordered
/// set of real action values.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionSpace {
    Interval { lo: f64, hi: f64 },
    Finite(Vec<f64>),
}

impl ActionSpace {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Data(format!(
                "interval action space needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(ActionSpace::Interval { lo, hi })
    }

    pub fn finite(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("finite action space has no values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("finite action space holds a non-finite value".into()));
        }
        for w in values.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Data(format!(
                    "finite action space must be strictly increasing, got {:?} before {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(ActionSpace::Finite(values))
    }

    /// Membership within [`MEMBERSHIP_TOL`].
    #[must_use]
    pub fn contains(&self, x: f64) -> bool {
        match self {
            ActionSpace::Interval { lo, hi } => x >= lo - MEMBERSHIP_TOL && x <= hi + MEMBERSHIP_TOL,
            ActionSpace::Finite(vs) => vs.iter().any(|v| (v - x).abs() <= MEMBERSHIP_TOL),
        }
    }

    /// Smallest enclosing interval.
    #[must_use]
    pub fn hull(&self) -> (f64, f64) {
        match self {
            ActionSpace::Interval { lo, hi } => (*lo, *hi),
            ActionSpace::Finite(vs) => (vs[0], *vs.last().expect("nonempty")),
        }
    }

    /// Search axis at the given resolution: the values themselves for a
    /// finite space, an even grid for an interval.
    #[must_use]
    pub fn axis(&self, resolution: usize) -> Vec<f64> {
        match self {
            ActionSpace::Interval { lo, hi } => numerics::linspace(*lo, *hi, resolution),
            ActionSpace::Finite(vs) => vs.clone(),
        }
    }

    #[must_use]
    pub fn is_finite_set(&self) -> bool {
        matches!(self, ActionSpace::Finite(_))
    }
}

/// Joint action profile of the regular users, ordered by user index.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionProfile(Vec<f64>);

impl ActionProfile {
    #[must_use]
    pub fn new(values: Vec<f64>) -> Self {
        ActionProfile(values)
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[must_use]
    pub fn get(&self, user: usize) -> f64 {
        self.0[user]
    }

    #[must_use]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Copy with user `user`'s coordinate replaced.
    #[must_use]
    pub fn with_coordinate(&self, user: usize, value: f64) -> Self {
        let mut v = self.0.clone();
        v[user] = value;
        ActionProfile(v)
    }

    pub(crate) fn set(&mut self, user: usize, value: f64) {
        self.0[user] = value;
    }

    /// Coordinate-wise agreement within `tol`.
    #[must_use]
    pub fn matches(&self, other: &ActionProfile, tol: f64) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl From<Vec<f64>> for ActionProfile {
    fn from(v: Vec<f64>) -> Self {
        ActionProfile(v)
    }
}

impl From<&[f64]> for ActionProfile {
    fn from(v: &[f64]) -> Self {
        ActionProfile(v.to_vec())
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

// ---------------------------------------------------------------------------
// manager side
// ---------------------------------------------------------------------------

/// The manager's action space: a scalar space shared across users (direct
/// intervention) or one interval component per user (asymmetric intervention,
/// e.g. per-user payments or throttling).
#[derive(Clone, Debug, PartialEq)]
pub enum ManagerActionSpace {
    Scalar(ActionSpace),
    Vector(Vec<(f64, f64)>),
}

impl ManagerActionSpace {
    #[must_use]
    pub fn dim(&self) -> usize {
        match self {
            ManagerActionSpace::Scalar(_) => 1,
            ManagerActionSpace::Vector(comps) => comps.len(),
        }
    }

    pub fn validate_action(&self, a0: &[f64]) -> Result<()> {
        if a0.len() != self.dim() {
            return Err(Error::Precondition(format!(
                "manager action has {} components, space expects {}",
                a0.len(),
                self.dim()
            )));
        }
        match self {
            ManagerActionSpace::Scalar(space) => {
                if !space.contains(a0[0]) {
                    return Err(Error::Precondition(format!(
                        "manager action {} lies outside its space",
                        a0[0]
                    )));
                }
            }
            ManagerActionSpace::Vector(comps) => {
                for (k, (&x, &(lo, hi))) in a0.iter().zip(comps).enumerate() {
                    if x < lo - MEMBERSHIP_TOL || x > hi + MEMBERSHIP_TOL {
                        return Err(Error::Precondition(format!(
                            "manager component {k} = {x} lies outside [{lo}, {hi}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The intervention ordering's extreme actions: `lo` is the minimal
/// intervention every player weakly prefers, `hi` the maximal intervention
/// every player weakly dislikes. One entry per manager-action component.
#[derive(Clone, Debug, PartialEq)]
pub struct InterventionBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl InterventionBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Data(format!(
                "intervention bounds need matching nonempty components, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (k, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(Error::Data(format!(
                    "intervention bounds component {k} must satisfy lo <= hi, got [{a}, {b}]"
                )));
            }
        }
        Ok(InterventionBounds { lo, hi })
    }

    pub fn scalar(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Minimal intervention action.
    #[must_use]
    pub fn minimal(&self) -> &[f64] {
        &self.lo
    }

    /// Maximal intervention action.
    #[must_use]
    pub fn maximal(&self) -> &[f64] {
        &self.hi
    }

    /// Scalar view; panics if the bounds are vector-valued.
    #[must_use]
    pub fn minimal_scalar(&self) -> f64 {
        assert_eq!(self.dim(), 1, "bounds are vector-valued");
        self.lo[0]
    }

    #[must_use]
    pub fn maximal_scalar(&self) -> f64 {
        assert_eq!(self.dim(), 1, "bounds are vector-valued");
        self.hi[0]
    }
}

// ---------------------------------------------------------------------------
// utilities and monitoring
// ---------------------------------------------------------------------------

type EvalFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type PartialFn = dyn Fn(&[f64], &[f64], usize) -> f64 + Send + Sync;

/// Deterministic payoff function `u(a0, a)` with optional analytic partials.
///
/// The oracle must be a pure function: repeated calls with identical inputs
/// return bit-identical values, and it is safe to call from many threads.
#[derive(Clone)]
pub struct UtilityOracle {
    tag: String,
    eval: Arc<EvalFn>,
    manager_partial: Option<Arc<PartialFn>>,
    user_partial: Option<Arc<PartialFn>>,
}

impl UtilityOracle {
    pub fn new(
        tag: impl Into<String>,
        eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        UtilityOracle {
            tag: tag.into(),
            eval: Arc::new(eval),
            manager_partial: None,
            user_partial: None,
        }
    }

    /// Declares the analytic partial with respect to manager component `k`.
    #[must_use]
    pub fn with_manager_partial(
        mut self,
        partial: impl Fn(&[f64], &[f64], usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.manager_partial = Some(Arc::new(partial));
        self
    }

    /// Declares the analytic partial with respect to user coordinate `j`.
    #[must_use]
    pub fn with_user_partial(
        mut self,
        partial: impl Fn(&[f64], &[f64], usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.user_partial = Some(Arc::new(partial));
        self
    }

    #[must_use]
    pub fn value(&self, a0: &[f64], a: &[f64]) -> f64 {
        (self.eval)(a0, a)
    }

    /// Analytic du/da0\[k\] if declared.
    #[must_use]
    pub fn manager_partial(&self, a0: &[f64], a: &[f64], k: usize) -> Option<f64> {
        self.manager_partial.as_ref().map(|f| f(a0, a, k))
    }

    /// Analytic du/da\[j\] if declared.
    #[must_use]
    pub fn user_partial(&self, a0: &[f64], a: &[f64], j: usize) -> Option<f64> {
        self.user_partial.as_ref().map(|f| f(a0, a, j))
    }

    #[must_use]
    pub fn has_analytic_partials(&self) -> bool {
        self.manager_partial.is_some() && self.user_partial.is_some()
    }

    #[must_use]
    pub fn has_manager_partial(&self) -> bool {
        self.manager_partial.is_some()
    }

    #[must_use]
    pub fn has_user_partial(&self) -> bool {
        self.user_partial.is_some()
    }

    #[must_use]
    pub fn tag(&self) -> &str {
        &self.tag
    }
}

impl fmt::Debug for UtilityOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UtilityOracle")
            .field("tag", &self.tag)
            .field("analytic_partials", &self.has_analytic_partials())
            .finish()
    }
}

type DistFn = dyn Fn(&ActionProfile) -> Vec<f64> + Send + Sync;

/// How the manager observes the users.
#[derive(Clone)]
pub enum MonitoringTechnology {
    /// The signal is the profile itself.
    Perfect,
    /// Finitely many signals; `distribution` maps a profile to the signal
    /// probabilities (length `signals`, nonnegative, summing to one within
    /// [`PROBABILITY_TOL`]).
    FiniteStochastic {
        signals: usize,
        distribution: Arc<DistFn>,
    },
}

impl MonitoringTechnology {
    pub fn finite_stochastic(
        signals: usize,
        distribution: impl Fn(&ActionProfile) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if signals == 0 {
            return Err(Error::Data("monitoring needs at least one signal".into()));
        }
        Ok(MonitoringTechnology::FiniteStochastic {
            signals,
            distribution: Arc::new(distribution),
        })
    }
}

impl fmt::Debug for MonitoringTechnology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitoringTechnology::Perfect => write!(f, "Perfect"),
            MonitoringTechnology::FiniteStochastic { signals, .. } => {
                write!(f, "FiniteStochastic({signals} signals)")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// mechanisms
// ---------------------------------------------------------------------------

type RuleFn = dyn Fn(&ActionProfile) -> Vec<f64> + Send + Sync;

/// Structural form of a mechanism. Built through the constructors in
/// [`crate::mechanisms`], which validate the data.
#[derive(Clone)]
pub enum MechanismKind {
    /// Same intervention action regardless of the signal.
    Constant { action: Vec<f64> },
    /// Minimal intervention exactly on the target profile, maximal otherwise.
    MaxPunishment {
        target: ActionProfile,
        minimal: Vec<f64>,
        maximal: Vec<f64>,
    },
    /// Scalar intervention growing linearly in each user's deviation from the
    /// target, clamped to the intervention interval:
    /// `clamp(sum_i rates[i] (a_i - target_i) + lo, lo, hi)`.
    Affine {
        target: ActionProfile,
        rates: Vec<f64>,
        lo: f64,
        hi: f64,
    },
    /// Explicit signal-indexed table of intervention actions.
    Tabulated { table: Vec<Vec<f64>> },
    /// Closed-form reaction rule on observed profiles (e.g. usage-based
    /// payments). Must be deterministic.
    ClosedForm { label: String, rule: Arc<RuleFn> },
}

impl fmt::Debug for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", InterventionMechanism { kind: self.clone() }.label())
    }
}

/// A committed reaction rule of the manager, mapping observed signals to
/// intervention actions.
#[derive(Clone)]
pub struct InterventionMechanism {
    kind: MechanismKind,
}

impl InterventionMechanism {
    pub(crate) fn from_kind(kind: MechanismKind) -> Self {
        InterventionMechanism { kind }
    }

    #[must_use]
    pub fn kind(&self) -> &MechanismKind {
        &self.kind
    }

    /// Short structural label, used in reports.
    #[must_use]
    pub fn label(&self) -> String {
        match &self.kind {
            MechanismKind::Constant { action } => format!("constant({action:?})"),
            MechanismKind::MaxPunishment { target, .. } => format!("max_punishment({target})"),
            MechanismKind::Affine { target, rates, .. } => {
                format!("affine({target}, rates {rates:?})")
            }
            MechanismKind::Tabulated { table } => format!("tabulated({} signals)", table.len()),
            MechanismKind::ClosedForm { label, .. } => label.clone(),
        }
    }

    /// Intervention action on an observed profile (perfect monitoring).
    pub fn respond(&self, game: &InterventionGame, a: &ActionProfile) -> Result<Vec<f64>> {
        match &self.kind {
            MechanismKind::Constant { action } => Ok(action.clone()),
            MechanismKind::MaxPunishment {
                target,
                minimal,
                maximal,
            } => {
                if a.matches(target, MEMBERSHIP_TOL) {
                    Ok(minimal.clone())
                } else {
                    Ok(maximal.clone())
                }
            }
            MechanismKind::Affine {
                target,
                rates,
                lo,
                hi,
            } => {
                let mut x = *lo;
                for (j, r) in rates.iter().enumerate() {
                    x += r * (a.get(j) - target.get(j));
                }
                Ok(vec![numerics::clamp(x, *lo, *hi)])
            }
            MechanismKind::Tabulated { table } => {
                let idx = game.finite_signal_index(a)?;
                table.get(idx).cloned().ok_or_else(|| {
                    Error::Data(format!(
                        "tabulated mechanism covers {} signals but profile {a} maps to index {idx}",
                        table.len()
                    ))
                })
            }
            MechanismKind::ClosedForm { rule, .. } => Ok(rule(a)),
        }
    }

    /// Intervention action on a finite signal index (stochastic monitoring).
    pub fn respond_to_signal(&self, signal: usize) -> Result<Vec<f64>> {
        match &self.kind {
            MechanismKind::Constant { action } => Ok(action.clone()),
            MechanismKind::Tabulated { table } => table.get(signal).cloned().ok_or_else(|| {
                Error::Data(format!(
                    "tabulated mechanism covers {} signals, asked for signal {signal}",
                    table.len()
                ))
            }),
            _ => Err(Error::Precondition(format!(
                "{} is defined on observed profiles, not on abstract signals",
                self.label()
            ))),
        }
    }
}

impl fmt::Debug for InterventionMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InterventionMechanism({})", self.label())
    }
}

// ---------------------------------------------------------------------------
// the game
// ---------------------------------------------------------------------------

/// Full description of an intervention game.
#[derive(Clone, Debug)]
pub struct InterventionGame {
    user_spaces: Vec<ActionSpace>,
    manager_space: ManagerActionSpace,
    user_utilities: Vec<UtilityOracle>,
    manager_utility: UtilityOracle,
    monitoring: MonitoringTechnology,
    bounds: InterventionBounds,
    weights: Vec<f64>,
}

impl InterventionGame {
    /// Builds a game with unit welfare weights.
    pub fn new(
        user_spaces: Vec<ActionSpace>,
        manager_space: ManagerActionSpace,
        user_utilities: Vec<UtilityOracle>,
        manager_utility: UtilityOracle,
        monitoring: MonitoringTechnology,
        bounds: InterventionBounds,
    ) -> Result<Self> {
        let n = user_spaces.len();
        Self::new_weighted(
            user_spaces,
            manager_space,
            user_utilities,
            manager_utility,
            monitoring,
            bounds,
            vec![1.0; n],
        )
    }

    pub fn new_weighted(
        user_spaces: Vec<ActionSpace>,
        manager_space: ManagerActionSpace,
        user_utilities: Vec<UtilityOracle>,
        manager_utility: UtilityOracle,
        monitoring: MonitoringTechnology,
        bounds: InterventionBounds,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if user_spaces.is_empty() {
            return Err(Error::Data("a game needs at least one user".into()));
        }
        if user_utilities.len() != user_spaces.len() {
            return Err(Error::Data(format!(
                "{} user spaces but {} user utilities",
                user_spaces.len(),
                user_utilities.len()
            )));
        }
        if weights.len() != user_spaces.len() {
            return Err(Error::Data(format!(
                "{} user spaces but {} welfare weights",
                user_spaces.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Data("welfare weights must be nonnegative".into()));
        }
        if bounds.dim() != manager_space.dim() {
            return Err(Error::Data(format!(
                "bounds have {} components but the manager space has {}",
                bounds.dim(),
                manager_space.dim()
            )));
        }
        manager_space.validate_action(bounds.minimal())?;
        manager_space.validate_action(bounds.maximal())?;
        Ok(InterventionGame {
            user_spaces,
            manager_space,
            user_utilities,
            manager_utility,
            monitoring,
            bounds,
            weights,
        })
    }

    #[must_use]
    pub fn num_users(&self) -> usize {
        self.user_spaces.len()
    }

    #[must_use]
    pub fn user_space(&self, user: usize) -> &ActionSpace {
        &self.user_spaces[user]
    }

    #[must_use]
    pub fn user_spaces(&self) -> &[ActionSpace] {
        &self.user_spaces
    }

    #[must_use]
    pub fn manager_space(&self) -> &ManagerActionSpace {
        &self.manager_space
    }

    #[must_use]
    pub fn bounds(&self) -> &InterventionBounds {
        &self.bounds
    }

    #[must_use]
    pub fn monitoring(&self) -> &MonitoringTechnology {
        &self.monitoring
    }

    #[must_use]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[must_use]
    pub fn oracle(&self, player: Player) -> &UtilityOracle {
        match player {
            Player::Manager => &self.manager_utility,
            Player::User(i) => &self.user_utilities[i],
        }
    }

    fn check_player(&self, player: Player) -> Result<()> {
        if let Player::User(i) = player {
            if i >= self.num_users() {
                return Err(Error::Precondition(format!(
                    "user index {} out of range for {} users",
                    i + 1,
                    self.num_users()
                )));
            }
        }
        Ok(())
    }

    /// Validates an action profile against the user spaces; errors name the
    /// offending coordinate.
    pub fn validate_profile(&self, a: &ActionProfile) -> Result<()> {
        if a.len() != self.num_users() {
            return Err(Error::Precondition(format!(
                "profile has {} coordinates, the game has {} users",
                a.len(),
                self.num_users()
            )));
        }
        for (i, space) in self.user_spaces.iter().enumerate() {
            if !space.contains(a.get(i)) {
                return Err(Error::Precondition(format!(
                    "coordinate {} = {} lies outside user {}'s action space",
                    i + 1,
                    a.get(i),
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Raw utility `u_player(a0, a)`.
    pub fn utility(&self, player: Player, a0: &[f64], a: &ActionProfile) -> Result<f64> {
        self.check_player(player)?;
        self.manager_space.validate_action(a0)?;
        self.validate_profile(a)?;
        Ok(self.oracle(player).value(a0, a.as_slice()))
    }

    /// Expected utility of `player` at profile `a` once `mechanism` is fixed:
    /// the signal expectation of `u(f(s), a)`. Under perfect monitoring this
    /// is exactly `u(f(a), a)` with no intermediate blending.
    pub fn expected_utility(
        &self,
        mechanism: &InterventionMechanism,
        player: Player,
        a: &ActionProfile,
    ) -> Result<f64> {
        self.check_player(player)?;
        self.validate_profile(a)?;
        let eval = Evaluator::new(self, mechanism)?;
        eval.payoff(player, a)
    }

    /// Expected manager utility under `(mechanism, a)`. For a benevolent
    /// manager this equals the weighted sum of the users' expected utilities.
    pub fn manager_value(&self, mechanism: &InterventionMechanism, a: &ActionProfile) -> Result<f64> {
        self.expected_utility(mechanism, Player::Manager, a)
    }

    /// View of the N-player game among the users induced by `mechanism`.
    /// Payoffs are evaluated lazily; nothing is materialized.
    pub fn induced_game<'g>(
        &'g self,
        mechanism: &'g InterventionMechanism,
    ) -> Result<InducedGame<'g>> {
        let evaluator = Evaluator::new(self, mechanism)?;
        Ok(InducedGame { evaluator })
    }

    /// Row-major index of a profile of a game whose user spaces are all
    /// finite; user 1 is the most significant digit.
    pub fn finite_signal_index(&self, a: &ActionProfile) -> Result<usize> {
        self.validate_profile(a)?;
        let mut index = 0usize;
        for (i, space) in self.user_spaces.iter().enumerate() {
            let ActionSpace::Finite(values) = space else {
                return Err(Error::Precondition(format!(
                    "user {}'s action space is an interval; signals are only indexable for finite games",
                    i + 1
                )));
            };
            let pos = values
                .iter()
                .position(|v| (v - a.get(i)).abs() <= MEMBERSHIP_TOL)
                .ok_or_else(|| {
                    Error::Data(format!(
                        "coordinate {} = {} is not an action of user {}",
                        i + 1,
                        a.get(i),
                        i + 1
                    ))
                })?;
            index = index * values.len() + pos;
        }
        Ok(index)
    }

    /// Number of distinct profiles of an all-finite game.
    pub fn finite_signal_count(&self) -> Result<usize> {
        let mut count = 1usize;
        for (i, space) in self.user_spaces.iter().enumerate() {
            let ActionSpace::Finite(values) = space else {
                return Err(Error::Precondition(format!(
                    "user {}'s action space is an interval; the game is not finite",
                    i + 1
                )));
            };
            count = count.checked_mul(values.len()).ok_or(Error::EnumerationCap {
                profiles: u128::MAX,
                cap: usize::MAX as u64,
            })?;
        }
        Ok(count)
    }

    /// Checks the intervention ordering (minimal action weakly best, maximal
    /// weakly worst, for every user and for the manager) on `samples`
    /// deterministic low-discrepancy points of the joint action space.
    pub fn validate_assumption1(&self, samples: usize) -> Result<Assumption1Report> {
        self.validate_assumption1_seeded(samples, 0)
    }

    /// As [`Self::validate_assumption1`] with a seed that rotates which
    /// points the audit probes (seed 0 is the canonical sequence).
    pub fn validate_assumption1_seeded(&self, samples: usize, seed: u64) -> Result<Assumption1Report> {
        if samples == 0 {
            return Err(Error::Precondition("sample count must be positive".into()));
        }
        let d0 = self.manager_space.dim();
        let n = self.num_users();
        let unit = numerics::unit_low_discrepancy_seeded(d0 + n, samples, seed);
        let mut report = Assumption1Report {
            samples,
            violations: Vec::new(),
            min_slack: f64::INFINITY,
            max_slack: f64::NEG_INFINITY,
        };
        let lo = self.bounds.minimal();
        let hi = self.bounds.maximal();
        for point in &unit {
            let a0 = self.sample_manager_action(&point[..d0]);
            let a = self.sample_profile(&point[d0..]);
            let players = std::iter::once(Player::Manager)
                .chain((0..n).map(Player::User));
            for player in players {
                let oracle = self.oracle(player);
                let at_lo = oracle.value(lo, a.as_slice());
                let at_mid = oracle.value(&a0, a.as_slice());
                let at_hi = oracle.value(hi, a.as_slice());
                for (side, slack) in [
                    (OrderingSide::MinimalNotWeaklyBest, at_lo - at_mid),
                    (OrderingSide::MaximalNotWeaklyWorst, at_mid - at_hi),
                ] {
                    report.min_slack = report.min_slack.min(slack);
                    report.max_slack = report.max_slack.max(slack);
                    if slack < -ORDERING_TOL {
                        report.violations.push(OrderingViolation {
                            player,
                            side,
                            manager_action: a0.clone(),
                            profile: a.clone(),
                            slack,
                        });
                    }
                }
            }
        }
        Ok(report)
    }

    fn sample_manager_action(&self, unit: &[f64]) -> Vec<f64> {
        match &self.manager_space {
            ManagerActionSpace::Scalar(space) => match space {
                ActionSpace::Interval { lo, hi } => vec![lo + unit[0] * (hi - lo)],
                ActionSpace::Finite(vs) => {
                    let idx = ((unit[0] * vs.len() as f64) as usize).min(vs.len() - 1);
                    vec![vs[idx]]
                }
            },
            ManagerActionSpace::Vector(comps) => comps
                .iter()
                .zip(unit)
                .map(|(&(lo, hi), u)| lo + u * (hi - lo))
                .collect(),
        }
    }

    fn sample_profile(&self, unit: &[f64]) -> ActionProfile {
        let values = self
            .user_spaces
            .iter()
            .zip(unit)
            .map(|(space, u)| match space {
                ActionSpace::Interval { lo, hi } => lo + u * (hi - lo),
                ActionSpace::Finite(vs) => {
                    let idx = ((u * vs.len() as f64) as usize).min(vs.len() - 1);
                    vs[idx]
                }
            })
            .collect();
        ActionProfile::new(values)
    }

    /// User `user`'s utility as a function of the joint vector
    /// `[a0, a_1, ..., a_N]`; scalar-manager games only.
    pub(crate) fn joint_user_fn(&self, user: usize) -> impl Fn(&[f64]) -> f64 + '_ {
        let oracle = &self.user_utilities[user];
        move |x: &[f64]| oracle.value(&x[..1], &x[1..])
    }

    /// Box bounds of the joint vector: the intervention interval followed by
    /// the hull of each user space.
    pub(crate) fn joint_bounds(&self) -> Result<Vec<(f64, f64)>> {
        if self.manager_space.dim() != 1 {
            return Err(Error::Precondition(
                "joint differentiation needs a scalar manager action".into(),
            ));
        }
        let mut b = vec![(self.bounds.minimal_scalar(), self.bounds.maximal_scalar())];
        b.extend(self.user_spaces.iter().map(ActionSpace::hull));
        Ok(b)
    }
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

/// Prevalidated (game, mechanism) pair for repeated payoff evaluation. The
/// constructor performs the compatibility checks once so enumeration loops
/// stay cheap.
pub(crate) struct Evaluator<'g> {
    game: &'g InterventionGame,
    mechanism: &'g InterventionMechanism,
}

impl<'g> Evaluator<'g> {
    pub(crate) fn new(
        game: &'g InterventionGame,
        mechanism: &'g InterventionMechanism,
    ) -> Result<Self> {
        let dim = game.manager_space.dim();
        match mechanism.kind() {
            MechanismKind::Constant { action } => {
                game.manager_space.validate_action(action)?;
            }
            MechanismKind::MaxPunishment {
                target,
                minimal,
                maximal,
            } => {
                game.validate_profile(target)?;
                check_bounds_agree(game, minimal, maximal)?;
            }
            MechanismKind::Affine {
                target,
                rates,
                lo,
                hi,
            } => {
                if dim != 1 {
                    return Err(Error::Precondition(
                        "affine mechanisms need a scalar manager action".into(),
                    ));
                }
                game.validate_profile(target)?;
                if rates.len() != game.num_users() {
                    return Err(Error::Precondition(format!(
                        "{} rates for {} users",
                        rates.len(),
                        game.num_users()
                    )));
                }
                check_bounds_agree(game, &[*lo], &[*hi])?;
            }
            MechanismKind::Tabulated { table } => match game.monitoring() {
                MonitoringTechnology::Perfect => {
                    let count = game.finite_signal_count()?;
                    if table.len() != count {
                        return Err(Error::Data(format!(
                            "tabulated mechanism covers {} signals, the game has {count} profiles",
                            table.len()
                        )));
                    }
                    for row in table {
                        game.manager_space.validate_action(row)?;
                    }
                }
                MonitoringTechnology::FiniteStochastic { signals, .. } => {
                    if table.len() != *signals {
                        return Err(Error::Data(format!(
                            "tabulated mechanism covers {} signals, monitoring emits {signals}",
                            table.len()
                        )));
                    }
                    for row in table {
                        game.manager_space.validate_action(row)?;
                    }
                }
            },
            MechanismKind::ClosedForm { .. } => {}
        }
        if let MonitoringTechnology::FiniteStochastic { .. } = game.monitoring() {
            if !matches!(
                mechanism.kind(),
                MechanismKind::Constant { .. } | MechanismKind::Tabulated { .. }
            ) {
                return Err(Error::Precondition(format!(
                    "{} maps observed profiles, but the monitoring emits abstract signals; \
                     use a constant or tabulated mechanism",
                    mechanism.label()
                )));
            }
        }
        Ok(Evaluator { game, mechanism })
    }

    /// Expected payoff; assumes `a` was validated against the user spaces.
    pub(crate) fn payoff(&self, player: Player, a: &ActionProfile) -> Result<f64> {
        let oracle = self.game.oracle(player);
        match self.game.monitoring() {
            MonitoringTechnology::Perfect => {
                let a0 = self.mechanism.respond(self.game, a)?;
                Ok(oracle.value(&a0, a.as_slice()))
            }
            MonitoringTechnology::FiniteStochastic {
                signals,
                distribution,
            } => {
                let dist = distribution(a);
                if dist.len() != *signals {
                    return Err(Error::Data(format!(
                        "monitoring distribution returned {} probabilities for {signals} signals",
                        dist.len()
                    )));
                }
                let sum: f64 = dist.iter().sum();
                if dist.iter().any(|p| *p < -PROBABILITY_TOL) || (sum - 1.0).abs() > PROBABILITY_TOL
                {
                    return Err(Error::Data(format!(
                        "monitoring distribution at {a} is not a probability vector (sum {sum})"
                    )));
                }
                let mut value = 0.0;
                for (m, p) in dist.iter().enumerate() {
                    let a0 = self.mechanism.respond_to_signal(m)?;
                    value += p * oracle.value(&a0, a.as_slice());
                }
                Ok(value)
            }
        }
    }
}

fn check_bounds_agree(game: &InterventionGame, lo: &[f64], hi: &[f64]) -> Result<()> {
    let b = game.bounds();
    let agree = |x: &[f64], y: &[f64]| {
        x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= MEMBERSHIP_TOL)
    };
    if !agree(lo, b.minimal()) || !agree(hi, b.maximal()) {
        return Err(Error::Precondition(
            "mechanism was built for different intervention bounds than the game declares".into(),
        ));
    }
    Ok(())
}

/// The N-player game among the users once a mechanism is fixed.
pub struct InducedGame<'g> {
    evaluator: Evaluator<'g>,
}

impl InducedGame<'_> {
    /// Expected payoff of user `user` (0-based) at profile `a`.
    pub fn payoff(&self, user: usize, a: &ActionProfile) -> Result<f64> {
        self.evaluator.game.check_player(Player::User(user))?;
        self.evaluator.game.validate_profile(a)?;
        self.evaluator.payoff(Player::User(user), a)
    }

    #[must_use]
    pub fn num_users(&self) -> usize {
        self.evaluator.game.num_users()
    }
}

// ---------------------------------------------------------------------------
// intervention-ordering report
// ---------------------------------------------------------------------------

/// Which half of the intervention ordering a sample violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderingSide {
    /// u(minimal, a) < u(a0, a): the minimal action is not weakly best.
    MinimalNotWeaklyBest,
    /// u(a0, a) < u(maximal, a): the maximal action is not weakly worst.
    MaximalNotWeaklyWorst,
}

#[derive(Clone, Debug)]
pub struct OrderingViolation {
    pub player: Player,
    pub side: OrderingSide,
    pub manager_action: Vec<f64>,
    pub profile: ActionProfile,
    pub slack: f64,
}

/// Outcome of [`InterventionGame::validate_assumption1`].
#[derive(Clone, Debug)]
pub struct Assumption1Report {
    /// Number of sampled joint action points.
    pub samples: usize,
    pub violations: Vec<OrderingViolation>,
    /// Smallest ordering slack seen (negative iff a violation exists).
    pub min_slack: f64,
    /// Largest ordering slack seen.
    pub max_slack: f64,
}

impl Assumption1Report {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Assumption1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(
                f,
                "intervention ordering holds on {} samples (max observed slack {:.6e})",
                self.samples, self.max_slack
            )
        } else {
            let v = &self.violations[0];
            write!(
                f,
                "intervention ordering violated {} times in {} samples; first: {} at a0 = {:?}, a = {} (slack {:.3e})",
                self.violations.len(),
                self.samples,
                v.player,
                v.manager_action,
                v.profile,
                v.slack
            )
        }
    }
}

// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms;

    /// Two-user contention game: user i receives gamma_i a_i (1 - a_j)
    /// (1 - a0), the manager the unweighted sum.
    fn contention(gamma: [f64; 2]) -> InterventionGame {
        let user = |i: usize, g: f64| {
            UtilityOracle::new(format!("g{g}*a{i}"), move |a0: &[f64], a: &[f64]| {
                let j = 1 - i;
                g * a[i] * (1.0 - a[j]) * (1.0 - a0[0])
            })
        };
        let [g1, g2] = gamma;
        let manager = UtilityOracle::new("sum", move |a0: &[f64], a: &[f64]| {
            g1 * a[0] * (1.0 - a[1]) * (1.0 - a0[0]) + g2 * a[1] * (1.0 - a[0]) * (1.0 - a0[0])
        });
        InterventionGame::new(
            vec![
                ActionSpace::interval(0.0, 1.0).unwrap(),
                ActionSpace::interval(0.0, 1.0).unwrap(),
            ],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![user(0, gamma[0]), user(1, gamma[1])],
            manager,
            MonitoringTechnology::Perfect,
            InterventionBounds::scalar(0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn p(vals: &[f64]) -> ActionProfile {
        ActionProfile::from(vals)
    }

    #[test]
    fn utility_hand_values() {
        let game = contention([1.0, 1.0]);
        let u = game.utility(Player::User(0), &[0.0], &p(&[0.5, 0.5])).unwrap();
        assert!((u - 0.25).abs() < 1e-12, "u = {u}");
        let u = game.utility(Player::User(0), &[1.0], &p(&[0.5, 0.5])).unwrap();
        assert_eq!(u, 0.0);
        let u = game.utility(Player::User(0), &[0.5], &p(&[0.4, 0.2])).unwrap();
        assert!((u - 0.16).abs() < 1e-12, "u = {u}");
    }

    #[test]
    fn utility_rejects_out_of_space_coordinates() {
        let game = contention([1.0, 1.0]);
        let err = game
            .utility(Player::User(0), &[0.0], &p(&[1.5, 0.5]))
            .unwrap_err();
        assert!(err.to_string().contains("coordinate 1"), "{err}");
        let err = game
            .utility(Player::User(0), &[2.0], &p(&[0.5, 0.5]))
            .unwrap_err();
        assert!(err.to_string().contains("manager action"), "{err}");
    }

    #[test]
    fn utility_is_bit_reproducible() {
        let game = contention([1.3, 0.7]);
        let a = p(&[0.31, 0.62]);
        let x = game.utility(Player::User(1), &[0.19], &a).unwrap();
        let y = game.utility(Player::User(1), &[0.19], &a).unwrap();
        assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn expected_utility_matches_direct_call_for_constant_rule() {
        let game = contention([1.0, 1.0]);
        let f = mechanisms::constant(0.5, game.bounds()).unwrap();
        let a = p(&[0.4, 0.2]);
        let via_mechanism = game.expected_utility(&f, Player::User(0), &a).unwrap();
        let direct = game.utility(Player::User(0), &[0.5], &a).unwrap();
        assert_eq!(via_mechanism.to_bits(), direct.to_bits());
        assert!((via_mechanism - 0.16).abs() < 1e-12);
    }

    #[test]
    fn max_punishment_zeroes_off_target_payoffs() {
        let game = contention([1.0, 1.0]);
        let f = mechanisms::max_punishment(p(&[0.5, 0.5]), game.bounds()).unwrap();
        let off = game.expected_utility(&f, Player::User(0), &p(&[0.6, 0.5])).unwrap();
        assert_eq!(off, 0.0);
        let on = game.expected_utility(&f, Player::User(0), &p(&[0.5, 0.5])).unwrap();
        assert!((on - 0.25).abs() < 1e-12);
    }

    #[test]
    fn stochastic_monitoring_blends_signal_responses() {
        // two signals, uniform regardless of the profile; respond 0 on the
        // first and 1 on the second
        let mut game = contention([1.0, 1.0]);
        game.monitoring =
            MonitoringTechnology::finite_stochastic(2, |_| vec![0.5, 0.5]).unwrap();
        let f = mechanisms::tabulated_scalar(vec![0.0, 1.0]).unwrap();
        let v = game.expected_utility(&f, Player::User(0), &p(&[0.5, 0.5])).unwrap();
        assert!((v - 0.125).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn stochastic_monitoring_rejects_profile_domain_mechanisms() {
        let mut game = contention([1.0, 1.0]);
        game.monitoring =
            MonitoringTechnology::finite_stochastic(2, |_| vec![0.5, 0.5]).unwrap();
        let f = mechanisms::max_punishment(p(&[0.5, 0.5]), game.bounds()).unwrap();
        let err = game.expected_utility(&f, Player::User(0), &p(&[0.5, 0.5])).unwrap_err();
        assert!(err.to_string().contains("abstract signals"), "{err}");
    }

    #[test]
    fn unnormalized_distribution_is_a_data_error() {
        let mut game = contention([1.0, 1.0]);
        game.monitoring =
            MonitoringTechnology::finite_stochastic(2, |_| vec![0.7, 0.6]).unwrap();
        let f = mechanisms::tabulated_scalar(vec![0.0, 1.0]).unwrap();
        let err = game.expected_utility(&f, Player::User(0), &p(&[0.5, 0.5])).unwrap_err();
        assert!(err.to_string().contains("probability"), "{err}");
    }

    #[test]
    fn expectation_is_linear_in_the_distribution() {
        let blend = |alpha: f64| {
            let mut game = contention([1.0, 1.0]);
            game.monitoring = MonitoringTechnology::finite_stochastic(2, move |a| {
                let q = 0.25 + 0.5 * a.get(0);
                vec![
                    alpha * q + (1.0 - alpha) * 0.9,
                    alpha * (1.0 - q) + (1.0 - alpha) * 0.1,
                ]
            })
            .unwrap();
            let f = mechanisms::tabulated_scalar(vec![0.0, 1.0]).unwrap();
            game.expected_utility(&f, Player::User(0), &p(&[0.3, 0.4])).unwrap()
        };
        for alpha in [0.0, 0.25, 0.5, 0.875, 1.0] {
            let blended = blend(alpha);
            let expected = alpha * blend(1.0) + (1.0 - alpha) * blend(0.0);
            assert!(
                (blended - expected).abs() < 1e-12,
                "alpha {alpha}: {blended} vs {expected}"
            );
        }
    }

    #[test]
    fn manager_value_sums_user_utilities_for_benevolent_games() {
        let game = contention([1.0, 1.0]);
        let f = mechanisms::constant(0.0, game.bounds()).unwrap();
        let a = p(&[0.5, 0.5]);
        let v0 = game.manager_value(&f, &a).unwrap();
        let v1 = game.expected_utility(&f, Player::User(0), &a).unwrap();
        let v2 = game.expected_utility(&f, Player::User(1), &a).unwrap();
        assert!((v0 - 0.5).abs() < 1e-12);
        assert!((v0 - (v1 + v2)).abs() < 1e-12);
    }

    #[test]
    fn induced_game_agrees_with_expected_utility() {
        let game = contention([2.0, 1.0]);
        let f = mechanisms::max_punishment(p(&[0.5, 0.5]), game.bounds()).unwrap();
        let induced = game.induced_game(&f).unwrap();
        for a in [p(&[0.5, 0.5]), p(&[0.2, 0.8]), p(&[0.0, 0.0])] {
            let x = induced.payoff(0, &a).unwrap();
            let y = game.expected_utility(&f, Player::User(0), &a).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn finite_signal_index_is_row_major() {
        let space = || ActionSpace::finite(vec![0.0, 0.5, 1.0]).unwrap();
        let user = |i: usize| {
            UtilityOracle::new("flat", move |_: &[f64], a: &[f64]| a[i])
        };
        let game = InterventionGame::new(
            vec![space(), space()],
            ManagerActionSpace::Scalar(space()),
            vec![user(0), user(1)],
            UtilityOracle::new("zero", |_, _| 0.0),
            MonitoringTechnology::Perfect,
            InterventionBounds::scalar(0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(game.finite_signal_count().unwrap(), 9);
        assert_eq!(game.finite_signal_index(&p(&[0.0, 0.0])).unwrap(), 0);
        assert_eq!(game.finite_signal_index(&p(&[0.0, 1.0])).unwrap(), 2);
        assert_eq!(game.finite_signal_index(&p(&[0.5, 0.0])).unwrap(), 3);
        assert_eq!(game.finite_signal_index(&p(&[1.0, 1.0])).unwrap(), 8);
    }

    #[test]
    fn ordering_validation_passes_on_the_contention_game() {
        let game = contention([1.0, 2.0]);
        let report = game.validate_assumption1(200).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.samples, 200);
        assert!(report.max_slack > 0.0);
    }

    #[test]
    fn ordering_validation_flags_utilities_increasing_in_intervention() {
        let game = InterventionGame::new(
            vec![ActionSpace::interval(0.0, 1.0).unwrap()],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![UtilityOracle::new("a0", |a0: &[f64], _: &[f64]| a0[0])],
            UtilityOracle::new("a0", |a0: &[f64], _: &[f64]| a0[0]),
            MonitoringTechnology::Perfect,
            InterventionBounds::scalar(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let report = game.validate_assumption1(50).unwrap();
        assert!(!report.passed());
        let v = &report.violations[0];
        assert!(v.slack < 0.0);
        assert!(!report.violations.is_empty());
    }

    #[test]
    fn ordering_validation_respects_sample_count() {
        let game = contention([1.0, 1.0]);
        let report = game.validate_assumption1(1).unwrap();
        assert_eq!(report.samples, 1);
    }
}
