//! Mechanism constructors, intervention-rate design, and the sufficient
//! second-order conditions for affine support.
//!
//! Two families carry the main results. The *maximum-punishment* mechanism
//! plays the minimal intervention exactly on the target profile and the
//! maximal one otherwise; it supports a target whenever anything does. The
//! *affine* mechanism replaces that discontinuous threat with a clamped ramp
//!
//! ```text
//!     f(a) = clamp( sum_i c_i (a_i - t_i) + a0_min, a0_min, a0_max ),
//! ```
//!
//! whose rates c can be chosen from first-order data alone:
//!
//! ```text
//!     c_i = - (du_i/da_i) / (du_i/da_0)    at (a0_min, t),
//! ```
//!
//! with the a0-derivative taken from the right at the minimal intervention.
//! [`verify_prop4_conditions`] checks, per user and per rate-sign case, the
//! second-order inequalities under which that ramp makes the target a global
//! best response: concavity where the ramp is pegged at the minimal action, a
//! composite curvature bound along the active ramp, and a payoff-slope sign
//! where it saturates at the maximal action. Margins are reported so callers
//! can distinguish strict from borderline passes.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::{
    ActionProfile, ActionSpace, InterventionBounds, InterventionGame, InterventionMechanism,
    MechanismKind, Player, MEMBERSHIP_TOL,
};
use crate::numerics::{partial_derivative, second_partial, FdSpec};

/// Condition margins below the negative of this tolerance count as failures;
/// margins within it count as non-strict passes (finite-difference noise
/// floor).
pub const MARGIN_TOL: f64 = 1e-8;
/// Smallest admissible magnitude of the intervention-direction derivative in
/// the rate formula's denominator.
pub const RATE_DENOM_MIN: f64 = 1e-9;
/// Default number of midpoint samples per open condition interval.
pub const DEFAULT_CONDITION_SAMPLES: usize = 64;

// ---------------------------------------------------------------------------
// constructors
// ---------------------------------------------------------------------------

/// Mechanism that answers every signal with the same scalar action.
pub fn constant(a0: f64, bounds: &InterventionBounds) -> Result<InterventionMechanism> {
    constant_vector(vec![a0], bounds)
}

/// Vector-action constant mechanism.
pub fn constant_vector(action: Vec<f64>, bounds: &InterventionBounds) -> Result<InterventionMechanism> {
    if action.len() != bounds.dim() {
        return Err(Error::Precondition(format!(
            "constant action has {} components, bounds have {}",
            action.len(),
            bounds.dim()
        )));
    }
    for (k, (&x, (&lo, &hi))) in action
        .iter()
        .zip(bounds.minimal().iter().zip(bounds.maximal()))
        .enumerate()
    {
        if !x.is_finite() || x < lo - MEMBERSHIP_TOL || x > hi + MEMBERSHIP_TOL {
            return Err(Error::Precondition(format!(
                "constant action component {k} = {x} lies outside the intervention range [{lo}, {hi}]"
            )));
        }
    }
    Ok(InterventionMechanism::from_kind(MechanismKind::Constant { action }))
}

/// Mechanism playing the minimal intervention exactly on `target`
/// (coordinate-wise within 1e-12) and the maximal intervention otherwise.
pub fn max_punishment(
    target: ActionProfile,
    bounds: &InterventionBounds,
) -> Result<InterventionMechanism> {
    if target.is_empty() {
        return Err(Error::Precondition("target profile is empty".into()));
    }
    Ok(InterventionMechanism::from_kind(MechanismKind::MaxPunishment {
        target,
        minimal: bounds.minimal().to_vec(),
        maximal: bounds.maximal().to_vec(),
    }))
}

/// Affine mechanism with the given target and intervention rates; the
/// intervention grows at rate `rates[i]` in user i's deviation and is clamped
/// to the (scalar) intervention interval. At the target it returns exactly
/// the minimal intervention.
pub fn affine(
    target: ActionProfile,
    rates: Vec<f64>,
    bounds: &InterventionBounds,
) -> Result<InterventionMechanism> {
    if bounds.dim() != 1 {
        return Err(Error::Precondition(
            "affine mechanisms need a scalar intervention action".into(),
        ));
    }
    if rates.len() != target.len() || target.is_empty() {
        return Err(Error::Precondition(format!(
            "{} rates for a {}-coordinate target",
            rates.len(),
            target.len()
        )));
    }
    if rates.iter().any(|c| !c.is_finite()) {
        return Err(Error::Precondition("intervention rates must be finite".into()));
    }
    Ok(InterventionMechanism::from_kind(MechanismKind::Affine {
        target,
        rates,
        lo: bounds.minimal_scalar(),
        hi: bounds.maximal_scalar(),
    }))
}

/// Mechanism given by an explicit per-signal table of intervention actions.
pub fn tabulated(table: Vec<Vec<f64>>) -> Result<InterventionMechanism> {
    if table.is_empty() {
        return Err(Error::Precondition("tabulated mechanism has no rows".into()));
    }
    let dim = table[0].len();
    for (m, row) in table.iter().enumerate() {
        if row.len() != dim || dim == 0 {
            return Err(Error::Precondition(format!(
                "tabulated row {m} has {} components, expected {dim}",
                row.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition(format!(
                "tabulated row {m} holds a non-finite action"
            )));
        }
    }
    Ok(InterventionMechanism::from_kind(MechanismKind::Tabulated { table }))
}

/// Scalar-action convenience form of [`tabulated`].
pub fn tabulated_scalar(values: Vec<f64>) -> Result<InterventionMechanism> {
    tabulated(values.into_iter().map(|v| vec![v]).collect())
}

/// Mechanism defined by an arbitrary deterministic reaction rule on observed
/// profiles, e.g. a usage-based payment schedule.
pub fn closed_form(
    label: impl Into<String>,
    rule: impl Fn(&ActionProfile) -> Vec<f64> + Send + Sync + 'static,
) -> InterventionMechanism {
    InterventionMechanism::from_kind(MechanismKind::ClosedForm {
        label: label.into(),
        rule: std::sync::Arc::new(rule),
    })
}

// ---------------------------------------------------------------------------
// rate design
// ---------------------------------------------------------------------------

/// Intervention rates that flatten each user's first-order deviation gain at
/// `target`: `c_i = -(du_i/da_i)/(du_i/da_0)`, both partials taken at the
/// minimal intervention and the target profile (the a0-partial from the
/// right). Uses analytic partials when the oracle declares them, otherwise
/// boundary-aware finite differences.
pub fn compute_affine_rates(game: &InterventionGame, target: &ActionProfile) -> Result<Vec<f64>> {
    game.validate_profile(target)?;
    require_interior_interval_target(game, target)?;
    let joint_bounds = game.joint_bounds()?;
    let m_lo = game.bounds().minimal_scalar();
    let spec = FdSpec::default();
    let mut rates = Vec::with_capacity(game.num_users());
    for i in 0..game.num_users() {
        let oracle = game.oracle(Player::User(i));
        let point = joint_point(m_lo, target, i, target.get(i));
        let numerator = match oracle.user_partial(&[m_lo], target.as_slice(), i) {
            Some(p) => p,
            None => {
                let f = game.joint_user_fn(i);
                partial_derivative(&f, &point, 1 + i, &joint_bounds, spec)?
            }
        };
        let denominator = match oracle.manager_partial(&[m_lo], target.as_slice(), 0) {
            Some(p) => p,
            None => {
                let f = game.joint_user_fn(i);
                partial_derivative(&f, &point, 0, &joint_bounds, spec)?
            }
        };
        if !numerator.is_finite() || !denominator.is_finite() {
            return Err(Error::NonFinite {
                context: format!("rate partials of user {}", i + 1),
                point,
            });
        }
        if denominator.abs() < RATE_DENOM_MIN {
            return Err(Error::SingularRate {
                user: i + 1,
                magnitude: denominator.abs(),
                floor: RATE_DENOM_MIN,
            });
        }
        if denominator > 0.0 {
            return Err(Error::Precondition(format!(
                "user {}'s utility increases in the intervention level at the target \
                 (du/da0 = {denominator:.6e}); rate design assumes it decreases",
                i + 1
            )));
        }
        rates.push(-numerator / denominator);
    }
    Ok(rates)
}

fn require_interior_interval_target(game: &InterventionGame, target: &ActionProfile) -> Result<()> {
    for i in 0..game.num_users() {
        let ActionSpace::Interval { lo, hi } = game.user_space(i) else {
            return Err(Error::Precondition(format!(
                "user {}'s action space is finite; affine design needs interval spaces",
                i + 1
            )));
        };
        let t = target.get(i);
        if !(t > *lo && t < *hi) {
            return Err(Error::Precondition(format!(
                "target coordinate {} = {t} must lie strictly inside [{lo}, {hi}]",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Joint vector `[a0, a_1, ..., a_N]` with user `user`'s coordinate replaced.
fn joint_point(a0: f64, target: &ActionProfile, user: usize, ai: f64) -> Vec<f64> {
    let mut x = Vec::with_capacity(1 + target.len());
    x.push(a0);
    x.extend_from_slice(target.as_slice());
    x[1 + user] = ai;
    x
}

// ---------------------------------------------------------------------------
// second-order condition verification
// ---------------------------------------------------------------------------

/// Sign case of an intervention rate, selecting which conditions apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateSign {
    Zero,
    Positive,
    Negative,
}

impl RateSign {
    #[must_use]
    pub fn of(rate: f64) -> Self {
        if rate == 0.0 {
            RateSign::Zero
        } else if rate > 0.0 {
            RateSign::Positive
        } else {
            RateSign::Negative
        }
    }
}

/// The individual inequalities checked by [`verify_prop4_conditions`], named
/// by what they require of the user's payoff slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    /// Zero rate: concavity in the own action under minimal intervention,
    /// over the whole action interval.
    MinActionConcavity,
    /// Positive rate: concavity under minimal intervention below the target.
    MinActionConcavityBelowTarget,
    /// Positive rate: nonpositive composite second derivative along the
    /// active ramp above the target.
    RampCurvature,
    /// Positive rate: nonpositive payoff slope under maximal intervention
    /// beyond the ramp's saturation point.
    MaxActionSlopeBeyondRamp,
    /// Negative rate: nonnegative payoff slope under maximal intervention
    /// below the ramp's saturation point.
    MaxActionSlopeBelowRamp,
    /// Negative rate: the ramp-curvature bound on the negative side, on its
    /// stated interval (empty in every game with target below the action
    /// ceiling, hence recorded as vacuous).
    RampCurvatureNegativeSide,
    /// Negative rate: concavity under minimal intervention above the target.
    MinActionConcavityAboveTarget,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionKind::MinActionConcavity => "concavity at minimal intervention",
            ConditionKind::MinActionConcavityBelowTarget => {
                "concavity at minimal intervention below target"
            }
            ConditionKind::RampCurvature => "curvature along the intervention ramp",
            ConditionKind::MaxActionSlopeBeyondRamp => {
                "payoff slope at maximal intervention beyond the ramp"
            }
            ConditionKind::MaxActionSlopeBelowRamp => {
                "payoff slope at maximal intervention below the ramp"
            }
            ConditionKind::RampCurvatureNegativeSide => {
                "curvature along the intervention ramp (negative side)"
            }
            ConditionKind::MinActionConcavityAboveTarget => {
                "concavity at minimal intervention above target"
            }
        };
        f.write_str(s)
    }
}

/// Verdict for one condition on one open interval. The margin is the amount
/// by which the inequality holds: nonnegative means satisfied, and values in
/// `[-MARGIN_TOL, MARGIN_TOL]` are treated as borderline (pass, not strict).
#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub condition: ConditionKind,
    /// Interval as stated; `interval.0 >= interval.1` encodes the empty set.
    pub interval: (f64, f64),
    pub vacuous: bool,
    /// Worst (smallest) margin over the sampled points; +inf when vacuous.
    pub worst_margin: f64,
    /// Sample point attaining the worst margin.
    pub witness: Option<f64>,
    pub passed: bool,
    pub strict: bool,
}

/// Per-user condition verdicts.
#[derive(Clone, Debug)]
pub struct UserConditionReport {
    /// User index, 0-based.
    pub user: usize,
    pub rate: f64,
    pub sign: RateSign,
    pub checks: Vec<ConditionCheck>,
    pub passed: bool,
    pub strict: bool,
}

/// Outcome of [`verify_prop4_conditions`]: if every applicable condition
/// passes, the affine mechanism with these rates makes the target a best
/// response for every user; if additionally all conditions are strict, the
/// best response is unique.
#[derive(Clone, Debug)]
pub struct Prop4Report {
    pub target: ActionProfile,
    pub users: Vec<UserConditionReport>,
    pub passed: bool,
    pub all_strict: bool,
    pub samples_per_interval: usize,
}

impl fmt::Display for Prop4Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "affine support conditions at {}: {}{}",
            self.target,
            if self.passed { "pass" } else { "FAIL" },
            if self.passed && self.all_strict { " (strict)" } else { "" }
        )?;
        for user in &self.users {
            writeln!(
                f,
                "  user {}: rate {:.6} ({:?})",
                user.user + 1,
                user.rate,
                user.sign
            )?;
            for check in &user.checks {
                if check.vacuous {
                    writeln!(
                        f,
                        "    {}: vacuous on ({}, {})",
                        check.condition, check.interval.0, check.interval.1
                    )?;
                } else {
                    writeln!(
                        f,
                        "    {}: {} on ({}, {}), worst margin {:.3e} at {}",
                        check.condition,
                        if check.passed {
                            if check.strict { "strict pass" } else { "pass" }
                        } else {
                            "FAIL"
                        },
                        check.interval.0,
                        check.interval.1,
                        check.worst_margin,
                        check.witness.unwrap_or(f64::NAN),
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Checks the sufficient second-order conditions for the affine mechanism
/// `affine(target, rates)` to support `target`, sampling each stated open
/// interval at [`DEFAULT_CONDITION_SAMPLES`] midpoints.
pub fn verify_prop4_conditions(
    game: &InterventionGame,
    target: &ActionProfile,
    rates: &[f64],
) -> Result<Prop4Report> {
    verify_prop4_conditions_with_samples(game, target, rates, DEFAULT_CONDITION_SAMPLES)
}

/// As [`verify_prop4_conditions`] with a caller-chosen sampling density.
pub fn verify_prop4_conditions_with_samples(
    game: &InterventionGame,
    target: &ActionProfile,
    rates: &[f64],
    samples: usize,
) -> Result<Prop4Report> {
    game.validate_profile(target)?;
    require_interior_interval_target(game, target)?;
    if rates.len() != game.num_users() {
        return Err(Error::Precondition(format!(
            "{} rates for {} users",
            rates.len(),
            game.num_users()
        )));
    }
    if samples == 0 {
        return Err(Error::Precondition("condition sampling needs at least one point".into()));
    }
    let joint_bounds = game.joint_bounds()?;
    let m_lo = game.bounds().minimal_scalar();
    let m_hi = game.bounds().maximal_scalar();
    let width = m_hi - m_lo;
    let mut users = Vec::with_capacity(game.num_users());
    for (i, &c) in rates.iter().enumerate() {
        let derivs = SliceDerivatives {
            game,
            user: i,
            target,
            joint_bounds: &joint_bounds,
            spec: FdSpec::default(),
        };
        let (u_lo, u_hi) = game.user_space(i).hull();
        let t = target.get(i);
        let sign = RateSign::of(c);
        let checks = match sign {
            RateSign::Zero => vec![sample_condition(
                ConditionKind::MinActionConcavity,
                (u_lo, u_hi),
                samples,
                |ai| Ok(-derivs.own_second(m_lo, ai)?),
            )?],
            RateSign::Positive => {
                let ramp_end = t + width / c;
                vec![
                    sample_condition(
                        ConditionKind::MinActionConcavityBelowTarget,
                        (u_lo, t),
                        samples,
                        |ai| Ok(-derivs.own_second(m_lo, ai)?),
                    )?,
                    sample_condition(
                        ConditionKind::RampCurvature,
                        (t, u_hi.min(ramp_end)),
                        samples,
                        |ai| {
                            let a0 = m_lo + c * (ai - t);
                            Ok(-derivs.ramp_composite(c, a0, ai)?)
                        },
                    )?,
                    sample_condition(
                        ConditionKind::MaxActionSlopeBeyondRamp,
                        (ramp_end, u_hi),
                        samples,
                        |ai| Ok(-derivs.own_slope(m_hi, ai)?),
                    )?,
                ]
            }
            RateSign::Negative => {
                let ramp_end = t + width / c;
                vec![
                    sample_condition(
                        ConditionKind::MaxActionSlopeBelowRamp,
                        (u_lo, ramp_end),
                        samples,
                        |ai| derivs.own_slope(m_hi, ai),
                    )?,
                    sample_condition(
                        ConditionKind::RampCurvatureNegativeSide,
                        (u_hi.max(ramp_end), t),
                        samples,
                        |ai| {
                            let a0 = crate::numerics::clamp(m_lo + c * (ai - t), m_lo, m_hi);
                            Ok(-derivs.ramp_composite(c, a0, ai)?)
                        },
                    )?,
                    sample_condition(
                        ConditionKind::MinActionConcavityAboveTarget,
                        (t, u_hi),
                        samples,
                        |ai| Ok(-derivs.own_second(m_lo, ai)?),
                    )?,
                ]
            }
        };
        let passed = checks.iter().all(|ch| ch.passed);
        let strict = checks.iter().all(|ch| ch.strict);
        users.push(UserConditionReport {
            user: i,
            rate: c,
            sign,
            checks,
            passed,
            strict,
        });
    }
    let passed = users.iter().all(|u| u.passed);
    let all_strict = users.iter().all(|u| u.strict);
    Ok(Prop4Report {
        target: target.clone(),
        users,
        passed,
        all_strict,
        samples_per_interval: samples,
    })
}

/// Evaluates `margin_at` on `samples` interior midpoints of the open
/// interval; the condition holds where the margin is nonnegative.
fn sample_condition(
    condition: ConditionKind,
    interval: (f64, f64),
    samples: usize,
    margin_at: impl Fn(f64) -> Result<f64>,
) -> Result<ConditionCheck> {
    let (lo, hi) = interval;
    if lo >= hi {
        return Ok(ConditionCheck {
            condition,
            interval,
            vacuous: true,
            worst_margin: f64::INFINITY,
            witness: None,
            passed: true,
            strict: true,
        });
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for k in 0..samples {
        let x = lo + (k as f64 + 0.5) * (hi - lo) / samples as f64;
        let margin = margin_at(x)?;
        if !margin.is_finite() {
            return Err(Error::NonFinite {
                context: format!("{condition} margin"),
                point: vec![x],
            });
        }
        if margin < worst {
            worst = margin;
            witness = Some(x);
        }
    }
    Ok(ConditionCheck {
        condition,
        interval,
        vacuous: false,
        worst_margin: worst,
        witness,
        passed: worst >= -MARGIN_TOL,
        strict: worst > MARGIN_TOL,
    })
}

/// Derivatives of one user's payoff along the slice where every other user
/// sits at the target. Prefers differentiating declared analytic first
/// partials; falls back to nested finite differences of the raw oracle.
struct SliceDerivatives<'g> {
    game: &'g InterventionGame,
    user: usize,
    target: &'g ActionProfile,
    joint_bounds: &'g [(f64, f64)],
    spec: FdSpec,
}

impl SliceDerivatives<'_> {
    fn oracle(&self) -> &crate::game::UtilityOracle {
        self.game.oracle(Player::User(self.user))
    }

    fn point(&self, a0: f64, ai: f64) -> Vec<f64> {
        joint_point(a0, self.target, self.user, ai)
    }

    /// du_i/da_i at (a0, ai).
    fn own_slope(&self, a0: f64, ai: f64) -> Result<f64> {
        let point = self.point(a0, ai);
        if let Some(p) = self.oracle().user_partial(&point[..1], &point[1..], self.user) {
            return Ok(p);
        }
        let f = self.game.joint_user_fn(self.user);
        partial_derivative(&f, &point, 1 + self.user, self.joint_bounds, self.spec)
    }

    /// d2u_i/da_i^2 at (a0, ai).
    fn own_second(&self, a0: f64, ai: f64) -> Result<f64> {
        let user = self.user;
        let oracle = self.oracle().clone();
        if oracle.has_user_partial() {
            let g = move |x: &[f64]| {
                oracle
                    .user_partial(&x[..1], &x[1..], user)
                    .expect("declared analytic partial")
            };
            return partial_derivative(&g, &self.point(a0, ai), 1 + user, self.joint_bounds, self.spec);
        }
        let f = self.game.joint_user_fn(user);
        second_partial(&f, &self.point(a0, ai), 1 + user, 1 + user, self.joint_bounds, self.spec)
    }

    /// d2u_i/da_0^2 at (a0, ai).
    fn intervention_second(&self, a0: f64, ai: f64) -> Result<f64> {
        let oracle = self.oracle().clone();
        if oracle.has_manager_partial() {
            let g = move |x: &[f64]| {
                oracle
                    .manager_partial(&x[..1], &x[1..], 0)
                    .expect("declared analytic partial")
            };
            return partial_derivative(&g, &self.point(a0, ai), 0, self.joint_bounds, self.spec);
        }
        let f = self.game.joint_user_fn(self.user);
        second_partial(&f, &self.point(a0, ai), 0, 0, self.joint_bounds, self.spec)
    }

    /// d2u_i/da_i da_0 at (a0, ai).
    fn mixed_second(&self, a0: f64, ai: f64) -> Result<f64> {
        let user = self.user;
        let oracle = self.oracle().clone();
        if oracle.has_manager_partial() {
            let g = move |x: &[f64]| {
                oracle
                    .manager_partial(&x[..1], &x[1..], 0)
                    .expect("declared analytic partial")
            };
            return partial_derivative(&g, &self.point(a0, ai), 1 + user, self.joint_bounds, self.spec);
        }
        let f = self.game.joint_user_fn(user);
        second_partial(&f, &self.point(a0, ai), 1 + user, 0, self.joint_bounds, self.spec)
    }

    /// Second derivative of the payoff along the ramp a0 = c (a_i - t) + a0_min:
    /// `c^2 u_00 + 2c u_i0 + u_ii` at (a0, ai).
    fn ramp_composite(&self, c: f64, a0: f64, ai: f64) -> Result<f64> {
        Ok(c * c * self.intervention_second(a0, ai)?
            + 2.0 * c * self.mixed_second(a0, ai)?
            + self.own_second(a0, ai)?)
    }
}

// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{
        ActionSpace, InterventionBounds, InterventionGame, ManagerActionSpace,
        MonitoringTechnology, UtilityOracle,
    };
    use proptest::prelude::*;

    fn unit_bounds() -> InterventionBounds {
        InterventionBounds::scalar(0.0, 1.0).unwrap()
    }

    fn p(vals: &[f64]) -> ActionProfile {
        ActionProfile::from(vals)
    }

    /// Two-user contention game u_i = g_i a_i (1 - a_j) (1 - a0), optionally
    /// with analytic partials declared.
    fn contention(gamma: [f64; 2], analytic: bool) -> InterventionGame {
        let user = |i: usize, g: f64| {
            let base = UtilityOracle::new(format!("contention u{}", i + 1), move |a0: &[f64], a: &[f64]| {
                g * a[i] * (1.0 - a[1 - i]) * (1.0 - a0[0])
            });
            if !analytic {
                return base;
            }
            base.with_user_partial(move |a0: &[f64], a: &[f64], j: usize| {
                let other = 1.0 - a[1 - i];
                let free = 1.0 - a0[0];
                if j == i {
                    g * other * free
                } else {
                    -g * a[i] * free
                }
            })
            .with_manager_partial(move |_a0: &[f64], a: &[f64], _k: usize| {
                -g * a[i] * (1.0 - a[1 - i])
            })
        };
        let [g1, g2] = gamma;
        let manager = UtilityOracle::new("welfare", move |a0: &[f64], a: &[f64]| {
            g1 * a[0] * (1.0 - a[1]) * (1.0 - a0[0]) + g2 * a[1] * (1.0 - a[0]) * (1.0 - a0[0])
        });
        InterventionGame::new(
            vec![
                ActionSpace::interval(0.0, 1.0).unwrap(),
                ActionSpace::interval(0.0, 1.0).unwrap(),
            ],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![user(0, g1), user(1, g2)],
            manager,
            MonitoringTechnology::Perfect,
            unit_bounds(),
        )
        .unwrap()
    }

    /// Single-user game u_1 = shape(a_1) - a0 over [0,1] actions.
    fn scalar_game(shape: impl Fn(f64) -> f64 + Send + Sync + Copy + 'static) -> InterventionGame {
        let user = UtilityOracle::new("shape - a0", move |a0: &[f64], a: &[f64]| shape(a[0]) - a0[0]);
        let manager = UtilityOracle::new("welfare", move |a0: &[f64], a: &[f64]| shape(a[0]) - a0[0]);
        InterventionGame::new(
            vec![ActionSpace::interval(0.0, 1.0).unwrap()],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![user],
            manager,
            MonitoringTechnology::Perfect,
            unit_bounds(),
        )
        .unwrap()
    }

    #[test]
    fn affine_response_hand_values() {
        let game = contention([1.0, 1.0], false);
        let f = affine(p(&[0.5, 0.5]), vec![2.0, 2.0], game.bounds()).unwrap();
        let at = |a: &[f64]| f.respond(&game, &p(a)).unwrap()[0];
        assert!((at(&[0.6, 0.5]) - 0.2).abs() < 1e-12, "got {}", at(&[0.6, 0.5]));
        assert_eq!(at(&[0.5, 0.5]), 0.0, "target must map to the minimal action exactly");
        assert_eq!(at(&[1.0, 1.0]), 1.0, "large deviations clamp to the maximal action");
        assert_eq!(at(&[0.25, 0.5]), 0.0, "downward deviations clamp to the minimal action");
    }

    #[test]
    fn constant_rejects_out_of_range_actions() {
        let err = constant(1.5, &unit_bounds()).unwrap_err();
        assert!(err.to_string().contains("outside the intervention range"), "{err}");
        assert!(constant(0.5, &unit_bounds()).is_ok());
    }

    #[test]
    fn tabulated_rejects_ragged_tables() {
        assert!(tabulated(vec![]).is_err(), "empty tables must be rejected");
        let err = tabulated(vec![vec![0.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn affine_needs_scalar_bounds_and_matching_rates() {
        let vector = InterventionBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(affine(p(&[0.5, 0.5]), vec![1.0, 1.0], &vector).is_err());
        assert!(affine(p(&[0.5, 0.5]), vec![1.0], &unit_bounds()).is_err());
    }

    #[test]
    fn rates_on_contention_game_scale_inversely_with_target() {
        for analytic in [false, true] {
            let game = contention([1.0, 1.0], analytic);
            let rates = compute_affine_rates(&game, &p(&[0.5, 0.5])).unwrap();
            assert!((rates[0] - 2.0).abs() < 1e-6, "analytic {analytic}: {rates:?}");
            assert!((rates[1] - 2.0).abs() < 1e-6, "analytic {analytic}: {rates:?}");
            let rates = compute_affine_rates(&game, &p(&[0.25, 0.8])).unwrap();
            assert!((rates[0] - 4.0).abs() < 1e-6, "analytic {analytic}: {rates:?}");
            assert!((rates[1] - 1.25).abs() < 1e-6, "analytic {analytic}: {rates:?}");
        }
    }

    #[test]
    fn rates_ignore_peak_rate_scaling() {
        let game = compute_affine_rates(&contention([2.0, 0.5], false), &p(&[0.5, 0.5])).unwrap();
        assert!((game[0] - 2.0).abs() < 1e-6 && (game[1] - 2.0).abs() < 1e-6, "{game:?}");
    }

    #[test]
    fn rates_ignore_monotone_payoff_rescaling() {
        // cubing the payoff leaves the slope ratio unchanged
        let user = |i: usize| {
            UtilityOracle::new("cubed", move |a0: &[f64], a: &[f64]| {
                let r = a[i] * (1.0 - a[1 - i]) * (1.0 - a0[0]);
                r * r * r
            })
        };
        let game = InterventionGame::new(
            vec![
                ActionSpace::interval(0.0, 1.0).unwrap(),
                ActionSpace::interval(0.0, 1.0).unwrap(),
            ],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![user(0), user(1)],
            UtilityOracle::new("welfare", |_, _| 0.0),
            MonitoringTechnology::Perfect,
            unit_bounds(),
        )
        .unwrap();
        let rates = compute_affine_rates(&game, &p(&[0.5, 0.5])).unwrap();
        assert!((rates[0] - 2.0).abs() < 1e-6, "{rates:?}");
        assert!((rates[1] - 2.0).abs() < 1e-6, "{rates:?}");
    }

    #[test]
    fn rate_design_reports_vanishing_intervention_leverage() {
        // the user's payoff ignores the intervention entirely
        let user = UtilityOracle::new("no leverage", |_a0: &[f64], a: &[f64]| a[0]);
        let game = InterventionGame::new(
            vec![ActionSpace::interval(0.0, 1.0).unwrap()],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![user],
            UtilityOracle::new("welfare", |_, a: &[f64]| a[0]),
            MonitoringTechnology::Perfect,
            unit_bounds(),
        )
        .unwrap();
        match compute_affine_rates(&game, &p(&[0.5])).unwrap_err() {
            Error::SingularRate { user, magnitude, floor } => {
                assert_eq!(user, 1);
                assert!(magnitude < floor);
            }
            other => panic!("expected a singular-rate error, got {other}"),
        }
    }

    #[test]
    fn rate_design_rejects_boundary_targets() {
        let game = contention([1.0, 1.0], false);
        let err = compute_affine_rates(&game, &p(&[0.0, 0.5])).unwrap_err();
        assert!(err.to_string().contains("strictly inside"), "{err}");
    }

    #[test]
    fn rate_design_rejects_utilities_increasing_in_intervention() {
        let user = UtilityOracle::new("likes intervention", |a0: &[f64], a: &[f64]| a[0] + a0[0]);
        let game = InterventionGame::new(
            vec![ActionSpace::interval(0.0, 1.0).unwrap()],
            ManagerActionSpace::Scalar(ActionSpace::interval(0.0, 1.0).unwrap()),
            vec![user],
            UtilityOracle::new("welfare", |_, _| 0.0),
            MonitoringTechnology::Perfect,
            unit_bounds(),
        )
        .unwrap();
        let err = compute_affine_rates(&game, &p(&[0.5])).unwrap_err();
        assert!(err.to_string().contains("increases in the intervention"), "{err}");
    }

    #[test]
    fn conditions_pass_on_the_contention_game_with_a_borderline_margin() {
        for analytic in [false, true] {
            let game = contention([1.0, 1.0], analytic);
            let report = verify_prop4_conditions(&game, &p(&[0.5, 0.5]), &[2.0, 2.0]).unwrap();
            assert!(report.passed, "analytic {analytic}:\n{report}");
            // payoff is linear in the own action at minimal intervention, so
            // the below-target concavity margin is exactly borderline
            assert!(
                !report.all_strict,
                "analytic {analytic}: linear slices cannot be strictly concave\n{report}"
            );
            for user in &report.users {
                assert_eq!(user.sign, RateSign::Positive);
                assert_eq!(user.checks.len(), 3);
                let below = &user.checks[0];
                assert_eq!(below.condition, ConditionKind::MinActionConcavityBelowTarget);
                assert!(below.passed && !below.strict, "margin {}", below.worst_margin);
                assert!(below.worst_margin.abs() <= MARGIN_TOL);
                let ramp = &user.checks[1];
                assert_eq!(ramp.condition, ConditionKind::RampCurvature);
                assert!(
                    (ramp.worst_margin - 2.0).abs() < 1e-4,
                    "ramp composite should be -2, margin {}",
                    ramp.worst_margin
                );
                assert!(ramp.strict);
                let beyond = &user.checks[2];
                assert_eq!(beyond.condition, ConditionKind::MaxActionSlopeBeyondRamp);
                assert!(beyond.vacuous, "ramp saturates exactly at the action ceiling");
                assert_eq!(beyond.interval, (1.0, 1.0));
            }
        }
    }

    #[test]
    fn convex_payoffs_fail_the_zero_rate_concavity_condition() {
        let game = scalar_game(|a1| (a1 - 0.5) * (a1 - 0.5));
        let rates = compute_affine_rates(&game, &p(&[0.5])).unwrap();
        assert!(rates[0].abs() < 1e-6, "flat slope at the bowl bottom, got {rates:?}");
        let report = verify_prop4_conditions(&game, &p(&[0.5]), &[0.0]).unwrap();
        assert!(!report.passed);
        let check = &report.users[0].checks[0];
        assert_eq!(check.condition, ConditionKind::MinActionConcavity);
        assert!(
            (check.worst_margin + 2.0).abs() < 1e-4,
            "second derivative is 2, margin {}",
            check.worst_margin
        );
        let w = check.witness.expect("failing checks carry a witness");
        assert!(w > 0.0 && w < 1.0);
    }

    #[test]
    fn convex_payoffs_fail_the_below_target_condition_for_positive_rates() {
        let game = scalar_game(|a1| (a1 - 0.5) * (a1 - 0.5));
        let report = verify_prop4_conditions(&game, &p(&[0.5]), &[1.0]).unwrap();
        assert!(!report.passed);
        let below = &report.users[0].checks[0];
        assert_eq!(below.condition, ConditionKind::MinActionConcavityBelowTarget);
        assert!(!below.passed);
    }

    #[test]
    fn negative_rates_check_the_stated_intervals_as_printed() {
        // concave bump peaking left of the target makes the slope at the
        // target negative, hence a negative rate
        let game = scalar_game(|a1| -(a1 - 0.3) * (a1 - 0.3));
        let target = p(&[0.6]);
        let rates = compute_affine_rates(&game, &target).unwrap();
        assert!(rates[0] < 0.0, "{rates:?}");
        let report = verify_prop4_conditions(&game, &target, &rates).unwrap();
        assert!(report.passed, "{report}");
        assert!(report.all_strict, "the only sampled condition is strictly concave");
        let checks = &report.users[0].checks;
        assert_eq!(checks[0].condition, ConditionKind::MaxActionSlopeBelowRamp);
        assert!(checks[0].vacuous, "ramp saturation point lies below the action floor");
        assert_eq!(checks[1].condition, ConditionKind::RampCurvatureNegativeSide);
        assert!(checks[1].vacuous, "stated interval is empty by construction");
        assert!(
            checks[1].interval.0 >= checks[1].interval.1,
            "interval as stated: ({}, {})",
            checks[1].interval.0,
            checks[1].interval.1
        );
        assert_eq!(checks[2].condition, ConditionKind::MinActionConcavityAboveTarget);
        assert!(checks[2].strict);
    }

    #[test]
    fn zero_slope_targets_reduce_to_concavity_checks() {
        let game = scalar_game(|a1| -(a1 - 0.5) * (a1 - 0.5));
        let rates = compute_affine_rates(&game, &p(&[0.5])).unwrap();
        assert!(rates[0].abs() < 1e-6, "{rates:?}");
        let report = verify_prop4_conditions(&game, &p(&[0.5]), &[0.0]).unwrap();
        assert!(report.passed && report.all_strict, "{report}");
        assert_eq!(report.users[0].checks.len(), 1);
    }

    #[test]
    fn sampling_density_is_configurable() {
        let game = contention([1.0, 1.0], false);
        let coarse =
            verify_prop4_conditions_with_samples(&game, &p(&[0.5, 0.5]), &[2.0, 2.0], 8).unwrap();
        assert_eq!(coarse.samples_per_interval, 8);
        assert!(coarse.passed);
    }

    #[test]
    fn max_punishment_output_is_two_valued() {
        let game = contention([1.0, 1.0], false);
        let f = max_punishment(p(&[0.5, 0.5]), game.bounds()).unwrap();
        for a in [[0.5, 0.5], [0.5, 0.500000001], [0.0, 1.0], [0.25, 0.75]] {
            let out = f.respond(&game, &p(&a)).unwrap();
            assert!(out == vec![0.0] || out == vec![1.0], "unexpected action {out:?}");
        }
        assert_eq!(f.respond(&game, &p(&[0.5, 0.5])).unwrap(), vec![0.0]);
        assert_eq!(f.respond(&game, &p(&[0.5, 0.6])).unwrap(), vec![1.0]);
    }

    proptest! {
        #[test]
        fn affine_response_is_lipschitz_and_anchored(
            t1 in 0.05f64..0.95, t2 in 0.05f64..0.95,
            c1 in -3.0f64..3.0, c2 in -3.0f64..3.0,
            x1 in 0.0f64..1.0, x2 in 0.0f64..1.0,
            y1 in 0.0f64..1.0, y2 in 0.0f64..1.0,
        ) {
            let game = contention([1.0, 1.0], false);
            let f = affine(p(&[t1, t2]), vec![c1, c2], game.bounds()).unwrap();
            let fx = f.respond(&game, &p(&[x1, x2])).unwrap()[0];
            let fy = f.respond(&game, &p(&[y1, y2])).unwrap()[0];
            let bound = c1.abs() * (x1 - y1).abs() + c2.abs() * (x2 - y2).abs();
            prop_assert!((fx - fy).abs() <= bound + 1e-12);
            let ft = f.respond(&game, &p(&[t1, t2])).unwrap()[0];
            prop_assert_eq!(ft, 0.0, "exactly minimal at the target");
        }

        #[test]
        fn condition_sets_match_the_rate_sign(
            t1 in 0.1f64..0.9, t2 in 0.1f64..0.9,
            c1 in -2.0f64..2.0, c2 in -2.0f64..2.0,
        ) {
            let game = contention([1.0, 1.0], true);
            let report = verify_prop4_conditions_with_samples(
                &game, &p(&[t1, t2]), &[c1, c2], 8,
            ).unwrap();
            for (user, &c) in report.users.iter().zip(&[c1, c2]) {
                let expected: &[ConditionKind] = match RateSign::of(c) {
                    RateSign::Zero => &[ConditionKind::MinActionConcavity],
                    RateSign::Positive => &[
                        ConditionKind::MinActionConcavityBelowTarget,
                        ConditionKind::RampCurvature,
                        ConditionKind::MaxActionSlopeBeyondRamp,
                    ],
                    RateSign::Negative => &[
                        ConditionKind::MaxActionSlopeBelowRamp,
                        ConditionKind::RampCurvatureNegativeSide,
                        ConditionKind::MinActionConcavityAboveTarget,
                    ],
                };
                let kinds: Vec<_> = user.checks.iter().map(|ch| ch.condition).collect();
                prop_assert_eq!(&kinds[..], expected);
                for check in &user.checks {
                    if check.vacuous {
                        prop_assert!(check.passed && check.strict && check.witness.is_none());
                        prop_assert!(check.interval.0 >= check.interval.1);
                    } else {
                        prop_assert!(check.witness.is_some());
                    }
                }
            }
        }
    }
}
