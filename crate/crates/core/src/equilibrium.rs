//! Support verification, the supportable set, optimal intervention search,
//! and conservative mechanism choice.
//!
//! A mechanism f *supports* a profile a when a is a Nash equilibrium of the
//! induced game: no user can gain more than a tolerance by deviating
//! unilaterally, deviation payoffs being the expected utilities under f. It
//! *strongly supports* a when a is the only such profile. The *supportable
//! set* collects every profile some mechanism supports; it admits a direct
//! test that never constructs a mechanism at all:
//!
//! ```text
//!     a is supportable  <=>  for every user i:
//!         u_i(minimal, a)  >=  max over a_i' of u_i(maximal, a_i', a_-i),
//! ```
//!
//! because the harshest credible threat is to play minimally on the target
//! and maximally everywhere else, and under that threat the left side is what
//! compliance pays while the right side bounds any deviation. The optimal
//! intervention equilibrium therefore maximizes the manager's
//! minimal-intervention utility over the supportable set, and the returned
//! mechanism is exactly that maximum-punishment rule.
//!
//! All best responses here are grid best responses: verdicts are relative to
//! the declared [`GridSpec`] and every report carries it. Enumeration-heavy
//! operations take a profile cap so a misjudged resolution fails fast instead
//! of running for hours.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::{
    ActionProfile, ActionSpace, InterventionGame, InterventionMechanism, Player, MEMBERSHIP_TOL,
};
use crate::mechanisms;
use crate::numerics::{linspace, GridSpec};

/// Largest unilateral deviation gain compatible with a "supports" verdict.
pub const SUPPORT_EPSILON: f64 = 1e-9;
/// Margin by which the manager must prefer minimal intervention in
/// [`check_strict_preference`].
pub const STRICT_EPSILON: f64 = 1e-12;
/// Default ceiling on enumerated profiles for whole-grid scans.
pub const DEFAULT_PROFILE_CAP: u64 = 10_000_000;

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// One user's best grid deviation against a fixed profile.
#[derive(Clone, Debug)]
pub struct UserDeviation {
    /// User index, 0-based.
    pub user: usize,
    /// Expected payoff from playing the profile as given.
    pub on_profile: f64,
    /// Best deviating action found (equals the profile's own coordinate when
    /// no deviation improves on it).
    pub best_deviation: f64,
    /// Expected payoff at the best deviation.
    pub best_value: f64,
    /// `best_value - on_profile`; nonnegative since the search always
    /// includes the profile's own coordinate.
    pub gain: f64,
}

/// Outcome of [`supports`]: grid best-response audit of one profile under one
/// mechanism.
#[derive(Clone, Debug)]
pub struct SupportReport {
    pub supported: bool,
    pub profile: ActionProfile,
    pub deviations: Vec<UserDeviation>,
    /// Grid the verdict is relative to.
    pub grid: GridSpec,
}

impl SupportReport {
    /// Largest deviation gain across users.
    #[must_use]
    pub fn max_gain(&self) -> f64 {
        self.deviations.iter().map(|d| d.gain).fold(0.0, f64::max)
    }
}

impl fmt::Display for SupportReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "supports {}: {} (max gain {:.3e}, grid {} per axis)",
            self.profile,
            self.supported,
            self.max_gain(),
            self.grid.resolution
        )?;
        for d in &self.deviations {
            writeln!(
                f,
                "  user {}: on-profile {:.6}, best deviation {} -> {:.6}, gain {:.3e}",
                d.user + 1,
                d.on_profile,
                d.best_deviation,
                d.best_value,
                d.gain
            )?;
        }
        Ok(())
    }
}

/// Outcome of [`find_intervention_equilibrium`].
#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    /// Maximum-punishment mechanism on the winning profile.
    pub mechanism: InterventionMechanism,
    pub profile: ActionProfile,
    /// Manager's expected utility at the equilibrium (minimal intervention on
    /// the winning profile).
    pub manager_value: f64,
    /// Profiles examined across the initial scan and all refinement rounds.
    pub candidates_examined: u64,
    /// Support audit of the returned pair.
    pub verification: SupportReport,
}

/// Outcome of [`maximin_design`].
#[derive(Clone, Debug)]
pub struct MaximinResult {
    /// Index into the family of the worst-case-optimal mechanism (smallest
    /// index on ties).
    pub best_index: usize,
    /// Worst-case manager value of the winner; `None` when its induced game
    /// has no grid Nash profile at all.
    pub worst_value: Option<f64>,
    /// Worst-case value per family member, in family order; `None` marks
    /// members whose induced game has no grid Nash profile.
    pub per_mechanism: Vec<Option<f64>>,
}

// ---------------------------------------------------------------------------
// grid plumbing
// ---------------------------------------------------------------------------

/// Per-user search axes at the grid's resolution.
fn profile_axes(game: &InterventionGame, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    grid.validate()?;
    Ok(game
        .user_spaces()
        .iter()
        .map(|s| s.axis(grid.resolution))
        .collect())
}

fn profile_count(axes: &[Vec<f64>]) -> u128 {
    axes.iter().map(|a| a.len() as u128).product()
}

fn check_cap(axes: &[Vec<f64>], cap: u64) -> Result<()> {
    let profiles = profile_count(axes);
    if profiles > u128::from(cap) {
        return Err(Error::EnumerationCap { profiles, cap });
    }
    Ok(())
}

/// Visits every profile of the axes in row-major (lexicographic) order, last
/// user fastest. `visit` returns false to stop early.
fn enumerate_profiles(
    axes: &[Vec<f64>],
    mut visit: impl FnMut(&ActionProfile) -> Result<bool>,
) -> Result<()> {
    if axes.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let mut profile = ActionProfile::new(axes.iter().map(|ax| ax[0]).collect());
    loop {
        if !visit(&profile)? {
            return Ok(());
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                profile.set(k, axes[k][idx[k]]);
                break;
            }
            idx[k] = 0;
            profile.set(k, axes[k][0]);
        }
    }
}

/// Maximizes `f` over one user's action space, always evaluating `include`
/// first so it wins all ties; interval spaces get the grid's refinement
/// rounds around the incumbent.
fn best_deviation_1d(
    space: &ActionSpace,
    include: f64,
    grid: &GridSpec,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let mut best_x = include;
    let mut best_v = f(include)?;
    let mut scan = |xs: &[f64], best_x: &mut f64, best_v: &mut f64| -> Result<()> {
        for &x in xs {
            let v = f(x)?;
            if v > *best_v {
                *best_v = v;
                *best_x = x;
            }
        }
        Ok(())
    };
    match space {
        ActionSpace::Finite(values) => {
            scan(values, &mut best_x, &mut best_v)?;
        }
        ActionSpace::Interval { lo, hi } => {
            scan(&linspace(*lo, *hi, grid.resolution), &mut best_x, &mut best_v)?;
            let full = hi - lo;
            for round in 1..=grid.refinement_rounds {
                let half = 0.5 * full * grid.shrink.powi(round as i32);
                let w_lo = (best_x - half).max(*lo);
                let w_hi = (best_x + half).min(*hi);
                if w_lo >= w_hi {
                    break;
                }
                scan(&linspace(w_lo, w_hi, grid.resolution), &mut best_x, &mut best_v)?;
            }
        }
    }
    Ok((best_x, best_v))
}

// ---------------------------------------------------------------------------
// support
// ---------------------------------------------------------------------------

/// Checks whether `mechanism` supports `a`: for each user, maximizes the
/// induced payoff over that user's own action space (the search grid always
/// contains the profile's own coordinate) and compares with the on-profile
/// payoff. Supported iff every gain is at most [`SUPPORT_EPSILON`].
pub fn supports(
    game: &InterventionGame,
    mechanism: &InterventionMechanism,
    a: &ActionProfile,
    grid: &GridSpec,
) -> Result<SupportReport> {
    grid.validate()?;
    game.validate_profile(a)?;
    let induced = game.induced_game(mechanism)?;
    let mut deviations = Vec::with_capacity(game.num_users());
    for i in 0..game.num_users() {
        let on_profile = induced.payoff(i, a)?;
        let (best_deviation, best_value) =
            best_deviation_1d(game.user_space(i), a.get(i), grid, |x| {
                induced.payoff(i, &a.with_coordinate(i, x))
            })?;
        deviations.push(UserDeviation {
            user: i,
            on_profile,
            best_deviation,
            best_value,
            gain: best_value - on_profile,
        });
    }
    let supported = deviations.iter().all(|d| d.gain <= SUPPORT_EPSILON);
    Ok(SupportReport {
        supported,
        profile: a.clone(),
        deviations,
        grid: *grid,
    })
}

/// Checks whether `a` is supportable by *some* mechanism, via the
/// minimal/maximal intervention comparison: for each user, the payoff from
/// compliance under minimal intervention must weakly beat every deviation
/// payoff under maximal intervention.
pub fn supportable(game: &InterventionGame, a: &ActionProfile, grid: &GridSpec) -> Result<bool> {
    grid.validate()?;
    game.validate_profile(a)?;
    let minimal = game.bounds().minimal().to_vec();
    let maximal = game.bounds().maximal().to_vec();
    for i in 0..game.num_users() {
        let compliance = game.utility(Player::User(i), &minimal, a)?;
        let (_, best_deviation_value) =
            best_deviation_1d(game.user_space(i), a.get(i), grid, |x| {
                game.utility(Player::User(i), &maximal, &a.with_coordinate(i, x))
            })?;
        if best_deviation_value > compliance + SUPPORT_EPSILON {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All supportable profiles of the enumeration grid, in row-major order.
pub fn supportable_set(game: &InterventionGame, grid: &GridSpec) -> Result<Vec<ActionProfile>> {
    supportable_set_capped(game, grid, DEFAULT_PROFILE_CAP)
}

/// As [`supportable_set`] with an explicit profile cap.
pub fn supportable_set_capped(
    game: &InterventionGame,
    grid: &GridSpec,
    cap: u64,
) -> Result<Vec<ActionProfile>> {
    let axes = profile_axes(game, grid)?;
    check_cap(&axes, cap)?;
    let mut set = Vec::new();
    enumerate_profiles(&axes, |profile| {
        if supportable(game, profile, grid)? {
            set.push(profile.clone());
        }
        Ok(true)
    })?;
    Ok(set)
}

// ---------------------------------------------------------------------------
// strong support (grid Nash uniqueness)
// ---------------------------------------------------------------------------

/// All grid profiles that are Nash equilibria of the induced game: profiles
/// where no user has an on-grid unilateral deviation gaining more than
/// [`SUPPORT_EPSILON`]. Row-major order.
pub fn grid_nash_profiles(
    game: &InterventionGame,
    mechanism: &InterventionMechanism,
    grid: &GridSpec,
    cap: u64,
) -> Result<Vec<ActionProfile>> {
    let axes = profile_axes(game, grid)?;
    check_cap(&axes, cap)?;
    let n = axes.len();
    let total = profile_count(&axes) as usize;
    let induced = game.induced_game(mechanism)?;

    // payoff tables, one per user, indexed row-major like the enumeration
    let mut tables: Vec<Vec<f64>> = vec![Vec::with_capacity(total); n];
    enumerate_profiles(&axes, |profile| {
        for (i, table) in tables.iter_mut().enumerate() {
            table.push(induced.payoff(i, profile)?);
        }
        Ok(true)
    })?;

    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * axes[k + 1].len();
    }

    let mut nash = Vec::new();
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut is_nash = true;
        for i in 0..n {
            let own = tables[i][flat];
            let line_base = flat - idx[i] * strides[i];
            let best = (0..axes[i].len())
                .map(|j| tables[i][line_base + j * strides[i]])
                .fold(f64::NEG_INFINITY, f64::max);
            if best > own + SUPPORT_EPSILON {
                is_nash = false;
                break;
            }
        }
        if is_nash {
            nash.push(ActionProfile::new(
                idx.iter().zip(&axes).map(|(&j, ax)| ax[j]).collect(),
            ));
        }
        // row-major odometer, last user fastest
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(nash)
}

/// Checks whether `mechanism` makes `a` the *unique* grid Nash profile of
/// the induced game. Returns the verdict and every other Nash profile found
/// (uniqueness counterexamples).
pub fn strongly_supports(
    game: &InterventionGame,
    mechanism: &InterventionMechanism,
    a: &ActionProfile,
    grid: &GridSpec,
) -> Result<(bool, Vec<ActionProfile>)> {
    strongly_supports_capped(game, mechanism, a, grid, DEFAULT_PROFILE_CAP)
}

/// As [`strongly_supports`] with an explicit profile cap.
pub fn strongly_supports_capped(
    game: &InterventionGame,
    mechanism: &InterventionMechanism,
    a: &ActionProfile,
    grid: &GridSpec,
    cap: u64,
) -> Result<(bool, Vec<ActionProfile>)> {
    game.validate_profile(a)?;
    let nash = grid_nash_profiles(game, mechanism, grid, cap)?;
    let mut target_found = false;
    let mut others = Vec::new();
    for p in nash {
        if p.matches(a, MEMBERSHIP_TOL) {
            target_found = true;
        } else {
            others.push(p);
        }
    }
    Ok((target_found && others.is_empty(), others))
}

// ---------------------------------------------------------------------------
// optimal intervention
// ---------------------------------------------------------------------------

/// Finds the intervention equilibrium: the supportable grid profile
/// maximizing the manager's minimal-intervention utility (lexicographically
/// smallest on ties), refined per the grid's refinement policy while
/// re-checking supportability, paired with its maximum-punishment mechanism.
pub fn find_intervention_equilibrium(
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<EquilibriumResult> {
    let axes = profile_axes(game, grid)?;
    check_cap(&axes, DEFAULT_PROFILE_CAP)?;
    let minimal = game.bounds().minimal().to_vec();
    let mut examined: u64 = 0;
    let mut best: Option<(ActionProfile, f64)> = None;

    enumerate_profiles(&axes, |profile| {
        examined += 1;
        if supportable(game, profile, grid)? {
            let value = game.utility(Player::Manager, &minimal, profile)?;
            // row-major order makes the first strict maximum lexicographically
            // smallest among ties
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                best = Some((profile.clone(), value));
            }
        }
        Ok(true)
    })?;

    let (mut best_profile, mut best_value) = best.ok_or(Error::NoSupportableProfile)?;

    for round in 1..=grid.refinement_rounds {
        let refined_axes: Vec<Vec<f64>> = game
            .user_spaces()
            .iter()
            .enumerate()
            .map(|(i, space)| match space {
                ActionSpace::Finite(values) => values.clone(),
                ActionSpace::Interval { lo, hi } => {
                    let half = 0.5 * (hi - lo) * grid.shrink.powi(round as i32);
                    let center = best_profile.get(i);
                    linspace((center - half).max(*lo), (center + half).min(*hi), grid.resolution)
                }
            })
            .collect();
        enumerate_profiles(&refined_axes, |profile| {
            examined += 1;
            if supportable(game, profile, grid)? {
                let value = game.utility(Player::Manager, &minimal, profile)?;
                if value > best_value {
                    best_value = value;
                    best_profile = profile.clone();
                }
            }
            Ok(true)
        })?;
    }

    let mechanism = mechanisms::max_punishment(best_profile.clone(), game.bounds())?;
    let verification = supports(game, &mechanism, &best_profile, grid)?;
    Ok(EquilibriumResult {
        mechanism,
        profile: best_profile,
        manager_value: best_value,
        candidates_examined: examined,
        verification,
    })
}

/// Checks the hypothesis under which the optimal target is unique: the
/// manager must strictly prefer minimal to maximal intervention on every
/// supportable grid profile. Returns the first failing profile as witness.
pub fn check_strict_preference(
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<(bool, Option<ActionProfile>)> {
    let axes = profile_axes(game, grid)?;
    check_cap(&axes, DEFAULT_PROFILE_CAP)?;
    let minimal = game.bounds().minimal().to_vec();
    let maximal = game.bounds().maximal().to_vec();
    let mut witness = None;
    enumerate_profiles(&axes, |profile| {
        if supportable(game, profile, grid)? {
            let at_min = game.utility(Player::Manager, &minimal, profile)?;
            let at_max = game.utility(Player::Manager, &maximal, profile)?;
            if at_min <= at_max + STRICT_EPSILON {
                witness = Some(profile.clone());
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    match witness {
        Some(w) => Ok((false, Some(w))),
        None => Ok((true, None)),
    }
}

// ---------------------------------------------------------------------------
// conservative design
// ---------------------------------------------------------------------------

/// Worst-case-optimal choice from a finite mechanism family: scores each
/// member by the *minimum* manager value over the grid Nash profiles of its
/// induced game, and picks the member with the largest score (smallest index
/// on ties). Members with no grid Nash profile score `None` (worse than any
/// value).
pub fn maximin_design(
    game: &InterventionGame,
    family: &[InterventionMechanism],
    grid: &GridSpec,
) -> Result<MaximinResult> {
    if family.is_empty() {
        return Err(Error::Precondition("maximin needs a non-empty mechanism family".into()));
    }
    let mut per_mechanism = Vec::with_capacity(family.len());
    for mechanism in family {
        let nash = grid_nash_profiles(game, mechanism, grid, DEFAULT_PROFILE_CAP)?;
        let mut worst: Option<f64> = None;
        for profile in &nash {
            let value = game.expected_utility(mechanism, Player::Manager, profile)?;
            worst = Some(match worst {
                Some(w) => w.min(value),
                None => value,
            });
        }
        per_mechanism.push(worst);
    }
    let mut best_index = 0;
    for (k, score) in per_mechanism.iter().enumerate().skip(1) {
        let better = match (score, &per_mechanism[best_index]) {
            (Some(s), Some(b)) => s > b,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            best_index = k;
        }
    }
    Ok(MaximinResult {
        best_index,
        worst_value: per_mechanism[best_index],
        per_mechanism,
    })
}

// ===========================================================================
