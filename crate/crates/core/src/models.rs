//! Concrete game builders: random-access contention control, usage-based
//! pricing, asymmetric per-user intervention, and finite tabulated games.
//!
//! The random-access model is the flagship application. N users share a
//! collision channel; user i transmits with probability `a_i` and the manager
//! jams with probability `a_0`, so user i's throughput is
//!
//! ```text
//!     r_i(a_0, a) = gamma_i a_i (1 - a_0) prod_{j != i} (1 - a_j),
//! ```
//!
//! and its utility is `U_i(r_i)` for a strictly increasing benefit function
//! `U_i`. Because intervention multiplies everyone's rate by `(1 - a_0)`,
//! maximal jamming zeroes every deviation payoff: *every* profile is
//! supportable, and the affine rates reduce to `c_i = 1 / a_i*` no matter
//! what the benefit functions are. That is the robustness story this module's
//! [`robustness_experiment`] quantifies: the jamming designs need no
//! knowledge of `U_i`, while usage prices are set from `U_i'` and break when
//! the assumed benefits are wrong.
//!
//! The pricing alternative charges payments instead of jamming: the manager
//! action is a per-user payment vector, utilities are `U_i(r_i(a)) - a_0^i`
//! with the manager factor removed from the rate, and the linear pricing rule
//! charges `p_i r_i(a)`. The asymmetric builders generalize this to
//! arbitrary benefit functions `g_i` with additive (taxation) or
//! multiplicative (confiscation) per-user intervention and a selectable
//! manager objective.

use std::fmt;
use std::sync::Arc;

use crate::equilibrium::{supports, SupportReport};
use crate::error::{Error, Result};
use crate::game::{
    ActionProfile, ActionSpace, InterventionBounds, InterventionGame, InterventionMechanism,
    ManagerActionSpace, MonitoringTechnology, UtilityOracle, MEMBERSHIP_TOL,
};
use crate::mechanisms;
use crate::numerics::GridSpec;

// ---------------------------------------------------------------------------
// benefit functions
// ---------------------------------------------------------------------------

/// Strictly increasing benefit-of-throughput functions.
#[derive(Clone, Debug, PartialEq)]
pub enum BenefitFunction {
    /// U(x) = x.
    Identity,
    /// U(x) = x^p, p > 0. Concave iff p <= 1.
    Power { exponent: f64 },
    /// U(x) = ln(delta + x), delta > 0 (shifted so zero rates stay finite).
    LogShifted { delta: f64 },
    /// U(x) = 1 - exp(-lambda x), lambda > 0.
    SaturatingExp { lambda: f64 },
    /// Piecewise-linear interpolation of strictly increasing samples.
    TabulatedMonotone { xs: Vec<f64>, ys: Vec<f64> },
}

impl BenefitFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::Data(format!(
                "power benefit needs a positive exponent, got {exponent}"
            )));
        }
        Ok(BenefitFunction::Power { exponent })
    }

    pub fn log_shifted(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Data(format!(
                "log-shifted benefit needs a positive shift, got {delta}"
            )));
        }
        Ok(BenefitFunction::LogShifted { delta })
    }

    pub fn saturating_exp(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Data(format!(
                "saturating-exponential benefit needs a positive rate, got {lambda}"
            )));
        }
        Ok(BenefitFunction::SaturatingExp { lambda })
    }

    pub fn tabulated_monotone(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Data(format!(
                "tabulated benefit needs at least two matching samples, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Data("tabulated benefit holds a non-finite sample".into()));
        }
        for w in xs.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Data("tabulated benefit sample points must be strictly increasing".into()));
            }
        }
        for w in ys.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Data("tabulated benefit must be strictly increasing".into()));
            }
        }
        Ok(BenefitFunction::TabulatedMonotone { xs, ys })
    }

    #[must_use]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            BenefitFunction::Identity => x,
            BenefitFunction::Power { exponent } => x.powf(*exponent),
            BenefitFunction::LogShifted { delta } => (delta + x).ln(),
            BenefitFunction::SaturatingExp { lambda } => 1.0 - (-lambda * x).exp(),
            BenefitFunction::TabulatedMonotone { xs, ys } => {
                // linear interpolation, clamped to the sampled range
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= *xs.last().expect("nonempty") {
                    return *ys.last().expect("nonempty");
                }
                let k = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                ys[k] * (1.0 - t) + ys[k + 1] * t
            }
        }
    }

    /// Analytic derivative where the family has one; `None` for tabulated
    /// benefits (callers fall back to finite differences).
    #[must_use]
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            BenefitFunction::Identity => Some(1.0),
            BenefitFunction::Power { exponent } => Some(exponent * x.powf(exponent - 1.0)),
            BenefitFunction::LogShifted { delta } => Some(1.0 / (delta + x)),
            BenefitFunction::SaturatingExp { lambda } => Some(lambda * (-lambda * x).exp()),
            BenefitFunction::TabulatedMonotone { .. } => None,
        }
    }

    /// Whether the family guarantees concavity (tabulated samples make no
    /// such promise).
    #[must_use]
    pub fn is_concave(&self) -> bool {
        match self {
            BenefitFunction::Identity => true,
            BenefitFunction::Power { exponent } => *exponent <= 1.0,
            BenefitFunction::LogShifted { .. } | BenefitFunction::SaturatingExp { .. } => true,
            BenefitFunction::TabulatedMonotone { .. } => false,
        }
    }

    /// Validates that the benefit covers `[0, gamma]`: tabulated samples must
    /// span the range; closed forms always do.
    fn validate_domain(&self, gamma: f64) -> Result<()> {
        if let BenefitFunction::TabulatedMonotone { xs, .. } = self {
            let (first, last) = (xs[0], *xs.last().expect("nonempty"));
            if first > 0.0 || last < gamma {
                return Err(Error::Data(format!(
                    "tabulated benefit samples [{first}, {last}] do not cover rates [0, {gamma}]"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for BenefitFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenefitFunction::Identity => write!(f, "identity"),
            BenefitFunction::Power { exponent } => write!(f, "power({exponent})"),
            BenefitFunction::LogShifted { delta } => write!(f, "log-shifted({delta})"),
            BenefitFunction::SaturatingExp { lambda } => write!(f, "saturating-exp({lambda})"),
            BenefitFunction::TabulatedMonotone { xs, .. } => {
                write!(f, "tabulated({} samples)", xs.len())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// random access
// ---------------------------------------------------------------------------

/// Description of a slotted random-access network.
#[derive(Clone, Debug)]
pub struct RandomAccessSpec {
    /// Peak data rate per user (throughput when transmitting alone).
    pub gamma: Vec<f64>,
    /// Benefit-of-throughput function per user.
    pub benefits: Vec<BenefitFunction>,
}

impl RandomAccessSpec {
    pub fn new(gamma: Vec<f64>, benefits: Vec<BenefitFunction>) -> Result<Self> {
        let spec = RandomAccessSpec { gamma, benefits };
        spec.validate()?;
        Ok(spec)
    }

    /// All users with identity benefits.
    pub fn identity(gamma: Vec<f64>) -> Result<Self> {
        let n = gamma.len();
        Self::new(gamma, vec![BenefitFunction::Identity; n])
    }

    #[must_use]
    pub fn num_users(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_empty() {
            return Err(Error::Data("random access needs at least one user".into()));
        }
        if self.gamma.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::Data("peak rates must be positive".into()));
        }
        if self.benefits.len() != self.gamma.len() {
            return Err(Error::Data(format!(
                "{} peak rates but {} benefit functions",
                self.gamma.len(),
                self.benefits.len()
            )));
        }
        for (g, b) in self.gamma.iter().zip(&self.benefits) {
            b.validate_domain(*g)?;
        }
        Ok(())
    }
}

/// Throughput of user i when the manager jams with probability `a0`.
fn access_rate(gamma: &[f64], i: usize, a0: f64, a: &[f64]) -> f64 {
    let mut r = gamma[i] * a[i] * (1.0 - a0);
    for (j, aj) in a.iter().enumerate() {
        if j != i {
            r *= 1.0 - aj;
        }
    }
    r
}

/// Usage rate without the manager factor (the pricing variant's throughput).
fn usage_rate(gamma: &[f64], i: usize, a: &[f64]) -> f64 {
    let mut r = gamma[i] * a[i];
    for (j, aj) in a.iter().enumerate() {
        if j != i {
            r *= 1.0 - aj;
        }
    }
    r
}

/// Derivative of `access_rate` in coordinate `dim` of the joint vector
/// (0 = the manager's jamming probability, 1 + j = user j's transmission
/// probability).
fn access_rate_partial(gamma: &[f64], i: usize, a0: f64, a: &[f64], dim: usize) -> f64 {
    let product_except = |skip: Option<usize>| {
        let mut p = 1.0;
        for (j, aj) in a.iter().enumerate() {
            if j != i && Some(j) != skip {
                p *= 1.0 - aj;
            }
        }
        p
    };
    if dim == 0 {
        -gamma[i] * a[i] * product_except(None)
    } else {
        let j = dim - 1;
        if j == i {
            gamma[i] * (1.0 - a0) * product_except(None)
        } else {
            -gamma[i] * a[i] * (1.0 - a0) * product_except(Some(j))
        }
    }
}

/// Slope of the benefit family, for the closed forms whose composition with
/// the rate keeps an exact analytic partial.
fn benefit_slope_for_analytic(benefit: &BenefitFunction) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    match benefit {
        BenefitFunction::Identity => Some(Arc::new(|_r: f64| 1.0)),
        BenefitFunction::Power { exponent } => {
            let p = *exponent;
            Some(Arc::new(move |r: f64| p * r.powf(p - 1.0)))
        }
        _ => None,
    }
}

/// Builds the random-access intervention game: everyone's action space is
/// `[0, 1]`, monitoring is perfect, the intervention ordering runs from no
/// jamming (0) to certain jamming (1), and the manager's utility is the sum
/// of the users'. Identity and power benefits declare analytic partials
/// (guarded so a zero rate-derivative never multiplies an unbounded benefit
/// slope); other families rely on finite differences.
pub fn random_access_game(spec: &RandomAccessSpec) -> Result<InterventionGame> {
    spec.validate()?;
    let n = spec.num_users();
    let unit = ActionSpace::interval(0.0, 1.0).expect("static interval");
    let mut users = Vec::with_capacity(n);
    for i in 0..n {
        let benefit = spec.benefits[i].clone();
        let gamma = spec.gamma.clone();
        let b = benefit.clone();
        let g = gamma.clone();
        let mut oracle = UtilityOracle::new(
            format!("U{}(rate)", i + 1),
            move |a0: &[f64], a: &[f64]| b.value(access_rate(&g, i, a0[0], a)),
        );
        if let Some(slope) = benefit_slope_for_analytic(&benefit) {
            let g0 = gamma.clone();
            let s0 = slope.clone();
            oracle = oracle.with_manager_partial(move |a0: &[f64], a: &[f64], _k: usize| {
                let dr = access_rate_partial(&g0, i, a0[0], a, 0);
                if dr == 0.0 {
                    return 0.0;
                }
                s0(access_rate(&g0, i, a0[0], a)) * dr
            });
            let g1 = gamma.clone();
            oracle = oracle.with_user_partial(move |a0: &[f64], a: &[f64], j: usize| {
                let dr = access_rate_partial(&g1, i, a0[0], a, 1 + j);
                if dr == 0.0 {
                    return 0.0;
                }
                slope(access_rate(&g1, i, a0[0], a)) * dr
            });
        }
        users.push(oracle);
    }
    let gamma = spec.gamma.clone();
    let benefits = spec.benefits.clone();
    let manager = UtilityOracle::new("sum of user benefits", move |a0: &[f64], a: &[f64]| {
        (0..gamma.len())
            .map(|i| benefits[i].value(access_rate(&gamma, i, a0[0], a)))
            .sum()
    });
    InterventionGame::new(
        vec![unit.clone(); n],
        ManagerActionSpace::Scalar(unit),
        users,
        manager,
        MonitoringTechnology::Perfect,
        InterventionBounds::scalar(0.0, 1.0).expect("static bounds"),
    )
}

// ---------------------------------------------------------------------------
// pricing
// ---------------------------------------------------------------------------

/// Description of the usage-pricing variant: the manager charges per-user
/// payments instead of jamming.
#[derive(Clone, Debug)]
pub struct PricingSpec {
    pub gamma: Vec<f64>,
    pub benefits: Vec<BenefitFunction>,
    /// Price of a unit of throughput, per user.
    pub prices: Vec<f64>,
}

impl PricingSpec {
    pub fn new(gamma: Vec<f64>, benefits: Vec<BenefitFunction>, prices: Vec<f64>) -> Result<Self> {
        let spec = PricingSpec { gamma, benefits, prices };
        spec.validate()?;
        Ok(spec)
    }

    #[must_use]
    pub fn num_users(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        RandomAccessSpec {
            gamma: self.gamma.clone(),
            benefits: self.benefits.clone(),
        }
        .validate()?;
        if self.prices.len() != self.gamma.len() {
            return Err(Error::Data(format!(
                "{} users but {} prices",
                self.gamma.len(),
                self.prices.len()
            )));
        }
        if self.prices.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Data("prices must be nonnegative".into()));
        }
        Ok(())
    }

    /// Payment ceiling per user: large enough to cover both the full benefit
    /// at peak rate and anything the linear pricing rule can charge, so the
    /// maximal intervention is a credible worst case and the pricing rule
    /// never clamps.
    #[must_use]
    pub fn payment_caps(&self) -> Vec<f64> {
        self.gamma
            .iter()
            .zip(&self.benefits)
            .zip(&self.prices)
            .map(|((&g, b), &p)| (b.value(g)).max(p * g).max(0.0))
            .collect()
    }
}

/// Builds the pricing game: an additively asymmetric intervention game whose
/// manager action is the vector of payments, `u_i = U_i(r_i(a)) - a0_i`,
/// with the manager factor removed from the rate and a benevolent manager.
pub fn pricing_game(spec: &PricingSpec) -> Result<InterventionGame> {
    spec.validate()?;
    let n = spec.num_users();
    let caps = spec.payment_caps();
    let mut users = Vec::with_capacity(n);
    for i in 0..n {
        let benefit = spec.benefits[i].clone();
        let gamma = spec.gamma.clone();
        users.push(UtilityOracle::new(
            format!("U{}(usage) - payment", i + 1),
            move |a0: &[f64], a: &[f64]| benefit.value(usage_rate(&gamma, i, a)) - a0[i],
        ));
    }
    let gamma = spec.gamma.clone();
    let benefits = spec.benefits.clone();
    let manager = UtilityOracle::new("sum of user net benefits", move |a0: &[f64], a: &[f64]| {
        (0..gamma.len())
            .map(|i| benefits[i].value(usage_rate(&gamma, i, a)) - a0[i])
            .sum()
    });
    let unit = ActionSpace::interval(0.0, 1.0).expect("static interval");
    InterventionGame::new(
        vec![unit; n],
        ManagerActionSpace::Vector(caps.iter().map(|&c| (0.0, c)).collect()),
        users,
        manager,
        MonitoringTechnology::Perfect,
        InterventionBounds::new(vec![0.0; n], caps)?,
    )
}

/// The linear pricing rule `f_i(a) = p_i r_i(a)` as a mechanism of the
/// pricing game. Payments stay within the payment caps by construction.
pub fn pricing_mechanism(spec: &PricingSpec, prices: &[f64]) -> Result<InterventionMechanism> {
    spec.validate()?;
    if prices.len() != spec.num_users() {
        return Err(Error::Precondition(format!(
            "{} prices for {} users",
            prices.len(),
            spec.num_users()
        )));
    }
    let gamma = spec.gamma.clone();
    let prices = prices.to_vec();
    let label = format!("linear pricing({prices:?})");
    Ok(mechanisms::closed_form(label, move |a: &ActionProfile| {
        (0..gamma.len())
            .map(|i| prices[i] * usage_rate(&gamma, i, a.as_slice()))
            .collect()
    }))
}

/// Outcome of [`design_prices`].
#[derive(Clone, Debug)]
pub struct PriceDesign {
    /// Marginal-benefit prices `p_i = U_i'(r_i(target))`.
    pub prices: Vec<f64>,
    /// Set when some benefit family does not guarantee concavity; the
    /// first-order price then no longer guarantees support.
    pub concavity_warning: bool,
    /// Grid audit of the designed prices at the target.
    pub support: SupportReport,
}

/// Designs marginal-benefit prices for `target` and audits them: each price
/// is the benefit slope at the target's usage rate, the unique candidate at
/// which the target satisfies every user's first-order condition. For
/// concave benefits that condition is also sufficient; the attached report
/// verifies it on the grid either way.
pub fn design_prices(
    spec: &PricingSpec,
    target: &ActionProfile,
    grid: &GridSpec,
) -> Result<PriceDesign> {
    spec.validate()?;
    if target.len() != spec.num_users() {
        return Err(Error::Precondition(format!(
            "target has {} coordinates for {} users",
            target.len(),
            spec.num_users()
        )));
    }
    let mut prices = Vec::with_capacity(spec.num_users());
    for i in 0..spec.num_users() {
        let r = usage_rate(&spec.gamma, i, target.as_slice());
        let p = match spec.benefits[i].derivative(r) {
            Some(p) => p,
            None => {
                let b = spec.benefits[i].clone();
                let f = move |x: &[f64]| b.value(x[0]);
                crate::numerics::partial_derivative(
                    &f,
                    &[r],
                    0,
                    &[(0.0, spec.gamma[i])],
                    crate::numerics::FdSpec::default(),
                )?
            }
        };
        if !p.is_finite() {
            return Err(Error::NonFinite {
                context: format!("marginal benefit of user {}", i + 1),
                point: vec![r],
            });
        }
        prices.push(p.max(0.0));
    }
    let designed = PricingSpec {
        gamma: spec.gamma.clone(),
        benefits: spec.benefits.clone(),
        prices: prices.clone(),
    };
    let game = pricing_game(&designed)?;
    let mechanism = pricing_mechanism(&designed, &prices)?;
    let support = supports(&game, &mechanism, target, grid)?;
    Ok(PriceDesign {
        prices,
        concavity_warning: spec.benefits.iter().any(|b| !b.is_concave()),
        support,
    })
}

// ---------------------------------------------------------------------------
// asymmetric intervention
// ---------------------------------------------------------------------------

/// Shared shape of profile-valued model ingredients.
pub type ProfileFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Wraps a closure as a [`ProfileFn`].
pub fn profile_fn(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> ProfileFn {
    Arc::new(f)
}

/// How per-user intervention enters utilities.
#[derive(Clone)]
pub enum AsymmetricVariant {
    /// `u_i = g_i(a) - a0_i`: intervention is a payment/tax. Payments need a
    /// ceiling for a maximal intervention to exist; `None` derives one as the
    /// largest benefit on the enumeration grid.
    Additive { payment_cap: Option<f64> },
    /// `u_i = (1 - a0_i) g_i(a)` with `a0_i` in `[0, 1]`: intervention
    /// confiscates a share of a nonnegative benefit.
    Multiplicative,
}

/// The manager's objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManagerObjective {
    /// Weighted sum of user utilities.
    Benevolent,
    /// Collected intervention minus operating cost: the sum of payments
    /// (additive) or of confiscated benefit shares (multiplicative).
    SelfInterested,
    /// Total benefit generated minus operating cost; transfers cancel.
    TotalWelfare,
}

/// Description of an asymmetric-intervention game.
#[derive(Clone)]
pub struct AsymmetricSpec {
    pub variant: AsymmetricVariant,
    pub objective: ManagerObjective,
    pub user_spaces: Vec<ActionSpace>,
    /// Benefit `g_i(a)` per user; must be nonnegative for the multiplicative
    /// variant.
    pub benefits: Vec<ProfileFn>,
    /// Manager operating cost `c_0(a)`.
    pub operating_cost: ProfileFn,
    /// Welfare weights for the benevolent objective; `None` means equal.
    pub weights: Option<Vec<f64>>,
}

impl AsymmetricSpec {
    pub fn validate(&self) -> Result<()> {
        if self.benefits.is_empty() || self.benefits.len() != self.user_spaces.len() {
            return Err(Error::Data(format!(
                "{} benefit functions for {} user spaces",
                self.benefits.len(),
                self.user_spaces.len()
            )));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.benefits.len() {
                return Err(Error::Data(format!(
                    "{} welfare weights for {} users",
                    w.len(),
                    self.benefits.len()
                )));
            }
        }
        Ok(())
    }
}

/// Largest benefit value any user attains on the default enumeration grid;
/// used as the fallback payment cap.
fn grid_benefit_ceiling(spec: &AsymmetricSpec) -> f64 {
    let resolution = GridSpec::for_users(spec.user_spaces.len()).resolution;
    let axes: Vec<Vec<f64>> = spec.user_spaces.iter().map(|s| s.axis(resolution)).collect();
    let mut ceiling = 0.0_f64;
    let mut idx = vec![0usize; axes.len()];
    let mut point: Vec<f64> = axes.iter().map(|ax| ax[0]).collect();
    loop {
        for g in &spec.benefits {
            ceiling = ceiling.max(g(&point));
        }
        let mut k = axes.len();
        loop {
            if k == 0 {
                return ceiling;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                point[k] = axes[k][idx[k]];
                break;
            }
            idx[k] = 0;
            point[k] = axes[k][0];
        }
    }
}

/// Builds the game an [`AsymmetricSpec`] describes. The intervention
/// ordering (zero intervention weakly best for users, full intervention
/// weakly worst) holds by construction for the users; whether the *manager*
/// side of the ordering holds depends on the objective, and
/// [`InterventionGame::validate_assumption1`] reports it: a self-interested
/// manager likes intervention and fails that check by design.
pub fn asymmetric_game(spec: &AsymmetricSpec) -> Result<InterventionGame> {
    spec.validate()?;
    let n = spec.benefits.len();
    let caps: Vec<f64> = match &spec.variant {
        AsymmetricVariant::Additive { payment_cap } => {
            let cap = match payment_cap {
                Some(c) => {
                    if !(c.is_finite() && *c > 0.0) {
                        return Err(Error::Data(format!(
                            "payment cap must be positive, got {c}"
                        )));
                    }
                    *c
                }
                None => grid_benefit_ceiling(spec).max(1e-9),
            };
            vec![cap; n]
        }
        AsymmetricVariant::Multiplicative => vec![1.0; n],
    };
    let additive = matches!(spec.variant, AsymmetricVariant::Additive { .. });
    let mut users = Vec::with_capacity(n);
    for i in 0..n {
        let g = spec.benefits[i].clone();
        users.push(if additive {
            UtilityOracle::new(format!("g{} - payment", i + 1), move |a0: &[f64], a: &[f64]| {
                g(a) - a0[i]
            })
        } else {
            UtilityOracle::new(format!("(1 - share) g{}", i + 1), move |a0: &[f64], a: &[f64]| {
                (1.0 - a0[i]) * g(a)
            })
        });
    }
    let weights = spec.weights.clone().unwrap_or_else(|| vec![1.0; n]);
    let manager = {
        let benefits = spec.benefits.clone();
        let cost = spec.operating_cost.clone();
        let w = weights.clone();
        match spec.objective {
            ManagerObjective::Benevolent => UtilityOracle::new(
                "weighted user welfare",
                move |a0: &[f64], a: &[f64]| {
                    (0..benefits.len())
                        .map(|i| {
                            let u = if additive {
                                benefits[i](a) - a0[i]
                            } else {
                                (1.0 - a0[i]) * benefits[i](a)
                            };
                            w[i] * u
                        })
                        .sum()
                },
            ),
            ManagerObjective::SelfInterested => UtilityOracle::new(
                "collected intervention - cost",
                move |a0: &[f64], a: &[f64]| {
                    let collected: f64 = if additive {
                        a0.iter().sum()
                    } else {
                        (0..benefits.len()).map(|i| a0[i] * benefits[i](a)).sum()
                    };
                    collected - cost(a)
                },
            ),
            ManagerObjective::TotalWelfare => UtilityOracle::new(
                "total benefit - cost",
                move |_a0: &[f64], a: &[f64]| {
                    let total: f64 = (0..benefits.len()).map(|i| benefits[i](a)).sum();
                    total - cost(a)
                },
            ),
        }
    };
    InterventionGame::new_weighted(
        spec.user_spaces.clone(),
        ManagerActionSpace::Vector(caps.iter().map(|&c| (0.0, c)).collect()),
        users,
        manager,
        MonitoringTechnology::Perfect,
        InterventionBounds::new(vec![0.0; n], caps)?,
        weights,
    )
}

// ---------------------------------------------------------------------------
// finite tabulated games
// ---------------------------------------------------------------------------

/// Fully tabulated finite game: explicit utility tables over every
/// (manager action, user profile) pair.
#[derive(Clone, Debug)]
pub struct FiniteTabulatedSpec {
    /// Action values per user, each strictly increasing.
    pub user_actions: Vec<Vec<f64>>,
    /// Manager action values, strictly increasing; the first is the minimal
    /// intervention, the last the maximal.
    pub manager_actions: Vec<f64>,
    /// Per-user utility tables, flattened with the manager action outermost
    /// and then the user profile in row-major order (user 1 most
    /// significant): entry `k * P + q` is the utility at manager action k and
    /// profile index q, with P the number of profiles.
    pub user_tables: Vec<Vec<f64>>,
    /// Manager utility table in the same layout; `None` for a benevolent
    /// manager (weighted sum of user tables).
    pub manager_table: Option<Vec<f64>>,
    /// Welfare weights for the benevolent fallback; `None` means equal.
    pub weights: Option<Vec<f64>>,
}

impl FiniteTabulatedSpec {
    #[must_use]
    pub fn num_profiles(&self) -> usize {
        self.user_actions.iter().map(Vec::len).product()
    }
}

/// Builds an intervention game from explicit finite tables. The intervention
/// ordering is *not* imposed here; run
/// [`InterventionGame::validate_assumption1`] to audit supplied tables.
pub fn finite_tabulated_game(spec: &FiniteTabulatedSpec) -> Result<InterventionGame> {
    let n = spec.user_actions.len();
    if n == 0 {
        return Err(Error::Data("finite game needs at least one user".into()));
    }
    if spec.user_tables.len() != n {
        return Err(Error::Data(format!(
            "{n} users but {} utility tables",
            spec.user_tables.len()
        )));
    }
    let profiles = spec.num_profiles();
    let entries = profiles
        .checked_mul(spec.manager_actions.len())
        .ok_or_else(|| Error::Data("utility table size overflows".into()))?;
    for (i, table) in spec.user_tables.iter().enumerate() {
        if table.len() != entries {
            return Err(Error::Data(format!(
                "user {}'s table has {} entries, expected {entries}",
                i + 1,
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("user {}'s table holds a non-finite utility", i + 1)));
        }
    }
    if let Some(t) = &spec.manager_table {
        if t.len() != entries {
            return Err(Error::Data(format!(
                "manager table has {} entries, expected {entries}",
                t.len()
            )));
        }
    }
    let weights = spec.weights.clone().unwrap_or_else(|| vec![1.0; n]);
    if weights.len() != n {
        return Err(Error::Data(format!("{} weights for {n} users", weights.len())));
    }

    let user_actions = Arc::new(spec.user_actions.clone());
    let manager_actions = Arc::new(spec.manager_actions.clone());
    // row-major profile index, user 1 most significant; NaN on lookup misses
    // (unreachable through validated evaluation paths)
    let flat_index = {
        let user_actions = user_actions.clone();
        let manager_actions = manager_actions.clone();
        move |a0: &[f64], a: &[f64]| -> Option<usize> {
            let k = manager_actions
                .iter()
                .position(|v| (v - a0[0]).abs() <= MEMBERSHIP_TOL)?;
            let mut q = 0usize;
            for (vals, &x) in user_actions.iter().zip(a) {
                let pos = vals.iter().position(|v| (v - x).abs() <= MEMBERSHIP_TOL)?;
                q = q * vals.len() + pos;
            }
            Some(k * user_actions.iter().map(|v| v.len()).product::<usize>() + q)
        }
    };

    let mut users = Vec::with_capacity(n);
    for (i, table) in spec.user_tables.iter().enumerate() {
        let table = Arc::new(table.clone());
        let index = flat_index.clone();
        users.push(UtilityOracle::new(
            format!("table u{}", i + 1),
            move |a0: &[f64], a: &[f64]| match index(a0, a) {
                Some(q) => table[q],
                None => f64::NAN,
            },
        ));
    }
    let manager = match &spec.manager_table {
        Some(t) => {
            let table = Arc::new(t.clone());
            let index = flat_index.clone();
            UtilityOracle::new("table u0", move |a0: &[f64], a: &[f64]| match index(a0, a) {
                Some(q) => table[q],
                None => f64::NAN,
            })
        }
        None => {
            let tables: Vec<Arc<Vec<f64>>> =
                spec.user_tables.iter().map(|t| Arc::new(t.clone())).collect();
            let w = weights.clone();
            let index = flat_index.clone();
            UtilityOracle::new("weighted sum of user tables", move |a0: &[f64], a: &[f64]| {
                match index(a0, a) {
                    Some(q) => tables.iter().zip(&w).map(|(t, wi)| wi * t[q]).sum(),
                    None => f64::NAN,
                }
            })
        }
    };

    let user_spaces = spec
        .user_actions
        .iter()
        .map(|vals| ActionSpace::finite(vals.clone()))
        .collect::<Result<Vec<_>>>()?;
    let manager_space = ActionSpace::finite(spec.manager_actions.clone())?;
    let (lo, hi) = manager_space.hull();
    InterventionGame::new_weighted(
        user_spaces,
        ManagerActionSpace::Scalar(manager_space),
        users,
        manager,
        MonitoringTechnology::Perfect,
        InterventionBounds::scalar(lo, hi)?,
        weights,
    )
}

// ---------------------------------------------------------------------------
// robustness experiment
// ---------------------------------------------------------------------------

/// Verdicts for one benefit-function family.
#[derive(Clone, Debug)]
pub struct RobustnessRow {
    /// Family description.
    pub family: String,
    /// The jamming ramp designed once, without benefit knowledge.
    pub affine: SupportReport,
    /// Prices designed under the first family, evaluated under this one.
    pub fixed_prices: SupportReport,
    /// Prices re-designed under this family (marginal-benefit prices; note
    /// they only guarantee support for concave benefits).
    pub redesigned_prices: PriceDesign,
}

/// Outcome of [`robustness_experiment`].
#[derive(Clone, Debug)]
pub struct RobustnessReport {
    pub target: ActionProfile,
    /// Rates of the benefit-independent jamming ramp: `1 / target_i`.
    pub rates: Vec<f64>,
    /// Prices designed under the first family and then held fixed.
    pub fixed_prices: Vec<f64>,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessReport {
    /// True iff the affine jamming mechanism supports the target under every
    /// family.
    #[must_use]
    pub fn affine_robust(&self) -> bool {
        self.rows.iter().all(|r| r.affine.supported)
    }
}

/// Contrasts direct intervention with pricing across candidate benefit
/// families: builds the affine jamming ramp with rates `1 / target_i` once
/// (no benefit knowledge needed), designs prices under the first family, and
/// audits both — plus per-family redesigned prices — under every family.
pub fn robustness_experiment(
    target: &ActionProfile,
    gamma: &[f64],
    families: &[Vec<BenefitFunction>],
    grid: &GridSpec,
) -> Result<RobustnessReport> {
    if families.is_empty() {
        return Err(Error::Precondition("robustness needs at least one benefit family".into()));
    }
    if target.len() != gamma.len() {
        return Err(Error::Precondition(format!(
            "target has {} coordinates for {} users",
            target.len(),
            gamma.len()
        )));
    }
    for t in target.as_slice() {
        if !(*t > 0.0 && *t < 1.0) {
            return Err(Error::Precondition(format!(
                "robustness needs an interior target, got coordinate {t}"
            )));
        }
    }
    let rates: Vec<f64> = target.as_slice().iter().map(|t| 1.0 / t).collect();

    let first_spec = PricingSpec::new(
        gamma.to_vec(),
        families[0].clone(),
        vec![0.0; gamma.len()],
    )?;
    let fixed_prices = design_prices(&first_spec, target, grid)?.prices;

    let mut rows = Vec::with_capacity(families.len());
    for family in families {
        let ra_spec = RandomAccessSpec::new(gamma.to_vec(), family.clone())?;
        let ra_game = random_access_game(&ra_spec)?;
        let affine_mechanism = mechanisms::affine(target.clone(), rates.clone(), ra_game.bounds())?;
        let affine = supports(&ra_game, &affine_mechanism, target, grid)?;

        let fixed_spec =
            PricingSpec::new(gamma.to_vec(), family.clone(), fixed_prices.clone())?;
        let fixed_game = pricing_game(&fixed_spec)?;
        let fixed_rule = pricing_mechanism(&fixed_spec, &fixed_prices)?;
        let fixed_report = supports(&fixed_game, &fixed_rule, target, grid)?;

        let family_spec =
            PricingSpec::new(gamma.to_vec(), family.clone(), vec![0.0; gamma.len()])?;
        let redesigned = design_prices(&family_spec, target, grid)?;

        rows.push(RobustnessRow {
            family: family
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", "),
            affine,
            fixed_prices: fixed_report,
            redesigned_prices: redesigned,
        });
    }
    Ok(RobustnessReport {
        target: target.clone(),
        rates,
        fixed_prices,
        rows,
    })
}

// ===========================================================================
