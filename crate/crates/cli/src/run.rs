//! Task execution: assembles the game and mechanism a scenario describes,
//! runs the requested task, and renders a plain-text report plus CSV rows.
//!
//! Exit codes: 0 for success or a positive verdict, 1 for a negative verdict
//! (not supported, not unique, no supportable profile, a broken robustness
//! claim), 2 for usage or data errors (the caller maps errors to 2).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use intervention::equilibrium::{
    find_intervention_equilibrium, maximin_design, strongly_supports, supports, SupportReport,
};
use intervention::mechanisms::{
    affine, compute_affine_rates, constant_vector, max_punishment, tabulated,
    verify_prop4_conditions, Prop4Report,
};
use intervention::models::{
    asymmetric_game, finite_tabulated_game, pricing_game, pricing_mechanism, profile_fn,
    random_access_game, robustness_experiment, AsymmetricSpec, AsymmetricVariant, BenefitFunction,
    FiniteTabulatedSpec, ManagerObjective, PricingSpec, RandomAccessSpec,
};
use intervention::{
    ActionProfile, ActionSpace, Error, GridSpec, InterventionGame, InterventionMechanism, Player,
};

use crate::scenario::{
    MechanismSpec, ModelSpec, Scenario, SweepParam, TaskKind, TaskSpec,
};
use crate::Args;

const AUDIT_SAMPLES: usize = 200;
const GRID_ENV_VAR: &str = "INTERVENE_GRID";

/// Runs a parsed scenario under the CLI flags; returns the process exit code.
pub fn run(args: &Args) -> Result<i32> {
    let text = fs::read_to_string(&args.scenario)
        .with_context(|| format!("cannot read scenario `{}`", args.scenario.display()))?;
    let scenario = crate::scenario::parse(&text)
        .with_context(|| format!("scenario `{}`", args.scenario.display()))?;
    let outcome = execute(&scenario, args)?;

    let report_path = args.report.clone().or_else(|| scenario.output.report.clone());
    let csv_path = args.csv.clone().or_else(|| scenario.output.csv.clone());
    match &report_path {
        Some(path) => {
            write_artifact(path, &outcome.report)?;
            println!("report written to {}", path.display());
        }
        None => print!("{}", outcome.report),
    }
    if let (Some(path), Some(csv)) = (&csv_path, &outcome.csv) {
        write_artifact(path, csv)?;
        println!("csv written to {}", path.display());
    }
    Ok(outcome.exit)
}

fn write_artifact(path: &PathBuf, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory `{}`", parent.display()))?;
        }
    }
    fs::write(path, content).with_context(|| format!("cannot write `{}`", path.display()))
}

struct Outcome {
    exit: i32,
    report: String,
    csv: Option<String>,
}

// ---------------------------------------------------------------------------
// model and mechanism assembly
// ---------------------------------------------------------------------------

/// Library-level form of the scenario's model. For a pricing model paired
/// with a pricing mechanism, the mechanism's prices define the payment caps.
enum BuiltModel {
    RandomAccess(RandomAccessSpec),
    Pricing(PricingSpec),
    Asymmetric(AsymmetricSpec),
    Finite(FiniteTabulatedSpec),
}

impl BuiltModel {
    fn game(&self) -> Result<InterventionGame> {
        let game = match self {
            BuiltModel::RandomAccess(spec) => random_access_game(spec),
            BuiltModel::Pricing(spec) => pricing_game(spec),
            BuiltModel::Asymmetric(spec) => asymmetric_game(spec),
            BuiltModel::Finite(spec) => finite_tabulated_game(spec),
        }?;
        Ok(game)
    }

    fn describe(&self) -> String {
        match self {
            BuiltModel::RandomAccess(s) => format!(
                "random access: {} users, gamma {:?}, benefits [{}]",
                s.num_users(),
                s.gamma,
                join_benefits(&s.benefits)
            ),
            BuiltModel::Pricing(s) => format!(
                "pricing: {} users, gamma {:?}, benefits [{}], prices {:?}",
                s.num_users(),
                s.gamma,
                join_benefits(&s.benefits),
                s.prices
            ),
            BuiltModel::Asymmetric(s) => format!(
                "asymmetric ({}): {} users",
                match s.variant {
                    AsymmetricVariant::Additive { .. } => "additive",
                    AsymmetricVariant::Multiplicative => "multiplicative",
                },
                s.benefits.len()
            ),
            BuiltModel::Finite(s) => format!(
                "finite tabulated: {} users, {} manager actions, {} profiles",
                s.user_actions.len(),
                s.manager_actions.len(),
                s.num_profiles()
            ),
        }
    }
}

fn join_benefits(benefits: &[BenefitFunction]) -> String {
    benefits.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn build_model(model: &ModelSpec, mechanism: Option<&MechanismSpec>) -> Result<BuiltModel> {
    Ok(match model {
        ModelSpec::RandomAccess { gamma, benefits } => {
            BuiltModel::RandomAccess(RandomAccessSpec::new(gamma.clone(), benefits.clone())?)
        }
        ModelSpec::Pricing { gamma, benefits, prices } => {
            // a pricing mechanism's prices set the payment caps, so the rule
            // never pays outside the manager's action space
            let effective = match mechanism {
                Some(MechanismSpec::Pricing { prices }) => prices.clone(),
                _ => prices.clone(),
            };
            BuiltModel::Pricing(PricingSpec::new(gamma.clone(), benefits.clone(), effective)?)
        }
        ModelSpec::Asymmetric {
            additive,
            objective,
            benefits,
            payment_cap,
            cost,
            weights,
        } => {
            let variant = if *additive {
                AsymmetricVariant::Additive { payment_cap: *payment_cap }
            } else {
                if payment_cap.is_some() {
                    bail!("payment_cap only applies to the additive variant");
                }
                for b in benefits {
                    if b.value(0.0) < 0.0 {
                        bail!(
                            "multiplicative intervention needs nonnegative benefits, but {b} is negative at 0"
                        );
                    }
                }
                AsymmetricVariant::Multiplicative
            };
            let objective = match objective.as_str() {
                "benevolent" => ManagerObjective::Benevolent,
                "self_interested" => ManagerObjective::SelfInterested,
                "total_welfare" => ManagerObjective::TotalWelfare,
                other => bail!("unknown objective `{other}`"),
            };
            let unit = ActionSpace::interval(0.0, 1.0).expect("static interval");
            let cost = *cost;
            BuiltModel::Asymmetric(AsymmetricSpec {
                variant,
                objective,
                user_spaces: vec![unit; benefits.len()],
                benefits: benefits
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let b = b.clone();
                        profile_fn(move |a: &[f64]| b.value(a[i]))
                    })
                    .collect(),
                operating_cost: profile_fn(move |_| cost),
                weights: weights.clone(),
            })
        }
        ModelSpec::Finite {
            user_actions,
            manager_actions,
            user_tables,
            manager_table,
            weights,
        } => BuiltModel::Finite(FiniteTabulatedSpec {
            user_actions: user_actions.clone(),
            manager_actions: manager_actions.clone(),
            user_tables: user_tables.clone(),
            manager_table: manager_table.clone(),
            weights: weights.clone(),
        }),
    })
}

fn build_mechanism(
    spec: &MechanismSpec,
    game: &InterventionGame,
    model: &BuiltModel,
) -> Result<InterventionMechanism> {
    let mechanism = match spec {
        MechanismSpec::Constant { action } => constant_vector(action.clone(), game.bounds())?,
        MechanismSpec::MaxPunishment { target } => {
            max_punishment(ActionProfile::from(target.clone()), game.bounds())?
        }
        MechanismSpec::Affine { target, rates } => {
            let target = ActionProfile::from(target.clone());
            let rates = match rates {
                Some(r) => r.clone(),
                None => compute_affine_rates(game, &target)?,
            };
            affine(target, rates, game.bounds())?
        }
        MechanismSpec::Pricing { prices } => match model {
            BuiltModel::Pricing(spec) => pricing_mechanism(spec, prices)?,
            _ => bail!("a pricing mechanism needs the pricing model"),
        },
        MechanismSpec::Tabulated { rows } => tabulated(rows.clone())?,
    };
    Ok(mechanism)
}

// ---------------------------------------------------------------------------
// shared rendering
// ---------------------------------------------------------------------------

/// 17 significant digits; CSV output must be byte-stable across runs.
fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn profile_header(n: usize) -> String {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("a_{i}")).collect();
    cols.push("manager_value".into());
    cols.join(",")
}

fn verdict_line(positive: bool, yes: &str, no: &str) -> String {
    if positive {
        format!("verdict: {yes} (exit 0)\n")
    } else {
        format!("verdict: {no} (exit 1)\n")
    }
}

/// The profile a verify-style task checks: explicit `profile =`, else the
/// mechanism's own target.
fn implied_profile(task: &TaskSpec, mechanism: &MechanismSpec, kind: TaskKind) -> Result<ActionProfile> {
    if let Some(p) = &task.profile {
        return Ok(ActionProfile::from(p.clone()));
    }
    mechanism
        .target()
        .map(|t| ActionProfile::from(t.to_vec()))
        .ok_or_else(|| {
            anyhow!(
                "task {} needs `profile = ...` because the mechanism has no target",
                kind.name()
            )
        })
}

fn require_mechanism(scenario: &Scenario, kind: TaskKind) -> Result<&MechanismSpec> {
    scenario
        .mechanism
        .as_ref()
        .ok_or_else(|| anyhow!("scenario has no [mechanism] block, but task {} needs one", kind.name()))
}

fn cap_guidance(e: Error) -> anyhow::Error {
    match e {
        Error::EnumerationCap { .. } => anyhow!("{e}; lower --grid or sweep fewer axes"),
        other => anyhow!(other),
    }
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

fn execute(scenario: &Scenario, args: &Args) -> Result<Outcome> {
    let model = build_model(&scenario.model, scenario.mechanism.as_ref())?;
    let game = model.game()?;
    let grid = resolve_grid(scenario, args, game.num_users())?;

    let mut header = String::new();
    let _ = writeln!(header, "model: {}", model.describe());
    let _ = writeln!(
        header,
        "grid: {} points per user axis, {} refinement rounds",
        grid.resolution, grid.refinement_rounds
    );
    header.push_str(&audit_line(&game, scenario.output.seed));

    let (exit, body, csv) = match scenario.task.kind {
        TaskKind::Verify => run_verify(scenario, &model, &game, &grid)?,
        TaskKind::Solve => run_solve(&game, &grid)?,
        TaskKind::DesignAffine => run_design_affine(scenario, &game, &grid)?,
        TaskKind::StrongCheck => run_strong_check(scenario, &model, &game, &grid)?,
        TaskKind::Maximin => run_maximin(scenario, &model, &game, &grid)?,
        TaskKind::Robustness => run_robustness(scenario, &grid)?,
        TaskKind::Prop4 => run_prop4(scenario, &game)?,
        TaskKind::Sweep => run_sweep(scenario, &model, &game, &grid)?,
    };
    Ok(Outcome {
        exit,
        report: format!("{header}\n{body}"),
        csv,
    })
}

/// Flag > task block > environment > per-user-count default.
fn resolve_grid(scenario: &Scenario, args: &Args, num_users: usize) -> Result<GridSpec> {
    let resolution = match (args.grid, scenario.task.grid) {
        (Some(r), _) => r,
        (None, Some(r)) => r,
        (None, None) => match std::env::var(GRID_ENV_VAR) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{GRID_ENV_VAR}=`{v}` is not a grid resolution"))?,
            Err(_) => GridSpec::for_users(num_users).resolution,
        },
    };
    let rounds = args.refine.or(scenario.task.refine).unwrap_or(2);
    let grid = GridSpec::new(resolution).with_refinement(rounds, 0.1);
    grid.validate()?;
    Ok(grid)
}

/// The ordering audit runs on every task; it informs, it never gates.
fn audit_line(game: &InterventionGame, seed: u64) -> String {
    match game.validate_assumption1_seeded(AUDIT_SAMPLES, seed) {
        Ok(report) if report.passed() => format!(
            "intervention ordering audit: pass ({} samples, seed {seed}, slack in [{:.3e}, {:.3e}])\n",
            report.samples, report.min_slack, report.max_slack
        ),
        Ok(report) => format!("intervention ordering audit: FLAGGED\n{report}"),
        Err(e) => format!("intervention ordering audit: skipped ({e})\n"),
    }
}

fn support_csv(report: &SupportReport) -> String {
    let mut csv = String::from("user,best_deviation,gain\n");
    for d in &report.deviations {
        let _ = writeln!(csv, "{},{},{}", d.user + 1, fmt_num(d.best_deviation), fmt_num(d.gain));
    }
    csv
}

fn run_verify(
    scenario: &Scenario,
    model: &BuiltModel,
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<(i32, String, Option<String>)> {
    let spec = require_mechanism(scenario, TaskKind::Verify)?;
    let mechanism = build_mechanism(spec, game, model)?;
    let profile = implied_profile(&scenario.task, spec, TaskKind::Verify)?;
    let report = supports(game, &mechanism, &profile, grid)?;
    let mut body = String::new();
    let _ = writeln!(body, "task: verify");
    let _ = writeln!(body, "mechanism: {}", mechanism.label());
    let _ = write!(body, "{report}");
    body.push_str(&verdict_line(report.supported, "SUPPORTED", "NOT SUPPORTED"));
    let exit = i32::from(!report.supported);
    Ok((exit, body, Some(support_csv(&report))))
}

fn run_solve(game: &InterventionGame, grid: &GridSpec) -> Result<(i32, String, Option<String>)> {
    let mut body = String::from("task: solve\n");
    let header = profile_header(game.num_users());
    match find_intervention_equilibrium(game, grid) {
        Ok(result) => {
            let _ = writeln!(body, "equilibrium profile: {}", result.profile);
            let _ = writeln!(body, "manager value: {}", result.manager_value);
            let _ = writeln!(body, "candidates examined: {}", result.candidates_examined);
            let _ = write!(body, "verification: {}", result.verification);
            body.push_str("verdict: EQUILIBRIUM FOUND (exit 0)\n");
            let row: Vec<String> = result
                .profile
                .as_slice()
                .iter()
                .copied()
                .chain(std::iter::once(result.manager_value))
                .map(fmt_num)
                .collect();
            Ok((0, body, Some(format!("{header}\n{}\n", row.join(",")))))
        }
        Err(Error::NoSupportableProfile) => {
            body.push_str("no supportable profile on this grid\n");
            body.push_str("verdict: NO EQUILIBRIUM (exit 1)\n");
            Ok((1, body, Some(format!("{header}\n"))))
        }
        Err(e) => Err(cap_guidance(e)),
    }
}

/// Worst finite margin across a user's non-vacuous second-order checks.
fn worst_finite_margin(report: &Prop4Report, user: usize) -> Result<f64> {
    let margin = report.users[user]
        .checks
        .iter()
        .filter(|c| !c.vacuous)
        .map(|c| c.worst_margin)
        .fold(f64::INFINITY, f64::min);
    if !margin.is_finite() {
        bail!("user {} has no non-vacuous condition to report", user + 1);
    }
    Ok(margin)
}

fn design_csv(report: &Prop4Report, rates: &[f64]) -> Result<String> {
    let mut csv = String::from("user,rate,worst_margin\n");
    for (i, rate) in rates.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", i + 1, fmt_num(*rate), fmt_num(worst_finite_margin(report, i)?));
    }
    Ok(csv)
}

fn run_design_affine(
    scenario: &Scenario,
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<(i32, String, Option<String>)> {
    let target = ActionProfile::from(
        scenario.task.target.clone().expect("parser requires target for design-affine"),
    );
    let rates = compute_affine_rates(game, &target)?;
    let conditions = verify_prop4_conditions(game, &target, &rates)?;
    let mechanism = affine(target.clone(), rates.clone(), game.bounds())?;
    let support = supports(game, &mechanism, &target, grid)?;
    let mut body = String::new();
    let _ = writeln!(body, "task: design-affine");
    let _ = writeln!(body, "target: {target}");
    let _ = writeln!(body, "rates: {rates:?}");
    let _ = write!(body, "{conditions}");
    let _ = write!(body, "support audit: {support}");
    let positive = conditions.passed && support.supported;
    body.push_str(&verdict_line(positive, "DESIGN HOLDS", "DESIGN REJECTED"));
    let csv = design_csv(&conditions, &rates)?;
    Ok((i32::from(!positive), body, Some(csv)))
}

fn run_strong_check(
    scenario: &Scenario,
    model: &BuiltModel,
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<(i32, String, Option<String>)> {
    let spec = require_mechanism(scenario, TaskKind::StrongCheck)?;
    let mechanism = build_mechanism(spec, game, model)?;
    let profile = implied_profile(&scenario.task, spec, TaskKind::StrongCheck)?;
    let (unique, others) = strongly_supports(game, &mechanism, &profile, grid)
        .map_err(cap_guidance)?;
    let mut body = String::new();
    let _ = writeln!(body, "task: strong-check");
    let _ = writeln!(body, "mechanism: {}", mechanism.label());
    let _ = writeln!(body, "profile: {profile}");
    if unique {
        let _ = writeln!(body, "no other grid equilibrium of the induced game");
    } else {
        let _ = writeln!(body, "other grid equilibria: {}", others.len());
        for other in others.iter().take(12) {
            let _ = writeln!(body, "  {other}");
        }
        if others.len() > 12 {
            let _ = writeln!(body, "  ... and {} more", others.len() - 12);
        }
    }
    body.push_str(&verdict_line(unique, "STRONGLY SUPPORTED", "NOT UNIQUE"));
    let mut csv: String = (1..=game.num_users())
        .map(|i| format!("a_{i}"))
        .collect::<Vec<_>>()
        .join(",");
    csv.push('\n');
    for other in &others {
        let row: Vec<String> = other.as_slice().iter().copied().map(fmt_num).collect();
        let _ = writeln!(csv, "{}", row.join(","));
    }
    Ok((i32::from(!unique), body, Some(csv)))
}

fn run_maximin(
    scenario: &Scenario,
    model: &BuiltModel,
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<(i32, String, Option<String>)> {
    let actions = scenario.task.actions.clone().expect("parser requires actions for maximin");
    if actions.is_empty() {
        bail!("maximin needs at least one constant action");
    }
    let mut family = Vec::new();
    for a in &actions {
        let action = vec![*a; game.bounds().dim()];
        family.push(constant_vector(action, game.bounds())?);
    }
    if let Some(spec) = &scenario.mechanism {
        family.push(build_mechanism(spec, game, model)?);
    }
    let result = maximin_design(game, &family, grid).map_err(cap_guidance)?;
    let mut body = String::new();
    let _ = writeln!(body, "task: maximin over {} mechanisms", family.len());
    for (k, worst) in result.per_mechanism.iter().enumerate() {
        match worst {
            Some(v) => {
                let _ = writeln!(body, "  {}. {}: worst value {v}", k + 1, family[k].label());
            }
            None => {
                let _ = writeln!(body, "  {}. {}: no grid equilibrium", k + 1, family[k].label());
            }
        }
    }
    let _ = writeln!(
        body,
        "winner: {} ({}), worst value {:?}",
        result.best_index + 1,
        family[result.best_index].label(),
        result.worst_value
    );
    body.push_str("verdict: DESIGN CHOSEN (exit 0)\n");
    let mut csv = String::from("mechanism_index,worst_value\n");
    for (k, worst) in result.per_mechanism.iter().enumerate() {
        let value = worst.map(fmt_num).unwrap_or_default();
        let _ = writeln!(csv, "{},{value}", k + 1);
    }
    Ok((0, body, Some(csv)))
}

fn run_robustness(scenario: &Scenario, grid: &GridSpec) -> Result<(i32, String, Option<String>)> {
    let ModelSpec::RandomAccess { gamma, .. } = &scenario.model else {
        bail!("robustness runs on the random_access model");
    };
    let target = ActionProfile::from(
        scenario.task.target.clone().expect("parser requires target for robustness"),
    );
    let families = scenario.task.families.clone().expect("parser requires families");
    let report = robustness_experiment(&target, gamma, &families, grid)?;
    let mut body = String::new();
    let _ = writeln!(body, "task: robustness at target {target}");
    let _ = writeln!(body, "jamming ramp rates: {:?}", report.rates);
    let _ = writeln!(body, "prices designed under family 1: {:?}", report.fixed_prices);
    let mut csv = String::from("family,mechanism,supported,max_gain\n");
    for (k, row) in report.rows.iter().enumerate() {
        let _ = writeln!(body, "family {} ({}):", k + 1, row.family);
        let mut line = |name: &str, sup: &SupportReport| {
            let _ = writeln!(
                body,
                "  {name}: {}, max gain {:.3e}",
                if sup.supported { "supported" } else { "NOT supported" },
                sup.max_gain()
            );
            let _ = writeln!(
                csv,
                "{},{name},{},{}",
                k + 1,
                i32::from(sup.supported),
                fmt_num(sup.max_gain())
            );
        };
        line("affine", &row.affine);
        line("fixed_prices", &row.fixed_prices);
        line("redesigned_prices", &row.redesigned_prices.support);
        if row.redesigned_prices.concavity_warning {
            let _ = writeln!(
                body,
                "  note: family {} is not concave; first-order prices are not guaranteed to support",
                k + 1
            );
        }
    }
    let robust = report.affine_robust();
    let _ = writeln!(
        body,
        "affine ramp robust under every family: {}",
        if robust { "yes" } else { "no" }
    );
    body.push_str(&verdict_line(robust, "ROBUST", "NOT ROBUST"));
    Ok((i32::from(!robust), body, Some(csv)))
}

fn run_prop4(scenario: &Scenario, game: &InterventionGame) -> Result<(i32, String, Option<String>)> {
    let target = ActionProfile::from(
        scenario.task.target.clone().expect("parser requires target for prop4"),
    );
    // explicit affine rates in the mechanism block take precedence; anything
    // else designs them from the model
    let rates = match &scenario.mechanism {
        Some(MechanismSpec::Affine { rates: Some(r), .. }) => r.clone(),
        _ => compute_affine_rates(game, &target)?,
    };
    let report = verify_prop4_conditions(game, &target, &rates)?;
    let mut body = String::new();
    let _ = writeln!(body, "task: prop4");
    let _ = write!(body, "{report}");
    body.push_str(&verdict_line(report.passed, "CONDITIONS HOLD", "CONDITIONS FAIL"));
    let csv = design_csv(&report, &rates)?;
    Ok((i32::from(!report.passed), body, Some(csv)))
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

fn sweep_param_name(parameter: SweepParam) -> String {
    match parameter {
        SweepParam::Gamma(i) => format!("gamma_{}", i + 1),
        SweepParam::Price(i) => format!("price_{}", i + 1),
        SweepParam::Rate(i) => format!("c_{}", i + 1),
        SweepParam::Target(i) => format!("target_{}", i + 1),
    }
}

/// One sweep point: a rebuilt (game, mechanism, profile) triple.
fn sweep_point(
    scenario: &Scenario,
    base_model: &BuiltModel,
    base_game: &InterventionGame,
    parameter: SweepParam,
    value: f64,
) -> Result<(InterventionGame, InterventionMechanism, ActionProfile)> {
    let mechanism_spec = require_mechanism(scenario, TaskKind::Sweep)?;
    match parameter {
        SweepParam::Gamma(i) => {
            let rebuilt = match base_model {
                BuiltModel::RandomAccess(s) => {
                    let mut s = s.clone();
                    s.gamma[i] = value;
                    BuiltModel::RandomAccess(RandomAccessSpec::new(s.gamma, s.benefits)?)
                }
                BuiltModel::Pricing(s) => {
                    let mut s = s.clone();
                    s.gamma[i] = value;
                    BuiltModel::Pricing(PricingSpec::new(s.gamma, s.benefits, s.prices)?)
                }
                _ => bail!("gamma sweeps need the random_access or pricing model"),
            };
            let game = rebuilt.game()?;
            let mechanism = build_mechanism(mechanism_spec, &game, &rebuilt)?;
            let profile = implied_profile(&scenario.task, mechanism_spec, TaskKind::Sweep)?;
            Ok((game, mechanism, profile))
        }
        SweepParam::Price(i) => {
            let BuiltModel::Pricing(s) = base_model else {
                bail!("price sweeps need the pricing model");
            };
            let MechanismSpec::Pricing { prices } = mechanism_spec else {
                bail!("price sweeps need a pricing mechanism");
            };
            let mut prices = prices.clone();
            prices[i] = value;
            let spec = PricingSpec::new(s.gamma.clone(), s.benefits.clone(), prices.clone())?;
            let game = pricing_game(&spec)?;
            let mechanism = pricing_mechanism(&spec, &prices)?;
            let profile = implied_profile(&scenario.task, mechanism_spec, TaskKind::Sweep)?;
            Ok((game, mechanism, profile))
        }
        SweepParam::Rate(i) => {
            let MechanismSpec::Affine { target, rates } = mechanism_spec else {
                bail!("rate sweeps need an affine mechanism");
            };
            let target = ActionProfile::from(target.clone());
            let mut rates = match rates {
                Some(r) => r.clone(),
                None => compute_affine_rates(base_game, &target)?,
            };
            rates[i] = value;
            let mechanism = affine(target.clone(), rates, base_game.bounds())?;
            let profile = scenario
                .task
                .profile
                .clone()
                .map_or(target, ActionProfile::from);
            Ok((base_game.clone(), mechanism, profile))
        }
        SweepParam::Target(i) => {
            let (mut target, explicit_rates) = match mechanism_spec {
                MechanismSpec::Affine { target, rates } => (target.clone(), rates.clone()),
                MechanismSpec::MaxPunishment { target } => (target.clone(), Some(Vec::new())),
                _ => bail!("target sweeps need an affine or max_punishment mechanism"),
            };
            target[i] = value;
            let target = ActionProfile::from(target);
            let mechanism = match mechanism_spec {
                MechanismSpec::MaxPunishment { .. } => {
                    max_punishment(target.clone(), base_game.bounds())?
                }
                _ => {
                    let rates = match explicit_rates {
                        Some(r) if !r.is_empty() => r,
                        _ => compute_affine_rates(base_game, &target)?,
                    };
                    affine(target.clone(), rates, base_game.bounds())?
                }
            };
            // sweeping the target means verifying each swept target
            Ok((base_game.clone(), mechanism, target))
        }
    }
}

fn run_sweep(
    scenario: &Scenario,
    model: &BuiltModel,
    game: &InterventionGame,
    grid: &GridSpec,
) -> Result<(i32, String, Option<String>)> {
    let sweep = scenario.task.sweep.as_ref().expect("parser requires sweep spec");
    let name = sweep_param_name(sweep.parameter);
    let mut body = String::new();
    let _ = writeln!(body, "task: sweep {name} over {} points", sweep.values.len());
    let mut csv = String::from("param_value,support,max_gain,manager_value\n");
    for &value in &sweep.values {
        let (point_game, mechanism, profile) =
            sweep_point(scenario, model, game, sweep.parameter, value)?;
        let report = supports(&point_game, &mechanism, &profile, grid)?;
        let manager_value = point_game.expected_utility(&mechanism, Player::Manager, &profile)?;
        let _ = writeln!(
            body,
            "  {name} = {value}: {}, max gain {:.3e}, manager value {manager_value:.6}",
            if report.supported { "supported" } else { "NOT supported" },
            report.max_gain()
        );
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_num(value),
            i32::from(report.supported),
            fmt_num(report.max_gain()),
            fmt_num(manager_value)
        );
    }
    body.push_str("verdict: SWEEP COMPLETE (exit 0)\n");
    Ok((0, body, Some(csv)))
}
