//! Scenario file parsing. The format is a flat, sectioned key-value text:
//!
//! ```text
//! # comment
//! [model]
//! kind = random_access
//! gamma = 1.0, 1.0
//! benefits = identity, identity
//!
//! [mechanism]
//! variant = max_punishment
//! target = 0.5, 0.5
//!
//! [task]
//! kind = verify
//!
//! [output]
//! csv = out/verify.csv
//! ```
//!
//! Sections: `[model]` (required), `[mechanism]` (optional), `[task]`
//! (required), `[output]` (optional). Numbers are decimal, sequences are
//! comma-separated, and benefit-family lists separate families with `|`.
//! Unknown sections or keys are errors naming the offending line, so typos
//! fail loudly instead of being ignored.

use std::cell::Cell;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use intervention::models::BenefitFunction;

// ---------------------------------------------------------------------------
// typed scenario
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct Scenario {
    pub model: ModelSpec,
    pub mechanism: Option<MechanismSpec>,
    pub task: TaskSpec,
    pub output: OutputSpec,
}

#[derive(Debug)]
pub enum ModelSpec {
    RandomAccess {
        gamma: Vec<f64>,
        benefits: Vec<BenefitFunction>,
    },
    Pricing {
        gamma: Vec<f64>,
        benefits: Vec<BenefitFunction>,
        prices: Vec<f64>,
    },
    /// Per-user intervention with own-action benefits `g_i(a) = U_i(a_i)`.
    Asymmetric {
        additive: bool,
        objective: String,
        benefits: Vec<BenefitFunction>,
        payment_cap: Option<f64>,
        cost: f64,
        weights: Option<Vec<f64>>,
    },
    Finite {
        user_actions: Vec<Vec<f64>>,
        manager_actions: Vec<f64>,
        user_tables: Vec<Vec<f64>>,
        manager_table: Option<Vec<f64>>,
        weights: Option<Vec<f64>>,
    },
}

impl ModelSpec {
    pub fn num_users(&self) -> usize {
        match self {
            ModelSpec::RandomAccess { gamma, .. } | ModelSpec::Pricing { gamma, .. } => gamma.len(),
            ModelSpec::Asymmetric { benefits, .. } => benefits.len(),
            ModelSpec::Finite { user_actions, .. } => user_actions.len(),
        }
    }
}

#[derive(Debug)]
pub enum MechanismSpec {
    Constant { action: Vec<f64> },
    MaxPunishment { target: Vec<f64> },
    /// `rates: None` means design them from the model (`rates = auto`).
    Affine { target: Vec<f64>, rates: Option<Vec<f64>> },
    Pricing { prices: Vec<f64> },
    Tabulated { rows: Vec<Vec<f64>> },
}

impl MechanismSpec {
    /// Target profile implied by the mechanism, where it has one.
    pub fn target(&self) -> Option<&[f64]> {
        match self {
            MechanismSpec::MaxPunishment { target } | MechanismSpec::Affine { target, .. } => {
                Some(target)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Verify,
    Solve,
    DesignAffine,
    StrongCheck,
    Maximin,
    Robustness,
    Prop4,
    Sweep,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Verify => "verify",
            TaskKind::Solve => "solve",
            TaskKind::DesignAffine => "design-affine",
            TaskKind::StrongCheck => "strong-check",
            TaskKind::Maximin => "maximin",
            TaskKind::Robustness => "robustness",
            TaskKind::Prop4 => "prop4",
            TaskKind::Sweep => "sweep",
        }
    }
}

/// Which scalar a sweep varies (user index is 0-based internally, 1-based in
/// scenario files).
#[derive(Clone, Copy, Debug)]
pub enum SweepParam {
    Gamma(usize),
    Price(usize),
    Rate(usize),
    Target(usize),
}

#[derive(Debug)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub grid: Option<usize>,
    pub refine: Option<usize>,
    pub profile: Option<Vec<f64>>,
    pub target: Option<Vec<f64>>,
    pub families: Option<Vec<Vec<BenefitFunction>>>,
    /// Constant-mechanism family for `maximin`.
    pub actions: Option<Vec<f64>>,
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Default)]
pub struct OutputSpec {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// raw sectioned key-value layer
// ---------------------------------------------------------------------------

struct Entry {
    line: usize,
    key: String,
    value: String,
    used: Cell<bool>,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    /// Marks the key used and returns its value.
    fn take(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.key == key).map(|e| {
            e.used.set(true);
            e.value.as_str()
        })
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.take(key)
            .ok_or_else(|| anyhow!("[{}] (line {}) is missing the `{}` key", self.name, self.line, key))
    }

    /// Errors on the first key nothing consumed; run after all `take`s.
    fn finish(&self) -> Result<()> {
        if let Some(e) = self.entries.iter().find(|e| !e.used.get()) {
            bail!("unknown key `{}` in [{}] (line {})", e.key, self.name, e.line);
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("line {line}: unterminated section header `{trimmed}`"))?
                .trim();
            if !matches!(name, "model" | "mechanism" | "task" | "output") {
                bail!("line {line}: unknown section [{name}] (expected model, mechanism, task, or output)");
            }
            if sections.iter().any(|s| s.name == name) {
                bail!("line {line}: duplicate section [{name}]");
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| anyhow!("line {line}: expected `key = value` or a [section] header, got `{trimmed}`"))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| anyhow!("line {line}: `key = value` before any [section] header"))?;
        let key = key.trim().to_string();
        if section.entries.iter().any(|e| e.key == key) {
            bail!("line {line}: duplicate key `{key}` in [{}]", section.name);
        }
        section.entries.push(Entry {
            line,
            key,
            value: value.trim().to_string(),
            used: Cell::new(false),
        });
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// value parsers
// ---------------------------------------------------------------------------

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(v)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().with_context(|| format!("`{s}` is not a nonnegative integer"))
}

/// Comma-separated numbers; an empty value is an empty list.
fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

/// One benefit family member: `identity`, `power(p)`, `log(delta)`, or
/// `satexp(lambda)`.
fn parse_benefit(s: &str) -> Result<BenefitFunction> {
    let s = s.trim();
    if s == "identity" {
        return Ok(BenefitFunction::Identity);
    }
    let call = |name: &str| -> Option<Result<f64>> {
        s.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('('))
            .and_then(|rest| rest.strip_suffix(')'))
            .map(parse_f64)
    };
    if let Some(arg) = call("power") {
        return BenefitFunction::power(arg?).map_err(Into::into);
    }
    if let Some(arg) = call("log") {
        return BenefitFunction::log_shifted(arg?).map_err(Into::into);
    }
    if let Some(arg) = call("satexp") {
        return BenefitFunction::saturating_exp(arg?).map_err(Into::into);
    }
    bail!("`{s}` is not a benefit function (expected identity, power(p), log(delta), or satexp(lambda))");
}

fn parse_benefits(s: &str) -> Result<Vec<BenefitFunction>> {
    s.split(',').map(parse_benefit).collect()
}

/// A single benefit entry broadcasts to all n users.
fn broadcast(mut benefits: Vec<BenefitFunction>, n: usize, what: &str) -> Result<Vec<BenefitFunction>> {
    if benefits.len() == 1 && n > 1 {
        let b = benefits[0].clone();
        benefits = vec![b; n];
    }
    if benefits.len() != n {
        bail!("{what} lists {} benefit functions for {n} users", benefits.len());
    }
    Ok(benefits)
}

/// `name_K` with a 1-based user index, e.g. `c_1` or `target_2`.
fn parse_indexed(s: &str, n: usize) -> Result<(String, usize)> {
    let (name, idx) = s
        .rsplit_once('_')
        .ok_or_else(|| anyhow!("`{s}` is not an indexed parameter like gamma_1"))?;
    let idx: usize = idx.parse().with_context(|| format!("`{s}` has no user index"))?;
    if idx == 0 || idx > n {
        bail!("`{s}` indexes user {idx}, but the model has {n} users");
    }
    Ok((name.to_string(), idx - 1))
}

// ---------------------------------------------------------------------------
// section -> typed spec
// ---------------------------------------------------------------------------

fn parse_model(section: &Section) -> Result<ModelSpec> {
    let kind = section.require("kind")?.to_string();
    let model = match kind.as_str() {
        "random_access" | "pricing" => {
            let gamma = parse_numbers(section.require("gamma")?)?;
            let n = gamma.len();
            let benefits = match section.take("benefits") {
                Some(v) => broadcast(parse_benefits(v)?, n, "[model] benefits")?,
                None => vec![BenefitFunction::Identity; n],
            };
            if kind == "random_access" {
                ModelSpec::RandomAccess { gamma, benefits }
            } else {
                let prices = parse_numbers(section.require("prices")?)?;
                ModelSpec::Pricing { gamma, benefits, prices }
            }
        }
        "asymmetric" => {
            let benefits = parse_benefits(section.require("benefits")?)?;
            let additive = match section.require("variant")? {
                "additive" => true,
                "multiplicative" => false,
                other => bail!("[model] variant `{other}` (expected additive or multiplicative)"),
            };
            let objective = section.take("objective").unwrap_or("benevolent").to_string();
            if !matches!(objective.as_str(), "benevolent" | "self_interested" | "total_welfare") {
                bail!("[model] objective `{objective}` (expected benevolent, self_interested, or total_welfare)");
            }
            let payment_cap = section.take("payment_cap").map(parse_f64).transpose()?;
            let cost = section.take("cost").map(parse_f64).transpose()?.unwrap_or(0.0);
            let weights = section.take("weights").map(parse_numbers).transpose()?;
            ModelSpec::Asymmetric {
                additive,
                objective,
                benefits,
                payment_cap,
                cost,
                weights,
            }
        }
        "finite_tabulated" => {
            let mut user_actions = Vec::new();
            while let Some(v) = section.take(&format!("user_actions_{}", user_actions.len() + 1)) {
                user_actions.push(parse_numbers(v)?);
            }
            if user_actions.is_empty() {
                bail!("[model] finite_tabulated needs user_actions_1, user_actions_2, ...");
            }
            let manager_actions = parse_numbers(section.require("manager_actions")?)?;
            let mut user_tables = Vec::new();
            for i in 1..=user_actions.len() {
                user_tables.push(parse_numbers(section.require(&format!("table_{i}"))?)?);
            }
            let manager_table = section.take("manager_table").map(parse_numbers).transpose()?;
            let weights = section.take("weights").map(parse_numbers).transpose()?;
            ModelSpec::Finite {
                user_actions,
                manager_actions,
                user_tables,
                manager_table,
                weights,
            }
        }
        other => bail!(
            "[model] kind `{other}` (expected random_access, pricing, asymmetric, or finite_tabulated)"
        ),
    };
    section.finish()?;
    Ok(model)
}

fn parse_mechanism(section: &Section) -> Result<MechanismSpec> {
    let spec = match section.require("variant")? {
        "constant" => MechanismSpec::Constant {
            action: parse_numbers(section.require("action")?)?,
        },
        "max_punishment" => MechanismSpec::MaxPunishment {
            target: parse_numbers(section.require("target")?)?,
        },
        "affine" => {
            let target = parse_numbers(section.require("target")?)?;
            let rates = match section.require("rates")? {
                "auto" => None,
                list => Some(parse_numbers(list)?),
            };
            MechanismSpec::Affine { target, rates }
        }
        "pricing" => MechanismSpec::Pricing {
            prices: parse_numbers(section.require("prices")?)?,
        },
        "tabulated" => MechanismSpec::Tabulated {
            rows: section
                .require("table")?
                .split('|')
                .map(parse_numbers)
                .collect::<Result<_>>()?,
        },
        other => bail!(
            "[mechanism] variant `{other}` (expected constant, max_punishment, affine, pricing, or tabulated)"
        ),
    };
    section.finish()?;
    Ok(spec)
}

fn parse_task(section: &Section, num_users: usize) -> Result<TaskSpec> {
    let kind = match section.require("kind")? {
        "verify" => TaskKind::Verify,
        "solve" => TaskKind::Solve,
        "design-affine" => TaskKind::DesignAffine,
        "strong-check" => TaskKind::StrongCheck,
        "maximin" => TaskKind::Maximin,
        "robustness" => TaskKind::Robustness,
        "prop4" => TaskKind::Prop4,
        "sweep" => TaskKind::Sweep,
        other => bail!(
            "[task] kind `{other}` (expected verify, solve, design-affine, strong-check, maximin, robustness, prop4, or sweep)"
        ),
    };
    let grid = section.take("grid").map(parse_usize).transpose()?;
    let refine = section.take("refine").map(parse_usize).transpose()?;
    let mut task = TaskSpec {
        kind,
        grid,
        refine,
        profile: None,
        target: None,
        families: None,
        actions: None,
        sweep: None,
    };
    match kind {
        TaskKind::Verify | TaskKind::StrongCheck => {
            task.profile = section.take("profile").map(parse_numbers).transpose()?;
        }
        TaskKind::Solve => {}
        TaskKind::DesignAffine | TaskKind::Prop4 => {
            task.target = Some(parse_numbers(section.require("target")?)?);
        }
        TaskKind::Maximin => {
            task.actions = Some(parse_numbers(section.require("actions")?)?);
        }
        TaskKind::Robustness => {
            task.target = Some(parse_numbers(section.require("target")?)?);
            let families = section
                .require("families")?
                .split('|')
                .map(|f| broadcast(parse_benefits(f)?, num_users, "[task] families"))
                .collect::<Result<Vec<_>>>()?;
            if families.is_empty() {
                bail!("[task] families must list at least one benefit family");
            }
            task.families = Some(families);
        }
        TaskKind::Sweep => {
            let raw = section.require("parameter")?;
            let (name, user) = parse_indexed(raw, num_users)?;
            let parameter = match name.as_str() {
                "gamma" => SweepParam::Gamma(user),
                "price" => SweepParam::Price(user),
                "c" => SweepParam::Rate(user),
                "target" => SweepParam::Target(user),
                other => bail!(
                    "sweep parameter `{other}_{}` (expected gamma_i, price_i, c_i, or target_i)",
                    user + 1
                ),
            };
            let values = match (section.take("values"), section.take("range")) {
                (Some(v), None) => parse_numbers(v)?,
                (None, Some(r)) => {
                    let parts = parse_numbers(r)?;
                    if parts.len() != 3 {
                        bail!("[task] range wants `lo, hi, count`, got {} values", parts.len());
                    }
                    let count = parts[2];
                    if count < 0.0 || count.fract() != 0.0 {
                        bail!("[task] range count must be a nonnegative integer, got {count}");
                    }
                    linspace_values(parts[0], parts[1], count as usize)
                }
                (Some(_), Some(_)) => bail!("[task] give either values or range, not both"),
                (None, None) => bail!("[task] sweep needs values = ... or range = lo, hi, count"),
            };
            task.profile = section.take("profile").map(parse_numbers).transpose()?;
            task.sweep = Some(SweepSpec { parameter, values });
        }
    }
    section.finish()?;
    Ok(task)
}

fn linspace_values(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => intervention::numerics::linspace(lo, hi, count),
    }
}

fn parse_output(section: &Section) -> Result<OutputSpec> {
    let report = section.take("report").map(PathBuf::from);
    let csv = section.take("csv").map(PathBuf::from);
    let seed = section
        .take("seed")
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("`{s}` is not a seed")))
        .transpose()?
        .unwrap_or(0);
    section.finish()?;
    Ok(OutputSpec { report, csv, seed })
}

/// Parses a scenario file's text.
pub fn parse(text: &str) -> Result<Scenario> {
    let sections = split_sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    let model_section = find("model").ok_or_else(|| anyhow!("scenario has no [model] section"))?;
    let task_section = find("task").ok_or_else(|| anyhow!("scenario has no [task] section"))?;
    let model = parse_model(model_section)?;
    let mechanism = find("mechanism").map(parse_mechanism).transpose()?;
    let task = parse_task(task_section, model.num_users())?;
    let output = find("output").map(parse_output).transpose()?.unwrap_or_default();
    Ok(Scenario {
        model,
        mechanism,
        task,
        output,
    })
}

// ===========================================================================
