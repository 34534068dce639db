//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # reference crowd at mu = 0.75
//! num_microtasks = 3
//! num_gold = 3
//! correctness_dist = uniform(0.5, 1)
//! seed = 7
//! ```
//!
//! `#` starts a comment. Unknown or repeated keys are errors. Every key but
//! `seed` has a default matching the 50-worker reference setup.

use std::fmt;
use std::str::FromStr;

use crowdvote_core::analysis::{ParamMode, SimulationSetup, DEFAULT_BRUTEFORCE_CAP, DEFAULT_ENUMERATION_CAP};
use crowdvote_core::{
    AbilityDistributions, Counting, CrowdCounts, Distribution, LikelihoodModel, MuMethod, SamplingMode, SchemeKind,
    TaskSpec,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamModeName {
    Truth,
    Estimated,
}

impl ParamModeName {
    pub fn name(self) -> &'static str {
        match self {
            Self::Truth => "truth",
            Self::Estimated => "estimated",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "truth" => Some(Self::Truth),
            "estimated" => Some(Self::Estimated),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Mean correctness; the correctness distribution becomes `U(2 mu - 1, 1)`.
    Mu,
    /// `M_0 = M_A = value` at a fixed crowd size.
    Spammers,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mu => "mu",
            Self::Spammers => "spammers",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: TaskSpec,
    pub skip_dist: Distribution,
    pub correctness_dist: Distribution,
    pub sampling_mode: SamplingMode,
    pub workers: usize,
    pub skip_all: usize,
    pub answer_all: usize,
    pub schemes: Vec<SchemeKind>,
    pub param_mode: ParamModeName,
    pub mu_method: MuMethod,
    pub likelihood: LikelihoodModel,
    /// `None` picks task-plus-gold for estimated runs, task-only otherwise.
    pub counting: Option<Counting>,
    pub trials: u64,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub enumeration_cap: u128,
    pub bruteforce_cap: u128,
}

impl ExperimentConfig {
    /// Reference setup (W = 50, N = 3, G = 3, 7 + 7 spammers, mu = 0.75).
    pub fn reference(seed: u64) -> Self {
        Self {
            spec: TaskSpec::from_microtasks(3, 3).expect("valid task"),
            skip_dist: Distribution::Uniform { low: 0.0, high: 1.0 },
            correctness_dist: Distribution::Uniform { low: 0.5, high: 1.0 },
            sampling_mode: SamplingMode::PerQuestion,
            workers: 50,
            skip_all: 7,
            answer_all: 7,
            schemes: SchemeKind::ALL.to_vec(),
            param_mode: ParamModeName::Estimated,
            mu_method: MuMethod::TrainingBased,
            likelihood: LikelihoodModel::AsPrinted,
            counting: None,
            trials: 100_000,
            seed,
            sweep: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            bruteforce_cap: DEFAULT_BRUTEFORCE_CAP,
        }
    }

    pub fn mu(&self) -> f64 {
        self.correctness_dist.mean()
    }

    pub fn m(&self) -> f64 {
        self.skip_dist.mean()
    }

    pub fn effective_counting(&self) -> Counting {
        self.counting.unwrap_or(match self.param_mode {
            ParamModeName::Estimated => Counting::TaskPlusGold,
            ParamModeName::Truth => Counting::TaskOnly,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: &str| Err(CliError::Config(m.to_string()));
        if self.workers == 0 {
            return err("workers must be positive");
        }
        if self.skip_all + self.answer_all > self.workers {
            return err("skip_all + answer_all exceeds workers");
        }
        if self.trials == 0 {
            return err("trials must be positive");
        }
        if self.schemes.is_empty() {
            return err("no scheme selected");
        }
        self.skip_dist.validate()?;
        self.correctness_dist.validate()?;
        if self.param_mode == ParamModeName::Estimated
            && self.mu_method == MuMethod::TrainingBased
            && self.spec.num_gold() == 0
        {
            return err("training-based mu estimation needs num_gold >= 1");
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return err("sweep_values is empty");
            }
            for &v in &sweep.values {
                match sweep.variable {
                    SweepVariable::Mu if !(0.5..=1.0).contains(&v) => return err("mu sweep values must lie in [0.5, 1]"),
                    SweepVariable::Spammers if v < 0.0 || v.fract() != 0.0 || !v.is_finite() => {
                        return err("spammer sweep values must be non-negative integers")
                    }
                    SweepVariable::Spammers if 2.0 * v > self.workers as f64 => {
                        return err("spammer sweep value leaves W - M < 0")
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Copy of this config at one sweep value.
    pub fn at_sweep_value(&self, variable: SweepVariable, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        c.sweep = None;
        match variable {
            SweepVariable::Mu => c.correctness_dist = Distribution::uniform(2.0 * value - 1.0, 1.0)?,
            SweepVariable::Spammers => {
                c.skip_all = value as usize;
                c.answer_all = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn counts(&self) -> CrowdCounts {
        CrowdCounts { honest: self.workers - self.skip_all - self.answer_all, skip_all: self.skip_all, answer_all: self.answer_all }
    }

    pub fn setup(&self) -> SimulationSetup {
        SimulationSetup {
            spec: self.spec,
            dists: AbilityDistributions { skip: self.skip_dist, correctness: self.correctness_dist },
            counts: self.counts(),
            sampling: self.sampling_mode,
            schemes: self.schemes.clone(),
            param_mode: match self.param_mode {
                ParamModeName::Truth => ParamMode::GroundTruth,
                ParamModeName::Estimated => ParamMode::Estimated { mu_method: self.mu_method, likelihood: self.likelihood },
            },
            counting: self.effective_counting(),
        }
    }
}

fn format_dist(d: &Distribution) -> String {
    match d {
        Distribution::Uniform { low, high } => format!("uniform({low}, {high})"),
        Distribution::PointMass(v) => format!("point({v})"),
    }
}

fn parse_dist(s: &str) -> Option<Distribution> {
    let (name, rest) = s.split_once('(')?;
    let args: Vec<f64> = rest.strip_suffix(')')?.split(',').map(|a| a.trim().parse().ok()).collect::<Option<_>>()?;
    match (name.trim(), args.as_slice()) {
        ("uniform", &[low, high]) => Some(Distribution::Uniform { low, high }),
        ("point", &[v]) => Some(Distribution::PointMass(v)),
        _ => None,
    }
}

fn sampling_name(m: SamplingMode) -> &'static str {
    match m {
        SamplingMode::PerQuestion => "per_question",
        SamplingMode::PerWorker => "per_worker",
    }
}

fn scheme_list(schemes: &[SchemeKind]) -> String {
    schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}

/// Parses `all` or a comma-separated list of scheme names.
pub fn parse_schemes(s: &str) -> Option<Vec<SchemeKind>> {
    if s.trim() == "all" {
        return Some(SchemeKind::ALL.to_vec());
    }
    s.split(',').map(|name| SchemeKind::from_name(name.trim())).collect()
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.num_classes() == 1 << self.spec.num_microtasks() {
            writeln!(f, "num_microtasks = {}", self.spec.num_microtasks())?;
        } else {
            writeln!(f, "num_classes = {}", self.spec.num_classes())?;
        }
        writeln!(f, "num_gold = {}", self.spec.num_gold())?;
        writeln!(f, "skip_dist = {}", format_dist(&self.skip_dist))?;
        writeln!(f, "correctness_dist = {}", format_dist(&self.correctness_dist))?;
        writeln!(f, "sampling_mode = {}", sampling_name(self.sampling_mode))?;
        writeln!(f, "workers = {}", self.workers)?;
        writeln!(f, "skip_all = {}", self.skip_all)?;
        writeln!(f, "answer_all = {}", self.answer_all)?;
        writeln!(f, "schemes = {}", scheme_list(&self.schemes))?;
        writeln!(f, "param_mode = {}", self.param_mode.name())?;
        writeln!(f, "mu_method = {}", self.mu_method.name())?;
        writeln!(f, "likelihood = {}", self.likelihood.name())?;
        if let Some(c) = self.counting {
            writeln!(f, "counting = {}", c.name())?;
        }
        writeln!(f, "trials = {}", self.trials)?;
        writeln!(f, "seed = {}", self.seed)?;
        if let Some(sweep) = &self.sweep {
            writeln!(f, "sweep_variable = {}", sweep.variable.name())?;
            let values: Vec<String> = sweep.values.iter().map(|v| v.to_string()).collect();
            writeln!(f, "sweep_values = {}", values.join(", "))?;
        }
        writeln!(f, "enumeration_cap = {}", self.enumeration_cap)?;
        writeln!(f, "bruteforce_cap = {}", self.bruteforce_cap)
    }
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut c = Self::reference(0);
        let mut seen: Vec<&str> = Vec::new();
        let (mut classes, mut microtasks, mut gold) = (None, None, None);
        let (mut sweep_variable, mut sweep_values) = (None, None);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fail = |message: String| CliError::ConfigLine { line, message };
            let (key, value) = content.split_once('=').ok_or_else(|| fail("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(fail(format!("duplicate key `{key}`")));
            }
            let bad = || fail(format!("invalid value `{value}` for `{key}`"));
            let int = || value.parse::<usize>().map_err(|_| bad());
            match key {
                "num_classes" => classes = Some(value.parse::<u64>().map_err(|_| bad())?),
                "num_microtasks" => microtasks = Some(int()?),
                "num_gold" => gold = Some(int()?),
                "skip_dist" => c.skip_dist = parse_dist(value).ok_or_else(bad)?,
                "correctness_dist" => c.correctness_dist = parse_dist(value).ok_or_else(bad)?,
                "sampling_mode" => {
                    c.sampling_mode = match value {
                        "per_question" => SamplingMode::PerQuestion,
                        "per_worker" => SamplingMode::PerWorker,
                        _ => return Err(bad()),
                    }
                }
                "workers" => c.workers = int()?,
                "skip_all" => c.skip_all = int()?,
                "answer_all" => c.answer_all = int()?,
                "schemes" => c.schemes = parse_schemes(value).ok_or_else(bad)?,
                "param_mode" => c.param_mode = ParamModeName::from_name(value).ok_or_else(bad)?,
                "mu_method" => c.mu_method = MuMethod::from_name(value).ok_or_else(bad)?,
                "likelihood" => c.likelihood = LikelihoodModel::from_name(value).ok_or_else(bad)?,
                "counting" => c.counting = Some(Counting::from_name(value).ok_or_else(bad)?),
                "trials" => c.trials = value.parse().map_err(|_| bad())?,
                "seed" => c.seed = value.parse().map_err(|_| bad())?,
                "sweep_variable" => {
                    sweep_variable = Some(match value {
                        "mu" => SweepVariable::Mu,
                        "spammers" => SweepVariable::Spammers,
                        _ => return Err(bad()),
                    })
                }
                "sweep_values" => {
                    let values: Vec<f64> = value.split(',').map(|v| v.trim().parse().ok()).collect::<Option<_>>().ok_or_else(bad)?;
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(bad());
                    }
                    sweep_values = Some(values);
                }
                "enumeration_cap" => c.enumeration_cap = value.parse().map_err(|_| bad())?,
                "bruteforce_cap" => c.bruteforce_cap = value.parse().map_err(|_| bad())?,
                _ => return Err(fail(format!("unknown key `{key}`"))),
            }
            seen.push(key);
        }
        if !seen.contains(&"seed") {
            return Err(CliError::Config("`seed` is mandatory".into()));
        }
        let gold = gold.unwrap_or(c.spec.num_gold());
        c.spec = match (classes, microtasks) {
            (Some(_), Some(_)) => return Err(CliError::Config("give num_classes or num_microtasks, not both".into())),
            (Some(m), None) => TaskSpec::from_classes(m, gold)?,
            (None, n) => TaskSpec::from_microtasks(n.unwrap_or(c.spec.num_microtasks()), gold)?,
        };
        c.sweep = match (sweep_variable, sweep_values) {
            (Some(variable), Some(values)) => Some(Sweep { variable, values }),
            (None, None) => None,
            _ => return Err(CliError::Config("sweep_variable and sweep_values go together".into())),
        };
        c.validate()?;
        Ok(c)
    }
}
