use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelError, Result};
use crate::domains::{ObservationSpec, RewardSpec};
use crate::plog::{self, parse_literal, Program};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariablePartition {
    pub endogenous: Vec<String>,
    pub exogenous: Vec<String>,
    /// Literals assumed for an exogenous attribute that was not sensed.
    #[serde(default)]
    pub defaults: BTreeMap<String, Vec<String>>,
}

/// How termination enters the state space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TermMode {
    /// `attr` is a relevant boolean; every location is paired with both values.
    Factor { attr: String },
    /// A single absorbing state is appended; `attr` is pinned to false in
    /// every other state and its successor decides entry into the sink.
    Single { attr: String },
}

impl TermMode {
    pub fn attr(&self) -> &str {
        match self {
            TermMode::Factor { attr } | TermMode::Single { attr } => attr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogDim {
    pub attr: String,
    /// Short name used in action labels, e.g. `item` in `ask_item`.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSpec {
    List { values: Vec<String> },
    /// Questions and deliveries generated from the values present in the
    /// state space.
    Dialog { dims: Vec<DialogDim> },
}

fn default_action_attr() -> String {
    "curr_a".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub partition: VariablePartition,
    /// Ground atoms whose joint values form a state.
    pub relevant: Vec<String>,
    /// Attributes whose true instances distinguish otherwise equal world sets.
    #[serde(default)]
    pub context: Vec<String>,
    pub term: TermMode,
    /// Successor attribute per relevant attribute; `curr_x` maps to `next_x`
    /// unless listed.
    #[serde(default)]
    pub next_of: BTreeMap<String, String>,
    #[serde(default = "default_action_attr")]
    pub action_attr: String,
    pub actions: ActionSpec,
    pub discount: f64,
    pub reward: RewardSpec,
    #[serde(default)]
    pub observation: Option<ObservationSpec>,
}

impl TaskSpec {
    pub fn next_name(&self, var: &str) -> String {
        if let Some(n) = self.next_of.get(var) {
            return n.clone();
        }
        match var.strip_prefix("curr_") {
            Some(rest) => format!("next_{rest}"),
            None => format!("next_{var}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ModelError::Task(m));
        let p = &self.partition;
        let endo: BTreeSet<&str> = p.endogenous.iter().map(|s| s.as_str()).collect();
        if let Some(x) = p.exogenous.iter().find(|x| endo.contains(x.as_str())) {
            return bad(format!("`{x}` is both endogenous and exogenous"));
        }
        for r in &self.relevant {
            let name = r.split('(').next().unwrap_or(r);
            if !endo.contains(name) {
                return bad(format!("relevant `{r}` is not endogenous"));
            }
        }
        if let TermMode::Factor { attr } = &self.term {
            if !self.relevant.contains(attr) {
                return bad(format!("factor term `{attr}` must be relevant"));
            }
        }
        for (k, lits) in &p.defaults {
            if !p.exogenous.contains(k) {
                return Err(ModelError::NotExogenous(k.clone()));
            }
            for l in lits {
                parse_literal(l)?;
            }
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad(format!("discount {} outside [0, 1)", self.discount));
        }
        Ok(())
    }

    /// Sensed literals overlaid on the defaults, canonicalized.
    pub fn effective_facts(&self, sensed: &SensedFacts) -> Result<FactKey> {
        let p = &self.partition;
        for k in sensed.0.keys() {
            if !p.exogenous.contains(k) {
                return Err(ModelError::NotExogenous(k.clone()));
            }
        }
        let mut out = BTreeSet::new();
        for attr in &p.exogenous {
            let lits = sensed.0.get(attr).or_else(|| p.defaults.get(attr));
            for l in lits.into_iter().flatten() {
                out.insert(parse_literal(l)?.to_string());
            }
        }
        Ok(FactKey(out.into_iter().collect()))
    }
}

/// Exogenous observations keyed by attribute name. An attribute that is
/// absent falls back to its default; present with an empty list means
/// "sensed, nothing holds".
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensedFacts(pub BTreeMap<String, Vec<String>>);

impl SensedFacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<I, S>(mut self, attr: &str, literals: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.set(attr, literals);
        self
    }

    pub fn set<I, S>(&mut self, attr: &str, literals: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.0.insert(attr.to_string(), literals.into_iter().map(Into::into).collect());
    }

    pub fn remove(&mut self, attr: &str) {
        self.0.remove(attr);
    }
}

/// Sorted effective fact literals; identifies a model in the policy cache.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactKey(pub Vec<String>);

impl fmt::Display for FactKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

/// Which knowledge files take part in a reasoning call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Parts {
    Domain,
    Priors,
    Dynamics,
}

/// The four files describing a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBundle {
    pub domain: String,
    pub dynamics: String,
    pub priors: String,
    pub task: TaskSpec,
}

impl DomainBundle {
    pub const FILES: [&'static str; 4] = ["domain.plog", "dynamics.plog", "priors.plog", "task.json"];

    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| ModelError::Io { path: path.display().to_string(), message: e.to_string() })
        };
        let task_text = read("task.json")?;
        let task: TaskSpec = serde_json::from_str(&task_text)
            .map_err(|e| ModelError::Io { path: dir.join("task.json").display().to_string(), message: e.to_string() })?;
        let bundle = DomainBundle { domain: read("domain.plog")?, dynamics: read("dynamics.plog")?, priors: read("priors.plog")?, task };
        bundle.check()?;
        Ok(bundle)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let io = |path: &Path, e: std::io::Error| ModelError::Io { path: path.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let task = serde_json::to_string_pretty(&self.task).expect("task spec serializes");
        for (name, text) in Self::FILES.iter().zip([&self.domain, &self.dynamics, &self.priors, &task]) {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }

    /// Validates the task and every combination of files used for reasoning.
    pub fn check(&self) -> Result<()> {
        self.task.validate()?;
        let key = self.task.effective_facts(&SensedFacts::new())?;
        for parts in [Parts::Domain, Parts::Priors, Parts::Dynamics] {
            self.program(parts, &key)?;
        }
        Ok(())
    }

    pub(crate) fn program(&self, parts: Parts, facts: &FactKey) -> Result<Program> {
        let mut prog = plog::parse_fragment(&self.domain)?;
        match parts {
            Parts::Domain => {}
            Parts::Priors => prog.extend(plog::parse_fragment(&self.priors)?),
            Parts::Dynamics => prog.extend(plog::parse_fragment(&self.dynamics)?),
        }
        for f in &facts.0 {
            prog.add_fact(parse_literal(f)?);
        }
        plog::validate(&prog)?;
        Ok(prog)
    }
}
