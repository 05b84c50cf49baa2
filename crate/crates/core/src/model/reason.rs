use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::bundle::Parts;
use super::{DomainBundle, FactKey, ModelError, Result, TermMode};
use crate::planning::Belief;
use crate::plog::{self, parse_literal, Atom, Evidence, GroundProgram, Literal, PlogError, PossibleWorld, WorldDistribution};

/// Joint values of the relevant attributes that survive reasoning.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub vars: Vec<String>,
    /// Admissible values per variable, in range order.
    pub domains: Vec<Vec<String>>,
    /// Surviving assignments, sorted by range position.
    pub worlds: Vec<Vec<String>>,
    /// True context literals in any world.
    pub context: BTreeSet<String>,
    pub term: TermMode,
    index: HashMap<Vec<String>, usize>,
}

impl StateSpace {
    fn new(vars: Vec<String>, domains: Vec<Vec<String>>, worlds: Vec<Vec<String>>, context: BTreeSet<String>, term: TermMode) -> Self {
        let index = worlds.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        StateSpace { vars, domains, worlds, context, term, index }
    }

    /// Number of model states, counting the appended sink in single-term mode.
    pub fn states(&self) -> usize {
        self.worlds.len() + usize::from(self.single_sink().is_some())
    }

    pub fn single_sink(&self) -> Option<usize> {
        matches!(self.term, TermMode::Single { .. }).then_some(self.worlds.len())
    }

    pub fn index_of(&self, values: &[String]) -> Option<usize> {
        self.index.get(values).copied()
    }

    pub fn var_index(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn values(&self, s: usize) -> Option<&[String]> {
        self.worlds.get(s).map(|w| w.as_slice())
    }

    pub fn value_of(&self, s: usize, var: &str) -> Option<&str> {
        let i = self.var_index(var)?;
        self.values(s).map(|w| w[i].as_str())
    }

    pub fn is_term(&self, s: usize) -> bool {
        match &self.term {
            TermMode::Single { .. } => s == self.worlds.len(),
            TermMode::Factor { attr } => {
                let i = self.var_index(attr).expect("factor term is relevant");
                self.worlds[s][i] == plog::TRUE
            }
        }
    }

    pub fn label(&self, s: usize) -> String {
        match self.values(s) {
            Some(w) => w.join(","),
            None => "term".to_string(),
        }
    }

    /// `var=value` literals defining a state.
    pub fn literals(&self, s: usize) -> Vec<Literal> {
        self.vars
            .iter()
            .zip(&self.worlds[s])
            .map(|(var, val)| parse_literal(&format!("{var}={val}")).expect("relevant literal"))
            .collect()
    }

    /// Equality of the assignment sets and their context.
    pub fn same_worlds(&self, other: &StateSpace) -> bool {
        self.vars == other.vars && self.worlds == other.worlds && self.context == other.context
    }
}

pub(crate) fn atom_of(text: &str) -> Result<Atom> {
    Ok(parse_literal(text)?.atom)
}

fn relevant_instances(gp: &GroundProgram, vars: &[String]) -> Result<Vec<usize>> {
    vars.iter().map(|v| Ok(gp.instance_id(&atom_of(v)?)?)).collect()
}

fn context_literals(gp: &GroundProgram, attrs: &[String], dist: &WorldDistribution) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for attr in attrs {
        for inst in gp.instances_of(attr) {
            let key = gp.instance_name(inst);
            for w in &dist.worlds {
                let Some(v) = w.values[inst] else { continue };
                let v = &gp.values_of(inst)[v as usize];
                if gp.is_boolean(inst) {
                    if v == plog::TRUE {
                        out.insert(key.to_string());
                    }
                } else {
                    out.insert(format!("{key}={v}"));
                }
            }
        }
    }
    out
}

fn project(bundle: &DomainBundle, gp: &GroundProgram, dist: &WorldDistribution) -> Result<StateSpace> {
    let task = &bundle.task;
    let insts = relevant_instances(gp, &task.relevant)?;
    let mut seen = BTreeSet::new();
    for w in &dist.worlds {
        let key = insts
            .iter()
            .zip(&task.relevant)
            .map(|(&i, var)| w.values[i].ok_or_else(|| ModelError::UndefinedRelevant(var.clone())))
            .collect::<Result<Vec<u16>>>()?;
        seen.insert(key);
    }
    let worlds: Vec<Vec<String>> = seen
        .into_iter()
        .map(|k| k.iter().zip(&insts).map(|(&v, &i)| gp.values_of(i)[v as usize].clone()).collect())
        .collect();
    let domains = insts
        .iter()
        .enumerate()
        .map(|(d, &i)| gp.values_of(i).iter().filter(|v| worlds.iter().any(|w| &w[d] == *v)).cloned().collect())
        .collect();
    let context = context_literals(gp, &task.context, dist);
    Ok(StateSpace::new(task.relevant.clone(), domains, worlds, context, task.term.clone()))
}

fn solve(bundle: &DomainBundle, parts: Parts, facts: &FactKey) -> Result<(GroundProgram, WorldDistribution)> {
    let gp = plog::ground(&bundle.program(parts, facts)?)?;
    let dist = plog::enumerate_worlds(&gp, &[])?;
    Ok((gp, dist))
}

/// Relevant-variable assignments that extend to at least one possible world.
pub fn log_reason(bundle: &DomainBundle, facts: &FactKey) -> Result<StateSpace> {
    let (gp, dist) = solve(bundle, Parts::Domain, facts)?;
    project(bundle, &gp, &dist)
}

/// Every combination of relevant values, with no logical filtering.
pub fn log_reason_unfiltered(bundle: &DomainBundle, facts: &FactKey) -> Result<StateSpace> {
    let task = &bundle.task;
    let gp = plog::ground(&bundle.program(Parts::Domain, facts)?)?;
    let insts = relevant_instances(&gp, &task.relevant)?;
    let domains: Vec<Vec<String>> = insts.iter().map(|&i| gp.values_of(i).to_vec()).collect();
    if let Some(d) = domains.iter().position(|d| d.is_empty()) {
        return Err(ModelError::EmptyRelevant(task.relevant[d].clone()));
    }
    let mut worlds = vec![Vec::new()];
    for d in &domains {
        worlds = worlds
            .into_iter()
            .flat_map(|w: Vec<String>| {
                d.iter().map(move |v| {
                    let mut w = w.clone();
                    w.push(v.clone());
                    w
                })
            })
            .collect();
    }
    Ok(StateSpace::new(task.relevant.clone(), domains, worlds, BTreeSet::new(), task.term.clone()))
}

/// Prior over the non-sink states from one joint enumeration.
pub fn prob_reason(bundle: &DomainBundle, facts: &FactKey, space: &StateSpace) -> Result<Belief> {
    let (gp, dist) = solve(bundle, Parts::Priors, facts)?;
    let insts = relevant_instances(&gp, &space.vars)?;
    let mut probs = vec![0.0; space.worlds.len()];
    for (w, p) in dist.iter() {
        let key: Option<Vec<String>> =
            insts.iter().map(|&i| w.values[i].map(|v| gp.values_of(i)[v as usize].clone())).collect();
        match key.and_then(|k| space.index_of(&k)) {
            Some(s) => probs[s] += p,
            None => log::debug!("prior world outside the state space dropped ({p})"),
        }
    }
    normalized(probs)
}

/// Prior computed with one conjunctive query per state.
pub fn prob_reason_naive(bundle: &DomainBundle, facts: &FactKey, space: &StateSpace) -> Result<Belief> {
    let gp = plog::ground(&bundle.program(Parts::Priors, facts)?)?;
    let probs = (0..space.worlds.len())
        .map(|s| Ok(plog::query_all(&gp, &space.literals(s), &[])?))
        .collect::<Result<Vec<f64>>>()?;
    normalized(probs)
}

fn normalized(mut probs: Vec<f64>) -> Result<Belief> {
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(ModelError::ZeroPrior);
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(Belief(probs))
}

struct Dynamics<'a> {
    space: &'a StateSpace,
    gp: GroundProgram,
    actions: &'a [String],
    action_attr: String,
    next: Vec<usize>,
    next_names: Vec<String>,
    sink_trigger: Option<Literal>,
}

impl<'a> Dynamics<'a> {
    fn new(bundle: &DomainBundle, facts: &FactKey, space: &'a StateSpace, actions: &'a [String]) -> Result<Self> {
        let task = &bundle.task;
        let gp = plog::ground(&bundle.program(Parts::Dynamics, facts)?)?;
        let next_names: Vec<String> = space.vars.iter().map(|v| task.next_name(v)).collect();
        let next = relevant_instances(&gp, &next_names)?;
        let sink_trigger = match &space.term {
            TermMode::Single { attr } => Some(parse_literal(&task.next_name(attr))?),
            TermMode::Factor { .. } => None,
        };
        Ok(Dynamics { space, gp, actions, action_attr: task.action_attr.clone(), next, next_names, sink_trigger })
    }

    fn evidence(&self, s: usize, a: usize) -> Result<Vec<Evidence>> {
        let mut ev: Vec<Evidence> = self.space.literals(s).into_iter().map(Evidence::intervene).collect();
        ev.push(Evidence::intervene(parse_literal(&format!("{}={}", self.action_attr, self.actions[a]))?));
        if let TermMode::Single { attr } = &self.space.term {
            ev.push(Evidence::intervene(parse_literal(&format!("{attr}=false"))?));
        }
        Ok(ev)
    }

    fn enumerate(&self, s: usize, a: usize) -> Result<WorldDistribution> {
        match plog::enumerate_worlds(&self.gp, &self.evidence(s, a)?) {
            Err(PlogError::NoWorlds) => Err(self.empty(s, a)),
            other => Ok(other?),
        }
    }

    fn empty(&self, s: usize, a: usize) -> ModelError {
        ModelError::EmptyRow { state: self.space.label(s), action: self.actions[a].clone() }
    }

    fn successor(&self, w: &PossibleWorld) -> Result<Option<usize>> {
        if let Some(t) = &self.sink_trigger {
            if self.gp.holds(w, t)? {
                return Ok(self.space.single_sink());
            }
        }
        let key: Option<Vec<String>> =
            self.next.iter().map(|&i| w.values[i].map(|v| self.gp.values_of(i)[v as usize].clone())).collect();
        Ok(key.and_then(|k| self.space.index_of(&k)))
    }

    fn batched_row(&self, s: usize, a: usize) -> Result<Vec<(u32, f64)>> {
        let dist = self.enumerate(s, a)?;
        let mut acc = BTreeMap::new();
        for (w, p) in dist.iter() {
            if let Some(t) = self.successor(w)? {
                *acc.entry(t as u32).or_insert(0.0) += p;
            }
        }
        Ok(self.finish(s, a, acc))
    }

    fn naive_row(&self, s: usize, a: usize) -> Result<Vec<(u32, f64)>> {
        let ev = self.evidence(s, a)?;
        let mut acc = BTreeMap::new();
        for t in 0..self.space.states() {
            let mut targets = Vec::new();
            match self.space.values(t) {
                None => targets.push(self.sink_trigger.clone().expect("sink only in single mode")),
                Some(vals) => {
                    for (name, v) in self.next_names.iter().zip(vals) {
                        targets.push(parse_literal(&format!("{name}={v}"))?);
                    }
                    if let Some(trigger) = &self.sink_trigger {
                        targets.push(trigger.complement());
                    }
                }
            }
            let p = match plog::query_all(&self.gp, &targets, &ev) {
                Err(PlogError::NoWorlds) => return Err(self.empty(s, a)),
                other => other?,
            };
            if p > 0.0 {
                acc.insert(t as u32, p);
            }
        }
        Ok(self.finish(s, a, acc))
    }

    fn finish(&self, s: usize, a: usize, mut acc: BTreeMap<u32, f64>) -> Vec<(u32, f64)> {
        let mass: f64 = acc.values().sum();
        if mass < 1.0 - 1e-12 {
            log::debug!(
                "{} under {}: {:.3e} of the mass has no declared successor, kept in place",
                self.space.label(s),
                self.actions[a],
                1.0 - mass
            );
            *acc.entry(s as u32).or_insert(0.0) += 1.0 - mass;
        }
        let total: f64 = acc.values().sum();
        if (total - 1.0).abs() > 1e-6 {
            log::warn!("{} under {}: row sums to {total}, renormalized", self.space.label(s), self.actions[a]);
            acc.values_mut().for_each(|p| *p /= total);
        }
        acc.into_iter().collect()
    }

    fn rows(&self, naive: bool) -> Result<Vec<Vec<(u32, f64)>>> {
        let na = self.actions.len();
        let sink = self.space.single_sink();
        crate::par_map(self.space.states() * na, |i| {
            let (s, a) = (i / na, i % na);
            if Some(s) == sink {
                Ok(vec![(s as u32, 1.0)])
            } else if naive {
                self.naive_row(s, a)
            } else {
                self.batched_row(s, a)
            }
        })
        .into_iter()
        .collect()
    }
}

/// Transition rows indexed `s * actions + a`, one enumeration per pair.
pub fn dyn_reason(bundle: &DomainBundle, facts: &FactKey, space: &StateSpace, actions: &[String]) -> Result<Vec<Vec<(u32, f64)>>> {
    Dynamics::new(bundle, facts, space, actions)?.rows(false)
}

/// Transition rows with one query per state triple.
pub fn dyn_reason_naive(
    bundle: &DomainBundle,
    facts: &FactKey,
    space: &StateSpace,
    actions: &[String],
) -> Result<Vec<Vec<(u32, f64)>>> {
    Dynamics::new(bundle, facts, space, actions)?.rows(true)
}

/// Whether reasoning under `facts` reproduces `space`. Reasoning failures
/// count as inconsistency.
pub fn check_consistency(bundle: &DomainBundle, facts: &FactKey, space: &StateSpace) -> bool {
    match log_reason(bundle, facts) {
        Ok(now) => now.same_worlds(space),
        Err(e) => {
            log::debug!("consistency check failed to reason: {e}");
            false
        }
    }
}
