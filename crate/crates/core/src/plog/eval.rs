//! Depth-first world enumeration over the layers of a ground program.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::ground::{GBody, GLit, GroundProgram, InstId, ValId};
use super::{PlogError, Result};

const EPS: f64 = 1e-9;

/// A complete assignment: one entry per ground instance, in instance order.
/// Booleans are always defined; functional attributes may stay undefined.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PossibleWorld {
    pub values: Vec<Option<u16>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WorldDistribution {
    pub worlds: Vec<PossibleWorld>,
    pub probs: Vec<f64>,
}

impl WorldDistribution {
    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PossibleWorld, f64)> {
        self.worlds.iter().zip(self.probs.iter().copied())
    }

    /// Mass of the worlds satisfying every literal.
    pub fn probability(&self, gp: &GroundProgram, targets: &[Literal]) -> Result<f64> {
        let lits = targets.iter().map(|l| gp.compile_literal(l)).collect::<Result<Vec<_>>>()?;
        Ok(self
            .iter()
            .filter(|(w, _)| lits.iter().all(|&l| completed_holds(&w.values, l)))
            .map(|(_, p)| p)
            .sum())
    }

    /// Distribution of an attribute instance's value; `None` collects the
    /// worlds where it is undefined.
    pub fn marginal(&self, gp: &GroundProgram, atom: &Atom) -> Result<BTreeMap<Option<String>, f64>> {
        let inst = gp.instance_id(atom)?;
        let values = &gp.attr_of(inst as InstId).values;
        let mut out = BTreeMap::new();
        for (w, p) in self.iter() {
            let v = w.values[inst].map(|v| values[v as usize].clone());
            *out.entry(v).or_insert(0.0) += p;
        }
        Ok(out)
    }
}

impl GroundProgram {
    /// Value of a ground attribute instance in a world.
    pub fn value<'a>(&'a self, w: &PossibleWorld, atom: &Atom) -> Result<Option<&'a str>> {
        let inst = self.instance_id(atom)?;
        let values = &self.attr_of(inst as InstId).values;
        Ok(w.values[inst].map(|v| values[v as usize].as_str()))
    }

    pub fn holds(&self, w: &PossibleWorld, lit: &Literal) -> Result<bool> {
        Ok(completed_holds(&w.values, self.compile_literal(lit)?))
    }

    /// True boolean atoms and defined functional values, as literals.
    pub fn describe(&self, w: &PossibleWorld) -> Vec<String> {
        let mut out = Vec::new();
        for (i, v) in w.values.iter().enumerate() {
            let a = self.attr_of(i as InstId);
            match v {
                Some(v) if a.boolean => {
                    if a.values[*v as usize] == TRUE {
                        out.push(self.instances[i].key.clone());
                    }
                }
                Some(v) => out.push(format!("{}={}", self.instances[i].key, a.values[*v as usize])),
                None => {}
            }
        }
        out
    }
}

fn derived_holds(vals: &[Option<ValId>], l: GLit) -> bool {
    match vals[l.inst as usize] {
        Some(v) => (v == l.val) == l.equal,
        None => false,
    }
}

/// Truth after completion: undefined reads as "not equal to anything".
fn completed_holds(vals: &[Option<ValId>], l: GLit) -> bool {
    (vals[l.inst as usize] == Some(l.val)) == l.equal
}

fn body_holds(vals: &[Option<ValId>], b: &GBody) -> bool {
    b.pos.iter().all(|&l| derived_holds(vals, l)) && !b.naf.iter().any(|&l| derived_holds(vals, l))
}

struct Search<'a> {
    gp: &'a GroundProgram,
    fixed: HashMap<InstId, ValId>,
    obs: Vec<Vec<GLit>>,
    out: Vec<(Vec<Option<ValId>>, f64)>,
}

pub(crate) fn enumerate(gp: &GroundProgram, evidence: &[Evidence]) -> Result<WorldDistribution> {
    let mut fixed = HashMap::new();
    let mut obs = vec![Vec::new(); gp.layers.len()];
    for e in evidence {
        let lit = gp.compile_literal(&e.literal)?;
        match e.kind {
            EvidenceKind::Do => {
                if !gp.attr_of(lit.inst).random || !lit.equal {
                    return Err(PlogError::InvalidIntervention(e.literal.to_string()));
                }
                if fixed.insert(lit.inst, lit.val).is_some_and(|v| v != lit.val) {
                    return Err(PlogError::NoWorlds);
                }
            }
            EvidenceKind::Obs => obs[gp.final_layer[lit.inst as usize]].push(lit),
        }
    }
    let mut s = Search { gp, fixed, obs, out: Vec::new() };
    s.layer(0, vec![None; gp.instances.len()], 1.0)?;

    let mut worlds = std::mem::take(&mut s.out);
    for (vals, _) in &mut worlds {
        for (i, v) in vals.iter_mut().enumerate() {
            if v.is_none() && gp.attr_of(i as InstId).boolean {
                *v = Some(0);
            }
        }
    }
    worlds.sort_by(|a, b| a.0.cmp(&b.0));
    let mut dist = WorldDistribution::default();
    for (vals, p) in worlds {
        if dist.worlds.last().is_some_and(|w| w.values == vals) {
            *dist.probs.last_mut().unwrap() += p;
        } else {
            dist.worlds.push(PossibleWorld { values: vals });
            dist.probs.push(p);
        }
    }
    let total: f64 = dist.probs.iter().sum();
    if dist.worlds.is_empty() || total <= 0.0 {
        return Err(PlogError::NoWorlds);
    }
    for p in &mut dist.probs {
        *p /= total;
    }
    Ok(dist)
}

impl Search<'_> {
    fn layer(&mut self, li: usize, vals: Vec<Option<ValId>>, p: f64) -> Result<()> {
        if li == self.gp.layers.len() {
            self.out.push((vals, p));
            return Ok(());
        }
        self.choose(li, 0, vals, p)
    }

    /// Branches over the values of the `ri`-th random instance of layer `li`.
    fn choose(&mut self, li: usize, ri: usize, mut vals: Vec<Option<ValId>>, p: f64) -> Result<()> {
        let gp = self.gp;
        let layer = &gp.layers[li];
        if ri == layer.randoms.len() {
            return self.close(li, vals, p);
        }
        let inst = layer.randoms[ri];
        if let Some(&v) = self.fixed.get(&inst) {
            vals[inst as usize] = Some(v);
            return self.choose(li, ri + 1, vals, p);
        }
        let mut active = gp.selections[inst as usize].iter().filter(|s| body_holds(&vals, &s.body));
        let Some(sel) = active.next() else {
            return self.choose(li, ri + 1, vals, p);
        };
        if active.next().is_some() {
            return Err(PlogError::MultipleSelections(gp.instances[inst as usize].key.clone()));
        }
        let nvals = gp.attr_of(inst).values.len();
        let candidates: Vec<ValId> = match &sel.range {
            None => (0..nvals as ValId).collect(),
            Some(r) => r.iter().filter(|(_, q)| derived_holds(&vals, *q)).map(|(v, _)| *v).collect(),
        };
        if candidates.is_empty() {
            return Ok(());
        }

        let mut declared: BTreeMap<ValId, f64> = BTreeMap::new();
        for pr in &gp.prs[inst as usize] {
            if !candidates.contains(&pr.val) || !body_holds(&vals, &pr.body) {
                continue;
            }
            if let Some(&q) = declared.get(&pr.val) {
                if (q - pr.prob).abs() > EPS {
                    return Err(PlogError::ConflictingPr(gp.instances[inst as usize].key.clone()));
                }
            }
            declared.insert(pr.val, pr.prob);
        }
        let total: f64 = declared.values().sum();
        if total > 1.0 + EPS {
            return Err(PlogError::OverDeclared { attr: gp.instances[inst as usize].key.clone(), total });
        }
        let undeclared = candidates.len() - declared.len();
        let share = if undeclared > 0 { (1.0 - total).max(0.0) / undeclared as f64 } else { 0.0 };
        for &v in &candidates {
            let q = declared.get(&v).copied().unwrap_or(share);
            if q <= 0.0 {
                continue;
            }
            let mut next = vals.clone();
            next[inst as usize] = Some(v);
            self.choose(li, ri + 1, next, p * q)?;
        }
        Ok(())
    }

    /// Deterministic closure of a layer, then its constraints and observations.
    fn close(&mut self, li: usize, mut vals: Vec<Option<ValId>>, p: f64) -> Result<()> {
        let gp = self.gp;
        let layer = &gp.layers[li];
        loop {
            let mut changed = false;
            for &ri in &layer.rules {
                let r = &gp.rules[ri];
                if !body_holds(&vals, &r.body) {
                    continue;
                }
                match vals[r.head.inst as usize] {
                    None => {
                        vals[r.head.inst as usize] = Some(r.head.val);
                        changed = true;
                    }
                    Some(v) if v == r.head.val => {}
                    Some(_) => return Ok(()),
                }
            }
            if !changed {
                break;
            }
        }
        if layer.constraints.iter().any(|&c| body_holds(&vals, &gp.constraints[c])) {
            return Ok(());
        }
        for &o in &self.obs[li] {
            let mut v = vals[o.inst as usize];
            if v.is_none() && gp.attr_of(o.inst).boolean {
                v = Some(0);
            }
            if (v == Some(o.val)) != o.equal {
                return Ok(());
            }
        }
        self.layer(li + 1, vals, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plog::{ground, parse_literal, parse_program, query};

    fn gp(src: &str) -> GroundProgram {
        ground(&parse_program(src).unwrap()).unwrap()
    }

    fn lit(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    #[test]
    fn uniform_random_boolean() {
        let g = gp("p : boolean. random(p).");
        let d = enumerate(&g, &[]).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.probs.iter().all(|&p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn residual_split() {
        let g = gp("drink={coffee,tea,juice}. x : drink. random(x). pr(x=coffee)=0.8.");
        assert!((query(&g, &lit("x=coffee"), &[]).unwrap() - 0.8).abs() < 1e-12);
        assert!((query(&g, &lit("x=tea"), &[]).unwrap() - 0.1).abs() < 1e-12);
        assert!((query(&g, &lit("x=juice"), &[]).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn certain_and_impossible() {
        let g = gp("p : boolean. q : boolean. r : boolean. random(r). p. q :- p. :- r.");
        assert_eq!(query(&g, &lit("q"), &[]).unwrap(), 1.0);
        assert_eq!(query(&g, &lit("r"), &[]).unwrap(), 0.0);
    }

    #[test]
    fn default_defeat() {
        let base = "s={a,b}. c : s -> boolean. p : s -> boolean. c(a). c(b). p(X) :- c(X), not -p(X).";
        let g = gp(base);
        assert_eq!(query(&g, &lit("p(a)"), &[]).unwrap(), 1.0);
        let g = gp(&format!("{base} -p(a)."));
        assert_eq!(query(&g, &lit("p(a)"), &[]).unwrap(), 0.0);
        assert_eq!(query(&g, &lit("p(b)"), &[]).unwrap(), 1.0);
    }

    #[test]
    fn dynamic_range_restricts_values() {
        let g = gp("person={alice,bob,carl}. ok : person -> boolean. who : person.
            ok(alice). ok(carl). random(who : {P : ok(P)}).");
        let d = enumerate(&g, &[]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(query(&g, &lit("who=bob"), &[]).unwrap(), 0.0);
        assert!((query(&g, &lit("who=carl"), &[]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn observation_conditions() {
        let g = gp("p : boolean. q : boolean. random(p). random(q). pr(p)=0.3. pr(q | p)=0.9. pr(q | -p)=0.2.");
        let pq = query(&g, &lit("q"), &[]).unwrap();
        assert!((pq - (0.3 * 0.9 + 0.7 * 0.2)).abs() < 1e-12);
        let post = query(&g, &lit("p"), &[Evidence::obs(lit("q"))]).unwrap();
        assert!((post - 0.27 / pq).abs() < 1e-12);
        let intervened = query(&g, &lit("p"), &[Evidence::intervene(lit("q"))]).unwrap();
        assert!((intervened - 0.3).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let g = gp("v={a,b}. x : v. random(x). pr(x=a)=0.7. pr(x=b)=0.6.");
        assert!(matches!(enumerate(&g, &[]).unwrap_err(), PlogError::OverDeclared { .. }));
        let g = gp("p : boolean. random(p). :- p. :- -p.");
        assert_eq!(enumerate(&g, &[]).unwrap_err(), PlogError::NoWorlds);
        let g = gp("p : boolean. q : boolean. random(p). q.");
        assert!(matches!(
            enumerate(&g, &[Evidence::intervene(lit("q"))]).unwrap_err(),
            PlogError::InvalidIntervention(_)
        ));
        let g = gp("p : boolean. q : boolean. random(p). random(p) :- q. q.");
        assert!(matches!(enumerate(&g, &[]).unwrap_err(), PlogError::MultipleSelections(_)));
    }

    #[test]
    fn boolean_complement_sums_to_one() {
        let g = gp("p : boolean. q : boolean. random(p). q :- p.");
        let a = query(&g, &lit("q"), &[]).unwrap();
        let b = query(&g, &lit("-q"), &[]).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }
}
