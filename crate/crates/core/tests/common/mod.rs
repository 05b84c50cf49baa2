//! Random reasoner programs paired with a brute-force joint-table oracle that
//! shares no code with the engine.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;

use icorpp::plog::{enumerate_worlds, ground, parse_literal, parse_program, query, Atom, Evidence, Literal, PlogError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOOL: [&str; 2] = ["true", "false"];
const V2: [&str; 2] = ["a", "b"];
const V3: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone)]
enum Kind {
    /// Selection over the whole range with pr-atoms keyed by an optional
    /// parent literal: `(parent value or None, value, probability)`.
    Plain { parent: Option<usize>, prs: Vec<(Option<usize>, usize, f64)> },
    /// Range `{V : ok(V)}` with static members plus one member added when
    /// another attribute takes a given value.
    Dynamic { fixed: Vec<bool>, extra: Option<(usize, usize, usize)> },
}

#[derive(Debug, Clone)]
struct Attr {
    atom: Atom,
    text: String,
    values: &'static [&'static str],
    boolean: bool,
    kind: Kind,
}

#[derive(Debug, Clone, Copy)]
enum Cond {
    Is(usize, usize),
    Derived(usize),
}

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub source: String,
    pub evidence: Vec<Evidence>,
    pub queries: Vec<Literal>,
    attrs: Vec<Attr>,
    /// Derived booleans: a positive condition and an optional default-negated one.
    derived: Vec<(Cond, Option<Cond>)>,
    constraints: Vec<Vec<Cond>>,
    observed: Vec<(usize, usize)>,
    intervened: Option<(usize, usize)>,
}

pub type Table = BTreeMap<Vec<String>, f64>;

impl RandomCase {
    pub fn random_attributes(&self) -> usize {
        self.attrs.len()
    }

    pub fn value_count(&self, i: usize) -> usize {
        self.attrs[i].values.len()
    }

    pub fn has_constraints(&self) -> bool {
        !self.constraints.is_empty()
    }

    /// Which random attributes depend on attribute `i`, itself included.
    pub fn descendants(&self, i: usize) -> Vec<bool> {
        let mut out = vec![false; self.attrs.len()];
        out[i] = true;
        for (j, a) in self.attrs.iter().enumerate() {
            let parent = match &a.kind {
                Kind::Plain { parent, .. } => *parent,
                Kind::Dynamic { extra, .. } => extra.map(|(p, _, _)| p),
            };
            if parent.is_some_and(|p| out[p]) {
                out[j] = true;
            }
        }
        out
    }

    pub fn lit_text(&self, i: usize, v: usize) -> String {
        let a = &self.attrs[i];
        match (a.boolean, v) {
            (true, 0) => a.text.clone(),
            (true, _) => format!("-{}", a.text),
            _ => format!("{}={}", a.text, a.values[v]),
        }
    }

    fn cond_text(&self, c: Cond) -> String {
        match c {
            Cond::Is(i, v) => self.lit_text(i, v),
            Cond::Derived(k) => format!("d{k}"),
        }
    }

    pub fn ground_atoms(&self) -> Vec<Atom> {
        self.attrs.iter().map(|a| a.atom.clone()).collect()
    }

    /// Joint distribution over the random attributes by enumerating the full
    /// product of their ranges; `None` when no assignment survives.
    pub fn oracle(&self) -> Option<Table> {
        let sizes: Vec<usize> = self.attrs.iter().map(|a| a.values.len()).collect();
        let total: usize = sizes.iter().product();
        let mut table = Table::new();
        let mut mass = 0.0;
        let mut vals = vec![0usize; sizes.len()];
        for mut code in 0..total {
            for (v, n) in vals.iter_mut().zip(&sizes) {
                *v = code % n;
                code /= n;
            }
            let p = self.weight(&vals);
            if p > 0.0 {
                mass += p;
                let key = vals.iter().zip(&self.attrs).map(|(&v, a)| a.values[v].to_string()).collect();
                table.insert(key, p);
            }
        }
        if table.is_empty() {
            return None;
        }
        table.values_mut().for_each(|p| *p /= mass);
        Some(table)
    }

    fn holds(&self, vals: &[usize], derived: &[bool], c: Cond) -> bool {
        match c {
            Cond::Is(i, v) => vals[i] == v,
            Cond::Derived(k) => derived[k],
        }
    }

    fn weight(&self, vals: &[usize]) -> f64 {
        if let Some((i, v)) = self.intervened {
            if vals[i] != v {
                return 0.0;
            }
        }
        let mut p = 1.0;
        for (i, a) in self.attrs.iter().enumerate() {
            if self.intervened.is_some_and(|(j, _)| j == i) {
                continue;
            }
            p *= match &a.kind {
                Kind::Plain { parent, prs } => {
                    let context = parent.map(|j| vals[j]);
                    let active: Vec<&(Option<usize>, usize, f64)> = prs.iter().filter(|(c, _, _)| *c == context).collect();
                    match active.iter().find(|(_, v, _)| *v == vals[i]) {
                        Some((_, _, q)) => *q,
                        None => {
                            let assigned: f64 = active.iter().map(|(_, _, q)| q).sum();
                            (1.0 - assigned) / (a.values.len() - active.len()) as f64
                        }
                    }
                }
                Kind::Dynamic { fixed, extra } => {
                    let mut range = fixed.clone();
                    if let Some((j, w, member)) = extra {
                        if vals[*j] == *w {
                            range[*member] = true;
                        }
                    }
                    if range[vals[i]] {
                        1.0 / range.iter().filter(|x| **x).count() as f64
                    } else {
                        0.0
                    }
                }
            };
        }
        let derived = self.derive(vals);
        if self.constraints.iter().any(|body| body.iter().all(|&c| self.holds(vals, &derived, c))) {
            return 0.0;
        }
        if self.observed.iter().any(|&(i, v)| vals[i] != v) {
            return 0.0;
        }
        p
    }

    fn derive(&self, vals: &[usize]) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.derived.len());
        for &(pos, naf) in &self.derived {
            let v = self.holds(vals, &out, pos) && !naf.is_some_and(|c| self.holds(vals, &out, c));
            out.push(v);
        }
        out
    }

    /// Oracle probability of one of this case's query literals.
    pub fn oracle_query(&self, table: &Table, q: &Literal) -> f64 {
        let text = q.to_string();
        let index: BTreeMap<String, usize> = self.attrs.iter().enumerate().map(|(i, a)| (a.text.clone(), i)).collect();
        table
            .iter()
            .filter(|(key, _)| {
                let vals: Vec<usize> = key.iter().zip(&self.attrs).map(|(k, a)| a.values.iter().position(|v| v == k).unwrap()).collect();
                if let Some(k) = text.strip_prefix('d').and_then(|k| k.parse::<usize>().ok()) {
                    return self.derive(&vals)[k];
                }
                let (name, val) = match text.split_once('=') {
                    Some((n, v)) => (n.to_string(), v.to_string()),
                    None => match text.strip_prefix('-') {
                        Some(n) => (n.to_string(), "false".to_string()),
                        None => (text.clone(), "true".to_string()),
                    },
                };
                key[index[&name]] == val
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// The engine's joint distribution, read back through the same atoms.
    pub fn engine(&self) -> Result<Table, PlogError> {
        let gp = ground(&parse_program(&self.source)?)?;
        let dist = enumerate_worlds(&gp, &self.evidence)?;
        let mut table = Table::new();
        for (w, p) in dist.iter() {
            if p <= 0.0 {
                continue;
            }
            let key = self
                .attrs
                .iter()
                .map(|a| gp.value(w, &a.atom).map(|v| v.unwrap_or("").to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            *table.entry(key).or_insert(0.0) += p;
        }
        Ok(table)
    }

    pub fn engine_query(&self, q: &Literal) -> Result<f64, PlogError> {
        let gp = ground(&parse_program(&self.source)?)?;
        query(&gp, q, &self.evidence)
    }
}

fn prob(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(0.05..0.6f64) * 1000.0).round() / 1000.0
}

/// pr-atoms for one condition context, covering at most all but one value.
fn group(rng: &mut ChaCha8Rng, context: Option<usize>, size: usize) -> Vec<(Option<usize>, usize, f64)> {
    let mut out = Vec::new();
    let mut left = 0.95;
    for v in 0..size - 1 {
        if rng.gen_bool(0.6) {
            let p = prob(rng).min(left - 0.05);
            if p >= 0.01 {
                let p = (p * 1000.0).round() / 1000.0;
                left -= p;
                out.push((context, v, p));
            }
        }
    }
    out
}

/// A random program with at most twelve ground random attributes.
pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attrs: Vec<Attr> = Vec::new();
    let plain = rng.gen_range(2..=7);
    for i in 0..plain {
        let (values, boolean): (&'static [&'static str], bool) = match rng.gen_range(0..3) {
            0 => (&BOOL, true),
            1 => (&V2, false),
            _ => (&V3, false),
        };
        let parent = (i > 0 && rng.gen_bool(0.6)).then(|| rng.gen_range(0..i));
        let prs = match parent {
            None => group(&mut rng, None, values.len()),
            Some(j) => (0..attrs[j].values.len()).flat_map(|w| group(&mut rng, Some(w), values.len())).collect(),
        };
        let name = format!("x{i}");
        attrs.push(Attr { atom: Atom::new(&name, &[]), text: name, values, boolean, kind: Kind::Plain { parent, prs } });
    }
    let family = rng.gen_bool(0.5);
    if family {
        let parent = rng.gen_range(0..plain);
        let w = rng.gen_range(0..attrs[parent].values.len());
        let p = prob(&mut rng);
        for o in ["o1", "o2"] {
            attrs.push(Attr {
                atom: Atom::new("y", &[o]),
                text: format!("y({o})"),
                values: &V2,
                boolean: false,
                kind: Kind::Plain { parent: Some(parent), prs: vec![(Some(w), 0, p)] },
            });
        }
    }
    let dynamic = rng.gen_bool(0.5);
    if dynamic {
        let mut fixed = vec![false; 3];
        fixed[rng.gen_range(0..3)] = true;
        fixed[rng.gen_range(0..3)] = true;
        let missing: Vec<usize> = (0..3).filter(|&v| !fixed[v]).collect();
        let extra = (!missing.is_empty() && rng.gen_bool(0.7)).then(|| {
            let j = rng.gen_range(0..plain);
            (j, rng.gen_range(0..attrs[j].values.len()), missing[rng.gen_range(0..missing.len())])
        });
        attrs.push(Attr { atom: Atom::new("z", &[]), text: "z".into(), values: &V3, boolean: false, kind: Kind::Dynamic { fixed, extra } });
    }

    let mut case = RandomCase {
        source: String::new(),
        evidence: Vec::new(),
        queries: Vec::new(),
        attrs,
        derived: Vec::new(),
        constraints: Vec::new(),
        observed: Vec::new(),
        intervened: None,
    };
    let n = case.attrs.len();
    let random_cond = |rng: &mut ChaCha8Rng, case: &RandomCase| {
        let i = rng.gen_range(0..n);
        Cond::Is(i, rng.gen_range(0..case.attrs[i].values.len()))
    };
    for k in 0..rng.gen_range(0..4) {
        let pos = random_cond(&mut rng, &case);
        let naf = match rng.gen_range(0..3) {
            0 => None,
            1 if k > 0 => Some(Cond::Derived(rng.gen_range(0..k))),
            _ => Some(random_cond(&mut rng, &case)),
        };
        case.derived.push((pos, naf));
    }
    for _ in 0..rng.gen_range(0..3) {
        let body = if !case.derived.is_empty() && rng.gen_bool(0.3) {
            vec![Cond::Derived(rng.gen_range(0..case.derived.len()))]
        } else {
            vec![random_cond(&mut rng, &case), random_cond(&mut rng, &case)]
        };
        case.constraints.push(body);
    }
    for _ in 0..rng.gen_range(0..3) {
        if let Cond::Is(i, v) = random_cond(&mut rng, &case) {
            case.observed.push((i, v));
        }
    }
    if rng.gen_bool(0.4) {
        let i = rng.gen_range(0..plain);
        case.intervened = Some((i, rng.gen_range(0..case.attrs[i].values.len())));
    }

    let mut src = String::from("v2 = {a, b}.\nv3 = {a, b, c}.\n");
    if family {
        src.push_str("obj = {o1, o2}.\ny : obj -> v2.\nrandom(y(X)).\n");
    }
    for a in &case.attrs {
        if let (Kind::Plain { .. }, false) = (&a.kind, a.text.starts_with('y')) {
            let range = if a.boolean { "boolean" } else if a.values.len() == 2 { "v2" } else { "v3" };
            let _ = writeln!(src, "{} : {range}.\nrandom({}).", a.text, a.text);
        }
    }
    let mut family_pr_written = false;
    for i in 0..n {
        let a = &case.attrs[i];
        match &a.kind {
            Kind::Plain { parent, prs } => {
                let is_family = a.text.starts_with('y');
                if is_family && family_pr_written {
                    continue;
                }
                for &(context, v, p) in prs {
                    let head = if is_family { format!("y(X)={}", a.values[v]) } else { format!("{}={}", a.text, a.values[v]) };
                    let body = match (parent, context) {
                        (Some(j), Some(w)) => format!(" | {}", case.lit_text(*j, w)),
                        _ => String::new(),
                    };
                    let _ = writeln!(src, "pr({head}{body}) = {p}.");
                }
                family_pr_written |= is_family;
            }
            Kind::Dynamic { fixed, extra } => {
                src.push_str("ok : v3 -> boolean.\nz : v3.\nrandom(z : {V : ok(V)}).\n");
                for (v, on) in fixed.iter().enumerate() {
                    if *on {
                        let _ = writeln!(src, "ok({}).", V3[v]);
                    }
                }
                if let Some((j, w, member)) = extra {
                    let _ = writeln!(src, "ok({}) :- {}.", V3[*member], case.lit_text(*j, *w));
                }
            }
        }
    }
    for (k, (pos, naf)) in case.derived.iter().enumerate() {
        let _ = write!(src, "d{k} : boolean.\nd{k} :- {}", case.cond_text(*pos));
        if let Some(c) = naf {
            let _ = write!(src, ", not {}", case.cond_text(*c));
        }
        src.push_str(".\n");
    }
    for body in &case.constraints {
        let parts: Vec<String> = body.iter().map(|c| case.cond_text(*c)).collect();
        let _ = writeln!(src, ":- {}.", parts.join(", "));
    }
    case.source = src;

    for &(i, v) in &case.observed {
        case.evidence.push(Evidence::obs(parse_literal(&case.lit_text(i, v)).unwrap()));
    }
    if let Some((i, v)) = case.intervened {
        case.evidence.push(Evidence::intervene(parse_literal(&case.lit_text(i, v)).unwrap()));
    }
    for _ in 0..3 {
        let i = rng.gen_range(0..n);
        let v = rng.gen_range(0..case.attrs[i].values.len());
        case.queries.push(parse_literal(&case.lit_text(i, v)).unwrap());
    }
    for k in 0..case.derived.len() {
        case.queries.push(parse_literal(&format!("d{k}")).unwrap());
    }
    case
}

/// Compares engine and oracle on one case; `Err` describes the mismatch.
pub fn check_case(case: &RandomCase, tol: f64) -> Result<(), String> {
    let expected = case.oracle();
    let actual = case.engine();
    let (expected, actual) = match (expected, actual) {
        (None, Err(PlogError::NoWorlds)) => return Ok(()),
        (Some(e), Ok(a)) => (e, a),
        (e, a) => return Err(format!("oracle {e:?} vs engine {a:?}\n{}", case.source)),
    };
    if expected.len() != actual.len() {
        return Err(format!("{} oracle worlds vs {} engine worlds\n{}", expected.len(), actual.len(), case.source));
    }
    for (key, p) in &expected {
        let q = actual.get(key).copied().unwrap_or(f64::NAN);
        if !((p - q).abs() <= tol) {
            return Err(format!("world {key:?}: oracle {p} vs engine {q}\n{}", case.source));
        }
    }
    for lit in &case.queries {
        let p = case.oracle_query(&expected, lit);
        let q = case.engine_query(lit).map_err(|e| format!("query {lit}: {e}\n{}", case.source))?;
        if !((p - q).abs() <= tol) {
            return Err(format!("query {lit}: oracle {p} vs engine {q}\n{}", case.source));
        }
    }
    Ok(())
}
