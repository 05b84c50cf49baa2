//! Instantiation over finite sorts, interning of ground attribute instances,
//! and layered stratification.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::{body_vars, literal_vars, PlogError, Result};

pub(crate) type InstId = u32;
pub(crate) type ValId = u16;

#[derive(Debug, Clone)]
pub(crate) struct AttrInfo {
    pub values: Vec<String>,
    pub boolean: bool,
    pub random: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Instance {
    pub attr: usize,
    pub key: String,
}

/// A compiled ground literal. Boolean `p != v` is normalized to `p = !v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct GLit {
    pub inst: InstId,
    pub val: ValId,
    pub equal: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct GBody {
    pub pos: Vec<GLit>,
    pub naf: Vec<GLit>,
}

#[derive(Debug, Clone)]
pub(crate) struct GRule {
    pub head: GLit,
    pub body: GBody,
}

#[derive(Debug, Clone)]
pub(crate) struct GRandom {
    pub inst: InstId,
    /// Qualifying literal per admissible value, when the range is dynamic.
    pub range: Option<Vec<(ValId, GLit)>>,
    pub body: GBody,
}

#[derive(Debug, Clone)]
pub(crate) struct GPr {
    pub val: ValId,
    pub body: GBody,
    pub prob: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Layer {
    pub randoms: Vec<InstId>,
    pub rules: Vec<usize>,
    pub constraints: Vec<usize>,
}

/// A variable-free program plus the compiled form used for evaluation.
#[derive(Debug, Clone)]
pub struct GroundProgram {
    /// The instantiated program; for variable-free input this equals the input.
    pub program: Program,
    pub(crate) attrs: Vec<AttrInfo>,
    pub(crate) instances: Vec<Instance>,
    pub(crate) index: HashMap<String, InstId>,
    pub(crate) rules: Vec<GRule>,
    pub(crate) constraints: Vec<GBody>,
    pub(crate) selections: Vec<Vec<GRandom>>,
    pub(crate) prs: Vec<Vec<GPr>>,
    pub(crate) layers: Vec<Layer>,
    /// Layer after which an instance's value can no longer change.
    pub(crate) final_layer: Vec<usize>,
}

impl GroundProgram {
    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Name of a ground instance, e.g. `place(alice,r0)`.
    pub fn instance_name(&self, inst: usize) -> &str {
        &self.instances[inst].key
    }

    /// Ground instances of an attribute, in interning order.
    pub fn instances_of(&self, attr: &str) -> Vec<usize> {
        self.instances
            .iter()
            .enumerate()
            .filter(|(_, i)| {
                let key = &i.key;
                key.strip_prefix(attr).is_some_and(|rest| rest.is_empty() || rest.starts_with('('))
            })
            .map(|(n, _)| n)
            .collect()
    }

    /// Range of an instance, in declaration order.
    pub fn values_of(&self, inst: usize) -> &[String] {
        &self.attr_of(inst as InstId).values
    }

    pub fn is_boolean(&self, inst: usize) -> bool {
        self.attr_of(inst as InstId).boolean
    }

    pub(crate) fn attr_of(&self, inst: InstId) -> &AttrInfo {
        &self.attrs[self.instances[inst as usize].attr]
    }

    pub fn instance_id(&self, atom: &Atom) -> Result<usize> {
        self.index
            .get(&atom.to_string())
            .map(|&i| i as usize)
            .ok_or_else(|| PlogError::UnknownLiteral(atom.to_string()))
    }

    /// Compiles a ground literal against this program's instance table.
    pub(crate) fn compile_literal(&self, lit: &Literal) -> Result<GLit> {
        let unknown = || PlogError::UnknownLiteral(lit.to_string());
        if !lit.is_ground() {
            return Err(unknown());
        }
        let inst = *self.index.get(&lit.atom.to_string()).ok_or_else(unknown)?;
        let attr = self.attr_of(inst);
        let v = lit.value.as_const().unwrap();
        let val = attr.values.iter().position(|x| x == v).ok_or_else(unknown)? as ValId;
        Ok(if attr.boolean && !lit.equal {
            GLit { inst, val: 1 - val, equal: true }
        } else {
            GLit { inst, val, equal: lit.equal }
        })
    }
}

pub(crate) fn ground(program: &Program) -> Result<GroundProgram> {
    let g = Grounder::new(program);
    let mut out = Program {
        sorts: program.sorts.clone(),
        attributes: program.attributes.clone(),
        ..Program::default()
    };
    for r in &program.rules {
        let mut atoms: Vec<&Literal> = r.head.iter().collect();
        atoms.extend(&r.body.pos);
        atoms.extend(&r.body.naf);
        let stmt = r.to_string();
        for s in g.instantiate(&stmt, &atoms, &r.body, None)? {
            let head = r.head.as_ref().map(|h| subst_lit(h, &s));
            out.rules.push(Rule { head, body: subst_body(&r.body, &s) });
        }
    }
    for r in &program.randoms {
        let own = Literal::new(r.atom.clone(), Term::constant(TRUE), true);
        let mut atoms = vec![&own];
        let q;
        if let Some((_, qa)) = &r.dynamic_range {
            q = Literal::new(qa.clone(), Term::constant(TRUE), true);
            atoms.push(&q);
        }
        atoms.extend(&r.body.pos);
        atoms.extend(&r.body.naf);
        let bound = r.dynamic_range.as_ref().map(|(v, _)| v.as_str());
        let stmt = r.to_string();
        for s in g.instantiate(&stmt, &atoms, &r.body, bound)? {
            out.randoms.push(RandomSelection {
                atom: subst_atom(&r.atom, &s),
                dynamic_range: r.dynamic_range.as_ref().map(|(v, a)| (v.clone(), subst_atom(a, &s))),
                body: subst_body(&r.body, &s),
            });
        }
    }
    for p in &program.pr_atoms {
        let own = Literal::new(p.atom.clone(), p.value.clone(), true);
        let mut atoms = vec![&own];
        atoms.extend(&p.body.pos);
        atoms.extend(&p.body.naf);
        let stmt = p.to_string();
        for s in g.instantiate(&stmt, &atoms, &p.body, None)? {
            out.pr_atoms.push(PrAtom {
                atom: subst_atom(&p.atom, &s),
                value: subst_term(&p.value, &s),
                body: subst_body(&p.body, &s),
                probability: p.probability,
            });
        }
    }
    compile(out)
}

type Subst = HashMap<String, String>;

fn subst_term(t: &Term, s: &Subst) -> Term {
    match t {
        Term::Var(v) => s.get(v).map(|c| Term::Const(c.clone())).unwrap_or_else(|| t.clone()),
        c => c.clone(),
    }
}

fn subst_atom(a: &Atom, s: &Subst) -> Atom {
    Atom { name: a.name.clone(), args: a.args.iter().map(|t| subst_term(t, s)).collect() }
}

fn subst_lit(l: &Literal, s: &Subst) -> Literal {
    Literal::new(subst_atom(&l.atom, s), subst_term(&l.value, s), l.equal)
}

fn subst_body(b: &Body, s: &Subst) -> Body {
    Body {
        pos: b.pos.iter().map(|l| subst_lit(l, s)).collect(),
        naf: b.naf.iter().map(|l| subst_lit(l, s)).collect(),
        cmp: b
            .cmp
            .iter()
            .map(|c| Comparison { left: subst_term(&c.left, s), right: subst_term(&c.right, s), equal: c.equal })
            .collect(),
    }
}

/// Attributes defined only by body-less facts, with their true literals.
struct Grounder<'p> {
    prog: &'p Program,
    edb: HashMap<&'p str, HashSet<String>>,
}

impl<'p> Grounder<'p> {
    fn new(prog: &'p Program) -> Self {
        let mut edb: HashMap<&str, HashSet<String>> = prog
            .attributes
            .iter()
            .filter(|a| !prog.is_random(&a.name))
            .map(|a| (a.name.as_str(), HashSet::new()))
            .collect();
        for r in &prog.rules {
            let Some(h) = &r.head else { continue };
            if r.is_fact() && h.is_ground() && h.equal {
                if let Some(set) = edb.get_mut(h.atom.name.as_str()) {
                    set.insert(h.to_string());
                }
            } else {
                edb.remove(h.atom.name.as_str());
            }
        }
        Grounder { prog, edb }
    }

    /// Whether a ground body literal is known false from the fact base.
    fn refuted(&self, l: &Literal, negated: bool) -> bool {
        let Some(facts) = self.edb.get(l.atom.name.as_str()) else { return false };
        if !l.equal {
            return false;
        }
        facts.contains(&l.to_string()) == negated
    }

    fn instantiate(
        &self,
        stmt: &str,
        lits: &[&Literal],
        body: &Body,
        range_var: Option<&str>,
    ) -> Result<Vec<Subst>> {
        let mut domains: HashMap<String, Option<BTreeSet<String>>> = HashMap::new();
        let mut order: Vec<String> = Vec::new();
        let mut restrict = |v: &str, objs: Vec<String>, order: &mut Vec<String>| {
            if Some(v) == range_var {
                return;
            }
            let entry = domains.entry(v.to_string()).or_insert_with(|| {
                order.push(v.to_string());
                None
            });
            let objs: BTreeSet<String> = objs.into_iter().collect();
            *entry = Some(match entry.take() {
                None => objs,
                Some(prev) => prev.intersection(&objs).cloned().collect(),
            });
        };
        for l in lits {
            let attr = self.prog.attribute(&l.atom.name).expect("validated");
            for (t, s) in l.atom.args.iter().zip(&attr.arg_sorts) {
                if let Term::Var(v) = t {
                    let objs = self.prog.sort(s).map(|s| s.objects.clone()).unwrap_or_default();
                    if objs.is_empty() {
                        return Err(PlogError::EmptySort(s.clone()));
                    }
                    restrict(v, objs, &mut order);
                }
            }
            if let Term::Var(v) = &l.value {
                restrict(v, self.prog.range_objects(&attr.range), &mut order);
            }
        }
        let mut all = BTreeSet::new();
        for l in lits {
            literal_vars(l, &mut all);
        }
        body_vars(body, &mut all);
        for v in &all {
            if Some(v.as_str()) != range_var && !domains.contains_key(v) {
                return Err(PlogError::UnsafeVariable { var: v.clone(), stmt: stmt.to_string() });
            }
        }
        let doms: Vec<Vec<String>> = order
            .iter()
            .map(|v| domains[v].clone().unwrap_or_default().into_iter().collect())
            .collect();

        let mut out = Vec::new();
        let mut s = Subst::new();
        if order.is_empty() {
            // Already ground: kept verbatim.
            return Ok(vec![s]);
        }
        self.search(0, &order, &doms, body, &mut s, &mut out);
        Ok(out)
    }

    fn search(
        &self,
        i: usize,
        order: &[String],
        doms: &[Vec<String>],
        body: &Body,
        s: &mut Subst,
        out: &mut Vec<Subst>,
    ) {
        if !self.consistent(body, s) {
            return;
        }
        if i == order.len() {
            out.push(s.clone());
            return;
        }
        for c in &doms[i] {
            s.insert(order[i].clone(), c.clone());
            self.search(i + 1, order, doms, body, s, out);
        }
        s.remove(&order[i]);
    }

    /// False once a fully bound body element is known to fail.
    fn consistent(&self, body: &Body, s: &Subst) -> bool {
        for c in &body.cmp {
            let (l, r) = (subst_term(&c.left, s), subst_term(&c.right, s));
            if let (Term::Const(a), Term::Const(b)) = (&l, &r) {
                if (a == b) != c.equal {
                    return false;
                }
            }
        }
        for (lits, negated) in [(&body.pos, false), (&body.naf, true)] {
            for l in lits {
                let g = subst_lit(l, s);
                if g.is_ground() && self.refuted(&g, negated) {
                    return false;
                }
            }
        }
        true
    }
}

fn compile(program: Program) -> Result<GroundProgram> {
    let mut attrs = Vec::new();
    let mut instances = Vec::new();
    let mut index = HashMap::new();
    for (ai, a) in program.attributes.iter().enumerate() {
        attrs.push(AttrInfo {
            values: program.range_objects(&a.range),
            boolean: a.range.is_boolean(),
            random: program.is_random(&a.name),
        });
        let sorts: Vec<Vec<String>> = a
            .arg_sorts
            .iter()
            .map(|s| program.sort(s).map(|s| s.objects.clone()).unwrap_or_default())
            .collect();
        for args in cartesian(&sorts) {
            let key = Atom { name: a.name.clone(), args: args.into_iter().map(Term::Const).collect() }.to_string();
            index.insert(key.clone(), instances.len() as InstId);
            instances.push(Instance { attr: ai, key });
        }
    }
    let n = instances.len();
    let mut gp = GroundProgram {
        program,
        attrs,
        instances,
        index,
        rules: Vec::new(),
        constraints: Vec::new(),
        selections: vec![Vec::new(); n],
        prs: vec![Vec::new(); n],
        layers: Vec::new(),
        final_layer: vec![0; n],
    };

    let prog = gp.program.clone();
    for r in &prog.rules {
        if r.body.cmp.iter().any(|c| (c.left == c.right) != c.equal) {
            continue;
        }
        let mut body = compile_body(&gp, &r.body)?;
        match &r.head {
            None => gp.constraints.push(body),
            Some(h) => {
                let head = gp.compile_literal(h)?;
                if gp.attr_of(head.inst).random {
                    // A rule cannot set a random attribute; it can only demand a value.
                    body.naf.push(head);
                    gp.constraints.push(body);
                } else if !head.equal {
                    body.pos.push(GLit { equal: true, ..head });
                    gp.constraints.push(body);
                } else {
                    gp.rules.push(GRule { head, body });
                }
            }
        }
    }
    for r in &prog.randoms {
        if r.body.cmp.iter().any(|c| (c.left == c.right) != c.equal) {
            continue;
        }
        let inst = gp.instance_id(&r.atom)? as InstId;
        let range = match &r.dynamic_range {
            None => None,
            Some((var, q)) => {
                let values = gp.attr_of(inst).values.clone();
                let mut list = Vec::new();
                for (vi, v) in values.iter().enumerate() {
                    let mut s = Subst::new();
                    s.insert(var.clone(), v.clone());
                    let qa = subst_atom(q, &s);
                    let lit = gp.compile_literal(&Literal::new(qa, Term::constant(TRUE), true))?;
                    list.push((vi as ValId, lit));
                }
                Some(list)
            }
        };
        let body = compile_body(&gp, &r.body)?;
        gp.selections[inst as usize].push(GRandom { inst, range, body });
    }
    for p in &prog.pr_atoms {
        if p.body.cmp.iter().any(|c| (c.left == c.right) != c.equal) {
            continue;
        }
        let lit = gp.compile_literal(&Literal::new(p.atom.clone(), p.value.clone(), true))?;
        let body = compile_body(&gp, &p.body)?;
        gp.prs[lit.inst as usize].push(GPr { val: lit.val, body, prob: p.probability });
    }
    stratify(&mut gp)?;
    Ok(gp)
}

fn compile_body(gp: &GroundProgram, b: &Body) -> Result<GBody> {
    Ok(GBody {
        pos: b.pos.iter().map(|l| gp.compile_literal(l)).collect::<Result<_>>()?,
        naf: b.naf.iter().map(|l| gp.compile_literal(l)).collect::<Result<_>>()?,
    })
}

fn cartesian(sorts: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for objs in sorts {
        let mut next = Vec::with_capacity(out.len() * objs.len());
        for prefix in &out {
            for o in objs {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Dependency graph over (instance, value) nodes; random instances get a
/// single node covering all of their values.
struct Graph {
    base: Vec<usize>,
    random: Vec<bool>,
    owner: Vec<InstId>,
    edges: Vec<Vec<(usize, bool)>>,
}

impl Graph {
    fn new(gp: &GroundProgram) -> Self {
        let mut base = Vec::with_capacity(gp.instances.len());
        let mut random = Vec::new();
        let mut owner = Vec::new();
        for (i, _) in gp.instances.iter().enumerate() {
            let a = gp.attr_of(i as InstId);
            base.push(random.len());
            let k = if a.random { 1 } else { a.values.len() };
            for _ in 0..k {
                random.push(a.random);
                owner.push(i as InstId);
            }
        }
        let edges = vec![Vec::new(); random.len()];
        Graph { base, random, owner, edges }
    }

    fn node(&self, inst: InstId, val: ValId) -> usize {
        let b = self.base[inst as usize];
        if self.random[b] {
            b
        } else {
            b + val as usize
        }
    }

    /// Nodes a literal's truth depends on.
    fn sources(&self, gp: &GroundProgram, l: GLit) -> Vec<usize> {
        let b = self.base[l.inst as usize];
        if self.random[b] || l.equal {
            vec![self.node(l.inst, l.val)]
        } else {
            (0..gp.attr_of(l.inst).values.len() as ValId).filter(|&v| v != l.val).map(|v| b + v as usize).collect()
        }
    }

    fn add_body(&mut self, gp: &GroundProgram, body: &GBody, to: usize) {
        for (lits, neg) in [(&body.pos, false), (&body.naf, true)] {
            for &l in lits {
                for s in self.sources(gp, l) {
                    self.edges[s].push((to, neg));
                }
            }
        }
    }

    fn label(&self, gp: &GroundProgram, n: usize) -> String {
        let inst = self.owner[n];
        let key = &gp.instances[inst as usize].key;
        if self.random[n] {
            return key.clone();
        }
        let a = gp.attr_of(inst);
        let v = &a.values[n - self.base[inst as usize]];
        if a.boolean {
            if v == TRUE { key.clone() } else { format!("-{key}") }
        } else {
            format!("{key}={v}")
        }
    }
}

fn stratify(gp: &mut GroundProgram) -> Result<()> {
    let mut g = Graph::new(gp);
    for r in &gp.rules {
        let to = g.node(r.head.inst, r.head.val);
        g.add_body(gp, &r.body, to);
    }
    for sels in &gp.selections {
        for s in sels {
            let to = g.node(s.inst, 0);
            g.add_body(gp, &s.body, to);
            for (_, q) in s.range.iter().flatten() {
                for src in g.sources(gp, *q) {
                    g.edges[src].push((to, false));
                }
            }
        }
    }
    for (inst, prs) in gp.prs.iter().enumerate() {
        let to = g.node(inst as InstId, 0);
        for p in prs {
            g.add_body(gp, &p.body, to);
        }
    }

    let comp = tarjan(&g.edges);
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); ncomp];
    for (n, &c) in comp.iter().enumerate() {
        members[c].push(n);
    }
    for (n, outs) in g.edges.iter().enumerate() {
        for &(m, neg) in outs {
            if comp[n] != comp[m] {
                continue;
            }
            if g.random[n] || g.random[m] {
                let r = if g.random[n] { n } else { m };
                return Err(PlogError::CircularRandom(g.label(gp, r)));
            }
            if neg {
                let mut cycle: Vec<String> = path_within(&g.edges, &comp, m, n)
                    .into_iter()
                    .map(|x| g.label(gp, x))
                    .collect();
                cycle.push(g.label(gp, m));
                return Err(PlogError::NotStratified(cycle));
            }
        }
    }

    // Tarjan numbers components in reverse topological order.
    let mut layer_of = vec![0usize; ncomp];
    for c in (0..ncomp).rev() {
        let l = layer_of[c];
        for &n in &members[c] {
            for &(m, neg) in &g.edges[n] {
                let d = comp[m];
                if d == c {
                    continue;
                }
                let w = usize::from(neg || g.random[n] || g.random[m]);
                layer_of[d] = layer_of[d].max(l + w);
            }
        }
    }
    let node_layer = |n: usize| layer_of[comp[n]];
    let nlayers = (0..g.random.len()).map(node_layer).max().map_or(1, |m| m + 1);
    let mut layers = vec![Layer::default(); nlayers];
    for (i, f) in gp.final_layer.iter_mut().enumerate() {
        let b = g.base[i];
        let k = if g.random[b] { 1 } else { gp.attrs[gp.instances[i].attr].values.len() };
        *f = (b..b + k).map(node_layer).max().unwrap_or(0);
        if g.random[b] {
            layers[node_layer(b)].randoms.push(i as InstId);
        }
    }
    for (ri, r) in gp.rules.iter().enumerate() {
        layers[node_layer(g.node(r.head.inst, r.head.val))].rules.push(ri);
    }
    for (ci, c) in gp.constraints.iter().enumerate() {
        let l = c
            .pos
            .iter()
            .chain(&c.naf)
            .map(|&lit| gp.final_layer[lit.inst as usize])
            .max()
            .unwrap_or(0);
        layers[l].constraints.push(ci);
    }
    gp.layers = layers;
    Ok(())
}

/// Iterative Tarjan; returns the component id of every node.
fn tarjan(edges: &[Vec<(usize, bool)>]) -> Vec<usize> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let (mut next, mut ncomp) = (0, 0);
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let w = edges[v][*ei].0;
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Shortest path `from -> ... -> to` inside one component.
fn path_within(edges: &[Vec<(usize, bool)>], comp: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut prev = HashMap::new();
    let mut queue = std::collections::VecDeque::from([from]);
    prev.insert(from, from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &(w, _) in &edges[v] {
            if comp[w] == comp[from] && !prev.contains_key(&w) {
                prev.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plog::parse_program;

    #[test]
    fn ground_program_is_unchanged() {
        let src = "s={a,b}. p : s -> boolean. q : boolean.
            p(a). q :- p(a), not p(b). :- p(b).";
        let prog = parse_program(src).unwrap();
        let gp = ground(&prog).unwrap();
        assert_eq!(gp.program, prog);
    }

    #[test]
    fn near_row_adjacency() {
        let src = "row={rw0,rw1,rw2,rw3,rw4}.
            belowof : row, row -> boolean. near_row : row, row -> boolean.
            belowof(rw0,rw1). belowof(rw1,rw2). belowof(rw2,rw3). belowof(rw3,rw4).
            near_row(R1,R2) :- belowof(R1,R2).
            near_row(R1,R2) :- belowof(R2,R1).";
        let gp = ground(&parse_program(src).unwrap()).unwrap();
        let derived = gp.program.rules.iter().filter(|r| r.head.as_ref().unwrap().atom.name == "near_row").count();
        assert_eq!(derived, 8);
    }

    #[test]
    fn even_cycle_is_rejected() {
        let prog = parse_program("p : boolean. q : boolean. p :- not q. q :- not p.").unwrap();
        match ground(&prog).unwrap_err() {
            PlogError::NotStratified(cycle) => {
                assert!(cycle.contains(&"p".to_string()) && cycle.contains(&"q".to_string()), "{cycle:?}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn default_with_strong_exception_is_stratified() {
        let src = "s={a,b}. c : s -> boolean. p : s -> boolean.
            c(a). c(b). -p(b). p(X) :- c(X), not -p(X).";
        assert!(ground(&parse_program(src).unwrap()).is_ok());
    }

    #[test]
    fn random_in_cycle_is_rejected() {
        let src = "v={a,b}. x : v. q : v -> boolean. random(x : {X : q(X)}). q(a) :- x=b.";
        assert!(matches!(
            ground(&parse_program(src).unwrap()).unwrap_err(),
            PlogError::CircularRandom(_)
        ));
    }

    #[test]
    fn unbound_comparison_variable() {
        let src = "s={a}. p : boolean. p :- X != a.";
        assert!(matches!(
            ground(&parse_program(src).unwrap()).unwrap_err(),
            PlogError::UnsafeVariable { .. }
        ));
    }
}
