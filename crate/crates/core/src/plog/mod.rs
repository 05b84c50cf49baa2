//! A restricted P-log-style language: sorts, attributes, stratified rules with
//! classical and default negation, random selections and pr-atoms.
//!
//! Evaluation enumerates every possible world of a ground program together
//! with its probability, so queries are exact.

pub mod ast;
mod eval;
mod ground;
mod parser;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

pub use ast::*;
pub use eval::{PossibleWorld, WorldDistribution};
pub use ground::GroundProgram;
pub use parser::parse_literal;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlogError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("undeclared sort `{0}`")]
    UndeclaredSort(String),
    #[error("undeclared attribute `{0}`")]
    UndeclaredAttribute(String),
    #[error("attribute `{name}` takes {expected} argument(s), found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("`{object}` is not an object of `{sort}`")]
    NotInSort { object: String, sort: String },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("invalid statement `{stmt}`: {reason}")]
    Invalid { stmt: String, reason: String },
    #[error("variable `{var}` is not bound by any sort in `{stmt}`")]
    UnsafeVariable { var: String, stmt: String },
    #[error("empty sort `{0}` used in a rule")]
    EmptySort(String),
    #[error("program is not stratified: cycle through default negation {}", .0.join(" -> "))]
    NotStratified(Vec<String>),
    #[error("random attribute `{0}` depends on itself")]
    CircularRandom(String),
    #[error("more than one random selection is active for `{0}`")]
    MultipleSelections(String),
    #[error("pr-atoms for `{attr}` declare total mass {total} > 1")]
    OverDeclared { attr: String, total: f64 },
    #[error("conflicting pr-atoms for `{0}`")]
    ConflictingPr(String),
    #[error("do() needs a ground `a=y` literal on a random attribute, got `{0}`")]
    InvalidIntervention(String),
    #[error("`{0}` is not a ground instance of any declared attribute")]
    UnknownLiteral(String),
    #[error("no consistent possible world")]
    NoWorlds,
}

pub type Result<T> = std::result::Result<T, PlogError>;

/// Parses and validates program text.
pub fn parse_program(text: &str) -> Result<Program> {
    let prog = parser::parse_raw(text)?;
    validate(&prog)?;
    Ok(prog)
}

/// Parses program text without checking it against declarations, for
/// fragments that only make sense once joined with another program.
pub fn parse_fragment(text: &str) -> Result<Program> {
    parser::parse_raw(text)
}

pub fn ground(program: &Program) -> Result<GroundProgram> {
    ground::ground(program)
}

pub fn enumerate_worlds(gp: &GroundProgram, evidence: &[Evidence]) -> Result<WorldDistribution> {
    eval::enumerate(gp, evidence)
}

/// Probability that `target` holds given `evidence`.
pub fn query(gp: &GroundProgram, target: &Literal, evidence: &[Evidence]) -> Result<f64> {
    query_all(gp, std::slice::from_ref(target), evidence)
}

/// Probability that every literal in `targets` holds given `evidence`.
pub fn query_all(gp: &GroundProgram, targets: &[Literal], evidence: &[Evidence]) -> Result<f64> {
    let dist = enumerate_worlds(gp, evidence)?;
    dist.probability(gp, targets)
}

/// Checks declarations and every literal against them.
pub fn validate(prog: &Program) -> Result<()> {
    let mut seen = HashSet::new();
    for s in &prog.sorts {
        if s.name == BOOLEAN || !seen.insert(s.name.as_str()) {
            return Err(PlogError::Duplicate(s.name.clone()));
        }
        let mut objs = HashSet::new();
        for o in &s.objects {
            if !objs.insert(o.as_str()) {
                return Err(PlogError::Duplicate(format!("{}.{o}", s.name)));
            }
        }
    }
    let mut seen = HashSet::new();
    for a in &prog.attributes {
        if !seen.insert(a.name.as_str()) {
            return Err(PlogError::Duplicate(a.name.clone()));
        }
        for s in &a.arg_sorts {
            if prog.sort(s).is_none() {
                return Err(PlogError::UndeclaredSort(s.clone()));
            }
        }
        if let Range::Sort(s) = &a.range {
            if prog.sort(s).is_none() {
                return Err(PlogError::UndeclaredSort(s.clone()));
            }
        }
    }

    let check_body = |b: &Body| -> Result<()> {
        for l in b.pos.iter().chain(&b.naf) {
            check_literal(prog, l)?;
        }
        Ok(())
    };
    for r in &prog.rules {
        if let Some(h) = &r.head {
            check_literal(prog, h)?;
        }
        check_body(&r.body)?;
    }
    for r in &prog.randoms {
        let attr = check_atom(prog, &r.atom)?;
        if let Some((var, q)) = &r.dynamic_range {
            let qa = check_atom(prog, q)?;
            if !qa.range.is_boolean() {
                return Err(PlogError::Invalid {
                    stmt: r.to_string(),
                    reason: format!("range qualifier `{}` must be boolean", q.name),
                });
            }
            let pos = q.args.iter().position(|t| *t == Term::Var(var.clone()));
            match pos {
                Some(i) if Range::Sort(qa.arg_sorts[i].clone()) == attr.range => {}
                _ => {
                    return Err(PlogError::Invalid {
                        stmt: r.to_string(),
                        reason: format!("`{var}` must range over the values of `{}`", r.atom.name),
                    })
                }
            }
        }
        check_body(&r.body)?;
    }
    for p in &prog.pr_atoms {
        check_literal(prog, &Literal::new(p.atom.clone(), p.value.clone(), true))?;
        if !prog.is_random(&p.atom.name) {
            return Err(PlogError::Invalid {
                stmt: p.to_string(),
                reason: format!("`{}` has no random selection", p.atom.name),
            });
        }
        if !(0.0..=1.0).contains(&p.probability) {
            return Err(PlogError::Invalid {
                stmt: p.to_string(),
                reason: "probability outside [0, 1]".into(),
            });
        }
        check_body(&p.body)?;
    }
    Ok(())
}

fn check_atom<'p>(prog: &'p Program, atom: &Atom) -> Result<&'p Attribute> {
    let attr = prog
        .attribute(&atom.name)
        .ok_or_else(|| PlogError::UndeclaredAttribute(atom.name.clone()))?;
    if attr.arg_sorts.len() != atom.args.len() {
        return Err(PlogError::Arity {
            name: atom.name.clone(),
            expected: attr.arg_sorts.len(),
            found: atom.args.len(),
        });
    }
    for (t, s) in atom.args.iter().zip(&attr.arg_sorts) {
        check_term(prog, t, &Range::Sort(s.clone()))?;
    }
    Ok(attr)
}

fn check_literal(prog: &Program, lit: &Literal) -> Result<()> {
    let attr = check_atom(prog, &lit.atom)?;
    check_term(prog, &lit.value, &attr.range)
}

fn check_term(prog: &Program, t: &Term, range: &Range) -> Result<()> {
    let Term::Const(c) = t else { return Ok(()) };
    if prog.range_objects(range).iter().any(|o| o == c) {
        return Ok(());
    }
    let sort = match range {
        Range::Boolean => BOOLEAN.to_string(),
        Range::Sort(s) => s.clone(),
    };
    Err(PlogError::NotInSort { object: c.clone(), sort })
}

/// Variables occurring anywhere in a body.
pub(crate) fn body_vars(b: &Body, out: &mut BTreeSet<String>) {
    for l in b.pos.iter().chain(&b.naf) {
        literal_vars(l, out);
    }
    for c in &b.cmp {
        for t in [&c.left, &c.right] {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
    }
}

pub(crate) fn literal_vars(l: &Literal, out: &mut BTreeSet<String>) {
    for t in l.atom.args.iter().chain(std::iter::once(&l.value)) {
        if let Term::Var(v) = t {
            out.insert(v.clone());
        }
    }
}
