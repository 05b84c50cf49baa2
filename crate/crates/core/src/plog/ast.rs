//! Syntax tree for knowledge programs, plus a pretty-printer whose output
//! parses back to the same program.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const BOOLEAN: &str = "boolean";
pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortDecl {
    pub name: String,
    pub objects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Range {
    Boolean,
    Sort(String),
}

impl Range {
    pub fn is_boolean(&self) -> bool {
        matches!(self, Range::Boolean)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub arg_sorts: Vec<String>,
    pub range: Range,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn constant(s: &str) -> Self {
        Term::Const(s.to_string())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

/// An attribute applied to argument terms, `a(t1, ..., tn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, args: &[&str]) -> Self {
        Atom {
            name: name.to_string(),
            args: args.iter().map(|a| Term::constant(a)).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }
}

/// `a(t) = y` when `equal`, `a(t) != y` otherwise. Boolean attributes use the
/// values `true`/`false`, so `p(t)` is `p(t) = true` and `-p(t)` is
/// `p(t) = false`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub value: Term,
    pub equal: bool,
}

impl Literal {
    pub fn new(atom: Atom, value: Term, equal: bool) -> Self {
        Literal { atom, value, equal }
    }

    /// Ground literal `name(args) = value`.
    pub fn eq(name: &str, args: &[&str], value: &str) -> Self {
        Literal::new(Atom::new(name, args), Term::constant(value), true)
    }

    /// Ground boolean literal `name(args)` or `-name(args)`.
    pub fn boolean(name: &str, args: &[&str], positive: bool) -> Self {
        Literal::eq(name, args, if positive { TRUE } else { FALSE })
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground() && !self.value.is_var()
    }

    /// Classical complement for boolean literals; flips `=`/`!=` otherwise.
    pub fn complement(&self) -> Literal {
        match self.value.as_const() {
            Some(TRUE) if self.equal => Literal::new(self.atom.clone(), Term::constant(FALSE), true),
            Some(FALSE) if self.equal => Literal::new(self.atom.clone(), Term::constant(TRUE), true),
            _ => Literal::new(self.atom.clone(), self.value.clone(), !self.equal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Comparison {
    pub left: Term,
    pub right: Term,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Body {
    pub pos: Vec<Literal>,
    pub naf: Vec<Literal>,
    pub cmp: Vec<Comparison>,
}

impl Body {
    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.naf.is_empty() && self.cmp.is_empty()
    }
}

/// A rule; `head == None` makes it a constraint, an empty body a fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub head: Option<Literal>,
    pub body: Body,
}

impl Rule {
    pub fn fact(lit: Literal) -> Self {
        Rule { head: Some(lit), body: Body::default() }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }
}

/// `random(a(t) : {X : q(X)}) :- B.`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSelection {
    pub atom: Atom,
    pub dynamic_range: Option<(String, Atom)>,
    pub body: Body,
}

/// `pr(a(t) = y | B) = v.`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrAtom {
    pub atom: Atom,
    pub value: Term,
    pub body: Body,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvidenceKind {
    Obs,
    Do,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Evidence {
    pub kind: EvidenceKind,
    pub literal: Literal,
}

impl Evidence {
    pub fn obs(literal: Literal) -> Self {
        Evidence { kind: EvidenceKind::Obs, literal }
    }

    pub fn intervene(literal: Literal) -> Self {
        Evidence { kind: EvidenceKind::Do, literal }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Program {
    pub sorts: Vec<SortDecl>,
    pub attributes: Vec<Attribute>,
    pub rules: Vec<Rule>,
    pub randoms: Vec<RandomSelection>,
    pub pr_atoms: Vec<PrAtom>,
}

impl Program {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Objects of a range; booleans are `[false, true]`.
    pub fn range_objects(&self, range: &Range) -> Vec<String> {
        match range {
            Range::Boolean => vec![FALSE.to_string(), TRUE.to_string()],
            Range::Sort(s) => self.sort(s).map(|s| s.objects.clone()).unwrap_or_default(),
        }
    }

    pub fn is_random(&self, attr: &str) -> bool {
        self.randoms.iter().any(|r| r.atom.name == attr)
    }

    /// Appends every statement of `other`; declarations already present are
    /// kept once.
    pub fn extend(&mut self, other: Program) {
        for s in other.sorts {
            if self.sort(&s.name).is_none() {
                self.sorts.push(s);
            }
        }
        for a in other.attributes {
            if self.attribute(&a.name).is_none() {
                self.attributes.push(a);
            }
        }
        self.rules.extend(other.rules);
        self.randoms.extend(other.randoms);
        self.pr_atoms.extend(other.pr_atoms);
    }

    pub fn add_fact(&mut self, lit: Literal) {
        self.rules.push(Rule::fact(lit));
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) | Term::Var(c) => f.write_str(c),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.value.as_const(), self.equal) {
            (Some(TRUE), true) => write!(f, "{}", self.atom),
            (Some(FALSE), true) => write!(f, "-{}", self.atom),
            (_, true) => write!(f, "{}={}", self.atom, self.value),
            (_, false) => write!(f, "{}!={}", self.atom, self.value),
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.equal { "=" } else { "!=" };
        write!(f, "{}{}{}", self.left, op, self.right)
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.pos.iter().map(|l| l.to_string()).collect();
        parts.extend(self.naf.iter().map(|l| format!("not {l}")));
        parts.extend(self.cmp.iter().map(|c| c.to_string()));
        f.write_str(&parts.join(", "))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.head, self.body.is_empty()) {
            (Some(h), true) => write!(f, "{h}."),
            (Some(h), false) => write!(f, "{h} :- {}.", self.body),
            (None, _) => write!(f, ":- {}.", self.body),
        }
    }
}

impl fmt::Display for RandomSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "random({}", self.atom)?;
        if let Some((v, q)) = &self.dynamic_range {
            write!(f, " : {{{v} : {q}}}")?;
        }
        f.write_str(")")?;
        if !self.body.is_empty() {
            write!(f, " :- {}", self.body)?;
        }
        f.write_str(".")
    }
}

impl fmt::Display for PrAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pr({}={}", self.atom, self.value)?;
        if !self.body.is_empty() {
            write!(f, " | {}", self.body)?;
        }
        // `{:?}` keeps a decimal point and round-trips exactly.
        write!(f, ") = {:?}.", self.probability)
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EvidenceKind::Obs => write!(f, "obs({})", self.literal),
            EvidenceKind::Do => write!(f, "do({})", self.literal),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sorts {
            writeln!(f, "{} = {{{}}}.", s.name, s.objects.join(", "))?;
        }
        for a in &self.attributes {
            let range = match &a.range {
                Range::Boolean => BOOLEAN,
                Range::Sort(s) => s.as_str(),
            };
            if a.arg_sorts.is_empty() {
                writeln!(f, "{} : {}.", a.name, range)?;
            } else {
                writeln!(f, "{} : {} -> {}.", a.name, a.arg_sorts.join(", "), range)?;
            }
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        for r in &self.randoms {
            writeln!(f, "{r}")?;
        }
        for p in &self.pr_atoms {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}
