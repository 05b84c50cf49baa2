//! Hand-written lexer and recursive-descent parser for `.plog` sources.
//!
//! ```text
//! program  := { stmt } ;
//! stmt     := sortdecl | attrdecl | rule | random | pratom | fact ;
//! sortdecl := ident "=" "{" ident {"," ident} "}" "." ;
//! attrdecl := ident ":" ident {"," ident} "->" ident "." | ident ":" ident "." ;
//! rule     := head ":-" body "." | head "." | ":-" body "." ;
//! random   := "random(" atom [":" "{" var ":" atom "}"] ")" [":-" body] "." ;
//! pratom   := "pr(" atom "=" value ["|" body] ")" "=" float "." ;
//! ```
//!
//! `%` starts a comment. Identifiers start lowercase, variables uppercase (or
//! `_`). `-` is classical negation, `not` default negation.

use super::ast::*;
use super::PlogError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    If,
    Colon,
    Arrow,
    Eq,
    Neq,
    Minus,
    Bar,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Not => "`not`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::If => "`:-`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, PlogError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: l0, col: c0 });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::If, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'>') => push(Tok::Neq, 2, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                // A `.` is part of the number only when a digit follows;
                // otherwise it terminates the statement.
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[start..j].iter().collect();
                push(Tok::Number(text), j - start, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                let tok = if text == "not" {
                    Tok::Not
                } else if c.is_uppercase() || c == '_' {
                    Tok::Var(text)
                } else {
                    Tok::Ident(text)
                };
                push(tok, j - start, &mut i, &mut col);
            }
            other => {
                return Err(PlogError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> PlogError {
        let s = &self.toks[self.pos];
        PlogError::Syntax { line: s.line, col: s.col, message }
    }

    fn expect(&mut self, want: Tok) -> Result<(), PlogError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self) -> Result<String, PlogError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.error(format!("expected identifier, found {}", t.describe()))),
        }
    }

    fn term(&mut self) -> Result<Term, PlogError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Term::Const(s))
            }
            Tok::Var(s) => {
                self.bump();
                Ok(Term::Var(s))
            }
            t => Err(self.error(format!("expected term, found {}", t.describe()))),
        }
    }

    fn atom(&mut self) -> Result<Atom, PlogError> {
        let name = self.ident()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Atom { name, args })
    }

    /// `-atom`, `atom`, `atom = term`, `atom != term`.
    fn literal(&mut self) -> Result<Literal, PlogError> {
        let negated = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let atom = self.atom()?;
        if negated {
            return Ok(Literal::new(atom, Term::constant(FALSE), true));
        }
        match self.peek() {
            Tok::Eq => {
                self.bump();
                let v = self.term()?;
                Ok(Literal::new(atom, v, true))
            }
            Tok::Neq => {
                self.bump();
                let v = self.term()?;
                Ok(Literal::new(atom, v, false))
            }
            _ => Ok(Literal::new(atom, Term::constant(TRUE), true)),
        }
    }

    fn body(&mut self) -> Result<Body, PlogError> {
        let mut body = Body::default();
        loop {
            match self.peek().clone() {
                Tok::Not => {
                    self.bump();
                    body.naf.push(self.literal()?);
                }
                Tok::Var(v) => {
                    self.bump();
                    let equal = match self.bump() {
                        Tok::Eq => true,
                        Tok::Neq => false,
                        t => {
                            self.pos -= 1;
                            return Err(self.error(format!(
                                "expected `=` or `!=` after variable, found {}",
                                t.describe()
                            )));
                        }
                    };
                    let right = self.term()?;
                    body.cmp.push(Comparison { left: Term::Var(v), right, equal });
                }
                _ => body.pos.push(self.literal()?),
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(body);
            }
        }
    }

    fn number(&mut self) -> Result<f64, PlogError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let v = s
                    .parse::<f64>()
                    .map_err(|_| self.error(format!("invalid number `{s}`")))?;
                self.bump();
                Ok(v)
            }
            t => Err(self.error(format!("expected number, found {}", t.describe()))),
        }
    }

    fn statement(&mut self, prog: &mut Program) -> Result<(), PlogError> {
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::If, _) => {
                self.bump();
                let body = self.body()?;
                self.expect(Tok::Dot)?;
                prog.rules.push(Rule { head: None, body });
            }
            (Tok::Ident(name), Tok::Eq) if *self.peek_at(2) == Tok::LBrace => {
                self.bump();
                self.bump();
                self.bump();
                let mut objects = vec![self.ident()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    objects.push(self.ident()?);
                }
                self.expect(Tok::RBrace)?;
                self.expect(Tok::Dot)?;
                prog.sorts.push(SortDecl { name, objects });
            }
            (Tok::Ident(name), Tok::Colon) => {
                self.bump();
                self.bump();
                let mut sorts = vec![self.ident()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    sorts.push(self.ident()?);
                }
                let (arg_sorts, range) = if *self.peek() == Tok::Arrow {
                    self.bump();
                    (sorts, self.ident()?)
                } else if sorts.len() == 1 {
                    (Vec::new(), sorts.pop().unwrap())
                } else {
                    return Err(self.error("expected `->` in attribute declaration".into()));
                };
                self.expect(Tok::Dot)?;
                let range = if range == BOOLEAN { Range::Boolean } else { Range::Sort(range) };
                prog.attributes.push(Attribute { name, arg_sorts, range });
            }
            (Tok::Ident(kw), Tok::LParen) if kw == "random" => {
                self.bump();
                self.bump();
                let atom = self.atom()?;
                let mut dynamic_range = None;
                if *self.peek() == Tok::Colon {
                    self.bump();
                    self.expect(Tok::LBrace)?;
                    let var = match self.bump() {
                        Tok::Var(v) => v,
                        t => {
                            self.pos -= 1;
                            return Err(self.error(format!("expected variable, found {}", t.describe())));
                        }
                    };
                    self.expect(Tok::Colon)?;
                    let q = self.atom()?;
                    self.expect(Tok::RBrace)?;
                    dynamic_range = Some((var, q));
                }
                self.expect(Tok::RParen)?;
                let body = if *self.peek() == Tok::If {
                    self.bump();
                    self.body()?
                } else {
                    Body::default()
                };
                self.expect(Tok::Dot)?;
                prog.randoms.push(RandomSelection { atom, dynamic_range, body });
            }
            (Tok::Ident(kw), Tok::LParen) if kw == "pr" => {
                self.bump();
                self.bump();
                let atom = self.atom()?;
                let value = if *self.peek() == Tok::Eq {
                    self.bump();
                    self.term()?
                } else {
                    Term::constant(TRUE)
                };
                let body = if *self.peek() == Tok::Bar {
                    self.bump();
                    self.body()?
                } else {
                    Body::default()
                };
                self.expect(Tok::RParen)?;
                self.expect(Tok::Eq)?;
                let probability = self.number()?;
                self.expect(Tok::Dot)?;
                prog.pr_atoms.push(PrAtom { atom, value, body, probability });
            }
            _ => {
                let head = self.literal()?;
                let body = if *self.peek() == Tok::If {
                    self.bump();
                    self.body()?
                } else {
                    Body::default()
                };
                self.expect(Tok::Dot)?;
                prog.rules.push(Rule { head: Some(head), body });
            }
        }
        Ok(())
    }
}

/// Parses program text without semantic validation.
pub(crate) fn parse_raw(text: &str) -> Result<Program, PlogError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut prog = Program::default();
    while *p.peek() != Tok::Eof {
        p.statement(&mut prog)?;
    }
    Ok(prog)
}

/// Parses a single literal such as `curr_time=morning` or `-paid(bob)`.
pub fn parse_literal(text: &str) -> Result<Literal, PlogError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let lit = p.literal()?;
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {} after literal", p.peek().describe())));
    }
    Ok(lit)
}
