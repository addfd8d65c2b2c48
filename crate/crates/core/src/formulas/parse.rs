//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula    := ("forall" | "exists") ident "." formula | implication
//! implication:= disj ["implies" formula]
//! disj       := conj {"or" conj}
//! conj       := lit {"and" lit}
//! lit        := "not" lit | "(" formula ")" | atom
//! atom       := term "=" term
//! term       := factor {"+" factor}
//! factor     := prim {"*" prim}
//! prim       := ident | rational | "(" term ")"
//! ```

use super::{Formula, FormulaError, Quant, Rel, Term};
use crate::numbers::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Plus,
    Star,
    Eq,
    LParen,
    RParen,
    Dot,
    LBrace,
    RBrace,
    Comma,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Num(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Star => "*".into(),
            Tok::Eq => "=".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Dot => ".".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::Comma => ",".into(),
        }
    }
}

pub(crate) const KEYWORDS: &[&str] = &["forall", "exists", "and", "or", "not", "implies", "iff", "in"];

pub(crate) fn lex(src: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'=' => Tok::Eq,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'.' => Tok::Dot,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b',' => Tok::Comma,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                out.push((Tok::Num(src[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(FormulaError::Syntax { pos: i, msg: format!("unexpected character '{ch}'") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

pub(crate) struct Cursor {
    pub(crate) toks: Vec<(Tok, usize)>,
    pub(crate) at: usize,
    pub(crate) end: usize,
}

impl Cursor {
    pub(crate) fn new(src: &str) -> Result<Cursor, FormulaError> {
        Ok(Cursor { toks: lex(src)?, at: 0, end: src.len() })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    pub(crate) fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    pub(crate) fn error(&self, what: &str) -> FormulaError {
        let msg = match self.peek() {
            Some(t) => format!("unexpected token '{}', expected {what}", t.describe()),
            None => format!("unexpected end of input, expected {what}"),
        };
        FormulaError::Syntax { pos: self.pos(), msg }
    }

    pub(crate) fn expect(&mut self, tok: Tok, what: &str) -> Result<(), FormulaError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(String, usize), FormulaError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let out = (s.clone(), self.pos());
                self.at += 1;
                Ok(out)
            }
            _ => Err(self.error("identifier")),
        }
    }

    pub(crate) fn finish(&self) -> Result<(), FormulaError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.error("end of input")),
        }
    }
}

struct Parser {
    cur: Cursor,
    declared: Option<Vec<String>>,
    scope: Vec<String>,
}

impl Parser {
    fn formula(&mut self) -> Result<Formula, FormulaError> {
        for (kw, q) in [("forall", Quant::Forall), ("exists", Quant::Exists)] {
            if self.cur.is_kw(kw) {
                self.cur.bump();
                let (var, _) = self.cur.ident()?;
                self.cur.expect(Tok::Dot, "'.'")?;
                self.scope.push(var.clone());
                let body = self.formula();
                self.scope.pop();
                return Ok(Formula::quant(q, &var, body?));
            }
        }
        let lhs = self.disj()?;
        if self.cur.is_kw("implies") {
            self.cur.bump();
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.conj()?;
        while self.cur.is_kw("or") {
            self.cur.bump();
            acc = Formula::Or(Box::new(acc), Box::new(self.conj()?));
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.lit()?;
        while self.cur.is_kw("and") {
            self.cur.bump();
            acc = Formula::And(Box::new(acc), Box::new(self.lit()?));
        }
        Ok(acc)
    }

    fn lit(&mut self) -> Result<Formula, FormulaError> {
        if self.cur.is_kw("not") {
            self.cur.bump();
            return Ok(Formula::Not(Box::new(self.lit()?)));
        }
        if self.cur.peek() == Some(&Tok::LParen) {
            // Either a parenthesized formula or an atom whose left term starts with '('.
            let save = self.cur.at;
            self.cur.bump();
            let grouped = self.formula().and_then(|f| {
                self.cur.expect(Tok::RParen, "')'")?;
                Ok(f)
            });
            match grouped {
                Ok(f) if !matches!(self.cur.peek(), Some(Tok::Plus | Tok::Star | Tok::Eq)) => {
                    return Ok(f)
                }
                Ok(_) => self.cur.at = save,
                Err(first) => {
                    self.cur.at = save;
                    // Report whichever reading got further.
                    return self.atom().map_err(|second| match (&first, &second) {
                        (FormulaError::Syntax { pos: p1, .. }, FormulaError::Syntax { pos: p2, .. })
                            if p1 > p2 =>
                        {
                            first
                        }
                        _ => second,
                    });
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.term()?;
        self.cur.expect(Tok::Eq, "'='")?;
        let rhs = self.term()?;
        Ok(Formula::Atom(lhs, Rel::Eq, rhs))
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        let mut acc = self.factor()?;
        while self.cur.peek() == Some(&Tok::Plus) {
            self.cur.bump();
            acc = Term::add(acc, self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Term, FormulaError> {
        let mut acc = self.prim()?;
        while self.cur.peek() == Some(&Tok::Star) {
            self.cur.bump();
            acc = Term::mul(acc, self.prim()?);
        }
        Ok(acc)
    }

    fn prim(&mut self) -> Result<Term, FormulaError> {
        match self.cur.peek() {
            Some(Tok::Num(s)) => {
                let pos = self.cur.pos();
                let q: Rat = s
                    .parse()
                    .map_err(|e| FormulaError::Syntax { pos, msg: format!("{e}") })?;
                self.cur.bump();
                Ok(Term::Const(q))
            }
            Some(Tok::LParen) => {
                self.cur.bump();
                let t = self.term()?;
                self.cur.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(Tok::Ident(_)) => {
                let (name, pos) = self.cur.ident().map_err(|_| self.cur.error("term"))?;
                if let Some(decl) = &self.declared {
                    if !self.scope.contains(&name) && !decl.contains(&name) {
                        return Err(FormulaError::UnboundVariable { name, pos });
                    }
                }
                Ok(Term::Var(name))
            }
            _ => Err(self.cur.error("term")),
        }
    }
}

fn run<T>(
    text: &str,
    declared: Option<&[&str]>,
    f: impl FnOnce(&mut Parser) -> Result<T, FormulaError>,
) -> Result<T, FormulaError> {
    let mut p = Parser {
        cur: Cursor::new(text)?,
        declared: declared.map(|d| d.iter().map(|s| s.to_string()).collect()),
        scope: Vec::new(),
    };
    let out = f(&mut p)?;
    p.cur.finish()?;
    Ok(out)
}

/// Parses a formula; variables not bound by a quantifier become free variables.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    run(text, None, Parser::formula)
}

/// Parses a formula whose free variables must all appear in `free`.
pub fn parse_formula_with(text: &str, free: &[&str]) -> Result<Formula, FormulaError> {
    run(text, Some(free), Parser::formula)
}

pub fn parse_term(text: &str) -> Result<Term, FormulaError> {
    run(text, None, Parser::term)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub formula: Formula,
}

/// Reads `name : formula` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, FormulaError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let wrap = |e: FormulaError| FormulaError::Corpus { line: line_no, source: Box::new(e) };
        let (name, body) = trimmed.split_once(':').ok_or_else(|| {
            wrap(FormulaError::Syntax { pos: 0, msg: "expected 'name : formula'".into() })
        })?;
        let name = name.trim();
        if name.is_empty()
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(wrap(FormulaError::Syntax { pos: 0, msg: format!("bad name '{name}'") }));
        }
        let formula = parse_formula(body).map_err(wrap)?;
        out.push(CorpusEntry { name: name.to_string(), formula });
    }
    Ok(out)
}
