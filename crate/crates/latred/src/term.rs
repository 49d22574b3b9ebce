//! Multi-sorted terms over four signatures (lattice, ortholattice, ring,
//! *-ring with pseudo-inversion), their s-expression concrete syntax, and
//! occurrence counting.
//!
//! Grammar (UTF-8 s-expressions):
//!   lattice      (+ t u), (^ t u), 0, 1, variables [a-z][a-z0-9]*
//!   ortholattice adds (oc t)
//!   ring         (r+ t u), (r- t u), (r* t u), r0, r1
//!   *-ring       adds (adj t), (pinv t)
//!
//! The parser additionally accepts variables starting with '_' so that
//! printed terms containing reserved auxiliary names (_u1, _u2, ...) from
//! unnesting still round-trip; user input never needs them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Sort of a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SortKind {
    Lattice,
    Ortholattice,
    Ring,
    StarRingPinv,
}

/// A signature: the sort plus, for plain lattices, whether the bounds 0,1
/// are constants of the language. Ortholattices and rings always carry
/// their constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub kind: SortKind,
    pub bounds: bool,
}

impl Signature {
    pub fn lattice(bounds: bool) -> Self {
        Signature { kind: SortKind::Lattice, bounds }
    }
    pub fn ortholattice() -> Self {
        Signature { kind: SortKind::Ortholattice, bounds: true }
    }
    pub fn ring() -> Self {
        Signature { kind: SortKind::Ring, bounds: true }
    }
    pub fn star_ring() -> Self {
        Signature { kind: SortKind::StarRingPinv, bounds: true }
    }

    pub fn is_lattice_sorted(&self) -> bool {
        matches!(self.kind, SortKind::Lattice | SortKind::Ortholattice)
    }

    pub fn is_ring_sorted(&self) -> bool {
        matches!(self.kind, SortKind::Ring | SortKind::StarRingPinv)
    }

    pub fn allows_op(&self, op: Op) -> bool {
        match op {
            Op::Join | Op::Meet => self.is_lattice_sorted(),
            Op::Oc => self.kind == SortKind::Ortholattice,
            Op::RAdd | Op::RSub | Op::RMul => self.is_ring_sorted(),
            Op::Adj | Op::Pinv => self.kind == SortKind::StarRingPinv,
        }
    }

    pub fn allows_const(&self, c: Const) -> bool {
        match c {
            Const::Zero | Const::One => self.is_lattice_sorted() && self.bounds,
            Const::RZero | Const::ROne => self.is_ring_sorted(),
        }
    }

    pub fn name(&self) -> String {
        match (self.kind, self.bounds) {
            (SortKind::Lattice, true) => "lattice".into(),
            (SortKind::Lattice, false) => "lattice-nobounds".into(),
            (SortKind::Ortholattice, _) => "ortholattice".into(),
            (SortKind::Ring, _) => "ring".into(),
            (SortKind::StarRingPinv, _) => "star-ring-pinv".into(),
        }
    }

    pub fn from_name(name: &str) -> Result<Signature> {
        match name {
            "lattice" => Ok(Signature::lattice(true)),
            "lattice-nobounds" => Ok(Signature::lattice(false)),
            "ortholattice" => Ok(Signature::ortholattice()),
            "ring" => Ok(Signature::ring()),
            "star-ring-pinv" => Ok(Signature::star_ring()),
            _ => Err(Error::Signature(format!("unknown signature {name:?}"))),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Operation symbols, fixed arities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Join, // lattice +
    Meet, // lattice ^
    Oc,   // orthocomplement
    RAdd,
    RSub,
    RMul,
    Adj,
    Pinv,
}

impl Op {
    pub fn arity(&self) -> usize {
        match self {
            Op::Oc | Op::Adj | Op::Pinv => 1,
            _ => 2,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Op::Join => "+",
            Op::Meet => "^",
            Op::Oc => "oc",
            Op::RAdd => "r+",
            Op::RSub => "r-",
            Op::RMul => "r*",
            Op::Adj => "adj",
            Op::Pinv => "pinv",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Some(match s {
            "+" => Op::Join,
            "^" => Op::Meet,
            "oc" => Op::Oc,
            "r+" => Op::RAdd,
            "r-" => Op::RSub,
            "r*" => Op::RMul,
            "adj" => Op::Adj,
            "pinv" => Op::Pinv,
            _ => return None,
        })
    }
}

/// Constant symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Const {
    Zero,
    One,
    RZero,
    ROne,
}

impl Const {
    pub fn symbol(&self) -> &'static str {
        match self {
            Const::Zero => "0",
            Const::One => "1",
            Const::RZero => "r0",
            Const::ROne => "r1",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Const> {
        Some(match s {
            "0" => Const::Zero,
            "1" => Const::One,
            "r0" => Const::RZero,
            "r1" => Const::ROne,
            _ => return None,
        })
    }
}

/// A term: variable, constant, or operation application. Arity correctness
/// and signature membership are enforced by the constructors and the parser;
/// `check_signature` re-verifies both for terms built programmatically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Const),
    App(Op, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(op: Op, args: Vec<Term>) -> Term {
        assert_eq!(op.arity(), args.len(), "arity mismatch building {op:?}");
        Term::App(op, args)
    }

    pub fn join(a: Term, b: Term) -> Term {
        Term::app(Op::Join, vec![a, b])
    }
    pub fn meet(a: Term, b: Term) -> Term {
        Term::app(Op::Meet, vec![a, b])
    }
    pub fn oc(a: Term) -> Term {
        Term::app(Op::Oc, vec![a])
    }
    pub fn radd(a: Term, b: Term) -> Term {
        Term::app(Op::RAdd, vec![a, b])
    }
    pub fn rsub(a: Term, b: Term) -> Term {
        Term::app(Op::RSub, vec![a, b])
    }
    pub fn rmul(a: Term, b: Term) -> Term {
        Term::app(Op::RMul, vec![a, b])
    }
    pub fn adj(a: Term) -> Term {
        Term::app(Op::Adj, vec![a])
    }
    pub fn pinv(a: Term) -> Term {
        Term::app(Op::Pinv, vec![a])
    }

    /// Join of a list, left-folded; empty list is the bottom constant.
    pub fn join_all(ts: Vec<Term>) -> Term {
        let mut it = ts.into_iter();
        match it.next() {
            None => Term::Const(Const::Zero),
            Some(first) => it.fold(first, Term::join),
        }
    }

    /// Meet of a list, left-folded; empty list is the top constant.
    pub fn meet_all(ts: Vec<Term>) -> Term {
        let mut it = ts.into_iter();
        match it.next() {
            None => Term::Const(Const::One),
            Some(first) => it.fold(first, Term::meet),
        }
    }

    /// Ring term for a small integer constant, built from r0, r1 by sums.
    pub fn ring_int(n: i64) -> Term {
        if n == 0 {
            return Term::Const(Const::RZero);
        }
        let mag = n.unsigned_abs();
        let mut t = Term::Const(Const::ROne);
        for _ in 1..mag {
            t = Term::radd(t, Term::Const(Const::ROne));
        }
        if n < 0 {
            Term::rsub(Term::Const(Const::RZero), t)
        } else {
            t
        }
    }

    /// Verify arities (structural) and that every symbol belongs to `sig`.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Const(c) => {
                if sig.allows_const(*c) {
                    Ok(())
                } else {
                    Err(Error::UnknownSymbol {
                        symbol: c.symbol().into(),
                        sig: sig.name(),
                    })
                }
            }
            Term::App(op, args) => {
                if !sig.allows_op(*op) {
                    return Err(Error::UnknownSymbol {
                        symbol: op.symbol().into(),
                        sig: sig.name(),
                    });
                }
                if args.len() != op.arity() {
                    return Err(Error::Arity(format!(
                        "{} expects {} arguments, got {}",
                        op.symbol(),
                        op.arity(),
                        args.len()
                    )));
                }
                for a in args {
                    a.check_signature(sig)?;
                }
                Ok(())
            }
        }
    }

    /// Number of operation nodes (constants count as nullary operations).
    pub fn op_nodes(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::op_nodes).sum::<usize>(),
        }
    }

    /// Total node count |t|.
    pub fn len(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::len).sum::<usize>(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Free variables in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Simultaneous substitution of variables by terms.
    pub fn substitute(&self, map: &std::collections::HashMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::App(op, args) => {
                Term::App(*op, args.iter().map(|a| a.substitute(map)).collect())
            }
        }
    }

    /// Canonical s-expression text.
    pub fn print(&self) -> String {
        let mut s = String::new();
        self.print_into(&mut s);
        s
    }

    fn print_into(&self, s: &mut String) {
        match self {
            Term::Var(v) => s.push_str(v),
            Term::Const(c) => s.push_str(c.symbol()),
            Term::App(op, args) => {
                s.push('(');
                s.push_str(op.symbol());
                for a in args {
                    s.push(' ');
                    a.print_into(s);
                }
                s.push(')');
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.print())
    }
}

/// An equation between two terms of a shared signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Equation {
        Equation { lhs, rhs }
    }

    pub fn print(&self) -> String {
        format!("(= {} {})", self.lhs.print(), self.rhs.print())
    }

    pub fn variables(&self) -> Vec<String> {
        let mut vs = self.lhs.variables();
        for v in self.rhs.variables() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        vs
    }
}

/// Occurrence count o(t, xs): occurrences of the listed variables in `t`,
/// where a listed variable that does not appear still counts once.
pub fn occurrences(t: &Term, listed: &[String]) -> usize {
    let mut counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    fn walk<'a>(t: &'a Term, counts: &mut std::collections::HashMap<&'a str, usize>) {
        match t {
            Term::Var(v) => *counts.entry(v.as_str()).or_insert(0) += 1,
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    walk(a, counts);
                }
            }
        }
    }
    walk(t, &mut counts);
    listed
        .iter()
        .map(|v| counts.get(v.as_str()).copied().unwrap_or(0).max(1))
        .sum()
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Tok<'a> {
    LParen,
    RParen,
    Atom(&'a str),
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                b';' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok<'a>)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        match self.src[self.pos] {
            b'(' => {
                self.pos += 1;
                Ok(Some((start, Tok::LParen)))
            }
            b')' => {
                self.pos += 1;
                Ok(Some((start, Tok::RParen)))
            }
            _ => {
                while self.pos < self.src.len()
                    && !matches!(self.src[self.pos], b'(' | b')' | b' ' | b'\t' | b'\n' | b'\r' | b';')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| Error::Syntax { pos: start, msg: "invalid UTF-8".into() })?;
                Ok(Some((start, Tok::Atom(text))))
            }
        }
    }
}

fn valid_var(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

struct Parser<'a> {
    lex: Lexer<'a>,
    sig: Signature,
}

impl<'a> Parser<'a> {
    fn parse_term(&mut self) -> Result<Term> {
        match self.lex.next()? {
            None => Err(Error::Syntax { pos: self.lex.pos, msg: "unexpected end of input".into() }),
            Some((pos, Tok::RParen)) => {
                Err(Error::Syntax { pos, msg: "unexpected ')'".into() })
            }
            Some((pos, Tok::Atom(a))) => self.atom_term(pos, a),
            Some((pos, Tok::LParen)) => {
                let (hpos, head) = match self.lex.next()? {
                    Some((p, Tok::Atom(a))) => (p, a),
                    _ => {
                        return Err(Error::Syntax { pos, msg: "expected operator after '('".into() })
                    }
                };
                let op = Op::from_symbol(head).ok_or_else(|| Error::UnknownSymbol {
                    symbol: head.to_string(),
                    sig: self.sig.name(),
                })?;
                if !self.sig.allows_op(op) {
                    return Err(Error::UnknownSymbol {
                        symbol: head.to_string(),
                        sig: self.sig.name(),
                    });
                }
                let mut args = Vec::new();
                loop {
                    self.lex.skip_ws();
                    if self.lex.pos < self.lex.src.len() && self.lex.src[self.lex.pos] == b')' {
                        self.lex.pos += 1;
                        break;
                    }
                    if self.lex.pos >= self.lex.src.len() {
                        return Err(Error::Syntax {
                            pos: self.lex.pos,
                            msg: "missing ')'".into(),
                        });
                    }
                    args.push(self.parse_term()?);
                }
                if args.len() != op.arity() {
                    return Err(Error::Arity(format!(
                        "at byte {hpos}: {} expects {} arguments, got {}",
                        op.symbol(),
                        op.arity(),
                        args.len()
                    )));
                }
                Ok(Term::App(op, args))
            }
        }
    }

    fn atom_term(&mut self, pos: usize, a: &str) -> Result<Term> {
        if let Some(c) = Const::from_symbol(a) {
            return if self.sig.allows_const(c) {
                Ok(Term::Const(c))
            } else {
                Err(Error::UnknownSymbol { symbol: a.into(), sig: self.sig.name() })
            };
        }
        if valid_var(a) {
            Ok(Term::Var(a.to_string()))
        } else {
            Err(Error::Syntax { pos, msg: format!("invalid token {a:?}") })
        }
    }

    fn expect_eof(&mut self) -> Result<()> {
        match self.lex.next()? {
            None => Ok(()),
            Some((pos, _)) => Err(Error::Syntax { pos, msg: "trailing input".into() }),
        }
    }
}

/// Parse a single term in the given signature.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term> {
    let mut p = Parser { lex: Lexer::new(text), sig: *sig };
    let t = p.parse_term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parse one equation "(= lhs rhs)".
pub fn parse_equation(text: &str, sig: &Signature) -> Result<Equation> {
    let mut lex = Lexer::new(text);
    match lex.next()? {
        Some((_, Tok::LParen)) => {}
        other => {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("expected '(=', found {other:?}"),
            })
        }
    }
    match lex.next()? {
        Some((_, Tok::Atom("="))) => {}
        other => {
            return Err(Error::Syntax {
                pos: 0,
                msg: format!("expected '=', found {other:?}"),
            })
        }
    }
    let rest = &text[lex.pos..];
    let mut p = Parser { lex: Lexer::new(rest), sig: *sig };
    let lhs = p.parse_term()?;
    let rhs = p.parse_term()?;
    p.lex.skip_ws();
    if p.lex.pos >= rest.len() || rest.as_bytes()[p.lex.pos] != b')' {
        return Err(Error::Syntax { pos: lex.pos + p.lex.pos, msg: "missing ')'".into() });
    }
    p.lex.pos += 1;
    p.expect_eof()?;
    Ok(Equation::new(lhs, rhs))
}

/// Parse an equation file: one "(= lhs rhs)" per line, blank lines and
/// ';' comments ignored.
pub fn parse_equation_file(text: &str, sig: &Signature) -> Result<Vec<Equation>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        out.push(parse_equation(trimmed, sig)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_lattice_term() {
        let sig = Signature::lattice(true);
        let t = parse_term("(+ x (^ y z))", &sig).unwrap();
        assert_eq!(t, Term::join(Term::var("x"), Term::meet(Term::var("y"), Term::var("z"))));
    }

    #[test]
    fn parse_ortholattice_const() {
        let sig = Signature::ortholattice();
        let t = parse_term("(oc 0)", &sig).unwrap();
        assert_eq!(t, Term::oc(Term::Const(Const::Zero)));
    }

    #[test]
    fn parse_star_ring() {
        let sig = Signature::star_ring();
        let t = parse_term("(pinv (adj x))", &sig).unwrap();
        assert_eq!(t, Term::pinv(Term::adj(Term::var("x"))));
    }

    #[test]
    fn reject_wrong_signature_symbols() {
        assert!(parse_term("(oc x)", &Signature::lattice(true)).is_err());
        assert!(parse_term("(r+ x y)", &Signature::ortholattice()).is_err());
        // bounds-as-constants off: 0/1 rejected
        assert!(parse_term("0", &Signature::lattice(false)).is_err());
        assert!(parse_term("0", &Signature::lattice(true)).is_ok());
    }

    #[test]
    fn reject_arity_and_syntax_errors() {
        let sig = Signature::lattice(true);
        assert!(matches!(parse_term("(+ x)", &sig), Err(Error::Arity(_))));
        assert!(matches!(parse_term("(+ x y z)", &sig), Err(Error::Arity(_))));
        assert!(matches!(parse_term("(+ x", &sig), Err(Error::Syntax { .. })));
        assert!(matches!(parse_term(")", &sig), Err(Error::Syntax { .. })));
        assert!(matches!(parse_term("X", &sig), Err(Error::Syntax { .. })));
    }

    #[test]
    fn print_parse_roundtrip() {
        let sig = Signature::star_ring();
        for text in [
            "(r+ x (r* y (pinv z)))",
            "(adj (r- r0 r1))",
            "x1",
        ] {
            let t = parse_term(text, &sig).unwrap();
            assert_eq!(t.print(), text);
            assert_eq!(parse_term(&t.print(), &sig).unwrap(), t);
        }
    }

    #[test]
    fn occurrence_counting() {
        let sig = Signature::lattice(true);
        let t = parse_term("(+ x1 x1)", &sig).unwrap();
        assert_eq!(occurrences(&t, &["x1".into()]), 2);
        // a listed variable that is absent still counts once
        let t = parse_term("x1", &sig).unwrap();
        assert_eq!(occurrences(&t, &["x1".into(), "x2".into()]), 2);
    }

    #[test]
    fn equation_parsing() {
        let sig = Signature::lattice(true);
        let eq = parse_equation("(= (+ x y) 1)", &sig).unwrap();
        assert_eq!(eq.print(), "(= (+ x y) 1)");
        let eqs = parse_equation_file("(= x y)\n; comment\n\n(= y z)\n", &sig).unwrap();
        assert_eq!(eqs.len(), 2);
    }
}
