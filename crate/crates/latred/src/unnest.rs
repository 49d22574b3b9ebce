//! Unnested terms (algebraic circuits): conjunctions of basic equations
//! `y = x` or `y = f(x̄)` with a designated output, and the translation from
//! terms that keeps both evaluation and occurrence counts intact while
//! avoiding the size blowup of repeated substitution.

use crate::error::{Error, Result};
use crate::term::{Const, Op, Signature, Term};
use std::collections::{HashMap, HashSet};

/// Right-hand side of a basic equation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BasicRhs {
    Var(String),
    Const(Const),
    Op(Op, Vec<String>),
}

impl BasicRhs {
    pub fn referenced(&self) -> Vec<&str> {
        match self {
            BasicRhs::Var(v) => vec![v.as_str()],
            BasicRhs::Const(_) => vec![],
            BasicRhs::Op(_, args) => args.iter().map(String::as_str).collect(),
        }
    }

    pub fn print(&self) -> String {
        match self {
            BasicRhs::Var(v) => v.clone(),
            BasicRhs::Const(c) => c.symbol().to_string(),
            BasicRhs::Op(op, args) => {
                let mut s = format!("({}", op.symbol());
                for a in args {
                    s.push(' ');
                    s.push_str(a);
                }
                s.push(')');
                s
            }
        }
    }
}

/// A basic equation `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasicEq {
    pub lhs: String,
    pub rhs: BasicRhs,
}

impl BasicEq {
    pub fn print(&self) -> String {
        format!("(= {} {})", self.lhs, self.rhs.print())
    }
}

/// An unnested term T = (φ_T, y_T): input variables x̄ (no repetition),
/// defining equations in acyclic order (each right side references only
/// inputs or previously defined variables, each non-input variable has
/// exactly one defining equation), and a defined output variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnnestedTerm {
    pub sig: Signature,
    pub inputs: Vec<String>,
    pub equations: Vec<BasicEq>,
    pub output: String,
}

impl UnnestedTerm {
    /// The auxiliary variables ū_T: defined variables other than the output.
    pub fn aux_vars(&self) -> Vec<&str> {
        self.equations
            .iter()
            .map(|e| e.lhs.as_str())
            .filter(|v| *v != self.output)
            .collect()
    }

    /// Structural validity: acyclic definition order, one defining equation
    /// per non-input variable, defined (or input) output.
    pub fn validate(&self) -> Result<()> {
        let mut known: HashSet<&str> = self.inputs.iter().map(String::as_str).collect();
        if known.len() != self.inputs.len() {
            return Err(Error::Instance("repeated input variable".into()));
        }
        for eq in &self.equations {
            if known.contains(eq.lhs.as_str()) {
                return Err(Error::Instance(format!(
                    "variable {} defined twice or shadows an input",
                    eq.lhs
                )));
            }
            for r in eq.rhs.referenced() {
                if !known.contains(r) {
                    return Err(Error::Instance(format!(
                        "equation for {} references undefined {}",
                        eq.lhs, r
                    )));
                }
            }
            if let BasicRhs::Op(op, args) = &eq.rhs {
                if args.len() != op.arity() {
                    return Err(Error::Arity(format!("{} in circuit", op.symbol())));
                }
                if !self.sig.allows_op(*op) {
                    return Err(Error::Signature(format!(
                        "{} not in {}",
                        op.symbol(),
                        self.sig.name()
                    )));
                }
            }
            if let BasicRhs::Const(c) = &eq.rhs {
                if !self.sig.allows_const(*c) {
                    return Err(Error::Signature(format!(
                        "{} not in {}",
                        c.symbol(),
                        self.sig.name()
                    )));
                }
            }
            known.insert(eq.lhs.as_str());
        }
        if !known.contains(self.output.as_str()) {
            return Err(Error::Instance(format!("output {} undefined", self.output)));
        }
        Ok(())
    }

    /// Length |T|: number of basic equations plus inputs.
    pub fn len(&self) -> usize {
        self.equations.len() + self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty() && self.inputs.is_empty()
    }

    /// Occurrence count o(T): occurrences of input variables on right-hand
    /// sides; inputs that never occur still count once each.
    pub fn occurrences(&self) -> usize {
        let inputs: HashSet<&str> = self.inputs.iter().map(String::as_str).collect();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for eq in &self.equations {
            for r in eq.rhs.referenced() {
                if inputs.contains(r) {
                    *counts.entry(r).or_insert(0) += 1;
                }
            }
        }
        self.inputs
            .iter()
            .map(|v| counts.get(v.as_str()).copied().unwrap_or(0).max(1))
            .sum()
    }

    /// Expand back into an ordinary term by substitution. Exponential in the
    /// worst case; intended for small circuits and for tests.
    pub fn to_term(&self) -> Term {
        let mut defs: HashMap<&str, Term> = HashMap::new();
        for eq in &self.equations {
            let t = match &eq.rhs {
                BasicRhs::Var(v) => lookup(&defs, v),
                BasicRhs::Const(c) => Term::Const(*c),
                BasicRhs::Op(op, args) => {
                    Term::App(*op, args.iter().map(|a| lookup(&defs, a)).collect())
                }
            };
            defs.insert(&eq.lhs, t);
        }
        lookup(&defs, &self.output)
    }
}

fn lookup(defs: &HashMap<&str, Term>, v: &str) -> Term {
    defs.get(v).cloned().unwrap_or_else(|| Term::var(v))
}

/// Fresh-variable supply for the reserved `_u` namespace.
#[derive(Debug, Default)]
pub struct FreshVars {
    next: usize,
    prefix: &'static str,
}

impl FreshVars {
    pub fn new() -> Self {
        FreshVars { next: 1, prefix: "_u" }
    }

    pub fn with_prefix(prefix: &'static str) -> Self {
        FreshVars { next: 1, prefix }
    }

    pub fn fresh(&mut self) -> String {
        let v = format!("{}{}", self.prefix, self.next);
        self.next += 1;
        v
    }
}

/// Unnest a term: one basic equation per operation node, evaluation and
/// occurrence count preserved, auxiliary variables from the reserved `_u`
/// namespace.
pub fn unnest(t: &Term, sig: &Signature) -> UnnestedTerm {
    let inputs = t.variables();
    let mut fresh = FreshVars::new();
    let mut equations = Vec::new();
    let output = unnest_rec(t, &mut fresh, &mut equations);
    UnnestedTerm {
        sig: *sig,
        inputs,
        equations,
        output,
    }
}

fn unnest_rec(t: &Term, fresh: &mut FreshVars, eqs: &mut Vec<BasicEq>) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => {
            let y = fresh.fresh();
            eqs.push(BasicEq { lhs: y.clone(), rhs: BasicRhs::Const(*c) });
            y
        }
        Term::App(op, args) => {
            let arg_vars: Vec<String> =
                args.iter().map(|a| unnest_rec(a, fresh, eqs)).collect();
            let y = fresh.fresh();
            eqs.push(BasicEq { lhs: y.clone(), rhs: BasicRhs::Op(*op, arg_vars) });
            y
        }
    }
}

/// Circuit builder with structural sharing: identical right-hand sides get
/// one defining equation. Used internally where occurrence preservation is
/// not required (forcing chains, translations); `unnest` stays faithful.
#[derive(Debug)]
pub struct CircuitBuilder {
    pub sig: Signature,
    pub inputs: Vec<String>,
    pub equations: Vec<BasicEq>,
    fresh: FreshVars,
    cse: HashMap<BasicRhs, String>,
}

impl CircuitBuilder {
    pub fn new(sig: Signature, inputs: Vec<String>, prefix: &'static str) -> Self {
        CircuitBuilder {
            sig,
            inputs,
            equations: Vec::new(),
            fresh: FreshVars::with_prefix(prefix),
            cse: HashMap::new(),
        }
    }

    pub fn add_input(&mut self, v: impl Into<String>) -> String {
        let v = v.into();
        if !self.inputs.contains(&v) {
            self.inputs.push(v.clone());
        }
        v
    }

    fn define(&mut self, rhs: BasicRhs) -> String {
        if let Some(v) = self.cse.get(&rhs) {
            return v.clone();
        }
        let y = self.fresh.fresh();
        self.cse.insert(rhs.clone(), y.clone());
        self.equations.push(BasicEq { lhs: y.clone(), rhs });
        y
    }

    pub fn constant(&mut self, c: Const) -> String {
        self.define(BasicRhs::Const(c))
    }

    pub fn op(&mut self, op: Op, args: Vec<String>) -> String {
        debug_assert_eq!(op.arity(), args.len());
        self.define(BasicRhs::Op(op, args))
    }

    pub fn join(&mut self, a: &str, b: &str) -> String {
        self.op(Op::Join, vec![a.into(), b.into()])
    }
    pub fn meet(&mut self, a: &str, b: &str) -> String {
        self.op(Op::Meet, vec![a.into(), b.into()])
    }
    pub fn oc(&mut self, a: &str) -> String {
        self.op(Op::Oc, vec![a.into()])
    }

    pub fn join_all(&mut self, vars: &[String]) -> String {
        match vars.split_first() {
            None => self.constant(Const::Zero),
            Some((first, rest)) => {
                let mut acc = first.clone();
                for v in rest {
                    acc = self.join(&acc, v);
                }
                acc
            }
        }
    }

    pub fn meet_all(&mut self, vars: &[String]) -> String {
        match vars.split_first() {
            None => self.constant(Const::One),
            Some((first, rest)) => {
                let mut acc = first.clone();
                for v in rest {
                    acc = self.meet(&acc, v);
                }
                acc
            }
        }
    }

    /// Inline a term whose variables are mapped through `env`.
    pub fn inline_term(&mut self, t: &Term, env: &HashMap<String, String>) -> String {
        match t {
            Term::Var(v) => env
                .get(v)
                .cloned()
                .unwrap_or_else(|| self.add_input(v.clone())),
            Term::Const(c) => self.constant(*c),
            Term::App(op, args) => {
                let vars: Vec<String> =
                    args.iter().map(|a| self.inline_term(a, env)).collect();
                self.op(*op, vars)
            }
        }
    }

    pub fn into_unnested(self, output: String) -> UnnestedTerm {
        UnnestedTerm {
            sig: self.sig,
            inputs: self.inputs,
            equations: self.equations,
            output,
        }
    }

    /// Circuit with the current equations and the given output, without
    /// consuming the builder (for multi-output constructions).
    pub fn snapshot(&self, output: String) -> UnnestedTerm {
        UnnestedTerm {
            sig: self.sig,
            inputs: self.inputs.clone(),
            equations: self.equations.clone(),
            output,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{occurrences, parse_term};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unnest_variable_is_empty() {
        let sig = Signature::lattice(true);
        let t = Term::var("x");
        let u = unnest(&t, &sig);
        assert!(u.equations.is_empty());
        assert_eq!(u.output, "x");
        assert_eq!(u.occurrences(), 1);
    }

    #[test]
    fn unnest_two_step() {
        let sig = Signature::lattice(true);
        let t = parse_term("(+ x (^ y z))", &sig).unwrap();
        let u = unnest(&t, &sig);
        u.validate().unwrap();
        assert_eq!(u.equations.len(), 2);
        assert_eq!(
            u.equations[0].rhs,
            BasicRhs::Op(Op::Meet, vec!["y".into(), "z".into()])
        );
        assert_eq!(
            u.equations[1].rhs,
            BasicRhs::Op(Op::Join, vec!["x".into(), "_u1".into()])
        );
        assert_eq!(u.to_term(), t);
    }

    fn random_lattice_term<R: Rng>(rng: &mut R, depth: usize, vars: &[&str]) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            Term::var(vars[rng.gen_range(0..vars.len())])
        } else {
            let a = random_lattice_term(rng, depth - 1, vars);
            let b = random_lattice_term(rng, depth - 1, vars);
            if rng.gen_bool(0.5) {
                Term::join(a, b)
            } else {
                Term::meet(a, b)
            }
        }
    }

    #[test]
    fn unnest_preserves_counts_on_random_terms() {
        let sig = Signature::lattice(true);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vars = ["x1", "x2", "x3"];
        for _ in 0..100 {
            let t = random_lattice_term(&mut rng, 4, &vars);
            let u = unnest(&t, &sig);
            u.validate().unwrap();
            assert!(u.equations.len() <= t.op_nodes());
            let listed: Vec<String> = t.variables();
            assert_eq!(u.occurrences(), occurrences(&t, &listed));
            assert_eq!(u.to_term(), t);
        }
    }

    #[test]
    fn cse_builder_shares() {
        let mut b = CircuitBuilder::new(Signature::lattice(true), vec!["x".into(), "y".into()], "_c");
        let m1 = b.meet("x", "y");
        let m2 = b.meet("x", "y");
        assert_eq!(m1, m2);
        assert_eq!(b.equations.len(), 1);
    }
}
