//! Conjunction-to-single-equation normal forms and the SAT -> sSAT
//! flattening into basic equations.

use crate::error::{Error, Result};
use crate::term::{Const, Equation, Signature, SortKind, Term};
use crate::unnest::{unnest, BasicEq, BasicRhs, FreshVars, UnnestedTerm};

/// In a modular ortholattice, a conjunction of equations holds iff a single
/// term vanishes: s = t becomes (s+t) meet (s meet t)^perp and the
/// conjunction becomes the sum. Left fold, order preserved.
pub fn conj_to_single_ol(eqs: &[Equation], sig: &Signature) -> Result<Term> {
    if sig.kind != SortKind::Ortholattice {
        return Err(Error::Signature(format!(
            "conj_to_single_ol needs the ortholattice signature, got {}",
            sig.name()
        )));
    }
    for eq in eqs {
        eq.lhs.check_signature(sig)?;
        eq.rhs.check_signature(sig)?;
    }
    let parts: Vec<Term> = eqs.iter().map(|eq| single_ol_equation(&eq.lhs, &eq.rhs)).collect();
    Ok(Term::join_all(parts))
}

/// (s+t) meet (s meet t)^perp: zero exactly when s = t.
pub fn single_ol_equation(s: &Term, t: &Term) -> Term {
    Term::meet(
        Term::join(s.clone(), t.clone()),
        Term::oc(Term::meet(s.clone(), t.clone())),
    )
}

/// In a *-regular ring with pseudo-inversion, a conjunction of equations
/// t_i = 0 holds iff 1 - prod_i (1 - t_i t_i+) vanishes. Equations with a
/// nonzero right side are first normalized by subtraction.
pub fn conj_to_single_ring(eqs: &[Equation], sig: &Signature) -> Result<Term> {
    if sig.kind != SortKind::StarRingPinv {
        return Err(Error::Signature(format!(
            "conj_to_single_ring needs the star-ring signature, got {}",
            sig.name()
        )));
    }
    let one = || Term::Const(Const::ROne);
    let mut prod = one();
    for eq in eqs {
        eq.lhs.check_signature(sig)?;
        eq.rhs.check_signature(sig)?;
        let t = if eq.rhs == Term::Const(Const::RZero) {
            eq.lhs.clone()
        } else {
            Term::rsub(eq.lhs.clone(), eq.rhs.clone())
        };
        let factor = Term::rsub(one(), Term::rmul(t.clone(), Term::pinv(t)));
        prod = Term::rmul(prod, factor);
    }
    Ok(Term::rsub(one(), prod))
}

/// A conjunction of basic equations with designated free variables; the
/// payload of sSAT instances. Unlike [`UnnestedTerm`] there is no output and
/// identification equations `y = x` may relate two defined variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSystem {
    pub sig: Signature,
    pub inputs: Vec<String>,
    pub equations: Vec<BasicEq>,
}

impl BasicSystem {
    pub fn variables(&self) -> Vec<String> {
        let mut vs = self.inputs.clone();
        for eq in &self.equations {
            if !vs.contains(&eq.lhs) {
                vs.push(eq.lhs.clone());
            }
            for r in eq.rhs.referenced() {
                if !vs.iter().any(|v| v == r) {
                    vs.push(r.to_string());
                }
            }
        }
        vs
    }

    pub fn print_equations(&self) -> Vec<String> {
        self.equations.iter().map(BasicEq::print).collect()
    }
}

/// Reduce SAT (a system of term equations) to sSAT (a conjunction of basic
/// equations): unnest both sides of every equation with shared fresh
/// variables and identify the outputs. Satisfiability by a generating,
/// non-trivial assignment is preserved because the auxiliary values are
/// exactly the subterm values.
pub fn sat_to_ssat(eqs: &[Equation], sig: &Signature) -> Result<BasicSystem> {
    let mut inputs: Vec<String> = Vec::new();
    for eq in eqs {
        for v in eq.variables() {
            if !inputs.contains(&v) {
                inputs.push(v);
            }
        }
    }
    let mut fresh = FreshVars::new();
    let mut equations: Vec<BasicEq> = Vec::new();
    for eq in eqs {
        let l = flatten_side(&eq.lhs, sig, &mut fresh, &mut equations)?;
        let r = flatten_side(&eq.rhs, sig, &mut fresh, &mut equations)?;
        if l != r {
            equations.push(BasicEq { lhs: l, rhs: BasicRhs::Var(r) });
        }
    }
    Ok(BasicSystem { sig: *sig, inputs, equations })
}

fn flatten_side(
    t: &Term,
    sig: &Signature,
    fresh: &mut FreshVars,
    out: &mut Vec<BasicEq>,
) -> Result<String> {
    t.check_signature(sig)?;
    let u: UnnestedTerm = unnest(t, sig);
    // Re-number this side's auxiliaries into the shared supply.
    let mut rename = std::collections::HashMap::new();
    for eq in &u.equations {
        let new = fresh.fresh();
        rename.insert(eq.lhs.clone(), new);
    }
    let map = |v: &String| rename.get(v).cloned().unwrap_or_else(|| v.clone());
    for eq in &u.equations {
        let rhs = match &eq.rhs {
            BasicRhs::Var(v) => BasicRhs::Var(map(v)),
            BasicRhs::Const(c) => BasicRhs::Const(*c),
            BasicRhs::Op(op, args) => BasicRhs::Op(*op, args.iter().map(map).collect()),
        };
        out.push(BasicEq { lhs: map(&eq.lhs), rhs });
    }
    Ok(map(&u.output))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_equation;

    #[test]
    fn single_ol_reflexive_is_zero_shaped() {
        let sig = Signature::ortholattice();
        let eq = parse_equation("(= x x)", &sig).unwrap();
        let t = conj_to_single_ol(&[eq], &sig).unwrap();
        // (x+x) meet (x meet x)^perp
        assert_eq!(t.print(), "(^ (+ x x) (oc (^ x x)))");
    }

    #[test]
    fn single_ol_two_equations() {
        let sig = Signature::ortholattice();
        let e1 = parse_equation("(= s t)", &sig).unwrap();
        let e2 = parse_equation("(= u v)", &sig).unwrap();
        let t = conj_to_single_ol(&[e1, e2], &sig).unwrap();
        assert_eq!(
            t.print(),
            "(+ (^ (+ s t) (oc (^ s t))) (^ (+ u v) (oc (^ u v))))"
        );
    }

    #[test]
    fn single_ring_shapes() {
        let sig = Signature::star_ring();
        let eq = parse_equation("(= t1 r0)", &sig).unwrap();
        let t = conj_to_single_ring(&[eq], &sig).unwrap();
        assert_eq!(t.print(), "(r- r1 (r* r1 (r- r1 (r* t1 (pinv t1)))))");
    }

    #[test]
    fn sat_to_ssat_basic_already() {
        let sig = Signature::lattice(true);
        let eq = parse_equation("(= x y)", &sig).unwrap();
        let s = sat_to_ssat(&[eq], &sig).unwrap();
        assert_eq!(s.equations.len(), 1);
        assert_eq!(s.equations[0].print(), "(= x y)");
    }

    #[test]
    fn sat_to_ssat_flattens() {
        let sig = Signature::lattice(true);
        let eq = parse_equation("(= x (+ y (^ z w)))", &sig).unwrap();
        let s = sat_to_ssat(&[eq], &sig).unwrap();
        // meet, join, and the identification x = join-output
        assert_eq!(s.equations.len(), 3);
        for e in &s.equations {
            assert!(matches!(e.rhs, BasicRhs::Var(_) | BasicRhs::Op(..)));
        }
    }
}
