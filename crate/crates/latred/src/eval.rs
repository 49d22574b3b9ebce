//! Term evaluation in the concrete models used throughout: subspace
//! lattices L(F^d), endomorphism *-rings End(F^d), the two-element lattice,
//! and the height-2 ortholattices MO_n.
//!
//! Large terms produced by forcing chains should be evaluated in circuit
//! form (`eval_lattice_circuit`, `eval_ring_circuit`), where shared
//! subexpressions are computed once.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::normal::BasicSystem;
use crate::subspace::Subspace;
use crate::term::{Const, Op, Term};
use crate::unnest::{BasicRhs, UnnestedTerm};
use std::collections::HashMap;

pub type SubAssign = HashMap<String, Subspace>;
pub type MatAssign = HashMap<String, Matrix>;

// ---------------------------------------------------------------------------
// L(F^d)
// ---------------------------------------------------------------------------

/// Evaluate a lattice/ortholattice term in L(F^d).
pub fn eval_lattice(t: &Term, asg: &SubAssign, field: crate::scalar::FieldSpec, dim: usize) -> Result<Subspace> {
    match t {
        Term::Var(v) => asg
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Unbound(v.clone())),
        Term::Const(Const::Zero) => Ok(Subspace::zero(field, dim)),
        Term::Const(Const::One) => Ok(Subspace::full(field, dim)),
        Term::Const(c) => Err(Error::Signature(format!(
            "{} is not a lattice constant",
            c.symbol()
        ))),
        Term::App(op, args) => {
            let xs: Vec<Subspace> = args
                .iter()
                .map(|a| eval_lattice(a, asg, field, dim))
                .collect::<Result<_>>()?;
            match op {
                Op::Join => xs[0].sum(&xs[1]),
                Op::Meet => xs[0].meet(&xs[1]),
                Op::Oc => xs[0].ortho(),
                other => Err(Error::Signature(format!(
                    "{} is not a lattice operation",
                    other.symbol()
                ))),
            }
        }
    }
}

/// Evaluate an unnested lattice term in L(F^d).
pub fn eval_lattice_circuit(
    u: &UnnestedTerm,
    asg: &SubAssign,
    field: crate::scalar::FieldSpec,
    dim: usize,
) -> Result<Subspace> {
    let mut env: SubAssign = asg.clone();
    for eq in &u.equations {
        let v = eval_basic_lattice(&eq.rhs, &env, field, dim)?;
        env.insert(eq.lhs.clone(), v);
    }
    env.get(&u.output)
        .cloned()
        .ok_or_else(|| Error::Unbound(u.output.clone()))
}

fn eval_basic_lattice(
    rhs: &BasicRhs,
    env: &SubAssign,
    field: crate::scalar::FieldSpec,
    dim: usize,
) -> Result<Subspace> {
    let get = |v: &String| -> Result<Subspace> {
        env.get(v).cloned().ok_or_else(|| Error::Unbound(v.clone()))
    };
    Ok(match rhs {
        BasicRhs::Var(v) => get(v)?,
        BasicRhs::Const(Const::Zero) => Subspace::zero(field, dim),
        BasicRhs::Const(Const::One) => Subspace::full(field, dim),
        BasicRhs::Const(c) => {
            return Err(Error::Signature(format!("{} in lattice circuit", c.symbol())))
        }
        BasicRhs::Op(op, args) => {
            let a = get(&args[0])?;
            match op {
                Op::Join => a.sum(&get(&args[1])?)?,
                Op::Meet => a.meet(&get(&args[1])?)?,
                Op::Oc => a.ortho()?,
                other => {
                    return Err(Error::Signature(format!(
                        "{} in lattice circuit",
                        other.symbol()
                    )))
                }
            }
        }
    })
}

/// Check a conjunction of basic lattice equations in L(F^d) under a full
/// assignment of all variables (inputs and defined).
pub fn check_basic_system_lattice(
    sys: &BasicSystem,
    asg: &SubAssign,
    field: crate::scalar::FieldSpec,
    dim: usize,
) -> Result<bool> {
    for eq in &sys.equations {
        let lhs = asg
            .get(&eq.lhs)
            .cloned()
            .ok_or_else(|| Error::Unbound(eq.lhs.clone()))?;
        let rhs = eval_basic_lattice(&eq.rhs, asg, field, dim)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluate the defined variables of a basic system in definition order,
/// starting from an assignment of the inputs. Identification equations
/// (`y = x` with `y` already valued) become checks; returns None when one
/// fails, otherwise the full assignment.
pub fn propagate_basic_system_lattice(
    sys: &BasicSystem,
    inputs: &SubAssign,
    field: crate::scalar::FieldSpec,
    dim: usize,
) -> Result<Option<SubAssign>> {
    let mut env = inputs.clone();
    for eq in &sys.equations {
        let rhs = eval_basic_lattice(&eq.rhs, &env, field, dim)?;
        match env.get(&eq.lhs) {
            Some(existing) => {
                if *existing != rhs {
                    return Ok(None);
                }
            }
            None => {
                env.insert(eq.lhs.clone(), rhs);
            }
        }
    }
    Ok(Some(env))
}

// ---------------------------------------------------------------------------
// End(F^d) as a (*-)ring
// ---------------------------------------------------------------------------

/// Evaluate a ring / *-ring term in End(F^d) (d x d matrices).
pub fn eval_ring(t: &Term, asg: &MatAssign, field: crate::scalar::FieldSpec, dim: usize) -> Result<Matrix> {
    match t {
        Term::Var(v) => asg
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Unbound(v.clone())),
        Term::Const(Const::RZero) => Ok(Matrix::zero(field, dim, dim)),
        Term::Const(Const::ROne) => Ok(Matrix::identity(field, dim)),
        Term::Const(c) => Err(Error::Signature(format!(
            "{} is not a ring constant",
            c.symbol()
        ))),
        Term::App(op, args) => {
            let xs: Vec<Matrix> = args
                .iter()
                .map(|a| eval_ring(a, asg, field, dim))
                .collect::<Result<_>>()?;
            match op {
                Op::RAdd => xs[0].add(&xs[1]),
                Op::RSub => xs[0].sub(&xs[1]),
                Op::RMul => xs[0].mul(&xs[1]),
                Op::Adj => Ok(xs[0].transpose()),
                Op::Pinv => xs[0].pseudoinverse(),
                other => Err(Error::Signature(format!(
                    "{} is not a ring operation",
                    other.symbol()
                ))),
            }
        }
    }
}

/// Evaluate an unnested ring term in End(F^d).
pub fn eval_ring_circuit(
    u: &UnnestedTerm,
    asg: &MatAssign,
    field: crate::scalar::FieldSpec,
    dim: usize,
) -> Result<Matrix> {
    let mut env: MatAssign = asg.clone();
    for eq in &u.equations {
        let get = |v: &String| -> Result<Matrix> {
            env.get(v).cloned().ok_or_else(|| Error::Unbound(v.clone()))
        };
        let v = match &eq.rhs {
            BasicRhs::Var(v) => get(v)?,
            BasicRhs::Const(Const::RZero) => Matrix::zero(field, dim, dim),
            BasicRhs::Const(Const::ROne) => Matrix::identity(field, dim),
            BasicRhs::Const(c) => {
                return Err(Error::Signature(format!("{} in ring circuit", c.symbol())))
            }
            BasicRhs::Op(op, args) => {
                let a = get(&args[0])?;
                match op {
                    Op::RAdd => a.add(&get(&args[1])?)?,
                    Op::RSub => a.sub(&get(&args[1])?)?,
                    Op::RMul => a.mul(&get(&args[1])?)?,
                    Op::Adj => a.transpose(),
                    Op::Pinv => a.pseudoinverse()?,
                    other => {
                        return Err(Error::Signature(format!(
                            "{} in ring circuit",
                            other.symbol()
                        )))
                    }
                }
            }
        };
        env.insert(eq.lhs.clone(), v);
    }
    env.get(&u.output)
        .cloned()
        .ok_or_else(|| Error::Unbound(u.output.clone()))
}

/// Evaluate a ring term with scalar (1x1) assignments: polynomial
/// evaluation over the field itself.
pub fn eval_ring_scalar(
    t: &Term,
    asg: &HashMap<String, crate::scalar::Scalar>,
    field: crate::scalar::FieldSpec,
) -> Result<crate::scalar::Scalar> {
    Ok(match t {
        Term::Var(v) => asg
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Unbound(v.clone()))?,
        Term::Const(Const::RZero) => field.zero(),
        Term::Const(Const::ROne) => field.one(),
        Term::Const(c) => {
            return Err(Error::Signature(format!("{} is not a ring constant", c.symbol())))
        }
        Term::App(op, args) => {
            let a = eval_ring_scalar(&args[0], asg, field)?;
            match op {
                Op::RAdd => field.add(&a, &eval_ring_scalar(&args[1], asg, field)?),
                Op::RSub => field.sub(&a, &eval_ring_scalar(&args[1], asg, field)?),
                Op::RMul => field.mul(&a, &eval_ring_scalar(&args[1], asg, field)?),
                // Scalars over a field: adjoint is identity, pseudo-inverse
                // is the inverse extended by 0 at 0.
                Op::Adj => a,
                Op::Pinv => {
                    if a.is_zero() {
                        a
                    } else {
                        field.inv(&a)?
                    }
                }
                other => {
                    return Err(Error::Signature(format!(
                        "{} is not a ring operation",
                        other.symbol()
                    )))
                }
            }
        }
    })
}

// ---------------------------------------------------------------------------
// The two-element lattice
// ---------------------------------------------------------------------------

/// Evaluate a lattice term (orthocomplement allowed: it is negation) in 2.
pub fn eval_two(t: &Term, asg: &HashMap<String, bool>) -> Result<bool> {
    Ok(match t {
        Term::Var(v) => *asg.get(v).ok_or_else(|| Error::Unbound(v.clone()))?,
        Term::Const(Const::Zero) => false,
        Term::Const(Const::One) => true,
        Term::Const(c) => {
            return Err(Error::Signature(format!("{} in 2", c.symbol())))
        }
        Term::App(op, args) => {
            let a = eval_two(&args[0], asg)?;
            match op {
                Op::Join => a | eval_two(&args[1], asg)?,
                Op::Meet => a & eval_two(&args[1], asg)?,
                Op::Oc => !a,
                other => {
                    return Err(Error::Signature(format!("{} in 2", other.symbol())))
                }
            }
        }
    })
}

// ---------------------------------------------------------------------------
// MO_n
// ---------------------------------------------------------------------------

/// Element of MO_n: bounds plus 2n atoms in orthocomplementary pairs
/// (atom 2k pairs with atom 2k+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoElem {
    Bot,
    Atom(u32),
    Top,
}

/// The modular ortholattice MO_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoN {
    pub n: u32,
}

impl MoN {
    pub fn new(n: u32) -> MoN {
        assert!(n >= 1 && n < 20);
        MoN { n }
    }

    pub fn elements(&self) -> Vec<MoElem> {
        let mut out = vec![MoElem::Bot];
        out.extend((0..2 * self.n).map(MoElem::Atom));
        out.push(MoElem::Top);
        out
    }

    pub fn join(&self, a: MoElem, b: MoElem) -> MoElem {
        match (a, b) {
            (MoElem::Bot, x) | (x, MoElem::Bot) => x,
            (MoElem::Top, _) | (_, MoElem::Top) => MoElem::Top,
            (MoElem::Atom(i), MoElem::Atom(j)) => {
                if i == j {
                    a
                } else {
                    MoElem::Top
                }
            }
        }
    }

    pub fn meet(&self, a: MoElem, b: MoElem) -> MoElem {
        match (a, b) {
            (MoElem::Top, x) | (x, MoElem::Top) => x,
            (MoElem::Bot, _) | (_, MoElem::Bot) => MoElem::Bot,
            (MoElem::Atom(i), MoElem::Atom(j)) => {
                if i == j {
                    a
                } else {
                    MoElem::Bot
                }
            }
        }
    }

    pub fn oc(&self, a: MoElem) -> MoElem {
        match a {
            MoElem::Bot => MoElem::Top,
            MoElem::Top => MoElem::Bot,
            MoElem::Atom(i) => MoElem::Atom(i ^ 1),
        }
    }

    pub fn leq(&self, a: MoElem, b: MoElem) -> bool {
        self.join(a, b) == b
    }

    pub fn eval(&self, t: &Term, asg: &HashMap<String, MoElem>) -> Result<MoElem> {
        Ok(match t {
            Term::Var(v) => *asg.get(v).ok_or_else(|| Error::Unbound(v.clone()))?,
            Term::Const(Const::Zero) => MoElem::Bot,
            Term::Const(Const::One) => MoElem::Top,
            Term::Const(c) => {
                return Err(Error::Signature(format!("{} in MO_n", c.symbol())))
            }
            Term::App(op, args) => {
                let a = self.eval(&args[0], asg)?;
                match op {
                    Op::Join => self.join(a, self.eval(&args[1], asg)?),
                    Op::Meet => self.meet(a, self.eval(&args[1], asg)?),
                    Op::Oc => self.oc(a),
                    other => {
                        return Err(Error::Signature(format!("{} in MO_n", other.symbol())))
                    }
                }
            }
        })
    }
}
