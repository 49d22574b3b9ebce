//! The p-time translations between decision problems, each packaged as an
//! instance compiler plus a witness transport. Forward transport turns a
//! verified source witness into a target witness; backward transport (where
//! implemented) inverts it. The oracles verify both by evaluation.

use crate::error::{Error, Result};
use crate::eval::{eval_lattice, SubAssign};
use crate::frame::{self, Frame, FrameClass};
use crate::instance::{
    FeasAtom, FeasStructure, FrameVarSpec, Instance, InstanceKind, Origin, Payload, Witness,
    WitnessValue,
};
use crate::library::{
    self, append_cr_op, append_force_ring, append_frame_chain, delta_term, frame_axiom_equations,
    FrameComponents, TermLibrary,
};
use crate::matrix::Matrix;
use crate::normal::{sat_to_ssat, BasicSystem};
use crate::scalar::{FieldSpec, Scalar};
use crate::subspace::Subspace;
use crate::term::{Const, Equation, Op, Signature, Term};
use crate::unnest::{BasicEq, BasicRhs, CircuitBuilder, UnnestedTerm};
use std::collections::{BTreeMap, HashMap};

/// A reduction output: the compiled instance and its witness transport.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub instance: Instance,
    pub witness: WitnessMap,
}

/// Witness transports, one variant per reduction.
#[derive(Debug, Clone)]
pub enum WitnessMap {
    Identity,
    BooleanGadget {
        xs: Vec<String>,
        ys: Vec<String>,
    },
    HeightLift {
        xs: Vec<String>,
        d: usize,
        field: FieldSpec,
    },
    RefToSat {
        xs: Vec<String>,
        t: Term,
        s: Term,
        d: usize,
    },
    SsatToFeas {
        structure: FeasStructure,
        field: FieldSpec,
        system: BasicSystem,
    },
    URefToSat {
        t: UnnestedTerm,
        d: usize,
        field: FieldSpec,
    },
    FeasToRefMol {
        xs: Vec<String>,
        block: usize,
    },
    FeasToRefStarring {
        xs: Vec<String>,
        ys: Vec<String>,
    },
    RingToOl {
        inputs: Vec<String>,
        block: usize,
    },
    FeasToRefCml {
        xs: Vec<String>,
        field: FieldSpec,
    },
    Composed(Box<WitnessMap>, Box<WitnessMap>),
}

impl WitnessMap {
    /// Transport a source witness to a target witness.
    pub fn forward(&self, src: &Witness) -> Result<Witness> {
        match self {
            WitnessMap::Identity => Ok(src.clone()),
            WitnessMap::BooleanGadget { xs, ys } => {
                let mut w = Witness::new();
                for (x, y) in xs.iter().zip(ys) {
                    let b = get_bool(src, x)?;
                    w.insert(x.clone(), WitnessValue::Bool(b));
                    w.insert(y.clone(), WitnessValue::Bool(!b));
                }
                Ok(w)
            }
            WitnessMap::HeightLift { xs, d, field } => {
                let mut w = Witness::new();
                for x in xs {
                    let b = get_bool(src, x)?;
                    let v = if b {
                        Subspace::full(*field, *d)
                    } else {
                        Subspace::zero(*field, *d)
                    };
                    w.insert(x.clone(), WitnessValue::Sub(v));
                }
                let f = Frame::standard(*d, *d, *field)?;
                insert_frame_witness(&mut w, &f)?;
                Ok(w)
            }
            WitnessMap::RefToSat { xs, t, s, d } => {
                // find an atom a_1 <= s(b) with a_1 not<= t(b), build a
                // spanning frame from it
                let mut asg = SubAssign::new();
                let mut field = None;
                for x in xs {
                    let v = get_sub(src, x)?;
                    field = Some(v.field);
                    asg.insert(x.clone(), v);
                }
                let field = field.ok_or_else(|| Error::Instance("empty witness".into()))?;
                let tval = eval_lattice(t, &asg, field, *d)?;
                let sval = eval_lattice(s, &asg, field, *d)?;
                if !(tval.leq(&sval)? && tval != sval) {
                    return Err(Error::Instance("not a REF witness (t < s fails)".into()));
                }
                let mut atom = None;
                for c in 0..sval.basis.cols {
                    let v = sval.basis.col(c);
                    if !tval.contains_vector(&v)? {
                        atom = Some(Subspace::from_columns(&v));
                        break;
                    }
                }
                let atom =
                    atom.ok_or_else(|| Error::Instance("no separating atom found".into()))?;
                let f = frame_from_atom(&atom, field, *d)?;
                let mut w = src.clone();
                insert_frame_witness(&mut w, &f)?;
                Ok(w)
            }
            WitnessMap::SsatToFeas {
                structure,
                field,
                system,
            } => ssat_feas_forward(src, structure, system, *field),
            WitnessMap::URefToSat { t, d, field } => {
                // propagate the circuit to value all auxiliaries, add the
                // standard frame and the output variable
                let mut asg = SubAssign::new();
                for x in &t.inputs {
                    asg.insert(x.clone(), get_sub(src, x)?);
                }
                for eq in &t.equations {
                    let val = eval_basic_sub(&eq.rhs, &asg, *field, *d)?;
                    asg.insert(eq.lhs.clone(), val);
                }
                let out = asg
                    .get(&t.output)
                    .cloned()
                    .ok_or_else(|| Error::Unbound(t.output.clone()))?;
                if out.is_zero() {
                    return Err(Error::Instance("not a uREF witness (T = 0)".into()));
                }
                let mut w = Witness::new();
                for (k, v) in asg {
                    w.insert(k, WitnessValue::Sub(v));
                }
                w.insert("y".into(), WitnessValue::Sub(out));
                let f = Frame::standard(*d, *d, *field)?;
                insert_frame_witness(&mut w, &f)?;
                Ok(w)
            }
            WitnessMap::FeasToRefMol { xs, block } => {
                let q = FieldSpec::rationals();
                let f = Frame::standard_on(*block, q)?;
                let mut w = Witness::new();
                for x in xs {
                    let rho = get_scalar(src, x)?;
                    let m = Matrix::identity(q, *block).scale(&rho);
                    w.insert(x.clone(), WitnessValue::Sub(f.omega(&m)?.sub));
                }
                insert_frame_tuple_witness(&mut w, &f)?;
                Ok(w)
            }
            WitnessMap::FeasToRefStarring { xs, ys } => {
                let q = FieldSpec::rationals();
                let mut w = Witness::new();
                for (x, y) in xs.iter().zip(ys) {
                    let rho = get_scalar(src, x)?;
                    let m = Matrix::from_fn(q, 1, 1, |_, _| rho.clone());
                    w.insert(x.clone(), WitnessValue::Mat(m.clone()));
                    w.insert(y.clone(), WitnessValue::Mat(m));
                }
                Ok(w)
            }
            WitnessMap::RingToOl { inputs, block } => {
                let q = FieldSpec::rationals();
                let f = Frame::standard_on(*block, q)?;
                let mut w = Witness::new();
                for x in inputs {
                    let m = get_mat(src, x)?;
                    if m.rows != *block {
                        return Err(Error::Dim(format!(
                            "witness matrix for {x} is {}x{}, expected {block}",
                            m.rows, m.cols
                        )));
                    }
                    w.insert(x.clone(), WitnessValue::Sub(f.omega(&m)?.sub));
                }
                insert_frame_tuple_witness(&mut w, &f)?;
                Ok(w)
            }
            WitnessMap::FeasToRefCml { xs, field } => {
                let f = Frame::standard(3, 3, *field)?;
                let mut w = Witness::new();
                for x in xs {
                    let rho = get_scalar(src, x)?;
                    let m = Matrix::from_fn(*field, 1, 1, |_, _| rho.clone());
                    w.insert(x.clone(), WitnessValue::Sub(f.omega(&m)?.sub));
                }
                insert_frame_tuple_witness(&mut w, &f)?;
                Ok(w)
            }
            WitnessMap::Composed(first, second) => second.forward(&first.forward(src)?),
        }
    }

    /// Transport a target witness back to a source witness, where the
    /// backward direction is implemented.
    pub fn backward(&self, tgt: &Witness) -> Result<Option<Witness>> {
        match self {
            WitnessMap::Identity => Ok(Some(tgt.clone())),
            WitnessMap::BooleanGadget { xs, ys } => {
                // a failing assignment must have y_i = not x_i; then x
                // itself satisfies t
                let mut w = Witness::new();
                for (x, y) in xs.iter().zip(ys) {
                    let a = get_bool(tgt, x)?;
                    let b = get_bool(tgt, y)?;
                    if a == b {
                        return Ok(None);
                    }
                    w.insert(x.clone(), WitnessValue::Bool(a));
                }
                Ok(Some(w))
            }
            WitnessMap::HeightLift { xs, d, field } => {
                // evaluate x_i' = delta_d(zbot + ztop meet x_i) under the
                // target witness; spanning frames give 0/1 values
                let f = frame_from_witness(tgt, *d, *field)?;
                match f.classify() {
                    FrameClass::Spanning => {}
                    _ => return Ok(None),
                }
                let mut w = Witness::new();
                for x in xs {
                    let v = get_sub(tgt, x)?;
                    let arg = f.bot.sum(&f.top.meet(&v)?)?;
                    let dv = frame::discriminator(&arg, &f)?;
                    if dv.is_full() {
                        w.insert(x.clone(), WitnessValue::Bool(true));
                    } else if dv.is_zero() {
                        w.insert(x.clone(), WitnessValue::Bool(false));
                    } else {
                        return Ok(None);
                    }
                }
                Ok(Some(w))
            }
            WitnessMap::RefToSat { xs, .. } => {
                let mut w = Witness::new();
                for x in xs {
                    w.insert(x.clone(), tgt.get(x).cloned().ok_or_else(|| Error::Unbound(x.clone()))?);
                }
                Ok(Some(w))
            }
            WitnessMap::SsatToFeas {
                structure, field, ..
            } => {
                let mut w = Witness::new();
                for (orig, prefix) in &structure.matvars {
                    let m = collect_matrix(tgt, prefix, structure.dim, *field)?;
                    w.insert(orig.clone(), WitnessValue::Sub(Subspace::from_columns(&m)));
                }
                Ok(Some(w))
            }
            WitnessMap::URefToSat { t, .. } => {
                let mut w = Witness::new();
                for x in &t.inputs {
                    w.insert(x.clone(), tgt.get(x).cloned().ok_or_else(|| Error::Unbound(x.clone()))?);
                }
                Ok(Some(w))
            }
            WitnessMap::Composed(first, second) => match second.backward(tgt)? {
                Some(mid) => first.backward(&mid),
                None => Ok(None),
            },
            _ => Ok(None),
        }
    }
}

fn get_bool(w: &Witness, k: &str) -> Result<bool> {
    match w.get(k) {
        Some(WitnessValue::Bool(b)) => Ok(*b),
        _ => Err(Error::Instance(format!("witness {k} is not boolean"))),
    }
}

fn get_sub(w: &Witness, k: &str) -> Result<Subspace> {
    match w.get(k) {
        Some(WitnessValue::Sub(s)) => Ok(s.clone()),
        _ => Err(Error::Instance(format!("witness {k} is not a subspace"))),
    }
}

fn get_mat(w: &Witness, k: &str) -> Result<Matrix> {
    match w.get(k) {
        Some(WitnessValue::Mat(m)) => Ok(m.clone()),
        _ => Err(Error::Instance(format!("witness {k} is not a matrix"))),
    }
}

fn get_scalar(w: &Witness, k: &str) -> Result<Scalar> {
    match w.get(k) {
        Some(WitnessValue::Scalar(s)) => Ok(s.clone()),
        _ => Err(Error::Instance(format!("witness {k} is not a scalar"))),
    }
}

/// Frame variable names used by lifted/translated instances:
/// zbot, ztop, z1..zd, z12..z1d.
pub fn frame_var_names(d: usize) -> Vec<String> {
    let mut names = vec!["zbot".to_string(), "ztop".to_string()];
    for i in 1..=d {
        names.push(format!("z{i}"));
    }
    for j in 2..=d {
        names.push(format!("z1{j}"));
    }
    names
}

/// Bind the frame component variables (zbot, ztop, z1.., z12..) to a
/// frame's components in a witness.
pub fn frame_witness_entries(w: &mut Witness, f: &Frame) {
    w.insert("zbot".into(), WitnessValue::Sub(f.bot.clone()));
    w.insert("ztop".into(), WitnessValue::Sub(f.top.clone()));
    for i in 1..=f.order {
        w.insert(format!("z{i}"), WitnessValue::Sub(f.axes[i - 1].clone()));
    }
    for j in 2..=f.order {
        w.insert(format!("z1{j}"), WitnessValue::Sub(f.axes1j[j - 2].clone()));
    }
}

fn insert_frame_witness(w: &mut Witness, f: &Frame) -> Result<()> {
    frame_witness_entries(w, f);
    Ok(())
}

fn insert_frame_tuple_witness(w: &mut Witness, f: &Frame) -> Result<()> {
    frame_witness_entries(w, f);
    Ok(())
}

fn frame_from_witness(w: &Witness, d: usize, field: FieldSpec) -> Result<Frame> {
    let sub = |k: &str| get_sub(w, k);
    let mut axes = Vec::new();
    for i in 1..=d {
        axes.push(sub(&format!("z{i}"))?);
    }
    let mut axes1j = Vec::new();
    for j in 2..=d {
        axes1j.push(sub(&format!("z1{j}"))?);
    }
    let dim = axes[0].dim;
    Ok(Frame {
        field,
        dim,
        order: d,
        bot: sub("zbot")?,
        top: sub("ztop")?,
        axes,
        axes1j,
    })
}

fn eval_basic_sub(
    rhs: &BasicRhs,
    asg: &SubAssign,
    field: FieldSpec,
    dim: usize,
) -> Result<Subspace> {
    let sys = BasicSystem {
        sig: Signature::ortholattice(),
        inputs: vec![],
        equations: vec![BasicEq {
            lhs: "_out".into(),
            rhs: rhs.clone(),
        }],
    };
    let full = crate::eval::propagate_basic_system_lattice(&sys, asg, field, dim)?
        .ok_or_else(|| Error::Instance("circuit propagation failed".into()))?;
    Ok(full["_out"].clone())
}

/// Build a spanning d-frame whose first axis is the given line: extend its
/// vector to a basis by standard unit vectors.
pub fn frame_from_atom(atom: &Subspace, field: FieldSpec, d: usize) -> Result<Frame> {
    if atom.rank() != 1 || atom.dim != d {
        return Err(Error::Precondition("frame_from_atom needs a line".into()));
    }
    let mut cols = atom.basis.clone();
    for i in 0..d {
        if cols.cols == d {
            break;
        }
        let mut e = vec![0i64; d];
        e[i] = 1;
        let candidate = cols.hstack(&Matrix::col_from_i64(field, &e))?;
        if candidate.rank() == cols.cols + 1 {
            cols = candidate;
        }
    }
    if cols.cols != d {
        return Err(Error::Instance("could not extend atom to a basis".into()));
    }
    let axes: Vec<Subspace> = (0..d)
        .map(|i| Subspace::from_columns(&cols.col(i)))
        .collect();
    let axes1j: Vec<Subspace> = (1..d)
        .map(|j| Subspace::from_columns(&cols.col(0).sub(&cols.col(j)).unwrap()))
        .collect();
    let mut top = Subspace::zero(field, d);
    for a in &axes {
        top = top.sum(a)?;
    }
    Ok(Frame {
        field,
        dim: d,
        order: d,
        bot: Subspace::zero(field, d),
        top,
        axes,
        axes1j,
    })
}

// ---------------------------------------------------------------------------
// Boolean NNF and the lambda gadget (two-element lattice hardness)
// ---------------------------------------------------------------------------

/// Push negations inward to negation normal form; the input must be a
/// constant-free ortholattice term.
pub fn to_nnf(t: &Term) -> Result<Term> {
    fn pos(t: &Term) -> Result<Term> {
        match t {
            Term::Var(_) => Ok(t.clone()),
            Term::Const(_) => Err(Error::Precondition("NNF input must be constant-free".into())),
            Term::App(Op::Join, args) => Ok(Term::join(pos(&args[0])?, pos(&args[1])?)),
            Term::App(Op::Meet, args) => Ok(Term::meet(pos(&args[0])?, pos(&args[1])?)),
            Term::App(Op::Oc, args) => neg(&args[0]),
            _ => Err(Error::Signature("NNF input must be a boolean term".into())),
        }
    }
    fn neg(t: &Term) -> Result<Term> {
        match t {
            Term::Var(v) => Ok(Term::oc(Term::var(v.clone()))),
            Term::Const(_) => Err(Error::Precondition("NNF input must be constant-free".into())),
            Term::App(Op::Join, args) => Ok(Term::meet(neg(&args[0])?, neg(&args[1])?)),
            Term::App(Op::Meet, args) => Ok(Term::join(neg(&args[0])?, neg(&args[1])?)),
            Term::App(Op::Oc, args) => pos(&args[0]),
            _ => Err(Error::Signature("NNF input must be a boolean term".into())),
        }
    }
    pos(t)
}

fn is_nnf(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Const(_) => false,
        Term::App(Op::Oc, args) => matches!(args[0], Term::Var(_)),
        Term::App(Op::Join, args) | Term::App(Op::Meet, args) => args.iter().all(is_nnf),
        _ => false,
    }
}

/// lambda_n(xs, ys, w): lambda_0 = w, lambda_{i+1} = lambda_i meet
/// (x_i + y_i) + x_i meet y_i. In 2 it is the identity in w when x_i != y_i
/// for all i, constant otherwise.
pub fn lambda_term(xs: &[String], ys: &[String], w: Term) -> Term {
    let mut t = w;
    for (x, y) in xs.iter().zip(ys) {
        t = Term::join(
            Term::meet(t, Term::join(Term::var(x.clone()), Term::var(y.clone()))),
            Term::meet(Term::var(x.clone()), Term::var(y.clone())),
        );
    }
    t
}

/// The hardness gadget for the two-element lattice: from an NNF boolean
/// term t build the lattice equation
/// lambda_n(xs, ys, t#) = lambda_n(xs, ys, x_1 meet y_1), refutable in 2
/// exactly when t is satisfiable.
pub fn boolean_to_lattice_ref(t: &Term) -> Result<Reduction> {
    if !is_nnf(t) {
        return Err(Error::Precondition(
            "boolean_to_lattice_ref needs negation normal form".into(),
        ));
    }
    let mut xs = t.variables();
    xs.sort();
    if xs.is_empty() {
        return Err(Error::Precondition("no variables".into()));
    }
    let ys: Vec<String> = (1..=xs.len()).map(|i| format!("_y{i}")).collect();
    // t#: replace oc(x_i) by y_i
    let y_of: HashMap<&str, &str> = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x.as_str(), y.as_str()))
        .collect();
    let tsharp = replace_negations(t, &y_of);
    let lhs = lambda_term(&xs, &ys, tsharp);
    let rhs = lambda_term(
        &xs,
        &ys,
        Term::meet(Term::var(xs[0].clone()), Term::var(ys[0].clone())),
    );
    let mut instance = Instance::new(
        InstanceKind::Ref,
        Signature::lattice(false),
        Payload::RefPair { t: lhs, s: rhs },
    );
    instance.origin = Some(Origin {
        reduction: "boolean_to_lattice_ref".into(),
        notes: BTreeMap::new(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::BooleanGadget { xs, ys },
    })
}

fn replace_negations(t: &Term, y_of: &HashMap<&str, &str>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::App(Op::Oc, args) => match &args[0] {
            Term::Var(v) => Term::var(y_of[v.as_str()]),
            _ => unreachable!("checked NNF"),
        },
        Term::App(op, args) => Term::App(
            *op,
            args.iter().map(|a| replace_negations(a, y_of)).collect(),
        ),
        Term::Const(_) => unreachable!("checked NNF"),
    }
}

// ---------------------------------------------------------------------------
// Height-d lift (hardness for height-d lattices)
// ---------------------------------------------------------------------------

/// Lift a REF pair over 2 to a REF pair over height-d lattices by
/// substituting x_i' = delta_d(zbot + ztop meet x_i, z) for every variable.
/// The frame variables range over spanning frame components (recorded in
/// the instance); searching the standard frame of L(F^d) suffices because
/// frames are equivalent under automorphisms.
pub fn lift_ref_to_height_d(t: &Term, s: &Term, d: usize, field: FieldSpec) -> Result<Reduction> {
    let mut xs = t.variables();
    for v in s.variables() {
        if !xs.contains(&v) {
            xs.push(v);
        }
    }
    xs.sort();
    let znames = frame_var_names(d);
    for x in &xs {
        if znames.contains(x) {
            return Err(Error::Precondition(format!(
                "variable {x} collides with frame variable names"
            )));
        }
    }
    let delta = delta_term(d)?;
    let mut map = HashMap::new();
    for x in &xs {
        let arg = Term::join(
            Term::var("zbot"),
            Term::meet(Term::var("ztop"), Term::var(x.clone())),
        );
        map.insert(x.clone(), subst1(&delta, "x", &arg));
    }
    let t2 = t.substitute(&map);
    let s2 = s.substitute(&map);
    let mut instance = Instance::new(
        InstanceKind::Ref,
        Signature::lattice(false),
        Payload::RefPair { t: t2, s: s2 },
    );
    instance.field = Some(field);
    instance.dim = Some(d);
    instance.frame_vars = Some(FrameVarSpec {
        order: d,
        names: znames,
    });
    instance.origin = Some(Origin {
        reduction: "lift_ref_to_height_d".into(),
        notes: [(
            "zvars".to_string(),
            "range over spanning frame components".to_string(),
        )]
        .into_iter()
        .collect(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::HeightLift { xs, d, field },
    })
}

fn subst1(t: &Term, var: &str, by: &Term) -> Term {
    let mut m = HashMap::new();
    m.insert(var.to_string(), by.clone());
    t.substitute(&m)
}

// ---------------------------------------------------------------------------
// REF -> SAT for height-d complemented modular lattices
// ---------------------------------------------------------------------------

/// psi(x, z) = frame axioms and z1 <= s(x) and z1 meet t(x) = zbot and
/// zbot <= x_i <= ztop, after replacing t by t meet s and s by t + s.
/// Satisfiable by a non-constant assignment iff t = s is refutable.
pub fn ref_to_sat_cml(t: &Term, s: &Term, d: usize) -> Result<Reduction> {
    let t2 = Term::meet(t.clone(), s.clone());
    let s2 = Term::join(t.clone(), s.clone());
    let mut xs = t.variables();
    for v in s.variables() {
        if !xs.contains(&v) {
            xs.push(v);
        }
    }
    xs.sort();
    let znames = frame_var_names(d);
    for x in &xs {
        if znames.contains(x) {
            return Err(Error::Precondition(format!(
                "variable {x} collides with frame variable names"
            )));
        }
    }
    let mut eqs = frame_axiom_equations(d, false)?;
    // z1 <= s2, z1 meet t2 = zbot
    eqs.push(Equation::new(
        Term::join(Term::var("z1"), s2.clone()),
        s2.clone(),
    ));
    eqs.push(Equation::new(
        Term::meet(Term::var("z1"), t2.clone()),
        Term::var("zbot"),
    ));
    for x in &xs {
        eqs.push(Equation::new(
            Term::join(Term::var("zbot"), Term::var(x.clone())),
            Term::var(x.clone()),
        ));
        eqs.push(Equation::new(
            Term::join(Term::var(x.clone()), Term::var("ztop")),
            Term::var("ztop"),
        ));
    }
    let mut instance = Instance::new(
        InstanceKind::Sat,
        Signature::lattice(false),
        Payload::Equations(eqs),
    );
    instance.dim = Some(d);
    instance.origin = Some(Origin {
        reduction: "ref_to_sat_cml".into(),
        notes: BTreeMap::new(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::RefToSat { xs, t: t2, s: s2, d },
    })
}

// ---------------------------------------------------------------------------
// sSAT over L(F^d) -> FEAS over F
// ---------------------------------------------------------------------------

/// Matrix of ring terms, used to emit entry-wise polynomial equations.
#[derive(Clone)]
struct TermMat {
    rows: usize,
    cols: usize,
    es: Vec<Term>,
}

impl TermMat {
    fn var(prefix: &str, rows: usize, cols: usize) -> TermMat {
        let mut es = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                es.push(Term::var(format!("{prefix}r{r}c{c}")));
            }
        }
        TermMat { rows, cols, es }
    }

    fn zero(rows: usize, cols: usize) -> TermMat {
        TermMat {
            rows,
            cols,
            es: vec![Term::Const(Const::RZero); rows * cols],
        }
    }

    fn identity(n: usize) -> TermMat {
        let mut m = TermMat::zero(n, n);
        for i in 0..n {
            m.es[i * n + i] = Term::Const(Const::ROne);
        }
        m
    }

    fn at(&self, r: usize, c: usize) -> &Term {
        &self.es[r * self.cols + c]
    }

    fn add(&self, o: &TermMat) -> TermMat {
        let es = self
            .es
            .iter()
            .zip(&o.es)
            .map(|(a, b)| simp_add(a.clone(), b.clone()))
            .collect();
        TermMat { rows: self.rows, cols: self.cols, es }
    }

    fn sub(&self, o: &TermMat) -> TermMat {
        let es = self
            .es
            .iter()
            .zip(&o.es)
            .map(|(a, b)| simp_sub(a.clone(), b.clone()))
            .collect();
        TermMat { rows: self.rows, cols: self.cols, es }
    }

    fn mul(&self, o: &TermMat) -> TermMat {
        let mut es = Vec::new();
        for r in 0..self.rows {
            for c in 0..o.cols {
                let mut acc = Term::Const(Const::RZero);
                for k in 0..self.cols {
                    acc = simp_add(acc, simp_mul(self.at(r, k).clone(), o.at(k, c).clone()));
                }
                es.push(acc);
            }
        }
        TermMat { rows: self.rows, cols: o.cols, es }
    }

    fn transpose(&self) -> TermMat {
        let mut es = Vec::new();
        for c in 0..self.cols {
            for r in 0..self.rows {
                es.push(self.at(r, c).clone());
            }
        }
        TermMat { rows: self.cols, cols: self.rows, es }
    }

    fn block2x2(a: &TermMat, b: &TermMat, c: &TermMat, d: &TermMat) -> TermMat {
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut es = Vec::new();
        for r in 0..rows {
            for cc in 0..cols {
                let t = if r < a.rows {
                    if cc < a.cols {
                        a.at(r, cc)
                    } else {
                        b.at(r, cc - a.cols)
                    }
                } else if cc < a.cols {
                    c.at(r - a.rows, cc)
                } else {
                    d.at(r - a.rows, cc - a.cols)
                };
                es.push(t.clone());
            }
        }
        TermMat { rows, cols, es }
    }

    fn top_block(&self, rows: usize) -> TermMat {
        TermMat {
            rows,
            cols: self.cols,
            es: self.es[..rows * self.cols].to_vec(),
        }
    }
}

fn is_rzero(t: &Term) -> bool {
    matches!(t, Term::Const(Const::RZero))
}

fn simp_add(a: Term, b: Term) -> Term {
    if is_rzero(&a) {
        b
    } else if is_rzero(&b) {
        a
    } else {
        Term::radd(a, b)
    }
}

fn simp_sub(a: Term, b: Term) -> Term {
    if is_rzero(&b) {
        a
    } else {
        Term::rsub(a, b)
    }
}

fn simp_mul(a: Term, b: Term) -> Term {
    if is_rzero(&a) || is_rzero(&b) {
        Term::Const(Const::RZero)
    } else if matches!(a, Term::Const(Const::ROne)) {
        b
    } else if matches!(b, Term::Const(Const::ROne)) {
        a
    } else {
        Term::rmul(a, b)
    }
}

struct FeasBuilder {
    polys: Vec<Term>,
    fresh: usize,
}

impl FeasBuilder {
    fn new() -> Self {
        FeasBuilder { polys: Vec::new(), fresh: 0 }
    }

    fn fresh_mat(&mut self, rows: usize, cols: usize) -> TermMat {
        let prefix = format!("u{}", self.fresh);
        self.fresh += 1;
        TermMat::var(&prefix, rows, cols)
    }

    /// Emit entry-wise equations lhs = rhs.
    fn eq(&mut self, lhs: &TermMat, rhs: &TermMat) {
        for (a, b) in lhs.es.iter().zip(&rhs.es) {
            let p = simp_sub(a.clone(), b.clone());
            if !is_rzero(&p) {
                self.polys.push(p);
            }
        }
    }
}

/// Translate a conjunction of basic lattice equations over L(F^d) into a
/// polynomial feasibility instance over F. Each lattice variable becomes a
/// d x d matrix of scalar variables; the primitive atoms are encoded with
/// fresh existential matrices. The meet atom carries, along with the
/// two-sided block conditions, a kernel-spanning certificate
/// (G M + N H = I) that pins Span(y) to the exact intersection.
pub fn ssat_to_feas(sys: &BasicSystem, field: FieldSpec, d: usize, ortho: bool) -> Result<Reduction> {
    if ortho && !field.is_rational() {
        return Err(Error::Unsupported(
            "orthocomplement encoding requires characteristic 0".into(),
        ));
    }
    if !sys.sig.bounds {
        return Err(Error::Unsupported(
            "ssat_to_feas handles signatures with bounds as constants".into(),
        ));
    }
    // assign matrix variable prefixes m0, m1, ... in deterministic order
    let vars = sys.variables();
    let mut matvars: Vec<(String, String)> = Vec::new();
    let mut mat_of: HashMap<String, TermMat> = HashMap::new();
    for (k, v) in vars.iter().enumerate() {
        let prefix = format!("m{k}");
        matvars.push((v.clone(), prefix.clone()));
        mat_of.insert(v.clone(), TermMat::var(&prefix, d, d));
    }
    let mut fb = FeasBuilder::new();
    let mut atoms: Vec<FeasAtom> = Vec::new();
    let get = |name: &str| -> Result<TermMat> {
        mat_of
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Unbound(name.to_string()))
    };
    // decompose each basic equation into primitive atoms
    for eq in &sys.equations {
        let yv = eq.lhs.clone();
        match &eq.rhs {
            BasicRhs::Var(x) => {
                emit_leq(&mut fb, &get(&yv)?, &get(x)?, d);
                emit_leq(&mut fb, &get(x)?, &get(&yv)?, d);
                atoms.push(FeasAtom::Leq(yv.clone(), x.clone()));
                atoms.push(FeasAtom::Leq(x.clone(), yv.clone()));
            }
            BasicRhs::Const(Const::Zero) => {
                fb.eq(&get(&yv)?, &TermMat::zero(d, d));
                atoms.push(FeasAtom::LeqZero(yv.clone()));
            }
            BasicRhs::Const(Const::One) => {
                emit_geq_one(&mut fb, &get(&yv)?, d);
                atoms.push(FeasAtom::GeqOne(yv.clone()));
            }
            BasicRhs::Const(c) => {
                return Err(Error::Signature(format!("{} in lattice system", c.symbol())))
            }
            BasicRhs::Op(Op::Join, args) => {
                let (x, z) = (&args[0], &args[1]);
                emit_leq(&mut fb, &get(x)?, &get(&yv)?, d);
                emit_leq(&mut fb, &get(z)?, &get(&yv)?, d);
                emit_leq_sum(&mut fb, &get(&yv)?, &get(x)?, &get(z)?, d);
                atoms.push(FeasAtom::Leq(x.clone(), yv.clone()));
                atoms.push(FeasAtom::Leq(z.clone(), yv.clone()));
                atoms.push(FeasAtom::LeqSum(yv.clone(), x.clone(), z.clone()));
            }
            BasicRhs::Op(Op::Meet, args) => {
                let (z, u) = (&args[0], &args[1]);
                emit_meet(&mut fb, &get(&yv)?, &get(z)?, &get(u)?, d);
                atoms.push(FeasAtom::MeetEq(yv.clone(), z.clone(), u.clone()));
            }
            BasicRhs::Op(Op::Oc, args) => {
                if !ortho {
                    return Err(Error::Unsupported(
                        "orthocomplement atom without ortho flag".into(),
                    ));
                }
                let z = &args[0];
                emit_oc(&mut fb, &get(&yv)?, &get(z)?, d);
                atoms.push(FeasAtom::OcEq(yv.clone(), z.clone()));
            }
            BasicRhs::Op(op, _) => {
                return Err(Error::Signature(format!(
                    "{} in lattice system",
                    op.symbol()
                )))
            }
        }
    }
    let structure = FeasStructure { dim: d, matvars, atoms };
    let mut instance = Instance::new(
        InstanceKind::Feas,
        Signature::ring(),
        Payload::Polys(fb.polys),
    );
    instance.field = Some(field);
    instance.dim = Some(d);
    instance.structure = Some(structure.clone());
    instance.origin = Some(Origin {
        reduction: "ssat_to_feas".into(),
        notes: BTreeMap::new(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::SsatToFeas {
            structure,
            field,
            system: sys.clone(),
        },
    })
}

/// x <= y: exists U with x = y U.
fn emit_leq(fb: &mut FeasBuilder, x: &TermMat, y: &TermMat, d: usize) {
    let u = fb.fresh_mat(d, d);
    let rhs = y.mul(&u);
    fb.eq(x, &rhs);
}

/// 1 <= x: exists U with I = x U.
fn emit_geq_one(fb: &mut FeasBuilder, x: &TermMat, d: usize) {
    let u = fb.fresh_mat(d, d);
    fb.eq(&TermMat::identity(d), &x.mul(&u));
}

/// x <= y + z: exists U1, U2 with x = y U1 + z U2.
fn emit_leq_sum(fb: &mut FeasBuilder, x: &TermMat, y: &TermMat, z: &TermMat, d: usize) {
    let u1 = fb.fresh_mat(d, d);
    let u2 = fb.fresh_mat(d, d);
    fb.eq(x, &y.mul(&u1).add(&z.mul(&u2)));
}

/// y = z meet u: the 2d x 2d block conditions
/// [[z,u],[z,0]] X = [[Z,0],[U,y]] and [[Z,0],[U,y]] Y = [[z,u],[z,0]],
/// plus the kernel certificate: M = [z | -u], M N = 0, G M + N H = I_2d,
/// y = (z N_top) P, z N_top = y Q.
fn emit_meet(fb: &mut FeasBuilder, y: &TermMat, z: &TermMat, u: &TermMat, d: usize) {
    let a = TermMat::block2x2(z, u, z, &TermMat::zero(d, d));
    let zb = fb.fresh_mat(d, d);
    let ub = fb.fresh_mat(d, d);
    let b = TermMat::block2x2(&zb, &TermMat::zero(d, d), &ub, y);
    let x = fb.fresh_mat(2 * d, 2 * d);
    let yy = fb.fresh_mat(2 * d, 2 * d);
    fb.eq(&a.mul(&x), &b);
    fb.eq(&b.mul(&yy), &a);
    // kernel certificate
    let m = {
        let neg_u = TermMat::zero(d, d).sub(u);
        let mut es = Vec::new();
        for r in 0..d {
            for c in 0..d {
                es.push(z.at(r, c).clone());
            }
            for c in 0..d {
                es.push(neg_u.at(r, c).clone());
            }
        }
        TermMat { rows: d, cols: 2 * d, es }
    };
    let n = fb.fresh_mat(2 * d, 2 * d);
    let g = fb.fresh_mat(2 * d, d);
    let h = fb.fresh_mat(2 * d, 2 * d);
    fb.eq(&m.mul(&n), &TermMat::zero(d, 2 * d));
    fb.eq(&g.mul(&m).add(&n.mul(&h)), &TermMat::identity(2 * d));
    let c = z.mul(&n.top_block(d));
    let p = fb.fresh_mat(2 * d, d);
    let q = fb.fresh_mat(d, 2 * d);
    fb.eq(y, &c.mul(&p));
    fb.eq(&c, &y.mul(&q));
}

/// y = z-perp: z^t y = 0 and exists Y, Z with y Y + z Z = I.
fn emit_oc(fb: &mut FeasBuilder, y: &TermMat, z: &TermMat, d: usize) {
    fb.eq(&z.transpose().mul(y), &TermMat::zero(d, d));
    let yy = fb.fresh_mat(d, d);
    let zz = fb.fresh_mat(d, d);
    fb.eq(&y.mul(&yy).add(&z.mul(&zz)), &TermMat::identity(d));
}

/// Forward witness for ssat_to_feas: from a lattice witness compute every
/// matrix variable (canonical basis columns padded with zeros) and every
/// existential auxiliary, so the polynomial payload vanishes identically.
fn ssat_feas_forward(
    src: &Witness,
    st: &FeasStructure,
    system: &BasicSystem,
    field: FieldSpec,
) -> Result<Witness> {
    let d = st.dim;
    // propagate defined variables of the system from the given inputs
    let mut known = SubAssign::new();
    for (k, v) in src {
        if let WitnessValue::Sub(s) = v {
            known.insert(k.clone(), s.clone());
        }
    }
    let env = crate::eval::propagate_basic_system_lattice(system, &known, field, d)?
        .ok_or_else(|| Error::Instance("witness does not satisfy the system".into()))?;
    let mut mats: HashMap<String, Matrix> = HashMap::new();
    let mut out = Witness::new();
    for (orig, prefix) in &st.matvars {
        let s = env
            .get(orig)
            .cloned()
            .ok_or_else(|| Error::Unbound(orig.clone()))?;
        let mut m = Matrix::zero(field, d, d);
        for c in 0..s.basis.cols {
            for r in 0..d {
                m[(r, c)] = s.basis[(r, c)].clone();
            }
        }
        insert_matrix(&mut out, prefix, &m);
        mats.insert(orig.clone(), m);
    }
    let mut fresh = 0usize;
    let mut next_prefix = || {
        let p = format!("u{fresh}");
        fresh += 1;
        p
    };
    let get = |mats: &HashMap<String, Matrix>, name: &str| -> Result<Matrix> {
        mats.get(name)
            .cloned()
            .ok_or_else(|| Error::Unbound(name.to_string()))
    };
    for atom in &st.atoms {
        match atom {
            FeasAtom::Leq(x, y) => {
                let mx = get(&mats, x)?;
                let my = get(&mats, y)?;
                let u = my
                    .solve(&mx)?
                    .ok_or_else(|| Error::Instance(format!("atom {x} <= {y} fails")))?;
                insert_matrix(&mut out, &next_prefix(), &u);
            }
            FeasAtom::LeqZero(x) => {
                let mx = get(&mats, x)?;
                if !mx.is_zero() {
                    return Err(Error::Instance(format!("atom {x} = 0 fails")));
                }
            }
            FeasAtom::GeqOne(x) => {
                let mx = get(&mats, x)?;
                let u = mx
                    .solve(&Matrix::identity(field, d))?
                    .ok_or_else(|| Error::Instance(format!("atom 1 <= {x} fails")))?;
                insert_matrix(&mut out, &next_prefix(), &u);
            }
            FeasAtom::LeqSum(x, y, z) => {
                let mx = get(&mats, x)?;
                let my = get(&mats, y)?;
                let mz = get(&mats, z)?;
                let stacked = my.hstack(&mz)?;
                let sol = stacked
                    .solve(&mx)?
                    .ok_or_else(|| Error::Instance(format!("atom {x} <= {y}+{z} fails")))?;
                let u1 = sol.submatrix(0..d, 0..d);
                let u2 = sol.submatrix(d..2 * d, 0..d);
                insert_matrix(&mut out, &next_prefix(), &u1);
                insert_matrix(&mut out, &next_prefix(), &u2);
            }
            FeasAtom::MeetEq(y, z, u) => {
                let (names, values) = meet_certificates(
                    &get(&mats, y)?,
                    &get(&mats, z)?,
                    &get(&mats, u)?,
                    field,
                    d,
                    &mut next_prefix,
                )?;
                for (n, v) in names.iter().zip(values.iter()) {
                    insert_matrix(&mut out, n, v);
                }
            }
            FeasAtom::OcEq(y, z) => {
                let my = get(&mats, y)?;
                let mz = get(&mats, z)?;
                if !mz.transpose().mul(&my)?.is_zero() {
                    return Err(Error::Instance(format!("atom {y} = oc({z}) fails (angle)")));
                }
                let stacked = my.hstack(&mz)?;
                let sol = stacked
                    .solve(&Matrix::identity(field, d))?
                    .ok_or_else(|| Error::Instance(format!("atom {y} = oc({z}) fails (span)")))?;
                let yy = sol.submatrix(0..d, 0..d);
                let zz = sol.submatrix(d..2 * d, 0..d);
                insert_matrix(&mut out, &next_prefix(), &yy);
                insert_matrix(&mut out, &next_prefix(), &zz);
            }
        }
    }
    Ok(out)
}

/// Construct all auxiliary matrices of a meet atom in the order the
/// builder allocated them: Z, U, X, Y, N, G, H, P, Q.
fn meet_certificates(
    my: &Matrix,
    mz: &Matrix,
    mu: &Matrix,
    field: FieldSpec,
    d: usize,
    next_prefix: &mut impl FnMut() -> String,
) -> Result<(Vec<String>, Vec<Matrix>)> {
    let zsub = Subspace::from_columns(mz);
    let usub = Subspace::from_columns(mu);
    let ysub = Subspace::from_columns(my);
    let inter = zsub.meet(&usub)?;
    if ysub != inter {
        return Err(Error::Instance("meet atom fails on witness".into()));
    }
    let a = Matrix::block2x2(mz, mu, mz, &Matrix::zero(field, d, d))?;
    // First d columns of X: preimages of a basis of colspan A with the
    // lower part recorded; pad to d columns with zeros.
    let sumsub = zsub.sum(&usub)?;
    let mut x1cols: Vec<Matrix> = Vec::new();
    for c in 0..sumsub.basis.cols {
        let v = sumsub.basis.col(c);
        // solve [z u] (a; b) = v, record (v, z a)
        let sol = mz
            .hstack(mu)?
            .solve(&v)?
            .ok_or_else(|| Error::Instance("sum decomposition failed".into()))?;
        x1cols.push(sol);
    }
    let mut x = Matrix::zero(field, 2 * d, 2 * d);
    for (c, col) in x1cols.iter().enumerate() {
        for r in 0..2 * d {
            x[(r, c)] = col[(r, 0)].clone();
        }
    }
    // Last d columns: solve A xi = (0; y_i).
    for c in 0..d {
        let mut rhs = Matrix::zero(field, 2 * d, 1);
        for r in 0..d {
            rhs[(r + d, 0)] = my[(r, c)].clone();
        }
        let sol = a
            .solve(&rhs)?
            .ok_or_else(|| Error::Instance("meet block not solvable".into()))?;
        for r in 0..2 * d {
            x[(r, d + c)] = sol[(r, 0)].clone();
        }
    }
    let b = a.mul(&x)?;
    let zb = b.submatrix(0..d, 0..d);
    let ub = b.submatrix(d..2 * d, 0..d);
    // sanity: the block structure holds
    debug_assert!(b.submatrix(0..d, d..2 * d).is_zero());
    let bexp = Matrix::block2x2(&zb, &Matrix::zero(field, d, d), &ub, my)?;
    let y = bexp
        .solve(&a)?
        .ok_or_else(|| Error::Instance("meet block reverse not solvable".into()))?;
    // kernel certificate
    let m = mz.hstack(&mu.neg())?;
    let kern = m.kernel_matrix();
    let mut n = Matrix::zero(field, 2 * d, 2 * d);
    for c in 0..kern.cols {
        for r in 0..2 * d {
            n[(r, c)] = kern[(r, c)].clone();
        }
    }
    // projection onto ker M along a complement
    let mut basis = kern.clone();
    for i in 0..2 * d {
        if basis.cols == 2 * d {
            break;
        }
        let mut e = vec![0i64; 2 * d];
        e[i] = 1;
        let cand = basis.hstack(&Matrix::col_from_i64(field, &e))?;
        if cand.rank() == basis.cols + 1 {
            basis = cand;
        }
    }
    let binv = basis
        .inverse()?
        .ok_or_else(|| Error::Instance("kernel basis extension failed".into()))?;
    let mut proj_diag = Matrix::zero(field, 2 * d, 2 * d);
    for i in 0..kern.cols {
        proj_diag[(i, i)] = field.one();
    }
    let proj = basis.mul(&proj_diag)?.mul(&binv)?;
    let h = n
        .solve(&proj)?
        .ok_or_else(|| Error::Instance("kernel certificate H failed".into()))?;
    let ipi = Matrix::identity(field, 2 * d).sub(&proj)?;
    // G M = I - proj: solve M^t G^t = (I - proj)^t
    let gt = m
        .transpose()
        .solve(&ipi.transpose())?
        .ok_or_else(|| Error::Instance("kernel certificate G failed".into()))?;
    let g = gt.transpose();
    let c = mz.mul(&n.submatrix(0..d, 0..2 * d))?;
    let p = c
        .solve(my)?
        .ok_or_else(|| Error::Instance("intersection certificate P failed".into()))?;
    let q = my
        .solve(&c)?
        .ok_or_else(|| Error::Instance("intersection certificate Q failed".into()))?;
    let names: Vec<String> = (0..9).map(|_| next_prefix()).collect();
    Ok((names, vec![zb, ub, x, y, n, g, h, p, q]))
}

fn insert_matrix(w: &mut Witness, prefix: &str, m: &Matrix) {
    for r in 0..m.rows {
        for c in 0..m.cols {
            w.insert(
                format!("{prefix}r{r}c{c}"),
                WitnessValue::Scalar(m[(r, c)].clone()),
            );
        }
    }
}

fn collect_matrix(w: &Witness, prefix: &str, d: usize, field: FieldSpec) -> Result<Matrix> {
    let mut m = Matrix::zero(field, d, d);
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] = get_scalar(w, &format!("{prefix}r{r}c{c}"))?;
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// uREF -> SAT at fixed dimension (sigma_d), and on to FEAS (rho_d)
// ---------------------------------------------------------------------------

/// sigma_d(T): T(x) = y and delta_d(y, z) = 1 and phi_d(z), an sSAT
/// conjunction over the ortholattice signature, satisfiable in L(F^d) iff
/// T refutes 0 there.
pub fn uref_to_sat_fixed(t: &UnnestedTerm, d: usize, field: FieldSpec) -> Result<Reduction> {
    t.validate()?;
    let t = rename_aux(t, "_t");
    let znames = frame_var_names(d);
    for x in t.inputs.iter() {
        if znames.contains(x) || x == "y" {
            return Err(Error::Precondition(format!(
                "variable {x} collides with reserved names"
            )));
        }
    }
    // T's own equations are already basic
    let mut term_eqs: Vec<Equation> = Vec::new();
    // y = output
    term_eqs.push(Equation::new(Term::var("y"), Term::var(t.output.clone())));
    // delta_d(y, z) = 1 with zbot = 0
    let delta = delta_term(d)?;
    let delta = subst1(&delta, "x", &Term::var("y"));
    let delta = subst1(&delta, "zbot", &Term::Const(Const::Zero));
    term_eqs.push(Equation::new(delta, Term::Const(Const::One)));
    // phi_d with constants
    term_eqs.extend(frame_axiom_equations(d, true)?);
    let flattened = sat_to_ssat(&term_eqs, &Signature::ortholattice())?;
    let mut equations = t.equations.clone();
    equations.extend(flattened.equations);
    let mut inputs = t.inputs.clone();
    for v in flattened.inputs {
        if !inputs.contains(&v) && !equations.iter().any(|e| e.lhs == v) {
            inputs.push(v);
        }
    }
    // defined variables of T are not inputs
    let defined: Vec<String> = t.equations.iter().map(|e| e.lhs.clone()).collect();
    inputs.retain(|v| !defined.contains(v));
    let sys = BasicSystem {
        sig: Signature::ortholattice(),
        inputs,
        equations,
    };
    let mut instance = Instance::new(InstanceKind::SSat, Signature::ortholattice(), Payload::Basic(sys));
    instance.field = Some(field);
    instance.dim = Some(d);
    instance.origin = Some(Origin {
        reduction: "uref_to_sat_fixed".into(),
        notes: BTreeMap::new(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::URefToSat { t, d, field },
    })
}

/// Rename the defined (non-input) variables of an unnested term into a
/// fresh namespace, avoiding collisions with later flattening.
pub fn rename_aux(t: &UnnestedTerm, prefix: &str) -> UnnestedTerm {
    let mut rename: HashMap<String, String> = HashMap::new();
    for (i, eq) in t.equations.iter().enumerate() {
        rename.insert(eq.lhs.clone(), format!("{prefix}{}", i + 1));
    }
    let map = |v: &String| rename.get(v).cloned().unwrap_or_else(|| v.clone());
    UnnestedTerm {
        sig: t.sig,
        inputs: t.inputs.clone(),
        equations: t
            .equations
            .iter()
            .map(|eq| BasicEq {
                lhs: map(&eq.lhs),
                rhs: match &eq.rhs {
                    BasicRhs::Var(v) => BasicRhs::Var(map(v)),
                    BasicRhs::Const(c) => BasicRhs::Const(*c),
                    BasicRhs::Op(op, args) => BasicRhs::Op(*op, args.iter().map(map).collect()),
                },
            })
            .collect(),
        output: map(&t.output),
    }
}

/// The number of variable occurrences o(T): the dimension that suffices
/// for refutation.
pub fn dimension_bound(t: &UnnestedTerm) -> usize {
    t.occurrences()
}

/// rho_d: uREF over ortholattices -> FEAS over the reals (searched over the
/// rationals), via sigma_d with d = o(T) and the orthocomplement encoding.
pub fn uref_to_feas(t: &UnnestedTerm) -> Result<Reduction> {
    let d = dimension_bound(t).max(1);
    let field = FieldSpec::rationals();
    let sat = uref_to_sat_fixed(t, d, field)?;
    let sys = match &sat.instance.payload {
        Payload::Basic(sys) => sys.clone(),
        _ => unreachable!(),
    };
    let feas = ssat_to_feas(&sys, field, d, true)?;
    let mut instance = feas.instance;
    instance.origin = Some(Origin {
        reduction: "uref_to_feas".into(),
        notes: [("sigma_dim".to_string(), d.to_string())].into_iter().collect(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::Composed(Box::new(sat.witness), Box::new(feas.witness)),
    })
}

// ---------------------------------------------------------------------------
// FEAS -> uREF over subspace ortholattices (the MOL pipeline)
// ---------------------------------------------------------------------------

/// Sum of squares: combine a polynomial list into one (characteristic 0).
pub fn sum_of_squares(polys: &[Term]) -> Term {
    let mut acc = Term::Const(Const::RZero);
    for p in polys {
        acc = simp_add(acc, Term::rmul(p.clone(), p.clone()));
    }
    acc
}

/// The MOL pipeline: from integer ring terms p_i build an unnested
/// ortholattice term (circuit) that vanishes identically on every L(H)
/// iff sum p_i^2 has no real zero. The circuit forces an ON-3-frame from
/// raw variables, forces the x_i into its coordinate ring, makes them
/// commuting self-adjoint, evaluates p, and tests invertibility.
pub fn feas_to_ref_mol(polys: &[Term]) -> Result<Reduction> {
    let p = sum_of_squares(polys);
    let mut xs = p.variables();
    xs.sort();
    let lib = TermLibrary::standard();
    let znames: [String; 7] = [
        "zbot".into(),
        "ztop".into(),
        "z1".into(),
        "z2".into(),
        "z3".into(),
        "z12".into(),
        "z13".into(),
    ];
    for x in &xs {
        if znames.contains(x) {
            return Err(Error::Precondition(format!(
                "variable {x} collides with frame variable names"
            )));
        }
    }
    let mut inputs: Vec<String> = xs.clone();
    inputs.extend(znames.iter().cloned());
    let mut b = CircuitBuilder::new(Signature::ortholattice(), inputs, "_m");
    let comps = append_frame_chain(&mut b, &znames);
    // force ring elements
    let forced: Vec<String> = xs
        .iter()
        .map(|x| append_force_ring(&mut b, x, &comps))
        .collect();
    // commuting self-adjoint family
    let selfadj = append_force_selfadjoint(&mut b, &lib, &forced, &comps)?;
    let env: HashMap<String, String> = xs.iter().cloned().zip(selfadj.iter().cloned()).collect();
    // compile p over the s_i
    let phat = append_ring_term(&mut b, &lib, &p, &env, &comps)?;
    // invertibility: phat meet a1 = 0 and phat + a1 = a1 + a2, as one term
    let e1 = b.meet(&phat, &comps.a1);
    let lhs = b.join(&phat, &comps.a1);
    let rhs = b.join(&comps.a1, &comps.a2);
    let ljr = b.join(&lhs, &rhs);
    let lmr = b.meet(&lhs, &rhs);
    let lmrp = b.oc(&lmr);
    let e2 = b.meet(&ljr, &lmrp);
    let out = b.join(&e1, &e2);
    let circuit = b.into_unnested(out);
    circuit.validate()?;
    let mut instance = Instance::new(
        InstanceKind::URef,
        Signature::ortholattice(),
        Payload::URefZero { t: circuit },
    );
    instance.field = Some(FieldSpec::rationals());
    instance.origin = Some(Origin {
        reduction: "feas_to_ref_mol".into(),
        notes: [(
            "form".to_string(),
            "p-sharp as circuit; valid in all L(H) iff no real root".to_string(),
        )]
        .into_iter()
        .collect(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::FeasToRefMol { xs, block: 1 },
    })
}

/// Circuit form of force_commuting_selfadjoint: the commutator kernel u
/// over the family {r_i, r_i-dagger}, then
/// s_i = half x ((r_i meet (u + a2) + a1 meet u-perp) (+) dagger of same).
fn append_force_selfadjoint(
    b: &mut CircuitBuilder,
    lib: &TermLibrary,
    rs: &[String],
    comps: &FrameComponents,
) -> Result<Vec<String>> {
    let mut family: Vec<String> = Vec::new();
    for r in rs {
        family.push(r.clone());
        family.push(append_cr_op(b, lib, Op::Adj, &[r.clone()], comps)?);
    }
    let mut u = comps.a1.clone();
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let rs_ = append_cr_op(
                b,
                lib,
                Op::RMul,
                &[family[i].clone(), family[j].clone()],
                comps,
            )?;
            let sr = append_cr_op(
                b,
                lib,
                Op::RMul,
                &[family[j].clone(), family[i].clone()],
                comps,
            )?;
            let diff = append_cr_op(b, lib, Op::RSub, &[rs_, sr], comps)?;
            let ker = b.meet(&comps.a1, &diff);
            u = b.meet(&u, &ker);
        }
    }
    let uperp = b.oc(&u);
    let u_in_a1 = b.meet(&comps.a1, &uperp);
    let ua2 = b.join(&u, &comps.a2);
    let half = b.inline_term(lib.get("cr_half")?, &comps.env());
    let mut out = Vec::new();
    for r in rs {
        let cut = b.meet(r, &ua2);
        let y = b.join(&cut, &u_in_a1);
        let yd = append_cr_op(b, lib, Op::Adj, &[y.clone()], comps)?;
        let sum = append_cr_op(b, lib, Op::RAdd, &[y, yd], comps)?;
        out.push(append_cr_op(b, lib, Op::RMul, &[half.clone(), sum], comps)?);
    }
    Ok(out)
}

/// Compile a ring term over circuit variables holding ring elements.
fn append_ring_term(
    b: &mut CircuitBuilder,
    lib: &TermLibrary,
    p: &Term,
    env: &HashMap<String, String>,
    comps: &FrameComponents,
) -> Result<String> {
    Ok(match p {
        Term::Var(vname) => env
            .get(vname)
            .cloned()
            .ok_or_else(|| Error::Unbound(vname.clone()))?,
        Term::Const(Const::RZero) => comps.a1.clone(),
        Term::Const(Const::ROne) => comps.a12.clone(),
        Term::Const(c) => return Err(Error::Signature(format!("{} in ring term", c.symbol()))),
        Term::App(op, args) => {
            let compiled: Vec<String> = args
                .iter()
                .map(|a| append_ring_term(b, lib, a, env, comps))
                .collect::<Result<_>>()?;
            append_cr_op(b, lib, *op, &compiled, comps)?
        }
    })
}

// ---------------------------------------------------------------------------
// FEAS -> REF for endomorphism *-rings with pseudo-inversion
// ---------------------------------------------------------------------------

/// k(x) = 1 - x* (x*)+: the orthogonal projection onto ker x.
pub fn kernel_projection_term(x: Term) -> Term {
    let xstar = Term::adj(x);
    Term::rsub(
        Term::Const(Const::ROne),
        Term::rmul(xstar.clone(), Term::pinv(xstar)),
    )
}

/// e cup f = f + (e(1-f))+ e(1-f) on projections: projection onto
/// im e + im f.
fn cup_term(e: Term, f: Term) -> Term {
    let one = || Term::Const(Const::ROne);
    let e1f = Term::rmul(e, Term::rsub(one(), f.clone()));
    Term::radd(f, Term::rmul(Term::pinv(e1f.clone()), e1f))
}

/// x cap y: projection onto im x meet im y, via
/// 1 - ((1 - x x+) cup (1 - y y+)).
pub fn meet_projection_term(x: Term, y: Term) -> Term {
    let one = || Term::Const(Const::ROne);
    let px = Term::rmul(x.clone(), Term::pinv(x));
    let py = Term::rmul(y.clone(), Term::pinv(y));
    Term::rsub(
        one(),
        cup_term(Term::rsub(one(), px), Term::rsub(one(), py)),
    )
}

/// The *-ring reduction: p vanishes somewhere on the reals iff
/// p-circ(x, y) = k(p(x_1 q + (1-q), ...)) differs from 0 somewhere in
/// some End(H), where q meets the kernel projections of p(x), the
/// self-adjointness defects 2x_i - (y_i + y_i*), and the commutators
/// y_i y_j* - y_j* y_i.
pub fn feas_to_ref_starring(polys: &[Term]) -> Result<Reduction> {
    let p = sum_of_squares(polys);
    let mut xs = p.variables();
    xs.sort();
    let ys: Vec<String> = (1..=xs.len()).map(|i| format!("_w{i}")).collect();
    let one = || Term::Const(Const::ROne);
    let mut pieces: Vec<Term> = vec![kernel_projection_term(p.clone())];
    for (x, y) in xs.iter().zip(&ys) {
        // x + x - (y + y*)
        let xv = Term::var(x.clone());
        let yv = Term::var(y.clone());
        pieces.push(kernel_projection_term(Term::rsub(
            Term::radd(xv.clone(), xv),
            Term::radd(yv.clone(), Term::adj(yv)),
        )));
    }
    for yi in &ys {
        for yj in &ys {
            let a = Term::rmul(Term::var(yi.clone()), Term::adj(Term::var(yj.clone())));
            let bb = Term::rmul(Term::adj(Term::var(yj.clone())), Term::var(yi.clone()));
            pieces.push(kernel_projection_term(Term::rsub(a, bb)));
        }
    }
    let mut q = pieces[0].clone();
    for piece in &pieces[1..] {
        q = meet_projection_term(q, piece.clone());
    }
    // substitute x_i -> x_i q + (1 - q)
    let mut map = HashMap::new();
    for x in &xs {
        map.insert(
            x.clone(),
            Term::radd(
                Term::rmul(Term::var(x.clone()), q.clone()),
                Term::rsub(one(), q.clone()),
            ),
        );
    }
    let pcirc = kernel_projection_term(p.substitute(&map));
    let mut instance = Instance::new(
        InstanceKind::Ref,
        Signature::star_ring(),
        Payload::RefPair {
            t: pcirc,
            s: Term::Const(Const::RZero),
        },
    );
    instance.field = Some(FieldSpec::rationals());
    instance.origin = Some(Origin {
        reduction: "feas_to_ref_starring".into(),
        notes: BTreeMap::new(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::FeasToRefStarring { xs, ys },
    })
}

// ---------------------------------------------------------------------------
// uREF over *-rings -> uREF over ortholattices (the tau translation)
// ---------------------------------------------------------------------------

/// Translate an unnested *-ring term into an unnested ortholattice term:
/// force an ON-3-frame from raw frame variables, force each ring variable
/// into the coordinate ring, and map every basic equation through the
/// per-symbol coordinate ring templates. The output tests "T = ring zero":
/// out = (tau(T) + a1) meet (tau(T) meet a1)^perp, so the instance is the
/// vanishing form over ortholattices.
pub fn ring_to_ol_translate(t: &UnnestedTerm) -> Result<Reduction> {
    t.validate()?;
    let t = rename_aux(t, "_t");
    let lib = TermLibrary::standard();
    let znames: [String; 7] = [
        "zbot".into(),
        "ztop".into(),
        "z1".into(),
        "z2".into(),
        "z3".into(),
        "z12".into(),
        "z13".into(),
    ];
    for x in t.inputs.iter() {
        if znames.contains(x) {
            return Err(Error::Precondition(format!(
                "variable {x} collides with frame variable names"
            )));
        }
    }
    let mut inputs = t.inputs.clone();
    inputs.extend(znames.iter().cloned());
    let mut b = CircuitBuilder::new(Signature::ortholattice(), inputs, "_q");
    let comps = append_frame_chain(&mut b, &znames);
    let mut env: HashMap<String, String> = HashMap::new();
    for x in &t.inputs {
        env.insert(x.clone(), append_force_ring(&mut b, x, &comps));
    }
    for eq in &t.equations {
        let out = match &eq.rhs {
            BasicRhs::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Unbound(v.clone()))?,
            BasicRhs::Const(Const::RZero) => comps.a1.clone(),
            BasicRhs::Const(Const::ROne) => comps.a12.clone(),
            BasicRhs::Const(c) => {
                return Err(Error::Signature(format!("{} in *-ring circuit", c.symbol())))
            }
            BasicRhs::Op(op, args) => {
                let arg_vars: Vec<String> = args
                    .iter()
                    .map(|a| {
                        env.get(a)
                            .cloned()
                            .ok_or_else(|| Error::Unbound(a.clone()))
                    })
                    .collect::<Result<_>>()?;
                append_cr_op(&mut b, &lib, *op, &arg_vars, &comps)?
            }
        };
        env.insert(eq.lhs.clone(), out);
    }
    let tau_out = env
        .get(&t.output)
        .cloned()
        .ok_or_else(|| Error::Unbound(t.output.clone()))?;
    // vanishing form: tau(T) = a1
    let lhs = b.join(&tau_out, &comps.a1);
    let m = b.meet(&tau_out, &comps.a1);
    let mp = b.oc(&m);
    let out = b.meet(&lhs, &mp);
    let circuit = b.into_unnested(out);
    circuit.validate()?;
    let mut instance = Instance::new(
        InstanceKind::URef,
        Signature::ortholattice(),
        Payload::URefZero { t: circuit },
    );
    instance.field = Some(FieldSpec::rationals());
    instance.origin = Some(Origin {
        reduction: "ring_to_ol_translate".into(),
        notes: BTreeMap::new(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::RingToOl {
            inputs: t.inputs.clone(),
            block: 1,
        },
    })
}

/// Same translation with a chosen coordinate block size for the forward
/// witness (End(Q^m) transports into L(Q^{3m})).
pub fn ring_to_ol_translate_block(t: &UnnestedTerm, block: usize) -> Result<Reduction> {
    let mut r = ring_to_ol_translate(t)?;
    if let WitnessMap::RingToOl { block: b, .. } = &mut r.witness {
        *b = block;
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// FEAS -> REF for plain complemented modular lattices (experimental)
// ---------------------------------------------------------------------------

/// Report of one forcing-chain run: the final frame, the forced elements,
/// and any postcondition failures (reported, never patched).
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub frame: Frame,
    pub forced: Vec<Subspace>,
    pub trivial: bool,
    pub failures: Vec<String>,
}

/// Run the plain-lattice forcing chain semantically in L(F^3): from a valid
/// 3-frame and arbitrary subspaces produce either a trivial frame or the
/// same frame with the inputs forced to a common zero of the polynomials.
/// Identity on conforming inputs. Experimental: postcondition violations
/// are recorded in the report.
pub fn run_forcing_chain(
    frame: &Frame,
    rs: &[Subspace],
    polys: &[Term],
    lib: &TermLibrary,
) -> Result<ChainReport> {
    let mut failures = Vec::new();
    if frame.classify() == FrameClass::Invalid {
        return Err(Error::Precondition("chain needs a valid frame".into()));
    }
    // step 1: project into the (1,2) panel over bot
    let panel = frame.axis(1).sum(frame.axis(2))?;
    let r1: Vec<Subspace> = rs
        .iter()
        .map(|r| frame.bot.sum(r).and_then(|s| s.meet(&panel)))
        .collect::<Result<_>>()?;
    // step 2: force r + a2 = panel by frame reduction along
    // b1 = a1 meet meet_i (r_i + a2)
    let mut b1 = frame.axis(1).clone();
    for r in &r1 {
        b1 = b1.meet(&r.sum(frame.axis(2))?)?;
    }
    let f2 = frame.reduce(&b1)?;
    let panel2 = f2.axis(1).sum(f2.axis(2))?;
    let r2: Vec<Subspace> = r1
        .iter()
        .map(|r| f2.bot.sum(r).and_then(|s| s.meet(&panel2)))
        .collect::<Result<_>>()?;
    // step 3: force r meet a2 = bot by the discriminator gate: if any
    // violation remains, every component is pushed to the top
    let mut viol = f2.bot.clone();
    for r in &r2 {
        viol = viol.sum(&r.meet(f2.axis(2))?)?;
    }
    let gate = frame::discriminator(&viol, &f2)?;
    let lift = |s: &Subspace| s.sum(&gate);
    let f3 = Frame {
        field: f2.field,
        dim: f2.dim,
        order: 3,
        bot: lift(&f2.bot)?,
        top: lift(&f2.top)?,
        axes: vec![lift(&f2.axes[0])?, lift(&f2.axes[1])?, lift(&f2.axes[2])?],
        axes1j: vec![lift(&f2.axes1j[0])?, lift(&f2.axes1j[1])?],
    };
    let panel3 = f3.axis(1).sum(f3.axis(2))?;
    let r3: Vec<Subspace> = r2
        .iter()
        .map(|r| r.sum(&gate).and_then(|s| s.meet(&panel3)))
        .collect::<Result<_>>()?;
    if f3.classify() == FrameClass::Invalid {
        failures.push("gate step produced an invalid frame".into());
    }
    // at this point every r3 should be a ring element or the frame trivial
    if !f3.is_trivial() {
        for (i, r) in r3.iter().enumerate() {
            let member = r.sum(f3.axis(2))? == panel3 && r.meet(f3.axis(2))? == f3.bot;
            if !member {
                failures.push(format!("element {i} not in the coordinate ring after step 3"));
            }
        }
    }
    // step 4: force p_k(r) = 0 via b1 = a1 meet meet_k ptilde_k(r, a)
    let mut xs: Vec<String> = Vec::new();
    for p in polys {
        for v in p.variables() {
            if !xs.contains(&v) {
                xs.push(v);
            }
        }
    }
    xs.sort();
    if xs.len() != rs.len() {
        return Err(Error::Precondition(format!(
            "{} variables vs {} elements",
            xs.len(),
            rs.len()
        )));
    }
    let mut asg = TermLibrary::frame_assignment(&f3)?;
    for (x, r) in xs.iter().zip(r3.iter()) {
        asg.insert(x.clone(), r.clone());
    }
    let mut b1b = f3.axis(1).clone();
    for p in polys {
        let pt = library::ring_term_to_lattice_term(p, lib)?;
        let val = eval_lattice(&pt, &asg, f3.field, f3.dim)?;
        b1b = b1b.meet(&val)?;
    }
    let f4 = f3.reduce(&b1b)?;
    let panel4 = f4.axis(1).sum(f4.axis(2))?;
    let r4: Vec<Subspace> = r3
        .iter()
        .map(|r| f4.bot.sum(r).and_then(|s| s.meet(&panel4)))
        .collect::<Result<_>>()?;
    let trivial = f4.is_trivial();
    // postconditions: trivial, or a frame with a common zero
    if !trivial {
        let mut asg4 = TermLibrary::frame_assignment(&f4)?;
        for (x, r) in xs.iter().zip(r4.iter()) {
            asg4.insert(x.clone(), r.clone());
        }
        for p in polys {
            let pt = library::ring_term_to_lattice_term(p, lib)?;
            let val = eval_lattice(&pt, &asg4, f4.field, f4.dim)?;
            if val != f4.axes[0] {
                failures.push(format!("relation {} not forced", p.print()));
            }
        }
    }
    Ok(ChainReport {
        frame: f4,
        forced: r4,
        trivial,
        failures,
    })
}

/// The experimental plain-lattice reduction: FEAS over F to REF over
/// L(F^3). The emitted pair is (bot, top) of the forcing chain in circuit
/// form; the frame variables must be assigned frame components (recorded
/// in the instance), matching the cited-but-not-reproduced retractive
/// frame terms.
pub fn feas_to_ref_cml(polys: &[Term], field: FieldSpec) -> Result<Reduction> {
    let lib = TermLibrary::standard();
    let mut xs: Vec<String> = Vec::new();
    for p in polys {
        for var in p.variables() {
            if !xs.contains(&var) {
                xs.push(var);
            }
        }
    }
    xs.sort();
    let znames: [&str; 7] = ["zbot", "ztop", "z1", "z2", "z3", "z12", "z13"];
    for x in &xs {
        if znames.contains(&x.as_str()) {
            return Err(Error::Precondition(format!(
                "variable {x} collides with frame variable names"
            )));
        }
    }
    let mut inputs: Vec<String> = xs.clone();
    inputs.extend(znames.iter().map(|s| s.to_string()));
    let mut b = CircuitBuilder::new(Signature::lattice(false), inputs, "_c");
    // step 1
    let panel = b.join("z1", "z2");
    let r1: Vec<String> = xs
        .iter()
        .map(|x| {
            let s = b.join("zbot", x);
            b.meet(&s, &panel)
        })
        .collect();
    // step 2: frame reduction along b1
    let mut b1 = "z1".to_string();
    for r in &r1 {
        let s = b.join(r, "z2");
        b1 = b.meet(&b1, &s);
    }
    let a2_2 = {
        let s = b.join(&b1, "z12");
        b.meet(&s, "z2")
    };
    let a3_2 = {
        let s = b.join(&b1, "z13");
        b.meet(&s, "z3")
    };
    let a12_2 = {
        let s = b.join(&b1, &a2_2);
        b.meet(&s, "z12")
    };
    let a13_2 = {
        let s = b.join(&b1, &a3_2);
        b.meet(&s, "z13")
    };
    let top_2 = {
        let s = b.join(&b1, &a2_2);
        let s2 = b.join(&s, &a3_2);
        b.join("zbot", &s2)
    };
    let panel2 = b.join(&b1, &a2_2);
    let r2: Vec<String> = r1
        .iter()
        .map(|r| {
            let s = b.join("zbot", r);
            b.meet(&s, &panel2)
        })
        .collect();
    // step 3: discriminator gate
    let mut viol = "zbot".to_string();
    for r in &r2 {
        let m = b.meet(r, &a2_2);
        viol = b.join(&viol, &m);
    }
    let delta = delta_term(3)?;
    let mut env: HashMap<String, String> = HashMap::new();
    env.insert("x".into(), viol);
    env.insert("zbot".into(), "zbot".into());
    env.insert("z1".into(), b1.clone());
    env.insert("z2".into(), a2_2.clone());
    env.insert("z3".into(), a3_2.clone());
    env.insert("z12".into(), a12_2.clone());
    env.insert("z13".into(), a13_2.clone());
    let gate = b.inline_term(&delta, &env);
    let bot_3 = b.join("zbot", &gate);
    let a1_3 = b.join(&b1, &gate);
    let a2_3 = b.join(&a2_2, &gate);
    let a3_3 = b.join(&a3_2, &gate);
    let a12_3 = b.join(&a12_2, &gate);
    let a13_3 = b.join(&a13_2, &gate);
    let top_3 = b.join(&top_2, &gate);
    let panel3 = b.join(&a1_3, &a2_3);
    let r3: Vec<String> = r2
        .iter()
        .map(|r| {
            let s = b.join(r, &gate);
            b.meet(&s, &panel3)
        })
        .collect();
    // step 4: force the relations
    let comps3 = FrameComponents {
        bot: bot_3.clone(),
        top: top_3.clone(),
        a1: a1_3.clone(),
        a2: a2_3.clone(),
        a3: a3_3.clone(),
        a12: a12_3.clone(),
        a13: a13_3.clone(),
        a23: derive_a23_pub(&mut b, &a2_3, &a3_3, &a12_3, &a13_3),
    };
    let env3: HashMap<String, String> = xs.iter().cloned().zip(r3.iter().cloned()).collect();
    let mut b1b = a1_3.clone();
    for p in polys {
        let val = append_ring_term(&mut b, &lib, p, &env3, &comps3)?;
        b1b = b.meet(&b1b, &val);
    }
    let a2_4 = {
        let s = b.join(&b1b, &a12_3);
        b.meet(&s, &a2_3)
    };
    let a3_4 = {
        let s = b.join(&b1b, &a13_3);
        b.meet(&s, &a3_3)
    };
    let top_4 = {
        let s = b.join(&b1b, &a2_4);
        let s2 = b.join(&s, &a3_4);
        b.join(&bot_3, &s2)
    };
    let bot_4 = bot_3;
    // the instance pair: bot != top
    let bot_circuit = b.snapshot(bot_4.clone());
    let top_circuit = b.into_unnested(top_4);
    bot_circuit.validate()?;
    top_circuit.validate()?;
    let mut instance = Instance::new(
        InstanceKind::URef,
        Signature::lattice(false),
        Payload::URefPair {
            t: bot_circuit,
            s: top_circuit,
        },
    );
    instance.field = Some(field);
    instance.dim = Some(3);
    instance.frame_vars = Some(FrameVarSpec {
        order: 3,
        names: frame_var_names(3),
    });
    instance.origin = Some(Origin {
        reduction: "feas_to_ref_cml".into(),
        notes: [
            ("status".to_string(), "experimental".to_string()),
            (
                "zvars".to_string(),
                "range over spanning frame components".to_string(),
            ),
        ]
        .into_iter()
        .collect(),
    });
    Ok(Reduction {
        instance,
        witness: WitnessMap::FeasToRefCml { xs, field },
    })
}

fn derive_a23_pub(b: &mut CircuitBuilder, a2: &str, a3: &str, a12: &str, a13: &str) -> String {
    let s = b.join(a2, a3);
    let c = b.join(a12, a13);
    b.meet(&s, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn nnf_pushes_negations() {
        let sig = Signature::ortholattice();
        let t = parse_term("(oc (+ x (^ y (oc z))))", &sig).unwrap();
        let n = to_nnf(&t).unwrap();
        assert_eq!(n.print(), "(^ (oc x) (+ (oc y) z))");
        assert!(is_nnf(&n));
    }

    #[test]
    fn lambda_structure() {
        let xs = vec!["x1".to_string()];
        let ys = vec!["_y1".to_string()];
        let l = lambda_term(&xs, &ys, Term::var("w"));
        assert_eq!(l.print(), "(+ (^ w (+ x1 _y1)) (^ x1 _y1))");
    }

    #[test]
    fn gadget_shape_and_sizes() {
        let sig = Signature::ortholattice();
        let t = parse_term("(^ x1 (oc x1))", &sig).unwrap();
        let red = boolean_to_lattice_ref(&t).unwrap();
        match &red.instance.payload {
            Payload::RefPair { t: lhs, s: rhs } => {
                // epsilon has length linear in |t|
                assert!(lhs.len() + rhs.len() < 40 * t.len());
            }
            _ => panic!("expected a REF pair"),
        }
    }
}
