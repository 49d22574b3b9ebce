//! Ground-truth engines: exhaustive and randomized refutability /
//! satisfiability / feasibility search over small models, witness
//! verification by independent evaluation, and the round-trip checker for
//! reductions.
//!
//! Exhaustive search is deterministic: assignments are scanned in
//! lexicographic order (variables sorted, elements in canonical
//! enumeration order) and the least witness is returned; the scan is
//! partitioned over the leading variable and merged by partition index.

use crate::error::{Error, Result};
use crate::eval::{MoElem, MoN};
use crate::frame::Frame;
use crate::instance::{Instance, InstanceKind, Payload, Witness, WitnessValue};
use crate::matrix::Matrix;
use crate::reduce::{Reduction, WitnessMap};
use crate::scalar::{FieldSpec, Scalar};
use crate::subspace::{enumerate_subspaces, Subspace};
use crate::term::{Const, Op, Signature, Term};
use crate::unnest::{BasicRhs, UnnestedTerm};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::HashMap;

pub use crate::subspace::gaussian_binomial;

/// The models the oracles can search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    /// The two-element lattice.
    Two,
    /// The modular ortholattice MO_n of height 2 with n atom pairs.
    Mo { n: u32 },
    /// The subspace lattice L(F^dim).
    Subspaces { field: FieldSpec, dim: usize },
    /// The endomorphism *-ring End(F^dim) with pseudo-inversion.
    Endo { field: FieldSpec, dim: usize },
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<ModelSpec> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            ["two"] => Ok(ModelSpec::Two),
            ["mo", n] => Ok(ModelSpec::Mo {
                n: n.parse()
                    .map_err(|_| Error::Instance("bad MO_n size".into()))?,
            }),
            ["gf", p, d] | ["subspace", p, d] => Ok(ModelSpec::Subspaces {
                field: field_of(p)?,
                dim: d.parse()
                    .map_err(|_| Error::Instance("bad dimension".into()))?,
            }),
            ["endo", p, d] => Ok(ModelSpec::Endo {
                field: field_of(p)?,
                dim: d.parse()
                    .map_err(|_| Error::Instance("bad dimension".into()))?,
            }),
            _ => Err(Error::Instance(format!("unknown model {text:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ModelSpec::Two => "two".into(),
            ModelSpec::Mo { n } => format!("mo:{n}"),
            ModelSpec::Subspaces { field, dim } => format!("subspace:{}:{dim}", field.char),
            ModelSpec::Endo { field, dim } => format!("endo:{}:{dim}", field.char),
        }
    }
}

fn field_of(p: &str) -> Result<FieldSpec> {
    let c: u64 = p
        .parse()
        .map_err(|_| Error::Instance("bad characteristic".into()))?;
    if c == 0 {
        Ok(FieldSpec::rationals())
    } else {
        FieldSpec::prime(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl Answer {
    pub fn name(&self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        }
    }
}

/// Search outcome: a yes always carries a witness that re-verifies.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub answer: Answer,
    pub witness: Option<Witness>,
    pub tried: u64,
    pub seed: u64,
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        json!({
            "answer": self.answer.name(),
            "witness": self.witness.as_ref().map(crate::instance::witness_to_json),
            "tried": self.tried,
            "seed": self.seed,
        })
    }
}

// ---------------------------------------------------------------------------
// Lattice model values
// ---------------------------------------------------------------------------

/// An element of one of the lattice models.
#[derive(Debug, Clone, PartialEq)]
pub enum MVal {
    B(bool),
    M(MoElem),
    S(Subspace),
}

impl MVal {
    fn to_witness_value(&self) -> WitnessValue {
        match self {
            MVal::B(b) => WitnessValue::Bool(*b),
            MVal::M(e) => WitnessValue::Mo(*e),
            MVal::S(s) => WitnessValue::Sub(s.clone()),
        }
    }

    fn from_witness_value(v: &WitnessValue) -> Result<MVal> {
        Ok(match v {
            WitnessValue::Bool(b) => MVal::B(*b),
            WitnessValue::Mo(e) => MVal::M(*e),
            WitnessValue::Sub(s) => MVal::S(s.clone()),
            _ => return Err(Error::Instance("not a lattice value".into())),
        })
    }
}

/// Lattice operations per model.
#[derive(Debug, Clone)]
enum LatModel {
    Two,
    Mo(MoN),
    Sub { field: FieldSpec, dim: usize },
}

impl LatModel {
    fn of(spec: &ModelSpec) -> Result<LatModel> {
        Ok(match spec {
            ModelSpec::Two => LatModel::Two,
            ModelSpec::Mo { n } => LatModel::Mo(MoN::new(*n)),
            ModelSpec::Subspaces { field, dim } => LatModel::Sub {
                field: *field,
                dim: *dim,
            },
            ModelSpec::Endo { .. } => {
                return Err(Error::Instance("not a lattice model".into()))
            }
        })
    }

    fn elements(&self) -> Result<Vec<MVal>> {
        match self {
            LatModel::Two => Ok(vec![MVal::B(false), MVal::B(true)]),
            LatModel::Mo(m) => Ok(m.elements().into_iter().map(MVal::M).collect()),
            LatModel::Sub { field, dim } => Ok(enumerate_subspaces(*field, *dim)?
                .into_iter()
                .map(MVal::S)
                .collect()),
        }
    }

    fn random<R: Rng>(&self, rng: &mut R) -> MVal {
        match self {
            LatModel::Two => MVal::B(rng.gen_bool(0.5)),
            LatModel::Mo(m) => {
                let els = m.elements();
                MVal::M(els[rng.gen_range(0..els.len())])
            }
            LatModel::Sub { field, dim } => MVal::S(Subspace::random(rng, *field, *dim, 5)),
        }
    }

    fn zero(&self) -> MVal {
        match self {
            LatModel::Two => MVal::B(false),
            LatModel::Mo(_) => MVal::M(MoElem::Bot),
            LatModel::Sub { field, dim } => MVal::S(Subspace::zero(*field, *dim)),
        }
    }

    fn one(&self) -> MVal {
        match self {
            LatModel::Two => MVal::B(true),
            LatModel::Mo(_) => MVal::M(MoElem::Top),
            LatModel::Sub { field, dim } => MVal::S(Subspace::full(*field, *dim)),
        }
    }

    fn apply(&self, op: Op, args: &[MVal]) -> Result<MVal> {
        match (self, op) {
            (LatModel::Two, Op::Join) => Ok(MVal::B(bval(&args[0])? | bval(&args[1])?)),
            (LatModel::Two, Op::Meet) => Ok(MVal::B(bval(&args[0])? & bval(&args[1])?)),
            (LatModel::Two, Op::Oc) => Ok(MVal::B(!bval(&args[0])?)),
            (LatModel::Mo(m), Op::Join) => Ok(MVal::M(m.join(mval(&args[0])?, mval(&args[1])?))),
            (LatModel::Mo(m), Op::Meet) => Ok(MVal::M(m.meet(mval(&args[0])?, mval(&args[1])?))),
            (LatModel::Mo(m), Op::Oc) => Ok(MVal::M(m.oc(mval(&args[0])?))),
            (LatModel::Sub { .. }, Op::Join) => Ok(MVal::S(sval(&args[0])?.sum(sval(&args[1])?)?)),
            (LatModel::Sub { .. }, Op::Meet) => {
                Ok(MVal::S(sval(&args[0])?.meet(sval(&args[1])?)?))
            }
            (LatModel::Sub { .. }, Op::Oc) => Ok(MVal::S(sval(&args[0])?.ortho()?)),
            _ => Err(Error::Signature(format!(
                "{} not a lattice operation",
                op.symbol()
            ))),
        }
    }

    fn eval(&self, t: &Term, asg: &HashMap<String, MVal>) -> Result<MVal> {
        match t {
            Term::Var(v) => asg
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Unbound(v.clone())),
            Term::Const(Const::Zero) => Ok(self.zero()),
            Term::Const(Const::One) => Ok(self.one()),
            Term::Const(c) => Err(Error::Signature(format!("{} in lattice", c.symbol()))),
            Term::App(op, args) => {
                let vals: Vec<MVal> = args
                    .iter()
                    .map(|a| self.eval(a, asg))
                    .collect::<Result<_>>()?;
                self.apply(*op, &vals)
            }
        }
    }

    fn eval_basic(&self, rhs: &BasicRhs, asg: &HashMap<String, MVal>) -> Result<MVal> {
        match rhs {
            BasicRhs::Var(v) => asg
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Unbound(v.clone())),
            BasicRhs::Const(Const::Zero) => Ok(self.zero()),
            BasicRhs::Const(Const::One) => Ok(self.one()),
            BasicRhs::Const(c) => Err(Error::Signature(format!("{} in lattice", c.symbol()))),
            BasicRhs::Op(op, args) => {
                let vals: Vec<MVal> = args
                    .iter()
                    .map(|a| {
                        asg.get(a)
                            .cloned()
                            .ok_or_else(|| Error::Unbound(a.clone()))
                    })
                    .collect::<Result<_>>()?;
                self.apply(*op, &vals)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Table-compiled fast path for exhaustive search over small finite models
// ---------------------------------------------------------------------------

/// Operation tables over element indices, for models small enough to
/// enumerate. Exhaustive search compiles the payload once and scans
/// assignments as index tuples.
struct FastLat {
    elems: Vec<MVal>,
    join: Vec<u16>,
    meet: Vec<u16>,
    oc: Option<Vec<u16>>,
    zero: u16,
    one: u16,
}

impl FastLat {
    fn build(m: &LatModel) -> Result<Option<FastLat>> {
        let elems = m.elements()?;
        let n = elems.len();
        if n > 4096 {
            return Ok(None);
        }
        let mut join = vec![0u16; n * n];
        let mut meet = vec![0u16; n * n];
        let index_of = |v: &MVal, elems: &[MVal]| -> Result<u16> {
            elems
                .iter()
                .position(|e| e == v)
                .map(|i| i as u16)
                .ok_or_else(|| Error::Instance("element missing from enumeration".into()))
        };
        for i in 0..n {
            for j in 0..n {
                let jv = m.apply(Op::Join, &[elems[i].clone(), elems[j].clone()])?;
                let mv = m.apply(Op::Meet, &[elems[i].clone(), elems[j].clone()])?;
                join[i * n + j] = index_of(&jv, &elems)?;
                meet[i * n + j] = index_of(&mv, &elems)?;
            }
        }
        let oc = match m {
            LatModel::Two | LatModel::Mo(_) => {
                let mut t = vec![0u16; n];
                for i in 0..n {
                    t[i] = index_of(&m.apply(Op::Oc, &[elems[i].clone()])?, &elems)?;
                }
                Some(t)
            }
            LatModel::Sub { field, .. } if field.is_rational() => None,
            LatModel::Sub { .. } => None,
        };
        let zero = index_of(&m.zero(), &elems)?;
        let one = index_of(&m.one(), &elems)?;
        Ok(Some(FastLat {
            elems,
            join,
            meet,
            oc,
            zero,
            one,
        }))
    }

    fn n(&self) -> usize {
        self.elems.len()
    }
}

/// Stack-machine instruction over element indices.
#[derive(Debug, Clone, Copy)]
enum FInstr {
    Const(u16),
    Load(usize),
    Join,
    Meet,
    Oc,
}

fn compile_term(t: &Term, slots: &HashMap<String, usize>, f: &FastLat) -> Result<Vec<FInstr>> {
    let mut prog = Vec::new();
    compile_into(t, slots, f, &mut prog)?;
    Ok(prog)
}

fn compile_into(
    t: &Term,
    slots: &HashMap<String, usize>,
    f: &FastLat,
    prog: &mut Vec<FInstr>,
) -> Result<()> {
    match t {
        Term::Var(v) => {
            let slot = *slots
                .get(v)
                .ok_or_else(|| Error::Unbound(v.clone()))?;
            prog.push(FInstr::Load(slot));
        }
        Term::Const(Const::Zero) => prog.push(FInstr::Const(f.zero)),
        Term::Const(Const::One) => prog.push(FInstr::Const(f.one)),
        Term::Const(c) => {
            return Err(Error::Signature(format!("{} in lattice", c.symbol())))
        }
        Term::App(op, args) => {
            for a in args {
                compile_into(a, slots, f, prog)?;
            }
            prog.push(match op {
                Op::Join => FInstr::Join,
                Op::Meet => FInstr::Meet,
                Op::Oc => {
                    if f.oc.is_none() {
                        return Err(Error::Unsupported(
                            "orthocomplement over this model".into(),
                        ));
                    }
                    FInstr::Oc
                }
                other => {
                    return Err(Error::Signature(format!(
                        "{} in lattice",
                        other.symbol()
                    )))
                }
            });
        }
    }
    Ok(())
}

fn run_prog(prog: &[FInstr], regs: &[u16], f: &FastLat) -> u16 {
    let n = f.n();
    let mut stack: Vec<u16> = Vec::with_capacity(8);
    for ins in prog {
        match ins {
            FInstr::Const(c) => stack.push(*c),
            FInstr::Load(s) => stack.push(regs[*s]),
            FInstr::Join => {
                let b = stack.pop().unwrap() as usize;
                let a = stack.pop().unwrap() as usize;
                stack.push(f.join[a * n + b]);
            }
            FInstr::Meet => {
                let b = stack.pop().unwrap() as usize;
                let a = stack.pop().unwrap() as usize;
                stack.push(f.meet[a * n + b]);
            }
            FInstr::Oc => {
                let a = stack.pop().unwrap() as usize;
                stack.push(f.oc.as_ref().unwrap()[a]);
            }
        }
    }
    stack.pop().unwrap()
}

/// A circuit step: define a register from a program, or check an already
/// defined register against it (identification equations).
#[derive(Debug, Clone)]
enum FStep {
    Define(usize, Vec<FInstr>),
    Check(usize, Vec<FInstr>),
}

/// Compiled payload condition.
enum FastCheck {
    RefPair(Vec<FInstr>, Vec<FInstr>),
    Circuit {
        steps: Vec<FStep>,
        out: usize,
        against: CircuitTarget,
    },
    Equations {
        pairs: Vec<(Vec<FInstr>, Vec<FInstr>)>,
        need_nonconstant: bool,
        input_slots: Vec<usize>,
    },
    Basic {
        steps: Vec<FStep>,
        need_nonconstant: bool,
        input_slots: Vec<usize>,
    },
}

enum CircuitTarget {
    NonZero,
    DiffersFrom { steps: Vec<FStep>, out: usize },
}

struct FastPayload {
    check: FastCheck,
    regs_len: usize,
}

fn compile_circuit_steps(
    t: &UnnestedTerm,
    slots: &mut HashMap<String, usize>,
    next: &mut usize,
    f: &FastLat,
) -> Result<(Vec<FStep>, usize)> {
    let mut steps = Vec::new();
    for eq in &t.equations {
        let prog = compile_basic_rhs(&eq.rhs, slots, f)?;
        match slots.get(&eq.lhs) {
            Some(&slot) => steps.push(FStep::Check(slot, prog)),
            None => {
                let slot = *next;
                *next += 1;
                slots.insert(eq.lhs.clone(), slot);
                steps.push(FStep::Define(slot, prog));
            }
        }
    }
    let out = *slots
        .get(&t.output)
        .ok_or_else(|| Error::Unbound(t.output.clone()))?;
    Ok((steps, out))
}

fn compile_basic_rhs(
    rhs: &BasicRhs,
    slots: &HashMap<String, usize>,
    f: &FastLat,
) -> Result<Vec<FInstr>> {
    let t = match rhs {
        BasicRhs::Var(v) => Term::var(v.clone()),
        BasicRhs::Const(c) => Term::Const(*c),
        BasicRhs::Op(op, args) => Term::App(
            *op,
            args.iter().map(|a| Term::var(a.clone())).collect(),
        ),
    };
    compile_term(&t, slots, f)
}

fn compile_payload(
    inst: &Instance,
    f: &FastLat,
    search_vars: &[String],
    fixed: &HashMap<String, MVal>,
) -> Result<(FastPayload, Vec<u16>)> {
    let mut slots: HashMap<String, usize> = HashMap::new();
    let mut next = 0usize;
    for v in search_vars {
        slots.insert(v.clone(), next);
        next += 1;
    }
    let mut fixed_vals: Vec<(usize, u16)> = Vec::new();
    for (k, v) in fixed {
        let idx = f
            .elems
            .iter()
            .position(|e| e == v)
            .ok_or_else(|| Error::Instance("fixed value outside model".into()))? as u16;
        slots.insert(k.clone(), next);
        fixed_vals.push((next, idx));
        next += 1;
    }
    let input_slots: Vec<usize> = search_vars.iter().map(|v| slots[v]).collect();
    let check = match &inst.payload {
        Payload::RefPair { t, s } => {
            FastCheck::RefPair(compile_term(t, &slots, f)?, compile_term(s, &slots, f)?)
        }
        Payload::URefZero { t } => {
            let (steps, out) = compile_circuit_steps(t, &mut slots, &mut next, f)?;
            FastCheck::Circuit {
                steps,
                out,
                against: CircuitTarget::NonZero,
            }
        }
        Payload::URefPair { t, s } => {
            let (steps, out) = compile_circuit_steps(t, &mut slots, &mut next, f)?;
            let (steps2, out2) = compile_circuit_steps(s, &mut slots, &mut next, f)?;
            FastCheck::Circuit {
                steps,
                out,
                against: CircuitTarget::DiffersFrom {
                    steps: steps2,
                    out: out2,
                },
            }
        }
        Payload::Equations(eqs) => {
            let mut pairs = Vec::new();
            for eq in eqs {
                pairs.push((
                    compile_term(&eq.lhs, &slots, f)?,
                    compile_term(&eq.rhs, &slots, f)?,
                ));
            }
            FastCheck::Equations {
                pairs,
                need_nonconstant: !inst.sig.bounds,
                input_slots: input_slots.clone(),
            }
        }
        Payload::Basic(sys) => {
            let mut steps = Vec::new();
            for eq in &sys.equations {
                let prog = compile_basic_rhs(&eq.rhs, &slots, f)?;
                match slots.get(&eq.lhs) {
                    Some(&slot) => steps.push(FStep::Check(slot, prog)),
                    None => {
                        let slot = next;
                        next += 1;
                        slots.insert(eq.lhs.clone(), slot);
                        steps.push(FStep::Define(slot, prog));
                    }
                }
            }
            let inputs: Vec<usize> = sys
                .inputs
                .iter()
                .filter_map(|v| slots.get(v).copied())
                .collect();
            FastCheck::Basic {
                steps,
                need_nonconstant: !inst.sig.bounds,
                input_slots: inputs,
            }
        }
        Payload::Polys(_) => return Err(Error::Instance("FEAS has no lattice model".into())),
    };
    let mut base = vec![0u16; next];
    for (slot, val) in fixed_vals {
        base[slot] = val;
    }
    Ok((
        FastPayload {
            check,
            regs_len: next,
        },
        base,
    ))
}

impl FastPayload {
    fn hit(&self, regs: &mut [u16], f: &FastLat) -> bool {
        match &self.check {
            FastCheck::RefPair(p1, p2) => run_prog(p1, regs, f) != run_prog(p2, regs, f),
            FastCheck::Circuit { steps, out, against } => {
                if !run_steps(steps, regs, f) {
                    return false;
                }
                let v = regs[*out];
                match against {
                    CircuitTarget::NonZero => v != f.zero,
                    CircuitTarget::DiffersFrom { steps: s2, out: o2 } => {
                        if !run_steps(s2, regs, f) {
                            return false;
                        }
                        v != regs[*o2]
                    }
                }
            }
            FastCheck::Equations {
                pairs,
                need_nonconstant,
                input_slots,
            } => {
                for (p1, p2) in pairs {
                    if run_prog(p1, regs, f) != run_prog(p2, regs, f) {
                        return false;
                    }
                }
                !*need_nonconstant || nonconstant(regs, input_slots)
            }
            FastCheck::Basic {
                steps,
                need_nonconstant,
                input_slots,
            } => {
                if !run_steps(steps, regs, f) {
                    return false;
                }
                !*need_nonconstant || nonconstant(regs, input_slots)
            }
        }
    }
}

fn run_steps(steps: &[FStep], regs: &mut [u16], f: &FastLat) -> bool {
    for s in steps {
        match s {
            FStep::Define(slot, prog) => {
                regs[*slot] = run_prog(prog, regs, f);
            }
            FStep::Check(slot, prog) => {
                if regs[*slot] != run_prog(prog, regs, f) {
                    return false;
                }
            }
        }
    }
    true
}

fn nonconstant(regs: &[u16], slots: &[usize]) -> bool {
    let mut it = slots.iter();
    match it.next() {
        None => false,
        Some(&first) => it.any(|&s| regs[s] != regs[first]),
    }
}

fn bval(v: &MVal) -> Result<bool> {
    match v {
        MVal::B(b) => Ok(*b),
        _ => Err(Error::Instance("expected a two-element value".into())),
    }
}

fn mval(v: &MVal) -> Result<MoElem> {
    match v {
        MVal::M(e) => Ok(*e),
        _ => Err(Error::Instance("expected an MO_n value".into())),
    }
}

fn sval(v: &MVal) -> Result<&Subspace> {
    match v {
        MVal::S(s) => Ok(s),
        _ => Err(Error::Instance("expected a subspace value".into())),
    }
}

// ---------------------------------------------------------------------------
// Witness checking (the evaluator side, independent of the search)
// ---------------------------------------------------------------------------

/// Decide whether the assignment satisfies the instance's defining
/// condition (a refutation for REF/uREF, a satisfying non-trivial
/// assignment for SAT/sSAT, a common zero for FEAS).
pub fn verify_witness(inst: &Instance, model: &ModelSpec, w: &Witness) -> Result<bool> {
    match (&inst.payload, model) {
        (Payload::Polys(ps), _) => {
            let field = inst
                .field
                .ok_or_else(|| Error::Instance("FEAS needs a field".into()))?;
            let mut asg: HashMap<String, Scalar> = HashMap::new();
            for (k, v) in w {
                if let WitnessValue::Scalar(s) = v {
                    asg.insert(k.clone(), s.clone());
                }
            }
            for p in ps {
                if !crate::eval::eval_ring_scalar(p, &asg, field)?.is_zero() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (payload, ModelSpec::Endo { field, dim }) => {
            let mut asg: HashMap<String, Matrix> = HashMap::new();
            for (k, v) in w {
                if let WitnessValue::Mat(m) = v {
                    asg.insert(k.clone(), m.clone());
                }
            }
            match payload {
                Payload::RefPair { t, s } => {
                    let tv = crate::eval::eval_ring(t, &asg, *field, *dim)?;
                    let sv = crate::eval::eval_ring(s, &asg, *field, *dim)?;
                    Ok(tv != sv)
                }
                Payload::URefZero { t } => {
                    let tv = crate::eval::eval_ring_circuit(t, &asg, *field, *dim)?;
                    Ok(!tv.is_zero())
                }
                Payload::URefPair { t, s } => {
                    let tv = crate::eval::eval_ring_circuit(t, &asg, *field, *dim)?;
                    let sv = crate::eval::eval_ring_circuit(s, &asg, *field, *dim)?;
                    Ok(tv != sv)
                }
                Payload::Equations(eqs) => {
                    for eq in eqs {
                        let l = crate::eval::eval_ring(&eq.lhs, &asg, *field, *dim)?;
                        let r = crate::eval::eval_ring(&eq.rhs, &asg, *field, *dim)?;
                        if l != r {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                _ => Err(Error::Instance("payload/model mismatch".into())),
            }
        }
        (payload, spec) => {
            let m = LatModel::of(spec)?;
            let mut asg: HashMap<String, MVal> = HashMap::new();
            for (k, v) in w {
                asg.insert(k.clone(), MVal::from_witness_value(v)?);
            }
            verify_lattice_payload(payload, &inst.sig, &m, &asg, inst)
        }
    }
}

fn verify_lattice_payload(
    payload: &Payload,
    sig: &Signature,
    m: &LatModel,
    asg: &HashMap<String, MVal>,
    inst: &Instance,
) -> Result<bool> {
    match payload {
        Payload::RefPair { t, s } => Ok(m.eval(t, asg)? != m.eval(s, asg)?),
        Payload::URefZero { t } => {
            let v = eval_circuit(m, t, asg)?;
            Ok(v != m.zero())
        }
        Payload::URefPair { t, s } => {
            Ok(eval_circuit(m, t, asg)? != eval_circuit(m, s, asg)?)
        }
        Payload::Equations(eqs) => {
            for eq in eqs {
                if m.eval(&eq.lhs, asg)? != m.eval(&eq.rhs, asg)? {
                    return Ok(false);
                }
            }
            non_trivial(sig, m, asg, &inst.variables())
        }
        Payload::Basic(sys) => {
            let mut env = asg.clone();
            for eq in &sys.equations {
                let v = m.eval_basic(&eq.rhs, &env)?;
                match env.get(&eq.lhs) {
                    Some(existing) => {
                        if *existing != v {
                            return Ok(false);
                        }
                    }
                    None => {
                        env.insert(eq.lhs.clone(), v);
                    }
                }
            }
            non_trivial(sig, m, &env, &sys.inputs)
        }
        Payload::Polys(_) => Err(Error::Instance("FEAS has no lattice model".into())),
    }
}

fn eval_circuit(m: &LatModel, t: &UnnestedTerm, asg: &HashMap<String, MVal>) -> Result<MVal> {
    let mut env = asg.clone();
    for eq in &t.equations {
        let v = m.eval_basic(&eq.rhs, &env)?;
        env.insert(eq.lhs.clone(), v);
    }
    env.get(&t.output)
        .cloned()
        .ok_or_else(|| Error::Unbound(t.output.clone()))
}

/// Non-triviality of the generated subalgebra: with bounds in the
/// signature it is automatic (0 != 1 in every model used here); without,
/// the assignment must not be constant.
fn non_trivial(
    sig: &Signature,
    _m: &LatModel,
    asg: &HashMap<String, MVal>,
    inputs: &[String],
) -> Result<bool> {
    if sig.bounds {
        return Ok(true);
    }
    let mut vals = inputs.iter().filter_map(|v| asg.get(v));
    match vals.next() {
        None => Ok(false),
        Some(first) => Ok(vals.any(|v| v != first)),
    }
}

// ---------------------------------------------------------------------------
// model_search
// ---------------------------------------------------------------------------

/// Exhaustive or randomized search for REF / SAT / sSAT instances over a
/// small model. Frame-constrained variables (recorded on the instance) are
/// bound to the standard spanning frame rather than searched.
pub fn model_search(
    inst: &Instance,
    model: &ModelSpec,
    mode: SearchMode,
    budget: u64,
    seed: u64,
) -> Result<Verdict> {
    if matches!(inst.kind, InstanceKind::Feas) {
        return Err(Error::Instance("use feas_search for FEAS instances".into()));
    }
    if let ModelSpec::Endo { .. } = model {
        return endo_search(inst, model, mode, budget, seed);
    }
    let m = LatModel::of(model)?;
    let mut fixed: HashMap<String, MVal> = HashMap::new();
    let mut vars = inst.variables();
    if let Some(fv) = &inst.frame_vars {
        let (field, dim) = match model {
            ModelSpec::Subspaces { field, dim } => (*field, *dim),
            _ => {
                return Err(Error::Instance(
                    "frame-constrained instances need a subspace model".into(),
                ))
            }
        };
        let frame = Frame::standard(fv.order, dim, field)?;
        let mut w = Witness::new();
        crate::reduce::frame_witness_entries(&mut w, &frame);
        for (k, v) in &w {
            fixed.insert(k.clone(), MVal::from_witness_value(v)?);
        }
        vars.retain(|v| !fv.names.contains(v));
    }
    vars.sort();
    match mode {
        SearchMode::Exhaustive => {
            let elements = m.elements()?;
            exhaustive_search(inst, &m, &vars, &fixed, &elements, budget, seed)
        }
        SearchMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tried = 0u64;
            while tried < budget {
                tried += 1;
                let mut asg = fixed.clone();
                for v in &vars {
                    asg.insert(v.clone(), m.random(&mut rng));
                }
                if verify_lattice_payload(&inst.payload, &inst.sig, &m, &asg, inst)? {
                    let witness = assignment_witness(&asg);
                    return Ok(Verdict {
                        answer: Answer::Yes,
                        witness: Some(witness),
                        tried,
                        seed,
                    });
                }
            }
            Ok(Verdict {
                answer: Answer::Unknown,
                witness: None,
                tried,
                seed,
            })
        }
    }
}

fn assignment_witness(asg: &HashMap<String, MVal>) -> Witness {
    asg.iter()
        .map(|(k, v)| (k.clone(), v.to_witness_value()))
        .collect()
}

fn exhaustive_search(
    inst: &Instance,
    m: &LatModel,
    vars: &[String],
    fixed: &HashMap<String, MVal>,
    elements: &[MVal],
    budget: u64,
    seed: u64,
) -> Result<Verdict> {
    let k = vars.len();
    let n = elements.len() as u128;
    let total = n.checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::Budget(format!(
            "{total} assignments exceed budget {budget}"
        )));
    }
    if k == 0 {
        let ok = verify_lattice_payload(&inst.payload, &inst.sig, m, fixed, inst)?;
        return Ok(Verdict {
            answer: if ok { Answer::Yes } else { Answer::No },
            witness: if ok {
                Some(assignment_witness(fixed))
            } else {
                None
            },
            tried: 1,
            seed,
        });
    }
    let fast = FastLat::build(m)?.ok_or_else(|| {
        Error::Unsupported("exhaustive search needs an enumerable model".into())
    })?;
    let (payload, base_regs) = compile_payload(inst, &fast, vars, fixed)?;
    // Partition on the leading variable; each partition scans the remaining
    // space in lexicographic order (leftmost most significant). The least
    // hit wins.
    let per_partition = n.pow((k - 1) as u32) as u64;
    let results: Vec<Option<(u64, Vec<u16>)>> = (0..elements.len())
        .into_par_iter()
        .map(|first| {
            let mut regs = base_regs.clone();
            regs[0] = first as u16;
            let mut idx = vec![0u16; k - 1];
            let mut local: u64 = 0;
            'scan: loop {
                regs[1..k].copy_from_slice(&idx);
                let mut work = regs.clone();
                if payload.hit(&mut work, &fast) {
                    return Some((local, work[..k].to_vec()));
                }
                local += 1;
                let mut pos = k - 1;
                loop {
                    if pos == 0 {
                        break 'scan;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if (idx[pos] as usize) < elements.len() {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
            None
        })
        .collect();
    let mut best: Option<(u64, Vec<u16>)> = None;
    for (part, r) in results.into_iter().enumerate() {
        if let Some((local, w)) = r {
            let global = part as u64 * per_partition + local;
            if best.as_ref().map_or(true, |(g, _)| global < *g) {
                best = Some((global, w));
            }
        }
    }
    match best {
        Some((global, idxs)) => {
            let mut w: Witness = fixed
                .iter()
                .map(|(k2, v)| (k2.clone(), v.to_witness_value()))
                .collect();
            for (v, &i) in vars.iter().zip(idxs.iter()) {
                w.insert(v.clone(), fast.elems[i as usize].to_witness_value());
            }
            // the searcher's hit must re-verify through the independent
            // evaluator path
            let mut asg: HashMap<String, MVal> = fixed.clone();
            for (v, &i) in vars.iter().zip(idxs.iter()) {
                asg.insert(v.clone(), fast.elems[i as usize].clone());
            }
            if !verify_lattice_payload(&inst.payload, &inst.sig, m, &asg, inst)? {
                return Err(Error::Instance(
                    "compiled search hit failed independent re-verification".into(),
                ));
            }
            Ok(Verdict {
                answer: Answer::Yes,
                witness: Some(w),
                tried: global + 1,
                seed,
            })
        }
        None => Ok(Verdict {
            answer: Answer::No,
            witness: None,
            tried: total as u64,
            seed,
        }),
    }
}

/// Random search over End(F^d) for *-ring REF instances.
fn endo_search(
    inst: &Instance,
    model: &ModelSpec,
    mode: SearchMode,
    budget: u64,
    seed: u64,
) -> Result<Verdict> {
    let (field, dim) = match model {
        ModelSpec::Endo { field, dim } => (*field, *dim),
        _ => unreachable!(),
    };
    if mode == SearchMode::Exhaustive {
        return Err(Error::Unsupported(
            "exhaustive search over End(F^d) is not offered; use random".into(),
        ));
    }
    let vars = inst.variables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tried = 0u64;
    while tried < budget {
        tried += 1;
        let mut w = Witness::new();
        for v in &vars {
            let m = Matrix::from_fn(field, dim, dim, |_, _| {
                field.from_i64(rng.gen_range(-3..=3))
            });
            w.insert(v.clone(), WitnessValue::Mat(m));
        }
        if verify_witness(inst, model, &w)? {
            return Ok(Verdict {
                answer: Answer::Yes,
                witness: Some(w),
                tried,
                seed,
            });
        }
    }
    Ok(Verdict {
        answer: Answer::Unknown,
        witness: None,
        tried,
        seed,
    })
}

// ---------------------------------------------------------------------------
// feas_search
// ---------------------------------------------------------------------------

/// Scalar brute-force / randomized search for a common zero.
pub fn feas_search(
    inst: &Instance,
    mode: SearchMode,
    budget: u64,
    seed: u64,
) -> Result<Verdict> {
    let polys = match &inst.payload {
        Payload::Polys(ps) => ps,
        _ => return Err(Error::Instance("feas_search needs a FEAS instance".into())),
    };
    let field = inst
        .field
        .ok_or_else(|| Error::Instance("FEAS needs a field".into()))?;
    let vars = {
        let mut vs = inst.variables();
        vs.sort();
        vs
    };
    if polys.is_empty() {
        // the empty system is feasible; witness: everything zero
        let w: Witness = vars
            .iter()
            .map(|v| (v.clone(), WitnessValue::Scalar(field.zero())))
            .collect();
        return Ok(Verdict {
            answer: Answer::Yes,
            witness: Some(w),
            tried: 0,
            seed,
        });
    }
    let check = |asg: &HashMap<String, Scalar>| -> Result<bool> {
        for p in polys {
            if !crate::eval::eval_ring_scalar(p, asg, field)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    match (mode, field.size()) {
        (SearchMode::Exhaustive, Some(p)) => {
            let total = (p as u128).checked_pow(vars.len() as u32).unwrap_or(u128::MAX);
            if total > budget as u128 {
                return Err(Error::Budget(format!(
                    "{total} assignments exceed budget {budget}"
                )));
            }
            let mut idx = vec![0u64; vars.len()];
            let mut tried = 0u64;
            loop {
                let mut asg = HashMap::new();
                for (i, v) in vars.iter().enumerate() {
                    asg.insert(v.clone(), field.element(idx[i])?);
                }
                tried += 1;
                if check(&asg)? {
                    let w: Witness = asg
                        .into_iter()
                        .map(|(k, v)| (k, WitnessValue::Scalar(v)))
                        .collect();
                    return Ok(Verdict {
                        answer: Answer::Yes,
                        witness: Some(w),
                        tried,
                        seed,
                    });
                }
                // odometer
                let mut pos = vars.len();
                loop {
                    if pos == 0 {
                        return Ok(Verdict {
                            answer: Answer::No,
                            witness: None,
                            tried,
                            seed,
                        });
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < p {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        }
        (SearchMode::Exhaustive, None) => Err(Error::Unsupported(
            "exhaustive search over Q is not possible; use random".into(),
        )),
        (SearchMode::Random, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tried = 0u64;
            while tried < budget {
                tried += 1;
                let mut asg = HashMap::new();
                for v in &vars {
                    let s = match field.size() {
                        Some(p) => field.element(rng.gen_range(0..p))?,
                        None => {
                            // small-height rationals
                            let num = rng.gen_range(-6i64..=6);
                            let den = *[1i64, 1, 1, 2, 3].get(rng.gen_range(0..5)).unwrap();
                            field.parse_scalar(&format!("{num}/{den}"))?
                        }
                    };
                    asg.insert(v.clone(), s);
                }
                if check(&asg)? {
                    let w: Witness = asg
                        .into_iter()
                        .map(|(k, v)| (k, WitnessValue::Scalar(v)))
                        .collect();
                    return Ok(Verdict {
                        answer: Answer::Yes,
                        witness: Some(w),
                        tried,
                        seed,
                    });
                }
            }
            Ok(Verdict {
                answer: Answer::Unknown,
                witness: None,
                tried,
                seed,
            })
        }
    }
}

/// Structured feasibility search for instances produced by ssat_to_feas:
/// enumerate (or sample) the primary d x d matrices only, decide the atoms
/// by exact linear algebra, and on a hit complete the existential
/// certificates and re-verify the polynomial payload at the completed
/// witness. The polynomial evaluation is the final authority.
pub fn feas_search_structured(
    inst: &Instance,
    mode: SearchMode,
    budget: u64,
    seed: u64,
) -> Result<Verdict> {
    let st = inst
        .structure
        .as_ref()
        .ok_or_else(|| Error::Instance("no structure on this FEAS instance".into()))?;
    let field = inst
        .field
        .ok_or_else(|| Error::Instance("FEAS needs a field".into()))?;
    let d = st.dim;
    // all matrix variables are assigned directly here, so the witness map
    // needs no propagation system
    let wm = WitnessMap::SsatToFeas {
        structure: st.clone(),
        field,
        system: crate::normal::BasicSystem {
            sig: Signature::lattice(true),
            inputs: vec![],
            equations: vec![],
        },
    };
    let names: Vec<&String> = st.matvars.iter().map(|(orig, _)| orig).collect();
    let complete_and_check = |mats: &[Matrix]| -> Result<Option<Witness>> {
        // lattice-side witness from spans
        let mut src = Witness::new();
        for (name, m) in names.iter().zip(mats) {
            src.insert(
                (*name).clone(),
                WitnessValue::Sub(Subspace::from_columns(m)),
            );
        }
        match wm.forward(&src) {
            Ok(full) => {
                if verify_witness(inst, &ModelSpec::Subspaces { field, dim: d }, &full)? {
                    Ok(Some(full))
                } else {
                    Err(Error::Instance(
                        "completed certificate failed polynomial verification".into(),
                    ))
                }
            }
            Err(_) => Ok(None),
        }
    };
    match mode {
        SearchMode::Exhaustive => {
            let p = field
                .size()
                .ok_or_else(|| Error::Unsupported("exhaustive needs GF(p)".into()))?;
            let per_matrix = (p as u128).checked_pow((d * d) as u32).unwrap_or(u128::MAX);
            let total = per_matrix
                .checked_pow(names.len() as u32)
                .unwrap_or(u128::MAX);
            if total > budget as u128 {
                return Err(Error::Budget(format!(
                    "{total} matrix assignments exceed budget {budget}"
                )));
            }
            let mut idx = vec![0u64; names.len()];
            let mut tried = 0u64;
            loop {
                let mats: Vec<Matrix> = idx
                    .iter()
                    .map(|&i| matrix_from_index(field, d, p, i))
                    .collect();
                tried += 1;
                if let Some(w) = complete_and_check(&mats)? {
                    return Ok(Verdict {
                        answer: Answer::Yes,
                        witness: Some(w),
                        tried,
                        seed,
                    });
                }
                let mut pos = idx.len();
                loop {
                    if pos == 0 {
                        return Ok(Verdict {
                            answer: Answer::No,
                            witness: None,
                            tried,
                            seed,
                        });
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < per_matrix as u64 {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        }
        SearchMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tried = 0u64;
            while tried < budget {
                tried += 1;
                let mats: Vec<Matrix> = names
                    .iter()
                    .map(|_| {
                        Matrix::from_fn(field, d, d, |_, _| match field.size() {
                            Some(p) => Scalar::Fp(rng.gen_range(0..p)),
                            None => field.from_i64(rng.gen_range(-3..=3)),
                        })
                    })
                    .collect();
                if let Some(w) = complete_and_check(&mats)? {
                    return Ok(Verdict {
                        answer: Answer::Yes,
                        witness: Some(w),
                        tried,
                        seed,
                    });
                }
            }
            Ok(Verdict {
                answer: Answer::Unknown,
                witness: None,
                tried,
                seed,
            })
        }
    }
}

fn matrix_from_index(field: FieldSpec, d: usize, p: u64, mut i: u64) -> Matrix {
    Matrix::from_fn(field, d, d, |_, _| {
        let v = i % p;
        i /= p;
        Scalar::Fp(v)
    })
}

// ---------------------------------------------------------------------------
// Round trips
// ---------------------------------------------------------------------------

/// Report of a round-trip check between a source instance and its
/// reduction.
#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub source_answer: Answer,
    pub target_answer: Answer,
    pub forward_verified: Option<bool>,
    pub backward_verified: Option<bool>,
    pub agree: bool,
}

impl RoundtripReport {
    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source_answer.name(),
            "target": self.target_answer.name(),
            "forward_verified": self.forward_verified,
            "backward_verified": self.backward_verified,
            "agree": self.agree,
        })
    }
}

/// Search both sides within budget, transport witnesses both ways where
/// possible, and verify each transported witness by evaluation.
/// Disagreement is a report outcome, not an error.
#[allow(clippy::too_many_arguments)]
pub fn roundtrip_check(
    source: &Instance,
    source_model: &ModelSpec,
    reduction: &Reduction,
    target_model: &ModelSpec,
    mode: SearchMode,
    budget: u64,
    seed: u64,
) -> Result<RoundtripReport> {
    let src_verdict = search_any(source, source_model, mode, budget, seed)?;
    let tgt_verdict = search_any(&reduction.instance, target_model, mode, budget, seed)?;
    let mut forward_verified = None;
    if let (Answer::Yes, Some(w)) = (src_verdict.answer, &src_verdict.witness) {
        let transported = reduction.witness.forward(w)?;
        forward_verified = Some(verify_witness(
            &reduction.instance,
            target_model,
            &transported,
        )?);
    }
    let mut backward_verified = None;
    if let (Answer::Yes, Some(w)) = (tgt_verdict.answer, &tgt_verdict.witness) {
        if let Some(back) = reduction.witness.backward(w)? {
            backward_verified = Some(verify_witness(source, source_model, &back)?);
        }
    }
    let agree = match (src_verdict.answer, tgt_verdict.answer) {
        (Answer::Unknown, _) | (_, Answer::Unknown) => {
            // unknown only from random search: count as agreement when the
            // other side found nothing either
            src_verdict.answer != Answer::Yes && tgt_verdict.answer != Answer::Yes
                || src_verdict.answer == tgt_verdict.answer
        }
        (a, b) => a == b,
    };
    Ok(RoundtripReport {
        source_answer: src_verdict.answer,
        target_answer: tgt_verdict.answer,
        forward_verified,
        backward_verified,
        agree,
    })
}

/// Dispatch on kind: FEAS instances use the scalar (or structured) search,
/// everything else the model search.
pub fn search_any(
    inst: &Instance,
    model: &ModelSpec,
    mode: SearchMode,
    budget: u64,
    seed: u64,
) -> Result<Verdict> {
    if inst.kind == InstanceKind::Feas {
        // prefer plain brute force when in budget; fall back to structure
        let vars = inst.variables().len() as u32;
        let in_budget = match (mode, inst.field.and_then(|f| f.size())) {
            (SearchMode::Exhaustive, Some(p)) => {
                (p as u128).checked_pow(vars).map_or(false, |t| t <= budget as u128)
            }
            (SearchMode::Random, _) => true,
            _ => false,
        };
        if in_budget {
            feas_search(inst, mode, budget, seed)
        } else if inst.structure.is_some() {
            feas_search_structured(inst, mode, budget, seed)
        } else {
            feas_search(inst, mode, budget, seed)
        }
    } else {
        model_search(inst, model, mode, budget, seed)
    }
}
