//! Decision problem instances, witnesses, and their JSON forms.
//!
//! Instance JSON (format 1):
//! {"format": 1, "kind": "...", "signature": "...", "terms": [s-exprs],
//!  "field": {"char": n} | null, "dim": n | null, "origin": {...}}
//! plus payload-specific keys ("inputs", "circuit", "structure"). Key order
//! is deterministic (serde_json maps are ordered), so identical inputs
//! produce identical output bytes.

use crate::error::{Error, Result};
use crate::eval::MoElem;
use crate::matrix::{Matrix, MatrixJson};
use crate::normal::BasicSystem;
use crate::scalar::{FieldSpec, Scalar};
use crate::subspace::Subspace;
use crate::term::{parse_equation, parse_term, Equation, Signature, Term};
use crate::unnest::{BasicEq, BasicRhs, UnnestedTerm};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Feas,
    Ref,
    URef,
    Sat,
    SSat,
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::Feas => "feas",
            InstanceKind::Ref => "ref",
            InstanceKind::URef => "uref",
            InstanceKind::Sat => "sat",
            InstanceKind::SSat => "ssat",
        }
    }

    pub fn from_name(s: &str) -> Result<InstanceKind> {
        Ok(match s {
            "feas" => InstanceKind::Feas,
            "ref" => InstanceKind::Ref,
            "uref" => InstanceKind::URef,
            "sat" => InstanceKind::Sat,
            "ssat" => InstanceKind::SSat,
            _ => return Err(Error::Instance(format!("unknown kind {s:?}"))),
        })
    }
}

/// Instance payloads by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// REF: refute t = s.
    RefPair { t: Term, s: Term },
    /// uREF in vanishing form: refute t = 0 (lattice zero or ring zero
    /// depending on the signature).
    URefZero { t: UnnestedTerm },
    /// uREF pair: refute t = s with shared input variables.
    URefPair { t: UnnestedTerm, s: UnnestedTerm },
    /// SAT: all equations hold under a non-trivial assignment.
    Equations(Vec<Equation>),
    /// sSAT: conjunction of basic equations.
    Basic(BasicSystem),
    /// FEAS: common zero of integer ring terms.
    Polys(Vec<Term>),
}

/// Structured view of a FEAS instance produced by the subspace-lattice
/// translation: the matrix variables and the atoms they must satisfy.
/// Used by the structured oracle; the polynomial payload stands alone.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasStructure {
    pub dim: usize,
    /// original lattice variable -> matrix entry prefix
    pub matvars: Vec<(String, String)>,
    pub atoms: Vec<FeasAtom>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasAtom {
    /// Span(a) <= Span(b)
    Leq(String, String),
    /// a = 0
    LeqZero(String),
    /// Span(a) = F^d
    GeqOne(String),
    /// Span(a) <= Span(b) + Span(c)
    LeqSum(String, String, String),
    /// Span(y) = Span(z) meet Span(u)
    MeetEq(String, String, String),
    /// Span(y) = Span(z)-perp
    OcEq(String, String),
}

/// Frame-variable annotation: these variables of a REF instance range over
/// the components of a spanning frame (bot, top, axes, pair axes) rather
/// than over arbitrary lattice elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameVarSpec {
    pub order: usize,
    /// bot, top, z1..zd, z12..z1d in this order.
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Origin {
    pub reduction: String,
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub kind: InstanceKind,
    pub sig: Signature,
    pub payload: Payload,
    pub field: Option<FieldSpec>,
    pub dim: Option<usize>,
    pub origin: Option<Origin>,
    pub structure: Option<FeasStructure>,
    pub frame_vars: Option<FrameVarSpec>,
}

impl Instance {
    pub fn new(kind: InstanceKind, sig: Signature, payload: Payload) -> Instance {
        Instance {
            kind,
            sig,
            payload,
            field: None,
            dim: None,
            origin: None,
            structure: None,
            frame_vars: None,
        }
    }

    /// All free variables of the payload, in deterministic order.
    pub fn variables(&self) -> Vec<String> {
        let mut vs: Vec<String> = Vec::new();
        let mut push = |vs: &mut Vec<String>, v: String| {
            if !vs.contains(&v) {
                vs.push(v);
            }
        };
        match &self.payload {
            Payload::RefPair { t, s } => {
                for v in t.variables().into_iter().chain(s.variables()) {
                    push(&mut vs, v);
                }
            }
            Payload::URefZero { t } => {
                for v in t.inputs.clone() {
                    push(&mut vs, v);
                }
            }
            Payload::URefPair { t, s } => {
                for v in t.inputs.iter().chain(s.inputs.iter()) {
                    push(&mut vs, v.clone());
                }
            }
            Payload::Equations(eqs) => {
                for eq in eqs {
                    for v in eq.variables() {
                        push(&mut vs, v);
                    }
                }
            }
            Payload::Basic(sys) => {
                for v in sys.inputs.clone() {
                    push(&mut vs, v);
                }
            }
            Payload::Polys(ps) => {
                for p in ps {
                    for v in p.variables() {
                        push(&mut vs, v);
                    }
                }
            }
        }
        vs
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("format".into(), json!(1));
        m.insert("kind".into(), json!(self.kind.name()));
        m.insert("signature".into(), json!(self.sig.name()));
        let mut terms: Vec<Value> = Vec::new();
        match &self.payload {
            Payload::RefPair { t, s } => {
                terms.push(json!(t.print()));
                terms.push(json!(s.print()));
            }
            Payload::URefZero { t } => {
                m.insert("circuit".into(), circuit_json(t));
            }
            Payload::URefPair { t, s } => {
                m.insert("circuit".into(), circuit_json(t));
                m.insert("circuit2".into(), circuit_json(s));
            }
            Payload::Equations(eqs) => {
                for eq in eqs {
                    terms.push(json!(eq.print()));
                }
            }
            Payload::Basic(sys) => {
                for eq in &sys.equations {
                    terms.push(json!(eq.print()));
                }
                m.insert("inputs".into(), json!(sys.inputs));
            }
            Payload::Polys(ps) => {
                for p in ps {
                    terms.push(json!(p.print()));
                }
            }
        }
        m.insert("terms".into(), Value::Array(terms));
        m.insert(
            "field".into(),
            match self.field {
                Some(f) => json!({ "char": f.char }),
                None => Value::Null,
            },
        );
        m.insert(
            "dim".into(),
            match self.dim {
                Some(d) => json!(d),
                None => Value::Null,
            },
        );
        m.insert(
            "origin".into(),
            match &self.origin {
                Some(o) => json!({ "reduction": o.reduction, "notes": o.notes }),
                None => Value::Null,
            },
        );
        if let Some(st) = &self.structure {
            m.insert("structure".into(), structure_json(st));
        }
        if let Some(fv) = &self.frame_vars {
            m.insert(
                "frame_vars".into(),
                json!({ "order": fv.order, "names": fv.names }),
            );
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Instance> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Instance("instance JSON must be an object".into()))?;
        let format = obj.get("format").and_then(Value::as_u64).unwrap_or(0);
        if format != 1 {
            return Err(Error::Instance(format!("unsupported format {format}")));
        }
        let kind = InstanceKind::from_name(
            obj.get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Instance("missing kind".into()))?,
        )?;
        let sig = Signature::from_name(
            obj.get("signature")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Instance("missing signature".into()))?,
        )?;
        let term_strs: Vec<&str> = obj
            .get("terms")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).collect())
            .unwrap_or_default();
        let payload = match kind {
            InstanceKind::Ref => {
                if term_strs.len() != 2 {
                    return Err(Error::Instance("ref needs exactly two terms".into()));
                }
                Payload::RefPair {
                    t: parse_term(term_strs[0], &sig)?,
                    s: parse_term(term_strs[1], &sig)?,
                }
            }
            InstanceKind::URef => {
                let c = obj
                    .get("circuit")
                    .ok_or_else(|| Error::Instance("uref needs a circuit".into()))?;
                let t = circuit_from_json(c, &sig)?;
                match obj.get("circuit2") {
                    Some(c2) => Payload::URefPair {
                        t,
                        s: circuit_from_json(c2, &sig)?,
                    },
                    None => Payload::URefZero { t },
                }
            }
            InstanceKind::Sat => Payload::Equations(
                term_strs
                    .iter()
                    .map(|s| parse_equation(s, &sig))
                    .collect::<Result<_>>()?,
            ),
            InstanceKind::SSat => {
                let inputs: Vec<String> = obj
                    .get("inputs")
                    .and_then(Value::as_array)
                    .map(|a| {
                        a.iter()
                            .filter_map(Value::as_str)
                            .map(String::from)
                            .collect()
                    })
                    .unwrap_or_default();
                let eqs: Vec<Equation> = term_strs
                    .iter()
                    .map(|s| parse_equation(s, &sig))
                    .collect::<Result<_>>()?;
                let mut basic = Vec::new();
                for eq in &eqs {
                    basic.push(equation_to_basic(eq)?);
                }
                Payload::Basic(BasicSystem {
                    sig,
                    inputs,
                    equations: basic,
                })
            }
            InstanceKind::Feas => Payload::Polys(
                term_strs
                    .iter()
                    .map(|s| parse_term(s, &sig))
                    .collect::<Result<_>>()?,
            ),
        };
        let field = match obj.get("field") {
            Some(Value::Object(fo)) => {
                let c = fo
                    .get("char")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Instance("field.char missing".into()))?;
                Some(if c == 0 {
                    FieldSpec::rationals()
                } else {
                    FieldSpec::prime(c)?
                })
            }
            _ => None,
        };
        let dim = obj.get("dim").and_then(Value::as_u64).map(|d| d as usize);
        let origin = match obj.get("origin") {
            Some(Value::Object(oo)) => Some(Origin {
                reduction: oo
                    .get("reduction")
                    .and_then(Value::as_str)
                    .unwrap_or("")
                    .to_string(),
                notes: oo
                    .get("notes")
                    .and_then(Value::as_object)
                    .map(|n| {
                        n.iter()
                            .filter_map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())))
                            .collect()
                    })
                    .unwrap_or_default(),
            }),
            _ => None,
        };
        let structure = obj.get("structure").map(structure_from_json).transpose()?;
        let frame_vars = match obj.get("frame_vars") {
            Some(Value::Object(fo)) => Some(FrameVarSpec {
                order: fo.get("order").and_then(Value::as_u64).unwrap_or(0) as usize,
                names: fo
                    .get("names")
                    .and_then(Value::as_array)
                    .map(|a| {
                        a.iter()
                            .filter_map(Value::as_str)
                            .map(String::from)
                            .collect()
                    })
                    .unwrap_or_default(),
            }),
            _ => None,
        };
        Ok(Instance {
            kind,
            sig,
            payload,
            field,
            dim,
            origin,
            structure,
            frame_vars,
        })
    }
}

fn circuit_json(t: &UnnestedTerm) -> Value {
    json!({
        "inputs": t.inputs,
        "equations": t.equations.iter().map(BasicEq::print).collect::<Vec<_>>(),
        "output": t.output,
    })
}

fn circuit_from_json(v: &Value, sig: &Signature) -> Result<UnnestedTerm> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Instance("circuit must be an object".into()))?;
    let inputs: Vec<String> = obj
        .get("inputs")
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .filter_map(Value::as_str)
                .map(String::from)
                .collect()
        })
        .unwrap_or_default();
    let output = obj
        .get("output")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Instance("circuit output missing".into()))?
        .to_string();
    let mut equations = Vec::new();
    if let Some(arr) = obj.get("equations").and_then(Value::as_array) {
        for e in arr {
            let text = e
                .as_str()
                .ok_or_else(|| Error::Instance("circuit equations are strings".into()))?;
            let eq = parse_equation(text, sig)?;
            equations.push(equation_to_basic(&eq)?);
        }
    }
    let u = UnnestedTerm {
        sig: *sig,
        inputs,
        equations,
        output,
    };
    u.validate()?;
    Ok(u)
}

/// Interpret a term equation as a basic equation (lhs a variable, rhs a
/// variable, constant, or single operation on variables).
pub fn equation_to_basic(eq: &Equation) -> Result<BasicEq> {
    let lhs = match &eq.lhs {
        Term::Var(v) => v.clone(),
        _ => {
            return Err(Error::Instance(format!(
                "not a basic equation: {}",
                eq.print()
            )))
        }
    };
    let rhs = match &eq.rhs {
        Term::Var(v) => BasicRhs::Var(v.clone()),
        Term::Const(c) => BasicRhs::Const(*c),
        Term::App(op, args) => {
            let mut names = Vec::new();
            for a in args {
                match a {
                    Term::Var(v) => names.push(v.clone()),
                    _ => {
                        return Err(Error::Instance(format!(
                            "not a basic equation: {}",
                            eq.print()
                        )))
                    }
                }
            }
            BasicRhs::Op(*op, names)
        }
    };
    Ok(BasicEq { lhs, rhs })
}

fn structure_json(st: &FeasStructure) -> Value {
    let atoms: Vec<Value> = st
        .atoms
        .iter()
        .map(|a| match a {
            FeasAtom::Leq(x, y) => json!(["leq", x, y]),
            FeasAtom::LeqZero(x) => json!(["leq0", x]),
            FeasAtom::GeqOne(x) => json!(["geq1", x]),
            FeasAtom::LeqSum(x, y, z) => json!(["leqsum", x, y, z]),
            FeasAtom::MeetEq(x, y, z) => json!(["meeteq", x, y, z]),
            FeasAtom::OcEq(x, y) => json!(["oceq", x, y]),
        })
        .collect();
    json!({
        "dim": st.dim,
        "matvars": st.matvars,
        "atoms": atoms,
    })
}

fn structure_from_json(v: &Value) -> Result<FeasStructure> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Instance("structure must be an object".into()))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Instance("structure.dim missing".into()))? as usize;
    let matvars: Vec<(String, String)> = obj
        .get("matvars")
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .filter_map(|p| {
                    let pair = p.as_array()?;
                    Some((
                        pair.first()?.as_str()?.to_string(),
                        pair.get(1)?.as_str()?.to_string(),
                    ))
                })
                .collect()
        })
        .unwrap_or_default();
    let mut atoms = Vec::new();
    if let Some(arr) = obj.get("atoms").and_then(Value::as_array) {
        for a in arr {
            let parts: Vec<&str> = a
                .as_array()
                .map(|xs| xs.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            let atom = match parts.as_slice() {
                ["leq", x, y] => FeasAtom::Leq(x.to_string(), y.to_string()),
                ["leq0", x] => FeasAtom::LeqZero(x.to_string()),
                ["geq1", x] => FeasAtom::GeqOne(x.to_string()),
                ["leqsum", x, y, z] => FeasAtom::LeqSum(x.to_string(), y.to_string(), z.to_string()),
                ["meeteq", x, y, z] => FeasAtom::MeetEq(x.to_string(), y.to_string(), z.to_string()),
                ["oceq", x, y] => FeasAtom::OcEq(x.to_string(), y.to_string()),
                _ => return Err(Error::Instance("bad structure atom".into())),
            };
            atoms.push(atom);
        }
    }
    Ok(FeasStructure { dim, matvars, atoms })
}

// ---------------------------------------------------------------------------
// Witnesses
// ---------------------------------------------------------------------------

/// A witness value: an element of whichever model the instance refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessValue {
    Bool(bool),
    Sub(Subspace),
    Mat(Matrix),
    Scalar(Scalar),
    Mo(MoElem),
}

pub type Witness = BTreeMap<String, WitnessValue>;

impl WitnessValue {
    pub fn to_json(&self) -> Value {
        match self {
            WitnessValue::Bool(b) => json!({ "bool": b }),
            WitnessValue::Sub(s) => json!({ "subspace": s.to_json() }),
            WitnessValue::Mat(m) => json!({ "matrix": m.to_json() }),
            WitnessValue::Scalar(s) => json!({ "scalar": s.to_text() }),
            WitnessValue::Mo(e) => match e {
                MoElem::Bot => json!({ "mo": "bot" }),
                MoElem::Top => json!({ "mo": "top" }),
                MoElem::Atom(i) => json!({ "mo": format!("a{i}") }),
            },
        }
    }

    pub fn from_json(v: &Value, field: FieldSpec) -> Result<WitnessValue> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Instance("witness value must be an object".into()))?;
        if let Some(b) = obj.get("bool").and_then(Value::as_bool) {
            return Ok(WitnessValue::Bool(b));
        }
        if let Some(s) = obj.get("subspace") {
            let mj: MatrixJson = serde_json::from_value(s.clone())?;
            return Ok(WitnessValue::Sub(Subspace::from_json(&mj)?));
        }
        if let Some(m) = obj.get("matrix") {
            let mj: MatrixJson = serde_json::from_value(m.clone())?;
            return Ok(WitnessValue::Mat(Matrix::from_json(&mj)?));
        }
        if let Some(s) = obj.get("scalar").and_then(Value::as_str) {
            return Ok(WitnessValue::Scalar(field.parse_scalar(s)?));
        }
        if let Some(s) = obj.get("mo").and_then(Value::as_str) {
            let e = match s {
                "bot" => MoElem::Bot,
                "top" => MoElem::Top,
                other => {
                    let idx: u32 = other
                        .strip_prefix('a')
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::Instance("bad MO element".into()))?;
                    MoElem::Atom(idx)
                }
            };
            return Ok(WitnessValue::Mo(e));
        }
        Err(Error::Instance("unrecognized witness value".into()))
    }
}

pub fn witness_to_json(w: &Witness) -> Value {
    let map: Map<String, Value> = w.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
    Value::Object(map)
}

pub fn witness_from_json(v: &Value, field: FieldSpec) -> Result<Witness> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Instance("witness must be an object".into()))?;
    let mut w = Witness::new();
    for (k, val) in obj {
        w.insert(k.clone(), WitnessValue::from_json(val, field)?);
    }
    Ok(w)
}
