//! The term library: named lattice/ortholattice terms implementing the
//! coordinate ring operations, the discriminator, relative complements, and
//! the retraction circuits that force arbitrary substitutions into
//! ON-3-frames and coordinate ring elements.
//!
//! Library terms are ordinary [`Term`]s over reserved variable names:
//! arguments `x`, `y`, `w` and frame components `zbot`, `ztop`, `z1`, `z2`,
//! `z3`, `z12`, `z13`, `z23`. Every entry is validated against the semantic
//! operations of [`crate::frame`] before use; the library can be serialized
//! so alternative formulas can be swapped in from a file.

use crate::error::{Error, Result};
use crate::eval::{eval_lattice, SubAssign};
use crate::frame::{cr_op, discriminator, CrOp, Frame};
use crate::matrix::Matrix;
use crate::subspace::Subspace;
use crate::term::{parse_term, Const, Op, Signature, Term};
use crate::unnest::CircuitBuilder;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};

fn v(name: &str) -> Term {
    Term::var(name)
}

/// Names of the frame component variables used by library templates.
pub const FRAME_VARS: [&str; 8] = ["zbot", "ztop", "z1", "z2", "z3", "z12", "z13", "z23"];

/// Coordinate ring multiplication template, mul(x, y) = omega(f_x o f_y):
/// ((y + z23) meet (z1 + z3) + (x + z13) meet (z2 + z3)) meet (z1 + z2).
fn mul_template() -> Term {
    Term::meet(
        Term::join(
            Term::meet(Term::join(v("y"), v("z23")), Term::join(v("z1"), v("z3"))),
            Term::meet(Term::join(v("x"), v("z13")), Term::join(v("z2"), v("z3"))),
        ),
        Term::join(v("z1"), v("z2")),
    )
}

/// Subtraction template, sub(x, y) = omega(f_x - f_y):
/// (((y + z13) meet (z2 + z3) + x) meet (z13 + z2) + z3) meet (z1 + z2).
fn sub_template() -> Term {
    Term::meet(
        Term::join(
            Term::meet(
                Term::join(
                    Term::meet(Term::join(v("y"), v("z13")), Term::join(v("z2"), v("z3"))),
                    v("x"),
                ),
                Term::join(v("z13"), v("z2")),
            ),
            v("z3"),
        ),
        Term::join(v("z1"), v("z2")),
    )
}

fn subst(t: &Term, pairs: &[(&str, Term)]) -> Term {
    let map: HashMap<String, Term> = pairs
        .iter()
        .map(|(k, val)| (k.to_string(), val.clone()))
        .collect();
    t.substitute(&map)
}

/// neg(x) = sub(z1, x).
fn neg_template() -> Term {
    subst(&sub_template(), &[("x", v("z1")), ("y", v("x"))])
}

fn neg_of(arg: Term) -> Term {
    subst(&neg_template(), &[("x", arg)])
}

/// add(x, y) = sub(x, neg(y)); x and y each occur once.
fn add_template() -> Term {
    subst(&sub_template(), &[("x", v("x")), ("y", neg_of(v("y")))])
}

/// s(x) = pi_231 pi_312 pi_123 (x); on invertible ring elements the ring
/// inverse.
fn inverse_template() -> Term {
    let p123 = Term::meet(Term::join(v("x"), v("z23")), Term::join(v("z1"), v("z3")));
    let p312 = Term::meet(Term::join(p123, v("z12")), Term::join(v("z3"), v("z2")));
    Term::meet(Term::join(p312, v("z13")), Term::join(v("z2"), v("z1")))
}

/// dagger(x) = s((z1 (-) x)^perp meet (z1 + z2)).
fn dagger_template() -> Term {
    let neg = neg_of(v("x"));
    let arg = Term::meet(Term::oc(neg), Term::join(v("z1"), v("z2")));
    subst(&inverse_template(), &[("x", arg)])
}

/// ker(x) = x meet z1.
fn kernel_template() -> Term {
    Term::meet(v("x"), v("z1"))
}

/// im(x) = ((x + z1) meet z2 + z12) meet z1.
fn image_template() -> Term {
    Term::meet(
        Term::join(Term::meet(Term::join(v("x"), v("z1")), v("z2")), v("z12")),
        v("z1"),
    )
}

/// im+(x) = (z1 meet ker(x)^perp + z12) meet z2.
fn image_pinv_template() -> Term {
    Term::meet(
        Term::join(Term::meet(v("z1"), Term::oc(kernel_template())), v("z12")),
        v("z2"),
    )
}

/// psi(x) = s(x) meet (im + im+) + z1 meet im^perp: the Moore-Penrose
/// pseudo-inverse in the coordinate *-ring.
fn pinv_template() -> Term {
    let psi0 = Term::meet(
        inverse_template(),
        Term::join(image_template(), image_pinv_template()),
    );
    Term::join(psi0, Term::meet(v("z1"), Term::oc(image_template())))
}

/// 2^-1 = s(z12 (+) z12).
fn half_template() -> Term {
    let two = subst(&add_template(), &[("x", v("z12")), ("y", v("z12"))]);
    subst(&inverse_template(), &[("x", two)])
}

/// #(x, y, w) = x + y meet w^perp.
fn sharp_template() -> Term {
    Term::join(v("x"), Term::meet(v("y"), Term::oc(v("w"))))
}

/// #''(x, y, w) = (w meet (x meet w)^perp) + y meet (x + w)^perp:
/// a complement of x in [0, y] for x, w <= y; equal to w when y = w (+) x.
fn sharp2_template() -> Term {
    Term::join(
        Term::meet(v("w"), Term::oc(Term::meet(v("x"), v("w")))),
        Term::meet(v("y"), Term::oc(Term::join(v("x"), v("w")))),
    )
}

/// force_ring(x) = #''(z2, z1 + z2, x meet (z1 + z2)).
fn force_ring_template() -> Term {
    let panel = Term::join(v("z1"), v("z2"));
    subst(
        &sharp2_template(),
        &[
            ("x", v("z2")),
            ("y", panel.clone()),
            ("w", Term::meet(v("x"), panel)),
        ],
    )
}

/// The discriminator term delta_d over variables x, zbot, z1..zd and
/// z12..z1d: bot + sum_i spread_i(h_i(x)) with
/// h_i(x) = (x + zbot + sum_{j!=i} zj) meet zi and
/// spread_i(w) = w + sum_{j!=i} (w + z_{ij}) meet zj.
/// On a spanning frame of a height-d modular lattice: top iff x != 0.
pub fn delta_term(d: usize) -> Result<Term> {
    if d < 1 || d > 9 {
        return Err(Error::Precondition(format!(
            "delta_term: order {d} out of range"
        )));
    }
    let axis = |i: usize| v(&format!("z{i}"));
    let pair = |i: usize, j: usize| -> Term {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if lo == 1 {
            v(&format!("z1{hi}"))
        } else {
            // derived axis: (z_i + z_j) meet (z_{1i} + z_{1j})
            Term::meet(
                Term::join(axis(lo), axis(hi)),
                Term::join(v(&format!("z1{lo}")), v(&format!("z1{hi}"))),
            )
        }
    };
    let mut parts = Vec::new();
    for i in 1..=d {
        let mut rest = v("zbot");
        for j in 1..=d {
            if j != i {
                rest = Term::join(rest, axis(j));
            }
        }
        let h = Term::meet(Term::join(v("x"), rest), axis(i));
        let mut spread = h.clone();
        for j in 1..=d {
            if j != i {
                spread = Term::join(
                    spread,
                    Term::meet(Term::join(h.clone(), pair(i, j)), axis(j)),
                );
            }
        }
        parts.push(spread);
    }
    let mut acc = v("zbot");
    for p in parts {
        acc = Term::join(acc, p);
    }
    Ok(acc)
}

/// Frame axiom equations phi_d over axis variables `z1..zd`, pair variables
/// `z12..z1d`, and either bound variables `zbot`/`ztop` or the constants
/// 0/1 (`bounds_as_constants`).
pub fn frame_axiom_equations(
    d: usize,
    bounds_as_constants: bool,
) -> Result<Vec<crate::term::Equation>> {
    use crate::term::Equation;
    if d < 1 || d > 9 {
        return Err(Error::Precondition(format!(
            "frame axioms: order {d} out of range"
        )));
    }
    let bot = || {
        if bounds_as_constants {
            Term::Const(Const::Zero)
        } else {
            v("zbot")
        }
    };
    let top = || {
        if bounds_as_constants {
            Term::Const(Const::One)
        } else {
            v("ztop")
        }
    };
    let axis = |i: usize| v(&format!("z{i}"));
    let pair = |j: usize| v(&format!("z1{j}"));
    let mut eqs = Vec::new();
    // components inside [bot, top]: bot + s = s and s + top = top
    let mut comps: Vec<Term> = (1..=d).map(axis).collect();
    comps.extend((2..=d).map(pair));
    for c in &comps {
        eqs.push(Equation::new(Term::join(bot(), c.clone()), c.clone()));
        eqs.push(Equation::new(Term::join(c.clone(), top()), top()));
    }
    // top = sum of axes
    let mut total = bot();
    for i in 1..=d {
        total = Term::join(total, axis(i));
    }
    eqs.push(Equation::new(total, top()));
    // independence over bot
    for i in 1..=d {
        let mut rest = bot();
        for j in 1..=d {
            if j != i {
                rest = Term::join(rest, axis(j));
            }
        }
        eqs.push(Equation::new(Term::meet(axis(i), rest), bot()));
    }
    // panel axioms
    for j in 2..=d {
        let panel = Term::join(axis(1), axis(j));
        eqs.push(Equation::new(Term::meet(axis(1), pair(j)), bot()));
        eqs.push(Equation::new(Term::meet(axis(j), pair(j)), bot()));
        eqs.push(Equation::new(Term::join(axis(1), pair(j)), panel.clone()));
        eqs.push(Equation::new(Term::join(axis(j), pair(j)), panel));
    }
    Ok(eqs)
}

/// The named term library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermLibrary {
    pub entries: BTreeMap<String, Term>,
}

impl TermLibrary {
    pub fn standard() -> TermLibrary {
        let mut entries = BTreeMap::new();
        let mut put = |name: &str, t: Term| {
            entries.insert(name.to_string(), t);
        };
        put("cr_zero", v("z1"));
        put("cr_one", v("z12"));
        put("cr_add", add_template());
        put("cr_sub", sub_template());
        put("cr_neg", neg_template());
        put("cr_mul", mul_template());
        put("cr_inverse", inverse_template());
        put("cr_dagger", dagger_template());
        put("cr_kernel", kernel_template());
        put("cr_image", image_template());
        put("cr_image_pinv", image_pinv_template());
        put("cr_pinv", pinv_template());
        put("cr_half", half_template());
        put("sharp", sharp_template());
        put("sharp2", sharp2_template());
        put("force_ring", force_ring_template());
        put("delta_3", delta_term(3).expect("delta_3"));
        TermLibrary { entries }
    }

    pub fn get(&self, name: &str) -> Result<&Term> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::Instance(format!("library term {name:?} missing")))
    }

    /// Substitute argument terms into a library template.
    pub fn instantiate(&self, name: &str, args: &[(&str, Term)]) -> Result<Term> {
        Ok(subst(self.get(name)?, args))
    }

    /// Serialize as named s-expressions.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, t)| (k.clone(), serde_json::Value::String(t.print())))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<TermLibrary> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Instance("library JSON must be an object".into()))?;
        let sig = Signature::ortholattice();
        let mut entries = BTreeMap::new();
        for (k, val) in obj {
            let text = val
                .as_str()
                .ok_or_else(|| Error::Instance("library entries are strings".into()))?;
            entries.insert(k.clone(), parse_term(text, &sig)?);
        }
        Ok(TermLibrary { entries })
    }

    /// Assignment binding the frame component variables of a 3-frame.
    pub fn frame_assignment(frame: &Frame) -> Result<SubAssign> {
        if frame.order != 3 {
            return Err(Error::Precondition("library terms need 3-frames".into()));
        }
        let mut asg = SubAssign::new();
        asg.insert("zbot".into(), frame.bot.clone());
        asg.insert("ztop".into(), frame.top.clone());
        asg.insert("z1".into(), frame.axes[0].clone());
        asg.insert("z2".into(), frame.axes[1].clone());
        asg.insert("z3".into(), frame.axes[2].clone());
        asg.insert("z12".into(), frame.axes1j[0].clone());
        asg.insert("z13".into(), frame.axes1j[1].clone());
        asg.insert("z23".into(), frame.axis_pair(2, 3)?);
        Ok(asg)
    }

    /// Evaluate a library entry on a frame with argument subspaces.
    pub fn eval_on_frame(
        &self,
        name: &str,
        frame: &Frame,
        args: &[(&str, &Subspace)],
    ) -> Result<Subspace> {
        let mut asg = Self::frame_assignment(frame)?;
        for (n, s) in args {
            asg.insert((*n).to_string(), (*s).clone());
        }
        eval_lattice(self.get(name)?, &asg, frame.field, frame.dim)
    }

    /// Oracle validation: every coordinate-ring term must agree exactly
    /// with the semantic operation on random rational matrices over the
    /// standard ON-frames with dim a_1 = 1 and 2, and the discriminator
    /// must classify all subspaces of GF(2)^3. Returns the first failure.
    pub fn validate(&self) -> Result<()> {
        let q = crate::scalar::FieldSpec::rationals();
        let mut rng = ChaCha8Rng::seed_from_u64(0x11b);
        for block in [1usize, 2] {
            let frame = Frame::standard_on(block, q)?;
            for trial in 0..12 {
                let a = Matrix::from_fn(q, block, block, |_, _| q.from_i64(rng.gen_range(-4..=4)));
                let b = Matrix::from_fn(q, block, block, |_, _| q.from_i64(rng.gen_range(-4..=4)));
                let ra = frame.omega(&a)?.sub;
                let rb = frame.omega(&b)?.sub;
                let checks: [(&str, CrOp); 3] = [
                    ("cr_add", CrOp::Add),
                    ("cr_sub", CrOp::Sub),
                    ("cr_mul", CrOp::Mul),
                ];
                for (name, op) in checks {
                    let syntactic = self.eval_on_frame(name, &frame, &[("x", &ra), ("y", &rb)])?;
                    let semantic = cr_op(&frame, op, &[&ra, &rb])?;
                    if syntactic != semantic {
                        return Err(Error::Instance(format!(
                            "library term {name} fails oracle validation (block {block}, trial {trial})"
                        )));
                    }
                }
                for (name, op) in [("cr_dagger", CrOp::Dagger), ("cr_pinv", CrOp::Pinv)] {
                    let syntactic = self.eval_on_frame(name, &frame, &[("x", &ra)])?;
                    let semantic = cr_op(&frame, op, &[&ra])?;
                    if syntactic != semantic {
                        return Err(Error::Instance(format!(
                            "library term {name} fails oracle validation (block {block}, trial {trial})"
                        )));
                    }
                }
                if a.inverse()?.is_some() {
                    let syntactic = self.eval_on_frame("cr_inverse", &frame, &[("x", &ra)])?;
                    let semantic = cr_op(&frame, CrOp::Inverse, &[&ra])?;
                    if syntactic != semantic {
                        return Err(Error::Instance(
                            "library term cr_inverse fails oracle validation".into(),
                        ));
                    }
                }
            }
            // constants
            if self.eval_on_frame("cr_zero", &frame, &[])? != frame.axes[0]
                || self.eval_on_frame("cr_one", &frame, &[])? != frame.axes1j[0]
            {
                return Err(Error::Instance("library constants fail validation".into()));
            }
            // half: omega(1/2)
            let half_mat = Matrix::identity(q, block).scale(&q.parse_scalar("1/2")?);
            if self.eval_on_frame("cr_half", &frame, &[])? != frame.omega(&half_mat)?.sub {
                return Err(Error::Instance(
                    "library term cr_half fails validation".into(),
                ));
            }
        }
        // discriminator over GF(2)^3 against the semantic verdict
        let f2 = crate::scalar::FieldSpec::prime(2)?;
        let frame = Frame::standard(3, 3, f2)?;
        for s in crate::subspace::enumerate_subspaces(f2, 3)? {
            let byterm = self.eval_on_frame("delta_3", &frame, &[("x", &s)])?;
            let semantic = discriminator(&s, &frame)?;
            if byterm != semantic {
                return Err(Error::Instance("delta_3 disagrees with semantics".into()));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Circuits: the retraction chains in basic-equation form
// ---------------------------------------------------------------------------

/// Variable names of the forced frame components produced by
/// [`append_frame_chain`].
#[derive(Debug, Clone)]
pub struct FrameComponents {
    pub bot: String,
    pub top: String,
    pub a1: String,
    pub a2: String,
    pub a3: String,
    pub a12: String,
    pub a13: String,
    pub a23: String,
}

impl FrameComponents {
    /// Environment mapping library frame variables to these components.
    pub fn env(&self) -> HashMap<String, String> {
        let mut env = HashMap::new();
        env.insert("zbot".into(), self.bot.clone());
        env.insert("ztop".into(), self.top.clone());
        env.insert("z1".into(), self.a1.clone());
        env.insert("z2".into(), self.a2.clone());
        env.insert("z3".into(), self.a3.clone());
        env.insert("z12".into(), self.a12.clone());
        env.insert("z13".into(), self.a13.clone());
        env.insert("z23".into(), self.a23.clone());
        env
    }
}

/// Append the ON-3-frame retraction chain to a circuit: from the raw
/// variables `z = (zbot, ztop, z1, z2, z3, z12, z13)` build component
/// variables of an ON-3-frame, mirroring [`crate::frame::orthogonalize`].
/// Identity on ON-frame inputs.
pub fn append_frame_chain(b: &mut CircuitBuilder, z: &[String; 7]) -> FrameComponents {
    let (z1, z2, z3, z12, z13) = (
        z[2].clone(),
        z[3].clone(),
        z[4].clone(),
        z[5].clone(),
        z[6].clone(),
    );
    // independence: u = meet of pairwise sums, then cut inside u-perp
    let s12 = b.join(&z1, &z2);
    let s13 = b.join(&z1, &z3);
    let s23 = b.join(&z2, &z3);
    let u0 = b.meet(&s12, &s13);
    let u = b.meet(&u0, &s23);
    let uperp = b.oc(&u);
    let mut mk = |b: &mut CircuitBuilder, zi: &str| {
        let up = b.join(&u, zi);
        b.meet(&up, &uperp)
    };
    let a1 = mk(b, &z1);
    let a2 = mk(b, &z2);
    let a3 = mk(b, &z3);
    // lattice Gram-Schmidt
    let c1 = a1;
    let t12 = b.join(&c1, &a2);
    let c1p = b.oc(&c1);
    let c2 = b.meet(&t12, &c1p);
    let t123 = b.join(&t12, &a3);
    let t12b = b.join(&c1, &c2);
    let t12perp = b.oc(&t12b);
    let c3 = b.meet(&t123, &t12perp);
    // panel forcing
    let (a1_3, a2_3, a12_3) = append_force_panel(b, &c1, &c2, &z12);
    let (a1_4, a3_4, a13_4) = append_force_panel(b, &a1_3, &c3, &z13);
    let j = b.join(&a1_4, &a12_3);
    let a2_5 = b.meet(&j, &a2_3);
    let j2 = b.join(&a1_4, &a2_5);
    let a12_5 = b.meet(&a12_3, &j2);
    // ON step over the orthogonal frame (a1_4, a2_5, a3_4, a12_5, a13_4)
    let pre_top = {
        let t = b.join(&a1_4, &a2_5);
        b.join(&t, &a3_4)
    };
    let pre = FrameComponents {
        bot: b.constant(Const::Zero),
        top: pre_top,
        a1: a1_4.clone(),
        a2: a2_5.clone(),
        a3: a3_4.clone(),
        a12: a12_5.clone(),
        a13: a13_4.clone(),
        a23: derive_a23(b, &a2_5, &a3_4, &a12_5, &a13_4),
    };
    let lib = TermLibrary::standard();
    let mut env = pre.env();
    env.insert("x".into(), pre.a1.clone());
    env.insert("y".into(), pre.a12.clone());
    // neg_id = a1 (-) a12: the sub template with x = a1, y = a12
    let negid = b.inline_term(lib.get("cr_sub").expect("cr_sub"), &env);
    let a12perp = b.oc(&pre.a12);
    let locus = b.meet(&a12perp, &negid);
    let lifted = b.join(&locus, &pre.a2);
    let b1 = b.meet(&lifted, &pre.a1);
    // orthogonal frame reduction along b1
    let r12 = b.join(&b1, &pre.a12);
    let t2 = b.meet(&r12, &pre.a2);
    let r13 = b.join(&b1, &pre.a13);
    let t3 = b.meet(&r13, &pre.a3);
    let p12 = b.join(&b1, &t2);
    let t12f = b.meet(&p12, &pre.a12);
    let p13 = b.join(&b1, &t3);
    let t13f = b.meet(&p13, &pre.a13);
    let tt = b.join(&b1, &t2);
    let top = b.join(&tt, &t3);
    let a23 = derive_a23(b, &t2, &t3, &t12f, &t13f);
    FrameComponents {
        bot: b.constant(Const::Zero),
        top,
        a1: b1,
        a2: t2,
        a3: t3,
        a12: t12f,
        a13: t13f,
        a23,
    }
}

fn derive_a23(b: &mut CircuitBuilder, a2: &str, a3: &str, a12: &str, a13: &str) -> String {
    let s = b.join(a2, a3);
    let c = b.join(a12, a13);
    b.meet(&s, &c)
}

/// Panel forcing in circuit form, mirroring the semantic `force_panel`.
fn append_force_panel(
    b: &mut CircuitBuilder,
    x: &str,
    y: &str,
    cand: &str,
) -> (String, String, String) {
    let sum = b.join(x, y);
    let m = b.meet(cand, &sum);
    let dx = b.meet(x, &m);
    let dy = b.meet(y, &m);
    let ym = b.join(y, &m);
    let xm = b.join(x, &m);
    let cx = b.meet(x, &ym);
    let cy = b.meet(y, &xm);
    let dxp = b.oc(&dx);
    let dyp = b.oc(&dy);
    let nx = b.meet(&cx, &dxp);
    let ny = b.meet(&cy, &dyp);
    let nsum = b.join(&nx, &ny);
    let nm = b.meet(&nsum, &m);
    (nx, ny, nm)
}

/// Append the coordinate-ring element forcing r(x, a) to a circuit.
pub fn append_force_ring(b: &mut CircuitBuilder, x: &str, comps: &FrameComponents) -> String {
    let lib = TermLibrary::standard();
    let mut env = comps.env();
    env.insert("x".into(), x.to_string());
    b.inline_term(lib.get("force_ring").expect("force_ring"), &env)
}

/// Append a coordinate-ring operation template to a circuit.
pub fn append_cr_op(
    b: &mut CircuitBuilder,
    lib: &TermLibrary,
    op: Op,
    args: &[String],
    comps: &FrameComponents,
) -> Result<String> {
    let mut env = comps.env();
    let name = match op {
        Op::RAdd => {
            env.insert("x".into(), args[0].clone());
            env.insert("y".into(), args[1].clone());
            "cr_add"
        }
        Op::RSub => {
            env.insert("x".into(), args[0].clone());
            env.insert("y".into(), args[1].clone());
            "cr_sub"
        }
        Op::RMul => {
            env.insert("x".into(), args[0].clone());
            env.insert("y".into(), args[1].clone());
            "cr_mul"
        }
        Op::Adj => {
            env.insert("x".into(), args[0].clone());
            "cr_dagger"
        }
        Op::Pinv => {
            env.insert("x".into(), args[0].clone());
            "cr_pinv"
        }
        other => {
            return Err(Error::Signature(format!(
                "{} is not a coordinate ring operation",
                other.symbol()
            )))
        }
    };
    Ok(b.inline_term(lib.get(name)?, &env))
}

/// Compile a ring (or *-ring) term into a lattice (or ortholattice) term
/// over the same variables plus the frame variables z1..z23, such that for
/// every frame a and coordinate ring elements r the compiled term evaluates
/// to p computed in R(a). Plain ring operations yield oc-free terms (valid
/// in any L(F^d)); adj/pinv need the ortholattice signature and an ON-frame.
pub fn ring_term_to_lattice_term(p: &Term, lib: &TermLibrary) -> Result<Term> {
    for var in p.variables() {
        if FRAME_VARS.contains(&var.as_str()) || var == "x" || var == "y" || var == "w" {
            return Err(Error::Instance(format!(
                "ring variable {var:?} collides with a library variable"
            )));
        }
    }
    compile_ring(p, lib)
}

fn compile_ring(p: &Term, lib: &TermLibrary) -> Result<Term> {
    Ok(match p {
        Term::Var(name) => Term::var(name.clone()),
        Term::Const(Const::RZero) => lib.get("cr_zero")?.clone(),
        Term::Const(Const::ROne) => lib.get("cr_one")?.clone(),
        Term::Const(c) => return Err(Error::Signature(format!("{} in ring term", c.symbol()))),
        Term::App(op, args) => {
            let compiled: Vec<Term> = args
                .iter()
                .map(|a| compile_ring(a, lib))
                .collect::<Result<_>>()?;
            let name = match op {
                Op::RAdd => "cr_add",
                Op::RSub => "cr_sub",
                Op::RMul => "cr_mul",
                Op::Adj => "cr_dagger",
                Op::Pinv => "cr_pinv",
                other => {
                    return Err(Error::Signature(format!("{} in ring term", other.symbol())))
                }
            };
            match compiled.len() {
                1 => lib.instantiate(name, &[("x", compiled[0].clone())])?,
                _ => lib.instantiate(
                    name,
                    &[("x", compiled[0].clone()), ("y", compiled[1].clone())],
                )?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{force_ring_element, orthogonalize};
    use crate::scalar::FieldSpec;
    use crate::term::occurrences;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    #[test]
    fn standard_library_validates() {
        TermLibrary::standard().validate().unwrap();
    }

    #[test]
    fn corrupted_library_fails_validation() {
        let mut lib = TermLibrary::standard();
        // swap meet for join at the top of the multiplication template
        let bad = Term::join(
            Term::join(
                Term::meet(Term::join(v("y"), v("z23")), Term::join(v("z1"), v("z3"))),
                Term::meet(Term::join(v("x"), v("z13")), Term::join(v("z2"), v("z3"))),
            ),
            Term::join(v("z1"), v("z2")),
        );
        lib.entries.insert("cr_mul".into(), bad);
        assert!(lib.validate().is_err());
    }

    #[test]
    fn ring_op_templates_have_single_occurrences() {
        let lib = TermLibrary::standard();
        for name in ["cr_add", "cr_sub", "cr_mul"] {
            let t = lib.get(name).unwrap();
            assert_eq!(occurrences(t, &["x".into()]), 1, "{name} x");
            assert_eq!(occurrences(t, &["y".into()]), 1, "{name} y");
        }
        for name in ["cr_neg", "cr_inverse", "cr_dagger"] {
            let t = lib.get(name).unwrap();
            assert_eq!(occurrences(t, &["x".into()]), 1, "{name} x");
        }
    }

    #[test]
    fn library_json_roundtrip() {
        let lib = TermLibrary::standard();
        let j = lib.to_json();
        let back = TermLibrary::from_json(&j).unwrap();
        assert_eq!(lib, back);
    }

    #[test]
    fn ring_term_compiler_matches_matrix_oracle() {
        use rand::Rng;
        let lib = TermLibrary::standard();
        let sig = Signature::ring();
        // p = a*b - b*a on commuting matrices evaluates to the ring zero a_1
        let p = parse_term("(r- (r* a b) (r* b a))", &sig).unwrap();
        let t = ring_term_to_lattice_term(&p, &lib).unwrap();
        let frame = Frame::standard_on(2, q()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let m = Matrix::from_fn(q(), 2, 2, |_, _| q().from_i64(rng.gen_range(-3..=3)));
            // b = a polynomial in a commutes with a
            let mb = m.mul(&m).unwrap().add(&m).unwrap();
            let ra = frame.omega(&m).unwrap().sub;
            let rb = frame.omega(&mb).unwrap().sub;
            let mut asg = TermLibrary::frame_assignment(&frame).unwrap();
            asg.insert("a".into(), ra);
            asg.insert("b".into(), rb);
            let out = eval_lattice(&t, &asg, q(), 6).unwrap();
            assert_eq!(out, frame.axes[0]);
        }
        // general polynomial p(a, b) through omega
        let p = parse_term("(r+ (r* a a) (r- b r1))", &sig).unwrap();
        let t = ring_term_to_lattice_term(&p, &lib).unwrap();
        for _ in 0..10 {
            let ma = Matrix::from_fn(q(), 2, 2, |_, _| q().from_i64(rng.gen_range(-3..=3)));
            let mb = Matrix::from_fn(q(), 2, 2, |_, _| q().from_i64(rng.gen_range(-3..=3)));
            let expected = ma
                .mul(&ma)
                .unwrap()
                .add(&mb.sub(&Matrix::identity(q(), 2)).unwrap())
                .unwrap();
            let mut asg = TermLibrary::frame_assignment(&frame).unwrap();
            asg.insert("a".into(), frame.omega(&ma).unwrap().sub);
            asg.insert("b".into(), frame.omega(&mb).unwrap().sub);
            let out = eval_lattice(&t, &asg, q(), 6).unwrap();
            assert_eq!(out, frame.omega(&expected).unwrap().sub);
        }
    }

    #[test]
    fn plain_ring_ops_compile_oc_free() {
        let lib = TermLibrary::standard();
        let sig = Signature::ring();
        let p = parse_term("(r+ (r* a b) (r- r0 r1))", &sig).unwrap();
        let t = ring_term_to_lattice_term(&p, &lib).unwrap();
        t.check_signature(&Signature::lattice(false)).unwrap();
    }

    #[test]
    fn delta_term_small_orders() {
        // d = 1 over L(GF(2)^1)
        let f2 = FieldSpec::prime(2).unwrap();
        let frame1 = Frame::standard(1, 1, f2).unwrap();
        let d1 = delta_term(1).unwrap();
        let mut asg = SubAssign::new();
        asg.insert("zbot".into(), frame1.bot.clone());
        asg.insert("z1".into(), frame1.axes[0].clone());
        asg.insert("x".into(), Subspace::full(f2, 1));
        assert!(eval_lattice(&d1, &asg, f2, 1).unwrap().is_full());
        asg.insert("x".into(), Subspace::zero(f2, 1));
        assert!(eval_lattice(&d1, &asg, f2, 1).unwrap().is_zero());

        // d = 2 over GF(3)^2
        let f3 = FieldSpec::prime(3).unwrap();
        let frame2 = Frame::standard(2, 2, f3).unwrap();
        let d2 = delta_term(2).unwrap();
        for s in crate::subspace::enumerate_subspaces(f3, 2).unwrap() {
            let mut asg = SubAssign::new();
            asg.insert("zbot".into(), frame2.bot.clone());
            asg.insert("z1".into(), frame2.axes[0].clone());
            asg.insert("z2".into(), frame2.axes[1].clone());
            asg.insert("z12".into(), frame2.axes1j[0].clone());
            asg.insert("x".into(), s.clone());
            let out = eval_lattice(&d2, &asg, f3, 2).unwrap();
            assert_eq!(out.is_full(), !s.is_zero());
            assert_eq!(out.is_zero(), s.is_zero());
        }
    }

    #[test]
    fn frame_chain_circuit_matches_semantics() {
        let zvars: [String; 7] = [
            "zbot".into(),
            "ztop".into(),
            "z1".into(),
            "z2".into(),
            "z3".into(),
            "z12".into(),
            "z13".into(),
        ];
        let mut b = CircuitBuilder::new(Signature::ortholattice(), zvars.to_vec(), "_f");
        let comps = append_frame_chain(&mut b, &zvars);
        let circuit_eqs = b.equations.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for dim in [3usize, 6] {
            for _ in 0..15 {
                let tup: [Subspace; 7] =
                    std::array::from_fn(|_| Subspace::random(&mut rng, q(), dim, 2));
                let semantic = orthogonalize(&tup).unwrap();
                let mut env = SubAssign::new();
                for (name, val) in zvars.iter().zip(tup.iter()) {
                    env.insert(name.clone(), val.clone());
                }
                let sys = crate::normal::BasicSystem {
                    sig: Signature::ortholattice(),
                    inputs: zvars.to_vec(),
                    equations: circuit_eqs.clone(),
                };
                let full = crate::eval::propagate_basic_system_lattice(&sys, &env, q(), dim)
                    .unwrap()
                    .unwrap();
                assert_eq!(full[&comps.a1], semantic.axes[0]);
                assert_eq!(full[&comps.a2], semantic.axes[1]);
                assert_eq!(full[&comps.a3], semantic.axes[2]);
                assert_eq!(full[&comps.a12], semantic.axes1j[0]);
                assert_eq!(full[&comps.a13], semantic.axes1j[1]);
                assert_eq!(full[&comps.top], semantic.top);
            }
        }
    }

    #[test]
    fn force_ring_template_matches_semantics() {
        let frame = Frame::standard_on(2, q()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let lib = TermLibrary::standard();
        for _ in 0..15 {
            let x = Subspace::random(&mut rng, q(), 6, 3);
            let semantic = force_ring_element(&x, &frame).unwrap().sub;
            let byterm = lib.eval_on_frame("force_ring", &frame, &[("x", &x)]).unwrap();
            assert_eq!(byterm, semantic);
        }
    }

    #[test]
    fn frame_axiom_equations_hold_on_standard_frame() {
        let f2 = FieldSpec::prime(2).unwrap();
        let frame = Frame::standard(3, 3, f2).unwrap();
        let eqs = frame_axiom_equations(3, true).unwrap();
        let mut asg = SubAssign::new();
        asg.insert("z1".into(), frame.axes[0].clone());
        asg.insert("z2".into(), frame.axes[1].clone());
        asg.insert("z3".into(), frame.axes[2].clone());
        asg.insert("z12".into(), frame.axes1j[0].clone());
        asg.insert("z13".into(), frame.axes1j[1].clone());
        for eq in &eqs {
            let l = eval_lattice(&eq.lhs, &asg, f2, 3).unwrap();
            let r = eval_lattice(&eq.rhs, &asg, f2, 3).unwrap();
            assert_eq!(l, r, "axiom {} fails", eq.print());
        }
    }
}
