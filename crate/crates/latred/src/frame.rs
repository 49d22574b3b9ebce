//! Von Neumann frames in L(F^d), their coordinate rings, and the semantic
//! side of the coordinatization toolkit: the ring isomorphism omega between
//! End(a_1) and R(a), perspectivities, relative complements, the
//! discriminator, and the retraction chains onto ON-3-frames, coordinate
//! ring elements, and commuting self-adjoint families.
//!
//! Everything here computes directly with canonical subspaces; the
//! syntactic (lattice-term) counterparts live in [`crate::library`] and are
//! tested against these functions.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::FieldSpec;
use crate::subspace::Subspace;
use std::sync::{Arc, OnceLock};

/// A d-frame candidate: bot, top, axes a_1..a_d and the (1,j)-axes a_{1j}
/// for 1 < j <= d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub field: FieldSpec,
    pub dim: usize,
    pub order: usize,
    pub bot: Subspace,
    pub top: Subspace,
    pub axes: Vec<Subspace>,
    /// a_{1j} for j = 2..=order (so axes1j[0] is a_{12}).
    pub axes1j: Vec<Subspace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameClass {
    Spanning,
    Trivial,
    Invalid,
}

impl Frame {
    pub fn axis(&self, i: usize) -> &Subspace {
        &self.axes[i - 1]
    }

    /// a_{ij} for i != j, both in 1..=order: given for i = 1 or j = 1,
    /// derived as (a_i + a_j) meet (a_{1i} + a_{1j}) otherwise.
    pub fn axis_pair(&self, i: usize, j: usize) -> Result<Subspace> {
        if i == j || i == 0 || j == 0 || i > self.order || j > self.order {
            return Err(Error::Precondition(format!("axis pair ({i},{j})")));
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if lo == 1 {
            return Ok(self.axes1j[hi - 2].clone());
        }
        let sum = self.axis(lo).sum(self.axis(hi))?;
        let cross = self.axes1j[lo - 2].sum(&self.axes1j[hi - 2])?;
        sum.meet(&cross)
    }

    /// The standard frame: a_i = e_i F, a_{1j} = (e_1 - e_j) F, embedded in
    /// the first `order` coordinates of F^dim.
    pub fn standard(order: usize, dim: usize, field: FieldSpec) -> Result<Frame> {
        if order < 1 {
            return Err(Error::Precondition("frame order must be >= 1".into()));
        }
        if dim < order {
            return Err(Error::Precondition(format!(
                "ambient dimension {dim} below frame order {order}"
            )));
        }
        let unit = |i: usize| {
            let mut v = vec![0i64; dim];
            v[i] = 1;
            v
        };
        let axes: Vec<Subspace> = (0..order).map(|i| Subspace::line(field, &unit(i))).collect();
        let axes1j: Vec<Subspace> = (1..order)
            .map(|j| {
                let mut v = vec![0i64; dim];
                v[0] = 1;
                v[j] = -1;
                Subspace::line(field, &v)
            })
            .collect();
        let mut top = Subspace::zero(field, dim);
        for a in &axes {
            top = top.sum(a)?;
        }
        Ok(Frame {
            field,
            dim,
            order,
            bot: Subspace::zero(field, dim),
            top,
            axes,
            axes1j,
        })
    }

    /// Standard ON-3-frame with dim a_1 = block: a_i the i-th block of
    /// coordinates in F^(3*block), a_{1j} spanned by e_k - e_{(j-1)block+k}.
    pub fn standard_on(block: usize, field: FieldSpec) -> Result<Frame> {
        let dim = 3 * block;
        let axis = |b: usize| {
            let vs: Vec<Vec<i64>> = (0..block)
                .map(|k| {
                    let mut v = vec![0i64; dim];
                    v[b * block + k] = 1;
                    v
                })
                .collect();
            Subspace::span_i64(field, dim, &vs)
        };
        let pair = |b: usize| {
            let vs: Vec<Vec<i64>> = (0..block)
                .map(|k| {
                    let mut v = vec![0i64; dim];
                    v[k] = 1;
                    v[b * block + k] = -1;
                    v
                })
                .collect();
            Subspace::span_i64(field, dim, &vs)
        };
        Ok(Frame {
            field,
            dim,
            order: 3,
            bot: Subspace::zero(field, dim),
            top: Subspace::full(field, dim),
            axes: vec![axis(0), axis(1), axis(2)],
            axes1j: vec![pair(1), pair(2)],
        })
    }

    /// Check the frame axioms exactly and classify.
    pub fn classify(&self) -> FrameClass {
        match self.check_axioms() {
            Ok(true) => {
                if self.bot == self.top {
                    FrameClass::Trivial
                } else {
                    FrameClass::Spanning
                }
            }
            _ => FrameClass::Invalid,
        }
    }

    fn check_axioms(&self) -> Result<bool> {
        if self.axes.len() != self.order || self.axes1j.len() != self.order.saturating_sub(1) {
            return Ok(false);
        }
        if !self.bot.leq(&self.top)? {
            return Ok(false);
        }
        for s in self.axes.iter().chain(self.axes1j.iter()) {
            if !(self.bot.leq(s)? && s.leq(&self.top)?) {
                return Ok(false);
            }
        }
        // top = a_1 + ... + a_d, independently over bot
        let mut total = self.bot.clone();
        for a in &self.axes {
            total = total.sum(a)?;
        }
        if total != self.top {
            return Ok(false);
        }
        for i in 0..self.order {
            let mut rest = self.bot.clone();
            for (j, a) in self.axes.iter().enumerate() {
                if j != i {
                    rest = rest.sum(a)?;
                }
            }
            if self.axes[i].meet(&rest)? != self.bot {
                return Ok(false);
            }
        }
        // a_1 (+) a_{1j} = a_j (+) a_{1j} = a_1 + a_j
        for j in 2..=self.order {
            let a1 = self.axis(1);
            let aj = self.axis(j);
            let a1j = &self.axes1j[j - 2];
            let panel = a1.sum(aj)?;
            if a1.meet(a1j)? != self.bot
                || aj.meet(a1j)? != self.bot
                || a1.sum(a1j)? != panel
                || aj.sum(a1j)? != panel
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_trivial(&self) -> bool {
        self.bot == self.top
    }

    /// Frame reduction: from bot <= b1 <= a_1 build the frame with
    /// b_j = (b_1 + a_{1j}) meet a_j and b_{1j} = (b_1 + b_j) meet a_{1j}.
    /// Identity when b1 = a_1.
    pub fn reduce(&self, b1: &Subspace) -> Result<Frame> {
        if !(self.bot.leq(b1)? && b1.leq(self.axis(1))?) {
            return Err(Error::Precondition(
                "frame reduction needs bot <= b1 <= a_1".into(),
            ));
        }
        let mut axes = vec![b1.clone()];
        let mut axes1j = Vec::new();
        for j in 2..=self.order {
            let bj = b1.sum(&self.axes1j[j - 2])?.meet(self.axis(j))?;
            let b1j = b1.sum(&bj)?.meet(&self.axes1j[j - 2])?;
            axes.push(bj);
            axes1j.push(b1j);
        }
        let mut top = self.bot.clone();
        for a in &axes {
            top = top.sum(a)?;
        }
        Ok(Frame {
            field: self.field,
            dim: self.dim,
            order: self.order,
            bot: self.bot.clone(),
            top,
            axes,
            axes1j,
        })
    }

    /// Perspectivity pi_ijk(x) = (x + a_{jk}) meet (a_i + a_k), the
    /// isomorphism [0, a_i + a_j] -> [0, a_i + a_k] along the frame.
    pub fn perspectivity(&self, x: &Subspace, i: usize, j: usize, k: usize) -> Result<Subspace> {
        if i == j || j == k || i == k {
            return Err(Error::Precondition(
                "perspectivity indices must be distinct".into(),
            ));
        }
        let ajk = self.axis_pair(j, k)?;
        x.sum(&ajk)?.meet(&self.axis(i).sum(self.axis(k))?)
    }

    /// s(x) = pi_231 pi_312 pi_123 (x); on omega(f) with f invertible this
    /// is omega(f^-1).
    pub fn s_term(&self, x: &Subspace) -> Result<Subspace> {
        let y = self.perspectivity(x, 1, 2, 3)?;
        let y = self.perspectivity(&y, 3, 1, 2)?;
        self.perspectivity(&y, 2, 3, 1)
    }

    /// The linear isomorphism eps: a_1 -> a_2 with a_{12} = {v - eps v},
    /// as a matrix from canonical a_1 coordinates to canonical a_2
    /// coordinates.
    pub fn eps_matrix(&self) -> Result<Matrix> {
        let b1 = &self.axis(1).basis;
        let b2 = &self.axis(2).basis;
        let b12 = &self.axes1j[0].basis;
        let m = b1.cols;
        if b2.cols != m || b12.cols != m {
            return Err(Error::Frame("axis dimensions differ".into()));
        }
        // v in a_1 decomposes uniquely as (v - eps v) + eps v over
        // a_{12} (+) a_2; solve [B12 | B2] (alpha; beta) = v.
        let lhs = b12.hstack(b2)?;
        let sol = lhs
            .solve(b1)?
            .ok_or_else(|| Error::Frame("a_1 not inside a_{12} + a_2".into()))?;
        Ok(sol.submatrix(m..2 * m, 0..m))
    }

    /// Size of the coordinate ring matrices: dim a_1.
    pub fn ring_dim(&self) -> usize {
        self.axis(1).rank()
    }

    /// omega: End(a_1) -> R(a), f |-> {v - eps f v | v in a_1}.
    pub fn omega(&self, fmat: &Matrix) -> Result<RingElement> {
        if self.is_trivial() {
            return Err(Error::Frame(
                "omega undefined on a trivial frame (zero ring)".into(),
            ));
        }
        let m = self.ring_dim();
        if fmat.rows != m || fmat.cols != m {
            return Err(Error::Dim(format!("omega expects a {m}x{m} matrix")));
        }
        let b1 = &self.axis(1).basis;
        let b2 = &self.axis(2).basis;
        let eps = self.eps_matrix()?;
        let cols = b1.sub(&b2.mul(&eps.mul(fmat)?)?)?;
        Ok(RingElement::new_unchecked(
            Arc::new(self.clone()),
            Subspace::from_columns(&cols),
        ))
    }

    /// omega^-1: recover the matrix of f from r = omega(f).
    pub fn omega_inv(&self, r: &Subspace) -> Result<Matrix> {
        if self.is_trivial() {
            return Err(Error::Frame("omega_inv undefined on a trivial frame".into()));
        }
        let m = self.ring_dim();
        let b1 = &self.axis(1).basis;
        let b2 = &self.axis(2).basis;
        if r.rank() != m {
            return Err(Error::Frame("not a coordinate ring element (rank)".into()));
        }
        // B1 e_i = x + eps f(v_i) with x in r; solve [R | B2](alpha; beta) = B1.
        let lhs = r.basis.hstack(b2)?;
        let sol = lhs
            .solve(b1)?
            .ok_or_else(|| Error::Frame("not a coordinate ring element (span)".into()))?;
        let beta = sol.submatrix(r.rank()..r.rank() + m, 0..m);
        let eps = self.eps_matrix()?;
        let eps_inv = eps
            .inverse()?
            .ok_or_else(|| Error::Frame("frame eps not invertible".into()))?;
        eps_inv.mul(&beta)
    }

    /// Gram matrix of the canonical a_1 basis (characteristic 0).
    fn gram_a1(&self) -> Result<Matrix> {
        let b1 = &self.axis(1).basis;
        b1.transpose().mul(b1)
    }

    /// Adjoint of f within the Hilbert space a_1: G^-1 f^t G.
    pub fn adjoint_matrix(&self, fmat: &Matrix) -> Result<Matrix> {
        if !self.field.is_rational() {
            return Err(Error::Unsupported("adjoint requires characteristic 0".into()));
        }
        let g = self.gram_a1()?;
        let ginv = g
            .inverse()?
            .ok_or_else(|| Error::Frame("Gram matrix singular".into()))?;
        ginv.mul(&fmat.transpose())?.mul(&g)
    }

    /// Moore-Penrose pseudo-inverse of f within a_1: computed from the
    /// ambient pseudo-inverse of the extension of f by 0 on a_1-perp.
    pub fn pinv_matrix(&self, fmat: &Matrix) -> Result<Matrix> {
        if !self.field.is_rational() {
            return Err(Error::Unsupported(
                "pseudo-inverse requires characteristic 0".into(),
            ));
        }
        let b1 = &self.axis(1).basis;
        let g = self.gram_a1()?;
        let ginv = g
            .inverse()?
            .ok_or_else(|| Error::Frame("Gram matrix singular".into()))?;
        // Ambient map: B1 f G^-1 B1^t is f on a_1 and 0 on a_1-perp.
        let ambient = b1.mul(fmat)?.mul(&ginv)?.mul(&b1.transpose())?;
        let pinv = ambient.pseudoinverse()?;
        // Its image lies in a_1, so a_1-coordinates are exact.
        ginv.mul(&b1.transpose())?.mul(&pinv.mul(b1)?)
    }
}

/// An element of the coordinate ring R(a) = complements of a_2 in
/// [bot, a_1 + a_2]. Membership is revalidated lazily and cached.
#[derive(Debug, Clone)]
pub struct RingElement {
    pub frame: Arc<Frame>,
    pub sub: Subspace,
    member: Arc<OnceLock<bool>>,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.sub == other.sub && self.frame.as_ref() == other.frame.as_ref()
    }
}
impl Eq for RingElement {}

impl RingElement {
    pub fn new_unchecked(frame: Arc<Frame>, sub: Subspace) -> RingElement {
        RingElement {
            frame,
            sub,
            member: Arc::new(OnceLock::new()),
        }
    }

    /// r (+)_bot a_2 = a_1 + a_2 and r meet a_2 = bot.
    pub fn is_member(&self) -> bool {
        *self.member.get_or_init(|| {
            let f = self.frame.as_ref();
            if f.is_trivial() {
                return self.sub == f.bot;
            }
            let a2 = f.axis(2);
            let panel = match f.axis(1).sum(a2) {
                Ok(p) => p,
                Err(_) => return false,
            };
            matches!(
                (self.sub.sum(a2), self.sub.meet(a2)),
                (Ok(s), Ok(m)) if s == panel && m == f.bot
            )
        })
    }
}

/// Coordinate ring operation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrOp {
    Add,
    Sub,
    Mul,
    Inverse,
    Dagger,
    Pinv,
}

/// Semantic coordinate ring operation, computed through omega and matrix
/// arithmetic. Multiplication follows mul(r, s) = omega(f_r o f_s). On a
/// trivial frame every operation returns bot (the zero ring).
pub fn cr_op(frame: &Frame, kind: CrOp, args: &[&Subspace]) -> Result<Subspace> {
    if frame.is_trivial() {
        return Ok(frame.bot.clone());
    }
    match kind {
        CrOp::Add | CrOp::Sub | CrOp::Mul => {
            if args.len() != 2 {
                return Err(Error::Arity("binary coordinate ring operation".into()));
            }
            let f = frame.omega_inv(args[0])?;
            let g = frame.omega_inv(args[1])?;
            let h = match kind {
                CrOp::Add => f.add(&g)?,
                CrOp::Sub => f.sub(&g)?,
                CrOp::Mul => f.mul(&g)?,
                _ => unreachable!(),
            };
            Ok(frame.omega(&h)?.sub)
        }
        CrOp::Inverse => {
            let f = frame.omega_inv(args[0])?;
            let inv = f.inverse()?.ok_or_else(|| {
                Error::Precondition("inverse of a non-invertible coordinate ring element".into())
            })?;
            Ok(frame.omega(&inv)?.sub)
        }
        CrOp::Dagger => {
            let f = frame.omega_inv(args[0])?;
            Ok(frame.omega(&frame.adjoint_matrix(&f)?)?.sub)
        }
        CrOp::Pinv => {
            let f = frame.omega_inv(args[0])?;
            Ok(frame.omega(&frame.pinv_matrix(&f)?)?.sub)
        }
    }
}

/// Relative orthocomplement #(x, y, z) = x + y meet z-perp.
pub fn sharp(x: &Subspace, y: &Subspace, z: &Subspace) -> Result<Subspace> {
    x.sum(&y.meet(&z.ortho()?)?)
}

/// #''(a, b, c) = #(c meet (a meet c)-perp, b, a + c): for a, c <= b a
/// complement of a in [0, b]; equal to c when b = c (+) a.
pub fn sharp2(a: &Subspace, b: &Subspace, c: &Subspace) -> Result<Subspace> {
    if !(a.leq(b)? && c.leq(b)?) {
        return Err(Error::Precondition("sharp2 needs a, c <= b".into()));
    }
    let c1 = c.meet(&a.meet(c)?.ortho()?)?;
    sharp(&c1, b, &a.sum(c)?)
}

/// Semantic discriminator: h_i(x) = (x + bot + sum_{j!=i} a_j) meet a_i,
/// spread_i(w) = w + sum_{j!=i} (w + a_{ij}) meet a_j, and
/// delta(x) = bot + sum_i spread_i(h_i(x)). On a spanning frame of a
/// height-d lattice this is top for x != bot and bot for x = bot.
pub fn discriminator(b: &Subspace, frame: &Frame) -> Result<Subspace> {
    let mut acc = frame.bot.clone();
    for i in 1..=frame.order {
        let mut rest = frame.bot.clone();
        for j in 1..=frame.order {
            if j != i {
                rest = rest.sum(frame.axis(j))?;
            }
        }
        let h = b.sum(&rest)?.meet(frame.axis(i))?;
        let mut spread = h.clone();
        for j in 1..=frame.order {
            if j != i {
                let aij = frame.axis_pair(i, j)?;
                spread = spread.sum(&h.sum(&aij)?.meet(frame.axis(j))?)?;
            }
        }
        acc = acc.sum(&spread)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Retraction chains
// ---------------------------------------------------------------------------

/// Lattice Gram-Schmidt on an independent triple: pairwise orthogonal,
/// identity when already orthogonal.
fn gram_schmidt_triple(
    b1: &Subspace,
    b2: &Subspace,
    b3: &Subspace,
) -> Result<(Subspace, Subspace, Subspace)> {
    let c1 = b1.clone();
    let s12 = b1.sum(b2)?;
    let c2 = s12.meet(&c1.ortho()?)?;
    let c3 = s12.sum(b3)?.meet(&s12.ortho()?)?;
    Ok((c1, c2, c3))
}

/// Force a candidate pair axis: from an orthogonal independent pair (x, y)
/// and a candidate m, cut x and y down so that the projected candidate
/// becomes a common complement of both in their sum. Identity when it
/// already is one.
fn force_panel(
    x: &Subspace,
    y: &Subspace,
    cand: &Subspace,
) -> Result<(Subspace, Subspace, Subspace)> {
    let m = cand.meet(&x.sum(y)?)?;
    let dx = x.meet(&m)?;
    let dy = y.meet(&m)?;
    let cx = x.meet(&y.sum(&m)?)?;
    let cy = y.meet(&x.sum(&m)?)?;
    let nx = cx.meet(&dx.ortho()?)?;
    let ny = cy.meet(&dy.ortho()?)?;
    let nm = nx.sum(&ny)?.meet(&m)?;
    Ok((nx, ny, nm))
}

/// Orthogonalization chain: any 7-tuple (zbot, ztop, z1, z2, z3, z12, z13)
/// of subspaces yields an orthogonal 3-frame with bot = 0 (top possibly
/// below 1, possibly trivial). Restricted to orthogonal 3-frames it is the
/// identity. The input bounds components are ignored; the output bounds are
/// rebuilt.
pub fn orthogonalize_to_orthogonal(z: &[Subspace; 7]) -> Result<Frame> {
    let field = z[2].field;
    let dim = z[2].dim;
    let (z1, z2, z3, z12, z13) = (&z[2], &z[3], &z[4], &z[5], &z[6]);
    // u = meet of pairwise sums; killing it makes the axes independent.
    let u = z1.sum(z2)?.meet(&z1.sum(z3)?)?.meet(&z2.sum(z3)?)?;
    let uperp = u.ortho()?;
    let a1 = u.sum(z1)?.meet(&uperp)?;
    let a2 = u.sum(z2)?.meet(&uperp)?;
    let a3 = u.sum(z3)?.meet(&uperp)?;
    let (c1, c2, c3) = gram_schmidt_triple(&a1, &a2, &a3)?;
    // Force the (1,2) panel, then the (1,3) panel, then pull the (1,2)
    // panel down to the possibly smaller a_1.
    let (a1_3, a2_3, a12_3) = force_panel(&c1, &c2, z12)?;
    let (a1_4, a3_4, a13_4) = force_panel(&a1_3, &c3, z13)?;
    let a2_5 = a1_4.sum(&a12_3)?.meet(&a2_3)?;
    let a12_5 = a12_3.meet(&a1_4.sum(&a2_5)?)?;
    let top = a1_4.sum(&a2_5)?.sum(&a3_4)?;
    Ok(Frame {
        field,
        dim,
        order: 3,
        bot: Subspace::zero(field, dim),
        top,
        axes: vec![a1_4, a2_5, a3_4],
        axes1j: vec![a12_5, a13_4],
    })
}

/// omega(-id) computed matrix-free of the ring ops: {v + eps v | v in a_1}.
fn omega_neg_id(frame: &Frame) -> Result<Subspace> {
    let b1 = &frame.axis(1).basis;
    let b2 = &frame.axis(2).basis;
    let eps = frame.eps_matrix()?;
    Ok(Subspace::from_columns(&b1.add(&b2.mul(&eps)?)?))
}

/// ON step: reduce an orthogonal 3-frame along the locus where eps is an
/// isometry, b_1 = (a_12-perp meet omega(-id) + a_2) meet a_1. The result
/// satisfies the isometry criterion; ON inputs are fixed.
pub fn on_step(frame: &Frame) -> Result<Frame> {
    if frame.axes.iter().all(Subspace::is_zero) {
        return Ok(frame.clone());
    }
    let neg = omega_neg_id(frame)?;
    let a12perp = frame.axes1j[0].ortho()?;
    let b1 = a12perp
        .meet(&neg)?
        .sum(frame.axis(2))?
        .meet(frame.axis(1))?;
    frame.reduce(&b1)
}

/// Full retraction onto ON-3-frames: orthogonalize, then the ON step.
pub fn orthogonalize(z: &[Subspace; 7]) -> Result<Frame> {
    let ortho = orthogonalize_to_orthogonal(z)?;
    on_step(&ortho)
}

/// Frame as the 7-tuple (bot, top, a1, a2, a3, a12, a13).
pub fn frame_tuple(f: &Frame) -> Result<[Subspace; 7]> {
    if f.order != 3 {
        return Err(Error::Precondition("7-tuple form needs a 3-frame".into()));
    }
    Ok([
        f.bot.clone(),
        f.top.clone(),
        f.axes[0].clone(),
        f.axes[1].clone(),
        f.axes[2].clone(),
        f.axes1j[0].clone(),
        f.axes1j[1].clone(),
    ])
}

/// Orthogonal 3-frame checks: valid frame, pairwise orthogonal axes, bot = 0.
pub fn is_orthogonal_frame(f: &Frame) -> Result<bool> {
    if f.order != 3 || !f.bot.is_zero() {
        return Ok(false);
    }
    if f.classify() == FrameClass::Invalid {
        return Ok(false);
    }
    for i in 1..=3 {
        for j in (i + 1)..=3 {
            if !f.axis(i).leq(&f.axis(j).ortho()?)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The isometry criterion (*): a_12-perp meet (a_1 + a_2) = a_1 (-) a_12.
pub fn satisfies_isometry_criterion(f: &Frame) -> Result<bool> {
    if f.is_trivial() {
        return Ok(true);
    }
    let lhs = f.axes1j[0].ortho()?.meet(&f.axis(1).sum(f.axis(2))?)?;
    let rhs = cr_op(f, CrOp::Sub, &[f.axis(1), &f.axes1j[0]])?;
    Ok(lhs == rhs)
}

/// ON-3-frame: orthogonal plus the isometry criterion.
pub fn is_on_frame(f: &Frame) -> Result<bool> {
    Ok(is_orthogonal_frame(f)? && satisfies_isometry_criterion(f)?)
}

/// Force an arbitrary subspace into the coordinate ring of an ON-frame via
/// the relative complement #'' of a_2 in [0, a_1 + a_2]. Identity on ring
/// elements; bot on a trivial frame.
pub fn force_ring_element(x: &Subspace, frame: &Frame) -> Result<RingElement> {
    if frame.is_trivial() {
        return Ok(RingElement::new_unchecked(
            Arc::new(frame.clone()),
            frame.bot.clone(),
        ));
    }
    let panel = frame.axis(1).sum(frame.axis(2))?;
    let c = x.meet(&panel)?;
    let r = sharp2(frame.axis(2), &panel, &c)?;
    Ok(RingElement::new_unchecked(Arc::new(frame.clone()), r))
}

/// Commutator kernel u = k(r, a): the largest subspace of a_1 on which all
/// pairs from {r_i, r_i-dagger} commute, as a meet of kernels
/// a_1 meet (r x s - s x r).
pub fn commutator_kernel(rs: &[Subspace], frame: &Frame) -> Result<Subspace> {
    if frame.is_trivial() {
        return Ok(frame.bot.clone());
    }
    let mut family: Vec<Subspace> = Vec::new();
    for r in rs {
        let rd = cr_op(frame, CrOp::Dagger, &[r])?;
        if !family.contains(r) {
            family.push(r.clone());
        }
        if !family.contains(&rd) {
            family.push(rd);
        }
    }
    let mut u = frame.axis(1).clone();
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let rs_ = cr_op(frame, CrOp::Mul, &[&family[i], &family[j]])?;
            let sr = cr_op(frame, CrOp::Mul, &[&family[j], &family[i]])?;
            let comm = cr_op(frame, CrOp::Sub, &[&rs_, &sr])?;
            u = u.meet(&comm)?;
        }
    }
    Ok(u)
}

/// Force a family of ring elements into pairwise commuting self-adjoint
/// ones: restrict to the commutator kernel u, kill the rest of a_1, and
/// average with the adjoint:
/// s_i = 2^-1 ((r_i meet (u + a_2) + a_1 meet u-perp) (+) dagger of same).
/// Identity on already commuting self-adjoint input.
pub fn force_commuting_selfadjoint(rs: &[Subspace], frame: &Frame) -> Result<Vec<Subspace>> {
    if frame.is_trivial() {
        return Ok(vec![frame.bot.clone(); rs.len()]);
    }
    let u = commutator_kernel(rs, frame)?;
    let a1 = frame.axis(1);
    let a2 = frame.axis(2);
    let uperp_in_a1 = a1.meet(&u.ortho()?)?;
    // 2^-1 as a ring element: s applied to a_12 (+) a_12.
    let two = cr_op(frame, CrOp::Add, &[&frame.axes1j[0], &frame.axes1j[0]])?;
    let half = frame.s_term(&two)?;
    let mut out = Vec::with_capacity(rs.len());
    for r in rs {
        let y = r.meet(&u.sum(a2)?)?.sum(&uperp_in_a1)?;
        let yd = cr_op(frame, CrOp::Dagger, &[&y])?;
        let sum = cr_op(frame, CrOp::Add, &[&y, &yd])?;
        out.push(cr_op(frame, CrOp::Mul, &[&half, &sum])?);
    }
    Ok(out)
}

/// ker(r) = r meet a_1, as a subspace of a_1.
pub fn kernel_term(r: &Subspace, frame: &Frame) -> Result<Subspace> {
    r.meet(frame.axis(1))
}

/// im(r) = ((r + a_1) meet a_2 + a_12) meet a_1.
pub fn image_term(r: &Subspace, frame: &Frame) -> Result<Subspace> {
    r.sum(frame.axis(1))?
        .meet(frame.axis(2))?
        .sum(&frame.axes1j[0])?
        .meet(frame.axis(1))
}

/// psi(r) = omega(f+) for r = omega(f):
/// im+ = (a_1 meet ker(r)-perp + a_12) meet a_2,
/// psi_0 = s(r) meet (im + im+), psi = psi_0 + a_1 meet im(r)-perp.
pub fn pinv_term(r: &Subspace, frame: &Frame) -> Result<Subspace> {
    let a1 = frame.axis(1);
    let a2 = frame.axis(2);
    let ker = kernel_term(r, frame)?;
    let im = image_term(r, frame)?;
    let im_plus = a1.meet(&ker.ortho()?)?.sum(&frame.axes1j[0])?.meet(a2)?;
    let psi0 = frame.s_term(r)?.meet(&im.sum(&im_plus)?)?;
    psi0.sum(&a1.meet(&im.ortho()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn rand_mat<R: Rng>(rng: &mut R, n: usize) -> Matrix {
        Matrix::from_fn(q(), n, n, |_, _| q().from_i64(rng.gen_range(-4..=4)))
    }

    #[test]
    fn standard_frame_is_spanning() {
        for field in [q(), FieldSpec::prime(2).unwrap()] {
            let f = Frame::standard(3, 3, field).unwrap();
            assert_eq!(f.classify(), FrameClass::Spanning);
        }
        // a_{12} = span(e1 - e2): over GF(2) that is span((1,1,0))
        let f2 = FieldSpec::prime(2).unwrap();
        let f = Frame::standard(3, 3, f2).unwrap();
        assert_eq!(f.axes1j[0], Subspace::line(f2, &[1, 1, 0]));
    }

    #[test]
    fn trivial_and_invalid_frames_classify() {
        let field = q();
        let u = Subspace::line(field, &[1, 0, 0]);
        let f = Frame {
            field,
            dim: 3,
            order: 3,
            bot: u.clone(),
            top: u.clone(),
            axes: vec![u.clone(), u.clone(), u.clone()],
            axes1j: vec![u.clone(), u.clone()],
        };
        assert_eq!(f.classify(), FrameClass::Trivial);

        // independence violated: a_1 = a_2
        let mut g = Frame::standard(3, 3, field).unwrap();
        g.axes[1] = g.axes[0].clone();
        assert_eq!(g.classify(), FrameClass::Invalid);
    }

    #[test]
    fn frame_reduction_identity_and_collapse() {
        let f = Frame::standard(3, 3, q()).unwrap();
        let same = f.reduce(&f.axes[0].clone()).unwrap();
        assert_eq!(same, f);
        let triv = f.reduce(&f.bot.clone()).unwrap();
        assert!(triv.is_trivial());
        assert_eq!(triv.classify(), FrameClass::Trivial);
    }

    #[test]
    fn frame_reduction_on_fat_axes() {
        // Q^6 with two-dimensional axes; reduce a_1 to a line.
        let f = Frame::standard_on(2, q()).unwrap();
        assert_eq!(f.classify(), FrameClass::Spanning);
        let b1 = Subspace::line(q(), &[1, 1, 0, 0, 0, 0]);
        assert!(b1.leq(&f.axes[0]).unwrap());
        let g = f.reduce(&b1).unwrap();
        assert_ne!(g.classify(), FrameClass::Invalid);
        assert_eq!(g.axes[0].rank(), 1);
        assert_eq!(g.axes[1].rank(), 1);
        assert_eq!(g.axes[2].rank(), 1);
    }

    #[test]
    fn omega_constants() {
        let f = Frame::standard(3, 3, q()).unwrap();
        let m = f.ring_dim();
        let zero = f.omega(&Matrix::zero(q(), m, m)).unwrap();
        assert_eq!(zero.sub, f.axes[0]);
        let one = f.omega(&Matrix::identity(q(), m)).unwrap();
        assert_eq!(one.sub, f.axes1j[0]);
        assert!(zero.is_member() && one.is_member());
    }

    #[test]
    fn omega_graph_example() {
        // f = (2) on the standard frame of Q^3: omega(f) = span(e1 - 2 e2)
        let f = Frame::standard(3, 3, q()).unwrap();
        let two = Matrix::from_i64_rows(q(), &[vec![2]]);
        let r = f.omega(&two).unwrap();
        assert_eq!(r.sub, Subspace::line(q(), &[1, -2, 0]));
    }

    #[test]
    fn omega_inv_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for block in [1usize, 2] {
            let f = Frame::standard_on(block, q()).unwrap();
            for _ in 0..25 {
                let m = rand_mat(&mut rng, block);
                let r = f.omega(&m).unwrap();
                assert!(r.is_member());
                let back = f.omega_inv(&r.sub).unwrap();
                assert_eq!(back, m);
            }
        }
    }

    #[test]
    fn cr_ops_match_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for block in [1usize, 2] {
            let f = Frame::standard_on(block, q()).unwrap();
            for _ in 0..20 {
                let a = rand_mat(&mut rng, block);
                let b = rand_mat(&mut rng, block);
                let ra = f.omega(&a).unwrap().sub;
                let rb = f.omega(&b).unwrap().sub;
                let add = cr_op(&f, CrOp::Add, &[&ra, &rb]).unwrap();
                assert_eq!(add, f.omega(&a.add(&b).unwrap()).unwrap().sub);
                let sub = cr_op(&f, CrOp::Sub, &[&ra, &rb]).unwrap();
                assert_eq!(sub, f.omega(&a.sub(&b).unwrap()).unwrap().sub);
                let mul = cr_op(&f, CrOp::Mul, &[&ra, &rb]).unwrap();
                assert_eq!(mul, f.omega(&a.mul(&b).unwrap()).unwrap().sub);
                let dag = cr_op(&f, CrOp::Dagger, &[&ra]).unwrap();
                assert_eq!(dag, f.omega(&a.transpose()).unwrap().sub);
                let pv = cr_op(&f, CrOp::Pinv, &[&ra]).unwrap();
                assert_eq!(pv, f.omega(&a.pseudoinverse().unwrap()).unwrap().sub);
                if let Some(ainv) = a.inverse().unwrap() {
                    let inv = cr_op(&f, CrOp::Inverse, &[&ra]).unwrap();
                    assert_eq!(inv, f.omega(&ainv).unwrap().sub);
                    // s(omega(f)) = omega(f^-1) for invertible f
                    assert_eq!(f.s_term(&ra).unwrap(), f.omega(&ainv).unwrap().sub);
                }
            }
        }
    }

    #[test]
    fn perspectivity_axis_mapping() {
        let f = Frame::standard(3, 3, q()).unwrap();
        // a_j -> a_k and a_i -> a_i under pi_ijk
        let p = f.perspectivity(&f.axes[1], 1, 2, 3).unwrap();
        assert_eq!(p, f.axes[2]);
        let p = f.perspectivity(&f.axes[0], 1, 2, 3).unwrap();
        assert_eq!(p, f.axes[0]);
        // a_{ij} -> a_{ik}
        let p = f.perspectivity(&f.axes1j[0], 1, 2, 3).unwrap();
        assert_eq!(p, f.axes1j[1]);
    }

    #[test]
    fn discriminator_on_gf2_cube() {
        let f2 = FieldSpec::prime(2).unwrap();
        let frame = Frame::standard(3, 3, f2).unwrap();
        for s in crate::subspace::enumerate_subspaces(f2, 3).unwrap() {
            let d = discriminator(&s, &frame).unwrap();
            if s.is_zero() {
                assert!(d.is_zero());
            } else {
                assert!(d.is_full());
            }
        }
    }

    #[test]
    fn discriminator_on_trivial_frame() {
        let field = q();
        let u = Subspace::line(field, &[0, 1, 0]);
        let f = Frame {
            field,
            dim: 3,
            order: 3,
            bot: u.clone(),
            top: u.clone(),
            axes: vec![u.clone(), u.clone(), u.clone()],
            axes1j: vec![u.clone(), u.clone()],
        };
        // argument above bot: result is the common component
        let x = u.sum(&Subspace::line(field, &[1, 0, 0])).unwrap();
        assert_eq!(discriminator(&x, &f).unwrap(), u);
    }

    #[test]
    fn sharp2_complement_and_retraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let b = Subspace::random(&mut rng, q(), 4, 3);
            let a = b.meet(&Subspace::random(&mut rng, q(), 4, 3)).unwrap();
            let c = b.meet(&Subspace::random(&mut rng, q(), 4, 3)).unwrap();
            let x = sharp2(&a, &b, &c).unwrap();
            assert_eq!(x.sum(&a).unwrap(), b);
            assert!(x.meet(&a).unwrap().is_zero());
        }
        // retraction: b = c (+) a gives back c
        let a = Subspace::line(q(), &[1, 0, 0, 0]);
        let c = Subspace::span_i64(q(), 4, &[vec![0, 1, 0, 0], vec![0, 0, 1, 1]]);
        let b = a.sum(&c).unwrap();
        assert_eq!(sharp2(&a, &b, &c).unwrap(), c);
        // c = b, a = 0 gives b
        let z = Subspace::zero(q(), 4);
        assert_eq!(sharp2(&z, &b, &b).unwrap(), b);
    }

    #[test]
    fn standard_frames_are_on() {
        for block in [1usize, 2] {
            let f = Frame::standard_on(block, q()).unwrap();
            assert!(is_orthogonal_frame(&f).unwrap());
            assert!(satisfies_isometry_criterion(&f).unwrap());
        }
        let f = Frame::standard(3, 3, q()).unwrap();
        assert!(is_on_frame(&f).unwrap());
    }

    #[test]
    fn scaled_frame_violates_isometry() {
        // eps scaling by 2: a_{12} = span(e1 - 2 e2)
        let field = q();
        let mut f = Frame::standard(3, 3, field).unwrap();
        f.axes1j[0] = Subspace::line(field, &[1, -2, 0]);
        assert_eq!(f.classify(), FrameClass::Spanning);
        assert!(is_orthogonal_frame(&f).unwrap());
        assert!(!satisfies_isometry_criterion(&f).unwrap());
        // the ON step repairs it into an ON frame
        let g = on_step(&f).unwrap();
        assert!(is_on_frame(&g).unwrap());
    }

    #[test]
    fn orthogonalize_retracts_on_frames() {
        for block in [1usize, 2] {
            let f = Frame::standard_on(block, q()).unwrap();
            let tup = frame_tuple(&f).unwrap();
            let g = orthogonalize(&tup).unwrap();
            assert_eq!(g, f);
        }
    }

    #[test]
    fn orthogonalize_zero_input() {
        let z = Subspace::zero(q(), 3);
        let tup: [Subspace; 7] = std::array::from_fn(|_| z.clone());
        let f = orthogonalize(&tup).unwrap();
        assert!(f.is_trivial());
        assert!(f.bot.is_zero());
    }

    #[test]
    fn orthogonalize_random_inputs_yield_on_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for dim in [3usize, 6] {
            for _ in 0..40 {
                let tup: [Subspace; 7] =
                    std::array::from_fn(|_| Subspace::random(&mut rng, q(), dim, 2));
                let f = orthogonalize(&tup).unwrap();
                assert!(
                    is_on_frame(&f).unwrap(),
                    "not ON for input {:?}",
                    tup.iter().map(|s| format!("{s}")).collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn force_ring_element_retracts_and_forces() {
        let f = Frame::standard_on(2, q()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let m = rand_mat(&mut rng, 2);
            let r = f.omega(&m).unwrap();
            let forced = force_ring_element(&r.sub, &f).unwrap();
            assert_eq!(forced.sub, r.sub);
        }
        for _ in 0..30 {
            let x = Subspace::random(&mut rng, q(), 6, 3);
            let forced = force_ring_element(&x, &f).unwrap();
            assert!(forced.is_member());
        }
        // a_2 itself maps to some complement of a_2
        let forced = force_ring_element(&f.axes[1].clone(), &f).unwrap();
        assert!(forced.is_member());
    }

    #[test]
    fn force_commuting_selfadjoint_properties() {
        let f = Frame::standard_on(2, q()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        // identity on commuting self-adjoint inputs: diagonal matrices
        let d1 = Matrix::from_i64_rows(q(), &[vec![2, 0], vec![0, 5]]);
        let d2 = Matrix::from_i64_rows(q(), &[vec![-1, 0], vec![0, 3]]);
        let r1 = f.omega(&d1).unwrap().sub;
        let r2 = f.omega(&d2).unwrap().sub;
        let out = force_commuting_selfadjoint(&[r1.clone(), r2.clone()], &f).unwrap();
        assert_eq!(out, vec![r1, r2]);
        // unit alone is unchanged
        let unit = f.axes1j[0].clone();
        let out = force_commuting_selfadjoint(&[unit.clone()], &f).unwrap();
        assert_eq!(out, vec![unit]);
        // non-symmetric input becomes self-adjoint and commuting
        for _ in 0..10 {
            let a = rand_mat(&mut rng, 2);
            let b = rand_mat(&mut rng, 2);
            let rs = vec![f.omega(&a).unwrap().sub, f.omega(&b).unwrap().sub];
            let out = force_commuting_selfadjoint(&rs, &f).unwrap();
            for s in &out {
                let sd = cr_op(&f, CrOp::Dagger, &[s]).unwrap();
                assert_eq!(*s, sd);
            }
            let m0 = f.omega_inv(&out[0]).unwrap();
            let m1 = f.omega_inv(&out[1]).unwrap();
            assert_eq!(m0.mul(&m1).unwrap(), m1.mul(&m0).unwrap());
        }
    }

    #[test]
    fn kernel_image_pinv_terms_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for block in [1usize, 2] {
            let f = Frame::standard_on(block, q()).unwrap();
            for _ in 0..20 {
                let m = rand_mat(&mut rng, block);
                let r = f.omega(&m).unwrap().sub;
                let ker = kernel_term(&r, &f).unwrap();
                let im = image_term(&r, &f).unwrap();
                let b1 = &f.axes[0].basis;
                let ker_oracle = Subspace::from_columns(&b1.mul(&m.kernel_matrix()).unwrap());
                let im_oracle = Subspace::from_columns(&b1.mul(&m).unwrap());
                assert_eq!(ker, ker_oracle);
                assert_eq!(im, im_oracle);
                let psi = pinv_term(&r, &f).unwrap();
                assert_eq!(psi, f.omega(&f.pinv_matrix(&m).unwrap()).unwrap().sub);
            }
        }
        // zero and identity maps
        let f = Frame::standard_on(1, q()).unwrap();
        let zero = f.axes[0].clone();
        assert_eq!(kernel_term(&zero, &f).unwrap(), f.axes[0]);
        assert!(image_term(&zero, &f).unwrap().is_zero());
        assert_eq!(pinv_term(&zero, &f).unwrap(), f.axes[0]);
        let unit = f.axes1j[0].clone();
        assert!(kernel_term(&unit, &f).unwrap().is_zero());
        assert_eq!(image_term(&unit, &f).unwrap(), f.axes[0]);
        assert_eq!(pinv_term(&unit, &f).unwrap(), unit);
    }

    #[test]
    fn pinv_matrix_is_standard_mp_for_orthonormal_a1() {
        // standard_on frames have orthonormal a_1 bases, so the within-a_1
        // pseudo-inverse is the plain matrix pseudo-inverse
        let f = Frame::standard_on(2, q()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..10 {
            let m = rand_mat(&mut rng, 2);
            assert_eq!(f.pinv_matrix(&m).unwrap(), m.pseudoinverse().unwrap());
            assert_eq!(f.adjoint_matrix(&m).unwrap(), m.transpose());
        }
    }
}
