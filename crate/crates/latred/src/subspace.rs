//! Canonical subspaces of F^d, the elements of the lattice L(F^d).
//!
//! A subspace is stored as a d x k basis matrix in reduced column echelon
//! form (the transpose of a reduced row echelon form with zero rows dropped),
//! which is a unique representative of the column span. Equality of
//! subspaces is therefore plain representation equality.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, MatrixJson};
use crate::scalar::{FieldSpec, Scalar};
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    pub field: FieldSpec,
    /// Ambient dimension d (0 is allowed: the trivial lattice).
    pub dim: usize,
    /// d x rank basis in reduced column echelon form.
    pub basis: Matrix,
}

impl Subspace {
    /// Canonical representative of the column span of `a` (d = rows of `a`).
    pub fn from_columns(a: &Matrix) -> Subspace {
        // Reduced column echelon form = transpose of rref of the transpose,
        // with zero rows dropped.
        let (r, pivots) = a.transpose().rref();
        let rank = pivots.len();
        let basis = r.submatrix(0..rank, 0..a.rows).transpose();
        Subspace {
            field: a.field,
            dim: a.rows,
            basis,
        }
    }

    pub fn zero(field: FieldSpec, dim: usize) -> Subspace {
        Subspace {
            field,
            dim,
            basis: Matrix::zero(field, dim, 0),
        }
    }

    pub fn full(field: FieldSpec, dim: usize) -> Subspace {
        Subspace {
            field,
            dim,
            basis: Matrix::identity(field, dim),
        }
    }

    /// Span of a single integer vector.
    pub fn line(field: FieldSpec, v: &[i64]) -> Subspace {
        Self::from_columns(&Matrix::col_from_i64(field, v))
    }

    /// Span of several integer vectors.
    pub fn span_i64(field: FieldSpec, dim: usize, vs: &[Vec<i64>]) -> Subspace {
        let m = Matrix::from_fn(field, dim, vs.len(), |r, c| field.from_i64(vs[c][r]));
        Self::from_columns(&m)
    }

    pub fn rank(&self) -> usize {
        self.basis.cols
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.dim
    }

    fn compat(&self, other: &Subspace) -> Result<()> {
        self.field.ensure_matrix_compat(&other.field)?;
        if self.dim != other.dim {
            return Err(Error::Dim(format!(
                "ambient dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Lattice join: U + W.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.compat(other)?;
        Ok(Self::from_columns(&self.basis.hstack(&other.basis)?))
    }

    /// Lattice meet U `intersect` W by the Zassenhaus block method: stack
    /// [U|W; U|0], reduce, and read the block whose first half vanished.
    pub fn meet(&self, other: &Subspace) -> Result<Subspace> {
        self.compat(other)?;
        let d = self.dim;
        let f = self.field;
        let u = &self.basis;
        let w = &other.basis;
        // Rows of the stacked matrix are (u_i, u_i) and (w_j, 0); its row
        // space is {(x + y, x) : x in U, y in W} inside F^(2d).
        let top = u.transpose().hstack(&u.transpose())?;
        let bot = w.transpose().hstack(&Matrix::zero(f, w.cols, d))?;
        let stacked = top.vstack(&bot)?;
        let (r, pivots) = stacked.rref();
        // Echelon rows whose leading entry lies in the second half form a
        // basis of (row space) meet (0 x F^d) = 0 x (U meet W).
        let mut meet_rows: Vec<Vec<Scalar>> = Vec::new();
        for (row, &p) in pivots.iter().enumerate() {
            if p >= d {
                meet_rows.push((0..d).map(|c| r[(row, d + c)].clone()).collect());
            }
        }
        let m = Matrix::from_fn(f, d, meet_rows.len(), |r_, c_| meet_rows[c_][r_].clone());
        Ok(Self::from_columns(&m))
    }

    /// Orthogonal complement with respect to the standard dot product.
    /// Defined only in characteristic 0, where the form is positive definite.
    pub fn ortho(&self) -> Result<Subspace> {
        if !self.field.is_rational() {
            return Err(Error::Unsupported(
                "orthocomplement requires characteristic 0".into(),
            ));
        }
        Ok(Self::from_columns(&self.basis.transpose().kernel_matrix()))
    }

    pub fn leq(&self, other: &Subspace) -> Result<bool> {
        self.compat(other)?;
        if self.rank() > other.rank() {
            return Ok(false);
        }
        other.basis.spans(&self.basis)
    }

    pub fn contains_vector(&self, v: &Matrix) -> Result<bool> {
        self.basis.spans(v)
    }

    /// Kernel of a matrix as a canonical subspace of its column count.
    pub fn kernel(a: &Matrix) -> Subspace {
        Self::from_columns(&a.kernel_matrix())
    }

    /// Image (column space) of a matrix as a canonical subspace.
    pub fn image(a: &Matrix) -> Subspace {
        Self::from_columns(a)
    }

    pub fn to_json(&self) -> MatrixJson {
        self.basis.to_json()
    }

    pub fn from_json(j: &MatrixJson) -> Result<Subspace> {
        Ok(Self::from_columns(&Matrix::from_json(j)?))
    }

    /// Random subspace: integer matrix with entries in [-bound, bound] and
    /// 0..=d columns, canonicalized. Over GF(p) entries are uniform residues.
    pub fn random<R: Rng>(rng: &mut R, field: FieldSpec, dim: usize, bound: i64) -> Subspace {
        let k = rng.gen_range(0..=dim);
        let m = match field.char {
            0 => Matrix::from_fn(field, dim, k, |_, _| {
                field.from_i64(rng.gen_range(-bound..=bound))
            }),
            p => Matrix::from_fn(field, dim, k, |_, _| {
                field.from_i64(rng.gen_range(0..p) as i64)
            }),
        };
        Self::from_columns(&m)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.is_full() {
            return write!(f, "F^{}", self.dim);
        }
        write!(f, "span")?;
        for c in 0..self.basis.cols {
            write!(f, "(")?;
            for r in 0..self.dim {
                if r > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.basis[(r, c)])?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// All subspaces of GF(p)^d in a deterministic order: by rank, then by
/// pivot-row choice, then lexicographically by free entries. Canonical form
/// guarantees each subspace appears exactly once.
pub fn enumerate_subspaces(field: FieldSpec, dim: usize) -> Result<Vec<Subspace>> {
    let p = match field.size() {
        Some(p) => p,
        None => return Err(Error::Unsupported("cannot enumerate over Q".into())),
    };
    let budget: u128 = 2_000_000;
    let mut out = Vec::new();
    for rank in 0..=dim {
        for pivots in combinations(dim, rank) {
            // Free entries of the reduced column echelon basis: entry (r, c)
            // with r not a pivot row and r > pivots[c] ... in column-echelon
            // convention (pivot of column c at row pivots[c], entries above
            // pivots and at other pivot rows are 0, entries below are free).
            let mut free_pos: Vec<(usize, usize)> = Vec::new();
            for (c, &pr) in pivots.iter().enumerate() {
                for r in (pr + 1)..dim {
                    if !pivots.contains(&r) {
                        free_pos.push((r, c));
                    }
                }
            }
            let count = (p as u128).pow(free_pos.len() as u32);
            if count > budget {
                return Err(Error::Budget(format!(
                    "enumeration of GF({p})^{dim} rank-{rank} subspaces too large"
                )));
            }
            let mut idx = vec![0u64; free_pos.len()];
            loop {
                let mut m = Matrix::zero(field, dim, rank);
                for (c, &pr) in pivots.iter().enumerate() {
                    m[(pr, c)] = field.one();
                }
                for (k, &(r, c)) in free_pos.iter().enumerate() {
                    m[(r, c)] = field.element(idx[k])?;
                }
                // Already canonical by construction.
                out.push(Subspace {
                    field,
                    dim,
                    basis: m,
                });
                // Odometer over free entries.
                let mut carry = true;
                for v in idx.iter_mut().rev() {
                    if carry {
                        *v += 1;
                        if *v == p {
                            *v = 0;
                        } else {
                            carry = false;
                        }
                    }
                }
                if carry {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Gaussian binomial [d choose k]_p, the number of k-dim subspaces of GF(p)^d.
pub fn gaussian_binomial(d: u64, k: u64, p: u64) -> u128 {
    if k > d {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (p as u128).pow((d - i) as u32) - 1;
        den *= (p as u128).pow((i + 1) as u32) - 1;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    #[test]
    fn canonicalize_dependent_columns() {
        // columns (1,1) and (2,2) span the same line
        let m = Matrix::from_i64_rows(q(), &[vec![1, 2], vec![1, 2]]);
        let s = Subspace::from_columns(&m);
        assert_eq!(s.rank(), 1);
        assert_eq!(s, Subspace::line(q(), &[1, 1]));
    }

    #[test]
    fn canonicalize_zero() {
        let m = Matrix::zero(q(), 3, 2);
        assert!(Subspace::from_columns(&m).is_zero());
    }

    #[test]
    fn gf2_rank_example() {
        let f = FieldSpec::prime(2).unwrap();
        // columns (1,0,1), (0,1,1), (1,1,0): third = first + second over GF(2)
        let s = Subspace::span_i64(f, 3, &[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn sum_and_meet_basics() {
        let e1 = Subspace::line(q(), &[1, 0, 0]);
        let e2 = Subspace::line(q(), &[0, 1, 0]);
        let z = Subspace::zero(q(), 3);
        assert_eq!(e1.sum(&z).unwrap(), e1);
        assert_eq!(e1.sum(&e2).unwrap().rank(), 2);
        assert_eq!(e1.meet(&e1).unwrap(), e1);
        assert!(e1.meet(&e2).unwrap().is_zero());
    }

    #[test]
    fn meet_agrees_with_membership_over_gf3() {
        // Exhaustive oracle: intersect by testing all 3^4 vectors.
        let f = FieldSpec::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let all_vectors: Vec<Matrix> = {
            let mut vs = Vec::new();
            for a in 0..3i64 {
                for b in 0..3i64 {
                    for c in 0..3i64 {
                        for d in 0..3i64 {
                            vs.push(Matrix::col_from_i64(f, &[a, b, c, d]));
                        }
                    }
                }
            }
            vs
        };
        for _ in 0..25 {
            let u = Subspace::random(&mut rng, f, 4, 2);
            let w = Subspace::random(&mut rng, f, 4, 2);
            let m = u.meet(&w).unwrap();
            let members: Vec<&Matrix> = all_vectors
                .iter()
                .filter(|v| {
                    u.contains_vector(v).unwrap() && w.contains_vector(v).unwrap()
                })
                .collect();
            let span = members.iter().fold(Subspace::zero(f, 4), |acc, v| {
                acc.sum(&Subspace::from_columns(v)).unwrap()
            });
            assert_eq!(m, span);
        }
    }

    #[test]
    fn ortho_examples() {
        let z = Subspace::zero(q(), 3);
        assert!(z.ortho().unwrap().is_full());
        let e1 = Subspace::line(q(), &[1, 0, 0]);
        assert_eq!(
            e1.ortho().unwrap(),
            Subspace::span_i64(q(), 3, &[vec![0, 1, 0], vec![0, 0, 1]])
        );
        // span((1,1,0))^perp = span((1,-1,0),(0,0,1))
        let v = Subspace::line(q(), &[1, 1, 0]);
        let vp = v.ortho().unwrap();
        assert_eq!(vp.rank(), 2);
        assert!(vp
            .contains_vector(&Matrix::col_from_i64(q(), &[1, -1, 0]))
            .unwrap());
        assert!(vp
            .contains_vector(&Matrix::col_from_i64(q(), &[0, 0, 1]))
            .unwrap());
        // involution and complement laws
        assert_eq!(vp.ortho().unwrap(), v);
        assert!(v.sum(&vp).unwrap().is_full());
        assert!(v.meet(&vp).unwrap().is_zero());
    }

    #[test]
    fn ortho_rejected_in_char_p() {
        let f = FieldSpec::prime(2).unwrap();
        let s = Subspace::line(f, &[1, 1]);
        assert!(s.ortho().is_err());
    }

    #[test]
    fn kernel_image_example() {
        let a = Matrix::from_i64_rows(q(), &[vec![1, 1], vec![1, 1]]);
        assert_eq!(Subspace::kernel(&a), Subspace::line(q(), &[1, -1]));
        assert_eq!(Subspace::image(&a), Subspace::line(q(), &[1, 1]));
        assert!(Subspace::kernel(&Matrix::identity(q(), 3)).is_zero());
        assert!(Subspace::image(&Matrix::zero(q(), 3, 3)).is_zero());
    }

    #[test]
    fn enumeration_counts_match_gaussian_binomials() {
        let f2 = FieldSpec::prime(2).unwrap();
        let subs = enumerate_subspaces(f2, 3).unwrap();
        assert_eq!(subs.len(), 16); // 1 + 7 + 7 + 1
        for k in 0..=3u64 {
            let count = subs.iter().filter(|s| s.rank() == k as usize).count() as u128;
            assert_eq!(count, gaussian_binomial(3, k, 2));
        }

        let f3 = FieldSpec::prime(3).unwrap();
        let subs = enumerate_subspaces(f3, 2).unwrap();
        assert_eq!(subs.len(), 6); // 0, four lines, plane
        assert_eq!(gaussian_binomial(2, 1, 3), 4);

        // d = 0: exactly the zero space
        let subs = enumerate_subspaces(f2, 0).unwrap();
        assert_eq!(subs.len(), 1);
        assert!(subs[0].is_zero());

        // no duplicates
        let subs = enumerate_subspaces(f3, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for s in &subs {
            assert!(seen.insert(format!("{s}")));
        }
        let total: u128 = (0..=3).map(|k| gaussian_binomial(3, k, 3)).sum();
        assert_eq!(subs.len() as u128, total);
    }

    #[test]
    fn modular_law_random() {
        // u meet (w + v) = u meet w + v whenever v <= u
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for field in [
            q(),
            FieldSpec::prime(2).unwrap(),
            FieldSpec::prime(5).unwrap(),
        ] {
            for _ in 0..40 {
                let u = Subspace::random(&mut rng, field, 4, 3);
                let w = Subspace::random(&mut rng, field, 4, 3);
                let v = u.meet(&Subspace::random(&mut rng, field, 4, 3)).unwrap();
                assert!(v.leq(&u).unwrap());
                let lhs = u.meet(&w.sum(&v).unwrap()).unwrap();
                let rhs = u.meet(&w).unwrap().sum(&v).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}
