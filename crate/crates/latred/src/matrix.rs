//! Dense exact matrices over [`FieldSpec`] fields, with the elimination
//! primitives the rest of the crate is built on: reduced row echelon form,
//! solving, kernel, inverse, and the exact Moore-Penrose pseudo-inverse
//! (characteristic 0 only).
//!
//! Everything here is desk-scale: no pivoting heuristics, no sparsity.

use crate::error::{Error, Result};
use crate::scalar::{check_scalar, FieldSpec, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>, // row-major
}

impl Matrix {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dim(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        for s in &data {
            check_scalar(&field, s)?;
        }
        Ok(Matrix { field, rows, cols, data })
    }

    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m[(i, i)] = field.one();
        }
        m
    }

    pub fn from_fn(field: FieldSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { field, rows, cols, data }
    }

    pub fn from_i64_rows(field: FieldSpec, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(field, r, c, |i, j| field.from_i64(rows[i][j]))
    }

    /// Column vector from integer entries.
    pub fn col_from_i64(field: FieldSpec, entries: &[i64]) -> Self {
        Self::from_fn(field, entries.len(), 1, |i, _| field.from_i64(entries[i]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(self.field, self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.field.ensure_matrix_compat(&other.field)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dim("add: shape mismatch".into()));
        }
        Ok(Self::from_fn(self.field, self.rows, self.cols, |r, c| {
            self.field.add(&self[(r, c)], &other[(r, c)])
        }))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        Self::from_fn(self.field, self.rows, self.cols, |r, c| {
            self.field.neg(&self[(r, c)])
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.field.ensure_matrix_compat(&other.field)?;
        if self.cols != other.rows {
            return Err(Error::Dim(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        Ok(Self::from_fn(f, self.rows, other.cols, |r, c| {
            let mut acc = f.zero();
            for k in 0..self.cols {
                acc = f.add(&acc, &f.mul(&self[(r, k)], &other[(k, c)]));
            }
            acc
        }))
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Self::from_fn(self.field, self.rows, self.cols, |r, c| {
            self.field.mul(&self[(r, c)], s)
        })
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.field.ensure_matrix_compat(&other.field)?;
        if self.rows != other.rows {
            return Err(Error::Dim("hstack: row mismatch".into()));
        }
        Ok(Self::from_fn(self.field, self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        }))
    }

    /// Vertical concatenation [self; other].
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.field.ensure_matrix_compat(&other.field)?;
        if self.cols != other.cols {
            return Err(Error::Dim("vstack: col mismatch".into()));
        }
        Ok(Self::from_fn(self.field, self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self[(r, c)].clone()
            } else {
                other[(r - self.rows, c)].clone()
            }
        }))
    }

    /// 2x2 block matrix [[a, b], [c, d]].
    pub fn block2x2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<Matrix> {
        a.hstack(b)?.vstack(&c.hstack(d)?)
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        Self::from_fn(self.field, rows.len(), cols.len(), |r, c| {
            self[(rows.start + r, cols.start + c)].clone()
        })
    }

    pub fn col(&self, c: usize) -> Matrix {
        self.submatrix(0..self.rows, c..c + 1)
    }

    /// Matrix whose columns are the listed columns of `self`.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Self::from_fn(self.field, self.rows, idx.len(), |r, c| self[(r, idx[c])].clone())
    }

    /// In-place reduced row echelon form. Returns pivot column indices.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let mut piv = None;
            for r in row..self.rows {
                if !self[(r, col)].is_zero() {
                    piv = Some(r);
                    break;
                }
            }
            let Some(piv) = piv else { continue };
            self.swap_rows(row, piv);
            let inv = f.inv(&self[(row, col)]).expect("nonzero pivot");
            for c in col..self.cols {
                self[(row, c)] = f.mul(&self[(row, c)], &inv);
            }
            for r in 0..self.rows {
                if r != row && !self[(r, col)].is_zero() {
                    let factor = self[(r, col)].clone();
                    for c in col..self.cols {
                        let delta = f.mul(&factor, &self[(row, c)]);
                        self[(r, c)] = f.sub(&self[(r, c)], &delta);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Kernel of `self` as a matrix whose columns span the null space
    /// (one column per free variable, in the standard rref parametrization).
    pub fn kernel_matrix(&self) -> Matrix {
        let f = self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zero(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out[(fc, k)] = f.one();
            for (prow, &pc) in pivots.iter().enumerate() {
                out[(pc, k)] = f.neg(&r[(prow, fc)]);
            }
        }
        out
    }

    /// Solve self * X = rhs exactly. Returns None when inconsistent.
    pub fn solve(&self, rhs: &Matrix) -> Result<Option<Matrix>> {
        self.field.ensure_matrix_compat(&rhs.field)?;
        if self.rows != rhs.rows {
            return Err(Error::Dim("solve: row mismatch".into()));
        }
        let f = self.field;
        let aug = self.hstack(rhs)?;
        let (r, pivots) = aug.rref();
        // Inconsistent if a pivot falls in the rhs block.
        if pivots.iter().any(|&p| p >= self.cols) {
            return Ok(None);
        }
        let mut x = Matrix::zero(f, self.cols, rhs.cols);
        for (prow, &pc) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x[(pc, c)] = r[(prow, self.cols + c)].clone();
            }
        }
        Ok(Some(x))
    }

    /// True when the columns of `other` all lie in the column span of `self`.
    pub fn spans(&self, other: &Matrix) -> Result<bool> {
        Ok(self.solve(other)?.is_some())
    }

    pub fn inverse(&self) -> Result<Option<Matrix>> {
        if !self.is_square() {
            return Err(Error::Dim("inverse of non-square matrix".into()));
        }
        let id = Matrix::identity(self.field, self.rows);
        let sol = self.solve(&id)?;
        match sol {
            Some(x) => {
                if self.mul(&x)? == id {
                    Ok(Some(x))
                } else {
                    Ok(None)
                }
            }
            None => Ok(None),
        }
    }

    /// Exact Moore-Penrose pseudo-inverse over the rationals, via a full-rank
    /// factorization A = B C with A+ = C^t (C C^t)^-1 (B^t B)^-1 B^t.
    pub fn pseudoinverse(&self) -> Result<Matrix> {
        if !self.field.is_rational() {
            return Err(Error::Unsupported(
                "pseudoinverse requires characteristic 0".into(),
            ));
        }
        let f = self.field;
        // Full-rank factorization from the rref: B = pivot columns of A,
        // C = pivot rows of rref(A).
        let (r, pivots) = self.rref();
        let rank = pivots.len();
        if rank == 0 {
            return Ok(Matrix::zero(f, self.cols, self.rows));
        }
        let b = self.select_cols(&pivots);
        let c = r.submatrix(0..rank, 0..self.cols);
        let cct = c.mul(&c.transpose())?;
        let btb = b.transpose().mul(&b)?;
        let cct_inv = cct
            .inverse()?
            .ok_or_else(|| Error::Field("CC^t singular in full-rank factorization".into()))?;
        let btb_inv = btb
            .inverse()?
            .ok_or_else(|| Error::Field("B^tB singular in full-rank factorization".into()))?;
        c.transpose()
            .mul(&cct_inv)?
            .mul(&btb_inv)?
            .mul(&b.transpose())
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// JSON shape from the external interface:
/// {"field": {"char": p}, "rows": d, "cols": k, "entries": [["n/d", ...], ...]}.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
}

impl Matrix {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows)
                .map(|r| (0..self.cols).map(|c| self[(r, c)].to_text()).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Matrix> {
        if j.entries.len() != j.rows {
            return Err(Error::Dim("entry rows mismatch".into()));
        }
        let mut data = Vec::with_capacity(j.rows * j.cols);
        for row in &j.entries {
            if row.len() != j.cols {
                return Err(Error::Dim("entry cols mismatch".into()));
            }
            for e in row {
                data.push(j.field.parse_scalar(e)?);
            }
        }
        Matrix::new(j.field, j.rows, j.cols, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    #[test]
    fn rref_and_rank() {
        let m = Matrix::from_i64_rows(q(), &[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.rank(), 1);
        let id = Matrix::identity(q(), 3);
        assert_eq!(id.rank(), 3);
    }

    #[test]
    fn kernel_of_rank_one() {
        // kernel of [[1,1],[1,1]] is the line through (1,-1)
        let m = Matrix::from_i64_rows(q(), &[vec![1, 1], vec![1, 1]]);
        let k = m.kernel_matrix();
        assert_eq!(k.cols, 1);
        assert!(m.mul(&k).unwrap().is_zero());
        assert!(k[(0, 0)] == q().neg(&k[(1, 0)]));
    }

    #[test]
    fn solve_consistency() {
        let a = Matrix::from_i64_rows(q(), &[vec![1, 0], vec![0, 0]]);
        let b = Matrix::col_from_i64(q(), &[3, 0]);
        let x = a.solve(&b).unwrap().unwrap();
        assert_eq!(a.mul(&x).unwrap(), b);
        let bad = Matrix::col_from_i64(q(), &[0, 1]);
        assert!(a.solve(&bad).unwrap().is_none());
    }

    #[test]
    fn inverse_2x2() {
        let a = Matrix::from_i64_rows(q(), &[vec![2, 1], vec![1, 1]]);
        let inv = a.inverse().unwrap().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(q(), 2));
        let sing = Matrix::from_i64_rows(q(), &[vec![1, 1], vec![1, 1]]);
        assert!(sing.inverse().unwrap().is_none());
    }

    fn penrose_ok(a: &Matrix, p: &Matrix) -> bool {
        let apa = a.mul(p).unwrap().mul(a).unwrap();
        let pap = p.mul(a).unwrap().mul(p).unwrap();
        let ap = a.mul(p).unwrap();
        let pa = p.mul(a).unwrap();
        apa == *a && pap == *p && ap == ap.transpose() && pa == pa.transpose()
    }

    #[test]
    fn pseudoinverse_examples() {
        // zero matrix: pinv is the transposed zero
        let z = Matrix::zero(q(), 2, 3);
        let pz = z.pseudoinverse().unwrap();
        assert_eq!((pz.rows, pz.cols), (3, 2));
        assert!(pz.is_zero());

        // invertible: pinv = inverse
        let a = Matrix::from_i64_rows(q(), &[vec![2, 1], vec![1, 1]]);
        assert_eq!(a.pseudoinverse().unwrap(), a.inverse().unwrap().unwrap());

        // projection-like diag(1,0) is its own pseudo-inverse
        let d = Matrix::from_i64_rows(q(), &[vec![1, 0], vec![0, 0]]);
        assert_eq!(d.pseudoinverse().unwrap(), d);
        assert!(penrose_ok(&d, &d));

        // a genuinely rectangular example
        let m = Matrix::from_i64_rows(q(), &[vec![1, 2, 3], vec![0, 1, 1]]);
        let p = m.pseudoinverse().unwrap();
        assert!(penrose_ok(&m, &p));
    }

    #[test]
    fn pseudoinverse_rejects_char_p() {
        let f = FieldSpec::prime(3).unwrap();
        let m = Matrix::identity(f, 2);
        assert!(matches!(m.pseudoinverse(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn json_roundtrip() {
        let m = Matrix::from_i64_rows(q(), &[vec![1, -2], vec![3, 4]]);
        let j = m.to_json();
        let back = Matrix::from_json(&j).unwrap();
        assert_eq!(m, back);
    }
}
