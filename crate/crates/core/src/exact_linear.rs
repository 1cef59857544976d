//! Exact linear algebra over the integers and the rationals.
//!
//! Everything here is arbitrary precision. The integer side provides a row
//! Hermite normal form and an integral solver for `A X = B` built on it; the
//! rational side provides reduced row echelon forms, kernels and inverses
//! for the pasting matrices of bundle data.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<BigRational>;

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_data(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must have `cols` entries.
    pub fn from_row_vecs(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().cloned());
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_col_vecs(rows: usize, cols: &[Vec<T>]) -> Self {
        for c in cols {
            assert_eq!(c.len(), rows, "ragged columns");
        }
        Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool
    where
        T: PartialEq,
    {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + One,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
{
    pub fn mul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * &rhs[(k, j)];
                    let slot = &mut out[(i, j)];
                    *slot = std::mem::replace(slot, T::zero()) + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        self.iter_rows()
            .map(|row| row.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Matrix::from_row_vecs(cols, &rows)
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|x| BigRational::from_integer(x.clone()))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(p) => {
                        m.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * &m[(n - 1, n - 1)]
    }
}

fn sub_scaled_row(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for c in 0..m.cols {
        let delta = q * &m[(source, c)];
        m[(target, c)] -= delta;
    }
}

fn negate_row(m: &mut IntMatrix, r: usize) {
    for x in m.row_mut(r) {
        *x = -std::mem::take(x);
    }
}

/// Row Hermite normal form: returns `(H, U)` with `U` unimodular and `U A = H`.
///
/// `H` is in row echelon form, every pivot is positive and the entries above
/// a pivot lie in `[0, pivot)`.
pub fn hnf(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        loop {
            // Euclid on the column, smallest magnitude to the pivot slot.
            let best = (r..a.rows)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&x, &y| h[(x, c)].abs().cmp(&h[(y, c)].abs()));
            let Some(p) = best else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..a.rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = h[(i, c)].div_floor(&h[(r, c)]);
                sub_scaled_row(&mut h, i, r, &q);
                sub_scaled_row(&mut u, i, r, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            negate_row(&mut h, r);
            negate_row(&mut u, r);
        }
        for i in 0..r {
            let q = h[(i, c)].div_floor(&h[(r, c)]);
            sub_scaled_row(&mut h, i, r, &q);
            sub_scaled_row(&mut u, i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// A solution of `A X = B` together with a basis of the integer kernel of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralSolution {
    pub x: IntMatrix,
    pub kernel_basis: Vec<Vec<BigInt>>,
}

/// Reusable integral solver for a fixed coefficient matrix `A`.
///
/// Computes the row HNF of `Aᵀ` once: `U Aᵀ = H`, hence `A Uᵀ = Hᵀ` is in
/// column echelon form. Particular solutions come from back-substitution
/// against the pivots of `H`; the trailing rows of `U` span the kernel.
#[derive(Clone, Debug)]
pub struct IntegralSolver {
    a_rows: usize,
    a_cols: usize,
    h: IntMatrix,
    u: IntMatrix,
    pivots: Vec<usize>,
}

impl IntegralSolver {
    pub fn new(a: &IntMatrix) -> Self {
        let (h, u) = hnf(&a.transpose());
        let mut pivots = Vec::new();
        for k in 0..h.rows() {
            match h.row(k).iter().position(|x| !x.is_zero()) {
                Some(p) => pivots.push(p),
                None => break,
            }
        }
        IntegralSolver {
            a_rows: a.rows(),
            a_cols: a.cols(),
            h,
            u,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        (self.rank()..self.a_cols)
            .map(|k| self.u.row(k).to_vec())
            .collect()
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        if b.len() != self.a_rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} entries, matrix has {} rows",
                b.len(),
                self.a_rows
            )));
        }
        let mut y: Vec<BigInt> = Vec::with_capacity(self.rank());
        for (k, &p) in self.pivots.iter().enumerate() {
            let mut s = b[p].clone();
            for (l, yl) in y.iter().enumerate() {
                s -= &self.h[(l, p)] * yl;
            }
            let (q, rem) = s.div_rem(&self.h[(k, p)]);
            if !rem.is_zero() {
                return Ok(None);
            }
            y.push(q);
        }
        for (i, bi) in b.iter().enumerate() {
            let lhs = y
                .iter()
                .enumerate()
                .fold(BigInt::zero(), |acc, (l, yl)| acc + &self.h[(l, i)] * yl);
            if &lhs != bi {
                return Ok(None);
            }
        }
        let mut x = vec![BigInt::zero(); self.a_cols];
        for (k, yk) in y.iter().enumerate() {
            if yk.is_zero() {
                continue;
            }
            for (xj, ukj) in x.iter_mut().zip(self.u.row(k)) {
                *xj += yk * ukj;
            }
        }
        Ok(Some(x))
    }

    pub fn solve(&self, b: &IntMatrix) -> Result<Option<IntegralSolution>> {
        if b.rows() != self.a_rows {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, A has {} rows",
                b.rows(),
                self.a_rows
            )));
        }
        let mut cols = Vec::with_capacity(b.cols());
        for j in 0..b.cols() {
            match self.solve_vec(&b.col(j))? {
                Some(x) => cols.push(x),
                None => return Ok(None),
            }
        }
        Ok(Some(IntegralSolution {
            x: IntMatrix::from_col_vecs(self.a_cols, &cols),
            kernel_basis: self.kernel_basis(),
        }))
    }
}

/// Solves `A X = B` over the integers, or returns `None` when no integral
/// solution exists.
pub fn solve_integral(a: &IntMatrix, b: &IntMatrix) -> Result<Option<IntegralSolution>> {
    IntegralSolver::new(a).solve(b)
}

pub fn int_vec(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    assert_eq!(a.len(), b.len(), "dot product of unequal lengths");
    a.iter()
        .zip(b)
        .fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

pub fn gcd_all(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

// ---- rational side ----

/// Reduced row echelon form; returns the matrix and its pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols() {
        if r == a.rows() {
            break;
        }
        let Some(p) = (r..a.rows()).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a[(r, c)].recip();
        for x in a.row_mut(r) {
            *x *= &inv;
        }
        for i in 0..a.rows() {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..a.cols() {
                let delta = &f * &a[(r, j)];
                a[(i, j)] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(m).1.len()
}

/// Basis of the right kernel over the rationals, one vector per free column,
/// in increasing order of the free column.
pub fn rational_kernel(m: &RatMatrix) -> Vec<Vec<BigRational>> {
    let (r, pivots) = rref(m);
    let mut basis = Vec::new();
    for free in (0..m.cols()).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); m.cols()];
        v[free] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -r[(row, free)].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.rows();
    if n != m.cols() {
        return None;
    }
    let aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m[(i, j)].clone()
        } else if j - n == i {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    });
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
}

pub fn rat_det(m: &RatMatrix) -> BigRational {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap_rows(p, c);
            det = -det;
        }
        det *= &a[(c, c)];
        let inv = a[(c, c)].recip();
        for i in c + 1..n {
            if a[(i, c)].is_zero() {
                continue;
            }
            let f = &a[(i, c)] * &inv;
            for j in c..n {
                let delta = &f * &a[(c, j)];
                a[(i, j)] -= delta;
            }
        }
    }
    det
}

/// Scales a rational vector to a primitive integer vector with the same
/// direction (first nonzero entry keeps its sign).
pub fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = gcd_all(&ints);
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows)
    }

    #[test]
    fn hnf_identity_is_fixed() {
        let (h, u) = hnf(&IntMatrix::identity(2));
        assert!(h.is_identity());
        assert!(u.is_identity());
    }

    #[test]
    fn hnf_two_by_two() {
        let a = m(&[&[2, 4], &[1, 3]]);
        let (h, u) = hnf(&a);
        assert_eq!(u.mul(&a), h);
        assert_eq!(u.det().abs(), BigInt::one());
        // pivots 1 and 2, entry above the second pivot reduced into [0, 2)
        assert_eq!(h, m(&[&[1, 1], &[0, 2]]));
    }

    #[test]
    fn hnf_zero_matrix() {
        let (h, u) = hnf(&IntMatrix::zeros(2, 2));
        assert!(h.is_zero());
        assert!(u.is_identity());
    }

    #[test]
    fn hnf_rectangular_and_rank_deficient() {
        let a = m(&[&[1, 1, 1], &[1, 1, 1], &[2, 2, 3]]);
        let (h, u) = hnf(&a);
        assert_eq!(u.mul(&a), h);
        assert_eq!(u.det().abs(), BigInt::one());
        assert_eq!(h, m(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 0]]));
    }

    #[test]
    fn solve_all_ones() {
        let a = m(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        let b = m(&[&[3], &[3], &[3]]);
        let sol = solve_integral(&a, &b).unwrap().unwrap();
        assert_eq!(a.mul(&sol.x), b);
        assert_eq!(sol.kernel_basis.len(), 2);
        for k in &sol.kernel_basis {
            assert!(a.mul_vec(k).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let a = IntMatrix::identity(3);
        let b = m(&[&[1, -2], &[0, 5], &[7, 7]]);
        let sol = solve_integral(&a, &b).unwrap().unwrap();
        assert_eq!(sol.x, b);
        assert!(sol.kernel_basis.is_empty());
    }

    #[test]
    fn solve_parity_obstruction() {
        assert!(solve_integral(&m(&[&[2]]), &m(&[&[1]])).unwrap().is_none());
    }

    #[test]
    fn solve_inconsistent_rational_system() {
        let a = m(&[&[1, 1], &[1, 1]]);
        let b = m(&[&[1], &[2]]);
        assert!(solve_integral(&a, &b).unwrap().is_none());
    }

    #[test]
    fn solve_dimension_mismatch() {
        let a = m(&[&[1, 1], &[1, 1]]);
        let b = m(&[&[1]]);
        assert!(matches!(
            solve_integral(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bareiss_det() {
        assert_eq!(m(&[&[0, -1], &[1, -1]]).det(), BigInt::from(1));
        assert_eq!(
            m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]]).det(),
            BigInt::from(6)
        );
        assert_eq!(m(&[&[1, 2], &[2, 4]]).det(), BigInt::zero());
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), BigInt::from(-1));
    }

    #[test]
    fn rational_inverse_and_kernel() {
        let a = m(&[&[1, 1], &[1, 0]]).to_rational();
        let inv = inverse(&a).unwrap();
        assert!(a.mul(&inv).is_identity());
        let s = m(&[&[1, 2, 3], &[2, 4, 6]]).to_rational();
        let k = rational_kernel(&s);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(s.mul_vec(v).iter().all(Zero::is_zero));
        }
        assert!(inverse(&m(&[&[1, 2], &[2, 4]]).to_rational()).is_none());
        assert_eq!(
            rat_det(&m(&[&[0, 1], &[1, 0]]).to_rational()),
            -BigRational::one()
        );
    }
}
