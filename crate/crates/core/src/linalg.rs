//! Dense exact linear algebra: inversion, determinants, and a two-phase simplex.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Field, OrderedField};

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn scale(&self, c: &T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Singular);
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[(r, col)].is_zero()).ok_or(Error::Singular)?;
            a.swap_rows(piv, col);
            inv.swap_rows(piv, col);
            let s = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() * s.clone();
                inv[(col, j)] = inv[(col, j)].clone() * s.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    a[(r, j)] = a[(r, j)].clone() - f.clone() * a[(col, j)].clone();
                    inv[(r, j)] = inv[(r, j)].clone() - f.clone() * inv[(col, j)].clone();
                }
            }
        }
        Ok(inv)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        Ok(self.inverse()?.mul_vec(b))
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return T::zero();
            };
            if piv != col {
                a.swap_rows(piv, col);
                det = -det;
            }
            let d = a[(col, col)].clone();
            det = det * d.clone();
            let dinv = d.inv();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone() * dinv.clone();
                for j in col..n {
                    a[(r, j)] = a[(r, j)].clone() - f.clone() * a[(col, j)].clone();
                }
            }
        }
        det
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = (0..self.rows).map(|i| &self.data[i * self.cols..(i + 1) * self.cols]).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Determinant of an integer matrix modulo a prime.
pub fn det_mod_prime(m: &[Vec<i64>], prime: u64) -> u64 {
    let n = m.len();
    let q = prime as u128;
    let red = |x: i64| -> u128 { (x as i128).rem_euclid(prime as i128) as u128 };
    let mut a: Vec<Vec<u128>> = m.iter().map(|row| row.iter().map(|&x| red(x)).collect()).collect();
    let pow = |mut b: u128, mut e: u128| {
        let mut r = 1u128;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % q;
            }
            b = b * b % q;
            e >>= 1;
        }
        r
    };
    let mut det = 1u128;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(piv, col);
            det = (q - det) % q;
        }
        det = det * a[col][col] % q;
        let inv = pow(a[col][col], q - 2);
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let f = a[r][col] * inv % q;
            for j in col..n {
                let sub = f * a[col][j] % q;
                a[r][j] = (a[r][j] + q - sub) % q;
            }
        }
    }
    det as u64
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

/// Maximize `c·x` subject to `A x = b`, `x >= 0`, by the two-phase simplex method
/// with Bland's rule (so it terminates on degenerate problems).
pub fn simplex<T: OrderedField>(a: &Matrix<T>, b: &[T], c: &[T]) -> LpOutcome<T> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let width = n + m + 1;
    // tableau rows: constraints, with artificial columns n..n+m and rhs last
    let mut t: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![T::zero(); width];
        for j in 0..n {
            row[j] = if flip { -a[(i, j)].clone() } else { a[(i, j)].clone() };
        }
        row[n + i] = T::one();
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut obj = vec![T::zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] = obj[j].clone() - row[j].clone();
        }
        obj[width - 1] = obj[width - 1].clone() - row[width - 1].clone();
    }
    t.push(obj);
    if run_simplex(&mut t, &mut basis, n + m).is_err() {
        // phase one is bounded below by zero
        unreachable!("phase one cannot be unbounded");
    }
    if !t[m][width - 1].is_zero() {
        return LpOutcome::Infeasible;
    }
    // drive artificial variables out of the basis
    let mut i = 0;
    while i < basis.len() {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            } else {
                t.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    let rows = basis.len();
    for row in t.iter_mut() {
        let rhs = row[width - 1].clone();
        row.truncate(n);
        row.push(rhs);
    }
    let mut obj: Vec<T> = c.iter().map(|v| -v.clone()).collect();
    obj.push(T::zero());
    for (i, &bj) in basis.iter().enumerate() {
        let cb = c[bj].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..=n {
            obj[j] = obj[j].clone() + cb.clone() * t[i][j].clone();
        }
    }
    t[rows] = obj;
    t.truncate(rows + 1);
    if run_simplex(&mut t, &mut basis, n).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (i, &bj) in basis.iter().enumerate() {
        x[bj] = t[i][n].clone();
    }
    LpOutcome::Optimal { x, value: t[rows][n].clone() }
}

struct Unbounded;

fn run_simplex<T: OrderedField>(t: &mut [Vec<T>], basis: &mut [usize], ncols: usize) -> std::result::Result<(), Unbounded> {
    let m = basis.len();
    let rhs = t[0].len() - 1;
    loop {
        let Some(enter) = (0..ncols).find(|&j| t[m][j].is_negative()) else {
            return Ok(());
        };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = t[i][rhs].clone() / t[i][enter].clone();
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((row, _)) = leave else {
            return Err(Unbounded);
        };
        pivot(t, basis, row, enter);
    }
}

fn pivot<T: Field>(t: &mut [Vec<T>], basis: &mut [usize], row: usize, col: usize) {
    let inv = t[row][col].inv();
    for v in t[row].iter_mut() {
        *v = v.clone() * inv.clone();
    }
    let prow = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&prow) {
            *v = v.clone() - f.clone() * pv.clone();
        }
    }
    basis[row] = col;
}

/// Is `target` a nonnegative combination of `generators`? Returns the coefficients.
pub fn cone_combination<T: OrderedField>(generators: &[Vec<T>], target: &[T]) -> Result<Option<Vec<T>>> {
    let dim = target.len();
    let k = generators.len();
    let mut a = Matrix::zeros(dim, k);
    for (j, g) in generators.iter().enumerate() {
        if g.len() != dim {
            return Err(Error::OutOfRange("generator dimension".into()));
        }
        for i in 0..dim {
            a[(i, j)] = g[i].clone();
        }
    }
    match simplex(&a, target, &vec![T::zero(); k]) {
        LpOutcome::Optimal { x, .. } => Ok(Some(x)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Unbounded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::Rational;

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    #[test]
    fn inverse_of_hilbert_inert_matrix() {
        let a = m(&[&[2, 0, -1], &[1, 2, 0], &[0, -1, 2]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(3));
        assert_eq!(a.det(), int(9));
        assert_eq!(inv[(0, 0)], rat(4, 9));
    }

    #[test]
    fn singular_detected() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(a.inverse(), Err(Error::Singular));
        assert_eq!(a.det(), int(0));
    }

    #[test]
    fn modular_determinant() {
        let a = vec![vec![2, 0, -1], vec![1, 2, 0], vec![0, -1, 2]];
        assert_eq!(det_mod_prime(&a, 7), 2);
        assert_eq!(det_mod_prime(&a, 3), 0);
    }

    #[test]
    fn simplex_outcomes() {
        // max x + y s.t. x + 2y = 4, x,y >= 0
        let a = m(&[&[1, 2]]);
        match simplex(&a, &[int(4)], &[int(1), int(1)]) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(4));
                assert_eq!(x, vec![int(4), int(0)]);
            }
            other => panic!("{other:?}"),
        }
        // x - y = 1 unbounded for max x
        let a = m(&[&[1, -1]]);
        assert_eq!(simplex(&a, &[int(1)], &[int(1), int(0)]), LpOutcome::Unbounded);
        // x + y = -1 infeasible
        let a = m(&[&[1, 1]]);
        assert_eq!(simplex(&a, &[int(-1)], &[int(0), int(0)]), LpOutcome::Infeasible);
    }

    #[test]
    fn cone_membership() {
        let gens = vec![vec![int(1), int(0)], vec![int(1), int(1)]];
        assert!(cone_combination(&gens, &[int(3), int(1)]).unwrap().is_some());
        assert!(cone_combination(&gens, &[int(0), int(1)]).unwrap().is_none());
    }

    #[test]
    fn generic_over_f64() {
        let a = Matrix::from_rows(vec![vec![4.0, 7.0], vec![2.0, 6.0]]);
        let inv = a.inverse().unwrap();
        let id = a.mul(&inv);
        assert!((id[(0, 0)] - 1.0f64).abs() < 1e-12 && id[(0, 1)].abs() < 1e-12);
    }
}
