//! Linear solvers behind every inverse and Rayleigh quotient step: dense LU
//! with partial pivoting and a tridiagonal eliminator that pivots between
//! adjacent rows.
//!
//! Both run in the near-singular regime on purpose. Only a pivot below
//! [`PIVOT_THRESHOLD`] in absolute value is treated as breakdown.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numat::{check_len, DenseMatrix, TridiagonalSystem};
use crate::scalar::Scalar;

pub const PIVOT_THRESHOLD: f64 = 1e-30;

/// Packed `P A = L U` factorization.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    order: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    even: bool,
    rcond: f64,
}

impl<T: Scalar> LuFactors<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `perm[i]` is the original row stored in row `i` of `P A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// True for an even number of row interchanges.
    pub fn parity(&self) -> bool {
        self.even
    }

    /// Heuristic reciprocal condition number `min |u_ii| / max |u_ii|`.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn l(&self) -> DenseMatrix<T> {
        let n = self.order;
        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l[(i, j)] = self.lu[i * n + j];
            }
        }
        l
    }

    pub fn u(&self) -> DenseMatrix<T> {
        let n = self.order;
        let mut u = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                u[(i, j)] = self.lu[i * n + j];
            }
        }
        u
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.order;
        check_len(n, rhs.len())?;
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let mut acc = x[i];
            for (&l, &xj) in row.iter().zip(&x[..i]) {
                acc -= l * xj;
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { index });
        }
        Ok(x)
    }
}

pub fn lu_factor<T: Scalar>(a: &DenseMatrix<T>) -> Result<LuFactors<T>> {
    factor_in_place(a.order(), a.as_slice().to_vec())
}

pub fn lu_solve<T: Scalar>(factors: &LuFactors<T>, rhs: &[T]) -> Result<Vec<T>> {
    factors.solve(rhs)
}

/// Factor-and-solve convenience for one right-hand side.
pub fn solve_dense<T: Scalar>(a: &DenseMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    lu_factor(a)?.solve(rhs)
}

fn factor_in_place<T: Scalar>(n: usize, mut lu: Vec<T>) -> Result<LuFactors<T>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut even = true;
    let (mut umin, mut umax) = (f64::INFINITY, 0.0f64);
    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, lu[i * n + k].modulus()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if !(pmag >= PIVOT_THRESHOLD) {
            return Err(Error::Singular { index: k });
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            even = !even;
        }
        umin = umin.min(pmag);
        umax = umax.max(pmag);
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        let pivot = pivot_row[k];
        for row in tail.chunks_exact_mut(n) {
            let f = row[k] / pivot;
            row[k] = f;
            if f == T::zero() {
                continue;
            }
            for (x, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x -= f * u;
            }
        }
    }
    Ok(LuFactors { order: n, lu, perm, even, rcond: umin / umax })
}

/// General tridiagonal matrix: `sub[i]` sits at `(i + 1, i)` and `sup[i]` at
/// `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn new(sub: Vec<T>, diag: Vec<T>, sup: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Empty);
        }
        check_len(diag.len() - 1, sub.len())?;
        check_len(diag.len() - 1, sup.len())?;
        Ok(Self { sub, diag, sup })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.order();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i + 1, i)] = self.sub[i];
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.sub
            .iter()
            .chain(&self.diag)
            .chain(&self.sup)
            .fold(0.0, |m, x| m.max(x.modulus()))
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        let n = self.order();
        check_len(n, v.len())?;
        Ok((0..n)
            .map(|i| {
                let mut acc = T::zero();
                if i > 0 {
                    acc += self.sub[i - 1] * v[i - 1];
                }
                acc += self.diag[i] * v[i];
                if i + 1 < n {
                    acc += self.sup[i] * v[i + 1];
                }
                acc
            })
            .collect())
    }
}

impl Tridiagonal<f64> {
    /// `-Q - z I` for the Q-matrix described by `t`.
    pub fn negated_shifted(t: &TridiagonalSystem, z: f64) -> Self {
        let order = t.order();
        Self {
            sub: (1..order).map(|i| -t.a(i)).collect(),
            diag: (0..order).map(|i| -t.diag(i) - z).collect(),
            sup: (0..order - 1).map(|i| -t.b(i)).collect(),
        }
    }
}

/// Solves `T w = rhs` by elimination, swapping adjacent rows whenever the
/// subdiagonal entry dominates the current pivot.
pub fn tridiag_solve<T: Scalar>(t: &Tridiagonal<T>, rhs: &[T]) -> Result<Vec<T>> {
    let n = t.order();
    check_len(n, rhs.len())?;
    // Row i of U has entries at columns i, i+1, i+2.
    let mut u = vec![[T::zero(); 3]; n];
    let mut y = vec![T::zero(); n];
    let mut cur = [t.diag[0], if n > 1 { t.sup[0] } else { T::zero() }, T::zero()];
    let mut cur_b = rhs[0];
    for i in 0..n - 1 {
        let next = [
            t.sub[i],
            t.diag[i + 1],
            if i + 2 < n { t.sup[i + 1] } else { T::zero() },
        ];
        let next_b = rhs[i + 1];
        let ((p, pb), (o, ob)) = if cur[0].modulus() >= next[0].modulus() {
            ((cur, cur_b), (next, next_b))
        } else {
            ((next, next_b), (cur, cur_b))
        };
        if !(p[0].modulus() >= PIVOT_THRESHOLD) {
            return Err(Error::Breakdown { index: i });
        }
        let f = o[0] / p[0];
        u[i] = p;
        y[i] = pb;
        cur = [o[1] - f * p[1], o[2] - f * p[2], T::zero()];
        cur_b = ob - f * pb;
    }
    if !(cur[0].modulus() >= PIVOT_THRESHOLD) {
        return Err(Error::Breakdown { index: n - 1 });
    }
    u[n - 1] = cur;
    y[n - 1] = cur_b;

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        if i + 1 < n {
            acc -= u[i][1] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u[i][2] * x[i + 2];
        }
        x[i] = acc / u[i][0];
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Breakdown { index });
    }
    Ok(x)
}
