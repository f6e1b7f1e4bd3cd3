//! Dense and tridiagonal matrices, positive measures, and the elementwise
//! primitives every algorithm is built from.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseMatrix<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(order: usize, data: Vec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Empty);
        }
        if data.len() != order * order {
            return Err(Error::DimensionMismatch { expected: order * order, found: data.len() });
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { order, data })
    }

    pub fn zeros(order: usize) -> Self {
        assert!(order > 0, "matrix order must be positive");
        Self { order, data: vec![T::zero(); order * order] }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let order = rows.len();
        let mut data = Vec::with_capacity(order * order);
        for row in rows {
            if row.len() != order {
                return Err(Error::DimensionMismatch { expected: order, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(order, data)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.order {
            m[(i, i)] += shift;
        }
        m
    }

    pub fn negated(&self) -> Self {
        Self { order: self.order, data: self.data.iter().map(|&x| -x).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    /// True when every entry off the three central diagonals is zero.
    pub fn is_tridiagonal(&self) -> bool {
        let n = self.order;
        (0..n).all(|i| {
            (0..n).all(|j| i.abs_diff(j) <= 1 || self[(i, j)] == T::zero())
        })
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.order;
        (0..n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.order, v.len())?;
        Ok(self.matvec_unchecked(v))
    }

    pub(crate) fn matvec_unchecked(&self, v: &[T]) -> Vec<T> {
        self.data
            .chunks_exact(self.order)
            .map(|row| {
                let mut acc = T::zero();
                for (&a, &x) in row.iter().zip(v) {
                    acc += a * x;
                }
                acc
            })
            .collect()
    }
}

impl DenseMatrix<f64> {
    /// Largest off-diagonal violation of nonnegativity, if any.
    pub fn first_negative_offdiagonal(&self) -> Option<(usize, usize)> {
        let n = self.order;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && self[(i, j)] < 0.0)
    }

    pub fn to_complex(&self) -> DenseMatrix<num_complex::Complex64> {
        DenseMatrix {
            order: self.order,
            data: self.data.iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect(),
        }
    }
}

impl<T> core::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.order + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.order + j]
    }
}

/// Strictly positive weights defining the `L^2(mu)` geometry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Measure(Vec<f64>);

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if w <= 0.0 {
                return Err(Error::NonPositive { what: "measure weight", index });
            }
        }
        Ok(Self(weights))
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Tridiagonal Q-matrix given by its three sequences.
///
/// Row `i` reads `(a_i, -(a_i + b_i + c_i), b_i)` with `a_0 = 0` and
/// `b_N = 0`, so the last row is `(a_N, -(a_N + c_N))`. The diagonal is never
/// stored.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TridiagonalSystem {
    /// `a_1..=a_N`
    sub: Vec<f64>,
    /// `b_0..b_N` (exclusive)
    sup: Vec<f64>,
    /// `c_0..=c_N`
    kill: Vec<f64>,
}

impl TridiagonalSystem {
    /// `a` holds `a_1..=a_N`, `b` holds `b_0..=b_{N-1}`, `c` holds `c_0..=c_N`.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        check_len(n, b.len())?;
        check_len(n + 1, c.len())?;
        for (index, &x) in a.iter().chain(&b).chain(&c).enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        if let Some(i) = a.iter().position(|&x| x <= 0.0) {
            return Err(Error::NonPositive { what: "a", index: i + 1 });
        }
        if let Some(i) = b.iter().position(|&x| x <= 0.0) {
            return Err(Error::NonPositive { what: "b", index: i });
        }
        if let Some(i) = c.iter().position(|&x| x < 0.0) {
            return Err(Error::NonPositive { what: "c (nonnegative)", index: i });
        }
        Ok(Self { sub: a, sup: b, kill: c })
    }

    /// Index of the last state, `N`. The matrix order is `N + 1`.
    #[inline]
    pub fn n(&self) -> usize {
        self.sub.len()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.sub.len() + 1
    }

    /// `a_i`, zero for `i = 0`.
    #[inline]
    pub fn a(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.sub[i - 1]
        }
    }

    /// `b_i`, zero for `i = N`.
    #[inline]
    pub fn b(&self, i: usize) -> f64 {
        self.sup.get(i).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn c(&self, i: usize) -> f64 {
        self.kill[i]
    }

    pub fn a_seq(&self) -> &[f64] {
        &self.sub
    }

    pub fn b_seq(&self) -> &[f64] {
        &self.sup
    }

    pub fn c_seq(&self) -> &[f64] {
        &self.kill
    }

    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        -(self.a(i) + self.b(i) + self.c(i))
    }

    /// Whether some killing rate is positive.
    pub fn has_killing(&self) -> bool {
        self.kill.iter().any(|&c| c > 0.0)
    }

    pub fn to_dense(&self) -> DenseMatrix<f64> {
        let order = self.order();
        let mut m = DenseMatrix::zeros(order);
        for i in 0..order {
            if i > 0 {
                m[(i, i - 1)] = self.a(i);
            }
            m[(i, i)] = self.diag(i);
            if i + 1 < order {
                m[(i, i + 1)] = self.b(i);
            }
        }
        m
    }

    /// Reads the three sequences off a dense tridiagonal matrix, with
    /// `c_i = -(row sum)`. Fails when the matrix is not a tridiagonal
    /// Q-matrix with positive neighbour rates.
    pub fn from_dense(m: &DenseMatrix<f64>) -> Result<Self> {
        if !m.is_tridiagonal() {
            return Err(Error::InvalidInput("matrix is not tridiagonal"));
        }
        let order = m.order();
        if order < 2 {
            return Err(Error::InvalidInput("tridiagonal system needs order >= 2"));
        }
        let a = (1..order).map(|i| m[(i, i - 1)]).collect();
        let b = (0..order - 1).map(|i| m[(i, i + 1)]).collect();
        let c = (0..order)
            .map(|i| {
                let s: f64 = m.row(i).iter().sum();
                let scale: f64 = m.row(i).iter().map(|x| x.abs()).sum();
                // rows summing to zero up to rounding carry no killing
                if s.abs() <= 1e-14 * scale {
                    0.0
                } else {
                    -s
                }
            })
            .collect();
        Self::new(a, b, c)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.order(), v.len())?;
        Ok(self.matvec_unchecked(v))
    }

    /// Same summation order per row as the dense expansion.
    pub(crate) fn matvec_unchecked(&self, v: &[f64]) -> Vec<f64> {
        let order = self.order();
        (0..order)
            .map(|i| {
                let mut acc = 0.0;
                if i > 0 {
                    acc += self.a(i) * v[i - 1];
                }
                acc += self.diag(i) * v[i];
                if i + 1 < order {
                    acc += self.b(i) * v[i + 1];
                }
                acc
            })
            .collect()
    }
}

#[inline]
pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `sum_i mu_i conj(u_i) v_i`.
pub fn weighted_inner<T: Scalar>(u: &[T], v: &[T], mu: &Measure) -> Result<T> {
    check_len(u.len(), v.len())?;
    check_len(u.len(), mu.len())?;
    let mut acc = T::zero();
    for ((&x, &y), &w) in u.iter().zip(v).zip(mu.weights()) {
        acc += (x.conj() * y).scale(w);
    }
    Ok(acc)
}

pub fn weighted_norm<T: Scalar>(v: &[T], mu: &Measure) -> Result<f64> {
    check_len(v.len(), mu.len())?;
    let s: f64 = v
        .iter()
        .zip(mu.weights())
        .map(|(&x, &w)| {
            let m = x.modulus();
            w * m * m
        })
        .sum();
    Ok(libm::sqrt(s))
}

pub fn l2_norm<T: Scalar>(v: &[T]) -> f64 {
    libm::sqrt(v.iter().map(|x| x.modulus() * x.modulus()).sum())
}

pub fn l1_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).sum()
}

pub fn inf_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.modulus()))
}

/// Index and value of `max_i Re((A v)_i) / v_i` for a strictly positive
/// real `v`. The lowest index wins ties.
pub fn max_ratio_at<T: Scalar>(av: &[T], v: &[T]) -> Result<(usize, f64)> {
    check_len(v.len(), av.len())?;
    if v.is_empty() {
        return Err(Error::Empty);
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (&y, &x)) in av.iter().zip(v).enumerate() {
        if x.im() != 0.0 || x.re() <= 0.0 {
            return Err(Error::NonPositive { what: "ratio denominator", index: i });
        }
        let r = y.re() / x.re();
        if r > best.1 {
            best = (i, r);
        }
    }
    Ok(best)
}

/// `max_i (A v)_i / v_i`; for complex matrices the real part of `A v` is used.
pub fn max_ratio<T: Scalar>(a: &DenseMatrix<T>, v: &[T]) -> Result<f64> {
    let av = a.matvec(v)?;
    max_ratio_at(&av, v).map(|(_, r)| r)
}

pub fn row_sums<T: Scalar>(a: &DenseMatrix<T>) -> Vec<T> {
    (0..a.order())
        .map(|i| {
            let mut s = T::zero();
            for &x in a.row(i) {
                s += x;
            }
            s
        })
        .collect()
}

/// Shifts `A` by its maximal row sum `m`, returning `(A - m I, m)`.
/// The result has nonpositive row sums, at least one of them zero.
pub fn shift_to_qc(a: &DenseMatrix<f64>) -> (DenseMatrix<f64>, f64) {
    let m = row_sums(a).into_iter().fold(f64::NEG_INFINITY, f64::max);
    (a.shifted(-m), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bd1() -> TridiagonalSystem {
        TridiagonalSystem::new(vec![1.0], vec![1.0], vec![0.0, 4.0]).unwrap()
    }

    #[test]
    fn identity_matvec() {
        let id = DenseMatrix::<f64>::identity(3);
        assert_eq!(id.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn q_matrix_row_sums_vanish_except_last() {
        assert_eq!(bd1().matvec(&[1.0, 1.0]).unwrap(), vec![0.0, -4.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let id = DenseMatrix::<f64>::identity(3);
        assert_eq!(
            id.matvec(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(bd1().matvec(&[1.0]).is_err());
    }

    #[test]
    fn construction_rejects_non_finite() {
        assert_eq!(
            DenseMatrix::new(1, vec![f64::NAN]),
            Err(Error::NonFinite { index: 0 })
        );
        assert!(Measure::new(vec![1.0, 0.0]).is_err());
        assert!(TridiagonalSystem::new(vec![0.0], vec![1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn weighted_inner_examples() {
        let ones = Measure::uniform(2);
        assert_eq!(weighted_inner(&[1.0, 1.0], &[1.0, 1.0], &ones).unwrap(), 2.0);
        let mu = Measure::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(weighted_inner(&[1.0, 0.0], &[0.0, 1.0], &mu).unwrap(), 0.0);
        assert_eq!(weighted_inner(&[1.0, 2.0], &[1.0, 2.0], &mu).unwrap(), 13.0);
        assert!((weighted_norm(&[1.0, 2.0], &mu).unwrap() - 13f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weighted_inner_conjugates_left_argument() {
        use num_complex::Complex64 as C;
        let mu = Measure::uniform(1);
        let i = C::new(0.0, 1.0);
        assert_eq!(weighted_inner(&[i], &[i], &mu).unwrap(), C::new(1.0, 0.0));
    }

    #[test]
    fn max_ratio_examples() {
        let a = DenseMatrix::from_rows(&[&[-1.0, 8.0, -1.0], &[8.0, 8.0, 8.0], &[-1.0, 8.0, 8.0]])
            .unwrap();
        let u = vec![1.0 / 3f64.sqrt(); 3];
        assert!((max_ratio(&a, &u).unwrap() - 24.0).abs() < 1e-12);
        let id = DenseMatrix::<f64>::identity(3);
        assert_eq!(max_ratio(&id, &[0.2, 3.0, 1.0]).unwrap(), 1.0);
        assert!(max_ratio(&id, &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn max_ratio_ties_take_lowest_index() {
        assert_eq!(max_ratio_at(&[2.0, 2.0], &[1.0, 1.0]).unwrap(), (0, 2.0));
    }

    #[test]
    fn shift_to_qc_examples() {
        let ones = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let (qc, m) = shift_to_qc(&ones);
        assert_eq!(m, 2.0);
        assert_eq!(qc, DenseMatrix::from_rows(&[&[-1.0, 1.0], &[1.0, -1.0]]).unwrap());
        let q = DenseMatrix::from_rows(&[&[-1.0, 1.0], &[2.0, -2.0]]).unwrap();
        let (qc, m) = shift_to_qc(&q);
        assert_eq!(m, 0.0);
        assert_eq!(qc, q);
    }

    #[test]
    fn from_dense_roundtrip() {
        let t = TridiagonalSystem::new(vec![1.0, 2.0], vec![3.0, 0.5], vec![0.25, 0.0, 7.0])
            .unwrap();
        assert_eq!(TridiagonalSystem::from_dense(&t.to_dense()).unwrap(), t);
    }
}
