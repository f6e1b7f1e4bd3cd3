//! Generators for the matrix families used in the benchmarks.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numat::{DenseMatrix, TridiagonalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelName {
    BdSquares,
    PoissonBlock,
    Toeplitz,
    Triangular,
    Branching,
    Negative3,
    Complex3,
}

impl ModelName {
    pub const ALL: [ModelName; 7] = [
        ModelName::BdSquares,
        ModelName::PoissonBlock,
        ModelName::Toeplitz,
        ModelName::Triangular,
        ModelName::Branching,
        ModelName::Negative3,
        ModelName::Complex3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::BdSquares => "bd_squares",
            ModelName::PoissonBlock => "poisson_block",
            ModelName::Toeplitz => "toeplitz",
            ModelName::Triangular => "triangular",
            ModelName::Branching => "branching",
            ModelName::Negative3 => "negative3",
            ModelName::Complex3 => "complex3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl core::fmt::Display for ModelName {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Killing-rate rule `a_k` of the triangular model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TriangularRule {
    /// `1 / (k + 1)`.
    #[default]
    InvKp1,
    One,
    K,
    K2,
}

impl TriangularRule {
    pub fn rate(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            TriangularRule::InvKp1 => 1.0 / (k + 1.0),
            TriangularRule::One => 1.0,
            TriangularRule::K => k,
            TriangularRule::K2 => k * k,
        }
    }
}

/// Optional family parameters; unset fields take the documented defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ModelParams {
    /// Triangular model, default `inv_kp1`.
    pub rule: Option<TriangularRule>,
    /// Branching model, default `7/4`.
    pub alpha: Option<f64>,
    /// Poisson block order, default equal to the number of blocks.
    pub block: Option<usize>,
    /// Poisson block diagonal, default `4`.
    pub diag: Option<f64>,
    /// Poisson block off-diagonal, default `1`.
    pub off: Option<f64>,
}

/// A named family with its size and parameters.
///
/// `size` is `N` (matrix order `N + 1`) for `bd_squares` and `triangular`,
/// the number of states for `branching`, the order for `toeplitz`, and the
/// number of blocks for `poisson_block`. The fixed 3x3 models ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub name: ModelName,
    #[cfg_attr(feature = "serde", serde(default))]
    pub size: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub params: ModelParams,
}

impl ModelSpec {
    pub fn new(name: ModelName, size: usize) -> Self {
        Self { name, size, params: ModelParams::default() }
    }

    pub fn with_params(mut self, params: ModelParams) -> Self {
        self.params = params;
        self
    }

    pub fn build(&self) -> Result<Model> {
        let p = &self.params;
        Ok(match self.name {
            ModelName::BdSquares => Model::Tridiagonal(bd_squares(self.size)?),
            ModelName::PoissonBlock => Model::Real(poisson_block(
                self.size,
                p.block.unwrap_or(self.size),
                p.diag.unwrap_or(4.0),
                p.off.unwrap_or(1.0),
            )?),
            ModelName::Toeplitz => Model::Real(toeplitz(self.size)?),
            ModelName::Triangular => {
                Model::Real(triangular(self.size, p.rule.unwrap_or_default())?)
            }
            ModelName::Branching => Model::Real(branching(self.size, p.alpha.unwrap_or(1.75))?),
            ModelName::Negative3 => Model::Real(negative3()),
            ModelName::Complex3 => Model::Complex(complex3()),
        })
    }
}

/// A rendered model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Tridiagonal(TridiagonalSystem),
    Real(DenseMatrix<f64>),
    Complex(DenseMatrix<Complex64>),
}

impl Model {
    pub fn order(&self) -> usize {
        match self {
            Model::Tridiagonal(t) => t.order(),
            Model::Real(m) => m.order(),
            Model::Complex(m) => m.order(),
        }
    }

    /// Dense real form; `None` for complex models.
    pub fn to_real(&self) -> Option<DenseMatrix<f64>> {
        match self {
            Model::Tridiagonal(t) => Some(t.to_dense()),
            Model::Real(m) => Some(m.clone()),
            Model::Complex(_) => None,
        }
    }

    pub fn to_complex(&self) -> DenseMatrix<Complex64> {
        match self {
            Model::Complex(m) => m.clone(),
            other => other.to_real().map(|m| m.to_complex()).unwrap_or_else(|| unreachable!()),
        }
    }
}

fn at_least(size: usize, min: usize, msg: &'static str) -> Result<()> {
    if size < min {
        Err(Error::InvalidInput(msg))
    } else {
        Ok(())
    }
}

/// Birth-death Q-matrix with `b_k = (k+1)^2`, `a_k = k^2` and killing
/// `(N+1)^2` at `N` only.
pub fn bd_squares(n: usize) -> Result<TridiagonalSystem> {
    at_least(n, 1, "bd_squares needs N >= 1")?;
    let sq = |k: usize| (k * k) as f64;
    let a = (1..=n).map(sq).collect();
    let b = (1..=n).map(sq).collect();
    let mut c = vec![0.0; n + 1];
    c[n] = sq(n + 1);
    TridiagonalSystem::new(a, b, c)
}

/// Block tridiagonal with `blocks` diagonal blocks `tridiag(off, diag, off)`
/// of order `block` and identity coupling blocks.
pub fn poisson_block(blocks: usize, block: usize, diag: f64, off: f64) -> Result<DenseMatrix<f64>> {
    at_least(blocks, 2, "poisson_block needs at least 2 blocks")?;
    at_least(block, 1, "poisson_block needs block order >= 1")?;
    if !(diag.is_finite() && off.is_finite()) {
        return Err(Error::InvalidInput("poisson_block stencil must be finite"));
    }
    let order = blocks * block;
    let mut data = vec![0.0; order * order];
    for k in 0..blocks {
        for r in 0..block {
            let i = k * block + r;
            data[i * order + i] = diag;
            if r > 0 {
                data[i * order + i - 1] = off;
            }
            if r + 1 < block {
                data[i * order + i + 1] = off;
            }
            if k > 0 {
                data[i * order + i - block] = 1.0;
            }
            if k + 1 < blocks {
                data[i * order + i + block] = 1.0;
            }
        }
    }
    DenseMatrix::new(order, data)
}

/// Eigenvalues of [`poisson_block`], all of them, in no particular order:
/// `diag + 2 off cos(i pi / (block+1)) + 2 cos(j pi / (blocks+1))`.
pub fn poisson_spectrum(blocks: usize, block: usize, diag: f64, off: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(blocks * block);
    for i in 1..=block {
        let ci = libm::cos(i as f64 * core::f64::consts::PI / (block + 1) as f64);
        for j in 1..=blocks {
            let cj = libm::cos(j as f64 * core::f64::consts::PI / (blocks + 1) as f64);
            out.push(diag + 2.0 * off * ci + 2.0 * cj);
        }
    }
    out
}

/// Symmetric Toeplitz matrix with entries `|i - j| + 1`.
pub fn toeplitz(n: usize) -> Result<DenseMatrix<f64>> {
    at_least(n, 2, "toeplitz needs order >= 2")?;
    let data = (0..n * n).map(|k| ((k / n).abs_diff(k % n) + 1) as f64).collect();
    DenseMatrix::new(n, data)
}

/// Lower triangular plus superdiagonal Q-matrix of order `N + 1`: row 0 is
/// `(-1, 1, 0, ...)`, row `i` has `a_i` in column 0, `i + 1` above the
/// diagonal and diagonal `-a_i - (i + 1)`.
pub fn triangular(n: usize, rule: TriangularRule) -> Result<DenseMatrix<f64>> {
    at_least(n, 1, "triangular needs N >= 1")?;
    let order = n + 1;
    let mut data = vec![0.0; order * order];
    data[0] = -1.0;
    data[1] = 1.0;
    for i in 1..order {
        let a = rule.rate(i);
        let up = (i + 1) as f64;
        data[i * order] = a;
        data[i * order + i] = -a - up;
        if i < n {
            data[i * order + i + 1] = up;
        }
    }
    DenseMatrix::new(order, data)
}

/// Branching Q-matrix on `N` states with offspring law `p_0 = alpha/2`,
/// `p_1 = 0`, `p_k = (2 - alpha) / 2^k`. Row `i` (1-based) jumps down with
/// rate `i p_0` and up by `j - i` with rate `i p_{j-i+1}`; the last column
/// collects the closed-form tail `i (2 - alpha) / 2^(N-i)`.
pub fn branching(n: usize, alpha: f64) -> Result<DenseMatrix<f64>> {
    at_least(n, 2, "branching needs N >= 2")?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidInput("branching needs alpha in (0, 2)"));
    }
    let p0 = alpha / 2.0;
    let p = |k: usize| (2.0 - alpha) / libm::pow(2.0, k as f64);
    let mut data = vec![0.0; n * n];
    for r in 0..n {
        let i = (r + 1) as f64;
        if r > 0 {
            data[r * n + r - 1] = i * p0;
        }
        data[r * n + r] = if r + 1 == n { -i * p0 } else { -i };
        for c in r + 1..n {
            data[r * n + c] = if c + 1 == n {
                i * (2.0 - alpha) / libm::pow(2.0, (n - 1 - r) as f64)
            } else {
                i * p(c - r + 1)
            };
        }
    }
    DenseMatrix::new(n, data)
}

/// Real 3x3 matrix with negative off-diagonal entries.
pub fn negative3() -> DenseMatrix<f64> {
    DenseMatrix::from_rows(&[&[-1.0, 8.0, -1.0], &[8.0, 8.0, 8.0], &[-1.0, 8.0, 8.0]])
        .unwrap_or_else(|_| unreachable!())
}

/// Complex 3x3 matrix, entries as printed to four decimals.
pub fn complex3() -> DenseMatrix<Complex64> {
    let c = Complex64::new;
    let data = vec![
        c(0.75, -1.125),
        c(0.5882, -0.1471),
        c(1.0735, 1.4191),
        c(-0.5, -1.0),
        c(2.1765, 0.7059),
        c(2.1471, -0.4118),
        c(2.75, -0.125),
        c(0.5882, -0.1471),
        c(-0.9265, 0.4191),
    ];
    DenseMatrix::new(3, data).unwrap_or_else(|_| unreachable!())
}

/// Matrix with denominator 136 whose four-decimal rounding is
/// [`complex3`]; its spectrum is exactly `{3, -2 - i, 1 + i}`.
pub fn complex3_rational() -> DenseMatrix<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re / 136.0, im / 136.0);
    let data = vec![
        c(102.0, -153.0),
        c(80.0, -20.0),
        c(146.0, 193.0),
        c(-68.0, -136.0),
        c(296.0, 96.0),
        c(292.0, -56.0),
        c(374.0, -17.0),
        c(80.0, -20.0),
        c(-126.0, 57.0),
    ];
    DenseMatrix::new(3, data).unwrap_or_else(|_| unreachable!())
}
