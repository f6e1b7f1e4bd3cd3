//! Efficient initials for tridiagonal Q-matrices.
//!
//! The pipeline is: H-transform the killing rates `c_0..c_{N-1}` away,
//! build the measure `mu` and the tail `phi` of the transformed chain, derive
//! `(v_0, z_0)` from them, and run a Rayleigh quotient iteration in
//! `L^2(mu)` whose linear solves cost O(N). The pair of `-Q^c` is mapped back
//! through `Diag(h)` and the row-sum shift at the end.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::iterate::{Clock, Driver, EigenpairResult, Geometry, Normalization, Run, StopRule, Update};
use crate::linsolve::{tridiag_solve, Tridiagonal};
use crate::numat::{check_len, Measure, TridiagonalSystem};

/// Result of the H-transform `Q~ = Diag(h)^-1 Q^c Diag(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTransform {
    /// `h_0 = 1`, `h_n = h_{n-1} r_{n-1}`.
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    /// Transformed system: `c_0..c_{N-1}` are zero, `c_N > 0`.
    pub transformed: TridiagonalSystem,
    /// `c_N` of the untransformed system.
    pub original_c_n: f64,
}

/// Computes the near-harmonic `h` and the transformed system.
pub fn compute_h(t: &TridiagonalSystem) -> Result<HTransform> {
    if !t.has_killing() {
        return Err(Error::InvalidInput("at least one killing rate c_i must be positive"));
    }
    let n = t.n();
    if (0..n).all(|k| t.c(k) == 0.0) {
        return Ok(HTransform {
            h: vec![1.0; n + 1],
            r: vec![1.0; n],
            transformed: t.clone(),
            original_c_n: t.c(n),
        });
    }
    let mut r = Vec::with_capacity(n);
    r.push(1.0 + t.c(0) / t.b(0));
    for k in 1..n {
        let prev = r[k - 1];
        r.push(1.0 + (t.a(k) + t.c(k)) / t.b(k) - t.a(k) / (t.b(k) * prev));
    }
    if let Some(index) = r.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveR { index });
    }
    let mut h = Vec::with_capacity(n + 1);
    h.push(1.0);
    for k in 1..=n {
        h.push(h[k - 1] * r[k - 1]);
    }
    if let Some(index) = h.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveH { index });
    }
    let a: Vec<f64> = (1..=n).map(|i| t.a(i) * h[i - 1] / h[i]).collect();
    let b: Vec<f64> = (0..n).map(|i| t.b(i) * h[i + 1] / h[i]).collect();
    let c_n = t.a(n) + t.c(n) - a[n - 1];
    if !(c_n > 0.0) {
        return Err(Error::NonPositive { what: "transformed c_N", index: n });
    }
    let mut c = vec![0.0; n + 1];
    c[n] = c_n;
    Ok(HTransform { h, r, transformed: TridiagonalSystem::new(a, b, c)?, original_c_n: t.c(n) })
}

/// Initials built from the transformed system, with `b_N` standing for its
/// killing rate `c_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub mu: Measure,
    /// `phi_n = sum_{k >= n} 1 / (mu_k b_k)`, strictly decreasing.
    pub phi: Vec<f64>,
    /// `sqrt(phi)`.
    pub v0_tilde: Vec<f64>,
    /// `v0_tilde` normalized in `L^2(mu)`.
    pub v0: Vec<f64>,
    pub delta1: f64,
    /// `(v_0, -Q v_0)_mu`.
    pub rayleigh: f64,
}

impl InitialData {
    /// The shift used for the tabulated birth-death runs.
    pub fn z0_combined(&self) -> f64 {
        z0_combination(self.delta1, self.rayleigh)
    }
}

/// `b_i` of the transformed system with `b_N := c_N`.
fn rate_b(q: &TridiagonalSystem, i: usize) -> f64 {
    if i == q.n() {
        q.c(i)
    } else {
        q.b(i)
    }
}

fn check_transformed(q: &TridiagonalSystem) -> Result<()> {
    let n = q.n();
    if (0..n).any(|k| q.c(k) != 0.0) {
        return Err(Error::InvalidInput("initials need c_0..c_{N-1} = 0 (apply the H-transform)"));
    }
    if !(q.c(n) > 0.0) {
        return Err(Error::InvalidInput("initials need c_N > 0"));
    }
    Ok(())
}

/// `mu_0 = 1`, `mu_n = mu_{n-1} b_{n-1} / a_n`.
pub fn measure(q: &TridiagonalSystem) -> Result<Measure> {
    let n = q.n();
    let mut mu = Vec::with_capacity(n + 1);
    mu.push(1.0);
    for k in 1..=n {
        mu.push(mu[k - 1] * q.b(k - 1) / q.a(k));
    }
    if let Some(index) = mu.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveMu { index });
    }
    Measure::new(mu)
}

/// Tail sums `phi_n = sum_{k=n}^N 1 / (mu_k b_k)`.
pub fn tail(q: &TridiagonalSystem, mu: &Measure) -> Vec<f64> {
    let n = q.n();
    let w = mu.weights();
    let mut phi = vec![0.0; n + 1];
    let mut acc = 0.0;
    for k in (0..=n).rev() {
        acc += 1.0 / (w[k] * rate_b(q, k));
        phi[k] = acc;
    }
    phi
}

/// `max_n [ sqrt(phi_n) sum_{k<=n} mu_k sqrt(phi_k)
///        + sum_{j>n} mu_j phi_j^{3/2} / sqrt(phi_n) ]`, in O(N).
pub fn delta(phi: &[f64], mu: &[f64]) -> f64 {
    let n = phi.len();
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + mu[j] * phi[j] * libm::sqrt(phi[j]);
    }
    let mut prefix = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        let s = libm::sqrt(phi[k]);
        prefix += mu[k] * s;
        best = best.max(s * prefix + suffix[k + 1] / s);
    }
    best
}

pub fn compute_initials(q: &TridiagonalSystem) -> Result<InitialData> {
    check_transformed(q)?;
    let mu = measure(q)?;
    let phi = tail(q, &mu);
    let v0_tilde: Vec<f64> = phi.iter().map(|&p| libm::sqrt(p)).collect();
    let norm = crate::numat::weighted_norm(&v0_tilde, &mu)?;
    let v0: Vec<f64> = v0_tilde.iter().map(|x| x / norm).collect();
    let delta1 = delta(&phi, mu.weights());
    let qv = q.matvec_unchecked(&v0);
    let rayleigh = -crate::numat::weighted_inner(&v0, &qv, &mu)?;
    Ok(InitialData { mu, phi, v0_tilde, v0, delta1, rayleigh })
}

/// Convex combination `7 / (8 delta_1) + rq / 8` of the variational lower
/// estimate and the Rayleigh quotient of `v_0`. The weights do not depend
/// on the matrix size.
pub fn z0_combination(delta1: f64, rayleigh: f64) -> f64 {
    7.0 / (8.0 * delta1) + rayleigh / 8.0
}

/// O(N) solver for `(-Q - z I) w = v` on a transformed system.
///
/// `w = A + x B`, where `A` and `B` are swept forward from the left end with
/// `w(s) - w(s-1) = -(1 / (mu_{s-1} b_{s-1})) sum_{j<s} mu_j (v_j + z w_j)`
/// and `x` is fixed by the last row. Accurate for shifts around the smallest
/// eigenvalue; far above it the sweep amplifies rounding.
#[derive(Debug, Clone)]
pub struct ExplicitSolver {
    mu: Vec<f64>,
    /// `1 / (mu_k b_k)`, the increments of `kappa`.
    flux: Vec<f64>,
    b_n: f64,
}

impl ExplicitSolver {
    pub fn new(q: &TridiagonalSystem, mu: &Measure) -> Result<Self> {
        check_transformed(q)?;
        check_len(q.order(), mu.len())?;
        let w = mu.weights();
        let flux = (0..q.order()).map(|k| 1.0 / (w[k] * rate_b(q, k))).collect();
        Ok(Self { mu: w.to_vec(), flux, b_n: q.c(q.n()) })
    }

    pub fn solve(&self, z: f64, v: &[f64]) -> Result<Vec<f64>> {
        let order = self.mu.len();
        check_len(order, v.len())?;
        let mu = &self.mu;
        let mut a = vec![0.0; order];
        let mut b = vec![0.0; order];
        b[0] = 1.0;
        let (mut s1, mut t1) = (0.0, 0.0);
        for s in 1..order {
            let j = s - 1;
            s1 += mu[j] * (v[j] + z * a[j]);
            t1 += mu[j] * b[j];
            a[s] = a[j] - self.flux[j] * s1;
            b[s] = b[j] - z * self.flux[j] * t1;
        }
        let last = order - 1;
        let num = s1 + mu[last] * (v[last] + z * a[last]) - mu[last] * self.b_n * a[last];
        let mass_b = t1 + mu[last] * b[last];
        let lead = mu[last] * self.b_n * b[last];
        let den = lead - z * mass_b;
        let scale = lead.abs() + (z * mass_b).abs();
        if !(den.abs() >= 1e-30 * scale) || !den.is_finite() {
            return Err(Error::DenominatorBreakdown);
        }
        let x = num / den;
        let w: Vec<f64> = a.iter().zip(&b).map(|(&p, &q)| p + x * q).collect();
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::DenominatorBreakdown);
        }
        Ok(w)
    }
}

/// Stand-alone form of [`ExplicitSolver::solve`].
pub fn explicit_rqi_solve(
    q: &TridiagonalSystem,
    mu: &Measure,
    z: f64,
    v: &[f64],
) -> Result<Vec<f64>> {
    ExplicitSolver::new(q, mu)?.solve(z, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Explicit,
    /// Pivoting tridiagonal elimination.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TridiagZ0 {
    /// [`z0_combination`].
    #[default]
    Combined,
    /// `1 / delta_1`.
    Delta,
    /// `(v_0, -Q v_0)_mu`.
    Rayleigh,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialVector {
    #[default]
    Efficient,
    Uniform,
}

#[derive(Debug, Clone, Copy)]
pub struct TridiagOptions {
    pub stop: StopRule,
    pub solver: SolverChoice,
    pub z0: TridiagZ0,
    pub v0: InitialVector,
    pub snapshots: bool,
    pub clock: Option<Clock>,
}

impl Default for TridiagOptions {
    fn default() -> Self {
        Self {
            stop: StopRule::new(1e-10, 1e-8, 50),
            solver: SolverChoice::Explicit,
            z0: TridiagZ0::Combined,
            v0: InitialVector::Efficient,
            snapshots: false,
            clock: None,
        }
    }
}

/// Output of [`tridiag_rqi`]: the run on the transformed system plus the
/// data needed to map it back.
#[derive(Debug, Clone)]
pub struct TridiagRun {
    /// Eigenvalue is `lambda_min(-Q^c)`; eigenvector is for `Q~`, unit in
    /// `L^2(mu)`.
    pub run: Run<f64>,
    pub transform: HTransform,
    pub initials: InitialData,
}

impl TridiagRun {
    /// `(rho(A), g(A))` for `A = Q^c + m I`.
    pub fn recover(&self, m: f64) -> EigenpairResult<f64> {
        recover_original(&self.run.result, &self.transform, m)
    }
}

/// Runs the full pipeline on the Q-matrix `t` (the `Q^c` of some shifted `A`).
pub fn tridiag_rqi(t: &TridiagonalSystem, opts: &TridiagOptions) -> Result<TridiagRun> {
    let transform = compute_h(t)?;
    let initials = compute_initials(&transform.transformed)?;
    run_prepared(transform, initials, opts)
}

pub(crate) fn run_prepared(
    transform: HTransform,
    initials: InitialData,
    opts: &TridiagOptions,
) -> Result<TridiagRun> {
    let q = &transform.transformed;
    let mu = &initials.mu;
    let v0 = match opts.v0 {
        InitialVector::Efficient => initials.v0.clone(),
        InitialVector::Uniform => vec![1.0; q.order()],
    };
    let z0 = match opts.z0 {
        TridiagZ0::Combined => initials.z0_combined(),
        TridiagZ0::Delta => 1.0 / initials.delta1,
        TridiagZ0::Rayleigh => match opts.v0 {
            InitialVector::Efficient => initials.rayleigh,
            InitialVector::Uniform => {
                let norm = crate::numat::weighted_norm(&v0, mu)?;
                let u: Vec<f64> = v0.iter().map(|x| x / norm).collect();
                -crate::numat::weighted_inner(&u, &q.matvec_unchecked(&u), mu)?
            }
        },
        TridiagZ0::Value(z) => z,
    };

    let apply = |v: &[f64]| -> Vec<f64> { q.matvec_unchecked(v).into_iter().map(|x| -x).collect() };
    let explicit = ExplicitSolver::new(q, mu)?;
    let solve = |z: f64, v: &[f64]| -> Result<Vec<f64>> {
        match opts.solver {
            SolverChoice::Explicit => explicit.solve(z, v),
            SolverChoice::Generic => tridiag_solve(&Tridiagonal::negated_shifted(q, z), v),
        }
    };
    let scale = (0..q.order()).fold(0.0f64, |m, i| m.max(q.diag(i).abs()).max(q.b(i)).max(q.a(i)));
    let driver = Driver {
        apply: &apply,
        solve: &solve,
        geometry: Geometry::Weighted(mu),
        update: Update::Rayleigh,
        scale,
        stop: opts.stop,
        snapshots: opts.snapshots,
        clock: opts.clock,
    };
    let out = driver.run(v0, Some(z0))?;
    let run = Run {
        result: EigenpairResult {
            eigenvalue: out.z,
            eigenvector: out.v,
            settled_at: out.settled_at,
            steps: out.steps,
            residual: out.residual,
            shift: None,
            shifted_value: Some(out.z),
            h: Some(transform.h.clone()),
            normalization: Normalization::WeightedL2,
        },
        trace: out.trace,
    };
    Ok(TridiagRun { run, transform, initials })
}

/// Maps a converged pair of `-Q~` to `(rho(A), g(A)) = (m - z, Diag(h) v)`,
/// scaling `g` so its last component is one.
pub fn recover_original(
    result: &EigenpairResult<f64>,
    transform: &HTransform,
    m: f64,
) -> EigenpairResult<f64> {
    let z = result.shifted_value.unwrap_or(result.eigenvalue);
    let mut g: Vec<f64> =
        transform.h.iter().zip(&result.eigenvector).map(|(h, v)| h * v).collect();
    normalize_last(&mut g);
    EigenpairResult {
        eigenvalue: m - z,
        eigenvector: g,
        settled_at: result.settled_at,
        steps: result.steps,
        residual: result.residual,
        shift: Some(m),
        shifted_value: Some(z),
        h: Some(transform.h.clone()),
        normalization: Normalization::LastComponentOne,
    }
}

pub(crate) fn normalize_last(g: &mut [f64]) {
    if let Some(&last) = g.last() {
        if last != 0.0 {
            for x in g.iter_mut() {
                *x /= last;
            }
        }
    }
}
