//! Iteration algorithms: power iteration, Rayleigh quotient iteration, and
//! the two global shifted-inverse algorithms.
//!
//! Every run produces an [`IterationTrace`] alongside its result. Step `k = 0`
//! records the initial pair; each later step is one linear solve.
//!
//! Algorithm 1 (Rayleigh update) converges faster but is less safe than
//! Algorithm 2 (max-ratio update): the latter keeps `z_k >= rho(A)` for
//! nonnegative irreducible `A`, so it cannot be captured by a smaller
//! eigenvalue.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linsolve::lu_factor;
use crate::numat::{self, check_len, max_ratio_at, DenseMatrix, Measure};
use crate::scalar::Scalar;

/// Seconds on some monotone clock. `no_std` builds have no timer, so the
/// caller injects one; without it every step records zero.
pub type Clock = fn() -> f64;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceStep<T> {
    pub k: usize,
    pub z: T,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    /// Shift stagnated and the eigen-residual fell below tolerance.
    Converged,
    /// A fixed step budget ran out (power iteration).
    StepsCompleted,
    /// Power iteration stopped because `z` stopped moving.
    Stagnated,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationTrace<T> {
    pub steps: Vec<TraceStep<T>>,
    /// `v_k` for every step, when requested.
    pub snapshots: Option<Vec<Vec<T>>>,
    pub termination: Termination,
}

impl<T: Scalar> IterationTrace<T> {
    pub fn z_values(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.z).collect()
    }

    /// Same records with `z` negated; used to report `lambda_min(-Q)` when
    /// the algorithm ran on `Q`.
    pub fn negated(mut self) -> Self {
        for s in &mut self.steps {
            s.z = -s.z;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Normalization {
    L1,
    L2,
    /// Unit norm in `L^2(mu)`.
    WeightedL2,
    LastComponentOne,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenpairResult<T> {
    pub eigenvalue: T,
    pub eigenvector: Vec<T>,
    /// First index `k` from which every `z_k` agrees with the final value to
    /// the stagnation tolerance.
    pub settled_at: usize,
    /// Number of linear solves performed.
    pub steps: usize,
    /// Eigen-residual of the returned pair, as recorded in the trace.
    pub residual: f64,
    /// Row-sum shift `m` when the pair was recovered through `A - m I`.
    pub shift: Option<f64>,
    /// Converged `lambda_min(-Q^c)` before recovery.
    pub shifted_value: Option<f64>,
    /// Near-harmonic `h` used by an H-transform.
    pub h: Option<Vec<f64>>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Run<T> {
    pub result: EigenpairResult<T>,
    pub trace: IterationTrace<T>,
}

/// Dual stopping criterion: relative change of `z` and scaled residual.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StopRule {
    /// Bound on `|z_k - z_{k-1}| / max(1, |z_k|)`.
    pub tol_z: f64,
    /// Bound on the eigen-residual divided by `max(1, max|a_ij|)`.
    pub tol_residual: f64,
    pub max_iter: usize,
}

impl StopRule {
    pub const fn new(tol_z: f64, tol_residual: f64, max_iter: usize) -> Self {
        Self { tol_z, tol_residual, max_iter }
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self::new(1e-10, 1e-8, 100)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Norm {
    L1,
    #[default]
    L2,
}

/// Which quantity the run reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Target {
    /// `rho(A)` of the input.
    #[default]
    Maximal,
    /// The input is a Q-matrix `Q`; report `lambda_min(-Q) = -rho(Q)` and the
    /// negated shift sequence.
    MinOfNegated,
}

/// Shift update rule for [`rqi`].
#[derive(Debug, Clone, PartialEq)]
pub enum ZUpdate {
    /// `z_k = v_k^* A v_k / v_k^* v_k`.
    Rayleigh,
    /// `z_k = (v_k, A v_k)_mu / (v_k, v_k)_mu`, normalizing in `L^2(mu)`.
    WeightedRayleigh(Measure),
    /// `z_k = max_i (A v_k)_i / v_k(i)`.
    MaxRatio,
}

#[derive(Debug, Clone, Copy)]
pub struct GlobalOptions {
    pub stop: StopRule,
    pub norm: Norm,
    pub target: Target,
    /// Replaces the default initial shift `max_i (A v_0 / v_0)(i)`.
    pub z0: Option<f64>,
    pub snapshots: bool,
    pub clock: Option<Clock>,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        Self {
            stop: StopRule::default(),
            norm: Norm::L2,
            target: Target::Maximal,
            z0: None,
            snapshots: false,
            clock: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub norm: Norm,
    pub steps: usize,
    /// Stop early once `|z_k - z_{k-1}| <= tol * max(1, |z_k|)`.
    pub stagnation: Option<f64>,
    pub snapshots: bool,
    pub clock: Option<Clock>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { norm: Norm::L1, steps: 1000, stagnation: None, snapshots: false, clock: None }
    }
}

pub(crate) fn elapsed(clock: Option<Clock>, t0: f64) -> f64 {
    clock.map_or(0.0, |c| c() - t0)
}

fn norm_of<T: Scalar>(v: &[T], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => numat::l1_norm(v),
        Norm::L2 => numat::l2_norm(v),
    }
}

fn scale_vec<T: Scalar>(v: &mut [T], s: f64) {
    for x in v {
        *x = x.scale(s);
    }
}

/// Rotates `v` so its largest-magnitude entry (lowest index on ties) is
/// positive real.
pub(crate) fn fix_phase<T: Scalar>(v: &mut [T]) {
    let (mut idx, mut best) = (0, -1.0);
    for (i, x) in v.iter().enumerate() {
        let m = x.modulus();
        if m > best {
            best = m;
            idx = i;
        }
    }
    if best <= 0.0 {
        return;
    }
    let phase = v[idx].conj().scale(1.0 / best);
    if phase == T::one() {
        return;
    }
    for x in v.iter_mut() {
        *x *= phase;
    }
    // exact positive real after rotation
    v[idx] = T::from_real(best);
}

fn inf_residual<T: Scalar>(av: &[T], v: &[T], z: T) -> f64 {
    av.iter().zip(v).fold(0.0, |m, (&y, &x)| m.max((y - z * x).modulus()))
}

/// How the driver measures length and forms the Rayleigh quotient.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Geometry<'a> {
    Plain(Norm),
    Weighted(&'a Measure),
}

impl Geometry<'_> {
    fn norm<T: Scalar>(&self, v: &[T]) -> f64 {
        match self {
            Geometry::Plain(n) => norm_of(v, *n),
            Geometry::Weighted(mu) => numat::weighted_norm(v, mu).unwrap_or(f64::NAN),
        }
    }

    fn rayleigh<T: Scalar>(&self, v: &[T], av: &[T]) -> T {
        match self {
            Geometry::Plain(_) => {
                let mut num = T::zero();
                let mut den = 0.0;
                for (&x, &y) in v.iter().zip(av) {
                    num += x.conj() * y;
                    den += x.modulus() * x.modulus();
                }
                num.scale(1.0 / den)
            }
            Geometry::Weighted(mu) => {
                let num = numat::weighted_inner(v, av, mu).unwrap_or(T::from_real(f64::NAN));
                let n = self.norm(v);
                num.scale(1.0 / (n * n))
            }
        }
    }

    /// Residual of `(z, v)` in the geometry's own norm (sup-norm when plain).
    fn residual<T: Scalar>(&self, av: &[T], v: &[T], z: T) -> f64 {
        match self {
            Geometry::Plain(_) => inf_residual(av, v, z),
            Geometry::Weighted(mu) => {
                let r: Vec<T> = av.iter().zip(v).map(|(&y, &x)| y - z * x).collect();
                numat::weighted_norm(&r, mu).unwrap_or(f64::NAN)
            }
        }
    }

    fn vector_size<T: Scalar>(&self, v: &[T]) -> f64 {
        match self {
            Geometry::Plain(_) => numat::inf_norm(v),
            Geometry::Weighted(_) => self.norm(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Update {
    Rayleigh,
    MaxRatio,
}

/// Inverse-iteration driver shared by every shifted algorithm.
///
/// `solve(z, v)` returns a solution of `(z I - B) w = v` or of `(B - z I) w =
/// v`; the sign is irrelevant after normalization and phase fixing. `scale` is
/// `max|b_ij|` of the operator `B`.
pub(crate) type ShiftedSolve<'a, T> = &'a dyn Fn(T, &[T]) -> Result<Vec<T>>;

pub(crate) struct Driver<'a, T> {
    pub apply: &'a dyn Fn(&[T]) -> Vec<T>,
    pub solve: ShiftedSolve<'a, T>,
    pub geometry: Geometry<'a>,
    pub update: Update,
    pub scale: f64,
    pub stop: StopRule,
    pub snapshots: bool,
    pub clock: Option<Clock>,
}

pub(crate) struct DriverOutput<T> {
    pub z: T,
    pub v: Vec<T>,
    pub residual: f64,
    pub settled_at: usize,
    pub steps: usize,
    pub trace: IterationTrace<T>,
}

fn is_breakdown(e: &Error) -> bool {
    matches!(e, Error::Singular { .. } | Error::Breakdown { .. } | Error::DenominatorBreakdown)
}

impl<T: Scalar> Driver<'_, T> {
    fn z_of(&self, v: &[T], av: &[T], step: usize) -> Result<T> {
        match self.update {
            Update::Rayleigh => Ok(self.geometry.rayleigh(v, av)),
            Update::MaxRatio => match max_ratio_at(av, v) {
                Ok((_, r)) => Ok(T::from_real(r)),
                Err(Error::NonPositive { index, .. }) => {
                    Err(Error::NonPositiveIterate { step, index })
                }
                Err(e) => Err(e.at_step(step)),
            },
        }
    }

    /// Solve with one perturbed retry when the shift hits an eigenvalue.
    fn solve_step(&self, z: T, v: &[T], step: usize) -> Result<Vec<T>> {
        match (self.solve)(z, v) {
            Ok(w) => Ok(w),
            Err(e) if is_breakdown(&e) => {
                let dz = 1e-12 * (1.0 + z.modulus());
                (self.solve)(z + T::from_real(dz), v).map_err(|e| e.at_step(step))
            }
            Err(e) => Err(e.at_step(step)),
        }
    }

    pub fn run(&self, mut v: Vec<T>, z0: Option<T>) -> Result<DriverOutput<T>> {
        let t0 = self.clock.map_or(0.0, |c| c());
        let n0 = self.geometry.norm(&v);
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::InvalidInput("initial vector must be nonzero and finite"));
        }
        scale_vec(&mut v, 1.0 / n0);
        let av = (self.apply)(&v);
        let mut z = match z0 {
            Some(z) => z,
            None => self.z_of(&v, &av, 0)?,
        };
        let scale = self.scale.max(1.0);
        let mut residual = self.geometry.residual(&av, &v, z);
        let mut steps = vec![TraceStep { k: 0, z, residual, seconds: elapsed(self.clock, t0) }];
        let mut snaps = self.snapshots.then(|| vec![v.clone()]);

        for k in 1..=self.stop.max_iter {
            let mut w = self.solve_step(z, &v, k)?;
            let nw = self.geometry.norm(&w);
            if !(nw > 0.0 && nw.is_finite()) {
                return Err(Error::Breakdown { index: 0 }.at_step(k));
            }
            scale_vec(&mut w, 1.0 / nw);
            fix_phase(&mut w);
            v = w;
            let av = (self.apply)(&v);
            let z_new = self.z_of(&v, &av, k)?;
            residual = self.geometry.residual(&av, &v, z_new);
            steps.push(TraceStep { k, z: z_new, residual, seconds: elapsed(self.clock, t0) });
            if let Some(s) = snaps.as_mut() {
                s.push(v.clone());
            }
            let dz = (z_new - z).modulus();
            z = z_new;
            let rel_res = residual / (scale * self.geometry.vector_size(&v));
            if dz <= self.stop.tol_z * z.modulus().max(1.0) && rel_res <= self.stop.tol_residual {
                let settled_at = settled_index(&steps, self.stop.tol_z);
                return Ok(DriverOutput {
                    z,
                    v,
                    residual,
                    settled_at,
                    steps: k,
                    trace: IterationTrace {
                        steps,
                        snapshots: snaps,
                        termination: Termination::Converged,
                    },
                });
            }
        }
        Err(Error::MaxIterationsExceeded { iterations: self.stop.max_iter, last_z: z.re() })
    }
}

pub(crate) fn settled_index<T: Scalar>(steps: &[TraceStep<T>], tol: f64) -> usize {
    let last = steps.last().map_or(T::zero(), |s| s.z);
    let bound = tol * last.modulus().max(1.0);
    let mut idx = steps.len().saturating_sub(1);
    while idx > 0 && (steps[idx - 1].z - last).modulus() <= bound {
        idx -= 1;
    }
    idx
}

/// Power iteration `v_k = A v_{k-1} / |A v_{k-1}|`, `z_k = |A v_k|`.
pub fn power_iteration<T: Scalar>(
    a: &DenseMatrix<T>,
    v0: &[T],
    opts: &PowerOptions,
) -> Result<Run<T>> {
    check_len(a.order(), v0.len())?;
    let t0 = opts.clock.map_or(0.0, |c| c());
    let mut v = v0.to_vec();
    let n0 = norm_of(&v, opts.norm);
    if !(n0 > 0.0) {
        return Err(Error::InvalidInput("initial vector must be nonzero"));
    }
    scale_vec(&mut v, 1.0 / n0);
    let mut av = a.matvec_unchecked(&v);
    let mut z = T::from_real(norm_of(&av, opts.norm));
    let mut steps = vec![TraceStep {
        k: 0,
        z,
        residual: inf_residual(&av, &v, z),
        seconds: elapsed(opts.clock, t0),
    }];
    let mut snaps = opts.snapshots.then(|| vec![v.clone()]);
    let mut termination = Termination::StepsCompleted;
    for k in 1..=opts.steps {
        let n = norm_of(&av, opts.norm);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Breakdown { index: 0 }.at_step(k));
        }
        v = av;
        scale_vec(&mut v, 1.0 / n);
        av = a.matvec_unchecked(&v);
        let z_new = T::from_real(norm_of(&av, opts.norm));
        let residual = inf_residual(&av, &v, z_new);
        steps.push(TraceStep { k, z: z_new, residual, seconds: elapsed(opts.clock, t0) });
        if let Some(s) = snaps.as_mut() {
            s.push(v.clone());
        }
        let dz = (z_new - z).modulus();
        z = z_new;
        if let Some(tol) = opts.stagnation {
            if dz <= tol * z.modulus().max(1.0) {
                termination = Termination::Stagnated;
                break;
            }
        }
    }
    let last = *steps.last().expect("step 0 is always recorded");
    let normalization = match opts.norm {
        Norm::L1 => Normalization::L1,
        Norm::L2 => Normalization::L2,
    };
    Ok(Run {
        result: EigenpairResult {
            eigenvalue: z,
            eigenvector: v,
            settled_at: settled_index(&steps, opts.stagnation.unwrap_or(0.0)),
            steps: last.k,
            residual: last.residual,
            shift: None,
            shifted_value: None,
            h: None,
            normalization,
        },
        trace: IterationTrace { steps, snapshots: snaps, termination },
    })
}

/// Rayleigh quotient iteration `v_k = (z_{k-1} I - A)^{-1} v_{k-1}` normalized,
/// with the shift update chosen by `update`.
pub fn rqi<T: Scalar>(
    a: &DenseMatrix<T>,
    v0: &[T],
    z0: T,
    update: &ZUpdate,
    opts: &GlobalOptions,
) -> Result<Run<T>> {
    check_len(a.order(), v0.len())?;
    let apply = |v: &[T]| a.matvec_unchecked(v);
    let solve = |z: T, v: &[T]| -> Result<Vec<T>> {
        let mut m = a.negated();
        for i in 0..a.order() {
            m[(i, i)] += z;
        }
        lu_factor(&m)?.solve(v)
    };
    let (geometry, up, normalization) = match update {
        ZUpdate::Rayleigh => (Geometry::Plain(opts.norm), Update::Rayleigh, plain_tag(opts.norm)),
        ZUpdate::WeightedRayleigh(mu) => {
            check_len(a.order(), mu.len())?;
            (Geometry::Weighted(mu), Update::Rayleigh, Normalization::WeightedL2)
        }
        ZUpdate::MaxRatio => (Geometry::Plain(opts.norm), Update::MaxRatio, plain_tag(opts.norm)),
    };
    let driver = Driver {
        apply: &apply,
        solve: &solve,
        geometry,
        update: up,
        scale: a.max_abs(),
        stop: opts.stop,
        snapshots: opts.snapshots,
        clock: opts.clock,
    };
    let out = driver.run(v0.to_vec(), Some(z0))?;
    Ok(finish(out, normalization, opts.target))
}

fn plain_tag(norm: Norm) -> Normalization {
    match norm {
        Norm::L1 => Normalization::L1,
        Norm::L2 => Normalization::L2,
    }
}

fn finish<T: Scalar>(out: DriverOutput<T>, normalization: Normalization, target: Target) -> Run<T> {
    let (eigenvalue, trace) = match target {
        Target::Maximal => (out.z, out.trace),
        Target::MinOfNegated => (-out.z, out.trace.negated()),
    };
    Run {
        result: EigenpairResult {
            eigenvalue,
            eigenvector: out.v,
            settled_at: out.settled_at,
            steps: out.steps,
            residual: out.residual,
            shift: None,
            shifted_value: None,
            h: None,
            normalization,
        },
        trace,
    }
}

pub fn uniform<T: Scalar>(order: usize) -> Vec<T> {
    vec![T::from_real(1.0 / libm::sqrt(order as f64)); order]
}

fn global_z0<T: Scalar>(a: &DenseMatrix<T>, v0: &[T], opts: &GlobalOptions) -> Result<T> {
    match opts.z0 {
        Some(z) => Ok(T::from_real(z)),
        None => numat::max_ratio(a, v0).map(T::from_real),
    }
}

/// Algorithm 1 (specific Rayleigh quotient iteration): uniform `v_0`,
/// `z_0 = max_i (A v_0 / v_0)(i)`, Rayleigh update. Works for complex `A`.
pub fn algorithm1<T: Scalar>(a: &DenseMatrix<T>, opts: &GlobalOptions) -> Result<Run<T>> {
    let v0 = uniform(a.order());
    let z0 = global_z0(a, &v0, opts)?;
    rqi(a, &v0, z0, &ZUpdate::Rayleigh, opts)
}

/// Algorithm 2 (shifted inverse iteration): as [`algorithm1`] but with
/// `z_k = max_i (A v_k / v_k)(i)`. Complex inputs have no max-ratio and must
/// use [`algorithm1`].
pub fn algorithm2(a: &DenseMatrix<f64>, opts: &GlobalOptions) -> Result<Run<f64>> {
    let v0 = uniform(a.order());
    let z0 = global_z0(a, &v0, opts)?;
    rqi(a, &v0, z0, &ZUpdate::MaxRatio, opts)
}

/// Outcome of checking a claimed maximal eigenvalue against Algorithm 2.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Capture {
    pub claimed: f64,
    pub reference: f64,
    pub is_maximal: bool,
}

/// Runs Algorithm 2 on `a` and reports whether `claimed` is its maximal
/// eigenvalue within `rel_tol`. A run converging to a smaller eigenvalue (a
/// pitfall) is flagged by `is_maximal == false`.
pub fn verify_maximal(a: &DenseMatrix<f64>, claimed: f64, rel_tol: f64) -> Result<Capture> {
    let reference = algorithm2(a, &GlobalOptions::default())?.result.eigenvalue;
    let is_maximal = (claimed - reference).abs() <= rel_tol * reference.abs().max(1.0);
    Ok(Capture { claimed, reference, is_maximal })
}
