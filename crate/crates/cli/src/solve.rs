//! The `solve` command: dispatch to one algorithm and collect a record.

use std::fmt;
use std::str::FromStr;

use maxeig_core::general::{self, GeneralOptions, GeneralZ0};
use maxeig_core::iterate::{
    algorithm1, algorithm2, power_iteration, verify_maximal, Capture, Clock, GlobalOptions, Norm,
    PowerOptions, Run, StopRule, Target,
};
use maxeig_core::numat::shift_to_qc;
use maxeig_core::tridiag::{self, InitialVector, TridiagOptions, TridiagZ0};
use maxeig_core::{Complex64, DenseMatrix, Error, Model, ModelName, TridiagonalSystem};
use serde::{Deserialize, Serialize};

use crate::record::{display_stable_at, trace_rows, Mode, ResultRecord, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Power,
    RqiTridiag,
    RqiGeneral,
    Alg1,
    Alg2,
}

/// Initial shift selection. Numbers are in the space the algorithm iterates
/// in: `lambda_min(-Q^c)` for the two RQI methods, the input's own spectrum
/// for the global algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Z0Choice {
    Default,
    Value(f64),
    Rayleigh,
    Safe,
    MaxRatio,
    Combined,
    Delta,
}

impl FromStr for Z0Choice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "default" => Z0Choice::Default,
            "rayleigh" => Z0Choice::Rayleigh,
            "safe" => Z0Choice::Safe,
            "max-ratio" => Z0Choice::MaxRatio,
            "combined" => Z0Choice::Combined,
            "delta" => Z0Choice::Delta,
            _ => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Z0Choice::Value(v),
                _ => {
                    return Err(format!(
                        "expected a number or one of rayleigh, safe, max-ratio, combined, delta; got `{s}`"
                    ))
                }
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum V0Choice {
    Efficient,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    L1,
    L2,
    L2mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: Method,
    pub tol: f64,
    pub residual_tol: f64,
    pub max_iter: Option<usize>,
    pub z0: Z0Choice,
    pub v0: Option<V0Choice>,
    pub norm: Option<NormChoice>,
    /// Treat the input as a Q-matrix and report `lambda_min(-Q)`.
    pub negate: bool,
    /// Power iteration step count.
    pub steps: usize,
    /// Cross-check RQI results against Algorithm 2.
    pub verify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::RqiGeneral,
            tol: 1e-10,
            residual_tol: 1e-8,
            max_iter: None,
            z0: Z0Choice::Default,
            v0: None,
            norm: None,
            negate: false,
            steps: 1000,
            verify: true,
        }
    }
}

/// Models that are generators of Markov chains and are reported as
/// `lambda_min(-Q)` by default.
pub fn is_q_model(name: ModelName) -> bool {
    matches!(name, ModelName::BdSquares | ModelName::Triangular | ModelName::Branching)
}

/// Largest order for which the pitfall check runs.
pub const VERIFY_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Convergence(String),
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Domain(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Convergence(m) => write!(f, "no convergence: {m}"),
            CliError::Domain(m) => write!(f, "algorithm left its domain: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::MaxIterationsExceeded { .. } => CliError::Convergence(e.to_string()),
            _ if e.is_domain_error() => CliError::Domain(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub mode: Mode,
    pub trace: Vec<TraceRow>,
    pub result: ResultRecord,
    /// Present when the pitfall check ran.
    pub capture: Option<Capture>,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn stop(opts: &SolveOptions, default_iter: usize) -> StopRule {
    StopRule::new(opts.tol, opts.residual_tol, opts.max_iter.unwrap_or(default_iter))
}

fn plain_norm(n: Option<NormChoice>, default: Norm) -> Result<Norm, CliError> {
    match n {
        None => Ok(default),
        Some(NormChoice::L1) => Ok(Norm::L1),
        Some(NormChoice::L2) => Ok(Norm::L2),
        Some(NormChoice::L2mu) => usage("--norm l2mu only applies to rqi-tridiag and rqi-general"),
    }
}

fn weighted_norm_only(n: Option<NormChoice>) -> Result<(), CliError> {
    match n {
        None | Some(NormChoice::L2mu) => Ok(()),
        Some(_) => usage("the RQI methods iterate in L2(mu); use --norm l2mu or omit it"),
    }
}

fn initial_vector(v: Option<V0Choice>) -> InitialVector {
    match v {
        Some(V0Choice::Uniform) => InitialVector::Uniform,
        _ => InitialVector::Efficient,
    }
}

/// `Q^c` in tridiagonal form and the row-sum shift `m`.
fn tridiagonal_qc(model: &Model) -> Result<(TridiagonalSystem, f64), CliError> {
    match model {
        Model::Tridiagonal(t) => {
            let min_c = t.c_seq().iter().copied().fold(f64::INFINITY, f64::min);
            let c = t.c_seq().iter().map(|c| c - min_c).collect();
            let qc = TridiagonalSystem::new(t.a_seq().to_vec(), t.b_seq().to_vec(), c)?;
            Ok((qc, -min_c))
        }
        Model::Real(a) => {
            if !a.is_tridiagonal() {
                return usage("rqi-tridiag needs a tridiagonal matrix");
            }
            let (qc, m) = shift_to_qc(a);
            let t = TridiagonalSystem::from_dense(&qc)?;
            Ok((t, m))
        }
        Model::Complex(_) => usage("rqi-tridiag needs a real matrix"),
    }
}

/// Reported value of `rho(A)` in the chosen mode.
fn report(mode: Mode, rho: f64) -> f64 {
    match mode {
        Mode::Maximal => rho,
        Mode::MinOfNegated => -rho,
    }
}

pub fn solve(model: &Model, opts: &SolveOptions, clock: Option<Clock>) -> Result<Solved, CliError> {
    let mode = if opts.negate { Mode::MinOfNegated } else { Mode::Maximal };
    let mut solved = match opts.method {
        Method::Power => power(model, opts, mode, clock)?,
        Method::RqiTridiag => rqi_tridiag(model, opts, mode, clock)?,
        Method::RqiGeneral => rqi_general(model, opts, mode, clock)?,
        Method::Alg1 | Method::Alg2 => global(model, opts, mode, clock)?,
    };
    solved.result.display_stable_at = display_stable_at(&solved.trace);
    let checked = matches!(opts.method, Method::RqiTridiag | Method::RqiGeneral | Method::Alg1);
    if checked && opts.verify && model.order() <= VERIFY_LIMIT {
        if let Some(a) = model.to_real() {
            let rho = report(mode, solved.result.eigenvalue);
            solved.capture = Some(verify_maximal(&a, rho, 1e-6)?);
        }
    }
    Ok(solved)
}

fn power(model: &Model, opts: &SolveOptions, mode: Mode, clock: Option<Clock>) -> Result<Solved, CliError> {
    let popts = PowerOptions {
        norm: plain_norm(opts.norm, Norm::L1)?,
        steps: opts.steps,
        stagnation: None,
        snapshots: false,
        clock,
    };
    if !matches!(opts.z0, Z0Choice::Default) {
        return usage("power iteration takes no initial shift");
    }
    if let Model::Complex(a) = model {
        if opts.v0 == Some(V0Choice::Efficient) {
            return usage("efficient initials need a real matrix");
        }
        let v0 = vec![Complex64::new(1.0, 0.0); a.order()];
        let run = power_iteration(a, &v0, &popts)?;
        let (eigenvalue, eigenvalue_im, eigenvector, eigenvector_im) =
            ResultRecord::complex(run.result.eigenvalue, &run.result.eigenvector);
        return Ok(Solved {
            mode,
            trace: trace_rows(&run.trace, |z| z),
            result: ResultRecord {
                eigenvalue,
                eigenvalue_im,
                eigenvector,
                eigenvector_im,
                display_stable_at: 0,
            iterations: run.result.settled_at,
                steps: run.result.steps,
                residual: run.result.residual,
                shift: None,
                shifted_value: None,
                normalization: run.result.normalization,
            },
            capture: None,
        });
    }
    let a = model.to_real().unwrap_or_else(|| unreachable!());
    // in Q-matrix mode iterate on Q + sI, which is nonnegative
    let s = match mode {
        Mode::Maximal => 0.0,
        Mode::MinOfNegated => (0..a.order()).fold(0.0f64, |m, i| m.max(-a[(i, i)])),
    };
    let v0 = match opts.v0 {
        Some(V0Choice::Uniform) => vec![1.0; a.order()],
        _ => efficient_direction(model, &a)?,
    };
    let run = power_iteration(&a.shifted(s), &v0, &popts)?;
    let map = |z: f64| match mode {
        Mode::Maximal => z,
        Mode::MinOfNegated => s - z,
    };
    Ok(Solved {
        mode,
        trace: trace_rows(&run.trace, map),
        result: ResultRecord {
            eigenvalue: map(run.result.eigenvalue),
            eigenvalue_im: None,
            eigenvector: run.result.eigenvector,
            eigenvector_im: None,
            display_stable_at: 0,
            iterations: run.result.settled_at,
            steps: run.result.steps,
            residual: run.result.residual,
            shift: (s != 0.0).then_some(s),
            shifted_value: None,
            normalization: run.result.normalization,
        },
        capture: None,
    })
}

/// `h * sqrt(phi)`, the efficient initial vector carried back to `A`.
fn efficient_direction(model: &Model, a: &DenseMatrix<f64>) -> Result<Vec<f64>, CliError> {
    if let Ok((t, _)) = tridiagonal_qc(model) {
        let ht = tridiag::compute_h(&t)?;
        let d = tridiag::compute_initials(&ht.transformed)?;
        return Ok(ht.h.iter().zip(&d.v0_tilde).map(|(h, v)| h * v).collect());
    }
    let (qc, _) = shift_to_qc(a);
    let g = general::compute_general(&qc)?;
    Ok(g.h.iter().zip(&g.v0).map(|(h, v)| h * v).collect())
}

fn rqi_tridiag(model: &Model, opts: &SolveOptions, mode: Mode, clock: Option<Clock>) -> Result<Solved, CliError> {
    weighted_norm_only(opts.norm)?;
    let (t, m) = tridiagonal_qc(model)?;
    let z0 = match opts.z0 {
        Z0Choice::Default | Z0Choice::Combined => TridiagZ0::Combined,
        Z0Choice::Delta => TridiagZ0::Delta,
        Z0Choice::Rayleigh => TridiagZ0::Rayleigh,
        Z0Choice::Value(v) => TridiagZ0::Value(v),
        Z0Choice::Safe | Z0Choice::MaxRatio => {
            return usage("rqi-tridiag takes --z0 combined, delta, rayleigh or a number")
        }
    };
    let topts = TridiagOptions {
        stop: stop(opts, 50),
        z0,
        v0: initial_vector(opts.v0),
        clock,
        ..TridiagOptions::default()
    };
    let run = tridiag::tridiag_rqi(&t, &topts)?;
    let rec = run.recover(m);
    Ok(shifted_solved(mode, m, &run.run.trace, rec))
}

fn shifted_solved(
    mode: Mode,
    m: f64,
    trace: &maxeig_core::IterationTrace<f64>,
    rec: maxeig_core::EigenpairResult<f64>,
) -> Solved {
    let map = |z: f64| report(mode, m - z);
    Solved {
        mode,
        trace: trace_rows(trace, map),
        result: ResultRecord {
            eigenvalue: report(mode, rec.eigenvalue),
            eigenvalue_im: None,
            eigenvector: rec.eigenvector,
            eigenvector_im: None,
            display_stable_at: 0,
            iterations: rec.settled_at,
            steps: rec.steps,
            residual: rec.residual,
            shift: rec.shift,
            shifted_value: rec.shifted_value,
            normalization: rec.normalization,
        },
        capture: None,
    }
}

fn rqi_general(model: &Model, opts: &SolveOptions, mode: Mode, clock: Option<Clock>) -> Result<Solved, CliError> {
    weighted_norm_only(opts.norm)?;
    let Some(a) = model.to_real() else {
        return usage("rqi-general needs a real matrix; use alg1 for complex input");
    };
    let z0 = match opts.z0 {
        Z0Choice::Default | Z0Choice::Safe => GeneralZ0::Safe,
        Z0Choice::Rayleigh => GeneralZ0::Rayleigh,
        Z0Choice::Value(v) => GeneralZ0::Value(v),
        _ => return usage("rqi-general takes --z0 safe, rayleigh or a number"),
    };
    let gopts = GeneralOptions {
        stop: stop(opts, 50),
        z0,
        v0: initial_vector(opts.v0),
        clock,
        ..GeneralOptions::default()
    };
    let run = general::general_rqi(&a, &gopts)?;
    Ok(shifted_solved(mode, run.shift, &run.trace, run.result))
}

fn global(model: &Model, opts: &SolveOptions, mode: Mode, clock: Option<Clock>) -> Result<Solved, CliError> {
    if opts.v0 == Some(V0Choice::Efficient) {
        return usage("the global algorithms start from the uniform vector");
    }
    let z0 = match opts.z0 {
        Z0Choice::Default | Z0Choice::MaxRatio => None,
        Z0Choice::Value(v) => Some(v),
        _ => return usage("alg1 and alg2 take --z0 max-ratio or a number"),
    };
    let gopts = GlobalOptions {
        stop: stop(opts, 100),
        norm: plain_norm(opts.norm, Norm::L2)?,
        target: match mode {
            Mode::Maximal => Target::Maximal,
            Mode::MinOfNegated => Target::MinOfNegated,
        },
        z0,
        snapshots: false,
        clock,
    };
    match model {
        Model::Complex(a) => {
            if opts.method == Method::Alg2 {
                return usage("alg2 needs a real matrix; use alg1 for complex input");
            }
            let run = algorithm1(a, &gopts)?;
            let (eigenvalue, eigenvalue_im, eigenvector, eigenvector_im) =
                ResultRecord::complex(run.result.eigenvalue, &run.result.eigenvector);
            Ok(Solved {
                mode,
                trace: trace_rows(&run.trace, |z| z),
                result: ResultRecord {
                    eigenvalue,
                    eigenvalue_im,
                    eigenvector,
                    eigenvector_im,
                    display_stable_at: 0,
            iterations: run.result.settled_at,
                    steps: run.result.steps,
                    residual: run.result.residual,
                    shift: None,
                    shifted_value: None,
                    normalization: run.result.normalization,
                },
                capture: None,
            })
        }
        _ => {
            let a = model.to_real().unwrap_or_else(|| unreachable!());
            let run: Run<f64> = if opts.method == Method::Alg1 {
                algorithm1(&a, &gopts)?
            } else {
                algorithm2(&a, &gopts)?
            };
            Ok(Solved {
                mode,
                trace: trace_rows(&run.trace, |z| z),
                result: ResultRecord {
                    eigenvalue: run.result.eigenvalue,
                    eigenvalue_im: None,
                    eigenvector: run.result.eigenvector,
                    eigenvector_im: None,
                    display_stable_at: 0,
            iterations: run.result.settled_at,
                    steps: run.result.steps,
                    residual: run.result.residual,
                    shift: None,
                    shifted_value: None,
                    normalization: run.result.normalization,
                },
                capture: None,
            })
        }
    }
}

/// Six significant digits, fixed notation for moderate magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..6).contains(&mag) {
        format!("{x:.*}", (5 - mag).max(0) as usize)
    } else {
        format!("{x:.5e}")
    }
}
