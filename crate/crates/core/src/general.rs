//! Efficient initials for dense matrices with nonnegative off-diagonals.
//!
//! The tridiagonal recurrences are replaced by three linear systems: a
//! harmonic `h` for `Q^c` away from the last row, the tail `phi` of the jump
//! chain `P`, and the invariant measure `mu` of `Q~`. Tridiagonal inputs are
//! routed through the O(N) recurrences unless disabled.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::iterate::{Clock, Driver, EigenpairResult, Geometry, Normalization, Run, StopRule, Update};
use crate::linsolve::{lu_factor, solve_dense};
use crate::numat::{self, shift_to_qc, DenseMatrix, Measure, TridiagonalSystem};
use crate::tridiag::{self, normalize_last, InitialVector, TridiagOptions, TridiagZ0};

/// Sequences and initials of the dense pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralInitials {
    /// `h_0 = 1`.
    pub h: Vec<f64>,
    pub q_tilde: DenseMatrix<f64>,
    pub p: DenseMatrix<f64>,
    /// `phi_0 = 1`.
    pub phi: Vec<f64>,
    /// `mu_0 = 1`.
    pub mu: Measure,
    pub v0: Vec<f64>,
    pub z0_rayleigh: f64,
    /// `None` when `phi_1 >= 1`.
    pub z0_safe: Option<f64>,
}

impl GeneralInitials {
    pub fn z0_safe(&self) -> Result<f64> {
        self.z0_safe.ok_or(Error::SafeFormulaUnavailable { phi1: self.phi[1] })
    }
}

/// Solves the equations of rows `0..N-1` of `Q^c h = 0` with `h_0 = 1`.
pub fn solve_h_general(qc: &DenseMatrix<f64>) -> Result<Vec<f64>> {
    let order = qc.order();
    if order == 1 {
        return Ok(vec![1.0]);
    }
    let n = order - 1;
    let mut m = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        m.extend_from_slice(&qc.row(i)[1..]);
        rhs.push(-qc[(i, 0)]);
    }
    let sol = solve_dense(&DenseMatrix::new(n, m)?, &rhs)?;
    let mut h = Vec::with_capacity(order);
    h.push(1.0);
    h.extend(sol);
    if let Some(index) = h.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveH { index });
    }
    Ok(h)
}

/// `q~_ij = q^c_ij h_j / h_i`.
pub fn h_transform_general(qc: &DenseMatrix<f64>, h: &[f64]) -> Result<DenseMatrix<f64>> {
    let order = qc.order();
    numat::check_len(order, h.len())?;
    if let Some(index) = h.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonPositiveH { index });
    }
    let mut data = Vec::with_capacity(order * order);
    for i in 0..order {
        for j in 0..order {
            data.push(qc[(i, j)] * h[j] / h[i]);
        }
    }
    DenseMatrix::new(order, data)
}

/// `P = Diag(-1 / q_ii) Q + I`.
pub fn jump_matrix(q: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
    let order = q.order();
    let mut data = Vec::with_capacity(order * order);
    for i in 0..order {
        let d = q[(i, i)];
        if !(d < 0.0) {
            return Err(Error::NonPositive { what: "-diagonal", index: i });
        }
        for j in 0..order {
            data.push(if i == j { 0.0 } else { -q[(i, j)] / d });
        }
    }
    DenseMatrix::new(order, data)
}

/// Rows `1..N` of `phi = P phi` with `phi_0 = 1`.
pub fn solve_phi_general(q: &DenseMatrix<f64>) -> Result<(DenseMatrix<f64>, Vec<f64>)> {
    let p = jump_matrix(q)?;
    let order = q.order();
    if order == 1 {
        return Ok((p, vec![1.0]));
    }
    let n = order - 1;
    let mut m = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n);
    for i in 1..order {
        for j in 1..order {
            m.push(if i == j { 1.0 } else { -p[(i, j)] });
        }
        rhs.push(p[(i, 0)]);
    }
    let sol = solve_dense(&DenseMatrix::new(n, m)?, &rhs)?;
    let mut phi = Vec::with_capacity(order);
    phi.push(1.0);
    phi.extend(sol);
    if let Some(index) = phi.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositivePhi { index });
    }
    Ok((p, phi))
}

/// Columns `0..N-1` of `mu Q = 0` with `mu_0 = 1`.
pub fn solve_mu_general(q: &DenseMatrix<f64>) -> Result<Measure> {
    let order = q.order();
    if order == 1 {
        return Measure::new(vec![1.0]);
    }
    let n = order - 1;
    let mut m = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n);
    for j in 0..n {
        for i in 1..order {
            m.push(q[(i, j)]);
        }
        rhs.push(-q[(0, j)]);
    }
    let sol = solve_dense(&DenseMatrix::new(n, m)?, &rhs)?;
    let mut mu = Vec::with_capacity(order);
    mu.push(1.0);
    mu.extend(sol);
    if let Some(index) = mu.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveMu { index });
    }
    Measure::new(mu)
}

/// `v_0 = sqrt(phi)` normalized in `L^2(mu)`, its Rayleigh quotient, and the
/// safe shift `(1 - phi_1) / delta`.
pub fn initials_general(
    q: &DenseMatrix<f64>,
    phi: &[f64],
    mu: &Measure,
) -> Result<(Vec<f64>, f64, Option<f64>)> {
    numat::check_len(q.order(), phi.len())?;
    numat::check_len(q.order(), mu.len())?;
    let root: Vec<f64> = phi.iter().map(|&p| libm::sqrt(p)).collect();
    let norm = numat::weighted_norm(&root, mu)?;
    let v0: Vec<f64> = root.iter().map(|x| x / norm).collect();
    let qv = q.matvec_unchecked(&v0);
    let rayleigh = -numat::weighted_inner(&v0, &qv, mu)?;
    Ok((v0, rayleigh, safe_shift(phi, mu.weights())))
}

fn safe_shift(phi: &[f64], mu: &[f64]) -> Option<f64> {
    let phi1 = *phi.get(1)?;
    if !(phi1 < 1.0) {
        return None;
    }
    let scaled: Vec<f64> = phi.iter().map(|p| p / phi[0]).collect();
    Some((1.0 - phi1 / phi[0]) / tridiag::delta(&scaled, mu))
}

/// Builds every sequence of the dense pipeline for the Q-matrix `qc`.
pub fn compute_general(qc: &DenseMatrix<f64>) -> Result<GeneralInitials> {
    let h = solve_h_general(qc)?;
    let q_tilde = h_transform_general(qc, &h)?;
    let (p, phi) = solve_phi_general(&q_tilde)?;
    let mu = solve_mu_general(&q_tilde)?;
    let (v0, z0_rayleigh, z0_safe) = initials_general(&q_tilde, &phi, &mu)?;
    Ok(GeneralInitials { h, q_tilde, p, phi, mu, v0, z0_rayleigh, z0_safe })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GeneralZ0 {
    /// `(1 - phi_1) / delta`; fails with `SafeFormulaUnavailable` when
    /// `phi_1 >= 1`.
    #[default]
    Safe,
    Rayleigh,
    Value(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct GeneralOptions {
    pub stop: StopRule,
    pub z0: GeneralZ0,
    pub v0: InitialVector,
    /// Use the O(N) recurrences when the input is tridiagonal.
    pub tridiagonal_fast_path: bool,
    pub snapshots: bool,
    pub clock: Option<Clock>,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        Self {
            stop: StopRule::new(1e-10, 1e-8, 50),
            z0: GeneralZ0::Safe,
            v0: InitialVector::Efficient,
            tridiagonal_fast_path: true,
            snapshots: false,
            clock: None,
        }
    }
}

/// Output of [`general_rqi`].
#[derive(Debug, Clone)]
pub struct GeneralRun {
    /// Pair of `A`: `rho(A)` and `g` with last component one.
    pub result: EigenpairResult<f64>,
    /// Trace of `z_k` for `-Q~`, i.e. approximations of `m - rho(A)`.
    pub trace: crate::iterate::IterationTrace<f64>,
    /// Row-sum shift `m`.
    pub shift: f64,
    /// The initial shift actually used.
    pub z0: f64,
    /// Whether the tridiagonal recurrences were used.
    pub fast_path: bool,
}

/// Maximal eigenpair of `A` through the dense (or tridiagonal) pipeline.
pub fn general_rqi(a: &DenseMatrix<f64>, opts: &GeneralOptions) -> Result<GeneralRun> {
    if let Some((i, _)) = a.first_negative_offdiagonal() {
        return Err(Error::NonPositive { what: "off-diagonal", index: i });
    }
    let (qc, m) = shift_to_qc(a);
    if a.order() == 1 {
        return Ok(trivial(a[(0, 0)], m));
    }
    if opts.tridiagonal_fast_path && qc.is_tridiagonal() {
        if let Ok(t) = TridiagonalSystem::from_dense(&qc) {
            if t.has_killing() {
                return fast_path(&t, m, opts);
            }
        }
    }
    let init = compute_general(&qc)?;
    let z0 = match opts.z0 {
        GeneralZ0::Safe => init.z0_safe()?,
        GeneralZ0::Rayleigh => init.z0_rayleigh,
        GeneralZ0::Value(z) => z,
    };
    let v0 = match opts.v0 {
        InitialVector::Efficient => init.v0.clone(),
        InitialVector::Uniform => vec![1.0; qc.order()],
    };
    let q = &init.q_tilde;
    let neg = q.negated();
    let apply = |v: &[f64]| neg.matvec_unchecked(v);
    let solve = |z: f64, v: &[f64]| -> Result<Vec<f64>> {
        lu_factor(&neg.shifted(-z))?.solve(v)
    };
    let driver = Driver {
        apply: &apply,
        solve: &solve,
        geometry: Geometry::Weighted(&init.mu),
        update: Update::Rayleigh,
        scale: q.max_abs(),
        stop: opts.stop,
        snapshots: opts.snapshots,
        clock: opts.clock,
    };
    let out = driver.run(v0, Some(z0))?;
    let mut g: Vec<f64> = init.h.iter().zip(&out.v).map(|(h, v)| h * v).collect();
    normalize_last(&mut g);
    let result = EigenpairResult {
        eigenvalue: m - out.z,
        eigenvector: g,
        settled_at: out.settled_at,
        steps: out.steps,
        residual: out.residual,
        shift: Some(m),
        shifted_value: Some(out.z),
        h: Some(init.h),
        normalization: Normalization::LastComponentOne,
    };
    Ok(GeneralRun { result, trace: out.trace, shift: m, z0, fast_path: false })
}

fn trivial(value: f64, m: f64) -> GeneralRun {
    let result = EigenpairResult {
        eigenvalue: value,
        eigenvector: vec![1.0],
        settled_at: 0,
        steps: 0,
        residual: 0.0,
        shift: Some(m),
        shifted_value: Some(0.0),
        h: Some(vec![1.0]),
        normalization: Normalization::LastComponentOne,
    };
    let trace = crate::iterate::IterationTrace {
        steps: vec![crate::iterate::TraceStep { k: 0, z: 0.0, residual: 0.0, seconds: 0.0 }],
        snapshots: None,
        termination: crate::iterate::Termination::Converged,
    };
    GeneralRun { result, trace, shift: m, z0: 0.0, fast_path: false }
}

fn fast_path(t: &TridiagonalSystem, m: f64, opts: &GeneralOptions) -> Result<GeneralRun> {
    let transform = tridiag::compute_h(t)?;
    let initials = tridiag::compute_initials(&transform.transformed)?;
    let phi = &initials.phi;
    let z0 = match opts.z0 {
        GeneralZ0::Safe => {
            let phi1 = phi[1] / phi[0];
            safe_shift(phi, initials.mu.weights()).ok_or(Error::SafeFormulaUnavailable { phi1 })?
        }
        GeneralZ0::Rayleigh => initials.rayleigh,
        GeneralZ0::Value(z) => z,
    };
    let topts = TridiagOptions {
        stop: opts.stop,
        z0: match opts.z0 {
            GeneralZ0::Rayleigh => TridiagZ0::Rayleigh,
            _ => TridiagZ0::Value(z0),
        },
        v0: opts.v0,
        snapshots: opts.snapshots,
        clock: opts.clock,
        ..TridiagOptions::default()
    };
    let run = tridiag::run_prepared(transform, initials, &topts)?;
    let result = run.recover(m);
    let Run { trace, .. } = run.run;
    Ok(GeneralRun { result, trace, shift: m, z0, fast_path: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::{compute_h, compute_initials, tridiag_rqi};
    use proptest::prelude::*;

    fn squares(n: usize) -> TridiagonalSystem {
        let a = (1..=n).map(|k| (k * k) as f64).collect();
        let b = (0..n).map(|k| ((k + 1) * (k + 1)) as f64).collect();
        let mut c = vec![0.0; n + 1];
        c[n] = ((n + 1) * (n + 1)) as f64;
        TridiagonalSystem::new(a, b, c).unwrap()
    }

    fn dense_only() -> GeneralOptions {
        GeneralOptions { tridiagonal_fast_path: false, ..Default::default() }
    }

    #[test]
    fn h_two_by_two() {
        let qc = DenseMatrix::from_rows(&[&[-2.0, 1.0], &[1.0, -1.0]]).unwrap();
        assert_eq!(solve_h_general(&qc).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn h_is_one_for_conservative_rows() {
        let qc = squares(7).to_dense();
        for x in solve_h_general(&qc).unwrap() {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn h_matches_recurrence_with_left_killing() {
        let mut c = vec![0.0; 8];
        c[0] = 1.0;
        c[7] = 64.0;
        let t = TridiagonalSystem::new(
            squares(7).a_seq().to_vec(),
            squares(7).b_seq().to_vec(),
            c,
        )
        .unwrap();
        let dense = solve_h_general(&t.to_dense()).unwrap();
        let rec = compute_h(&t).unwrap().h;
        for (x, e) in dense.iter().zip(&rec) {
            assert!(((x - e) / e).abs() < 1e-10);
        }
    }

    #[test]
    fn phi_two_by_two() {
        let q = DenseMatrix::from_rows(&[&[-1.0, 1.0], &[1.0, -5.0]]).unwrap();
        let (p, phi) = solve_phi_general(&q).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 1.0, 0.2, 0.0]);
        assert!((phi[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn phi_and_v0_match_tail_formula() {
        let t = squares(7);
        let d = compute_initials(&t).unwrap();
        let q = t.to_dense();
        let (_, phi) = solve_phi_general(&q).unwrap();
        for (x, e) in phi.iter().zip(&d.phi) {
            assert!((x - e / d.phi[0]).abs() < 1e-10);
        }
        let mu = solve_mu_general(&q).unwrap();
        let (v0, rq, _) = initials_general(&q, &phi, &mu).unwrap();
        for (x, e) in v0.iter().zip(&d.v0) {
            assert!((x - e).abs() < 1e-10);
        }
        assert!((rq - d.rayleigh).abs() < 1e-10);
    }

    #[test]
    fn mu_is_one_for_squares() {
        let mu = solve_mu_general(&squares(7).to_dense()).unwrap();
        for x in mu.weights() {
            assert!((x - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rows_of_p_are_stochastic_without_killing() {
        let p = jump_matrix(&squares(5).to_dense()).unwrap();
        for i in 0..5 {
            let s: f64 = p.row(i).iter().sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn safe_formula_needs_phi1_below_one() {
        assert!(safe_shift(&[1.0, 1.0], &[1.0, 1.0]).is_none());
        let small = safe_shift(&[1.0, 1.0 - 1e-9], &[1.0, 1.0]).unwrap();
        assert!(small > 0.0 && small < 1e-8);
    }

    #[test]
    fn dense_input_reproduces_tridiagonal_run() {
        let a = squares(7).to_dense();
        let dense = general_rqi(&a, &dense_only()).unwrap();
        let fast = general_rqi(&a, &GeneralOptions::default()).unwrap();
        assert!(fast.fast_path && !dense.fast_path);
        let reference = tridiag_rqi(&squares(7), &TridiagOptions::default()).unwrap().recover(0.0);
        assert!((dense.result.eigenvalue - reference.eigenvalue).abs() < 1e-10);
        assert!((fast.result.eigenvalue - reference.eigenvalue).abs() < 1e-12);
        for (x, e) in dense.result.eigenvector.iter().zip(&reference.eigenvector) {
            assert!(((x - e) / e).abs() < 1e-8);
        }
        assert!(dense.result.settled_at <= 2);
    }

    #[test]
    fn one_by_one_is_trivial() {
        let a = DenseMatrix::from_rows(&[&[-3.0]]).unwrap();
        let r = general_rqi(&a, &GeneralOptions::default()).unwrap();
        assert_eq!(r.result.eigenvalue, -3.0);
    }

    #[test]
    fn negative_offdiagonal_is_rejected() {
        let a = DenseMatrix::from_rows(&[&[1.0, -1.0], &[1.0, 1.0]]).unwrap();
        let err = general_rqi(&a, &GeneralOptions::default()).unwrap_err();
        assert_eq!(err, Error::NonPositive { what: "off-diagonal", index: 0 });
    }

    #[test]
    fn constant_row_sums_fall_back_to_value() {
        // every row sums to 5, so the safe formula has phi_1 = 1
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 2.0], &[3.0, 1.0, 1.0], &[2.0, 2.0, 1.0]])
            .unwrap();
        let err = general_rqi(&a, &dense_only()).unwrap_err();
        assert!(matches!(err, Error::SafeFormulaUnavailable { .. }));
        let opts = GeneralOptions { z0: GeneralZ0::Value(0.0), ..dense_only() };
        let r = general_rqi(&a, &opts).unwrap();
        assert!((r.result.eigenvalue - 5.0).abs() < 1e-10);
    }

    fn irreducible(n: usize) -> impl Strategy<Value = DenseMatrix<f64>> {
        proptest::collection::vec(0.1..3.0f64, n * n).prop_map(move |mut data| {
            for i in 0..n {
                data[i * n + i] -= 2.0;
            }
            DenseMatrix::new(n, data).unwrap()
        })
    }

    proptest! {
        #[test]
        fn transform_rows_vanish(a in (2usize..9).prop_flat_map(irreducible)) {
            let (qc, _) = shift_to_qc(&a);
            let init = compute_general(&qc).unwrap();
            let n = qc.order() - 1;
            let scale = init.q_tilde.max_abs();
            for i in 0..n {
                let s: f64 = init.q_tilde.row(i).iter().sum();
                prop_assert!(s.abs() <= 1e-10 * scale);
            }
            let qt = init.q_tilde.transpose().matvec(init.mu.weights()).unwrap();
            for x in qt.iter().take(n) {
                prop_assert!(x.abs() <= 1e-10 * scale * 10.0);
            }
            prop_assert!(init.phi.iter().all(|&x| x > 0.0));
        }

        #[test]
        fn recovered_pair_is_an_eigenpair(a in (2usize..9).prop_flat_map(irreducible)) {
            let r = general_rqi(&a, &GeneralOptions { z0: GeneralZ0::Rayleigh, ..dense_only() });
            if let Ok(r) = r {
                let g = &r.result.eigenvector;
                let ag = a.matvec(g).unwrap();
                let gmax = numat::inf_norm(g);
                for (x, y) in ag.iter().zip(g) {
                    prop_assert!((x - r.result.eigenvalue * y).abs() <= 1e-8 * gmax * a.max_abs().max(1.0));
                }
            }
        }

        #[test]
        fn specialization_matches_recurrences(
            a in proptest::collection::vec(0.5..2.0f64, 6),
            b in proptest::collection::vec(0.5..2.0f64, 6),
            c in proptest::collection::vec(0.0..1.0f64, 7),
        ) {
            let mut c = c;
            c[6] += 0.5;
            let t = TridiagonalSystem::new(a, b, c).unwrap();
            let ht = compute_h(&t).unwrap();
            let h = solve_h_general(&t.to_dense()).unwrap();
            for (x, e) in h.iter().zip(&ht.h) {
                prop_assert!(((x - e) / e).abs() < 1e-10);
            }
            let qt = h_transform_general(&t.to_dense(), &h).unwrap();
            let d = compute_initials(&ht.transformed).unwrap();
            let mu = solve_mu_general(&qt).unwrap();
            for (x, e) in mu.weights().iter().zip(d.mu.weights()) {
                prop_assert!(((x - e) / e).abs() < 1e-10);
            }
            let (_, phi) = solve_phi_general(&qt).unwrap();
            for (x, e) in phi.iter().zip(&d.phi) {
                prop_assert!((x - e / d.phi[0]).abs() < 1e-10);
            }
        }
    }
}
