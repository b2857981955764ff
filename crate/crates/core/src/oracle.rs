//! Desk-scale brute-force verification: support enumeration for ground-truth
//! local/global minimizers, complexity-constant evaluation, and the
//! multiplier-bound t-hat computation for cone problems.

use ndarray::{Array1, ArrayView1};

use crate::cone::make_penalty;
use crate::error::{CoreError, Result};
use crate::geometry::{dist_dual_cone, norm, project_box};
use crate::iht::delta_lower_bound;
use crate::model::{
    zero_set, ConeL0Problem, IndexSet, L0Problem, SmoothOracle, REPORT_ZERO_TOL,
};
use crate::pg::{pg_solve, spectral_pg_solve, PGConfig, PGStatus};

/// Default cap on the enumerable dimension (2^12 = 4096 restricted solves).
pub const DEFAULT_N_CAP: usize = 12;

#[derive(Debug, Clone)]
pub struct SupportRecord {
    /// The pinned zero set I of the restricted problem.
    pub indices: IndexSet,
    pub feasible: bool,
    pub x: Array1<f64>,
    /// f at the restricted solution.
    pub f_value: f64,
    /// F = f + lambda * nnz with the realized zero pattern.
    pub objective_value: f64,
    /// Realized zero pattern equals the pinned set.
    pub consistent: bool,
    pub is_local_min: bool,
    /// Norm of the recovered multiplier (cone problems only).
    pub mu_norm: Option<f64>,
    /// The restricted solve reached its tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    /// One record per subset of {0..n-1}, ordered by subset bitmask.
    pub records: Vec<SupportRecord>,
    pub best_x: Array1<f64>,
    /// F* = min F over consistent feasible records.
    pub best_value: f64,
    /// Certified local minimizers (deduplicated).
    pub locals: Vec<Array1<f64>>,
    /// max over feasible supports of the recovered multiplier norm.
    pub t_hat: Option<f64>,
}

impl EnumerationResult {
    /// Distance from `x` to the nearest certified local minimizer.
    pub fn nearest_local(&self, x: &ArrayView1<f64>) -> Option<(f64, &Array1<f64>)> {
        self.locals
            .iter()
            .map(|loc| (norm(&(loc - x).view()), loc))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Distance from `x` to the nearest certified local minimizer whose zero
    /// pattern (at `zero_tol`) equals that of `x`. Restricted solves compute
    /// pinned coordinates exactly, so this is the right way to compare a
    /// solver support against the oracle.
    pub fn nearest_local_with_support(
        &self,
        x: &ArrayView1<f64>,
        zero_tol: f64,
    ) -> Option<(f64, &Array1<f64>)> {
        let target = zero_set(x, zero_tol);
        self.records
            .iter()
            .filter(|r| r.is_local_min && zero_set(&r.x.view(), zero_tol) == target)
            .map(|r| (norm(&(&r.x - x).view()), &r.x))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 63 {
        return Err(CoreError::EnumerationTooLarge { n, cap });
    }
    Ok(())
}

fn push_local(locals: &mut Vec<Array1<f64>>, x: &Array1<f64>) {
    // Near-duplicate points arise when distinct pinned sets share a
    // minimizer; keep the representative with the most exact zeros, since
    // pinned coordinates are computed exactly.
    for existing in locals.iter_mut() {
        if norm(&(&*existing - x).view()) <= 1e-8 {
            if zero_set(&x.view(), REPORT_ZERO_TOL).len()
                > zero_set(&existing.view(), REPORT_ZERO_TOL).len()
            {
                *existing = x.clone();
            }
            return;
        }
    }
    locals.push(x.clone());
}

/// Enumerate every restricted problem min{f(x) : x in B_I} for I over all
/// subsets, certify local minimizers by re-solving on the realized support,
/// and report the global minimum of F.
pub fn enumerate_box(problem: &L0Problem, tol: f64) -> Result<EnumerationResult> {
    enumerate_box_capped(problem, tol, DEFAULT_N_CAP)
}

pub fn enumerate_box_capped(
    problem: &L0Problem,
    tol: f64,
    n_cap: usize,
) -> Result<EnumerationResult> {
    let n = problem.dim();
    check_cap(n, n_cap)?;
    if !(tol > 0.0) {
        return Err(CoreError::InvalidParameter("tolerance must be positive".into()));
    }
    let obj = &problem.objective;
    let lambda = problem.lambda;
    let bounds = &problem.bounds;
    let grad_tol = tol * 1e-2;
    let cfg = PGConfig {
        l: obj.lipschitz(),
        stop_grad_tol: grad_tol,
        max_iters: 400_000,
        strong_modulus_hint: obj.strong_modulus(),
        record_trace: false,
    };
    let x0 = Array1::zeros(n);

    let solve_restricted = |pin: &IndexSet| -> Result<(Array1<f64>, f64, bool)> {
        let out = pg_solve(obj, bounds, pin, &cfg, &x0.view())?;
        Ok((out.x, out.value, out.status == PGStatus::Converged))
    };

    let mut records = Vec::with_capacity(1usize << n);
    let mut locals = Vec::new();
    let mut best: Option<(f64, Array1<f64>)> = None;
    for bits in 0u64..(1u64 << n) {
        let pin = IndexSet::from_bits(bits, n);
        let (x, f_value, converged) = solve_restricted(&pin)?;
        let realized = zero_set(&x.view(), REPORT_ZERO_TOL);
        let consistent = realized == pin;
        let objective_value = f_value + lambda * (n - realized.len()) as f64;
        let is_local_min = if !converged {
            false
        } else if consistent {
            true
        } else {
            // Extra zeros showed up; certify against the realized support.
            let (_, f_realized, ok) = solve_restricted(&realized)?;
            ok && f_value <= f_realized + tol
        };
        if is_local_min {
            push_local(&mut locals, &x);
        }
        if consistent && converged {
            match &best {
                Some((bv, _)) if *bv <= objective_value => {}
                _ => best = Some((objective_value, x.clone())),
            }
        }
        records.push(SupportRecord {
            indices: pin,
            feasible: true,
            x,
            f_value,
            objective_value,
            consistent,
            is_local_min,
            mu_norm: None,
            converged,
        });
    }
    let (best_value, best_x) = best.ok_or_else(|| {
        CoreError::InvalidParameter("enumeration produced no consistent record".into())
    })?;
    Ok(EnumerationResult { records, best_x, best_value, locals, t_hat: None })
}

/// Per-support restricted cone programs solved by quadratic-penalty
/// continuation: rho is doubled until d_{K*}(Ax - b) <= tol * 1e-3 (or the
/// distance plateaus, which flags the support infeasible). The multiplier is
/// recovered at the final rho; t-hat is the max multiplier norm over
/// feasible supports.
pub fn enumerate_cone(problem: &ConeL0Problem, tol: f64) -> Result<EnumerationResult> {
    enumerate_cone_capped(problem, tol, DEFAULT_N_CAP)
}

pub fn enumerate_cone_capped(
    problem: &ConeL0Problem,
    tol: f64,
    n_cap: usize,
) -> Result<EnumerationResult> {
    let n = problem.dim();
    check_cap(n, n_cap)?;
    if !(tol > 0.0) {
        return Err(CoreError::InvalidParameter("tolerance must be positive".into()));
    }
    let lambda = problem.lambda;
    let bounds = &problem.bounds;
    let d_target = tol * 1e-3;

    struct ContinuationOutcome {
        x: Array1<f64>,
        mu: Array1<f64>,
        dist: f64,
        feasible: bool,
        converged: bool,
    }

    let continuation = |pin: &IndexSet| -> Result<ContinuationOutcome> {
        let mut rho = 1.0f64;
        let mut x = Array1::zeros(n);
        let mut prev_dist = f64::INFINITY;
        let mut plateau = 0usize;
        let mut converged = true;
        loop {
            let pen = make_penalty(problem, rho, 0.0)?;
            let l_pen = pen.lipschitz();
            let gtol = (1e-10 * l_pen).max(1e-12);
            let out = spectral_pg_solve(&pen, bounds, pin, &x.view(), gtol, 200_000);
            if out.status == PGStatus::IterationCapped {
                converged = false;
            }
            x = out.x;
            let y = problem.a.dot(&x) - &problem.b;
            let dist = dist_dual_cone(&y.view(), &problem.cone);
            if dist <= d_target {
                let pen_grad = pen.grad(&x.view());
                let shifted = &x - &(&pen_grad / l_pen);
                let x_plus = crate::geometry::project_box_restricted(&shifted.view(), bounds, pin);
                let y_plus = problem.a.dot(&x_plus) - &problem.b;
                let proj = crate::geometry::project_dual_cone(&y_plus.view(), &problem.cone);
                let mu = (&y_plus - &proj) * rho;
                return Ok(ContinuationOutcome { x: x_plus, mu, dist, feasible: true, converged });
            }
            // Feasible supports shed distance roughly like 1/rho per
            // doubling; a persistent plateau at large rho means the
            // restricted program is infeasible.
            if dist > 0.6 * prev_dist && rho >= 1e6 {
                plateau += 1;
                if plateau >= 4 {
                    return Ok(ContinuationOutcome {
                        x,
                        mu: Array1::zeros(problem.constraint_dim()),
                        dist,
                        feasible: false,
                        converged,
                    });
                }
            } else {
                plateau = 0;
            }
            prev_dist = dist;
            rho *= 2.0;
            if rho > 1e16 {
                return Ok(ContinuationOutcome {
                    x,
                    mu: Array1::zeros(problem.constraint_dim()),
                    dist,
                    feasible: false,
                    converged: false,
                });
            }
        }
    };

    let mut records = Vec::with_capacity(1usize << n);
    let mut locals = Vec::new();
    let mut best: Option<(f64, Array1<f64>)> = None;
    let mut t_hat = 0.0f64;
    let mut any_feasible = false;
    for bits in 0u64..(1u64 << n) {
        let pin = IndexSet::from_bits(bits, n);
        let out = continuation(&pin)?;
        let f_value = problem.objective.value(&out.x.view());
        let realized = zero_set(&out.x.view(), REPORT_ZERO_TOL);
        let consistent = realized == pin;
        let objective_value = f_value + lambda * (n - realized.len()) as f64;
        let mu_norm = out.feasible.then(|| norm(&out.mu.view()));
        if out.feasible && out.converged {
            any_feasible = true;
            t_hat = t_hat.max(mu_norm.unwrap_or(0.0));
        }
        let is_local_min = if !(out.feasible && out.converged) {
            false
        } else if consistent {
            true
        } else {
            let re = continuation(&realized)?;
            re.feasible && re.converged && f_value <= problem.objective.value(&re.x.view()) + tol
        };
        if is_local_min {
            push_local(&mut locals, &out.x);
        }
        if out.feasible && out.converged && consistent {
            match &best {
                Some((bv, _)) if *bv <= objective_value => {}
                _ => best = Some((objective_value, out.x.clone())),
            }
        }
        records.push(SupportRecord {
            indices: pin,
            feasible: out.feasible,
            x: out.x,
            f_value,
            objective_value,
            consistent,
            is_local_min,
            mu_norm,
            converged: out.converged,
        });
        let _ = out.dist;
    }
    let (best_value, best_x) = best.ok_or_else(|| {
        CoreError::ContinuationStalled("no feasible consistent support found".into())
    })?;
    Ok(EnumerationResult {
        records,
        best_x,
        best_value,
        locals,
        t_hat: any_feasible.then_some(t_hat),
    })
}

#[derive(Debug, Clone)]
pub struct StrongConstants {
    pub gamma: f64,
    pub c: f64,
    pub d: f64,
    pub omega: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct ComplexityConstants {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// floor(2 (F(x0) - F*) / ((L - L_f) delta^2)) with the oracle's global F*.
    pub j_budget: f64,
    /// Present only when the objective is strongly convex and alpha > 0.
    pub strong: Option<StrongConstants>,
}

/// Evaluate the complexity constants over all restricted minimizers found by
/// the enumeration: alpha is the smallest margin of the thresholding test at
/// any restricted minimizer, beta the largest magnitude of its ingredients.
/// Logs are base 2, matching the gap-halving argument behind the bounds.
pub fn complexity_constants(
    problem: &L0Problem,
    l: f64,
    x0: &ArrayView1<f64>,
) -> Result<ComplexityConstants> {
    complexity_constants_capped(problem, l, x0, DEFAULT_N_CAP)
}

pub fn complexity_constants_capped(
    problem: &L0Problem,
    l: f64,
    x0: &ArrayView1<f64>,
    n_cap: usize,
) -> Result<ComplexityConstants> {
    let n = problem.dim();
    check_cap(n, n_cap)?;
    if !(l > problem.objective.lipschitz()) {
        return Err(CoreError::InvalidParameter(format!(
            "complexity constants need L > L_f, got {l} <= {}",
            problem.objective.lipschitz()
        )));
    }
    let enumeration = enumerate_box_capped(problem, 1e-8, n_cap)?;
    let lambda = problem.lambda;
    let threshold = 2.0 * lambda / l;
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for rec in &enumeration.records {
        let grad = problem.objective.grad(&rec.x.view());
        let s = Array1::from_shape_fn(n, |i| rec.x[i] - grad[i] / l);
        let p = project_box(&s.view(), &problem.bounds);
        for i in 0..n {
            let gain = s[i] * s[i] - (p[i] - s[i]) * (p[i] - s[i]);
            alpha = alpha.min((gain - threshold).abs());
            beta = beta.max(s[i].abs() + (p[i] - s[i]).abs());
        }
    }
    let delta = delta_lower_bound(&problem.bounds, lambda, l)?.0;
    let f0 = problem.total_value(&project_box(x0, &problem.bounds).view());
    let gap0 = f0 - enumeration.best_value;
    let l_f = problem.objective.lipschitz();
    let denom = (l - l_f) * delta * delta;
    let j_budget = if gap0 <= 0.0 || !denom.is_finite() || denom <= 0.0 {
        0.0
    } else {
        (2.0 * gap0 / denom).floor()
    };

    let sigma = problem.objective.strong_modulus();
    let strong = if sigma > 0.0 && alpha > 0.0 && gap0 > 0.0 && denom > 0.0 {
        let gamma = sigma * ((2.0 * alpha + beta * beta).sqrt() - beta).powi(2) / 32.0;
        if gamma > 0.0 {
            let c = denom / (2.0 * gap0);
            let d = 2.0 * gap0.log2() + 4.0 - 2.0 * gamma.log2() + c;
            // Concave parabola (d - 2c) t - c t^2 maximized at the clamped vertex.
            let vertex = (d - 2.0 * c) / (2.0 * c);
            let t_star = vertex.clamp(0.0, j_budget);
            let omega = (d - 2.0 * c) * t_star - c * t_star * t_star;
            let theta = gap0 * 2.0f64.powf((omega + 3.0) / 2.0);
            Some(StrongConstants { gamma, c, d, omega, theta })
        } else {
            None
        }
    } else {
        None
    };

    Ok(ComplexityConstants { alpha, beta, delta, j_budget, strong })
}

/// Central-difference gradient check: returns max_i |fd_i - g_i| / max(1, |g_i|).
pub fn fd_gradient_check(
    oracle: &dyn SmoothOracle,
    x: &ArrayView1<f64>,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(CoreError::InvalidParameter(format!("step h must be positive, got {h}")));
    }
    let (_, g) = oracle.value_grad(x);
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let mut xp = x.to_owned();
        let mut xm = x.to_owned();
        xp[i] += h;
        xm[i] -= h;
        let fd = (oracle.value(&xp.view()) - oracle.value(&xm.view())) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConeBlock, ConeSpec};
    use crate::iht::{iht_solve, IHTConfig};
    use crate::model::{ExtendedBox, SmoothObjective};
    use ndarray::{array, Array2};

    fn scalar_problem(lambda: f64) -> L0Problem {
        // f = 1/2 (x-1)^2 over [-2, 2].
        let obj = SmoothObjective::quadratic(array![[1.0]], array![-1.0]).unwrap();
        L0Problem::new(obj, ExtendedBox::symmetric(1, 2.0).unwrap(), lambda).unwrap()
    }

    #[test]
    fn enumerate_scalar_example() {
        let p = scalar_problem(0.3);
        let result = enumerate_box(&p, 1e-8).unwrap();
        assert_eq!(result.records.len(), 2);
        // Empty pin: x = 1, F = f(1) - f offset... with Q=[[1]],c=[-1]:
        // f(x) = x^2/2 - x, so f(1) = -0.5 and f(0) = 0. F relative ordering
        // matches the (x-1)^2/2 form shifted by -0.5.
        let free = &result.records[0];
        assert!((free.x[0] - 1.0).abs() < 1e-6);
        assert!((free.objective_value - (-0.5 + 0.3)).abs() < 1e-6);
        let pinned = &result.records[1];
        assert_eq!(pinned.x[0], 0.0);
        assert!((pinned.objective_value - 0.0).abs() < 1e-12);
        // Global is the free record; both are local minimizers.
        assert!((result.best_value - (-0.2)).abs() < 1e-6);
        assert_eq!(result.locals.len(), 2);
    }

    #[test]
    fn enumerate_lambda_dominates() {
        let p = scalar_problem(5.0);
        let result = enumerate_box(&p, 1e-8).unwrap();
        assert_eq!(result.best_x[0], 0.0);
        assert!((result.best_value - 0.0).abs() < 1e-12);
    }

    #[test]
    fn solver_agrees_with_oracle() {
        let obj = SmoothObjective::quadratic(Array2::eye(2), array![-3.0, -0.01]).unwrap();
        let p = L0Problem::new(obj, ExtendedBox::symmetric(2, 5.0).unwrap(), 0.5).unwrap();
        let report = iht_solve(&p, &IHTConfig::default(), &array![0.0, 0.0].view()).unwrap();
        let oracle = enumerate_box(&p, 1e-8).unwrap();
        let (dist, _) = oracle.nearest_local(&report.x_star.view()).unwrap();
        assert!(dist <= 1e-6, "solver point {dist} away from nearest oracle local");
        assert!(report.objective_value >= oracle.best_value - 1e-9);
    }

    #[test]
    fn local_minimizers_are_threshold_fixed_points() {
        // Fixed-point soundness needs L large enough that the thresholding
        // margin is positive at every local minimizer: nonzero coordinates
        // survive once L > 2 lambda / min_i x_i^2.
        let obj = SmoothObjective::quadratic(Array2::eye(2), array![-3.0, -0.01]).unwrap();
        let p = L0Problem::new(obj, ExtendedBox::symmetric(2, 5.0).unwrap(), 0.5).unwrap();
        let oracle = enumerate_box(&p, 1e-8).unwrap();
        let smallest_nonzero = oracle
            .locals
            .iter()
            .flat_map(|loc| loc.iter().filter(|v| v.abs() > 1e-9).map(|v| v.abs()))
            .fold(f64::INFINITY, f64::min);
        let l = (1.5 * p.objective.lipschitz())
            .max(3.0 * p.lambda / (smallest_nonzero * smallest_nonzero));
        for loc in &oracle.locals {
            let stepped = crate::iht::hard_threshold_step(
                &loc.view(),
                &p.objective,
                &p.bounds,
                p.lambda,
                l,
                true,
            );
            assert_eq!(
                zero_set(&stepped.view(), 1e-9),
                zero_set(&loc.view(), 1e-9),
                "support moved at a certified local minimizer"
            );
        }
    }

    #[test]
    fn cone_enumeration_closed_form_multiplier() {
        // n=1 equality-constrained: min 1/2 x^2 s.t. x = 2 on [-5,5].
        // KKT: x + mu = 0 at x = 2 -> mu = -2, |mu| = 2.
        let obj = SmoothObjective::quadratic(array![[1.0]], array![0.0]).unwrap();
        let p = ConeL0Problem::new(
            obj,
            ExtendedBox::symmetric(1, 5.0).unwrap(),
            0.1,
            array![[1.0]],
            array![2.0],
            ConeSpec::new(vec![ConeBlock::Free(1)]).unwrap(),
        )
        .unwrap();
        let result = enumerate_cone(&p, 1e-1).unwrap();
        let free = &result.records[0];
        assert!(free.feasible);
        assert!((free.x[0] - 2.0).abs() < 1e-3);
        assert!((free.mu_norm.unwrap() - 2.0).abs() < 1e-4);
        // Pinned support forces x = 0 which violates x = 2: infeasible.
        let pinned = &result.records[1];
        assert!(!pinned.feasible);
        assert!((result.t_hat.unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn cone_enumeration_inactive_constraint_zero_t_hat() {
        let obj = SmoothObjective::quadratic(array![[1.0]], array![-1.0]).unwrap();
        let p = ConeL0Problem::new(
            obj,
            ExtendedBox::symmetric(1, 5.0).unwrap(),
            0.1,
            array![[1.0]],
            array![-10.0],
            ConeSpec::new(vec![ConeBlock::NonnegOrthant(1)]).unwrap(),
        )
        .unwrap();
        let result = enumerate_cone(&p, 1e-2).unwrap();
        assert!(result.t_hat.unwrap() < 1e-6);
    }

    #[test]
    fn enumeration_refuses_large_n() {
        let obj = SmoothObjective::quadratic(Array2::eye(13), Array1::zeros(13)).unwrap();
        let p = L0Problem::new(obj, ExtendedBox::symmetric(13, 1.0).unwrap(), 0.1).unwrap();
        assert!(matches!(
            enumerate_box(&p, 1e-6),
            Err(CoreError::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn complexity_constants_scalar() {
        let p = scalar_problem(0.3);
        let l = 2.0;
        let consts = complexity_constants(&p, l, &array![2.0].view()).unwrap();
        // Restricted minimizers: x = 1 (free) and x = 0 (pinned).
        // s_L(1) = 1 - 0/2 = 1, gain 1; s_L(0) = 0.5, gain 0.25; thr = 0.3.
        let expected_alpha = (0.25f64 - 0.3).abs().min((1.0f64 - 0.3).abs());
        assert!((consts.alpha - expected_alpha).abs() < 1e-6);
        assert!(consts.beta >= 1.0 - 1e-6);
        assert!((consts.delta - (0.3f64).sqrt()).abs() < 1e-9);
        assert!(consts.strong.is_some());
        let s = consts.strong.unwrap();
        assert!(s.gamma > 0.0 && s.theta > 0.0);
    }

    #[test]
    fn complexity_alpha_zero_degenerate() {
        // lambda tuned so the free minimizer sits exactly at the threshold:
        // at x* = 1, s = 1, p = 1, gain = 1; thr = 2 lambda / L = 1 when
        // lambda = L/2 = 1. alpha = 0 and the strong constants are omitted.
        let p = scalar_problem(1.0);
        let consts = complexity_constants(&p, 2.0, &array![2.0].view()).unwrap();
        assert!(consts.alpha < 1e-6);
        assert!(consts.strong.is_none());
    }

    #[test]
    fn budget_covers_observed_support_changes() {
        let obj = SmoothObjective::quadratic(Array2::eye(2), array![-3.0, -0.01]).unwrap();
        let p = L0Problem::new(obj, ExtendedBox::symmetric(2, 5.0).unwrap(), 0.5).unwrap();
        let x0 = array![-4.0, 4.0];
        let report = iht_solve(&p, &IHTConfig::default(), &x0.view()).unwrap();
        let l = 1.1 * p.objective.lipschitz();
        let consts = complexity_constants(&p, l, &x0.view()).unwrap();
        assert!(report.support_changes as f64 <= consts.j_budget);
    }

    #[test]
    fn t_hat_independent_of_lambda() {
        // The restricted programs behind t-hat do not involve lambda, so the
        // recovered multiplier bound must not move when lambda changes.
        let make = |lambda: f64| {
            let obj = SmoothObjective::quadratic(Array2::eye(2), array![-1.0, -0.5]).unwrap();
            ConeL0Problem::new(
                obj,
                ExtendedBox::symmetric(2, 4.0).unwrap(),
                lambda,
                array![[1.0, 1.0]],
                array![3.0],
                ConeSpec::new(vec![ConeBlock::Free(1)]).unwrap(),
            )
            .unwrap()
        };
        let a = enumerate_cone(&make(0.05), 1e-2).unwrap().t_hat.unwrap();
        let b = enumerate_cone(&make(0.8), 1e-2).unwrap().t_hat.unwrap();
        assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "t_hat moved: {a} vs {b}");
    }

    #[test]
    fn lagrange_gap_bound_spot_check() {
        // f(x) - f*_I >= -t_hat * d_{K*}(Ax - b) over B_I, spot-checked on a
        // small instance with the oracle's f*_I and (2x inflated) t_hat.
        use rand::{RngExt, SeedableRng};
        let obj = SmoothObjective::quadratic(Array2::eye(2), array![-2.0, -1.5]).unwrap();
        let p = ConeL0Problem::new(
            obj,
            ExtendedBox::symmetric(2, 5.0).unwrap(),
            0.1,
            array![[1.0, 1.0]],
            array![4.0],
            ConeSpec::new(vec![ConeBlock::NonnegOrthant(1)]).unwrap(),
        )
        .unwrap();
        let result = enumerate_cone(&p, 1e-3).unwrap();
        let t_hat = 2.0 * result.t_hat.unwrap();
        let mut rng = rand_pcg::Pcg64::seed_from_u64(8);
        for rec in result.records.iter().filter(|r| r.feasible && r.converged) {
            let mask = rec.indices.mask(2);
            for _ in 0..50 {
                let x = Array1::from_shape_fn(2, |i| {
                    if mask[i] {
                        0.0
                    } else {
                        10.0 * rng.random::<f64>() - 5.0
                    }
                });
                let y = p.a.dot(&x) - &p.b;
                let d = dist_dual_cone(&y.view(), &p.cone);
                let fx = p.objective.value(&x.view());
                assert!(
                    fx - rec.f_value >= -t_hat * d - 1e-6,
                    "gap bound violated on support {:?}: {} < {}",
                    rec.indices.as_slice(),
                    fx - rec.f_value,
                    -t_hat * d
                );
            }
        }
    }

    #[test]
    fn fd_check_quadratic_tight() {
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![1.0, 3.0]),
            array![0.5, -0.25],
        )
        .unwrap();
        let err = fd_gradient_check(&obj, &array![0.7, -0.3].view(), 1e-6).unwrap();
        assert!(err <= 1e-7);
        assert!(fd_gradient_check(&obj, &array![0.7, -0.3].view(), 0.0).is_err());
    }
}
