//! Iterative hard thresholding for min f(x) + lambda ||x||_0 over a box:
//! the fixed-L method, the dynamic-L variant with a sufficient-descent test
//! and spectral initialization, the magnitude lower bound delta, and the
//! restricted refinement that finishes a run once the support stabilizes.

use ndarray::{Array1, ArrayView1};

use crate::error::{CoreError, Result};
use crate::geometry::{norm, project_box};
use crate::model::{
    nnz_exact, zero_set, ExtendedBox, IndexSet, L0Problem, SmoothObjective, SmoothOracle,
};
use crate::pg::{pg_solve, PGConfig, PGStatus};

#[derive(Debug, Clone)]
pub struct IHTConfig {
    /// The fixed method runs with L = l_factor * L_f; must be > 1 so L > L_f.
    pub l_factor: f64,
    /// Tie rule of the thresholding step: prefer the zero branch when the
    /// two candidate costs are equal.
    pub zero_tie_to_zero: bool,
    /// Declare the support stable after this many consecutive unchanged
    /// zero patterns, then refine on the restricted box.
    pub support_stable_window: usize,
    /// Projected-gradient tolerance for the restricted refinement.
    pub grad_tol: f64,
    pub max_outer: usize,
}

impl Default for IHTConfig {
    fn default() -> Self {
        IHTConfig {
            l_factor: 1.1,
            zero_tie_to_zero: true,
            support_stable_window: 10,
            grad_tol: 1e-8,
            max_outer: 50_000,
        }
    }
}

impl IHTConfig {
    fn validate(&self) -> Result<()> {
        if !(self.l_factor > 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "l_factor must be > 1, got {}",
                self.l_factor
            )));
        }
        if self.support_stable_window == 0 || self.max_outer == 0 {
            return Err(CoreError::InvalidParameter(
                "support_stable_window and max_outer must be >= 1".into(),
            ));
        }
        if !(self.grad_tol > 0.0) {
            return Err(CoreError::InvalidParameter("grad_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct VariantConfig {
    pub l_min: f64,
    pub l_max: f64,
    /// Inner growth factor for the trial L (> 1).
    pub tau: f64,
    /// Sufficient-descent modulus of the acceptance test.
    pub eta: f64,
    pub zero_tie_to_zero: bool,
    pub support_stable_window: usize,
    pub grad_tol: f64,
    pub max_outer: usize,
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig {
            l_min: 1e-2,
            l_max: 1e12,
            tau: 2.0,
            eta: 1e-2,
            zero_tie_to_zero: true,
            support_stable_window: 10,
            grad_tol: 1e-8,
            max_outer: 50_000,
        }
    }
}

impl VariantConfig {
    fn validate(&self) -> Result<()> {
        if !(self.l_min > 0.0 && self.l_min <= self.l_max) {
            return Err(CoreError::InvalidParameter(format!(
                "need 0 < l_min <= l_max, got [{}, {}]",
                self.l_min, self.l_max
            )));
        }
        if !(self.tau > 1.0) {
            return Err(CoreError::InvalidParameter(format!("tau must be > 1, got {}", self.tau)));
        }
        if !(self.eta > 0.0) {
            return Err(CoreError::InvalidParameter(format!("eta must be > 0, got {}", self.eta)));
        }
        if self.support_stable_window == 0 || self.max_outer == 0 {
            return Err(CoreError::InvalidParameter(
                "support_stable_window and max_outer must be >= 1".into(),
            ));
        }
        if !(self.grad_tol > 0.0) {
            return Err(CoreError::InvalidParameter("grad_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterationCapped,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    /// 1-based index of the accepted thresholding step.
    pub iter: usize,
    /// F value after the step (penalized objective of the problem being solved).
    pub objective: f64,
    pub dx_norm: f64,
    pub l_used: f64,
    pub support_changed: bool,
    /// Penalty parameter, present for cone runs.
    pub rho: Option<f64>,
    /// d_{K*}(Ax - b) after the step, present for cone runs.
    pub feas_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x_star: Array1<f64>,
    /// Zero pattern I(x*) of the returned iterate (exact zeros).
    pub support_zero: IndexSet,
    /// F(x*) = f(x*) + lambda * nnz(x*).
    pub objective_value: f64,
    /// f(x*).
    pub smooth_value: f64,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    /// Largest number of inner subproblem solves in any single outer round.
    pub max_inner_per_outer: usize,
    pub support_changes: usize,
    /// Magnitude lower bound for nonzero coordinates of the iterates.
    pub delta: f64,
    pub status: SolveStatus,
    pub trace: Vec<TraceRow>,
}

/// Closed-form solution of the per-coordinate thresholding subproblem with
/// s = x - grad/L and p = Pi_B(s): keep p_i when s_i^2 - (p_i - s_i)^2
/// exceeds 2 lambda / L, set an exact zero when it falls below, and follow
/// the tie rule on equality.
pub fn hard_threshold_step(
    x: &ArrayView1<f64>,
    objective: &dyn SmoothOracle,
    bounds: &ExtendedBox,
    lambda: f64,
    l: f64,
    zero_tie_to_zero: bool,
) -> Array1<f64> {
    let grad = objective.grad(x);
    threshold_from_grad(x, &grad.view(), bounds, lambda, l, zero_tie_to_zero)
}

pub(crate) fn threshold_from_grad(
    x: &ArrayView1<f64>,
    grad: &ArrayView1<f64>,
    bounds: &ExtendedBox,
    lambda: f64,
    l: f64,
    zero_tie_to_zero: bool,
) -> Array1<f64> {
    debug_assert!(l > 0.0 && lambda >= 0.0);
    let threshold = 2.0 * lambda / l;
    let lo = bounds.lower();
    let hi = bounds.upper();
    Array1::from_shape_fn(x.len(), |i| {
        let s = x[i] - grad[i] / l;
        let p = s.max(lo[i]).min(hi[i]);
        let gain = s * s - (p - s) * (p - s);
        let keep = gain > threshold || (gain == threshold && !zero_tie_to_zero);
        if keep {
            p + 0.0
        } else {
            0.0
        }
    })
}

/// Per-coordinate magnitude floor delta_i and the overall delta: any nonzero
/// coordinate produced by a thresholding step with constant `l` has magnitude
/// at least delta. Pinned coordinates (l_i = u_i = 0) are excluded; if every
/// coordinate is pinned the floor is +inf by convention.
pub fn delta_lower_bound(
    bounds: &ExtendedBox,
    lambda: f64,
    l: f64,
) -> Result<(f64, Array1<f64>)> {
    if !(lambda > 0.0) || !(l > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "delta_lower_bound requires lambda > 0 and L > 0, got lambda={lambda}, L={l}"
        )));
    }
    let step = (2.0 * lambda / l).sqrt();
    let lo = bounds.lower();
    let hi = bounds.upper();
    let per_coord = Array1::from_shape_fn(bounds.dim(), |i| {
        if lo[i] == 0.0 && hi[i] == 0.0 {
            f64::INFINITY
        } else if lo[i] == 0.0 {
            hi[i].min(step)
        } else if hi[i] == 0.0 {
            (-lo[i]).min(step)
        } else {
            (-lo[i]).min(hi[i]).min(step)
        }
    });
    let delta = per_coord.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((delta, per_coord))
}

/// Spectral (Barzilai-Borwein style) initial step constant: the Rayleigh
/// quotient dg'dx / ||dx||^2 clamped to [l_min, l_max], falling back to
/// l_min when dx vanishes or the quotient is not finite.
pub fn bb_initial_l(
    dx: &ArrayView1<f64>,
    dg: &ArrayView1<f64>,
    l_min: f64,
    l_max: f64,
) -> f64 {
    let dd = dx.dot(dx);
    if dd <= 0.0 {
        return l_min;
    }
    let q = dg.dot(dx) / dd;
    if !q.is_finite() {
        return l_min;
    }
    q.clamp(l_min, l_max)
}

/// Upper bound on inner iterations per outer round of the variant:
/// ceil((log(L_f + eta) - log(L_min)) / log(tau)) + 2.
pub fn variant_inner_cap(l_f: f64, eta: f64, l_min: f64, tau: f64) -> usize {
    let q = (((l_f + eta).ln() - l_min.ln()) / tau.ln()).ceil();
    let cap = q as i64 + 2;
    cap.max(1) as usize
}

pub(crate) enum StepRule {
    Fixed { l: f64 },
    Adaptive { l_min: f64, l_max: f64, tau: f64, eta: f64 },
}

/// Per-iterate callback: (1-based step index, accepted iterate).
pub type StepObserver<'h> = &'h mut dyn FnMut(usize, &Array1<f64>);
type StopCheck<'h> = &'h mut dyn FnMut(&Array1<f64>, &IndexSet) -> bool;

#[derive(Default)]
pub(crate) struct DriverHooks<'h> {
    pub observer: Option<StepObserver<'h>>,
    /// External termination test, evaluated on each accepted iterate and on
    /// refined points (used by the dynamic-penalty outer loop).
    pub stop: Option<StopCheck<'h>>,
}

pub(crate) struct IhtDriver<'a> {
    pub oracle: &'a dyn SmoothOracle,
    pub bounds: &'a ExtendedBox,
    pub lambda: f64,
    pub rule: StepRule,
    pub zero_tie_to_zero: bool,
    pub window: usize,
    pub grad_tol: f64,
    pub max_outer: usize,
    /// Optional value-gap target xi on the stabilized support; tightens the
    /// refinement tolerance to sqrt(2 L xi) (and sqrt(sigma xi / 2) when the
    /// oracle is strongly convex, which makes the gap certifiable).
    pub gap_target: Option<f64>,
    pub refine_max_iters: usize,
}

const REFINE_MAX_ITERS_DEFAULT: usize = 500_000;

impl<'a> IhtDriver<'a> {
    fn refine_tol(&self) -> f64 {
        let mut tol = self.grad_tol;
        if let Some(xi) = self.gap_target {
            tol = tol.min((2.0 * self.oracle.lipschitz() * xi).sqrt());
            let sigma = self.oracle.strong_modulus();
            if sigma > 0.0 {
                tol = tol.min((0.5 * sigma * xi).sqrt());
            }
        }
        tol
    }

    pub fn run(&self, x0: &ArrayView1<f64>, hooks: &mut DriverHooks<'_>) -> Result<SolveReport> {
        let n = self.bounds.dim();
        if x0.len() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: x0.len() });
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("starting point".into()));
        }
        let l_f = self.oracle.lipschitz();
        let inner_cap = match self.rule {
            StepRule::Fixed { .. } => 1,
            StepRule::Adaptive { l_min, tau, eta, .. } => variant_inner_cap(l_f, eta, l_min, tau),
        };

        let mut x = project_box(x0, self.bounds);
        let (mut f_x, mut grad_x) = self.oracle.value_grad(&x.view());
        let mut big_f = f_x + self.lambda * nnz_exact(&x.view()) as f64;
        let mut support = zero_set(&x.view(), 0.0);
        let mut stable = 0usize;
        let mut bb_data: Option<(Array1<f64>, Array1<f64>)> = None;

        let mut trace = Vec::new();
        let mut outer = 0usize;
        let mut inner_total = 0usize;
        let mut max_inner = 0usize;
        let mut support_changes = 0usize;
        let mut l_accept_max = 0.0f64;
        let mut status = SolveStatus::IterationCapped;
        // Set after a refinement; the next accepted step acts as the
        // fixed-point check for the refined candidate.
        let mut refined_candidate: Option<(Array1<f64>, f64)> = None;

        'outer: while outer < self.max_outer {
            let (x_next, f_next, l_used, inners) = match self.rule {
                StepRule::Fixed { l } => {
                    let cand = threshold_from_grad(
                        &x.view(),
                        &grad_x.view(),
                        self.bounds,
                        self.lambda,
                        l,
                        self.zero_tie_to_zero,
                    );
                    let f_cand = self.oracle.value(&cand.view());
                    (cand, f_cand, l, 1usize)
                }
                StepRule::Adaptive { l_min, l_max, tau, eta } => {
                    let mut l_k = match &bb_data {
                        Some((dx, dg)) => bb_initial_l(&dx.view(), &dg.view(), l_min, l_max),
                        None => l_min,
                    };
                    let mut count = 0usize;
                    loop {
                        count += 1;
                        if count > inner_cap {
                            return Err(CoreError::InnerCapExceeded(format!(
                                "descent test still failing after {inner_cap} trials at outer \
                                 round {}; the objective's Lipschitz constant looks understated",
                                outer + 1
                            )));
                        }
                        let cand = threshold_from_grad(
                            &x.view(),
                            &grad_x.view(),
                            self.bounds,
                            self.lambda,
                            l_k,
                            self.zero_tie_to_zero,
                        );
                        let f_cand = self.oracle.value(&cand.view());
                        let big_f_cand = f_cand + self.lambda * nnz_exact(&cand.view()) as f64;
                        let d = &cand - &x;
                        // The measured drop of two nearly equal objective
                        // values carries rounding noise of a few ulps; the
                        // slack keeps the test from failing spuriously at
                        // vanishing steps.
                        let slack = 4.0 * f64::EPSILON * (1.0 + big_f.abs());
                        if big_f - big_f_cand >= 0.5 * eta * d.dot(&d) - slack {
                            break (cand, f_cand, l_k, count);
                        }
                        l_k *= tau;
                    }
                }
            };

            outer += 1;
            inner_total += inners;
            max_inner = max_inner.max(inners);
            l_accept_max = l_accept_max.max(l_used);

            let grad_next = self.oracle.grad(&x_next.view());
            let big_f_next = f_next + self.lambda * nnz_exact(&x_next.view()) as f64;
            let dx_vec = &x_next - &x;
            let dx_norm = norm(&dx_vec.view());
            let support_next = zero_set(&x_next.view(), 0.0);
            let changed = support_next != support;
            if changed {
                support_changes += 1;
                stable = 0;
            } else {
                stable += 1;
            }
            trace.push(TraceRow {
                iter: outer,
                objective: big_f_next,
                dx_norm,
                l_used,
                support_changed: changed,
                rho: None,
                feas_residual: None,
            });
            if let Some(obs) = hooks.observer.as_mut() {
                obs(outer, &x_next);
            }
            bb_data = Some((dx_vec, &grad_next - &grad_x));
            x = x_next;
            f_x = f_next;
            grad_x = grad_next;
            big_f = big_f_next;
            support = support_next;

            if let Some((x_ref, f_ref)) = refined_candidate.take() {
                if !changed {
                    // Re-applying the thresholding step kept the support: the
                    // refined point is a certified fixed point.
                    x = x_ref;
                    f_x = f_ref;
                    status = SolveStatus::Converged;
                    break 'outer;
                }
                // The check step moved to a different support; keep iterating.
            }

            if let Some(stop) = hooks.stop.as_mut() {
                if stop(&x, &support) {
                    status = SolveStatus::Converged;
                    break 'outer;
                }
            }

            if stable >= self.window {
                let cfg = PGConfig {
                    l: l_f,
                    stop_grad_tol: self.refine_tol(),
                    max_iters: self.refine_max_iters,
                    strong_modulus_hint: self.oracle.strong_modulus(),
                    record_trace: false,
                };
                let refined = pg_solve(self.oracle, self.bounds, &support, &cfg, &x.view())?;
                inner_total += refined.iters;
                let x_ref = refined.x;
                let f_ref = refined.value;
                if let Some(stop) = hooks.stop.as_mut() {
                    if stop(&x_ref, &zero_set(&x_ref.view(), 0.0)) {
                        x = x_ref;
                        f_x = f_ref;
                        status = SolveStatus::Converged;
                        break 'outer;
                    }
                }
                if refined.status == PGStatus::IterationCapped {
                    x = x_ref;
                    f_x = f_ref;
                    status = SolveStatus::IterationCapped;
                    break 'outer;
                }
                let (_, grad_ref) = self.oracle.value_grad(&x_ref.view());
                bb_data = None;
                big_f = f_ref + self.lambda * nnz_exact(&x_ref.view()) as f64;
                support = zero_set(&x_ref.view(), 0.0);
                stable = 0;
                refined_candidate = Some((x_ref.clone(), f_ref));
                x = x_ref;
                f_x = f_ref;
                grad_x = grad_ref;
            }
        }

        let support_zero = zero_set(&x.view(), 0.0);
        let smooth_value = f_x;
        let objective_value =
            smooth_value + self.lambda * (n - support_zero.len()) as f64;
        let delta_l = match self.rule {
            StepRule::Fixed { l } => l,
            StepRule::Adaptive { tau, eta, .. } => (tau * (l_f + eta)).max(l_accept_max),
        };
        let delta = if self.lambda > 0.0 {
            delta_lower_bound(self.bounds, self.lambda, delta_l)?.0
        } else {
            0.0
        };
        Ok(SolveReport {
            x_star: x,
            support_zero,
            objective_value,
            smooth_value,
            outer_iters: outer,
            inner_iters_total: inner_total,
            max_inner_per_outer: max_inner,
            support_changes,
            delta,
            status,
            trace,
        })
    }
}

/// IHT with the fixed constant L = l_factor * L_f. Once the zero pattern is
/// unchanged for `support_stable_window` consecutive steps the run finishes
/// with a projected-gradient solve on the restricted box, and the refined
/// point is accepted only if one more thresholding step keeps its support.
pub fn iht_solve(
    problem: &L0Problem,
    config: &IHTConfig,
    x0: &ArrayView1<f64>,
) -> Result<SolveReport> {
    iht_solve_observed(problem, config, x0, None)
}

/// `iht_solve` with a per-iterate observer (called with the 1-based step
/// index and the accepted iterate).
pub fn iht_solve_observed(
    problem: &L0Problem,
    config: &IHTConfig,
    x0: &ArrayView1<f64>,
    observer: Option<StepObserver<'_>>,
) -> Result<SolveReport> {
    config.validate()?;
    let driver = IhtDriver {
        oracle: &problem.objective,
        bounds: &problem.bounds,
        lambda: problem.lambda,
        rule: StepRule::Fixed { l: config.l_factor * problem.objective.lipschitz() },
        zero_tie_to_zero: config.zero_tie_to_zero,
        window: config.support_stable_window,
        grad_tol: config.grad_tol,
        max_outer: config.max_outer,
        gap_target: None,
        refine_max_iters: REFINE_MAX_ITERS_DEFAULT,
    };
    let mut hooks = DriverHooks { observer, stop: None };
    driver.run(x0, &mut hooks)
}

/// The dynamic-L variant: each outer round starts from a spectral initial
/// constant and grows it by tau until the sufficient-descent test
/// F(x^k) - F(x^{k+1}) >= eta/2 ||x^{k+1} - x^k||^2 accepts.
pub fn iht_variant_solve(
    problem: &L0Problem,
    config: &VariantConfig,
    x0: &ArrayView1<f64>,
) -> Result<SolveReport> {
    iht_variant_solve_observed(problem, config, x0, None)
}

pub fn iht_variant_solve_observed(
    problem: &L0Problem,
    config: &VariantConfig,
    x0: &ArrayView1<f64>,
    observer: Option<StepObserver<'_>>,
) -> Result<SolveReport> {
    config.validate()?;
    let driver = IhtDriver {
        oracle: &problem.objective,
        bounds: &problem.bounds,
        lambda: problem.lambda,
        rule: StepRule::Adaptive {
            l_min: config.l_min,
            l_max: config.l_max,
            tau: config.tau,
            eta: config.eta,
        },
        zero_tie_to_zero: config.zero_tie_to_zero,
        window: config.support_stable_window,
        grad_tol: config.grad_tol,
        max_outer: config.max_outer,
        gap_target: None,
        refine_max_iters: REFINE_MAX_ITERS_DEFAULT,
    };
    let mut hooks = DriverHooks { observer, stop: None };
    driver.run(x0, &mut hooks)
}

/// The Tikhonov perturbation strength nu = eps / D^2 used by
/// `solve_perturbed`, with D = max{||x|| : x in the box}.
pub fn perturbation_for(bounds: &ExtendedBox, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(CoreError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let d = bounds.max_norm()?;
    Ok(eps / (d * d))
}

/// Solve a problem whose objective is convex but not strongly convex over a
/// bounded box by running IHT on the Tikhonov perturbation f + nu/2 ||x||^2
/// with nu = eps / D^2 and a value-gap target of eps/2; the reported values
/// are evaluated with the unperturbed objective, so the returned F is within
/// eps of the local minimum value found.
pub fn solve_perturbed(
    problem: &L0Problem,
    eps: f64,
    config: &IHTConfig,
    x0: &ArrayView1<f64>,
) -> Result<SolveReport> {
    config.validate()?;
    if problem.objective.strong_modulus() > 0.0 {
        return Err(CoreError::InvalidParameter(
            "objective is already strongly convex; run iht_solve directly".into(),
        ));
    }
    let nu = perturbation_for(&problem.bounds, eps)?;
    let perturbed = SmoothObjective::perturbed(problem.objective.clone(), nu)?;
    let driver = IhtDriver {
        oracle: &perturbed,
        bounds: &problem.bounds,
        lambda: problem.lambda,
        rule: StepRule::Fixed { l: config.l_factor * perturbed.lipschitz() },
        zero_tie_to_zero: config.zero_tie_to_zero,
        window: config.support_stable_window,
        grad_tol: config.grad_tol,
        max_outer: config.max_outer,
        gap_target: Some(0.5 * eps),
        refine_max_iters: REFINE_MAX_ITERS_DEFAULT,
    };
    let mut hooks = DriverHooks::default();
    let mut report = driver.run(x0, &mut hooks)?;
    report.smooth_value = problem.objective.value(&report.x_star.view());
    report.objective_value = report.smooth_value
        + problem.lambda * (problem.dim() - report.support_zero.len()) as f64;
    Ok(report)
}
