//! l0-regularized convex cone programming via quadratic penalties: penalty
//! objective construction, the fixed-rho and dynamic-rho outer loops,
//! multiplier recovery and eps-approximate local-minimizer certification.

use ndarray::{Array1, ArrayView1};

use crate::error::{CoreError, Result};
use crate::geometry::{dist_dual_cone, norm, pg_map, project_box, project_box_restricted, project_cone, project_dual_cone};
use crate::iht::{DriverHooks, IhtDriver, SolveReport, SolveStatus, StepRule, TraceRow, IHTConfig, VariantConfig};
use crate::model::{nnz_exact, zero_set, ConeL0Problem, IndexSet, SmoothOracle};

/// Quadratic penalty surrogate
/// Phi(x) = f(x) + nu/2 ||x||^2 + rho/2 d_{K*}(Ax - b)^2,
/// a smooth convex function with gradient Lipschitz constant
/// L = L_f + rho ||A||^2 + nu.
#[derive(Debug, Clone)]
pub struct PenaltyObjective<'a> {
    problem: &'a ConeL0Problem,
    rho: f64,
    nu: f64,
    lipschitz: f64,
}

impl<'a> PenaltyObjective<'a> {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

pub fn make_penalty(problem: &ConeL0Problem, rho: f64, nu: f64) -> Result<PenaltyObjective<'_>> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(CoreError::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(CoreError::InvalidParameter(format!("nu must be nonnegative, got {nu}")));
    }
    let opn = problem.opnorm_a();
    Ok(PenaltyObjective {
        problem,
        rho,
        nu,
        lipschitz: problem.objective.lipschitz() + rho * opn * opn + nu,
    })
}

impl SmoothOracle for PenaltyObjective<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn value(&self, x: &ArrayView1<f64>) -> f64 {
        let base = self.problem.objective.value(x);
        let y = self.problem.a.dot(x) - &self.problem.b;
        let d = dist_dual_cone(&y.view(), &self.problem.cone);
        base + 0.5 * self.nu * x.dot(x) + 0.5 * self.rho * d * d
    }

    fn value_grad(&self, x: &ArrayView1<f64>) -> (f64, Array1<f64>) {
        let (base, mut grad) = self.problem.objective.value_grad(x);
        let y = self.problem.a.dot(x) - &self.problem.b;
        let proj = project_dual_cone(&y.view(), &self.problem.cone);
        let resid = &y - &proj;
        let d2 = resid.dot(&resid);
        grad.scaled_add(self.nu, x);
        grad += &(self.problem.a.t().dot(&resid) * self.rho);
        (base + 0.5 * self.nu * x.dot(x) + 0.5 * self.rho * d2, grad)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_modulus(&self) -> f64 {
        self.problem.objective.strong_modulus() + self.nu
    }
}

/// Penalty parameter for the strongly convex case:
/// rho = t/eps + 1/(sqrt(8) ||A||).
pub fn choose_rho(t: f64, eps: f64, opnorm_a: f64) -> f64 {
    assert!(t > 0.0 && eps > 0.0 && opnorm_a > 0.0);
    t / eps + 1.0 / (8.0f64.sqrt() * opnorm_a)
}

/// Penalty and perturbation parameters for a bounded box and a convex (not
/// strongly convex) objective:
/// rho = (sqrt(D) + sqrt(D + 16 t + 2 sqrt(2) eps / ||A||))^2 / (16 eps),
/// nu = eps / (2 D).
pub fn choose_rho_nu(t: f64, eps: f64, opnorm_a: f64, d_box: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && eps > 0.0 && opnorm_a > 0.0) {
        return Err(CoreError::InvalidParameter("choose_rho_nu needs positive t, eps, ||A||".into()));
    }
    if !d_box.is_finite() || !(d_box > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "choose_rho_nu needs a finite positive box radius, got {d_box}"
        )));
    }
    let inner = d_box + 16.0 * t + 2.0 * 2.0f64.sqrt() * eps / opnorm_a;
    let rho = (d_box.sqrt() + inner.sqrt()).powi(2) / (16.0 * eps);
    let nu = eps / (2.0 * d_box);
    Ok((rho, nu))
}

/// Multiplier estimate mu = rho [Ax - b - Pi_{K*}(Ax - b)]. The estimate lies
/// in -K and is orthogonal to Pi_{K*}(Ax - b) by the Moreau decomposition.
pub fn recover_multiplier(
    x_plus: &ArrayView1<f64>,
    problem: &ConeL0Problem,
    rho: f64,
) -> Result<Array1<f64>> {
    if !(rho > 0.0) {
        return Err(CoreError::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let y = problem.a.dot(x_plus) - &problem.b;
    let proj = project_dual_cone(&y.view(), &problem.cone);
    let mu = (&y - &proj) * rho;
    debug_assert!({
        let scale = 1.0 + norm(&mu.view());
        let neg_mu = mu.mapv(|v| -v);
        let in_cone = project_cone(&neg_mu.view(), &problem.cone);
        let dist = norm(&(&neg_mu - &in_cone).view());
        let comp = mu.dot(&proj).abs();
        dist <= 1e-9 * scale && comp <= 1e-9 * scale * (1.0 + norm(&proj.view()))
    });
    Ok(mu)
}

/// Default certification constant: L_f + 1 (any positive constant yields a
/// valid normal-cone residual through the projected-gradient map).
pub fn default_l_cert(problem: &ConeL0Problem) -> f64 {
    problem.objective.lipschitz() + 1.0
}

#[derive(Debug, Clone)]
pub struct Certificate {
    /// The certified point.
    pub x_plus: Array1<f64>,
    pub mu: Array1<f64>,
    /// d_{K*}(A x - b) at the certified point.
    pub feas_residual: f64,
    /// |mu' Pi_{K*}(Ax - b)|.
    pub complementarity: f64,
    /// Norm of the projected-gradient map of x -> grad f(x) + A' mu over the
    /// restricted box at the certified point.
    pub stationarity_residual: f64,
    pub epsilon: f64,
    pub holds: bool,
}

/// Check the eps-approximate local-minimizer conditions at `x`: feasibility
/// residual, multiplier complementarity and restricted stationarity of
/// grad f + A' mu, with the multiplier recovered at penalty level `rho`.
pub fn certify_approx_local_min(
    x: &ArrayView1<f64>,
    problem: &ConeL0Problem,
    rho: f64,
    eps: f64,
    l_cert: f64,
    comp_tol: f64,
) -> Result<Certificate> {
    if !(l_cert > 0.0) {
        return Err(CoreError::InvalidParameter(format!("l_cert must be positive, got {l_cert}")));
    }
    let support = zero_set(x, 0.0);
    let y = problem.a.dot(x) - &problem.b;
    let proj = project_dual_cone(&y.view(), &problem.cone);
    let mu = (&y - &proj) * rho;
    let feas_residual = norm(&(&y - &proj).view());
    let complementarity = mu.dot(&proj).abs();
    let w = problem.objective.grad(x) + problem.a.t().dot(&mu);
    let shifted = x - &(&w / l_cert);
    let z = project_box_restricted(&shifted.view(), &problem.bounds, &support);
    let stationarity_residual = l_cert * norm(&(x - &z).view());
    let holds =
        feas_residual <= eps && complementarity <= comp_tol && stationarity_residual <= eps;
    Ok(Certificate {
        x_plus: x.to_owned(),
        mu,
        feas_residual,
        complementarity,
        stationarity_residual,
        epsilon: eps,
        holds,
    })
}

/// Inner solver selection for the penalty loops.
#[derive(Debug, Clone)]
pub enum InnerSolver {
    Fixed(IHTConfig),
    Variant(VariantConfig),
}

impl Default for InnerSolver {
    // The adaptive variant is the default for penalty solves: with a large
    // rho the fixed constant L_rho makes the thresholding radius 2 lambda/L
    // collapse, freezing early iterates; the spectral step recovers the
    // unpenalized scale wherever the constraint is slack.
    fn default() -> Self {
        InnerSolver::Variant(VariantConfig::default())
    }
}

#[derive(Debug, Clone, Default)]
pub struct PenaltyConfig {
    pub inner: InnerSolver,
    /// Certification constant; defaults to L_f + 1.
    pub l_cert: Option<f64>,
    /// Complementarity tolerance of the certificate (default 1e-8).
    pub comp_tol_override: Option<f64>,
}

impl PenaltyConfig {
    pub fn comp_tol(&self) -> f64 {
        self.comp_tol_override.unwrap_or(1e-8)
    }
}

struct InnerRun<'a> {
    rule: StepRule,
    tie: bool,
    window: usize,
    grad_tol: f64,
    max_outer: usize,
    pen: &'a PenaltyObjective<'a>,
}

impl<'a> InnerRun<'a> {
    fn new(pen: &'a PenaltyObjective<'a>, inner: &InnerSolver, l_pen: f64) -> Self {
        match inner {
            InnerSolver::Fixed(cfg) => InnerRun {
                rule: StepRule::Fixed { l: cfg.l_factor * l_pen },
                tie: cfg.zero_tie_to_zero,
                window: cfg.support_stable_window,
                grad_tol: cfg.grad_tol,
                max_outer: cfg.max_outer,
                pen,
            },
            InnerSolver::Variant(cfg) => InnerRun {
                rule: StepRule::Adaptive {
                    l_min: cfg.l_min,
                    l_max: cfg.l_max,
                    tau: cfg.tau,
                    eta: cfg.eta,
                },
                tie: cfg.zero_tie_to_zero,
                window: cfg.support_stable_window,
                grad_tol: cfg.grad_tol,
                max_outer: cfg.max_outer,
                pen,
            },
        }
    }

    fn run<S: FnMut(&Array1<f64>, &IndexSet) -> bool>(
        self,
        problem: &ConeL0Problem,
        x0: &ArrayView1<f64>,
        gap_target: Option<f64>,
        grad_tol_override: Option<f64>,
        stop: Option<&mut S>,
    ) -> Result<SolveReport> {
        let driver = IhtDriver {
            oracle: self.pen,
            bounds: &problem.bounds,
            lambda: problem.lambda,
            rule: self.rule,
            zero_tie_to_zero: self.tie,
            window: self.window,
            grad_tol: grad_tol_override.unwrap_or(self.grad_tol),
            max_outer: self.max_outer,
            gap_target,
            refine_max_iters: 500_000,
        };
        let mut feas_log: Vec<f64> = Vec::new();
        let mut report = {
            let mut observer = |_k: usize, x: &Array1<f64>| {
                let y = problem.a.dot(x) - &problem.b;
                feas_log.push(dist_dual_cone(&y.view(), &problem.cone));
            };
            let stop_dyn =
                stop.map(|s| s as &mut dyn FnMut(&Array1<f64>, &IndexSet) -> bool);
            let mut hooks = DriverHooks { observer: Some(&mut observer), stop: stop_dyn };
            driver.run(x0, &mut hooks)?
        };
        let rho = self.pen.rho();
        for (row, feas) in report.trace.iter_mut().zip(feas_log) {
            row.rho = Some(rho);
            row.feas_residual = Some(feas);
        }
        Ok(report)
    }
}

/// Stand-in stop-predicate type for runs without an external stop test.
type NoStop = fn(&Array1<f64>, &IndexSet) -> bool;

fn feasibility(problem: &ConeL0Problem, x: &ArrayView1<f64>) -> f64 {
    let y = problem.a.dot(x) - &problem.b;
    dist_dual_cone(&y.view(), &problem.cone)
}

/// One restricted projected-gradient step of the penalty objective, the
/// post-processing that turns an approximate penalty solution into a
/// certified pair.
fn penalty_pg_step(
    pen: &PenaltyObjective<'_>,
    problem: &ConeL0Problem,
    x: &ArrayView1<f64>,
    support: &IndexSet,
) -> Array1<f64> {
    let grad = pen.grad(x);
    pg_map(x, &grad.view(), pen.lipschitz(), &problem.bounds, support).1
}

fn finish_report_with_original_values(report: &mut SolveReport, problem: &ConeL0Problem) {
    report.support_zero = zero_set(&report.x_star.view(), 0.0);
    report.smooth_value = problem.objective.value(&report.x_star.view());
    report.objective_value = report.smooth_value
        + problem.lambda * nnz_exact(&report.x_star.view()) as f64;
}

/// Fixed-rho penalty solve. For a strongly convex objective rho comes from
/// `choose_rho` and the inner value-gap target is eps^2/(8 L_rho); for a
/// convex objective over a bounded box the perturbed parameters come from
/// `choose_rho_nu` with target eps^2/(32 L_{rho,nu}). The returned report
/// carries the original objective's values; feasibility and stationarity
/// live in the certificate.
pub fn penalty_solve_fixed(
    problem: &ConeL0Problem,
    eps: f64,
    t: f64,
    config: &PenaltyConfig,
    x0: &ArrayView1<f64>,
) -> Result<(SolveReport, Certificate)> {
    if !(eps > 0.0 && t > 0.0) {
        return Err(CoreError::InvalidParameter("eps and t must be positive".into()));
    }
    let sigma = problem.objective.strong_modulus();
    let (rho, nu) = if sigma > 0.0 {
        (choose_rho(t, eps, problem.opnorm_a()), 0.0)
    } else if problem.bounds.is_bounded() {
        choose_rho_nu(t, eps, problem.opnorm_a(), problem.bounds.max_norm()?)?
    } else {
        return Err(CoreError::Unsupported(
            "penalty solve needs a strongly convex objective or a bounded box".into(),
        ));
    };
    let pen = make_penalty(problem, rho, nu)?;
    let l_pen = pen.lipschitz();
    let xi = if sigma > 0.0 { eps * eps / (8.0 * l_pen) } else { eps * eps / (32.0 * l_pen) };

    let inner = InnerRun::new(&pen, &config.inner, l_pen);
    let mut report = inner.run(problem, x0, Some(xi), None, None::<&mut NoStop>)?;

    let support = zero_set(&report.x_star.view(), 0.0);
    let x_plus = penalty_pg_step(&pen, problem, &report.x_star.view(), &support);
    let cert = certify_approx_local_min(
        &x_plus.view(),
        problem,
        rho,
        eps,
        config.l_cert.unwrap_or_else(|| default_l_cert(problem)),
        config.comp_tol(),
    )?;
    report.x_star = x_plus;
    finish_report_with_original_values(&mut report, problem);
    Ok((report, cert))
}

#[derive(Debug, Clone)]
pub struct DynamicSchedule {
    pub rho0: f64,
    /// Outer growth factor: rho_{k+1} = tau * rho_k.
    pub tau: f64,
    /// Multiplier-norm bound; doubled once per outer round on stall.
    pub t: f64,
    pub eps_final: f64,
    /// Start of the decreasing inner tolerance sequence
    /// eps_k = max(eps_final, eps0 * 2^-k).
    pub eps0: f64,
    pub max_outer: usize,
}

impl DynamicSchedule {
    pub fn new(rho0: f64, tau: f64, t: f64, eps_final: f64) -> Result<Self> {
        let s = DynamicSchedule { rho0, tau, t, eps_final, eps0: 1.0f64.max(eps_final), max_outer: 40 };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.tau > 1.0 && self.t > 0.0 && self.eps_final > 0.0) {
            return Err(CoreError::InvalidParameter(
                "dynamic schedule needs rho0 > 0, tau > 1, t > 0, eps_final > 0".into(),
            ));
        }
        if !(self.eps0 >= self.eps_final) || self.max_outer == 0 {
            return Err(CoreError::InvalidParameter(
                "dynamic schedule needs eps0 >= eps_final and max_outer >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn eps_k(&self, k: usize) -> f64 {
        (self.eps0 * 0.5f64.powi(k as i32)).max(self.eps_final)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DynamicRound {
    pub rho: f64,
    pub eps_k: f64,
    /// The multiplier bound in force when the round terminated (doubling on
    /// stall is recorded here).
    pub t_used: f64,
    /// d_{K*}(A x^k - b) at the round's accepted iterate.
    pub feas_residual: f64,
    /// Restricted projected-gradient norm of the penalty objective at x^k.
    pub g_norm: f64,
    pub doubled_t: bool,
}

#[derive(Debug)]
pub struct DynamicOutcome {
    pub report: SolveReport,
    pub certificates: Vec<Certificate>,
    pub rounds: Vec<DynamicRound>,
}

/// Dynamic-rho loop: each round warm-starts the inner IHT run from the
/// previous iterate and terminates it once
/// d_{K*}(Ax - b) <= t / rho_k  and  ||g(x; rho_k, I(x))|| <= min(1, L_rho) eps_k,
/// then sets rho_{k+1} = tau * rho_k. Stops as soon as the certificate at
/// eps_final holds or the outer cap is reached.
pub fn penalty_solve_dynamic(
    problem: &ConeL0Problem,
    schedule: &DynamicSchedule,
    config: &PenaltyConfig,
    x0: &ArrayView1<f64>,
) -> Result<DynamicOutcome> {
    schedule.validate()?;
    let mut x = project_box(x0, &problem.bounds);
    let mut t = schedule.t;
    let mut rho = schedule.rho0;
    let l_cert = config.l_cert.unwrap_or_else(|| default_l_cert(problem));

    let mut certificates = Vec::new();
    let mut rounds = Vec::new();
    let mut agg_trace: Vec<TraceRow> = Vec::new();
    let mut outer_total = 0usize;
    let mut inner_total = 0usize;
    let mut max_inner = 0usize;
    let mut changes_total = 0usize;
    let mut status = SolveStatus::IterationCapped;
    let mut last_report: Option<SolveReport> = None;
    let mut final_x = x.clone();

    for k in 0..schedule.max_outer {
        let eps_k = schedule.eps_k(k);
        let pen = make_penalty(problem, rho, 0.0)?;
        let l_pen = pen.lipschitz();
        let g_cap = l_pen.min(1.0) * eps_k;

        let mut doubled = false;
        let mut reruns = 0usize;
        let report = loop {
            let measure = |xx: &Array1<f64>, support: &IndexSet| -> (f64, f64) {
                let feas = feasibility(problem, &xx.view());
                let grad = pen.grad(&xx.view());
                let (g, _) = pg_map(&xx.view(), &grad.view(), l_pen, &problem.bounds, support);
                (feas, norm(&g.view()))
            };
            let t_now = t;
            let mut stop = |xx: &Array1<f64>, support: &IndexSet| -> bool {
                let (feas, gn) = measure(xx, support);
                feas <= t_now / rho && gn <= g_cap
            };
            let inner = InnerRun::new(&pen, &config.inner, l_pen);
            let rep = inner.run(problem, &x.view(), None, Some(g_cap), Some(&mut stop))?;
            let support = zero_set(&rep.x_star.view(), 0.0);
            let (feas, gn) = measure(&rep.x_star, &support);
            if feas <= t / rho && gn <= g_cap {
                break rep;
            }
            x = rep.x_star;
            if gn > g_cap {
                // The inner run exhausted its budget before the gradient
                // clause; continuing from the warm iterate makes progress
                // (the penalty objective descends monotonically).
                reruns += 1;
                if reruns > 6 {
                    return Err(CoreError::ContinuationStalled(format!(
                        "round {k}: projected-gradient norm {gn} still above {g_cap} after {reruns} continuations"
                    )));
                }
                log::debug!(
                    "dynamic penalty round {k}: gradient norm {gn} above {g_cap}; continuing the inner run"
                );
                continue;
            }
            // Gradient clause holds but the iterate stays too infeasible:
            // the supplied multiplier bound is too small.
            if doubled {
                return Err(CoreError::ContinuationStalled(format!(
                    "round {k}: feasibility residual {feas} above t/rho = {} after doubling t",
                    t / rho
                )));
            }
            log::warn!(
                "dynamic penalty round {k}: residual {feas} exceeds t/rho = {}; doubling t",
                t / rho
            );
            t *= 2.0;
            doubled = true;
        };

        let support = zero_set(&report.x_star.view(), 0.0);
        let feas = feasibility(problem, &report.x_star.view());
        let grad = pen.grad(&report.x_star.view());
        let (g, _) = pg_map(&report.x_star.view(), &grad.view(), l_pen, &problem.bounds, &support);
        rounds.push(DynamicRound {
            rho,
            eps_k,
            t_used: t,
            feas_residual: feas,
            g_norm: norm(&g.view()),
            doubled_t: doubled,
        });

        outer_total += report.outer_iters;
        inner_total += report.inner_iters_total;
        max_inner = max_inner.max(report.max_inner_per_outer);
        changes_total += report.support_changes;
        let base = agg_trace.len();
        agg_trace.extend(report.trace.iter().map(|row| TraceRow {
            iter: base + row.iter,
            ..*row
        }));

        let x_plus = penalty_pg_step(&pen, problem, &report.x_star.view(), &support);
        let cert =
            certify_approx_local_min(&x_plus.view(), problem, rho, schedule.eps_final, l_cert, config.comp_tol())?;
        let holds = cert.holds;
        certificates.push(cert);
        x = report.x_star.clone();
        final_x = if holds { x_plus } else { x.clone() };
        last_report = Some(report);
        if holds {
            status = SolveStatus::Converged;
            break;
        }
        rho *= schedule.tau;
    }

    let mut report = last_report
        .ok_or_else(|| CoreError::InvalidParameter("dynamic schedule ran zero rounds".into()))?;
    report.x_star = final_x;
    report.outer_iters = outer_total;
    report.inner_iters_total = inner_total;
    report.max_inner_per_outer = max_inner;
    report.support_changes = changes_total;
    report.status = status;
    report.trace = agg_trace;
    finish_report_with_original_values(&mut report, problem);
    Ok(DynamicOutcome { report, certificates, rounds })
}
