//! Projected gradient method for smooth convex minimization over a
//! (restricted) box, with stationarity certificates and the closed-form
//! iteration budget for the strongly convex case.

use ndarray::{Array1, ArrayView1};

use crate::error::{CoreError, Result};
use crate::geometry::{norm, pg_map, project_box_restricted};
use crate::model::{ExtendedBox, IndexSet, SmoothOracle};

#[derive(Debug, Clone)]
pub struct PGConfig {
    /// Step constant; must satisfy L >= L_phi.
    pub l: f64,
    /// Stop when the projected-gradient norm drops to this value.
    pub stop_grad_tol: f64,
    pub max_iters: usize,
    /// Strong-convexity modulus when known; informational, used by callers
    /// together with `iteration_budget` to derive hard caps.
    pub strong_modulus_hint: f64,
    /// Disable to skip per-iteration trace rows (used by the enumeration
    /// oracle which runs thousands of solves).
    pub record_trace: bool,
}

impl PGConfig {
    pub fn new(l: f64, stop_grad_tol: f64, max_iters: usize) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("pg step constant must be positive, got {l}")));
        }
        if max_iters == 0 {
            return Err(CoreError::InvalidParameter("max_iters must be >= 1".into()));
        }
        Ok(PGConfig { l, stop_grad_tol, max_iters, strong_modulus_hint: 0.0, record_trace: true })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PGStatus {
    Converged,
    IterationCapped,
}

#[derive(Debug, Clone, Copy)]
pub struct PGTraceRow {
    pub iter: usize,
    pub value: f64,
    pub gnorm: f64,
}

#[derive(Debug, Clone)]
pub struct PGOutcome {
    pub x: Array1<f64>,
    pub value: f64,
    pub gnorm: f64,
    pub iters: usize,
    pub status: PGStatus,
    pub trace: Vec<PGTraceRow>,
}

/// One projected gradient step x_next = Pi_X(x - grad(x)/L).
pub fn pg_step(
    x: &ArrayView1<f64>,
    oracle: &dyn SmoothOracle,
    l: f64,
    bounds: &ExtendedBox,
    pin: &IndexSet,
) -> Array1<f64> {
    let grad = oracle.grad(x);
    pg_map(x, &grad.view(), l, bounds, pin).1
}

/// Iterate the projected gradient method until the projected-gradient norm
/// reaches `stop_grad_tol` or `max_iters` steps have been taken. The starting
/// point is projected onto the feasible set first.
pub fn pg_solve(
    oracle: &dyn SmoothOracle,
    bounds: &ExtendedBox,
    pin: &IndexSet,
    config: &PGConfig,
    x0: &ArrayView1<f64>,
) -> Result<PGOutcome> {
    if x0.len() != bounds.dim() {
        return Err(CoreError::DimensionMismatch { expected: bounds.dim(), got: x0.len() });
    }
    if !(config.l > 0.0) {
        return Err(CoreError::InvalidParameter("pg step constant must be positive".into()));
    }
    let mut x = project_box_restricted(x0, bounds, pin);
    let mut trace = Vec::new();
    for k in 0..config.max_iters {
        let (value, grad) = oracle.value_grad(&x.view());
        let (g, x_plus) = pg_map(&x.view(), &grad.view(), config.l, bounds, pin);
        let gnorm = norm(&g.view());
        if config.record_trace {
            trace.push(PGTraceRow { iter: k, value, gnorm });
        }
        if gnorm <= config.stop_grad_tol {
            return Ok(PGOutcome { x, value, gnorm, iters: k, status: PGStatus::Converged, trace });
        }
        x = x_plus;
    }
    let (value, grad) = oracle.value_grad(&x.view());
    let (g, _) = pg_map(&x.view(), &grad.view(), config.l, bounds, pin);
    let gnorm = norm(&g.view());
    Ok(PGOutcome {
        x,
        value,
        gnorm,
        iters: config.max_iters,
        status: PGStatus::IterationCapped,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct Stationarity {
    pub holds: bool,
    pub g_norm: f64,
    pub x_plus: Array1<f64>,
}

/// Projected-gradient stationarity certificate: ||g(x)|| <= eps certifies
/// grad(x) lies in -N_X(x_plus) + U(eps); the returned `x_plus` supports the
/// companion 2*eps bound at the projected point.
pub fn certify_stationarity(
    x: &ArrayView1<f64>,
    oracle: &dyn SmoothOracle,
    l: f64,
    bounds: &ExtendedBox,
    pin: &IndexSet,
    eps: f64,
) -> Stationarity {
    let grad = oracle.grad(x);
    let (g, x_plus) = pg_map(x, &grad.view(), l, bounds, pin);
    let g_norm = norm(&g.view());
    Stationarity { holds: g_norm <= eps, g_norm, x_plus }
}

/// Iteration budget for the strongly convex case:
/// 2 ceil(L/sigma) ceil(log2(gap0/eps)) + 1: the value gap is strictly below
/// eps after this many steps. The log is base 2, matching the halving
/// argument behind the bound.
pub fn iteration_budget(l: f64, sigma: f64, initial_gap: f64, eps: f64) -> u64 {
    assert!(l > 0.0 && sigma > 0.0 && eps > 0.0);
    if initial_gap <= 0.0 {
        return 0;
    }
    let m = (l / sigma).ceil() as u64;
    let k = (initial_gap / eps).log2().ceil().max(0.0) as u64;
    2 * m * k + 1
}

/// Adaptive-step (spectral) projected gradient with a sufficient-descent
/// safeguard. Internal workhorse for the enumeration oracle's penalty
/// continuation, where the fixed-step method is far too slow at large rho.
/// The stopping test uses the projected-gradient map at the oracle's own
/// Lipschitz constant, so certificates are comparable with `pg_solve`.
pub(crate) fn spectral_pg_solve(
    oracle: &dyn SmoothOracle,
    bounds: &ExtendedBox,
    pin: &IndexSet,
    x0: &ArrayView1<f64>,
    stop_grad_tol: f64,
    max_iters: usize,
) -> PGOutcome {
    let l_ref = oracle.lipschitz().max(1e-12);
    let l_min = 1e-8 * l_ref;
    let eta = 1e-10 * l_ref;
    let tau = 4.0;

    let mut x = project_box_restricted(x0, bounds, pin);
    let (mut value, mut grad) = oracle.value_grad(&x.view());
    let mut l_bb = l_ref;
    for k in 0..max_iters {
        let (g, _) = pg_map(&x.view(), &grad.view(), l_ref, bounds, pin);
        let gnorm = norm(&g.view());
        if gnorm <= stop_grad_tol {
            return PGOutcome { x, value, gnorm, iters: k, status: PGStatus::Converged, trace: vec![] };
        }
        let mut l_k = l_bb;
        let (x_next, v_next) = loop {
            let (_, cand) = pg_map(&x.view(), &grad.view(), l_k, bounds, pin);
            let v_cand = oracle.value(&cand.view());
            let dx = &cand - &x;
            let dd = dx.dot(&dx);
            if value - v_cand >= 0.5 * eta * dd || l_k >= l_ref {
                break (cand, v_cand);
            }
            l_k = (l_k * tau).min(l_ref);
        };
        let dx = &x_next - &x;
        let (v2, g_next) = oracle.value_grad(&x_next.view());
        let dg = &g_next - &grad;
        let dd = dx.dot(&dx);
        let q = if dd > 0.0 { dg.dot(&dx) / dd } else { f64::NAN };
        l_bb = if q.is_finite() { q.clamp(l_min, l_ref) } else { l_min };
        x = x_next;
        value = if v2.is_finite() { v2 } else { v_next };
        grad = g_next;
    }
    let (g, _) = pg_map(&x.view(), &grad.view(), l_ref, bounds, pin);
    let gnorm = norm(&g.view());
    PGOutcome { x, value, gnorm, iters: max_iters, status: PGStatus::IterationCapped, trace: vec![] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SmoothObjective;
    use ndarray::{array, Array2};

    fn shifted_quadratic(c: Array1<f64>) -> SmoothObjective {
        // 1/2 ||x - c||^2 = 1/2 x'Ix - c'x + const
        let n = c.len();
        SmoothObjective::quadratic(Array2::eye(n), -c).unwrap()
    }

    #[test]
    fn pg_step_identity_quadratic() {
        let obj = shifted_quadratic(Array1::zeros(2));
        let b = ExtendedBox::new(array![0.0, 0.0], array![1.0, 1.0]).unwrap();
        let x = array![1.0, 1.0];
        let next = pg_step(&x.view(), &obj, 1.0, &b, &IndexSet::empty());
        assert_eq!(next, array![0.0, 0.0]);
    }

    #[test]
    fn pg_step_fixed_point() {
        let obj = shifted_quadratic(array![0.5, 0.5]);
        let b = ExtendedBox::symmetric(2, 1.0).unwrap();
        let x = array![0.5, 0.5];
        let next = pg_step(&x.view(), &obj, 1.0, &b, &IndexSet::empty());
        assert_eq!(next, x);
    }

    #[test]
    fn pg_step_hand_example() {
        // phi = 1/2 (x-2)^2 over [0,1] from x=0 with L=2: Pi(0 + 2/2) = 1.
        let obj = shifted_quadratic(array![2.0]);
        let b = ExtendedBox::new(array![0.0], array![1.0]).unwrap();
        let next = pg_step(&array![0.0].view(), &obj, 2.0, &b, &IndexSet::empty());
        assert_eq!(next, array![1.0]);
    }

    #[test]
    fn pg_solve_free_box_reaches_center() {
        let c = array![0.3, -0.7];
        let obj = shifted_quadratic(c.clone());
        let b = ExtendedBox::free(2);
        let cfg = PGConfig::new(1.0, 1e-12, 10_000).unwrap();
        let out = pg_solve(&obj, &b, &IndexSet::empty(), &cfg, &array![5.0, 5.0].view()).unwrap();
        assert_eq!(out.status, PGStatus::Converged);
        assert!(norm(&(&out.x - &c).view()) < 1e-10);
    }

    #[test]
    fn pg_solve_active_bound() {
        // phi = 1/2 (x+1)^2 over [0,1] has its constrained minimum at 0.
        let obj = shifted_quadratic(array![-1.0]);
        let b = ExtendedBox::new(array![0.0], array![1.0]).unwrap();
        let cfg = PGConfig::new(1.0, 1e-12, 1_000).unwrap();
        let out = pg_solve(&obj, &b, &IndexSet::empty(), &cfg, &array![1.0].view()).unwrap();
        assert_eq!(out.status, PGStatus::Converged);
        assert!(out.x[0].abs() < 1e-12);
    }

    #[test]
    fn pg_solve_kkt_example() {
        // phi = 1/2 x' diag(1,10) x - (1,1)'x over [0,1]^2: minimizer (1, 0.1).
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![1.0, 10.0]),
            array![-1.0, -1.0],
        )
        .unwrap();
        let b = ExtendedBox::new(array![0.0, 0.0], array![1.0, 1.0]).unwrap();
        let cfg = PGConfig::new(10.0, 1e-12, 100_000).unwrap();
        let out = pg_solve(&obj, &b, &IndexSet::empty(), &cfg, &array![0.0, 0.0].view()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-9 && (out.x[1] - 0.1).abs() < 1e-9);
    }

    #[test]
    fn pg_solve_iteration_capped_status() {
        let obj = shifted_quadratic(array![100.0]);
        let b = ExtendedBox::free(1);
        let mut cfg = PGConfig::new(1000.0, 1e-14, 3).unwrap();
        cfg.record_trace = true;
        let out = pg_solve(&obj, &b, &IndexSet::empty(), &cfg, &array![0.0].view()).unwrap();
        assert_eq!(out.status, PGStatus::IterationCapped);
        assert_eq!(out.trace.len(), 3);
    }

    #[test]
    fn certify_stationarity_cases() {
        let obj = shifted_quadratic(array![2.0]);
        let b = ExtendedBox::new(array![0.0], array![1.0]).unwrap();
        // Gradient in the normal cone at the active bound.
        let s = certify_stationarity(&array![1.0].view(), &obj, 1.0, &b, &IndexSet::empty(), 1e-12);
        assert!(s.holds && s.g_norm == 0.0);
        // Interior non-stationary point: x=0.5, L=1 -> x_plus=1, g=-0.5.
        let s2 = certify_stationarity(&array![0.5].view(), &obj, 1.0, &b, &IndexSet::empty(), 0.1);
        assert!(!s2.holds);
        assert!((s2.g_norm - 0.5).abs() < 1e-15);
        assert_eq!(s2.x_plus, array![1.0]);
        // Unconstrained minimizer of the free problem.
        let free = ExtendedBox::free(1);
        let s3 =
            certify_stationarity(&array![2.0].view(), &obj, 1.0, &free, &IndexSet::empty(), 1e-12);
        assert!(s3.holds && s3.g_norm == 0.0);
    }

    #[test]
    fn monotone_descent_and_gap_bound() {
        // Along a run: phi(x+) <= phi(x) - ||g||^2/(2L)
        // and phi(x) - phi* >= ||g||^2/(2L).
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![1.0, 10.0]),
            array![-1.0, -1.0],
        )
        .unwrap();
        let b = ExtendedBox::new(array![0.0, 0.0], array![1.0, 1.0]).unwrap();
        let l = 10.0;
        let phi_star = {
            let xs = array![1.0, 0.1];
            obj.value(&xs.view())
        };
        let mut x = array![0.0, 0.0];
        for _ in 0..200 {
            let (v, grad) = obj.value_grad(&x.view());
            let (g, x_plus) = pg_map(&x.view(), &grad.view(), l, &b, &IndexSet::empty());
            let gn2 = g.dot(&g);
            let v_plus = obj.value(&x_plus.view());
            assert!(v_plus <= v - gn2 / (2.0 * l) + 1e-10);
            assert!(v - phi_star >= gn2 / (2.0 * l) - 1e-10);
            x = x_plus;
        }
    }

    #[test]
    fn sublinear_rate_and_fejer_monotonicity() {
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![2.0, 5.0]),
            array![-2.0, -5.0],
        )
        .unwrap();
        let b = ExtendedBox::free(2);
        let x_star = array![1.0, 1.0];
        let phi_star = obj.value(&x_star.view());
        let l = 5.0;
        let mut iterates = vec![array![-3.0, 4.0]];
        for _ in 0..60 {
            let last = iterates.last().unwrap().clone();
            iterates.push(pg_step(&last.view(), &obj, l, &b, &IndexSet::empty()));
        }
        for k in 0..iterates.len() {
            for j in k + 1..iterates.len() {
                let lgap = obj.value(&iterates[j].view()) - phi_star;
                let dk = norm(&(&iterates[k] - &x_star).view());
                assert!(lgap <= l * dk * dk / (2.0 * (j - k) as f64) + 1e-9);
                let dj = norm(&(&iterates[j] - &x_star).view());
                assert!(dj <= dk + 1e-10);
            }
        }
    }

    #[test]
    fn budget_formula() {
        // L=10, sigma=2, gap0=8, eps=1 -> 2*5*3+1 = 31.
        assert_eq!(iteration_budget(10.0, 2.0, 8.0, 1.0), 31);
        assert_eq!(iteration_budget(10.0, 2.0, 0.5, 1.0), 1);
        assert_eq!(iteration_budget(10.0, 2.0, 0.0, 1.0), 0);
    }

    #[test]
    fn strongly_convex_budget_is_respected() {
        // Gap certified <= eps within the closed-form budget.
        let q = Array2::from_diag(&array![1.0, 6.0, 12.0]);
        let obj = SmoothObjective::quadratic(q, array![-1.0, -2.0, -3.0]).unwrap();
        let b = ExtendedBox::new(Array1::zeros(3), Array1::from_elem(3, 1.0)).unwrap();
        let l = obj.lipschitz();
        let sigma = obj.strong_modulus();
        // Reference solution at tight tolerance.
        let cfg = PGConfig::new(l, 1e-13, 2_000_000).unwrap();
        let x0 = array![1.0, 1.0, 1.0];
        let reference = pg_solve(&obj, &b, &IndexSet::empty(), &cfg, &x0.view()).unwrap();
        let phi_star = reference.value;
        let gap0 = obj.value(&x0.view()) - phi_star;
        for eps in [1e-2, 1e-4, 1e-6] {
            let budget = iteration_budget(l, sigma, gap0, eps) as usize;
            let mut x = x0.clone();
            let mut reached = obj.value(&x.view()) - phi_star <= eps;
            for _ in 0..budget {
                x = pg_step(&x.view(), &obj, l, &b, &IndexSet::empty());
                if obj.value(&x.view()) - phi_star <= eps {
                    reached = true;
                    break;
                }
            }
            assert!(reached, "gap not within {eps} after {budget} iterations");
        }
    }

    #[test]
    fn spectral_pg_matches_fixed_step() {
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![1.0, 40.0]),
            array![-1.0, -1.0],
        )
        .unwrap();
        let b = ExtendedBox::new(array![0.0, 0.0], array![1.0, 1.0]).unwrap();
        let out = spectral_pg_solve(
            &obj,
            &b,
            &IndexSet::empty(),
            &array![0.0, 0.0].view(),
            1e-10,
            50_000,
        );
        assert_eq!(out.status, PGStatus::Converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 0.025).abs() < 1e-8);
    }
}
