//! Problem data model: smooth convex objectives with known constants,
//! extended-real box constraints and the l0-regularized problem assemblies.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{CoreError, Result};
use crate::geometry::ConeSpec;

/// Tolerance used when extracting the zero pattern of a reported iterate.
/// Inside the thresholding loop zeros are assigned exactly and a tolerance
/// of `0.0` is used instead.
pub const REPORT_ZERO_TOL: f64 = 1e-10;

/// A sorted set of coordinate indices (0-based). Used for the zero pattern
/// `I(x) = {i : x_i = 0}` and for pinning coordinates of a restricted box.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Boolean membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.0 {
            if i < n {
                m[i] = true;
            }
        }
        m
    }

    /// Decode a subset bitmask (bit `i` set iff `i` is a member).
    pub fn from_bits(bits: u64, n: usize) -> Self {
        IndexSet((0..n).filter(|i| bits & (1u64 << i) != 0).collect())
    }
}

/// Zero pattern `I(x) = {i : |x_i| <= zero_tol}`.
pub fn zero_set(x: &ArrayView1<f64>, zero_tol: f64) -> IndexSet {
    IndexSet(
        x.iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() <= zero_tol)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Number of nonzero entries using exact comparison (thresholding steps
/// assign zeros exactly, so this is well-defined on solver iterates).
pub fn nnz_exact(x: &ArrayView1<f64>) -> usize {
    x.iter().filter(|&&v| v != 0.0).count()
}

/// Value/gradient oracle for a smooth convex function together with its
/// gradient Lipschitz constant and (possibly zero) strong-convexity modulus.
pub trait SmoothOracle {
    fn dim(&self) -> usize;
    fn value(&self, x: &ArrayView1<f64>) -> f64;
    fn value_grad(&self, x: &ArrayView1<f64>) -> (f64, Array1<f64>);
    /// Upper bound on the gradient's Lipschitz constant.
    fn lipschitz(&self) -> f64;
    /// Lower bound on the strong-convexity modulus; 0 means "not strongly convex".
    fn strong_modulus(&self) -> f64;

    fn grad(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        self.value_grad(x).1
    }
}

/// Concrete objective families.
#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    /// f(x) = 1/2 ||A x - b||^2
    LeastSquares { design: Array2<f64>, target: Array1<f64> },
    /// f(x) = 1/2 x^T Q x + c^T x with Q symmetric PSD
    Quadratic { hessian: Array2<f64>, linear: Array1<f64> },
    /// f(x) = base(x) + nu/2 ||x||^2
    Perturbed { base: Box<SmoothObjective>, nu: f64 },
}

#[derive(Debug, Clone)]
pub struct SmoothObjective {
    kind: ObjectiveKind,
    dim: usize,
    lipschitz: f64,
    strong_modulus: f64,
}

/// Relative tolerance target for the internal power iterations.
const CONSTANT_EST_TOL: f64 = 1e-10;
/// Iteration cap for the internal power iterations.
const POWER_ITER_CAP: usize = 100_000;
/// Floor applied to the Lipschitz constant so that step sizes stay finite
/// even for (numerically) linear objectives.
const LIPSCHITZ_FLOOR: f64 = 1e-12;

impl SmoothObjective {
    /// Least-squares objective with constants estimated by power iteration.
    pub fn least_squares(design: Array2<f64>, target: Array1<f64>) -> Result<Self> {
        if design.nrows() != target.len() {
            return Err(CoreError::DimensionMismatch {
                expected: design.nrows(),
                got: target.len(),
            });
        }
        if design.ncols() == 0 {
            return Err(CoreError::InvalidParameter("empty design matrix".into()));
        }
        let dim = design.ncols();
        let kind = ObjectiveKind::LeastSquares { design, target };
        let (l, sigma) = estimate_constants_for(&kind, dim, CONSTANT_EST_TOL)?;
        Ok(SmoothObjective { kind, dim, lipschitz: l, strong_modulus: sigma })
    }

    /// Least-squares objective with caller-supplied constants, validated
    /// against power-iteration estimates.
    pub fn least_squares_with_constants(
        design: Array2<f64>,
        target: Array1<f64>,
        lipschitz: f64,
        strong_modulus: f64,
    ) -> Result<Self> {
        let obj = Self::least_squares(design, target)?;
        validate_constants(lipschitz, strong_modulus, obj.lipschitz, obj.strong_modulus)?;
        Ok(SmoothObjective { lipschitz, strong_modulus, ..obj })
    }

    /// Quadratic objective 1/2 x'Qx + c'x. Q must be symmetric PSD.
    pub fn quadratic(hessian: Array2<f64>, linear: Array1<f64>) -> Result<Self> {
        let n = linear.len();
        if hessian.nrows() != n || hessian.ncols() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: hessian.nrows() });
        }
        if n == 0 {
            return Err(CoreError::InvalidParameter("empty quadratic".into()));
        }
        let asym = hessian
            .iter()
            .zip(hessian.t().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if asym > 1e-12 {
            return Err(CoreError::InvalidParameter(format!(
                "quadratic Hessian not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let kind = ObjectiveKind::Quadratic { hessian, linear };
        let (l, sigma_raw) = estimate_constants_for(&kind, n, CONSTANT_EST_TOL)?;
        // lambda_min(Q) >= -1e-10 is required for convexity; the shifted power
        // iteration reports lambda_min through l - lambda_max(l*I - Q).
        let lambda_min_est = l - power_lambda_max_shifted(&kind, n, l, CONSTANT_EST_TOL)?;
        if lambda_min_est < -1e-10 {
            return Err(CoreError::InvalidParameter(format!(
                "quadratic Hessian not PSD (lambda_min ~ {lambda_min_est:.3e})"
            )));
        }
        Ok(SmoothObjective { kind, dim: n, lipschitz: l, strong_modulus: sigma_raw })
    }

    pub fn quadratic_with_constants(
        hessian: Array2<f64>,
        linear: Array1<f64>,
        lipschitz: f64,
        strong_modulus: f64,
    ) -> Result<Self> {
        let obj = Self::quadratic(hessian, linear)?;
        validate_constants(lipschitz, strong_modulus, obj.lipschitz, obj.strong_modulus)?;
        Ok(SmoothObjective { lipschitz, strong_modulus, ..obj })
    }

    /// Tikhonov-perturbed wrapper: f_nu = f + nu/2 ||x||^2 with
    /// L_nu = L_f + nu and modulus sigma + nu.
    pub fn perturbed(base: SmoothObjective, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("perturbation nu must be positive, got {nu}")));
        }
        let dim = base.dim;
        let lipschitz = base.lipschitz + nu;
        let strong_modulus = base.strong_modulus + nu;
        Ok(SmoothObjective {
            kind: ObjectiveKind::Perturbed { base: Box::new(base), nu },
            dim,
            lipschitz,
            strong_modulus,
        })
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    /// Checked oracle evaluation (validates dimension and finiteness).
    pub fn evaluate(&self, x: &ArrayView1<f64>) -> Result<(f64, Array1<f64>)> {
        if x.len() != self.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("evaluation point".into()));
        }
        Ok(self.value_grad(x))
    }

    /// Hessian-vector product (exact for the implemented families).
    pub fn hess_vec(&self, v: &ArrayView1<f64>) -> Array1<f64> {
        match &self.kind {
            ObjectiveKind::LeastSquares { design, .. } => design.t().dot(&design.dot(v)),
            ObjectiveKind::Quadratic { hessian, .. } => hessian.dot(v),
            ObjectiveKind::Perturbed { base, nu } => {
                let mut h = base.hess_vec(v);
                h.scaled_add(*nu, v);
                h
            }
        }
    }
}

impl SmoothOracle for SmoothObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &ArrayView1<f64>) -> f64 {
        match &self.kind {
            ObjectiveKind::LeastSquares { design, target } => {
                let r = design.dot(x) - target;
                0.5 * r.dot(&r)
            }
            ObjectiveKind::Quadratic { hessian, linear } => {
                0.5 * x.dot(&hessian.dot(x)) + linear.dot(x)
            }
            ObjectiveKind::Perturbed { base, nu } => base.value(x) + 0.5 * nu * x.dot(x),
        }
    }

    fn value_grad(&self, x: &ArrayView1<f64>) -> (f64, Array1<f64>) {
        match &self.kind {
            ObjectiveKind::LeastSquares { design, target } => {
                let r = design.dot(x) - target;
                (0.5 * r.dot(&r), design.t().dot(&r))
            }
            ObjectiveKind::Quadratic { hessian, linear } => {
                let qx = hessian.dot(x);
                (0.5 * x.dot(&qx) + linear.dot(x), qx + linear)
            }
            ObjectiveKind::Perturbed { base, nu } => {
                let (v, mut g) = base.value_grad(x);
                g.scaled_add(*nu, x);
                (v + 0.5 * nu * x.dot(x), g)
            }
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_modulus(&self) -> f64 {
        self.strong_modulus
    }
}

fn validate_constants(l: f64, sigma: f64, l_est: f64, sigma_est: f64) -> Result<()> {
    // l_est carries the (1+tol) inflation, so l_est/(1+tol) ~ lambda_max.
    let lambda_max = l_est / (1.0 + CONSTANT_EST_TOL);
    if l < lambda_max * (1.0 - 1e-8) {
        return Err(CoreError::InvalidParameter(format!(
            "lipschitz constant {l} below spectral bound {lambda_max}"
        )));
    }
    let lambda_min = sigma_est / (1.0 - CONSTANT_EST_TOL).max(f64::MIN_POSITIVE);
    if sigma > lambda_min + 1e-8 {
        return Err(CoreError::InvalidParameter(format!(
            "strong modulus {sigma} above spectral bound {lambda_min}"
        )));
    }
    if sigma < 0.0 {
        return Err(CoreError::InvalidParameter("strong modulus must be nonnegative".into()));
    }
    Ok(())
}

/// Power-iteration estimate of (L_f, sigma) for a least-squares or quadratic
/// objective. L_f is the largest Hessian eigenvalue inflated by (1+tol);
/// sigma is the smallest eigenvalue from a shifted iteration on L*I - H,
/// deflated by (1-tol) and floored at zero.
pub fn estimate_constants(obj: &SmoothObjective, tol: f64) -> Result<(f64, f64)> {
    match obj.kind {
        ObjectiveKind::Perturbed { .. } => Err(CoreError::Unsupported(
            "estimate_constants expects a least-squares or quadratic objective; \
             perturbed wrappers derive their constants from the base"
                .into(),
        )),
        _ => estimate_constants_for(&obj.kind, obj.dim, tol),
    }
}

fn estimate_constants_for(kind: &ObjectiveKind, n: usize, tol: f64) -> Result<(f64, f64)> {
    let lambda_max = power_lambda_max(kind, n, tol)?;
    let l = (lambda_max * (1.0 + tol)).max(LIPSCHITZ_FLOOR);
    let shifted_max = power_lambda_max_shifted(kind, n, l, tol)?;
    let raw = ((l - shifted_max) * (1.0 - tol)).max(0.0);
    // The two Rayleigh quotients leave a small noise floor; a singular
    // Hessian must come out as exactly sigma = 0 (zero is always a valid
    // lower bound), so estimates below the floor are snapped down.
    let sigma = if raw <= 1e-7 * l { 0.0 } else { raw };
    Ok((l, sigma))
}

fn hess_vec_kind(kind: &ObjectiveKind, v: &Array1<f64>) -> Array1<f64> {
    match kind {
        ObjectiveKind::LeastSquares { design, .. } => design.t().dot(&design.dot(v)),
        ObjectiveKind::Quadratic { hessian, .. } => hessian.dot(v),
        ObjectiveKind::Perturbed { base, nu } => {
            let mut h = base.hess_vec(&v.view());
            h.scaled_add(*nu, v);
            h
        }
    }
}

fn power_start(n: usize) -> Array1<f64> {
    // Fixed pseudo-random direction: deterministic and almost surely not
    // orthogonal to the leading eigenvector.
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_pcg::Pcg64::seed_from_u64(0x9E3779B97F4A7C15);
    let mut v = Array1::from_shape_fn(n, |_| rng.random::<f64>() - 0.5);
    let nrm = v.dot(&v).sqrt();
    if nrm > 0.0 {
        v /= nrm;
    } else {
        v[0] = 1.0;
    }
    v
}

fn power_iterate(hv: impl Fn(&Array1<f64>) -> Array1<f64>, n: usize, tol: f64) -> Result<f64> {
    let mut v = power_start(n);
    let mut rayleigh = v.dot(&hv(&v));
    let mut stable = 0usize;
    for iter in 0..POWER_ITER_CAP {
        let hvv = hv(&v);
        let nrm = hvv.dot(&hvv).sqrt();
        if nrm <= 1e-300 {
            return Ok(0.0);
        }
        let v_next = hvv / nrm;
        let r_next = v_next.dot(&hv(&v_next));
        let diff = (r_next - rayleigh).abs();
        rayleigh = r_next;
        v = v_next;
        if diff <= tol * rayleigh.abs().max(1e-300) {
            stable += 1;
            if stable >= 3 {
                return Ok(rayleigh.max(0.0));
            }
        } else {
            stable = 0;
        }
        let _ = iter;
    }
    Err(CoreError::PowerIterationStalled { iters: POWER_ITER_CAP, best: rayleigh })
}

fn power_lambda_max(kind: &ObjectiveKind, n: usize, tol: f64) -> Result<f64> {
    power_iterate(|v| hess_vec_kind(kind, v), n, tol)
}

fn power_lambda_max_shifted(kind: &ObjectiveKind, n: usize, shift: f64, tol: f64) -> Result<f64> {
    power_iterate(
        |v| {
            let mut out = v * shift;
            out -= &hess_vec_kind(kind, v);
            out
        },
        n,
        tol,
    )
}

/// Box constraint with extended-real bounds: l in [-inf, 0]^n, u in [0, inf]^n.
/// Infinities are first-class values, never large finite sentinels.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedBox {
    lower: Array1<f64>,
    upper: Array1<f64>,
    pinned: IndexSet,
}

impl ExtendedBox {
    pub fn new(lower: Array1<f64>, upper: Array1<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(CoreError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for i in 0..lower.len() {
            let (l, u) = (lower[i], upper[i]);
            if l.is_nan() || u.is_nan() {
                return Err(CoreError::NonFinite(format!("box bound at index {i}")));
            }
            if !(l <= 0.0) || !(u >= 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "box requires l_i <= 0 <= u_i, got [{l}, {u}] at index {i}"
                )));
            }
        }
        let pinned = IndexSet(
            (0..lower.len()).filter(|&i| lower[i] == 0.0 && upper[i] == 0.0).collect(),
        );
        Ok(ExtendedBox { lower, upper, pinned })
    }

    /// The all-of-R^n box.
    pub fn free(n: usize) -> Self {
        ExtendedBox {
            lower: Array1::from_elem(n, f64::NEG_INFINITY),
            upper: Array1::from_elem(n, f64::INFINITY),
            pinned: IndexSet::empty(),
        }
    }

    /// [-r, r]^n.
    pub fn symmetric(n: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(CoreError::InvalidParameter(format!("box radius must be positive, got {r}")));
        }
        ExtendedBox::new(Array1::from_elem(n, -r), Array1::from_elem(n, r))
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Array1<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &Array1<f64> {
        &self.upper
    }

    /// Indices with l_i = u_i = 0 (the set I_0).
    pub fn pinned(&self) -> &IndexSet {
        &self.pinned
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().all(|v| v.is_finite()) && self.upper.iter().all(|v| v.is_finite())
    }

    /// max { ||x|| : x in the box } for a bounded box: the norm of the
    /// per-coordinate radius max(-l_i, u_i).
    pub fn max_norm(&self) -> Result<f64> {
        if !self.is_bounded() {
            return Err(CoreError::Unsupported("max_norm requires a bounded box".into()));
        }
        Ok(self
            .lower
            .iter()
            .zip(self.upper.iter())
            .map(|(&l, &u)| (-l).max(u).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    pub fn contains(&self, x: &ArrayView1<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol)
    }

    /// The restricted box B_I with coordinates in `pin` fixed at zero.
    pub fn restricted(&self, pin: &IndexSet) -> ExtendedBox {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for i in pin.iter() {
            lower[i] = 0.0;
            upper[i] = 0.0;
        }
        ExtendedBox::new(lower, upper).expect("restriction preserves box validity")
    }
}

/// min f(x) + lambda ||x||_0 over the box.
#[derive(Debug, Clone)]
pub struct L0Problem {
    pub objective: SmoothObjective,
    pub bounds: ExtendedBox,
    pub lambda: f64,
}

impl L0Problem {
    pub fn new(objective: SmoothObjective, bounds: ExtendedBox, lambda: f64) -> Result<Self> {
        if objective.dim() != bounds.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: objective.dim(),
                got: bounds.dim(),
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(L0Problem { objective, bounds, lambda })
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// F(x) = f(x) + lambda * nnz(x), counting zeros exactly.
    pub fn total_value(&self, x: &ArrayView1<f64>) -> f64 {
        self.objective.value(x) + self.lambda * nnz_exact(x) as f64
    }
}

/// min f(x) + lambda ||x||_0 subject to A x - b in K* and the box.
#[derive(Debug, Clone)]
pub struct ConeL0Problem {
    pub objective: SmoothObjective,
    pub bounds: ExtendedBox,
    pub lambda: f64,
    pub a: Array2<f64>,
    pub b: Array1<f64>,
    pub cone: ConeSpec,
    opnorm_a: f64,
}

impl ConeL0Problem {
    pub fn new(
        objective: SmoothObjective,
        bounds: ExtendedBox,
        lambda: f64,
        a: Array2<f64>,
        b: Array1<f64>,
        cone: ConeSpec,
    ) -> Result<Self> {
        let opnorm = estimate_opnorm(&a, CONSTANT_EST_TOL)?;
        Self::with_opnorm(objective, bounds, lambda, a, b, cone, opnorm)
    }

    pub fn with_opnorm(
        objective: SmoothObjective,
        bounds: ExtendedBox,
        lambda: f64,
        a: Array2<f64>,
        b: Array1<f64>,
        cone: ConeSpec,
        opnorm_a: f64,
    ) -> Result<Self> {
        if objective.dim() != bounds.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: objective.dim(),
                got: bounds.dim(),
            });
        }
        if a.ncols() != bounds.dim() {
            return Err(CoreError::DimensionMismatch { expected: bounds.dim(), got: a.ncols() });
        }
        if a.nrows() != b.len() {
            return Err(CoreError::DimensionMismatch { expected: a.nrows(), got: b.len() });
        }
        if cone.dim() != a.nrows() {
            return Err(CoreError::DimensionMismatch { expected: a.nrows(), got: cone.dim() });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        let reference = estimate_opnorm(&a, CONSTANT_EST_TOL)?;
        if opnorm_a < reference / (1.0 + CONSTANT_EST_TOL) * (1.0 - 1e-8) {
            return Err(CoreError::InvalidParameter(format!(
                "opnorm_a {opnorm_a} below spectral bound {reference}"
            )));
        }
        Ok(ConeL0Problem { objective, bounds, lambda, a, b, cone, opnorm_a })
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn constraint_dim(&self) -> usize {
        self.b.len()
    }

    /// Spectral-norm upper bound on A.
    pub fn opnorm_a(&self) -> f64 {
        self.opnorm_a
    }

    /// The box-constrained l0 problem obtained by dropping the cone constraint.
    pub fn without_cone(&self) -> L0Problem {
        L0Problem {
            objective: self.objective.clone(),
            bounds: self.bounds.clone(),
            lambda: self.lambda,
        }
    }
}

/// Upper bound on ||A|| = lambda_max(A^T A)^(1/2) via power iteration,
/// inflated by (1+tol).
pub fn estimate_opnorm(a: &Array2<f64>, tol: f64) -> Result<f64> {
    let n = a.ncols();
    if n == 0 {
        return Err(CoreError::InvalidParameter("empty matrix".into()));
    }
    let lam = power_iterate(|v| a.t().dot(&a.dot(v)), n, tol)?;
    Ok((lam.max(0.0).sqrt() * (1.0 + tol)).max(LIPSCHITZ_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn identity2() -> SmoothObjective {
        SmoothObjective::quadratic(Array2::eye(2), Array1::zeros(2)).unwrap()
    }

    #[test]
    fn quadratic_identity_value_grad() {
        let obj = identity2();
        let x = array![1.0, 2.0];
        let (v, g) = obj.evaluate(&x.view()).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
        assert!((g[0] - 1.0).abs() < 1e-14 && (g[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_zero_residual() {
        let obj =
            SmoothObjective::least_squares(Array2::eye(2), array![1.0, 1.0]).unwrap();
        let x = array![1.0, 1.0];
        let (v, g) = obj.evaluate(&x.view()).unwrap();
        assert!(v.abs() < 1e-14);
        assert!(g.iter().all(|gi| gi.abs() < 1e-14));
    }

    #[test]
    fn perturbed_adds_tikhonov_term() {
        let obj = SmoothObjective::perturbed(identity2(), 2.0).unwrap();
        let x = array![1.0, 0.0];
        let (v, g) = obj.evaluate(&x.view()).unwrap();
        assert!((v - 1.5).abs() < 1e-14);
        assert!((g[0] - 3.0).abs() < 1e-14 && g[1].abs() < 1e-14);
        assert!((obj.lipschitz() - 3.0).abs() < 1e-8);
        assert!((obj.strong_modulus() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn estimate_constants_diagonal() {
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![1.0, 4.0]),
            Array1::zeros(2),
        )
        .unwrap();
        let (l, sigma) = estimate_constants(&obj, 1e-10).unwrap();
        assert!((l - 4.0).abs() < 1e-6, "l = {l}");
        assert!((sigma - 1.0).abs() < 1e-6, "sigma = {sigma}");
    }

    #[test]
    fn estimate_constants_scalar_ls() {
        let obj = SmoothObjective::least_squares(array![[2.0]], array![0.0]).unwrap();
        let (l, sigma) = estimate_constants(&obj, 1e-10).unwrap();
        assert!((l - 4.0).abs() < 1e-6);
        assert!((sigma - 4.0).abs() < 1e-6);
    }

    #[test]
    fn estimate_constants_singular() {
        let obj = SmoothObjective::quadratic(
            Array2::from_diag(&array![0.0, 1.0]),
            Array1::zeros(2),
        )
        .unwrap();
        let (l, sigma) = estimate_constants(&obj, 1e-10).unwrap();
        assert!((l - 1.0).abs() < 1e-6);
        assert_eq!(sigma, 0.0);
    }

    #[test]
    fn asymmetric_hessian_rejected() {
        let q = array![[1.0, 0.5], [0.2, 1.0]];
        assert!(SmoothObjective::quadratic(q, Array1::zeros(2)).is_err());
    }

    #[test]
    fn indefinite_hessian_rejected() {
        let q = array![[1.0, 0.0], [0.0, -1.0]];
        assert!(SmoothObjective::quadratic(q, Array1::zeros(2)).is_err());
    }

    #[test]
    fn zero_set_variants() {
        let x = array![0.0, 1.0, 0.0];
        assert_eq!(zero_set(&x.view(), 0.0), IndexSet::new(vec![0, 2]));
        let y = array![1e-12, 1.0];
        assert_eq!(zero_set(&y.view(), 1e-10), IndexSet::new(vec![0]));
        let z = array![0.0, 0.0];
        assert_eq!(zero_set(&z.view(), 0.0), IndexSet::full(2));
    }

    #[test]
    fn box_validation_and_pins() {
        let b = ExtendedBox::new(array![-1.0, 0.0, 0.0], array![1.0, 0.0, f64::INFINITY]).unwrap();
        assert_eq!(b.pinned().as_slice(), &[1]);
        assert!(!b.is_bounded());
        assert!(ExtendedBox::new(array![0.5], array![1.0]).is_err());
        assert!(ExtendedBox::new(array![-1.0], array![-0.5]).is_err());
    }

    #[test]
    fn box_max_norm() {
        let b = ExtendedBox::new(array![-1.0, -2.0], array![0.5, 1.0]).unwrap();
        assert!((b.max_norm().unwrap() - (1.0f64 + 4.0).sqrt()).abs() < 1e-14);
        assert!(ExtendedBox::free(2).max_norm().is_err());
    }

    #[test]
    fn restricted_box_pins_coordinates() {
        let b = ExtendedBox::symmetric(3, 2.0).unwrap();
        let r = b.restricted(&IndexSet::new(vec![1]));
        assert_eq!(r.lower()[1], 0.0);
        assert_eq!(r.upper()[1], 0.0);
        assert_eq!(r.pinned().as_slice(), &[1]);
    }

    #[test]
    fn l0_problem_validation() {
        let obj = identity2();
        let b = ExtendedBox::symmetric(2, 1.0).unwrap();
        assert!(L0Problem::new(obj.clone(), b.clone(), 0.0).is_err());
        assert!(L0Problem::new(obj, b, 0.5).is_ok());
    }

    /// Test-only eigenvalue oracle: cyclic Jacobi rotations, independent of
    /// the power-iteration route under test.
    fn jacobi_eigenvalues(mut a: Array2<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[[p, q]].abs();
                }
            }
            if off < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[[p, q]].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[[q, q]] - a[[p, p]]) / a[[p, q]];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[[k, p]], a[[k, q]]);
                        a[[k, p]] = c * akp - s * akq;
                        a[[k, q]] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                        a[[p, k]] = c * apk - s * aqk;
                        a[[q, k]] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    #[test]
    fn estimate_constants_matches_jacobi_oracle() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg64::seed_from_u64(321);
        for trial in 0..20 {
            let n = 2 + trial % 5;
            let m = n + trial % 4;
            let a = Array2::from_shape_fn((m, n), |_| 2.0 * rng.random::<f64>() - 1.0);
            let h = a.t().dot(&a);
            let eig = jacobi_eigenvalues(h);
            let (lo, hi) = (eig[0].max(0.0), eig[n - 1]);
            let obj = SmoothObjective::least_squares(a, Array1::zeros(m)).unwrap();
            let (l, sigma) = estimate_constants(&obj, 1e-10).unwrap();
            assert!(
                l >= hi * (1.0 - 1e-8) && l <= hi * (1.0 + 1e-6) + 1e-12,
                "trial {trial}: L = {l} vs lambda_max = {hi}"
            );
            assert!(
                sigma <= lo + 1e-8,
                "trial {trial}: sigma = {sigma} above lambda_min = {lo}"
            );
            // The lower bound must not be needlessly slack either.
            assert!(
                sigma >= lo - 1e-7 * hi.max(1.0) - 1e-6 * lo,
                "trial {trial}: sigma = {sigma} far below lambda_min = {lo}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg64::seed_from_u64(7);
        let objs = vec![
            SmoothObjective::least_squares(
                Array2::from_shape_fn((3, 2), |_| rng.random::<f64>() - 0.5),
                Array1::from_shape_fn(3, |_| rng.random::<f64>() - 0.5),
            )
            .unwrap(),
            SmoothObjective::perturbed(identity2(), 0.7).unwrap(),
        ];
        let h = 1e-6;
        for obj in &objs {
            for _ in 0..20 {
                let x = Array1::from_shape_fn(obj.dim(), |_| 2.0 * rng.random::<f64>() - 1.0);
                let (_, g) = obj.value_grad(&x.view());
                for i in 0..obj.dim() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (obj.value(&xp.view()) - obj.value(&xm.view())) / (2.0 * h);
                    let rel = (fd - g[i]).abs() / g[i].abs().max(1.0);
                    assert!(rel <= 1e-5, "rel err {rel} at coord {i}");
                }
            }
        }
    }

    #[test]
    fn descent_and_convexity_inequalities() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg64::seed_from_u64(11);
        let a = Array2::from_shape_fn((4, 3), |_| rng.random::<f64>() - 0.5);
        let t = Array1::from_shape_fn(4, |_| rng.random::<f64>());
        let obj = SmoothObjective::least_squares(a, t).unwrap();
        let (l, sigma) = (obj.lipschitz(), obj.strong_modulus());
        for _ in 0..50 {
            let x = Array1::from_shape_fn(3, |_| 4.0 * rng.random::<f64>() - 2.0);
            let y = Array1::from_shape_fn(3, |_| 4.0 * rng.random::<f64>() - 2.0);
            let (fx, gx) = obj.value_grad(&x.view());
            let fy = obj.value(&y.view());
            let d = &y - &x;
            let lin = fx + gx.dot(&d);
            assert!(fy <= lin + 0.5 * l * d.dot(&d) + 1e-8);
            assert!(fy >= lin + 0.5 * sigma * d.dot(&d) - 1e-8);
        }
    }
}
