//! Reproducible synthetic instances: sparse least-squares recovery and
//! cone-constrained variants.
//!
//! Randomness is pinned for cross-run reproducibility: a Pcg64 generator
//! (PCG XSL RR 128/64) seeded through SplitMix64 expansion of the 64-bit
//! seed, with standard normals drawn by the ziggurat sampler. Identical
//! spec + seed gives bit-identical instances.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{RngExt, SeedableRng};
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{dist_dual_cone, ConeBlock, ConeSpec};
use crate::model::{ConeL0Problem, ExtendedBox, L0Problem, SmoothObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Nonneg,
    Equality,
    Soc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub m: usize,
    /// Number of nonzeros in the planted solution.
    pub sparsity: usize,
    pub noise_sigma: f64,
    /// Box half-width; `inf` gives a free box.
    pub box_radius: f64,
    pub cone_kind: Option<ConeKind>,
    pub seed: u64,
    pub lambda: f64,
}

impl InstanceSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(CoreError::InvalidParameter("n and m must be positive".into()));
        }
        if self.sparsity > self.n {
            return Err(CoreError::InvalidParameter(format!(
                "sparsity {} exceeds n = {}",
                self.sparsity, self.n
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(CoreError::InvalidParameter("noise_sigma must be nonnegative".into()));
        }
        // The planted signal has +-1 entries and must sit inside the box.
        if !(self.box_radius >= 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "box_radius must be >= 1 (or inf), got {}",
                self.box_radius
            )));
        }
        if !(self.lambda > 0.0) {
            return Err(CoreError::InvalidParameter("lambda must be positive".into()));
        }
        Ok(())
    }
}

fn normal(rng: &mut Pcg64) -> f64 {
    rng.sample(StandardNormal)
}

/// Draw order is fixed: design matrix row-major, then the support sample,
/// then the signs, then the noise vector.
fn build_least_squares(spec: &InstanceSpec, rng: &mut Pcg64) -> Result<(L0Problem, Array1<f64>)> {
    let scale = 1.0 / (spec.m as f64).sqrt();
    let design = Array2::from_shape_fn((spec.m, spec.n), |_| normal(rng) * scale);

    let support = {
        let mut idx: Vec<usize> = sample(rng, spec.n, spec.sparsity).into_vec();
        idx.sort_unstable();
        idx
    };
    let mut x_true = Array1::zeros(spec.n);
    for &i in &support {
        x_true[i] = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
    }

    let mut target = design.dot(&x_true);
    if spec.noise_sigma > 0.0 {
        for v in target.iter_mut() {
            *v += spec.noise_sigma * normal(rng);
        }
    } else {
        // Keep the draw order identical whether or not noise is added.
        for _ in 0..spec.m {
            let _ = normal(rng);
        }
    }

    let objective = SmoothObjective::least_squares(design, target)?;
    let bounds = if spec.box_radius.is_finite() {
        ExtendedBox::symmetric(spec.n, spec.box_radius)?
    } else {
        ExtendedBox::free(spec.n)
    };
    let problem = L0Problem::new(objective, bounds, spec.lambda)?;
    Ok((problem, x_true))
}

/// Seeded sparse least-squares recovery instance: normalized Gaussian design,
/// planted +-1 k-sparse signal, optional measurement noise, symmetric box.
pub fn gen_least_squares(spec: &InstanceSpec) -> Result<(L0Problem, Array1<f64>)> {
    spec.validate()?;
    let mut rng = Pcg64::seed_from_u64(spec.seed);
    build_least_squares(spec, &mut rng)
}

struct ConeData {
    a: Array2<f64>,
    b: Array1<f64>,
    cone: ConeSpec,
}

fn build_cone_constraint(
    spec: &InstanceSpec,
    kind: ConeKind,
    x_true: &Array1<f64>,
    rng: &mut Pcg64,
) -> Result<ConeData> {
    let n = spec.n;
    match kind {
        ConeKind::Nonneg => {
            // Selector rows for the coordinates where the planted signal is
            // nonnegative: x_i >= 0 on the selection, feasible by construction.
            let selected: Vec<usize> =
                (0..n).filter(|&i| x_true[i] >= 0.0).collect();
            if selected.is_empty() {
                return Err(CoreError::Generation("no nonnegative coordinate to select".into()));
            }
            let mut a = Array2::zeros((selected.len(), n));
            for (row, &i) in selected.iter().enumerate() {
                a[[row, i]] = 1.0;
            }
            let b = Array1::zeros(selected.len());
            let cone = ConeSpec::new(vec![ConeBlock::NonnegOrthant(selected.len())])?;
            Ok(ConeData { a, b, cone })
        }
        ConeKind::Equality => {
            if n < 2 {
                return Err(CoreError::Generation("equality kind needs n >= 2".into()));
            }
            let p = (n / 4).max(1).min(n - 1);
            let a = Array2::from_shape_fn((p, n), |_| normal(rng) / (n as f64).sqrt());
            let b = a.dot(x_true);
            let cone = ConeSpec::new(vec![ConeBlock::Free(p)])?;
            Ok(ConeData { a, b, cone })
        }
        ConeKind::Soc => {
            // ||P x - q|| <= r'x + s encoded as (r'x + s; P x - q) in the
            // second-order cone, built exactly feasible at the planted signal.
            let d = n.min(3);
            let p_mat = Array2::from_shape_fn((d, n), |_| normal(rng) / (d as f64).sqrt());
            let q = p_mat.dot(x_true);
            let r = Array1::from_shape_fn(n, |_| normal(rng) / (n as f64).sqrt());
            let s = 0.5 + (-r.dot(x_true)).max(0.0);
            let mut a = Array2::zeros((d + 1, n));
            for j in 0..n {
                a[[0, j]] = r[j];
            }
            for i in 0..d {
                for j in 0..n {
                    a[[i + 1, j]] = p_mat[[i, j]];
                }
            }
            let mut b = Array1::zeros(d + 1);
            b[0] = -s;
            for i in 0..d {
                b[i + 1] = q[i];
            }
            let cone = ConeSpec::new(vec![ConeBlock::SecondOrder(d + 1)])?;
            Ok(ConeData { a, b, cone })
        }
    }
}

/// Cone-constrained wrapper around `gen_least_squares`. The constraint is
/// constructed feasible at the planted signal; if a draw ever violates that
/// (checked to 1e-12), the instance is regenerated with seed+1.
pub fn gen_cone(spec: &InstanceSpec) -> Result<(ConeL0Problem, Array1<f64>)> {
    spec.validate()?;
    let kind = spec.cone_kind.ok_or_else(|| {
        CoreError::InvalidParameter("gen_cone requires cone_kind to be set".into())
    })?;
    for seed in spec.seed..spec.seed.saturating_add(16) {
        let mut rng = Pcg64::seed_from_u64(seed);
        let (base, x_true) = build_least_squares(spec, &mut rng)?;
        let data = build_cone_constraint(spec, kind, &x_true, &mut rng)?;
        let residual = data.a.dot(&x_true) - &data.b;
        let dist = dist_dual_cone(&residual.view(), &data.cone);
        if dist <= 1e-12 {
            let problem = ConeL0Problem::new(
                base.objective,
                base.bounds,
                base.lambda,
                data.a,
                data.b,
                data.cone,
            )?;
            return Ok((problem, x_true));
        }
        log::warn!("generated constraint infeasible at the planted signal (d = {dist}); retrying with seed {}", seed + 1);
    }
    Err(CoreError::Generation("could not build a feasible cone instance in 16 attempts".into()))
}
