//! Projections and distances: box and restricted-box projection, cone and
//! dual-cone projection, and the projected-gradient map.

use ndarray::{Array1, ArrayView1};

use crate::error::{CoreError, Result};
use crate::model::{ExtendedBox, IndexSet};

/// Primitive cone blocks. A `ConeSpec` describes K as an ordered product;
/// the constraint side of the problem lives in the dual cone K*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeBlock {
    Zero(usize),
    Free(usize),
    NonnegOrthant(usize),
    SecondOrder(usize),
}

impl ConeBlock {
    pub fn dim(&self) -> usize {
        match *self {
            ConeBlock::Zero(d)
            | ConeBlock::Free(d)
            | ConeBlock::NonnegOrthant(d)
            | ConeBlock::SecondOrder(d) => d,
        }
    }

    /// Blockwise dual: Zero* = Free, Free* = Zero; the orthant and the
    /// second-order cone are self-dual.
    pub fn dual(&self) -> ConeBlock {
        match *self {
            ConeBlock::Zero(d) => ConeBlock::Free(d),
            ConeBlock::Free(d) => ConeBlock::Zero(d),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSpec {
    blocks: Vec<ConeBlock>,
    dim: usize,
}

impl ConeSpec {
    pub fn new(blocks: Vec<ConeBlock>) -> Result<Self> {
        for b in &blocks {
            if b.dim() == 0 {
                return Err(CoreError::InvalidParameter("cone block with dimension 0".into()));
            }
        }
        let dim = blocks.iter().map(|b| b.dim()).sum();
        if dim == 0 {
            return Err(CoreError::InvalidParameter("empty cone".into()));
        }
        Ok(ConeSpec { blocks, dim })
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dual(&self) -> ConeSpec {
        ConeSpec {
            blocks: self.blocks.iter().map(|b| b.dual()).collect(),
            dim: self.dim,
        }
    }
}

fn project_soc(v: &[f64], out: &mut [f64]) {
    let head = v[0];
    let tail_norm = v[1..].iter().map(|t| t * t).sum::<f64>().sqrt();
    if tail_norm <= head {
        out.copy_from_slice(v);
    } else if tail_norm <= -head {
        out.iter_mut().for_each(|o| *o = 0.0);
    } else {
        // tail_norm > |head| >= 0 here, so the scaling is well defined.
        let c = 0.5 * (head + tail_norm);
        out[0] = c;
        let scale = c / tail_norm;
        for (o, t) in out[1..].iter_mut().zip(&v[1..]) {
            *o = scale * t;
        }
    }
}

/// Euclidean projection onto the cone described by `cone`, blockwise.
pub fn project_cone(v: &ArrayView1<f64>, cone: &ConeSpec) -> Array1<f64> {
    assert_eq!(v.len(), cone.dim(), "cone dimension mismatch");
    let v = v.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| v.to_vec());
    let mut out = vec![0.0; v.len()];
    let mut off = 0;
    for block in cone.blocks() {
        let d = block.dim();
        let src = &v[off..off + d];
        let dst = &mut out[off..off + d];
        match block {
            ConeBlock::Zero(_) => dst.iter_mut().for_each(|o| *o = 0.0),
            ConeBlock::Free(_) => dst.copy_from_slice(src),
            ConeBlock::NonnegOrthant(_) => {
                for (o, &s) in dst.iter_mut().zip(src) {
                    *o = s.max(0.0);
                }
            }
            ConeBlock::SecondOrder(_) => project_soc(src, dst),
        }
        off += d;
    }
    Array1::from_vec(out)
}

/// Euclidean projection onto the dual cone K*.
pub fn project_dual_cone(v: &ArrayView1<f64>, cone: &ConeSpec) -> Array1<f64> {
    project_cone(v, &cone.dual())
}

/// d_{K*}(v) = || v - Pi_{K*}(v) ||.
pub fn dist_dual_cone(v: &ArrayView1<f64>, cone: &ConeSpec) -> f64 {
    let p = project_dual_cone(v, cone);
    v.iter()
        .zip(p.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Componentwise clamp onto the box; infinite bounds never clamp.
pub fn project_box(x: &ArrayView1<f64>, bounds: &ExtendedBox) -> Array1<f64> {
    assert_eq!(x.len(), bounds.dim(), "box dimension mismatch");
    let l = bounds.lower();
    let u = bounds.upper();
    Array1::from_shape_fn(x.len(), |i| x[i].max(l[i]).min(u[i]))
}

/// Projection onto B_I: coordinates in `pin` go to exactly zero, the rest clamp.
pub fn project_box_restricted(
    x: &ArrayView1<f64>,
    bounds: &ExtendedBox,
    pin: &IndexSet,
) -> Array1<f64> {
    let mut p = project_box(x, bounds);
    for i in pin.iter() {
        p[i] = 0.0;
    }
    p
}

/// Projected-gradient map over the restricted box:
/// x_plus = Pi_{B_I}(x - grad / L), g = L (x - x_plus).
pub fn pg_map(
    x: &ArrayView1<f64>,
    grad: &ArrayView1<f64>,
    l: f64,
    bounds: &ExtendedBox,
    pin: &IndexSet,
) -> (Array1<f64>, Array1<f64>) {
    debug_assert!(l > 0.0);
    let shifted = Array1::from_shape_fn(x.len(), |i| x[i] - grad[i] / l);
    let x_plus = project_box_restricted(&shifted.view(), bounds, pin);
    let g = Array1::from_shape_fn(x.len(), |i| l * (x[i] - x_plus[i]));
    (g, x_plus)
}

pub fn norm(v: &ArrayView1<f64>) -> f64 {
    v.dot(v).sqrt()
}
