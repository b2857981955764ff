//! Shared instance builders for the criterion benchmarks.

use iht_core::{ConeKind, ConeL0Problem, InstanceSpec, L0Problem};

pub fn ls_instance(n: usize, seed: u64) -> L0Problem {
    let spec = InstanceSpec {
        n,
        m: 2 * n,
        sparsity: (n / 8).max(1),
        noise_sigma: 0.05,
        box_radius: 5.0,
        cone_kind: None,
        seed,
        lambda: 0.1,
    };
    iht_core::gen_least_squares(&spec).expect("instance").0
}

pub fn cone_instance(n: usize, kind: ConeKind, seed: u64) -> ConeL0Problem {
    let spec = InstanceSpec {
        n,
        m: n + 2,
        sparsity: (n / 4).max(1),
        noise_sigma: 0.0,
        box_radius: 3.0,
        cone_kind: Some(kind),
        seed,
        lambda: 0.1,
    };
    iht_core::gen_cone(&spec).expect("instance").0
}
