//! Benchmark fixtures shared by the criterion benches.

use svilab_core::problems::{make_affine_strongly_monotone, make_bimatrix};
use svilab_core::{BimatrixSpec, ProblemInstance};

/// The 20x10 game of `configs/table1.cfg` at its first Lipschitz constant.
pub fn table_game() -> ProblemInstance {
    make_bimatrix(&BimatrixSpec {
        n: 20,
        m: 10,
        target_lipschitz: 7.05,
        noise_scale: 0.1,
        seed: 1,
    })
    .expect("valid bimatrix spec")
}

pub fn affine(n: usize, kappa: f64) -> ProblemInstance {
    make_affine_strongly_monotone(n, 1.0, kappa, 1.0, 1).expect("valid affine spec")
}
