//! Shared helpers for unit tests: seeded random matrices and states.

use crate::hermlin::{CMat, DensityMatrix, HermitianMatrix, PsdMatrix, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn random_cmat(r: &mut impl Rng, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        C64::new(r.sample(StandardNormal), r.sample(StandardNormal))
    })
}

pub fn random_herm(r: &mut impl Rng, d: usize) -> HermitianMatrix {
    let g = random_cmat(r, d);
    HermitianMatrix::new((&g + g.adjoint()).scale(0.5)).unwrap()
}

pub fn random_psd(r: &mut impl Rng, d: usize) -> PsdMatrix {
    let g = random_cmat(r, d);
    PsdMatrix::new(&g * g.adjoint()).unwrap()
}

/// Wishart state mixed toward the identity by `floor`.
pub fn random_density(r: &mut impl Rng, d: usize, floor: f64) -> DensityMatrix {
    let w = random_psd(r, d);
    let tr = w.mat().trace().re;
    let m = w.mat().unscale(tr).scale(1.0 - floor) + CMat::identity(d, d).scale(floor / d as f64);
    DensityMatrix::new(m).unwrap()
}
