use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMatrix, C64};

pub(crate) fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for v in m.iter_mut() {
        *v = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    (&m + m.adjoint()) * c(0.5)
}

pub(crate) fn random_psd(n: usize, rank: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = CMatrix::zeros(n, rank);
    for v in x.iter_mut() {
        *v = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    &x * x.adjoint()
}
