//! Discrete Fourier map between the frequency basis `|ω_k⟩` and the ring
//! position basis `|x⟩` of a uniform grid with odd `N`:
//!
//! `|x⟩ = N^{-1/2} Σ_k exp(-2πi k x / N) |ω_k⟩`, `k = -(N-1)/2 … (N-1)/2`.
//!
//! Amplitude vectors are indexed by `j = k + (N-1)/2` in frequency space and
//! by `x = 0 … N-1` on the ring.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linalg::{C64, ZERO};

/// Cached FFT plans for one ring size.
#[derive(Clone)]
pub struct RingFourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // exp(-iπ(N-1)x/N), the phase from shifting k to a non-negative index
    shift: Vec<C64>,
    norm: f64,
}

impl std::fmt::Debug for RingFourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RingFourier").field("n", &self.n).finish()
    }
}

impl RingFourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let h = n.saturating_sub(1) / 2;
        let shift = (0..n)
            .map(|x| {
                let hx = ((h * x) % n.max(1)) as f64;
                C64::from_polar(1.0, -2.0 * PI * hx / n as f64)
            })
            .collect();
        RingFourier {
            n,
            forward,
            inverse,
            shift,
            norm: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Frequency amplitudes to ring amplitudes, in place:
    /// `a_x = N^{-1/2} Σ_k exp(2πi k x / N) a_k`.
    pub fn to_position(&self, a: &mut [C64]) {
        debug_assert_eq!(a.len(), self.n);
        self.inverse.process(a);
        for (v, s) in a.iter_mut().zip(&self.shift) {
            *v *= s * self.norm;
        }
    }

    /// Inverse of [`RingFourier::to_position`].
    pub fn to_frequency(&self, a: &mut [C64]) {
        debug_assert_eq!(a.len(), self.n);
        for (v, s) in a.iter_mut().zip(&self.shift) {
            *v *= s.conj();
        }
        self.forward.process(a);
        for v in a.iter_mut() {
            *v *= self.norm;
        }
    }

    /// Coupling coefficients in the ring picture,
    /// `g(x) = N^{-1/2} Σ_k exp(-2πi k x / N) g(ω_k)`.
    pub fn coupling_to_position(&self, g: &[C64]) -> Vec<C64> {
        let mut a: Vec<C64> = g.iter().map(|z| z.conj()).collect();
        self.to_position(&mut a);
        a.iter_mut().for_each(|z| *z = z.conj());
        a
    }

    /// Inverse of [`RingFourier::coupling_to_position`].
    pub fn coupling_to_frequency(&self, gx: &[C64]) -> Vec<C64> {
        let mut a: Vec<C64> = gx.iter().map(|z| z.conj()).collect();
        self.to_frequency(&mut a);
        a.iter_mut().for_each(|z| *z = z.conj());
        a
    }
}

/// Direct O(N²) evaluation of [`RingFourier::to_position`].
pub fn to_position_direct(a: &[C64]) -> Vec<C64> {
    let n = a.len();
    let h = (n as i64 - 1) / 2;
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|x| {
            let mut acc = ZERO;
            for (j, &aj) in a.iter().enumerate() {
                let k = j as i64 - h;
                // reduce k·x mod N before converting, to keep the phase exact
                let kx = (k * x as i64).rem_euclid(n as i64) as f64;
                acc += aj * C64::from_polar(1.0, 2.0 * PI * kx / n as f64);
            }
            acc * norm
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_sqr;

    fn sample(n: usize) -> Vec<C64> {
        (0..n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn fft_agrees_with_direct_sum() {
        for n in [1usize, 5, 41, 101, 1001] {
            let a = sample(n);
            let mut fast = a.clone();
            RingFourier::new(n).to_position(&mut fast);
            let slow = to_position_direct(&a);
            let err = fast
                .iter()
                .zip(&slow)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "n = {n}, err = {err}");
        }
    }

    #[test]
    fn round_trip_is_identity_and_unitary() {
        let n = 41;
        let f = RingFourier::new(n);
        let a = sample(n);
        let mut b = a.clone();
        f.to_position(&mut b);
        assert!((norm_sqr(&a) - norm_sqr(&b)).abs() < 1e-12);
        f.to_frequency(&mut b);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn coupling_transform_matches_definition() {
        let n = 7;
        let g = sample(n);
        let gx = RingFourier::new(n).coupling_to_position(&g);
        for x in 0..n {
            let mut want = ZERO;
            for (j, gj) in g.iter().enumerate() {
                let k = j as f64 - 3.0;
                want += C64::from_polar(1.0, -2.0 * PI * k * x as f64 / n as f64) * gj;
            }
            want /= (n as f64).sqrt();
            assert!((gx[x] - want).norm() < 1e-13);
        }
        let back = RingFourier::new(n).coupling_to_frequency(&gx);
        for (a, b) in back.iter().zip(&g) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
