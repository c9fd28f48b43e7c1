//! Discretised bath spectra, γ(ω) matrices and the coupling coefficients
//! `g_{β,l}(ω)` that define second-order environment encodings.
//!
//! A rule of thumb for sizing the grid: when the coupling is weak it is
//! usually enough to truncate at `max|ω| ~ ‖H_S‖`. Nothing here enforces it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::RingFourier;
use crate::linalg::{c, eigh, hermitian_deviation, CMatrix, C64, ZERO};

/// Default relative threshold below which eigenvalues of γ(ω) are dropped.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Uniform, symmetric frequency grid `ω_k = k·δω` with an odd point count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n_omega: usize,
    delta_omega: f64,
}

impl FrequencyGrid {
    pub fn new(n_omega: usize, delta_omega: f64) -> Result<Self> {
        if n_omega == 0 || n_omega.is_multiple_of(2) {
            return Err(Error::param(
                "n_omega",
                format!("must be a positive odd count, got {n_omega}"),
            ));
        }
        if !(delta_omega > 0.0 && delta_omega.is_finite()) {
            return Err(Error::param(
                "delta_omega",
                format!("must be positive, got {delta_omega}"),
            ));
        }
        Ok(FrequencyGrid {
            n_omega,
            delta_omega,
        })
    }

    pub fn len(&self) -> usize {
        self.n_omega
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    /// Largest `k`, i.e. `(N_ω - 1)/2`.
    pub fn k_max(&self) -> i64 {
        (self.n_omega as i64 - 1) / 2
    }

    pub fn k_of(&self, j: usize) -> i64 {
        j as i64 - self.k_max()
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.k_of(j) as f64 * self.delta_omega
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_omega).map(|j| self.frequency(j)).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.k_max() as f64 * self.delta_omega
    }

    /// Index of the grid point equal to `omega` (within 1e-9·δω).
    pub fn index_of(&self, omega: f64) -> Option<usize> {
        let k = (omega / self.delta_omega).round();
        if (k * self.delta_omega - omega).abs() > 1e-9 * self.delta_omega {
            return None;
        }
        let j = k as i64 + self.k_max();
        (0..self.n_omega as i64).contains(&j).then_some(j as usize)
    }

    /// Propagation speed on the ring, `c = N_ω δω / 2π` sites per unit time.
    pub fn speed(&self) -> f64 {
        self.n_omega as f64 * self.delta_omega / (2.0 * PI)
    }

    /// Revival period `2π/δω` of free evolution.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.delta_omega
    }
}

/// γ(ω) for every grid frequency: `N_β × N_β` Hermitian PSD matrices.
#[derive(Debug, Clone)]
pub struct GammaSpectrum {
    grid: FrequencyGrid,
    n_beta: usize,
    gamma: Vec<CMatrix>,
}

impl GammaSpectrum {
    pub fn new(grid: FrequencyGrid, gamma: Vec<CMatrix>) -> Result<Self> {
        if gamma.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} γ matrices for {} frequencies",
                gamma.len(),
                grid.len()
            )));
        }
        let n_beta = gamma.first().map(|m| m.nrows()).unwrap_or(0);
        for (j, m) in gamma.iter().enumerate() {
            if m.nrows() != n_beta || m.ncols() != n_beta {
                return Err(Error::DimensionMismatch(format!(
                    "γ(ω) at index {j} is {}x{}, expected {n_beta}x{n_beta}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let dev = hermitian_deviation(m);
            if dev > 1e-12 {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(GammaSpectrum {
            grid,
            n_beta,
            gamma,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn gamma(&self, j: usize) -> &CMatrix {
        &self.gamma[j]
    }
}

/// Coupling coefficients `g_{β,l}(ω)`: for each grid frequency an
/// `N_β × d_ω` matrix whose columns are the channels `l`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    grid: FrequencyGrid,
    n_beta: usize,
    g: Vec<CMatrix>,
}

impl CouplingTable {
    pub fn new(grid: FrequencyGrid, n_beta: usize, g: Vec<CMatrix>) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coupling blocks for {} frequencies",
                g.len(),
                grid.len()
            )));
        }
        for (j, m) in g.iter().enumerate() {
            if m.nrows() != n_beta || m.ncols() > n_beta {
                return Err(Error::DimensionMismatch(format!(
                    "coupling block at index {j} is {}x{}, need {n_beta} rows and at most {n_beta} channels",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(CouplingTable { grid, n_beta, g })
    }

    /// Single-β table from scalar samples; a zero sample gives `d_ω = 0`.
    pub fn from_scalar(grid: FrequencyGrid, samples: &[C64]) -> Result<Self> {
        let g = samples
            .iter()
            .map(|&v| {
                if v == ZERO {
                    CMatrix::zeros(1, 0)
                } else {
                    CMatrix::from_element(1, 1, v)
                }
            })
            .collect();
        Self::new(grid, 1, g)
    }

    /// Single-channel table from ring-position profiles `g_β(x)`, one per β.
    pub fn from_position_profiles(grid: FrequencyGrid, profiles: &[Vec<C64>]) -> Result<Self> {
        let n_beta = profiles.len();
        let fourier = RingFourier::new(grid.len());
        let mut per_beta = Vec::with_capacity(n_beta);
        for p in profiles {
            if p.len() != grid.len() {
                return Err(Error::DimensionMismatch(format!(
                    "position profile has {} sites, grid has {}",
                    p.len(),
                    grid.len()
                )));
            }
            per_beta.push(fourier.coupling_to_frequency(p));
        }
        let g = (0..grid.len())
            .map(|j| {
                let col: Vec<C64> = per_beta.iter().map(|gb| gb[j]).collect();
                if col.iter().all(|v| v.norm() == 0.0) {
                    CMatrix::zeros(n_beta, 0)
                } else {
                    CMatrix::from_column_slice(n_beta, 1, &col)
                }
            })
            .collect();
        Self::new(grid, n_beta, g)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    /// Rank `d_ω` at grid index `j`.
    pub fn rank(&self, j: usize) -> usize {
        self.g[j].ncols()
    }

    pub fn max_rank(&self) -> usize {
        self.g.iter().map(|m| m.ncols()).max().unwrap_or(0)
    }

    pub fn total_rank(&self) -> usize {
        self.g.iter().map(|m| m.ncols()).sum()
    }

    pub fn block(&self, j: usize) -> &CMatrix {
        &self.g[j]
    }

    /// `g_{β,l}(ω_j)`, zero for channels beyond the rank.
    pub fn g(&self, beta: usize, l: usize, j: usize) -> C64 {
        let m = &self.g[j];
        if l < m.ncols() {
            m[(beta, l)]
        } else {
            ZERO
        }
    }

    /// Reconstructed `γ(ω_j) = g g†`.
    pub fn gamma(&self, j: usize) -> CMatrix {
        let m = &self.g[j];
        m * m.adjoint()
    }

    /// `γ_{β,β'}(ω)` linearly interpolated between grid points.
    pub fn gamma_interpolated(&self, beta: usize, beta2: usize, omega: f64) -> Result<C64> {
        let pos = omega / self.grid.delta_omega + self.grid.k_max() as f64;
        if pos < -1e-9 || pos > (self.grid.len() - 1) as f64 + 1e-9 {
            return Err(Error::OutsideGrid(omega));
        }
        let pos = pos.clamp(0.0, (self.grid.len() - 1) as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(self.grid.len() - 1);
        let w = pos - lo as f64;
        let at = |j: usize| self.gamma(j)[(beta, beta2)];
        Ok(at(lo) * (1.0 - w) + at(hi) * w)
    }
}

/// Lorentzian single-mode coupling,
/// `g(ω) = a·sqrt(2γ̄/(ω²+γ̄²) · δω/2π)`, whose correlation tends to
/// `a² exp(-γ̄|s|)`.
pub fn lorentzian_coupling(a: f64, gamma_bar: f64, grid: &FrequencyGrid) -> Result<CouplingTable> {
    check_positive("a", a)?;
    check_positive("gamma_bar", gamma_bar)?;
    let dw = grid.delta_omega();
    let samples: Vec<C64> = grid
        .frequencies()
        .into_iter()
        .map(|w| c(a * (2.0 * gamma_bar / (w * w + gamma_bar * gamma_bar) * dw / (2.0 * PI)).sqrt()))
        .collect();
    CouplingTable::from_scalar(*grid, &samples)
}

/// Ohmic coupling with a Lorentzian cutoff at inverse temperature `beta`
/// (`f64::INFINITY` for zero temperature):
/// `g(ω)² = aγ̄ · |ω|γ̄/(ω²+γ̄²)`, times `exp(βω)` for `ω < 0`.
pub fn ohmic_thermal_coupling(
    a: f64,
    gamma_bar: f64,
    beta: f64,
    grid: &FrequencyGrid,
) -> Result<CouplingTable> {
    check_positive("a", a)?;
    check_positive("gamma_bar", gamma_bar)?;
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::param("beta", format!("must be positive or +inf, got {beta}")));
    }
    let samples: Vec<C64> = grid
        .frequencies()
        .into_iter()
        .map(|w| c(ohmic_g_squared(a, gamma_bar, beta, w).sqrt()))
        .collect();
    CouplingTable::from_scalar(*grid, &samples)
}

pub(crate) fn ohmic_g_squared(a: f64, gamma_bar: f64, beta: f64, w: f64) -> f64 {
    let base = a * gamma_bar * w.abs() * gamma_bar / (w * w + gamma_bar * gamma_bar);
    if w >= 0.0 {
        base
    } else {
        // exp(β·ω) underflows cleanly to 0 at β = +inf
        base * (beta * w).exp()
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

/// Factorises each γ(ω) as `U Λ U†` and keeps `g = U √Λ` for eigenvalues
/// above `rank_tol · λ_max(ω)`.
pub fn diagonalize_gamma(spectrum: &GammaSpectrum, rank_tol: f64) -> Result<CouplingTable> {
    let grid = *spectrum.grid();
    let n_beta = spectrum.n_beta();
    let mut blocks = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let (vals, vecs) = eigh(spectrum.gamma(j));
        let lmax = vals.iter().cloned().fold(0.0, f64::max);
        let psd_tol = 1e-12 * lmax.max(1.0);
        if let Some(&lmin) = vals.first() {
            if lmin < -psd_tol {
                return Err(Error::NotPositiveSemidefinite {
                    omega: grid.frequency(j),
                    eigenvalue: lmin,
                });
            }
        }
        // descending order so channel 0 carries the largest weight
        let kept: Vec<usize> = (0..vals.len())
            .rev()
            .filter(|&i| vals[i] > 0.0 && vals[i] > rank_tol * lmax)
            .collect();
        let mut block = CMatrix::zeros(n_beta, kept.len());
        for (l, &i) in kept.iter().enumerate() {
            let s = vals[i].sqrt();
            for b in 0..n_beta {
                block[(b, l)] = vecs[(b, i)] * s;
            }
        }
        blocks.push(block);
    }
    CouplingTable::new(grid, n_beta, blocks)
}

/// Two-time correlation `Σ_ω exp(-iωs) γ_{β,β'}(ω)` of the discretised bath.
pub fn analytic_correlation(table: &CouplingTable, beta: usize, beta2: usize, s: f64) -> C64 {
    let grid = table.grid();
    let mut acc = ZERO;
    for j in 0..grid.len() {
        let block = table.block(j);
        let mut gam = ZERO;
        for l in 0..block.ncols() {
            gam += block[(beta, l)] * block[(beta2, l)].conj();
        }
        if gam != ZERO {
            acc += C64::from_polar(1.0, -grid.frequency(j) * s) * gam;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_psd;
    use proptest::prelude::*;

    #[test]
    fn grid_symmetric_with_single_zero() {
        let g = FrequencyGrid::new(5, 0.1).unwrap();
        let w = g.frequencies();
        let want = [-0.2, -0.1, 0.0, 0.1, 0.2];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(w.iter().filter(|&&x| x == 0.0).count(), 1);
    }

    #[test]
    fn wavepackage_grid_parameters() {
        let g = FrequencyGrid::new(1001, 0.001).unwrap();
        assert!((g.max_frequency() - 0.5).abs() < 1e-12);
        assert!((g.frequency(0) + 0.5).abs() < 1e-12);
        assert!((g.speed() - 1.001 / (2.0 * PI)).abs() < 1e-15);
        assert!((g.period() - 2.0 * PI / 0.001).abs() < 1e-9);
    }

    #[test]
    fn even_or_empty_grid_rejected() {
        assert!(FrequencyGrid::new(4, 0.1).is_err());
        assert!(FrequencyGrid::new(0, 0.1).is_err());
        assert!(FrequencyGrid::new(5, 0.0).is_err());
        assert!(FrequencyGrid::new(5, -1.0).is_err());
    }

    #[test]
    fn lorentzian_value_at_zero() {
        let grid = FrequencyGrid::new(11, 0.001).unwrap();
        let t = lorentzian_coupling(1.0, 0.002, &grid).unwrap();
        let g0 = t.g(0, 0, grid.index_of(0.0).unwrap()).re;
        assert!((g0 - (0.001f64 / (PI * 0.002)).sqrt()).abs() < 1e-15);
        assert!((g0 - 0.398_942_280_4).abs() < 1e-9);
        for j in 0..grid.len() {
            let v = t.g(0, 0, j);
            assert!(v.im == 0.0 && v.re >= 0.0);
        }
    }

    #[test]
    fn lorentzian_total_weight_approaches_a_squared() {
        // finite band ±W keeps a fraction (2/π)·atan(W/γ̄) of the weight
        let a = 1.3;
        let grid = FrequencyGrid::new(1001, 0.001).unwrap();
        let t = lorentzian_coupling(a, 0.002, &grid).unwrap();
        let total = analytic_correlation(&t, 0, 0, 0.0).re;
        let expect = a * a * (2.0 / PI) * (0.5f64 / 0.002).atan();
        assert!((total - expect).abs() / expect < 2e-3, "{total} vs {expect}");
        assert!((total / (a * a) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn lorentzian_decay_at_ring_step_300() {
        // s = 300/c ≈ 1883, so γ̄s ≈ 3.77
        let grid = FrequencyGrid::new(1001, 0.001).unwrap();
        let t = lorentzian_coupling(1.0, 0.002, &grid).unwrap();
        let s = 300.0 / grid.speed();
        let want = (-0.002 * s).exp();
        let got = analytic_correlation(&t, 0, 0, s).norm() / analytic_correlation(&t, 0, 0, 0.0).norm();
        assert!((0.002 * s - 3.766).abs() < 1e-3);
        assert!((got - want).abs() < 2e-3, "{got} vs {want}");
    }

    #[test]
    fn ohmic_values_and_zero_temperature() {
        let grid = FrequencyGrid::new(21, 0.5).unwrap();
        let t = ohmic_thermal_coupling(1.0, 10.0, f64::INFINITY, &grid).unwrap();
        let j1 = grid.index_of(1.0).unwrap();
        assert!((t.g(0, 0, j1).norm_sqr() - 100.0 / 101.0).abs() < 1e-14);
        for j in 0..grid.len() {
            if grid.frequency(j) <= 0.0 {
                assert_eq!(t.rank(j), 0);
                assert_eq!(t.g(0, 0, j), ZERO);
            }
        }
    }

    #[test]
    fn ohmic_detailed_balance() {
        let grid = FrequencyGrid::new(41, 0.1).unwrap();
        let beta = 1.7;
        let t = ohmic_thermal_coupling(0.7, 10.0, beta, &grid).unwrap();
        for j in 0..grid.len() {
            let w = grid.frequency(j);
            if w > 0.0 {
                let jm = grid.index_of(-w).unwrap();
                let lhs = t.g(0, 0, jm).norm_sqr();
                let rhs = (-beta * w).exp() * t.g(0, 0, j).norm_sqr();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
            }
        }
    }

    #[test]
    fn diagonalize_scalar_and_two_by_two() {
        let grid = FrequencyGrid::new(1, 1.0).unwrap();
        let s = GammaSpectrum::new(grid, vec![CMatrix::from_element(1, 1, c(0.25))]).unwrap();
        let t = diagonalize_gamma(&s, DEFAULT_RANK_TOL).unwrap();
        assert!((t.g(0, 0, 0).norm() - 0.5).abs() < 1e-15);

        let m = CMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(2.0)]);
        let s = GammaSpectrum::new(grid, vec![m.clone()]).unwrap();
        let t = diagonalize_gamma(&s, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(t.rank(0), 2);
        let (vals, _) = eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        assert!((t.gamma(0) - m).norm() < 1e-10);
    }

    #[test]
    fn indefinite_gamma_rejected() {
        let grid = FrequencyGrid::new(1, 1.0).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        let s = GammaSpectrum::new(grid, vec![m]).unwrap();
        match diagonalize_gamma(&s, DEFAULT_RANK_TOL) {
            Err(Error::NotPositiveSemidefinite { omega, eigenvalue }) => {
                assert_eq!(omega, 0.0);
                assert!((eigenvalue + 1.0).abs() < 1e-12);
            }
            other => panic!("expected PSD error, got {other:?}"),
        }
    }

    #[test]
    fn rank_deficient_gamma_drops_channels() {
        let grid = FrequencyGrid::new(1, 1.0).unwrap();
        let v = nalgebra::DVector::from_vec(vec![c(1.0), C64::new(0.0, 2.0)]);
        let m = &v * v.adjoint();
        let s = GammaSpectrum::new(grid, vec![m.clone()]).unwrap();
        let t = diagonalize_gamma(&s, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(t.rank(0), 1);
        assert!((t.gamma(0) - m).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn reconstruction_holds(seed in 0u64..10_000, n in 1usize..4, rank in 0usize..4) {
            let grid = FrequencyGrid::new(3, 0.3).unwrap();
            let gam: Vec<CMatrix> = (0..3).map(|j| random_psd(n, rank.min(n), seed * 3 + j)).collect();
            let s = GammaSpectrum::new(grid, gam.clone()).unwrap();
            let t = diagonalize_gamma(&s, DEFAULT_RANK_TOL).unwrap();
            for (j, g) in gam.iter().enumerate() {
                prop_assert!((t.gamma(j) - g).norm() < 1e-10);
                prop_assert!(t.rank(j) <= n);
            }
        }

        #[test]
        fn correlation_periodic_and_hermitian(seed in 0u64..10_000, s in -50.0f64..50.0) {
            let grid = FrequencyGrid::new(9, 0.25).unwrap();
            let gam: Vec<CMatrix> = (0..9).map(|j| random_psd(2, 2, seed * 9 + j)).collect();
            let t = diagonalize_gamma(&GammaSpectrum::new(grid, gam).unwrap(), DEFAULT_RANK_TOL).unwrap();
            let p = grid.period();
            for (b, b2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let a = analytic_correlation(&t, b, b2, s);
                prop_assert!((a - analytic_correlation(&t, b, b2, s + p)).norm() < 1e-12);
                prop_assert!((analytic_correlation(&t, b, b2, -s) - analytic_correlation(&t, b2, b, s).conj()).norm() < 1e-12);
            }
        }
    }
}
