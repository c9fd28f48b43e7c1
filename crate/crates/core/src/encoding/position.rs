use crate::error::{Error, Result};
use crate::fourier::RingFourier;
use crate::linalg::{C64, ONE, ZERO};

use super::{EnvEncoding, Projector, RingLayout};

/// Ring position picture of a second-order encoding,
/// `|x,l⟩ = N^{-1/2} Σ_ω e^{-iωx/c} |ω,l⟩` with `|x + N_ω⟩ ≡ |x⟩`.
#[derive(Debug, Clone)]
pub struct PositionBasisView {
    layout: RingLayout,
    fourier: RingFourier,
    dim: usize,
}

pub fn to_position_basis(enc: &EnvEncoding) -> Result<PositionBasisView> {
    let layout = *enc.ring().ok_or_else(|| {
        Error::param(
            "encoding",
            "position basis needs a second-order encoding with the ring layout (uniform grid, all modes kept)",
        )
    })?;
    Ok(PositionBasisView {
        layout,
        fourier: RingFourier::new(layout.grid.len()),
        dim: enc.dim(),
    })
}

impl PositionBasisView {
    pub fn layout(&self) -> &RingLayout {
        &self.layout
    }

    pub fn n_sites(&self) -> usize {
        self.layout.grid.len()
    }

    pub fn channels(&self) -> usize {
        self.layout.channels
    }

    pub fn speed(&self) -> f64 {
        self.layout.grid.speed()
    }

    pub fn fourier(&self) -> &RingFourier {
        &self.fourier
    }

    /// Rewrites the one-excitation blocks of an environment vector in the
    /// position basis; the vacuum amplitude is untouched.
    pub fn to_position(&self, v: &mut [C64]) {
        for l in 0..self.layout.channels {
            self.fourier.to_position(&mut v[self.layout.block(l)]);
        }
    }

    pub fn to_frequency(&self, v: &mut [C64]) {
        for l in 0..self.layout.channels {
            self.fourier.to_frequency(&mut v[self.layout.block(l)]);
        }
    }

    /// `|⟨x,l|v⟩|²` summed over channels, indexed by `x`.
    pub fn position_probabilities(&self, v: &[C64]) -> Vec<f64> {
        let mut w = v.to_vec();
        self.to_position(&mut w);
        let mut p = vec![0.0; self.n_sites()];
        for l in 0..self.layout.channels {
            for (x, a) in w[self.layout.block(l)].iter().enumerate() {
                p[x] += a.norm_sqr();
            }
        }
        p
    }

    /// `|x,l⟩` expressed in the encoding basis.
    pub fn x_state(&self, x: usize, l: usize) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim];
        let r = self.layout.block(l);
        v[r.start + x] = ONE;
        self.fourier.to_frequency(&mut v[r]);
        v
    }

    /// `g_{β,l}(x)` read off the encoding: `⟨x,l|B̃_β|v⟩ = g_{β,l}(x)*`.
    pub fn coupling_x(&self, enc: &EnvEncoding, beta: usize, l: usize) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim];
        v[0] = ONE;
        let mut w = vec![ZERO; self.dim];
        enc.b_op(beta).matvec(&v, &mut w);
        let mut blk = w[self.layout.block(l)].to_vec();
        self.fourier.to_position(&mut blk);
        blk.iter().map(|z| z.conj()).collect()
    }
}

/// `Π = Σ_{x > x_T, l} |x,l⟩⟨x,l|`.
pub fn dissipation_projector_second_order(view: &PositionBasisView, x_t: usize) -> Result<Projector> {
    let n = view.n_sites();
    if x_t >= n {
        return Err(Error::param("x_t", format!("must be below {n}, got {x_t}")));
    }
    zone_projector(view, x_t + 1, n - 1)
}

/// Projector on the sites `lo ≤ x ≤ hi` of every channel; an empty range
/// (`lo > hi`) gives `Π = 0`.
pub fn zone_projector(view: &PositionBasisView, lo: usize, hi: usize) -> Result<Projector> {
    let n = view.n_sites();
    if hi >= n && lo <= hi {
        return Err(Error::param("zone", format!("upper site {hi} outside the ring of {n} sites")));
    }
    let zone = (0..n).map(|x| x >= lo && x <= hi).collect();
    Ok(Projector::Ring {
        layout: view.layout,
        fourier: view.fourier.clone(),
        zone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{lorentzian_coupling, FrequencyGrid};
    use crate::encoding::{second_order_encoding, Layout};
    use crate::linalg::{inner, norm_sqr};

    fn ring(n: usize, dw: f64) -> (EnvEncoding, PositionBasisView) {
        let grid = FrequencyGrid::new(n, dw).unwrap();
        let table = lorentzian_coupling(1.0, 0.05, &grid).unwrap();
        let enc = second_order_encoding(&table, Layout::Ring).unwrap();
        let view = to_position_basis(&enc).unwrap();
        (enc, view)
    }

    fn free(enc: &EnvEncoding, t: f64, v: &mut [C64]) {
        for (a, &e) in v.iter_mut().zip(enc.h_env_diag()) {
            *a *= C64::from_polar(1.0, -e * t);
        }
    }

    #[test]
    fn free_evolution_shifts_by_integer_steps() {
        let (enc, view) = ring(41, 0.1);
        let c = view.speed();
        for (x, steps) in [(0usize, 1usize), (5, 7), (38, 5), (12, 41)] {
            let mut v = view.x_state(x, 0);
            free(&enc, steps as f64 / c, &mut v);
            let target = view.x_state((x + steps) % 41, 0);
            assert!((inner(&target, &v).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_period_returns_state() {
        let (enc, view) = ring(41, 0.1);
        let v0: Vec<C64> = (0..enc.dim()).map(|i| C64::new((i as f64).sin(), 0.3)).collect();
        let mut v = v0.clone();
        free(&enc, view.layout().grid.period(), &mut v);
        let err: f64 = v.iter().zip(&v0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn parseval_and_round_trip() {
        let (enc, view) = ring(101, 0.05);
        let gx = view.coupling_x(&enc, 0, 0);
        let gw: f64 = enc.b_op(0).row(0).map(|(_, g)| g.norm_sqr()).sum();
        assert!((norm_sqr(&gx) - gw).abs() < 1e-12);
        let v0: Vec<C64> = (0..enc.dim()).map(|i| C64::new((i as f64 * 0.3).cos(), 0.1)).collect();
        let mut v = v0.clone();
        view.to_position(&mut v);
        view.to_frequency(&mut v);
        let err: f64 = v.iter().zip(&v0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn projector_axioms() {
        let (enc, view) = ring(21, 0.2);
        let p = dissipation_projector_second_order(&view, 12).unwrap().to_dense(enc.dim());
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((p.adjoint() - &p).norm() < 1e-12);
        assert!((p.trace().re - 8.0).abs() < 1e-12);
        let empty = dissipation_projector_second_order(&view, 20).unwrap().to_dense(enc.dim());
        assert!(empty.norm() < 1e-15);
        assert!(dissipation_projector_second_order(&view, 21).is_err());
    }

    #[test]
    fn compact_layout_rejected() {
        let grid = FrequencyGrid::new(5, 0.1).unwrap();
        let table = lorentzian_coupling(1.0, 0.05, &grid).unwrap();
        let enc = second_order_encoding(&table, Layout::Compact).unwrap();
        assert!(to_position_basis(&enc).is_err());
    }
}
