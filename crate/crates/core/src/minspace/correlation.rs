use crate::encoding::EnvEncoding;
use crate::error::{Error, Result};
use crate::linalg::{inner, CVector, C64, ONE, ZERO};

use super::FullEnvironment;

/// One operator `B_β(t)` in a correlation word. `nu = 1` acts from the
/// left of `ρ_E`, `nu = 0` from the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub beta: usize,
    pub time: f64,
    pub nu: u8,
}

/// Anything that can evaluate Heisenberg-picture interaction operators on
/// an ensemble of pure states.
pub trait CorrelationModel {
    fn n_beta(&self) -> usize;
    /// `(p_k, |Ψ_k⟩)` with `ρ_E = Σ p_k |Ψ_k⟩⟨Ψ_k|`.
    fn ensemble(&self) -> Vec<(f64, Vec<C64>)>;
    /// `B_β(t) v`.
    fn apply_b_at(&self, beta: usize, t: f64, v: &[C64]) -> Vec<C64>;
}

impl CorrelationModel for FullEnvironment {
    fn n_beta(&self) -> usize {
        FullEnvironment::n_beta(self)
    }

    fn ensemble(&self) -> Vec<(f64, Vec<C64>)> {
        self.eigen_triples()
            .filter(|(_, p, _)| *p > 1e-14)
            .map(|(_, p, v)| (p, v.as_slice().to_vec()))
            .collect()
    }

    fn apply_b_at(&self, beta: usize, t: f64, v: &[C64]) -> Vec<C64> {
        let basis = &self.basis;
        let mut w = basis.adjoint() * CVector::from_column_slice(v);
        for (a, &e) in w.iter_mut().zip(&self.energies) {
            *a *= C64::from_polar(1.0, -e * t);
        }
        let mut w = basis.adjoint() * (self.b_op(beta) * (basis * w));
        for (a, &e) in w.iter_mut().zip(&self.energies) {
            *a *= C64::from_polar(1.0, e * t);
        }
        (basis * w).as_slice().to_vec()
    }
}

impl CorrelationModel for EnvEncoding {
    fn n_beta(&self) -> usize {
        EnvEncoding::n_beta(self)
    }

    fn ensemble(&self) -> Vec<(f64, Vec<C64>)> {
        vec![(1.0, self.init_state().to_vec())]
    }

    fn apply_b_at(&self, beta: usize, t: f64, v: &[C64]) -> Vec<C64> {
        EnvEncoding::apply_b_at(self, beta, t, v)
    }
}

/// `Tr[B(t₀,ν₀)⋯B(t_{m-1},ν_{m-1}) ρ_E]` for a time-ordered word: the
/// `ν = 1` factors multiply `ρ_E` from the left in word order, the
/// `ν = 0` factors from the right in reverse word order.
pub fn multi_time_correlation<M: CorrelationModel + ?Sized>(model: &M, word: &[Factor]) -> Result<C64> {
    if word.windows(2).any(|w| !(w[0].time >= w[1].time)) || word.iter().any(|f| !f.time.is_finite()) {
        return Err(Error::UnorderedTimes);
    }
    if let Some(f) = word.iter().find(|f| f.beta >= model.n_beta() || f.nu > 1) {
        return Err(Error::param("word", format!("bad factor (β = {}, ν = {})", f.beta, f.nu)));
    }
    if word.is_empty() {
        return Ok(ONE);
    }
    let mut total = ZERO;
    for (p, psi) in model.ensemble() {
        let mut v = psi.clone();
        for f in word.iter().rev().filter(|f| f.nu == 1) {
            v = model.apply_b_at(f.beta, f.time, &v);
        }
        for f in word.iter().filter(|f| f.nu == 0) {
            v = model.apply_b_at(f.beta, f.time, &v);
        }
        total += inner(&psi, &v) * p;
    }
    Ok(total)
}
