use crate::encoding::PositionBasisView;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, CMatrix, CVector};

use super::CompositeState;

/// Real-valued quantities recorded along a trajectory.
pub trait Observable: Sync {
    fn n_values(&self) -> usize;
    fn evaluate(&self, state: &CompositeState, out: &mut [f64]);
}

/// `⟨ψ|O|ψ⟩` for a Hermitian matrix on the full space.
#[derive(Debug, Clone)]
pub struct DenseObservable(CMatrix);

impl DenseObservable {
    pub fn new(op: CMatrix) -> Result<Self> {
        if op.nrows() != op.ncols() {
            return Err(Error::DimensionMismatch("observable must be square".into()));
        }
        let dev = hermitian_deviation(&op);
        if dev > 1e-12 * op.norm().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(DenseObservable(op))
    }
}

impl Observable for DenseObservable {
    fn n_values(&self) -> usize {
        1
    }

    fn evaluate(&self, state: &CompositeState, out: &mut [f64]) {
        let v = CVector::from_column_slice(&state.amps);
        out[0] = v.dotc(&(&self.0 * &v)).re;
    }
}

/// Diagonal of the reduced system state.
#[derive(Debug, Clone, Copy)]
pub struct SystemPopulations {
    pub sys_dim: usize,
}

impl Observable for SystemPopulations {
    fn n_values(&self) -> usize {
        self.sys_dim
    }

    fn evaluate(&self, state: &CompositeState, out: &mut [f64]) {
        for (s, o) in out.iter_mut().enumerate() {
            *o = crate::linalg::norm_sqr(state.env_block(s));
        }
    }
}

/// `P(x)` for every ring site, summed over channels and system states.
#[derive(Debug, Clone)]
pub struct PositionProbabilities {
    pub view: PositionBasisView,
}

impl Observable for PositionProbabilities {
    fn n_values(&self) -> usize {
        self.view.n_sites()
    }

    fn evaluate(&self, state: &CompositeState, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for s in 0..state.sys_dim {
            for (o, p) in out.iter_mut().zip(self.view.position_probabilities(state.env_block(s))) {
                *o += p;
            }
        }
    }
}

/// Probability that the environment is away from its initial level
/// (index 0 in every encoding built here).
#[derive(Debug, Clone, Copy)]
pub struct ExcitationProbability;

impl Observable for ExcitationProbability {
    fn n_values(&self) -> usize {
        1
    }

    fn evaluate(&self, state: &CompositeState, out: &mut [f64]) {
        let vac: f64 = (0..state.sys_dim).map(|s| state.env_block(s)[0].norm_sqr()).sum();
        out[0] = 1.0 - vac;
    }
}
