//! System-plus-environment dynamics: Hamiltonian assembly, exact unitary
//! stepping, quantum trajectories under the relaxation protocols and a
//! dense Lindblad integrator for small instances.

mod correlation;
mod lindblad;
mod observable;
mod protocol;
mod trajectory;

pub use correlation::{dissipative_correlation, estimate_tau_e, DEFAULT_TAU_E_THRESHOLD};
pub use lindblad::{lindblad_dense_integrate, protocol_dissipator, Dissipator, MAX_LINDBLAD_DIM};
pub use observable::{DenseObservable, ExcitationProbability, Observable, PositionProbabilities, SystemPopulations};
pub use protocol::RelaxationProtocol;
pub use trajectory::{run_trajectories, Execution, TrajectoryResults, TrajectoryRun};

use crate::encoding::EnvEncoding;
use crate::error::{Error, Result};
use crate::linalg::{
    expm_hermitian_apply, hermitian_deviation, norm_sqr, op_norm, sparse_op_norm, CMatrix, SparseMatrix, C64, ZERO,
};

/// `H̃ = H_S ⊗ 1 + 1 ⊗ H̃_E + α Σ_β A_β ⊗ B̃_β`.
#[derive(Debug, Clone)]
pub struct CompositeModel {
    h_sys: CMatrix,
    enc: EnvEncoding,
    alpha: f64,
    a_ops: Vec<CMatrix>,
}

impl CompositeModel {
    pub fn new(h_sys: CMatrix, enc: EnvEncoding, alpha: f64, a_ops: Vec<CMatrix>) -> Result<Self> {
        let d = h_sys.nrows();
        if d == 0 || h_sys.ncols() != d {
            return Err(Error::DimensionMismatch("H_S must be square and non-empty".into()));
        }
        if a_ops.len() != enc.n_beta() {
            return Err(Error::DimensionMismatch(format!(
                "{} system operators for {} environment operators",
                a_ops.len(),
                enc.n_beta()
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        for m in std::iter::once(&h_sys).chain(&a_ops) {
            if m.shape() != (d, d) {
                return Err(Error::DimensionMismatch("A_β must match H_S".into()));
            }
            let dev = hermitian_deviation(m);
            if dev > 1e-12 * m.norm().max(1.0) {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(CompositeModel {
            h_sys,
            enc,
            alpha,
            a_ops,
        })
    }

    pub fn h_sys(&self) -> &CMatrix {
        &self.h_sys
    }

    pub fn encoding(&self) -> &EnvEncoding {
        &self.enc
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a_ops(&self) -> &[CMatrix] {
        &self.a_ops
    }

    pub fn sys_dim(&self) -> usize {
        self.h_sys.nrows()
    }

    pub fn env_dim(&self) -> usize {
        self.enc.dim()
    }

    pub fn dim(&self) -> usize {
        self.sys_dim() * self.env_dim()
    }

    /// `‖H_S‖ + max|E| + α Σ_β ‖A_β‖ ‖B̃_β‖`.
    pub fn norm_bound(&self) -> f64 {
        let coupling: f64 = self
            .a_ops
            .iter()
            .enumerate()
            .map(|(b, a)| op_norm(a) * self.enc.b_norm(b))
            .sum();
        op_norm(&self.h_sys) + self.enc.h_env_norm() + self.alpha.abs() * coupling
    }
}

/// Assembled total Hamiltonian with its norm bound.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub matrix: SparseMatrix,
    pub norm_bound: f64,
    pub sys_dim: usize,
    pub env_dim: usize,
}

pub fn assemble_hamiltonian(model: &CompositeModel) -> Result<Hamiltonian> {
    let ds = model.sys_dim();
    let de = model.env_dim();
    let id_s = SparseMatrix::identity(ds);
    let id_e = SparseMatrix::identity(de);
    let mut h = SparseMatrix::from_dense(&model.h_sys, 0.0)
        .kron(&id_e)
        .add(&id_s.kron(&model.enc.h_env_sparse()));
    if model.alpha != 0.0 {
        for (a, b) in model.a_ops.iter().zip(model.enc.b_ops()) {
            let term = SparseMatrix::from_dense(a, 0.0).kron(b).scale(C64::new(model.alpha, 0.0));
            h = h.add(&term);
        }
    }
    let dev = h.hermitian_deviation();
    if dev > 1e-12 * h.norm_1().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let bound = model.norm_bound();
    let actual = sparse_op_norm(&h);
    if actual > bound * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::Internal(format!("‖H̃‖ = {actual} exceeds its bound {bound}")));
    }
    Ok(Hamiltonian {
        matrix: h,
        norm_bound: bound,
        sys_dim: ds,
        env_dim: de,
    })
}

/// Pure state on system ⊗ environment; component `(s, e)` at `s·d_E + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    pub sys_dim: usize,
    pub env_dim: usize,
    pub amps: Vec<C64>,
}

impl CompositeState {
    pub fn new(sys_dim: usize, env_dim: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != sys_dim * env_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {sys_dim}×{env_dim}",
                amps.len()
            )));
        }
        let st = CompositeState { sys_dim, env_dim, amps };
        st.check_normalised()?;
        Ok(st)
    }

    /// `|s⟩ ⊗ |e⟩`, both normalised on the way in.
    pub fn product(sys: &[C64], env: &[C64]) -> Result<Self> {
        let ns = norm_sqr(sys).sqrt();
        let ne = norm_sqr(env).sqrt();
        if ns == 0.0 || ne == 0.0 {
            return Err(Error::NotNormalised(0.0));
        }
        let mut amps = Vec::with_capacity(sys.len() * env.len());
        for s in sys {
            for e in env {
                amps.push(s * e / (ns * ne));
            }
        }
        Ok(CompositeState {
            sys_dim: sys.len(),
            env_dim: env.len(),
            amps,
        })
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub(crate) fn check_normalised(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalised(n));
        }
        Ok(())
    }

    pub(crate) fn normalise(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// Environment block of system index `s`.
    pub fn env_block(&self, s: usize) -> &[C64] {
        &self.amps[s * self.env_dim..(s + 1) * self.env_dim]
    }

    pub(crate) fn env_block_mut(&mut self, s: usize) -> &mut [C64] {
        let de = self.env_dim;
        &mut self.amps[s * de..(s + 1) * de]
    }

    /// `Tr_E |ψ⟩⟨ψ|`.
    pub fn reduced_system(&self) -> CMatrix {
        let ds = self.sys_dim;
        CMatrix::from_fn(ds, ds, |i, j| crate::linalg::inner(self.env_block(j), self.env_block(i)))
    }

    /// `Tr_S |ψ⟩⟨ψ|`.
    pub fn reduced_env(&self) -> CMatrix {
        let de = self.env_dim;
        let mut m = CMatrix::zeros(de, de);
        for s in 0..self.sys_dim {
            let b = self.env_block(s);
            for i in 0..de {
                if b[i] == ZERO {
                    continue;
                }
                for j in 0..de {
                    m[(i, j)] += b[i] * b[j].conj();
                }
            }
        }
        m
    }

    pub fn to_density(&self) -> CMatrix {
        let n = self.amps.len();
        CMatrix::from_fn(n, n, |i, j| self.amps[i] * self.amps[j].conj())
    }
}

/// `e^{-iH̃ dt}|ψ⟩`; the input must be normalised.
pub fn evolve_step(state: &CompositeState, h: &Hamiltonian, dt: f64) -> Result<CompositeState> {
    state.check_normalised()?;
    if state.amps.len() != h.matrix.nrows() {
        return Err(Error::DimensionMismatch("state and Hamiltonian differ in dimension".into()));
    }
    let mut out = state.clone();
    expm_hermitian_apply(&h.matrix, h.norm_bound, dt, &mut out.amps);
    Ok(out)
}
