//! Environments as they are simulated: a diagonal Hamiltonian, sparse
//! Hermitian interaction operators and a pure initial state.

mod fourth_order;
mod position;
mod second_order;

pub use fourth_order::{
    fourth_order_delta_check, fourth_order_example_encoding, fourth_order_projector, DeltaReport,
    FourthOrderTables,
};
pub use position::{dissipation_projector_second_order, to_position_basis, zone_projector, PositionBasisView};
pub use second_order::{reproduced_two_time, second_order_encoding, Layout};

use crate::bath::FrequencyGrid;
use crate::error::{Error, Result};
use crate::fourier::RingFourier;
use crate::linalg::{norm_sqr, sparse_op_norm, CMatrix, CVector, SparseMatrix, C64, ZERO};

/// Tolerance used when comparing sector frequencies.
pub(crate) fn sector_tol(scale: f64) -> f64 {
    1e-9 * scale.max(1.0)
}

/// Where the one-excitation modes of a second-order encoding live: block
/// `l` occupies indices `offset + l·N_ω … offset + (l+1)·N_ω - 1` in grid
/// order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingLayout {
    pub grid: FrequencyGrid,
    pub channels: usize,
    pub offset: usize,
}

impl RingLayout {
    pub fn block(&self, l: usize) -> std::ops::Range<usize> {
        let n = self.grid.len();
        self.offset + l * n..self.offset + (l + 1) * n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EncodingKind {
    SecondOrder,
    Minimal,
    FourthOrder,
}

/// Projector on the environment factor.
#[derive(Debug, Clone)]
pub enum Projector {
    /// Diagonal in the encoding basis.
    Diagonal(Vec<bool>),
    /// Diagonal in the ring position basis of a second-order encoding;
    /// `zone[x]` marks the sites in the range, for every channel.
    Ring {
        layout: RingLayout,
        fourier: RingFourier,
        zone: Vec<bool>,
    },
    Dense(CMatrix),
}

impl Projector {
    /// `v ← Π v` for an environment vector.
    pub fn apply(&self, v: &mut [C64]) {
        match self {
            Projector::Diagonal(mask) => {
                for (x, &keep) in v.iter_mut().zip(mask) {
                    if !keep {
                        *x = ZERO;
                    }
                }
            }
            Projector::Ring {
                layout,
                fourier,
                zone,
            } => {
                let mut touched = vec![false; v.len()];
                for l in 0..layout.channels {
                    let r = layout.block(l);
                    let blk = &mut v[r.clone()];
                    fourier.to_position(blk);
                    for (x, a) in blk.iter_mut().enumerate() {
                        if !zone[x] {
                            *a = ZERO;
                        }
                    }
                    fourier.to_frequency(blk);
                    r.for_each(|i| touched[i] = true);
                }
                for (x, t) in v.iter_mut().zip(touched) {
                    if !t {
                        *x = ZERO;
                    }
                }
            }
            Projector::Dense(p) => {
                let out = p * CVector::from_column_slice(v);
                v.copy_from_slice(out.as_slice());
            }
        }
    }

    /// `v ← (1 - Π) v`.
    pub fn apply_complement(&self, v: &mut [C64]) {
        let mut p = v.to_vec();
        self.apply(&mut p);
        for (x, y) in v.iter_mut().zip(p) {
            *x -= y;
        }
    }

    /// `‖Π v‖²`.
    pub fn weight(&self, v: &[C64]) -> f64 {
        let mut p = v.to_vec();
        self.apply(&mut p);
        norm_sqr(&p)
    }

    pub fn to_dense(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        for j in 0..dim {
            e.iter_mut().for_each(|x| *x = ZERO);
            e[j] = C64::new(1.0, 0.0);
            self.apply(&mut e);
            for i in 0..dim {
                m[(i, j)] = e[i];
            }
        }
        m
    }

    /// Orthonormal basis of the range, as column vectors.
    pub fn range_basis(&self, dim: usize) -> Vec<CVector> {
        match self {
            Projector::Diagonal(mask) => mask
                .iter()
                .enumerate()
                .filter(|(_, &k)| k)
                .map(|(i, _)| {
                    let mut v = CVector::zeros(dim);
                    v[i] = C64::new(1.0, 0.0);
                    v
                })
                .collect(),
            _ => {
                let (vals, vecs) = crate::linalg::eigh(&self.to_dense(dim));
                vals.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0.5)
                    .map(|(i, _)| vecs.column(i).into_owned())
                    .collect()
            }
        }
    }
}

/// An encoded environment `(H̃_E, {B̃_β}, |ψ̃⟩)`.
#[derive(Debug, Clone)]
pub struct EnvEncoding {
    kind: EncodingKind,
    h_env_diag: Vec<f64>,
    b_ops: Vec<SparseMatrix>,
    b_norms: Vec<f64>,
    init_state: Vec<C64>,
    sector_of: Vec<f64>,
    projector: Option<Projector>,
    ring: Option<RingLayout>,
}

impl EnvEncoding {
    pub fn new(
        kind: EncodingKind,
        h_env_diag: Vec<f64>,
        b_ops: Vec<SparseMatrix>,
        init_state: Vec<C64>,
        sector_of: Vec<f64>,
    ) -> Result<Self> {
        let dim = h_env_diag.len();
        if init_state.len() != dim || sector_of.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "environment dimension {dim}, initial state {}, sector labels {}",
                init_state.len(),
                sector_of.len()
            )));
        }
        let mut b_norms = Vec::with_capacity(b_ops.len());
        for b in &b_ops {
            if b.nrows() != dim || b.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "B operator is {}x{}, environment dimension {dim}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            let dev = b.hermitian_deviation();
            if dev > 1e-12 * b.norm_1().max(1.0) {
                return Err(Error::NotHermitian(dev));
            }
            b_norms.push(sparse_op_norm(b));
        }
        let norm = norm_sqr(&init_state).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalised(norm));
        }
        let scale = h_env_diag.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        for (i, a) in init_state.iter().enumerate() {
            if a.norm() > 1e-12 && (sector_of[i].abs() > sector_tol(scale) || h_env_diag[i].abs() > sector_tol(scale)) {
                return Err(Error::Internal(format!(
                    "initial state has weight on basis state {i} with sector {} and energy {}",
                    sector_of[i], h_env_diag[i]
                )));
            }
        }
        Ok(EnvEncoding {
            kind,
            h_env_diag,
            b_ops,
            b_norms,
            init_state,
            sector_of,
            projector: None,
            ring: None,
        })
    }

    pub(crate) fn with_ring(mut self, ring: RingLayout) -> Self {
        self.ring = Some(ring);
        self
    }

    /// Attaches the dissipation projector used by conditional protocols.
    pub fn with_projector(mut self, projector: Projector) -> Result<Self> {
        if let Projector::Diagonal(mask) = &projector {
            if mask.len() != self.dim() {
                return Err(Error::DimensionMismatch("projector mask length".into()));
            }
        }
        if projector.weight(&self.init_state) > 1e-20 {
            return Err(Error::param(
                "projector",
                "the initial environment state must lie outside the dissipation range",
            ));
        }
        self.projector = Some(projector);
        Ok(self)
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.h_env_diag.len()
    }

    pub fn n_beta(&self) -> usize {
        self.b_ops.len()
    }

    pub fn h_env_diag(&self) -> &[f64] {
        &self.h_env_diag
    }

    pub fn h_env_norm(&self) -> f64 {
        self.h_env_diag.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn h_env_sparse(&self) -> SparseMatrix {
        let d: Vec<C64> = self.h_env_diag.iter().map(|&e| C64::new(e, 0.0)).collect();
        SparseMatrix::from_diagonal(&d)
    }

    pub fn b_op(&self, beta: usize) -> &SparseMatrix {
        &self.b_ops[beta]
    }

    pub fn b_ops(&self) -> &[SparseMatrix] {
        &self.b_ops
    }

    /// Operator norm `‖B̃_β‖`.
    pub fn b_norm(&self, beta: usize) -> f64 {
        self.b_norms[beta]
    }

    pub fn init_state(&self) -> &[C64] {
        &self.init_state
    }

    pub fn sector_of(&self) -> &[f64] {
        &self.sector_of
    }

    pub fn projector(&self) -> Option<&Projector> {
        self.projector.as_ref()
    }

    pub fn ring(&self) -> Option<&RingLayout> {
        self.ring.as_ref()
    }

    /// `B̃_β(t) = e^{iH̃t} B̃_β e^{-iH̃t}` applied to `v`.
    pub fn apply_b_at(&self, beta: usize, t: f64, v: &[C64]) -> Vec<C64> {
        let mut w: Vec<C64> = v
            .iter()
            .zip(&self.h_env_diag)
            .map(|(&a, &e)| a * C64::from_polar(1.0, -e * t))
            .collect();
        let mut out = vec![ZERO; v.len()];
        self.b_ops[beta].matvec(&w, &mut out);
        for (o, &e) in out.iter_mut().zip(&self.h_env_diag) {
            *o *= C64::from_polar(1.0, e * t);
        }
        std::mem::swap(&mut w, &mut out);
        w
    }
}
