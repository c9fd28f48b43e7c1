//! General n-th order construction: purify the environment state, span the
//! states reachable by up to ⌊n/2⌋ frequency-resolved interaction
//! operators, orthonormalise them and represent the operators on the span.

mod correlation;
mod gram;
mod states;

pub use correlation::{multi_time_correlation, CorrelationModel, Factor};
pub use gram::{gram_schmidt, minimal_encoding, MinimalSpace, DEFAULT_DEP_TOL};
pub use states::{enumerate_relevant_states, RelevantState, RelevantStateSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_deviation, op_norm, CMatrix, CVector, C64, ZERO};

/// A desk-scale environment `(H_E, ρ_E, {B_β})` with stationary `ρ_E`.
#[derive(Debug, Clone)]
pub struct FullEnvironment {
    h_env: CMatrix,
    rho_env: CMatrix,
    b_ops: Vec<CMatrix>,
    // joint eigenbasis of H_E and ρ_E
    energies: Vec<f64>,
    weights: Vec<f64>,
    basis: CMatrix,
}

fn energy_tol(h: &CMatrix) -> f64 {
    1e-9 * op_norm(h).max(1.0)
}

impl FullEnvironment {
    /// Validates the inputs and centres every `B_β` so that
    /// `Tr(B_β ρ_E) = 0`.
    pub fn new(h_env: CMatrix, rho_env: CMatrix, b_ops: Vec<CMatrix>) -> Result<Self> {
        let dim = h_env.nrows();
        if dim == 0 || h_env.ncols() != dim || rho_env.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch("H_E and ρ_E must be square and of equal size".into()));
        }
        for m in std::iter::once(&h_env).chain(&b_ops) {
            if m.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch("B_β must match H_E".into()));
            }
            let dev = hermitian_deviation(m);
            if dev > 1e-12 * m.norm().max(1.0) {
                return Err(Error::NotHermitian(dev));
            }
        }
        let dev = hermitian_deviation(&rho_env);
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        let tr = rho_env.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::param("rho_env", format!("trace must be 1, got {tr}")));
        }
        let comm = (&h_env * &rho_env - &rho_env * &h_env).norm();
        if comm > 1e-10 {
            return Err(Error::param("rho_env", format!("not stationary: ‖[H_E, ρ_E]‖ = {comm:e}")));
        }

        // diagonalise H_E, then ρ_E inside each degenerate eigenspace
        let (evals, evecs) = eigh(&h_env);
        let tol = energy_tol(&h_env);
        let mut energies = Vec::with_capacity(dim);
        let mut weights = Vec::with_capacity(dim);
        let mut basis = CMatrix::zeros(dim, dim);
        let mut start = 0;
        while start < dim {
            let mut end = start + 1;
            while end < dim && evals[end] - evals[start] <= tol {
                end += 1;
            }
            let v = evecs.columns(start, end - start).into_owned();
            let sub = v.adjoint() * &rho_env * &v;
            let (p, u) = eigh(&sub);
            let rotated = &v * u;
            let e_mean = evals[start..end].iter().sum::<f64>() / (end - start) as f64;
            for k in 0..end - start {
                basis.set_column(start + k, &rotated.column(k));
                energies.push(e_mean);
                weights.push(p[k]);
            }
            start = end;
        }
        let pmin = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        if pmin < -1e-12 {
            return Err(Error::NotPositiveSemidefinite {
                omega: 0.0,
                eigenvalue: pmin,
            });
        }
        let identity = CMatrix::identity(dim, dim);
        let b_ops = b_ops
            .into_iter()
            .map(|b| {
                let mean = (&b * &rho_env).trace().re;
                let centred = b - &identity * C64::new(mean, 0.0);
                (&centred + centred.adjoint()) * C64::new(0.5, 0.0)
            })
            .collect();
        Ok(FullEnvironment {
            h_env,
            rho_env,
            b_ops,
            energies,
            weights,
            basis,
        })
    }

    /// Random environment for tests and checks. With `degenerate` the
    /// energies are drawn from `{0, 1, 2}`, which produces repeated
    /// Bohr frequencies.
    pub fn random(dim: usize, n_beta: usize, seed: u64, degenerate: bool) -> Result<Self> {
        if dim == 0 || n_beta == 0 {
            return Err(Error::param("dim", "dimension and N_β must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = || C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let raw = CMatrix::from_fn(dim, dim, |_, _| gauss());
        let q = raw.qr().q();
        let energies: Vec<f64> = (0..dim)
            .map(|_| {
                if degenerate {
                    rng.random_range(0..3) as f64
                } else {
                    rng.random::<f64>() * 2.0 - 1.0
                }
            })
            .collect();
        let rank = rng.random_range(1..=dim);
        let mut p: Vec<f64> = (0..dim).map(|i| if i < rank { rng.random::<f64>() + 0.05 } else { 0.0 }).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let diag = |d: &[f64]| CMatrix::from_diagonal(&CVector::from_iterator(dim, d.iter().map(|&x| C64::new(x, 0.0))));
        let h = &q * diag(&energies) * q.adjoint();
        let rho = &q * diag(&p) * q.adjoint();
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let b_ops = (0..n_beta)
            .map(|_| {
                let m = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
                (&m + m.adjoint()) * C64::new(0.5, 0.0)
            })
            .collect();
        Self::new(h, rho, b_ops)
    }

    pub fn dim(&self) -> usize {
        self.h_env.nrows()
    }

    pub fn n_beta(&self) -> usize {
        self.b_ops.len()
    }

    pub fn h_env(&self) -> &CMatrix {
        &self.h_env
    }

    pub fn rho_env(&self) -> &CMatrix {
        &self.rho_env
    }

    pub fn b_op(&self, beta: usize) -> &CMatrix {
        &self.b_ops[beta]
    }

    /// `(ε, p, |Ψ⟩)` for the joint eigenbasis.
    pub(crate) fn eigen_triples(&self) -> impl Iterator<Item = (f64, f64, CVector)> + '_ {
        (0..self.dim()).map(|k| (self.energies[k], self.weights[k], self.basis.column(k).into_owned()))
    }
}

/// `|ψ⟩ = Σ_ε √p_ε |Ψ_ε⟩ ⊗ |Φ_ε⟩`, stored with the environment index
/// major: component `(i, a)` at `i·anc_dim + a`.
#[derive(Debug, Clone)]
pub struct Purification {
    pub env_dim: usize,
    pub anc_dim: usize,
    pub psi: Vec<C64>,
    /// Energy `ε` attached to each ancilla state.
    pub anc_energies: Vec<f64>,
}

impl Purification {
    /// `Tr_a |ψ⟩⟨ψ|`.
    pub fn reduced(&self) -> CMatrix {
        let (d, r) = (self.env_dim, self.anc_dim);
        CMatrix::from_fn(d, d, |i, j| (0..r).map(|a| self.psi[i * r + a] * self.psi[j * r + a].conj()).sum())
    }
}

pub fn purify(env: &FullEnvironment) -> Purification {
    let rank_tol = 1e-12;
    let kept: Vec<(f64, f64, CVector)> = env.eigen_triples().filter(|(_, p, _)| *p > rank_tol).collect();
    let d = env.dim();
    let r = kept.len();
    let mut psi = vec![ZERO; d * r];
    for (a, (_, p, v)) in kept.iter().enumerate() {
        let s = p.sqrt();
        for i in 0..d {
            psi[i * r + a] = v[i] * s;
        }
    }
    // renormalise away the dropped weight
    let norm = crate::linalg::norm_sqr(&psi).sqrt();
    psi.iter_mut().for_each(|x| *x /= norm);
    Purification {
        env_dim: d,
        anc_dim: r,
        psi,
        anc_energies: kept.iter().map(|(e, _, _)| *e).collect(),
    }
}

/// `B_β(ω) = Σ_{ε'-ε=ω} Π(ε) B_β Π(ε')` for every Bohr frequency `ω`.
#[derive(Debug, Clone)]
pub struct FrequencyOperators {
    /// Ascending and symmetric about zero.
    pub omegas: Vec<f64>,
    /// `ops[k][β]` is `B_β(omegas[k])`.
    pub ops: Vec<Vec<CMatrix>>,
}

impl FrequencyOperators {
    pub fn n_omega(&self) -> usize {
        self.omegas.len()
    }

    pub fn index_of_negative(&self, k: usize) -> usize {
        self.omegas.len() - 1 - k
    }
}

pub fn frequency_operators(env: &FullEnvironment) -> FrequencyOperators {
    let d = env.dim();
    let tol = energy_tol(&env.h_env);
    // distinct energy levels and their projectors
    let mut levels: Vec<(f64, CMatrix)> = Vec::new();
    for (e, _, v) in env.eigen_triples() {
        let proj = &v * v.adjoint();
        match levels.iter_mut().find(|(l, _)| (l - e).abs() <= tol) {
            Some((_, p)) => *p += proj,
            None => levels.push((e, proj)),
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    // cluster |ε' - ε| so that ±ω come out exactly opposite
    let mut gaps: Vec<f64> = Vec::new();
    for a in &levels {
        for b in &levels {
            let g = b.0 - a.0;
            if g >= 0.0 {
                gaps.push(g);
            }
        }
    }
    gaps.sort_by(|a, b| a.total_cmp(b));
    let mut reps: Vec<f64> = Vec::new();
    for g in gaps {
        match reps.last() {
            Some(&r) if g - r <= tol => {}
            _ => reps.push(if g <= tol { 0.0 } else { g }),
        }
    }
    let positive: Vec<f64> = reps.iter().cloned().filter(|&r| r > 0.0).collect();
    let mut omegas: Vec<f64> = positive.iter().rev().map(|r| -r).collect();
    omegas.push(0.0);
    omegas.extend(positive.iter().cloned());
    let zero_idx = positive.len();
    let nb = env.n_beta();
    let mut ops = vec![vec![CMatrix::zeros(d, d); nb]; omegas.len()];
    for (ea, pa) in &levels {
        for (eb, pb) in &levels {
            let g = eb - ea;
            if g < -tol {
                continue;
            }
            let k = if g.abs() <= tol {
                zero_idx
            } else {
                zero_idx + 1 + positive.iter().position(|&r| (r - g).abs() <= tol).expect("clustered gap")
            };
            for (beta, b) in env.b_ops.iter().enumerate() {
                ops[k][beta] += pa * b * pb;
            }
        }
    }
    for beta in 0..nb {
        let z = &ops[zero_idx][beta];
        ops[zero_idx][beta] = (z + z.adjoint()) * C64::new(0.5, 0.0);
        for j in 0..positive.len() {
            let pos = ops[zero_idx + 1 + j][beta].clone();
            ops[zero_idx - 1 - j][beta] = pos.adjoint();
        }
    }
    FrequencyOperators { omegas, ops }
}

/// `d_{n,max}` and the qubit count `⌈log₂ d_{n,max}⌉`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionBound {
    pub d_max: BigUint,
    pub n_qubits: u64,
}

pub fn dimension_bound(n: u32, n_omega: u64, n_beta: u64) -> Result<DimensionBound> {
    if n == 0 {
        return Err(Error::param("n", "order must be at least 1"));
    }
    if n_omega == 0 || n_beta == 0 {
        return Err(Error::param("n_omega", "N_ω and N_β must be positive"));
    }
    let m = n / 2;
    let base = BigUint::from(n_omega) * BigUint::from(n_beta);
    let one = BigUint::from(1u32);
    let d_max = if base == one {
        BigUint::from(m + 1)
    } else {
        (base.pow(m + 1) - &one) / (base - &one)
    };
    Ok(DimensionBound {
        n_qubits: qubits_for(&d_max),
        d_max,
    })
}

/// Relevant states, Gram-Schmidt and the minimal operators in one call.
pub fn build_minimal_encoding(env: &FullEnvironment, n: u32) -> Result<crate::encoding::EnvEncoding> {
    let space = gram_schmidt(&enumerate_relevant_states(env, n)?, DEFAULT_DEP_TOL)?;
    minimal_encoding(&space)
}

/// Largest `|C_full - C_model|` over every `(β, ν)` pattern of every word
/// length up to `max_len`, each at `time_sets` random non-increasing time
/// tuples drawn from `[-3, 3]`.
pub fn max_word_deviation<M: CorrelationModel + ?Sized>(
    env: &FullEnvironment,
    model: &M,
    max_len: usize,
    time_sets: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = env.n_beta();
    let letters = 2 * nb;
    let mut worst = 0.0f64;
    for m in 1..=max_len {
        let n_patterns = letters.pow(m as u32);
        for _ in 0..time_sets {
            let mut times: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            times.sort_by(|a, b| b.total_cmp(a));
            for pat in 0..n_patterns {
                let mut code = pat;
                let word: Vec<Factor> = times
                    .iter()
                    .map(|&time| {
                        let l = code % letters;
                        code /= letters;
                        Factor { beta: l / 2, time, nu: (l % 2) as u8 }
                    })
                    .collect();
                let a = multi_time_correlation(env, &word)?;
                let b = multi_time_correlation(model, &word)?;
                worst = worst.max((a - b).norm());
            }
        }
    }
    Ok(worst)
}

/// `⌈log₂ d⌉`, zero for `d ≤ 1`.
pub fn qubits_for(d: &BigUint) -> u64 {
    if *d <= BigUint::from(1u32) {
        0
    } else {
        (d - 1u32).bits()
    }
}
