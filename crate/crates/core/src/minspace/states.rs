use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, CMatrix, C64, ZERO};

use super::{frequency_operators, purify, FrequencyOperators, FullEnvironment};

/// Norm below which an enumerated state counts as zero.
const ZERO_NORM: f64 = 1e-12;

/// `b_{β_{m-1}}(ω_{m-1})⋯b_{β₀}(ω₀)|ψ⟩`.
#[derive(Debug, Clone)]
pub struct RelevantState {
    pub vector: Vec<C64>,
    /// Total frequency `Ω = Σ ω_i`.
    pub sector: f64,
    /// `(β_i, ω index)` in the order the operators act.
    pub word: Vec<(usize, usize)>,
    pub zero_norm: bool,
}

/// The relevant states `V_n`, `|ψ⟩` first.
#[derive(Debug, Clone)]
pub struct RelevantStateSet {
    order: u32,
    states: Vec<RelevantState>,
    anc_dim: usize,
    ops: Option<FrequencyOperators>,
}

impl RelevantStateSet {
    /// Wraps explicit vectors without operator information; the first
    /// vector plays the role of `|ψ⟩`.
    pub fn from_vectors(vectors: Vec<Vec<C64>>, sectors: Vec<f64>) -> Result<Self> {
        if vectors.is_empty() || vectors.len() != sectors.len() {
            return Err(Error::DimensionMismatch("need one sector label per vector, at least one vector".into()));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("vectors differ in length".into()));
        }
        let states = vectors
            .into_iter()
            .zip(sectors)
            .map(|(vector, sector)| RelevantState {
                zero_norm: norm_sqr(&vector).sqrt() < ZERO_NORM,
                vector,
                sector,
                word: Vec::new(),
            })
            .collect();
        Ok(RelevantStateSet {
            order: 0,
            states,
            anc_dim: 1,
            ops: None,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[RelevantState] {
        &self.states
    }

    pub fn vector_dim(&self) -> usize {
        self.states[0].vector.len()
    }

    pub fn operators(&self) -> Option<&FrequencyOperators> {
        self.ops.as_ref()
    }

    /// `⟨φ_a|φ_b⟩` over all states.
    pub fn gram_matrix(&self) -> CMatrix {
        let n = self.len();
        CMatrix::from_fn(n, n, |a, b| inner(&self.states[a].vector, &self.states[b].vector))
    }

    /// `(B_β(ω) ⊗ 1_a) v` for the operator `ops[k][β]`.
    pub(crate) fn apply_b(&self, k: usize, beta: usize, v: &[C64]) -> Vec<C64> {
        let ops = self.ops.as_ref().expect("operator-free state set");
        apply_kron(&ops.ops[k][beta], self.anc_dim, v)
    }
}

fn apply_kron(b: &CMatrix, r: usize, v: &[C64]) -> Vec<C64> {
    let d = b.nrows();
    let mut out = vec![ZERO; v.len()];
    for i in 0..d {
        for j in 0..d {
            let bij = b[(i, j)];
            if bij == ZERO {
                continue;
            }
            for a in 0..r {
                out[i * r + a] += bij * v[j * r + a];
            }
        }
    }
    out
}

/// All words of length `m ≤ ⌊n/2⌋` applied to the purification, ordered by
/// `(m, β-word, ω-word)`.
pub fn enumerate_relevant_states(env: &FullEnvironment, n: u32) -> Result<RelevantStateSet> {
    if n == 0 {
        return Err(Error::param("n", "order must be at least 1"));
    }
    let p = purify(env);
    let ops = frequency_operators(env);
    let n_omega = ops.n_omega();
    let n_beta = env.n_beta();
    let mut states = vec![RelevantState {
        vector: p.psi.clone(),
        sector: 0.0,
        word: Vec::new(),
        zero_norm: false,
    }];
    // previous level, indexed by (β-word, ω-word) in mixed radix
    let mut level: Vec<(Vec<usize>, Vec<usize>, Vec<C64>)> = vec![(Vec::new(), Vec::new(), p.psi.clone())];
    for _m in 1..=n / 2 {
        let mut next = Vec::with_capacity(level.len() * n_omega * n_beta);
        for (betas, ks, v) in &level {
            for beta in 0..n_beta {
                for k in 0..n_omega {
                    let mut b = betas.clone();
                    b.push(beta);
                    let mut kk = ks.clone();
                    kk.push(k);
                    next.push((b, kk, apply_kron(&ops.ops[k][beta], p.anc_dim, v)));
                }
            }
        }
        next.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        for (betas, ks, v) in &next {
            states.push(RelevantState {
                zero_norm: norm_sqr(v).sqrt() < ZERO_NORM,
                sector: ks.iter().map(|&k| ops.omegas[k]).sum(),
                word: betas.iter().cloned().zip(ks.iter().cloned()).collect(),
                vector: v.clone(),
            });
        }
        level = next;
    }
    Ok(RelevantStateSet {
        order: n,
        states,
        anc_dim: p.anc_dim,
        ops: Some(ops),
    })
}
