//! Two-excitation example environment for fourth-order simulation:
//! vacuum, one-excitation levels `|ω⟩` and ordered pairs `|ω₁,ω₂⟩`.

use std::f64::consts::PI;

use crate::bath::FrequencyGrid;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, SparseMatrix, C64, ONE, ZERO};
use crate::minspace::{multi_time_correlation, Factor};

use super::{EncodingKind, EnvEncoding, Projector};

/// Coupling tables in the frequency basis. `g1[β][j]` multiplies
/// `|v⟩⟨ω_j|` and `g2[β][(j·N + j1)·N + j2]` multiplies `|ω_j⟩⟨ω_j1,ω_j2|`.
#[derive(Debug, Clone)]
pub struct FourthOrderTables {
    pub grid: FrequencyGrid,
    pub g1: Vec<Vec<C64>>,
    pub g2: Vec<Vec<C64>>,
}

/// Dense 1-D ring transform `F[x][j] = N^{-1/2} exp(sign·2πi k_j x/N)`.
fn ring_matrix(n: usize, sign: f64) -> CMatrix {
    let h = (n as i64 - 1) / 2;
    CMatrix::from_fn(n, n, |x, j| {
        let kx = ((j as i64 - h) * x as i64).rem_euclid(n as i64) as f64;
        C64::from_polar(1.0 / (n as f64).sqrt(), sign * 2.0 * PI * kx / n as f64)
    })
}

/// Applies `m` along one axis of an `n×n×n` array stored row-major.
fn along_axis(data: &[C64], n: usize, axis: usize, m: &CMatrix) -> Vec<C64> {
    let stride = [n * n, n, 1][axis];
    let mut out = vec![ZERO; data.len()];
    for base in 0..data.len() {
        if !(base / stride).is_multiple_of(n) {
            continue;
        }
        for x in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += m[(x, j)] * data[base + j * stride];
            }
            out[base + x * stride] = acc;
        }
    }
    out
}

impl FourthOrderTables {
    pub fn new(grid: FrequencyGrid, g1: Vec<Vec<C64>>, g2: Vec<Vec<C64>>) -> Result<Self> {
        let n = grid.len();
        if g1.len() != g2.len() || g1.is_empty() {
            return Err(Error::DimensionMismatch("g1 and g2 need the same, nonzero, number of β".into()));
        }
        if g1.iter().any(|g| g.len() != n) || g2.iter().any(|g| g.len() != n * n * n) {
            return Err(Error::DimensionMismatch(format!(
                "tables must have {n} and {} entries per β",
                n * n * n
            )));
        }
        if g1.iter().chain(&g2).flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::param("g", "coupling tables must be finite"));
        }
        Ok(FourthOrderTables { grid, g1, g2 })
    }

    /// Builds the frequency tables from position tables `g_{β,x}` and
    /// `g_{β,x,x₁,x₂}` (same index layout).
    pub fn from_position(grid: FrequencyGrid, g1x: Vec<Vec<C64>>, g2x: Vec<Vec<C64>>) -> Result<Self> {
        let n = grid.len();
        let minus = ring_matrix(n, -1.0).adjoint();
        let plus = ring_matrix(n, 1.0).adjoint();
        let g1 = g1x
            .iter()
            .map(|g| (&minus * crate::linalg::CVector::from_column_slice(g)).as_slice().to_vec())
            .collect();
        let g2 = g2x
            .iter()
            .map(|g| {
                let a = along_axis(g, n, 0, &plus);
                let a = along_axis(&a, n, 1, &minus);
                along_axis(&a, n, 2, &minus)
            })
            .collect();
        Self::new(grid, g1, g2)
    }

    /// Position tables `(g_{β,x}, g_{β,x,x₁,x₂})`.
    pub fn to_position(&self) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let n = self.grid.len();
        let minus = ring_matrix(n, -1.0);
        let plus = ring_matrix(n, 1.0);
        let g1x = self
            .g1
            .iter()
            .map(|g| (&minus * crate::linalg::CVector::from_column_slice(g)).as_slice().to_vec())
            .collect();
        let g2x = self
            .g2
            .iter()
            .map(|g| {
                let a = along_axis(g, n, 0, &plus);
                let a = along_axis(&a, n, 1, &minus);
                along_axis(&a, n, 2, &minus)
            })
            .collect();
        (g1x, g2x)
    }

    pub fn n_beta(&self) -> usize {
        self.g1.len()
    }

    fn idx2(&self, j: usize, j1: usize, j2: usize) -> usize {
        let n = self.grid.len();
        (j * n + j1) * n + j2
    }

    /// `⟨v|B̃_β(s) B̃_β₁(s₁)|v⟩` from the closed-form sum.
    pub fn two_time(&self, beta: usize, beta1: usize, s: f64, s1: f64) -> C64 {
        let grid = &self.grid;
        (0..grid.len())
            .map(|j| C64::from_polar(1.0, -grid.frequency(j) * (s - s1)) * self.g1[beta][j] * self.g1[beta1][j].conj())
            .sum()
    }

    /// Four-time vacuum correlation from the closed-form sum: the product
    /// of two-time terms plus the connected two-excitation term.
    pub fn four_time(&self, betas: [usize; 4], times: [f64; 4]) -> C64 {
        let [b, b1, b2, b3] = betas;
        let [s, s1, s2, s3] = times;
        let grid = &self.grid;
        let n = grid.len();
        let mut connected = ZERO;
        for jp in 0..n {
            let wp = grid.frequency(jp);
            let left = C64::from_polar(1.0, -wp * (s - s1)) * self.g1[b][jp];
            for j in 0..n {
                let w = grid.frequency(j);
                let right = C64::from_polar(1.0, -w * (s2 - s3)) * self.g1[b3][j].conj();
                for j1 in 0..n {
                    for j2 in 0..n {
                        let w12 = grid.frequency(j1) + grid.frequency(j2);
                        connected += left
                            * right
                            * C64::from_polar(1.0, -w12 * (s1 - s2))
                            * self.g2[b1][self.idx2(jp, j1, j2)]
                            * self.g2[b2][self.idx2(j, j1, j2)].conj();
                    }
                }
            }
        }
        self.two_time(b, b1, s, s1) * self.two_time(b2, b3, s2, s3) + connected
    }
}

/// Builds `H̃_E = Σ ω|ω⟩⟨ω| + Σ (ω₁+ω₂)|ω₁,ω₂⟩⟨ω₁,ω₂|` and
/// `B̃_β = Σ g_{β,ω}|v⟩⟨ω| + Σ g_{β,ω,ω₁,ω₂}|ω⟩⟨ω₁,ω₂| + h.c.`.
pub fn fourth_order_example_encoding(tables: &FourthOrderTables) -> Result<EnvEncoding> {
    let grid = &tables.grid;
    let n = grid.len();
    let dim = 1 + n + n * n;
    let mut h = vec![0.0; dim];
    for j in 0..n {
        h[1 + j] = grid.frequency(j);
        for j2 in 0..n {
            h[1 + n + j * n + j2] = grid.frequency(j) + grid.frequency(j2);
        }
    }
    let b_ops = (0..tables.n_beta())
        .map(|beta| {
            let mut trip = Vec::new();
            for j in 0..n {
                let g = tables.g1[beta][j];
                trip.push((0, 1 + j, g));
                trip.push((1 + j, 0, g.conj()));
                for j1 in 0..n {
                    for j2 in 0..n {
                        let g = tables.g2[beta][tables.idx2(j, j1, j2)];
                        let col = 1 + n + j1 * n + j2;
                        trip.push((1 + j, col, g));
                        trip.push((col, 1 + j, g.conj()));
                    }
                }
            }
            SparseMatrix::from_triplets(dim, dim, trip)
        })
        .collect();
    let mut init = vec![ZERO; dim];
    init[0] = ONE;
    EnvEncoding::new(EncodingKind::FourthOrder, h.clone(), b_ops, init, h)
}

/// `Π = Σ_{x>x_E}|x⟩⟨x| + Σ_{x₁} Σ_{x₂>x_E}|x₁,x₂⟩⟨x₁,x₂|` for the example.
pub fn fourth_order_projector(grid: &FrequencyGrid, x_e: usize) -> Projector {
    let n = grid.len();
    let dim = 1 + n + n * n;
    let f = ring_matrix(n, -1.0).transpose(); // columns: |x⟩ in the ω basis
    let mut p = CMatrix::zeros(dim, dim);
    for x in (x_e + 1)..n {
        let col = f.column(x);
        for a in 0..n {
            for b in 0..n {
                p[(1 + a, 1 + b)] += col[a] * col[b].conj();
            }
        }
    }
    for x2 in (x_e + 1)..n {
        let c2 = f.column(x2);
        let q2 = c2 * c2.adjoint();
        // Σ_{x₁}|x₁⟩⟨x₁| is the identity on the first slot
        for a1 in 0..n {
            for a in 0..n {
                for b in 0..n {
                    p[(1 + n + a1 * n + a, 1 + n + a1 * n + b)] += q2[(a, b)];
                }
            }
        }
    }
    Projector::Dense(p)
}

/// Outcome of the locality check on a fourth-order example.
#[derive(Debug, Clone)]
pub struct DeltaReport {
    /// `g_{β,x} = 0` for `x > x_E`.
    pub one_excitation_local: bool,
    /// `g_{β,x,x₁,x₂} = 0` for `x₂ > x_E`.
    pub second_slot_local: bool,
    /// `g_{β,x,x₁,x₂} = δ_{x,x₁} g_{β,x₂}` whenever `x, x₁ > x_E`.
    pub spectator_factorises: bool,
    /// Largest `|Δ|` for each of the four independent orderings.
    pub per_ordering: [f64; 4],
    /// Largest `|Δ|` over all sixteen `ν` patterns.
    pub all_patterns: f64,
    pub gaps_checked: usize,
}

impl DeltaReport {
    pub fn conditions_hold(&self) -> bool {
        self.one_excitation_local && self.second_slot_local && self.spectator_factorises
    }

    pub fn max_delta(&self) -> f64 {
        self.per_ordering.iter().cloned().fold(0.0, f64::max)
    }
}

/// `ν` patterns on `(t, t₁, t₂, t₃)` for the orderings
/// `B(t)B(t₁)B(t₂)B(t₃)`, `B(t₁)B(t)B(t₂)B(t₃)`, `B(t₂)B(t)B(t₁)B(t₃)`
/// and `B(t₂)B(t₁)B(t)B(t₃)` inside the vacuum expectation.
const ORDERINGS: [[u8; 4]; 4] = [[1, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 0, 0, 1]];

/// Checks the locality conditions on the position tables and evaluates the
/// reinitialisation error `Δ` at every gap `t_i - t_{i+1} > x_E/c` of the
/// four-time words on the grid `j/c`, for time spans up to `max_span` sites.
pub fn fourth_order_delta_check(tables: &FourthOrderTables, x_e: usize, max_span: usize) -> Result<DeltaReport> {
    let n = tables.grid.len();
    if x_e >= n {
        return Err(Error::param("x_e", format!("must be below N_ω = {n}")));
    }
    let (g1x, g2x) = tables.to_position();
    let tol = 1e-12 * g1x.iter().chain(&g2x).flatten().fold(1.0f64, |m, z| m.max(z.norm()));
    let idx = |x: usize, x1: usize, x2: usize| (x * n + x1) * n + x2;
    let mut one_local = true;
    let mut second_local = true;
    let mut spectator = true;
    for beta in 0..tables.n_beta() {
        for x in 0..n {
            if x > x_e && g1x[beta][x].norm() > tol {
                one_local = false;
            }
            for x1 in 0..n {
                for x2 in 0..n {
                    let g = g2x[beta][idx(x, x1, x2)];
                    if x2 > x_e && g.norm() > tol {
                        second_local = false;
                    }
                    if x > x_e && x1 > x_e {
                        let want = if x == x1 { g1x[beta][x2] } else { ZERO };
                        if (g - want).norm() > tol {
                            spectator = false;
                        }
                    }
                }
            }
        }
    }

    let enc = fourth_order_example_encoding(tables)?;
    let c = tables.grid.speed();
    let mut per_ordering = [0.0f64; 4];
    let mut all_patterns = 0.0f64;
    let mut gaps_checked = 0;
    let nb = tables.n_beta();
    for d1 in 0..=max_span {
        for d2 in 0..=(max_span - d1) {
            for d3 in 0..=(max_span - d1 - d2) {
                let gaps = [d1, d2, d3];
                if gaps.iter().all(|&d| d <= x_e) {
                    continue;
                }
                let t3 = 0.0;
                let t2 = d3 as f64 / c;
                let t1 = (d3 + d2) as f64 / c;
                let t = (d3 + d2 + d1) as f64 / c;
                let times = [t, t1, t2, t3];
                for code in 0..nb.pow(4) {
                    let betas = [code % nb, (code / nb) % nb, (code / nb / nb) % nb, code / nb / nb / nb];
                    for pattern in 0..16u8 {
                        let nu = [pattern & 1, (pattern >> 1) & 1, (pattern >> 2) & 1, (pattern >> 3) & 1];
                        let word: Vec<Factor> = (0..4)
                            .map(|i| Factor {
                                beta: betas[i],
                                time: times[i],
                                nu: nu[i],
                            })
                            .collect();
                        let full = multi_time_correlation(&enc, &word)?;
                        for (gap, &d) in gaps.iter().enumerate() {
                            if d <= x_e {
                                continue;
                            }
                            let split = gap + 1;
                            let reset = multi_time_correlation(&enc, &word[..split])?
                                * multi_time_correlation(&enc, &word[split..])?;
                            let delta = (full - reset).norm();
                            gaps_checked += 1;
                            all_patterns = all_patterns.max(delta);
                            if let Some(o) = ORDERINGS.iter().position(|p| *p == nu) {
                                per_ordering[o] = per_ordering[o].max(delta);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(DeltaReport {
        one_excitation_local: one_local,
        second_slot_local: second_local,
        spectator_factorises: spectator,
        per_ordering,
        all_patterns,
        gaps_checked,
    })
}
