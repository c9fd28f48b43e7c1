use crate::encoding::{sector_tol, EncodingKind, EnvEncoding};
use crate::error::{Error, Result};
use crate::linalg::{eigh, inner, norm_sqr, CMatrix, SparseMatrix, C64, ONE, ZERO};

use super::RelevantStateSet;

/// Default linear-dependence tolerance, relative to the largest Gram
/// eigenvalue.
pub const DEFAULT_DEP_TOL: f64 = 1e-10;

/// Orthonormalised span of the relevant states with the interaction
/// operators represented on it.
#[derive(Debug, Clone)]
pub struct MinimalSpace {
    pub d_e: usize,
    /// `e[(j, φ)]`: basis vector `j` is `Σ_φ e_{j,φ} |φ⟩`.
    pub e_matrix: CMatrix,
    /// Sector `Ω` of each basis vector.
    pub sector_labels: Vec<f64>,
    /// State index each basis vector was built from.
    pub accepted: Vec<usize>,
    /// Frequencies of the `b̃` blocks, empty without operator information.
    pub omegas: Vec<f64>,
    /// `b_tilde[k][β] = b̃_β(omegas[k])`.
    pub b_tilde: Vec<Vec<CMatrix>>,
    pub psi_tilde: Vec<C64>,
    pub n_beta: usize,
}

/// Gram-form Gram-Schmidt in state order, sector by sector, with one
/// re-orthogonalisation pass.
pub fn gram_schmidt(states: &RelevantStateSet, dep_tol: f64) -> Result<MinimalSpace> {
    if !(dep_tol >= 0.0) {
        return Err(Error::param("dep_tol", "must be non-negative"));
    }
    let list = states.states();
    let n = list.len();
    let psi_norm = norm_sqr(&list[0].vector).sqrt();
    if (psi_norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalised(psi_norm));
    }
    // largest Gram eigenvalue = largest eigenvalue of Σ|φ⟩⟨φ|
    let dim = states.vector_dim();
    let mut frame = CMatrix::zeros(dim, dim);
    for s in list {
        let v = crate::linalg::CVector::from_column_slice(&s.vector);
        frame += &v * v.adjoint();
    }
    let lambda_max = eigh(&frame).0.iter().cloned().fold(0.0, f64::max);
    let scale = list.iter().fold(0.0f64, |m, s| m.max(s.sector.abs()));
    let tol = sector_tol(scale);

    let mut accepted: Vec<usize> = Vec::new();
    // coefficient rows, indexed like `accepted`, over all states
    let mut rows: Vec<Vec<C64>> = Vec::new();
    // g[a][i] = ⟨φ_accepted[a]|φ_i⟩ for accepted a, filled on demand
    let mut gram_cols: Vec<Vec<C64>> = Vec::new();

    for i in 0..n {
        let s = &list[i];
        if s.zero_norm {
            continue;
        }
        let g_ii = norm_sqr(&s.vector);
        let same: Vec<usize> = (0..accepted.len())
            .filter(|&j| (list[accepted[j]].sector - s.sector).abs() <= tol)
            .collect();
        // ⟨φ_a|φ_i⟩ for every accepted a in the sector
        let overlaps: Vec<(usize, C64)> = same
            .iter()
            .map(|&j| {
                let a = accepted[j];
                (j, inner(&list[a].vector, &s.vector))
            })
            .collect();
        let mut c = vec![ZERO; n];
        c[i] = ONE;
        let mut residual = g_ii;
        for pass in 0..2 {
            let mut proj = Vec::with_capacity(same.len());
            for &j in &same {
                // o_j = ⟨e_j|current⟩ = Σ_a e*_{j,a} ⟨φ_a|current⟩
                let mut o = ZERO;
                for (k, &a) in accepted.iter().enumerate() {
                    let e = rows[j][a];
                    if e == ZERO {
                        continue;
                    }
                    let g_a_cur = if pass == 0 {
                        overlaps.iter().find(|(jj, _)| *jj == k).map(|p| p.1).unwrap_or(ZERO)
                    } else {
                        gram_row_dot(&gram_cols[k], &c)
                    };
                    o += e.conj() * g_a_cur;
                }
                proj.push(o);
            }
            if pass == 0 {
                residual = g_ii - proj.iter().map(|o| o.norm_sqr()).sum::<f64>();
                if residual < -1e-10 * g_ii.max(1.0) {
                    return Err(Error::InvalidGram { index: i, residual });
                }
                if residual <= dep_tol * lambda_max {
                    break;
                }
            }
            for (&j, o) in same.iter().zip(&proj) {
                for (cc, e) in c.iter_mut().zip(&rows[j]) {
                    *cc -= o * e;
                }
            }
        }
        if residual <= dep_tol * lambda_max {
            continue;
        }
        // the new basis vector needs its own Gram column for later passes
        let col: Vec<C64> = (0..n).map(|b| inner(&s.vector, &list[b].vector)).collect();
        let u = combine(states, &c);
        let norm = norm_sqr(&u).sqrt();
        c.iter_mut().for_each(|x| *x /= norm);
        accepted.push(i);
        rows.push(c);
        gram_cols.push(col);
    }

    let d_e = accepted.len();
    let e_matrix = CMatrix::from_fn(d_e, n, |j, a| rows[j][a]);
    let sector_labels: Vec<f64> = accepted.iter().map(|&a| list[a].sector).collect();
    let basis: Vec<Vec<C64>> = rows.iter().map(|r| combine(states, r)).collect();
    let mut psi_tilde = vec![ZERO; d_e];
    psi_tilde[0] = ONE;

    let (omegas, b_tilde, n_beta) = match states.operators() {
        None => (Vec::new(), Vec::new(), 0),
        Some(ops) => {
            let n_beta = ops.ops.first().map(|v| v.len()).unwrap_or(0);
            let mut b_tilde = Vec::with_capacity(ops.n_omega());
            for (k, &w) in ops.omegas.iter().enumerate() {
                let mut per_beta = Vec::with_capacity(n_beta);
                for beta in 0..n_beta {
                    let images: Vec<Vec<C64>> = basis.iter().map(|u| states.apply_b(k, beta, u)).collect();
                    let m = CMatrix::from_fn(d_e, d_e, |r, col| {
                        if (sector_labels[r] - sector_labels[col] - w).abs() > tol {
                            ZERO
                        } else {
                            inner(&basis[r], &images[col])
                        }
                    });
                    per_beta.push(m);
                }
                b_tilde.push(per_beta);
            }
            // enforce b̃(-ω) = b̃(ω)† exactly
            let nw = ops.n_omega();
            for k in 0..nw / 2 + 1 {
                let neg = ops.index_of_negative(k);
                for beta in 0..n_beta {
                    if neg == k {
                        let z = &b_tilde[k][beta];
                        b_tilde[k][beta] = (z + z.adjoint()) * C64::new(0.5, 0.0);
                    } else {
                        let avg = (&b_tilde[k][beta] + b_tilde[neg][beta].adjoint()) * C64::new(0.5, 0.0);
                        b_tilde[neg][beta] = avg.adjoint();
                        b_tilde[k][beta] = avg;
                    }
                }
            }
            (ops.omegas.clone(), b_tilde, n_beta)
        }
    };

    Ok(MinimalSpace {
        d_e,
        e_matrix,
        sector_labels,
        accepted,
        omegas,
        b_tilde,
        psi_tilde,
        n_beta,
    })
}

fn gram_row_dot(col: &[C64], c: &[C64]) -> C64 {
    col.iter().zip(c).map(|(g, x)| g * x).sum()
}

fn combine(states: &RelevantStateSet, coef: &[C64]) -> Vec<C64> {
    let mut u = vec![ZERO; states.vector_dim()];
    for (s, &a) in states.states().iter().zip(coef) {
        if a == ZERO {
            continue;
        }
        for (x, y) in u.iter_mut().zip(&s.vector) {
            *x += a * y;
        }
    }
    u
}

/// `H̃_E = -Σ_Ω Ω Π̃_Ω`, `B̃_β = Σ_ω b̃_β(ω)`, `|ψ̃⟩ = e₀`.
pub fn minimal_encoding(space: &MinimalSpace) -> Result<EnvEncoding> {
    if space.b_tilde.is_empty() {
        return Err(Error::param("space", "no interaction operators attached"));
    }
    let d = space.d_e;
    let h: Vec<f64> = space.sector_labels.iter().map(|&w| if w == 0.0 { 0.0 } else { -w }).collect();
    let b_ops = (0..space.n_beta)
        .map(|beta| {
            let mut m = CMatrix::zeros(d, d);
            for per in &space.b_tilde {
                m += &per[beta];
            }
            let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            SparseMatrix::from_dense(&m, 0.0)
        })
        .collect();
    if space.sector_labels[0].abs() > 0.0 {
        return Err(Error::Internal("ψ̃ is not in sector 0".into()));
    }
    EnvEncoding::new(EncodingKind::Minimal, h, b_ops, space.psi_tilde.clone(), space.sector_labels.clone())
}
