use crate::bath::CouplingTable;
use crate::error::Result;
use crate::linalg::{SparseMatrix, C64, ONE, ZERO};

use super::{EncodingKind, EnvEncoding, RingLayout};

/// How the `(ω, l)` modes are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// One mode per nonzero channel: `d_E = 1 + Σ_ω d_ω`.
    #[default]
    Compact,
    /// Every channel spans the full grid, zero couplings included, so the
    /// modes form rings of `N_ω` sites: `d_E = 1 + L·N_ω`.
    Ring,
}

/// Vacuum plus one level per `(ω, l)`, with
/// `H̃_E = Σ ω |ω,l⟩⟨ω,l|` and `B̃_β = Σ g_{β,l}(ω) |v⟩⟨ω,l| + h.c.`.
pub fn second_order_encoding(table: &CouplingTable, layout: Layout) -> Result<EnvEncoding> {
    let grid = *table.grid();
    let n = grid.len();
    // (grid index, channel) for every mode, in basis order after the vacuum
    let modes: Vec<(usize, usize)> = match layout {
        Layout::Compact => (0..n)
            .flat_map(|j| (0..table.rank(j)).map(move |l| (j, l)))
            .collect(),
        Layout::Ring => (0..table.max_rank().max(1))
            .flat_map(|l| (0..n).map(move |j| (j, l)))
            .collect(),
    };
    let dim = 1 + modes.len();
    let mut h = vec![0.0; dim];
    let mut sectors = vec![0.0; dim];
    for (i, &(j, _)) in modes.iter().enumerate() {
        h[i + 1] = grid.frequency(j);
        sectors[i + 1] = grid.frequency(j);
    }
    let b_ops = (0..table.n_beta())
        .map(|beta| {
            let mut trip = Vec::with_capacity(2 * modes.len());
            for (i, &(j, l)) in modes.iter().enumerate() {
                let g = table.g(beta, l, j);
                if g != ZERO {
                    trip.push((0, i + 1, g));
                    trip.push((i + 1, 0, g.conj()));
                }
            }
            SparseMatrix::from_triplets(dim, dim, trip)
        })
        .collect();
    let mut init = vec![ZERO; dim];
    init[0] = ONE;
    let enc = EnvEncoding::new(EncodingKind::SecondOrder, h, b_ops, init, sectors)?;
    Ok(match layout {
        Layout::Ring => enc.with_ring(RingLayout {
            grid,
            channels: table.max_rank().max(1),
            offset: 1,
        }),
        Layout::Compact => enc,
    })
}

/// `⟨v|B̃_β(s) B̃_β'(0)|v⟩` evaluated on the encoding.
pub fn reproduced_two_time(enc: &EnvEncoding, beta: usize, beta2: usize, s: f64) -> C64 {
    let v = enc.init_state();
    let w = enc.apply_b_at(beta2, 0.0, v);
    let w = enc.apply_b_at(beta, s, &w);
    crate::linalg::inner(v, &w)
}
