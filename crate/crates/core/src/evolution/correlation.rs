use crate::bath::{analytic_correlation, CouplingTable};
use crate::encoding::EnvEncoding;
use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, taylor_expmv, C64};

use super::RelaxationProtocol;

/// `⟨B̃_β(t) B̃_β'(s)⟩` of the encoded environment relaxed by `protocol`,
/// for `t ≥ s`, by the quantum regression theorem on the ket
/// `B̃_β'|ψ̃⟩`. Needs `H̃_E|ψ̃⟩ = 0`, `⟨ψ̃|B̃|ψ̃⟩ = 0` and, for the
/// conditional protocols, `Π|ψ̃⟩ = 0`.
pub fn dissipative_correlation(
    enc: &EnvEncoding,
    protocol: &RelaxationProtocol,
    beta: usize,
    beta2: usize,
    t: f64,
    s: f64,
) -> Result<C64> {
    protocol.validate(enc)?;
    if !(t.is_finite() && s.is_finite() && t >= s) {
        return Err(Error::UnorderedTimes);
    }
    let nb = enc.n_beta();
    if beta >= nb || beta2 >= nb {
        return Err(Error::param("beta", format!("index out of range for {nb} operators")));
    }
    let psi = enc.init_state();
    let h = enc.h_env_diag();
    let stationary: f64 = psi.iter().zip(h).map(|(a, e)| (a * e).norm_sqr()).sum::<f64>().sqrt();
    if stationary > 1e-12 * enc.h_env_norm().max(1.0) {
        return Err(Error::param("init_state", "ψ̃ must be annihilated by H̃_E"));
    }
    let mut a = vec![C64::new(0.0, 0.0); enc.dim()];
    for b in 0..nb {
        enc.b_op(b).matvec(psi, &mut a);
        if inner(psi, &a).norm() > 1e-12 * enc.b_norm(b).max(1.0) {
            return Err(Error::param("init_state", "⟨ψ̃|B̃|ψ̃⟩ must vanish"));
        }
    }
    enc.b_op(beta2).matvec(psi, &mut a);
    let tau = t - s;
    let free = |a: &mut [C64], dt: f64| {
        for (x, e) in a.iter_mut().zip(h) {
            *x *= C64::from_polar(1.0, -e * dt);
        }
    };
    match *protocol {
        RelaxationProtocol::None => free(&mut a, tau),
        RelaxationProtocol::Projective { gamma } => {
            free(&mut a, tau);
            let damp = (-gamma * tau).exp();
            a.iter_mut().for_each(|x| *x *= damp);
        }
        RelaxationProtocol::PeriodicReinit { tau: period } => {
            // a reset inside (s, t] sends the ket to Tr(·) ψ̃ = 0
            if boundary_between(s, t, period) {
                return Ok(C64::new(0.0, 0.0));
            }
            free(&mut a, tau);
        }
        RelaxationProtocol::ConditionalProjective { gamma } => {
            let proj = enc.projector().expect("validated");
            if proj.weight(psi) > 1e-20 {
                return Err(Error::param("projector", "Π|ψ̃⟩ must vanish"));
            }
            let bound = enc.h_env_norm() + gamma;
            taylor_expmv(
                |x, y| {
                    let mut p = x.to_vec();
                    proj.apply(&mut p);
                    for (i, yi) in y.iter_mut().enumerate() {
                        *yi = x[i] * h[i] - C64::new(0.0, gamma) * p[i];
                    }
                },
                bound,
                tau,
                &mut a,
            );
        }
        RelaxationProtocol::ConditionalReinit { interval } => {
            let proj = enc.projector().expect("validated");
            if proj.weight(psi) > 1e-20 {
                return Err(Error::param("projector", "Π|ψ̃⟩ must vanish"));
            }
            let mut now = s;
            let mut j = (s / interval).floor() as i64 + 1;
            while j as f64 * interval <= t {
                let tj = j as f64 * interval;
                free(&mut a, tj - now);
                proj.apply_complement(&mut a);
                now = tj;
                j += 1;
            }
            free(&mut a, t - now);
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); enc.dim()];
    enc.b_op(beta).matvec(&a, &mut out);
    Ok(inner(psi, &out))
}

fn boundary_between(s: f64, t: f64, period: f64) -> bool {
    let j = (s / period).floor() + 1.0;
    j * period <= t
}

/// Threshold on `‖C(τ)‖/‖C(0)‖` used when none is configured.
pub const DEFAULT_TAU_E_THRESHOLD: f64 = 0.01;

/// Smallest ring step `j ≥ 1` within one revival period at which the
/// Frobenius norm of the correlation matrix has dropped to `thr` times its
/// value at zero. Returns `(τ_E, x_E) = (j/c, j)`.
pub fn estimate_tau_e(table: &CouplingTable, thr: f64) -> Result<(f64, usize)> {
    if !(thr > 0.0 && thr < 1.0) {
        return Err(Error::param("threshold", format!("must lie in (0, 1), got {thr}")));
    }
    let nb = table.n_beta();
    let frob = |s: f64| -> f64 {
        let mut acc = Vec::with_capacity(nb * nb);
        for b in 0..nb {
            for b2 in 0..nb {
                acc.push(analytic_correlation(table, b, b2, s));
            }
        }
        norm_sqr(&acc).sqrt()
    };
    let c0 = frob(0.0);
    let grid = table.grid();
    let speed = grid.speed();
    for j in 1..grid.len() {
        let tau = j as f64 / speed;
        if frob(tau) <= thr * c0 {
            return Ok((tau, j));
        }
    }
    Err(Error::NoDecay { threshold: thr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{lorentzian_coupling, FrequencyGrid};
    use crate::encoding::{
        dissipation_projector_second_order, second_order_encoding, to_position_basis, Layout,
    };

    fn ring(n: usize, dw: f64, gbar: f64) -> (CouplingTable, EnvEncoding) {
        let grid = FrequencyGrid::new(n, dw).unwrap();
        let table = lorentzian_coupling(1.0, gbar, &grid).unwrap();
        let enc = second_order_encoding(&table, Layout::Ring).unwrap();
        (table, enc)
    }

    #[test]
    fn free_correlation_matches_analytic() {
        let (table, enc) = ring(21, 0.15, 0.2);
        for &(t, s) in &[(0.0, 0.0), (3.0, 1.0), (7.5, -2.0)] {
            let got = dissipative_correlation(&enc, &RelaxationProtocol::None, 0, 0, t, s).unwrap();
            let want = analytic_correlation(&table, 0, 0, t - s);
            assert!((got - want).norm() < 1e-12, "{got} {want}");
        }
        assert_eq!(
            dissipative_correlation(&enc, &RelaxationProtocol::None, 0, 0, 1.0, 2.0),
            Err(Error::UnorderedTimes)
        );
    }

    #[test]
    fn projective_damps_exponentially() {
        let (_, enc) = ring(21, 0.15, 0.2);
        let g = 0.3;
        for &(t, s) in &[(2.0, 0.5), (4.0, 0.0)] {
            let free = dissipative_correlation(&enc, &RelaxationProtocol::None, 0, 0, t, s).unwrap();
            let damped = dissipative_correlation(&enc, &RelaxationProtocol::Projective { gamma: g }, 0, 0, t, s).unwrap();
            assert!((damped - free * (-g * (t - s)).exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn periodic_cuts_across_boundaries() {
        let (_, enc) = ring(21, 0.15, 0.2);
        let p = RelaxationProtocol::PeriodicReinit { tau: 2.0 };
        assert_eq!(dissipative_correlation(&enc, &p, 0, 0, 2.5, 1.5).unwrap(), C64::new(0.0, 0.0));
        let inside = dissipative_correlation(&enc, &p, 0, 0, 3.9, 2.1).unwrap();
        let free = dissipative_correlation(&enc, &RelaxationProtocol::None, 0, 0, 3.9, 2.1).unwrap();
        assert_eq!(inside, free);
    }

    #[test]
    fn conditional_reinit_on_ring_steps() {
        let (_, enc) = ring(41, 0.1, 0.1);
        let view = to_position_basis(&enc).unwrap();
        let enc = enc.with_projector(dissipation_projector_second_order(&view, 20).unwrap()).unwrap();
        let p = RelaxationProtocol::conditional_reinit_for(&enc).unwrap();
        let c = view.speed();
        // before any measurement the free value is kept
        let free = dissipative_correlation(&enc, &RelaxationProtocol::None, 0, 0, 0.5 / c, 0.0).unwrap();
        let got = dissipative_correlation(&enc, &p, 0, 0, 0.5 / c, 0.0).unwrap();
        assert!((free - got).norm() < 1e-14);
        // measured kets keep evolving, so later values stay finite
        let late = dissipative_correlation(&enc, &p, 0, 0, 30.0 / c, 0.0).unwrap();
        assert!(late.norm().is_finite());
    }

    #[test]
    fn tau_e_examples() {
        let (table, _) = ring(101, 0.04, 0.1);
        let (tau, x) = estimate_tau_e(&table, 0.05).unwrap();
        // Lorentzian decays as e^{-γ̄τ}: e^{-0.1τ} ≤ 0.05 at τ ≈ 30
        let c = table.grid().speed();
        assert!((tau - x as f64 / c).abs() < 1e-12);
        assert!((25.0..=35.0).contains(&tau), "{tau}");
        let flat = CouplingTable::from_scalar(FrequencyGrid::new(3, 0.1).unwrap(), &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(estimate_tau_e(&flat, 0.1), Err(Error::NoDecay { .. })));
    }
}
