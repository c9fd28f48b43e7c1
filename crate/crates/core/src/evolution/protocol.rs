use rand::Rng;

use crate::encoding::{EnvEncoding, Projector};
use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, C64, ZERO};

use super::CompositeState;

/// How the environment is relaxed during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationProtocol {
    None,
    /// Reset the environment to `|ψ̃⟩` at every `t = jτ`, `j ≥ 1`.
    PeriodicReinit { tau: f64 },
    /// Reset with rate `Γ`.
    Projective { gamma: f64 },
    /// Measure the encoding's projector `Π` with rate `Γ`; reset on a hit,
    /// keep `(1 - Π)|ψ⟩` otherwise.
    ConditionalProjective { gamma: f64 },
    /// The conditional measurement of `ConditionalProjective`, applied at
    /// every `t = j·interval`, `j ≥ 1` (the ring step `1/c`).
    ConditionalReinit { interval: f64 },
}

impl RelaxationProtocol {
    /// Conditional reinitialisation at the ring step `1/c` of `enc`.
    pub fn conditional_reinit_for(enc: &EnvEncoding) -> Result<Self> {
        let ring = enc
            .ring()
            .ok_or_else(|| Error::param("protocol", "conditional reinitialisation needs a ring-layout encoding"))?;
        Ok(RelaxationProtocol::ConditionalReinit {
            interval: 1.0 / ring.grid.speed(),
        })
    }

    pub fn validate(&self, enc: &EnvEncoding) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            RelaxationProtocol::None => Ok(()),
            RelaxationProtocol::PeriodicReinit { tau } => positive("tau", tau),
            RelaxationProtocol::Projective { gamma } => {
                if gamma.is_finite() && gamma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("gamma", format!("must be non-negative, got {gamma}")))
                }
            }
            RelaxationProtocol::ConditionalProjective { gamma } => {
                if !(gamma.is_finite() && gamma >= 0.0) {
                    return Err(Error::param("gamma", format!("must be non-negative, got {gamma}")));
                }
                needs_projector(enc)
            }
            RelaxationProtocol::ConditionalReinit { interval } => {
                positive("interval", interval)?;
                needs_projector(enc)
            }
        }
    }

    /// Rate of stochastic events, zero for deterministic schedules.
    pub fn rate(&self) -> f64 {
        match *self {
            RelaxationProtocol::Projective { gamma } | RelaxationProtocol::ConditionalProjective { gamma } => gamma,
            _ => 0.0,
        }
    }

    /// Period of scheduled events, if any.
    pub fn period(&self) -> Option<f64> {
        match *self {
            RelaxationProtocol::PeriodicReinit { tau } => Some(tau),
            RelaxationProtocol::ConditionalReinit { interval } => Some(interval),
            _ => None,
        }
    }

    /// Shortest protocol timescale: `1/Γ`, `τ` or the ring step.
    pub fn timescale(&self) -> f64 {
        match *self {
            RelaxationProtocol::None => f64::INFINITY,
            RelaxationProtocol::PeriodicReinit { tau } => tau,
            RelaxationProtocol::Projective { gamma } | RelaxationProtocol::ConditionalProjective { gamma } => {
                if gamma > 0.0 {
                    1.0 / gamma
                } else {
                    f64::INFINITY
                }
            }
            RelaxationProtocol::ConditionalReinit { interval } => interval,
        }
    }

    pub fn is_conditional(&self) -> bool {
        matches!(
            self,
            RelaxationProtocol::ConditionalProjective { .. } | RelaxationProtocol::ConditionalReinit { .. }
        )
    }

    /// One protocol event on a trajectory state.
    pub(crate) fn fire<R: Rng>(&self, enc: &EnvEncoding, state: &mut CompositeState, rng: &mut R) {
        if self.is_conditional() {
            conditional_measure(enc, enc.projector().expect("validated"), state, rng);
        } else {
            reset_environment(enc, state, rng);
        }
    }
}

fn needs_projector(enc: &EnvEncoding) -> Result<()> {
    if enc.projector().is_none() {
        return Err(Error::param("projector", "conditional protocols need a dissipation projector on the encoding"));
    }
    Ok(())
}

/// Replaces the environment by `|ψ̃⟩`: measure it in the computational
/// basis, keep the conditional system state.
pub(crate) fn reset_environment<R: Rng>(enc: &EnvEncoding, state: &mut CompositeState, rng: &mut R) {
    let (ds, de) = (state.sys_dim, state.env_dim);
    let weights: Vec<f64> = (0..de)
        .map(|e| (0..ds).map(|s| state.amps[s * de + e].norm_sqr()).sum())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut r = rng.random::<f64>() * total;
    let mut pick = de - 1;
    for (e, &w) in weights.iter().enumerate() {
        if r < w {
            pick = e;
            break;
        }
        r -= w;
    }
    // guard against landing on an empty entry through rounding
    if weights[pick] == 0.0 {
        pick = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    }
    let sys: Vec<C64> = (0..ds).map(|s| state.amps[s * de + pick]).collect();
    let norm = norm_sqr(&sys).sqrt();
    let init = enc.init_state();
    for s in 0..ds {
        let a = if norm > 0.0 { sys[s] / norm } else { ZERO };
        for e in 0..de {
            state.amps[s * de + e] = a * init[e];
        }
    }
}

/// Measures `1 ⊗ Π`: a hit resets the environment from the projected state,
/// a miss keeps the normalised `(1 - Π)` part.
pub(crate) fn conditional_measure<R: Rng>(
    enc: &EnvEncoding,
    proj: &Projector,
    state: &mut CompositeState,
    rng: &mut R,
) {
    let mut inside = state.clone();
    for s in 0..state.sys_dim {
        proj.apply(inside.env_block_mut(s));
    }
    let p_in = norm_sqr(&inside.amps);
    let total = norm_sqr(&state.amps);
    if p_in <= 0.0 {
        return;
    }
    if rng.random::<f64>() * total < p_in {
        inside.normalise();
        reset_environment(enc, &mut inside, rng);
        *state = inside;
    } else {
        for (a, b) in state.amps.iter_mut().zip(&inside.amps) {
            *a -= b;
        }
        state.normalise();
    }
}
