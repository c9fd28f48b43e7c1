use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::expm_hermitian_apply;

use super::{assemble_hamiltonian, CompositeModel, CompositeState, Hamiltonian, Observable, RelaxationProtocol};

/// Whether trajectories are spread over the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Sampling parameters for [`run_trajectories`].
#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub n_traj: usize,
    pub master_seed: u64,
    /// Step of the stochastic protocol events.
    pub dt: f64,
    pub t_max: f64,
    /// Ascending, within `[0, t_max]`.
    pub output_times: Vec<f64>,
    pub execution: Execution,
}

impl TrajectoryRun {
    /// Output times `0, stride·dt, 2·stride·dt, …` up to `t_max`.
    pub fn strided_times(dt: f64, t_max: f64, stride: usize) -> Vec<f64> {
        let step = dt * stride.max(1) as f64;
        let n = (t_max / step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * step).collect()
    }
}

/// Per-time means and standard errors, one block of columns per
/// observable.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResults {
    pub times: Vec<f64>,
    pub n_traj: usize,
    /// Start column of each observable.
    pub offsets: Vec<usize>,
    /// `mean[time][column]`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

impl TrajectoryResults {
    pub fn mean_of(&self, time_idx: usize, obs: usize) -> &[f64] {
        let end = self.offsets.get(obs + 1).copied().unwrap_or(self.mean[time_idx].len());
        &self.mean[time_idx][self.offsets[obs]..end]
    }

    pub fn stderr_of(&self, time_idx: usize, obs: usize) -> &[f64] {
        let end = self.offsets.get(obs + 1).copied().unwrap_or(self.stderr[time_idx].len());
        &self.stderr[time_idx][self.offsets[obs]..end]
    }
}

fn validate(model: &CompositeModel, h: &Hamiltonian, protocol: &RelaxationProtocol, run: &TrajectoryRun, init: &CompositeState) -> Result<()> {
    protocol.validate(model.encoding())?;
    if run.n_traj == 0 {
        return Err(Error::param("n_traj", "need at least one trajectory"));
    }
    if !(run.t_max.is_finite() && run.t_max >= 0.0) {
        return Err(Error::param("t_max", "must be finite and non-negative"));
    }
    if !(run.dt.is_finite() && run.dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let limit = 0.1 * (1.0 / h.norm_bound).min(protocol.timescale());
    if run.dt > limit * (1.0 + 1e-12) {
        let which = if protocol.timescale() < 1.0 / h.norm_bound {
            format!("dt ≤ 0.1·(protocol timescale {:.6e})", protocol.timescale())
        } else {
            format!("dt ≤ 0.1/‖H̃‖ with ‖H̃‖ ≤ {:.6e}", h.norm_bound)
        };
        return Err(Error::StepTooCoarse { dt: run.dt, constraint: which });
    }
    if run.output_times.windows(2).any(|w| !(w[0] <= w[1]))
        || run.output_times.iter().any(|&t| !(t >= 0.0 && t <= run.t_max))
    {
        return Err(Error::param("output_times", "must be ascending and inside [0, t_max]"));
    }
    if init.sys_dim != model.sys_dim() || init.env_dim != model.env_dim() {
        return Err(Error::DimensionMismatch("initial state does not match the model".into()));
    }
    init.check_normalised()
}

/// Unravels the protocol into pure-state trajectories and averages the
/// observables at the output times. Trajectory `i` draws from stream `i` of
/// a ChaCha generator seeded with the master seed, so results do not depend
/// on how trajectories are scheduled.
pub fn run_trajectories(
    model: &CompositeModel,
    protocol: &RelaxationProtocol,
    run: &TrajectoryRun,
    init: &CompositeState,
    observables: &[&dyn Observable],
) -> Result<TrajectoryResults> {
    let h = assemble_hamiltonian(model)?;
    validate(model, &h, protocol, run, init)?;
    let mut offsets = Vec::with_capacity(observables.len());
    let mut width = 0;
    for o in observables {
        offsets.push(width);
        width += o.n_values();
    }
    let one = |i: usize| single_trajectory(model, &h, protocol, run, init, observables, width, i);
    let samples: Vec<Vec<f64>> = match run.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..run.n_traj).into_par_iter().map(one).collect()
        }
        _ => (0..run.n_traj).map(one).collect(),
    };
    let n = samples.len() as f64;
    let total = samples[0].len();
    let mean: Vec<f64> = pairwise_sum(&samples, total, &|x, _| x).into_iter().map(|s| s / n).collect();
    let var: Vec<f64> = pairwise_sum(&samples, total, &|x, k| (x - mean[k]) * (x - mean[k]))
        .into_iter()
        .map(|s| if samples.len() > 1 { s / (n - 1.0) } else { 0.0 })
        .collect();
    let nt = run.output_times.len();
    let split = |v: Vec<f64>| -> Vec<Vec<f64>> { (0..nt).map(|t| v[t * width..(t + 1) * width].to_vec()).collect() };
    Ok(TrajectoryResults {
        times: run.output_times.clone(),
        n_traj: run.n_traj,
        offsets,
        mean: split(mean),
        stderr: split(var.into_iter().map(|v| (v / n).sqrt()).collect()),
    })
}

/// Column sums with a fixed binary tree over the trajectory index.
fn pairwise_sum(rows: &[Vec<f64>], width: usize, f: &dyn Fn(f64, usize) -> f64) -> Vec<f64> {
    if rows.len() <= 8 {
        let mut acc = vec![0.0; width];
        for r in rows {
            for (k, (a, &x)) in acc.iter_mut().zip(r).enumerate() {
                *a += f(x, k);
            }
        }
        return acc;
    }
    let (l, r) = rows.split_at(rows.len() / 2);
    let mut a = pairwise_sum(l, width, f);
    for (x, y) in a.iter_mut().zip(pairwise_sum(r, width, f)) {
        *x += y;
    }
    a
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Scheduled,
    Step,
    Output,
}

#[allow(clippy::too_many_arguments)]
fn single_trajectory(
    model: &CompositeModel,
    h: &Hamiltonian,
    protocol: &RelaxationProtocol,
    run: &TrajectoryRun,
    init: &CompositeState,
    observables: &[&dyn Observable],
    width: usize,
    index: usize,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.master_seed);
    rng.set_stream(index as u64);
    let enc = model.encoding();
    let mut state = init.clone();
    let mut t_state = 0.0;
    let mut out = vec![0.0; run.output_times.len() * width];

    let rate = protocol.rate();
    let p_event = rate * run.dt;
    let n_steps = if rate > 0.0 { (run.t_max / run.dt + 1e-9).floor() as usize } else { 0 };
    let period = protocol.period();
    let n_sched = period.map(|p| (run.t_max / p + 1e-9).floor() as usize).unwrap_or(0);
    let (mut j, mut k, mut o) = (1usize, 1usize, 0usize);

    let advance = |state: &mut CompositeState, t_state: &mut f64, t: f64| {
        if t > *t_state {
            expm_hermitian_apply(&h.matrix, h.norm_bound, t - *t_state, &mut state.amps);
            *t_state = t;
        }
    };

    loop {
        let mut next: Option<(f64, Kind)> = None;
        let mut consider = |t: f64, kind: Kind| {
            if next.is_none_or(|(tn, kn)| t < tn || (t == tn && kind < kn)) {
                next = Some((t, kind));
            }
        };
        if j <= n_sched {
            consider(j as f64 * period.unwrap_or(0.0), Kind::Scheduled);
        }
        if k <= n_steps {
            consider(k as f64 * run.dt, Kind::Step);
        }
        if o < run.output_times.len() {
            consider(run.output_times[o], Kind::Output);
        }
        let Some((t, kind)) = next else { break };
        match kind {
            Kind::Scheduled => {
                advance(&mut state, &mut t_state, t);
                protocol.fire(enc, &mut state, &mut rng);
                j += 1;
            }
            Kind::Step => {
                if rng.random::<f64>() < p_event {
                    advance(&mut state, &mut t_state, t);
                    protocol.fire(enc, &mut state, &mut rng);
                }
                k += 1;
            }
            Kind::Output => {
                advance(&mut state, &mut t_state, t);
                let mut col = 0;
                for obs in observables {
                    let nv = obs.n_values();
                    obs.evaluate(&state, &mut out[o * width + col..o * width + col + nv]);
                    col += nv;
                }
                o += 1;
            }
        }
    }
    out
}
