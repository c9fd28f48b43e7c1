use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, C64, ONE};

use super::{assemble_hamiltonian, CompositeModel, RelaxationProtocol};

/// Largest total dimension accepted by the dense integrator.
pub const MAX_LINDBLAD_DIM: usize = 64;

/// `dρ/dt = -i[H, ρ] + rate (Φ(ρ) - ρ)`, plus `ρ ← Φ(ρ)` at every
/// `j·period`, with `Φ(ρ) = Σ_k K_k ρ K_k†`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub rate: f64,
    pub kraus: Vec<CMatrix>,
    pub period: Option<f64>,
}

impl Dissipator {
    pub fn channel(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }
}

/// The averaged channel of a protocol's trajectory events.
pub fn protocol_dissipator(model: &CompositeModel, protocol: &RelaxationProtocol) -> Result<Dissipator> {
    let enc = model.encoding();
    protocol.validate(enc)?;
    let (ds, de) = (model.sys_dim(), model.env_dim());
    let id_s = CMatrix::identity(ds, ds);
    let psi = CMatrix::from_column_slice(de, 1, enc.init_state());
    let reset_through = |bra: &CMatrix| kron(&id_s, &(&psi * bra.adjoint()));
    let kraus: Vec<CMatrix> = if protocol.is_conditional() {
        let proj = enc.projector().expect("validated");
        let mut ks: Vec<CMatrix> = proj
            .range_basis(de)
            .iter()
            .map(|chi| reset_through(&CMatrix::from_column_slice(de, 1, chi.as_slice())))
            .collect();
        let miss = CMatrix::identity(de, de) - proj.to_dense(de);
        ks.push(kron(&id_s, &miss));
        ks
    } else if matches!(protocol, RelaxationProtocol::None) {
        Vec::new()
    } else {
        (0..de)
            .map(|e| {
                let mut bra = CMatrix::zeros(de, 1);
                bra[(e, 0)] = ONE;
                reset_through(&bra)
            })
            .collect()
    };
    Ok(Dissipator {
        rate: protocol.rate(),
        kraus,
        period: protocol.period(),
    })
}

fn generator(h: &CMatrix, d: &Dissipator, rho: &CMatrix) -> CMatrix {
    let mut out = (h * rho - rho * h) * C64::new(0.0, -1.0);
    if d.rate > 0.0 {
        out += (d.channel(rho) - rho) * C64::new(d.rate, 0.0);
    }
    out
}

fn rk4(h: &CMatrix, d: &Dissipator, rho: &CMatrix, dt: f64) -> CMatrix {
    let half = C64::new(dt / 2.0, 0.0);
    let k1 = generator(h, d, rho);
    let k2 = generator(h, d, &(rho + &k1 * half));
    let k3 = generator(h, d, &(rho + &k2 * half));
    let k4 = generator(h, d, &(rho + &k3 * C64::new(dt, 0.0)));
    rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
}

const TOL: f64 = 1e-11;

/// Adaptive RK4 (step doubling with Richardson correction) from `t0` to `t1`.
fn integrate(h: &CMatrix, d: &Dissipator, rho: &mut CMatrix, t0: f64, t1: f64, step: &mut f64) {
    let mut t = t0;
    while t < t1 {
        let dt = step.min(t1 - t);
        let full = rk4(h, d, rho, dt);
        let mid = rk4(h, d, rho, dt / 2.0);
        let two = rk4(h, d, &mid, dt / 2.0);
        let err = (&two - &full).norm() / 15.0;
        if err <= TOL || dt < 1e-12 {
            *rho = &two + (&two - &full) / C64::new(15.0, 0.0);
            t += dt;
        }
        let grow = if err > 0.0 { 0.9 * (TOL / err).powf(0.2) } else { 2.0 };
        *step = dt * grow.clamp(0.2, 2.0);
    }
}

/// Integrates the master equation of `model` with `dissipator` and
/// returns `ρ(t)` at the ascending `times`. Scheduled applications of the
/// channel at a time precede the output at that time.
pub fn lindblad_dense_integrate(
    model: &CompositeModel,
    dissipator: &Dissipator,
    rho0: &CMatrix,
    times: &[f64],
) -> Result<Vec<CMatrix>> {
    let dim = model.dim();
    if dim > MAX_LINDBLAD_DIM {
        return Err(Error::param(
            "dimension",
            format!("dense Lindblad integration is limited to dimension {MAX_LINDBLAD_DIM}, got {dim}"),
        ));
    }
    if rho0.shape() != (dim, dim) || dissipator.kraus.iter().any(|k| k.shape() != (dim, dim)) {
        return Err(Error::DimensionMismatch("ρ₀ and Kraus operators must match the model".into()));
    }
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::UnorderedTimes);
    }
    let h = assemble_hamiltonian(model)?.matrix.to_dense();
    let mut step = 0.1 / (model.norm_bound() + dissipator.rate).max(1e-3);
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut j = 1usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if let Some(p) = dissipator.period {
            while j as f64 * p <= target {
                let tj = j as f64 * p;
                integrate(&h, dissipator, &mut rho, t, tj, &mut step);
                rho = dissipator.channel(&rho);
                t = tj;
                j += 1;
            }
        }
        integrate(&h, dissipator, &mut rho, t, target, &mut step);
        t = target;
        out.push(rho.clone());
    }
    Ok(out)
}
