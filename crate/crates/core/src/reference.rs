//! Closed-form Markovian reference for a qubit thermalising in an ohmic bath.

use std::f64::consts::PI;

use crate::bath::{ohmic_thermal_coupling, CouplingTable, FrequencyGrid};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Qubit `H_S = -(Δ/2)σᶻ` coupled through `α σˣ ⊗ B` to an ohmic bath.
#[derive(Debug, Clone)]
pub struct QubitThermalModel {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub table: CouplingTable,
    pub gamma_down: f64,
    pub gamma_up: f64,
}

impl QubitThermalModel {
    pub fn new(delta: f64, alpha: f64, a: f64, gamma_bar: f64, beta: f64, grid: FrequencyGrid) -> Result<Self> {
        let table = ohmic_thermal_coupling(a, gamma_bar, beta, &grid)?;
        let (gamma_down, gamma_up) = derive_rates(&table, delta, alpha)?;
        Ok(QubitThermalModel {
            delta,
            alpha,
            beta,
            table,
            gamma_down,
            gamma_up,
        })
    }

    /// Ground-state population at long times.
    pub fn steady_ground(&self) -> f64 {
        self.gamma_down / (self.gamma_down + self.gamma_up)
    }

    /// `1/(γ↓ + γ↑)`.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / (self.gamma_down + self.gamma_up)
    }
}

/// `(γ↓, γ↑) = 2π α² (|g(Δ)|², |g(-Δ)|²) / δω`, the golden-rule rates of
/// the discretised bath with the grid weight turned into a density.
pub fn derive_rates(table: &CouplingTable, delta: f64, alpha: f64) -> Result<(f64, f64)> {
    if table.n_beta() != 1 {
        return Err(Error::param("table", "qubit rates need a single bath operator"));
    }
    let grid = table.grid();
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let (Some(up), Some(down)) = (grid.index_of(-delta), grid.index_of(delta)) else {
        return Err(Error::OutsideGrid(delta));
    };
    if up == 0 || down + 1 == grid.len() {
        return Err(Error::OutsideGrid(delta));
    }
    let weight = |j: usize| table.gamma(j)[(0, 0)].re;
    let scale = 2.0 * PI * alpha * alpha / grid.delta_omega();
    Ok((scale * weight(down), scale * weight(up)))
}

/// `p_g(t)` of the amplitude-damping/heating master equation,
/// `dp_g/dt = γ↓(1 - p_g) - γ↑ p_g`, from `ρ_S(0)`; index 0 is the ground
/// state.
pub fn solve_qubit_lindblad(gamma_down: f64, gamma_up: f64, rho0: &CMatrix, times: &[f64]) -> Result<Vec<f64>> {
    if !(gamma_down >= 0.0 && gamma_up >= 0.0) {
        return Err(Error::param("rates", "must be non-negative"));
    }
    if rho0.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("ρ_S must be 2×2".into()));
    }
    let total = gamma_down + gamma_up;
    let p0 = rho0[(0, 0)].re / rho0.trace().re;
    let p_inf = if total > 0.0 { gamma_down / total } else { p0 };
    Ok(times
        .iter()
        .map(|&t| p_inf + (p0 - p_inf) * (-total * t).exp())
        .collect())
}
