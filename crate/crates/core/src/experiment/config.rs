use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Wavepackage,
    Thermalise,
    MinspaceCheck,
    Resources,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Wavepackage => "wavepackage",
            ExperimentKind::Thermalise => "thermalise",
            ExperimentKind::MinspaceCheck => "minspace-check",
            ExperimentKind::Resources => "resources",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathKind {
    Lorentzian,
    Ohmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub kind: BathKind,
    pub a: f64,
    pub gamma_bar: f64,
    /// Inverse temperature; `null` is zero temperature.
    pub beta: Option<f64>,
    pub delta_omega: f64,
    pub n_omega: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub delta: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolVariant {
    None,
    PeriodicReinit,
    Projective,
    ConditionalProjective,
    ConditionalReinit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub variant: ProtocolVariant,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    /// Inclusive site range `[x_lo, x_hi]` of the dissipation zone.
    pub zone: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub t_max: f64,
    /// Record every `output_stride` steps of `dt` unless explicit times
    /// are given.
    pub output_stride: usize,
    pub output_times: Option<Vec<f64>>,
    /// Explicit times in units of the ring step `1/c`.
    pub output_ring_steps: Option<Vec<f64>>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinspaceConfig {
    pub dim: usize,
    pub n_beta: usize,
    pub order: u32,
    pub instances: usize,
    /// Longest word compared; defaults to `2⌊n/2⌋ + 1`.
    pub check_length: Option<usize>,
    pub time_sets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcesConfig {
    pub order: u32,
    pub n_beta: u64,
    /// Evolution time and target Trotter error for the concrete model.
    pub t: f64,
    pub target_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub bath: BathConfig,
    pub system: SystemConfig,
    pub protocol: ProtocolConfig,
    pub run: RunConfig,
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minspace: Option<MinspaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourcesConfig>,
}

fn ring_speed(n_omega: usize, dw: f64) -> f64 {
    n_omega as f64 * dw / (2.0 * std::f64::consts::PI)
}

impl ExperimentConfig {
    /// Wavepacket run at full scale: `N_ω = 1001`, `δω = 0.001`,
    /// `Γ = 0.004`, `γ̄ = 0.002`, zone 500..=800.
    pub fn wavepackage_default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Wavepackage,
            bath: BathConfig {
                kind: BathKind::Lorentzian,
                a: 1.0,
                gamma_bar: 0.002,
                beta: None,
                delta_omega: 0.001,
                n_omega: 1001,
            },
            system: SystemConfig { delta: 0.0, alpha: 0.0 },
            protocol: ProtocolConfig {
                variant: ProtocolVariant::ConditionalProjective,
                gamma: Some(0.004),
                tau: None,
                zone: Some([500, 800]),
            },
            run: RunConfig {
                n_traj: 1000,
                dt: 0.2,
                t_max: 700.0 / ring_speed(1001, 0.001),
                output_stride: 1,
                output_times: None,
                output_ring_steps: Some(vec![200.0, 400.0, 550.0, 700.0]),
                master_seed: 1,
            },
            output: OutputConfig { path: None },
            minspace: None,
            resources: None,
        }
    }

    /// The wavepacket run shrunk to `N_ω = 201` with the zone and output
    /// times scaled by `1/5`.
    pub fn wavepackage_ci() -> Self {
        let mut c = Self::wavepackage_default();
        c.bath.n_omega = 201;
        c.bath.delta_omega = 0.005;
        c.bath.gamma_bar = 0.01;
        c.protocol.gamma = Some(0.02);
        c.protocol.zone = Some([100, 160]);
        c.run.n_traj = 200;
        c.run.dt = 0.1 / c.bath_norm_guess().max(c.protocol.gamma.unwrap_or(0.0));
        c.run.output_ring_steps = Some(vec![40.0, 80.0, 110.0, 140.0]);
        c.run.t_max = 140.0 / ring_speed(201, 0.005);
        c
    }

    fn bath_norm_guess(&self) -> f64 {
        (self.bath.n_omega / 2) as f64 * self.bath.delta_omega
    }

    /// Qubit thermalisation at zero temperature, full scale.
    pub fn thermalise_default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Thermalise,
            bath: BathConfig {
                kind: BathKind::Ohmic,
                a: 1.0,
                gamma_bar: 10.0,
                beta: None,
                delta_omega: 0.02,
                n_omega: 401,
            },
            system: SystemConfig { delta: 1.0, alpha: 0.01 },
            protocol: ProtocolConfig {
                variant: ProtocolVariant::ConditionalReinit,
                gamma: None,
                tau: None,
                zone: Some([21, 380]),
            },
            run: RunConfig {
                n_traj: 1000,
                dt: 0.02,
                t_max: 150.0,
                output_stride: 250,
                output_times: None,
                output_ring_steps: None,
                master_seed: 1,
            },
            output: OutputConfig { path: None },
            minspace: None,
            resources: None,
        }
    }

    /// Finite temperature `β = 1`, zone 3..=398, 5000 trajectories.
    pub fn thermalise_finite_default() -> Self {
        let mut c = Self::thermalise_default();
        c.bath.beta = Some(1.0);
        c.protocol.zone = Some([3, 398]);
        c.run.n_traj = 5000;
        c
    }

    pub fn minspace_default() -> Self {
        let mut c = Self::thermalise_default();
        c.experiment = ExperimentKind::MinspaceCheck;
        c.minspace = Some(MinspaceConfig {
            dim: 4,
            n_beta: 1,
            order: 2,
            instances: 10,
            check_length: None,
            time_sets: 3,
        });
        c
    }

    pub fn resources_default() -> Self {
        let mut c = Self::thermalise_default();
        c.experiment = ExperimentKind::Resources;
        c.resources = Some(ResourcesConfig {
            order: 2,
            n_beta: 1,
            t: 100.0,
            target_error: 0.01,
        });
        c
    }

    pub fn default_for(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Wavepackage => Self::wavepackage_default(),
            ExperimentKind::Thermalise => Self::thermalise_default(),
            ExperimentKind::MinspaceCheck => Self::minspace_default(),
            ExperimentKind::Resources => Self::resources_default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::config("json", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serialises");
        Sha256::digest(compact.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Ring step speed `c` of the configured grid.
    pub fn speed(&self) -> f64 {
        ring_speed(self.bath.n_omega, self.bath.delta_omega)
    }

    /// Output times from the run section.
    pub fn output_times(&self) -> Vec<f64> {
        if let Some(t) = &self.run.output_times {
            return t.clone();
        }
        if let Some(steps) = &self.run.output_ring_steps {
            let c = self.speed();
            return steps.iter().map(|s| s / c).collect();
        }
        let step = self.run.dt * self.run.output_stride as f64;
        let n = (self.run.t_max / step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * step).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        let b = &self.bath;
        pos("bath.a", b.a)?;
        pos("bath.gamma_bar", b.gamma_bar)?;
        pos("bath.delta_omega", b.delta_omega)?;
        if let Some(beta) = b.beta {
            pos("bath.beta", beta)?;
        }
        let evolves = matches!(self.experiment, ExperimentKind::Wavepackage | ExperimentKind::Thermalise);
        if b.n_omega == 0 || (evolves && b.n_omega.is_multiple_of(2)) {
            return Err(Error::config("bath.n_omega", format!("must be odd and positive, got {}", b.n_omega)));
        }
        if !self.system.alpha.is_finite() {
            return Err(Error::config("system.alpha", "must be finite"));
        }
        if self.experiment == ExperimentKind::Thermalise {
            pos("system.delta", self.system.delta)?;
        }
        let p = &self.protocol;
        match p.variant {
            ProtocolVariant::Projective | ProtocolVariant::ConditionalProjective => match p.gamma {
                Some(g) if g.is_finite() && g >= 0.0 => {}
                _ => return Err(Error::config("protocol.gamma", "required and non-negative for this variant")),
            },
            ProtocolVariant::PeriodicReinit => pos("protocol.tau", p.tau.unwrap_or(f64::NAN))?,
            _ => {}
        }
        if matches!(p.variant, ProtocolVariant::ConditionalProjective | ProtocolVariant::ConditionalReinit) && p.zone.is_none() {
            return Err(Error::config("protocol.zone", "conditional variants need a dissipation zone"));
        }
        if let Some([lo, hi]) = p.zone {
            if lo > hi || hi >= b.n_omega {
                return Err(Error::config("protocol.zone", format!("[{lo}, {hi}] must lie within [0, {}]", b.n_omega - 1)));
            }
            if lo == 0 {
                return Err(Error::config("protocol.zone", "site 0 holds the coupling and cannot be dissipated"));
            }
        }
        let r = &self.run;
        if evolves {
            if r.n_traj == 0 {
                return Err(Error::config("run.n_traj", "must be positive"));
            }
            pos("run.dt", r.dt)?;
            if !(r.t_max.is_finite() && r.t_max >= 0.0) {
                return Err(Error::config("run.t_max", "must be finite and non-negative"));
            }
            if r.output_times.is_none() && r.output_ring_steps.is_none() && r.output_stride == 0 {
                return Err(Error::config("run.output_stride", "must be positive"));
            }
            let times = self.output_times();
            if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|&t| !(t >= 0.0 && t <= r.t_max * (1.0 + 1e-12))) {
                return Err(Error::config("run.output_times", "must be ascending and within [0, t_max]"));
            }
        }
        if self.experiment == ExperimentKind::MinspaceCheck {
            let m = self.minspace.as_ref().ok_or_else(|| Error::config("minspace", "section required"))?;
            if m.dim == 0 || m.dim > 8 {
                return Err(Error::config("minspace.dim", "must lie in 1..=8"));
            }
            if m.n_beta == 0 || m.n_beta > 3 {
                return Err(Error::config("minspace.n_beta", "must lie in 1..=3"));
            }
            if m.order == 0 || m.order > 6 {
                return Err(Error::config("minspace.order", "must lie in 1..=6"));
            }
            if m.instances == 0 || m.time_sets == 0 {
                return Err(Error::config("minspace.instances", "instances and time_sets must be positive"));
            }
        }
        if self.experiment == ExperimentKind::Resources {
            let rc = self.resources.as_ref().ok_or_else(|| Error::config("resources", "section required"))?;
            if rc.order == 0 || rc.n_beta == 0 {
                return Err(Error::config("resources.order", "order and n_beta must be positive"));
            }
            pos("resources.t", rc.t)?;
            pos("resources.target_error", rc.target_error)?;
        }
        Ok(())
    }
}
