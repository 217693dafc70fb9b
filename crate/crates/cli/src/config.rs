use serde::Deserialize;
use std::path::Path;
use thinring::effective::PhysParams;
use thinring::gaugefield::Construction;
use thinring::geometry::{DomainKind, DomainSpec};
use thinring::glsolver::GLInit;
use thinring::spectral2d::{GridPolicy, DEFAULT_SEED};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub physics: Option<Physics>,
    #[serde(default)]
    pub numerics: Numerics,
    pub field: Option<Construction>,
    pub eigen: Option<EigenBlock>,
    pub fiber: Option<FiberBlock>,
    pub scan: Option<ScanBlock>,
    pub critical_field: Option<CriticalBlock>,
    pub gl: Option<GlBlock>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub kappa: f64,
    /// Leading field coefficient in H = a/ε + c.
    pub a: f64,
    #[serde(default)]
    pub c: f64,
    pub epsilon: Option<f64>,
}

impl Physics {
    pub fn params(&self, epsilon: f64) -> PhysParams {
        PhysParams::new(self.kappa, self.a, self.c, epsilon)
    }

    /// Length used for the fiber rescaling; any positive value is exact.
    pub fn fiber_len(&self) -> f64 {
        if self.a > 0.0 {
            self.a
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Fixed s-resolution; when absent the grid policy picks one per thickness.
    pub n_s: Option<usize>,
    pub n_t: usize,
    pub n_boundary: usize,
    pub n_grid_fiber: usize,
    pub energy_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            n_s: None,
            n_t: 16,
            n_boundary: 512,
            n_grid_fiber: 2000,
            energy_tol: 1e-12,
            max_iters: 5000,
            seed: DEFAULT_SEED,
        }
    }
}

impl Numerics {
    pub fn policy(&self) -> GridPolicy {
        GridPolicy { n_t: self.n_t, ..Default::default() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenBlock {
    pub epsilons: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberBlock {
    pub alpha: f64,
    pub delta: f64,
    pub a: f64,
    #[serde(default)]
    pub zeta: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    3
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub h_min: f64,
    pub h_max: f64,
    pub h_step: f64,
    pub epsilon: f64,
}

impl ScanBlock {
    pub fn fields(&self) -> Vec<f64> {
        let n = ((self.h_max - self.h_min) / self.h_step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.h_min + k as f64 * self.h_step).collect()
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalBlock {
    pub h_min: f64,
    pub h_max: f64,
    pub step: Option<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlBlock {
    pub init: Option<GLInit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Geometry,
    Eigen,
    Fiber,
    Scan,
    CriticalField,
    Gl,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Eigen => "eigen",
            Command::Fiber => "fiber",
            Command::Scan => "scan",
            Command::CriticalField => "critical-field",
            Command::Gl => "gl",
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn missing(block: &str, cmd: Command) -> CliError {
    CliError::Config(format!("missing `{block}` block required by `{}`", cmd.name()))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{name}` must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn physics(&self, cmd: Command) -> Result<Physics, CliError> {
        self.physics.ok_or_else(|| missing("physics", cmd))
    }

    pub fn epsilon(&self, cmd: Command) -> Result<f64, CliError> {
        self.physics(cmd)?
            .epsilon
            .ok_or_else(|| CliError::Config(format!("missing `physics.epsilon` required by `{}`", cmd.name())))
    }

    /// Field construction, defaulting to the closed form on discs.
    pub fn construction(&self) -> Construction {
        self.field.unwrap_or(match self.domain.kind {
            DomainKind::Disc { .. } => Construction::AnalyticDisc,
            DomainKind::Star { .. } => Construction::PoissonFd { grid_h: 0.01, solve_tol: 1e-10 },
        })
    }

    /// Checks everything the chosen subcommand reads before any solver runs.
    pub fn validate(&self, cmd: Command) -> Result<(), CliError> {
        let n = &self.numerics;
        if n.n_t < 8 || n.n_boundary < 64 || n.n_grid_fiber < 32 {
            return Err(CliError::Config("numerics: need n_t >= 8, n_boundary >= 64, n_grid_fiber >= 32".into()));
        }
        if n.n_s.is_some_and(|v| v < 8) {
            return Err(CliError::Config("numerics: n_s must be at least 8".into()));
        }
        positive("numerics.energy_tol", n.energy_tol)?;
        if n.max_iters == 0 {
            return Err(CliError::Config("numerics: max_iters must be at least 1".into()));
        }
        let check_params = |eps: f64| -> Result<(), CliError> {
            let p = self.physics(cmd)?;
            p.params(eps).validate().map_err(|e| CliError::Config(format!("physics: {e}")))
        };
        match cmd {
            Command::Geometry => {}
            Command::Eigen => {
                let block = self.eigen.as_ref().ok_or_else(|| missing("eigen", cmd))?;
                if block.epsilons.is_empty() {
                    return Err(CliError::Config("eigen.epsilons is empty".into()));
                }
                for &eps in &block.epsilons {
                    check_params(eps)?;
                }
            }
            Command::Fiber => {
                let f = self.fiber.ok_or_else(|| missing("fiber", cmd))?;
                positive("fiber.a", f.a)?;
                if !(f.delta >= 0.0) || !(1..=10).contains(&f.modes) {
                    return Err(CliError::Config("fiber: need delta >= 0 and 1 <= modes <= 10".into()));
                }
            }
            Command::Scan => {
                let s = self.scan.ok_or_else(|| missing("scan", cmd))?;
                positive("scan.h_step", s.h_step)?;
                if !(s.h_max >= s.h_min) || !(s.h_min >= 0.0) {
                    return Err(CliError::Config(format!("scan: empty field range [{}, {}]", s.h_min, s.h_max)));
                }
                check_params(s.epsilon)?;
            }
            Command::CriticalField => {
                let s = self.critical_field.ok_or_else(|| missing("critical_field", cmd))?;
                if !(s.h_max > s.h_min) || !(s.h_min >= 0.0) {
                    return Err(CliError::Config(format!("critical_field: empty range [{}, {}]", s.h_min, s.h_max)));
                }
                if let Some(step) = s.step {
                    positive("critical_field.step", step)?;
                }
                check_params(s.epsilon)?;
            }
            Command::Gl => {
                check_params(self.epsilon(cmd)?)?;
            }
        }
        Ok(())
    }
}
