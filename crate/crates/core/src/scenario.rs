//! Scenario files: one TOML document fully determines a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsConfig;
use crate::error::{Error, Result};
use crate::grid::{LpExponent, SpatialGrid};
use crate::lens::PairSettings;
use crate::potentials::{PotentialSpec, TimeFunction};
use crate::solver::{Coupling, GuardConfig, InitialCondition, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
}

impl GridSection {
    pub fn build(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.dim, self.n, self.half_width)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// Linear run.
    Zero,
    #[default]
    Constant,
    /// Potential-free run in the lens frame with `c = H(s)` built from the
    /// potential's Hill equation; solver times are lens-frame times.
    Lens,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub sigma: f64,
    pub dt: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default)]
    pub coupling: CouplingKind,
    /// Constant coupling value.
    #[serde(default = "one")]
    pub coefficient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "ten")]
    pub diagnostics_stride: usize,
    #[serde(default)]
    pub guards: GuardConfig,
}

fn one() -> f64 {
    1.0
}

fn ten() -> usize {
    10
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
}

/// Direct evolution compared with the lens image of the lens-frame evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensCompare {
    pub times: Vec<f64>,
    /// Lens-frame step; defaults to the solver step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "yes")]
    pub gronwall: bool,
    #[serde(default = "yes")]
    pub rate_checks: bool,
    /// CSV columns to classify with the growth fits.
    #[serde(default = "default_fits")]
    pub fits: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    /// Cauchy test on the snapshots.
    #[serde(default)]
    pub scattering: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_scattering: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lens_compare: Option<LensCompare>,
    /// Closed-form Σ¹ from the Hill pair (linear isotropic runs only).
    #[serde(default)]
    pub hill_reference: bool,
    /// Snapshot-times pairs `(t, t + period)` whose records must agree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_r: Option<LpExponent>,
}

fn default_fits() -> Vec<String> {
    vec!["sigma1".into(), "mom1".into(), "h1".into()]
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            gronwall: true,
            rate_checks: true,
            fits: default_fits(),
            fit_window: None,
            scattering: false,
            expect_scattering: None,
            lens_compare: None,
            hill_reference: false,
            period: None,
            decay_r: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub grid: GridSection,
    pub potential: PotentialSpec,
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lens: Option<PairSettings>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        self.grid.build()
    }

    /// Solver configuration with the coupling resolved; lens coupling needs
    /// the map and is filled in by the runner.
    pub fn solver_config(&self, coupling: Coupling) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            sigma: s.sigma,
            dt: s.dt,
            t_start: s.t_start,
            t_end: s.t_end,
            coupling,
            dealias: s.dealias,
            snapshot_times: s.snapshot_times.clone(),
            diagnostics_stride: s.diagnostics_stride,
            diagnostics: self.diagnostics.clone(),
            guards: s.guards.clone(),
        }
    }

    pub fn basic_coupling(&self) -> Coupling {
        match self.solver.coupling {
            CouplingKind::Zero => Coupling::Zero,
            _ => Coupling::Constant(self.solver.coefficient),
        }
    }

    /// Power-decay exponent of an isotropic potential, if any.
    pub fn gamma(&self) -> Option<f64> {
        match &self.potential {
            PotentialSpec::IsotropicHarmonic {
                omega: TimeFunction::PowerDecay { gamma, .. },
            } => Some(*gamma),
            _ => None,
        }
    }

    pub fn set_gamma(&mut self, gamma: f64) -> Result<()> {
        match &mut self.potential {
            PotentialSpec::IsotropicHarmonic {
                omega: TimeFunction::PowerDecay { gamma: g, .. },
            } => {
                *g = gamma;
                Ok(())
            }
            _ => Err(Error::Validation(
                "gamma sweeps need an isotropic power-decay potential".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("scenario name must not be empty".into()));
        }
        let grid = self.grid()?;
        let d = grid.dim();
        self.potential.validate(d)?;
        self.initial.sample(&grid)?;
        // the lens map is validated when it is built
        let mut config = self.solver_config(self.basic_coupling());
        if self.solver.coupling == CouplingKind::Lens {
            if self.solver.sigma.fract() != 0.0 || d as f64 * self.solver.sigma < 2.0 {
                return Err(Error::Validation(format!(
                    "lens-coupled runs need integer sigma with d*sigma >= 2: sigma = {}, d = {d}",
                    self.solver.sigma
                )));
            }
            config.coupling = Coupling::Constant(1.0);
        }
        config.validate(d)?;
        if self.diagnostics.max_order < 1 {
            return Err(Error::Validation("diagnostics.max_order must be at least 1".into()));
        }
        let needs_hill = self.solver.coupling == CouplingKind::Lens
            || self.analysis.lens_compare.is_some()
            || self.analysis.hill_reference;
        if needs_hill && self.potential.hill_omega().is_none() {
            return Err(Error::Validation(
                "lens machinery needs an isotropic potential".into(),
            ));
        }
        if let Some(lc) = &self.analysis.lens_compare {
            if lc.times.iter().any(|&t| !(t > self.solver.t_start && t <= self.solver.t_end)) {
                return Err(Error::Validation("lens_compare times must lie in (t_start, t_end]".into()));
            }
            if self.solver.coupling == CouplingKind::Lens {
                return Err(Error::Validation("lens_compare runs from the direct frame".into()));
            }
        }
        if self.analysis.hill_reference && self.solver.coupling != CouplingKind::Zero {
            return Err(Error::Validation("hill_reference needs a linear run".into()));
        }
        if let Some(p) = self.analysis.period {
            if !(p > 0.0) {
                return Err(Error::Validation("period must be positive".into()));
            }
        }
        if let Some([a, b]) = self.analysis.fit_window {
            if !(b > a) {
                return Err(Error::Validation("fit_window must be increasing".into()));
            }
        }
        if let Some(p) = &self.perturbation {
            if !(p.amplitude >= 0.0) {
                return Err(Error::Validation("perturbation amplitude must be nonnegative".into()));
            }
        }
        Ok(())
    }
}
