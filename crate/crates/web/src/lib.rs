//! Browser bindings: Hill curves, a small 1D evolution and the growth ledger.

use nlsgrowth::bounds::{double_exp_ledger, LedgerParams};
use nlsgrowth::diagnostics::{Diagnostics, DiagnosticsConfig};
use nlsgrowth::lens::{solve_hill, uniform_mesh, HillState};
use nlsgrowth::{
    ComplexField, Coupling, Fourier, InitialCondition, PotentialSpec, SolverConfig, SpatialGrid, Stepper,
    TimeFunction,
};
use wasm_bindgen::prelude::*;

fn js(e: nlsgrowth::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `Ω = c/⟨t⟩^γ`, or the constant `c` when `gamma` is zero.
pub fn omega_for(c: f64, gamma: f64) -> TimeFunction {
    if gamma == 0.0 {
        TimeFunction::constant(c)
    } else {
        TimeFunction::power_decay(c, gamma)
    }
}

/// Interleaved `(t, ν, μ)` triples of the fundamental Hill pair on `[0, t1]`.
pub fn hill_samples(c: f64, gamma: f64, t1: f64, samples: usize) -> nlsgrowth::Result<Vec<f64>> {
    let samples = samples.max(2);
    let h = t1 / (samples - 1) as f64;
    let omega = omega_for(c, gamma);
    let mesh = uniform_mesh(0.0, t1, (h / 8.0).min(1e-2))?;
    // ν may vanish for confining Ω; the curve then stops at the last safe time
    let sol = match solve_hill(&omega, HillState::FUNDAMENTAL, &mesh) {
        Ok(s) => s,
        Err(nlsgrowth::Error::ZeroCrossing { t }) => {
            solve_hill(&omega, HillState::FUNDAMENTAL, &uniform_mesh(0.0, 0.95 * t, (h / 8.0).min(1e-2))?)?
        }
        Err(e) => return Err(e),
    };
    let (_, end) = sol.domain();
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let t = i as f64 * h;
        if t > end {
            break;
        }
        let s = sol.eval(t)?;
        out.extend([t, s.nu, s.mu]);
    }
    Ok(out)
}

/// Interleaved `(t, ln ln B_N)` pairs of the ledger with `w0 = f = 1`.
pub fn ledger_samples(c: f64, alpha: f64, t_max: f64, samples: usize) -> nlsgrowth::Result<Vec<f64>> {
    let params = LedgerParams {
        c,
        alpha,
        ..LedgerParams::default()
    };
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(2 * samples);
    for i in 1..=samples {
        let t = t_max * i as f64 / samples as f64;
        match double_exp_ledger(&params, &|_| 1.0, t, 1.0) {
            Ok(l) => out.extend([t, l.log_bound.ln()]),
            // the interval count outgrows the table well before the plot is interesting
            Err(nlsgrowth::Error::InvalidArgument(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn hill_curves(c: f64, gamma: f64, t1: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    hill_samples(c, gamma, t1, samples).map_err(js)
}

#[wasm_bindgen]
pub fn ledger_curve(c: f64, alpha: f64, t_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    ledger_samples(c, alpha, t_max, samples).map_err(js)
}

/// A 1D Gaussian evolved under `V = Ω(t)x²/2` with coupling `|u|^{2σ}u`.
#[wasm_bindgen]
pub struct Simulation {
    stepper: Stepper,
    diagnostics: Diagnostics,
    u: ComplexField,
    t: f64,
    dt: f64,
}

impl Simulation {
    pub fn create(sigma: f64, c: f64, gamma: f64, velocity: f64) -> nlsgrowth::Result<Simulation> {
        let grid = SpatialGrid::new(1, 512, 40.0)?;
        let potential = PotentialSpec::isotropic(omega_for(c, gamma));
        let linear = sigma <= 0.0;
        let config = SolverConfig {
            sigma: if linear { 1.0 } else { sigma },
            dt: 2e-3,
            coupling: if linear { Coupling::Zero } else { Coupling::Constant(1.0) },
            ..SolverConfig::default()
        };
        config.validate(1)?;
        let u = InitialCondition::Gaussian {
            center: vec![0.0],
            width: 1.0,
            velocity: vec![velocity],
        }
        .sample(&grid)?;
        let diagnostics = Diagnostics::new(
            Fourier::new(grid),
            potential.clone(),
            config.sigma,
            config.coupling.clone(),
            DiagnosticsConfig {
                max_order: 1,
                lr: Vec::new(),
            },
        )?;
        Ok(Simulation {
            stepper: Stepper::from_config(grid, potential, &config),
            diagnostics,
            u,
            t: 0.0,
            dt: config.dt,
        })
    }

    pub fn run(&mut self, steps: usize) -> nlsgrowth::Result<()> {
        self.stepper.advance(&mut self.u, self.t, self.dt, steps)?;
        self.t += steps as f64 * self.dt;
        Ok(())
    }

    pub fn sigma_norm(&self) -> nlsgrowth::Result<f64> {
        self.diagnostics.sigma_norm(&self.u, 1)
    }
}

#[wasm_bindgen]
impl Simulation {
    /// `sigma = 0` gives a linear run.
    #[wasm_bindgen(constructor)]
    pub fn new(sigma: f64, c: f64, gamma: f64, velocity: f64) -> Result<Simulation, JsError> {
        Simulation::create(sigma, c, gamma, velocity).map_err(js)
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        self.run(steps).map_err(js)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.u.grid().axis_nodes()
    }

    pub fn density(&self) -> Vec<f64> {
        self.u.values().iter().map(|z| z.norm_sqr()).collect()
    }

    /// `‖u‖ + ‖xu‖ + ‖∂u‖`
    pub fn sigma1(&self) -> Result<f64, JsError> {
        self.sigma_norm().map_err(js)
    }
}
