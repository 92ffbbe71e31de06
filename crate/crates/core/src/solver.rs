//! Strang split-step integration of `i u_t + ½Δu = V(t,x)u + c(t)|u|^{2σ}u`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostics, DiagnosticsConfig, DiagnosticsRecord};
use crate::error::{Error, GuardKind, Result};
use crate::fourier::Fourier;
use crate::grid::{ComplexField, SpatialGrid};
use crate::lens::LensMap;
use crate::potentials::PotentialSpec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Coefficient `c(t)` in front of the nonlinearity.
#[derive(Clone, Debug)]
pub enum Coupling {
    Zero,
    Constant(f64),
    /// `c = H(s)` of a lens map, with `s` the solver time.
    Lens(Arc<LensMap>),
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::Constant(1.0)
    }
}

impl Coupling {
    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            Coupling::Zero => Ok(0.0),
            Coupling::Constant(c) => Ok(*c),
            Coupling::Lens(m) => m.h(t),
        }
    }

    pub fn rate(&self, t: f64) -> Result<f64> {
        match self {
            Coupling::Lens(m) => m.h_dot(t),
            _ => Ok(0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coupling::Zero) || matches!(self, Coupling::Constant(c) if *c == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuardConfig {
    pub mass_drift: f64,
    pub gradient_factor: f64,
}

impl Default for GuardConfig {
    fn default() -> Self {
        Self {
            mass_drift: 1e-8,
            gradient_factor: 1e6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub sigma: f64,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub coupling: Coupling,
    /// `None` enables the 2/3 mask automatically when `σ ≥ 2`.
    pub dealias: Option<bool>,
    pub snapshot_times: Vec<f64>,
    pub diagnostics_stride: usize,
    pub diagnostics: DiagnosticsConfig,
    pub guards: GuardConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            dt: 1e-3,
            t_start: 0.0,
            t_end: 1.0,
            coupling: Coupling::default(),
            dealias: None,
            snapshot_times: Vec::new(),
            diagnostics_stride: 10,
            diagnostics: DiagnosticsConfig::default(),
            guards: GuardConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn dealias_enabled(&self) -> bool {
        self.dealias.unwrap_or(self.sigma >= 2.0)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.t_start) || !self.t_end.is_finite() || !self.t_start.is_finite() {
            return Err(Error::Validation(format!(
                "t_end ({}) must not precede t_start ({})",
                self.t_end, self.t_start
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Validation(format!("sigma must be positive, got {}", self.sigma)));
        }
        if dim >= 3 && self.sigma >= 2.0 / (dim as f64 - 2.0) {
            return Err(Error::Validation(format!(
                "energy-subcritical constraint sigma < 2/(d-2) violated: sigma = {}, d = {dim}",
                self.sigma
            )));
        }
        if let Coupling::Lens(_) = self.coupling {
            if self.sigma.fract() != 0.0 || dim as f64 * self.sigma < 2.0 {
                return Err(Error::Validation(format!(
                    "lens-coupled runs need integer sigma with d*sigma >= 2: sigma = {}, d = {dim}",
                    self.sigma
                )));
            }
        }
        if self.diagnostics_stride == 0 {
            return Err(Error::Validation("diagnostics_stride must be at least 1".into()));
        }
        if let Some(bad) = self
            .snapshot_times
            .iter()
            .find(|&&s| !(s >= self.t_start && s <= self.t_end))
        {
            return Err(Error::Validation(format!(
                "snapshot time {bad} outside [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }
}

/// Output of [`evolve`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<(f64, ComplexField)>,
    pub final_state: ComplexField,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Largest `|M(t) − M(0)| / M(0)` over the records.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records[0].mass;
        if m0 == 0.0 {
            return 0.0;
        }
        self.records
            .iter()
            .map(|r| (r.mass - m0).abs() / m0)
            .fold(0.0, f64::max)
    }
}

/// One split-step integrator bound to a grid, potential and coupling.
#[derive(Clone, Debug)]
pub struct Stepper {
    fourier: Fourier,
    potential: PotentialSpec,
    sigma: f64,
    coupling: Coupling,
    mask: Option<Vec<f64>>,
    k2: Vec<f64>,
    products: Vec<Vec<f64>>,
    cached: Option<(f64, Vec<Complex64>)>,
}

fn for_each_mut<T: Send>(v: &mut [T], f: impl Fn(usize, &mut T) + Sync + Send) {
    #[cfg(feature = "parallel")]
    {
        if v.len() >= 1 << 15 {
            v.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
    }
    v.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

impl Stepper {
    pub fn new(
        fourier: Fourier,
        potential: PotentialSpec,
        sigma: f64,
        coupling: Coupling,
        dealias: bool,
    ) -> Self {
        let grid = *fourier.grid();
        let d = grid.dim();
        let n = grid.n() as i64;
        let mut k2 = vec![0.0; grid.len()];
        grid.for_each_mode(|i, xi| k2[i] = xi.iter().map(|k| k * k).sum());
        let mask = dealias.then(|| {
            (0..grid.len())
                .map(|i| {
                    let ix = grid.unravel(i);
                    let keep = ix[..d].iter().all(|&k| {
                        let k = k as i64;
                        let signed = if k < n / 2 { k } else { k - n };
                        3 * signed.abs() <= n
                    });
                    if keep {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        });
        let mut products = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let mut p = vec![0.0; grid.len()];
                grid.for_each_node(|i, x| p[i] = x[a] * x[b]);
                products.push(p);
            }
        }
        Self {
            fourier,
            potential,
            sigma,
            coupling,
            mask,
            k2,
            products,
            cached: None,
        }
    }

    pub fn from_config(grid: SpatialGrid, potential: PotentialSpec, config: &SolverConfig) -> Self {
        Self::new(
            Fourier::with_max_order(grid, config.diagnostics.max_order.max(2)),
            potential,
            config.sigma,
            config.coupling.clone(),
            config.dealias_enabled(),
        )
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    fn potential_values(&self, t: f64) -> Result<Vec<f64>> {
        let grid = *self.fourier.grid();
        let d = grid.dim();
        match self.potential.quadratic_form(t, d)? {
            Some(q) => {
                let mut v = vec![0.0; grid.len()];
                for (ab, p) in self.products.iter().enumerate() {
                    let c = 0.5 * q[ab];
                    if c != 0.0 {
                        for (vi, pi) in v.iter_mut().zip(p) {
                            *vi += c * pi;
                        }
                    }
                }
                Ok(v)
            }
            None => Ok(self.potential.evaluate(t, &grid)?.into_values()),
        }
    }

    /// `u ← u · exp(−i h (V(t) + c(t)|u|^{2σ}))`.
    fn phase(&self, u: &mut [Complex64], t: f64, h: f64) -> Result<()> {
        let v = self.potential_values(t)?;
        let c = self.coupling.value(t)?;
        let sigma = self.sigma;
        let int_sigma = (sigma.fract() == 0.0).then_some(sigma as i32);
        for_each_mut(u, |i, z| {
            let mut w = v[i];
            if c != 0.0 {
                let a = z.norm_sqr();
                w += c * match int_sigma {
                    Some(s) => a.powi(s),
                    None => a.powf(sigma),
                };
            }
            *z *= Complex64::from_polar(1.0, -h * w);
        });
        Ok(())
    }

    fn kinetic_table(&mut self, dt: f64) -> Vec<Complex64> {
        if let Some((cdt, table)) = &self.cached {
            if *cdt == dt {
                return table.clone();
            }
        }
        let table: Vec<Complex64> = self
            .k2
            .iter()
            .enumerate()
            .map(|(i, k2)| {
                let m = self.mask.as_ref().map_or(1.0, |m| m[i]);
                Complex64::from_polar(m, -0.5 * dt * k2)
            })
            .collect();
        self.cached = Some((dt, table.clone()));
        table
    }

    /// One Strang step from `t` to `t + dt`; `dt` may be negative.
    pub fn step(&mut self, u: &mut ComplexField, t: f64, dt: f64) -> Result<()> {
        if u.grid() != self.fourier.grid() {
            return Err(Error::GridMismatch);
        }
        let table = self.kinetic_table(dt);
        let vals = u.values_mut();
        self.phase(vals, t, 0.5 * dt)?;
        self.fourier.forward_in_place(vals);
        for_each_mut(vals, |i, z| *z *= table[i]);
        self.fourier.inverse_in_place(vals);
        self.phase(vals, t + dt, 0.5 * dt)?;
        Ok(())
    }

    /// Applies `steps` uniform steps of size `dt` starting at `t`.
    pub fn advance(&mut self, u: &mut ComplexField, t: f64, dt: f64, steps: usize) -> Result<()> {
        for k in 0..steps {
            self.step(u, t + k as f64 * dt, dt)?;
        }
        Ok(())
    }
}

fn check_guards(
    rec: &DiagnosticsRecord,
    mass0: f64,
    grad0: f64,
    guards: &GuardConfig,
) -> Result<()> {
    if !(rec.mass.is_finite() && rec.kinetic.is_finite()) {
        return Err(Error::Guard {
            t: rec.t,
            kind: GuardKind::NonFinite,
            detail: "mass or kinetic energy is not finite".into(),
        });
    }
    if mass0 > 0.0 {
        let drift = (rec.mass - mass0).abs() / mass0;
        if drift > guards.mass_drift {
            return Err(Error::Guard {
                t: rec.t,
                kind: GuardKind::MassDrift,
                detail: format!("relative drift {drift:e} > {:e}", guards.mass_drift),
            });
        }
    }
    let grad = (2.0 * rec.kinetic).sqrt();
    let limit = guards.gradient_factor * grad0.max(f64::MIN_POSITIVE);
    if grad0 > 0.0 && grad > limit {
        return Err(Error::Guard {
            t: rec.t,
            kind: GuardKind::GradientBlowUp,
            detail: format!("|grad u| = {grad:e} exceeds {limit:e}"),
        });
    }
    Ok(())
}

/// Integrates from `config.t_start` to `config.t_end`, recording diagnostics
/// every `diagnostics_stride` steps, at snapshot times and at the end.
pub fn evolve(u0: &ComplexField, potential: &PotentialSpec, config: &SolverConfig) -> Result<Trajectory> {
    let grid = *u0.grid();
    config.validate(grid.dim())?;
    potential.validate(grid.dim())?;
    let mut stepper = Stepper::from_config(grid, potential.clone(), config);
    let diag = Diagnostics::new(
        stepper.fourier().clone(),
        potential.clone(),
        config.sigma,
        config.coupling.clone(),
        config.diagnostics.clone(),
    )?;
    let mut u = u0.clone();
    let first = diag.compute_record(&u, config.t_start)?;
    let mass0 = first.mass;
    let grad0 = (2.0 * first.kinetic).sqrt();
    let mut records = vec![first];
    let mut snapshots = Vec::new();

    let mut events: Vec<f64> = config.snapshot_times.clone();
    events.push(config.t_end);
    events.sort_by(f64::total_cmp);
    events.dedup();
    let mut next_event = 0;
    while next_event < events.len() && events[next_event] <= config.t_start {
        if events[next_event] == config.t_start && config.snapshot_times.contains(&config.t_start) {
            snapshots.push((config.t_start, u.clone()));
        }
        next_event += 1;
    }

    let dt = config.dt;
    let eps = 1e-9 * dt;
    let mut t = config.t_start;
    let mut k: usize = 0;
    let mut steps = 0;
    while next_event < events.len() {
        let nominal = config.t_start + (k + 1) as f64 * dt;
        let event = events[next_event];
        let (t_next, hits_event, completes_step) = if event <= nominal + eps {
            (event, true, event >= nominal - eps)
        } else {
            (nominal, false, true)
        };
        stepper.step(&mut u, t, t_next - t)?;
        steps += 1;
        t = t_next;
        if completes_step {
            k += 1;
        }
        if !u.values().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Guard {
                t,
                kind: GuardKind::NonFinite,
                detail: "state contains NaN or Inf".into(),
            });
        }
        let stride_hit = completes_step && k % config.diagnostics_stride == 0;
        if hits_event || stride_hit {
            let rec = diag.compute_record(&u, t)?;
            check_guards(&rec, mass0, grad0, &config.guards)?;
            records.push(rec);
        }
        if hits_event {
            if config.snapshot_times.iter().any(|&s| s == event) {
                snapshots.push((t, u.clone()));
            }
            next_event += 1;
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_state: u,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `exp(−|x−c|²/(2w²) + i v·x)`, normalized to unit mass.
    Gaussian {
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "unit")]
        width: f64,
        #[serde(default)]
        velocity: Vec<f64>,
    },
    /// `A exp(i π/L k·x)` for the integer mode vector `k`.
    PlaneWave { amplitude: f64, mode: Vec<i64> },
    #[serde(skip)]
    Custom(CustomInitial),
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone)]
pub struct CustomInitial(pub Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>);

impl std::fmt::Debug for CustomInitial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CustomInitial(..)")
    }
}

impl PartialEq for CustomInitial {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl InitialCondition {
    pub fn gaussian(dim: usize, width: f64) -> Self {
        InitialCondition::Gaussian {
            center: vec![0.0; dim],
            width,
            velocity: vec![0.0; dim],
        }
    }

    pub fn sample(&self, grid: &SpatialGrid) -> Result<ComplexField> {
        let d = grid.dim();
        let pad = |v: &[f64]| -> Result<Vec<f64>> {
            match v.len() {
                0 => Ok(vec![0.0; d]),
                l if l == d => Ok(v.to_vec()),
                l => Err(Error::Validation(format!(
                    "vector of length {l} given for a {d}-dimensional grid"
                ))),
            }
        };
        match self {
            InitialCondition::Gaussian {
                center,
                width,
                velocity,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::Validation("gaussian width must be positive".into()));
                }
                let c = pad(center)?;
                let v = pad(velocity)?;
                let mut f = ComplexField::from_fn(*grid, |x| {
                    let mut r2 = 0.0;
                    let mut phase = 0.0;
                    for a in 0..d {
                        r2 += (x[a] - c[a]).powi(2);
                        phase += v[a] * x[a];
                    }
                    Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
                })?;
                let m = f.mass();
                if m == 0.0 {
                    return Err(Error::Validation("gaussian vanishes on the grid".into()));
                }
                f.scale(Complex64::new(1.0 / m.sqrt(), 0.0));
                Ok(f)
            }
            InitialCondition::PlaneWave { amplitude, mode } => {
                if mode.len() != d {
                    return Err(Error::Validation(format!(
                        "plane-wave mode has {} components for a {d}-dimensional grid",
                        mode.len()
                    )));
                }
                let base = std::f64::consts::PI / grid.half_width();
                ComplexField::from_fn(*grid, |x| {
                    let ph: f64 = x.iter().zip(mode).map(|(xa, &k)| base * k as f64 * xa).sum();
                    Complex64::from_polar(*amplitude, ph)
                })
            }
            InitialCondition::Custom(f) => ComplexField::from_fn(*grid, |x| (f.0)(x)),
        }
    }
}

/// Adds a seeded relative perturbation `ε · |u| · (ξ₁ + iξ₂)`, `ξ ~ U[-1, 1]`.
pub fn perturb(u: &mut ComplexField, amplitude: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for z in u.values_mut() {
        let a: f64 = rng.gen_range(-1.0..=1.0);
        let b: f64 = rng.gen_range(-1.0..=1.0);
        *z += Complex64::new(a, b) * (amplitude * z.norm());
    }
}
