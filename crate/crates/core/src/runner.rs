//! Scenario execution: evolution, analyses, artifacts and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{gronwall_envelope, GronwallReport};
use crate::diagnostics::{
    decay_check, energy_rate_check, pseudo_energy_rate_check, to_csv, DecayReport, DiagnosticsRecord, RateCheck,
    ENERGY_RATE_CONSTANT, RATE_TOLERANCE_CONSTANT,
};
use crate::error::{Error, Result};
use crate::fit::{classify, growth_fit, window, Classification, GrowthModel};
use crate::fourier::Fourier;
use crate::grid::{ComplexField, SpatialGrid};
use crate::lens::{
    build_lens_map, construct_scattering_pair, lens_forward, lens_inverse, solve_hill, uniform_mesh, HillSolution,
    HillState, LensMap,
};
use crate::potentials::{PotentialSpec, TimeFunction};
use crate::scattering::{asymptotic_profile_error, cauchy_convergence, repulsive_sigma1, CauchyReport, ScatteringVerdict};
use crate::scenario::{CouplingKind, Scenario};
use crate::solver::{evolve, perturb, Coupling, Trajectory};

pub const MASS_DRIFT_LIMIT: f64 = 1e-10;
pub const LENS_COMPARE_LIMIT: f64 = 1e-4;
pub const PERIOD_LIMIT: f64 = 1e-6;
pub const BOUNDARY_WARNING: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    /// Verdicts are reported but never fail the run.
    #[default]
    Fast,
    /// Any failed verdict fails the run.
    Strict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitOutcome {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LensComparison {
    pub times: Vec<f64>,
    pub lens_times: Vec<f64>,
    /// Relative `L²` distance between the direct state and the lens image.
    pub errors: Vec<f64>,
    pub max_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HillReference {
    pub times: Vec<f64>,
    pub sigma1_closed_form: Vec<f64>,
    pub sigma1_measured: Vec<f64>,
    pub max_relative_gap: f64,
    pub rate_closed_form: Option<f64>,
    pub rate_measured: Option<f64>,
    /// Rate of the large-time repulsive profile, for constant `Ω < 0`.
    pub rate_repulsive_profile: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodCheck {
    pub period: f64,
    pub pairs: Vec<(f64, f64)>,
    pub max_defect: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringAnalysis {
    pub cauchy: CauchyReport,
    /// `(t, relative L² distance to the free asymptotic profile)`.
    pub profile_errors: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub sigma: f64,
    pub dt: f64,
    pub steps: usize,
    pub records: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub mass_drift: f64,
    pub max_boundary_ratio: f64,
    pub boundary_warning: bool,
    pub final_record: DiagnosticsRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gronwall: Option<GronwallReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudo_energy_rate: Option<RateCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_rate: Option<RateCheck>,
    pub fits: BTreeMap<String, FitOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scattering: Option<ScatteringAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lens_compare: Option<LensComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hill_reference: Option<HillReference>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<PeriodCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayReport>,
    pub verdicts: Vec<Verdict>,
}

impl RunSummary {
    pub fn failed_verdicts(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
    pub csv: String,
}

/// Named column of the time-series CSV.
pub fn column(records: &[DiagnosticsRecord], name: &str, lr_labels: &[String]) -> Option<Vec<f64>> {
    let indexed = |prefix: &str, pick: fn(&DiagnosticsRecord) -> &Vec<f64>| -> Option<Vec<f64>> {
        let k: usize = name.strip_prefix(prefix)?.parse().ok()?;
        records.iter().map(|r| pick(r).get(k).copied()).collect()
    };
    match name {
        "t" => Some(records.iter().map(|r| r.t).collect()),
        "mass" => Some(records.iter().map(|r| r.mass).collect()),
        "E" => Some(records.iter().map(|r| r.energy).collect()),
        "pseudoE" => Some(records.iter().map(|r| r.pseudo_energy).collect()),
        "Jnorm" => Some(records.iter().map(|r| r.j_norm).collect()),
        "kinetic" => Some(records.iter().map(|r| r.kinetic).collect()),
        "y" => records.iter().map(|r| r.y).collect(),
        _ => {
            if let Some(i) = lr_labels.iter().position(|l| l == name) {
                return Some(records.iter().map(|r| r.lr_norms[i]).collect());
            }
            if name.starts_with("sigma") {
                indexed("sigma", |r| &r.sigma_norms)
            } else if name.starts_with("mom") {
                indexed("mom", |r| &r.momenta)
            } else if name.starts_with('h') {
                indexed("h", |r| &r.hk_norms)
            } else {
                None
            }
        }
    }
}

/// Hill pair for `Ω` on `[t0, t1]`: the pair normalized at infinity when `Ω`
/// decays like a power (and the scenario configures one), else the
/// fundamental solution at `t0`.
pub fn hill_for(sc: &Scenario, t0: f64, t1: f64) -> Result<HillSolution> {
    let omega = sc
        .potential
        .hill_omega()
        .ok_or_else(|| Error::Validation("lens machinery needs an isotropic potential".into()))?;
    if let (Some(settings), Some(_)) = (&sc.lens, omega.decay_envelope()) {
        let mut s = settings.clone();
        if t0 < s.t_match {
            s.extend_to = Some(t0);
        }
        if t1 > s.t_max {
            return Err(Error::Validation(format!(
                "lens.t_max = {} is below the requested time {t1}",
                s.t_max
            )));
        }
        return Ok(construct_scattering_pair(&omega, &s)?.solution);
    }
    let mesh = uniform_mesh(t0, t1.max(t0 + 1e-3), 1e-3)?;
    solve_hill(&omega, HillState::FUNDAMENTAL, &mesh)
}

pub fn lens_map_for(sc: &Scenario, t0: f64, t1: f64) -> Result<Arc<LensMap>> {
    let hill = hill_for(sc, t0, t1)?;
    Ok(Arc::new(build_lens_map(hill, sc.grid.dim, sc.solver.sigma)?))
}

fn initial_state(sc: &Scenario, grid: &SpatialGrid) -> Result<ComplexField> {
    let mut u0 = sc.initial.sample(grid)?;
    if let Some(p) = &sc.perturbation {
        perturb(&mut u0, p.amplitude, sc.seed);
    }
    Ok(u0)
}

/// Runs the scenario and every enabled analysis.
pub fn run(sc: &Scenario) -> Result<RunOutcome> {
    sc.validate()?;
    let grid = sc.grid()?;
    let fourier = Fourier::new(grid);
    let u0 = initial_state(sc, &grid)?;

    let (coupling, potential) = match sc.solver.coupling {
        CouplingKind::Lens => {
            let map = lens_map_for(sc, 0.0, sc.lens.as_ref().map_or(sc.solver.t_end, |l| l.t_max))?;
            (Coupling::Lens(map), PotentialSpec::Zero)
        }
        _ => (sc.basic_coupling(), sc.potential.clone()),
    };
    let mut config = sc.solver_config(coupling);
    if let Some(lc) = &sc.analysis.lens_compare {
        config.snapshot_times.extend(lc.times.iter().copied());
        config.snapshot_times.sort_by(f64::total_cmp);
        config.snapshot_times.dedup();
    }
    let traj = evolve(&u0, &potential, &config)?;
    let records = &traj.records;
    let last = records.last().expect("evolve records the initial state").clone();
    let lr_labels: Vec<String> = sc.diagnostics.lr.iter().map(|r| r.label()).collect();
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let mut verdicts = Vec::new();

    let mass_drift = traj.mass_drift();
    verdicts.push(Verdict {
        name: "mass".into(),
        passed: mass_drift <= MASS_DRIFT_LIMIT,
        detail: format!("relative drift {mass_drift:.3e} (limit {MASS_DRIFT_LIMIT:e})"),
    });
    let max_boundary_ratio = records.iter().map(|r| r.boundary_ratio).fold(0.0, f64::max);

    let gronwall = if sc.analysis.gronwall {
        let pseudo: Vec<f64> = records.iter().map(|r| r.pseudo_energy).collect();
        let s1: Vec<f64> = records.iter().map(|r| r.sigma_norms[1]).collect();
        let g = gronwall_envelope(&t, &pseudo, Some((&s1, records[0].mass, grid.dim())))?;
        verdicts.push(Verdict {
            name: "gronwall".into(),
            passed: g.envelope_holds && g.sigma_bound_holds != Some(false),
            detail: format!("C0_min = {:.6e}", g.c0_min),
        });
        Some(g)
    } else {
        None
    };

    let spacing = sc.solver.diagnostics_stride as f64 * sc.solver.dt;
    let (pseudo_energy_rate, energy_rate) = if sc.analysis.rate_checks && records.len() >= 3 {
        let p = pseudo_energy_rate_check(records, spacing, RATE_TOLERANCE_CONSTANT).ok();
        let e = energy_rate_check(records, spacing, ENERGY_RATE_CONSTANT).ok();
        for (name, c) in [("pseudo_energy_rate", &p), ("energy_rate", &e)] {
            if let Some(c) = c {
                verdicts.push(Verdict {
                    name: name.into(),
                    passed: c.passes,
                    detail: format!("max defect {:.3e} at t = {} (tol {:.1e})", c.max_defect, c.at, c.tolerance),
                });
            }
        }
        (p, e)
    } else {
        (None, None)
    };

    let mut fits = BTreeMap::new();
    for name in &sc.analysis.fits {
        let outcome = match column(records, name, &lr_labels) {
            None => FitOutcome {
                classification: None,
                error: Some(format!("unknown column '{name}'")),
            },
            Some(y) => {
                let (lo, hi) = sc.analysis.fit_window.map_or((f64::MIN_POSITIVE, f64::INFINITY), |w| (w[0], w[1]));
                let (tw, yw) = window(&t, &y, lo.max(f64::MIN_POSITIVE), hi);
                match classify(&tw, &yw) {
                    Ok(c) => FitOutcome {
                        classification: Some(c),
                        error: None,
                    },
                    Err(e) => FitOutcome {
                        classification: None,
                        error: Some(e.to_string()),
                    },
                }
            }
        };
        fits.insert(name.clone(), outcome);
    }

    let scattering = if sc.analysis.scattering {
        let cauchy = cauchy_convergence(&fourier, &traj.snapshots)?;
        let mut profile_errors = Vec::new();
        if let Some(up) = &cauchy.u_plus {
            for (ts, u) in &traj.snapshots {
                if *ts >= 1.0 {
                    profile_errors.push((*ts, asymptotic_profile_error(&fourier, u, *ts, up)?));
                }
            }
        }
        if let Some(expect) = sc.analysis.expect_scattering {
            let got = cauchy.verdict == ScatteringVerdict::Scattering;
            verdicts.push(Verdict {
                name: "scattering".into(),
                passed: got == expect,
                detail: format!("verdict {:?}, expected scattering = {expect}", cauchy.verdict),
            });
        }
        Some(ScatteringAnalysis {
            cauchy,
            profile_errors,
        })
    } else {
        None
    };

    let lens_compare = match &sc.analysis.lens_compare {
        Some(lc) => {
            let c = compare_with_lens(sc, &fourier, &u0, &traj, &lc.times, lc.dt.unwrap_or(sc.solver.dt))?;
            verdicts.push(Verdict {
                name: "lens_compare".into(),
                passed: c.max_error <= LENS_COMPARE_LIMIT,
                detail: format!("max relative L2 error {:.3e}", c.max_error),
            });
            Some(c)
        }
        None => None,
    };

    let hill_reference = if sc.analysis.hill_reference {
        Some(hill_reference(sc, &fourier, &u0, records)?)
    } else {
        None
    };

    let period = match sc.analysis.period {
        Some(p) => {
            let c = period_check(records, p);
            verdicts.push(Verdict {
                name: "period".into(),
                passed: !c.pairs.is_empty() && c.max_defect <= PERIOD_LIMIT,
                detail: format!("{} pairs, max defect {:.3e}", c.pairs.len(), c.max_defect),
            });
            Some(c)
        }
        None => None,
    };

    let decay = match sc.analysis.decay_r {
        Some(r) => Some(decay_check(records, &sc.diagnostics, grid.dim(), r)?),
        None => None,
    };

    let summary = RunSummary {
        name: sc.name.clone(),
        dim: grid.dim(),
        n: grid.n(),
        half_width: grid.half_width(),
        sigma: sc.solver.sigma,
        dt: sc.solver.dt,
        steps: traj.steps,
        records: records.len(),
        t_start: sc.solver.t_start,
        t_end: sc.solver.t_end,
        mass_drift,
        max_boundary_ratio,
        boundary_warning: max_boundary_ratio > BOUNDARY_WARNING,
        final_record: last,
        gronwall,
        pseudo_energy_rate,
        energy_rate,
        fits,
        scattering,
        lens_compare,
        hill_reference,
        period,
        decay,
        verdicts,
    };
    let csv = to_csv(&sc.diagnostics, records);
    Ok(RunOutcome {
        summary,
        trajectory: traj,
        csv,
    })
}

fn compare_with_lens(
    sc: &Scenario,
    fourier: &Fourier,
    u0: &ComplexField,
    direct: &Trajectory,
    times: &[f64],
    dt: f64,
) -> Result<LensComparison> {
    let t0 = sc.solver.t_start;
    let t_last = times.iter().copied().fold(t0, f64::max);
    let map = lens_map_for(sc, t0, t_last)?;
    let v0 = lens_inverse(fourier, u0, &map, t0)?;
    let s0 = map.zeta(t0)?;
    let lens_times: Vec<f64> = times.iter().map(|&t| map.zeta(t)).collect::<Result<_>>()?;
    let mut config = sc.solver_config(Coupling::Lens(map.clone()));
    config.t_start = s0;
    config.t_end = lens_times.iter().copied().fold(s0, f64::max);
    config.dt = dt;
    config.snapshot_times = lens_times.clone();
    config.diagnostics_stride = usize::MAX / 2;
    let lensed = evolve(&v0, &PotentialSpec::Zero, &config)?;
    let mut errors = Vec::with_capacity(times.len());
    for (&t, &s) in times.iter().zip(&lens_times) {
        let u = direct
            .snapshots
            .iter()
            .find(|(ts, _)| *ts == t)
            .map(|p| &p.1)
            .ok_or_else(|| Error::Validation(format!("no direct snapshot at t = {t}")))?;
        let v = lensed
            .snapshots
            .iter()
            .find(|(ts, _)| *ts == s)
            .map(|p| &p.1)
            .ok_or_else(|| Error::Validation(format!("no lens-frame snapshot at s = {s}")))?;
        let image = lens_forward(fourier, v, &map, t)?;
        errors.push(image.l2_distance(u)? / u.l2_norm());
    }
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(LensComparison {
        times: times.to_vec(),
        lens_times,
        errors,
        max_error,
    })
}

/// Σ¹ of a linear isotropic run from the Heisenberg flow
/// `x(t) = ν x₀ + μ p₀`, `p(t) = ν̇ x₀ + μ̇ p₀`.
fn hill_reference(
    sc: &Scenario,
    fourier: &Fourier,
    u0: &ComplexField,
    records: &[DiagnosticsRecord],
) -> Result<HillReference> {
    let grid = *fourier.grid();
    let omega = sc.potential.hill_omega().expect("validated");
    let t0 = sc.solver.t_start;
    let mesh = uniform_mesh(t0, sc.solver.t_end.max(t0 + 1e-3), 1e-3)?;
    let hill = solve_hill(&omega, HillState::FUNDAMENTAL, &mesh)?;
    let grads = fourier.gradient(u0)?;
    let mut moments = Vec::with_capacity(grid.dim());
    for (a, du) in grads.iter().enumerate() {
        let xa = grid.coordinate(a);
        let xu = ComplexField::new(grid, u0.values().iter().zip(&xa).map(|(z, x)| z * x).collect())?;
        let x2 = xu.mass();
        let p2 = du.mass();
        let cross = 2.0 * xu.l2_inner(du)?.im;
        moments.push((x2, p2, cross));
    }
    let m0 = u0.l2_norm();
    let mut times = Vec::new();
    let mut closed = Vec::new();
    let mut measured = Vec::new();
    for r in records {
        let st = hill.eval(r.t)?;
        let mut s = m0;
        for &(x2, p2, c) in &moments {
            s += (st.nu * st.nu * x2 + st.mu * st.mu * p2 + st.nu * st.mu * c).max(0.0).sqrt();
            s += (st.nu_dot * st.nu_dot * x2 + st.mu_dot * st.mu_dot * p2 + st.nu_dot * st.mu_dot * c)
                .max(0.0)
                .sqrt();
        }
        times.push(r.t);
        closed.push(s);
        measured.push(r.sigma_norms[1]);
    }
    let max_relative_gap = closed
        .iter()
        .zip(&measured)
        .map(|(c, m)| (c - m).abs() / c)
        .fold(0.0, f64::max);
    let (lo, hi) = sc.analysis.fit_window.map_or((f64::MIN_POSITIVE, f64::INFINITY), |w| (w[0], w[1]));
    let (tw, cw) = window(&times, &closed, lo, hi);
    let (_, mw) = window(&times, &measured, lo, hi);
    let rate = |y: &[f64]| growth_fit(&tw, y, GrowthModel::Exp).ok().map(|f| f.rate);
    let rate_repulsive_profile = match omega.value(t0) {
        Ok(w) if matches!(omega, TimeFunction::Constant { .. }) && w < 0.0 && tw.len() >= crate::fit::MIN_POINTS => {
            let w = (-w).sqrt();
            let prof: Vec<f64> = tw
                .iter()
                .map(|&s| repulsive_sigma1(fourier, u0, s - t0, w))
                .collect::<Result<_>>()?;
            growth_fit(&tw, &prof, GrowthModel::Exp).ok().map(|f| f.rate)
        }
        _ => None,
    };
    Ok(HillReference {
        rate_closed_form: rate(&cw),
        rate_measured: rate(&mw),
        rate_repulsive_profile,
        times,
        sigma1_closed_form: closed,
        sigma1_measured: measured,
        max_relative_gap,
    })
}

fn record_values(r: &DiagnosticsRecord) -> Vec<f64> {
    let mut v = vec![r.mass, r.energy, r.pseudo_energy, r.kinetic, r.potential_term, r.nonlinear_term];
    v.extend(&r.sigma_norms);
    v.extend(&r.momenta);
    v.extend(&r.hk_norms);
    v.extend(&r.lr_norms);
    v
}

/// Compares every pair of records `period` apart.
pub fn period_check(records: &[DiagnosticsRecord], period: f64) -> PeriodCheck {
    let mut pairs = Vec::new();
    let mut max_defect: f64 = 0.0;
    for a in records {
        let target = a.t + period;
        if let Some(b) = records.iter().find(|b| (b.t - target).abs() <= 1e-9 * target.abs().max(1.0)) {
            let d = record_values(a)
                .iter()
                .zip(record_values(b))
                .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
                .fold(0.0, f64::max);
            max_defect = max_defect.max(d);
            pairs.push((a.t, b.t));
        }
    }
    PeriodCheck {
        period,
        pairs,
        max_defect,
    }
}

fn snapshot_csv(u: &ComplexField) -> String {
    let grid = u.grid();
    let mut s = String::new();
    for a in 0..grid.dim() {
        let _ = write!(s, "x{},", a + 1);
    }
    s.push_str("re,im\n");
    let vals = u.values();
    grid.for_each_node(|i, x| {
        for xa in x {
            let _ = write!(s, "{xa:.16e},");
        }
        let z: Complex64 = vals[i];
        let _ = writeln!(s, "{:.16e},{:.16e}", z.re, z.im);
    });
    s
}

/// Writes `timeseries.csv`, `summary.json` and `snapshots/t_<t>.csv`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("timeseries.csv"), &outcome.csv)?;
    std::fs::write(dir.join("summary.json"), outcome.summary.to_json()?)?;
    if !outcome.trajectory.snapshots.is_empty() {
        let sd = dir.join("snapshots");
        std::fs::create_dir_all(&sd)?;
        for (t, u) in &outcome.trajectory.snapshots {
            std::fs::write(sd.join(format!("t_{t:.6}.csv")), snapshot_csv(u))?;
        }
    }
    Ok(())
}

/// Output directory: explicit override, else the scenario's, else `out/<name>`.
pub fn output_dir(sc: &Scenario, override_dir: Option<&Path>) -> PathBuf {
    match override_dir {
        Some(d) => d.join(&sc.name),
        None => sc
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&sc.name)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub name: String,
    pub gamma: Option<f64>,
    pub sigma: f64,
    pub status: String,
    pub h1_class: Option<GrowthModel>,
    pub h1_rate: Option<f64>,
    pub mom1_class: Option<GrowthModel>,
    pub mom1_rate: Option<f64>,
    pub mass_drift: Option<f64>,
}

/// Distinct `(γ, σ)` cells in input order.
pub fn sweep_cells(base: &Scenario, gammas: &[f64], sigmas: &[f64]) -> Vec<(Option<f64>, f64)> {
    let gs: Vec<Option<f64>> = if gammas.is_empty() {
        vec![base.gamma()]
    } else {
        gammas.iter().map(|&g| Some(g)).collect()
    };
    let ss: Vec<f64> = if sigmas.is_empty() {
        vec![base.solver.sigma]
    } else {
        sigmas.to_vec()
    };
    let mut cells: Vec<(Option<f64>, f64)> = Vec::new();
    for g in &gs {
        for s in &ss {
            let key = (g.map(f64::to_bits), s.to_bits());
            if !cells.iter().any(|(cg, cs)| (cg.map(f64::to_bits), cs.to_bits()) == key) {
                cells.push((*g, *s));
            }
        }
    }
    cells
}

fn run_cell(base: &Scenario, gamma: Option<f64>, sigma: f64, out_dir: Option<&Path>) -> SweepRow {
    let mut sc = base.clone();
    sc.solver.sigma = sigma;
    let mut name = base.name.clone();
    if let Some(g) = gamma {
        name.push_str(&format!("-g{g}"));
    }
    name.push_str(&format!("-s{sigma}"));
    sc.name = name.clone();
    let mut row = SweepRow {
        name,
        gamma,
        sigma,
        status: "ok".into(),
        h1_class: None,
        h1_rate: None,
        mom1_class: None,
        mom1_rate: None,
        mass_drift: None,
    };
    let result = (|| -> Result<RunOutcome> {
        if let Some(g) = gamma {
            sc.set_gamma(g)?;
        }
        let outcome = run(&sc)?;
        if let Some(dir) = out_dir {
            write_outputs(&outcome, &dir.join(&sc.name))?;
        }
        Ok(outcome)
    })();
    match result {
        Ok(o) => {
            let lr: Vec<String> = sc.diagnostics.lr.iter().map(|r| r.label()).collect();
            let recs = &o.trajectory.records;
            let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
            let (lo, hi) = sc.analysis.fit_window.map_or((f64::MIN_POSITIVE, f64::INFINITY), |w| (w[0], w[1]));
            let pick = |col: &str| -> Option<(GrowthModel, f64)> {
                let y = column(recs, col, &lr)?;
                let (tw, yw) = window(&t, &y, lo, hi);
                let c = classify(&tw, &yw).ok()?;
                let rate = c.fit(GrowthModel::Poly).map_or(0.0, |f| f.rate);
                Some((c.best, rate))
            };
            if let Some((c, r)) = pick("h1") {
                row.h1_class = Some(c);
                row.h1_rate = Some(r);
            }
            if let Some((c, r)) = pick("mom1") {
                row.mom1_class = Some(c);
                row.mom1_rate = Some(r);
            }
            row.mass_drift = Some(o.summary.mass_drift);
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Runs every distinct cell, up to `jobs` at a time. Failed cells are
/// recorded in their row and do not stop the sweep.
pub fn sweep(base: &Scenario, gammas: &[f64], sigmas: &[f64], jobs: usize, out_dir: Option<&Path>) -> Vec<SweepRow> {
    let cells = sweep_cells(base, gammas, sigmas);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            return pool.install(|| {
                cells
                    .par_iter()
                    .map(|&(g, s)| run_cell(base, g, s, out_dir))
                    .collect()
            });
        }
    }
    let _ = jobs;
    cells.iter().map(|&(g, s)| run_cell(base, g, s, out_dir)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6e}"));
    let cls = |c: Option<GrowthModel>| c.map_or(String::new(), |m| m.label().to_string());
    let mut s = String::from("name,gamma,sigma,status,h1_class,h1_poly_exponent,mom1_class,mom1_poly_exponent,mass_drift\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.name,
            r.gamma.map_or(String::new(), |g| g.to_string()),
            r.sigma,
            r.status.replace(',', ";"),
            cls(r.h1_class),
            opt(r.h1_rate),
            cls(r.mom1_class),
            opt(r.mom1_rate),
            opt(r.mass_drift)
        );
    }
    s
}
