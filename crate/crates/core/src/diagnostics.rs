//! Per-slice functionals (mass, energies, Σᵏ norms, moments, `J`-norm) and
//! numerical checks of their evolution identities.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::{moment_weight, multi_indices_up_to, ComplexField, LpExponent};
use crate::potentials::PotentialSpec;
use crate::solver::Coupling;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsConfig {
    /// Highest Σᵏ order `K`.
    pub max_order: usize,
    pub lr: Vec<LpExponent>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            max_order: 3,
            lr: vec![LpExponent::Finite(4.0), LpExponent::Infinity],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// `½‖∇u‖²`
    pub kinetic: f64,
    /// `∫ V |u|²`
    pub potential_term: f64,
    /// `c(t)/(σ+1) ‖u‖_{2σ+2}^{2σ+2}`
    pub nonlinear_term: f64,
    pub energy: f64,
    pub pseudo_energy: f64,
    /// Index `k` holds the Σᵏ norm, `k = 0..=K`.
    pub sigma_norms: Vec<f64>,
    /// Index `k` holds `‖|x|^k u‖`.
    pub momenta: Vec<f64>,
    /// Index `k` holds `Σ_{|β|≤k} ‖∂^β u‖`.
    pub hk_norms: Vec<f64>,
    pub lr_norms: Vec<f64>,
    /// `‖(x + it∇)u‖`
    pub j_norm: f64,
    /// `t² c(t)/(σ+1) ‖u‖^{2σ+2}`, only for lens-coupled runs.
    pub y: Option<f64>,
    /// `Im ∫ ū (x − ∇V)·∇u` plus the `ċ` contribution of the nonlinear term.
    pub pseudo_rate_rhs: f64,
    /// `∫ ∂_t V |u|²` plus the `ċ` contribution.
    pub energy_rate: Option<f64>,
    /// Largest boundary modulus relative to the maximum.
    pub boundary_ratio: f64,
}

/// Precomputed weights and operators for [`DiagnosticsRecord`]s on one grid.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    fourier: Fourier,
    potential: PotentialSpec,
    sigma: f64,
    coupling: Coupling,
    config: DiagnosticsConfig,
    indices: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    radius: Vec<f64>,
    coords: Vec<Vec<f64>>,
}

fn order(m: &[usize]) -> usize {
    m.iter().sum()
}

impl Diagnostics {
    pub fn new(
        fourier: Fourier,
        potential: PotentialSpec,
        sigma: f64,
        coupling: Coupling,
        config: DiagnosticsConfig,
    ) -> Result<Self> {
        if config.max_order > fourier.max_order() {
            return Err(Error::DerivativeOrder {
                order: config.max_order,
                max: fourier.max_order(),
            });
        }
        let grid = *fourier.grid();
        let indices = multi_indices_up_to(grid.dim(), config.max_order);
        let weights = indices
            .iter()
            .map(|a| moment_weight(&grid, a).map(|w| w.into_values()))
            .collect::<Result<Vec<_>>>()?;
        let radius = grid.radius_squared().into_iter().map(f64::sqrt).collect();
        let coords = (0..grid.dim()).map(|a| grid.coordinate(a)).collect();
        Ok(Self {
            fourier,
            potential,
            sigma,
            coupling,
            config,
            indices,
            weights,
            radius,
            coords,
        })
    }

    pub fn config(&self) -> &DiagnosticsConfig {
        &self.config
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    /// `‖x^α ∂^β u‖` for all `|α| + |β| ≤ K`, keyed by index into the multi-index list.
    fn weighted_norms(&self, derivs: &[ComplexField]) -> Vec<Vec<Option<f64>>> {
        let dv = self.fourier.grid().cell_volume();
        let k = self.config.max_order;
        self.indices
            .iter()
            .zip(derivs)
            .map(|(beta, d)| {
                self.indices
                    .iter()
                    .zip(&self.weights)
                    .map(|(alpha, w)| {
                        if order(alpha) + order(beta) > k {
                            return None;
                        }
                        let s: f64 = d
                            .values()
                            .iter()
                            .zip(w)
                            .map(|(z, x)| z.norm_sqr() * x * x)
                            .sum();
                        Some((s * dv).sqrt())
                    })
                    .collect()
            })
            .collect()
    }

    /// `Σ_{|α|+|β|≤k} ‖x^α ∂^β u‖`.
    pub fn sigma_norm(&self, u: &ComplexField, k: usize) -> Result<f64> {
        if k > self.config.max_order {
            return Err(Error::DerivativeOrder {
                order: k,
                max: self.config.max_order,
            });
        }
        let derivs = self.fourier.derivatives(u, &self.indices)?;
        let table = self.weighted_norms(&derivs);
        Ok(self.sigma_from_table(&table)[k])
    }

    fn sigma_from_table(&self, table: &[Vec<Option<f64>>]) -> Vec<f64> {
        let kmax = self.config.max_order;
        let mut by_order = vec![0.0; kmax + 1];
        for (bi, beta) in self.indices.iter().enumerate() {
            for (ai, alpha) in self.indices.iter().enumerate() {
                if let Some(v) = table[bi][ai] {
                    by_order[order(alpha) + order(beta)] += v;
                }
            }
        }
        let mut acc = 0.0;
        by_order
            .into_iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }

    pub fn compute_record(&self, u: &ComplexField, t: f64) -> Result<DiagnosticsRecord> {
        if !u.is_finite() {
            return Err(Error::NonFinite);
        }
        let grid = *self.fourier.grid();
        let d = grid.dim();
        let dv = grid.cell_volume();
        let kmax = self.config.max_order;
        let derivs = self.fourier.derivatives(u, &self.indices)?;
        let table = self.weighted_norms(&derivs);
        let sigma_norms = self.sigma_from_table(&table);

        let mut hk_norms = vec![0.0; kmax + 1];
        for (bi, beta) in self.indices.iter().enumerate() {
            let v = table[bi][0].unwrap_or(0.0);
            for (k, h) in hk_norms.iter_mut().enumerate() {
                if order(beta) <= k {
                    *h += v;
                }
            }
        }

        let vals = u.values();
        let mut momenta = vec![0.0; kmax + 1];
        for (k, m) in momenta.iter_mut().enumerate() {
            let s: f64 = vals
                .iter()
                .zip(&self.radius)
                .map(|(z, r)| z.norm_sqr() * r.powi(2 * k as i32))
                .sum();
            *m = (s * dv).sqrt();
        }

        let mass = u.mass();
        // first-order derivative fields sit right after the zero index
        let grads: Vec<&ComplexField> = (1..=d).map(|i| &derivs[i]).collect();
        let kinetic = 0.5
            * grads
                .iter()
                .map(|g| g.values().iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum::<f64>()
            * dv;

        let p = 2.0 * self.sigma + 2.0;
        let lp_integral: f64 = vals.iter().map(|z| z.norm_sqr().powf(p / 2.0)).sum::<f64>() * dv;
        let c = self.coupling.value(t)?;
        let c_rate = self.coupling.rate(t)?;
        let nonlinear_term = c * lp_integral / (self.sigma + 1.0);

        let mut potential_term = 0.0;
        let mut dtv_term = Some(0.0);
        let mut rate = 0.0;
        let mut x = vec![0.0; d];
        for (i, z) in vals.iter().enumerate() {
            for a in 0..d {
                x[a] = self.coords[a][i];
            }
            let n2 = z.norm_sqr();
            if n2 == 0.0 {
                continue;
            }
            potential_term += self.potential.value(t, &x)? * n2;
            if let Some(acc) = dtv_term.as_mut() {
                match self.potential.time_derivative(t, &x) {
                    Ok(v) => *acc += v * n2,
                    Err(_) => dtv_term = None,
                }
            }
            let gv = self.potential.gradient(t, &x)?;
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..d {
                s += (x[a] - gv[a]) * grads[a].values()[i];
            }
            rate += (z.conj() * s).im;
        }
        potential_term *= dv;
        let nl_rate = c_rate * lp_integral / (self.sigma + 1.0);
        let pseudo_rate_rhs = rate * dv + nl_rate;
        let energy_rate = dtv_term.map(|v| v * dv + nl_rate);

        let mut j2 = 0.0;
        for a in 0..d {
            j2 += vals
                .iter()
                .zip(grads[a].values())
                .zip(&self.coords[a])
                .map(|((z, g), xa)| (z * xa + Complex64::new(0.0, t) * g).norm_sqr())
                .sum::<f64>();
        }
        let j_norm = (j2 * dv).sqrt();

        let lr_norms = self.config.lr.iter().map(|&r| u.lp_norm(r)).collect();
        let y = match self.coupling {
            Coupling::Lens(_) => Some(t * t * nonlinear_term),
            _ => None,
        };
        let pseudo_energy = kinetic + nonlinear_term + 0.5 * momenta[1].powi(2);
        Ok(DiagnosticsRecord {
            t,
            mass,
            kinetic,
            potential_term,
            nonlinear_term,
            energy: kinetic + nonlinear_term + potential_term,
            pseudo_energy,
            sigma_norms,
            momenta,
            hk_norms,
            lr_norms,
            j_norm,
            y,
            pseudo_rate_rhs,
            energy_rate,
            boundary_ratio: u.boundary_ratio(),
        })
    }
}

/// `‖(x + it∇)v‖_{L²}`.
pub fn j_norm(fourier: &Fourier, v: &ComplexField, t: f64) -> Result<f64> {
    let grid = *fourier.grid();
    let grads = fourier.gradient(v)?;
    let mut s = 0.0;
    for (a, g) in grads.iter().enumerate() {
        let xa = grid.coordinate(a);
        s += v
            .values()
            .iter()
            .zip(g.values())
            .zip(&xa)
            .map(|((z, g), x)| (z * x + Complex64::new(0.0, t) * g).norm_sqr())
            .sum::<f64>();
    }
    Ok((s * grid.cell_volume()).sqrt())
}

/// CSV header for a record sequence; the column order is fixed.
pub fn csv_header(config: &DiagnosticsConfig) -> String {
    let k = config.max_order;
    let mut cols: Vec<String> = vec!["t".into(), "mass".into(), "E".into(), "pseudoE".into()];
    cols.extend((1..=k).map(|i| format!("sigma{i}")));
    cols.extend((1..=k).map(|i| format!("mom{i}")));
    cols.extend((1..=k).map(|i| format!("h{i}")));
    cols.push("Jnorm".into());
    cols.push("y".into());
    cols.extend(config.lr.iter().map(|r| r.label()));
    cols.extend(
        [
            "kinetic",
            "potential",
            "nonlinear",
            "pseudo_rate_rhs",
            "energy_rate",
            "boundary_ratio",
        ]
        .map(String::from),
    );
    cols.join(",")
}

pub fn csv_row(r: &DiagnosticsRecord) -> String {
    let mut s = String::new();
    let mut push = |v: f64| {
        if !s.is_empty() {
            s.push(',');
        }
        let _ = write!(s, "{v:.16e}");
    };
    push(r.t);
    push(r.mass);
    push(r.energy);
    push(r.pseudo_energy);
    r.sigma_norms.iter().skip(1).for_each(|&v| push(v));
    r.momenta.iter().skip(1).for_each(|&v| push(v));
    r.hk_norms.iter().skip(1).for_each(|&v| push(v));
    push(r.j_norm);
    push(r.y.unwrap_or(f64::NAN));
    r.lr_norms.iter().for_each(|&v| push(v));
    push(r.kinetic);
    push(r.potential_term);
    push(r.nonlinear_term);
    push(r.pseudo_rate_rhs);
    push(r.energy_rate.unwrap_or(f64::NAN));
    push(r.boundary_ratio);
    s
}

pub fn to_csv(config: &DiagnosticsConfig, records: &[DiagnosticsRecord]) -> String {
    let mut out = csv_header(config);
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

/// Three-point derivative on a nonuniform mesh at interior index `i`.
pub fn centered_derivative(t: &[f64], f: &[f64], i: usize) -> f64 {
    let h1 = t[i] - t[i - 1];
    let h2 = t[i + 1] - t[i];
    -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub max_defect: f64,
    pub at: f64,
    pub tolerance: f64,
    pub passes: bool,
}

/// Default `C` in the tolerance `C (stride·dt)²`.
pub const RATE_TOLERANCE_CONSTANT: f64 = 0.1;
/// `C` for the energy check; the energy series has a larger third derivative.
pub const ENERGY_RATE_CONSTANT: f64 = 0.5;

fn rate_check(
    records: &[DiagnosticsRecord],
    series: impl Fn(&DiagnosticsRecord) -> f64,
    rhs: impl Fn(&DiagnosticsRecord) -> Option<f64>,
    spacing: f64,
    constant: f64,
) -> Result<RateCheck> {
    if records.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: records.len(),
        });
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let f: Vec<f64> = records.iter().map(&series).collect();
    let mut worst = 0.0f64;
    let mut at = t[0];
    for i in 1..records.len() - 1 {
        let Some(r) = rhs(&records[i]) else {
            return Err(Error::InvalidArgument(
                "rate right-hand side unavailable for this potential".into(),
            ));
        };
        let defect = (centered_derivative(&t, &f, i) - r).abs();
        if !(defect <= worst) {
            worst = defect;
            at = t[i];
        }
    }
    let tolerance = constant * spacing * spacing;
    Ok(RateCheck {
        max_defect: worst,
        at,
        tolerance,
        passes: worst <= tolerance,
    })
}

/// Compares the centered difference of ℰ with `Im ∫ ū (x − ∇V)·∇u`.
pub fn pseudo_energy_rate_check(
    records: &[DiagnosticsRecord],
    spacing: f64,
    constant: f64,
) -> Result<RateCheck> {
    rate_check(records, |r| r.pseudo_energy, |r| Some(r.pseudo_rate_rhs), spacing, constant)
}

/// Compares the centered difference of `E` with `∫ ∂_t V |u|²`.
pub fn energy_rate_check(
    records: &[DiagnosticsRecord],
    spacing: f64,
    constant: f64,
) -> Result<RateCheck> {
    rate_check(records, |r| r.energy, |r| r.energy_rate, spacing, constant)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub r: f64,
    pub delta: f64,
    /// `max_t ‖v‖_r / (t^{-δ} ‖v‖^{1-δ} ‖Jv‖^δ)` over records with `t > 0`.
    pub constant: f64,
    pub ratios: Vec<(f64, f64)>,
    /// Known bound for the constant (`1` in one dimension), when available.
    pub reference_bound: Option<f64>,
    pub violated: Option<bool>,
}

/// Checks `‖v(t)‖_{L^r} ≤ C t^{-δ} ‖v‖^{1-δ} ‖J(t)v‖^δ`, `δ = d(1/2 − 1/r)`.
pub fn decay_check(
    records: &[DiagnosticsRecord],
    config: &DiagnosticsConfig,
    dim: usize,
    r: LpExponent,
) -> Result<DecayReport> {
    let idx = config
        .lr
        .iter()
        .position(|&q| q == r)
        .ok_or_else(|| Error::InvalidArgument(format!("L^{} norm not recorded", r.value())))?;
    let rv = r.value();
    if dim > 2 && rv > 2.0 * dim as f64 / (dim as f64 - 2.0) {
        return Err(Error::InvalidArgument(format!(
            "r = {rv} beyond the Gagliardo–Nirenberg range in dimension {dim}"
        )));
    }
    if dim == 2 && r == LpExponent::Infinity {
        return Err(Error::InvalidArgument("r = ∞ not allowed in dimension 2".into()));
    }
    let delta = dim as f64 * (0.5 - if rv.is_infinite() { 0.0 } else { 1.0 / rv });
    let ratios: Vec<(f64, f64)> = records
        .iter()
        .filter(|rec| rec.t > 0.0)
        .map(|rec| {
            let l2 = rec.mass.sqrt();
            let denom = rec.t.powf(-delta) * l2.powf(1.0 - delta) * rec.j_norm.powf(delta);
            (rec.t, rec.lr_norms[idx] / denom)
        })
        .collect();
    if ratios.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let constant = ratios.iter().map(|p| p.1).fold(0.0, f64::max);
    let reference_bound = (dim == 1).then_some(1.0);
    Ok(DecayReport {
        r: rv,
        delta,
        constant,
        violated: reference_bound.map(|b| constant > b * (1.0 + 1e-6)),
        ratios,
        reference_bound,
    })
}
