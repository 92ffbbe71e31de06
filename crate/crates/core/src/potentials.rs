//! Time-dependent potentials `V(t,x)`, the sampled boundedness check and the
//! `t²Ω(t)` sharpness classifier.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{multi_indices, RealField, SpatialGrid};
use crate::japanese;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;
type FieldFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// User supplied `t ↦ Ω(t)`. Compared by pointer identity.
#[derive(Clone)]
pub struct CustomTimeFn(pub Arc<ScalarFn>);

impl CustomTimeFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl fmt::Debug for CustomTimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomTimeFn(..)")
    }
}

impl PartialEq for CustomTimeFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Scalar coefficient functions of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `c / ⟨t⟩^γ`
    PowerDecay {
        c: f64,
        gamma: f64,
    },
    /// `c cos(e^t) / ⟨t⟩³`
    Oscillatory {
        #[serde(default = "one")]
        c: f64,
    },
    /// `a + b t`
    Affine {
        a: f64,
        b: f64,
    },
    /// Piecewise linear through the samples; undefined outside them.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    #[serde(skip)]
    Custom(CustomTimeFn),
}

fn one() -> f64 {
    1.0
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn power_decay(c: f64, gamma: f64) -> Self {
        TimeFunction::PowerDecay { c, gamma }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TimeFunction::Custom(CustomTimeFn::new(f))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TimeFunction::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::Validation(
                        "tabulated function needs at least two (time, value) pairs".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Validation(
                        "tabulated times must be strictly increasing".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Validation("tabulated values must be finite".into()));
                }
                Ok(())
            }
            TimeFunction::PowerDecay { c, gamma } if !(c.is_finite() && gamma.is_finite()) => {
                Err(Error::Validation("power decay parameters must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    fn tab_segment(times: &[f64], t: f64) -> Result<usize> {
        let (a, b) = (times[0], times[times.len() - 1]);
        if !(t >= a && t <= b) {
            return Err(Error::OutOfRange { t, start: a, end: b });
        }
        let i = times.partition_point(|&s| s <= t);
        Ok(i.clamp(1, times.len() - 1) - 1)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::PowerDecay { c, gamma } => c * japanese(t).powf(-gamma),
            TimeFunction::Oscillatory { c } => c * t.exp().cos() * japanese(t).powi(-3),
            TimeFunction::Affine { a, b } => a + b * t,
            TimeFunction::Tabulated { times, values } => {
                let i = Self::tab_segment(times, t)?;
                let s = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
            TimeFunction::Custom(f) => (f.0)(t),
        })
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(match self {
            TimeFunction::Constant { .. } => 0.0,
            TimeFunction::PowerDecay { c, gamma } => {
                -gamma * c * t * (1.0 + t * t).powf(-gamma / 2.0 - 1.0)
            }
            TimeFunction::Oscillatory { c } => {
                let e = t.exp();
                let j2 = 1.0 + t * t;
                c * (-e.sin() * e * j2.powf(-1.5) - 3.0 * t * e.cos() * j2.powf(-2.5))
            }
            TimeFunction::Affine { b, .. } => *b,
            TimeFunction::Tabulated { times, values } => {
                let i = Self::tab_segment(times, t)?;
                (values[i + 1] - values[i]) / (times[i + 1] - times[i])
            }
            TimeFunction::Custom(f) => {
                let h = 1e-6 * t.abs().max(1.0);
                ((f.0)(t + h) - (f.0)(t - h)) / (2.0 * h)
            }
        })
    }

    /// `(C, γ)` with `|Ω(t)| ≤ C⟨t⟩^{-γ}` when known in closed form.
    pub fn decay_envelope(&self) -> Option<(f64, f64)> {
        match self {
            TimeFunction::Constant { value } if *value == 0.0 => Some((0.0, f64::INFINITY)),
            TimeFunction::PowerDecay { c, gamma } => Some((c.abs(), *gamma)),
            TimeFunction::Oscillatory { c } => Some((c.abs(), 3.0)),
            _ => None,
        }
    }

    /// Multiplies the function by `k`.
    pub fn scaled(&self, k: f64) -> TimeFunction {
        match self {
            TimeFunction::Constant { value } => TimeFunction::Constant { value: k * value },
            TimeFunction::PowerDecay { c, gamma } => TimeFunction::PowerDecay {
                c: k * c,
                gamma: *gamma,
            },
            TimeFunction::Oscillatory { c } => TimeFunction::Oscillatory { c: k * c },
            TimeFunction::Affine { a, b } => TimeFunction::Affine { a: k * a, b: k * b },
            TimeFunction::Tabulated { times, values } => TimeFunction::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| k * v).collect(),
            },
            TimeFunction::Custom(f) => {
                let f = f.0.clone();
                TimeFunction::custom(move |t| k * f(t))
            }
        }
    }
}

/// User supplied `V(t, x)`. Compared by pointer identity.
#[derive(Clone)]
pub struct CustomPotential(pub Arc<FieldFn>);

impl CustomPotential {
    pub fn new(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomPotential(..)")
    }
}

impl PartialEq for CustomPotential {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// External potential. Quadratic variants are `V = ½⟨Q(t)x, x⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `Q(t) = Ω(t) I`
    IsotropicHarmonic { omega: TimeFunction },
    /// `Q(t)` given entrywise; evaluation uses `(Q + Qᵀ)/2`.
    MatrixHarmonic { q: Vec<Vec<TimeFunction>> },
    /// `V = -|x|²`, i.e. `Ω ≡ -2`.
    Repulsive,
    #[serde(skip)]
    Custom(CustomPotential),
}

impl PotentialSpec {
    pub fn isotropic(omega: TimeFunction) -> Self {
        PotentialSpec::IsotropicHarmonic { omega }
    }

    pub fn custom(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        PotentialSpec::Custom(CustomPotential::new(f))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            PotentialSpec::IsotropicHarmonic { omega } => omega.validate(),
            PotentialSpec::MatrixHarmonic { q } => {
                if q.len() != dim || q.iter().any(|row| row.len() != dim) {
                    return Err(Error::Validation(format!(
                        "matrix potential must be {dim}x{dim}"
                    )));
                }
                q.iter().flatten().try_for_each(|f| f.validate())
            }
            _ => Ok(()),
        }
    }

    /// The scalar `Ω(t)` of the Hill equation when the potential is isotropic.
    pub fn hill_omega(&self) -> Option<TimeFunction> {
        match self {
            PotentialSpec::Zero => Some(TimeFunction::constant(0.0)),
            PotentialSpec::IsotropicHarmonic { omega } => Some(omega.clone()),
            PotentialSpec::Repulsive => Some(TimeFunction::constant(-2.0)),
            _ => None,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        let stat = |f: &TimeFunction| matches!(f, TimeFunction::Constant { .. });
        match self {
            PotentialSpec::Zero | PotentialSpec::Repulsive => true,
            PotentialSpec::IsotropicHarmonic { omega } => stat(omega),
            PotentialSpec::MatrixHarmonic { q } => q.iter().flatten().all(stat),
            PotentialSpec::Custom(_) => false,
        }
    }

    /// Symmetrized `Q(t)` (row-major, `d × d`) for quadratic variants.
    pub fn quadratic_form(&self, t: f64, dim: usize) -> Result<Option<Vec<f64>>> {
        self.quadratic_with(t, dim, |f, t| f.value(t))
    }

    /// `dQ/dt`, symmetrized, for quadratic variants.
    pub fn quadratic_form_rate(&self, t: f64, dim: usize) -> Result<Option<Vec<f64>>> {
        self.quadratic_with(t, dim, |f, t| f.derivative(t))
    }

    fn quadratic_with(
        &self,
        t: f64,
        dim: usize,
        eval: impl Fn(&TimeFunction, f64) -> Result<f64>,
    ) -> Result<Option<Vec<f64>>> {
        let mut q = vec![0.0; dim * dim];
        match self {
            PotentialSpec::Zero => {}
            PotentialSpec::Repulsive => {
                // constant, so its rate is zero
                let v = eval(&TimeFunction::constant(-2.0), t)?;
                for a in 0..dim {
                    q[a * dim + a] = v;
                }
            }
            PotentialSpec::IsotropicHarmonic { omega } => {
                let w = eval(omega, t)?;
                for a in 0..dim {
                    q[a * dim + a] = w;
                }
            }
            PotentialSpec::MatrixHarmonic { q: m } => {
                if m.len() != dim || m.iter().any(|r| r.len() != dim) {
                    return Err(Error::Validation(format!("matrix potential must be {dim}x{dim}")));
                }
                for a in 0..dim {
                    for b in 0..dim {
                        q[a * dim + b] = 0.5 * (eval(&m[a][b], t)? + eval(&m[b][a], t)?);
                    }
                }
            }
            PotentialSpec::Custom(_) => return Ok(None),
        }
        Ok(Some(q))
    }

    pub fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        if let PotentialSpec::Custom(f) = self {
            return Ok((f.0)(t, x));
        }
        let d = x.len();
        let q = self.quadratic_form(t, d)?.unwrap_or_default();
        Ok(quad(&q, x))
    }

    /// `∇_x V(t, x)`.
    pub fn gradient(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let d = x.len();
        if let PotentialSpec::Custom(f) = self {
            let mut y = x.to_vec();
            let mut out = vec![0.0; d];
            for a in 0..d {
                let h = 1e-5 * x[a].abs().max(1.0);
                y[a] = x[a] + h;
                let p = (f.0)(t, &y);
                y[a] = x[a] - h;
                let m = (f.0)(t, &y);
                y[a] = x[a];
                out[a] = (p - m) / (2.0 * h);
            }
            return Ok(out);
        }
        let q = self.quadratic_form(t, d)?.unwrap_or_default();
        Ok((0..d)
            .map(|a| (0..d).map(|b| q[a * d + b] * x[b]).sum())
            .collect())
    }

    /// `∂_t V(t, x)`.
    pub fn time_derivative(&self, t: f64, x: &[f64]) -> Result<f64> {
        if let PotentialSpec::Custom(f) = self {
            let h = 1e-6 * t.abs().max(1.0);
            return Ok(((f.0)(t + h, x) - (f.0)(t - h, x)) / (2.0 * h));
        }
        let q = self.quadratic_form_rate(t, x.len())?.unwrap_or_default();
        Ok(quad(&q, x))
    }

    /// `V(t, ·)` sampled on the grid nodes.
    pub fn evaluate(&self, t: f64, grid: &SpatialGrid) -> Result<RealField> {
        let mut values = vec![0.0; grid.len()];
        match self.quadratic_form(t, grid.dim())? {
            Some(q) => grid.for_each_node(|i, x| values[i] = quad(&q, x)),
            None => {
                let mut err = None;
                grid.for_each_node(|i, x| match self.value(t, x) {
                    Ok(v) => values[i] = v,
                    Err(e) => err = Some(e),
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        RealField::new(*grid, values)
    }
}

fn quad(q: &[f64], x: &[f64]) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let d = x.len();
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += q[a * d + b] * x[a] * x[b];
        }
    }
    0.5 * s
}

/// Central difference weights for the `m`-th derivative: offsets `(m/2 - j) h`.
fn stencil(m: usize) -> Vec<(f64, f64)> {
    let mut binom = 1.0;
    (0..=m)
        .map(|j| {
            if j > 0 {
                binom = binom * (m - j + 1) as f64 / j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (m as f64 / 2.0 - j as f64, sign * binom)
        })
        .collect()
}

/// Finite-difference `∂^α V(t, x)` with step `h`.
pub fn finite_difference(
    spec: &PotentialSpec,
    t: f64,
    x: &[f64],
    alpha: &[usize],
    h: f64,
) -> Result<f64> {
    let d = x.len();
    let stencils: Vec<Vec<(f64, f64)>> = alpha.iter().map(|&m| stencil(m)).collect();
    let order: usize = alpha.iter().sum();
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0; d];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for a in 0..d {
            let (off, c) = stencils[a][idx[a]];
            y[a] = x[a] + off * h;
            w *= c;
        }
        acc += w * spec.value(t, &y)?;
        let mut a = 0;
        loop {
            if a == d {
                return Ok(acc / h.powi(order as i32));
            }
            idx[a] += 1;
            if idx[a] < stencils[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Eigenvalues of a symmetric `d × d` matrix (cyclic Jacobi).
pub fn symmetric_eigenvalues(m: &[f64], d: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a[i * d + i]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionSettings {
    pub max_order: usize,
    pub step: f64,
    pub threshold: f64,
}

impl Default for AssumptionSettings {
    fn default() -> Self {
        Self {
            max_order: 3,
            step: 1e-3,
            threshold: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderBound {
    pub order: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub passes: bool,
    /// Sampled `sup |∂^α V|` per order; order 2 reports the Hessian spectral norm.
    pub worst_bounds: Vec<OrderBound>,
    /// Sampled `sup_{|x| ≤ 1} |V|`.
    pub sup_near_origin: f64,
    pub threshold: f64,
}

/// Default spatial samples: a uniform lattice on `[-radius, radius]^d`.
pub fn lattice_samples(dim: usize, radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let per_axis = per_axis.max(2);
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; dim];
            for a in (0..dim).rev() {
                x[a] = axis[k % per_axis];
                k /= per_axis;
            }
            x
        })
        .collect()
}

pub fn default_time_samples() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0]
}

/// Sampled falsifier for the hypothesis that all derivatives of order ≥ 2
/// are bounded in `(t, x)` and that `sup_{|x|≤1} |V(t,x)|` is bounded in `t`.
pub fn verify_assumption(
    spec: &PotentialSpec,
    t_samples: &[f64],
    x_samples: &[Vec<f64>],
    settings: &AssumptionSettings,
) -> Result<AssumptionReport> {
    if t_samples.is_empty() || x_samples.is_empty() {
        return Err(Error::InvalidArgument("sample sets must be nonempty".into()));
    }
    if settings.max_order < 2 {
        return Err(Error::InvalidArgument("max_order must be at least 2".into()));
    }
    let d = x_samples[0].len();
    if d == 0 || x_samples.iter().any(|x| x.len() != d) {
        return Err(Error::InvalidArgument("inconsistent sample dimensions".into()));
    }
    let h = settings.step;
    let mut worst = vec![0.0f64; settings.max_order + 1];
    let hessian_indices = multi_indices(d, 2);
    for &t in t_samples {
        for x in x_samples {
            let mut hess = vec![0.0; d * d];
            for alpha in &hessian_indices {
                let v = finite_difference(spec, t, x, alpha, h)?;
                let nz: Vec<usize> = (0..d).filter(|&a| alpha[a] > 0).collect();
                let (a, b) = if nz.len() == 1 { (nz[0], nz[0]) } else { (nz[0], nz[1]) };
                hess[a * d + b] = v;
                hess[b * d + a] = v;
            }
            let spec_norm = symmetric_eigenvalues(&hess, d)
                .into_iter()
                .map(f64::abs)
                .fold(0.0, f64::max);
            worst[2] = nan_max(worst[2], spec_norm);
            for order in 3..=settings.max_order {
                for alpha in multi_indices(d, order) {
                    let v = finite_difference(spec, t, x, &alpha, h)?;
                    worst[order] = nan_max(worst[order], v.abs());
                }
            }
        }
    }
    let mut inner: Vec<Vec<f64>> = x_samples
        .iter()
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>() <= 1.0)
        .cloned()
        .collect();
    inner.push(vec![0.0; d]);
    for a in 0..d {
        for s in [-1.0, -0.5, 0.5, 1.0] {
            let mut e = vec![0.0; d];
            e[a] = s;
            inner.push(e);
        }
    }
    let mut sup0 = 0.0f64;
    for &t in t_samples {
        for x in &inner {
            sup0 = nan_max(sup0, spec.value(t, x)?.abs());
        }
    }
    let worst_bounds: Vec<OrderBound> = (2..=settings.max_order)
        .map(|order| OrderBound {
            order,
            bound: worst[order],
        })
        .collect();
    let ok = |v: f64| v.is_finite() && v < settings.threshold;
    let passes = worst_bounds.iter().all(|b| ok(b.bound)) && ok(sup0);
    Ok(AssumptionReport {
        passes,
        worst_bounds,
        sup_near_origin: sup0,
        threshold: settings.threshold,
    })
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessRegime {
    NonOscillatory,
    Oscillatory,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub limsup_estimate: f64,
    pub regime: SharpnessRegime,
}

pub const SHARPNESS_THRESHOLD: f64 = 0.25;
pub const SHARPNESS_MARGIN: f64 = 0.05;

/// Estimates `limsup t²Ω(t)` by the sampled maximum over `[T_max/2, T_max]`.
pub fn sharpness_classifier(omega: &TimeFunction, t_max: f64) -> Result<SharpnessReport> {
    if !(t_max >= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "sharpness horizon must be at least 100, got {t_max}"
        )));
    }
    let samples = 4001;
    let mut est = f64::NEG_INFINITY;
    for i in 0..samples {
        let t = t_max / 2.0 + (t_max / 2.0) * i as f64 / (samples - 1) as f64;
        est = est.max(t * t * omega.value(t)?);
    }
    let regime = if est < SHARPNESS_THRESHOLD - SHARPNESS_MARGIN {
        SharpnessRegime::NonOscillatory
    } else if est > SHARPNESS_THRESHOLD + SHARPNESS_MARGIN {
        SharpnessRegime::Oscillatory
    } else {
        SharpnessRegime::Inconclusive
    };
    Ok(SharpnessReport {
        limsup_estimate: est,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_substitution() {
        let v = PotentialSpec::isotropic(TimeFunction::power_decay(1.0, 3.0));
        assert_eq!(v.value(0.0, &[2.0]).unwrap(), 2.0);
        assert_eq!(PotentialSpec::Repulsive.value(3.7, &[1.0, 2.0]).unwrap(), -5.0);
        assert_eq!(PotentialSpec::Zero.value(1.0, &[4.0]).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_out_of_range() {
        let f = TimeFunction::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![1.0, 3.0],
        };
        assert_eq!(f.value(0.5).unwrap(), 2.0);
        assert!(matches!(f.value(1.5), Err(Error::OutOfRange { .. })));
        let v = PotentialSpec::isotropic(f);
        let g = SpatialGrid::new(1, 8, 1.0).unwrap();
        assert!(v.evaluate(2.0, &g).is_err());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let fs = [
            TimeFunction::power_decay(1.3, 3.0),
            TimeFunction::Oscillatory { c: 1.0 },
            TimeFunction::Affine { a: 1.0, b: 2.0 },
        ];
        for f in &fs {
            for t in [0.0, 0.3, 1.7, 2.5] {
                let h = 1e-6;
                let fd = (f.value(t + h).unwrap() - f.value(t - h).unwrap()) / (2.0 * h);
                assert!((f.derivative(t).unwrap() - fd).abs() < 1e-6, "{f:?} at {t}");
            }
        }
    }

    #[test]
    fn stencil_weights() {
        assert_eq!(stencil(2), vec![(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)]);
        let f = PotentialSpec::custom(|_, x| x[0].powi(3));
        let d3 = finite_difference(&f, 0.0, &[0.7], &[3], 1e-2).unwrap();
        assert!((d3 - 6.0).abs() < 1e-6);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let mut ev = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
