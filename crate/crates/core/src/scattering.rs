//! Free-flow pullback, finite-horizon scattering checks and reference profiles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::ComplexField;

/// Differences at or below this count as converged outright.
pub const CONVERGED_DIFFERENCE: f64 = 1e-9;
/// Required decrease of the difference rate across a doubling of time.
pub const DOUBLING_FACTOR: f64 = 2.0;

/// `w = e^{−itΔ/2} u`, the multiplier `e^{+it|ξ|²/2}`.
pub fn free_pullback(fourier: &Fourier, u: &ComplexField, t: f64) -> Result<ComplexField> {
    fourier.apply_multiplier(u, |xi| {
        let k2: f64 = xi.iter().map(|v| v * v).sum();
        Complex64::from_polar(1.0, 0.5 * t * k2)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringVerdict {
    Scattering,
    NotScattering,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CauchyReport {
    pub times: Vec<f64>,
    /// `‖w(t_{j+1}) − w(t_j)‖_{L²}`
    pub differences: Vec<f64>,
    /// Differences per unit time, `D_j / (t_{j+1} − t_j)`.
    pub rates: Vec<f64>,
    /// `R(t) / R(2t)` for each interval whose doubled midpoint lies in range.
    pub doubling_factors: Vec<f64>,
    pub monotone: bool,
    pub verdict: ScatteringVerdict,
    /// Estimate of `‖u₊ − w(t_last)‖` from a power-law tail, infinite when the
    /// rates do not decay fast enough.
    pub tail_estimate: f64,
    /// Finite-horizon classifier, not a proof of scattering.
    pub note: String,
    #[serde(skip)]
    pub u_plus: Option<ComplexField>,
}

fn interp_rate(mids: &[f64], rates: &[f64], t: f64) -> Option<f64> {
    let i = mids.iter().position(|&m| m >= t)?;
    if i == 0 {
        return Some(rates[0]);
    }
    let (m0, m1) = (mids[i - 1], mids[i]);
    let s = (t - m0) / (m1 - m0);
    // geometric interpolation suits power-law decay
    Some(rates[i - 1].powf(1.0 - s) * rates[i].powf(s))
}

/// Cauchy test on pulled-back snapshots.
///
/// The verdict is scattering when every difference is below
/// [`CONVERGED_DIFFERENCE`], or when the difference rate drops by at least
/// [`DOUBLING_FACTOR`] across each doubling of time within the horizon.
pub fn cauchy_convergence(fourier: &Fourier, snapshots: &[(f64, ComplexField)]) -> Result<CauchyReport> {
    if snapshots.len() < 4 {
        return Err(Error::TooFewSamples {
            needed: 4,
            got: snapshots.len(),
        });
    }
    if snapshots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("snapshot times must increase".into()));
    }
    let pulled: Vec<ComplexField> = snapshots
        .iter()
        .map(|(t, u)| free_pullback(fourier, u, *t))
        .collect::<Result<_>>()?;
    let times: Vec<f64> = snapshots.iter().map(|s| s.0).collect();
    let differences: Vec<f64> = pulled
        .windows(2)
        .map(|w| w[1].l2_distance(&w[0]))
        .collect::<Result<_>>()?;
    let rates: Vec<f64> = differences
        .iter()
        .zip(times.windows(2))
        .map(|(d, w)| d / (w[1] - w[0]))
        .collect();
    let mids: Vec<f64> = times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let monotone = differences.windows(2).all(|w| w[1] <= w[0]);
    let converged = differences.iter().all(|&d| d <= CONVERGED_DIFFERENCE);
    let mut doubling_factors = Vec::new();
    for (j, &m) in mids.iter().enumerate() {
        if mids[0] <= 0.0 && j == 0 {
            continue;
        }
        if let Some(r2) = interp_rate(&mids, &rates, 2.0 * m) {
            if 2.0 * m <= *mids.last().unwrap() {
                doubling_factors.push(rates[j] / r2);
            }
        }
    }
    let decaying = !doubling_factors.is_empty() && doubling_factors.iter().all(|&f| f >= DOUBLING_FACTOR);
    let verdict = if converged || decaying {
        ScatteringVerdict::Scattering
    } else {
        ScatteringVerdict::NotScattering
    };
    let last_factor = doubling_factors.last().copied().unwrap_or(0.0);
    let tail_estimate = if converged {
        0.0
    } else if last_factor > 2.0 {
        rates.last().unwrap() * mids.last().unwrap() / (1.0 - 2.0 / last_factor)
    } else {
        f64::INFINITY
    };
    Ok(CauchyReport {
        times,
        differences,
        rates,
        doubling_factors,
        monotone,
        verdict,
        tail_estimate,
        note: "finite-horizon heuristic: rate must halve per doubling of t".into(),
        u_plus: pulled.into_iter().last(),
    })
}

/// Relative `L²` distance between `u(t)` and `t^{−d/2} û₊(x/t) e^{i|x|²/(2t)}`.
pub fn asymptotic_profile(fourier: &Fourier, u_plus: &ComplexField, t: f64) -> Result<ComplexField> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("profile needs t > 0".into()));
    }
    let d = fourier.grid().dim() as f64;
    let hat = fourier.continuous_transform_scaled(u_plus, 1.0 / t)?;
    let amp = t.powf(-0.5 * d);
    hat.pointwise_map(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * Complex64::from_polar(amp, r2 / (2.0 * t))
    })
}

pub fn asymptotic_profile_error(fourier: &Fourier, u: &ComplexField, t: f64, u_plus: &ComplexField) -> Result<f64> {
    let p = asymptotic_profile(fourier, u_plus, t)?;
    let norm = u.l2_norm();
    if norm == 0.0 {
        return Ok(p.l2_norm());
    }
    Ok(u.l2_distance(&p)? / norm)
}

/// Large-time profile of the linear flow with `V = −ω²|x|²/2`:
/// `(ω/sinh ωt)^{d/2} F(u₊ e^{iω|·|²/2})(ωx/sinh ωt) e^{iω coth(ωt)|x|²/2}`.
pub fn repulsive_reference(fourier: &Fourier, u_plus: &ComplexField, t: f64, omega: f64) -> Result<ComplexField> {
    if !(omega > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument("need omega > 0 and t > 0".into()));
    }
    let d = fourier.grid().dim() as f64;
    let lambda = omega / (omega * t).sinh();
    let beta = omega / (omega * t).tanh();
    let h = chirp(u_plus, omega)?;
    let hat = fourier.continuous_transform_scaled(&h, lambda)?;
    hat.pointwise_map(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * Complex64::from_polar(lambda.powf(0.5 * d), 0.5 * beta * r2)
    })
}

fn chirp(u: &ComplexField, omega: f64) -> Result<ComplexField> {
    u.pointwise_map(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * Complex64::from_polar(1.0, 0.5 * omega * r2)
    })
}

/// Σ¹ norm `‖u‖ + Σ_a ‖x_a u‖ + Σ_a ‖∂_a u‖` of [`repulsive_reference`],
/// evaluated in closed form from `h = u₊ e^{iω|x|²/2}` so the spreading
/// profile never has to fit in the box.
pub fn repulsive_sigma1(fourier: &Fourier, u_plus: &ComplexField, t: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument("need omega > 0 and t > 0".into()));
    }
    let grid = *fourier.grid();
    let lambda = omega / (omega * t).sinh();
    let beta = omega / (omega * t).tanh();
    let h = chirp(u_plus, omega)?;
    let grads = fourier.gradient(&h)?;
    let mut total = h.l2_norm();
    for (a, dh) in grads.iter().enumerate() {
        let xa = grid.coordinate(a);
        let xh = ComplexField::new(
            grid,
            h.values().iter().zip(&xa).map(|(z, x)| z * x).collect(),
        )?;
        let n_dh = dh.l2_norm();
        let n_xh = xh.l2_norm();
        let cross = xh.l2_inner(dh)?.im;
        total += n_dh / lambda;
        let sq = lambda * lambda * n_xh * n_xh + (beta / lambda).powi(2) * n_dh * n_dh - 2.0 * beta * cross;
        total += sq.max(0.0).sqrt();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    #[test]
    fn pullback_roundtrip() {
        let g = SpatialGrid::new(1, 128, 10.0).unwrap();
        let fr = Fourier::new(g);
        let u = ComplexField::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.3 * x[0])).unwrap();
        let w = free_pullback(&fr, &u, 1.7).unwrap();
        assert!((w.l2_norm() - u.l2_norm()).abs() < 1e-13);
        let back = free_pullback(&fr, &w, -1.7).unwrap();
        assert!(back.l2_distance(&u).unwrap() < 1e-12);
        let id = free_pullback(&fr, &u, 0.0).unwrap();
        assert!(id.l2_distance(&u).unwrap() < 1e-13);
    }
}
