//! Least-squares growth-law fits on `(t, y)` series.
//!
//! Every model is fitted in its own linearizing coordinates, and all models
//! report the same residual: the RMS misfit in `ln y`, so residuals compare
//! across models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 10;
/// Relative preference given to simpler models in [`classify`].
pub const SIMPLICITY_MARGIN: f64 = 0.10;
/// Absolute residual (in `ln y`) below which differences are ignored.
pub const RESIDUAL_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `y ≈ c`
    Bounded,
    /// `y ≈ c t^k`
    Poly,
    /// `y ≈ c e^{r t}`
    Exp,
    /// `y ≈ exp(c e^{r t})`
    DoubleExp,
}

impl GrowthModel {
    pub const ALL: [GrowthModel; 4] = [
        GrowthModel::Bounded,
        GrowthModel::Poly,
        GrowthModel::Exp,
        GrowthModel::DoubleExp,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            GrowthModel::Bounded => "bounded",
            GrowthModel::Poly => "poly",
            GrowthModel::Exp => "exp",
            GrowthModel::DoubleExp => "double_exp",
        }
    }
}

impl std::str::FromStr for GrowthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(GrowthModel::Bounded),
            "poly" => Ok(GrowthModel::Poly),
            "exp" => Ok(GrowthModel::Exp),
            "double_exp" | "double-exp" => Ok(GrowthModel::DoubleExp),
            _ => Err(Error::InvalidArgument(format!("unknown growth model '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// Prefactor `c` (for `double_exp`, the inner prefactor).
    pub scale: f64,
    /// Growth parameter: `k`, `r`, or the inner rate; zero for `bounded`.
    pub rate: f64,
    /// RMS misfit in `ln y`.
    pub residual: f64,
}

impl GrowthFit {
    pub fn predict(&self, t: f64) -> f64 {
        match self.model {
            GrowthModel::Bounded => self.scale,
            GrowthModel::Poly => self.scale * t.powf(self.rate),
            GrowthModel::Exp => self.scale * (self.rate * t).exp(),
            GrowthModel::DoubleExp => (self.scale * (self.rate * t).exp()).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub best: GrowthModel,
    pub fits: Vec<GrowthFit>,
}

impl Classification {
    pub fn fit(&self, model: GrowthModel) -> Option<&GrowthFit> {
        self.fits.iter().find(|f| f.model == model)
    }
}

/// Ordinary least squares `y = a + b x`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn check(t: &[f64], y: &[f64]) -> Result<()> {
    if t.len() != y.len() {
        return Err(Error::InvalidArgument("t and y lengths differ".into()));
    }
    if t.len() < MIN_POINTS {
        return Err(Error::TooFewSamples {
            needed: MIN_POINTS,
            got: t.len(),
        });
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if y.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("growth fits need y > 0".into()));
    }
    Ok(())
}

fn log_residual(fit: &GrowthFit, t: &[f64], y: &[f64]) -> f64 {
    let s: f64 = t
        .iter()
        .zip(y)
        .map(|(&t, &y)| {
            let p = fit.predict(t);
            let d = if p > 0.0 && p.is_finite() { y.ln() - p.ln() } else { f64::INFINITY };
            d * d
        })
        .sum();
    (s / t.len() as f64).sqrt()
}

pub fn growth_fit(t: &[f64], y: &[f64], model: GrowthModel) -> Result<GrowthFit> {
    check(t, y)?;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (scale, rate) = match model {
        GrowthModel::Bounded => (y.iter().sum::<f64>() / y.len() as f64, 0.0),
        GrowthModel::Poly => {
            if t.iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidArgument("poly fit needs t > 0".into()));
            }
            let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
            let (a, b) = linear_regression(&lt, &ly);
            (a.exp(), b)
        }
        GrowthModel::Exp => {
            let (a, b) = linear_regression(t, &ly);
            (a.exp(), b)
        }
        GrowthModel::DoubleExp => {
            if y.iter().any(|&v| v <= 1.0) {
                return Err(Error::InvalidArgument("double_exp fit needs y > 1".into()));
            }
            let lly: Vec<f64> = ly.iter().map(|v| v.ln()).collect();
            let (a, b) = linear_regression(t, &lly);
            (a.exp(), b)
        }
    };
    let mut fit = GrowthFit {
        model,
        scale,
        rate,
        residual: 0.0,
    };
    fit.residual = log_residual(&fit, t, y);
    Ok(fit)
}

/// Fits every applicable model and picks the simplest one whose residual is
/// within the simplicity margin of the best. A fitted growth parameter that
/// is not positive counts as bounded.
pub fn classify(t: &[f64], y: &[f64]) -> Result<Classification> {
    check(t, y)?;
    let fits: Vec<GrowthFit> = GrowthModel::ALL
        .iter()
        .filter_map(|&m| growth_fit(t, y, m).ok())
        .collect();
    let best_residual = fits.iter().map(|f| f.residual).fold(f64::INFINITY, f64::min);
    let cutoff = best_residual * (1.0 + SIMPLICITY_MARGIN) + RESIDUAL_FLOOR;
    let chosen = fits
        .iter()
        .find(|f| f.residual <= cutoff)
        .expect("bounded fit always applies");
    let best = if chosen.model != GrowthModel::Bounded && chosen.rate <= 0.0 {
        GrowthModel::Bounded
    } else {
        chosen.model
    };
    Ok(Classification { best, fits })
}

/// Restricts a series to `lo ≤ t ≤ hi`.
pub fn window(t: &[f64], y: &[f64], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    t.iter()
        .zip(y)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(a, b)| (*a, *b))
        .unzip()
}
