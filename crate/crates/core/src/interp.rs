//! Piecewise cubic interpolation on sorted 1-D meshes.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant through `(x_i, y_i)` with prescribed slopes.
#[derive(Clone, Debug)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl CubicHermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() != x.len() || dy.len() != x.len() {
            return Err(Error::InvalidArgument(
                "Hermite interpolation needs at least two nodes with matching values and slopes"
                    .into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "interpolation nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self { x, y, dy })
    }

    /// Fritsch–Carlson monotone cubic through `(x_i, y_i)`.
    ///
    /// If `slopes` is given it seeds the node derivatives before limiting,
    /// otherwise three-point estimates are used.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>, slopes: Option<Vec<f64>>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidArgument("monotone interpolation needs two nodes".into()));
        }
        let delta: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut m = match slopes {
            Some(s) if s.len() == n => s,
            Some(_) => return Err(Error::InvalidArgument("slope count mismatch".into())),
            None => {
                let mut m = vec![0.0; n];
                m[0] = delta[0];
                m[n - 1] = delta[n - 2];
                for i in 1..n - 1 {
                    m[i] = if delta[i - 1] * delta[i] <= 0.0 {
                        0.0
                    } else {
                        0.5 * (delta[i - 1] + delta[i])
                    };
                }
                m
            }
        };
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            if a < 0.0 {
                m[i] = 0.0;
            }
            if b < 0.0 {
                m[i + 1] = 0.0;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * delta[i];
                m[i + 1] = tau * b * delta[i];
            }
        }
        Self::new(x, y, m)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (a, b) = self.domain();
        let tol = 1e-12 * (b - a).abs().max(1.0);
        if !(t >= a - tol && t <= b + tol) {
            return Err(Error::OutOfRange { t, start: a, end: b });
        }
        let i = self.x.partition_point(|&v| v <= t);
        Ok(i.clamp(1, self.x.len() - 1) - 1)
    }

    /// Value and first derivative at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> Result<(f64, f64)> {
        let i = self.locate(t)?;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.dy[i] * h, self.dy[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let dv = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
        Ok((v, dv))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.eval_with_derivative(t)?.0)
    }
}
