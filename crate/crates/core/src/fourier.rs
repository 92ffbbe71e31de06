//! Unitary discrete Fourier transforms and spectral operators on a [`SpatialGrid`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, SpatialGrid};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Highest derivative order accepted by [`Fourier::derivative`] unless overridden.
pub const DEFAULT_MAX_DERIVATIVE: usize = 6;

/// FFT plans and wavenumber tables for one grid.
///
/// The forward transform is `û_k = N^{-1/2} Σ_j u_j e^{-2πi jk/n}` per axis,
/// so that both directions are unitary.
#[derive(Clone)]
pub struct Fourier {
    grid: SpatialGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
    max_order: usize,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier")
            .field("grid", &self.grid)
            .field("max_order", &self.max_order)
            .finish()
    }
}

fn fft_lines(fft: &dyn Fft<f64>, buf: &mut [Complex64], n: usize) {
    #[cfg(feature = "parallel")]
    {
        let lines = buf.len() / n;
        if lines >= 16 {
            let per_task = (lines / 16).max(1) * n;
            buf.par_chunks_mut(per_task).for_each(|c| fft.process(c));
            return;
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    fft.process(buf);
}

impl Fourier {
    pub fn new(grid: SpatialGrid) -> Self {
        Self::with_max_order(grid, DEFAULT_MAX_DERIVATIVE)
    }

    pub fn with_max_order(grid: SpatialGrid, max_order: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        Self {
            grid,
            forward,
            inverse,
            wavenumbers: grid.axis_wavenumbers(),
            max_order,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Per-axis wavenumbers in DFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    fn transform_in_place(&self, values: &mut [Complex64], fft: &dyn Fft<f64>) {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let total = values.len();
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                fft_lines(fft, values, n);
                continue;
            }
            let block = n * stride;
            let mut buf = vec![Complex64::new(0.0, 0.0); block];
            for start in (0..total).step_by(block) {
                let src = &mut values[start..start + block];
                for s in 0..stride {
                    for j in 0..n {
                        buf[s * n + j] = src[s + j * stride];
                    }
                }
                fft_lines(fft, &mut buf, n);
                for s in 0..stride {
                    for j in 0..n {
                        src[s + j * stride] = buf[s * n + j];
                    }
                }
            }
        }
        let scale = 1.0 / (total as f64).sqrt();
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    fn check(&self, f: &ComplexField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn forward_in_place(&self, values: &mut [Complex64]) {
        self.transform_in_place(values, self.forward.as_ref());
    }

    pub fn inverse_in_place(&self, values: &mut [Complex64]) {
        self.transform_in_place(values, self.inverse.as_ref());
    }

    /// Spectral coefficients of `f`, indexed in DFT order.
    pub fn forward(&self, f: &ComplexField) -> Result<ComplexField> {
        self.check(f)?;
        let mut v = f.values().to_vec();
        self.forward_in_place(&mut v);
        Ok(ComplexField::from_raw(self.grid, v))
    }

    pub fn inverse(&self, f: &ComplexField) -> Result<ComplexField> {
        self.check(f)?;
        let mut v = f.values().to_vec();
        self.inverse_in_place(&mut v);
        Ok(ComplexField::from_raw(self.grid, v))
    }

    /// Tabulates `m(ξ)` over all DFT bins.
    pub fn multiplier_table(&self, mut m: impl FnMut(&[f64]) -> Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.grid.for_each_mode(|i, xi| out[i] = m(xi));
        out
    }

    /// `F^{-1}[m · F f]`.
    pub fn apply_multiplier(
        &self,
        f: &ComplexField,
        m: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<ComplexField> {
        let table = self.multiplier_table(m);
        self.apply_table(f, &table)
    }

    pub fn apply_table(&self, f: &ComplexField, table: &[Complex64]) -> Result<ComplexField> {
        self.check(f)?;
        let mut v = f.values().to_vec();
        self.forward_in_place(&mut v);
        for (a, m) in v.iter_mut().zip(table) {
            *a *= m;
        }
        self.inverse_in_place(&mut v);
        ComplexField::new(self.grid, v)
    }

    /// Symbol of `∂^β`, i.e. `Π (iξ_a)^{β_a}`.
    pub fn derivative_symbol(&self, beta: &[usize]) -> Result<Vec<Complex64>> {
        let order: usize = beta.iter().sum();
        if order > self.max_order {
            return Err(Error::DerivativeOrder {
                order,
                max: self.max_order,
            });
        }
        if beta.len() != self.grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "multi-index has {} components for a {}-dimensional grid",
                beta.len(),
                self.grid.dim()
            )));
        }
        Ok(self.multiplier_table(|xi| {
            let mut z = Complex64::new(1.0, 0.0);
            for (k, &p) in xi.iter().zip(beta) {
                z *= Complex64::new(0.0, *k).powu(p as u32);
            }
            z
        }))
    }

    /// Spectral derivative `∂^β f`.
    pub fn derivative(&self, f: &ComplexField, beta: &[usize]) -> Result<ComplexField> {
        if beta.iter().all(|&b| b == 0) {
            self.check(f)?;
            return Ok(f.clone());
        }
        let sym = self.derivative_symbol(beta)?;
        self.apply_table(f, &sym)
    }

    /// Derivatives for several multi-indices sharing one forward transform.
    pub fn derivatives(&self, f: &ComplexField, betas: &[Vec<usize>]) -> Result<Vec<ComplexField>> {
        self.check(f)?;
        let mut hat = f.values().to_vec();
        self.forward_in_place(&mut hat);
        betas
            .iter()
            .map(|beta| {
                if beta.iter().all(|&b| b == 0) {
                    return Ok(f.clone());
                }
                let sym = self.derivative_symbol(beta)?;
                let mut v: Vec<Complex64> = hat.iter().zip(&sym).map(|(a, m)| a * m).collect();
                self.inverse_in_place(&mut v);
                Ok(ComplexField::from_raw(self.grid, v))
            })
            .collect()
    }

    /// Gradient components `∂_a f`.
    pub fn gradient(&self, f: &ComplexField) -> Result<Vec<ComplexField>> {
        let d = self.grid.dim();
        let betas: Vec<Vec<usize>> = (0..d)
            .map(|a| {
                let mut b = vec![0; d];
                b[a] = 1;
                b
            })
            .collect();
        self.derivatives(f, &betas)
    }

    /// `‖∇f‖_{L²}`.
    pub fn gradient_norm(&self, f: &ComplexField) -> Result<f64> {
        self.check(f)?;
        let mut hat = f.values().to_vec();
        self.forward_in_place(&mut hat);
        let mut s = 0.0;
        self.grid.for_each_mode(|i, xi| {
            let k2: f64 = xi.iter().map(|k| k * k).sum();
            s += k2 * hat[i].norm_sqr();
        });
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// Band-limited trigonometric interpolant of `f` evaluated on the scaled
    /// node set `{ s · x_j }`. Points leaving the box evaluate to zero.
    pub fn resample_scaled(&self, f: &ComplexField, s: f64) -> Result<ComplexField> {
        self.check(f)?;
        let n = self.grid.n();
        let l = self.grid.half_width();
        let nodes = self.grid.axis_nodes();
        let base = PI / l;
        let inv = 1.0 / (n as f64).sqrt();
        let mut hat = f.values().to_vec();
        self.forward_in_place(&mut hat);
        // row m: n^{-1/2} exp(i ξ_k (s x_m + L)) in DFT order
        let row = |m: usize, out: &mut [Complex64]| {
            let y = s * nodes[m];
            if y < -l || y >= l {
                out.fill(Complex64::new(0.0, 0.0));
                return;
            }
            let step = Complex64::from_polar(1.0, base * (y + l));
            let mut z = Complex64::new(inv, 0.0);
            for v in out.iter_mut().take(n / 2) {
                *v = z;
                z *= step;
            }
            let mut z = Complex64::new(inv, 0.0);
            let back = step.conj();
            for k in (n / 2..n).rev() {
                z *= back;
                out[k] = z;
            }
        };
        let out = self.apply_separable(&hat, &row);
        ComplexField::new(self.grid, out)
    }

    /// `F g(ξ) = (2iπ)^{-d/2} ∫ e^{-i x·ξ} g(x) dx` evaluated at `ξ = s · x_m`
    /// for every node `x_m` (rectangle rule, separable). Frequencies beyond
    /// the grid's band `π/Δx` evaluate to zero, since the rule aliases there.
    pub fn continuous_transform_scaled(&self, g: &ComplexField, s: f64) -> Result<ComplexField> {
        self.check(g)?;
        let nodes = self.grid.axis_nodes();
        let dx = self.grid.dx();
        let band = PI / dx;
        let pref = Complex64::from_polar((2.0 * PI).powf(-0.5), -PI / 4.0) * dx;
        let row = |m: usize, out: &mut [Complex64]| {
            let xi = s * nodes[m];
            if xi.abs() > band {
                out.fill(Complex64::new(0.0, 0.0));
                return;
            }
            let step = Complex64::from_polar(1.0, -dx * xi);
            let mut z = pref * Complex64::from_polar(1.0, -nodes[0] * xi);
            for v in out.iter_mut() {
                *v = z;
                z *= step;
            }
        };
        let out = self.apply_separable(g.values(), &row);
        ComplexField::new(self.grid, out)
    }

    /// Applies the same `n × n` matrix along every axis of a row-major array,
    /// with rows generated on demand by `row(m, out)`.
    fn apply_separable(&self, input: &[Complex64], row: &(dyn Fn(usize, &mut [Complex64]) + Sync)) -> Vec<Complex64> {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let total = input.len();
        let mut cur = input.to_vec();
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = n * stride;
            let lines: Vec<usize> = (0..total)
                .step_by(block)
                .flat_map(|start| (0..stride).map(move |s| start + s))
                .collect();
            let column = |m: usize| -> Vec<Complex64> {
                let mut r = vec![Complex64::new(0.0, 0.0); n];
                row(m, &mut r);
                lines
                    .iter()
                    .map(|&off| (0..n).map(|j| r[j] * cur[off + j * stride]).sum())
                    .collect()
            };
            #[cfg(feature = "parallel")]
            let columns: Vec<Vec<Complex64>> = (0..n).into_par_iter().map(column).collect();
            #[cfg(not(feature = "parallel"))]
            let columns: Vec<Vec<Complex64>> = (0..n).map(column).collect();
            let mut next = vec![Complex64::new(0.0, 0.0); total];
            for (m, col) in columns.into_iter().enumerate() {
                for (&off, v) in lines.iter().zip(col) {
                    next[off + m * stride] = v;
                }
            }
            cur = next;
        }
        cur
    }
}
