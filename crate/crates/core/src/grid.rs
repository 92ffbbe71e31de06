//! Periodic computational box, discretized fields and quadrature norms.
//!
//! The box is `[-L, L)^d` with `n` points per axis. Fields are stored
//! row-major (last axis fastest). Integrals use the rectangle rule with
//! weight `dx^d`, which is spectrally accurate for smooth periodic data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the total number of grid points unless overridden.
pub const DEFAULT_MAX_POINTS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl SpatialGrid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        Self::with_budget(dim, n, half_width, DEFAULT_MAX_POINTS)
    }

    pub fn with_budget(dim: usize, n: usize, half_width: f64, max_points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let total = n
            .checked_pow(dim as u32)
            .filter(|&t| t <= max_points)
            .ok_or_else(|| {
                Error::InvalidGrid(format!("{n}^{dim} points exceed budget {max_points}"))
            })?;
        debug_assert!(total > 0);
        Ok(Self { dim, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Nodes `x_j = -L + j dx` along one axis.
    pub fn axis_nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n)
            .map(|j| -self.half_width + j as f64 * dx)
            .collect()
    }

    /// Angular wavenumbers `(pi/L) k` in DFT index order (`0..n/2, -n/2..0`).
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let base = std::f64::consts::PI / self.half_width;
        let n = self.n as i64;
        (0..n)
            .map(|k| {
                let k = if k < n / 2 { k } else { k - n };
                base * k as f64
            })
            .collect()
    }

    /// Per-axis indices of a flat row-major index.
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Calls `f(flat_index, x)` for every node.
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[f64])) {
        let nodes = self.axis_nodes();
        let mut x = [0.0; 3];
        for idx in 0..self.len() {
            let ix = self.unravel(idx);
            for a in 0..self.dim {
                x[a] = nodes[ix[a]];
            }
            f(idx, &x[..self.dim]);
        }
    }

    /// Calls `f(flat_index, xi)` for every DFT bin.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[f64])) {
        let xi = self.axis_wavenumbers();
        let mut k = [0.0; 3];
        for idx in 0..self.len() {
            let ix = self.unravel(idx);
            for a in 0..self.dim {
                k[a] = xi[ix[a]];
            }
            f(idx, &k[..self.dim]);
        }
    }

    /// `|x|^2` at every node.
    pub fn radius_squared(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_node(|i, x| out[i] = x.iter().map(|v| v * v).sum());
        out
    }

    /// `x_axis` at every node.
    pub fn coordinate(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_node(|i, x| out[i] = x[axis]);
        out
    }

    /// Whether the node lies on an outer face of the box.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let ix = self.unravel(idx);
        ix[..self.dim].iter().any(|&i| i == 0 || i == self.n - 1)
    }
}

/// Multi-indices of `dim` components with total order exactly `order`.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == dim {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=left).rev() {
            prefix.push(first);
            rec(dim, left - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Multi-indices with total order at most `order`, sorted by order.
pub fn multi_indices_up_to(dim: usize, order: usize) -> Vec<Vec<usize>> {
    (0..=order).flat_map(|k| multi_indices(dim, k)).collect()
}

/// Lebesgue exponent `r` in `[2, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_infinite() && r > 0.0 {
            return Ok(LpExponent::Infinity);
        }
        if !(r >= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "Lebesgue exponent must be >= 2, got {r}"
            )));
        }
        Ok(LpExponent::Finite(r))
    }

    pub fn value(&self) -> f64 {
        match self {
            LpExponent::Finite(r) => *r,
            LpExponent::Infinity => f64::INFINITY,
        }
    }

    /// Column label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            LpExponent::Finite(r) => format!("L{r}"),
            LpExponent::Infinity => "Linf".to_string(),
        }
    }
}

impl Serialize for LpExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LpExponent::Finite(r) => s.serialize_f64(*r),
            LpExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LpExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let r = match Raw::deserialize(d)? {
            Raw::Num(r) => r,
            Raw::Text(s) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom)?,
        };
        LpExponent::new(r).map_err(serde::de::Error::custom)
    }
}

/// A complex field sampled on the nodes of a [`SpatialGrid`].
///
/// Spectral coefficients use the same container, indexed in DFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x)` at every node. Panics only if `f` returns non-finite values.
    pub fn from_fn(grid: SpatialGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_node(|i, x| values[i] = f(x));
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: SpatialGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Pointwise map `u_j <- f(x_j, u_j)`.
    pub fn pointwise_map(&self, mut f: impl FnMut(&[f64], Complex64) -> Complex64) -> Result<Self> {
        let mut values = self.values.clone();
        self.grid.for_each_node(|i, x| values[i] = f(x, values[i]));
        Self::new(self.grid, values)
    }

    /// `self <- self + a * x`.
    pub fn axpy(&mut self, a: Complex64, x: &ComplexField) -> Result<()> {
        self.check_same_grid(x)?;
        for (y, xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: Complex64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `sum conj(self) * other dx^d`.
    pub fn l2_inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `||u||^2_{L^2}`.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn lp_norm(&self, r: LpExponent) -> f64 {
        match r {
            LpExponent::Infinity => self.max_modulus(),
            LpExponent::Finite(r) if r == 2.0 => self.l2_norm(),
            LpExponent::Finite(r) => {
                let s: f64 = self.values.iter().map(|z| z.norm().powf(r)).sum();
                (s * self.grid.cell_volume()).powf(1.0 / r)
            }
        }
    }

    /// `||self - other||_{L^2}`.
    pub fn l2_distance(&self, other: &ComplexField) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// Largest modulus on the outer faces of the box relative to the global maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.max_modulus();
        if max == 0.0 {
            return 0.0;
        }
        let edge = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.is_boundary(*i))
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        edge / max
    }
}

/// A real field on the grid, e.g. a potential sample or a moment weight.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument("length mismatch".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// The weight `x^alpha` at every node.
pub fn moment_weight(grid: &SpatialGrid, alpha: &[usize]) -> Result<RealField> {
    if alpha.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "multi-index has {} components for a {}-dimensional grid",
            alpha.len(),
            grid.dim()
        )));
    }
    let mut values = vec![0.0; grid.len()];
    grid.for_each_node(|i, x| {
        values[i] = x
            .iter()
            .zip(alpha)
            .map(|(xa, &p)| xa.powi(p as i32))
            .product();
    });
    RealField::new(*grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SpatialGrid::new(1, 12, 1.0).is_err());
        assert!(SpatialGrid::new(1, 4, 1.0).is_err());
        assert!(SpatialGrid::new(4, 8, 1.0).is_err());
        assert!(SpatialGrid::new(1, 8, 0.0).is_err());
        assert!(SpatialGrid::with_budget(3, 256, 1.0, 1 << 20).is_err());
        assert!(SpatialGrid::new(2, 8, 1.0).is_ok());
    }

    #[test]
    fn nodes_and_wavenumbers_are_reproducible() {
        let g = SpatialGrid::new(1, 8, 2.0).unwrap();
        assert_eq!(g.axis_nodes(), vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]);
        let pi2 = std::f64::consts::PI / 2.0;
        let expected: Vec<f64> = [0, 1, 2, 3, -4, -3, -2, -1]
            .iter()
            .map(|&k| pi2 * k as f64)
            .collect();
        assert_eq!(g.axis_wavenumbers(), expected);
        let g2 = SpatialGrid::new(1, 8, 2.0).unwrap();
        assert_eq!(g.axis_nodes(), g2.axis_nodes());
    }

    #[test]
    fn unit_field_on_unit_box_has_l2_norm_sqrt_two() {
        let g = SpatialGrid::new(1, 64, 1.0).unwrap();
        let f = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0)).unwrap();
        let r2 = LpExponent::new(2.0).unwrap();
        assert!((f.lp_norm(r2) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(f.lp_norm(LpExponent::Infinity), 1.0);
    }

    #[test]
    fn lp_exponent_below_two_is_rejected() {
        assert!(LpExponent::new(1.5).is_err());
        assert_eq!(LpExponent::new(f64::INFINITY).unwrap(), LpExponent::Infinity);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        assert_eq!(multi_indices(2, 2).len(), 3);
        assert_eq!(multi_indices(3, 3).len(), 10);
        assert_eq!(multi_indices_up_to(3, 3).len(), 20);
        assert!(multi_indices(3, 2).iter().all(|m| m.iter().sum::<usize>() == 2));
    }

    #[test]
    fn odd_moment_of_symmetric_gaussian_vanishes() {
        let g = SpatialGrid::new(1, 256, 10.0).unwrap();
        let u = ComplexField::from_fn(g, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))
            .unwrap();
        let w = moment_weight(&g, &[1]).unwrap();
        let xu = ComplexField::new(
            g,
            u.values().iter().zip(w.values()).map(|(z, x)| z * x).collect(),
        )
        .unwrap();
        assert!(u.l2_inner(&xu).unwrap().norm() < 1e-13);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let g = SpatialGrid::new(1, 8, 1.0).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexField::new(g, v), Err(Error::NonFinite)));
    }

    #[test]
    fn boundary_nodes_in_two_dimensions() {
        let g = SpatialGrid::new(2, 8, 1.0).unwrap();
        let count = (0..g.len()).filter(|&i| g.is_boundary(i)).count();
        assert_eq!(count, 64 - 36);
    }
}
