//! Hill-equation pairs `μ̈ + Ωμ = 0`, `ν̈ + Ων = 0`, the fixed-point
//! construction of the pair normalized at infinity, and the lens transform
//!
//! ```text
//! u(t, x) = b^{-d/2} v(ζ(t), x/b) e^{i a |x|²/2},   a = ν̇/ν, b = ν, ζ = μ/ν.
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::grid::ComplexField;
use crate::interp::CubicHermite;
use crate::potentials::TimeFunction;

/// `(μ, μ̇, ν, ν̇)` at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HillState {
    pub mu: f64,
    pub mu_dot: f64,
    pub nu: f64,
    pub nu_dot: f64,
}

impl HillState {
    /// `μ(0) = 0, μ̇(0) = 1, ν(0) = 1, ν̇(0) = 0`.
    pub const FUNDAMENTAL: HillState = HillState {
        mu: 0.0,
        mu_dot: 1.0,
        nu: 1.0,
        nu_dot: 0.0,
    };

    pub fn wronskian(&self) -> f64 {
        self.nu * self.mu_dot - self.nu_dot * self.mu
    }

    fn as_array(&self) -> [f64; 4] {
        [self.mu, self.mu_dot, self.nu, self.nu_dot]
    }

    fn from_array(a: [f64; 4]) -> Self {
        HillState {
            mu: a[0],
            mu_dot: a[1],
            nu: a[2],
            nu_dot: a[3],
        }
    }
}

fn rhs(omega: &TimeFunction, t: f64, y: [f64; 4]) -> Result<[f64; 4]> {
    let w = omega.value(t)?;
    Ok([y[1], -w * y[0], y[3], -w * y[2]])
}

fn rk4(omega: &TimeFunction, t: f64, h: f64, y: [f64; 4]) -> Result<[f64; 4]> {
    let add = |y: [f64; 4], k: [f64; 4], s: f64| {
        let mut out = y;
        for i in 0..4 {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = rhs(omega, t, y)?;
    let k2 = rhs(omega, t + h / 2.0, add(y, k1, h / 2.0))?;
    let k3 = rhs(omega, t + h / 2.0, add(y, k2, h / 2.0))?;
    let k4 = rhs(omega, t + h, add(y, k3, h))?;
    let mut out = y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// RK4 along a monotone (increasing or decreasing) sequence of times.
fn integrate_path(omega: &TimeFunction, init: HillState, times: &[f64]) -> Result<Vec<HillState>> {
    let mut out = Vec::with_capacity(times.len());
    let mut y = init.as_array();
    out.push(init);
    for w in times.windows(2) {
        y = rk4(omega, w[0], w[1] - w[0], y)?;
        out.push(HillState::from_array(y));
    }
    Ok(out)
}

/// Uniform mesh from `t0` to `t1` with step at most `h`, endpoints included.
pub fn uniform_mesh(t0: f64, t1: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !(t1 > t0) {
        return Err(Error::InvalidArgument(format!(
            "mesh needs t1 > t0 and h > 0 (t0 = {t0}, t1 = {t1}, h = {h})"
        )));
    }
    let n = ((t1 - t0) / h - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect())
}

/// Geometric mesh with `intervals` equal steps in `ln t` from `t0 > 0` to `t1`.
pub fn geometric_mesh(t0: f64, t1: f64, intervals: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t1 > t0) || intervals == 0 {
        return Err(Error::InvalidArgument(format!(
            "geometric mesh needs 0 < t0 < t1 (t0 = {t0}, t1 = {t1})"
        )));
    }
    let r = (t1 / t0).ln();
    let mut m: Vec<f64> = (0..=intervals)
        .map(|i| t0 * (r * i as f64 / intervals as f64).exp())
        .collect();
    m[0] = t0;
    m[intervals] = t1;
    Ok(m)
}

/// Sampled fundamental pair with cubic Hermite dense output.
#[derive(Clone, Debug)]
pub struct HillSolution {
    omega: TimeFunction,
    t: Vec<f64>,
    states: Vec<HillState>,
    mu: CubicHermite,
    mu_dot: CubicHermite,
    nu: CubicHermite,
    nu_dot: CubicHermite,
    max_wronskian_drift: f64,
}

impl HillSolution {
    fn from_samples(omega: TimeFunction, t: Vec<f64>, states: Vec<HillState>) -> Result<Self> {
        let w: Vec<f64> = t.iter().map(|&s| omega.value(s)).collect::<Result<_>>()?;
        let col = |f: fn(&HillState) -> f64| states.iter().map(f).collect::<Vec<f64>>();
        let mu = col(|s| s.mu);
        let mu_dot = col(|s| s.mu_dot);
        let nu = col(|s| s.nu);
        let nu_dot = col(|s| s.nu_dot);
        let mu_dd: Vec<f64> = mu.iter().zip(&w).map(|(m, w)| -w * m).collect();
        let nu_dd: Vec<f64> = nu.iter().zip(&w).map(|(n, w)| -w * n).collect();
        let max_wronskian_drift = states
            .iter()
            .map(|s| (s.wronskian() - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            mu: CubicHermite::new(t.clone(), mu, mu_dot.clone())?,
            mu_dot: CubicHermite::new(t.clone(), mu_dot, mu_dd)?,
            nu: CubicHermite::new(t.clone(), nu, nu_dot.clone())?,
            nu_dot: CubicHermite::new(t.clone(), nu_dot, nu_dd)?,
            omega,
            t,
            states,
            max_wronskian_drift,
        })
    }

    pub fn omega(&self) -> &TimeFunction {
        &self.omega
    }

    pub fn mesh(&self) -> &[f64] {
        &self.t
    }

    pub fn states(&self) -> &[HillState] {
        &self.states
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    /// `max |W(t_i) − 1|` over the mesh.
    pub fn max_wronskian_drift(&self) -> f64 {
        self.max_wronskian_drift
    }

    pub fn eval(&self, t: f64) -> Result<HillState> {
        Ok(HillState {
            mu: self.mu.eval(t)?,
            mu_dot: self.mu_dot.eval(t)?,
            nu: self.nu.eval(t)?,
            nu_dot: self.nu_dot.eval(t)?,
        })
    }

    pub fn nu(&self, t: f64) -> Result<f64> {
        self.nu.eval(t)
    }

    /// `ζ = μ/ν`.
    pub fn zeta(&self, t: f64) -> Result<f64> {
        Ok(self.mu.eval(t)? / self.nu.eval(t)?)
    }

    /// CSV with columns `t, mu, mu_dot, nu, nu_dot, W, zeta, H` where
    /// `H = ν^{2−dσ}` evaluated at `ζ(t)`.
    pub fn to_csv(&self, d: usize, sigma: f64) -> String {
        let e = 2.0 - d as f64 * sigma;
        let mut out = String::from("t,mu,mu_dot,nu,nu_dot,W,zeta,H\n");
        for (t, s) in self.t.iter().zip(&self.states) {
            let h = if e == 0.0 { 1.0 } else { s.nu.powf(e) };
            let _ = writeln!(
                out,
                "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{h:.16e}",
                s.mu,
                s.mu_dot,
                s.nu,
                s.nu_dot,
                s.wronskian(),
                s.mu / s.nu
            );
        }
        out
    }
}

fn first_zero(t: &[f64], states: &[HillState]) -> Option<f64> {
    for i in 0..states.len() {
        if states[i].nu <= 0.0 {
            if i == 0 {
                return Some(t[0]);
            }
            let (a, b) = (states[i - 1].nu, states[i].nu);
            return Some(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    None
}

/// Integrates the Hill pair by classical RK4 on `mesh` (increasing).
///
/// Rejects initial data whose Wronskian is not 1 and solutions where `ν`
/// reaches zero.
pub fn solve_hill(omega: &TimeFunction, init: HillState, mesh: &[f64]) -> Result<HillSolution> {
    if mesh.len() < 2 || mesh.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("mesh must be increasing with two or more points".into()));
    }
    if (init.wronskian() - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "initial Wronskian is {}, expected 1",
            init.wronskian()
        )));
    }
    let states = integrate_path(omega, init, mesh)?;
    if let Some(t) = first_zero(mesh, &states) {
        return Err(Error::ZeroCrossing { t });
    }
    HillSolution::from_samples(omega.clone(), mesh.to_vec(), states)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairSettings {
    /// Matching time `T` where `ν∞(T) = 1` and `μ∞(T) = T` before normalization.
    pub t_match: f64,
    pub t_max: f64,
    pub tol: f64,
    /// Number of geometric intervals on `[T, T_max]`.
    pub intervals: usize,
    pub max_iterations: usize,
    /// Extend the pair backward to this time by RK4, if below `T`.
    pub extend_to: Option<f64>,
    pub backward_step: f64,
}

impl Default for PairSettings {
    fn default() -> Self {
        Self {
            t_match: 20.0,
            t_max: 2000.0,
            tol: 1e-12,
            intervals: 8000,
            max_iterations: 200,
            extend_to: None,
            backward_step: 1e-3,
        }
    }
}

pub const CONTRACTION_LIMIT: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    /// `∫_T^∞ (t−T)|Ω|` including the tail bound.
    pub contraction: f64,
    /// Certified `C T_max^{2−γ}/(γ−2)`.
    pub tail_bound: f64,
    pub iterations_nu: usize,
    pub iterations_mu: usize,
    pub residual_nu: f64,
    pub residual_mu: f64,
    /// Wronskian of the raw pair, which equals `ν∞(+∞)`.
    pub raw_wronskian: f64,
    pub wronskian_spread: f64,
}

/// Pair normalized at infinity: `ν → 1`, `μ̇ → 1`, unit Wronskian.
#[derive(Clone, Debug)]
pub struct ScatteringPair {
    pub solution: HillSolution,
    pub report: PairReport,
    /// Raw fixed-point defects on `[T, T_max]`: `ν∞ − 1` and `μ∞ − t`.
    pub z_nu: Vec<f64>,
    pub z_mu: Vec<f64>,
    pub forward_mesh: Vec<f64>,
}

/// Cumulative `∫_{s_0}^{s_i} f ds` on a uniform mesh, fourth order.
fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let piece = if n < 4 {
            0.5 * h * (f[i] + f[i + 1])
        } else if i == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == n - 2 {
            h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        } else {
            h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

struct KernelMesh {
    t: Vec<f64>,
    h: f64,
    t_match: f64,
}

impl KernelMesh {
    /// Returns `K[f](t_i) = ∫_T^{t_i}(s−T) f + (t_i−T) ∫_{t_i}^∞ f` and `∫_{t_i}^∞ f`.
    fn apply(&self, f: &[f64], tail: f64) -> (Vec<f64>, Vec<f64>) {
        let jac: Vec<f64> = self.t.iter().zip(f).map(|(t, v)| v * t).collect();
        let weighted: Vec<f64> = self
            .t
            .iter()
            .zip(f)
            .map(|(t, v)| (t - self.t_match) * v * t)
            .collect();
        let a = cumulative(&weighted, self.h);
        let c = cumulative(&jac, self.h);
        let total = c[c.len() - 1];
        let b: Vec<f64> = c.iter().map(|ci| total - ci + tail).collect();
        let k = self
            .t
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(t, (ai, bi))| ai + (t - self.t_match) * bi)
            .collect();
        (k, b)
    }
}

/// Solves `z = r_T + P_T z` for `z = ν∞ − 1` and `z = μ∞ − t` by Picard
/// iteration, then normalizes the pair so that its Wronskian is 1.
pub fn construct_scattering_pair(omega: &TimeFunction, s: &PairSettings) -> Result<ScatteringPair> {
    let big_t = s.t_match;
    if !(big_t > 0.0) {
        return Err(Error::InvalidArgument("matching time T must be positive".into()));
    }
    if !(s.t_max >= 10.0 * big_t) {
        return Err(Error::InvalidArgument(format!(
            "T_max = {} must be at least 10 T = {}",
            s.t_max,
            10.0 * big_t
        )));
    }
    let (c_env, gamma) = omega.decay_envelope().ok_or_else(|| {
        Error::InvalidArgument("scattering pair needs Ω with a known bound C<t>^-γ".into())
    })?;
    if !(gamma > 2.0) {
        return Err(Error::InvalidArgument(format!(
            "scattering pair needs decay exponent γ > 2, got {gamma}"
        )));
    }
    let intervals = s.intervals.max(8);
    let t = geometric_mesh(big_t, s.t_max, intervals)?;
    let h = (s.t_max / big_t).ln() / intervals as f64;
    let w: Vec<f64> = t.iter().map(|&x| omega.value(x)).collect::<Result<_>>()?;
    let mesh = KernelMesh { t: t.clone(), h, t_match: big_t };

    let tail_bound = if c_env == 0.0 {
        0.0
    } else {
        c_env * s.t_max.powf(2.0 - gamma) / (gamma - 2.0)
    };
    let abs_weighted: Vec<f64> = t
        .iter()
        .zip(&w)
        .map(|(x, o)| (x - big_t) * o.abs() * x)
        .collect();
    let contraction = cumulative(&abs_weighted, h).last().copied().unwrap_or(0.0) + tail_bound;
    if contraction >= CONTRACTION_LIMIT {
        return Err(Error::Contraction {
            estimate: contraction,
            limit: CONTRACTION_LIMIT,
            t_start: big_t,
        });
    }

    let last = t.len() - 1;
    let t_end = t[last];
    // Tail of ∫_{T_max}^∞ Ω (base + z) with Ω ~ t^{-γ}: the base part is a
    // pure power, z is treated as locally z(T) + T ż(T) ln(t/T).
    let w_end = w[last];
    let tail = |base_end: f64, base_power: f64, z_end: f64, zdot_end: f64| {
        let p = gamma - base_power;
        let base = if p > 1.0 { w_end * base_end * t_end / (p - 1.0) } else { 0.0 };
        let q = gamma - 1.0;
        base + w_end * t_end / q * (z_end + t_end * zdot_end / q)
    };

    let solve = |base: &dyn Fn(usize) -> f64, base_power: f64, weighted: bool| -> Result<(Vec<f64>, Vec<f64>, usize, f64)> {
        let mut z = vec![0.0; t.len()];
        let mut zdot_end = 0.0;
        let mut last_change = f64::NAN;
        for it in 1..=s.max_iterations {
            let f: Vec<f64> = (0..t.len()).map(|i| w[i] * (base(i) + z[i])).collect();
            let (next, b) = mesh.apply(&f, tail(base(last), base_power, z[last], zdot_end));
            let change = next
                .iter()
                .zip(&z)
                .zip(&t)
                .filter(|(_, ti)| !weighted || **ti > big_t)
                .map(|((a, b), ti)| {
                    let d = (a - b).abs();
                    if weighted {
                        d / (ti - big_t)
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max);
            z = next;
            zdot_end = b[last];
            last_change = change;
            if change <= s.tol {
                let f: Vec<f64> = (0..t.len()).map(|i| w[i] * (base(i) + z[i])).collect();
                let (check, b) = mesh.apply(&f, tail(base(last), base_power, z[last], zdot_end));
                let residual = check
                    .iter()
                    .zip(&z)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                return Ok((z, b, it, residual));
            }
            if !change.is_finite() {
                break;
            }
        }
        Err(Error::NoConvergence {
            iterations: s.max_iterations,
            last_change,
        })
    };

    let (z_nu, b_nu, it_nu, res_nu) = solve(&|_| 1.0, 0.0, false)?;
    let (z_mu, b_mu, it_mu, res_mu) = solve(&|i| t[i], 1.0, true)?;

    let raw: Vec<HillState> = (0..t.len())
        .map(|i| HillState {
            mu: t[i] + z_mu[i],
            mu_dot: 1.0 + b_mu[i],
            nu: 1.0 + z_nu[i],
            nu_dot: b_nu[i],
        })
        .collect();
    let raw_w = raw[0].wronskian();
    let wronskian_spread = raw
        .iter()
        .map(|r| (r.wronskian() - raw_w).abs() / raw_w)
        .fold(0.0, f64::max);
    let forward: Vec<HillState> = raw
        .iter()
        .map(|r| HillState {
            nu: r.nu / raw_w,
            nu_dot: r.nu_dot / raw_w,
            ..*r
        })
        .collect();

    let (mesh_all, states_all) = match s.extend_to {
        Some(t0) if t0 < big_t => {
            let back = uniform_mesh(t0, big_t, s.backward_step)?;
            let rev: Vec<f64> = back.iter().rev().copied().collect();
            let mut path = integrate_path(omega, forward[0], &rev)?;
            path.reverse();
            let mut m = back;
            m.pop();
            path.pop();
            m.extend_from_slice(&t);
            path.extend_from_slice(&forward);
            (m, path)
        }
        _ => (t.clone(), forward),
    };
    if let Some(z) = first_zero(&mesh_all, &states_all) {
        return Err(Error::ZeroCrossing { t: z });
    }
    let solution = HillSolution::from_samples(omega.clone(), mesh_all, states_all)?;
    if solution.max_wronskian_drift() > 1e-6 {
        return Err(Error::Validation(format!(
            "scattering pair Wronskian drift {:e} exceeds 1e-6",
            solution.max_wronskian_drift()
        )));
    }
    Ok(ScatteringPair {
        solution,
        report: PairReport {
            contraction,
            tail_bound,
            iterations_nu: it_nu,
            iterations_mu: it_mu,
            residual_nu: res_nu,
            residual_mu: res_mu,
            raw_wronskian: raw_w,
            wronskian_spread,
        },
        z_nu,
        z_mu,
        forward_mesh: t,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensResiduals {
    /// `|ḃ − ab|`
    pub b_dot: f64,
    /// `|ȧ + a² + Ω|`
    pub riccati: f64,
    /// `|ζ̇ − 1/b²|`
    pub zeta_dot: f64,
    /// `|b^{dσ−2} H(ζ) − 1|`
    pub h_identity: f64,
}

impl LensResiduals {
    pub fn max(&self) -> f64 {
        self.b_dot.max(self.riccati).max(self.zeta_dot).max(self.h_identity)
    }
}

/// Lens coefficients and the nonlinearity factor `H(s) = ν(ζ⁻¹(s))^{2−dσ}`.
#[derive(Clone, Debug)]
pub struct LensMap {
    hill: HillSolution,
    dim: usize,
    sigma: f64,
    t_of_zeta: CubicHermite,
    zeta_nodes: Vec<f64>,
    h_table: Vec<f64>,
    h_dot_table: Vec<f64>,
    residuals: LensResiduals,
}

pub const LENS_RESIDUAL_TOL: f64 = 1e-7;

impl LensMap {
    pub fn hill(&self) -> &HillSolution {
        &self.hill
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn exponent(&self) -> f64 {
        2.0 - self.dim as f64 * self.sigma
    }

    pub fn residuals(&self) -> &LensResiduals {
        &self.residuals
    }

    /// `(ζ_i, H_i, Ḣ_i)` at the mesh nodes.
    pub fn h_table(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.zeta_nodes, &self.h_table, &self.h_dot_table)
    }

    pub fn b(&self, t: f64) -> Result<f64> {
        self.hill.nu(t)
    }

    pub fn a(&self, t: f64) -> Result<f64> {
        let s = self.hill.eval(t)?;
        Ok(s.nu_dot / s.nu)
    }

    pub fn zeta(&self, t: f64) -> Result<f64> {
        self.hill.zeta(t)
    }

    /// `ζ⁻¹(s)`.
    pub fn t_of_zeta(&self, s: f64) -> Result<f64> {
        self.t_of_zeta.eval(s)
    }

    pub fn zeta_domain(&self) -> (f64, f64) {
        self.t_of_zeta.domain()
    }

    pub fn h(&self, s: f64) -> Result<f64> {
        let e = self.exponent();
        if e == 0.0 {
            return Ok(1.0);
        }
        let t = self.t_of_zeta(s)?;
        Ok(self.hill.nu(t)?.powf(e))
    }

    /// `Ḣ(s) = (2 − dσ) ν^{3−dσ} ν̇` at `t = ζ⁻¹(s)`.
    pub fn h_dot(&self, s: f64) -> Result<f64> {
        let e = self.exponent();
        if e == 0.0 {
            return Ok(0.0);
        }
        let t = self.t_of_zeta(s)?;
        let st = self.hill.eval(t)?;
        Ok(e * st.nu.powf(e + 1.0) * st.nu_dot)
    }
}

/// Builds `ζ⁻¹` and the `H` tables and checks the lens relations on the mesh.
pub fn build_lens_map(hill: HillSolution, dim: usize, sigma: f64) -> Result<LensMap> {
    let states = hill.states();
    let t = hill.mesh();
    if let Some(z) = first_zero(t, states) {
        return Err(Error::ZeroCrossing { t: z });
    }
    let zeta: Vec<f64> = states.iter().map(|s| s.mu / s.nu).collect();
    if zeta.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation("ζ is not strictly increasing on the mesh".into()));
    }
    let slopes: Vec<f64> = states.iter().map(|s| s.nu * s.nu).collect();
    let t_of_zeta = CubicHermite::monotone(zeta.clone(), t.to_vec(), Some(slopes))?;
    let e = 2.0 - dim as f64 * sigma;
    let h_table: Vec<f64> = states
        .iter()
        .map(|s| if e == 0.0 { 1.0 } else { s.nu.powf(e) })
        .collect();
    let h_dot_table: Vec<f64> = states
        .iter()
        .map(|s| if e == 0.0 { 0.0 } else { e * s.nu.powf(e + 1.0) * s.nu_dot })
        .collect();
    let mut map = LensMap {
        hill,
        dim,
        sigma,
        t_of_zeta,
        zeta_nodes: zeta,
        h_table,
        h_dot_table,
        residuals: LensResiduals {
            b_dot: 0.0,
            riccati: 0.0,
            zeta_dot: 0.0,
            h_identity: 0.0,
        },
    };
    map.residuals = lens_residuals(&map)?;
    if map.residuals.max() > LENS_RESIDUAL_TOL {
        return Err(Error::Validation(format!(
            "lens relations violated: {:?}",
            map.residuals
        )));
    }
    Ok(map)
}

fn lens_residuals(map: &LensMap) -> Result<LensResiduals> {
    let hill = &map.hill;
    let t = hill.mesh();
    let n = t.len();
    let stride = (n / 4000).max(1);
    let mut r = LensResiduals {
        b_dot: 0.0,
        riccati: 0.0,
        zeta_dot: 0.0,
        h_identity: 0.0,
    };
    let a_of = |s: f64| -> Result<f64> {
        let st = hill.eval(s)?;
        Ok(st.nu_dot / st.nu)
    };
    for i in (1..n - 1).step_by(stride) {
        let ti = t[i];
        let delta = 1e-5 * ti.abs().max(1.0);
        let delta = delta.min(0.5 * (t[i] - t[i - 1])).min(0.5 * (t[i + 1] - t[i]));
        let st = hill.states()[i];
        let b = st.nu;
        let a = st.nu_dot / st.nu;
        let bp = (hill.nu(ti + delta)? - hill.nu(ti - delta)?) / (2.0 * delta);
        r.b_dot = r.b_dot.max((bp - a * b).abs());
        let ap = (a_of(ti + delta)? - a_of(ti - delta)?) / (2.0 * delta);
        r.riccati = r.riccati.max((ap + a * a + hill.omega().value(ti)?).abs());
        let zp = (hill.zeta(ti + delta)? - hill.zeta(ti - delta)?) / (2.0 * delta);
        r.zeta_dot = r.zeta_dot.max((zp - 1.0 / (b * b)).abs());
        let s = st.mu / st.nu;
        let e = map.exponent();
        let id = if e == 0.0 { 1.0 } else { b.powf(-e) * map.h(s)? };
        r.h_identity = r.h_identity.max((id - 1.0).abs());
    }
    Ok(r)
}

fn mass_check(before: f64, after: f64) -> Result<()> {
    if before == 0.0 {
        return Ok(());
    }
    let fraction = (before - after).abs() / before;
    if fraction > 1e-8 {
        return Err(Error::BoundaryMass { fraction });
    }
    Ok(())
}

/// `u(t, x) = b^{-d/2} v(x/b) e^{i a|x|²/2}` for `v` given at time `ζ(t)`.
pub fn lens_forward(fourier: &Fourier, v: &ComplexField, map: &LensMap, t: f64) -> Result<ComplexField> {
    let b = map.b(t)?;
    let a = map.a(t)?;
    let d = fourier.grid().dim() as i32;
    let resampled = fourier.resample_scaled(v, 1.0 / b)?;
    let scale = b.powf(-0.5 * d as f64);
    let u = resampled.pointwise_map(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * Complex64::from_polar(scale, 0.5 * a * r2)
    })?;
    mass_check(v.mass(), u.mass())?;
    Ok(u)
}

/// Inverse of [`lens_forward`]: `v(y) = b^{d/2} u(b y) e^{−i a b²|y|²/2}`.
pub fn lens_inverse(fourier: &Fourier, u: &ComplexField, map: &LensMap, t: f64) -> Result<ComplexField> {
    let b = map.b(t)?;
    let a = map.a(t)?;
    let d = fourier.grid().dim() as f64;
    let dechirped = u.pointwise_map(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * Complex64::from_polar(1.0, -0.5 * a * r2)
    })?;
    let mut v = fourier.resample_scaled(&dechirped, b)?;
    v.scale(Complex64::new(b.powf(0.5 * d), 0.0));
    mass_check(u.mass(), v.mass())?;
    Ok(v)
}
