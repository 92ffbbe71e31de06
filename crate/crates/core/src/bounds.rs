//! Exponent bookkeeping, the Gronwall envelope of the pseudo-energy, and a
//! numeric ledger for the double-exponential recursion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{growth_fit, GrowthModel};

/// `δ(q) = d(1/2 − 1/q)`; `q = ∞` is allowed.
pub fn delta(q: f64, d: usize) -> f64 {
    let inv = if q.is_infinite() { 0.0 } else { 1.0 / q };
    d as f64 * (0.5 - inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub is_admissible: bool,
    /// Time exponent `p = 2/δ(q)`, infinite when `δ = 0`.
    pub p: f64,
    pub delta: f64,
}

/// Strichartz admissibility of `(p, q)` with `2/p = δ(q)`.
pub fn admissible(q: f64, d: usize) -> Result<Admissibility> {
    if !(q >= 2.0) || d == 0 {
        return Err(Error::InvalidArgument(format!("need q >= 2 and d >= 1, got q={q}, d={d}")));
    }
    let delta = delta(q, d);
    let p = if delta == 0.0 { f64::INFINITY } else { 2.0 / delta };
    let is_admissible = match d {
        1 => true,
        2 => q.is_finite(),
        _ => q < 2.0 * d as f64 / (d as f64 - 2.0),
    };
    Ok(Admissibility {
        is_admissible,
        p,
        delta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub d: usize,
    pub sigma: f64,
    pub q: f64,
    pub p: f64,
    pub theta: f64,
    pub delta_q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderDefects {
    /// `1/q′ − (2σ/q + 1/q)`
    pub space: f64,
    /// `1/p′ − (2σ/θ + 1/p)`
    pub time: f64,
    /// `2/p − δ(q)`
    pub admissibility: f64,
}

pub fn exponent_set(d: usize, sigma: f64) -> Result<ExponentSet> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("dimension {d} not in 1..=3")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    if d == 3 && sigma >= 2.0 {
        return Err(Error::Validation(
            "energy-subcritical constraint sigma < 2/(d-2) violated".into(),
        ));
    }
    let df = d as f64;
    let q = 2.0 * sigma + 2.0;
    Ok(ExponentSet {
        d,
        sigma,
        q,
        p: (4.0 * sigma + 4.0) / (df * sigma),
        theta: 2.0 * sigma * (2.0 * sigma + 2.0) / (2.0 - (df - 2.0) * sigma),
        delta_q: delta(q, d),
    })
}

impl ExponentSet {
    pub fn holder_defects(&self) -> HolderDefects {
        let s = self.sigma;
        HolderDefects {
            space: (1.0 - 1.0 / self.q) - (2.0 * s / self.q + 1.0 / self.q),
            time: (1.0 - 1.0 / self.p) - (2.0 * s / self.theta + 1.0 / self.p),
            admissibility: 2.0 / self.p - self.delta_q,
        }
    }

    /// `2σ/θ`, which lies in `(0, 1)` for energy-subcritical `σ`.
    pub fn theta_ratio(&self) -> f64 {
        2.0 * self.sigma / self.theta
    }

    pub fn admissibility(&self) -> Result<Admissibility> {
        admissible(self.q, self.d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    /// Smallest `C₀` with `1 + ℰ(t) ≤ (1 + ℰ(t₀)) e^{C₀ (t − t₀)}` at every sample.
    pub c0_min: f64,
    pub envelope_holds: bool,
    /// Largest `ℰ(t) / ((1+ℰ₀)e^{C₀(t−t₀)} − 1)` over samples with a positive envelope.
    pub envelope_ratio: f64,
    /// Constant `C` of the derived bound `‖u‖_Σ ≤ C e^{C t}`.
    pub sigma_constant: Option<f64>,
    pub sigma_bound_holds: Option<bool>,
    /// Exponential rate fitted to the Σ¹ series.
    pub sigma_rate: Option<f64>,
}

/// Pseudo-energy Gronwall envelope.
///
/// `C₀` is the largest log-increment rate of `1 + ℰ` between consecutive
/// samples and the envelope is checked on the samples. When a Σ¹ series is
/// given (with the mass), the bound `Σ¹ ≤ √m + 2√d √(2ℰ)` turns the envelope
/// into `‖u‖_Σ ≤ C e^{C t}`, which is checked too.
pub fn gronwall_envelope(
    t: &[f64],
    pseudo: &[f64],
    sigma1: Option<(&[f64], f64, usize)>,
) -> Result<GronwallReport> {
    if t.len() != pseudo.len() {
        return Err(Error::InvalidArgument("t and series lengths differ".into()));
    }
    if t.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: t.len() });
    }
    if pseudo.iter().any(|&e| !(e >= 0.0)) {
        return Err(Error::InvalidArgument("pseudo-energy must be nonnegative".into()));
    }
    let t0 = t[0];
    let e0 = pseudo[0];
    let c0_min = t
        .windows(2)
        .zip(pseudo.windows(2))
        .filter(|(w, _)| w[1] > w[0])
        .map(|(w, e)| ((1.0 + e[1]) / (1.0 + e[0])).ln() / (w[1] - w[0]))
        .fold(0.0, f64::max);
    let envelope = |s: f64| (1.0 + e0) * (c0_min * (s - t0)).exp() - 1.0;
    let mut envelope_holds = true;
    let mut envelope_ratio: f64 = 0.0;
    for (&s, &e) in t.iter().zip(pseudo) {
        let env = envelope(s);
        if e > env + 1e-12 * (1.0 + env) {
            envelope_holds = false;
        }
        if env > 0.0 {
            envelope_ratio = envelope_ratio.max(e / env);
        }
    }
    let (sigma_constant, sigma_bound_holds, sigma_rate) = match sigma1 {
        Some((s1, mass, d)) => {
            if s1.len() != t.len() {
                return Err(Error::InvalidArgument("Σ series length differs".into()));
            }
            let c = (mass.sqrt() + 2.0 * (d as f64).sqrt() * (2.0 * (1.0 + e0)).sqrt()).max(0.5 * c0_min);
            let holds = t
                .iter()
                .zip(s1)
                .all(|(&s, &v)| v <= c * (c * (s - t0)).exp() * (1.0 + 1e-12));
            let rate = growth_fit(t, s1, GrowthModel::Exp).ok().map(|f| f.rate);
            (Some(c), Some(holds), rate)
        }
        None => (None, None, None),
    };
    Ok(GronwallReport {
        c0_min,
        envelope_holds,
        envelope_ratio,
        sigma_constant,
        sigma_bound_holds,
        sigma_rate,
    })
}

/// Which Strichartz branch supplies the per-interval factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerBranch {
    /// Factor `20/9`.
    Finite,
    /// `p = ∞` branch, factor `10/9`.
    Endpoint,
}

impl LedgerBranch {
    pub fn factor(&self) -> f64 {
        match self {
            LedgerBranch::Finite => 20.0 / 9.0,
            LedgerBranch::Endpoint => 10.0 / 9.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LedgerParams {
    pub c: f64,
    pub alpha: f64,
    pub tau0: f64,
    /// Right-hand side of `C τ^α e^{Ct} = κ`.
    pub kappa: f64,
    pub branch: LedgerBranch,
    /// Drop the `e^{Ct}` factor from the step rule (confining potentials).
    pub confining: bool,
}

impl Default for LedgerParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            alpha: 1.0,
            tau0: 1.0,
            kappa: 0.1,
            branch: LedgerBranch::Finite,
            confining: false,
        }
    }
}

impl LedgerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidArgument("alpha must be positive".into()));
        }
        if !(self.c > 0.0) || !(self.tau0 > 0.0) || !(self.kappa > 0.0) {
            return Err(Error::InvalidArgument("C, tau0 and kappa must be positive".into()));
        }
        Ok(())
    }

    /// Unclamped step solving `C τ^α e^{Ct} = κ` (or `C τ^α = κ` when confining).
    pub fn tau_rule(&self, t: f64) -> f64 {
        let growth = if self.confining { 0.0 } else { self.c * t / self.alpha };
        (self.kappa / self.c).powf(1.0 / self.alpha) * (-growth).exp()
    }

    pub fn tau(&self, t: f64) -> f64 {
        self.tau_rule(t).min(self.tau0).min(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub j: usize,
    pub t: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundLedger {
    pub params: LedgerParams,
    pub t: f64,
    pub w0: f64,
    pub f: f64,
    pub tau: f64,
    /// Whether `τ` came from the step rule rather than a clamp.
    pub tau_from_rule: bool,
    /// `C τ^α e^{Ct} / κ − 1` for the unclamped rule value.
    pub tau_identity_defect: f64,
    pub n: usize,
    pub factor: f64,
    pub amplification: f64,
    /// `B_N`; infinite once it leaves the `f64` range.
    pub bound: f64,
    /// `ln B_N`, tracked separately so it stays finite when `B_N` overflows.
    pub log_bound: f64,
    /// `C₁` of the envelope `C₁ e^{e^{C₁ t}} (w0 + f)`, or `C₁ e^{C₁ t}(w0 + f)` when confining.
    pub c1: f64,
    /// Natural log of the envelope value.
    pub log_envelope: f64,
    pub envelope_holds: bool,
    pub rows: Vec<LedgerRow>,
}

impl BoundLedger {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,t_j,B_j\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", r.j, r.t, r.bound));
        }
        s
    }
}

/// `ln(e^a + e^b)`
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Largest interval count [`double_exp_ledger`] will tabulate.
pub const MAX_INTERVALS: usize = 10_000_000;

/// Runs `B_j = k (C B_{j−1} + f(t))` over `N = ⌈t/τ⌉` intervals from `B_0 = w0`.
///
/// The envelope constant comes from `N ≤ 2 + t M e^{Ct/α}` with
/// `M = 1/τ₀ + (C/κ)^{1/α}`, `B_N ≤ e^{N(A + k)}(w0 + f)` with
/// `A = ln max(kC, e)`, and `X e^{bt} ≤ X − 1 + e^{Xbt}` for `X ≥ 1`.
pub fn double_exp_ledger(params: &LedgerParams, f: &dyn Fn(f64) -> f64, t: f64, w0: f64) -> Result<BoundLedger> {
    params.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument("t must be finite and nonnegative".into()));
    }
    if !(w0 >= 0.0) {
        return Err(Error::InvalidArgument("w0 must be nonnegative".into()));
    }
    let fv = f(t);
    if !(fv >= 0.0) || !fv.is_finite() {
        return Err(Error::InvalidArgument(format!("f(t) = {fv} must be finite and nonnegative")));
    }
    let c = params.c;
    let k = params.branch.factor();
    let rule = params.tau_rule(t);
    let tau = params.tau(t);
    let growth = if params.confining { 1.0 } else { (c * t).exp() };
    let tau_identity_defect = c * rule.powf(params.alpha) * growth / params.kappa - 1.0;
    let n_real = if t == 0.0 { 0.0 } else { (t / tau - 1e-9).ceil().max(1.0) };
    if n_real > MAX_INTERVALS as f64 {
        return Err(Error::InvalidArgument(format!(
            "ledger needs {n_real:e} intervals, more than {MAX_INTERVALS}"
        )));
    }
    let n = n_real as usize;
    let mut rows = Vec::with_capacity(n + 1);
    let mut b = w0;
    let mut log_b = w0.ln();
    let (log_k, log_c, log_f) = (k.ln(), c.ln(), fv.ln());
    rows.push(LedgerRow { j: 0, t: 0.0, bound: b });
    for j in 1..=n {
        b = k * (c * b + fv);
        log_b = log_k + log_add(log_c + log_b, log_f);
        rows.push(LedgerRow {
            j,
            t: (j as f64 * tau).min(t),
            bound: b,
        });
    }
    let r = k * c;
    let a = r.max(std::f64::consts::E).ln();
    let m = 1.0 / params.tau0 + (c / params.kappa).powf(1.0 / params.alpha);
    // C₁ itself can overflow, so the envelope is assembled from ln C₁
    let log_c1 = if params.confining {
        ((a + k) * m).ln().max(2.0 * (a + k))
    } else {
        let x = ((a + k) * m).max(1.0);
        (x * (1.0 + c / params.alpha)).ln().max(2.0 * (a + k) + x - 1.0)
    };
    let c1 = log_c1.exp();
    let c1t = if t == 0.0 { 0.0 } else { c1 * t };
    let log_envelope = if params.confining {
        log_c1 + c1t + (w0 + fv).ln()
    } else {
        log_c1 + c1t.exp() + (w0 + fv).ln()
    };
    Ok(BoundLedger {
        params: params.clone(),
        t,
        w0,
        f: fv,
        tau,
        tau_from_rule: rule <= params.tau0 && rule <= t,
        tau_identity_defect,
        n,
        factor: k * c,
        amplification: r.powi(n as i32),
        bound: b,
        log_bound: log_b,
        c1,
        log_envelope,
        envelope_holds: log_b <= log_envelope,
        rows,
    })
}

/// Iterates the ledger `levels` times, each level driven by the previous
/// level's bound as its source term.
pub fn ledger_chain(params: &LedgerParams, t: f64, w0: &[f64], f0: f64) -> Result<Vec<BoundLedger>> {
    let mut out: Vec<BoundLedger> = Vec::with_capacity(w0.len());
    let mut source = f0;
    for &w in w0 {
        let l = double_exp_ledger(params, &|_| source, t, w)?;
        source = l.bound;
        out.push(l);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_exponents() {
        let e = exponent_set(2, 1.0).unwrap();
        assert_eq!((e.q, e.p, e.theta), (4.0, 4.0, 4.0));
        let e = exponent_set(1, 2.0).unwrap();
        assert_eq!((e.q, e.p, e.theta), (6.0, 6.0, 6.0));
        let e = exponent_set(3, 1.0).unwrap();
        assert_eq!(e.q, 4.0);
        assert!((e.p - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.theta, 8.0);
    }

    #[test]
    fn admissibility_edges() {
        let a = admissible(2.0, 2).unwrap();
        assert!(a.is_admissible && a.delta == 0.0 && a.p.is_infinite());
        let a = admissible(f64::INFINITY, 1).unwrap();
        assert!(a.is_admissible && a.delta == 0.5 && a.p == 4.0);
        assert!(!admissible(6.0, 3).unwrap().is_admissible);
        assert!(!admissible(f64::INFINITY, 2).unwrap().is_admissible);
    }

    #[test]
    fn ledger_worked_example() {
        let l = double_exp_ledger(&LedgerParams::default(), &|_| 0.0, 1.0, 1.0).unwrap();
        assert!((l.tau - 0.1 * (-1f64).exp()).abs() < 1e-15);
        assert_eq!(l.n, 28);
        assert!((l.amplification / (20f64 / 9.0).powi(28) - 1.0).abs() < 1e-14);
        assert!(l.tau_identity_defect.abs() < 1e-14);
    }

    #[test]
    fn zero_inputs_give_zero() {
        for t in [0.0, 0.5, 3.0] {
            let l = double_exp_ledger(&LedgerParams::default(), &|_| 0.0, t, 0.0).unwrap();
            assert_eq!(l.bound, 0.0);
        }
    }

    #[test]
    fn gronwall_constant_series() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let e = vec![0.7; 20];
        let r = gronwall_envelope(&t, &e, None).unwrap();
        assert_eq!(r.c0_min, 0.0);
        assert!(r.envelope_holds);
    }
}
