//! Oracles shared by the integration tests.

#![allow(dead_code)]

/// Independent reference: RK4 in `s = ln t` backward from a far horizon with
/// leading asymptotic data `ν ≈ 1`, `μ ≈ t`. Returns `(ν, ν̇, μ, μ̇)` at `ts`.
pub fn backward_oracle(omega: impl Fn(f64) -> f64, gamma: f64, ts: &[f64]) -> Vec<[f64; 4]> {
    let far: f64 = 1e7;
    let rhs = |s: f64, y: [f64; 4]| {
        let t = s.exp();
        let w = omega(t);
        [y[1], -t * t * w * y[0] + y[1], y[3], -t * t * w * y[2] + y[3]]
    };
    let nu_dot_far = far.powf(1.0 - gamma) / (gamma - 1.0);
    let mu_dot_far = 1.0 + far.powf(2.0 - gamma) / (gamma - 2.0);
    let mut y = [1.0, far * nu_dot_far, far, far * mu_dot_far];
    let mut s = far.ln();
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| ts[b].total_cmp(&ts[a]));
    let mut out = vec![[0.0; 4]; ts.len()];
    let h = 2e-4;
    for idx in order {
        let target = ts[idx].ln();
        while s > target + 1e-15 {
            let hh = -(s - target).min(h);
            let add = |y: [f64; 4], k: [f64; 4], c: f64| {
                let mut o = y;
                for i in 0..4 {
                    o[i] += c * k[i];
                }
                o
            };
            let k1 = rhs(s, y);
            let k2 = rhs(s + hh / 2.0, add(y, k1, hh / 2.0));
            let k3 = rhs(s + hh / 2.0, add(y, k2, hh / 2.0));
            let k4 = rhs(s + hh, add(y, k3, hh));
            for i in 0..4 {
                y[i] += hh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            s += hh;
        }
        let t = ts[idx];
        out[idx] = [y[0], y[1] / t, y[2], y[3] / t];
    }
    out
}

pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn log_samples(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

