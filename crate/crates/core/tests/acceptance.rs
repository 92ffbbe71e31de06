//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion, with
//! the measured values underneath, then asserts.
//!
//! Criteria listed in `KNOWN_DEVIATIONS` contain a check that cannot hold
//! for the equations as stated; those checks are evaluated and reported
//! unchanged, and the suite asserts the analysis of the deviation instead.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use nlsgrowth::bounds::{double_exp_ledger, exponent_set, LedgerBranch, LedgerParams};
use nlsgrowth::fit::{growth_fit, GrowthModel};
use nlsgrowth::lens::{construct_scattering_pair, solve_hill, uniform_mesh, HillState, PairSettings};
use nlsgrowth::potentials::TimeFunction;
use nlsgrowth::runner::{run, RunOutcome};
use nlsgrowth::scattering::ScatteringVerdict;
use nlsgrowth::scenario::Scenario;
use nlsgrowth::solver::evolve;
use nlsgrowth::Error;

mod common;
use common::{backward_oracle, log_log_slope, log_samples};

/// `(criterion, check label)` pairs that are reported as failing.
const KNOWN_DEVIATIONS: &[(u8, &str)] = &[(5, "mu-defect bounded (slope 0 +- 0.2)")];

const BUNDLED: &[&str] = &[
    "free-gaussian",
    "repulsive-linear",
    "decaying-quintic",
    "lens-equivalence",
    "confining-linear",
    "confining-cubic",
    "oscillatory",
    "free-2d",
];

struct Check {
    label: String,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Report {
    checks: BTreeMap<u8, Vec<Check>>,
}

impl Report {
    fn check(&mut self, criterion: u8, label: &str, passed: bool, detail: String) {
        self.checks.entry(criterion).or_default().push(Check {
            label: label.to_string(),
            passed,
            detail,
        });
    }

    fn is_known(criterion: u8, label: &str) -> bool {
        KNOWN_DEVIATIONS.iter().any(|&(c, l)| c == criterion && l == label)
    }

    fn print(&self) {
        println!("\n==== acceptance ====");
        for (c, checks) in &self.checks {
            let ok = checks.iter().all(|k| k.passed);
            let known = !ok && checks.iter().all(|k| k.passed || Self::is_known(*c, &k.label));
            let status = if ok {
                "PASS"
            } else if known {
                "FAIL (known deviation)"
            } else {
                "FAIL"
            };
            println!("criterion {c:>2}: {status}");
            for k in checks {
                println!("    [{}] {}: {}", if k.passed { "ok" } else { "x " }, k.label, k.detail);
            }
        }
        println!("====================\n");
    }

    fn unexpected_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (c, checks) in &self.checks {
            for k in checks {
                if !k.passed && !Self::is_known(*c, &k.label) {
                    out.push(format!("criterion {c}: {} ({})", k.label, k.detail));
                }
            }
        }
        out
    }
}

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"));
    Scenario::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

fn criterion_1_and_4(report: &mut Report, outcomes: &BTreeMap<&str, (RunOutcome, f64)>) {
    for (name, (o, _)) in outcomes {
        let s = &o.summary;
        report.check(1, &format!("{name} mass drift <= 1e-10"), s.mass_drift <= 1e-10, format!("{:.3e}", s.mass_drift));
        let g = s.gronwall.as_ref().expect("gronwall enabled");
        report.check(4, &format!("{name} Gronwall envelope"), g.envelope_holds, format!("C0_min = {:.4e}", g.c0_min));
    }
    let t1 = outcomes["free-gaussian"].1;
    report.check(1, "1D runtime <= 5 s (n=1024, 1e4 steps)", t1 <= 5.0, format!("{t1:.2} s"));
    let t2 = outcomes["free-2d"].1;
    report.check(1, "2D runtime <= 60 s (256^2, 5e3 steps)", t2 <= 60.0, format!("{t2:.2} s"));

    let h = outcomes["repulsive-linear"].0.summary.hill_reference.clone().expect("hill reference");
    let measured = h.rate_measured.expect("measured rate");
    let profile = h.rate_repulsive_profile.expect("profile rate");
    report.check(
        4,
        "repulsive Sigma rate vs cosh/sinh closed form within 10%",
        within(measured, profile, 0.10),
        format!("measured {measured:.4}, closed form {profile:.4}"),
    );
    report.check(
        4,
        "repulsive Sigma^1 vs Heisenberg closed form",
        h.max_relative_gap <= 1e-4,
        format!("max relative gap {:.3e}", h.max_relative_gap),
    );
}

fn criterion_2(report: &mut Report) {
    let mut sc = scenario("free-gaussian");
    sc.solver.t_end = 1.0;
    sc.solver.snapshot_times.clear();
    sc.solver.diagnostics_stride = 1_000_000;
    let grid = sc.grid().unwrap();
    let u0 = sc.initial.sample(&grid).unwrap();
    let solve = |dt: f64| {
        let mut config = sc.solver_config(sc.basic_coupling());
        config.dt = dt;
        evolve(&u0, &sc.potential, &config).unwrap().final_state
    };
    let reference = solve(6.25e-5);
    let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| solve(dt).l2_distance(&reference).unwrap())
        .collect();
    for (i, pair) in errs.windows(2).enumerate() {
        let ratio = pair[0] / pair[1];
        report.check(
            2,
            &format!("error ratio {}", ["4e-3/2e-3", "2e-3/1e-3"][i]),
            within(ratio, 4.0, 0.15),
            format!("{ratio:.3} (errors {:.3e} -> {:.3e})", pair[0], pair[1]),
        );
    }
}

fn criterion_3(report: &mut Report, base: &RunOutcome) {
    let coarse = base.summary.pseudo_energy_rate.clone().expect("rate check");
    report.check(
        3,
        "pseudo-energy defect <= 1e-5 (dt=1e-3, stride 10)",
        coarse.max_defect <= 1e-5,
        format!("{:.3e}", coarse.max_defect),
    );
    let mut sc = scenario("lens-equivalence");
    sc.solver.dt = 5e-4;
    sc.analysis.lens_compare = None;
    let fine = run(&sc).unwrap().summary.pseudo_energy_rate.expect("rate check");
    let ratio = coarse.max_defect / fine.max_defect;
    report.check(
        3,
        "defect shrinks ~4x under dt halving",
        within(ratio, 4.0, 0.15),
        format!("{ratio:.3} ({:.3e} -> {:.3e})", coarse.max_defect, fine.max_defect),
    );
}

fn criterion_5(report: &mut Report) {
    let mesh = uniform_mesh(0.0, 1.5, 1e-3).unwrap();
    let sol = solve_hill(&TimeFunction::constant(1.0), HillState::FUNDAMENTAL, &mesh).unwrap();
    let worst = mesh
        .iter()
        .zip(sol.states())
        .map(|(t, s)| (s.nu - t.cos()).abs().max((s.mu - t.sin()).abs()))
        .fold(0.0, f64::max);
    report.check(5, "Omega = 1 matches (cos, sin) to 1e-8", worst <= 1e-8, format!("{worst:.3e}"));

    let catalog: Vec<(TimeFunction, f64)> = vec![
        (TimeFunction::constant(0.0), 10.0),
        (TimeFunction::constant(0.5), 2.0),
        (TimeFunction::constant(1.0), 1.5),
        (TimeFunction::constant(-2.0), 5.0),
        (TimeFunction::power_decay(1.0, 3.0), 50.0),
        (TimeFunction::power_decay(1.0, 2.5), 50.0),
        (TimeFunction::power_decay(2.0, 1.5), 1.0),
        (TimeFunction::Oscillatory { c: 1.0 }, 5.0),
        (TimeFunction::Affine { a: 0.1, b: 0.05 }, 2.0),
    ];
    let mut drift: f64 = 0.0;
    for (omega, horizon) in &catalog {
        // stop short of the first zero of ν, where the solver refuses to go
        let mesh = uniform_mesh(0.0, *horizon, 1e-3).unwrap();
        let sol = match solve_hill(omega, HillState::FUNDAMENTAL, &mesh) {
            Err(Error::ZeroCrossing { t }) => {
                let mesh = uniform_mesh(0.0, 0.9 * t, 1e-3).unwrap();
                solve_hill(omega, HillState::FUNDAMENTAL, &mesh).unwrap()
            }
            r => r.unwrap(),
        };
        drift = drift.max(sol.max_wronskian_drift());
    }
    report.check(5, "catalog Wronskian drift <= 1e-9", drift <= 1e-9, format!("{drift:.3e}"));

    let pair = construct_scattering_pair(&TimeFunction::power_decay(1.0, 3.0), &PairSettings::default()).unwrap();
    let sol = &pair.solution;
    let ts = log_samples(20.0, 2000.0, 25);
    let oracle = backward_oracle(|t| (1.0 + t * t).powf(-1.5), 3.0, &ts);
    // μ is fixed only up to multiples of ν; align at T
    let c = (sol.eval(20.0).unwrap().mu - oracle[0][2]) / oracle[0][0];
    let mut gap: f64 = 0.0;
    for (t, o) in ts.iter().zip(&oracle) {
        let s = sol.eval(*t).unwrap();
        gap = gap
            .max((s.nu - o[0]).abs())
            .max((s.nu_dot - o[1]).abs())
            .max((s.mu - o[2] - c * o[0]).abs() / t)
            .max((s.mu_dot - o[3] - c * o[1]).abs());
    }
    report.check(5, "gamma=3 pair vs backward ODE oracle to 1e-6", gap <= 1e-6, format!("{gap:.3e}"));

    let ts = log_samples(50.0, 2000.0, 40);
    let states: Vec<_> = ts.iter().map(|&t| sol.eval(t).unwrap()).collect();
    let nu_def: Vec<f64> = states.iter().map(|s| s.nu - 1.0).collect();
    let mu_dot_def: Vec<f64> = states.iter().map(|s| s.mu_dot - 1.0).collect();
    let mu_def: Vec<f64> = ts.iter().zip(&states).map(|(t, s)| s.mu - t).collect();
    let s_nu = log_log_slope(&ts, &nu_def);
    let s_mu_dot = log_log_slope(&ts, &mu_dot_def);
    let s_mu = log_log_slope(&ts, &mu_def);
    report.check(5, "|nu - 1| slope -1 +- 0.2", (s_nu + 1.0).abs() <= 0.2, format!("{s_nu:.4}"));
    report.check(5, "|mu_dot - 1| slope -1 +- 0.2", (s_mu_dot + 1.0).abs() <= 0.2, format!("{s_mu_dot:.4}"));
    report.check(5, "mu-defect bounded (slope 0 +- 0.2)", s_mu.abs() <= 0.2, format!("slope {s_mu:.4}"));

    // μ̇ − 1 ~ 1/t forces μ − t ~ ln t: the defect minus ln t must settle.
    let settled: Vec<f64> = ts.iter().zip(&mu_def).map(|(t, d)| d - t.ln()).collect();
    let spread = settled.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - settled.iter().copied().fold(f64::INFINITY, f64::min);
    let oracle_mu: Vec<f64> = backward_oracle(|t| (1.0 + t * t).powf(-1.5), 3.0, &ts)
        .iter()
        .zip(&ts)
        .map(|(o, t)| o[2] + c * o[0] - t)
        .collect();
    let s_oracle = log_log_slope(&ts, &oracle_mu);
    report.check(
        5,
        "mu-defect follows ln t (pair and oracle)",
        spread <= 0.05 && (s_oracle - s_mu).abs() <= 1e-3,
        format!("spread of mu - t - ln t = {spread:.3e}, oracle slope {s_oracle:.4}"),
    );
}

fn criterion_6(report: &mut Report, o: &RunOutcome, seconds: f64) {
    let lc = o.summary.lens_compare.as_ref().expect("lens comparison");
    for (t, e) in lc.times.iter().zip(&lc.errors) {
        report.check(6, &format!("relative L2 at t = {t}"), *e <= 1e-4, format!("{e:.3e}"));
    }
    report.check(6, "runtime <= 120 s", seconds <= 120.0, format!("{seconds:.2} s"));
}

fn criterion_7(report: &mut Report, o: &RunOutcome) {
    let s = &o.summary;
    let h1 = s.fits["h1"].classification.as_ref().expect("h1 fit");
    report.check(7, "H1 classified bounded", h1.best == GrowthModel::Bounded, format!("{:?}", h1.best));
    let sup_h1 = o.trajectory.records.iter().map(|r| r.hk_norms[1]).fold(0.0, f64::max);
    report.check(7, "sup H1 finite", sup_h1.is_finite(), format!("{sup_h1:.4}"));
    let mom = s.fits["mom1"].classification.as_ref().expect("mom1 fit");
    let k = mom.fit(GrowthModel::Poly).expect("poly fit").rate;
    report.check(7, "|x|u poly exponent <= 1.2", k <= 1.2, format!("{k:.4}"));
    let c = &s.scattering.as_ref().expect("scattering").cauchy;
    report.check(
        7,
        "verdict scattering",
        c.verdict == ScatteringVerdict::Scattering,
        format!("{:?}, min doubling factor {:.3}", c.verdict, c.doubling_factors.iter().copied().fold(f64::INFINITY, f64::min)),
    );
    report.check(7, "differences decrease monotonically", c.monotone, format!("{} differences", c.differences.len()));
}

fn criterion_8(report: &mut Report, cubic: &RunOutcome, linear: &RunOutcome) {
    let c = &cubic.summary.scattering.as_ref().expect("scattering").cauchy;
    report.check(
        8,
        "confining cubic not-scattering",
        c.verdict == ScatteringVerdict::NotScattering,
        format!("{:?}", c.verdict),
    );
    let s1 = cubic.summary.fits["sigma1"].classification.as_ref().expect("sigma1 fit");
    report.check(8, "confining cubic Sigma^1 bounded", s1.best == GrowthModel::Bounded, format!("{:?}", s1.best));
    let p = linear.summary.period.as_ref().expect("period check");
    report.check(
        8,
        "linear confining 2 pi periodic to 1e-6",
        !p.pairs.is_empty() && p.max_defect <= 1e-6,
        format!("{} pairs, max defect {:.3e}", p.pairs.len(), p.max_defect),
    );
}

fn closed_form(params: &LedgerParams, n: usize, w0: f64, f: f64) -> f64 {
    let k = params.branch.factor();
    let r = k * params.c;
    let rn = r.powi(n as i32);
    if (r - 1.0).abs() < 1e-12 {
        w0 + k * f * n as f64
    } else {
        rn * w0 + k * f * (rn - 1.0) / (r - 1.0)
    }
}

fn criterion_9(report: &mut Report) {
    let mut worst_tau: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for &(c, alpha, t, w0, f, endpoint) in &[
        (1.0, 1.0, 1.0, 1.0, 0.0, false),
        (1.0, 0.5, 2.0, 0.3, 1.5, false),
        (2.5, 1.0, 0.7, 2.0, 0.1, true),
        (1.3, 0.5, 0.5, 1.0, 1.0, false),
        (1.0, 2.0, 3.0, 0.5, 0.0, true),
    ] {
        let params = LedgerParams {
            c,
            alpha,
            tau0: 10.0,
            branch: if endpoint { LedgerBranch::Endpoint } else { LedgerBranch::Finite },
            ..LedgerParams::default()
        };
        let l = double_exp_ledger(&params, &|_| f, t, w0).unwrap();
        assert!(l.tau_from_rule, "rule must be active for {c} {alpha} {t}");
        worst_tau = worst_tau.max(l.tau_identity_defect.abs());
        let cf = closed_form(&params, l.n, w0, f);
        worst_sum = worst_sum.max((l.bound - cf).abs() / cf.abs().max(f64::MIN_POSITIVE));
    }
    report.check(9, "C tau^alpha e^{Ct} = 1/10 exactly", worst_tau <= 1e-14, format!("max defect {worst_tau:.3e}"));
    report.check(9, "recursion vs geometric sum to 1e-12", worst_sum <= 1e-12, format!("max relative gap {worst_sum:.3e}"));

    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    // C ≥ 1 as for any Strichartz constant; the ranges keep N tabulable
    let strategy = (1.0..2.0f64, 1.0..2.0f64, 0.05..1.5f64, 0.0..3.0f64, 0.0..2.0f64, 0usize..4, 0.01..0.5f64);
    let outcome = runner.run(&strategy, |(c, alpha, t, w0, f, which, bump)| {
        let params = LedgerParams {
            c,
            alpha,
            ..LedgerParams::default()
        };
        let base = double_exp_ledger(&params, &|_| f, t, w0).unwrap().bound;
        let (mut p2, mut t2, mut w2, mut f2) = (params.clone(), t, w0, f);
        match which {
            0 => t2 += bump,
            1 => p2.c += bump,
            2 => f2 += bump,
            _ => w2 += bump,
        }
        let bumped = double_exp_ledger(&p2, &|_| f2, t2, w2).unwrap().bound;
        prop_assert!(bumped >= base, "argument {which}: {base} -> {bumped}");
        Ok(())
    });
    report.check(
        9,
        "monotone in t, C, f, w0 (200 random pairs)",
        outcome.is_ok(),
        match outcome {
            Ok(()) => "200 cases".into(),
            Err(e) => e.to_string(),
        },
    );

    let params = LedgerParams {
        confining: true,
        ..LedgerParams::default()
    };
    // 100 intervals, so the transient from f does not dominate the shape
    let l = double_exp_ledger(&params, &|_| 1.0, 10.0, 1.0).unwrap();
    let (t, y): (Vec<f64>, Vec<f64>) = l.rows.iter().skip(1).map(|r| (r.t, r.bound)).unzip();
    let exp = growth_fit(&t, &y, GrowthModel::Exp).unwrap();
    let dexp = growth_fit(&t, &y, GrowthModel::DoubleExp).unwrap();
    report.check(
        9,
        "confining ledger: exp residual < 1% of double-exp residual",
        exp.residual < 0.01 * dexp.residual,
        format!("exp {:.3e}, double-exp {:.3e}", exp.residual, dexp.residual),
    );
}

fn criterion_10(report: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut all_admissible = true;
    let mut ratio_ok = true;
    let mut cells = 0;
    for d in 1..=3usize {
        for s in 1..=4 {
            let sigma = s as f64;
            if d == 3 && sigma >= 2.0 {
                assert!(exponent_set(d, sigma).is_err());
                continue;
            }
            let e = exponent_set(d, sigma).unwrap();
            let h = e.holder_defects();
            worst = worst.max(h.space.abs()).max(h.time.abs()).max(h.admissibility.abs());
            all_admissible &= e.admissibility().unwrap().is_admissible;
            ratio_ok &= e.theta_ratio() > 0.0 && e.theta_ratio() < 1.0;
            cells += 1;
        }
    }
    report.check(10, "Holder identities to machine precision", worst <= 1e-15, format!("{cells} cells, max defect {worst:.2e}"));
    report.check(10, "(p, q) admissible on the table", all_admissible, String::new());
    report.check(10, "0 < 2 sigma/theta < 1", ratio_ok, String::new());

    // θ from 2σ(2σ+2)/(2 − (d−2)σ)
    let examples = [(2, 1.0, (4.0, 4.0, 4.0)), (1, 2.0, (6.0, 6.0, 6.0)), (3, 1.0, (4.0, 8.0 / 3.0, 8.0))];
    for (d, sigma, (q, p, theta)) in examples {
        let e = exponent_set(d, sigma).unwrap();
        report.check(
            10,
            &format!("worked example d={d}, sigma={sigma}"),
            e.q == q && (e.p - p).abs() <= 1e-15 && e.theta == theta,
            format!("q={}, p={:.6}, theta={}", e.q, e.p, e.theta),
        );
    }
}

#[test]
fn acceptance_criteria() {
    let mut report = Report::default();
    let mut outcomes = BTreeMap::new();
    for name in BUNDLED {
        let sc = scenario(name);
        let start = Instant::now();
        let o = run(&sc).unwrap_or_else(|e| panic!("{name}: {e}"));
        outcomes.insert(*name, (o, start.elapsed().as_secs_f64()));
    }
    criterion_1_and_4(&mut report, &outcomes);
    criterion_2(&mut report);
    criterion_3(&mut report, &outcomes["lens-equivalence"].0);
    criterion_5(&mut report);
    let (lens, secs) = &outcomes["lens-equivalence"];
    criterion_6(&mut report, lens, *secs);
    criterion_7(&mut report, &outcomes["decaying-quintic"].0);
    criterion_8(&mut report, &outcomes["confining-cubic"].0, &outcomes["confining-linear"].0);
    criterion_9(&mut report);
    criterion_10(&mut report);
    report.print();
    let failures = report.unexpected_failures();
    assert!(failures.is_empty(), "unexpected failures:\n{}", failures.join("\n"));
}
