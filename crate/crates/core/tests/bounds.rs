use nlsgrowth::bounds::{
    double_exp_ledger, gronwall_envelope, ledger_chain, BoundLedger, LedgerBranch, LedgerParams, MAX_INTERVALS,
};
use nlsgrowth::Error;
use proptest::prelude::*;

fn params(c: f64, alpha: f64, tau0: f64) -> LedgerParams {
    LedgerParams {
        c,
        alpha,
        tau0,
        ..LedgerParams::default()
    }
}

fn ledger(p: &LedgerParams, t: f64, w0: f64, f: f64) -> BoundLedger {
    double_exp_ledger(p, &|_| f, t, w0).unwrap()
}

/// `ln B_N` for `B_N = r^N (w0 + g) − g`, `g = k f/(r − 1)`, `r = kC > 1`.
fn log_closed_form(p: &LedgerParams, n: usize, w0: f64, f: f64) -> f64 {
    let k = p.branch.factor();
    let r = k * p.c;
    let g = k * f / (r - 1.0);
    let s = w0 + g;
    let log_rn = n as f64 * r.ln();
    log_rn + s.ln() + (-(g / s) * (-log_rn).exp()).ln_1p()
}

#[test]
fn worked_ledger() {
    let l = ledger(&params(1.0, 1.0, 1.0), 1.0, 1.0, 0.0);
    assert!((l.tau - 0.1 * (-1f64).exp()).abs() < 1e-15);
    assert_eq!(l.n, 28);
    assert!((l.amplification / (20f64 / 9.0).powi(28) - 1.0).abs() < 1e-12);
    assert!((l.amplification - 5.2e9).abs() < 0.1e9);
    assert!(l.tau_identity_defect.abs() < 1e-14);
    assert!(l.envelope_holds);
}

#[test]
fn zero_data_stay_zero() {
    for t in [0.0, 0.5, 3.0] {
        let l = ledger(&params(1.5, 1.0, 0.5), t, 0.0, 0.0);
        assert_eq!(l.bound, 0.0);
        assert!(l.rows.iter().all(|r| r.bound == 0.0));
    }
}

#[test]
fn endpoint_branch_uses_smaller_factor() {
    let mut p = params(1.0, 1.0, 1.0);
    p.branch = LedgerBranch::Endpoint;
    let l = ledger(&p, 1.0, 1.0, 0.0);
    assert!((l.factor - 10.0 / 9.0).abs() < 1e-15);
    assert!((l.bound - (10f64 / 9.0).powi(l.n as i32)).abs() < 1e-12 * l.bound);
}

#[test]
fn log_log_bound_grows_linearly() {
    let p = params(1.0, 1.0, 1.0);
    let ll = |t: f64| ledger(&p, t, 1.0, 1.0).log_bound.ln();
    let s1 = ll(4.0) - ll(3.0);
    let s2 = ll(5.0) - ll(4.0);
    assert!(s1 > 0.0 && s2 > 0.0);
    assert!((s2 / s1 - 1.0).abs() < 0.1, "{s1} {s2}");
}

#[test]
fn invalid_inputs() {
    assert!(matches!(
        double_exp_ledger(&params(1.0, 0.0, 1.0), &|_| 0.0, 1.0, 1.0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(double_exp_ledger(&params(1.0, 1.0, 1.0), &|_| -1.0, 1.0, 1.0).is_err());
    assert!(double_exp_ledger(&params(1.0, 1.0, 1.0), &|_| 0.0, -1.0, 1.0).is_err());
    // N grows like t e^{Ct}; far beyond the tabulation limit here
    let err = double_exp_ledger(&params(1.0, 1.0, 1.0), &|_| 0.0, 30.0, 1.0).unwrap_err();
    assert!(err.to_string().contains(&MAX_INTERVALS.to_string()));
}

#[test]
fn confining_steps_do_not_shrink() {
    let p = LedgerParams {
        confining: true,
        ..params(1.0, 1.0, 1.0)
    };
    let a = ledger(&p, 10.0, 1.0, 1.0);
    let b = ledger(&p, 20.0, 1.0, 1.0);
    assert_eq!(a.tau, b.tau);
    assert!((b.n as f64 / a.n as f64 - 2.0).abs() < 0.01);
}

#[test]
fn chain_feeds_each_level_into_the_next() {
    let p = params(1.0, 1.0, 1.0);
    let chain = ledger_chain(&p, 0.5, &[1.0, 1.0, 1.0], 0.0).unwrap();
    assert_eq!(chain.len(), 3);
    for w in chain.windows(2) {
        assert_eq!(w[1].f, w[0].bound);
        assert!(w[1].bound > w[0].bound);
    }
}

#[test]
fn ledger_csv_layout() {
    let l = ledger(&params(1.0, 1.0, 1.0), 0.2, 1.0, 0.0);
    let csv = l.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,t_j,B_j"));
    assert_eq!(lines.count(), l.n + 1);
}

#[test]
fn flat_pseudo_energy_has_flat_envelope() {
    let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    let e = vec![0.7; t.len()];
    let g = gronwall_envelope(&t, &e, None).unwrap();
    assert_eq!(g.c0_min, 0.0);
    assert!(g.envelope_holds);
    assert!(gronwall_envelope(&t[..1], &e[..1], None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ledger_matches_closed_form(c in 1.0f64..2.0, alpha in 0.5f64..2.0, t in 0.0f64..1.5, w0 in 0.0f64..3.0, f in 0.0f64..2.0) {
        let p = params(c, alpha, 1.0);
        let l = ledger(&p, t, w0, f);
        let cf = log_closed_form(&p, l.n, w0, f);
        if cf.is_finite() {
            prop_assert!((l.log_bound - cf).abs() <= 1e-10 * cf.abs().max(1.0), "{} vs {}", l.log_bound, cf);
        } else {
            prop_assert_eq!(l.bound, 0.0);
        }
        if l.bound.is_finite() {
            prop_assert!((l.bound.ln() - l.log_bound).abs() <= 1e-10 * l.log_bound.abs().max(1.0));
        }
        prop_assert!(l.tau <= p.tau0);
        if l.tau_from_rule {
            prop_assert!(l.tau_identity_defect.abs() <= 1e-14);
        }
        prop_assert!(l.envelope_holds);
    }

    #[test]
    fn ledger_is_monotone(
        c in 1.0f64..2.0,
        alpha in 1.0f64..2.0,
        t in 0.05f64..1.5,
        w0 in 0.0f64..3.0,
        f in 0.0f64..2.0,
        which in 0usize..4,
        bump in 0.01f64..0.5,
    ) {
        let p = params(c, alpha, 1.0);
        let base = ledger(&p, t, w0, f).bound;
        let bumped = match which {
            0 => ledger(&p, t + bump, w0, f).bound,
            1 => ledger(&params(c + bump, alpha, 1.0), t, w0, f).bound,
            2 => ledger(&p, t, w0, f + bump).bound,
            _ => ledger(&p, t, w0 + bump, f).bound,
        };
        prop_assert!(bumped >= base, "{} < {}", bumped, base);
    }
}
