use std::f64::consts::PI;

use nlsgrowth::diagnostics::{
    decay_check, energy_rate_check, j_norm, ENERGY_RATE_CONSTANT, pseudo_energy_rate_check, Diagnostics, DiagnosticsConfig,
    RATE_TOLERANCE_CONSTANT,
};
use nlsgrowth::solver::evolve;
use nlsgrowth::{
    ComplexField, Coupling, Error, Fourier, InitialCondition, LpExponent, PotentialSpec, SolverConfig, SpatialGrid,
    TimeFunction,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Composite Simpson rule on `[-a, a]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, n: usize) -> f64 {
    let h = 2.0 * a / n as f64;
    let mut s = f(-a) + f(a);
    for i in 1..n {
        let x = -a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

fn setup(potential: PotentialSpec, sigma: f64, coupling: Coupling) -> (Diagnostics, ComplexField) {
    let grid = SpatialGrid::new(1, 512, 16.0).unwrap();
    let u = InitialCondition::gaussian(1, 1.0).sample(&grid).unwrap();
    let d = Diagnostics::new(Fourier::new(grid), potential, sigma, coupling, DiagnosticsConfig::default()).unwrap();
    (d, u)
}

fn linear_config(dt: f64, t_end: f64, stride: usize) -> SolverConfig {
    SolverConfig {
        dt,
        t_end,
        diagnostics_stride: stride,
        coupling: Coupling::Zero,
        ..SolverConfig::default()
    }
}

#[test]
fn gaussian_sigma_norms() {
    let (d, u) = setup(PotentialSpec::Zero, 1.0, Coupling::Constant(1.0));
    assert!((d.sigma_norm(&u, 0).unwrap() - 1.0).abs() < 1e-12);
    let s1 = d.sigma_norm(&u, 1).unwrap();
    assert!((s1 - (1.0 + 2f64.sqrt())).abs() < 1e-10);
    let doubled = d.sigma_norm(&u.scaled(Complex64::new(2.0, 0.0)), 1).unwrap();
    assert!((doubled - 2.0 * s1).abs() < 1e-12);
}

#[test]
fn gaussian_pseudo_energy_matches_quadrature() {
    let (d, u) = setup(PotentialSpec::Zero, 1.0, Coupling::Constant(1.0));
    let rec = d.compute_record(&u, 0.0).unwrap();
    let g2 = |x: f64| (-x * x).exp() / PI.sqrt();
    let kinetic = 0.5 * simpson(|x| x * x * g2(x), 12.0, 20000);
    let quartic = simpson(|x| g2(x) * g2(x), 12.0, 20000);
    let moment = 0.5 * simpson(|x| x * x * g2(x), 12.0, 20000);
    let oracle = kinetic + 0.5 * quartic + moment;
    assert!((rec.pseudo_energy - oracle).abs() < 1e-10);
    assert!((rec.kinetic - 0.25).abs() < 1e-12);
    assert!((rec.nonlinear_term - 0.5 / (2.0 * PI).sqrt()).abs() < 1e-12);
}

#[test]
fn repulsive_potential_term() {
    let (d, u) = setup(PotentialSpec::Repulsive, 1.0, Coupling::Constant(1.0));
    let rec = d.compute_record(&u, 0.0).unwrap();
    let g2 = |x: f64| (-x * x).exp() / PI.sqrt();
    let oracle = -simpson(|x| x * x * g2(x), 12.0, 20000);
    assert!((rec.potential_term - oracle).abs() < 1e-10);
    assert!((rec.potential_term + 0.5).abs() < 1e-10);
    assert!((rec.energy - (rec.kinetic + rec.nonlinear_term + rec.potential_term)).abs() < 1e-15);
}

#[test]
fn record_orderings() {
    let grid = SpatialGrid::new(2, 64, 8.0).unwrap();
    let u = InitialCondition::Gaussian {
        center: vec![0.5, -0.3],
        width: 1.2,
        velocity: vec![0.4, 0.1],
    }
    .sample(&grid)
    .unwrap();
    let d = Diagnostics::new(
        Fourier::new(grid),
        PotentialSpec::Zero,
        1.0,
        Coupling::Constant(1.0),
        DiagnosticsConfig::default(),
    )
    .unwrap();
    let rec = d.compute_record(&u, 0.0).unwrap();
    for k in 0..rec.sigma_norms.len() {
        assert!(rec.hk_norms[k] <= rec.sigma_norms[k]);
        if k > 0 {
            assert!(rec.sigma_norms[k] >= rec.sigma_norms[k - 1]);
        }
    }
}

#[test]
fn free_gaussian_pseudo_energy_rate() {
    let grid = SpatialGrid::new(1, 1024, 30.0).unwrap();
    let u0 = InitialCondition::gaussian(1, 1.0).sample(&grid).unwrap();
    let traj = evolve(&u0, &PotentialSpec::Zero, &linear_config(1e-3, 2.0, 10)).unwrap();
    let check = pseudo_energy_rate_check(&traj.records, 1e-2, RATE_TOLERANCE_CONSTANT).unwrap();
    assert!(check.max_defect <= 1e-6, "{}", check.max_defect);
    // ℰ(t) = ½ + t²/4 for this datum
    for r in &traj.records {
        assert!((r.pseudo_energy - (0.5 + 0.25 * r.t * r.t)).abs() < 1e-10);
    }
}

#[test]
fn stationary_ground_state_has_zero_rate() {
    let (d, u) = setup(PotentialSpec::isotropic(TimeFunction::constant(1.0)), 1.0, Coupling::Zero);
    let rec = d.compute_record(&u, 0.0).unwrap();
    assert!(rec.pseudo_rate_rhs.abs() < 1e-12);
    assert!(rec.energy_rate.unwrap().abs() < 1e-15);
}

#[test]
fn energy_rate_with_static_and_ramped_potential() {
    let grid = SpatialGrid::new(1, 512, 16.0).unwrap();
    let u0 = InitialCondition::Gaussian {
        center: vec![1.0],
        width: 1.0,
        velocity: vec![0.0],
    }
    .sample(&grid)
    .unwrap();
    let cfg = linear_config(1e-3, 1.0, 10);
    let fixed = evolve(&u0, &PotentialSpec::isotropic(TimeFunction::constant(1.0)), &cfg).unwrap();
    let check = energy_rate_check(&fixed.records, 1e-2, RATE_TOLERANCE_CONSTANT).unwrap();
    assert!(check.max_defect <= 1e-6);

    let ramp = PotentialSpec::isotropic(TimeFunction::Affine { a: 1.0, b: 1.0 });
    let coarse = evolve(&u0, &ramp, &cfg).unwrap();
    let fine = evolve(&u0, &ramp, &linear_config(1e-3, 1.0, 5)).unwrap();
    let c = energy_rate_check(&coarse.records, 1e-2, ENERGY_RATE_CONSTANT).unwrap();
    let f = energy_rate_check(&fine.records, 5e-3, ENERGY_RATE_CONSTANT).unwrap();
    assert!(c.passes && f.passes);
    // centered differences: quartering when the spacing halves
    let ratio = c.max_defect / f.max_defect;
    assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
}

#[test]
fn rate_checks_need_three_records() {
    let (d, u) = setup(PotentialSpec::Zero, 1.0, Coupling::Zero);
    let recs = vec![d.compute_record(&u, 0.0).unwrap(), d.compute_record(&u, 0.1).unwrap()];
    assert!(matches!(
        pseudo_energy_rate_check(&recs, 0.1, 0.1),
        Err(Error::TooFewSamples { needed: 3, got: 2 })
    ));
}

#[test]
fn j_norm_and_decay() {
    let grid = SpatialGrid::new(1, 1024, 30.0).unwrap();
    let fourier = Fourier::new(grid);
    let v = InitialCondition::Gaussian {
        center: vec![0.0],
        width: 1.0,
        velocity: vec![0.3],
    }
    .sample(&grid)
    .unwrap();
    let x = grid.coordinate(0);
    let xv = ComplexField::new(grid, v.values().iter().zip(&x).map(|(z, x)| z * x).collect()).unwrap();
    assert!((j_norm(&fourier, &v, 0.0).unwrap() - xv.l2_norm()).abs() < 1e-14);

    let cfg = SolverConfig {
        diagnostics: DiagnosticsConfig {
            max_order: 1,
            lr: vec![LpExponent::Finite(2.0), LpExponent::Infinity],
        },
        ..linear_config(1e-3, 3.0, 100)
    };
    let traj = evolve(&v, &PotentialSpec::Zero, &cfg).unwrap();
    let j0 = traj.records[0].j_norm;
    for r in &traj.records {
        assert!((r.j_norm - j0).abs() < 1e-9);
    }
    let l2 = decay_check(&traj.records, &cfg.diagnostics, 1, LpExponent::Finite(2.0)).unwrap();
    assert_eq!(l2.delta, 0.0);
    assert!((l2.constant - 1.0).abs() < 1e-12);
    let linf = decay_check(&traj.records, &cfg.diagnostics, 1, LpExponent::Infinity).unwrap();
    assert_eq!(linf.delta, 0.5);
    assert_eq!(linf.violated, Some(false));
}

fn random_smooth(grid: SpatialGrid, rng: &mut ChaCha8Rng) -> ComplexField {
    let c = rng.gen_range(-2.0..2.0);
    let w = rng.gen_range(0.5..1.5);
    let k = rng.gen_range(-2.0..2.0);
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    ComplexField::from_fn(grid, |x| a * Complex64::from_polar((-(x[0] - c).powi(2) / (2.0 * w * w)).exp(), k * x[0]))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sigma_norm_is_a_norm(seed in any::<u64>(), k in 0usize..=3, s in -3.0f64..3.0) {
        let grid = SpatialGrid::new(1, 256, 16.0).unwrap();
        let d = Diagnostics::new(Fourier::new(grid), PotentialSpec::Zero, 1.0, Coupling::Zero, DiagnosticsConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_smooth(grid, &mut rng);
        let g = random_smooth(grid, &mut rng);
        let mut sum = f.clone();
        sum.axpy(Complex64::new(1.0, 0.0), &g).unwrap();
        let nf = d.sigma_norm(&f, k).unwrap();
        let ng = d.sigma_norm(&g, k).unwrap();
        prop_assert!(d.sigma_norm(&sum, k).unwrap() <= (nf + ng) * (1.0 + 1e-12));
        let scaled = d.sigma_norm(&f.scaled(Complex64::new(s, 0.0)), k).unwrap();
        prop_assert!((scaled - s.abs() * nf).abs() <= 1e-12 * nf.max(1e-300));
    }
}
