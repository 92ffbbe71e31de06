use nlsgrowth::diagnostics::{Diagnostics, DiagnosticsConfig};
use nlsgrowth::fit::{growth_fit, GrowthModel};
use nlsgrowth::scattering::{
    asymptotic_profile_error, cauchy_convergence, free_pullback, repulsive_reference, repulsive_sigma1,
    ScatteringVerdict,
};
use nlsgrowth::solver::evolve;
use nlsgrowth::{Coupling, Error, Fourier, InitialCondition, PotentialSpec, SolverConfig, SpatialGrid};
use num_complex::Complex64;

#[test]
fn free_linear_run_has_constant_pullback() {
    let grid = SpatialGrid::new(1, 1024, 40.0).unwrap();
    let u0 = InitialCondition::Gaussian {
        center: vec![0.0],
        width: 1.0,
        velocity: vec![0.5],
    }
    .sample(&grid)
    .unwrap();
    let cfg = SolverConfig {
        coupling: Coupling::Zero,
        dt: 1e-2,
        t_end: 4.0,
        snapshot_times: vec![1.0, 2.0, 3.0, 4.0],
        diagnostics_stride: 100,
        ..SolverConfig::default()
    };
    let traj = evolve(&u0, &PotentialSpec::Zero, &cfg).unwrap();
    let fourier = Fourier::new(grid);
    let report = cauchy_convergence(&fourier, &traj.snapshots).unwrap();
    assert!(report.differences.iter().all(|&d| d <= 1e-9), "{:?}", report.differences);
    assert_eq!(report.verdict, ScatteringVerdict::Scattering);
    assert_eq!(report.tail_estimate, 0.0);
    let w = report.u_plus.unwrap();
    assert!(w.l2_distance(&u0).unwrap() <= 1e-9);
    assert!(cauchy_convergence(&fourier, &traj.snapshots[..3]).is_err());
}

#[test]
fn free_evolution_approaches_its_profile() {
    let grid = SpatialGrid::new(1, 4096, 200.0).unwrap();
    let fourier = Fourier::new(grid);
    let u_plus = InitialCondition::gaussian(1, 1.0).sample(&grid).unwrap();
    let t = 20.0;
    let u = free_pullback(&fourier, &u_plus, -t).unwrap();
    let err = asymptotic_profile_error(&fourier, &u, t, &u_plus).unwrap();
    assert!(err <= 0.05, "{err}");
    let earlier = free_pullback(&fourier, &u_plus, -5.0).unwrap();
    assert!(asymptotic_profile_error(&fourier, &earlier, 5.0, &u_plus).unwrap() > err);
    assert!(matches!(
        asymptotic_profile_error(&fourier, &u, 0.0, &u_plus),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn repulsive_sigma_norm_matches_grid_evaluation() {
    let grid = SpatialGrid::new(1, 4096, 50.0).unwrap();
    let fourier = Fourier::new(grid);
    let diag = Diagnostics::new(
        fourier.clone(),
        PotentialSpec::Zero,
        1.0,
        Coupling::Zero,
        DiagnosticsConfig {
            max_order: 1,
            lr: vec![],
        },
    )
    .unwrap();
    let omega = 2f64.sqrt();
    // an asymmetric datum makes the cross term nonzero
    let u_plus = InitialCondition::Gaussian {
        center: vec![0.4],
        width: 1.0,
        velocity: vec![0.7],
    }
    .sample(&grid)
    .unwrap()
    .pointwise_map(|x, z| z * Complex64::from_polar(1.0, 0.2 * x[0] * x[0]))
    .unwrap();
    for t in [0.5, 1.0, 1.5] {
        let profile = repulsive_reference(&fourier, &u_plus, t, omega).unwrap();
        assert!(profile.boundary_ratio() < 1e-8);
        assert!((profile.mass() - u_plus.mass()).abs() < 1e-10);
        let direct = diag.sigma_norm(&profile, 1).unwrap();
        let closed = repulsive_sigma1(&fourier, &u_plus, t, omega).unwrap();
        assert!((direct - closed).abs() <= 1e-8 * direct, "t = {t}: {direct} vs {closed}");
    }
}

#[test]
fn repulsive_sigma_norm_grows_at_rate_omega() {
    let grid = SpatialGrid::new(1, 512, 20.0).unwrap();
    let fourier = Fourier::new(grid);
    let u_plus = InitialCondition::gaussian(1, 1.0).sample(&grid).unwrap();
    let omega = 2f64.sqrt();
    let t: Vec<f64> = (0..31).map(|i| 2.0 + 0.1 * i as f64).collect();
    let s: Vec<f64> = t
        .iter()
        .map(|&s| repulsive_sigma1(&fourier, &u_plus, s, omega).unwrap())
        .collect();
    let rate = growth_fit(&t, &s, GrowthModel::Exp).unwrap().rate;
    assert!((rate / omega - 1.0).abs() < 0.1, "{rate}");
    assert!(repulsive_sigma1(&fourier, &u_plus, 1.0, -1.0).is_err());
}
