use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nlsgrowth::bounds::{double_exp_ledger, LedgerBranch, LedgerParams};
use nlsgrowth::fit::{classify, growth_fit, window, GrowthModel};
use nlsgrowth::lens::{construct_scattering_pair, solve_hill, uniform_mesh, HillState, PairSettings};
use nlsgrowth::potentials::{
    default_time_samples, lattice_samples, sharpness_classifier, verify_assumption, AssumptionSettings,
};
use nlsgrowth::runner::{self, ToleranceProfile};
use nlsgrowth::scenario::Scenario;
use nlsgrowth::TimeFunction;

const EXIT_VALIDATION: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_VERDICT: u8 = 4;

#[derive(Parser)]
#[command(name = "nlsgrowth", version, about = "Norm-growth workbench for NLS with time-dependent quadratic potentials")]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Root directory for artifacts; each run writes to `<out-dir>/<name>`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Fast)]
    tolerance_profile: Profile,
    /// Shorthand for `--tolerance-profile strict`.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Fast,
    Strict,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write timeseries.csv, summary.json and snapshots.
    Run { scenario: PathBuf },
    /// Run a scenario over a grid of gamma and sigma values.
    Sweep {
        scenario: PathBuf,
        /// `gamma=1.5,2.5,3` or `sigma=1,2`; repeatable.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
    },
    /// Solve the Hill equation and export the pair as CSV.
    Hill(HillArgs),
    /// Evaluate the double-exponential growth ledger.
    Bound(BoundArgs),
    /// Fit growth models to a column of a CSV file.
    Fit(FitArgs),
    /// Check the potential hypotheses of a scenario by sampling.
    VerifyPotential {
        scenario: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 11)]
        per_axis: usize,
    },
}

#[derive(Args)]
struct HillArgs {
    /// `constant:V`, `power-decay:C,GAMMA`, `oscillatory:C` or `affine:A,B`.
    #[arg(long)]
    omega: String,
    /// Build the pair normalized at infinity instead of the fundamental solution.
    #[arg(long)]
    pair: bool,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// End of the mesh for the fundamental solution
    #[arg(long, default_value_t = 10.0)]
    t1: f64,
    /// Mesh step for the fundamental solution
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Pair horizon and matching time, used with `--pair`.
    #[arg(long, default_value_t = 2000.0)]
    t_max: f64,
    #[arg(long, default_value_t = 20.0)]
    t_match: f64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    tau0: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    w0: f64,
    /// Constant forcing term.
    #[arg(long, default_value_t = 0.0)]
    f: f64,
    /// Use the `p = ∞` branch factor 10/9.
    #[arg(long)]
    endpoint: bool,
    #[arg(long)]
    confining: bool,
    /// Write the `j,t_j,B_j` table here.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    csv: PathBuf,
    #[arg(long)]
    column: String,
    #[arg(long, default_value = "t")]
    time_column: String,
    /// Fit a single model instead of classifying.
    #[arg(long)]
    model: Option<GrowthModel>,
    /// `LO,HI` time window.
    #[arg(long)]
    window: Option<String>,
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number '{v}'")))
        .collect()
}

fn parse_omega(s: &str) -> anyhow::Result<TimeFunction> {
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let v = if args.is_empty() { Vec::new() } else { parse_list(args)? };
    let want = |n: usize| -> anyhow::Result<()> {
        if v.len() != n {
            bail!("omega '{kind}' takes {n} argument(s), got {}", v.len());
        }
        Ok(())
    };
    let f = match kind {
        "constant" => {
            want(1)?;
            TimeFunction::constant(v[0])
        }
        "power-decay" | "power_decay" => {
            want(2)?;
            TimeFunction::power_decay(v[0], v[1])
        }
        "oscillatory" => {
            want(1)?;
            TimeFunction::Oscillatory { c: v[0] }
        }
        "affine" => {
            want(2)?;
            TimeFunction::Affine { a: v[0], b: v[1] }
        }
        _ => bail!("unknown omega kind '{kind}'"),
    };
    f.validate()?;
    Ok(f)
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<nlsgrowth::Error>() {
        Some(e) if e.is_validation() => EXIT_VALIDATION,
        Some(nlsgrowth::Error::Io(_)) => EXIT_VALIDATION,
        Some(_) => EXIT_GUARD,
        None => EXIT_VALIDATION,
    }
}

fn cmd_run(cli: &Cli, path: &Path, profile: ToleranceProfile) -> anyhow::Result<u8> {
    let sc = Scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    let start = Instant::now();
    let outcome = runner::run(&sc)?;
    let dir = runner::output_dir(&sc, cli.out_dir.as_deref());
    runner::write_outputs(&outcome, &dir)?;
    let s = &outcome.summary;
    println!("{}: {} steps, {} records -> {}", s.name, s.steps, s.records, dir.display());
    println!("runtime {:.2} s", start.elapsed().as_secs_f64());
    if s.boundary_warning {
        println!("warning: boundary mass ratio reached {:.3e}", s.max_boundary_ratio);
    }
    for (name, fit) in &s.fits {
        match (&fit.classification, &fit.error) {
            (Some(c), _) => {
                let rate = |m| c.fit(m).map_or(f64::NAN, |f| f.rate);
                println!(
                    "fit {name}: {} (poly exponent {:.4}, exp rate {:.4})",
                    c.best.label(),
                    rate(GrowthModel::Poly),
                    rate(GrowthModel::Exp)
                );
            }
            (None, Some(e)) => println!("fit {name}: {e}"),
            _ => {}
        }
    }
    for v in &s.verdicts {
        println!("{} {}: {}", if v.passed { "ok  " } else { "FAIL" }, v.name, v.detail);
    }
    if profile == ToleranceProfile::Strict && !s.failed_verdicts().is_empty() {
        return Ok(EXIT_VERDICT);
    }
    Ok(0)
}

fn cmd_sweep(cli: &Cli, path: &Path, grid: &[String], profile: ToleranceProfile) -> anyhow::Result<u8> {
    let sc = Scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    let mut gammas = Vec::new();
    let mut sigmas = Vec::new();
    for g in grid {
        let (key, vals) = g.split_once('=').ok_or_else(|| anyhow!("grid entry '{g}' is not key=list"))?;
        match key.trim() {
            "gamma" => gammas.extend(parse_list(vals)?),
            "sigma" => sigmas.extend(parse_list(vals)?),
            k => return Err(nlsgrowth::Error::Validation(format!("unknown sweep parameter '{k}'")).into()),
        }
    }
    if !gammas.is_empty() && sc.gamma().is_none() {
        return Err(nlsgrowth::Error::Validation("gamma sweeps need an isotropic power-decay potential".into()).into());
    }
    let root = runner::output_dir(&sc, cli.out_dir.as_deref()).with_file_name(format!("{}-sweep", sc.name));
    let rows = runner::sweep(&sc, &gammas, &sigmas, cli.jobs, Some(&root));
    let table = runner::sweep_csv(&rows);
    std::fs::create_dir_all(&root)?;
    std::fs::write(root.join("sweep.csv"), &table)?;
    print!("{table}");
    let failed = rows.iter().any(|r| r.status != "ok");
    if profile == ToleranceProfile::Strict && failed {
        return Ok(EXIT_VERDICT);
    }
    Ok(0)
}

fn cmd_hill(a: &HillArgs) -> anyhow::Result<u8> {
    let omega = parse_omega(&a.omega)?;
    let solution = if a.pair {
        let settings = PairSettings {
            t_match: a.t_match,
            t_max: a.t_max,
            extend_to: (a.t0 < a.t_match).then_some(a.t0),
            ..PairSettings::default()
        };
        let pair = construct_scattering_pair(&omega, &settings)?;
        eprintln!(
            "pair: {}+{} iterations, contraction {:.3e}, raw Wronskian {:.6e}",
            pair.report.iterations_nu, pair.report.iterations_mu, pair.report.contraction, pair.report.raw_wronskian
        );
        pair.solution
    } else {
        solve_hill(&omega, HillState::FUNDAMENTAL, &uniform_mesh(a.t0, a.t1, a.step)?)?
    };
    eprintln!("max Wronskian drift {:.3e}", solution.max_wronskian_drift());
    emit(a.output.as_deref(), &solution.to_csv(a.dim, a.sigma))?;
    Ok(0)
}

fn cmd_bound(a: &BoundArgs) -> anyhow::Result<u8> {
    let params = LedgerParams {
        c: a.c,
        alpha: a.alpha,
        tau0: a.tau0,
        kappa: a.kappa,
        branch: if a.endpoint { LedgerBranch::Endpoint } else { LedgerBranch::Finite },
        confining: a.confining,
    };
    let f = a.f;
    let ledger = double_exp_ledger(&params, &|_| f, a.t, a.w0)?;
    println!("tau = {:.16e}", ledger.tau);
    println!("N = {}", ledger.n);
    println!("amplification = {:.16e}", ledger.amplification);
    println!("B_N = {:.16e}", ledger.bound);
    println!("ln B_N = {:.16e}", ledger.log_bound);
    println!("C1 = {:.16e}", ledger.c1);
    println!("log envelope = {:.16e} (holds: {})", ledger.log_envelope, ledger.envelope_holds);
    if let Some(p) = &a.output {
        emit(Some(p), &ledger.to_csv())?;
    }
    Ok(0)
}

fn cmd_fit(a: &FitArgs) -> anyhow::Result<u8> {
    let mut reader = csv::Reader::from_path(&a.csv).with_context(|| format!("reading {}", a.csv.display()))?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| nlsgrowth::Error::Validation(format!("no column '{name}'")))
    };
    let (ti, yi) = (idx(&a.time_column)?, idx(&a.column)?);
    let mut t = Vec::new();
    let mut y = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        t.push(rec[ti].trim().parse::<f64>().context("bad time value")?);
        y.push(rec[yi].trim().parse::<f64>().context("bad column value")?);
    }
    let (t, y) = match &a.window {
        Some(w) => match parse_list(w)?.as_slice() {
            [lo, hi] => window(&t, &y, *lo, *hi),
            _ => bail!("window must be LO,HI"),
        },
        None => (t, y),
    };
    let fits = match a.model {
        Some(m) => vec![growth_fit(&t, &y, m)?],
        None => {
            let c = classify(&t, &y)?;
            println!("best: {}", c.best.label());
            c.fits
        }
    };
    for f in fits {
        println!(
            "{:<10} scale {:.6e} rate {:.6e} residual {:.3e}",
            f.model.label(),
            f.scale,
            f.rate,
            f.residual
        );
    }
    Ok(0)
}

fn cmd_verify(path: &Path, radius: f64, per_axis: usize, profile: ToleranceProfile) -> anyhow::Result<u8> {
    let sc = Scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    let xs = lattice_samples(sc.grid.dim, radius, per_axis);
    let report = verify_assumption(&sc.potential, &default_time_samples(), &xs, &AssumptionSettings::default())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(omega) = sc.potential.hill_omega() {
        if let Ok(s) = sharpness_classifier(&omega, 1000.0) {
            println!("limsup t^2 Omega ~ {:.4} ({:?})", s.limsup_estimate, s.regime);
        }
    }
    Ok(if report.passes || profile == ToleranceProfile::Fast { 0 } else { EXIT_VERDICT })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let profile = if cli.strict || matches!(cli.tolerance_profile, Profile::Strict) {
        ToleranceProfile::Strict
    } else {
        ToleranceProfile::Fast
    };
    let result = match &cli.command {
        Command::Run { scenario } => cmd_run(&cli, scenario, profile),
        Command::Sweep { scenario, grid } => cmd_sweep(&cli, scenario, grid, profile),
        Command::Hill(a) => cmd_hill(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Fit(a) => cmd_fit(a),
        Command::VerifyPotential {
            scenario,
            radius,
            per_axis,
        } => cmd_verify(scenario, *radius, *per_axis, profile),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
