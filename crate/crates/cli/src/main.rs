mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use horolab::christoffel::{assemble_solution, solve_nirenberg, SolveConfig, SolveStatus};
use horolab::horospherical::checks::identity_chain;
use horolab::horospherical::dual::{dual_sweep, write_dual_csv};
use horolab::horospherical::export::Sweep;
use horolab::horospherical::tau::find_tau0;
use horolab::verify::{run_verify, Check, VerifyConfig, DEFAULT_SEED};
use horolab::weingarten::{
    cone_contains, signed_contact_sigma, umbilicity_diagnostic, ConeKind, ConeSpec,
    WeingartenFunctional,
};
use horolab::{fmt_num, jet2, ConformalFactorSpec, Error, SphereGrid};

use config::{Config, Tau};

const DEFAULT_DEGREE: usize = 16;

#[derive(Parser)]
#[command(
    name = "horolab",
    version,
    about = "Conformal factors on S^2 and their horospherically convex hypersurfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature report and mesh of the hypersurface of `rho`.
    Build(Io),
    /// Solve for `rho` with prescribed scalar curvature `target` and build its hypersurface.
    Solve(Io),
    /// Run every invariant suite.
    Verify(Io),
    /// Schouten eigenvalues of the dual hypersurface of `rho`.
    Dual(Io),
    /// Weingarten functionals and umbilicity diagnostic of `rho`.
    Weingarten(Io),
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Parse(_)) { 2 } else { 1 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("HOROLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let (io, run): (&Io, fn(&Config, &Path) -> Outcome) = match &cli.command {
        Command::Build(io) => (io, run_build),
        Command::Solve(io) => (io, run_solve),
        Command::Verify(io) => (io, run_verify_cmd),
        Command::Dual(io) => (io, run_dual),
        Command::Weingarten(io) => (io, run_weingarten),
    };
    let result = Config::load(&io.config)
        .map_err(Failure::from)
        .and_then(|cfg| {
            std::fs::create_dir_all(&io.out)?;
            run(&cfg, &io.out)
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn create(dir: &Path, name: &str) -> std::result::Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_summary(dir: &Path, text: &str) -> Outcome {
    let mut w = create(dir, "summary.txt")?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    print!("{text}");
    Ok(())
}

/// Dilation requested by the config, with `auto` resolved on `grid`.
fn resolve_tau(
    cfg: &Config,
    spec: &ConformalFactorSpec,
    grid: &SphereGrid,
) -> std::result::Result<f64, Failure> {
    match cfg.tau {
        Tau::Fixed(t) => Ok(t),
        Tau::Auto => Ok(find_tau0(spec, grid)?),
    }
}

/// Global flags, curvature extremes and identity-chain deviation of a sweep.
fn sweep_summary(out: &mut String, sweep: &Sweep) -> std::result::Result<(), Failure> {
    let reports = sweep.reports();
    let all = |f: fn(&horolab::horospherical::CurvatureFlags) -> bool| {
        reports.iter().all(|r| f(&r.flags))
    };
    let kmin = reports
        .iter()
        .map(|r| r.kappa_min())
        .fold(f64::INFINITY, f64::min);
    let kmax = reports
        .iter()
        .map(|r| r.kappa_max())
        .fold(f64::NEG_INFINITY, f64::max);
    let cmin = reports
        .iter()
        .map(|r| r.christoffel_mean)
        .fold(f64::INFINITY, f64::min);
    let cmax = reports
        .iter()
        .map(|r| r.christoffel_mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let frame = sweep
        .nodes
        .iter()
        .map(|n| n.frame.invariant_error())
        .fold(0.0, f64::max);
    let _ = writeln!(out, "nodes = {}", sweep.nodes.len());
    let _ = writeln!(
        out,
        "horospherically_convex = {}",
        all(|f| f.horospherically_convex)
    );
    let _ = writeln!(out, "canonical = {}", all(|f| f.canonical));
    let _ = writeln!(out, "strongly_h_convex = {}", all(|f| f.strongly_h_convex));
    let _ = writeln!(out, "umbilic = {}", all(|f| f.umbilic));
    let _ = writeln!(out, "kappa_min = {}", fmt_num(kmin));
    let _ = writeln!(out, "kappa_max = {}", fmt_num(kmax));
    let _ = writeln!(out, "christoffel_min = {}", fmt_num(cmin));
    let _ = writeln!(out, "christoffel_max = {}", fmt_num(cmax));
    let _ = writeln!(out, "frame_invariant_max = {}", fmt_num(frame));
    Ok(())
}

fn write_sweep(dir: &Path, sweep: &Sweep) -> Outcome {
    let mut w = create(dir, "report.csv")?;
    sweep.write_report_csv(&mut w)?;
    w.flush()?;
    let mut w = create(dir, "mesh.obj")?;
    sweep.mesh().write_obj(&mut w)?;
    w.flush()?;
    Ok(())
}

fn singular_message(
    spec: &ConformalFactorSpec,
    grid: &SphereGrid,
    tau: f64,
    sweep: &Sweep,
) -> Failure {
    let (count, worst) = sweep.singular_summary();
    let hint = match find_tau0(spec, grid) {
        Ok(t) => format!(
            "set tau = {} (or tau = auto) to dilate into the regular range",
            fmt_num(t.max(tau))
        ),
        Err(e) => format!("no admissible dilation found: {e}"),
    };
    fail(format!(
        "hypersurface is singular at {count} of {} nodes (most negative regularity eigenvalue {}); {hint}",
        sweep.nodes.len(),
        fmt_num(worst)
    ))
}

fn run_build(cfg: &Config, dir: &Path) -> Outcome {
    let (spec, grid, name) = cfg.factor(DEFAULT_DEGREE)?;
    let tau = resolve_tau(cfg, &spec, &grid)?;
    let sweep = Sweep::new(&spec, &grid, tau.ln())?;
    if !sweep.all_regular() {
        return Err(singular_message(&spec, &grid, tau, &sweep));
    }
    write_sweep(dir, &sweep)?;
    let chain = (0..grid.len())
        .map(|k| Ok(identity_chain(&jet2(&spec, &grid.point(k))?.dilated(tau.ln()))?.max()))
        .collect::<horolab::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut s = String::new();
    let _ = writeln!(s, "rho = {name}");
    let _ = writeln!(s, "L = {}", grid.degree());
    let _ = writeln!(s, "tau = {}", fmt_num(tau));
    sweep_summary(&mut s, &sweep)?;
    let _ = writeln!(s, "identity_chain_max = {}", fmt_num(chain));
    write_summary(dir, &s)
}

fn solve_config(cfg: &Config, degree: usize) -> SolveConfig {
    let mut sc = SolveConfig::new(degree);
    if let Some(t) = cfg.tol {
        sc.tol = t;
    }
    if let Some(m) = cfg.max_iter {
        sc.max_iter = m;
    }
    if let Some(d) = cfg.damping {
        sc.damping = d;
    }
    sc
}

fn run_solve(cfg: &Config, dir: &Path) -> Outcome {
    let (target, name) = cfg.target_field(DEFAULT_DEGREE)?;
    let sc = solve_config(cfg, target.grid().degree());
    let outcome = solve_nirenberg(&target, &sc)?;
    let mut w = create(dir, "rho.csv")?;
    outcome.rho.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(dir, "residuals.csv")?;
    outcome.write_residuals_csv(&mut w)?;
    w.flush()?;
    let mut w = create(dir, "kw.csv")?;
    outcome.write_kw_csv(&mut w)?;
    w.flush()?;

    let mut s = String::new();
    let _ = writeln!(s, "target = {name}");
    let _ = writeln!(s, "L = {}", sc.degree);
    let _ = writeln!(s, "status = {}", outcome.status.as_str());
    let _ = writeln!(s, "newton_steps = {}", outcome.residuals.len() - 1);
    let _ = writeln!(s, "residual = {}", fmt_num(outcome.final_residual()));
    for (i, v) in outcome.kw.iter().enumerate() {
        let _ = writeln!(s, "kw_{} = {}", i + 1, fmt_num(*v));
    }
    let _ = writeln!(s, "kw_noise_floor = {}", fmt_num(outcome.kw_floor));
    if outcome.status != SolveStatus::Converged {
        write_summary(dir, &s)?;
        return Err(fail(format!(
            "solver did not converge: {}",
            outcome.status.as_str()
        )));
    }
    let sol = assemble_solution(&target, outcome)?;
    write_sweep(dir, &sol.sweep)?;
    let _ = writeln!(s, "tau = {}", fmt_num(sol.tau));
    sweep_summary(&mut s, &sol.sweep)?;
    let _ = writeln!(
        s,
        "christoffel_deviation = {}",
        fmt_num(sol.christoffel_dev)
    );
    let _ = writeln!(s, "metric_deviation = {}", fmt_num(sol.metric_dev));
    let _ = writeln!(s, "identity_chain_max = {}", fmt_num(sol.chain_dev));
    write_summary(dir, &s)
}

fn check_line(c: &Check) -> String {
    format!(
        "[{}] {}: {} {} {}",
        if c.passed() { "PASS" } else { "FAIL" },
        c.name,
        fmt_num(c.value),
        c.relation.symbol(),
        fmt_num(c.bound)
    )
}

fn run_verify_cmd(cfg: &Config, dir: &Path) -> Outcome {
    let degree = cfg.degree.unwrap_or(DEFAULT_DEGREE);
    let vc = VerifyConfig {
        degree,
        solver_degree: degree.min(horolab::christoffel::MAX_SOLVER_DEGREE),
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        quick: cfg.quick,
    };
    // an explicit factor is checked on top of the built-in suites
    let extra = match cfg.rho {
        Some(_) => {
            let (spec, grid, name) = cfg.factor(degree)?;
            let tau = find_tau0(&spec, &grid)?;
            let sweep = Sweep::new(&spec, &grid, tau.ln())?;
            let chain = (0..grid.len())
                .map(|k| Ok(identity_chain(&jet2(&spec, &grid.point(k))?.dilated(tau.ln()))?.max()))
                .collect::<horolab::Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let frame = sweep
                .nodes
                .iter()
                .map(|n| n.frame.invariant_error())
                .fold(0.0, f64::max);
            vec![
                Check::at_most(format!("{name} identity chain"), chain, 1e-7),
                Check::at_most(format!("{name} frame invariants"), frame, 1e-9),
            ]
        }
        None => Vec::new(),
    };
    let mut run = run_verify(&vc)?;
    run.checks.extend(extra);
    run.write_outputs(dir)?;
    let mut s = String::new();
    for c in &run.checks {
        let _ = writeln!(s, "{}", check_line(c));
    }
    let passed = run.checks.iter().filter(|c| c.passed()).count();
    let _ = writeln!(s, "{passed}/{} checks passed", run.checks.len());
    write_summary(dir, &s)?;
    match run.first_failure() {
        None => Ok(()),
        Some(c) => Err(fail(format!("first failing invariant: {}", c.name))),
    }
}

fn run_dual(cfg: &Config, dir: &Path) -> Outcome {
    let (spec, grid, name) = cfg.factor(8)?;
    let results = dual_sweep(&spec, &grid, cfg.t);
    let mut w = create(dir, "dual.csv")?;
    write_dual_csv(&grid, &results, &mut w)?;
    w.flush()?;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (k, r) in results.iter().enumerate() {
        match r {
            Ok(d) => worst = worst.max(d.product_error()),
            Err(e) => {
                let (theta, phi) = grid.angles(k);
                bad.push(format!(
                    "node {k} (theta = {}, phi = {}): {e}",
                    fmt_num(theta),
                    fmt_num(phi)
                ));
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "rho = {name}");
    let _ = writeln!(s, "L = {}", grid.degree());
    let _ = writeln!(s, "nodes = {}", results.len());
    let _ = writeln!(s, "failed_nodes = {}", bad.len());
    let _ = writeln!(s, "max_product_error = {}", fmt_num(worst));
    write_summary(dir, &s)?;
    if bad.is_empty() {
        Ok(())
    } else {
        for b in &bad {
            eprintln!("{b}");
        }
        Err(fail(format!(
            "{} nodes have no dual eigenvalues",
            bad.len()
        )))
    }
}

fn run_weingarten(cfg: &Config, dir: &Path) -> Outcome {
    let (spec, grid, name) = cfg.factor(DEFAULT_DEGREE)?;
    let k = cfg.k.unwrap_or(2);
    let wf = WeingartenFunctional::new(2, k)?;
    let tau = resolve_tau(cfg, &spec, &grid)?;
    let sweep = Sweep::new(&spec, &grid, tau.ln())?;
    if !sweep.all_regular() {
        return Err(singular_message(&spec, &grid, tau, &sweep));
    }
    let star = ConeSpec::new(ConeKind::GammaN, 2)?;
    let mut w = csv_writer(create(dir, "weingarten.csv")?);
    let header = [
        "theta",
        "phi",
        "kappa_1",
        "kappa_2",
        "lambda_in_cone",
        "W",
        "S_k_delta",
        "delta_in_gamma_n",
    ];
    w.write_record(header).map_err(csv_err)?;
    for (node, report) in sweep
        .nodes
        .iter()
        .zip(0..)
        .filter_map(|(n, i)| n.report.as_ref().map(|r| (i, r)))
    {
        let (theta, phi) = grid.angles(node);
        let value = wf.value(&report.kappas).ok();
        w.write_record([
            fmt_num(theta),
            fmt_num(phi),
            fmt_num(report.kappas[0]),
            fmt_num(report.kappas[1]),
            (cone_contains(&wf.cone(), &report.lambdas) as u8).to_string(),
            value.map(fmt_num).unwrap_or_else(|| "NaN".into()),
            fmt_num(signed_contact_sigma(report, k)),
            (cone_contains(&star, &report.signed_contact) as u8).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    let d = umbilicity_diagnostic(&sweep.reports(), &wf);
    let mut s = String::new();
    let _ = writeln!(s, "rho = {name}");
    let _ = writeln!(s, "L = {}", grid.degree());
    let _ = writeln!(s, "k = {k}");
    let _ = writeln!(s, "tau = {}", fmt_num(tau));
    let _ = writeln!(s, "max_spread = {}", fmt_num(d.max_spread));
    let _ = writeln!(s, "weingarten_deviation = {}", fmt_num(d.wein_const_dev));
    let _ = writeln!(s, "undefined_nodes = {}", d.undefined_nodes);
    write_summary(dir, &s)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

fn csv_err(e: csv::Error) -> Failure {
    fail(e.to_string())
}
