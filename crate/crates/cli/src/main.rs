//! Command-line entry point: enumeration, evaluation, verification
//! suites, and Loewner-flow simulation, with JSON/CSV artifacts.

mod suites;

use std::fs::File;
use std::io::{self, Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sle_lab::config::{BoundaryConfig, Marked};
use sle_lab::coulomb::{
    eval_j, eval_k, log_gradient_psi, realization_for, scaling_exponent_d, PartitionEvaluation,
    PsiKind,
};
use sle_lab::loewner::{run_simulation, SimulationConfig};
use sle_lab::params::KappaParams;
use sle_lab::pattern::{count_report, enumerate_link_patterns, parse_arc_list, LinkPattern};
use sle_lab::report::{emit_report, write_csv, Report, SuiteSummary};
use sle_lab::{Result, SleError};

use suites::{
    capacity_suite, cm_suite, commutator_suite, default_points, nullvec_suite, report_battery,
    ward_suite, CapacitySetup, CmSetup, CommutatorSetup, Knobs, NullvecSetup, WardSetup, CM_TOL,
    COMMUTATOR_TOL, DEFAULT_SEED, NULLVEC_TOL, QUAD_TOL, WARD_TOL,
};

#[derive(Parser)]
#[command(
    name = "sle-lab",
    version,
    about = "Numerical laboratory for multiple chordal SLE"
)]
struct Cli {
    /// Output file; relative paths land in $SLE_LAB_OUT_DIR when that is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized component.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rayon worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tolerance override: the gate for verify subcommands, the quadrature
    /// target for eval.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Stencil truncation order: 2, 4, or 6.
    #[arg(long, global = true)]
    stencil_order: Option<usize>,
    /// Stencil step as a fraction of the local gap.
    #[arg(long, global = true)]
    step_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate link patterns and juxtapose the counting formulas.
    Patterns(PatternsArgs),
    /// Evaluate a screening integral once or over a JSON batch.
    Eval(EvalArgs),
    /// Null-vector PDE rows on a partition function.
    VerifyNullvec(VerifyNullvecArgs),
    /// Ward identity rows at a finite marked point.
    VerifyWard(VerifyWardArgs),
    /// Calogero-Moser conjugation over random test functions.
    VerifyCm(VerifyCmArgs),
    /// Generator and null-vector commutator relations.
    VerifyCommutators(VerifyCommutatorsArgs),
    /// Capacity corollary and the coordinate-change drift law.
    VerifyCapacity(VerifyCapacityArgs),
    /// Run the Loewner flow and write traces as CSV.
    Simulate(SimulateArgs),
    /// Run the fixed verification battery and emit a JSON report.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ground,
    Excited,
}

impl From<KindArg> for PsiKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ground => PsiKind::Ground,
            KindArg::Excited => PsiKind::Excited,
        }
    }
}

#[derive(Args)]
struct PatternsArgs {
    #[arg(long)]
    n: usize,
    /// Restrict to one link count (default: all 1..=n/2).
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Ground)]
    kind: KindArg,
    /// Decimal or rational, e.g. 3.2 or 8/3.
    #[arg(long)]
    kappa: Option<String>,
    /// Arc list, e.g. "(1,2)(3,4)"; n is the number of points.
    #[arg(long)]
    pattern: Option<String>,
    /// Comma-separated growth points, e.g. "0,1,2.5".
    #[arg(long)]
    points: Option<String>,
    /// Marked point: a number or "inf".
    #[arg(long)]
    u: Option<String>,
    /// Also compute the log-gradient.
    #[arg(long)]
    grad: bool,
    /// Also measure the dilatation exponent.
    #[arg(long)]
    scaling: bool,
    /// JSON file with a list of evaluation jobs; writes CSV.
    #[arg(long)]
    batch: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyNullvecArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    kappa: String,
    /// Arc list; default: every pattern of the class.
    #[arg(long)]
    pattern: Option<String>,
    /// Comma-separated growth points (default: spread with unit-plus gaps).
    #[arg(long)]
    x: Option<String>,
    /// Marked point: a number or "inf" (default).
    #[arg(long)]
    u: Option<String>,
    #[arg(long, value_enum, default_value_t = KindArg::Ground)]
    kind: KindArg,
}

#[derive(Args)]
struct VerifyWardArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    kappa: String,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    x: Option<String>,
    /// Finite marked point (default: two past the last growth point).
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, value_enum, default_value_t = KindArg::Excited)]
    kind: KindArg,
}

#[derive(Args)]
struct VerifyCmArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value = "4")]
    kappa: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long)]
    x: Option<String>,
}

#[derive(Args)]
struct VerifyCommutatorsArgs {
    /// Run a single class instead of the default (2,1) and (4,2) pair.
    #[arg(long, requires = "m")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    m: Option<usize>,
    #[arg(long, default_value = "4")]
    kappa: String,
}

#[derive(Args)]
struct VerifyCapacityArgs {
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    #[arg(long, default_value_t = 1.0)]
    y: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value = "4")]
    kappa: String,
    #[arg(long, default_value_t = 50.0)]
    radius: f64,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 240)]
    n_sub: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON simulation config; inline flags are ignored when present.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<String>,
    /// Arc list (default: adjacent pairs).
    #[arg(long)]
    pattern: Option<String>,
    /// Comma-separated starting points.
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    #[arg(long)]
    with_drift: bool,
    /// Re-serialize the parsed config to stdout and continue.
    #[arg(long)]
    echo_config: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Only run suites whose name contains this substring.
    #[arg(long)]
    only: Option<String>,
}

fn parse_kappa(s: &str) -> Result<f64> {
    let bad = |detail: &str| SleError::InvalidParameter(format!("kappa '{s}': {detail}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: f64 = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den == 0.0 {
            return Err(bad("zero denominator"));
        }
        Ok(num / den)
    } else {
        s.trim().parse().map_err(|_| bad("not a number"))
    }
}

fn parse_point_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| SleError::InvalidParameter(format!("bad point '{tok}'")))
        })
        .collect()
}

fn parse_marked(s: Option<&str>) -> Result<Marked> {
    match s {
        None => Ok(Marked::Infinity),
        Some(tok) => {
            let t = tok.trim().to_ascii_lowercase();
            if t == "inf" || t == "infinity" || t == "oo" {
                Ok(Marked::Infinity)
            } else {
                t.parse::<f64>()
                    .map(Marked::Finite)
                    .map_err(|_| SleError::InvalidParameter(format!("bad marked point '{tok}'")))
            }
        }
    }
}

fn parse_arcs_opt(s: &Option<String>) -> Result<Option<Vec<(usize, usize)>>> {
    s.as_deref().map(parse_arc_list).transpose()
}

/// Relative output paths land in $SLE_LAB_OUT_DIR when that is set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("SLE_LAB_OUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn print_suite(suite: &SuiteSummary) {
    for c in &suite.checks {
        let flag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{flag}] {}  residual={:.3e} tol={:.3e}", c.name, c.residual, c.tolerance);
    }
    println!(
        "suite {}: {}/{} checks passed ({:.2} s)",
        suite.suite, suite.passed, suite.checks_run, suite.wall_time_s
    );
}

/// Prints the suites, writes them as a JSON report when --out is given,
/// and converts the outcome into an exit decision.
fn finish_suites(suites: Vec<SuiteSummary>, out: &Option<PathBuf>) -> Result<bool> {
    for s in &suites {
        print_suite(s);
    }
    let report = Report::new(suites);
    if let Some(path) = out {
        let path = resolve_out(path);
        emit_report(&report, File::create(&path)?)?;
        println!("report written to {}", path.display());
    }
    Ok(report.all_passed())
}

fn cmd_patterns(args: &PatternsArgs, out: &Option<PathBuf>) -> Result<bool> {
    let ms: Vec<usize> = match args.m {
        Some(m) => vec![m],
        None => (1..=args.n / 2).collect(),
    };
    for &m in &ms {
        for pat in enumerate_link_patterns(args.n, m)? {
            println!("{pat}");
        }
    }
    println!();
    println!(
        "{:>4} {:>4} {:>12} {:>14} {:>14}",
        "n", "m", "enumerated", "ballot form", "shifted form"
    );
    let mut rows = Vec::new();
    for &m in &ms {
        let r = count_report(args.n, m)?;
        println!(
            "{:>4} {:>4} {:>12} {:>14} {:>14}",
            r.n, r.m, r.enumerated, r.formula_ballot, r.formula_shifted
        );
        rows.push(vec![
            r.n.to_string(),
            r.m.to_string(),
            r.enumerated.to_string(),
            r.formula_ballot.to_string(),
            r.formula_shifted.to_string(),
        ]);
    }
    if let Some(path) = out {
        let path = resolve_out(path);
        write_csv(
            File::create(&path)?,
            &["n", "m", "enumerated", "ballot_form", "shifted_form"],
            &rows,
        )?;
        println!("counts written to {}", path.display());
    }
    Ok(true)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum KappaField {
    Num(f64),
    Text(String),
}

impl KappaField {
    fn value(&self) -> Result<f64> {
        match self {
            KappaField::Num(v) => Ok(*v),
            KappaField::Text(s) => parse_kappa(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalJob {
    #[serde(default)]
    kind: Option<String>,
    kappa: KappaField,
    /// Arc list, e.g. "(1,2)(3,4)".
    pattern: String,
    points: Vec<f64>,
    #[serde(default)]
    u: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    with_gradient: bool,
    #[serde(default)]
    with_scaling: bool,
}

fn job_kind(s: &Option<String>) -> Result<PsiKind> {
    match s.as_deref() {
        None | Some("ground") => Ok(PsiKind::Ground),
        Some("excited") => Ok(PsiKind::Excited),
        Some(other) => Err(SleError::InvalidParameter(format!(
            "kind must be 'ground' or 'excited', got '{other}'"
        ))),
    }
}

fn eval_once(
    kind: PsiKind,
    kappa: f64,
    pattern: &LinkPattern,
    config: &BoundaryConfig,
    tol: f64,
) -> Result<PartitionEvaluation> {
    let kp = KappaParams::new(kappa)?;
    match kind {
        PsiKind::Ground => eval_j(&kp, pattern, config, tol),
        PsiKind::Excited => eval_k(&kp, pattern, config, tol),
    }
}

fn cmd_eval(args: &EvalArgs, knobs: &Knobs, out: &Option<PathBuf>) -> Result<bool> {
    if let Some(batch) = &args.batch {
        return cmd_eval_batch(batch, knobs, out);
    }
    let kappa = parse_kappa(
        args.kappa
            .as_deref()
            .ok_or_else(|| SleError::InvalidParameter("--kappa is required".into()))?,
    )?;
    let points = parse_point_list(
        args.points
            .as_deref()
            .ok_or_else(|| SleError::InvalidParameter("--points is required".into()))?,
    )?;
    let arcs = parse_arcs_opt(&args.pattern)?
        .ok_or_else(|| SleError::InvalidParameter("--pattern is required".into()))?;
    let pattern = LinkPattern::from_arcs(points.len(), &arcs)?;
    let marked = parse_marked(args.u.as_deref())?;
    let config = BoundaryConfig::new(points.clone(), marked)?;
    let kind: PsiKind = args.kind.into();
    let kp = KappaParams::new(kappa)?;
    let ev = eval_once(kind, kappa, &pattern, &config, knobs.quad_tol)?;
    println!("kappa = {kappa}");
    println!("{pattern}");
    match marked {
        Marked::Infinity => println!("points = {points:?}   u = inf"),
        Marked::Finite(u) => println!("points = {points:?}   u = {u}"),
    }
    println!(
        "realization = {:?}   degenerate normalization = {}",
        realization_for(&kp),
        ev.degenerate_normalization
    );
    println!(
        "value = {:.12e} + {:.12e} i   (error estimate {:.2e}, {} nodes)",
        ev.value.re, ev.value.im, ev.error_estimate, ev.nodes_used
    );
    if let Some(note) = &ev.note {
        println!("note: {note}");
    }
    if args.grad {
        let g = log_gradient_psi(
            kind,
            &kp,
            &pattern,
            &config,
            knobs.quad_tol,
            knobs.stencil.step_scale,
        )?;
        println!("log-gradient = {g:?}");
    }
    if args.scaling {
        let s = scaling_exponent_d(kind, &kp, &pattern, &config, knobs.quad_tol)?;
        println!(
            "dilatation exponent: measured {:.8} / {:.8} (two dilations), closed form {:.8}",
            s.measured, s.measured_second, s.closed_form
        );
    }
    Ok(true)
}

fn cmd_eval_batch(batch: &Path, knobs: &Knobs, out: &Option<PathBuf>) -> Result<bool> {
    let mut text = String::new();
    File::open(batch)?.read_to_string(&mut text)?;
    let jobs: Vec<EvalJob> = serde_json::from_str(&text)?;
    let grad_cols = jobs.iter().map(|j| j.points.len()).max().unwrap_or(0);
    use rayon::prelude::*;
    let rows: Result<Vec<Vec<String>>> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| -> Result<Vec<String>> {
            let with_context = |e: SleError| {
                SleError::InvalidParameter(format!("batch job {i}: {e}"))
            };
            let kind = job_kind(&job.kind).map_err(with_context)?;
            let kappa = job.kappa.value().map_err(with_context)?;
            let kp = KappaParams::new(kappa).map_err(with_context)?;
            let arcs = parse_arc_list(&job.pattern).map_err(with_context)?;
            let pattern =
                LinkPattern::from_arcs(job.points.len(), &arcs).map_err(with_context)?;
            let marked = Marked::from_option(job.u);
            let config =
                BoundaryConfig::new(job.points.clone(), marked).map_err(with_context)?;
            let tol = job.tol.unwrap_or(knobs.quad_tol);
            let ev = eval_once(kind, kappa, &pattern, &config, tol).map_err(with_context)?;
            let mut row = vec![
                i.to_string(),
                match kind {
                    PsiKind::Ground => "ground".to_string(),
                    PsiKind::Excited => "excited".to_string(),
                },
                format!("{kappa}"),
                format!("{:e}", ev.value.re),
                format!("{:e}", ev.value.im),
                format!("{:e}", ev.error_estimate),
                ev.nodes_used.to_string(),
            ];
            let grad = if job.with_gradient {
                log_gradient_psi(kind, &kp, &pattern, &config, tol, knobs.stencil.step_scale)
                    .map_err(with_context)?
            } else {
                Vec::new()
            };
            for k in 0..grad_cols {
                row.push(grad.get(k).map_or(String::new(), |v| format!("{v:e}")));
            }
            if job.with_scaling {
                let s = scaling_exponent_d(kind, &kp, &pattern, &config, tol)
                    .map_err(with_context)?;
                row.push(format!("{:e}", s.measured));
                row.push(format!("{:e}", s.closed_form));
            } else {
                row.push(String::new());
                row.push(String::new());
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;
    let mut header =
        vec!["job".to_string(), "kind".into(), "kappa".into(), "re".into(), "im".into(),
             "abs_error".into(), "nodes".into()];
    for k in 0..grad_cols {
        header.push(format!("log_gradient_{}", k + 1));
    }
    header.push("d_measured".into());
    header.push("d_closed_form".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    match out {
        Some(path) => {
            let path = resolve_out(path);
            write_csv(File::create(&path)?, &header_refs, &rows)?;
            println!("{} rows written to {}", rows.len(), path.display());
        }
        None => write_csv(io::stdout().lock(), &header_refs, &rows)?,
    }
    Ok(true)
}

fn cmd_simulate(args: &SimulateArgs, knobs: &Knobs, out: &Option<PathBuf>) -> Result<bool> {
    let cfg = match &args.config {
        Some(path) => {
            let mut text = String::new();
            File::open(path)?.read_to_string(&mut text)?;
            serde_json::from_str::<SimulationConfig>(&text)?
        }
        None => {
            let x0 = parse_point_list(
                args.x
                    .as_deref()
                    .ok_or_else(|| SleError::InvalidParameter("--x is required".into()))?,
            )?;
            let kappa = parse_kappa(
                args.kappa
                    .as_deref()
                    .ok_or_else(|| SleError::InvalidParameter("--kappa is required".into()))?,
            )?;
            let arcs = match parse_arcs_opt(&args.pattern)? {
                Some(a) => a,
                None => (0..x0.len() / 2).map(|k| (2 * k + 1, 2 * k + 2)).collect(),
            };
            SimulationConfig {
                kappa,
                pattern: LinkPattern::from_arcs(x0.len(), &arcs)?,
                x0,
                u0: args.u,
                t_end: args.t_end,
                dt: args.dt,
                seed: knobs.seed,
                resolution: args.resolution,
                with_drift: args.with_drift,
            }
        }
    };
    if args.echo_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
    }
    let outcome = run_simulation(&cfg)?;
    println!(
        "simulated {} curves to t = {} in {} steps ({} halvings)",
        cfg.x0.len(),
        outcome.time,
        outcome.steps,
        outcome.halvings
    );
    println!("final driving = {:?}", outcome.final_driving);
    if let Marked::Finite(u) = outcome.final_marked {
        println!("final marked point = {u}");
    }
    let mut rows = Vec::new();
    for (ci, trace) in outcome.traces.iter().enumerate() {
        for (si, z) in trace.iter().enumerate() {
            rows.push(vec![ci.to_string(), si.to_string(), format!("{:e}", z.re),
                           format!("{:e}", z.im)]);
        }
    }
    match out {
        Some(path) => {
            let path = resolve_out(path);
            write_csv(File::create(&path)?, &["curve", "step", "re", "im"], &rows)?;
            println!("{} trace points written to {}", rows.len(), path.display());
        }
        None => write_csv(io::stdout().lock(), &["curve", "step", "re", "im"], &rows)?,
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| SleError::InvalidParameter(format!("thread pool: {e}")))?;
    }
    let mut stencil = Knobs::default().stencil;
    if let Some(order) = cli.stencil_order {
        stencil.order = order;
    }
    if let Some(scale) = cli.step_scale {
        stencil.step_scale = scale;
    }
    let knobs = Knobs {
        quad_tol: match cli.command {
            Command::Eval(_) => cli.tol.unwrap_or(QUAD_TOL),
            _ => QUAD_TOL,
        },
        stencil,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
    };
    match &cli.command {
        Command::Patterns(args) => cmd_patterns(args, &cli.out),
        Command::Eval(args) => cmd_eval(args, &knobs, &cli.out),
        Command::VerifyNullvec(args) => {
            let points = args.x.as_deref().map(parse_point_list).transpose()?;
            let setup = NullvecSetup {
                kind: args.kind.into(),
                kappa: parse_kappa(&args.kappa)?,
                n: args.n,
                m: args.m,
                arcs: parse_arcs_opt(&args.pattern)?,
                points,
                u: parse_marked(args.u.as_deref())?,
                tol: cli.tol.unwrap_or(NULLVEC_TOL),
            };
            finish_suites(vec![nullvec_suite(&setup, &knobs)?], &cli.out)
        }
        Command::VerifyWard(args) => {
            let points = args.x.as_deref().map(parse_point_list).transpose()?;
            let last = points
                .as_deref()
                .map_or_else(|| default_points(args.n)[args.n - 1], |p| p[p.len() - 1]);
            let setup = WardSetup {
                kind: args.kind.into(),
                kappa: parse_kappa(&args.kappa)?,
                n: args.n,
                m: args.m,
                arcs: parse_arcs_opt(&args.pattern)?,
                points,
                u: args.u.unwrap_or(last + 2.0),
                tol: cli.tol.unwrap_or(WARD_TOL),
            };
            finish_suites(vec![ward_suite(&setup, &knobs)?], &cli.out)
        }
        Command::VerifyCm(args) => {
            let setup = CmSetup {
                n: args.n,
                kappas: vec![parse_kappa(&args.kappa)?],
                trials: args.trials,
                points: args.x.as_deref().map(parse_point_list).transpose()?,
                tol: cli.tol.unwrap_or(CM_TOL),
            };
            finish_suites(vec![cm_suite(&setup, &knobs)?], &cli.out)
        }
        Command::VerifyCommutators(args) => {
            let cases = match (args.n, args.m) {
                (Some(n), Some(m)) => vec![(n, m)],
                _ => vec![(2, 1), (4, 2)],
            };
            let setup = CommutatorSetup {
                cases,
                kappa: parse_kappa(&args.kappa)?,
                tol: cli.tol.unwrap_or(COMMUTATOR_TOL),
            };
            finish_suites(vec![commutator_suite(&setup, &knobs)?], &cli.out)
        }
        Command::VerifyCapacity(args) => {
            let setup = CapacitySetup {
                x: args.x,
                y: args.y,
                eps: args.eps,
                c: args.c,
                kappa: parse_kappa(&args.kappa)?,
                radius: args.radius,
                dt: args.dt,
                n_sub: args.n_sub,
            };
            finish_suites(vec![capacity_suite(&setup)?], &cli.out)
        }
        Command::Simulate(args) => cmd_simulate(args, &knobs, &cli.out),
        Command::Report(args) => {
            let suites = report_battery(&knobs, args.only.as_deref())?;
            for s in &suites {
                print_suite(s);
            }
            let report = Report::new(suites);
            match &cli.out {
                Some(path) => {
                    let path = resolve_out(path);
                    emit_report(&report, File::create(&path)?)?;
                    println!("report written to {}", path.display());
                }
                None => emit_report(&report, io::stdout().lock())?,
            }
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let mut err = io::stderr().lock();
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(2)
        }
    }
}
