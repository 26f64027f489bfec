//! Command line front end for the weak SRK solver library.
//!
//! Subcommands cover tableau validation and order checking, family
//! sampling, benchmark estimates, convergence studies with plot data
//! emission, and effort tables. Exit codes: 0 success, 2 validation
//! failure, 1 runtime error, 64 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand, ValueEnum};

use srkw::families::{self, Branch, ORD22_CASES};
use srkw::integrator::{integrate_path, EvalCounters, SdeProblem, Stepper};
use srkw::montecarlo::{
    self, ExemCoupling, ExemLaw, ExemOptions, SchemeSpec, CSV_CONVERGE_HEADER, CSV_HEADER,
};
use srkw::order_conditions::{self, DEFAULT_TOL};
use srkw::problems;
use srkw::rng::RandomStream;
use srkw::tableau::{compile, validate, ButcherTableau, ExecutionPlan, RawTableau};

const EXIT_VALIDATION: i32 = 2;
const EXIT_RUNTIME: i32 = 1;
const EXIT_USAGE: i32 = 64;
const OUT_DIR_ENV: &str = "SRKW_OUT_DIR";
const FAST_MAX_PATHS: u64 = 1_000_000;
const FULL_MAX_PATHS: u64 = 100_000_000;
const FAST_MAX_STEPS: usize = 3;

#[derive(Parser)]
#[command(
    name = "srkw",
    version,
    about = "Weak stochastic Runge-Kutta benchmark harness",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker threads for path simulation (default: available parallelism).
    /// Results are independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tableau file operations
    #[command(subcommand)]
    Tableau(TableauCmd),
    /// Coefficient family constructors and diagnostics
    #[command(subcommand)]
    Families(FamiliesCmd),
    /// Weak-error estimates at fixed step sizes
    Bench(BenchArgs),
    /// Convergence study with order regression and plot data
    Converge(ConvergeArgs),
    /// Per-step evaluation counts over the noise dimension
    Effort(EffortArgs),
}

#[derive(Subcommand)]
enum TableauCmd {
    /// Parse a tableau file and report every structural violation
    Validate { file: PathBuf },
    /// Validate, then evaluate all order conditions
    Check {
        /// Tableau file path, or a built-in name (dri1, dri1m, euler)
        scheme: String,
    },
}

#[derive(Subcommand)]
enum FamiliesCmd {
    /// Sample random members of a solvable order-(2,2) case
    Sample(SampleArgs),
    /// Emit the DRI1 tableau as JSON
    Dri1 {
        /// Output directory (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the leading error constant norm
    Lec {
        #[arg(long, value_enum, default_value_t = BranchArg::Minus)]
        branch: BranchArg,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_parser = PossibleValuesParser::new(ORD22_CASES))]
    case: String,
    #[arg(long, default_value_t = 1)]
    count: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Minus,
    Plus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// Desk scale: at most 10^6 paths and 3 step sizes
    Fast,
    /// Paper-scale-adjacent: up to 10^8 paths
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExemRv {
    ThreePoint,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExemPairing {
    Common,
    Independent,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scheme name (dri1, dri1m, euler, exem) or tableau file path;
    /// comma separated list for converge
    #[arg(long)]
    scheme: String,
    #[arg(long, value_parser = PossibleValuesParser::new(problems::PROBLEM_NAMES))]
    problem: String,
    /// Step sizes, comma separated; accepts 2^-k literals
    #[arg(long = "h", value_delimiter = ',', value_parser = parse_step, required = true)]
    hs: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    paths: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    batches: u32,
    #[arg(long, value_enum, default_value_t = Profile::Full)]
    profile: Profile,
    /// Increment law for the extrapolated Euler estimator
    #[arg(long, value_enum, default_value_t = ExemRv::ThreePoint)]
    exem_rv: ExemRv,
    /// Whether the two EXEM grids share increments
    #[arg(long, value_enum, default_value_t = ExemPairing::Independent)]
    exem_coupling: ExemPairing,
    /// Output directory; falls back to SRKW_OUT_DIR, then stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write a gnuplot script plotting the emitted data files
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct EffortArgs {
    /// Built-in scheme name or tableau file path
    #[arg(long, default_value = "dri1")]
    scheme: String,
    /// Steps per trace
    #[arg(long, default_value_t = 1)]
    steps: u32,
    /// Largest noise dimension
    #[arg(long, default_value_t = 10)]
    m_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; falls back to SRKW_OUT_DIR, then stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying the process exit code.
struct Failure {
    code: i32,
    err: anyhow::Error,
}

type AppResult<T> = Result<T, Failure>;

fn validation<E: Into<anyhow::Error>>(err: E) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        err: err.into(),
    }
}

fn runtime<E: Into<anyhow::Error>>(err: E) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        err: err.into(),
    }
}

fn parse_step(tok: &str) -> Result<f64, String> {
    let t = tok.trim();
    if let Some(rest) = t.strip_prefix("2^") {
        let k: i32 = rest
            .parse()
            .map_err(|_| format!("bad step literal {t:?} (expected 2^-k)"))?;
        return Ok(2f64.powi(k));
    }
    match t.parse::<f64>() {
        Ok(h) if h.is_finite() && h > 0.0 => Ok(h),
        _ => Err(format!("bad step literal {t:?}")),
    }
}

fn main() {
    let code = real_main();
    std::process::exit(code);
}

fn real_main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage_ok = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if usage_ok { 0 } else { EXIT_USAGE };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return EXIT_RUNTIME;
        }
    }
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            f.code
        }
    }
}

fn dispatch(cmd: Cmd) -> AppResult<()> {
    match cmd {
        Cmd::Tableau(TableauCmd::Validate { file }) => tableau_validate(&file),
        Cmd::Tableau(TableauCmd::Check { scheme }) => tableau_check(&scheme),
        Cmd::Families(FamiliesCmd::Sample(args)) => families_sample(&args),
        Cmd::Families(FamiliesCmd::Dri1 { out }) => families_dri1(out.as_deref()),
        Cmd::Families(FamiliesCmd::Lec { branch }) => families_lec(branch),
        Cmd::Bench(args) => bench(args.run),
        Cmd::Converge(args) => converge(args),
        Cmd::Effort(args) => effort(args),
    }
}

fn load_tableau_file(file: &Path) -> AppResult<ButcherTableau> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading {}", file.display()))
        .map_err(runtime)?;
    let raw = RawTableau::from_json(&text)
        .with_context(|| format!("parsing {}", file.display()))
        .map_err(validation)?;
    validate(&raw).map_err(|errs| {
        let mut msg = format!("{} is not a valid tableau:", file.display());
        for e in errs {
            let _ = write!(msg, "\n  - {e}");
        }
        validation(anyhow!(msg))
    })
}

/// Built-in name or file path, for the tableau-backed subcommands.
fn resolve_tableau(spec: &str) -> AppResult<ButcherTableau> {
    match spec.to_ascii_lowercase().as_str() {
        "dri1" => return Ok(families::dri1()),
        "dri1m" => {
            return families::dri1_m_variant().map_err(|e| validation(anyhow!(e)));
        }
        "euler" => return Ok(families::euler()),
        _ => {}
    }
    let p = Path::new(spec);
    if p.exists() {
        load_tableau_file(p)
    } else {
        Err(validation(anyhow!(
            "unknown scheme {spec:?}: not a built-in (dri1, dri1m, euler) and no such file"
        )))
    }
}

enum ResolvedScheme {
    Plan { label: String, plan: ExecutionPlan },
    Exem(ExemOptions),
}

fn resolve_scheme(spec: &str, opts: ExemOptions) -> AppResult<ResolvedScheme> {
    if spec.eq_ignore_ascii_case("exem") {
        return Ok(ResolvedScheme::Exem(opts));
    }
    let t = resolve_tableau(spec)?;
    Ok(ResolvedScheme::Plan {
        label: t.name.clone(),
        plan: compile(&t),
    })
}

fn tableau_validate(file: &Path) -> AppResult<()> {
    let t = load_tableau_file(file)?;
    println!("{}: s={}, valid", t.name, t.s);
    Ok(())
}

fn tableau_check(scheme: &str) -> AppResult<()> {
    let t = resolve_tableau(scheme)?;
    let report = order_conditions::classify(&t, DEFAULT_TOL);
    let weak_total = report
        .residuals
        .iter()
        .filter(|r| matches!(r.id, order_conditions::ConditionId::Weak(_)))
        .count();
    let failing = report.failing();
    println!("name={} s={} tol={:.0e}", t.name, t.s, report.tol);
    println!(
        "weak conditions: {}/{} satisfied",
        weak_total - failing
            .iter()
            .filter(|r| matches!(r.id, order_conditions::ConditionId::Weak(_)))
            .count(),
        weak_total
    );
    println!(
        "deterministic conditions: {}/{} satisfied",
        (report.residuals.len() - weak_total)
            - failing
                .iter()
                .filter(|r| !matches!(r.id, order_conditions::ConditionId::Weak(_)))
                .count(),
        report.residuals.len() - weak_total
    );
    for r in &failing {
        println!("  cond {}: residual {:+.6e}  ({})", r.id, r.residual, r.description);
    }
    println!(
        "weak={} det={}",
        report.weak_order, report.deterministic_order
    );
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str) -> AppResult<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(runtime)?;
    let path = dir.join(name);
    std::fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)?;
    Ok(path)
}

fn families_sample(args: &SampleArgs) -> AppResult<()> {
    for k in 0..args.count {
        let mut rng = RandomStream::new(args.seed, k as u64);
        let t = families::sample_case(&args.case, &mut rng).map_err(|e| runtime(anyhow!(e)))?;
        let json = RawTableau::from_tableau(&t).to_json();
        match &args.out {
            Some(dir) => {
                let path = write_text(dir, &format!("sample_{}_{k}.json", args.case), &json)?;
                log::info!("wrote {}", path.display());
            }
            None => println!("{json}"),
        }
    }
    Ok(())
}

fn families_dri1(out: Option<&Path>) -> AppResult<()> {
    let json = RawTableau::from_tableau(&families::dri1()).to_json();
    match out {
        Some(dir) => {
            let path = write_text(dir, "dri1.json", &json)?;
            log::info!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn families_lec(branch: BranchArg) -> AppResult<()> {
    match branch {
        BranchArg::Minus => {
            let min = families::minimize_lec(Branch::Minus);
            println!("c3={:.6} lec={:.3}", min.c3_star, min.value);
        }
        BranchArg::Plus => {
            let min = families::minimize_lec(Branch::Plus);
            println!("lec={:.3} (recorded plus-branch minimum)", min.value);
        }
    }
    Ok(())
}

fn out_dir(cli_out: Option<&Path>) -> Option<PathBuf> {
    cli_out.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)
    })
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct RunConfig {
    schemes: Vec<String>,
    problem: String,
    hs: Vec<f64>,
    paths: u64,
    seed: u64,
    batches: u32,
    exem: ExemOptions,
}

impl RunConfig {
    /// Hash of the result-determining settings; thread count and output
    /// location are deliberately excluded so byte-identical data carries
    /// an identical hash.
    fn hash(&self) -> u64 {
        let mut s = String::new();
        let _ = write!(
            s,
            "{:?};{};{:?};{};{};{};{:?};{:?}",
            self.schemes,
            self.problem,
            self.hs,
            self.paths,
            self.seed,
            self.batches,
            self.exem.law,
            self.exem.coupling,
        );
        fnv1a64(s.as_bytes())
    }

    fn header_comment(&self) -> String {
        format!(
            "# seed={} config={:016x} version={}\n",
            self.seed,
            self.hash(),
            env!("CARGO_PKG_VERSION")
        )
    }
}

fn apply_profile(args: &mut RunArgs) {
    let (max_paths, max_steps) = match args.profile {
        Profile::Fast => (FAST_MAX_PATHS, FAST_MAX_STEPS),
        Profile::Full => (FULL_MAX_PATHS, usize::MAX),
    };
    if args.paths > max_paths {
        log::warn!("profile caps paths at {max_paths} (requested {})", args.paths);
        args.paths = max_paths;
    }
    if args.hs.len() > max_steps {
        log::warn!(
            "profile caps the step list at {max_steps} entries (got {})",
            args.hs.len()
        );
        args.hs.truncate(max_steps);
    }
}

fn exem_options(args: &RunArgs) -> ExemOptions {
    ExemOptions {
        law: match args.exem_rv {
            ExemRv::ThreePoint => ExemLaw::ThreePoint,
            ExemRv::Gaussian => ExemLaw::Gaussian,
        },
        coupling: match args.exem_coupling {
            ExemPairing::Common => ExemCoupling::Common,
            ExemPairing::Independent => ExemCoupling::Independent,
        },
    }
}

fn emit_csv(
    dir: Option<&Path>,
    name: &str,
    comment: &str,
    header: &str,
    rows: &[String],
) -> AppResult<()> {
    let mut text = String::from(comment);
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    match dir {
        Some(d) => {
            let path = write_text(d, name, &text)?;
            log::info!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn file_label(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

fn bench(mut args: RunArgs) -> AppResult<()> {
    apply_profile(&mut args);
    let exem = exem_options(&args);
    let scheme = resolve_scheme(&args.scheme, exem)?;
    let problem = problems::by_name(&args.problem)
        .ok_or_else(|| validation(anyhow!("unknown problem {:?}", args.problem)))?;
    let config = RunConfig {
        schemes: vec![args.scheme.clone()],
        problem: args.problem.clone(),
        hs: args.hs.clone(),
        paths: args.paths,
        seed: args.seed,
        batches: args.batches,
        exem,
    };
    let mut rows = Vec::new();
    let mut label = String::new();
    for (idx, &h) in args.hs.iter().enumerate() {
        let run_seed = args.seed.wrapping_add(idx as u64);
        let est = match &scheme {
            ResolvedScheme::Plan { label: l, plan } => {
                label = l.clone();
                montecarlo::estimate(plan, &problem, h, args.paths, run_seed, args.batches)
            }
            ResolvedScheme::Exem(opts) => {
                label = "EXEM".to_string();
                montecarlo::estimate_exem(&problem, h, args.paths, run_seed, args.batches, *opts)
            }
        }
        .map_err(|e| runtime(anyhow!(e)))?;
        log::info!(
            "{} {} h={}: mu_hat={:.6e} sigma={:.3e}",
            est.scheme,
            est.problem,
            est.h,
            est.mu_hat,
            est.sigma2_mu.sqrt()
        );
        rows.push(est.csv_row());
    }
    let name = format!(
        "bench_{}_{}.csv",
        file_label(&label),
        file_label(&args.problem)
    );
    emit_csv(
        out_dir(args.out.as_deref()).as_deref(),
        &name,
        &config.header_comment(),
        CSV_HEADER,
        &rows,
    )
}

fn converge(args: ConvergeArgs) -> AppResult<()> {
    let mut run = args.run;
    apply_profile(&mut run);
    let exem = exem_options(&run);
    let scheme_specs: Vec<String> = run
        .scheme
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if scheme_specs.is_empty() {
        return Err(validation(anyhow!("empty scheme list")));
    }
    let problem = problems::by_name(&run.problem)
        .ok_or_else(|| validation(anyhow!("unknown problem {:?}", run.problem)))?;
    let config = RunConfig {
        schemes: scheme_specs.clone(),
        problem: run.problem.clone(),
        hs: run.hs.clone(),
        paths: run.paths,
        seed: run.seed,
        batches: run.batches,
        exem,
    };
    let dir = out_dir(run.out.as_deref());
    let data_dir = dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut rows = Vec::new();
    let mut dat_files = Vec::new();
    for spec in &scheme_specs {
        let scheme = resolve_scheme(spec, exem)?;
        let (label, report) = match &scheme {
            ResolvedScheme::Plan { label, plan } => (
                label.clone(),
                montecarlo::convergence_study(
                    &SchemeSpec::Plan(plan),
                    &problem,
                    &run.hs,
                    run.paths,
                    run.seed,
                    run.batches,
                ),
            ),
            ResolvedScheme::Exem(opts) => (
                "EXEM".to_string(),
                montecarlo::convergence_study(
                    &SchemeSpec::Exem(*opts),
                    &problem,
                    &run.hs,
                    run.paths,
                    run.seed,
                    run.batches,
                ),
            ),
        };
        let report = report.map_err(|e| runtime(anyhow!(e)))?;
        log::info!(
            "{label} {}: slope {:.3} (stderr {:.3}, {} of {} points)",
            run.problem,
            report.slope,
            report.slope_stderr,
            report.points_used.len(),
            report.estimates.len()
        );
        rows.extend(report.csv_rows());
        let mut dat = String::new();
        for est in &report.estimates {
            if est.mu_hat == 0.0 {
                log::warn!("{label} h={}: zero mean error, skipped in plot data", est.h);
                continue;
            }
            let _ = writeln!(dat, "{} {}", est.h.log2(), est.mu_hat.abs().log2());
        }
        let dat_name = format!(
            "{}_{}.dat",
            file_label(&label),
            file_label(&run.problem)
        );
        let path = write_text(&data_dir, &dat_name, &dat)?;
        log::info!("wrote {}", path.display());
        dat_files.push((label, dat_name));
    }
    if args.gnuplot {
        let mut gp = String::from("set xlabel 'log2 h'\nset ylabel 'log2 |mu|'\nset key left top\n");
        gp.push_str("plot ");
        let plots: Vec<String> = dat_files
            .iter()
            .map(|(label, name)| format!("'{name}' with linespoints title '{label}'"))
            .collect();
        gp.push_str(&plots.join(", \\\n     "));
        gp.push('\n');
        let path = write_text(
            &data_dir,
            &format!("plot_{}.gp", file_label(&run.problem)),
            &gp,
        )?;
        log::info!("wrote {}", path.display());
    }
    let name = format!("converge_{}.csv", file_label(&run.problem));
    emit_csv(
        dir.as_deref(),
        &name,
        &config.header_comment(),
        CSV_CONVERGE_HEADER,
        &rows,
    )
}

fn effort(args: EffortArgs) -> AppResult<()> {
    let t = resolve_tableau(&args.scheme)?;
    let plan = compile(&t);
    let mut rows = Vec::new();
    let h = 0.25;
    for m in 1..=args.m_max {
        let problem = SdeProblem::new(
            format!("effort-m{m}"),
            1,
            m,
            0.0,
            vec![1.0],
            Box::new(|_t, x: &[f64], out: &mut [f64]| out[0] = 0.3 * x[0] + 0.1),
            Box::new(|k, _t, x: &[f64], out: &mut [f64]| {
                out[0] = 0.05 * x[0] + 0.01 * (k as f64 + 1.0)
            }),
        );
        let mut stepper = Stepper::new(&plan, &problem);
        let mut stream = RandomStream::new(args.seed, m as u64);
        let mut counters = EvalCounters::default();
        integrate_path(
            &mut stepper,
            &|x| x[0],
            args.steps as f64 * h,
            h,
            &mut stream,
            &mut counters,
        )
        .map_err(|e| runtime(anyhow!(e)))?;
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            t.name,
            m,
            args.steps,
            counters.drift_evals,
            counters.diffusion_evals,
            counters.rv_draws,
            montecarlo::effort(&counters)
        ));
    }
    let comment = format!(
        "# seed={} config={:016x} version={}\n",
        args.seed,
        fnv1a64(format!("effort;{};{};{}", args.scheme, args.steps, args.m_max).as_bytes()),
        env!("CARGO_PKG_VERSION")
    );
    emit_csv(
        out_dir(args.out.as_deref()).as_deref(),
        &format!("effort_{}.csv", file_label(&t.name)),
        &comment,
        "scheme,m,steps,drift_evals,diffusion_evals,rv_draws,effort",
        &rows,
    )
}
