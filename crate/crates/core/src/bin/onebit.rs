use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use onebit::bench::{
    plan_sample_size, run_m_sweep, run_tau_sweep, Method, PlanGoal, PlanMethod, SweepConfig, SweepVar,
};
use onebit::edf::estimate_norm;
use onebit::measurement::{generate_sparse_signal, MeasurementEnsemble, ShiftKind, SignVector};
use onebit::recovery::{recover_augmented, recover_direction, RecoveryOptions};
use onebit::Error;

/// One-bit compressive sensing with norm estimation.
#[derive(Parser)]
#[command(name = "onebit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sparse signal and an ensemble, and quantize.
    Simulate(SimulateArgs),
    /// Estimate ||x|| from constant-threshold signs.
    EstimateNorm(EstimateNormArgs),
    /// Recover a signal from an ensemble file and its signs.
    Recover(RecoverArgs),
    /// Error versus m / n.
    SweepM(SweepArgs),
    /// Error versus the threshold tau.
    SweepTau(SweepArgs),
    /// Sample sizes from the closed-form bounds.
    Plan(PlanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ShiftArg {
    Gaussian,
    Constant,
    Zero,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    s: usize,
    #[arg(long, default_value_t = 1800)]
    m: usize,
    #[arg(long, default_value_t = 10.0)]
    r: f64,
    #[arg(long = "R", default_value_t = 20.0)]
    big_r: f64,
    #[arg(long, value_enum, default_value_t = ShiftArg::Gaussian)]
    shift: ShiftArg,
    /// Dither scale or threshold; defaults to r.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Signal output, one coordinate per line.
    #[arg(long, default_value = "signal.txt")]
    signal: PathBuf,
    /// Ensemble CSV output; not written unless given.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long, default_value = "signs.txt")]
    signs: PathBuf,
}

#[derive(Args)]
struct EstimateNormArgs {
    #[arg(long)]
    signs: PathBuf,
    #[arg(long)]
    tau: f64,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    signs: PathBuf,
    /// Reference signal; prints the errors when given.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Estimate output, one coordinate per line; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Default)]
struct TolArgs {
    #[arg(long)]
    feas_tol: Option<f64>,
    #[arg(long)]
    opt_tol: Option<f64>,
    #[arg(long)]
    t_tol: Option<f64>,
}

impl TolArgs {
    fn options(&self) -> RecoveryOptions {
        let d = RecoveryOptions::default();
        RecoveryOptions {
            feas_tol: self.feas_tol.unwrap_or(d.feas_tol),
            opt_tol: self.opt_tol.unwrap_or(d.opt_tol),
            t_tol: self.t_tol.unwrap_or(d.t_tol),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// n = 60, s = 4, 10 trials.
    #[arg(long)]
    fast: bool,
    /// pvaug, edf or combined.
    #[arg(long, default_value = "pvaug")]
    method: String,
    /// Comma-separated grid.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long = "R")]
    big_r: Option<f64>,
    /// Threshold of m / n sweeps (default r).
    #[arg(long)]
    tau: Option<f64>,
    /// Oversampling of tau sweeps.
    #[arg(long)]
    m_over_n: Option<f64>,
    /// Read tau grid values as multiples of ||x||.
    #[arg(long)]
    tau_relative: bool,
    #[arg(long, value_parser = ["paired", "independent"])]
    coupling: Option<String>,
    /// Record per-trial wall time.
    #[arg(long)]
    timing: bool,
    /// Rows go here, aggregates next to it with suffix .agg.csv.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct PlanArgs {
    /// edf-fixed, cdf-interval, edf-uniform, pvaug or combined.
    #[arg(long, default_value = "edf-fixed")]
    method: String,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 10.0)]
    r: f64,
    #[arg(long = "R", default_value_t = 20.0)]
    big_r: f64,
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    s: usize,
    /// Dither scale for pvaug (default R).
    #[arg(long)]
    tau: Option<f64>,
    /// Leading constant C1 / C / C0.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Constant inside ln(C / epsilon) of the combined rule.
    #[arg(long, default_value_t = 1.0)]
    c_log: f64,
}

/// Failures before any work starts exit with 2, the rest with 1.
enum Failure {
    Config(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn config<T>(r: Result<T, Error>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_vector<W: Write>(mut w: W, v: &[f64]) -> Result<(), Error> {
    for x in v {
        writeln!(w, "{x:?}")?;
    }
    w.flush()?;
    Ok(())
}

fn read_vector<R: BufRead>(r: R) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|_| Error::Parse(format!("cannot parse {t:?} as a number")))?);
    }
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let tau = a.tau.unwrap_or(a.r);
    let kind = match a.shift {
        ShiftArg::Gaussian => ShiftKind::GaussianDither { tau },
        ShiftArg::Constant => ShiftKind::ConstantThreshold { tau },
        ShiftArg::Zero => ShiftKind::Zero,
    };
    let x = config(generate_sparse_signal(a.n, a.s, a.r, a.big_r, a.seed))?;
    let ens = config(MeasurementEnsemble::build(a.m, a.n, kind, onebit::rng::derive_seed(a.seed, &[1])))?;
    let y = ens.quantize(&x.values)?;
    write_vector(create(&a.signal)?, &x.values)?;
    let mut w = create(&a.signs)?;
    y.write_text(&mut w)?;
    w.flush().map_err(Error::from)?;
    if let Some(p) = &a.ensemble {
        let mut w = create(p)?;
        ens.write_csv(&mut w)?;
        w.flush().map_err(Error::from)?;
    }
    println!("norm = {:?}", x.norm());
    println!("support = {:?}", x.support);
    println!("negative signs = {} of {}", y.count_negative(), y.len());
    Ok(())
}

fn estimate(a: &EstimateNormArgs) -> Result<(), Failure> {
    let y = SignVector::read_text(open(&a.signs)?)?;
    let est = config(estimate_norm(&y, a.tau))?;
    println!("m = {}", est.m);
    println!("F_m = {:?}", est.f_m);
    match est.lambda {
        Some(l) => println!("lambda = {l:?}"),
        None => println!("lambda = none"),
    }
    println!("status = {}", est.status.as_str());
    Ok(())
}

fn recover(a: &RecoverArgs) -> Result<(), Failure> {
    let ens = MeasurementEnsemble::read_csv(open(&a.ensemble)?)?;
    let y = SignVector::read_text(open(&a.signs)?)?;
    let opts = a.tol.options();
    let res = match ens.shift_kind() {
        ShiftKind::GaussianDither { .. } => recover_augmented(&ens, &y, &opts)?,
        ShiftKind::Zero => recover_direction(&ens, &y, &opts)?,
        ShiftKind::ConstantThreshold { .. } => {
            return Err(Failure::Config(Error::InvalidParameter(
                "constant-threshold signs carry no direction; use estimate-norm".into(),
            )))
        }
    };
    eprintln!("status = {}", res.status.as_str());
    eprintln!("iterations = {}", res.iterations);
    eprintln!("objective = {:?}", res.objective_value);
    eprintln!("max residual = {:e}", res.residuals.max());
    let Some(est) = &res.estimate else {
        return Err(Failure::Run(Error::DegenerateSolution(format!(
            "no estimate ({})",
            res.status.as_str()
        ))));
    };
    if let Some(t) = &a.truth {
        let x = read_vector(open(t)?)?;
        if x.len() != est.len() {
            return Err(Failure::Config(Error::DimensionMismatch {
                expected: est.len(),
                got: x.len(),
            }));
        }
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ne = est.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = est.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        eprintln!("norm error = {:?}", (ne - nx).abs());
        eprintln!("signal error = {err:?}");
    }
    match &a.out {
        Some(p) => write_vector(create(p)?, est)?,
        None => write_vector(io::stdout().lock(), est)?,
    }
    Ok(())
}

fn sweep_config(a: &SweepArgs, var: SweepVar) -> Result<SweepConfig, Error> {
    let method: Method = a.method.parse()?;
    let mut c = if a.fast {
        SweepConfig::fast(method, var)
    } else {
        SweepConfig::standard(method, var)
    };
    if let Some(p) = &a.config {
        let text = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        c.apply_kv(&text)?;
    }
    let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| c.set(k, &v));
    set("grid", a.grid.clone())?;
    set("trials", a.trials.map(|v| v.to_string()))?;
    set("seed", a.seed.map(|v| v.to_string()))?;
    set("n", a.n.map(|v| v.to_string()))?;
    set("s", a.s.map(|v| v.to_string()))?;
    set("r", a.r.map(|v| v.to_string()))?;
    set("R", a.big_r.map(|v| v.to_string()))?;
    set("tau", a.tau.map(|v| v.to_string()))?;
    set("m_over_n", a.m_over_n.map(|v| v.to_string()))?;
    set("coupling", a.coupling.clone())?;
    set("feas_tol", a.tol.feas_tol.map(|v| v.to_string()))?;
    set("opt_tol", a.tol.opt_tol.map(|v| v.to_string()))?;
    set("t_tol", a.tol.t_tol.map(|v| v.to_string()))?;
    if a.tau_relative {
        c.tau_relative = true;
    }
    if a.timing {
        c.timing = true;
    }
    c.sweep = var;
    c.validate()?;
    Ok(c)
}

fn sweep(a: &SweepArgs, var: SweepVar) -> Result<(), Failure> {
    let c = config(sweep_config(a, var))?;
    let report = match var {
        SweepVar::MOverN => run_m_sweep(&c)?,
        SweepVar::Tau => run_tau_sweep(&c)?,
    };
    let agg = report.write_files(&a.out)?;
    report.write_agg_csv(io::stdout().lock())?;
    eprintln!("wrote {} and {}", a.out.display(), agg.display());
    Ok(())
}

fn plan(a: &PlanArgs) -> Result<(), Failure> {
    let method: PlanMethod = config(a.method.parse())?;
    let goal = PlanGoal {
        method,
        delta: a.delta,
        epsilon: a.epsilon,
        r: a.r,
        big_r: a.big_r,
        n: a.n,
        s: a.s,
        tau: a.tau,
        c: a.c,
        c_log: a.c_log,
    };
    print!("{}", config(plan_sample_size(&goal))?);
    Ok(())
}

fn init_workers() -> Result<(), Error> {
    if let Ok(v) = std::env::var("ONEBIT_WORKERS") {
        let k: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("ONEBIT_WORKERS must be a positive integer, got {v:?}")))?;
        if k == 0 {
            return Err(Error::Parse("ONEBIT_WORKERS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(init_workers()).and_then(|_| match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::EstimateNorm(a) => estimate(a),
        Command::Recover(a) => recover(a),
        Command::SweepM(a) => sweep(a, SweepVar::MOverN),
        Command::SweepTau(a) => sweep(a, SweepVar::Tau),
        Command::Plan(a) => plan(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
