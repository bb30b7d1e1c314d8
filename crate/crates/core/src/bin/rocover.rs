use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rocover::baselines::{exact_opt, OptLimits, ProofMode};
use rocover::checks::run_named;
use rocover::cip::CipConfig;
use rocover::diagnostics::{indicator, trace_cip_run, trace_run, write_trace_csv};
use rocover::generators::{generate, meta_path, GeneratorSpec, Meta};
use rocover::harness::{
    batched_run, parse_grid, run_trials, sweep, trial_streams, write_csv, Algorithm, BatchedAlgorithm, BetaMode,
    SweepRow, TrialStats,
};
use rocover::io::{save_instance, AnyInstance};
use rocover::learn_or_cover::LocConfig;
use rocover::{Error, Result};

#[derive(Parser)]
#[command(name = "rocover", version, about = "Random-order online set cover experiments")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// known-opt, guess-double or fixed:<value>
    #[arg(long, global = true, default_value = "known-opt")]
    beta: BetaMode,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and its .meta file
    Gen(GenArgs),
    /// Random-order trials of one algorithm on one instance
    Run(RunArgs),
    /// Trials over a grid of generated instances
    Sweep(SweepArgs),
    /// Per-round potential trace of a single run
    Trace(TraceArgs),
    /// Run acceptance checks by name (or `all`)
    Check { name: String },
    /// Optimal cover certificate
    Opt {
        instance: PathBuf,
        #[arg(long, default_value_t = OptLimits::default().node_budget)]
        node_budget: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p_extra: Option<f64>,
    #[arg(long)]
    cost_jitter: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Any further family parameter, as key=value
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    instance: PathBuf,
    /// loc, unit-loc, simple-loc:<k>, naive, greedy, bn-online, cip; for
    /// batched instances loc, greedy or naive
    #[arg(long, default_value = "loc")]
    algorithm: String,
    /// OPT reference; defaults to the .meta certificate, then exact search
    #[arg(long)]
    opt: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    grid: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "loc")]
    algorithms: Vec<Algorithm>,
}

#[derive(Args)]
struct TraceArgs {
    instance: PathBuf,
    /// loc or cip
    #[arg(long, default_value = "loc")]
    algorithm: String,
    /// Which trial's order and randomness to replay
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Gen(args) => gen(cli, args).map(|_| true),
        Command::Run(args) => run(cli, args).map(|_| true),
        Command::Sweep(args) => {
            let grid = parse_grid(
                &std::fs::read_to_string(&args.grid)
                    .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", args.grid.display())))?,
            )?;
            let rows = sweep(&grid, &args.algorithms, cli.trials, cli.seed, cli.beta)?;
            with_output(cli.out.as_deref(), |mut w| write_csv(&rows, &mut w)).map(|_| true)
        }
        Command::Trace(args) => trace(cli, args).map(|_| true),
        Command::Check { name } => {
            let reports = run_named(name, cli.seed)?;
            let lines: Vec<String> = reports.iter().map(|r| r.line()).collect();
            with_output(cli.out.as_deref(), |w| {
                lines.iter().try_for_each(|l| writeln!(w, "{l}").map_err(Error::from))
            })?;
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Opt { instance, node_budget } => {
            let sys = set_system(&load_instance(instance)?)?;
            let cert = exact_opt(&sys, OptLimits { node_budget: *node_budget, ..OptLimits::default() })?;
            with_output(cli.out.as_deref(), |w| {
                let ids: Vec<String> = cert.sets.iter().map(|s| (s + 1).to_string()).collect();
                writeln!(w, "cost={}", cert.cost)?;
                writeln!(w, "sets={}", ids.join(" "))?;
                writeln!(
                    w,
                    "mode={}",
                    match cert.mode {
                        ProofMode::Exhaustive => "exhaustive",
                        ProofMode::BranchAndBound => "branch-and-bound",
                    }
                )?;
                writeln!(w, "exact={}", cert.exact)?;
                writeln!(w, "lower_bound={}", cert.lower_bound)?;
                writeln!(w, "nodes={}", cert.nodes)?;
                Ok(())
            })
            .map(|_| true)
        }
    }
}

/// Writes to `path`, or to stdout when no path is given.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<AnyInstance> {
    rocover::io::load_instance(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn set_system(inst: &AnyInstance) -> Result<rocover::SetSystem> {
    match inst {
        AnyInstance::SetCover(s) => Ok(s.clone()),
        AnyInstance::Batched(b) => Ok(b.base().clone()),
        AnyInstance::Cip(_) => Err(Error::InvalidParams("expected a set-cover instance, found a CIP".into())),
    }
}

fn load_meta(instance: &Path) -> Result<Option<Meta>> {
    let p = meta_path(instance);
    if p.exists() {
        Ok(Some(Meta::parse(&std::fs::read_to_string(p)?)?))
    } else {
        Ok(None)
    }
}

fn gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    let mut params: Vec<(String, String)> = Vec::new();
    let mut typed = |key: &str, v: Option<String>| {
        if let Some(v) = v {
            params.push((key.to_string(), v));
        }
    };
    typed("n", args.n.map(|v| v.to_string()));
    typed("m", args.m.map(|v| v.to_string()));
    typed("k", args.k.map(|v| v.to_string()));
    typed("p_extra", args.p_extra.map(|v| v.to_string()));
    typed("cost_jitter", args.cost_jitter.map(|v| v.to_string()));
    typed("levels", args.levels.map(|v| v.to_string()));
    typed("r", args.r.map(|v| v.to_string()));
    for p in &args.params {
        let (k, v) =
            p.split_once('=').ok_or_else(|| Error::InvalidParams(format!("--param expects key=value, found '{p}'")))?;
        params.push((k.to_string(), v.to_string()));
    }
    let spec = GeneratorSpec::from_params(&args.family, &params)?;
    let generated = generate(&spec, cli.seed)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}-{}.txt", spec.family(), cli.seed)));
    save_instance(&generated.instance, &out)?;
    let meta = meta_path(&out);
    std::fs::write(&meta, generated.meta.format())?;
    println!("wrote {} and {}", out.display(), meta.display());
    Ok(())
}

fn run(cli: &Cli, args: &RunArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let meta = load_meta(&args.instance)?;
    let family = meta.as_ref().and_then(|m| m.get("family")).unwrap_or("file").to_string();
    let name = args.instance.display().to_string();
    let opt = args.opt.or_else(|| meta.as_ref().and_then(Meta::opt_upper_bound));
    let (stats, k, lower) = match &inst {
        AnyInstance::Batched(b) => {
            let alg: BatchedAlgorithm = args.algorithm.parse()?;
            let opt_h = opt.ok_or_else(|| {
                Error::OracleUnavailable("batched runs need --opt or a .meta with the inner planted cost".into())
            })?;
            let k_h = meta
                .as_ref()
                .and_then(|m| m.get("h_k"))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::OracleUnavailable("batched runs need h_k in the .meta file".into()))?;
            let s = batched_run(alg, b, cli.trials, cli.seed, cli.beta, opt_h, k_h)?;
            (s.stats, Some(k_h), Some(s.lower_bound))
        }
        _ => {
            let alg: Algorithm = args.algorithm.parse()?;
            let k = meta.as_ref().and_then(Meta::reference_cover).map(|c| c.len());
            (run_trials(alg, &inst, &name, cli.trials, cli.seed, cli.beta, opt)?, k, None)
        }
    };
    let (n, m) = match &inst {
        AnyInstance::SetCover(s) => (s.n(), s.m()),
        AnyInstance::Batched(b) => (b.base().n(), b.base().m()),
        AnyInstance::Cip(c) => (c.n(), c.m()),
    };
    print_summary(&stats, lower);
    let row = SweepRow::from_stats(&family, n, m, k, &stats);
    match &cli.out {
        Some(out) => {
            with_output(Some(out), |mut w| write_csv(std::slice::from_ref(&row), &mut w))?;
            let raw = out.with_extension("trials.csv");
            with_output(Some(&raw), |w| {
                writeln!(w, "trial,cost")?;
                for (t, c) in stats.costs.iter().enumerate() {
                    writeln!(w, "{t},{c}")?;
                }
                Ok(())
            })?;
        }
        None => with_output(None, |mut w| write_csv(std::slice::from_ref(&row), &mut w))?,
    }
    Ok(())
}

fn print_summary(stats: &TrialStats, lower: Option<f64>) {
    eprintln!(
        "{} on {}: {} trials, mean {:.4} ± {:.4}, min {}, max {}",
        stats.algorithm, stats.instance, stats.trials, stats.mean, stats.ci, stats.min, stats.max
    );
    if let (Some(opt), Some(ratio)) = (stats.opt, stats.ratio) {
        eprintln!("OPT reference {opt}, mean ratio {ratio:.4}");
    }
    if let Some(lb) = lower {
        eprintln!("batched lower bound ½·k·H_N = {lb:.4}");
    }
}

fn trace(cli: &Cli, args: &TraceArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let meta = load_meta(&args.instance)?;
    let sys = set_system(&inst)?;
    let reference = match meta.as_ref().and_then(Meta::reference_cover) {
        Some(c) => c,
        None => {
            let cert = exact_opt(&sys, OptLimits::default())?;
            if !cert.exact {
                return Err(Error::OracleUnavailable("no .meta cover and exact search did not finish".into()));
            }
            cert.sets
        }
    };
    let beta = match cli.beta {
        BetaMode::Fixed(v) => v,
        BetaMode::KnownOpt => sys.cover_cost(&reference),
        BetaMode::GuessDouble => {
            return Err(Error::InvalidParams("trace needs a fixed budget: use known-opt or fixed:<v>".into()))
        }
    };
    let xstar = indicator(sys.m(), &reference);
    let (order, mut rng) = trial_streams(cli.seed, args.trial, sys.n());
    let trace = match args.algorithm.as_str() {
        "loc" => trace_run(&sys, &order, beta, &xstar, LocConfig::default(), &mut rng)?,
        "cip" => trace_cip_run(&sys.to_cip(), &order, beta, &xstar, CipConfig::default(), &mut rng)?,
        other => return Err(Error::InvalidParams(format!("trace supports loc and cip, not '{other}'"))),
    };
    eprintln!("β={beta} initial Φ={} total cost {}", trace.initial_phi, trace.total_cost);
    with_output(cli.out.as_deref(), |mut w| write_trace_csv(&trace.rows, &mut w))
}
