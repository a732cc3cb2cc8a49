use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kcenter::bench::{run, RunConfig, StreamSource};
use kcenter::error::Error;
use kcenter::metric::MetricBounds;
use kcenter::oracles::OracleBudget;
use kcenter::pipeline::Mode;
use kcenter::stream::{write_stream, GeneratorKind, StreamSpec};
use kcenter::verify::{run_suite, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "kcenter",
    version,
    about = "Dynamic k-center benchmark harness: generate update streams, drive a pipeline, verify invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Direct,
    Sparsified,
    Buffered,
}

#[derive(clap::Args)]
struct GenArgs {
    /// Generator spec: uniform-box | gaussian-blobs:C | sliding-window:W | adversarial-duplicates
    #[arg(long = "gen")]
    gen: String,
    /// Live-size cap
    #[arg(long = "n")]
    n: usize,
    /// Total updates
    #[arg(long = "T")]
    t: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Steady-state deletion probability
    #[arg(long = "delete-frac", default_value_t = 0.5)]
    delete_frac: f64,
    /// Stream file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long = "k")]
    k: usize,
    /// Buffered-mode accuracy/recourse knob in (0, 1]
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Override the stream's declared minimum nonzero distance
    #[arg(long)]
    dmin: Option<f64>,
    /// Override the stream's declared maximum distance
    #[arg(long)]
    dmax: Option<f64>,
    /// Algorithm seed (priorities and sampling)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replay this stream file
    #[arg(long, conflicts_with = "gen")]
    stream: Option<PathBuf>,
    /// Generate the stream in-process instead
    #[arg(long = "gen")]
    gen: Option<String>,
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Stream seed, independent of --seed
    #[arg(long = "stream-seed")]
    stream_seed: Option<u64>,
    #[arg(long = "delete-frac", default_value_t = 0.5)]
    delete_frac: f64,
    /// Cross-check steps against the brute-force oracles
    #[arg(long, default_value_t = false)]
    verify: bool,
    /// Per-update CSV file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregate JSON file
    #[arg(long)]
    json: Option<PathBuf>,
    /// Exhaustive-oracle size cap used with --verify
    #[arg(long = "budget-n", default_value_t = 14)]
    budget_n: usize,
    /// Rebuild boost multiplier
    #[arg(long = "boost-c", default_value_t = 2.0)]
    boost_c: f64,
    /// Evaluate cost columns every Nth row (0 disables)
    #[arg(long = "cost-every", default_value_t = 1)]
    cost_every: usize,
    /// Omit wall-clock columns so outputs replay byte-identically
    #[arg(long = "no-timing", default_value_t = false)]
    no_timing: bool,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "budget-n", default_value_t = 14)]
    budget_n: usize,
    /// Random instances per check
    #[arg(long, default_value_t = 12)]
    trials: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic update-stream file
    Gen(GenArgs),
    /// Drive a pipeline over a stream and emit metrics
    Run(RunArgs),
    /// Run the randomized invariant suite
    Verify(VerifyArgs),
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let kind = GeneratorKind::parse(&args.gen)?;
    let spec = StreamSpec::new(kind, args.n, args.t, args.seed)
        .with_dim(args.dim)
        .with_delete_frac(args.delete_frac);
    let events = spec.events()?;
    write_stream(&args.out, spec.bounds(), spec.dim, &events)?;
    let inserts = events.iter().filter(|e| e.kind == kcenter::metric::EventKind::Insert).count();
    println!(
        "wrote {} updates ({} inserts, {} deletes) to {}",
        events.len(),
        inserts,
        events.len() - inserts,
        args.out.display()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let mode = match args.mode {
        ModeArg::Direct => Mode::Direct,
        ModeArg::Sparsified => Mode::Sparsified,
        ModeArg::Buffered => Mode::Buffered { epsilon: args.epsilon },
    };
    let bounds = match (args.dmin, args.dmax) {
        (Some(lo), Some(hi)) => Some(MetricBounds::new(lo, hi)?),
        (None, None) => None,
        _ => return Err(Error::Config("--dmin and --dmax come together".into())),
    };
    let source = match (&args.stream, &args.gen) {
        (Some(path), None) => StreamSource::File(path.clone()),
        (None, Some(spec)) => {
            let kind = GeneratorKind::parse(spec)?;
            let n = args.n.ok_or_else(|| Error::Config("--gen needs --n".into()))?;
            let t = args.t.ok_or_else(|| Error::Config("--gen needs --T".into()))?;
            // Keep the stream's coins disjoint from the algorithm's.
            let stream_seed = args.stream_seed.unwrap_or(args.seed.wrapping_add(1_000_003));
            StreamSource::Spec(
                StreamSpec::new(kind, n, t, stream_seed)
                    .with_dim(args.dim)
                    .with_delete_frac(args.delete_frac),
            )
        }
        _ => return Err(Error::Config("pass exactly one of --stream or --gen".into())),
    };
    let mut cfg = RunConfig::new(mode, args.k, args.seed);
    cfg.bounds = bounds;
    cfg.verify = args.verify;
    cfg.budget = OracleBudget { max_n: args.budget_n, ..OracleBudget::default() };
    cfg.cost_every = args.cost_every;
    cfg.include_timing = !args.no_timing;
    cfg.boost_c = args.boost_c;
    cfg.out_csv = args.out.clone();
    cfg.out_json = args.json.clone();
    let summary = run(&cfg, source)?;
    let a = &summary.aggregate;
    println!(
        "{} mode, k={}: {} updates, |V|={}, |U|={}, amortized recourse {:.4}, mean update {:.1} us",
        a.mode, a.k, a.total_updates, a.final_v_size, a.final_u_size, a.amortized_recourse,
        a.mean_update_micros
    );
    if let Some(r) = a.max_ratio_vs_opt {
        println!("max ratio vs exact optimum: {r:.3}");
    }
    if let Some(p) = &args.out {
        println!("per-update rows: {}", p.display());
    }
    if let Some(p) = &args.json {
        println!("aggregate: {}", p.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, Error> {
    let cfg = VerifyConfig {
        seed: args.seed,
        budget: OracleBudget { max_n: args.budget_n, ..OracleBudget::default() },
        trials: args.trials,
    };
    let report = run_suite(&cfg)?;
    for c in &report.checks {
        println!("[{}] {} - {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args).map(|_| true),
        Command::Run(args) => cmd_run(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
