use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kpp2d::ballgame::{self, Bound};
use kpp2d::harness::{self, fmt_f64, ExperimentConfig, ReportFormat, RunInfo};
use kpp2d::instances::generate;
use kpp2d::seeding::exact_distribution;
use kpp2d::{Error, Variant};

#[derive(Parser)]
#[command(name = "kpp2d", version, about = "Bad planar instances for k-means++ seeding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the instance as CSV (cluster_id,end_id,x,y,weight).
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeding trials and write trials.csv plus a .meta.csv sidecar.
    Seed(SeedArgs),
    /// Exact coverage distribution and expected ratio for tiny k.
    Exact {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distinct-color distribution of the plain or biased ball process.
    Ballgame(BallgameArgs),
    /// Summarize a trials.csv.
    Report {
        #[arg(long, default_value = "trials.csv")]
        input: PathBuf,
        /// Metadata sidecar; defaults to <input stem>.meta.csv.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Kmeans,
    Kmedian,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Kmeans => Variant::KMeans,
            VariantArg::Kmedian => Variant::KMedian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    Biased,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Kmeans)]
    variant: VariantArg,
    #[arg(long, default_value_t = 200)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args)]
struct SeedArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0.999)]
    eta: f64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "trials.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct BallgameArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    k: usize,
    #[arg(long, conflicts_with = "trials")]
    exact: bool,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen { instance, out } => {
            let inst = generate(instance.k, instance.m, instance.r, instance.variant.into())?;
            let mut w = open_out(&out)?;
            inst.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Seed(args) => {
            let workers = args
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let cfg = ExperimentConfig {
                variant: args.instance.variant.into(),
                k: args.instance.k,
                m: args.instance.m,
                r: args.instance.r,
                trials: args.trials,
                master_seed: args.seed,
                alpha: args.alpha,
                beta: args.beta,
                eta: args.eta,
                workers,
            };
            let records = harness::run_experiment(&cfg)?;
            harness::persist(&records, &cfg.run_info(), &args.out)?;
        }
        Command::Exact { instance, out } => {
            let inst = generate(instance.k, instance.m, instance.r, instance.variant.into())?;
            let outcome = exact_distribution(&inst, inst.k(), inst.cost_exponent())?;
            let mut w = csv::Writer::from_writer(open_out(&out)?);
            w.write_record(["coverage", "probability"])?;
            for (c, p) in outcome.coverage.probabilities.iter().enumerate() {
                w.write_record([c.to_string(), fmt_f64(*p)])?;
            }
            w.write_record(["expected_ratio".to_string(), fmt_f64(outcome.expected_ratio)])?;
            w.flush()?;
        }
        Command::Ballgame(args) => ballgame_cmd(args)?,
        Command::Report {
            input,
            meta,
            format,
            out,
        } => {
            let records = harness::read_trials_csv(File::open(&input)?)?;
            let meta = meta.unwrap_or_else(|| harness::meta_path(&input));
            let info = RunInfo::read_csv(File::open(meta)?)?;
            let summary = harness::summarize(&records, &info)?;
            let format = match format {
                FormatArg::Text => ReportFormat::Text,
                FormatArg::Csv => ReportFormat::Csv,
            };
            let mut w = open_out(&out)?;
            w.write_all(harness::report(&summary, format)?.as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn ballgame_cmd(args: BallgameArgs) -> Result<(), Error> {
    let dist = match (args.mode, args.exact, args.trials) {
        (ModeArg::Plain, true, _) => ballgame::sampball_exact(args.k)?,
        (ModeArg::Biased, true, _) => ballgame::biased_sampball_dp(args.k, args.gamma)?,
        (ModeArg::Plain, false, Some(t)) => ballgame::sampball_mc(args.k, t, args.seed)?,
        (ModeArg::Biased, false, Some(t)) => {
            ballgame::biased_sampball_mc(args.k, args.gamma, t, args.seed)?
        }
        (_, false, None) => {
            return Err(Error::InvalidParameter(
                "ballgame needs either --exact or --trials N".into(),
            ))
        }
    };
    let (bound, threshold) = match args.mode {
        ModeArg::Plain => (Bound::SampBallTail, 7.0 / 8.0),
        ModeArg::Biased => (Bound::BiasedTail, 0.99),
    };
    let mut w = csv::Writer::from_writer(open_out(&args.out)?);
    w.write_record(["i", "probability"])?;
    for (i, p) in dist.probabilities.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(*p)])?;
    }
    let value = ballgame::paper_bounds(args.k, bound)?;
    w.write_record([format!("tail_above_{threshold}"), fmt_f64(ballgame::tail(&dist, threshold)?)])?;
    w.write_record([format!("bound_{}", bound.name()), fmt_f64(value)])?;
    w.flush()?;
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Degenerate { .. } => 2,
        Error::Capacity { .. } => 3,
        Error::Io(_) | Error::Csv(_) | Error::Malformed(_) => 4,
        Error::Numeric(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
