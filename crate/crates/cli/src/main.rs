use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dtw_bounds::bench::{
    run_search_experiment, run_tightness, write_contrib_csv, write_envelope_csv,
    write_search_csv, write_tightness_csv, Protocol, RunConfig, WindowArg,
};
use dtw_bounds::bounds::DEFAULT_K;
use dtw_bounds::fixtures::{example_a, example_b};
use dtw_bounds::selftest::run_selftest;
use dtw_bounds::ucr::{read_series_file, znormalize};
use dtw_bounds::{
    compute_envelopes, resolve_window, BoundSelector, CostFunction, PreparedSeries, TimeSeries,
    Window,
};

#[derive(Parser)]
#[command(name = "dtw-bounds", version, about = "DTW lower bound experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mean bound/DTW ratio over every (test, train) pair.
    Tightness(ExperimentArgs),
    /// 1-NN search timings and pruning counts.
    Search(ExperimentArgs),
    /// Envelope of one series.
    EnvelopeDump(EnvelopeArgs),
    /// Per-element contributions of each bound for one pair.
    ContribDump(ContribArgs),
    /// Soundness and oracle checks on random synthetic instances.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Delta {
    Squared,
    Abs,
}

impl Delta {
    fn cost(self) -> CostFunction {
        match self {
            Delta::Squared => CostFunction::squared(),
            Delta::Abs => CostFunction::absolute(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Random,
    Sorted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    /// The 11-element example pair.
    Example,
}

#[derive(Args)]
struct BoundArgs {
    /// Bound to evaluate; repeatable. Defaults to every bound.
    #[arg(long = "bound")]
    bounds: Vec<String>,
    /// Band count for enhanced and webb_enhanced when no `:k` is given.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
}

impl BoundArgs {
    fn selectors(&self) -> Result<Vec<BoundSelector>> {
        if self.bounds.is_empty() {
            return Ok(BoundSelector::all_bounds(self.k));
        }
        self.bounds
            .iter()
            .map(|b| {
                let mut sel: BoundSelector = b.parse()?;
                if !b.contains(':') {
                    sel = match sel {
                        BoundSelector::Enhanced(_) => BoundSelector::Enhanced(self.k),
                        BoundSelector::WebbEnhanced(_) => BoundSelector::WebbEnhanced(self.k),
                        s => s,
                    };
                }
                Ok(sel)
            })
            .collect()
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Two-column `dataset_name,window` file of recommended windows.
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Integer, `p%` of the series length, or `recommended`.
    #[arg(long, default_value = "recommended")]
    window: WindowArg,
    #[arg(long, value_enum, default_value = "squared")]
    delta: Delta,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long, value_enum, default_value = "sorted")]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Z-normalise every series after loading.
    #[arg(long)]
    znorm: bool,
    /// Query-level parallelism (tightness only).
    #[arg(long)]
    parallel: bool,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            train: self.train.clone(),
            test: self.test.clone(),
            metadata: self.metadata.clone(),
            window: self.window,
            cf: self.delta.cost(),
            bounds: self.bounds.selectors()?,
            protocol: match self.protocol {
                ProtocolArg::Random => Protocol::Random,
                ProtocolArg::Sorted => Protocol::Sorted,
            },
            reps: self.reps as usize,
            seed: self.seed,
            znorm: self.znorm,
            parallel: self.parallel,
        })
    }
}

#[derive(Args)]
struct SeriesSource {
    /// UCR-format file to take series from.
    #[arg(long, conflicts_with = "fixture")]
    input: Option<PathBuf>,
    /// Built-in example instead of a file.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    #[arg(long)]
    znorm: bool,
}

impl SeriesSource {
    fn load(&self) -> Result<Vec<TimeSeries>> {
        let series = match (&self.input, self.fixture) {
            (Some(p), _) => read_series_file(p, "series", None)
                .with_context(|| format!("reading {}", p.display()))?
                .into_iter()
                .map(|l| l.series)
                .collect(),
            (None, Some(Fixture::Example)) => vec![example_a(), example_b()],
            (None, None) => bail!("give --input FILE or --fixture example"),
        };
        Ok(if self.znorm {
            series.iter().map(znormalize).collect()
        } else {
            series
        })
    }
}

fn pick(series: &[TimeSeries], i: usize) -> Result<TimeSeries> {
    series
        .get(i)
        .cloned()
        .with_context(|| format!("index {i} out of range for {} series", series.len()))
}

fn window_for(arg: WindowArg, len: usize) -> Result<Window> {
    match arg {
        WindowArg::Spec(s) => Ok(resolve_window(s, len)?),
        WindowArg::Recommended => bail!("--window must be an integer or `p%` here"),
    }
}

#[derive(Args)]
struct EnvelopeArgs {
    #[command(flatten)]
    source: SeriesSource,
    /// Row of the input (0-based).
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value = "1")]
    window: WindowArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ContribArgs {
    #[command(flatten)]
    source: SeriesSource,
    /// Row used as A (0-based).
    #[arg(long, default_value_t = 0)]
    a: usize,
    /// Row used as B (0-based).
    #[arg(long, default_value_t = 1)]
    b: usize,
    #[arg(long, default_value = "1")]
    window: WindowArg,
    #[arg(long, value_enum, default_value = "squared")]
    delta: Delta,
    #[command(flatten)]
    bounds: BoundArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random instances.
    #[arg(long, default_value_t = 10_000)]
    instances: usize,
    #[arg(long)]
    parallel: bool,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Tightness(args) => {
            let records = run_tightness(&args.config()?)?;
            write_tightness_csv(output(&args.out)?, &records)?;
        }
        Cmd::Search(args) => {
            let rows = run_search_experiment(&args.config()?)?;
            write_search_csv(output(&args.out)?, &rows)?;
        }
        Cmd::EnvelopeDump(args) => {
            let s = pick(&args.source.load()?, args.index)?;
            let w = window_for(args.window, s.len())?;
            write_envelope_csv(output(&args.out)?, &s, &compute_envelopes(&s, w))?;
        }
        Cmd::ContribDump(args) => {
            let series = args.source.load()?;
            let (a, b) = (pick(&series, args.a)?, pick(&series, args.b)?);
            let w = window_for(args.window, a.len())?;
            let cf = args.delta.cost();
            let (pa, pb) = (PreparedSeries::new(a, w), PreparedSeries::new(b, w));
            let mut rows = Vec::new();
            for sel in args.bounds.selectors()? {
                let (_, terms) = sel.trace(&pa, &pb, &cf)?;
                rows.extend(terms.into_iter().map(|t| (sel, t)));
            }
            write_contrib_csv(output(&args.out)?, &rows)?;
        }
        Cmd::Selftest(args) => {
            let report = run_selftest(args.seed, args.instances, args.parallel);
            let mut out = io::stdout().lock();
            writeln!(out, "instances: {}", report.instances)?;
            for c in &report.checks {
                writeln!(out, "{c}")?;
            }
            let v = report.total_violations();
            writeln!(out, "total violations: {v}")?;
            if v > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
