use std::io::{stdout, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use forecast_arena::cli::{
    cmd_backtest, cmd_compare_windows, cmd_model_dump, cmd_report, cmd_synth, cmd_validate,
    CliError, Overrides, RunConfig, CONFIG_ENV, EXIT_USAGE,
};
use forecast_arena::dataset_io::SeriesKey;
use forecast_arena::month::Month;
use forecast_arena::synth::SynthConfig;

#[derive(Parser)]
#[command(
    name = "forecast-arena",
    version,
    about = "Rolling-origin backtests of monthly sales forecasters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Config file (key = value sections).
    #[arg(long, short, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    related: Option<PathBuf>,
    /// Daily transactions; replaces --target/--related.
    #[arg(long)]
    daily: Option<PathBuf>,
    #[arg(long)]
    holidays: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Accept YYYY-MM-DD dates inside a month and map them to the month.
    #[arg(long)]
    normalize_dates: bool,
    #[arg(long)]
    max_months: Option<usize>,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    activity_window: Option<usize>,
    /// Worker threads, or `auto`.
    #[arg(long)]
    parallel: Option<String>,
    /// Comma-separated: csv,json,svg.
    #[arg(long)]
    formats: Option<String>,
    /// Comma-separated: wape_1mo,wape_3mo.
    #[arg(long)]
    metrics: Option<String>,
    /// Comma-separated portfolio sizes for CDFs.
    #[arg(long)]
    top_k: Option<String>,
    #[arg(long)]
    window_a: Option<String>,
    #[arg(long)]
    window_b: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and classify the input without backtesting.
    Validate(Common),
    /// Run every forecaster over the portfolio.
    Backtest(Common),
    /// Analyze a results file.
    Report {
        #[command(flatten)]
        common: Common,
        /// Defaults to <output>/results.csv.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Backtest two time windows and compare aggregate accuracy.
    CompareWindows(Common),
    /// Inspect fitted models.
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Write a synthetic dataset and config.
    Synth {
        #[arg(long, short, default_value = "synthetic")]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        items: usize,
        #[arg(long, default_value_t = 4)]
        orgs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Print fitted parameters as JSON.
    Dump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        item: u64,
        #[arg(long)]
        org: u64,
        /// Forecaster label, e.g. prophet_lite or global_ar_q.
        #[arg(long)]
        model: String,
        /// Fit on data up to this month (YYYY-MM).
        #[arg(long)]
        origin: Option<Month>,
    },
}

fn config(c: &Common) -> Result<RunConfig, CliError> {
    let base = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Overrides {
        target: c.target.clone(),
        related: c.related.clone(),
        daily: c.daily.clone(),
        holidays: c.holidays.clone(),
        output: c.output.clone(),
        normalize_dates: c.normalize_dates,
        max_months: c.max_months,
        top_n: c.top_n,
        activity_window: c.activity_window,
        parallel: c.parallel.clone(),
        formats: c.formats.clone(),
        metrics: c.metrics.clone(),
        top_k: c.top_k.clone(),
        window_a: c.window_a.clone(),
        window_b: c.window_b.clone(),
    }
    .apply(base)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut out = stdout().lock();
    match cli.command {
        Command::Validate(c) => cmd_validate(&config(&c)?, &mut out).map(|_| ()),
        Command::Backtest(c) => cmd_backtest(&config(&c)?, &mut out).map(|_| ()),
        Command::Report { common, results } => {
            cmd_report(&config(&common)?, results.as_deref(), &mut out).map(|_| ())
        }
        Command::CompareWindows(c) => cmd_compare_windows(&config(&c)?, &mut out).map(|_| ()),
        Command::Model {
            command:
                ModelCommand::Dump {
                    common,
                    item,
                    org,
                    model,
                    origin,
                },
        } => cmd_model_dump(
            &config(&common)?,
            SeriesKey::new(item, org),
            &model,
            origin,
            &mut out,
        ),
        Command::Synth {
            output,
            items,
            orgs,
            seed,
        } => {
            let cfg = SynthConfig {
                items,
                orgs,
                seed,
                ..Default::default()
            };
            cmd_synth(&output, &cfg)?;
            writeln!(out, "wrote {}", output.display()).map_err(|e| CliError::data(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
