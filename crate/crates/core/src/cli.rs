//! Command implementations behind the `forecast-arena` binary.
//!
//! Configuration is a plain-text file of `key = value` lines grouped under
//! `[section]` headers:
//!
//! ```text
//! [data]
//! target = target_ts.csv
//! related = related_ts.csv
//! holidays = holidays.csv
//! output = out
//!
//! [portfolio]
//! top_n = 50
//! activity_window = 3
//!
//! [run]
//! parallel = auto
//! metrics = wape_1mo,wape_3mo
//! formats = csv,svg
//! top_k = 10,25,50
//!
//! [windows]
//! a = 2019-03..2020-02
//! b = 2020-03..2021-02
//!
//! [forecaster.prophet]
//! kind = prophet_lite
//! seed = 0
//! fourier_order = 3
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Command-line flags override the file.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 nothing backtestable.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use tracing::{info, warn};

use crate::backtest::{backtest_steps, run_suite, SuiteOptions};
use crate::dataset_io::{
    aggregate_daily_to_monthly, assemble_series, load_holidays, parse_daily_csv, parse_related_csv,
    parse_target_csv, DatasetBundle, ParseOptions, SeriesKey,
};
use crate::error::ArenaError;
use crate::forecasters::global_ar::{fit_global_ar, GlobalArConfig};
use crate::forecasters::{fit_prophet_lite, ForecasterKind, ForecasterSpec};
use crate::month::{Month, MonthRange};
use crate::portfolio::{
    classify_series, importance_table, select_portfolio, write_importance_csv, Activity,
    HistoryClass, ImportanceEntry, DEFAULT_ACTIVITY_WINDOW, DEFAULT_TOP_N,
};
use crate::report::{
    analyze, emit_report, parse_formats, read_results_csv, window_comparison, write_failures_csv,
    write_per_origin_csv, write_results_csv, Format, Metric, DEFAULT_CDF_TOP_K,
};
use crate::synth::{self, SynthConfig};

pub const CONFIG_ENV: &str = "FORECAST_ARENA_CONFIG";

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NOTHING: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ArenaError> for CliError {
    fn from(e: ArenaError) -> Self {
        let code = match e {
            ArenaError::InvalidArgument(_) => EXIT_USAGE,
            ArenaError::NothingToBacktest => EXIT_NOTHING,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: Option<PathBuf>,
    pub related: Option<PathBuf>,
    pub daily: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
    pub output: PathBuf,
    pub normalize_dates: bool,
    /// Keep only the most recent months of the dataset.
    pub max_months: Option<usize>,
    pub top_n: usize,
    pub activity_window: usize,
    pub forecasters: Vec<ForecasterSpec>,
    pub metrics: Vec<Metric>,
    pub cdf_top_k: Vec<usize>,
    pub windows: Option<(MonthRange, MonthRange)>,
    /// `None` = use every core.
    pub parallelism: Option<usize>,
    pub formats: BTreeSet<Format>,
}

pub fn default_forecasters() -> Vec<ForecasterSpec> {
    vec![
        ForecasterSpec::simple(ForecasterKind::ProphetLite),
        ForecasterSpec::simple(ForecasterKind::GlobalAr),
        ForecasterSpec::simple(ForecasterKind::GlobalAr)
            .with("quantile", 0.5)
            .expect("valid quantile"),
        ForecasterSpec::simple(ForecasterKind::SeasonalNaive),
    ]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            target: None,
            related: None,
            daily: None,
            holidays: None,
            output: PathBuf::from("out"),
            normalize_dates: false,
            max_months: None,
            top_n: DEFAULT_TOP_N,
            activity_window: DEFAULT_ACTIVITY_WINDOW,
            forecasters: default_forecasters(),
            metrics: Metric::ALL.to_vec(),
            cdf_top_k: DEFAULT_CDF_TOP_K.to_vec(),
            windows: None,
            parallelism: None,
            formats: [Format::Csv].into_iter().collect(),
        }
    }
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::usage(format!(
            "{key}: expected true/false, got `{v}`"
        ))),
    }
}

fn parse_usize(key: &str, v: &str) -> CliResult<usize> {
    v.parse()
        .map_err(|_| CliError::usage(format!("{key}: expected a non-negative integer, got `{v}`")))
}

pub fn parse_parallel(v: &str) -> CliResult<Option<usize>> {
    if v == "auto" {
        return Ok(None);
    }
    match parse_usize("parallel", v)? {
        0 => Err(CliError::usage("parallel must be at least 1 or `auto`")),
        n => Ok(Some(n)),
    }
}

pub fn parse_metrics(v: &str) -> CliResult<Vec<Metric>> {
    let m: Vec<Metric> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    if m.is_empty() {
        return Err(CliError::usage("no metrics selected"));
    }
    Ok(m)
}

fn parse_list(key: &str, v: &str) -> CliResult<Vec<usize>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_usize(key, s.trim()))
        .collect()
}

impl RunConfig {
    /// Parses the config text. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut forecasters: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut windows: (Option<MonthRange>, Option<MonthRange>) = (None, None);
        let path = |v: &str| base_dir.join(v);

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if let Some(f) = section.strip_prefix("forecaster.") {
                    forecasters.entry(f.to_string()).or_default();
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let unknown = || {
                CliError::usage(format!(
                    "config line {}: unknown key `{key}` in [{section}]",
                    lineno + 1
                ))
            };
            match section.as_str() {
                "data" => match key {
                    "target" => cfg.target = Some(path(value)),
                    "related" => cfg.related = Some(path(value)),
                    "daily" => cfg.daily = Some(path(value)),
                    "holidays" => cfg.holidays = Some(path(value)),
                    "output" => cfg.output = path(value),
                    "normalize_dates" => cfg.normalize_dates = parse_bool(key, value)?,
                    "max_months" => cfg.max_months = Some(parse_usize(key, value)?),
                    _ => return Err(unknown()),
                },
                "portfolio" => match key {
                    "top_n" => cfg.top_n = parse_usize(key, value)?,
                    "activity_window" => cfg.activity_window = parse_usize(key, value)?,
                    _ => return Err(unknown()),
                },
                "run" => match key {
                    "parallel" => cfg.parallelism = parse_parallel(value)?,
                    "metrics" | "metric" => cfg.metrics = parse_metrics(value)?,
                    "formats" => cfg.formats = parse_formats(value)?,
                    "top_k" => cfg.cdf_top_k = parse_list(key, value)?,
                    _ => return Err(unknown()),
                },
                "windows" => match key {
                    "a" => windows.0 = Some(value.parse()?),
                    "b" => windows.1 = Some(value.parse()?),
                    _ => return Err(unknown()),
                },
                s if s.starts_with("forecaster.") => {
                    let name = &s["forecaster.".len()..];
                    forecasters
                        .get_mut(name)
                        .expect("section registered")
                        .insert(key.to_string(), value.to_string());
                }
                _ => {
                    return Err(CliError::usage(format!(
                        "config line {}: key outside a known section",
                        lineno + 1
                    )))
                }
            }
        }

        cfg.windows = match windows {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(CliError::usage("[windows] needs both `a` and `b`")),
        };
        if !forecasters.is_empty() {
            cfg.forecasters = forecasters
                .into_iter()
                .map(|(name, kv)| forecaster_from_section(&name, kv))
                .collect::<CliResult<_>>()?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, base)
    }

    pub fn check(&self) -> CliResult<()> {
        if self.top_n == 0 {
            return Err(CliError::usage("top_n must be positive"));
        }
        if self.activity_window == 0 {
            return Err(CliError::usage("activity_window must be positive"));
        }
        if self.forecasters.is_empty() {
            return Err(CliError::usage("no forecasters configured"));
        }
        let labels: BTreeSet<String> = self.forecasters.iter().map(|f| f.label()).collect();
        if labels.len() != self.forecasters.len() {
            return Err(CliError::usage("forecaster labels must be unique"));
        }
        Ok(())
    }

    /// Stable text form of every setting; its hash identifies the run.
    pub fn canonical(&self) -> String {
        let p = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let mut s = String::new();
        s.push_str(&format!("data.target={}\n", p(&self.target)));
        s.push_str(&format!("data.related={}\n", p(&self.related)));
        s.push_str(&format!("data.daily={}\n", p(&self.daily)));
        s.push_str(&format!("data.holidays={}\n", p(&self.holidays)));
        s.push_str(&format!("data.normalize_dates={}\n", self.normalize_dates));
        s.push_str(&format!(
            "data.max_months={}\n",
            self.max_months.map(|m| m.to_string()).unwrap_or_default()
        ));
        s.push_str(&format!("portfolio.top_n={}\n", self.top_n));
        s.push_str(&format!(
            "portfolio.activity_window={}\n",
            self.activity_window
        ));
        let metrics: Vec<&str> = self.metrics.iter().map(|m| m.as_str()).collect();
        s.push_str(&format!("run.metrics={}\n", metrics.join(",")));
        let ks: Vec<String> = self.cdf_top_k.iter().map(|k| k.to_string()).collect();
        s.push_str(&format!("run.top_k={}\n", ks.join(",")));
        if let Some((a, b)) = &self.windows {
            s.push_str(&format!("windows.a={a}\nwindows.b={b}\n"));
        }
        for f in &self.forecasters {
            s.push_str(&format!("forecaster.{}.kind={}\n", f.label(), f.kind));
            s.push_str(&format!("forecaster.{}.seed={}\n", f.label(), f.seed));
            for (k, v) in &f.hyperparameters {
                s.push_str(&format!("forecaster.{}.{k}={v}\n", f.label()));
            }
        }
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn suite_options(&self) -> SuiteOptions {
        SuiteOptions {
            activity_window: self.activity_window,
            parallelism: self.parallelism,
        }
    }
}

fn forecaster_from_section(
    name: &str,
    mut kv: BTreeMap<String, String>,
) -> CliResult<ForecasterSpec> {
    let kind: ForecasterKind = kv
        .remove("kind")
        .ok_or_else(|| CliError::usage(format!("[forecaster.{name}] needs `kind`")))?
        .parse()?;
    let seed = match kv.remove("seed") {
        Some(s) => s
            .parse()
            .map_err(|_| CliError::usage(format!("[forecaster.{name}] invalid seed `{s}`")))?,
        None => 0,
    };
    let hyper = kv
        .into_iter()
        .map(|(k, v)| {
            v.parse::<f64>().map(|v| (k.clone(), v)).map_err(|_| {
                CliError::usage(format!("[forecaster.{name}] {k}: not a number `{v}`"))
            })
        })
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    Ok(ForecasterSpec::new(kind, hyper, seed)?)
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub target: Option<PathBuf>,
    pub related: Option<PathBuf>,
    pub daily: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub normalize_dates: bool,
    pub max_months: Option<usize>,
    pub top_n: Option<usize>,
    pub activity_window: Option<usize>,
    pub parallel: Option<String>,
    pub formats: Option<String>,
    pub metrics: Option<String>,
    pub top_k: Option<String>,
    pub window_a: Option<String>,
    pub window_b: Option<String>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> CliResult<RunConfig> {
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut cfg.target, &self.target);
        set(&mut cfg.related, &self.related);
        set(&mut cfg.daily, &self.daily);
        set(&mut cfg.holidays, &self.holidays);
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        cfg.normalize_dates |= self.normalize_dates;
        if self.max_months.is_some() {
            cfg.max_months = self.max_months;
        }
        if let Some(n) = self.top_n {
            cfg.top_n = n;
        }
        if let Some(w) = self.activity_window {
            cfg.activity_window = w;
        }
        if let Some(p) = &self.parallel {
            cfg.parallelism = parse_parallel(p)?;
        }
        if let Some(f) = &self.formats {
            cfg.formats = parse_formats(f)?;
        }
        if let Some(m) = &self.metrics {
            cfg.metrics = parse_metrics(m)?;
        }
        if let Some(k) = &self.top_k {
            cfg.cdf_top_k = parse_list("top_k", k)?;
        }
        match (&self.window_a, &self.window_b) {
            (Some(a), Some(b)) => cfg.windows = Some((a.parse()?, b.parse()?)),
            (None, None) => {}
            _ => return Err(CliError::usage("--window-a and --window-b go together")),
        }
        cfg.check()?;
        Ok(cfg)
    }
}

pub struct LoadedData {
    pub full: DatasetBundle,
    pub importance: Vec<ImportanceEntry>,
    pub portfolio: DatasetBundle,
    /// File name → SHA-256 of its bytes.
    pub input_hashes: BTreeMap<String, String>,
}

fn read_input(
    path: &Path,
    hashes: &mut BTreeMap<String, String>,
    role: &str,
) -> CliResult<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    hashes.insert(role.to_string(), hex::encode(Sha256::digest(&bytes)));
    Ok(bytes)
}

fn with_path<T>(path: &Path, r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

pub fn load_data(cfg: &RunConfig) -> CliResult<LoadedData> {
    let opts = ParseOptions {
        normalize_dates: cfg.normalize_dates,
    };
    let mut hashes = BTreeMap::new();
    let (sales, prices) = match (&cfg.daily, &cfg.target, &cfg.related) {
        (Some(daily), _, _) => {
            let bytes = read_input(daily, &mut hashes, "daily")?;
            let records = with_path(daily, parse_daily_csv(bytes.as_slice()))?;
            aggregate_daily_to_monthly(&records)
        }
        (None, Some(t), Some(r)) => {
            let tb = read_input(t, &mut hashes, "target")?;
            let rb = read_input(r, &mut hashes, "related")?;
            (
                with_path(t, parse_target_csv(tb.as_slice(), opts))?,
                with_path(r, parse_related_csv(rb.as_slice(), opts))?,
            )
        }
        _ => {
            return Err(CliError::usage(
                "configure either `daily` or both `target` and `related` input files",
            ))
        }
    };
    let mut full = assemble_series(&sales, &prices).map_err(CliError::from)?;
    if let Some(h) = &cfg.holidays {
        let bytes = read_input(h, &mut hashes, "holidays")?;
        full.holidays = with_path(h, load_holidays(bytes.as_slice()))?;
    }
    if let Some(m) = cfg.max_months {
        full = full.keep_recent(m);
    }
    if full.is_empty() {
        return Err(CliError::data("input contains no series"));
    }
    let importance = importance_table(&full);
    let top_n = if cfg.top_n > importance.len() {
        warn!(
            top_n = cfg.top_n,
            items = importance.len(),
            "top_n exceeds the item count; using every item"
        );
        importance.len()
    } else {
        cfg.top_n
    };
    let portfolio = select_portfolio(&full, &importance, top_n)?;
    Ok(LoadedData {
        full,
        importance,
        portfolio,
        input_hashes: hashes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub key: SeriesKey,
    pub start: Month,
    pub length: usize,
    pub history: HistoryClass,
    pub activity: Activity,
    pub importance_rank: usize,
    pub backtest_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub items: usize,
    pub backtestable: usize,
    pub active_long: usize,
    pub active_long_fraction: f64,
}

pub fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<ValidationReport> {
    let data = load_data(cfg)?;
    let ranks = crate::portfolio::rank_lookup(&data.importance);
    let rows: Vec<ValidationRow> = data
        .portfolio
        .series
        .values()
        .map(|s| {
            let class = classify_series(s, cfg.activity_window);
            ValidationRow {
                key: s.key,
                start: s.start_month,
                length: s.len(),
                history: class.history,
                activity: class.activity,
                importance_rank: ranks[&s.key.item],
                backtest_steps: backtest_steps(s.len()),
            }
        })
        .collect();
    let backtestable = rows.iter().filter(|r| r.backtest_steps.is_some()).count();
    let active_long = rows
        .iter()
        .filter(|r| r.history == HistoryClass::Long && r.activity == Activity::Active)
        .count();
    let report = ValidationReport {
        items: data.portfolio.items().len(),
        backtestable,
        active_long,
        active_long_fraction: active_long as f64 / rows.len().max(1) as f64,
        rows,
    };

    let w = |e: std::io::Error| CliError::data(format!("writing report: {e}"));
    writeln!(
        out,
        "item,org,start,length,history,activity,importance_rank,backtest_steps"
    )
    .map_err(w)?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.key.item,
            r.key.org,
            r.start,
            r.length,
            r.history.as_str(),
            r.activity.as_str(),
            r.importance_rank,
            r.backtest_steps
                .map(|s| s.to_string())
                .unwrap_or_else(|| "-".into())
        )
        .map_err(w)?;
    }
    writeln!(
        out,
        "# {} items, {} series, {} backtestable, {} active with long history ({:.1}%)",
        report.items,
        report.rows.len(),
        report.backtestable,
        report.active_long,
        100.0 * report.active_long_fraction
    )
    .map_err(w)?;

    if report.backtestable == 0 {
        return Err(CliError {
            code: EXIT_NOTHING,
            message: "no series has the 24 months backtesting needs".into(),
        });
    }
    Ok(report)
}

fn write_out(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> crate::error::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    version: &'static str,
    config_hash: String,
    config: String,
    seeds: BTreeMap<String, u64>,
    inputs: &'a BTreeMap<String, String>,
    series_backtested: usize,
    not_backtestable: usize,
    failed_origins: usize,
    timings_ms: BTreeMap<&'static str, u128>,
}

#[derive(Debug, Clone)]
pub struct BacktestSummary {
    pub rows: usize,
    pub not_backtestable: usize,
    pub failed_origins: usize,
    pub written: Vec<PathBuf>,
}

/// Runs the whole suite and writes `results.csv`, `per_origin.csv`,
/// `failures.csv`, `not_backtestable.csv`, `importance.csv` and
/// `manifest.json` into the output directory.
pub fn cmd_backtest(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<BacktestSummary> {
    let t0 = Instant::now();
    let data = load_data(cfg)?;
    let t_load = t0.elapsed();
    info!(series = data.portfolio.series.len(), "running backtests");
    let suite = run_suite(
        &data.portfolio,
        &cfg.forecasters,
        &data.importance,
        &cfg.suite_options(),
    )?;
    let t_run = t0.elapsed() - t_load;

    let dir = &cfg.output;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> CliResult<()> {
        let p = dir.join(name);
        write_out(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    put(
        "importance.csv",
        to_bytes(|b| write_importance_csv(&data.importance, b))?,
    )?;
    put(
        "results.csv",
        to_bytes(|b| write_results_csv(&suite.table, b))?,
    )?;
    put(
        "per_origin.csv",
        to_bytes(|b| write_per_origin_csv(&suite.results, b))?,
    )?;
    put(
        "failures.csv",
        to_bytes(|b| write_failures_csv(&suite.results, b))?,
    )?;
    let mut nb = String::from("item,org\n");
    for k in &suite.not_backtestable {
        nb.push_str(&format!("{},{}\n", k.item, k.org));
    }
    put("not_backtestable.csv", nb.into_bytes())?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        config: cfg.canonical(),
        seeds: cfg
            .forecasters
            .iter()
            .map(|f| (f.label(), f.seed))
            .collect(),
        inputs: &data.input_hashes,
        series_backtested: suite.table.rows.len() / cfg.forecasters.len(),
        not_backtestable: suite.not_backtestable.len(),
        failed_origins: suite.failed_origins(),
        timings_ms: [
            ("load", t_load.as_millis()),
            ("backtest", t_run.as_millis()),
        ]
        .into_iter()
        .collect(),
    };
    put(
        "manifest.json",
        serde_json::to_vec_pretty(&manifest).map_err(ArenaError::from)?,
    )?;

    let summary = BacktestSummary {
        rows: suite.table.rows.len(),
        not_backtestable: suite.not_backtestable.len(),
        failed_origins: suite.failed_origins(),
        written,
    };
    writeln!(
        out,
        "{} result rows, {} series not backtestable, {} failed origins -> {}",
        summary.rows,
        summary.not_backtestable,
        summary.failed_origins,
        dir.display()
    )
    .map_err(|e| CliError::data(e.to_string()))?;
    Ok(summary)
}

/// Reads a results file (default `<output>/results.csv`) and writes every
/// analysis into `<output>/report`.
pub fn cmd_report(
    cfg: &RunConfig,
    results: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<Vec<PathBuf>> {
    let default = cfg.output.join("results.csv");
    let path = results.unwrap_or(&default);
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let table = with_path(path, read_results_csv(bytes.as_slice()))?;
    let analyses = analyze(&table, &cfg.metrics, &cfg.cdf_top_k);
    let written = emit_report(&analyses, &cfg.output.join("report"), &cfg.formats)?;
    writeln!(out, "wrote {} report files", written.len())
        .map_err(|e| CliError::data(e.to_string()))?;
    Ok(written)
}

/// Backtests the two configured windows and writes `window_compare.csv` plus
/// the per-window result tables.
pub fn cmd_compare_windows(
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> CliResult<crate::report::WindowComparison> {
    let (a, b) = cfg.windows.ok_or_else(|| {
        CliError::usage("compare-windows needs window a and b ([windows] or --window-a/--window-b)")
    })?;
    let data = load_data(cfg)?;
    let metric = cfg.metrics[0];
    let cmp = window_comparison(
        &data.portfolio,
        &cfg.forecasters,
        &data.importance,
        &cfg.suite_options(),
        a,
        b,
        metric,
    )?;
    let dir = &cfg.output;
    write_out(
        &dir.join("window_compare.csv"),
        &crate::report::window_compare_csv(&cmp)?,
    )?;
    write_out(
        &dir.join("window_a_results.csv"),
        &to_bytes(|b| write_results_csv(&cmp.table_a, b))?,
    )?;
    write_out(
        &dir.join("window_b_results.csv"),
        &to_bytes(|b| write_results_csv(&cmp.table_b, b))?,
    )?;
    if cfg.formats.contains(&Format::Svg) {
        write_out(
            &dir.join("window_compare.svg"),
            crate::report::svg::window_bars(&cmp).as_bytes(),
        )?;
    }
    let w = |e: std::io::Error| CliError::data(e.to_string());
    writeln!(out, "model,wape_window_a,wape_window_b,delta").map_err(w)?;
    let f = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    for r in &cmp.rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.model,
            f(r.wape_window_a),
            f(r.wape_window_b),
            f(r.delta)
        )
        .map_err(w)?;
    }
    Ok(cmp)
}

/// Fits one forecaster on one series up to `origin` (default: its last
/// month) and prints the parameters as JSON.
pub fn cmd_model_dump(
    cfg: &RunConfig,
    key: SeriesKey,
    model: &str,
    origin: Option<Month>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let spec = cfg
        .forecasters
        .iter()
        .find(|f| f.label() == model)
        .ok_or_else(|| CliError::usage(format!("no forecaster labeled `{model}`")))?;
    let data = load_data(cfg)?;
    let series = data
        .full
        .series
        .get(&key)
        .ok_or_else(|| CliError::usage(format!("no series {key}")))?;
    let origin = origin.unwrap_or(series.end_month());
    let history = series
        .truncated_at(origin)
        .ok_or_else(|| CliError::usage(format!("origin {origin} precedes series {key}")))?;
    let json = match spec.kind {
        ForecasterKind::ProphetLite => serde_json::to_string_pretty(&fit_prophet_lite(
            &history,
            &data.full.holidays,
            &spec.prophet_config()?,
        )?),
        ForecasterKind::GlobalAr => {
            let cfg: GlobalArConfig = spec.global_config()?;
            let cut = data.portfolio.truncated_at(origin);
            serde_json::to_string_pretty(&fit_global_ar(&cut.series, &cfg)?)
        }
        ForecasterKind::SeasonalNaive => serde_json::to_string_pretty(&serde_json::json!({
            "kind": "seasonal_naive",
            "period": spec.period()?,
        })),
    }
    .map_err(ArenaError::from)?;
    writeln!(out, "{json}").map_err(|e| CliError::data(e.to_string()))?;
    Ok(())
}

/// Writes a synthetic benchmark-shaped dataset and a matching config file.
pub fn cmd_synth(dir: &Path, synth_cfg: &SynthConfig) -> CliResult<()> {
    let bundle = synth::generate(synth_cfg);
    let (sales, prices) = crate::dataset_io::bundle_records(&bundle);
    write_out(
        &dir.join("target_ts.csv"),
        &to_bytes(|b| crate::dataset_io::write_target_csv(&sales, b))?,
    )?;
    write_out(
        &dir.join("related_ts.csv"),
        &to_bytes(|b| crate::dataset_io::write_related_csv(&prices, b))?,
    )?;
    write_out(
        &dir.join("holidays.csv"),
        &to_bytes(|b| crate::dataset_io::write_holidays_csv(&bundle.holidays, b))?,
    )?;
    let end = synth_cfg.end;
    let config = format!(
        "[data]\ntarget = target_ts.csv\nrelated = related_ts.csv\nholidays = holidays.csv\noutput = out\n\n\
         [portfolio]\ntop_n = {}\nactivity_window = 3\n\n\
         [run]\nparallel = auto\nmetrics = wape_1mo,wape_3mo\nformats = csv,svg\ntop_k = 10,25,50\n\n\
         [windows]\na = {}..{}\nb = {}..{}\n\n\
         [forecaster.prophet_lite]\nkind = prophet_lite\nseed = 0\n\n\
         [forecaster.global_ar]\nkind = global_ar\nseed = 0\n\n\
         [forecaster.global_ar_q]\nkind = global_ar\nseed = 0\nquantile = 0.5\n\n\
         [forecaster.seasonal_naive]\nkind = seasonal_naive\nseed = 0\n",
        synth_cfg.items.min(DEFAULT_TOP_N),
        end.offset(-23),
        end.offset(-12),
        end.offset(-11),
        end,
    );
    write_out(&dir.join("arena.conf"), config.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_sections() {
        let text = "\
# comment
[data]
target = t.csv
related = r.csv
output = out

[portfolio]
top_n = 10

[run]
parallel = 4
metrics = wape1mo
formats = csv,svg

[windows]
a = 2019-03..2020-02
b = 2020-03..2021-02

[forecaster.p]
kind = prophet_lite
fourier_order = 2

[forecaster.q]
kind = global_ar
quantile = 0.9
seed = 3
";
        let cfg = RunConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.target, Some(PathBuf::from("/base/t.csv")));
        assert_eq!(cfg.top_n, 10);
        assert_eq!(cfg.parallelism, Some(4));
        assert_eq!(cfg.metrics, vec![Metric::Wape1mo]);
        assert!(cfg.formats.contains(&Format::Svg));
        assert!(cfg.windows.is_some());
        let labels: Vec<String> = cfg.forecasters.iter().map(|f| f.label()).collect();
        assert_eq!(labels, vec!["prophet_lite", "global_ar_q"]);
        assert_eq!(cfg.forecasters[1].seed, 3);
    }

    #[test]
    fn rejects_bad_config() {
        let base = Path::new(".");
        assert_eq!(
            RunConfig::parse("[data]\nbogus = 1\n", base)
                .unwrap_err()
                .code,
            EXIT_USAGE
        );
        assert!(RunConfig::parse("[run]\nmetrics = mape\n", base).is_err());
        assert!(RunConfig::parse("[windows]\na = 2019-03..2020-02\n", base).is_err());
        assert!(RunConfig::parse("[forecaster.x]\nkind = prophet_lite\nlags = 3\n", base).is_err());
        assert!(RunConfig::parse("[forecaster.x]\nlags = 3\n", base).is_err());
        assert!(RunConfig::parse(
            "[forecaster.x]\nkind = seasonal_naive\n[forecaster.y]\nkind = seasonal_naive\n",
            base
        )
        .is_err());
    }

    #[test]
    fn flags_win() {
        let cfg = RunConfig::parse("[portfolio]\ntop_n = 10\n", Path::new(".")).unwrap();
        let ov = Overrides {
            top_n: Some(5),
            parallel: Some("auto".into()),
            ..Default::default()
        };
        let cfg = ov.apply(cfg).unwrap();
        assert_eq!(cfg.top_n, 5);
        assert_eq!(cfg.parallelism, None);
        let bad = Overrides {
            window_a: Some("2019-01..2019-12".into()),
            ..Default::default()
        };
        assert!(bad.apply(RunConfig::default()).is_err());
    }

    #[test]
    fn hash_tracks_settings() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.top_n = 7;
        assert_ne!(a.hash(), b.hash());
    }
}
