//! Analyses over a table of backtest results, and their CSV/JSON/SVG output.
//!
//! All outputs are deterministic: rows are sorted, floats are printed with
//! Rust's shortest round-trip formatting, and no timestamps are written.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backtest::{run_suite_in_window, BacktestResult, SuiteOptions};
use crate::dataset_io::{DatasetBundle, SeriesKey};
use crate::error::{ArenaError, Result};
use crate::forecasters::ForecasterSpec;
use crate::month::MonthRange;
use crate::portfolio::{Activity, HistoryClass, ImportanceEntry};

pub mod svg;

pub const RESULTS_HEADER: [&str; 10] = [
    "item",
    "org",
    "model",
    "wape1mo",
    "wape3mo",
    "n_monthly",
    "n_quarterly",
    "importance_rank",
    "history_class",
    "activity",
];

/// Importance prefixes always reported for best-of-all shares, in addition
/// to every rank.
pub const BEST_OF_ALL_TOP_K: [usize; 4] = [5, 10, 25, 50];
pub const DEFAULT_CDF_TOP_K: [usize; 3] = [10, 25, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub key: SeriesKey,
    pub model: String,
    pub wape_1mo: Option<f64>,
    pub wape_3mo: Option<f64>,
    pub n_monthly: usize,
    pub n_quarterly: usize,
    pub importance_rank: usize,
    pub history: HistoryClass,
    pub activity: Activity,
}

impl ResultRow {
    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Wape1mo => self.wape_1mo,
            Metric::Wape3mo => self.wape_3mo,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn models(&self) -> BTreeSet<String> {
        self.rows.iter().map(|r| r.model.clone()).collect()
    }

    pub fn max_rank(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.importance_rank)
            .max()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "wape_1mo")]
    Wape1mo,
    #[serde(rename = "wape_3mo")]
    Wape3mo,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Wape1mo, Metric::Wape3mo];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Wape1mo => "wape_1mo",
            Metric::Wape3mo => "wape_3mo",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = ArenaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wape_1mo" | "wape1mo" => Ok(Metric::Wape1mo),
            "wape_3mo" | "wape3mo" => Ok(Metric::Wape3mo),
            other => Err(ArenaError::InvalidArgument(format!(
                "unknown metric `{other}`"
            ))),
        }
    }
}

/// Empirical CDF: `fraction` of defined values that are `<= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfCurve {
    pub points: Vec<(f64, f64)>,
    pub n_defined: usize,
    pub n_undefined: usize,
}

impl CdfCurve {
    pub fn from_values(values: &[f64], n_undefined: usize) -> Option<CdfCurve> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, x) in v.iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match points.last_mut() {
                Some(last) if last.0 == *x => last.1 = frac,
                _ => points.push((*x, frac)),
            }
        }
        Some(CdfCurve {
            points,
            n_defined: values.len(),
            n_undefined,
        })
    }

    pub fn at(&self, threshold: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(t, _)| *t <= threshold)
            .last()
            .map_or(0.0, |(_, f)| *f)
    }
}

pub fn cumulative_histogram(
    table: &ResultTable,
    model: &str,
    metric: Metric,
    top_k: usize,
) -> Result<CdfCurve> {
    let rows = table
        .rows
        .iter()
        .filter(|r| r.model == model && r.importance_rank <= top_k);
    let (mut defined, mut undefined) = (Vec::new(), 0);
    for r in rows {
        match r.metric(metric) {
            Some(v) => defined.push(v),
            None => undefined += 1,
        }
    }
    CdfCurve::from_values(&defined, undefined).ok_or_else(|| {
        ArenaError::InsufficientData(format!(
            "no defined {metric} for {model} in the top {top_k}"
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestOfAllShare {
    pub top_k: usize,
    pub shares: BTreeMap<String, f64>,
    /// (item, org) pairs that had a winner.
    pub pairs: usize,
    /// Pairs where no model had a defined metric.
    pub degenerate: usize,
}

/// Per (item, org) in the top `top_k`, the model with the lowest metric wins;
/// ties go to the lexicographically smallest model id. Every model in the
/// table appears in `shares`, possibly with 0.
pub fn best_of_all(table: &ResultTable, metric: Metric, top_k: usize) -> BestOfAllShare {
    let mut by_pair: BTreeMap<SeriesKey, Vec<(&str, Option<f64>)>> = BTreeMap::new();
    for r in table.rows.iter().filter(|r| r.importance_rank <= top_k) {
        by_pair
            .entry(r.key)
            .or_default()
            .push((r.model.as_str(), r.metric(metric)));
    }
    let mut wins: BTreeMap<String, usize> = table.models().into_iter().map(|m| (m, 0)).collect();
    let (mut pairs, mut degenerate) = (0, 0);
    for candidates in by_pair.values() {
        let winner = candidates
            .iter()
            .filter_map(|(m, v)| v.map(|v| (v, *m)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        match winner {
            Some((_, m)) => {
                pairs += 1;
                *wins.get_mut(m).expect("model listed") += 1;
            }
            None => degenerate += 1,
        }
    }
    let shares = wins
        .into_iter()
        .map(|(m, w)| {
            let share = if pairs == 0 {
                0.0
            } else {
                w as f64 / pairs as f64
            };
            (m, share)
        })
        .collect();
    BestOfAllShare {
        top_k,
        shares,
        pairs,
        degenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub rank: usize,
    pub model: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendLine {
    pub model: String,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scatter {
    pub points: Vec<ScatterPoint>,
    pub trends: Vec<TrendLine>,
}

/// Ordinary least-squares line `y = slope·x + intercept`. With a single
/// distinct x the slope is 0 and the intercept is the mean.
pub fn ols_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn importance_scatter(table: &ResultTable, metric: Metric) -> Scatter {
    let points: Vec<ScatterPoint> = table
        .rows
        .iter()
        .filter_map(|r| {
            r.metric(metric).map(|value| ScatterPoint {
                rank: r.importance_rank,
                model: r.model.clone(),
                value,
            })
        })
        .collect();
    let mut per_model: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for p in &points {
        let e = per_model.entry(&p.model).or_default();
        e.0.push(p.rank as f64);
        e.1.push(p.value);
    }
    let trends = per_model
        .into_iter()
        .map(|(model, (xs, ys))| {
            let (slope, intercept) = ols_line(&xs, &ys);
            TrendLine {
                model: model.to_string(),
                slope,
                intercept,
            }
        })
        .collect();
    Scatter { points, trends }
}

pub fn history_split(table: &ResultTable) -> (ResultTable, ResultTable) {
    let (long, short) = table
        .rows
        .iter()
        .cloned()
        .partition(|r| r.history == HistoryClass::Long);
    (ResultTable { rows: long }, ResultTable { rows: short })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub model: String,
    pub wape_window_a: Option<f64>,
    pub wape_window_b: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowComparison {
    pub window_a: MonthRange,
    pub window_b: MonthRange,
    pub metric: Metric,
    pub table_a: ResultTable,
    pub table_b: ResultTable,
    pub rows: Vec<WindowRow>,
}

/// Mean of the defined per-(item, org) metric values of each model.
pub fn aggregate_by_model(table: &ResultTable, metric: Metric) -> BTreeMap<String, Option<f64>> {
    let mut acc: BTreeMap<String, (f64, usize)> =
        table.models().into_iter().map(|m| (m, (0.0, 0))).collect();
    for r in &table.rows {
        if let Some(v) = r.metric(metric) {
            let e = acc.get_mut(&r.model).expect("model listed");
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(m, (s, n))| (m, (n > 0).then(|| s / n as f64)))
        .collect()
}

/// Backtests the bundle twice, once per window, and compares per-model
/// aggregate WAPE (`delta = b − a`). Windows must be identical or disjoint.
pub fn window_comparison(
    bundle: &DatasetBundle,
    specs: &[ForecasterSpec],
    importance: &[ImportanceEntry],
    options: &SuiteOptions,
    window_a: MonthRange,
    window_b: MonthRange,
    metric: Metric,
) -> Result<WindowComparison> {
    if window_a != window_b && window_a.overlaps(&window_b) {
        return Err(ArenaError::InvalidArgument(format!(
            "windows {window_a} and {window_b} overlap"
        )));
    }
    let run = |w: &MonthRange| {
        run_suite_in_window(bundle, specs, importance, options, w).map_err(|e| match e {
            ArenaError::NothingToBacktest => {
                ArenaError::InsufficientData(format!("window {w} leaves no backtestable series"))
            }
            other => other,
        })
    };
    let table_a = run(&window_a)?.table;
    let table_b = if window_b == window_a {
        table_a.clone()
    } else {
        run(&window_b)?.table
    };
    let agg_a = aggregate_by_model(&table_a, metric);
    let agg_b = aggregate_by_model(&table_b, metric);
    let models: BTreeSet<&String> = agg_a.keys().chain(agg_b.keys()).collect();
    let rows = models
        .into_iter()
        .map(|m| {
            let a = agg_a.get(m).copied().flatten();
            let b = agg_b.get(m).copied().flatten();
            WindowRow {
                model: m.clone(),
                wape_window_a: a,
                wape_window_b: b,
                delta: a.zip(b).map(|(a, b)| b - a),
            }
        })
        .collect();
    Ok(WindowComparison {
        window_a,
        window_b,
        metric,
        table_a,
        table_b,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfEntry {
    pub model: String,
    pub metric: Metric,
    pub top_k: usize,
    pub curve: CdfCurve,
}

/// Every analysis derived from one table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TableAnalyses {
    pub cdfs: Vec<CdfEntry>,
    pub best_of_all: BTreeMap<Metric, Vec<BestOfAllShare>>,
    pub scatter: BTreeMap<Metric, Scatter>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Analyses {
    pub metrics: Vec<Metric>,
    pub all: TableAnalyses,
    pub long_history: TableAnalyses,
    pub short_history: TableAnalyses,
    pub window: Option<WindowComparison>,
}

fn best_of_all_ks(table: &ResultTable) -> Vec<usize> {
    let max = table.max_rank();
    let mut ks: BTreeSet<usize> = (1..=max).collect();
    ks.extend(BEST_OF_ALL_TOP_K.iter().filter(|k| **k <= max));
    ks.into_iter().collect()
}

pub fn analyze_table(
    table: &ResultTable,
    metrics: &[Metric],
    cdf_top_k: &[usize],
) -> TableAnalyses {
    let mut out = TableAnalyses::default();
    for &metric in metrics {
        for model in table.models() {
            for &k in cdf_top_k {
                if let Ok(curve) = cumulative_histogram(table, &model, metric, k) {
                    out.cdfs.push(CdfEntry {
                        model: model.clone(),
                        metric,
                        top_k: k,
                        curve,
                    });
                }
            }
        }
        let shares = best_of_all_ks(table)
            .into_iter()
            .map(|k| best_of_all(table, metric, k))
            .filter(|s| s.pairs > 0)
            .collect();
        out.best_of_all.insert(metric, shares);
        out.scatter
            .insert(metric, importance_scatter(table, metric));
    }
    out
}

pub fn analyze(table: &ResultTable, metrics: &[Metric], cdf_top_k: &[usize]) -> Analyses {
    let (long, short) = history_split(table);
    Analyses {
        metrics: metrics.to_vec(),
        all: analyze_table(table, metrics, cdf_top_k),
        long_history: analyze_table(&long, metrics, cdf_top_k),
        short_history: analyze_table(&short, metrics, cdf_top_k),
        window: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = ArenaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(ArenaError::InvalidArgument(format!(
                "unknown format `{other}`"
            ))),
        }
    }
}

pub fn parse_formats(s: &str) -> Result<BTreeSet<Format>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| ArenaError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| ArenaError::io(path, e))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner()
        .map_err(|e| ArenaError::io("<csv buffer>", e.into_error()))
}

fn emit_table_analyses(
    a: &TableAnalyses,
    metrics: &[Metric],
    dir: &Path,
    formats: &BTreeSet<Format>,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    let svg_on = formats.contains(&Format::Svg);
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
        Ok(())
    };

    for c in &a.cdfs {
        let stem = format!("cdf_{}_{}_top{}", c.model, c.metric, c.top_k);
        let rows = c
            .curve
            .points
            .iter()
            .map(|(t, f)| vec![t.to_string(), f.to_string()]);
        put(
            format!("{stem}.csv"),
            csv_bytes(&["threshold", "fraction"], rows)?,
        )?;
        if svg_on {
            let title = format!("{} {} top {}", c.model, c.metric, c.top_k);
            put(
                format!("{stem}.svg"),
                svg::cdf_chart(&title, &c.curve.points).into_bytes(),
            )?;
        }
    }
    let summary = a.cdfs.iter().map(|c| {
        vec![
            c.model.clone(),
            c.metric.to_string(),
            c.top_k.to_string(),
            c.curve.n_defined.to_string(),
            c.curve.n_undefined.to_string(),
        ]
    });
    put(
        "cdf_summary.csv".into(),
        csv_bytes(
            &["model", "metric", "top_k", "n_defined", "n_undefined"],
            summary,
        )?,
    )?;

    for &metric in metrics {
        let shares = a.best_of_all.get(&metric).map(Vec::as_slice).unwrap_or(&[]);
        let rows = shares.iter().flat_map(|s| {
            s.shares
                .iter()
                .map(move |(m, v)| vec![s.top_k.to_string(), m.clone(), v.to_string()])
        });
        put(
            format!("best_of_all_{metric}.csv"),
            csv_bytes(&["top_k", "model", "share"], rows)?,
        )?;
        let counts = shares.iter().map(|s| {
            vec![
                s.top_k.to_string(),
                s.pairs.to_string(),
                s.degenerate.to_string(),
            ]
        });
        put(
            format!("best_of_all_{metric}_counts.csv"),
            csv_bytes(&["top_k", "pairs", "degenerate"], counts)?,
        )?;
        if svg_on {
            put(
                format!("best_of_all_{metric}.svg"),
                svg::stacked_shares(&format!("best of all, {metric}"), shares).into_bytes(),
            )?;
        }

        let empty = Scatter::default();
        let sc = a.scatter.get(&metric).unwrap_or(&empty);
        let rows = sc
            .points
            .iter()
            .map(|p| vec![p.rank.to_string(), p.model.clone(), p.value.to_string()]);
        put(
            format!("scatter_{metric}.csv"),
            csv_bytes(&["rank", "model", "value"], rows)?,
        )?;
        let rows = sc.trends.iter().map(|t| {
            vec![
                t.model.clone(),
                t.slope.to_string(),
                t.intercept.to_string(),
            ]
        });
        put(
            format!("trend_{metric}.csv"),
            csv_bytes(&["model", "slope", "intercept"], rows)?,
        )?;
        if svg_on {
            put(
                format!("scatter_{metric}.svg"),
                svg::scatter_chart(&format!("{metric} by importance"), sc).into_bytes(),
            )?;
        }
    }
    Ok(())
}

pub fn window_compare_csv(w: &WindowComparison) -> Result<Vec<u8>> {
    let rows = w.rows.iter().map(|r| {
        vec![
            r.model.clone(),
            opt(r.wape_window_a),
            opt(r.wape_window_b),
            opt(r.delta),
        ]
    });
    csv_bytes(&["model", "wape_window_a", "wape_window_b", "delta"], rows)
}

/// Writes every analysis under `out_dir`; the long/short history splits go
/// into `long_history/` and `short_history/`. Returns the written paths in
/// write order.
pub fn emit_report(
    analyses: &Analyses,
    out_dir: &Path,
    formats: &BTreeSet<Format>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    fs::create_dir_all(out_dir).map_err(|e| ArenaError::io(out_dir, e))?;
    // CSV is the source of truth and is always written.
    emit_table_analyses(
        &analyses.all,
        &analyses.metrics,
        out_dir,
        formats,
        &mut written,
    )?;
    emit_table_analyses(
        &analyses.long_history,
        &analyses.metrics,
        &out_dir.join("long_history"),
        formats,
        &mut written,
    )?;
    emit_table_analyses(
        &analyses.short_history,
        &analyses.metrics,
        &out_dir.join("short_history"),
        formats,
        &mut written,
    )?;
    if let Some(w) = &analyses.window {
        let path = out_dir.join("window_compare.csv");
        write_file(&path, &window_compare_csv(w)?)?;
        written.push(path);
        if formats.contains(&Format::Svg) {
            let path = out_dir.join("window_compare.svg");
            write_file(&path, svg::window_bars(w).as_bytes())?;
            written.push(path);
        }
    }
    if formats.contains(&Format::Json) {
        let path = out_dir.join("report.json");
        write_file(&path, serde_json::to_string_pretty(analyses)?.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_results_csv(table: &ResultTable, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RESULTS_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.key.item.to_string(),
            r.key.org.to_string(),
            r.model.clone(),
            opt(r.wape_1mo),
            opt(r.wape_3mo),
            r.n_monthly.to_string(),
            r.n_quarterly.to_string(),
            r.importance_rank.to_string(),
            r.history.as_str().to_string(),
            r.activity.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| ArenaError::io("results.csv", e))?;
    Ok(())
}

pub fn read_results_csv(source: impl Read) -> Result<ResultTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(ArenaError::Header {
            expected: RESULTS_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| ArenaError::row(row, e.to_string()))?;
        let int = |j: usize| -> Result<u64> {
            rec[j].parse().map_err(|_| {
                ArenaError::row(row, format!("invalid {} `{}`", RESULTS_HEADER[j], &rec[j]))
            })
        };
        let real = |j: usize| -> Result<Option<f64>> {
            if rec[j].is_empty() {
                return Ok(None);
            }
            rec[j].parse().map(Some).map_err(|_| {
                ArenaError::row(row, format!("invalid {} `{}`", RESULTS_HEADER[j], &rec[j]))
            })
        };
        let key = SeriesKey::new(int(0)?, int(1)?);
        let model = rec[2].to_string();
        if !seen.insert((key, model.clone())) {
            return Err(ArenaError::row(
                row,
                format!("duplicate row for {key} {model}"),
            ));
        }
        rows.push(ResultRow {
            key,
            model,
            wape_1mo: real(3)?,
            wape_3mo: real(4)?,
            n_monthly: int(5)? as usize,
            n_quarterly: int(6)? as usize,
            importance_rank: int(7)? as usize,
            history: HistoryClass::parse(&rec[8]).ok_or_else(|| {
                ArenaError::row(row, format!("invalid history_class `{}`", &rec[8]))
            })?,
            activity: Activity::parse(&rec[9])
                .ok_or_else(|| ArenaError::row(row, format!("invalid activity `{}`", &rec[9])))?,
        });
    }
    Ok(ResultTable { rows })
}

/// Per-origin samples (`per_origin.csv`) of every backtest result.
pub fn write_per_origin_csv(results: &[BacktestResult], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "item",
        "org",
        "model",
        "origin",
        "actual_1mo",
        "forecast_1mo",
        "actual_3mo",
        "forecast_3mo",
    ])?;
    let mut sorted: Vec<&BacktestResult> = results.iter().collect();
    sorted.sort_by(|a, b| (a.key, &a.model).cmp(&(b.key, &b.model)));
    for r in sorted {
        for s in &r.per_origin {
            w.write_record([
                r.key.item.to_string(),
                r.key.org.to_string(),
                r.model.clone(),
                s.origin.to_string(),
                s.actual_1mo.to_string(),
                s.forecast_1mo.to_string(),
                opt(s.actual_3mo),
                opt(s.forecast_3mo),
            ])?;
        }
    }
    w.flush().map_err(|e| ArenaError::io("per_origin.csv", e))?;
    Ok(())
}

pub fn write_failures_csv(results: &[BacktestResult], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["item", "org", "model", "origin", "error"])?;
    let mut sorted: Vec<&BacktestResult> = results.iter().collect();
    sorted.sort_by(|a, b| (a.key, &a.model).cmp(&(b.key, &b.model)));
    for r in sorted {
        for f in &r.failures {
            w.write_record([
                r.key.item.to_string(),
                r.key.org.to_string(),
                r.model.clone(),
                f.origin.to_string(),
                f.error.clone(),
            ])?;
        }
    }
    w.flush().map_err(|e| ArenaError::io("failures.csv", e))?;
    Ok(())
}
