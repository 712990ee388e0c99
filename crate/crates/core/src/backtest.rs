//! Rolling-origin backtesting.
//!
//! A series of `n` months is backtested over its last `steps = min(12, n − 18)`
//! origins (at least 6, so `n ≥ 24`). At every origin the forecaster is
//! retrained on data up to and including that month and asked for three
//! months ahead. Each origin gives one monthly sample (the first month) and,
//! when three months of actuals exist, one quarterly sample (the three-month
//! sums). The last two origins therefore contribute monthly samples only.
//!
//! WAPE over the pooled samples is `Σ|a − f| / Σ|a|`, undefined when every
//! actual is zero.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset_io::{DatasetBundle, HolidayCalendar, MonthlySeries, SeriesKey};
use crate::error::{ArenaError, Result};
use crate::forecasters::global_ar::{predict_with_scale, series_scale};
use crate::forecasters::{
    fit_global_ar, fit_prophet_lite, predict_prophet_lite, seasonal_naive_with_period, Forecast,
    ForecasterKind, ForecasterSpec, GlobalARParams,
};
use crate::month::{Month, MonthRange};
use crate::portfolio::{classify_series, rank_lookup, ImportanceEntry};
use crate::report::{ResultRow, ResultTable};

pub const MIN_HISTORY_MONTHS: usize = 18;
pub const MIN_STEPS: usize = 6;
pub const MAX_STEPS: usize = 12;
pub const HORIZON: usize = 3;

/// Number of backtest steps for a series of `series_length` months, or
/// `None` when it is too short to backtest.
pub fn backtest_steps(series_length: usize) -> Option<usize> {
    (series_length >= MIN_HISTORY_MONTHS + MIN_STEPS)
        .then(|| MAX_STEPS.min(series_length - MIN_HISTORY_MONTHS))
}

pub fn wape(actuals: &[f64], forecasts: &[f64]) -> Result<Option<f64>> {
    if actuals.len() != forecasts.len() {
        return Err(ArenaError::InvalidArgument(format!(
            "{} actuals vs {} forecasts",
            actuals.len(),
            forecasts.len()
        )));
    }
    if actuals.is_empty() {
        return Err(ArenaError::InvalidArgument("empty sample set".into()));
    }
    let num: f64 = actuals
        .iter()
        .zip(forecasts)
        .map(|(a, f)| (a - f).abs())
        .sum();
    let den: f64 = actuals.iter().map(|a| a.abs()).sum();
    Ok((den > 0.0).then(|| num / den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestPlan {
    pub steps: usize,
    pub origins: Vec<Month>,
    pub series_length: usize,
}

impl BacktestPlan {
    /// Standard plan over the last `steps` usable origins.
    pub fn for_series(series: &MonthlySeries) -> Option<BacktestPlan> {
        let n = series.len();
        let steps = backtest_steps(n)?;
        let first = n - 1 - steps;
        Some(BacktestPlan {
            steps,
            origins: (first..n - 1).map(|i| series.month_at(i)).collect(),
            series_length: n,
        })
    }

    /// Plan whose first test months fall inside `window`. `series` must
    /// already end no later than `window.end`. At most the last 12 such
    /// origins are used and at least 6 are required.
    pub fn in_window(series: &MonthlySeries, window: &MonthRange) -> Option<BacktestPlan> {
        let n = series.len();
        if n < MIN_HISTORY_MONTHS + MIN_STEPS || series.end_month() > window.end {
            return None;
        }
        let mut origins: Vec<Month> = (MIN_HISTORY_MONTHS - 1..n - 1)
            .map(|i| series.month_at(i))
            .filter(|o| window.contains(o.succ()))
            .collect();
        if origins.len() > MAX_STEPS {
            origins.drain(..origins.len() - MAX_STEPS);
        }
        (origins.len() >= MIN_STEPS).then_some(BacktestPlan {
            steps: origins.len(),
            origins,
            series_length: n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginSample {
    pub origin: Month,
    pub actual_1mo: f64,
    pub forecast_1mo: f64,
    pub actual_3mo: Option<f64>,
    pub forecast_3mo: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginFailure {
    pub origin: Month,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub key: SeriesKey,
    pub model: String,
    pub steps: usize,
    pub wape_1mo: Option<f64>,
    pub wape_3mo: Option<f64>,
    pub n_monthly: usize,
    pub n_quarterly: usize,
    pub per_origin: Vec<OriginSample>,
    pub failures: Vec<OriginFailure>,
}

/// Global model fitted on a bundle cut at one calendar month.
pub type GlobalFit = std::result::Result<Arc<GlobalARParams>, String>;

pub fn fit_global_at(spec: &ForecasterSpec, bundle: &DatasetBundle, origin: Month) -> GlobalFit {
    let cfg = spec.global_config().map_err(|e| e.to_string())?;
    let cut = bundle.truncated_at(origin);
    fit_global_ar(&cut.series, &cfg)
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

/// Forecast `horizon` months after `origin` using only quantities up to
/// `origin`. Future prices are the recorded ones (a known regressor), carried
/// forward past the end of the series.
pub fn forecast_at_origin(
    spec: &ForecasterSpec,
    series: &MonthlySeries,
    calendar: &HolidayCalendar,
    origin: Month,
    horizon: usize,
    global: Option<&GlobalARParams>,
) -> Result<Forecast> {
    let history = series
        .truncated_at(origin)
        .ok_or_else(|| ArenaError::InvalidArgument(format!("origin {origin} precedes series")))?;
    let future_prices = series.future_prices(origin, horizon);
    match spec.kind {
        ForecasterKind::ProphetLite => {
            let params = fit_prophet_lite(&history, calendar, &spec.prophet_config()?)?;
            predict_prophet_lite(&params, origin, horizon, &future_prices, calendar)
        }
        ForecasterKind::GlobalAr => {
            let params = global.ok_or_else(|| {
                ArenaError::InvalidArgument("global model required for global_ar".into())
            })?;
            let scale = params
                .scales
                .get(&series.key)
                .copied()
                .unwrap_or_else(|| series_scale(&history));
            predict_with_scale(params, &scale, &history, origin, horizon, &future_prices)
        }
        ForecasterKind::SeasonalNaive => {
            seasonal_naive_with_period(&history, origin, horizon, spec.period()?)
        }
    }
}

fn sample(series: &MonthlySeries, origin: Month, forecast: &Forecast) -> OriginSample {
    let at = series.index_of(origin).expect("origin inside series");
    let n = series.len();
    let actual_1mo = series.quantities[at + 1];
    let quarterly = at + HORIZON < n;
    OriginSample {
        origin,
        actual_1mo,
        forecast_1mo: forecast.values[0],
        actual_3mo: quarterly.then(|| series.quantities[at + 1..=at + HORIZON].iter().sum()),
        forecast_3mo: quarterly.then(|| forecast.values[..HORIZON].iter().sum()),
    }
}

/// Runs one (series, forecaster) pair over an explicit plan. `global` must
/// supply the global fit for each origin when the spec is `global_ar`.
pub fn run_plan(
    series: &MonthlySeries,
    spec: &ForecasterSpec,
    calendar: &HolidayCalendar,
    plan: &BacktestPlan,
    global: &dyn Fn(Month) -> GlobalFit,
) -> BacktestResult {
    let mut per_origin = Vec::with_capacity(plan.origins.len());
    let mut failures = Vec::new();
    for &origin in &plan.origins {
        let fit = if spec.is_global() {
            match global(origin) {
                Ok(p) => Some(p),
                Err(error) => {
                    failures.push(OriginFailure { origin, error });
                    continue;
                }
            }
        } else {
            None
        };
        match forecast_at_origin(spec, series, calendar, origin, HORIZON, fit.as_deref()) {
            Ok(f) => per_origin.push(sample(series, origin, &f)),
            Err(e) => failures.push(OriginFailure {
                origin,
                error: e.to_string(),
            }),
        }
    }
    summarize(series.key, spec.label(), plan.steps, per_origin, failures)
}

fn summarize(
    key: SeriesKey,
    model: String,
    steps: usize,
    per_origin: Vec<OriginSample>,
    failures: Vec<OriginFailure>,
) -> BacktestResult {
    let a1: Vec<f64> = per_origin.iter().map(|s| s.actual_1mo).collect();
    let f1: Vec<f64> = per_origin.iter().map(|s| s.forecast_1mo).collect();
    let (a3, f3): (Vec<f64>, Vec<f64>) = per_origin
        .iter()
        .filter_map(|s| Some((s.actual_3mo?, s.forecast_3mo?)))
        .unzip();
    let pooled = |a: &[f64], f: &[f64]| {
        if a.is_empty() {
            None
        } else {
            wape(a, f).expect("equal non-empty lengths")
        }
    };
    BacktestResult {
        key,
        model,
        steps,
        wape_1mo: pooled(&a1, &f1),
        wape_3mo: pooled(&a3, &f3),
        n_monthly: a1.len(),
        n_quarterly: a3.len(),
        per_origin,
        failures,
    }
}

/// Backtests one series. Global models are retrained at every origin on all
/// bundle series cut at that month.
pub fn run_backtest(
    series: &MonthlySeries,
    spec: &ForecasterSpec,
    bundle: &DatasetBundle,
    calendar: &HolidayCalendar,
) -> Result<BacktestResult> {
    let plan = BacktestPlan::for_series(series).ok_or_else(|| {
        ArenaError::InsufficientData(format!(
            "series {} has {} months; backtesting needs {}",
            series.key,
            series.len(),
            MIN_HISTORY_MONTHS + MIN_STEPS
        ))
    })?;
    Ok(run_plan(series, spec, calendar, &plan, &|o| {
        fit_global_at(spec, bundle, o)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub activity_window: usize,
    /// Worker threads; `None` uses every available core.
    pub parallelism: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            activity_window: crate::portfolio::DEFAULT_ACTIVITY_WINDOW,
            parallelism: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub table: ResultTable,
    pub results: Vec<BacktestResult>,
    pub not_backtestable: Vec<SeriesKey>,
}

impl SuiteOutput {
    pub fn failed_origins(&self) -> usize {
        self.results.iter().map(|r| r.failures.len()).sum()
    }
}

fn pool(parallelism: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(p) = parallelism {
        b = b.num_threads(p.max(1));
    }
    b.build()
        .map_err(|e| ArenaError::InvalidArgument(format!("thread pool: {e}")))
}

fn check_labels(specs: &[ForecasterSpec]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in specs {
        if !seen.insert(s.label()) {
            return Err(ArenaError::InvalidArgument(format!(
                "two forecasters share the label `{}`",
                s.label()
            )));
        }
    }
    Ok(())
}

/// Backtests every (series, spec) pair of `bundle`.
///
/// Output order never depends on scheduling: pairs are evaluated in parallel
/// but collected in (series, spec) order, and rows are sorted afterwards.
pub fn run_suite(
    bundle: &DatasetBundle,
    specs: &[ForecasterSpec],
    importance: &[ImportanceEntry],
    options: &SuiteOptions,
) -> Result<SuiteOutput> {
    run_suite_inner(bundle, specs, importance, options, None)
}

/// Like [`run_suite`], with test origins restricted so that the first
/// forecast month of every origin lies inside `window`. Data after
/// `window.end` is ignored entirely.
pub fn run_suite_in_window(
    bundle: &DatasetBundle,
    specs: &[ForecasterSpec],
    importance: &[ImportanceEntry],
    options: &SuiteOptions,
    window: &MonthRange,
) -> Result<SuiteOutput> {
    run_suite_inner(bundle, specs, importance, options, Some(window))
}

fn run_suite_inner(
    bundle: &DatasetBundle,
    specs: &[ForecasterSpec],
    importance: &[ImportanceEntry],
    options: &SuiteOptions,
    window: Option<&MonthRange>,
) -> Result<SuiteOutput> {
    if specs.is_empty() {
        return Err(ArenaError::InvalidArgument(
            "no forecasters configured".into(),
        ));
    }
    check_labels(specs)?;
    let data = match window {
        Some(w) => bundle.truncated_at(w.end),
        None => bundle.clone(),
    };
    let ranks = rank_lookup(importance);

    let mut planned = Vec::new();
    let mut not_backtestable = Vec::new();
    for s in data.series.values() {
        let plan = match window {
            Some(w) => BacktestPlan::in_window(s, w),
            None => BacktestPlan::for_series(s),
        };
        match (plan, ranks.get(&s.key.item)) {
            (Some(p), Some(_)) => planned.push((s, p)),
            _ => not_backtestable.push(s.key),
        }
    }
    if planned.is_empty() {
        return Err(ArenaError::NothingToBacktest);
    }

    let pool = pool(options.parallelism)?;
    let calendar = &data.holidays;
    let results: Vec<BacktestResult> = pool.install(|| {
        // One global fit per (spec, origin month), shared by every series.
        let needed: Vec<(usize, Month)> = specs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_global())
            .flat_map(|(i, _)| {
                planned
                    .iter()
                    .flat_map(|(_, p)| p.origins.iter().copied())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .map(move |o| (i, o))
            })
            .collect();
        let fits: BTreeMap<(usize, Month), GlobalFit> = needed
            .par_iter()
            .map(|&(i, o)| ((i, o), fit_global_at(&specs[i], &data, o)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect();

        let pairs: Vec<(usize, usize)> = (0..planned.len())
            .flat_map(|s| (0..specs.len()).map(move |k| (s, k)))
            .collect();
        pairs
            .par_iter()
            .map(|&(si, ki)| {
                let (series, plan) = &planned[si];
                let lookup = |o: Month| {
                    fits.get(&(ki, o))
                        .cloned()
                        .unwrap_or_else(|| Err(format!("no global fit at {o}")))
                };
                run_plan(series, &specs[ki], calendar, plan, &lookup)
            })
            .collect()
    });

    let mut rows: Vec<ResultRow> = results
        .iter()
        .map(|r| {
            let series = &data.series[&r.key];
            let class = classify_series(series, options.activity_window);
            ResultRow {
                key: r.key,
                model: r.model.clone(),
                wape_1mo: r.wape_1mo,
                wape_3mo: r.wape_3mo,
                n_monthly: r.n_monthly,
                n_quarterly: r.n_quarterly,
                importance_rank: ranks[&r.key.item],
                history: class.history,
                activity: class.activity,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.importance_rank, a.key, &a.model).cmp(&(b.importance_rank, b.key, &b.model))
    });
    Ok(SuiteOutput {
        table: ResultTable { rows },
        results,
        not_backtestable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: usize) -> MonthlySeries {
        MonthlySeries {
            key: SeriesKey::new(1, 1),
            start_month: Month::new(2015, 1).unwrap(),
            quantities: (0..n).map(|t| 10.0 + (t % 12) as f64).collect(),
            prices: vec![1.0; n],
        }
    }

    #[test]
    fn step_rule() {
        assert_eq!(backtest_steps(36), Some(12));
        assert_eq!(backtest_steps(24), Some(6));
        assert_eq!(backtest_steps(23), None);
        assert_eq!(backtest_steps(27), Some(9));
        assert_eq!(backtest_steps(30), Some(12));
    }

    #[test]
    fn wape_examples() {
        assert_eq!(wape(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), Some(0.0));
        let w = wape(&[10.0, 20.0, 30.0], &[12.0, 18.0, 33.0])
            .unwrap()
            .unwrap();
        assert!((w - 7.0 / 60.0).abs() < 1e-15);
        assert_eq!(wape(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), None);
        assert!(wape(&[1.0], &[1.0, 2.0]).is_err());
        assert!(wape(&[], &[]).is_err());
    }

    #[test]
    fn plan_uses_last_origins() {
        let s = series(30);
        let p = BacktestPlan::for_series(&s).unwrap();
        assert_eq!(p.steps, 12);
        assert_eq!(p.origins.first(), Some(&s.month_at(17)));
        assert_eq!(p.origins.last(), Some(&s.month_at(28)));
        assert!(BacktestPlan::for_series(&series(23)).is_none());
    }

    #[test]
    fn window_plan() {
        let s = series(48);
        let w = MonthRange::new(s.month_at(30), s.month_at(41)).unwrap();
        let cut = s.truncated_at(w.end).unwrap();
        let p = BacktestPlan::in_window(&cut, &w).unwrap();
        assert_eq!(p.steps, 12);
        assert_eq!(p.origins[0].succ(), w.start);
        assert_eq!(p.origins.last().unwrap().succ(), w.end);
        // window too early for 18 months of history
        let early = MonthRange::new(s.month_at(5), s.month_at(16)).unwrap();
        assert!(BacktestPlan::in_window(&s.truncated_at(early.end).unwrap(), &early).is_none());
    }

    #[test]
    fn sample_counts_for_periodic_naive() {
        let s = series(30);
        let spec = ForecasterSpec::simple(ForecasterKind::SeasonalNaive);
        let bundle = DatasetBundle::default();
        let r = run_backtest(&s, &spec, &bundle, &HolidayCalendar::default()).unwrap();
        assert_eq!((r.n_monthly, r.n_quarterly), (12, 10));
        assert_eq!(r.wape_1mo, Some(0.0));
        assert_eq!(r.wape_3mo, Some(0.0));

        let r = run_backtest(&series(24), &spec, &bundle, &HolidayCalendar::default()).unwrap();
        assert_eq!((r.n_monthly, r.n_quarterly), (6, 4));
        assert!(run_backtest(&series(20), &spec, &bundle, &HolidayCalendar::default()).is_err());
    }
}
