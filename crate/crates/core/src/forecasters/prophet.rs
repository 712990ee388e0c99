//! Per-series additive model: piecewise-linear trend, Fourier seasonality,
//! holiday counts and a standardized price regressor, fit by ridge least
//! squares.
//!
//! Time is measured in months since the first training month. The trend is
//!
//! ```text
//! g(t) = k·t + m + Σ_j δ_j · max(0, t − s_j)
//! ```
//!
//! and extends its last segment past the training window.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::linalg::{ridge_least_squares, Rows};
use super::Forecast;
use crate::dataset_io::{HolidayCalendar, MonthlySeries};
use crate::error::{ArenaError, Result};
use crate::month::Month;

pub const MIN_TRAINING_MONTHS: usize = 18;
pub const SEASONAL_PERIOD: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProphetLiteConfig {
    pub fourier_order: usize,
    /// `None` picks `min(5, n / 6)` for a training window of `n` months.
    pub n_changepoints: Option<usize>,
    pub changepoint_range: f64,
    pub lambda: f64,
}

impl Default for ProphetLiteConfig {
    fn default() -> Self {
        ProphetLiteConfig {
            fourier_order: 3,
            n_changepoints: None,
            changepoint_range: 0.8,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProphetLiteParams {
    pub k: f64,
    pub m: f64,
    pub changepoints: Vec<f64>,
    pub deltas: Vec<f64>,
    pub fourier_a: Vec<f64>,
    pub fourier_b: Vec<f64>,
    pub holiday_effects: BTreeMap<String, f64>,
    pub beta_price: f64,
    /// Mean and standard deviation of the training prices, used to
    /// standardize future prices.
    pub price_mean: f64,
    pub price_std: f64,
    pub train_origin: Month,
    pub train_len: usize,
}

pub fn trend_value(k: f64, m: f64, changepoints: &[f64], deltas: &[f64], t: f64) -> f64 {
    k * t
        + m
        + changepoints
            .iter()
            .zip(deltas)
            .map(|(s, d)| d * (t - s).max(0.0))
            .sum::<f64>()
}

/// `[cos(2πnt/P), sin(2πnt/P)]` for `n = 1..=order`, interleaved.
pub fn fourier_features(t: f64, order: usize, period: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * order);
    for n in 1..=order {
        let x = 2.0 * PI * n as f64 * t / period;
        out.push(x.cos());
        out.push(x.sin());
    }
    out
}

/// Number of configured days of each holiday that fall in `month`. Every
/// holiday name in the calendar is present in the result.
pub fn holiday_features(month: Month, calendar: &HolidayCalendar) -> BTreeMap<String, u32> {
    let mut out: BTreeMap<String, u32> = calendar.names().into_iter().map(|n| (n, 0)).collect();
    for (day, name) in &calendar.entries {
        if month.contains(*day) {
            *out.get_mut(name).expect("name collected above") += 1;
        }
    }
    out
}

/// Changepoint month indices spread evenly over the first `range` fraction
/// of an `n`-month window (index 0 is never a changepoint).
pub fn changepoint_grid(n: usize, count: usize, range: f64) -> Vec<f64> {
    let hist = (n as f64 * range).floor() as usize;
    if count == 0 || hist < 2 {
        return Vec::new();
    }
    let last = (hist - 1) as f64;
    let mut idx: Vec<usize> = (1..=count)
        .map(|i| (i as f64 * last / count as f64).round_ties_even() as usize)
        .filter(|&i| i > 0)
        .collect();
    idx.dedup();
    idx.into_iter().map(|i| i as f64).collect()
}

pub fn default_changepoint_count(n: usize) -> usize {
    (n / 6).min(5)
}

struct Layout {
    changepoints: Vec<f64>,
    order: usize,
    holidays: Vec<String>,
}

impl Layout {
    fn dim(&self) -> usize {
        2 + self.changepoints.len() + 2 * self.order + self.holidays.len() + 1
    }

    fn row(&self, t: f64, holiday_counts: &BTreeMap<String, u32>, price_z: f64) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        x.push(t);
        x.push(1.0);
        x.extend(self.changepoints.iter().map(|s| (t - s).max(0.0)));
        x.extend(fourier_features(t, self.order, SEASONAL_PERIOD));
        x.extend(self.holidays.iter().map(|h| f64::from(holiday_counts[h])));
        x.push(price_z);
        x
    }
}

/// Fits the additive model to a whole series (its last month is the origin).
pub fn fit_prophet_lite(
    series: &MonthlySeries,
    calendar: &HolidayCalendar,
    config: &ProphetLiteConfig,
) -> Result<ProphetLiteParams> {
    let n = series.len();
    if n < MIN_TRAINING_MONTHS {
        return Err(ArenaError::InsufficientData(format!(
            "series {} has {n} months, needs {MIN_TRAINING_MONTHS}",
            series.key
        )));
    }
    if config.lambda < 0.0 || !(0.0..=1.0).contains(&config.changepoint_range) {
        return Err(ArenaError::InvalidArgument(
            "lambda must be >= 0 and changepoint_range in [0, 1]".into(),
        ));
    }

    let count = config
        .n_changepoints
        .unwrap_or_else(|| default_changepoint_count(n));
    let layout = Layout {
        changepoints: changepoint_grid(n, count, config.changepoint_range),
        order: config.fourier_order,
        holidays: calendar.names(),
    };

    let price_mean = series.prices.iter().sum::<f64>() / n as f64;
    let var = series
        .prices
        .iter()
        .map(|p| (p - price_mean).powi(2))
        .sum::<f64>()
        / n as f64;
    let price_std = var.sqrt();
    let price_varies = price_std > 1e-12 * price_mean.abs().max(1.0);
    let price_std = if price_varies { price_std } else { 1.0 };

    let mut rows = Rows::new(layout.dim());
    for i in 0..n {
        let counts = holiday_features(series.month_at(i), calendar);
        let pz = (series.prices[i] - price_mean) / price_std;
        rows.push(&layout.row(i as f64, &counts, pz), series.quantities[i]);
    }

    // Columns that are identically zero over the training window (an absent
    // holiday, a constant price) carry no information; pin them to zero.
    let dim = layout.dim();
    let live: Vec<bool> = (0..dim)
        .map(|j| (0..n).any(|i| rows.row(i)[j] != 0.0))
        .collect();
    let mut reduced = Rows::new(live.iter().filter(|l| **l).count());
    let mut buf = Vec::with_capacity(reduced.dim);
    for (x, y) in rows.iter() {
        buf.clear();
        buf.extend(x.iter().zip(&live).filter(|(_, l)| **l).map(|(v, _)| *v));
        reduced.push(&buf, y);
    }
    let penalties: Vec<f64> = (0..dim)
        .filter(|j| live[*j])
        .map(|j| if j < 2 { 0.0 } else { config.lambda })
        .collect();
    let solved = ridge_least_squares(&reduced, &penalties)?;
    let mut w = vec![0.0; dim];
    let mut it = solved.into_iter();
    for j in 0..dim {
        if live[j] {
            w[j] = it.next().expect("one coefficient per live column");
        }
    }

    let c = layout.changepoints.len();
    let f0 = 2 + c;
    let h0 = f0 + 2 * layout.order;
    let fourier = &w[f0..h0];
    Ok(ProphetLiteParams {
        k: w[0],
        m: w[1],
        changepoints: layout.changepoints.clone(),
        deltas: w[2..f0].to_vec(),
        fourier_a: fourier.iter().step_by(2).copied().collect(),
        fourier_b: fourier.iter().skip(1).step_by(2).copied().collect(),
        holiday_effects: layout
            .holidays
            .iter()
            .cloned()
            .zip(w[h0..h0 + layout.holidays.len()].iter().copied())
            .collect(),
        beta_price: w[dim - 1],
        price_mean,
        price_std,
        train_origin: series.start_month,
        train_len: n,
    })
}

impl ProphetLiteParams {
    /// Raw (unclamped) model value at month offset `t` from the training
    /// origin.
    pub fn evaluate(&self, t: f64, calendar: &HolidayCalendar, price: f64) -> f64 {
        let trend = trend_value(self.k, self.m, &self.changepoints, &self.deltas, t);
        let seasonal: f64 = fourier_features(t, self.fourier_a.len(), SEASONAL_PERIOD)
            .chunks_exact(2)
            .zip(self.fourier_a.iter().zip(&self.fourier_b))
            .map(|(cs, (a, b))| a * cs[0] + b * cs[1])
            .sum();
        let month = self.train_origin.offset(t.round() as i64);
        let counts = holiday_features(month, calendar);
        let holiday: f64 = self
            .holiday_effects
            .iter()
            .map(|(name, kappa)| kappa * f64::from(counts.get(name).copied().unwrap_or(0)))
            .sum();
        let pz = (price - self.price_mean) / self.price_std;
        trend + seasonal + holiday + self.beta_price * pz
    }

    /// In-sample fitted values for the training series.
    pub fn fitted(&self, series: &MonthlySeries, calendar: &HolidayCalendar) -> Vec<f64> {
        (0..series.len())
            .map(|i| self.evaluate(i as f64, calendar, series.prices[i]))
            .collect()
    }
}

pub fn predict_prophet_lite(
    params: &ProphetLiteParams,
    origin: Month,
    horizon: usize,
    future_prices: &[f64],
    calendar: &HolidayCalendar,
) -> Result<Forecast> {
    if horizon == 0 {
        return Err(ArenaError::InvalidArgument(
            "horizon must be positive".into(),
        ));
    }
    if future_prices.len() != horizon {
        return Err(ArenaError::InvalidArgument(format!(
            "{} future prices for horizon {horizon}",
            future_prices.len()
        )));
    }
    let base = origin.since(params.train_origin);
    if base < 0 {
        return Err(ArenaError::InvalidArgument(format!(
            "origin {origin} precedes training origin {}",
            params.train_origin
        )));
    }
    let values = future_prices
        .iter()
        .enumerate()
        .map(|(h, p)| {
            let t = (base + h as i64 + 1) as f64;
            params.evaluate(t, calendar, *p).max(0.0)
        })
        .collect();
    Ok(Forecast {
        origin,
        horizon,
        values,
        quantile_tag: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::SeriesKey;
    use chrono::NaiveDate;

    fn series(q: Vec<f64>, p: Vec<f64>) -> MonthlySeries {
        MonthlySeries {
            key: SeriesKey::new(1, 1),
            start_month: Month::new(2018, 1).unwrap(),
            quantities: q,
            prices: p,
        }
    }

    #[test]
    fn trend_examples() {
        assert_eq!(trend_value(2.0, 1.0, &[], &[], 5.0), 11.0);
        assert_eq!(trend_value(2.0, 1.0, &[3.0], &[1.0], 5.0), 13.0);
        assert_eq!(trend_value(2.0, 1.0, &[3.0], &[1.0], 3.0), 7.0);
    }

    #[test]
    fn fourier_examples() {
        let f = fourier_features(0.0, 3, 12.0);
        assert_eq!(f, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let f = fourier_features(6.0, 1, 12.0);
        assert!((f[0] + 1.0).abs() < 1e-12 && f[1].abs() < 1e-12);
        let f = fourier_features(3.0, 1, 12.0);
        assert!(f[0].abs() < 1e-12 && (f[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holiday_examples() {
        let jan = Month::new(2021, 1).unwrap();
        assert!(holiday_features(jan, &HolidayCalendar::default()).is_empty());

        let mut cal = HolidayCalendar::default();
        for d in [1, 2] {
            cal.entries.insert((
                NaiveDate::from_ymd_opt(2021, 1, d).unwrap(),
                "New Year".to_string(),
            ));
        }
        assert_eq!(holiday_features(jan, &cal)["New Year"], 2);
        assert_eq!(holiday_features(jan.succ(), &cal)["New Year"], 0);
    }

    #[test]
    fn changepoint_grid_matches_even_spacing() {
        // 48 months, 80% -> 38 usable; linspace(0, 37, 6)[1..] rounded
        assert_eq!(
            changepoint_grid(48, 5, 0.8),
            vec![7.0, 15.0, 22.0, 30.0, 37.0]
        );
        assert_eq!(changepoint_grid(18, 3, 0.8), vec![4.0, 9.0, 13.0]);
        assert!(changepoint_grid(18, 0, 0.8).is_empty());
        assert_eq!(default_changepoint_count(18), 3);
        assert_eq!(default_changepoint_count(60), 5);
    }

    #[test]
    fn too_short_is_rejected() {
        let s = series(vec![1.0; 17], vec![1.0; 17]);
        let err = fit_prophet_lite(&s, &HolidayCalendar::default(), &Default::default());
        assert!(matches!(err, Err(ArenaError::InsufficientData(_))));
    }

    #[test]
    fn constant_series_gives_flat_model() {
        let s = series(vec![40.0; 30], vec![2.0; 30]);
        let p = fit_prophet_lite(&s, &HolidayCalendar::default(), &Default::default()).unwrap();
        assert!(p.k.abs() < 1e-6, "k = {}", p.k);
        assert!((p.m - 40.0).abs() < 1e-6);
        assert!(p
            .fourier_a
            .iter()
            .chain(&p.fourier_b)
            .all(|c| c.abs() < 1e-6));
        assert!(p.deltas.iter().all(|d| d.abs() < 1e-6));
    }

    #[test]
    fn huge_penalty_leaves_a_line() {
        let q: Vec<f64> = (0..36)
            .map(|t| 10.0 + 0.5 * t as f64 + 3.0 * (t as f64).sin())
            .collect();
        let p: Vec<f64> = (0..36).map(|t| 1.0 + 0.01 * t as f64).collect();
        let cfg = ProphetLiteConfig {
            lambda: 1e12,
            ..Default::default()
        };
        let fit =
            fit_prophet_lite(&series(q.clone(), p), &HolidayCalendar::default(), &cfg).unwrap();
        let pen: Vec<f64> = fit
            .deltas
            .iter()
            .chain(&fit.fourier_a)
            .chain(&fit.fourier_b)
            .copied()
            .chain([fit.beta_price])
            .collect();
        assert!(pen.iter().all(|c| c.abs() < 1e-6), "{pen:?}");
        // OLS line through the data
        let n = q.len() as f64;
        let tm = (n - 1.0) / 2.0;
        let ym = q.iter().sum::<f64>() / n;
        let sxy: f64 = q
            .iter()
            .enumerate()
            .map(|(t, y)| (t as f64 - tm) * (y - ym))
            .sum();
        let sxx: f64 = (0..q.len()).map(|t| (t as f64 - tm).powi(2)).sum();
        assert!((fit.k - sxy / sxx).abs() < 1e-4);
        assert!((fit.m - (ym - sxy / sxx * tm)).abs() < 1e-3);
    }

    #[test]
    fn linear_series_extrapolates() {
        let q: Vec<f64> = (0..24).map(|t| 100.0 + 3.0 * t as f64).collect();
        let s = series(q, vec![1.0; 24]);
        let cfg = ProphetLiteConfig {
            lambda: 0.0,
            fourier_order: 1,
            n_changepoints: Some(0),
            ..Default::default()
        };
        let p = fit_prophet_lite(&s, &HolidayCalendar::default(), &cfg).unwrap();
        let f = predict_prophet_lite(&p, s.end_month(), 1, &[1.0], &HolidayCalendar::default())
            .unwrap();
        assert!(
            (f.values[0] - (100.0 + 3.0 * 24.0)).abs() < 1e-6,
            "{:?}",
            f.values
        );
    }

    #[test]
    fn prediction_contract() {
        let p = ProphetLiteParams {
            k: 0.0,
            m: 5.0,
            changepoints: vec![],
            deltas: vec![],
            fourier_a: vec![0.0],
            fourier_b: vec![0.0],
            holiday_effects: BTreeMap::new(),
            beta_price: 0.0,
            price_mean: 1.0,
            price_std: 1.0,
            train_origin: Month::new(2020, 1).unwrap(),
            train_len: 18,
        };
        let cal = HolidayCalendar::default();
        let origin = Month::new(2021, 6).unwrap();
        let f = predict_prophet_lite(&p, origin, 3, &[1.0; 3], &cal).unwrap();
        assert_eq!(f.values, vec![5.0; 3]);
        assert!(predict_prophet_lite(&p, origin, 3, &[1.0; 2], &cal).is_err());

        let neg = ProphetLiteParams { m: -5.0, ..p };
        let f = predict_prophet_lite(&neg, origin, 2, &[1.0; 2], &cal).unwrap();
        assert_eq!(f.values, vec![0.0, 0.0]);
    }
}
