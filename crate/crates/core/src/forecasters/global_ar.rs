//! One linear autoregressive model shared by every series.
//!
//! Each series is divided by its own scale (mean training quantity) so that
//! items selling ten units and items selling ten thousand land on the same
//! footing. A training row pools
//!
//! ```text
//! [z(t-1) .. z(t-L), month-of-year one-hot (12), p(t)/p̄ − 1, 1]  ->  z(t)
//! ```
//!
//! from all series. The squared-loss fit is a ridge solve; the quantile
//! variant minimizes the mean pinball loss by subgradient descent started
//! from the squared-loss solution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::linalg::{dot, ridge_least_squares, Rows};
use super::{pinball_loss, Forecast};
use crate::dataset_io::{MonthlySeries, SeriesKey};
use crate::error::{ArenaError, Result};
use crate::month::Month;

pub const SCALE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalArConfig {
    pub lags: usize,
    pub lambda: f64,
    pub quantile: Option<f64>,
    pub epochs: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for GlobalArConfig {
    fn default() -> Self {
        GlobalArConfig {
            lags: 12,
            lambda: 1e-3,
            quantile: None,
            epochs: 500,
            step: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesScale {
    pub key: SeriesKey,
    pub scale: f64,
    pub price_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalARParams {
    pub lags: usize,
    pub weights: Vec<f64>,
    #[serde(with = "scale_list")]
    pub scales: BTreeMap<SeriesKey, SeriesScale>,
    pub quantile: Option<f64>,
}

mod scale_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<SeriesKey, SeriesScale>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<SeriesKey, SeriesScale>, D::Error> {
        let list = Vec::<SeriesScale>::deserialize(d)?;
        Ok(list.into_iter().map(|s| (s.key, s)).collect())
    }
}

pub fn feature_dim(lags: usize) -> usize {
    lags + 14
}

/// Scale factors for one series over its (already truncated) history.
pub fn series_scale(series: &MonthlySeries) -> SeriesScale {
    let n = series.len().max(1) as f64;
    SeriesScale {
        key: series.key,
        scale: (series.quantities.iter().sum::<f64>() / n).max(SCALE_FLOOR),
        price_scale: series.prices.iter().sum::<f64>() / n,
    }
}

fn write_features(out: &mut Vec<f64>, lag_window: &[f64], month: Month, price_feature: f64) {
    out.clear();
    // most recent first
    out.extend(lag_window.iter().rev());
    let mut onehot = [0.0; 12];
    onehot[month.month0()] = 1.0;
    out.extend(onehot);
    out.push(price_feature);
    out.push(1.0);
}

/// Pooled training rows over every series long enough to supply `lags`
/// history months, plus the scale table.
pub fn training_rows(
    training: &BTreeMap<SeriesKey, MonthlySeries>,
    lags: usize,
) -> (Rows, BTreeMap<SeriesKey, SeriesScale>) {
    let mut rows = Rows::new(feature_dim(lags));
    let mut scales = BTreeMap::new();
    let mut buf = Vec::with_capacity(feature_dim(lags));
    for (key, s) in training {
        if s.len() < lags + 1 {
            continue;
        }
        let sc = series_scale(s);
        let z: Vec<f64> = s.quantities.iter().map(|q| q / sc.scale).collect();
        for t in lags..s.len() {
            let pf = s.prices[t] / sc.price_scale - 1.0;
            write_features(&mut buf, &z[t - lags..t], s.month_at(t), pf);
            rows.push(&buf, z[t]);
        }
        scales.insert(*key, sc);
    }
    (rows, scales)
}

pub fn pinball_objective(rows: &Rows, weights: &[f64], q: f64) -> f64 {
    rows.iter()
        .map(|(x, y)| pinball_loss(y, dot(x, weights), q).expect("q validated"))
        .sum::<f64>()
        / rows.len() as f64
}

/// Subgradient of the mean pinball loss with respect to the weights. At a
/// residual of exactly zero the right-hand derivative is used.
pub fn pinball_subgradient(rows: &Rows, weights: &[f64], q: f64) -> Vec<f64> {
    let mut g = vec![0.0; rows.dim];
    for (x, y) in rows.iter() {
        let r = y - dot(x, weights);
        let psi = if r < 0.0 { q - 1.0 } else { q };
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi -= psi * xi;
        }
    }
    let n = rows.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    g
}

/// Deterministic subgradient descent, step `step / sqrt(epoch)`; returns the
/// iterate with the lowest objective seen.
pub fn fit_pinball(rows: &Rows, init: &[f64], q: f64, epochs: usize, step: f64) -> Vec<f64> {
    let mut w = init.to_vec();
    let mut best = w.clone();
    let mut best_obj = pinball_objective(rows, &w, q);
    for epoch in 1..=epochs {
        let g = pinball_subgradient(rows, &w, q);
        let eta = step / (epoch as f64).sqrt();
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= eta * gi;
        }
        let obj = pinball_objective(rows, &w, q);
        if obj < best_obj {
            best_obj = obj;
            best.clone_from(&w);
        }
    }
    best
}

pub fn fit_global_ar(
    training: &BTreeMap<SeriesKey, MonthlySeries>,
    config: &GlobalArConfig,
) -> Result<GlobalARParams> {
    if config.lags == 0 {
        return Err(ArenaError::InvalidArgument("lags must be positive".into()));
    }
    if let Some(q) = config.quantile {
        if !(q > 0.0 && q < 1.0) {
            return Err(ArenaError::InvalidArgument(format!(
                "quantile {q} outside (0, 1)"
            )));
        }
    }
    let (rows, scales) = training_rows(training, config.lags);
    if rows.is_empty() {
        return Err(ArenaError::InsufficientData(format!(
            "no series has the {} months a {}-lag model needs",
            config.lags + 1,
            config.lags
        )));
    }
    let penalties = vec![config.lambda; rows.dim];
    let mut weights = ridge_least_squares(&rows, &penalties)?;
    if let Some(q) = config.quantile {
        weights = fit_pinball(&rows, &weights, q, config.epochs, config.step);
    }
    Ok(GlobalARParams {
        lags: config.lags,
        weights,
        scales,
        quantile: config.quantile,
    })
}

/// Recursive multi-step forecast from `origin`, which must be a month of
/// `series` with at least `lags` observations up to and including it.
pub fn predict_global_ar(
    params: &GlobalARParams,
    series: &MonthlySeries,
    origin: Month,
    horizon: usize,
    future_prices: &[f64],
) -> Result<Forecast> {
    let scale = params.scales.get(&series.key).ok_or_else(|| {
        ArenaError::InvalidArgument(format!("no scale for series {}", series.key))
    })?;
    predict_with_scale(params, scale, series, origin, horizon, future_prices)
}

pub fn predict_with_scale(
    params: &GlobalARParams,
    scale: &SeriesScale,
    series: &MonthlySeries,
    origin: Month,
    horizon: usize,
    future_prices: &[f64],
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
    let lags = params.lags;
    let end = series
        .index_of(origin)
        .ok_or_else(|| ArenaError::InvalidArgument(format!("origin {origin} outside series")))?;
    if end + 1 < lags {
        return Err(ArenaError::InsufficientData(format!(
            "series {} has {} months at {origin}, needs {lags}",
            series.key,
            end + 1
        )));
    }
    let mut window: Vec<f64> = series.quantities[end + 1 - lags..=end]
        .iter()
        .map(|q| q / scale.scale)
        .collect();
    let mut buf = Vec::with_capacity(feature_dim(lags));
    let mut values = Vec::with_capacity(horizon);
    for (h, price) in future_prices.iter().enumerate() {
        let month = origin.offset(h as i64 + 1);
        write_features(
            &mut buf,
            &window[window.len() - lags..],
            month,
            price / scale.price_scale - 1.0,
        );
        let z = dot(&buf, &params.weights).max(0.0);
        window.push(z);
        values.push(z * scale.scale);
    }
    Ok(Forecast {
        origin,
        horizon,
        values,
        quantile_tag: params.quantile,
    })
}
