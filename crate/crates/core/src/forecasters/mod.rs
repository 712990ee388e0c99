//! Forecaster families behind a single spec type.
//!
//! * `prophet_lite` — per-series additive model ([`prophet`]).
//! * `global_ar` — one autoregressive model over all series with per-series
//!   rescaling; with a `quantile` hyperparameter it is labeled `global_ar_q`
//!   and trained on the pinball loss ([`global_ar`]).
//! * `seasonal_naive` — same month last year.

pub mod global_ar;
pub mod linalg;
pub mod prophet;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset_io::MonthlySeries;
use crate::error::{ArenaError, Result};
use crate::month::Month;

pub use global_ar::{fit_global_ar, predict_global_ar, GlobalARParams, GlobalArConfig};
pub use prophet::{
    fit_prophet_lite, fourier_features, holiday_features, predict_prophet_lite, trend_value,
    ProphetLiteConfig, ProphetLiteParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    /// Last month of the training data.
    pub origin: Month,
    pub horizon: usize,
    pub values: Vec<f64>,
    pub quantile_tag: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecasterKind {
    ProphetLite,
    GlobalAr,
    SeasonalNaive,
}

impl ForecasterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ForecasterKind::ProphetLite => "prophet_lite",
            ForecasterKind::GlobalAr => "global_ar",
            ForecasterKind::SeasonalNaive => "seasonal_naive",
        }
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            ForecasterKind::ProphetLite => &[
                "fourier_order",
                "changepoints",
                "changepoint_range",
                "lambda",
            ],
            ForecasterKind::GlobalAr => &["lags", "lambda", "quantile", "epochs", "step"],
            ForecasterKind::SeasonalNaive => &["period"],
        }
    }
}

impl fmt::Display for ForecasterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ForecasterKind {
    type Err = ArenaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prophet_lite" => Ok(ForecasterKind::ProphetLite),
            "global_ar" => Ok(ForecasterKind::GlobalAr),
            "seasonal_naive" => Ok(ForecasterKind::SeasonalNaive),
            other => Err(ArenaError::InvalidArgument(format!(
                "unknown forecaster kind `{other}`"
            ))),
        }
    }
}

/// A forecaster family plus its hyperparameters. Construction validates
/// every key and value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterSpec {
    pub kind: ForecasterKind,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
}

fn whole(key: &str, v: f64, min: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < min || v > 1e6 {
        return Err(ArenaError::InvalidArgument(format!(
            "hyperparameter {key} = {v} must be an integer >= {min}"
        )));
    }
    Ok(v as usize)
}

impl ForecasterSpec {
    pub fn new(
        kind: ForecasterKind,
        hyperparameters: BTreeMap<String, f64>,
        seed: u64,
    ) -> Result<Self> {
        for key in hyperparameters.keys() {
            if !kind.allowed_keys().contains(&key.as_str()) {
                return Err(ArenaError::InvalidArgument(format!(
                    "unknown hyperparameter `{key}` for {kind}"
                )));
            }
        }
        let spec = ForecasterSpec {
            kind,
            hyperparameters,
            seed,
        };
        match kind {
            ForecasterKind::ProphetLite => {
                spec.prophet_config()?;
            }
            ForecasterKind::GlobalAr => {
                spec.global_config()?;
            }
            ForecasterKind::SeasonalNaive => {
                spec.period()?;
            }
        }
        Ok(spec)
    }

    pub fn simple(kind: ForecasterKind) -> Self {
        ForecasterSpec {
            kind,
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Result<Self> {
        self.hyperparameters.insert(key.to_string(), value);
        ForecasterSpec::new(self.kind, self.hyperparameters, self.seed)
    }

    /// Report label: the kind name, with `global_ar` trained on a quantile
    /// labeled `global_ar_q`.
    pub fn label(&self) -> String {
        match self.kind {
            ForecasterKind::GlobalAr if self.hyperparameters.contains_key("quantile") => {
                "global_ar_q".to_string()
            }
            k => k.as_str().to_string(),
        }
    }

    pub fn is_global(&self) -> bool {
        self.kind == ForecasterKind::GlobalAr
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.hyperparameters.get(key).copied()
    }

    pub fn prophet_config(&self) -> Result<ProphetLiteConfig> {
        let mut cfg = ProphetLiteConfig::default();
        if let Some(v) = self.get("fourier_order") {
            cfg.fourier_order = whole("fourier_order", v, 1.0)?;
            if cfg.fourier_order > 6 {
                return Err(ArenaError::InvalidArgument(
                    "fourier_order above 6 aliases on monthly data".into(),
                ));
            }
        }
        if let Some(v) = self.get("changepoints") {
            cfg.n_changepoints = Some(whole("changepoints", v, 0.0)?);
        }
        if let Some(v) = self.get("changepoint_range") {
            if !(0.0..=1.0).contains(&v) {
                return Err(ArenaError::InvalidArgument(
                    "changepoint_range must lie in [0, 1]".into(),
                ));
            }
            cfg.changepoint_range = v;
        }
        if let Some(v) = self.get("lambda") {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ArenaError::InvalidArgument("lambda must be >= 0".into()));
            }
            cfg.lambda = v;
        }
        Ok(cfg)
    }

    pub fn global_config(&self) -> Result<GlobalArConfig> {
        let mut cfg = GlobalArConfig {
            seed: self.seed,
            ..Default::default()
        };
        if let Some(v) = self.get("lags") {
            cfg.lags = whole("lags", v, 1.0)?;
        }
        if let Some(v) = self.get("lambda") {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ArenaError::InvalidArgument("lambda must be >= 0".into()));
            }
            cfg.lambda = v;
        }
        if let Some(v) = self.get("quantile") {
            if !(v > 0.0 && v < 1.0) {
                return Err(ArenaError::InvalidArgument(format!(
                    "quantile {v} outside (0, 1)"
                )));
            }
            cfg.quantile = Some(v);
        }
        if let Some(v) = self.get("epochs") {
            cfg.epochs = whole("epochs", v, 0.0)?;
        }
        if let Some(v) = self.get("step") {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ArenaError::InvalidArgument("step must be > 0".into()));
            }
            cfg.step = v;
        }
        Ok(cfg)
    }

    pub fn period(&self) -> Result<usize> {
        match self.get("period") {
            Some(v) => whole("period", v, 1.0),
            None => Ok(12),
        }
    }
}

/// Asymmetric absolute loss whose minimizer is the `q`-quantile.
pub fn pinball_loss(actual: f64, predicted: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(ArenaError::InvalidArgument(format!(
            "quantile {q} outside (0, 1)"
        )));
    }
    Ok(if actual >= predicted {
        q * (actual - predicted)
    } else {
        (1.0 - q) * (predicted - actual)
    })
}

/// Repeats the value from one `period` earlier. Months before the start of
/// the series fall back to the last observed value.
pub fn seasonal_naive_with_period(
    series: &MonthlySeries,
    origin: Month,
    horizon: usize,
    period: usize,
) -> Result<Forecast> {
    if series.is_empty() {
        return Err(ArenaError::InsufficientData("empty series".into()));
    }
    if horizon == 0 {
        return Err(ArenaError::InvalidArgument(
            "horizon must be positive".into(),
        ));
    }
    let end = series
        .index_of(origin)
        .ok_or_else(|| ArenaError::InvalidArgument(format!("origin {origin} outside series")))?;
    let last = series.quantities[end];
    let values = (1..=horizon)
        .map(|h| {
            let back = period as i64 - ((h - 1) % period) as i64;
            let src = end as i64 + 1 - back;
            if src >= 0 {
                series.quantities[src as usize]
            } else {
                last
            }
        })
        .collect();
    Ok(Forecast {
        origin,
        horizon,
        values,
        quantile_tag: None,
    })
}

pub fn seasonal_naive(series: &MonthlySeries, origin: Month, horizon: usize) -> Result<Forecast> {
    seasonal_naive_with_period(series, origin, horizon, 12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::SeriesKey;

    fn series(q: Vec<f64>) -> MonthlySeries {
        let n = q.len();
        MonthlySeries {
            key: SeriesKey::new(1, 1),
            start_month: Month::new(2019, 1).unwrap(),
            quantities: q,
            prices: vec![1.0; n],
        }
    }

    #[test]
    fn pinball_examples() {
        assert_eq!(pinball_loss(3.0, 3.0, 0.3).unwrap(), 0.0);
        assert_eq!(pinball_loss(10.0, 8.0, 0.5).unwrap(), 1.0);
        assert!((pinball_loss(8.0, 10.0, 0.9).unwrap() - 0.2).abs() < 1e-12);
        assert!(pinball_loss(1.0, 1.0, 0.0).is_err());
        assert!(pinball_loss(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn seasonal_naive_examples() {
        let q: Vec<f64> = (0..24).map(|t| t as f64).collect();
        let s = series(q);
        let f = seasonal_naive(&s, s.end_month(), 1).unwrap();
        assert_eq!(f.values, vec![12.0]);
        let f = seasonal_naive(&s, s.end_month(), 3).unwrap();
        assert_eq!(f.values, vec![12.0, 13.0, 14.0]);
        let f = seasonal_naive(&s, s.end_month(), 14).unwrap();
        assert_eq!(f.values[12..], [12.0, 13.0]);
        assert!(seasonal_naive(&s, s.end_month(), 0).is_err());

        let short = series(vec![4.0, 5.0]);
        let f = seasonal_naive(&short, short.end_month(), 2).unwrap();
        assert_eq!(f.values, vec![5.0, 5.0]);

        assert!(seasonal_naive(&series(vec![]), Month::new(2019, 1).unwrap(), 1).is_err());
    }

    #[test]
    fn spec_validation() {
        let spec = ForecasterSpec::simple(ForecasterKind::GlobalAr);
        assert_eq!(spec.label(), "global_ar");
        assert_eq!(
            spec.clone().with("quantile", 0.5).unwrap().label(),
            "global_ar_q"
        );
        assert!(spec.clone().with("quantile", 1.5).is_err());
        assert!(spec.clone().with("fourier_order", 3.0).is_err());
        let p = ForecasterSpec::simple(ForecasterKind::ProphetLite);
        assert!(p.clone().with("fourier_order", 2.5).is_err());
        assert_eq!(
            p.with("fourier_order", 2.0)
                .unwrap()
                .prophet_config()
                .unwrap()
                .fourier_order,
            2
        );
        assert!("arima".parse::<ForecasterKind>().is_err());
    }
}
