//! Seeded generator of benchmark-shaped data: items × organizations with
//! widely varying volumes, trend, yearly seasonality, price elasticity, a
//! holiday bump, intermittent demand for small items, some short histories
//! and some items that stopped selling.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::dataset_io::{DatasetBundle, HolidayCalendar, MonthlySeries, SeriesKey};
use crate::month::Month;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub items: usize,
    pub orgs: usize,
    pub end: Month,
    pub max_months: usize,
    /// Fraction of series with fewer than 24 months.
    pub short_fraction: f64,
    /// Fraction of series with no sales in their final months.
    pub inactive_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            items: 50,
            orgs: 4,
            end: Month::new(2021, 3).expect("valid month"),
            max_months: 84,
            short_fraction: 0.04,
            inactive_fraction: 0.03,
            seed: 7,
        }
    }
}

/// Fixed-date public holidays of Bosnia and Herzegovina for `years`.
pub fn fixed_holidays(years: std::ops::RangeInclusive<i32>) -> HolidayCalendar {
    let days: [(u32, u32, &str); 9] = [
        (1, 1, "New Year"),
        (1, 2, "New Year"),
        (1, 7, "Orthodox Christmas"),
        (3, 1, "Independence Day"),
        (5, 1, "Labour Day"),
        (5, 2, "Labour Day"),
        (11, 25, "Statehood Day"),
        (12, 25, "Catholic Christmas"),
        (12, 31, "New Year Eve"),
    ];
    let mut cal = HolidayCalendar::default();
    for y in years {
        for (m, d, name) in days {
            cal.entries.insert((
                NaiveDate::from_ymd_opt(y, m, d).expect("valid date"),
                name.to_string(),
            ));
        }
    }
    cal
}

pub fn generate(cfg: &SynthConfig) -> DatasetBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let volume = LogNormal::new(5.0, 1.5).expect("valid");
    let noise = Normal::new(0.0, 1.0).expect("valid");
    let mut series = BTreeMap::new();
    for i in 0..cfg.items {
        let item = 3_900_000 + 97 * i as u64;
        let base_price: f64 = rng.random_range(0.3..25.0);
        let item_volume = volume.sample(&mut rng);
        let item_season: f64 = rng.random_range(0.0..0.35);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        for o in 0..cfg.orgs {
            let org = 1_617_000 + 388 * o as u64;
            let key = SeriesKey::new(item, org);
            let r: f64 = rng.random();
            let len = if r < cfg.short_fraction {
                rng.random_range(18..24)
            } else {
                rng.random_range(30..=cfg.max_months.max(30))
            };
            let inactive = rng.random::<f64>() < cfg.inactive_fraction;
            let level = item_volume * rng.random_range(0.3..1.7);
            let slope = level * rng.random_range(-0.01..0.015);
            let elasticity: f64 = rng.random_range(0.5..2.0);
            let start = cfg.end.offset(1 - len as i64);
            let mut quantities = Vec::with_capacity(len);
            let mut prices = Vec::with_capacity(len);
            let mut price = base_price * rng.random_range(0.9..1.1);
            for t in 0..len {
                let month = start.offset(t as i64);
                price *= 1.0 + 0.004 + 0.02 * noise.sample(&mut rng);
                price = price.max(0.05);
                let season = 1.0
                    + item_season
                        * (std::f64::consts::TAU * month.month0() as f64 / 12.0 + phase).sin();
                let holiday = if month.month() == 12 { 1.15 } else { 1.0 };
                let price_effect = (price / base_price).powf(-elasticity).clamp(0.2, 3.0);
                let mean = ((level + slope * t as f64) * season * holiday * price_effect).max(0.0);
                let mut q = mean * (1.0 + 0.12 * noise.sample(&mut rng));
                if mean < 20.0 && rng.random::<f64>() < 0.3 {
                    q = 0.0;
                }
                if inactive && t + 4 >= len {
                    q = 0.0;
                }
                quantities.push(q.max(0.0).round());
                prices.push((price * 1e6).round() / 1e6);
            }
            series.insert(
                key,
                MonthlySeries {
                    key,
                    start_month: start,
                    quantities,
                    prices,
                },
            );
        }
    }
    let first_year = cfg.end.offset(1 - cfg.max_months as i64).year();
    DatasetBundle {
        series,
        holidays: fixed_holidays(first_year..=cfg.end.year()),
    }
}
