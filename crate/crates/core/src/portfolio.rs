//! Item importance ranking, series classification and portfolio selection.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset_io::{DatasetBundle, MonthlySeries};
use crate::error::{ArenaError, Result};

/// Months of history at which a series counts as long.
pub const LONG_HISTORY_MONTHS: usize = 24;
pub const DEFAULT_ACTIVITY_WINDOW: usize = 3;
pub const DEFAULT_TOP_N: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub item: u64,
    pub revenue: f64,
    /// 1 = most important.
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryClass {
    Long,
    Short,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Active,
    Inactive,
}

impl HistoryClass {
    pub fn as_str(self) -> &'static str {
        match self {
            HistoryClass::Long => "long",
            HistoryClass::Short => "short",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "long" => Some(HistoryClass::Long),
            "short" => Some(HistoryClass::Short),
            _ => None,
        }
    }
}

impl Activity {
    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Active => "active",
            Activity::Inactive => "inactive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "active" => Some(Activity::Active),
            "inactive" => Some(Activity::Inactive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesClass {
    pub history: HistoryClass,
    pub activity: Activity,
    pub history_months: usize,
}

/// Revenue per item (summed over organizations and months), ranked
/// descending. Equal revenues rank by ascending item id.
pub fn importance_table(bundle: &DatasetBundle) -> Vec<ImportanceEntry> {
    let mut revenue: BTreeMap<u64, f64> = BTreeMap::new();
    for s in bundle.series.values() {
        let r: f64 = s.quantities.iter().zip(&s.prices).map(|(q, p)| q * p).sum();
        *revenue.entry(s.key.item).or_insert(0.0) += r;
    }
    let mut entries: Vec<(u64, f64)> = revenue.into_iter().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries
        .into_iter()
        .enumerate()
        .map(|(i, (item, revenue))| ImportanceEntry {
            item,
            revenue,
            rank: i + 1,
        })
        .collect()
}

pub fn rank_lookup(table: &[ImportanceEntry]) -> BTreeMap<u64, usize> {
    table.iter().map(|e| (e.item, e.rank)).collect()
}

/// Long history means at least 24 months; active means some sale in the
/// final `activity_window` months.
pub fn classify_series(series: &MonthlySeries, activity_window: usize) -> SeriesClass {
    let n = series.len();
    let tail = &series.quantities[n.saturating_sub(activity_window)..];
    SeriesClass {
        history: if n >= LONG_HISTORY_MONTHS {
            HistoryClass::Long
        } else {
            HistoryClass::Short
        },
        activity: if tail.iter().any(|q| *q > 0.0) {
            Activity::Active
        } else {
            Activity::Inactive
        },
        history_months: n,
    }
}

/// Restricts the bundle to series of the `top_n` most important items.
pub fn select_portfolio(
    bundle: &DatasetBundle,
    table: &[ImportanceEntry],
    top_n: usize,
) -> Result<DatasetBundle> {
    if top_n == 0 || top_n > table.len() {
        return Err(ArenaError::InvalidArgument(format!(
            "top_n = {top_n} but the dataset has {} items",
            table.len()
        )));
    }
    let ranks = rank_lookup(table);
    Ok(DatasetBundle {
        series: bundle
            .series
            .iter()
            .filter(|(k, _)| ranks.get(&k.item).is_some_and(|r| *r <= top_n))
            .map(|(k, s)| (*k, s.clone()))
            .collect(),
        holidays: bundle.holidays.clone(),
    })
}

pub fn write_importance_csv(table: &[ImportanceEntry], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["item", "revenue", "rank"])?;
    for e in table {
        w.write_record([
            e.item.to_string(),
            e.revenue.to_string(),
            e.rank.to_string(),
        ])?;
    }
    w.flush().map_err(|e| ArenaError::io("importance.csv", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::SeriesKey;
    use crate::month::Month;

    fn series(item: u64, org: u64, q: Vec<f64>, p: f64) -> MonthlySeries {
        let n = q.len();
        MonthlySeries {
            key: SeriesKey::new(item, org),
            start_month: Month::new(2020, 1).unwrap(),
            quantities: q,
            prices: vec![p; n],
        }
    }

    fn bundle(list: Vec<MonthlySeries>) -> DatasetBundle {
        DatasetBundle {
            series: list.into_iter().map(|s| (s.key, s)).collect(),
            holidays: Default::default(),
        }
    }

    #[test]
    fn revenue_of_the_sample_row() {
        let b = bundle(vec![series(3959294, 1617388, vec![3718.0], 0.611830413)]);
        let t = importance_table(&b);
        assert!((t[0].revenue - 2274.79).abs() < 0.01, "{}", t[0].revenue);
        assert_eq!(t[0].rank, 1);
    }

    #[test]
    fn zero_revenue_still_ranked() {
        let b = bundle(vec![series(1, 1, vec![0.0, 0.0], 2.0)]);
        let t = importance_table(&b);
        assert_eq!(t[0].revenue, 0.0);
        assert_eq!(t[0].rank, 1);
    }

    #[test]
    fn ranks_descend_and_ties_break_by_item() {
        let b = bundle(vec![
            series(7, 1, vec![100.0], 1.0),
            series(8, 1, vec![200.0], 1.0),
        ]);
        let t = importance_table(&b);
        assert_eq!((t[0].item, t[0].rank), (8, 1));
        assert_eq!((t[1].item, t[1].rank), (7, 2));

        let b = bundle(vec![
            series(9, 1, vec![1.0], 1.0),
            series(3, 1, vec![1.0], 1.0),
        ]);
        let t = importance_table(&b);
        assert_eq!(t[0].item, 3);
    }

    #[test]
    fn revenue_sums_over_orgs() {
        let b = bundle(vec![
            series(1, 1, vec![10.0], 1.0),
            series(1, 2, vec![10.0], 1.0),
            series(2, 1, vec![15.0], 1.0),
        ]);
        let t = importance_table(&b);
        assert_eq!(t[0].item, 1);
        assert_eq!(t[0].revenue, 20.0);
    }

    #[test]
    fn classification() {
        let mut q = vec![1.0; 24];
        q[23] = 5.0;
        let c = classify_series(&series(1, 1, q, 1.0), 3);
        assert_eq!(
            (c.history, c.activity),
            (HistoryClass::Long, Activity::Active)
        );

        let c = classify_series(&series(1, 1, vec![1.0; 23], 1.0), 3);
        assert_eq!(c.history, HistoryClass::Short);

        let mut q = vec![1.0; 30];
        q[27..].fill(0.0);
        let c = classify_series(&series(1, 1, q, 1.0), 3);
        assert_eq!(c.activity, Activity::Inactive);
        assert_eq!(c.history_months, 30);
    }

    #[test]
    fn portfolio_selection() {
        let b = bundle(vec![
            series(1, 1, vec![10.0], 1.0),
            series(1, 2, vec![10.0], 1.0),
            series(2, 1, vec![15.0], 1.0),
            series(3, 1, vec![1.0], 1.0),
        ]);
        let t = importance_table(&b);
        assert_eq!(select_portfolio(&b, &t, 3).unwrap(), b);
        let top1 = select_portfolio(&b, &t, 1).unwrap();
        assert_eq!(top1.series.len(), 2);
        assert!(top1.series.keys().all(|k| k.item == 1));
        assert!(select_portfolio(&b, &t, 4).is_err());
    }
}
