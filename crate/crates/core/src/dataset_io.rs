//! Ingestion of the monthly sales benchmark.
//!
//! Two CSV files describe the data: `target_ts.csv` (`item,org,date,quantity`)
//! and `related_ts.csv` (`item,org,date,unit_price`). Dates are first-of-month
//! ISO dates. An optional `holidays.csv` (`date,name`) lists calendar days.
//!
//! Parsing is strict: every problem is reported with its 1-based row number,
//! the header counting as row 1.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::month::Month;

pub const TARGET_HEADER: [&str; 4] = ["item", "org", "date", "quantity"];
pub const RELATED_HEADER: [&str; 4] = ["item", "org", "date", "unit_price"];
pub const HOLIDAY_HEADER: [&str; 2] = ["date", "name"];
pub const DAILY_HEADER: [&str; 5] = ["item", "org", "date", "quantity", "unit_price"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub item: u64,
    pub org: u64,
}

impl SeriesKey {
    pub fn new(item: u64, org: u64) -> Self {
        SeriesKey { item, org }
    }
}

impl std::fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.item, self.org)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalesRecord {
    pub key: SeriesKey,
    pub month: Month,
    pub quantity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRecord {
    pub key: SeriesKey,
    pub month: Month,
    pub unit_price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyRecord {
    pub key: SeriesKey,
    pub day: NaiveDate,
    pub quantity: f64,
    pub unit_price: f64,
}

/// One item×organization signal on a contiguous monthly grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    pub key: SeriesKey,
    pub start_month: Month,
    pub quantities: Vec<f64>,
    pub prices: Vec<f64>,
}

impl MonthlySeries {
    pub fn len(&self) -> usize {
        self.quantities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    pub fn end_month(&self) -> Month {
        self.start_month.offset(self.len() as i64 - 1)
    }

    pub fn month_at(&self, index: usize) -> Month {
        self.start_month.offset(index as i64)
    }

    /// Position of `month` in the series, if it lies inside it.
    pub fn index_of(&self, month: Month) -> Option<usize> {
        let d = month.since(self.start_month);
        (d >= 0 && (d as usize) < self.len()).then_some(d as usize)
    }

    /// Prefix ending at `origin` (inclusive). `None` when the series starts
    /// after `origin`.
    pub fn truncated_at(&self, origin: Month) -> Option<MonthlySeries> {
        let d = origin.since(self.start_month);
        if d < 0 {
            return None;
        }
        let n = (d as usize + 1).min(self.len());
        Some(MonthlySeries {
            key: self.key,
            start_month: self.start_month,
            quantities: self.quantities[..n].to_vec(),
            prices: self.prices[..n].to_vec(),
        })
    }

    /// Prices for `origin+1 ..= origin+horizon`; months past the end of the
    /// series carry the last known price forward.
    pub fn future_prices(&self, origin: Month, horizon: usize) -> Vec<f64> {
        let last = *self.prices.last().expect("non-empty series");
        (1..=horizon as i64)
            .map(|h| {
                self.index_of(origin.offset(h))
                    .map(|i| self.prices[i])
                    .unwrap_or(last)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolidayCalendar {
    pub entries: BTreeSet<(NaiveDate, String)>,
}

impl HolidayCalendar {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct holiday names in sorted order.
    pub fn names(&self) -> Vec<String> {
        let names: BTreeSet<&String> = self.entries.iter().map(|(_, n)| n).collect();
        names.into_iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetBundle {
    pub series: BTreeMap<SeriesKey, MonthlySeries>,
    pub holidays: HolidayCalendar,
}

#[derive(Serialize)]
struct BundleView<'a> {
    series: Vec<&'a MonthlySeries>,
    holidays: &'a HolidayCalendar,
}

impl DatasetBundle {
    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn items(&self) -> BTreeSet<u64> {
        self.series.keys().map(|k| k.item).collect()
    }

    /// Every series cut at calendar month `origin`; series that start later
    /// are dropped.
    pub fn truncated_at(&self, origin: Month) -> DatasetBundle {
        DatasetBundle {
            series: self
                .series
                .iter()
                .filter_map(|(k, s)| s.truncated_at(origin).map(|t| (*k, t)))
                .collect(),
            holidays: self.holidays.clone(),
        }
    }

    /// Keeps only the most recent `months` calendar months of the whole
    /// dataset (measured from the latest month present in any series).
    pub fn keep_recent(&self, months: usize) -> DatasetBundle {
        let Some(last) = self.series.values().map(|s| s.end_month()).max() else {
            return self.clone();
        };
        let first_kept = last.offset(1 - months as i64);
        let series = self
            .series
            .iter()
            .filter_map(|(k, s)| {
                if s.end_month() < first_kept {
                    return None;
                }
                let skip = first_kept.since(s.start_month).max(0) as usize;
                Some((
                    *k,
                    MonthlySeries {
                        key: *k,
                        start_month: s.start_month.offset(skip as i64),
                        quantities: s.quantities[skip..].to_vec(),
                        prices: s.prices[skip..].to_vec(),
                    },
                ))
            })
            .collect();
        DatasetBundle {
            series,
            holidays: self.holidays.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let view = BundleView {
            series: self.series.values().collect(),
            holidays: &self.holidays,
        };
        Ok(serde_json::to_string(&view)?)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Truncate mid-month dates to the month start instead of rejecting them.
    pub normalize_dates: bool,
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let found = reader.headers()?.clone();
    let matches = found.len() == expected.len()
        && found.iter().zip(expected).all(|(f, e)| {
            f.trim()
                .trim_start_matches('\u{feff}')
                .eq_ignore_ascii_case(e)
        });
    if !matches {
        return Err(ArenaError::Header {
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn csv_reader(source: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source)
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, row: usize, name: &str) -> Result<&'a str> {
    rec.get(idx)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ArenaError::row(row, format!("missing {name}")))
}

fn parse_id(s: &str, row: usize, name: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| ArenaError::row(row, format!("invalid {name} identifier `{s}`")))
}

fn parse_day(s: &str, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| ArenaError::row(row, format!("unparseable date `{s}`")))
}

fn parse_month(s: &str, row: usize, opts: ParseOptions) -> Result<Month> {
    let day = parse_day(s, row)?;
    if day.day() != 1 && !opts.normalize_dates {
        return Err(ArenaError::row(
            row,
            format!("date not first of month `{s}`"),
        ));
    }
    Ok(Month::from_date(day))
}

fn parse_real(s: &str, row: usize, name: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| ArenaError::row(row, format!("non-numeric {name} `{s}`")))?;
    if !v.is_finite() {
        return Err(ArenaError::row(row, format!("non-finite {name} `{s}`")));
    }
    Ok(v)
}

fn check_width(rec: &csv::StringRecord, width: usize, row: usize) -> Result<()> {
    if rec.len() != width {
        return Err(ArenaError::row(
            row,
            format!("expected {width} fields, found {}", rec.len()),
        ));
    }
    Ok(())
}

fn parse_key(rec: &csv::StringRecord, row: usize) -> Result<SeriesKey> {
    Ok(SeriesKey {
        item: parse_id(field(rec, 0, row, "item")?, row, "item")?,
        org: parse_id(field(rec, 1, row, "org")?, row, "org")?,
    })
}

pub fn parse_target_csv(source: impl Read, opts: ParseOptions) -> Result<Vec<SalesRecord>> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &TARGET_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| ArenaError::row(row, e.to_string()))?;
        check_width(&rec, 4, row)?;
        let key = parse_key(&rec, row)?;
        let month = parse_month(field(&rec, 2, row, "date")?, row, opts)?;
        let quantity = parse_real(field(&rec, 3, row, "quantity")?, row, "quantity")?;
        if quantity < 0.0 {
            return Err(ArenaError::row(
                row,
                format!("negative quantity {quantity}"),
            ));
        }
        out.push(SalesRecord {
            key,
            month,
            quantity,
        });
    }
    Ok(out)
}

pub fn parse_related_csv(source: impl Read, opts: ParseOptions) -> Result<Vec<PriceRecord>> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &RELATED_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| ArenaError::row(row, e.to_string()))?;
        check_width(&rec, 4, row)?;
        let key = parse_key(&rec, row)?;
        let month = parse_month(field(&rec, 2, row, "date")?, row, opts)?;
        let unit_price = parse_real(field(&rec, 3, row, "unit_price")?, row, "unit_price")?;
        if unit_price <= 0.0 {
            return Err(ArenaError::row(
                row,
                format!("non-positive unit_price {unit_price}"),
            ));
        }
        out.push(PriceRecord {
            key,
            month,
            unit_price,
        });
    }
    Ok(out)
}

/// Daily transactions with header `item,org,date,quantity,unit_price`.
pub fn parse_daily_csv(source: impl Read) -> Result<Vec<DailyRecord>> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &DAILY_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| ArenaError::row(row, e.to_string()))?;
        check_width(&rec, 5, row)?;
        let key = parse_key(&rec, row)?;
        let day = parse_day(field(&rec, 2, row, "date")?, row)?;
        let quantity = parse_real(field(&rec, 3, row, "quantity")?, row, "quantity")?;
        if quantity < 0.0 {
            return Err(ArenaError::row(
                row,
                format!("negative quantity {quantity}"),
            ));
        }
        let unit_price = parse_real(field(&rec, 4, row, "unit_price")?, row, "unit_price")?;
        if unit_price <= 0.0 {
            return Err(ArenaError::row(
                row,
                format!("non-positive unit_price {unit_price}"),
            ));
        }
        out.push(DailyRecord {
            key,
            day,
            quantity,
            unit_price,
        });
    }
    Ok(out)
}

pub fn load_holidays(source: impl Read) -> Result<HolidayCalendar> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &HOLIDAY_HEADER)?;
    let mut cal = HolidayCalendar::default();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| ArenaError::row(row, e.to_string()))?;
        check_width(&rec, 2, row)?;
        let day = parse_day(field(&rec, 0, row, "date")?, row)?;
        let name = field(&rec, 1, row, "name")?.to_string();
        cal.entries.insert((day, name));
    }
    Ok(cal)
}

/// Sums daily quantities per (series, month); the monthly price is the
/// quantity-weighted mean of the daily prices. Months whose total quantity is
/// zero get a sales record but no price record.
pub fn aggregate_daily_to_monthly(daily: &[DailyRecord]) -> (Vec<SalesRecord>, Vec<PriceRecord>) {
    // (quantity, revenue)
    let mut acc: BTreeMap<(SeriesKey, Month), (f64, f64)> = BTreeMap::new();
    for d in daily {
        let e = acc
            .entry((d.key, Month::from_date(d.day)))
            .or_insert((0.0, 0.0));
        e.0 += d.quantity;
        e.1 += d.quantity * d.unit_price;
    }
    let mut sales = Vec::with_capacity(acc.len());
    let mut prices = Vec::with_capacity(acc.len());
    for ((key, month), (q, revenue)) in acc {
        sales.push(SalesRecord {
            key,
            month,
            quantity: q,
        });
        if q > 0.0 {
            prices.push(PriceRecord {
                key,
                month,
                unit_price: revenue / q,
            });
        }
    }
    (sales, prices)
}

/// Builds contiguous monthly series from sparse records.
///
/// Missing quantity months become 0. Missing price months take the previous
/// known price, or the next known one for a leading gap.
pub fn assemble_series(sales: &[SalesRecord], prices: &[PriceRecord]) -> Result<DatasetBundle> {
    let mut qty: BTreeMap<SeriesKey, BTreeMap<Month, f64>> = BTreeMap::new();
    for r in sales {
        if qty
            .entry(r.key)
            .or_default()
            .insert(r.month, r.quantity)
            .is_some()
        {
            return Err(ArenaError::DuplicateMonth {
                item: r.key.item,
                org: r.key.org,
                month: r.month.to_string(),
            });
        }
    }
    let mut px: BTreeMap<SeriesKey, BTreeMap<Month, f64>> = BTreeMap::new();
    for r in prices {
        if px
            .entry(r.key)
            .or_default()
            .insert(r.month, r.unit_price)
            .is_some()
        {
            return Err(ArenaError::DuplicateMonth {
                item: r.key.item,
                org: r.key.org,
                month: r.month.to_string(),
            });
        }
    }

    let mut bundle = DatasetBundle::default();
    for (key, months) in qty {
        let known = px
            .get(&key)
            .filter(|m| !m.is_empty())
            .ok_or(ArenaError::MissingPrices {
                item: key.item,
                org: key.org,
            })?;
        let (&first, _) = months.first_key_value().expect("non-empty");
        let (&last, _) = months.last_key_value().expect("non-empty");
        let len = last.since(first) as usize + 1;

        let quantities: Vec<f64> = (0..len)
            .map(|i| months.get(&first.offset(i as i64)).copied().unwrap_or(0.0))
            .collect();
        let prices: Vec<f64> = (0..len)
            .map(|i| {
                let m = first.offset(i as i64);
                known
                    .range(..=m)
                    .next_back()
                    .or_else(|| known.range(m..).next())
                    .map(|(_, p)| *p)
                    .expect("non-empty price map")
            })
            .collect();
        bundle.series.insert(
            key,
            MonthlySeries {
                key,
                start_month: first,
                quantities,
                prices,
            },
        );
    }
    Ok(bundle)
}

fn date_str(m: Month) -> String {
    m.first_day().format("%Y-%m-%d").to_string()
}

pub fn write_target_csv(records: &[SalesRecord], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TARGET_HEADER)?;
    for r in records {
        w.write_record([
            r.key.item.to_string(),
            r.key.org.to_string(),
            date_str(r.month),
            r.quantity.to_string(),
        ])?;
    }
    w.flush().map_err(|e| ArenaError::io("<csv sink>", e))?;
    Ok(())
}

pub fn write_related_csv(records: &[PriceRecord], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RELATED_HEADER)?;
    for r in records {
        w.write_record([
            r.key.item.to_string(),
            r.key.org.to_string(),
            date_str(r.month),
            r.unit_price.to_string(),
        ])?;
    }
    w.flush().map_err(|e| ArenaError::io("<csv sink>", e))?;
    Ok(())
}

pub fn write_holidays_csv(calendar: &HolidayCalendar, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HOLIDAY_HEADER)?;
    for (day, name) in &calendar.entries {
        w.write_record([day.format("%Y-%m-%d").to_string(), name.clone()])?;
    }
    w.flush().map_err(|e| ArenaError::io("<csv sink>", e))?;
    Ok(())
}

/// Flattens a bundle back into sparse records (every month of every series).
pub fn bundle_records(bundle: &DatasetBundle) -> (Vec<SalesRecord>, Vec<PriceRecord>) {
    let mut sales = Vec::new();
    let mut prices = Vec::new();
    for s in bundle.series.values() {
        for i in 0..s.len() {
            let month = s.month_at(i);
            sales.push(SalesRecord {
                key: s.key,
                month,
                quantity: s.quantities[i],
            });
            prices.push(PriceRecord {
                key: s.key,
                month,
                unit_price: s.prices[i],
            });
        }
    }
    (sales, prices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(y: i32, mo: u32) -> Month {
        Month::new(y, mo).unwrap()
    }

    fn key() -> SeriesKey {
        SeriesKey::new(3959294, 1617388)
    }

    #[test]
    fn parses_benchmark_rows() {
        let t = "item,org,date,quantity\n3959294,1617388,2021-01-01,3718\n";
        let recs = parse_target_csv(t.as_bytes(), ParseOptions::default()).unwrap();
        assert_eq!(
            recs,
            vec![SalesRecord {
                key: key(),
                month: m(2021, 1),
                quantity: 3718.0
            }]
        );

        let p = "item,org,date,unit_price\n3959294,1617388,2021-01-01,0.611830413\n";
        let recs = parse_related_csv(p.as_bytes(), ParseOptions::default()).unwrap();
        assert_eq!(recs[0].unit_price, 0.611830413);
        assert_eq!(recs[0].month, m(2021, 1));
    }

    #[test]
    fn header_only_is_empty() {
        let recs = parse_target_csv(
            "item,org,date,quantity\n".as_bytes(),
            ParseOptions::default(),
        )
        .unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn rejects_mid_month_unless_normalizing() {
        let t = "item,org,date,quantity\n1,2,2021-01-15,3\n";
        let err = parse_target_csv(t.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(err.to_string().contains("date not first of month"), "{err}");
        let recs = parse_target_csv(
            t.as_bytes(),
            ParseOptions {
                normalize_dates: true,
            },
        )
        .unwrap();
        assert_eq!(recs[0].month, m(2021, 1));
    }

    #[test]
    fn row_errors_carry_row_numbers() {
        let t = "item,org,date,quantity\n1,2,2021-01-01,3\n1,2,2021-02-01,-1\n";
        let err = parse_target_csv(t.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("row 3"), "{err}");
        assert!(err.to_string().contains("negative quantity"));

        let t = "item,org,date,quantity\n1,2,2021-01-01,abc\n";
        let err = parse_target_csv(t.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("non-numeric quantity"), "{err}");

        let t = "item,org,date,quantity\n1,2,2021/01/01,3\n";
        let err = parse_target_csv(t.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("unparseable date"), "{err}");
    }

    #[test]
    fn price_validation() {
        let p = "item,org,date,unit_price\n1,2,2021-01-01,0\n";
        let err = parse_related_csv(p.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("non-positive unit_price"), "{err}");

        let p = "item,org,date,price\n1,2,2021-01-01,1\n";
        let err = parse_related_csv(p.as_bytes(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, ArenaError::Header { .. }));
        assert!(err.to_string().contains("unexpected header"));
    }

    #[test]
    fn daily_aggregation() {
        let k = key();
        let day = |d| NaiveDate::from_ymd_opt(2021, 1, d).unwrap();
        let rec = |d, q, p| DailyRecord {
            key: k,
            day: day(d),
            quantity: q,
            unit_price: p,
        };

        let (s, p) = aggregate_daily_to_monthly(&[rec(5, 3.0, 2.0), rec(9, 4.0, 2.0)]);
        assert_eq!(s[0].quantity, 7.0);
        assert_eq!(p[0].unit_price, 2.0);

        let (s, p) = aggregate_daily_to_monthly(&[rec(5, 1.0, 1.0), rec(9, 3.0, 2.0)]);
        assert_eq!(s[0].quantity, 4.0);
        assert!((p[0].unit_price - 1.75).abs() < 1e-12);

        let (s, p) = aggregate_daily_to_monthly(&[rec(20, 5.0, 1.5)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].month, m(2021, 1));
        assert_eq!(p[0].unit_price, 1.5);

        let (s, p) = aggregate_daily_to_monthly(&[rec(20, 0.0, 1.5)]);
        assert_eq!(s[0].quantity, 0.0);
        assert!(p.is_empty());
    }

    #[test]
    fn gap_fill() {
        let k = key();
        let sales = [
            SalesRecord {
                key: k,
                month: m(2021, 1),
                quantity: 5.0,
            },
            SalesRecord {
                key: k,
                month: m(2021, 3),
                quantity: 7.0,
            },
        ];
        let prices = [PriceRecord {
            key: k,
            month: m(2021, 1),
            unit_price: 2.5,
        }];
        let b = assemble_series(&sales, &prices).unwrap();
        let s = &b.series[&k];
        assert_eq!(s.quantities, vec![5.0, 0.0, 7.0]);
        assert_eq!(s.prices, vec![2.5, 2.5, 2.5]);
        assert_eq!(s.end_month(), m(2021, 3));
    }

    #[test]
    fn leading_price_gap_carries_backward() {
        let k = key();
        let sales: Vec<_> = (1..=3)
            .map(|mo| SalesRecord {
                key: k,
                month: m(2021, mo),
                quantity: 1.0,
            })
            .collect();
        let prices = [
            PriceRecord {
                key: k,
                month: m(2021, 2),
                unit_price: 3.0,
            },
            PriceRecord {
                key: k,
                month: m(2021, 3),
                unit_price: 4.0,
            },
        ];
        let b = assemble_series(&sales, &prices).unwrap();
        assert_eq!(b.series[&k].prices, vec![3.0, 3.0, 4.0]);
    }

    #[test]
    fn assemble_errors() {
        let k = key();
        let s = SalesRecord {
            key: k,
            month: m(2021, 1),
            quantity: 1.0,
        };
        let p = PriceRecord {
            key: k,
            month: m(2021, 1),
            unit_price: 1.0,
        };
        let err = assemble_series(&[s, s], &[p]).unwrap_err();
        assert!(err.to_string().contains("duplicate month"), "{err}");
        let err = assemble_series(&[s], &[]).unwrap_err();
        assert!(matches!(err, ArenaError::MissingPrices { .. }));
        let one = assemble_series(&[s], &[p]).unwrap();
        assert_eq!(one.series[&k].len(), 1);
    }

    #[test]
    fn holidays() {
        let cal = load_holidays("date,name\n2021-01-01,New Year\n".as_bytes()).unwrap();
        assert_eq!(cal.entries.len(), 1);
        let cal = load_holidays("date,name\n".as_bytes()).unwrap();
        assert!(cal.is_empty());
        let cal = load_holidays("date,name\n2021-01-01,New Year\n2021-01-01,New Year\n".as_bytes())
            .unwrap();
        assert_eq!(cal.entries.len(), 1);
        assert!(load_holidays("date,name\n2021-13-01,X\n".as_bytes()).is_err());
    }

    #[test]
    fn truncation_and_future_prices() {
        let k = key();
        let s = MonthlySeries {
            key: k,
            start_month: m(2020, 1),
            quantities: vec![1.0, 2.0, 3.0, 4.0],
            prices: vec![1.0, 1.1, 1.2, 1.3],
        };
        assert!(s.truncated_at(m(2019, 12)).is_none());
        assert_eq!(
            s.truncated_at(m(2020, 2)).unwrap().quantities,
            vec![1.0, 2.0]
        );
        assert_eq!(s.truncated_at(m(2021, 2)).unwrap().len(), 4);
        assert_eq!(s.future_prices(m(2020, 2), 3), vec![1.2, 1.3, 1.3]);
    }
}
