//! Calendar month arithmetic.
//!
//! Months are stored as a single signed counter (`year * 12 + month - 1`) so
//! that distances and offsets are plain integer operations.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ArenaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month(i32);

impl Month {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        if (1..=12).contains(&month) {
            Some(Month(year * 12 + month as i32 - 1))
        } else {
            None
        }
    }

    pub fn from_date(date: NaiveDate) -> Self {
        Month(date.year() * 12 + date.month0() as i32)
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    /// 1-based month of year.
    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    /// 0-based month of year, used for one-hot encodings.
    pub fn month0(self) -> usize {
        self.0.rem_euclid(12) as usize
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year(), self.month(), 1).expect("valid month")
    }

    pub fn contains(self, date: NaiveDate) -> bool {
        Month::from_date(date) == self
    }

    pub fn offset(self, months: i64) -> Month {
        Month(self.0 + months as i32)
    }

    /// Signed number of months from `earlier` to `self`.
    pub fn since(self, earlier: Month) -> i64 {
        i64::from(self.0 - earlier.0)
    }

    pub fn succ(self) -> Month {
        self.offset(1)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for Month {
    type Err = ArenaError;

    /// Accepts `YYYY-MM` or a first-of-month `YYYY-MM-01`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ArenaError::InvalidArgument(format!("invalid month `{s}`"));
        let full = if s.len() == 7 {
            format!("{s}-01")
        } else {
            s.to_string()
        };
        let date = NaiveDate::parse_from_str(&full, "%Y-%m-%d").map_err(|_| bad())?;
        if date.day() != 1 {
            return Err(bad());
        }
        Ok(Month::from_date(date))
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: Month,
    pub end: Month,
}

impl MonthRange {
    pub fn new(start: Month, end: Month) -> Result<Self, ArenaError> {
        if end < start {
            return Err(ArenaError::InvalidArgument(format!(
                "month range {start}..{end} is empty"
            )));
        }
        Ok(MonthRange { start, end })
    }

    pub fn contains(&self, m: Month) -> bool {
        self.start <= m && m <= self.end
    }

    pub fn overlaps(&self, other: &MonthRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = ArenaError;

    /// `YYYY-MM..YYYY-MM`, both ends inclusive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once("..").ok_or_else(|| {
            ArenaError::InvalidArgument(format!("invalid window `{s}`, expected START..END"))
        })?;
        MonthRange::new(a.parse()?, b.parse()?)
    }
}
