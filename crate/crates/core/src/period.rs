//! Calendar periods used to slice transaction histories.
//!
//! Periods are UTC calendar quarters, except 2009 which is split into
//! half-years, plus `FULL` for the entire input span.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slice {
    H1,
    H2,
    Q1,
    Q2,
    Q3,
    Q4,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodLabel {
    pub year: i32,
    pub slice: Slice,
}

impl PeriodLabel {
    pub const FULL: PeriodLabel = PeriodLabel {
        year: 0,
        slice: Slice::Full,
    };

    pub fn new(year: i32, slice: Slice) -> Result<Self> {
        let label = PeriodLabel { year, slice };
        label.validate()?;
        Ok(label)
    }

    /// Halves are the 2009 convention; later years use quarters.
    pub fn validate(&self) -> Result<()> {
        match self.slice {
            Slice::Full => Ok(()),
            Slice::H1 | Slice::H2 if self.year == 2009 => Ok(()),
            Slice::H1 | Slice::H2 => Err(Error::InvalidConfig(format!(
                "half-year slices are only used for 2009, got {}",
                self
            ))),
            _ if self.year >= 2010 => Ok(()),
            _ => Err(Error::InvalidConfig(format!(
                "{} predates the quarterly convention (2009 uses H1/H2)",
                self
            ))),
        }
    }

    /// `[start, end)` in unix seconds, or `None` for FULL.
    pub fn bounds(&self) -> Option<(i64, i64)> {
        let (m0, m1) = match self.slice {
            Slice::Full => return None,
            Slice::H1 => (1, 7),
            Slice::H2 => (7, 13),
            Slice::Q1 => (1, 4),
            Slice::Q2 => (4, 7),
            Slice::Q3 => (7, 10),
            Slice::Q4 => (10, 13),
        };
        let start = month_start(self.year, m0);
        let end = if m1 > 12 {
            month_start(self.year + 1, m1 - 12)
        } else {
            month_start(self.year, m1)
        };
        Some((start, end))
    }

    pub fn contains(&self, t: i64) -> bool {
        match self.bounds() {
            None => true,
            Some((a, b)) => t >= a && t < b,
        }
    }

    /// The period containing `t` under the bitcoin convention
    /// (2009 halves, quarters from 2010 on).
    pub fn of_timestamp(t: i64) -> PeriodLabel {
        let dt = chrono::DateTime::from_timestamp(t, 0).expect("timestamp in range");
        let year = dt.year();
        let month = dt.month();
        let slice = if year <= 2009 {
            if month <= 6 {
                Slice::H1
            } else {
                Slice::H2
            }
        } else {
            match month {
                1..=3 => Slice::Q1,
                4..=6 => Slice::Q2,
                7..=9 => Slice::Q3,
                _ => Slice::Q4,
            }
        };
        PeriodLabel { year, slice }
    }

    /// All periods intersecting `[t_min, t_max]`, in time order.
    pub fn covering(t_min: i64, t_max: i64) -> Vec<PeriodLabel> {
        let mut out = Vec::new();
        let mut label = Self::of_timestamp(t_min);
        loop {
            out.push(label);
            let (_, end) = label.bounds().expect("non-FULL label");
            if end > t_max {
                break;
            }
            label = Self::of_timestamp(end);
        }
        out
    }
}

fn month_start(year: i32, month: u32) -> i64 {
    NaiveDate::from_ymd_opt(year, month, 1)
        .expect("valid calendar month")
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
        .timestamp()
}

impl fmt::Display for PeriodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slice {
            Slice::Full => write!(f, "FULL"),
            Slice::H1 => write!(f, "{}H1", self.year),
            Slice::H2 => write!(f, "{}H2", self.year),
            Slice::Q1 => write!(f, "{}Q1", self.year),
            Slice::Q2 => write!(f, "{}Q2", self.year),
            Slice::Q3 => write!(f, "{}Q3", self.year),
            Slice::Q4 => write!(f, "{}Q4", self.year),
        }
    }
}

impl FromStr for PeriodLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(PeriodLabel::FULL);
        }
        if s.len() < 6 {
            return Err(Error::InvalidConfig(format!("bad period label `{s}`")));
        }
        let (y, rest) = s.split_at(4);
        let year: i32 = y
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad year in period label `{s}`")))?;
        let slice = match rest.to_ascii_uppercase().as_str() {
            "H1" => Slice::H1,
            "H2" => Slice::H2,
            "Q1" => Slice::Q1,
            "Q2" => Slice::Q2,
            "Q3" => Slice::Q3,
            "Q4" => Slice::Q4,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "bad slice `{other}` in period label `{s}`"
                )))
            }
        };
        PeriodLabel::new(year, slice)
    }
}
