//! `date,close` CSV input and the canonical JSON form of a price series.
//!
//! The `date` column holds either ISO-8601 calendar dates, which become the
//! trading-day indices `0, 1, 2, …` in row order, or non-negative numeric
//! indices taken verbatim. A file must use one kind throughout.

use std::fmt::Write as _;
use std::path::Path;

use bubblescope_core::{Error as CoreError, PriceSeries};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DateKind {
    Calendar,
    Index,
}

/// Parses `date,close` text.
pub fn parse_csv(text: &str, label: &str) -> Result<PriceSeries> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::MalformedCsv {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if header.len() != 2 || &header[0] != "date" || &header[1] != "close" {
        return Err(Error::MalformedCsv {
            line: 1,
            reason: "header must be `date,close`".into(),
        });
    }

    let mut kind = None;
    let mut last_date: Option<NaiveDate> = None;
    let mut times = Vec::new();
    let mut prices = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::MalformedCsv {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::MalformedCsv {
                line,
                reason: "expected two fields".into(),
            });
        }
        let (date, close) = (&record[0], &record[1]);

        let (this_kind, time) = if let Ok(d) = NaiveDate::parse_from_str(date, "%Y-%m-%d") {
            if last_date.is_some_and(|prev| d <= prev) {
                return Err(CoreError::NonMonotonicTime { row, time: row as f64 }.into());
            }
            last_date = Some(d);
            (DateKind::Calendar, row as f64)
        } else {
            match date.parse::<f64>() {
                Ok(t) if t.is_finite() && t >= 0.0 => (DateKind::Index, t),
                _ => {
                    return Err(Error::MalformedCsv {
                        line,
                        reason: format!("`{date}` is neither an ISO date nor a non-negative index"),
                    })
                }
            }
        };
        if *kind.get_or_insert(this_kind) != this_kind {
            return Err(Error::MalformedCsv {
                line,
                reason: "mixed date and index rows".into(),
            });
        }

        let price: f64 = close.parse().map_err(|_| Error::MalformedCsv {
            line,
            reason: format!("`{close}` is not a number"),
        })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(CoreError::MalformedPrice { row, price }.into());
        }
        if let Some(&prev) = times.last() {
            if time <= prev {
                return Err(CoreError::NonMonotonicTime { row, time }.into());
            }
        }
        times.push(time);
        prices.push(price);
    }
    Ok(PriceSeries::new(times, prices, label)?)
}

pub fn read_csv(path: &Path) -> Result<PriceSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    parse_csv(&text, label)
}

/// Writes the series back as `date,close` with numeric indices. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn to_csv(series: &PriceSeries) -> String {
    let mut out = String::from("date,close\n");
    for (t, p) in series.times().iter().zip(series.prices()) {
        let _ = writeln!(out, "{t},{p}");
    }
    out
}

/// Canonical serialization `{label, times, prices}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub label: String,
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
}

impl From<&PriceSeries> for SeriesJson {
    fn from(s: &PriceSeries) -> Self {
        SeriesJson {
            label: s.label().to_owned(),
            times: s.times().to_vec(),
            prices: s.prices().to_vec(),
        }
    }
}

impl TryFrom<SeriesJson> for PriceSeries {
    type Error = Error;

    fn try_from(s: SeriesJson) -> Result<Self> {
        Ok(PriceSeries::new(s.times, s.prices, s.label)?)
    }
}

pub fn to_json(series: &PriceSeries) -> Result<String> {
    Ok(serde_json::to_string(&SeriesJson::from(series))?)
}

pub fn from_json(text: &str) -> Result<PriceSeries> {
    serde_json::from_str::<SeriesJson>(text)?.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_index_rows() {
        let s = parse_csv("date,close\n0,100\n1,110", "x").unwrap();
        assert_eq!(s.times(), &[0.0, 1.0]);
        assert_eq!(s.prices(), &[100.0, 110.0]);
        assert_eq!(s.label(), "x");
    }

    #[test]
    fn maps_iso_dates_to_row_indices() {
        let s = parse_csv(
            "date,close\n1987-10-16,3950.1\n1987-10-19,3362.4\n1987-10-26,2241.7\n",
            "hs",
        )
        .unwrap();
        assert_eq!(s.times(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn error_codes() {
        let code = |t: &str| parse_csv(t, "").unwrap_err().code();
        assert_eq!(code("date,close\n0,100\n0,101"), "NonMonotonicTime");
        assert_eq!(code("date,close\n0,100\n1,-5"), "MalformedPrice");
        assert_eq!(code("date,close\n0,100\n1,0"), "MalformedPrice");
        assert_eq!(code("date,close\n0,100"), "TooShort");
        assert_eq!(code("date,close\n"), "TooShort");
        assert_eq!(code("time,price\n0,1\n1,2"), "MalformedCsv");
        assert_eq!(code("date,close\n0,abc\n1,2"), "MalformedCsv");
        assert_eq!(code("date,close\n2001-01-02,1\n2001-01-01,2"), "NonMonotonicTime");
        assert_eq!(code("date,close\n2001-01-02,1\n5,2"), "MalformedCsv");
        assert_eq!(code("date,close\n-1,1\n5,2"), "MalformedCsv");
    }

    #[test]
    fn csv_writer_round_trips() {
        let s = PriceSeries::new(vec![0.0, 1.0, 2.5], vec![100.0, 0.1 + 0.2, 1e-7], "r").unwrap();
        assert_eq!(parse_csv(&to_csv(&s), "r").unwrap(), s);
    }
}
