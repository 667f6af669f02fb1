//! Price series types shared by every other module.
//!
//! Times are trading-day indices (unit = one day). Gaps in the calendar are
//! not interpolated: a missing row simply advances the index.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Ordered `(time, price)` observations with strictly increasing times and
/// positive prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    times: Vec<f64>,
    prices: Vec<f64>,
    label: String,
}

impl PriceSeries {
    pub const MIN_LEN: usize = 2;

    pub fn new(times: Vec<f64>, prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.len() != prices.len() {
            return Err(Error::InvalidParameter("times and prices differ in length"));
        }
        for (row, &price) in prices.iter().enumerate() {
            if !(price.is_finite() && price > 0.0) {
                return Err(Error::MalformedPrice { row, price });
            }
        }
        for (row, &time) in times.iter().enumerate() {
            if !time.is_finite() {
                return Err(Error::NonMonotonicTime { row, time });
            }
            if row > 0 && time <= times[row - 1] {
                return Err(Error::NonMonotonicTime { row, time });
            }
        }
        if times.len() < Self::MIN_LEN {
            return Err(Error::TooShort {
                len: times.len(),
                min: Self::MIN_LEN,
            });
        }
        Ok(Self {
            times,
            prices,
            label: label.into(),
        })
    }

    /// Builds a series on the index grid `0, 1, 2, …`.
    pub fn from_prices(prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let times = (0..prices.len()).map(|i| i as f64).collect();
        Self::new(times, prices, label)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Always false; kept for the `len`/`is_empty` pair.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Observations with `t_start <= time <= t_end`.
    pub fn window(&self, t_start: f64, t_end: f64) -> Result<Self> {
        window(self, t_start, t_end)
    }

    /// Observations `[start, start + len)` by position.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = (start + len).min(self.len());
        let start = start.min(end);
        Self::new(
            self.times[start..end].to_vec(),
            self.prices[start..end].to_vec(),
            self.label.clone(),
        )
    }

    /// Every price multiplied by `factor > 0`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter("rescale factor must be positive"));
        }
        let prices = self.prices.iter().map(|p| p * factor).collect();
        Self::new(self.times.clone(), prices, self.label.clone())
    }

    /// Every time shifted by `delta` days.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let times = self.times.iter().map(|t| t + delta).collect();
        Self::new(times, self.prices.clone(), self.label.clone())
    }

    pub fn log_prices(&self) -> LogPriceSeries {
        log_prices(self)
    }
}

/// Natural logarithm of a [`PriceSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogPriceSeries {
    times: Vec<f64>,
    logp: Vec<f64>,
}

impl LogPriceSeries {
    /// Builds a log-price series directly. Times must strictly increase and
    /// every value must be finite.
    pub fn new(times: Vec<f64>, logp: Vec<f64>) -> Result<Self> {
        if times.len() != logp.len() {
            return Err(Error::InvalidParameter("times and log prices differ in length"));
        }
        for (row, &v) in logp.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::MalformedPrice {
                    row,
                    price: libm::exp(v),
                });
            }
        }
        for (row, &time) in times.iter().enumerate() {
            if !time.is_finite() || (row > 0 && time <= times[row - 1]) {
                return Err(Error::NonMonotonicTime { row, time });
            }
        }
        if times.len() < PriceSeries::MIN_LEN {
            return Err(Error::TooShort {
                len: times.len(),
                min: PriceSeries::MIN_LEN,
            });
        }
        Ok(Self { times, logp })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.logp
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Span `last_time - first_time` in days.
    pub fn span(&self) -> f64 {
        self.last_time() - self.first_time()
    }

    /// Observations `[start, start + len)` by position.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = (start + len).min(self.len());
        let start = start.min(end);
        Self::new(self.times[start..end].to_vec(), self.logp[start..end].to_vec())
    }

    /// Back to prices via `exp`.
    pub fn to_prices(&self, label: impl Into<String>) -> Result<PriceSeries> {
        let prices = self.logp.iter().map(|&v| libm::exp(v)).collect();
        PriceSeries::new(self.times.clone(), prices, label)
    }
}

pub fn log_prices(series: &PriceSeries) -> LogPriceSeries {
    LogPriceSeries {
        times: series.times.clone(),
        logp: series.prices.iter().map(|&p| libm::log(p)).collect(),
    }
}

/// Inclusive time window; fails with [`Error::TooShort`] when fewer than two
/// observations fall inside.
pub fn window(series: &PriceSeries, t_start: f64, t_end: f64) -> Result<PriceSeries> {
    if !(t_start < t_end) {
        return Err(Error::InvalidParameter("window start must precede its end"));
    }
    let lo = series.times.partition_point(|&t| t < t_start);
    let hi = series.times.partition_point(|&t| t <= t_end);
    let len = hi.saturating_sub(lo);
    if len < PriceSeries::MIN_LEN {
        return Err(Error::TooShort {
            len,
            min: PriceSeries::MIN_LEN,
        });
    }
    Ok(PriceSeries {
        times: series.times[lo..hi].to_vec(),
        prices: series.prices[lo..hi].to_vec(),
        label: series.label.clone(),
    })
}
