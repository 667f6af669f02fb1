//! Sliding-window bubble scan.
//!
//! Each window is calibrated against the exponential null; a window is
//! flagged when a fit has the bubble shape (`B < 0`, `0 < m < 1`, `t_c`
//! shortly after the window) and beats the null by a set margin. A flag is a
//! warning that a regime change is likely, not a crash forecast, which is
//! why diagnoses carry the spread of critical times across starts.

use alloc::vec::Vec;

use crate::calibrate::{self, FitConfig, FitResult, ModelComparison, ModelKind};
use crate::drawdowns::{self, CrashEvent, CrashRule};
use crate::models::{self, ExpFitParams};
use crate::{Error, LogPriceSeries, PriceSeries, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanModel {
    Fts,
    Lppl,
    Both,
}

impl ScanModel {
    pub fn kinds(self) -> &'static [ModelKind] {
        match self {
            ScanModel::Fts => &[ModelKind::Fts],
            ScanModel::Lppl => &[ModelKind::Lppl],
            ScanModel::Both => &[ModelKind::Fts, ModelKind::Lppl],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    /// Observations per window.
    pub window_length: usize,
    /// Observations between consecutive window starts.
    pub step: usize,
    pub model: ScanModel,
    /// Smallest `1 - sse / null_sse` accepted for a flag.
    pub improvement_min: f64,
    /// A flag needs `t_c - t_end <= horizon_fraction · span`.
    pub horizon_fraction: f64,
    pub crash: CrashRule,
    /// A crash counts as preceded when a flagged window ended at most this
    /// many days before its peak.
    pub lookback_days: f64,
    /// Starts whose SSE is within this fraction of the best enter the `t_c`
    /// spread.
    pub spread_sse_tol: f64,
    pub fit: FitConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            window_length: 250,
            step: 21,
            model: ScanModel::Fts,
            improvement_min: 0.25,
            horizon_fraction: 0.25,
            crash: CrashRule::default(),
            lookback_days: 63.0,
            spread_sse_tol: 0.05,
            fit: FitConfig::default(),
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length < 30 || self.step == 0 {
            return Err(Error::InvalidParameter("window length must be >= 30 and step >= 1"));
        }
        if !(self.horizon_fraction > 0.0) || !(self.lookback_days >= 0.0) {
            return Err(Error::InvalidParameter("horizon and lookback must be positive"));
        }
        self.fit.validate()
    }

    /// Start offsets of the windows over a series of `n` observations.
    pub fn window_offsets(&self, n: usize) -> Vec<usize> {
        if n < self.window_length {
            return Vec::new();
        }
        (0..=n - self.window_length).step_by(self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowDiagnosis {
    /// Position of the first observation of the window in the scanned series.
    pub offset: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub null_fit: ExpFitParams,
    pub fits: Vec<FitResult>,
    pub comparisons: Vec<ModelComparison>,
    pub bubble_flag: bool,
    pub flagged_by: Option<ModelKind>,
    pub tc_estimate: f64,
    /// `max - min` of `t_c` over refined starts near the best SSE.
    pub tc_spread: f64,
}

impl WindowDiagnosis {
    /// Fit that supplied `tc_estimate`.
    pub fn lead_fit(&self) -> &FitResult {
        let kind = self.flagged_by.unwrap_or_else(|| self.fits[0].params.kind());
        self.fits
            .iter()
            .find(|f| f.params.kind() == kind)
            .unwrap_or(&self.fits[0])
    }

    /// Rows `(t, log price, null line, fitted curve)` over the window.
    pub fn curve_rows(&self, window: &LogPriceSeries) -> Vec<[f64; 4]> {
        let fit = self.lead_fit();
        window
            .times()
            .iter()
            .zip(window.values())
            .map(|(&t, &y)| [t, y, self.null_fit.eval(t), fit.params.eval(t).unwrap_or(f64::NAN)])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precedence {
    pub crash: CrashEvent,
    pub preceded: bool,
    /// Offset of the latest flagged window ending within the lookback.
    pub window_offset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleReport {
    pub windows: Vec<WindowDiagnosis>,
    pub crashes: Vec<CrashEvent>,
    pub precedence: Vec<Precedence>,
}

impl BubbleReport {
    pub fn flag_rate(&self) -> f64 {
        if self.windows.is_empty() {
            return 0.0;
        }
        self.windows.iter().filter(|w| w.bubble_flag).count() as f64 / self.windows.len() as f64
    }
}

pub fn classify_window(window: &LogPriceSeries, config: &ScanConfig) -> Result<WindowDiagnosis> {
    config.validate()?;
    if window.len() < config.fit.min_len {
        return Err(Error::TooShort {
            len: window.len(),
            min: config.fit.min_len,
        });
    }
    let (null_fit, _) = models::fit_exponential(window)?;
    let horizon = config.horizon_fraction * window.span();
    let mut fits = Vec::new();
    let mut comparisons = Vec::new();
    for &kind in config.model.kinds() {
        let fit = calibrate::fit(window, &config.fit, kind)?;
        comparisons.push(calibrate::compare_to_null(&fit, horizon));
        fits.push(fit);
    }
    let flagged = comparisons
        .iter()
        .position(|c| c.bubble_shape_ok && c.relative_improvement >= config.improvement_min);
    let lead = flagged.unwrap_or(0);
    let fit = &fits[lead];
    let best = fit.sse;
    let near: Vec<f64> = fit
        .refined
        .iter()
        .filter(|c| c.sse <= best * (1.0 + config.spread_sse_tol) || c.sse == best)
        .map(|c| c.params.tc())
        .collect();
    let tc_spread =
        near.iter().copied().fold(f64::NEG_INFINITY, f64::max) - near.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WindowDiagnosis {
        offset: 0,
        t_start: window.first_time(),
        t_end: window.last_time(),
        null_fit,
        tc_estimate: fit.params.tc(),
        tc_spread,
        flagged_by: flagged.map(|i| fits[i].params.kind()),
        bubble_flag: flagged.is_some(),
        fits,
        comparisons,
    })
}

/// Classifies every window, detects crashes on the whole series and joins
/// the two.
pub fn scan(series: &PriceSeries, config: &ScanConfig) -> Result<BubbleReport> {
    config.validate()?;
    if series.len() < config.window_length {
        return Err(Error::TooShort {
            len: series.len(),
            min: config.window_length,
        });
    }
    let log = series.log_prices();
    let mut windows = Vec::new();
    for offset in config.window_offsets(series.len()) {
        windows.push(classify_offset(&log, offset, config)?);
    }
    assemble_report(series, windows, config)
}

/// Classifies the window starting at `offset`.
pub fn classify_offset(log: &LogPriceSeries, offset: usize, config: &ScanConfig) -> Result<WindowDiagnosis> {
    let window = log.slice(offset, config.window_length)?;
    let mut diag = classify_window(&window, config)?;
    diag.offset = offset;
    Ok(diag)
}

/// Builds the report from window diagnoses computed in any order.
pub fn assemble_report(
    series: &PriceSeries,
    mut windows: Vec<WindowDiagnosis>,
    config: &ScanConfig,
) -> Result<BubbleReport> {
    windows.sort_by_key(|w| w.offset);
    let crashes = drawdowns::detect_crashes(series, &config.crash)?;
    let precedence = crashes
        .iter()
        .map(|crash| {
            let hit = windows
                .iter()
                .filter(|w| {
                    w.bubble_flag && w.t_end <= crash.peak_time && crash.peak_time - w.t_end <= config.lookback_days
                })
                .max_by(|a, b| a.t_end.total_cmp(&b.t_end));
            Precedence {
                crash: *crash,
                preceded: hit.is_some(),
                window_offset: hit.map(|w| w.offset),
            }
        })
        .collect();
    Ok(BubbleReport {
        windows,
        crashes,
        precedence,
    })
}

/// Fraction of crashes preceded by a flagged window.
pub fn precedence_rate(report: &BubbleReport) -> Result<f64> {
    if report.precedence.is_empty() {
        return Err(Error::NoCrashes);
    }
    let hits = report.precedence.iter().filter(|p| p.preceded).count();
    Ok(hits as f64 / report.precedence.len() as f64)
}
