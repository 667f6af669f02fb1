//! Serialized forms of fits, drawdowns and scan reports.

use bubblescope_core::calibrate::{FitConfig, FitResult, ModelComparison, TcGrid};
use bubblescope_core::diagnose::{BubbleReport, ScanConfig, ScanModel, WindowDiagnosis};
use bubblescope_core::drawdowns::{CrashEvent, CrashRule, Drawdown, StretchedExpFit};
use bubblescope_core::models::BubbleModel;
use serde::Serialize;

/// `{model, A, B, tc, m[, C1, C2, omega], sse, null_sse, sse_ratio, converged, starts_explored}`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResultJson {
    pub model: &'static str,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub tc: f64,
    pub m: f64,
    #[serde(rename = "C1", skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(rename = "C2", skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub sse: f64,
    pub null_sse: f64,
    pub sse_ratio: f64,
    pub converged: bool,
    pub starts_explored: usize,
}

impl From<&FitResult> for FitResultJson {
    fn from(fit: &FitResult) -> Self {
        let (c1, c2, omega) = match fit.params {
            BubbleModel::Fts(_) => (None, None, None),
            BubbleModel::Lppl(p) => (Some(p.c1), Some(p.c2), Some(p.omega)),
        };
        FitResultJson {
            model: fit.params.kind().name(),
            a: fit.params.a(),
            b: fit.params.b(),
            tc: fit.params.tc(),
            m: fit.params.m(),
            c1,
            c2,
            omega,
            sse: fit.sse,
            null_sse: fit.null_sse,
            sse_ratio: fit.sse_ratio,
            converged: fit.converged,
            starts_explored: fit.starts_explored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonJson {
    pub sse_ratio: f64,
    pub relative_improvement: f64,
    pub bubble_shape_ok: bool,
}

impl From<&ModelComparison> for ComparisonJson {
    fn from(c: &ModelComparison) -> Self {
        ComparisonJson {
            sse_ratio: c.sse_ratio,
            relative_improvement: c.relative_improvement,
            bubble_shape_ok: c.bubble_shape_ok,
        }
    }
}

/// CSV row and JSON object of a drawdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrawdownRow {
    pub peak_time: f64,
    pub trough_time: f64,
    pub magnitude: f64,
}

impl From<&Drawdown> for DrawdownRow {
    fn from(d: &Drawdown) -> Self {
        DrawdownRow {
            peak_time: d.peak_time,
            trough_time: d.trough_time,
            magnitude: d.magnitude,
        }
    }
}

impl From<&CrashEvent> for DrawdownRow {
    fn from(c: &CrashEvent) -> Self {
        DrawdownRow {
            peak_time: c.peak_time,
            trough_time: c.trough_time,
            magnitude: c.drop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashJson {
    pub peak_time: f64,
    pub peak_price: f64,
    pub trough_time: f64,
    pub trough_price: f64,
    pub drop: f64,
    pub duration_days: f64,
}

impl From<&CrashEvent> for CrashJson {
    fn from(c: &CrashEvent) -> Self {
        CrashJson {
            peak_time: c.peak_time,
            peak_price: c.peak_price,
            trough_time: c.trough_time,
            trough_price: c.trough_price,
            drop: c.drop,
            duration_days: c.duration_days,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BulkFitJson {
    pub d0: f64,
    pub z: f64,
    pub n_bulk: usize,
    pub cutoff: f64,
}

impl From<&StretchedExpFit> for BulkFitJson {
    fn from(f: &StretchedExpFit) -> Self {
        BulkFitJson {
            d0: f.d0,
            z: f.z,
            n_bulk: f.n_bulk,
            cutoff: f.cutoff,
        }
    }
}

/// Drawdowns as `peak_time,trough_time,magnitude` CSV.
pub fn drawdowns_csv(rows: &[DrawdownRow]) -> crate::Result<String> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| crate::Error::MalformedCsv {
            line: 0,
            reason: e.to_string(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::MalformedCsv {
        line: 0,
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfigJson {
    pub tc_grid: String,
    pub m_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub refine_max_iter: usize,
    pub refine_tol: f64,
    pub seed: u64,
    pub min_len: usize,
    pub n_refine: usize,
    pub restarts: usize,
    pub horizon_fraction: f64,
    pub tc_min_gap: f64,
    pub m_bounds: (f64, f64),
    pub omega_bounds: (f64, f64),
}

impl From<&FitConfig> for FitConfigJson {
    fn from(c: &FitConfig) -> Self {
        let tc_grid = match &c.tc_grid {
            TcGrid::Horizon { count, fraction } => format!("{count} values in (t_end, t_end + {fraction} * span]"),
            TcGrid::Explicit(v) => format!("{v:?}"),
        };
        FitConfigJson {
            tc_grid,
            m_grid: c.m_grid.clone(),
            omega_grid: c.omega_grid.clone(),
            refine_max_iter: c.refine_max_iter,
            refine_tol: c.refine_tol,
            seed: c.seed,
            min_len: c.min_len,
            n_refine: c.n_refine,
            restarts: c.restarts,
            horizon_fraction: c.horizon_fraction,
            tc_min_gap: c.tc_min_gap,
            m_bounds: c.m_bounds,
            omega_bounds: c.omega_bounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashRuleJson {
    pub threshold: f64,
    pub window_days: f64,
}

impl From<&CrashRule> for CrashRuleJson {
    fn from(r: &CrashRule) -> Self {
        CrashRuleJson {
            threshold: r.threshold,
            window_days: r.window_days,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfigJson {
    pub window_length: usize,
    pub step: usize,
    pub model: &'static str,
    pub improvement_min: f64,
    pub horizon_fraction: f64,
    pub crash: CrashRuleJson,
    pub lookback_days: f64,
    pub spread_sse_tol: f64,
    pub fit: FitConfigJson,
}

impl From<&ScanConfig> for ScanConfigJson {
    fn from(c: &ScanConfig) -> Self {
        ScanConfigJson {
            window_length: c.window_length,
            step: c.step,
            model: match c.model {
                ScanModel::Fts => "fts",
                ScanModel::Lppl => "lppl",
                ScanModel::Both => "both",
            },
            improvement_min: c.improvement_min,
            horizon_fraction: c.horizon_fraction,
            crash: (&c.crash).into(),
            lookback_days: c.lookback_days,
            spread_sse_tol: c.spread_sse_tol,
            fit: (&c.fit).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowJson {
    pub offset: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub bubble_flag: bool,
    pub flagged_by: Option<&'static str>,
    pub tc_estimate: f64,
    pub tc_spread: f64,
    pub fits: Vec<FitResultJson>,
    pub comparisons: Vec<ComparisonJson>,
}

impl From<&WindowDiagnosis> for WindowJson {
    fn from(w: &WindowDiagnosis) -> Self {
        WindowJson {
            offset: w.offset,
            t_start: w.t_start,
            t_end: w.t_end,
            bubble_flag: w.bubble_flag,
            flagged_by: w.flagged_by.map(|k| k.name()),
            tc_estimate: w.tc_estimate,
            tc_spread: w.tc_spread,
            fits: w.fits.iter().map(Into::into).collect(),
            comparisons: w.comparisons.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecedenceJson {
    pub crash_peak_time: f64,
    pub preceded: bool,
    pub window_offset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub windows: Vec<WindowJson>,
    pub crashes: Vec<CrashJson>,
    pub precedence: Vec<PrecedenceJson>,
    pub flag_rate: f64,
    /// Absent when the series has no crash.
    pub precedence_rate: Option<f64>,
}

impl From<&BubbleReport> for ReportJson {
    fn from(r: &BubbleReport) -> Self {
        ReportJson {
            windows: r.windows.iter().map(Into::into).collect(),
            crashes: r.crashes.iter().map(Into::into).collect(),
            precedence: r
                .precedence
                .iter()
                .map(|p| PrecedenceJson {
                    crash_peak_time: p.crash.peak_time,
                    preceded: p.preceded,
                    window_offset: p.window_offset,
                })
                .collect(),
            flag_rate: r.flag_rate(),
            precedence_rate: bubblescope_core::diagnose::precedence_rate(r).ok(),
        }
    }
}
