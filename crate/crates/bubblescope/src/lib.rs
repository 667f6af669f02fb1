//! File formats and batch front end for [`bubblescope_core`].
//!
//! - [`series`]: the `date,close` input format and the canonical JSON form of a
//!   price series.
//! - [`json`]: serialized fits, drawdown lists and scan reports.
//! - [`output`]: atomic file writes and TSV plot data.
//! - [`cli`]: the `bubblescope` command.

pub mod cli;
mod error;
pub mod json;
pub mod output;
pub mod series;

pub use bubblescope_core as core;
pub use error::{Error, Result};

use bubblescope_core::diagnose::{self, BubbleReport, ScanConfig};
use bubblescope_core::PriceSeries;
use rayon::prelude::*;

/// [`diagnose::scan`] with the windows classified on the rayon pool. The
/// report is identical to the sequential one.
pub fn scan_parallel(series: &PriceSeries, config: &ScanConfig) -> bubblescope_core::Result<BubbleReport> {
    config.validate()?;
    if series.len() < config.window_length {
        return Err(bubblescope_core::Error::TooShort {
            len: series.len(),
            min: config.window_length,
        });
    }
    let log = series.log_prices();
    let windows = config
        .window_offsets(series.len())
        .into_par_iter()
        .map(|offset| diagnose::classify_offset(&log, offset, config))
        .collect::<bubblescope_core::Result<Vec<_>>>()?;
    diagnose::assemble_report(series, windows, config)
}
