#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Detection of transient super-exponential ("bubble") regimes in price
//! series.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the numerical
//! pieces of the toolkit:
//!
//! - [`timeseries`]: validated price series, log transform and windowing.
//! - [`models`]: exponential baseline, power law with a finite-time
//!   singularity, its log-periodic extension and the `dp/dt = c p²` solution.
//! - [`calibrate`]: multi-start profiled least squares calibration.
//! - [`drawdowns`]: drawdown extraction, crash detection, bulk fitting and
//!   outlier ("king") flagging.
//! - [`synth`]: seeded generators with known ground truth, including an
//!   Ising herding market.
//! - [`diagnose`]: sliding-window scans assembling a bubble report.
//!
//! File formats and the command line front end live in the `bubblescope`
//! crate.

extern crate alloc;

pub mod calibrate;
pub mod diagnose;
pub mod drawdowns;
mod error;
mod linalg;
pub mod models;
pub mod simplex;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
pub use timeseries::{LogPriceSeries, PriceSeries};
