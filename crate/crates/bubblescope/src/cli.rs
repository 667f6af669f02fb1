//! The `bubblescope` command.
//!
//! Every subcommand reads at most one `date,close` file, writes its result
//! atomically to `--out` (or standard output when absent) and echoes the
//! resolved configuration inside the JSON it produces. Outputs depend only on
//! the inputs, the flags and `--seed`.

use std::path::{Path, PathBuf};

use bubblescope_core::calibrate::{self, FitConfig, ModelKind};
use bubblescope_core::diagnose::{ScanConfig, ScanModel};
use bubblescope_core::drawdowns::{self, CrashRule};
use bubblescope_core::models::{self, BubbleModel, FeedbackOdeParams, LpplParams, PowerLawFtsParams};
use bubblescope_core::synth::{self, GbmParams, IsingMarketParams};
use bubblescope_core::PriceSeries;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::json::{
    BulkFitJson, ComparisonJson, CrashJson, CrashRuleJson, DrawdownRow, FitConfigJson, FitResultJson, ReportJson,
    ScanConfigJson,
};
use crate::output::{plot_tsv, sibling_path, write_atomic};
use crate::series::{self, SeriesJson};
use crate::Result;

#[derive(Debug, Parser)]
#[command(
    name = "bubblescope",
    version,
    about = "Bubble and crash diagnostics for price series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a price file and write its canonical JSON form.
    Ingest(IngestArgs),
    /// Generate a synthetic price series as `date,close` CSV.
    Simulate(SimulateArgs),
    /// Calibrate a bubble model on a whole series.
    Fit(FitArgs),
    /// List drawdowns, crashes, the bulk fit and outliers.
    Drawdowns(DrawdownArgs),
    /// Slide windows over a series and report flagged bubbles.
    Scan(ScanArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Drawdowns(_) => "drawdowns",
            Command::Scan(_) => "scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Fts,
    Lppl,
}

impl From<FitModel> for ModelKind {
    fn from(m: FitModel) -> Self {
        match m {
            FitModel::Fts => ModelKind::Fts,
            FitModel::Lppl => ModelKind::Lppl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanModelArg {
    Fts,
    Lppl,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Gbm,
    Fts,
    Lppl,
    Feedback,
    Ising,
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// `date,close` CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: SimKind,
    /// Number of observations (sweeps + 1 for `ising`).
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Initial price (gbm, feedback, ising).
    #[arg(long, default_value_t = 100.0)]
    pub p0: f64,
    /// Daily log drift (gbm).
    #[arg(long, default_value_t = 0.0005, allow_negative_numbers = true)]
    pub mu: f64,
    /// Daily volatility (gbm).
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    /// Log-price noise scale (fts, lppl, feedback).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Critical time (fts, lppl); must exceed `n - 1`.
    #[arg(long, default_value_t = 300.0)]
    pub tc: f64,
    #[arg(long, default_value_t = 0.5)]
    pub m: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, default_value_t = -0.04, allow_negative_numbers = true)]
    pub c2: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega: f64,
    /// Feedback strength in `dp/dt = c p^2`.
    #[arg(long, default_value_t = 1e-5)]
    pub c: f64,
    #[arg(long, default_value_t = 1000)]
    pub agents: usize,
    /// Imitation strength `K` (ising).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Idiosyncratic noise scale (ising).
    #[arg(long, default_value_t = 1.0)]
    pub agent_noise: f64,
    #[arg(long, default_value_t = 100.0)]
    pub liquidity: f64,
    /// Ramp `K` linearly from `--ramp-start` to `--ramp-end` (ising).
    #[arg(long, requires = "ramp_end", allow_negative_numbers = true)]
    pub ramp_start: Option<f64>,
    #[arg(long, requires = "ramp_start", allow_negative_numbers = true)]
    pub ramp_end: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value_t = FitModel::Fts)]
    pub model: FitModel,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trading days per year for the annualized null growth rate.
    #[arg(long, default_value_t = 252.0)]
    pub days_per_year: f64,
    /// Also write `<out stem>.fit.tsv` with the data, null line and fit.
    #[arg(long, requires = "out")]
    pub emit_plot_data: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CrashArgs {
    /// Smallest drop that is not a crash.
    #[arg(long, default_value_t = 0.15)]
    pub crash_threshold: f64,
    /// Trading days allowed from peak to trough.
    #[arg(long, default_value_t = 15.0)]
    pub crash_window: f64,
}

impl CrashArgs {
    fn rule(&self) -> CrashRule {
        CrashRule {
            threshold: self.crash_threshold,
            window_days: self.crash_window,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DrawdownArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Relative rise tolerated inside a drawdown.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[command(flatten)]
    pub crash: CrashArgs,
    #[arg(long, default_value_t = 0.99)]
    pub bulk_quantile: f64,
    /// Expected-count cutoff below which a drawdown is an outlier.
    #[arg(long, default_value_t = 0.1)]
    pub king_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Observations per window.
    #[arg(long, default_value_t = 250)]
    pub window: usize,
    #[arg(long, default_value_t = 21)]
    pub step: usize,
    #[arg(long, value_enum, default_value_t = ScanModelArg::Fts)]
    pub model: ScanModelArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub crash: CrashArgs,
    #[arg(long, default_value_t = 0.25)]
    pub improvement_min: f64,
    /// Crash lookback in days for the precedence table.
    #[arg(long, default_value_t = 63.0)]
    pub lookback: f64,
    /// Also write `<out stem>.window-<offset>.tsv` per flagged window.
    #[arg(long, requires = "out")]
    pub emit_plot_data: bool,
}

impl ScanArgs {
    pub fn config(&self) -> ScanConfig {
        ScanConfig {
            window_length: self.window,
            step: self.step,
            model: match self.model {
                ScanModelArg::Fts => ScanModel::Fts,
                ScanModelArg::Lppl => ScanModel::Lppl,
                ScanModelArg::Both => ScanModel::Both,
            },
            improvement_min: self.improvement_min,
            crash: self.crash.rule(),
            lookback_days: self.lookback,
            fit: FitConfig {
                seed: self.seed,
                ..FitConfig::default()
            },
            ..ScanConfig::default()
        }
    }
}

/// Runs a parsed command and returns what goes to standard output.
pub fn run(command: &Command) -> Result<String> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Drawdowns(a) => drawdowns(a),
        Command::Scan(a) => scan(a),
    }
}

/// `{code, message, subcommand}` for a failed run.
pub fn error_json(err: &crate::Error, subcommand: &str) -> String {
    json!({ "code": err.code(), "message": err.to_string(), "subcommand": subcommand }).to_string()
}

fn emit(out: Option<&Path>, body: &str) -> Result<String> {
    match out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(body.to_owned()),
    }
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn ingest(a: &IngestArgs) -> Result<String> {
    let s = series::read_csv(&a.io.input)?;
    let body = json!({
        "subcommand": "ingest",
        "config": { "input": a.io.input },
        "series": SeriesJson::from(&s),
    });
    emit(a.io.out.as_deref(), &pretty(&body)?)
}

fn simulate(a: &SimulateArgs) -> Result<String> {
    let grid: Vec<f64> = (0..a.n).map(|i| i as f64).collect();
    let s: PriceSeries = match a.kind {
        SimKind::Gbm => synth::gen_gbm(
            &GbmParams {
                p0: a.p0,
                mu: a.mu,
                sigma: a.sigma,
                n: a.n,
            },
            a.seed,
        )?,
        SimKind::Fts => {
            let model = BubbleModel::Fts(PowerLawFtsParams {
                a: a.a,
                b: a.b,
                tc: a.tc,
                m: a.m,
            });
            synth::gen_fts(&model, a.noise, a.seed, &grid)?
        }
        SimKind::Lppl => {
            let model = BubbleModel::Lppl(LpplParams {
                a: a.a,
                b: a.b,
                tc: a.tc,
                m: a.m,
                c1: a.c1,
                c2: a.c2,
                omega: a.omega,
            });
            synth::gen_fts(&model, a.noise, a.seed, &grid)?
        }
        SimKind::Feedback => synth::gen_feedback(&FeedbackOdeParams::new(a.p0, a.c)?, a.noise, a.seed, &grid)?,
        SimKind::Ising => {
            let params = IsingMarketParams {
                n_agents: a.agents,
                coupling: a.coupling,
                sigma_noise: a.agent_noise,
                lambda_liquidity: a.liquidity,
                n_steps: a.n.saturating_sub(1),
                coupling_ramp: a.ramp_start.zip(a.ramp_end),
                p0: a.p0,
            };
            synth::gen_ising_market(&params, a.seed)?.series
        }
    };
    emit(a.out.as_deref(), &series::to_csv(&s))
}

fn fit(a: &FitArgs) -> Result<String> {
    let s = series::read_csv(&a.io.input)?;
    let config = FitConfig {
        seed: a.seed,
        ..FitConfig::default()
    };
    let log = s.log_prices();
    let result = calibrate::fit(&log, &config, a.model.into())?;
    let (null_fit, _) = models::fit_exponential(&log)?;
    let horizon = config.horizon_fraction * log.span();
    let comparison = calibrate::compare_to_null(&result, horizon);

    if a.emit_plot_data {
        if let Some(out) = &a.io.out {
            let rows: Vec<[f64; 4]> = log
                .times()
                .iter()
                .zip(log.values())
                .map(|(&t, &y)| [t, y, null_fit.eval(t), result.params.eval(t).unwrap_or(f64::NAN)])
                .collect();
            write_atomic(&sibling_path(out, "fit"), plot_tsv(&rows).as_bytes())?;
        }
    }

    let body = json!({
        "subcommand": "fit",
        "config": {
            "input": a.io.input,
            "model": ModelKind::from(a.model).name(),
            "days_per_year": a.days_per_year,
            "fit": FitConfigJson::from(&config),
        },
        "n_obs": result.n_obs,
        "t_start": result.t_start,
        "t_end": result.t_end,
        "fit": FitResultJson::from(&result),
        "null": {
            "A": null_fit.a,
            "B": null_fit.b,
            "annual_growth_rate": null_fit.annual_growth_rate(a.days_per_year),
        },
        "comparison": ComparisonJson::from(&comparison),
        "at_bound": {
            "tc": result.at_bound.tc,
            "m": result.at_bound.m,
            "omega": result.at_bound.omega,
        },
    });
    emit(a.io.out.as_deref(), &pretty(&body)?)
}

fn drawdowns(a: &DrawdownArgs) -> Result<String> {
    let s = series::read_csv(&a.io.input)?;
    let rule = a.crash.rule();
    let dds = drawdowns::extract_drawdowns(&s, a.epsilon)?;
    let crashes = drawdowns::detect_crashes(&s, &rule)?;
    let rows: Vec<DrawdownRow> = dds.iter().map(Into::into).collect();

    if a.io
        .out
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "csv"))
    {
        return emit(a.io.out.as_deref(), &crate::json::drawdowns_csv(&rows)?);
    }

    // The bulk fit needs enough drawdowns; short series report it as absent
    // with the reason.
    let (bulk, kings, bulk_error) = match drawdowns::fit_bulk(&dds, a.bulk_quantile) {
        Ok(fit) => {
            let kings: Vec<DrawdownRow> = drawdowns::flag_kings(&dds, &fit, a.king_max)
                .iter()
                .map(Into::into)
                .collect();
            (Some(BulkFitJson::from(&fit)), kings, None)
        }
        Err(e) => (None, Vec::new(), Some(e.code())),
    };
    let body = json!({
        "subcommand": "drawdowns",
        "config": {
            "input": a.io.input,
            "epsilon": a.epsilon,
            "crash": CrashRuleJson::from(&rule),
            "bulk_quantile": a.bulk_quantile,
            "king_max": a.king_max,
        },
        "drawdowns": rows,
        "crashes": crashes.iter().map(CrashJson::from).collect::<Vec<_>>(),
        "bulk_fit": bulk,
        "bulk_fit_error": bulk_error,
        "kings": kings,
    });
    emit(a.io.out.as_deref(), &pretty(&body)?)
}

fn scan(a: &ScanArgs) -> Result<String> {
    let s = series::read_csv(&a.io.input)?;
    let config = a.config();
    let report = crate::scan_parallel(&s, &config)?;

    if a.emit_plot_data {
        if let Some(out) = &a.io.out {
            let log = s.log_prices();
            for w in report.windows.iter().filter(|w| w.bubble_flag) {
                let window = log.slice(w.offset, config.window_length)?;
                let path = sibling_path(out, &format!("window-{}", w.offset));
                write_atomic(&path, plot_tsv(&w.curve_rows(&window)).as_bytes())?;
            }
        }
    }

    let mut body = serde_json::to_value(ReportJson::from(&report))?;
    if let Value::Object(map) = &mut body {
        map.insert("subcommand".into(), json!("scan"));
        map.insert(
            "config".into(),
            json!({ "input": a.io.input, "scan": ScanConfigJson::from(&config) }),
        );
    }
    emit(a.io.out.as_deref(), &pretty(&body)?)
}
