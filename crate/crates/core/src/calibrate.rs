//! Calibration of the power-law and log-periodic models.
//!
//! The linear parameters (`A, B` and for LPPL `C1, C2`) are profiled out by
//! least squares for every trial `(t_c, m[, ω])`. The remaining nonlinear
//! search is a grid over the candidate values followed by a bounded simplex
//! refinement of the best grid points.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::least_squares;
use crate::models::{self, BubbleModel, LpplParams, PowerLawFtsParams};
use crate::simplex::{self, Bounds};
use crate::{Error, LogPriceSeries, Result};

pub use crate::models::ModelKind;

/// Candidate critical times.
#[derive(Debug, Clone, PartialEq)]
pub enum TcGrid {
    /// `count` evenly spaced values in `(t_end, t_end + fraction · span]`.
    Horizon { count: usize, fraction: f64 },
    /// Absolute critical times.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub tc_grid: TcGrid,
    pub m_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub refine_max_iter: usize,
    pub refine_tol: f64,
    /// Seeds the step jitter of the simplex restarts.
    pub seed: u64,
    pub min_len: usize,
    /// Number of best grid points handed to the local refinement.
    pub n_refine: usize,
    /// Jittered simplex restarts after each refinement converges.
    pub restarts: usize,
    /// `t_c` may lie at most `horizon_fraction · span` past the window end.
    pub horizon_fraction: f64,
    /// Smallest allowed `t_c - t_end` in days.
    pub tc_min_gap: f64,
    pub m_bounds: (f64, f64),
    pub omega_bounds: (f64, f64),
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tc_grid: TcGrid::Horizon {
                count: 20,
                fraction: 0.5,
            },
            m_grid: (1..=9).map(|k| k as f64 / 10.0).collect(),
            omega_grid: (0..15).map(|k| 3.0 + 1.5 * k as f64).collect(),
            refine_max_iter: 500,
            refine_tol: 1e-9,
            seed: 0,
            min_len: 30,
            n_refine: 5,
            restarts: 1,
            horizon_fraction: 0.5,
            tc_min_gap: 0.1,
            m_bounds: (0.01, 0.99),
            omega_bounds: (1.0, 30.0),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let grid_ok = match &self.tc_grid {
            TcGrid::Horizon { count, fraction } => *count > 0 && *fraction > 0.0,
            TcGrid::Explicit(v) => !v.is_empty(),
        };
        if !grid_ok || self.m_grid.is_empty() || self.omega_grid.is_empty() {
            return Err(Error::InvalidParameter("search grids must be non-empty"));
        }
        if self.m_grid.iter().any(|&m| m == 0.0 || !m.is_finite()) {
            return Err(Error::InvalidParameter("m grid must be finite and non-zero"));
        }
        if self.omega_grid.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter("omega grid must be positive"));
        }
        if !(self.m_bounds.0 < self.m_bounds.1) || !(self.omega_bounds.0 < self.omega_bounds.1) {
            return Err(Error::InvalidParameter("empty parameter bounds"));
        }
        if !(self.horizon_fraction > 0.0) || !(self.tc_min_gap > 0.0) || self.n_refine == 0 {
            return Err(Error::InvalidParameter(
                "horizon, tc gap and refine count must be positive",
            ));
        }
        Ok(())
    }

    fn tc_candidates(&self, t_end: f64, span: f64) -> Result<Vec<f64>> {
        let tcs: Vec<f64> = match &self.tc_grid {
            TcGrid::Horizon { count, fraction } => {
                let h = fraction * span;
                (1..=*count).map(|k| t_end + h * k as f64 / *count as f64).collect()
            }
            TcGrid::Explicit(v) => v.clone(),
        };
        if tcs.iter().any(|&tc| !(tc > t_end)) {
            return Err(Error::InvalidParameter(
                "critical time candidates must follow the window",
            ));
        }
        Ok(tcs)
    }
}

/// Ordering key used to break ties between starts.
fn tie_key(p: &BubbleModel) -> (f64, f64, f64) {
    (p.tc(), p.m(), p.omega().unwrap_or(0.0))
}

/// Parameters and SSE of one calibration start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub params: BubbleModel,
    pub sse: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        let a = (self.sse, tie_key(&self.params));
        let b = (other.sse, tie_key(&other.params));
        a.0.total_cmp(&b.0)
            .then(a.1 .0.total_cmp(&b.1 .0))
            .then(a.1 .1.total_cmp(&b.1 .1))
            .then(a.1 .2.total_cmp(&b.1 .2))
            .is_lt()
    }
}

/// Which search bounds the winning parameters sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundHits {
    pub tc: bool,
    pub m: bool,
    pub omega: bool,
}

impl BoundHits {
    pub fn any(&self) -> bool {
        self.tc || self.m || self.omega
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: BubbleModel,
    pub sse: f64,
    pub n_obs: usize,
    /// SSE of the log-linear (exponential growth) fit on the same window.
    pub null_sse: f64,
    pub sse_ratio: f64,
    pub converged: bool,
    pub starts_explored: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Result of every refined start, best first.
    pub refined: Vec<Candidate>,
    pub at_bound: BoundHits,
}

/// Outcome of [`compare_to_null`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelComparison {
    pub sse_ratio: f64,
    pub relative_improvement: f64,
    pub bubble_shape_ok: bool,
}

/// Exact least-squares solution for the linear parameters at fixed
/// `(t_c, m[, ω])`.
pub fn profile_linear(series: &LogPriceSeries, tc: f64, m: f64, omega: Option<f64>) -> Result<Candidate> {
    let t_end = series.last_time();
    if !(tc > t_end) {
        return Err(Error::BeyondSingularity { t: t_end, tc });
    }
    if m == 0.0 || !m.is_finite() {
        return Err(Error::DegenerateDesign("zero exponent makes the power law constant"));
    }
    let n = series.len();
    let kind = if omega.is_some() {
        ModelKind::Lppl
    } else {
        ModelKind::Fts
    };
    let k = kind.linear_params();
    if n < k {
        return Err(Error::DegenerateDesign("fewer observations than linear parameters"));
    }
    let ln_dt: Vec<f64> = series.times().iter().map(|&t| libm::log(tc - t)).collect();
    let power: Vec<f64> = ln_dt.iter().map(|&l| libm::exp(m * l)).collect();
    let ls = match omega {
        None => least_squares(n, 2, series.values(), |j, i| if j == 0 { 1.0 } else { power[i] })?,
        Some(w) => {
            let (sin, cos): (Vec<f64>, Vec<f64>) = ln_dt.iter().map(|&l| libm::sincos(w * l)).unzip();
            least_squares(n, 4, series.values(), |j, i| match j {
                0 => 1.0,
                1 => power[i],
                2 => power[i] * cos[i],
                _ => power[i] * sin[i],
            })?
        }
    };
    let c = &ls.coef;
    let params = match omega {
        None => BubbleModel::Fts(PowerLawFtsParams {
            a: c[0],
            b: c[1],
            tc,
            m,
        }),
        Some(omega) => BubbleModel::Lppl(LpplParams {
            a: c[0],
            b: c[1],
            tc,
            m,
            c1: c[2],
            c2: c[3],
            omega,
        }),
    };
    Ok(Candidate { params, sse: ls.sse })
}

pub fn fit_fts(series: &LogPriceSeries, config: &FitConfig) -> Result<FitResult> {
    fit(series, config, ModelKind::Fts)
}

pub fn fit_lppl(series: &LogPriceSeries, config: &FitConfig) -> Result<FitResult> {
    fit(series, config, ModelKind::Lppl)
}

pub fn fit(series: &LogPriceSeries, config: &FitConfig, kind: ModelKind) -> Result<FitResult> {
    config.validate()?;
    let n = series.len();
    if n < config.min_len.max(kind.linear_params()) {
        return Err(Error::TooShort {
            len: n,
            min: config.min_len.max(kind.linear_params()),
        });
    }
    let y = series.values();
    let y0 = y[0];
    if y.iter().all(|&v| v == y0) {
        return Err(Error::DegenerateDesign("constant log price"));
    }
    let (_, null_sse) = models::fit_exponential(series)?;

    let t_end = series.last_time();
    let span = series.span();
    let tcs = config.tc_candidates(t_end, span)?;
    let omegas: &[f64] = match kind {
        ModelKind::Fts => &[f64::NAN],
        ModelKind::Lppl => &config.omega_grid,
    };
    let omega_of = |w: f64| if kind == ModelKind::Lppl { Some(w) } else { None };

    let mut grid: Vec<Candidate> = Vec::with_capacity(tcs.len() * config.m_grid.len() * omegas.len());
    let mut starts_explored = 0;
    for &tc in &tcs {
        for &m in &config.m_grid {
            for &w in omegas {
                starts_explored += 1;
                if let Ok(c) = profile_linear(series, tc, m, omega_of(w)) {
                    if c.sse.is_finite() {
                        grid.push(c);
                    }
                }
            }
        }
    }
    if grid.is_empty() {
        return Err(Error::NoFit);
    }
    grid.sort_by(|a, b| {
        if a.better_than(b) {
            core::cmp::Ordering::Less
        } else if b.better_than(a) {
            core::cmp::Ordering::Greater
        } else {
            core::cmp::Ordering::Equal
        }
    });
    grid.truncate(config.n_refine);

    let tc_hi = tcs
        .iter()
        .copied()
        .fold(t_end + config.horizon_fraction * span, f64::max);
    let tc_lo = (t_end + config.tc_min_gap).min(tc_hi);
    let mut lower = alloc::vec![tc_lo, config.m_bounds.0];
    let mut upper = alloc::vec![tc_hi, config.m_bounds.1];
    let tc_step = (tc_hi - t_end) / tcs.len().max(1) as f64;
    let mut step = alloc::vec![tc_step.max(config.tc_min_gap), 0.1];
    if kind == ModelKind::Lppl {
        lower.push(config.omega_bounds.0);
        upper.push(config.omega_bounds.1);
        step.push(1.5);
    }
    let bounds = Bounds::new(lower, upper);
    let opts = simplex::Options {
        max_iter: config.refine_max_iter,
        ftol: config.refine_tol,
        xtol: 1e-10,
    };

    let objective = |x: &[f64]| -> f64 {
        let omega = if kind == ModelKind::Lppl { Some(x[2]) } else { None };
        profile_linear(series, x[0], x[1], omega)
            .map(|c| c.sse)
            .unwrap_or(f64::INFINITY)
    };

    let mut refined: Vec<(Candidate, bool)> = Vec::with_capacity(grid.len());
    for (idx, start) in grid.iter().enumerate() {
        let mut x0 = alloc::vec![start.params.tc(), start.params.m()];
        if let Some(w) = start.params.omega() {
            x0.push(w);
        }
        let mut best = simplex::minimize(objective, &x0, &step, &bounds, &opts);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((idx as u64 + 1) << 32));
        for _ in 0..config.restarts {
            let jittered: Vec<f64> = step.iter().map(|s| s * rng.random_range(0.25..1.0)).collect();
            let again = simplex::minimize(objective, &best.x, &jittered, &bounds, &opts);
            if again.value < best.value {
                best = again;
            } else {
                best.converged &= again.converged;
                break;
            }
        }
        let omega = if kind == ModelKind::Lppl { Some(best.x[2]) } else { None };
        let cand = match profile_linear(series, best.x[0], best.x[1], omega) {
            Ok(c) if c.sse <= start.sse => c,
            _ => *start,
        };
        refined.push((cand, best.converged));
    }
    refined.sort_by(|a, b| {
        if a.0.better_than(&b.0) {
            core::cmp::Ordering::Less
        } else if b.0.better_than(&a.0) {
            core::cmp::Ordering::Greater
        } else {
            core::cmp::Ordering::Equal
        }
    });
    let (winner, converged) = refined[0];

    let eps = 1e-9;
    let at_bound = BoundHits {
        tc: winner.params.tc() <= tc_lo + eps * span.max(1.0) || winner.params.tc() >= tc_hi - eps * span.max(1.0),
        m: winner.params.m() <= config.m_bounds.0 + eps || winner.params.m() >= config.m_bounds.1 - eps,
        omega: winner
            .params
            .omega()
            .is_some_and(|w| w <= config.omega_bounds.0 + eps || w >= config.omega_bounds.1 - eps),
    };

    Ok(FitResult {
        params: winner.params,
        sse: winner.sse,
        n_obs: n,
        null_sse,
        sse_ratio: sse_ratio(winner.sse, null_sse, y),
        converged,
        starts_explored,
        t_start: series.first_time(),
        t_end,
        refined: refined.into_iter().map(|(c, _)| c).collect(),
        at_bound,
    })
}

/// `sse / null_sse`, or 1 when the null already fits to round-off (no
/// improvement is then measurable).
fn sse_ratio(sse: f64, null_sse: f64, y: &[f64]) -> f64 {
    let scale = y.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let floor = y.len() as f64 * (1e-12 * scale) * (1e-12 * scale);
    if null_sse <= floor {
        1.0
    } else {
        sse / null_sse
    }
}

/// Compares a fit with the exponential null. `horizon` is the largest
/// accepted `t_c - t_end` in days.
pub fn compare_to_null(fit: &FitResult, horizon: f64) -> ModelComparison {
    let p = &fit.params;
    let dt = p.tc() - fit.t_end;
    ModelComparison {
        sse_ratio: fit.sse_ratio,
        relative_improvement: 1.0 - fit.sse_ratio,
        bubble_shape_ok: p.b() < 0.0 && p.m() > 0.0 && p.m() < 1.0 && dt > 0.0 && dt <= horizon,
    }
}
