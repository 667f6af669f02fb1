//! Model family: exponential baseline, power law with a finite-time
//! singularity, its log-periodic extension and the closed-form solution of
//! `dp/dt = c p²`.
//!
//! Evaluators accept any exponent `m` (including negative ones); only the
//! bubble classifier restricts fits to `B < 0, 0 < m < 1`.

use core::f64::consts::PI;

use crate::{Error, LogPriceSeries, Result};

/// `ln p(t) = A + B (t_c - t)^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFtsParams {
    /// Log-price level reached at the critical time.
    pub a: f64,
    pub b: f64,
    /// Critical time in days.
    pub tc: f64,
    pub m: f64,
}

/// Power law decorated with oscillations periodic in `ln(t_c - t)`:
///
/// `ln p(t) = A + (t_c - t)^m [B + C1 cos(ω ln(t_c - t)) + C2 sin(ω ln(t_c - t))]`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpplParams {
    pub a: f64,
    pub b: f64,
    pub tc: f64,
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    /// Angular log-frequency, positive.
    pub omega: f64,
}

impl LpplParams {
    /// `sqrt(C1² + C2²)`.
    pub fn amplitude(&self) -> f64 {
        libm::hypot(self.c1, self.c2)
    }

    pub fn phase(&self) -> f64 {
        libm::atan2(self.c2, self.c1)
    }

    /// Preferred scaling ratio `exp(2π / ω)` of the discrete scale invariance.
    pub fn scaling_ratio(&self) -> f64 {
        libm::exp(2.0 * PI / self.omega)
    }

    /// The non-oscillating part.
    pub fn power_law(&self) -> PowerLawFtsParams {
        PowerLawFtsParams {
            a: self.a,
            b: self.b,
            tc: self.tc,
            m: self.m,
        }
    }
}

impl From<PowerLawFtsParams> for LpplParams {
    fn from(p: PowerLawFtsParams) -> Self {
        LpplParams {
            a: p.a,
            b: p.b,
            tc: p.tc,
            m: p.m,
            c1: 0.0,
            c2: 0.0,
            omega: 1.0,
        }
    }
}

/// Log-linear fit `ln p = a + b t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFitParams {
    pub a: f64,
    /// Growth rate per day.
    pub b: f64,
}

impl ExpFitParams {
    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t
    }

    /// Continuously compounded growth rate over `days_per_year` trading days.
    pub fn annual_growth_rate(&self, days_per_year: f64) -> f64 {
        self.b * days_per_year
    }
}

/// Parameters of `dp/dt = c p²` started from `p(0) = p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackOdeParams {
    pub p0: f64,
    /// Feedback coefficient, 1 / (price · day).
    pub c: f64,
}

impl FeedbackOdeParams {
    pub fn new(p0: f64, c: f64) -> Result<Self> {
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::InvalidParameter("p0 must be positive"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter("feedback coefficient must be positive"));
        }
        Ok(Self { p0, c })
    }

    /// Blow-up time `1 / (c p0)`.
    pub fn critical_time(&self) -> f64 {
        1.0 / (self.c * self.p0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Fts,
    Lppl,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Fts => "fts",
            ModelKind::Lppl => "lppl",
        }
    }

    pub(crate) fn linear_params(self) -> usize {
        match self {
            ModelKind::Fts => 2,
            ModelKind::Lppl => 4,
        }
    }
}

/// Either member of the bubble model family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BubbleModel {
    Fts(PowerLawFtsParams),
    Lppl(LpplParams),
}

impl BubbleModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            BubbleModel::Fts(_) => ModelKind::Fts,
            BubbleModel::Lppl(_) => ModelKind::Lppl,
        }
    }

    pub fn a(&self) -> f64 {
        match self {
            BubbleModel::Fts(p) => p.a,
            BubbleModel::Lppl(p) => p.a,
        }
    }

    pub fn b(&self) -> f64 {
        match self {
            BubbleModel::Fts(p) => p.b,
            BubbleModel::Lppl(p) => p.b,
        }
    }

    pub fn tc(&self) -> f64 {
        match self {
            BubbleModel::Fts(p) => p.tc,
            BubbleModel::Lppl(p) => p.tc,
        }
    }

    pub fn m(&self) -> f64 {
        match self {
            BubbleModel::Fts(p) => p.m,
            BubbleModel::Lppl(p) => p.m,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match self {
            BubbleModel::Fts(_) => None,
            BubbleModel::Lppl(p) => Some(p.omega),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            BubbleModel::Fts(p) => eval_fts_log_price(p, t),
            BubbleModel::Lppl(p) => eval_lppl_log_price(p, t),
        }
    }
}

#[inline]
fn distance_to_tc(tc: f64, t: f64) -> Result<f64> {
    let dt = tc - t;
    if dt > 0.0 {
        Ok(dt)
    } else {
        Err(Error::BeyondSingularity { t, tc })
    }
}

pub fn eval_fts_log_price(params: &PowerLawFtsParams, t: f64) -> Result<f64> {
    let dt = distance_to_tc(params.tc, t)?;
    Ok(params.a + params.b * libm::pow(dt, params.m))
}

pub fn eval_lppl_log_price(params: &LpplParams, t: f64) -> Result<f64> {
    let dt = distance_to_tc(params.tc, t)?;
    let ln_dt = libm::log(dt);
    let (s, c) = libm::sincos(params.omega * ln_dt);
    Ok(params.a + libm::pow(dt, params.m) * (params.b + params.c1 * c + params.c2 * s))
}

/// Exact solution `p0 / (1 - c p0 t)`. Also valid for `t < 0`.
pub fn eval_feedback_price(params: &FeedbackOdeParams, t: f64) -> Result<f64> {
    let tc = params.critical_time();
    distance_to_tc(tc, t)?;
    Ok(params.p0 / (1.0 - params.c * params.p0 * t))
}

/// Ordinary least squares of log price on time. Returns the line and its
/// sum of squared residuals.
pub fn fit_exponential(series: &LogPriceSeries) -> Result<(ExpFitParams, f64)> {
    let t = series.times();
    let y = series.values();
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (ti, yi) in t.iter().zip(y) {
        let dt = ti - t_mean;
        stt += dt * dt;
        sty += dt * (yi - y_mean);
    }
    if !(stt > 0.0) {
        return Err(Error::DegenerateDesign("constant time axis"));
    }
    let b = sty / stt;
    let line = ExpFitParams {
        a: y_mean - b * t_mean,
        b,
    };
    let sse = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let r = yi - line.eval(ti);
            r * r
        })
        .sum();
    Ok((line, sse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use core::f64::consts::E;

    #[test]
    fn fts_examples() {
        let p = PowerLawFtsParams {
            a: 0.0,
            b: -1.0,
            tc: 100.0,
            m: 0.5,
        };
        assert_eq!(eval_fts_log_price(&p, 99.0).unwrap(), -1.0);
        let p = PowerLawFtsParams {
            a: 1.0,
            b: -2.0,
            tc: 10.0,
            m: 0.5,
        };
        assert_eq!(eval_fts_log_price(&p, 6.0).unwrap(), -3.0);
        let p = PowerLawFtsParams {
            a: 5.0,
            b: -1.0,
            tc: 10.0,
            m: 0.5,
        };
        let near = eval_fts_log_price(&p, 10.0 - 1e-12).unwrap();
        assert!((near - 5.0).abs() < 1e-5);
        assert_eq!(eval_fts_log_price(&p, 10.0).unwrap_err().code(), "BeyondSingularity");
    }

    #[test]
    fn lppl_examples() {
        let p = LpplParams {
            a: 0.3,
            b: -1.2,
            tc: 50.0,
            m: 0.4,
            c1: 0.0,
            c2: 0.0,
            omega: 7.0,
        };
        for t in [0.0, 12.5, 49.0, 49.999] {
            assert_eq!(
                eval_lppl_log_price(&p, t).unwrap(),
                eval_fts_log_price(&p.power_law(), t).unwrap()
            );
        }
        let p = LpplParams {
            a: 2.0,
            b: -1.0,
            tc: 10.0,
            m: 0.7,
            c1: 0.25,
            c2: 0.9,
            omega: 6.0,
        };
        let v = eval_lppl_log_price(&p, 9.0).unwrap();
        assert!((v - (2.0 - 1.0 + 0.25)).abs() < 1e-15);

        let p = LpplParams {
            a: 0.0,
            b: -1.0,
            tc: E,
            m: 1.0,
            c1: 0.0,
            c2: 1.0,
            omega: PI,
        };
        let v = eval_lppl_log_price(&p, 0.0).unwrap();
        // sin(π) is ~1.2e-16 in floating point, not zero
        assert!((v + E).abs() < 1e-14);
        assert!(eval_lppl_log_price(&p, 3.0).is_err());
    }

    #[test]
    fn lppl_derived_quantities() {
        let p = LpplParams {
            a: 0.0,
            b: -1.0,
            tc: 1.0,
            m: 0.5,
            c1: 3.0,
            c2: 4.0,
            omega: 2.0 * PI,
        };
        assert!((p.amplitude() - 5.0).abs() < 1e-15);
        assert!((p.phase() - libm::atan2(4.0, 3.0)).abs() < 1e-15);
        assert!((p.scaling_ratio() - E).abs() < 1e-15);
    }

    #[test]
    fn feedback_examples() {
        let p = FeedbackOdeParams::new(1.0, 1.0).unwrap();
        assert_eq!(eval_feedback_price(&p, 0.5).unwrap(), 2.0);
        assert_eq!(eval_feedback_price(&p, 0.0).unwrap(), 1.0);
        assert_eq!(eval_feedback_price(&p, 1.0).unwrap_err().code(), "BeyondSingularity");
        let p = FeedbackOdeParams::new(50.0, 0.01).unwrap();
        assert_eq!(p.critical_time(), 2.0);
        assert!((eval_feedback_price(&p, 1.0).unwrap() - 100.0).abs() < 1e-12);
        assert!(FeedbackOdeParams::new(0.0, 1.0).is_err());
        assert!(FeedbackOdeParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn feedback_matches_rk4_integration() {
        // independent route: classical RK4 on dp/dt = c p² with h = 1e-5
        let p = FeedbackOdeParams::new(50.0, 0.01).unwrap();
        let h = 1e-5;
        let f = |y: f64| p.c * y * y;
        let mut y = p.p0;
        for _ in 0..100_000 {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let exact = eval_feedback_price(&p, 1.0).unwrap();
        assert!(((y - exact) / exact).abs() < 1e-9, "rk4 {y} vs {exact}");
    }

    #[test]
    fn feedback_satisfies_ode_by_central_difference() {
        let p = FeedbackOdeParams::new(2.0, 0.1).unwrap();
        let t = 3.0;
        let mut prev_err = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let d = (eval_feedback_price(&p, t + h).unwrap() - eval_feedback_price(&p, t - h).unwrap()) / (2.0 * h);
            let v = eval_feedback_price(&p, t).unwrap();
            let err = ((d - p.c * v * v) / (p.c * v * v)).abs();
            assert!(err < prev_err / 3.0, "error must shrink roughly as h²");
            prev_err = err;
        }
    }

    #[test]
    fn exponential_fit_examples() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.1 * t + 3.0).collect();
        let (line, sse) = fit_exponential(&LogPriceSeries::new(t, y).unwrap()).unwrap();
        assert!((line.a - 3.0).abs() < 1e-12 && (line.b - 0.1).abs() < 1e-13);
        assert!(sse < 1e-24);

        let (_, sse) = fit_exponential(&LogPriceSeries::new(vec![3.0, 7.0], vec![1.5, -0.2]).unwrap()).unwrap();
        assert!(sse < 1e-28);

        let s = LogPriceSeries::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        let (line, sse) = fit_exponential(&s).unwrap();
        assert!(line.b.abs() < 1e-15);
        assert!((line.a - 1.0 / 3.0).abs() < 1e-15);
        assert!((sse - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn growth_rate_accelerates_toward_tc() {
        let p = PowerLawFtsParams {
            a: 4.0,
            b: -0.8,
            tc: 200.0,
            m: 0.35,
        };
        let grid: Vec<f64> = (0..100).map(|i| 150.0 + 49.0 * i as f64 / 99.0).collect();
        let mut last_rate = f64::NEG_INFINITY;
        for w in grid.windows(2) {
            let rate = (eval_fts_log_price(&p, w[1]).unwrap() - eval_fts_log_price(&p, w[0]).unwrap()) / (w[1] - w[0]);
            assert!(rate > 0.0 && rate > last_rate);
            last_rate = rate;
        }
    }

    #[test]
    fn exponent_near_one_is_a_line() {
        let m = 1.0 - 1e-9;
        let p = PowerLawFtsParams {
            a: 1.0,
            b: -0.02,
            tc: 400.0,
            m,
        };
        for i in 0..=300 {
            let t = i as f64;
            let line = (p.a + p.b * p.tc) - p.b * t;
            assert!((eval_fts_log_price(&p, t).unwrap() - line).abs() < 1e-6);
        }
    }

    #[test]
    fn price_scale_only_moves_level() {
        let k: f64 = 37.5;
        let p = LpplParams {
            a: 1.0,
            b: -0.5,
            tc: 90.0,
            m: 0.6,
            c1: 0.05,
            c2: -0.02,
            omega: 9.0,
        };
        let q = LpplParams {
            a: p.a + libm::log(k),
            ..p
        };
        for t in [0.0, 30.0, 89.5] {
            let lhs = eval_lppl_log_price(&q, t).unwrap();
            let rhs = eval_lppl_log_price(&p, t).unwrap() + libm::log(k);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
