//! Seeded generators of synthetic prices with known ground truth.
//!
//! Every generator owns a `ChaCha8Rng` seeded from the caller's `u64`, so a
//! given `(params, seed)` always reproduces the same path bit for bit.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::models::{self, BubbleModel, FeedbackOdeParams};
use crate::{Error, PriceSeries, Result};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Geometric random walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub p0: f64,
    /// Log drift per day.
    pub mu: f64,
    /// Volatility per square-root day.
    pub sigma: f64,
    pub n: usize,
}

/// `ln p[i+1] = ln p[i] + mu + sigma ξ_i` with standard normal `ξ_i`.
pub fn gen_gbm(params: &GbmParams, seed: u64) -> Result<PriceSeries> {
    if !(params.p0 > 0.0 && params.p0.is_finite()) || !(params.sigma >= 0.0) || params.n < 2 {
        return Err(Error::InvalidParameter("gbm needs p0 > 0, sigma >= 0 and n >= 2"));
    }
    let mut rng = rng(seed);
    let mut logp = libm::log(params.p0);
    let mut prices = Vec::with_capacity(params.n);
    prices.push(params.p0);
    for _ in 1..params.n {
        let xi: f64 = rng.sample(StandardNormal);
        logp += params.mu + params.sigma * xi;
        prices.push(libm::exp(logp));
    }
    PriceSeries::from_prices(prices, format!("gbm seed={seed}"))
}

/// Bubble model on `t_grid` plus i.i.d. Gaussian log-price noise.
pub fn gen_fts(model: &BubbleModel, noise_sigma: f64, seed: u64, t_grid: &[f64]) -> Result<PriceSeries> {
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("noise sigma must be non-negative"));
    }
    let mut rng = rng(seed);
    let mut prices = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let clean = model.eval(t)?;
        let xi: f64 = rng.sample(StandardNormal);
        prices.push(libm::exp(clean + noise_sigma * xi));
    }
    PriceSeries::new(t_grid.to_vec(), prices, format!("{} seed={seed}", model.kind().name()))
}

/// Solution of `dp/dt = c p²` with multiplicative log-normal noise.
pub fn gen_feedback(params: &FeedbackOdeParams, noise_sigma: f64, seed: u64, t_grid: &[f64]) -> Result<PriceSeries> {
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("noise sigma must be non-negative"));
    }
    let mut rng = rng(seed);
    let mut prices = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let clean = models::eval_feedback_price(params, t)?;
        let xi: f64 = rng.sample(StandardNormal);
        prices.push(if noise_sigma == 0.0 {
            clean
        } else {
            clean * libm::exp(noise_sigma * xi)
        });
    }
    PriceSeries::new(t_grid.to_vec(), prices, format!("feedback seed={seed}"))
}

/// Mean-field Ising market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingMarketParams {
    pub n_agents: usize,
    /// Imitation strength `K`.
    pub coupling: f64,
    /// Scale of the idiosyncratic (private information) term.
    pub sigma_noise: f64,
    /// Divides the magnetization to give the per-sweep log return. May be
    /// infinite (no price impact).
    pub lambda_liquidity: f64,
    pub n_steps: usize,
    /// Linear ramp of `K` from the first to the second value over the run,
    /// replacing `coupling`.
    pub coupling_ramp: Option<(f64, f64)>,
    pub p0: f64,
}

impl Default for IsingMarketParams {
    fn default() -> Self {
        Self {
            n_agents: 1000,
            coupling: 0.5,
            sigma_noise: 1.0,
            lambda_liquidity: 100.0,
            n_steps: 500,
            coupling_ramp: None,
            p0: 100.0,
        }
    }
}

impl IsingMarketParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 || self.n_steps == 0 {
            return Err(Error::InvalidParameter("ising market needs >= 2 agents and >= 1 step"));
        }
        if !(self.sigma_noise > 0.0) || !(self.lambda_liquidity > 0.0) || !(self.p0 > 0.0) {
            return Err(Error::InvalidParameter("noise, liquidity and p0 must be positive"));
        }
        let finite = |k: f64| k.is_finite();
        let ramp_ok = self.coupling_ramp.is_none_or(|(a, b)| finite(a) && finite(b));
        if !finite(self.coupling) || !ramp_ok {
            return Err(Error::InvalidParameter("coupling must be finite"));
        }
        Ok(())
    }

    /// Coupling used during sweep `step` (0-based).
    pub fn coupling_at(&self, step: usize) -> f64 {
        match self.coupling_ramp {
            None => self.coupling,
            Some((start, end)) if self.n_steps > 1 => start + (end - start) * step as f64 / (self.n_steps - 1) as f64,
            Some((start, _)) => start,
        }
    }
}

/// Agent stances (`+1` buy, `-1` sell) and the current log price.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingState {
    spins: Vec<i8>,
    spin_sum: i64,
    pub logp: f64,
}

impl IsingState {
    pub fn new(spins: Vec<i8>, logp: f64) -> Result<Self> {
        if spins.len() < 2 || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(
                "spins must be +1 or -1 for at least two agents",
            ));
        }
        let spin_sum = spins.iter().map(|&s| s as i64).sum();
        Ok(Self { spins, spin_sum, logp })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Arithmetic mean of the spins.
    pub fn magnetization(&self) -> f64 {
        self.spin_sum as f64 / self.spins.len() as f64
    }

    /// Every spin and the log price flipped.
    pub fn mirrored(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
            spin_sum: -self.spin_sum,
            logp: -self.logp,
        }
    }
}

/// One asynchronous sweep: agents in `order` each set
/// `spin = sign(K m + sigma_noise ε_i)` against the running magnetization
/// `m`, with `sign(0) = +1`. `noise[i]` is agent `i`'s deviate.
pub fn ising_sweep(state: &IsingState, coupling: f64, sigma_noise: f64, order: &[usize], noise: &[f64]) -> IsingState {
    let n = state.spins.len();
    debug_assert_eq!(noise.len(), n);
    let mut next = state.clone();
    for &i in order {
        let m = next.spin_sum as f64 / n as f64;
        let field = coupling * m + sigma_noise * noise[i];
        let s: i8 = if field >= 0.0 { 1 } else { -1 };
        next.spin_sum += (s - next.spins[i]) as i64;
        next.spins[i] = s;
    }
    next
}

/// Output of [`gen_ising_market`].
#[derive(Debug, Clone, PartialEq)]
pub struct IsingRun {
    /// `n_steps + 1` prices, starting at `p0`.
    pub series: PriceSeries,
    /// Magnetization after each sweep.
    pub magnetization: Vec<f64>,
    /// Log price after each sweep, preceded by the initial one.
    pub logp: Vec<f64>,
}

/// Iterates [`ising_sweep`]; after each sweep the log price moves by
/// `magnetization / lambda_liquidity`.
pub fn gen_ising_market(params: &IsingMarketParams, seed: u64) -> Result<IsingRun> {
    simulate_ising(params, seed, false)
}

/// Same random stream as [`gen_ising_market`] but with the initial spins
/// and every noise deviate negated.
pub fn gen_ising_market_mirrored(params: &IsingMarketParams, seed: u64) -> Result<IsingRun> {
    simulate_ising(params, seed, true)
}

fn simulate_ising(params: &IsingMarketParams, seed: u64, mirrored: bool) -> Result<IsingRun> {
    params.validate()?;
    let sign = if mirrored { -1.0 } else { 1.0 };
    let mut rng = rng(seed);
    let n = params.n_agents;
    let spins: Vec<i8> = (0..n)
        .map(|_| {
            let up = rng.random_bool(0.5) ^ mirrored;
            if up {
                1
            } else {
                -1
            }
        })
        .collect();
    let logp0 = libm::log(params.p0);
    let mut state = IsingState::new(spins, logp0)?;
    let mut order: Vec<usize> = (0..n).collect();
    let mut noise = alloc::vec![0.0; n];
    let mut magnetization = Vec::with_capacity(params.n_steps);
    let mut logp = Vec::with_capacity(params.n_steps + 1);
    logp.push(logp0);
    for step in 0..params.n_steps {
        order.shuffle(&mut rng);
        for e in noise.iter_mut() {
            *e = sign * rng.random_range(-1.0..1.0);
        }
        state = ising_sweep(&state, params.coupling_at(step), params.sigma_noise, &order, &noise);
        let m = state.magnetization();
        // exact zero impact for infinite liquidity
        state.logp += m / params.lambda_liquidity;
        magnetization.push(m);
        logp.push(state.logp);
    }
    let prices = logp.iter().map(|&v| libm::exp(v)).collect();
    let series = PriceSeries::from_prices(prices, format!("ising seed={seed}"))?;
    Ok(IsingRun {
        series,
        magnetization,
        logp,
    })
}
