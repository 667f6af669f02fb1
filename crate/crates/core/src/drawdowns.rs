//! Drawdowns, crash events and the outlier ("king") test.
//!
//! A drawdown is the cumulative loss from a local peak to the trough of the
//! following run of declines. The bulk of the drawdown magnitudes is fitted
//! with a stretched exponential `S(d) = exp(-(d/d0)^z)`; drawdowns far in its
//! tail are flagged as kings.

use alloc::vec;
use alloc::vec::Vec;

use crate::simplex::{self, Bounds};
use crate::{Error, PriceSeries, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drawdown {
    pub peak_time: f64,
    pub trough_time: f64,
    pub peak_price: f64,
    pub trough_price: f64,
    /// `(peak - trough) / peak`, in `(0, 1)`.
    pub magnitude: f64,
}

impl Drawdown {
    fn between(series: &PriceSeries, peak: usize, trough: usize) -> Self {
        let (t, p) = (series.times(), series.prices());
        Drawdown {
            peak_time: t[peak],
            trough_time: t[trough],
            peak_price: p[peak],
            trough_price: p[trough],
            magnitude: (p[peak] - p[trough]) / p[peak],
        }
    }

    pub fn duration(&self) -> f64 {
        self.trough_time - self.peak_time
    }
}

/// Close-to-close crash rule: a drop of strictly more than `threshold` from
/// a local maximum within `window_days` trading days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrashRule {
    pub threshold: f64,
    pub window_days: f64,
}

impl Default for CrashRule {
    fn default() -> Self {
        Self {
            threshold: 0.15,
            window_days: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrashEvent {
    pub peak_time: f64,
    pub peak_price: f64,
    pub trough_time: f64,
    pub trough_price: f64,
    /// Relative loss from the peak to the lowest close inside the window.
    pub drop: f64,
    pub duration_days: f64,
}

/// Stretched-exponential model of the drawdown bulk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchedExpFit {
    pub d0: f64,
    pub z: f64,
    pub n_bulk: usize,
    /// Largest magnitude admitted into the bulk (the empirical quantile).
    pub cutoff: f64,
}

impl StretchedExpFit {
    pub fn survival(&self, d: f64) -> f64 {
        libm::exp(-libm::pow(d / self.d0, self.z))
    }
}

pub const MIN_BULK: usize = 20;

/// Drawdowns ordered by peak time.
///
/// With `epsilon = 0` each drawdown is a maximal run of strictly decreasing
/// prices. With `epsilon > 0` a rebound of relative size at most `epsilon`
/// above the current trough (and below the peak) does not end the run.
pub fn extract_drawdowns(series: &PriceSeries, epsilon: f64) -> Result<Vec<Drawdown>> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter("epsilon must be a non-negative number"));
    }
    let p = series.prices();
    let n = p.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        if p[i + 1] >= p[i] {
            i += 1;
            continue;
        }
        let peak = i;
        let mut trough = i + 1;
        let mut j = i + 1;
        while j + 1 < n {
            let q = p[j + 1];
            if q < p[trough] {
                trough = j + 1;
            } else if !(epsilon > 0.0 && q < p[peak] && (q - p[trough]) / p[trough] <= epsilon) {
                break;
            }
            j += 1;
        }
        out.push(Drawdown::between(series, peak, trough));
        i = trough;
    }
    Ok(out)
}

struct PeakDrop {
    index: usize,
    trough: usize,
    drop: f64,
}

/// One event per local maximum whose drop within the window exceeds the
/// threshold.
///
/// A candidate is suppressed when a higher local maximum with an overlapping
/// peak-to-trough interval falls at least as far; equal peaks resolve to the
/// earlier one. Suppression does not depend on the threshold, so raising the
/// threshold can only remove events.
pub fn detect_crashes(series: &PriceSeries, rule: &CrashRule) -> Result<Vec<CrashEvent>> {
    if !(rule.threshold >= 0.0 && rule.threshold < 1.0) || !(rule.window_days > 0.0) {
        return Err(Error::InvalidParameter(
            "crash threshold must be in [0,1) and window positive",
        ));
    }
    let (t, p) = (series.times(), series.prices());
    let n = p.len();
    let mut peaks: Vec<PeakDrop> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let is_max = (i == 0 || p[i] >= p[i - 1]) && p[i + 1] < p[i];
        if !is_max {
            continue;
        }
        let mut trough = i + 1;
        let mut j = i + 1;
        while j < n && t[j] - t[i] <= rule.window_days {
            if p[j] < p[trough] {
                trough = j;
            }
            j += 1;
        }
        peaks.push(PeakDrop {
            index: i,
            trough,
            drop: (p[i] - p[trough]) / p[i],
        });
    }

    let dominated = |k: usize| -> bool {
        let me = &peaks[k];
        let (start, end) = (t[me.index], t[me.trough]);
        let overlaps = |o: &PeakDrop| t[o.index] <= end && t[o.trough] >= start;
        let beats = |o: &PeakDrop| {
            o.drop >= me.drop && (p[o.index] > p[me.index] || (p[o.index] == p[me.index] && o.index < me.index))
        };
        let before = peaks[..k]
            .iter()
            .rev()
            .take_while(|o| t[o.index] >= start - rule.window_days);
        let after = peaks[k + 1..].iter().take_while(|o| t[o.index] <= end);
        before.chain(after).any(|o| overlaps(o) && beats(o))
    };

    Ok((0..peaks.len())
        .filter(|&k| peaks[k].drop > rule.threshold && !dominated(k))
        .map(|k| {
            let pk = &peaks[k];
            CrashEvent {
                peak_time: t[pk.index],
                peak_price: p[pk.index],
                trough_time: t[pk.trough],
                trough_price: p[pk.trough],
                drop: pk.drop,
                duration_days: t[pk.trough] - t[pk.index],
            }
        })
        .collect())
}

/// Linear-interpolation empirical quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Maximum-likelihood stretched-exponential fit of the drawdowns at or
/// below the `bulk_quantile` empirical quantile of their magnitudes.
///
/// The likelihood is conditioned on `d <= cutoff` so that trimming the tail
/// does not bias the exponent.
pub fn fit_bulk(drawdowns: &[Drawdown], bulk_quantile: f64) -> Result<StretchedExpFit> {
    if !(bulk_quantile > 0.0 && bulk_quantile <= 1.0) {
        return Err(Error::InvalidParameter("bulk quantile must be in (0, 1]"));
    }
    if drawdowns.len() < MIN_BULK {
        return Err(Error::TooFewDrawdowns {
            found: drawdowns.len(),
            min: MIN_BULK,
        });
    }
    let mut mags: Vec<f64> = drawdowns.iter().map(|d| d.magnitude).collect();
    mags.sort_by(f64::total_cmp);
    if mags[0] == mags[mags.len() - 1] {
        return Err(Error::DegenerateSample);
    }
    if !(mags[0] > 0.0) {
        return Err(Error::InvalidParameter("drawdown magnitudes must be positive"));
    }
    let cutoff = quantile_sorted(&mags, bulk_quantile);
    let bulk: Vec<f64> = mags.iter().copied().take_while(|&d| d <= cutoff).collect();
    if bulk.len() < MIN_BULK {
        return Err(Error::TooFewDrawdowns {
            found: bulk.len(),
            min: MIN_BULK,
        });
    }
    if bulk[0] == bulk[bulk.len() - 1] {
        return Err(Error::DegenerateSample);
    }

    // Work in units of the largest bulk value to keep powers well scaled.
    let scale = bulk[bulk.len() - 1];
    let x: Vec<f64> = bulk.iter().map(|d| d / scale).collect();
    let ln_x: Vec<f64> = x.iter().map(|&v| libm::log(v)).collect();
    let nb = x.len() as f64;
    let mean_ln = ln_x.iter().sum::<f64>() / nb;

    // Untruncated profile equation in z, increasing in z.
    let score = |z: f64| {
        let (mut s0, mut s1) = (0.0, 0.0);
        for (&v, &l) in x.iter().zip(&ln_x) {
            let w = libm::pow(v, z);
            s0 += w;
            s1 += w * l;
        }
        s1 / s0 - 1.0 / z - mean_ln
    };
    let (mut lo, mut hi) = (1e-3, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let z_init = 0.5 * (lo + hi);
    let d0_init = libm::pow(x.iter().map(|&v| libm::pow(v, z_init)).sum::<f64>() / nb, 1.0 / z_init);

    let truncated = bulk_quantile < 1.0;
    let neg_loglik = |theta: &[f64]| -> f64 {
        let (d0, z) = (libm::exp(theta[0]), libm::exp(theta[1]));
        let mut ll = nb * (libm::log(z) - z * libm::log(d0));
        for (&v, &l) in x.iter().zip(&ln_x) {
            ll += (z - 1.0) * l - libm::pow(v / d0, z);
        }
        if truncated {
            // cutoff is 1 in scaled units
            let mass = -libm::expm1(-libm::pow(1.0 / d0, z));
            ll -= nb * libm::log(mass);
        }
        -ll
    };
    let start = [libm::log(d0_init), libm::log(z_init)];
    let bounds = Bounds::new(
        vec![start[0] - 10.0, libm::log(1e-3)],
        vec![start[0] + 10.0, libm::log(50.0)],
    );
    let opts = simplex::Options {
        max_iter: 2000,
        ftol: 1e-14,
        xtol: 1e-10,
    };
    let min = simplex::minimize(neg_loglik, &start, &[0.1, 0.1], &bounds, &opts);
    let (d0, z) = if min.value.is_finite() {
        (libm::exp(min.x[0]) * scale, libm::exp(min.x[1]))
    } else {
        (d0_init * scale, z_init)
    };
    Ok(StretchedExpFit {
        d0,
        z,
        n_bulk: bulk.len(),
        cutoff,
    })
}

/// Drawdowns whose expected number of equal-or-larger events under the bulk
/// model, `n_total · S(d)`, is below `expected_count_max`.
pub fn flag_kings(drawdowns: &[Drawdown], fit: &StretchedExpFit, expected_count_max: f64) -> Vec<Drawdown> {
    let n_total = drawdowns.len() as f64;
    drawdowns
        .iter()
        .filter(|d| n_total * fit.survival(d.magnitude) < expected_count_max)
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(prices: &[f64]) -> PriceSeries {
        PriceSeries::from_prices(prices.to_vec(), "t").unwrap()
    }

    #[test]
    fn single_run() {
        let dd = extract_drawdowns(&series(&[1.0, 2.0, 3.0, 2.7, 2.4, 2.6]), 0.0).unwrap();
        assert_eq!(dd.len(), 1);
        assert_eq!((dd[0].peak_price, dd[0].trough_price), (3.0, 2.4));
        assert!((dd[0].magnitude - 0.2).abs() < 1e-15);
        assert_eq!((dd[0].peak_time, dd[0].trough_time), (2.0, 4.0));
    }

    #[test]
    fn increasing_series_has_no_drawdown() {
        let s = series(&[1.0, 1.5, 2.0, 2.0, 3.0]);
        assert!(extract_drawdowns(&s, 0.0).unwrap().is_empty());
        assert!(detect_crashes(&s, &CrashRule::default()).unwrap().is_empty());
    }

    #[test]
    fn epsilon_absorbs_small_rebounds() {
        let s = series(&[3.0, 2.7, 2.75, 2.4, 3.0]);
        let dd = extract_drawdowns(&s, 0.02).unwrap();
        assert_eq!(dd.len(), 1);
        assert_eq!((dd[0].peak_price, dd[0].trough_price), (3.0, 2.4));
        assert!((dd[0].magnitude - 0.2).abs() < 1e-15);
        assert_eq!(extract_drawdowns(&s, 0.0).unwrap().len(), 2);
        assert_eq!(extract_drawdowns(&s, -0.1).unwrap_err().code(), "InvalidParameter");
    }

    #[test]
    fn equal_prices_end_a_run_without_epsilon() {
        let dd = extract_drawdowns(&series(&[3.0, 2.0, 2.0, 1.0]), 0.0).unwrap();
        assert_eq!(dd.len(), 2);
    }

    fn crash_path(bottom: f64) -> PriceSeries {
        let mut p: Vec<f64> = (0..=10).map(|i| 90.0 + i as f64).collect();
        for k in 1..=10 {
            p.push(100.0 + (bottom - 100.0) * k as f64 / 10.0);
        }
        for k in 1..=20 {
            p.push(bottom + 0.5 * k as f64);
        }
        series(&p)
    }

    #[test]
    fn crash_rule_is_strict() {
        let ev = detect_crashes(&crash_path(84.9), &CrashRule::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].drop - 0.151).abs() < 1e-12);
        assert_eq!(ev[0].peak_time, 10.0);
        assert_eq!(ev[0].duration_days, 10.0);
        assert!(detect_crashes(&crash_path(85.0), &CrashRule::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn crash_window_limits_the_drop() {
        // 16% spread over 20 days never exceeds 15% within 15 days
        let mut p = vec![100.0];
        for k in 1..=20 {
            p.push(100.0 * (1.0 - 0.16 * k as f64 / 20.0));
        }
        p.push(90.0);
        assert!(detect_crashes(&series(&p), &CrashRule::default()).unwrap().is_empty());
    }

    #[test]
    fn overlapping_peaks_collapse_to_the_highest() {
        // two local maxima on the way down share the same fall
        let p = [90.0, 100.0, 97.0, 99.0, 80.0, 70.0, 75.0, 78.0];
        let ev = detect_crashes(&series(&p), &CrashRule::default()).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].peak_price, 100.0);
        assert!((ev[0].drop - 0.3).abs() < 1e-12);
    }

    fn from_magnitudes(mags: &[f64]) -> Vec<Drawdown> {
        mags.iter()
            .enumerate()
            .map(|(i, &d)| Drawdown {
                peak_time: 2.0 * i as f64,
                trough_time: 2.0 * i as f64 + 1.0,
                peak_price: 1.0,
                trough_price: 1.0 - d,
                magnitude: d,
            })
            .collect()
    }

    #[test]
    fn bulk_guards() {
        let ten = from_magnitudes(&[0.01; 10]);
        assert_eq!(fit_bulk(&ten, 0.99).unwrap_err().code(), "TooFewDrawdowns");
        let flat = from_magnitudes(&[0.02; 40]);
        assert_eq!(fit_bulk(&flat, 0.99).unwrap_err().code(), "DegenerateSample");
        let fit = StretchedExpFit {
            d0: 0.02,
            z: 1.0,
            n_bulk: 20,
            cutoff: 0.1,
        };
        assert!(flag_kings(&[], &fit, 0.1).is_empty());
    }
}
