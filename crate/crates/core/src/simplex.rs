//! Box-constrained Nelder–Mead descent.
//!
//! Trial points are projected onto the box before evaluation. The best
//! vertex value never increases from one iteration to the next.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        debug_assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
        Self { lower, upper }
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub max_iter: usize,
    /// Stop when `f_worst - f_best <= ftol * |f_best|`.
    pub ftol: f64,
    /// Stop when every vertex lies within `xtol * step[i]` of the best one.
    pub xtol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_iter: 500,
            ftol: 1e-9,
            xtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` starting from the simplex `{x0, x0 + step[i] e_i}`.
///
/// Non-finite objective values are treated as `+inf`.
pub fn minimize<F>(mut f: F, x0: &[f64], step: &[f64], bounds: &Bounds, opts: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut start = x0.to_vec();
    bounds.project(&mut start);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(&start);
    simplex.push((start.clone(), v0));
    for i in 0..dim {
        let mut x = start.clone();
        x[i] += step[i];
        if x[i] > bounds.upper[i] {
            x[i] = start[i] - step[i];
        }
        bounds.project(&mut x);
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut centroid = vec![0.0; dim];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if worst.is_finite() && worst - best <= opts.ftol * best.abs() {
            converged = true;
            break;
        }
        let collapsed = simplex[1..].iter().all(|(x, _)| {
            x.iter()
                .zip(&simplex[0].0)
                .zip(step)
                .all(|((a, b), s)| (a - b).abs() <= opts.xtol * s.abs())
        });
        if collapsed {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            bounds.project(&mut p);
            p
        };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[dim].1 {
            let c = along(0.5);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(-0.5);
            let v = eval(&c);
            (c, v)
        };
        if fc < simplex[dim].1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (xi, a) in vertex.0.iter_mut().zip(&anchor) {
                *xi = a + 0.5 * (*xi - a);
            }
            vertex.1 = eval(&vertex.0);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}
