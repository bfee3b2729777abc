use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub benchmark: f64,
    pub regret: f64,
}

/// Powers of two up to `horizon`, plus `horizon` itself.
pub fn sample_schedule(horizon: u64) -> Vec<u64> {
    let mut pts: Vec<u64> = std::iter::successors(Some(1u64), |x| x.checked_mul(2))
        .take_while(|x| *x <= horizon)
        .collect();
    if pts.last() != Some(&horizon) && horizon > 0 {
        pts.push(horizon);
    }
    pts
}

/// `regret(t) = benchmark(t) - sum_{s <= t} utility_s` at each sample point.
pub fn compute_regret(utilities: &[f64], points: &[u64], benchmark: &[f64]) -> Result<Vec<CurvePoint>> {
    if points.len() != benchmark.len() {
        return invalid("one benchmark value per sample point is required");
    }
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    let mut done = 0usize;
    for (&t, &b) in points.iter().zip(benchmark) {
        let t_us = t as usize;
        if t_us < done || t_us > utilities.len() {
            return invalid("sample points must be increasing and within the record");
        }
        acc += utilities[done..t_us].iter().sum::<f64>();
        done = t_us;
        out.push(CurvePoint {
            t,
            benchmark: b,
            regret: b - acc,
        });
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("need at least two matching points to fit a slope");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return invalid("log-log fit needs positive values");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("x values must not all coincide");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Sample mean and standard error of the mean (0 for a single value).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
