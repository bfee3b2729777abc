//! Choice probabilities of a greedy agent whose scores `c_i = mu_i + pi_i`
//! are perturbed by independent standard normal noise:
//! `Pr[a = i] = int phi(y - c_i) prod_{k != i} Phi(y - c_k) dy`.

use libm::erfc;

use crate::error::{invalid, Error, Result};

const TAIL: f64 = 8.0;
const ABS_TOL: f64 = 1e-9;
const MAX_DEPTH: u32 = 40;
const RENORM_TOL: f64 = 1e-7;

/// Positive half of the 10-point Gauss-Legendre rule on [-1, 1].
const GL10: [(f64, f64); 5] = [
    (0.14887433898163122, 0.295524224714753),
    (0.4333953941292472, 0.2692667193099965),
    (0.6794095682990244, 0.219086362515982),
    (0.8650633666889845, 0.14945134915058036),
    (0.9739065285171717, 0.06667134430868807),
];

pub(crate) fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn integrand(c: &[f64], y: f64, out: &mut [f64]) {
    let cdfs: Vec<f64> = c.iter().map(|ci| std_normal_cdf(y - ci)).collect();
    for (i, o) in out.iter_mut().enumerate() {
        let others: f64 = cdfs
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, v)| v)
            .product();
        *o = std_normal_pdf(y - c[i]) * others;
    }
}

fn gl_panel(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; c.len()];
    let mut buf = vec![0.0; c.len()];
    for &(x, w) in &GL10 {
        for y in [mid - half * x, mid + half * x] {
            integrand(c, y, &mut buf);
            for (s, f) in acc.iter_mut().zip(&buf) {
                *s += w * half * f;
            }
        }
    }
    acc
}

fn adaptive(c: &[f64], a: f64, b: f64, whole: Vec<f64>, tol: f64, depth: u32) -> Result<Vec<f64>> {
    let mid = 0.5 * (a + b);
    let left = gl_panel(c, a, mid);
    let right = gl_panel(c, mid, b);
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).abs())
        .fold(0.0, f64::max);
    if err <= tol {
        return Ok(left.iter().zip(&right).map(|(l, r)| l + r).collect());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numerical(format!("quadrature did not converge on [{a}, {b}]")));
    }
    let l = adaptive(c, a, mid, left, 0.5 * tol, depth + 1)?;
    let r = adaptive(c, mid, b, right, 0.5 * tol, depth + 1)?;
    Ok(l.iter().zip(&r).map(|(x, y)| x + y).collect())
}

/// Choice probabilities for noisy scores `c`.
pub fn gaussian_probabilities_from_scores(c: &[f64]) -> Result<Vec<f64>> {
    if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
        return invalid("scores must be finite and nonempty");
    }
    if c.len() == 1 {
        return Ok(vec![1.0]);
    }
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min) - TAIL;
    let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max) + TAIL;
    let whole = gl_panel(c, lo, hi);
    let raw = adaptive(c, lo, hi, whole, ABS_TOL, 0)?;
    let total: f64 = raw.iter().sum();
    if (total - 1.0).abs() >= RENORM_TOL {
        return Err(Error::Numerical(format!(
            "choice probabilities sum to {total}; renormalization would hide an error"
        )));
    }
    Ok(raw.into_iter().map(|p| p.max(0.0) / total).collect())
}

/// `preference + pi`, then [`gaussian_probabilities_from_scores`].
pub fn gaussian_choice_probabilities(preference: &[f64], pi: &[f64]) -> Result<Vec<f64>> {
    if preference.len() != pi.len() {
        return invalid("preference and incentive lengths differ");
    }
    let c: Vec<f64> = preference.iter().zip(pi).map(|(m, p)| m + p).collect();
    gaussian_probabilities_from_scores(&c)
}

/// A valid sup-norm-to-L1 Lipschitz constant for `n` arms with unit
/// noise: shifting the scores by `d` (sup norm) moves the argmax law by at
/// most twice the total variation between `N(c, I)` and `N(c + d, I)`,
/// which is at most `2 sqrt(n) |d|_inf / sqrt(2 pi)`. Floored at 1.
pub fn gaussian_lipschitz_bound(n: usize) -> f64 {
    (2.0 * (n as f64).sqrt() / (2.0 * std::f64::consts::PI).sqrt()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_cases() {
        let p = gaussian_probabilities_from_scores(&[0.0, 0.0]).unwrap();
        assert!(p.iter().all(|x| (x - 0.5).abs() < 1e-9));
        let p = gaussian_probabilities_from_scores(&[0.3, 0.3, 0.3]).unwrap();
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-9));
    }

    #[test]
    fn two_arm_closed_form() {
        for (a, b) in [(0.0, 1.0), (0.9, 0.1), (1.7, -0.4), (2.0, 0.0)] {
            let p = gaussian_probabilities_from_scores(&[a, b]).unwrap();
            let want = std_normal_cdf((a - b) / std::f64::consts::SQRT_2);
            assert!((p[0] - want).abs() < 1e-8, "{a} {b}: {} vs {want}", p[0]);
        }
    }

    #[test]
    fn cdf_matches_known_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        let got = std_normal_cdf(-2.0);
        assert!((got - 0.022_750_131_948_179_2).abs() < 1e-15, "{got:e}");
        assert!((std_normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-15);
    }

    #[test]
    fn finite_differences_match_quadrature_derivative() {
        // d Pr[a=0] / d c_1 = -int phi(y-c0) phi(y-c1) Phi(y-c2) dy
        let c = [0.4, 0.1, -0.2];
        let h = 1e-5;
        let up = gaussian_probabilities_from_scores(&[c[0], c[1] + h, c[2]]).unwrap()[0];
        let dn = gaussian_probabilities_from_scores(&[c[0], c[1] - h, c[2]]).unwrap()[0];
        let fd = (up - dn) / (2.0 * h);
        let n = 200_000;
        let (lo, hi) = (-9.0, 9.0);
        let step = (hi - lo) / n as f64;
        let exact: f64 = (0..n)
            .map(|k| {
                let y = lo + (k as f64 + 0.5) * step;
                -std_normal_pdf(y - c[0]) * std_normal_pdf(y - c[1]) * std_normal_cdf(y - c[2]) * step
            })
            .sum();
        assert!((fd - exact).abs() < 1e-5, "{fd} vs {exact}");
    }

    #[test]
    fn lipschitz_bound_dominates_finite_differences() {
        // all coordinates moved by h in the worst-case sign pattern
        let c = [0.1, 0.5, 0.3];
        let h = 1e-4;
        let bound = gaussian_lipschitz_bound(3);
        assert!((bound - 2.0 * 3f64.sqrt() / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert_eq!(gaussian_lipschitz_bound(1), 1.0);
        let base = gaussian_probabilities_from_scores(&c).unwrap();
        for signs in 0..8u32 {
            let d: Vec<f64> = (0..3).map(|i| if signs >> i & 1 == 1 { h } else { -h }).collect();
            let moved: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + b).collect();
            let p = gaussian_probabilities_from_scores(&moved).unwrap();
            let l1: f64 = p.iter().zip(&base).map(|(a, b)| (a - b).abs()).sum();
            assert!(l1 / h <= bound, "ratio {} above {bound}", l1 / h);
        }
    }
}
