//! The lower-bound family of smooth agents: a flat landscape except for one
//! interval of width `eps` on one arm, where a tent-shaped bonus lifts the
//! probability of the incentivized arm.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `B(x) = (L - 1)/4 * min(x, eps - x)` on `[0, eps]`.
pub fn bonus(x: f64, lipschitz: f64, eps: f64) -> Result<f64> {
    if !(0.0..=eps).contains(&x) {
        return invalid(format!("bonus argument {x} outside [0, {eps}]"));
    }
    Ok((lipschitz - 1.0) / 4.0 * x.min(eps - x))
}

/// Agent type `(arm, interval)`: the good interval is
/// `[interval * eps, (interval + 1) * eps]` on `arm` (both 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothHardParams {
    pub arm: usize,
    pub interval: usize,
    pub eps: f64,
    pub lipschitz: f64,
    pub num_arms: usize,
}

impl SmoothHardParams {
    pub fn new(arm: usize, interval: usize, eps: f64, lipschitz: f64, num_arms: usize) -> Result<Self> {
        if num_arms < 2 {
            return invalid("the hard family needs at least two arms");
        }
        if arm + 1 >= num_arms {
            return invalid(format!(
                "designated arm {arm} must be one of the first {} arms",
                num_arms - 1
            ));
        }
        if !(lipschitz >= 3.0) {
            return invalid(format!("Lipschitz constant must be at least 3, got {lipschitz}"));
        }
        if !(eps > 0.0) || (interval as f64) * eps + eps > 0.5 + 1e-12 {
            return invalid(format!("interval {interval} of width {eps} does not fit in [0, 1/2]"));
        }
        Ok(Self {
            arm,
            interval,
            eps,
            lipschitz,
            num_arms,
        })
    }

    pub fn interval_start(&self) -> f64 {
        self.interval as f64 * self.eps
    }

    /// Peak of the bonus, `interval * eps + eps / 2`.
    pub fn peak_incentive(&self) -> f64 {
        self.interval_start() + 0.5 * self.eps
    }

    /// `(N - 1) / (16 N)`: the reward of every incentive outside the good
    /// interval that stays within `[0, 1/2]`.
    pub fn flat_reward(&self) -> f64 {
        let n = self.num_arms as f64;
        (n - 1.0) / (16.0 * n)
    }

    pub fn probabilities(&self, pi: &[f64]) -> Result<Vec<f64>> {
        let n = self.num_arms;
        if pi.len() != n {
            return invalid("incentive length does not match the number of arms");
        }
        if pi.iter().filter(|x| **x != 0.0).count() > 1 {
            return invalid("the hard family is defined for single-arm incentives");
        }
        if pi.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return invalid("incentive coordinates must lie in [0,1]");
        }
        let nf = n as f64;
        let lo = self.interval_start();
        let mut probs = Vec::with_capacity(n);
        for (l, &x) in pi.iter().enumerate().take(n - 1) {
            let p = if l == self.arm && (lo..=lo + self.eps).contains(&x) {
                1.0 / (16.0 * nf * (1.0 - x)) + bonus(x - lo, self.lipschitz, self.eps)?
            } else if x <= 0.5 {
                1.0 / (16.0 * nf * (1.0 - x))
            } else {
                1.0 / (8.0 * nf)
            };
            probs.push(p);
        }
        let rest = 1.0 - probs.iter().sum::<f64>();
        probs.push(rest);
        Ok(probs)
    }
}
