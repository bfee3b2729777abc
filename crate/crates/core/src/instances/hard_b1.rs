//! Minimax instance for single-arm incentives: a zero incentive and `K - 2`
//! arm-2 payments are all worth exactly 1/3 except the zero incentive,
//! which is worth `1/3 + eps/6`; shifting `Delta`-sized mass between
//! neighbouring types lifts one payment by `2 Delta`.

use crate::domain::{GreedyInstance, IncentiveMode, IncentiveVector};
use crate::error::{invalid, Result};
use crate::menu::{Menu, MenuItem, Provenance};

#[derive(Clone, Debug)]
pub struct HardB1 {
    pub instance: GreedyInstance,
    /// Arrival distribution over the `K` types, `p_1 = 1/2`.
    pub base: Vec<f64>,
    /// `perturbed[z - 2]` is `p'(z)` for `z = 2..=K-1`.
    pub perturbed: Vec<Vec<f64>>,
    /// `pi_1 = 0` followed by `pi_i = (0, 2/3 - beta_i, 0, ...)`.
    pub menu: Menu,
    pub eps: f64,
    /// `Delta = eps / 6`.
    pub gap: f64,
    pub horizon: u64,
}

/// `beta_i` for 1-based type `i` in `2..=K-1`.
pub fn beta(i: usize, k: usize) -> f64 {
    let k2 = (k - 2) as f64;
    1.0 / (3.0 * (5.0 / 6.0 - (i as f64 - 2.0) / (3.0 * k2))) - 1.0 / 3.0
}

fn mass_shift(z: usize, k: usize, eps: f64) -> f64 {
    eps * (5.0 / 6.0 - (z as f64 - 2.0) / (3.0 * (k - 2) as f64))
}

/// Validated construction; `T > max(4(K-2)^3, 10(K-2))`.
pub fn hard_b1(k: usize, n: usize, horizon: u64) -> Result<HardB1> {
    if k >= 3 {
        let k2 = (k - 2) as u128;
        let need = (4 * k2 * k2 * k2).max(10 * k2);
        if (horizon as u128) <= need {
            return invalid(format!("horizon must exceed {need} for K = {k}"));
        }
    }
    build(k, n, horizon)
}

/// Same instance with the horizon condition relaxed to `T > 10(K-2)`
/// (so that `eps < 1/10`); the cubic condition only serves the proof.
pub fn hard_b1_relaxed(k: usize, n: usize, horizon: u64) -> Result<HardB1> {
    if k >= 3 && horizon <= 10 * (k as u64 - 2) {
        return invalid(format!("horizon must exceed {} for K = {k}", 10 * (k - 2)));
    }
    build(k, n, horizon)
}

fn build(k: usize, n: usize, horizon: u64) -> Result<HardB1> {
    if k < 3 || n < 3 {
        return invalid("the construction needs K >= 3 and N >= 3");
    }
    let eps = ((k - 2) as f64 / (10.0 * horizon as f64)).sqrt();
    // paying 1 - beta_{K-1} on arm 1 must lose money
    if (2.0 + eps) / 3.0 - (1.0 - beta(k - 1, k)) >= 0.0 {
        return invalid("horizon too small: arm-1 payments would be profitable");
    }
    let mut v = vec![0.0; n];
    v[0] = 2.0 / 3.0 + eps / 3.0;
    v[1] = 1.0;
    let mut mu = vec![vec![0.0; n]; k];
    mu[0][0] = 1.0 / 3.0;
    for i in 2..k {
        mu[i - 1][1] = 1.0 / 3.0;
        mu[i - 1][2] = 1.0 - beta(i, k);
    }
    mu[k - 1][2] = 1.0;
    let instance = GreedyInstance::with_lowest_index_ties(v, mu)?;

    let mut base = vec![1.0 / (3.0 * (k - 2) as f64); k];
    base[0] = 0.5;
    base[k - 1] = 1.0 / 6.0;

    let perturbed = (2..k)
        .map(|z| {
            let l = mass_shift(z, k, eps);
            let mut p = base.clone();
            if z >= 3 {
                p[z - 2] -= l;
                p[z - 1] += l;
            } else {
                p[1] += l;
                p[k - 1] -= l;
            }
            p
        })
        .collect();

    let mut items = vec![MenuItem {
        incentive: IncentiveVector::zero(n, IncentiveMode::Single),
        provenance: Provenance::Zero,
    }];
    for i in 2..k {
        items.push(MenuItem {
            incentive: IncentiveVector::single(n, 1, 2.0 / 3.0 - beta(i, k))?,
            provenance: Provenance::Threshold {
                arm: 1,
                agent: Some(i - 1),
                perturbed: false,
            },
        });
    }
    Ok(HardB1 {
        instance,
        base,
        perturbed,
        menu: Menu::from_distinct(items),
        eps,
        gap: eps / 6.0,
        horizon,
    })
}

impl HardB1 {
    pub fn num_agents(&self) -> usize {
        self.instance.num_agents()
    }

    /// Closed-form expected utilities of the menu under `p`: the zero
    /// incentive earns `v_1` from type 1; `pi_i` earns `1/3 + beta_i` from
    /// type 1 and every type `i' >= i` below `K`.
    pub fn analytic_rewards(&self, p: &[f64]) -> Vec<f64> {
        let k = self.num_agents();
        let mut r = vec![p[0] * self.instance.rewards()[0]];
        for i in 2..k {
            let mass: f64 = p[0] + p[i - 1..k - 1].iter().sum::<f64>();
            r.push(mass * (1.0 / 3.0 + beta(i, k)));
        }
        r
    }

    /// `p'(z)` for 1-based `z` in `2..=K-1`.
    pub fn perturbed_for(&self, z: usize) -> Result<&[f64]> {
        if z < 2 || z >= self.num_agents() {
            return invalid(format!("perturbation target {z} outside 2..=K-1"));
        }
        Ok(&self.perturbed[z - 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_values() {
        let h = hard_b1(3, 3, 100).unwrap();
        assert!((beta(2, 3) - 1.0 / 15.0).abs() < 1e-15);
        let pi = h.menu.get(1).unwrap();
        assert!((pi.values()[1] - 0.6).abs() < 1e-15);
        // type 1 moves to arm 2 and pays 3/5 out of 1
        let u = h.instance.agent_utility(0, pi).unwrap();
        assert!((u - 0.4).abs() < 1e-15);
        assert!(h.eps < 0.1);
    }

    #[test]
    fn preconditions() {
        assert!(hard_b1(10, 3, 2048).is_err());
        assert!(hard_b1(10, 3, 2049).is_ok());
        assert!(hard_b1_relaxed(10, 3, 1024).is_ok());
        assert!(hard_b1_relaxed(10, 3, 80).is_err());
        assert!(hard_b1(2, 3, 1000).is_err());
        assert!(hard_b1(4, 2, 1000).is_err());
    }

    #[test]
    fn distributions_are_valid() {
        let h = hard_b1(5, 4, 1000).unwrap();
        for p in std::iter::once(&h.base).chain(&h.perturbed) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|x| *x >= 0.0));
        }
        assert_eq!(h.base[0], 0.5);
        assert!(h.perturbed_for(1).is_err() && h.perturbed_for(5).is_err());
    }
}
