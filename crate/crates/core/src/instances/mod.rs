//! Generators for the structured instances: the linear-regret example, the
//! two minimax families for single-arm incentives, the smooth lower-bound
//! suite, random instances, and arrival processes.

mod arrivals;
mod hard_b1;
mod hard_b2;
mod smooth_suite;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::domain::{priority_from_order, GreedyInstance};
use crate::error::{invalid, Result};

pub use arrivals::{ArrivalDoc, ArrivalProcess, ArrivalSpec, Block, PastRound};
pub use hard_b1::{beta, hard_b1, hard_b1_relaxed, HardB1};
pub use hard_b2::{hard_b2, HardB2};
pub use smooth_suite::{hard_rewards, smooth_hard_suite, suite_resolution, SmoothHardMember, SmoothHardSuite};

/// Two agents, three arms. Paying exactly `delta` on arm 1 pulls agent 1
/// over (it breaks ties toward arm 1) but not agent 2 (it breaks ties toward
/// arm 2); anything less moves nobody, anything more moves both.
pub fn example_3_2(delta: f64) -> Result<(GreedyInstance, ArrivalSpec)> {
    if !(0.7..=0.71).contains(&delta) {
        return invalid(format!("delta must lie in [0.7, 0.71], got {delta}"));
    }
    let instance = GreedyInstance::new(
        vec![1.0, 0.5, 0.0],
        vec![vec![0.2, 0.0, 0.2 + delta], vec![0.2, 0.2 + delta, 0.0]],
        vec![priority_from_order(&[0, 2, 1])?, priority_from_order(&[1, 0, 2])?],
    )?;
    let arrivals = ArrivalSpec::Iid {
        probabilities: vec![0.4, 0.6],
    };
    Ok((instance, arrivals))
}

/// Uniform rewards and preferences with random tie priorities. With
/// `grid = Some(s)` every entry is a multiple of `s`, which makes exact ties
/// common.
pub fn random_greedy_instance(n: usize, k: usize, grid: Option<f64>, rng: &mut dyn RngCore) -> Result<GreedyInstance> {
    if n == 0 || k == 0 {
        return invalid("need at least one arm and one agent");
    }
    let draw = |rng: &mut dyn RngCore| -> f64 {
        let u: f64 = rng.random();
        match grid {
            Some(s) if s > 0.0 => ((u / s).floor() * s).min(1.0),
            _ => u,
        }
    };
    let v = (0..n).map(|_| draw(rng)).collect();
    let mu = (0..k).map(|_| (0..n).map(|_| draw(rng)).collect()).collect();
    let ties = (0..k)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            priority_from_order(&order)
        })
        .collect::<Result<Vec<_>>>()?;
    GreedyInstance::new(v, mu, ties)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{IncentiveMode, IncentiveVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example_values() {
        let (inst, arr) = example_3_2(0.7).unwrap();
        let ArrivalSpec::Iid { probabilities } = arr else {
            panic!("expected iid arrivals")
        };
        let at = IncentiveVector::single(3, 0, 0.7).unwrap();
        let u = inst.expected_greedy_utility(&at, &probabilities).unwrap();
        assert!((u - 0.42).abs() < 1e-12);
        let under = IncentiveVector::single(3, 0, 0.69).unwrap();
        assert!((inst.expected_greedy_utility(&under, &probabilities).unwrap() - 0.3).abs() < 1e-12);
        let zero = IncentiveVector::zero(3, IncentiveMode::Single);
        assert!((inst.expected_greedy_utility(&zero, &probabilities).unwrap() - 0.3).abs() < 1e-12);
        assert!(example_3_2(0.69).is_err());
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let inst = random_greedy_instance(4, 3, Some(0.1), &mut rng).unwrap();
            assert_eq!(inst.num_arms(), 4);
            assert!(inst
                .preferences()
                .iter()
                .flatten()
                .all(|x| (x * 10.0 - (x * 10.0).round()).abs() < 1e-9));
        }
    }
}
