//! Shared domain types: incentive vectors, greedy instances and the
//! deterministic best response of a greedy agent.
//!
//! Arms and agents are 0-based everywhere in the API. Only the serialized
//! tie priorities are 1-based ranks (higher rank wins a tie).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Absolute tolerance under which two scores `mu + pi` count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Tolerance for probability vectors passed in by callers.
pub const DIST_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncentiveMode {
    /// At most one nonzero coordinate.
    Single,
    General,
}

/// The principal's action: a point of `[0,1]^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncentiveVector {
    values: Vec<f64>,
    mode: IncentiveMode,
}

impl IncentiveVector {
    pub fn new(values: Vec<f64>, mode: IncentiveMode) -> Result<Self> {
        if values.is_empty() {
            return invalid("incentive vector needs at least one arm");
        }
        if let Some((i, x)) = values.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
            return invalid(format!("incentive coordinate {i} = {x} outside [0,1]"));
        }
        if mode == IncentiveMode::Single && values.iter().filter(|x| **x != 0.0).count() > 1 {
            return invalid("single-arm incentive has more than one nonzero coordinate");
        }
        Ok(Self { values, mode })
    }

    pub fn zero(n: usize, mode: IncentiveMode) -> Self {
        Self {
            values: vec![0.0; n],
            mode,
        }
    }

    /// Single-arm vector paying `value` on `arm`.
    pub fn single(n: usize, arm: usize, value: f64) -> Result<Self> {
        if arm >= n {
            return invalid(format!("arm {arm} out of range for {n} arms"));
        }
        let mut values = vec![0.0; n];
        values[arm] = value;
        Self::new(values, IncentiveMode::Single)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> IncentiveMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|x| *x == 0.0)
    }

    /// Index of the largest coordinate (lowest index on ties), `None` for
    /// the zero vector.
    pub fn top_arm(&self) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let mut best = 0;
        for (i, x) in self.values.iter().enumerate() {
            if *x > self.values[best] {
                best = i;
            }
        }
        Some(best)
    }

    pub fn linf_distance(&self, other: &IncentiveVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Arm picked by an agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChosenArm(pub usize);

impl ChosenArm {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Principal rewards `v`, agent preferences `mu` (K rows of N entries) and
/// per-agent tie priorities.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyInstance {
    v: Vec<f64>,
    mu: Vec<Vec<f64>>,
    /// `tie_priority[j][i]` is the 1-based rank of arm `i` for agent `j`.
    tie_priority: Vec<Vec<usize>>,
}

impl GreedyInstance {
    pub fn new(v: Vec<f64>, mu: Vec<Vec<f64>>, tie_priority: Vec<Vec<usize>>) -> Result<Self> {
        let n = v.len();
        let k = mu.len();
        if n == 0 || k == 0 {
            return invalid("instance needs N >= 1 arms and K >= 1 agents");
        }
        if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return invalid("principal rewards must lie in [0,1]");
        }
        for (j, row) in mu.iter().enumerate() {
            if row.len() != n {
                return invalid(format!("preference row {j} has {} entries, expected {n}", row.len()));
            }
            if row.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return invalid(format!("preference row {j} has entries outside [0,1]"));
            }
        }
        if tie_priority.len() != k {
            return invalid(format!("expected {k} tie-priority rows, got {}", tie_priority.len()));
        }
        for (j, row) in tie_priority.iter().enumerate() {
            let mut seen = vec![false; n];
            if row.len() != n {
                return invalid(format!("tie-priority row {j} has wrong length"));
            }
            for &r in row {
                if r == 0 || r > n || seen[r - 1] {
                    return invalid(format!("tie-priority row {j} is not a permutation of 1..={n}"));
                }
                seen[r - 1] = true;
            }
        }
        Ok(Self { v, mu, tie_priority })
    }

    /// Instance where every agent breaks ties towards the smallest arm index.
    pub fn with_lowest_index_ties(v: Vec<f64>, mu: Vec<Vec<f64>>) -> Result<Self> {
        let n = v.len();
        let ties = vec![lowest_index_first(n); mu.len()];
        Self::new(v, mu, ties)
    }

    pub fn num_arms(&self) -> usize {
        self.v.len()
    }

    pub fn num_agents(&self) -> usize {
        self.mu.len()
    }

    pub fn rewards(&self) -> &[f64] {
        &self.v
    }

    pub fn preferences(&self) -> &[Vec<f64>] {
        &self.mu
    }

    pub fn tie_priority(&self) -> &[Vec<usize>] {
        &self.tie_priority
    }

    fn check_call(&self, agent: usize, pi: &IncentiveVector) -> Result<()> {
        if agent >= self.num_agents() {
            return invalid(format!("agent {agent} out of range (K = {})", self.num_agents()));
        }
        if pi.len() != self.num_arms() {
            return invalid(format!(
                "incentive has {} arms, instance has {}",
                pi.len(),
                self.num_arms()
            ));
        }
        Ok(())
    }

    /// `argmax_i mu[agent][i] + pi[i]`, ties within [`TIE_TOL`] resolved by
    /// the agent's priority ranking.
    pub fn greedy_best_response(&self, agent: usize, pi: &IncentiveVector) -> Result<ChosenArm> {
        self.check_call(agent, pi)?;
        Ok(self.best_response_raw(agent, pi.values()))
    }

    /// Best response on a raw slice; callers guarantee the shapes.
    pub(crate) fn best_response_raw(&self, agent: usize, pi: &[f64]) -> ChosenArm {
        let mu = &self.mu[agent];
        let best = mu.iter().zip(pi).map(|(m, p)| m + p).fold(f64::NEG_INFINITY, f64::max);
        let rank = &self.tie_priority[agent];
        let mut chosen = usize::MAX;
        for i in 0..mu.len() {
            if mu[i] + pi[i] >= best - TIE_TOL && (chosen == usize::MAX || rank[i] > rank[chosen]) {
                chosen = i;
            }
        }
        ChosenArm(chosen)
    }

    /// `v_a - pi_a` for the chosen arm `a`.
    pub fn utility(&self, pi: &IncentiveVector, chosen: ChosenArm) -> Result<f64> {
        if chosen.0 >= self.num_arms() || pi.len() != self.num_arms() {
            return invalid("chosen arm or incentive does not match the instance");
        }
        Ok(self.v[chosen.0] - pi.values()[chosen.0])
    }

    /// Utility of `pi` when `agent` arrives.
    pub fn agent_utility(&self, agent: usize, pi: &IncentiveVector) -> Result<f64> {
        let a = self.greedy_best_response(agent, pi)?;
        Ok(self.v[a.0] - pi.values()[a.0])
    }

    pub(crate) fn agent_utility_raw(&self, agent: usize, pi: &[f64]) -> f64 {
        let a = self.best_response_raw(agent, pi).0;
        self.v[a] - pi[a]
    }

    pub fn expected_greedy_utility(&self, pi: &IncentiveVector, agent_distribution: &[f64]) -> Result<f64> {
        check_distribution(agent_distribution, self.num_agents(), DIST_TOL)?;
        let mut total = 0.0;
        for (j, p) in agent_distribution.iter().enumerate() {
            if *p > 0.0 {
                total += p * self.agent_utility(j, pi)?;
            }
        }
        Ok(total)
    }
}

/// Priority row where arm 0 has the highest rank.
pub fn lowest_index_first(n: usize) -> Vec<usize> {
    (0..n).map(|i| n - i).collect()
}

/// Priority row built from an arm order, most preferred first.
pub fn priority_from_order(order: &[usize]) -> Result<Vec<usize>> {
    let n = order.len();
    let mut rank = vec![0; n];
    for (pos, &arm) in order.iter().enumerate() {
        if arm >= n || rank[arm] != 0 {
            return invalid("tie order must be a permutation of the arms");
        }
        rank[arm] = n - pos;
    }
    Ok(rank)
}

pub fn check_distribution(p: &[f64], len: usize, tol: f64) -> Result<()> {
    if p.len() != len {
        return invalid(format!("distribution has {} entries, expected {len}", p.len()));
    }
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return invalid("distribution has negative or non-finite entries");
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::InvalidArgument(format!("distribution sums to {s}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example32(delta: f64) -> GreedyInstance {
        GreedyInstance::new(
            vec![1.0, 0.5, 0.0],
            vec![vec![0.2, 0.0, 0.2 + delta], vec![0.2, 0.2 + delta, 0.0]],
            vec![
                priority_from_order(&[0, 2, 1]).unwrap(),
                priority_from_order(&[1, 0, 2]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn unique_max_with_zero_incentive() {
        let inst = GreedyInstance::with_lowest_index_ties(vec![0.0; 3], vec![vec![0.2, 0.0, 0.9]]).unwrap();
        let pi = IncentiveVector::zero(3, IncentiveMode::Single);
        assert_eq!(inst.greedy_best_response(0, &pi).unwrap(), ChosenArm(2));
    }

    #[test]
    fn example32_ties_follow_priorities() {
        let inst = example32(0.7);
        let pi = IncentiveVector::single(3, 0, 0.7).unwrap();
        assert_eq!(inst.greedy_best_response(0, &pi).unwrap(), ChosenArm(0));
        assert_eq!(inst.greedy_best_response(1, &pi).unwrap(), ChosenArm(1));
    }

    #[test]
    fn utility_pays_only_the_chosen_arm() {
        let inst = example32(0.7);
        let pi = IncentiveVector::single(3, 0, 0.7).unwrap();
        let zero = IncentiveVector::zero(3, IncentiveMode::Single);
        assert!((inst.utility(&pi, ChosenArm(0)).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(inst.utility(&zero, ChosenArm(1)).unwrap(), 0.5);
        assert_eq!(inst.utility(&pi, ChosenArm(1)).unwrap(), 0.5);
    }

    #[test]
    fn expected_utility_example32() {
        let inst = example32(0.7);
        let pi = IncentiveVector::single(3, 0, 0.7).unwrap();
        let u = inst.expected_greedy_utility(&pi, &[0.4, 0.6]).unwrap();
        assert!((u - 0.42).abs() < 1e-12);
        let under = IncentiveVector::single(3, 0, 0.69).unwrap();
        let u = inst.expected_greedy_utility(&under, &[0.4, 0.6]).unwrap();
        assert!((u - 0.3).abs() < 1e-12);
    }

    #[test]
    fn uniform_zero_incentive_is_mean_of_favourites() {
        let inst = example32(0.7);
        let zero = IncentiveVector::zero(3, IncentiveMode::Single);
        // agent 0 plays arm 2 (v=0), agent 1 plays arm 1 (v=0.5)
        let u = inst.expected_greedy_utility(&zero, &[0.5, 0.5]).unwrap();
        assert!((u - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(IncentiveVector::new(vec![0.5, 0.2], IncentiveMode::Single).is_err());
        assert!(IncentiveVector::new(vec![1.5], IncentiveMode::General).is_err());
        assert!(GreedyInstance::new(vec![0.5], vec![vec![0.1]], vec![vec![2]]).is_err());
        assert!(GreedyInstance::new(vec![0.5, 0.1], vec![vec![0.1, 0.2]], vec![vec![1, 1]]).is_err());
        let inst = example32(0.7);
        let pi = IncentiveVector::zero(3, IncentiveMode::Single);
        assert!(inst.greedy_best_response(2, &pi).is_err());
        assert!(inst.expected_greedy_utility(&pi, &[0.5, 0.6]).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = GreedyInstance> {
        (1usize..5, 1usize..4).prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(0.0f64..=1.0, n),
                prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n), k),
                prop::collection::vec(
                    Just(()).prop_perturb(move |_, mut rng| {
                        let mut order: Vec<usize> = (0..n).collect();
                        for i in (1..n).rev() {
                            let j = (rng.next_u32() as usize) % (i + 1);
                            order.swap(i, j);
                        }
                        priority_from_order(&order).unwrap()
                    }),
                    k,
                ),
            )
                .prop_map(|(v, mu, ties)| GreedyInstance::new(v, mu, ties).unwrap())
        })
    }

    proptest! {
        #[test]
        fn utilities_stay_in_unit_range(inst in arb_instance(), x in 0.0f64..=1.0, arm_seed in 0usize..100) {
            let n = inst.num_arms();
            let pi = IncentiveVector::single(n, arm_seed % n, x).unwrap();
            for j in 0..inst.num_agents() {
                let u = inst.agent_utility(j, &pi).unwrap();
                prop_assert!((-1.0..=1.0).contains(&u));
                // determinism
                prop_assert_eq!(inst.greedy_best_response(j, &pi).unwrap(), inst.greedy_best_response(j, &pi).unwrap());
            }
        }

        #[test]
        fn raising_incentive_keeps_the_incentivized_arm(inst in arb_instance(), arm_seed in 0usize..100) {
            let n = inst.num_arms();
            let arm = arm_seed % n;
            for j in 0..inst.num_agents() {
                let mut locked = false;
                for step in 0..=200 {
                    let pi = IncentiveVector::single(n, arm, step as f64 / 200.0).unwrap();
                    let a = inst.greedy_best_response(j, &pi).unwrap().index();
                    if locked {
                        prop_assert_eq!(a, arm);
                    }
                    locked |= a == arm;
                }
            }
        }
    }
}
