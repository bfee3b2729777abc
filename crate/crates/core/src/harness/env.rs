use rand::RngCore;

use crate::domain::{GreedyInstance, IncentiveMode};
use crate::error::{invalid, Result};
use crate::menu::Menu;
use crate::smooth::SmoothInstance;

/// The agent side of the protocol.
#[derive(Clone, Debug)]
pub enum Environment {
    Greedy(GreedyInstance),
    Smooth(SmoothInstance),
}

/// What one round produced. Only `arm` and `utility` ever reach a policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub arm: usize,
    pub utility: f64,
    /// `E[v_a - pi_a]` over the agent's randomness (equal to `utility` for
    /// greedy agents).
    pub expected_utility: f64,
}

impl Environment {
    pub fn num_arms(&self) -> usize {
        match self {
            Environment::Greedy(g) => g.num_arms(),
            Environment::Smooth(s) => s.num_arms(),
        }
    }

    pub fn num_agents(&self) -> usize {
        match self {
            Environment::Greedy(g) => g.num_agents(),
            Environment::Smooth(s) => s.num_agents(),
        }
    }

    pub fn is_greedy(&self) -> bool {
        matches!(self, Environment::Greedy(_))
    }

    pub fn respond(&self, pi: &[f64], agent: usize, rng: &mut dyn RngCore) -> Result<Outcome> {
        if pi.len() != self.num_arms() || agent >= self.num_agents() {
            return invalid("incentive or agent does not match the environment");
        }
        match self {
            Environment::Greedy(g) => {
                let arm = g.best_response_raw(agent, pi).index();
                let utility = g.rewards()[arm] - pi[arm];
                Ok(Outcome {
                    arm,
                    utility,
                    expected_utility: utility,
                })
            }
            Environment::Smooth(s) => {
                let probs = s.types()[agent].probabilities(pi)?;
                let arm = crate::bandits::sample_index(&probs, rng);
                let v = s.rewards();
                let expected_utility = probs.iter().enumerate().map(|(a, p)| p * (v[a] - pi[a])).sum();
                Ok(Outcome {
                    arm,
                    utility: v[arm] - pi[arm],
                    expected_utility,
                })
            }
        }
    }

    /// `table[m][j]` = (expected) utility of menu item `m` against type `j`.
    pub fn utility_table(&self, menu: &Menu) -> Result<Vec<Vec<f64>>> {
        let k = self.num_agents();
        menu.incentives()
            .map(|pi| {
                if pi.len() != self.num_arms() {
                    return invalid("menu item does not match the environment");
                }
                (0..k)
                    .map(|j| match self {
                        Environment::Greedy(g) => Ok(g.agent_utility_raw(j, pi.values())),
                        Environment::Smooth(s) => s.expected_utility(pi.values(), j),
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks that a menu is usable here: matching length, and single-arm
    /// items for models that only accept them.
    pub fn check_menu(&self, menu: &Menu) -> Result<()> {
        if menu.is_empty() {
            return invalid("menu is empty");
        }
        if menu.num_arms() != Some(self.num_arms()) {
            return invalid("menu/model mismatch: wrong number of arms");
        }
        if let Environment::Smooth(s) = self {
            let single_only = s.types().iter().any(|m| m.single_arm_only());
            if single_only
                && menu
                    .incentives()
                    .any(|p| p.mode() == IncentiveMode::General && p.values().iter().filter(|x| **x != 0.0).count() > 1)
            {
                return invalid("menu/model mismatch: model accepts single-arm incentives only");
            }
        }
        Ok(())
    }
}
