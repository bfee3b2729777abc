use serde::{Deserialize, Serialize};

use super::env::Environment;
use super::policy::{Feedback, Policy};
use super::rng::{stream, Stream};
use crate::error::{invalid, Result};
use crate::instances::{ArrivalProcess, PastRound};
use crate::menu::Menu;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round.
    pub t: u64,
    pub incentive_index: usize,
    pub arm: usize,
    pub utility: f64,
}

/// Output of one episode. The arrival sequence is kept for the hindsight
/// benchmark only; it is recorded after the fact and never shown to the
/// policy.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub rounds: Vec<RoundRecord>,
    pub arrivals: Vec<usize>,
    /// Utility of the played incentive in expectation over the agent's
    /// randomness (equal to the realized utility for greedy agents).
    pub expected_utilities: Vec<f64>,
}

/// Runs the protocol for `horizon` rounds. Randomness comes from three
/// streams of `seed`; `arrival_seed` replaces `seed` for the arrival stream
/// when the instance pins it.
pub fn run_episode(
    env: &Environment,
    menu: &Menu,
    policy: &mut dyn Policy,
    arrivals: &mut ArrivalProcess,
    horizon: u64,
    seed: u64,
    arrival_seed: Option<u64>,
) -> Result<Trace> {
    if horizon == 0 {
        return invalid("horizon must be at least 1");
    }
    env.check_menu(menu)?;
    if arrivals.num_agents() != env.num_agents() {
        return invalid("arrival process and environment disagree on the number of agent types");
    }
    let mut arrival_rng = stream(arrival_seed.unwrap_or(seed), Stream::Arrivals);
    let mut policy_rng = stream(seed, Stream::Policy);
    let mut model_rng = stream(seed, Stream::Model);
    let n = horizon as usize;
    let mut rounds = Vec::with_capacity(n);
    let mut seen = Vec::with_capacity(n);
    let mut expected = Vec::with_capacity(n);
    let mut history: Vec<PastRound> = Vec::new();
    for t in 0..horizon {
        // the principal commits before the arrival is drawn
        let index = policy.select(&mut policy_rng)?;
        let Some(pi) = menu.get(index) else {
            return invalid(format!("policy chose index {index} outside a menu of {}", menu.len()));
        };
        let agent = arrivals.next_agent(t, &history, &mut arrival_rng)?;
        let out = env.respond(pi.values(), agent, &mut model_rng)?;
        policy.observe(Feedback {
            menu_index: index,
            arm: out.arm,
            utility: out.utility,
        })?;
        if arrivals.is_adaptive() {
            history.push(PastRound {
                incentive: pi.values().to_vec(),
                arm: out.arm,
            });
        }
        rounds.push(RoundRecord {
            t: t + 1,
            incentive_index: index,
            arm: out.arm,
            utility: out.utility,
        });
        seen.push(agent);
        expected.push(out.expected_utility);
    }
    Ok(Trace {
        rounds,
        arrivals: seen,
        expected_utilities: expected,
    })
}
