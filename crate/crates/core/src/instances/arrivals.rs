use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bandits::sample_index;
use crate::domain::check_distribution;
use crate::error::{invalid, Result};

const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub length: u64,
    pub probabilities: Vec<f64>,
}

/// Oblivious arrival processes that can be written to an instance document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalSpec {
    /// Agent indices played in order, cycling when the horizon is longer.
    FixedSequence {
        sequence: Vec<usize>,
    },
    Iid {
        probabilities: Vec<f64>,
    },
    /// Blocks of i.i.d. arrivals, the schedule repeating after its last block.
    BlockSwitching {
        blocks: Vec<Block>,
    },
    Constant {
        agent: usize,
    },
}

/// Arrival block of an instance document: the process plus an optional seed
/// that pins the arrival stream independently of the experiment seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalDoc {
    #[serde(flatten)]
    pub spec: ArrivalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ArrivalSpec {
    pub fn validate(&self, num_agents: usize) -> Result<()> {
        let agent_ok = |a: usize| {
            if a < num_agents {
                Ok(())
            } else {
                invalid(format!("agent {a} out of range for {num_agents} agent types"))
            }
        };
        match self {
            ArrivalSpec::FixedSequence { sequence } => {
                if sequence.is_empty() {
                    return invalid("fixed sequence is empty");
                }
                sequence.iter().try_for_each(|a| agent_ok(*a))
            }
            ArrivalSpec::Iid { probabilities } => check_distribution(probabilities, num_agents, PROB_TOL),
            ArrivalSpec::BlockSwitching { blocks } => {
                if blocks.is_empty() || blocks.iter().any(|b| b.length == 0) {
                    return invalid("block schedule needs nonempty blocks");
                }
                blocks
                    .iter()
                    .try_for_each(|b| check_distribution(&b.probabilities, num_agents, PROB_TOL))
            }
            ArrivalSpec::Constant { agent } => agent_ok(*agent),
        }
    }

    /// Arrival distribution at round `t` (0-based).
    pub fn distribution_at(&self, t: u64, num_agents: usize) -> Vec<f64> {
        let one_hot = |a: usize| {
            let mut p = vec![0.0; num_agents];
            p[a] = 1.0;
            p
        };
        match self {
            ArrivalSpec::FixedSequence { sequence } => one_hot(sequence[(t % sequence.len() as u64) as usize]),
            ArrivalSpec::Iid { probabilities } => probabilities.clone(),
            ArrivalSpec::BlockSwitching { blocks } => {
                let period: u64 = blocks.iter().map(|b| b.length).sum();
                let mut r = t % period;
                for b in blocks {
                    if r < b.length {
                        return b.probabilities.clone();
                    }
                    r -= b.length;
                }
                unreachable!("offset lies inside one period")
            }
            ArrivalSpec::Constant { agent } => one_hot(*agent),
        }
    }
}

/// One past round as seen by an adaptive adversary.
#[derive(Clone, Debug, PartialEq)]
pub struct PastRound {
    pub incentive: Vec<f64>,
    pub arm: usize,
}

type AdaptiveFn = Box<dyn FnMut(&[PastRound]) -> usize + Send>;

enum Source {
    Spec(ArrivalSpec),
    Adaptive(AdaptiveFn),
}

/// Stateful arrival stream for one episode.
pub struct ArrivalProcess {
    source: Source,
    num_agents: usize,
}

impl fmt::Debug for ArrivalProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Spec(s) => f.debug_tuple("ArrivalProcess").field(s).finish(),
            Source::Adaptive(_) => f.write_str("ArrivalProcess(adaptive)"),
        }
    }
}

impl ArrivalProcess {
    pub fn new(spec: ArrivalSpec, num_agents: usize) -> Result<Self> {
        spec.validate(num_agents)?;
        Ok(Self {
            source: Source::Spec(spec),
            num_agents,
        })
    }

    /// An adversary that picks the next agent from the history of posted
    /// incentives and chosen arms. Out-of-range answers are reported as
    /// errors by [`ArrivalProcess::next_agent`].
    pub fn adaptive<F>(num_agents: usize, f: F) -> Self
    where
        F: FnMut(&[PastRound]) -> usize + Send + 'static,
    {
        Self {
            source: Source::Adaptive(Box::new(f)),
            num_agents,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.source, Source::Adaptive(_))
    }

    pub fn spec(&self) -> Option<&ArrivalSpec> {
        match &self.source {
            Source::Spec(s) => Some(s),
            Source::Adaptive(_) => None,
        }
    }

    pub fn next_agent(&mut self, t: u64, history: &[PastRound], rng: &mut dyn RngCore) -> Result<usize> {
        let agent = match &mut self.source {
            Source::Spec(ArrivalSpec::FixedSequence { sequence }) => sequence[(t % sequence.len() as u64) as usize],
            Source::Spec(ArrivalSpec::Constant { agent }) => *agent,
            Source::Spec(spec) => sample_index(&spec.distribution_at(t, self.num_agents), rng),
            Source::Adaptive(f) => f(history),
        };
        if agent >= self.num_agents {
            return invalid(format!("arrival process produced agent {agent}"));
        }
        Ok(agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_sequence_cycles() {
        let mut a = ArrivalProcess::new(
            ArrivalSpec::FixedSequence {
                sequence: vec![1, 0, 0],
            },
            2,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let got: Vec<usize> = (0..5).map(|t| a.next_agent(t, &[], &mut rng).unwrap()).collect();
        assert_eq!(got, vec![1, 0, 0, 1, 0]);
    }

    #[test]
    fn validation() {
        assert!(ArrivalProcess::new(
            ArrivalSpec::Iid {
                probabilities: vec![0.5, 0.4]
            },
            2
        )
        .is_err());
        assert!(ArrivalProcess::new(ArrivalSpec::Constant { agent: 2 }, 2).is_err());
        let blocks = vec![
            Block {
                length: 2,
                probabilities: vec![1.0, 0.0],
            },
            Block {
                length: 1,
                probabilities: vec![0.0, 1.0],
            },
        ];
        let spec = ArrivalSpec::BlockSwitching { blocks };
        assert_eq!(spec.distribution_at(2, 2), vec![0.0, 1.0]);
        assert_eq!(spec.distribution_at(4, 2), vec![1.0, 0.0]);
    }

    #[test]
    fn adaptive_sees_history() {
        let mut a = ArrivalProcess::adaptive(2, |h: &[PastRound]| h.last().map_or(0, |r| r.arm % 2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = vec![PastRound {
            incentive: vec![0.0, 0.0],
            arm: 1,
        }];
        assert_eq!(a.next_agent(1, &h, &mut rng).unwrap(), 1);
        let mut bad = ArrivalProcess::adaptive(2, |_: &[PastRound]| 7);
        assert!(bad.next_agent(0, &[], &mut rng).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let doc = ArrivalDoc {
            spec: ArrivalSpec::Iid {
                probabilities: vec![0.4, 0.6],
            },
            seed: Some(9),
        };
        let s = serde_json::to_string(&doc).unwrap();
        assert!(s.contains("\"kind\":\"iid\""));
        assert_eq!(serde_json::from_str::<ArrivalDoc>(&s).unwrap(), doc);
    }
}
