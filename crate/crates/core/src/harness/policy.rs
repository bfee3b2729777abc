//! Learners as seen by the harness. A policy picks a menu index and is then
//! told the chosen arm and the realized utility; the arriving type never
//! crosses this interface.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bandits::{cover_embeddings, embed_menu, Exp3Config, Exp3LinearState, TsallisInfState};
use crate::domain::GreedyInstance;
use crate::error::{invalid, Result};
use crate::menu::Menu;

/// Everything a policy learns about one round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feedback {
    pub menu_index: usize,
    pub arm: usize,
    pub utility: f64,
}

pub trait Policy: Send {
    fn name(&self) -> &str;
    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize>;
    fn observe(&mut self, feedback: Feedback) -> Result<()>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PolicySpec {
    Exp3linear {
        #[serde(default, flatten)]
        params: Exp3Config,
        /// sup-norm cover tolerance for the embedding; `None` keeps all rows.
        #[serde(default)]
        cover_tol: Option<f64>,
    },
    Tsallis,
    Fixed {
        index: usize,
    },
    Uniform,
}

impl PolicySpec {
    pub fn parse_name(name: &str) -> Result<Self> {
        match name {
            "exp3linear" | "exp3" => Ok(PolicySpec::Exp3linear {
                params: Exp3Config::default(),
                cover_tol: None,
            }),
            "tsallis" | "tsallis_inf" => Ok(PolicySpec::Tsallis),
            "uniform" => Ok(PolicySpec::Uniform),
            other => match other.strip_prefix("fixed:").map(str::parse) {
                Some(Ok(index)) => Ok(PolicySpec::Fixed { index }),
                _ => invalid(format!("unknown policy '{other}'")),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            PolicySpec::Exp3linear { .. } => "exp3linear".into(),
            PolicySpec::Tsallis => "tsallis".into(),
            PolicySpec::Fixed { index } => format!("fixed:{index}"),
            PolicySpec::Uniform => "uniform".into(),
        }
    }

    /// `greedy` must be given for EXP3-linear, whose arm embedding needs the
    /// agents' best responses.
    pub fn build(&self, menu: &Menu, greedy: Option<&GreedyInstance>, horizon: u64) -> Result<Box<dyn Policy>> {
        if menu.is_empty() {
            return invalid("policy needs a nonempty menu");
        }
        Ok(match self {
            PolicySpec::Exp3linear { params, cover_tol } => {
                let Some(instance) = greedy else {
                    return invalid("exp3linear needs a greedy instance to embed the menu");
                };
                Box::new(Exp3LinearPolicy::new(instance, menu, horizon, params, *cover_tol)?)
            }
            PolicySpec::Tsallis => Box::new(TsallisPolicy::new(menu.len())?),
            PolicySpec::Fixed { index } => {
                if *index >= menu.len() {
                    return invalid(format!("fixed index {index} outside a menu of {}", menu.len()));
                }
                Box::new(FixedPolicy::new(*index))
            }
            PolicySpec::Uniform => Box::new(UniformPolicy { size: menu.len() }),
        })
    }
}

/// Plays one menu item forever.
#[derive(Clone, Debug)]
pub struct FixedPolicy {
    index: usize,
    label: String,
}

impl FixedPolicy {
    pub fn new(index: usize) -> Self {
        Self {
            index,
            label: format!("fixed:{index}"),
        }
    }
}

impl Policy for FixedPolicy {
    fn name(&self) -> &str {
        &self.label
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> Result<usize> {
        Ok(self.index)
    }

    fn observe(&mut self, _feedback: Feedback) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct UniformPolicy {
    size: usize,
}

impl Policy for UniformPolicy {
    fn name(&self) -> &str {
        "uniform"
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize> {
        Ok(rng.random_range(0..self.size))
    }

    fn observe(&mut self, _feedback: Feedback) -> Result<()> {
        Ok(())
    }
}

/// Tsallis-INF over menu items with losses `(1 - u) / 2`.
#[derive(Clone, Debug)]
pub struct TsallisPolicy {
    state: TsallisInfState,
}

impl TsallisPolicy {
    pub fn new(size: usize) -> Result<Self> {
        Ok(Self {
            state: TsallisInfState::new(size)?,
        })
    }
}

impl Policy for TsallisPolicy {
    fn name(&self) -> &str {
        "tsallis"
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize> {
        Ok(self.state.step(rng))
    }

    fn observe(&mut self, feedback: Feedback) -> Result<()> {
        self.state.update(feedback.menu_index, (1.0 - feedback.utility) / 2.0)
    }
}

/// EXP3 for linear bandits on the utility embedding of the menu, optionally
/// shrunk to a sup-norm cover.
#[derive(Clone, Debug)]
pub struct Exp3LinearPolicy {
    state: Exp3LinearState,
    /// Menu index of each learner arm.
    source: Vec<usize>,
    last_arm: Option<usize>,
}

impl Exp3LinearPolicy {
    pub fn new(
        instance: &GreedyInstance,
        menu: &Menu,
        horizon: u64,
        config: &Exp3Config,
        cover_tol: Option<f64>,
    ) -> Result<Self> {
        let mut emb = embed_menu(instance, menu)?;
        if let Some(tol) = cover_tol {
            emb = cover_embeddings(&emb, tol)?;
        }
        Ok(Self {
            state: Exp3LinearState::new(&emb, horizon, config)?,
            source: emb.source().to_vec(),
            last_arm: None,
        })
    }

    pub fn state(&self) -> &Exp3LinearState {
        &self.state
    }
}

impl Policy for Exp3LinearPolicy {
    fn name(&self) -> &str {
        "exp3linear"
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize> {
        let arm = self.state.step(rng);
        self.last_arm = Some(arm);
        Ok(self.source[arm])
    }

    fn observe(&mut self, feedback: Feedback) -> Result<()> {
        let Some(arm) = self.last_arm.take() else {
            return invalid("feedback without a preceding selection");
        };
        if self.source[arm] != feedback.menu_index {
            return invalid("feedback refers to a different menu item");
        }
        self.state.update(arm, feedback.utility)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!(PolicySpec::parse_name("tsallis").unwrap(), PolicySpec::Tsallis);
        assert_eq!(
            PolicySpec::parse_name("fixed:3").unwrap(),
            PolicySpec::Fixed { index: 3 }
        );
        assert!(PolicySpec::parse_name("fixed:x").is_err());
        assert!(PolicySpec::parse_name("zooming").is_err());
        assert_eq!(PolicySpec::parse_name("exp3linear").unwrap().label(), "exp3linear");
    }
}
