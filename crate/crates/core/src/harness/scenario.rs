//! Turning an instance reference plus menu settings into everything one
//! horizon needs: the environment, the learner's menu, the benchmark
//! candidates and the arrival process.

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::Environment;
use crate::document::InstanceDocument;
use crate::domain::{GreedyInstance, IncentiveMode};
use crate::error::{invalid, Result};
use crate::general::{build_general_menu, DEFAULT_PROFILE_CAP, DEFAULT_VERTEX_ARM_CAP};
use crate::instances::{
    example_3_2, hard_b1, hard_b1_relaxed, hard_b2, random_greedy_instance, smooth_hard_suite, ArrivalSpec,
};
use crate::menu::Menu;
use crate::single_arm::{build_raw_menu, build_single_arm_menu, perturb_menu};
use crate::smooth::{
    build_hypercube_grid, build_single_arm_grid, choose_general_resolution, choose_single_resolution,
    gaussian_lipschitz_bound, SmoothChoiceModel, SmoothInstance, DEFAULT_GRID_CAP,
};

fn d_delta() -> f64 {
    0.705
}
fn d_b1_k() -> usize {
    10
}
fn d_three() -> usize {
    3
}
fn d_true() -> bool {
    true
}
fn d_b2_k() -> usize {
    6
}
fn d_b2_n() -> usize {
    17
}
fn d_four() -> usize {
    4
}
fn d_l() -> f64 {
    8.0
}
fn d_half() -> f64 {
    0.5
}
fn d_two() -> usize {
    2
}

/// Where an instance comes from: a document on disk or a built-in
/// generator. Generators that depend on the horizon are rebuilt per `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    File {
        path: PathBuf,
    },
    Example32 {
        #[serde(default = "d_delta")]
        delta: f64,
    },
    HardB1 {
        #[serde(default = "d_b1_k")]
        k: usize,
        #[serde(default = "d_three")]
        n: usize,
        /// Accept horizons below the cubic threshold of the strict version.
        #[serde(default = "d_true")]
        relaxed: bool,
    },
    HardB2 {
        #[serde(default = "d_b2_k")]
        k: usize,
        #[serde(default = "d_b2_n")]
        n: usize,
        #[serde(default)]
        eps: Option<f64>,
    },
    SmoothHard {
        #[serde(default = "d_four")]
        n: usize,
        #[serde(default = "d_l")]
        lipschitz: f64,
        /// Designated arm (0-based).
        #[serde(default)]
        arm: usize,
        /// Where the good interval sits, as a fraction of the available
        /// intervals in `[0, 1/2]`.
        #[serde(default = "d_half")]
        position: f64,
    },
    Random {
        #[serde(default = "d_three")]
        n: usize,
        #[serde(default = "d_two")]
        k: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        grid: Option<f64>,
        /// Use general (all-arm) incentives instead of single-arm ones.
        #[serde(default)]
        general: bool,
    },
    /// Gaussian-noise agents with random preferences and the analytic
    /// Lipschitz bound.
    Gaussian {
        #[serde(default = "d_three")]
        n: usize,
        #[serde(default = "d_two")]
        k: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl InstanceSource {
    /// Built-in name (`example32`, `hard_b1`, `hard_b2`, `smooth_hard`,
    /// `random`) with default parameters, or a path to a document.
    pub fn parse(text: &str) -> Self {
        match text {
            "example32" | "example_3_2" => InstanceSource::Example32 { delta: d_delta() },
            "hard_b1" => InstanceSource::HardB1 {
                k: d_b1_k(),
                n: d_three(),
                relaxed: true,
            },
            "hard_b2" => InstanceSource::HardB2 {
                k: d_b2_k(),
                n: d_b2_n(),
                eps: None,
            },
            "smooth_hard" => InstanceSource::SmoothHard {
                n: d_four(),
                lipschitz: d_l(),
                arm: 0,
                position: d_half(),
            },
            "random" => InstanceSource::Random {
                n: d_three(),
                k: d_two(),
                seed: 0,
                grid: None,
                general: false,
            },
            "gaussian" => InstanceSource::Gaussian {
                n: d_three(),
                k: d_two(),
                seed: 0,
            },
            path => InstanceSource::File { path: path.into() },
        }
    }

    pub fn label(&self) -> String {
        match self {
            InstanceSource::File { path } => path
                .file_stem()
                .map_or_else(|| "file".to_string(), |s| s.to_string_lossy().into_owned()),
            InstanceSource::Example32 { .. } => "example32".into(),
            InstanceSource::HardB1 { .. } => "hard_b1".into(),
            InstanceSource::HardB2 { .. } => "hard_b2".into(),
            InstanceSource::SmoothHard { .. } => "smooth_hard".into(),
            InstanceSource::Random { .. } => "random".into(),
            InstanceSource::Gaussian { .. } => "gaussian".into(),
        }
    }

    /// Builds the instance document for horizon `T`.
    pub fn document(&self, horizon: u64) -> Result<InstanceDocument> {
        use crate::instances::ArrivalDoc;
        let arrival = |spec| ArrivalDoc { spec, seed: None };
        let doc = match self {
            InstanceSource::File { path } => InstanceDocument::load(path)?,
            InstanceSource::Example32 { delta } => {
                let (inst, arr) = example_3_2(*delta)?;
                InstanceDocument::from_greedy(&inst, IncentiveMode::Single).with_arrival(arrival(arr))
            }
            InstanceSource::HardB1 { k, n, relaxed } => {
                let h = if *relaxed {
                    hard_b1_relaxed(*k, *n, horizon)?
                } else {
                    hard_b1(*k, *n, horizon)?
                };
                InstanceDocument::from_greedy(&h.instance, IncentiveMode::Single)
                    .with_arrival(arrival(ArrivalSpec::Iid {
                        probabilities: h.base.clone(),
                    }))
                    .with_menu(&h.menu)
            }
            InstanceSource::HardB2 { k, n, eps } => {
                let h = hard_b2(*k, *n, horizon, *eps)?;
                let p = h.distribution(&h.points[0])?;
                InstanceDocument::from_greedy(&h.instance, IncentiveMode::Single)
                    .with_arrival(arrival(ArrivalSpec::Iid { probabilities: p }))
                    .with_menu(&h.menu)
            }
            InstanceSource::SmoothHard {
                n,
                lipschitz,
                arm,
                position,
            } => {
                let suite = smooth_hard_suite(*n, *lipschitz, horizon)?;
                let per_arm = suite.members.len() / (n - 1);
                if *arm + 1 >= *n || !(0.0..=1.0).contains(position) {
                    return invalid("smooth_hard needs arm < N - 1 and position in [0, 1]");
                }
                let interval = ((*position * per_arm as f64) as usize).min(per_arm - 1);
                let member = &suite.members[arm * per_arm + interval];
                InstanceDocument::from_smooth(&member.instance()?, IncentiveMode::Single)?
                    .with_arrival(arrival(member.arrival.clone()))
            }
            InstanceSource::Random {
                n,
                k,
                seed,
                grid,
                general,
            } => {
                let mut rng = super::rng::stream(*seed, super::rng::Stream::Model);
                let inst = random_greedy_instance(*n, *k, *grid, &mut rng)?;
                let mode = if *general {
                    IncentiveMode::General
                } else {
                    IncentiveMode::Single
                };
                InstanceDocument::from_greedy(&inst, mode).with_arrival(arrival(uniform_arrivals(*k)))
            }
            InstanceSource::Gaussian { n, k, seed } => {
                if *n == 0 || *k == 0 {
                    return invalid("need at least one arm and one agent");
                }
                let mut rng = super::rng::stream(*seed, super::rng::Stream::Model);
                let v: Vec<f64> = (0..*n).map(|_| rng.random()).collect();
                let types = (0..*k)
                    .map(|_| {
                        let pref: Vec<f64> = (0..*n).map(|_| rng.random()).collect();
                        SmoothChoiceModel::gaussian_greedy(pref, gaussian_lipschitz_bound(*n))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let inst = SmoothInstance::new(v, types)?;
                InstanceDocument::from_smooth(&inst, IncentiveMode::Single)?.with_arrival(arrival(uniform_arrivals(*k)))
            }
        };
        Ok(doc.with_name(self.label()))
    }
}

fn uniform_arrivals(k: usize) -> ArrivalSpec {
    ArrivalSpec::Iid {
        probabilities: vec![1.0 / k as f64; k],
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuKind {
    /// The construction matching the agent model and incentive mode.
    #[default]
    Auto,
    SingleArm,
    General,
    /// Single-arm grid with step `eps`.
    Grid,
    Hypercube,
    /// The menu stored in the instance document.
    Instance,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MenuSpec {
    pub kind: MenuKind,
    pub eps: Option<f64>,
    pub cap: Option<u128>,
}

/// Everything needed to run one horizon.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub env: Environment,
    pub mode: IncentiveMode,
    pub arrivals: ArrivalSpec,
    pub arrival_seed: Option<u64>,
    /// The learner's arm set.
    pub menu: Menu,
    /// Candidates for the hindsight benchmark (a superset of `menu`).
    pub oracle: Menu,
    /// Documented gap between the candidate maximum and the true supremum.
    pub oracle_slack: f64,
    pub horizon: u64,
}

fn union(a: &Menu, b: &Menu) -> Menu {
    let mut out = a.clone();
    for item in b.items() {
        out.push_dedup(item.clone());
    }
    out
}

impl Scenario {
    pub fn from_document(doc: &InstanceDocument, menu_spec: &MenuSpec, horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return invalid("horizon must be at least 1");
        }
        let env = doc.environment()?;
        let Some(arrival) = doc.arrival.clone() else {
            return invalid("instance document has no arrival block");
        };
        arrival.spec.validate(env.num_agents())?;
        let cap = menu_spec.cap;
        let menu = match (&env, menu_spec.kind, doc.mode) {
            (_, MenuKind::Instance, _) => match doc.menu()? {
                Some(m) => m,
                None => return invalid("instance document carries no menu"),
            },
            (Environment::Greedy(g), MenuKind::Auto, IncentiveMode::Single)
            | (Environment::Greedy(g), MenuKind::SingleArm, _) => build_single_arm_menu(g, horizon)?,
            (Environment::Greedy(g), MenuKind::Auto, IncentiveMode::General)
            | (Environment::Greedy(g), MenuKind::General, _) => {
                build_general_menu(g, horizon, cap.unwrap_or(DEFAULT_PROFILE_CAP), DEFAULT_VERTEX_ARM_CAP)?
            }
            (Environment::Smooth(s), MenuKind::Auto, IncentiveMode::Single)
            | (Environment::Smooth(s), MenuKind::Grid, _) => {
                let eps = match menu_spec.eps {
                    Some(e) => e,
                    None => choose_single_resolution(s.num_arms(), s.lipschitz(), horizon)?,
                };
                build_single_arm_grid(s.num_arms(), eps)?
            }
            (Environment::Greedy(g), MenuKind::Grid, _) => {
                let Some(eps) = menu_spec.eps else {
                    return invalid("a grid menu on a greedy instance needs eps");
                };
                build_single_arm_grid(g.num_arms(), eps)?
            }
            (_, MenuKind::Auto | MenuKind::Hypercube, _) => {
                let eps = match (menu_spec.eps, &env) {
                    (Some(e), _) => e,
                    (None, Environment::Smooth(s)) => choose_general_resolution(s.num_arms(), s.lipschitz(), horizon)?,
                    (None, Environment::Greedy(_)) => {
                        return invalid("a hypercube menu on a greedy instance needs eps")
                    }
                };
                build_hypercube_grid(env.num_arms(), eps, cap.unwrap_or(DEFAULT_GRID_CAP))?
            }
            (Environment::Smooth(_), MenuKind::SingleArm | MenuKind::General, _) => {
                return invalid("single-arm/general menus need greedy agents; use grid or hypercube");
            }
        };
        env.check_menu(&menu)?;
        let (oracle, oracle_slack) = oracle_for(&env, doc.mode, &menu, horizon, cap)?;
        Ok(Self {
            name: doc.name.clone().unwrap_or_else(|| "instance".into()),
            env,
            mode: doc.mode,
            arrivals: arrival.spec,
            arrival_seed: arrival.seed,
            menu,
            oracle,
            oracle_slack,
            horizon,
        })
    }

    pub fn from_source(source: &InstanceSource, menu_spec: &MenuSpec, horizon: u64) -> Result<Self> {
        let doc = source.document(horizon)?;
        Self::from_document(&doc, menu_spec, horizon)
    }

    pub fn greedy(&self) -> Option<&GreedyInstance> {
        match &self.env {
            Environment::Greedy(g) => Some(g),
            Environment::Smooth(_) => None,
        }
    }
}

/// Greedy agents: the dominance menus themselves (perturbed, unreduced for
/// single-arm), with the construction's additive slack. Smooth agents: a
/// grid ten times finer than the learner's resolution, slack
/// `(L + 1) eps_oracle T`.
fn oracle_for(
    env: &Environment,
    mode: IncentiveMode,
    menu: &Menu,
    horizon: u64,
    cap: Option<u128>,
) -> Result<(Menu, f64)> {
    match (env, mode) {
        (Environment::Greedy(g), IncentiveMode::Single) => {
            let full = perturb_menu(g, &build_raw_menu(g), horizon)?;
            Ok((union(menu, &full), 1.0))
        }
        (Environment::Greedy(g), IncentiveMode::General) => {
            let full = build_general_menu(g, horizon, cap.unwrap_or(DEFAULT_PROFILE_CAP), DEFAULT_VERTEX_ARM_CAP)?;
            Ok((union(menu, &full), 2.0))
        }
        (Environment::Smooth(s), mode) => {
            let l = s.lipschitz();
            let n = s.num_arms();
            let (grid, eps) = if mode == IncentiveMode::Single {
                let eps = choose_single_resolution(n, l, horizon)? / 10.0;
                (build_single_arm_grid(n, eps)?, eps)
            } else {
                let eps = choose_general_resolution(n, l, horizon)? / 10.0;
                (build_hypercube_grid(n, eps, cap.unwrap_or(DEFAULT_GRID_CAP))?, eps)
            };
            Ok((union(menu, &grid), (l + 1.0) * eps * horizon as f64))
        }
    }
}
