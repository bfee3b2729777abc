//! Smooth (randomized, Lipschitz) agents and the grid discretizations used to
//! learn against them.

mod gaussian;
mod hard;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bandits::sample_index;
use crate::domain::{check_distribution, IncentiveMode, IncentiveVector};
use crate::error::{invalid, Error, Result};
use crate::menu::{Menu, MenuItem, Provenance};

pub use gaussian::{gaussian_choice_probabilities, gaussian_lipschitz_bound, gaussian_probabilities_from_scores};
pub use hard::{bonus, SmoothHardParams};

pub const DEFAULT_GRID_CAP: u128 = 1_000_000;
const DIST_TOL: f64 = 1e-9;
const AUDIT_SLACK: f64 = 1e-6;
/// Audited Lipschitz constants are inflated by this factor when declared.
pub const AUDIT_MARGIN: f64 = 1.05;

/// Number of grid steps `floor(1/eps)`, robust to `1/eps` landing a hair
/// below an integer.
fn steps(eps: f64) -> usize {
    (1.0 / eps + 1e-9).floor() as usize
}

/// Single-arm grid: value `(j - 1) * eps` on each arm for
/// `j = 1..=floor(1/eps) + 1`, plus the zero vector (deduplicated).
pub fn build_single_arm_grid(n: usize, eps: f64) -> Result<Menu> {
    if n == 0 {
        return invalid("need at least one arm");
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid(format!("grid step must lie in (0, 1], got {eps}"));
    }
    let mut menu = Menu::new();
    menu.push_dedup(MenuItem {
        incentive: IncentiveVector::zero(n, IncentiveMode::Single),
        provenance: Provenance::Zero,
    });
    for arm in 0..n {
        for j in 1..=steps(eps) {
            let value = (j as f64 * eps).min(1.0);
            menu.push_dedup(MenuItem {
                incentive: IncentiveVector::single(n, arm, value)?,
                provenance: Provenance::Grid,
            });
        }
    }
    Ok(menu)
}

fn check_resolution_args(n: usize, lipschitz: f64, horizon: u64) -> Result<()> {
    if n == 0 || horizon == 0 {
        return invalid("N and T must be at least 1");
    }
    if !(lipschitz >= 1.0) {
        return invalid(format!("Lipschitz constant must be at least 1, got {lipschitz}"));
    }
    Ok(())
}

/// `eps = N^{1/3} (2L+1)^{-2/3} T^{-1/3}`, clamped to (0, 1].
pub fn choose_single_resolution(n: usize, lipschitz: f64, horizon: u64) -> Result<f64> {
    check_resolution_args(n, lipschitz, horizon)?;
    let eps = (n as f64).cbrt() * (2.0 * lipschitz + 1.0).powf(-2.0 / 3.0) * (horizon as f64).cbrt().recip();
    Ok(eps.min(1.0))
}

/// `eps = (2L+1)^{-2/(N+2)} T^{-1/(N+2)}`, clamped to (0, 1].
pub fn choose_general_resolution(n: usize, lipschitz: f64, horizon: u64) -> Result<f64> {
    check_resolution_args(n, lipschitz, horizon)?;
    let d = n as f64 + 2.0;
    let eps = (2.0 * lipschitz + 1.0).powf(-2.0 / d) * (horizon as f64).powf(-1.0 / d);
    Ok(eps.min(1.0))
}

/// Centers of the `ceil(1/eps)^N` equal cells of `[0,1]^N`.
pub fn build_hypercube_grid(n: usize, eps: f64, cap: u128) -> Result<Menu> {
    if n == 0 {
        return invalid("need at least one arm");
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid(format!("grid step must lie in (0, 1], got {eps}"));
    }
    let per_axis = (1.0 / eps - 1e-9).ceil().max(1.0) as usize;
    let needed = (per_axis as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::CapExceeded {
            what: "hypercube grid cells",
            needed,
            cap,
        });
    }
    let side = 1.0 / per_axis as f64;
    let mut items = Vec::with_capacity(needed as usize);
    let mut idx = vec![0usize; n];
    loop {
        let values = idx.iter().map(|&c| (c as f64 + 0.5) * side).collect();
        items.push(MenuItem {
            incentive: IncentiveVector::new(values, IncentiveMode::General)?,
            provenance: Provenance::Grid,
        });
        // odometer increment, last coordinate fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(Menu::from_distinct(items));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < per_axis {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Serializable description of a smooth choice model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    GaussianGreedy {
        preference: Vec<f64>,
        lipschitz: f64,
    },
    HardInstance {
        params: SmoothHardParams,
    },
    Logit {
        preference: Vec<f64>,
        temperature: f64,
        lipschitz: f64,
    },
    Constant {
        distribution: Vec<f64>,
    },
}

type ChoiceFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Spec(ModelSpec),
    Custom {
        name: String,
        f: ChoiceFn,
        single_arm_only: bool,
    },
}

/// An incentive-to-distribution map for one agent type, with a declared
/// Lipschitz constant under the sup-norm / L1 contract.
#[derive(Clone)]
pub struct SmoothChoiceModel {
    kind: Kind,
    num_arms: usize,
    lipschitz: f64,
}

impl fmt::Debug for SmoothChoiceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("SmoothChoiceModel");
        match &self.kind {
            Kind::Spec(s) => d.field("spec", s),
            Kind::Custom { name, .. } => d.field("custom", name),
        };
        d.field("lipschitz", &self.lipschitz).finish()
    }
}

fn check_lipschitz(l: f64) -> Result<()> {
    if !(l >= 1.0 && l.is_finite()) {
        return invalid(format!(
            "declared Lipschitz constant must be finite and at least 1, got {l}"
        ));
    }
    Ok(())
}

impl SmoothChoiceModel {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        let (num_arms, lipschitz) = match &spec {
            ModelSpec::GaussianGreedy { preference, lipschitz } => {
                check_lipschitz(*lipschitz)?;
                (preference.len(), *lipschitz)
            }
            ModelSpec::HardInstance { params } => {
                let p = SmoothHardParams::new(
                    params.arm,
                    params.interval,
                    params.eps,
                    params.lipschitz,
                    params.num_arms,
                )?;
                (p.num_arms, p.lipschitz)
            }
            ModelSpec::Logit {
                preference,
                temperature,
                lipschitz,
            } => {
                check_lipschitz(*lipschitz)?;
                if !(*temperature > 0.0) {
                    return invalid("logit temperature must be positive");
                }
                (preference.len(), *lipschitz)
            }
            ModelSpec::Constant { distribution } => {
                check_distribution(distribution, distribution.len(), DIST_TOL)?;
                (distribution.len(), 1.0)
            }
        };
        if num_arms == 0 {
            return invalid("model needs at least one arm");
        }
        Ok(Self {
            kind: Kind::Spec(spec),
            num_arms,
            lipschitz,
        })
    }

    pub fn gaussian_greedy(preference: Vec<f64>, lipschitz: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::GaussianGreedy { preference, lipschitz })
    }

    pub fn hard_instance(params: SmoothHardParams) -> Result<Self> {
        Self::from_spec(ModelSpec::HardInstance { params })
    }

    pub fn logit(preference: Vec<f64>, temperature: f64, lipschitz: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::Logit {
            preference,
            temperature,
            lipschitz,
        })
    }

    pub fn constant(distribution: Vec<f64>) -> Result<Self> {
        Self::from_spec(ModelSpec::Constant { distribution })
    }

    /// A user-supplied map. Outputs are validated on every call.
    pub fn custom<F>(name: &str, num_arms: usize, lipschitz: f64, single_arm_only: bool, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        check_lipschitz(lipschitz)?;
        if num_arms == 0 {
            return invalid("model needs at least one arm");
        }
        Ok(Self {
            kind: Kind::Custom {
                name: name.to_string(),
                f: Arc::new(f),
                single_arm_only,
            },
            num_arms,
            lipschitz,
        })
    }

    /// Same model with a different declared constant.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        check_lipschitz(lipschitz)?;
        self.lipschitz = lipschitz;
        if let Kind::Spec(ModelSpec::GaussianGreedy { lipschitz: l, .. } | ModelSpec::Logit { lipschitz: l, .. }) =
            &mut self.kind
        {
            *l = lipschitz;
        }
        Ok(self)
    }

    /// `None` for custom closures.
    pub fn spec(&self) -> Option<&ModelSpec> {
        match &self.kind {
            Kind::Spec(s) => Some(s),
            Kind::Custom { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &str {
        match &self.kind {
            Kind::Spec(ModelSpec::GaussianGreedy { .. }) => "gaussian_greedy",
            Kind::Spec(ModelSpec::HardInstance { .. }) => "hard_instance",
            Kind::Spec(ModelSpec::Logit { .. }) => "logit",
            Kind::Spec(ModelSpec::Constant { .. }) => "constant",
            Kind::Custom { name, .. } => name,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Whether the model is only defined on single-arm incentives.
    pub fn single_arm_only(&self) -> bool {
        match &self.kind {
            Kind::Spec(ModelSpec::HardInstance { .. }) => true,
            Kind::Spec(_) => false,
            Kind::Custom { single_arm_only, .. } => *single_arm_only,
        }
    }

    /// Incentive values where the map may change slope; used to aim audit
    /// probes.
    fn breakpoints(&self) -> Vec<(Option<usize>, f64)> {
        match &self.kind {
            Kind::Spec(ModelSpec::HardInstance { params }) => {
                let lo = params.interval_start();
                vec![
                    (Some(params.arm), lo),
                    (Some(params.arm), lo + params.eps),
                    (Some(params.arm), params.peak_incentive()),
                    (None, 0.5),
                ]
            }
            _ => Vec::new(),
        }
    }

    pub fn probabilities(&self, pi: &[f64]) -> Result<Vec<f64>> {
        if pi.len() != self.num_arms {
            return invalid(format!(
                "incentive has {} coordinates, model has {} arms",
                pi.len(),
                self.num_arms
            ));
        }
        let probs = match &self.kind {
            Kind::Spec(ModelSpec::GaussianGreedy { preference, .. }) => gaussian_choice_probabilities(preference, pi)?,
            Kind::Spec(ModelSpec::HardInstance { params }) => params.probabilities(pi)?,
            Kind::Spec(ModelSpec::Logit {
                preference,
                temperature,
                ..
            }) => {
                let s: Vec<f64> = preference.iter().zip(pi).map(|(m, p)| (m + p) / temperature).collect();
                let top = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = s.iter().map(|x| (x - top).exp()).collect();
                let z: f64 = e.iter().sum();
                e.into_iter().map(|x| x / z).collect()
            }
            Kind::Spec(ModelSpec::Constant { distribution }) => distribution.clone(),
            Kind::Custom { f, .. } => f(pi)?,
        };
        if probs.len() != self.num_arms || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Invariant(format!(
                "{} returned an invalid distribution",
                self.kind_name()
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DIST_TOL {
            return Err(Error::Invariant(format!(
                "{} returned probabilities summing to {total}",
                self.kind_name()
            )));
        }
        Ok(probs)
    }

    pub fn sample_arm(&self, pi: &[f64], rng: &mut dyn RngCore) -> Result<usize> {
        Ok(sample_index(&self.probabilities(pi)?, rng))
    }
}

/// Principal rewards plus one smooth model per agent type.
#[derive(Clone, Debug)]
pub struct SmoothInstance {
    rewards: Vec<f64>,
    types: Vec<SmoothChoiceModel>,
}

impl SmoothInstance {
    pub fn new(rewards: Vec<f64>, types: Vec<SmoothChoiceModel>) -> Result<Self> {
        if types.is_empty() {
            return invalid("need at least one agent type");
        }
        if rewards.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return invalid("principal rewards must lie in [0,1]");
        }
        if types.iter().any(|m| m.num_arms() != rewards.len()) {
            return invalid("every model must cover all arms");
        }
        Ok(Self { rewards, types })
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn types(&self) -> &[SmoothChoiceModel] {
        &self.types
    }

    pub fn num_arms(&self) -> usize {
        self.rewards.len()
    }

    pub fn num_agents(&self) -> usize {
        self.types.len()
    }

    /// Largest declared constant over the agent types.
    pub fn lipschitz(&self) -> f64 {
        self.types.iter().map(SmoothChoiceModel::lipschitz).fold(1.0, f64::max)
    }

    /// `E[v_a - pi_a]` for agent type `j`.
    pub fn expected_utility(&self, pi: &[f64], agent: usize) -> Result<f64> {
        let Some(model) = self.types.get(agent) else {
            return invalid(format!("agent {agent} out of range"));
        };
        let p = model.probabilities(pi)?;
        Ok(p.iter()
            .zip(self.rewards.iter().zip(pi))
            .map(|(pa, (v, x))| pa * (v - x))
            .sum())
    }

    pub fn sample_arm(&self, pi: &[f64], agent: usize, rng: &mut dyn RngCore) -> Result<usize> {
        let Some(model) = self.types.get(agent) else {
            return invalid(format!("agent {agent} out of range"));
        };
        model.sample_arm(pi, rng)
    }
}

fn random_incentive(n: usize, single: bool, rng: &mut dyn RngCore) -> Vec<f64> {
    if single {
        let mut v = vec![0.0; n];
        v[rng.random_range(0..n)] = rng.random::<f64>();
        v
    } else {
        (0..n).map(|_| rng.random::<f64>()).collect()
    }
}

fn nudge(pi: &[f64], single: bool, delta: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let mut q = pi.to_vec();
    if single {
        let arm = pi
            .iter()
            .position(|x| *x != 0.0)
            .unwrap_or_else(|| rng.random_range(0..pi.len()));
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        q[arm] = (q[arm] + sign * delta).clamp(0.0, 1.0);
    } else {
        for x in &mut q {
            *x = (*x + rng.random_range(-delta..=delta)).clamp(0.0, 1.0);
        }
    }
    q
}

/// Largest observed `sum_i |P(pi)_i - P(pi')_i| / |pi - pi'|_inf` over
/// `trials` probe pairs: far pairs, close pairs, pairs straddling the
/// model's breakpoints, and cross-arm pairs for single-arm models.
pub fn lipschitz_audit(model: &SmoothChoiceModel, trials: usize, rng: &mut dyn RngCore) -> Result<f64> {
    if trials == 0 {
        return invalid("audit needs at least one trial");
    }
    let n = model.num_arms();
    let single = model.single_arm_only();
    let breaks = model.breakpoints();
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let delta = 10f64.powf(rng.random_range(-6.0..-2.0));
        let (a, b) = match t % 4 {
            0 => (random_incentive(n, single, rng), random_incentive(n, single, rng)),
            1 => {
                let a = random_incentive(n, single, rng);
                let b = nudge(&a, single, delta, rng);
                (a, b)
            }
            2 if !breaks.is_empty() => {
                let (arm, at) = breaks[rng.random_range(0..breaks.len())];
                let arm = arm.unwrap_or_else(|| rng.random_range(0..n));
                let mut a = vec![0.0; n];
                let mut b = vec![0.0; n];
                a[arm] = (at - rng.random::<f64>() * delta).clamp(0.0, 1.0);
                b[arm] = (at + rng.random::<f64>() * delta).clamp(0.0, 1.0);
                (a, b)
            }
            _ if single && n > 1 => {
                let i = rng.random_range(0..n);
                let j = (i + rng.random_range(1..n)) % n;
                let mut a = vec![0.0; n];
                let mut b = vec![0.0; n];
                // anchor near the good interval when there is one
                let base = breaks.first().map_or(0.0, |(_, x)| *x);
                a[i] = (base + rng.random::<f64>() * delta).min(1.0);
                b[j] = (rng.random::<f64>() * delta).min(1.0);
                (a, b)
            }
            _ => {
                let a = random_incentive(n, single, rng);
                let b = nudge(&a, single, delta, rng);
                (a, b)
            }
        };
        let dist = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if dist == 0.0 {
            continue;
        }
        let pa = model.probabilities(&a)?;
        let pb = model.probabilities(&b)?;
        let tv: f64 = pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum();
        worst = worst.max(tv / dist);
    }
    Ok(worst)
}

/// Whether an audited ratio is within the declared constant.
pub fn audit_passes(model: &SmoothChoiceModel, ratio: f64) -> bool {
    ratio <= model.lipschitz() * (1.0 + AUDIT_SLACK)
}

/// Declares the audited constant (times [`AUDIT_MARGIN`], at least 1) on the
/// model.
pub fn calibrate_lipschitz(
    model: SmoothChoiceModel,
    trials: usize,
    rng: &mut dyn RngCore,
) -> Result<SmoothChoiceModel> {
    let ratio = lipschitz_audit(&model, trials, rng)?;
    model.with_lipschitz((ratio * AUDIT_MARGIN).max(1.0))
}
