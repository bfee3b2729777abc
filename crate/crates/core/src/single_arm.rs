//! Single-arm incentive menus for greedy agents.
//!
//! The raw menu holds, for every arm and agent, the smallest payment that
//! moves the agent onto that arm. Perturbing every level upwards by a small
//! `eps_T` removes any dependence on how agents break ties, and grouping by
//! response signature shrinks the menu to at most `2^K + 1` items without
//! losing per-agent dominance.

use std::collections::HashMap;

use crate::domain::{GreedyInstance, IncentiveMode, IncentiveVector};
use crate::error::{invalid, Result};
use crate::menu::{Menu, MenuItem, Provenance, DEDUP_TOL};

/// Which agents take the incentivized arm: bit `j` is set iff agent `j`
/// best-responds with the arm carrying the payment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResponseSignature {
    bits: Vec<bool>,
}

impl ResponseSignature {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

fn zero_item(n: usize) -> MenuItem {
    MenuItem {
        incentive: IncentiveVector::zero(n, IncentiveMode::Single),
        provenance: Provenance::Zero,
    }
}

pub fn build_raw_menu(instance: &GreedyInstance) -> Menu {
    let n = instance.num_arms();
    let mut menu = Menu::new();
    menu.push_dedup(zero_item(n));
    for i in 0..n {
        for (j, mu) in instance.preferences().iter().enumerate() {
            let top = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let value = top - mu[i];
            let incentive = if value == 0.0 {
                IncentiveVector::zero(n, IncentiveMode::Single)
            } else {
                IncentiveVector::single(n, i, value).expect("gap of two [0,1] values lies in [0,1]")
            };
            menu.push_dedup(MenuItem {
                incentive,
                provenance: Provenance::Threshold {
                    arm: i,
                    agent: Some(j),
                    perturbed: false,
                },
            });
        }
    }
    menu
}

/// Per arm: payment levels with the agent whose threshold set them.
type ArmLevels = Vec<Vec<(f64, Option<usize>)>>;

/// Distinct payment levels per arm, zero included, sorted ascending.
fn levels_per_arm(n: usize, menu: &Menu) -> Result<ArmLevels> {
    let mut levels: ArmLevels = vec![vec![(0.0, None)]; n];
    for item in menu.items() {
        let inc = &item.incentive;
        if inc.mode() != IncentiveMode::Single || inc.len() != n {
            return invalid("single-arm menu expected");
        }
        if let Some(arm) = inc.top_arm() {
            let x = inc.values()[arm];
            let agent = match item.provenance {
                Provenance::Threshold { agent, .. } => agent,
                _ => None,
            };
            if levels[arm].iter().all(|(y, _)| (x - y).abs() > DEDUP_TOL) {
                levels[arm].push((x, agent));
            }
        }
    }
    for l in &mut levels {
        l.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(levels)
}

/// Smallest gap between two distinct payment levels on the same arm, or 1
/// when no arm has two distinct levels.
pub fn menu_gap(n: usize, menu: &Menu) -> Result<f64> {
    let levels = levels_per_arm(n, menu)?;
    let gap = levels
        .iter()
        .flat_map(|l| l.windows(2).map(|w| w[1].0 - w[0].0))
        .fold(f64::INFINITY, f64::min);
    Ok(if gap.is_finite() { gap } else { 1.0 })
}

/// `eps_T = min(gap / 2, 1 / (2T))`.
pub fn perturbation_size(n: usize, menu: &Menu, horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return invalid("horizon must be at least 1");
    }
    let gap = menu_gap(n, menu)?;
    Ok((gap / 2.0).min(1.0 / (2.0 * horizon as f64)))
}

/// Adds `level + eps_T` on every arm for every payment level (the zero level
/// included). Shifted items above 1 are dropped.
pub fn perturb_menu(instance: &GreedyInstance, menu: &Menu, horizon: u64) -> Result<Menu> {
    let n = instance.num_arms();
    let eps = perturbation_size(n, menu, horizon)?;
    let levels = levels_per_arm(n, menu)?;
    let mut out = menu.clone();
    for (arm, arm_levels) in levels.iter().enumerate() {
        for &(x, agent) in arm_levels {
            let shifted = x + eps;
            if shifted > 1.0 {
                continue;
            }
            out.push_dedup(MenuItem {
                incentive: IncentiveVector::single(n, arm, shifted)?,
                provenance: Provenance::Threshold {
                    arm,
                    agent,
                    perturbed: true,
                },
            });
        }
    }
    Ok(out)
}

pub fn response_signature(instance: &GreedyInstance, pi: &IncentiveVector) -> Result<ResponseSignature> {
    if pi.mode() != IncentiveMode::Single {
        return invalid("response signature is defined for single-arm incentives");
    }
    let Some(arm) = pi.top_arm() else {
        return invalid("response signature is undefined at the zero incentive");
    };
    let bits = (0..instance.num_agents())
        .map(|j| instance.greedy_best_response(j, pi).map(|a| a.index() == arm))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResponseSignature { bits })
}

/// Keeps the zero vector plus, for each response signature, the item with
/// the largest net value `v_a - pi_a` (ties: lowest arm, then lowest
/// payment). Group order follows first appearance in `menu`.
pub fn reduce_menu(instance: &GreedyInstance, menu: &Menu) -> Result<Menu> {
    let n = instance.num_arms();
    let v = instance.rewards();
    let mut order: Vec<ResponseSignature> = Vec::new();
    let mut best: HashMap<ResponseSignature, (usize, f64, f64, &MenuItem)> = HashMap::new();
    let mut zero: Option<MenuItem> = None;
    for item in menu.items() {
        let inc = &item.incentive;
        if inc.mode() != IncentiveMode::Single || inc.len() != n {
            return invalid("reduce_menu expects a single-arm menu for this instance");
        }
        let Some(arm) = inc.top_arm() else {
            zero.get_or_insert_with(|| item.clone());
            continue;
        };
        let sig = response_signature(instance, inc)?;
        let pay = inc.values()[arm];
        let net = v[arm] - pay;
        match best.get_mut(&sig) {
            None => {
                order.push(sig.clone());
                best.insert(sig, (arm, pay, net, item));
            }
            Some(slot) => {
                let better = net > slot.2 || (net == slot.2 && (arm, pay) < (slot.0, slot.1));
                if better {
                    *slot = (arm, pay, net, item);
                }
            }
        }
    }
    let mut items = vec![zero.unwrap_or_else(|| zero_item(n))];
    items.extend(order.iter().map(|s| best[s].3.clone()));
    Ok(Menu::from_distinct(items))
}

/// Raw menu, perturbed for horizon `T`, then signature-reduced.
pub fn build_single_arm_menu(instance: &GreedyInstance, horizon: u64) -> Result<Menu> {
    let raw = build_raw_menu(instance);
    let perturbed = perturb_menu(instance, &raw, horizon)?;
    reduce_menu(instance, &perturbed)
}
