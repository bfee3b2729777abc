//! Invariant suites run by `incent verify`: menu dominance, reduction
//! exactness, covering, and Lipschitz audits.

use serde::Serialize;

use super::env::Environment;
use super::rng::{stream, Stream};
use crate::bandits::{cover_embeddings, embed_menu, ArmEmbedding};
use crate::document::InstanceDocument;
use crate::domain::{GreedyInstance, IncentiveMode, IncentiveVector};
use crate::error::Result;
use crate::general::{build_general_menu, DEFAULT_PROFILE_CAP, DEFAULT_VERTEX_ARM_CAP};
use crate::menu::Menu;
use crate::single_arm::{build_raw_menu, build_single_arm_menu, perturbation_size};
use crate::smooth::{audit_passes, lipschitz_audit};

/// Horizon used to build menus when verifying.
pub const VERIFY_HORIZON: u64 = 1000;
const DOMINANCE_STEP: f64 = 1e-2;
const AUDIT_TRIALS: usize = 2000;

/// Instance documents shipped with the crate.
pub const GOLDEN: &[(&str, &str)] = &[
    ("example32", include_str!("../../golden/example32.json")),
    ("hard_b1", include_str!("../../golden/hard_b1.json")),
    ("hard_b2", include_str!("../../golden/hard_b2.json")),
    ("random_general", include_str!("../../golden/random_general.json")),
    ("smooth_hard", include_str!("../../golden/smooth_hard.json")),
    ("gaussian", include_str!("../../golden/gaussian.json")),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub instance: String,
    pub passed: bool,
    pub detail: String,
}

/// Largest per-agent shortfall `max_pi min_menu max_j (U(pi, j) - U(m, j))`
/// over single-arm incentives on a grid of step `step`. The menu dominates
/// the grid to within the returned amount.
pub fn dominance_shortfall(instance: &GreedyInstance, menu: &Menu, step: f64) -> Result<f64> {
    let n = instance.num_arms();
    let k = instance.num_agents();
    let rows: Vec<Vec<f64>> = embed_menu(instance, menu)?.rows().to_vec();
    let steps = (1.0 / step).round() as usize;
    let mut worst: f64 = 0.0;
    for arm in 0..n {
        for s in 0..=steps {
            let pi = IncentiveVector::single(n, arm, (s as f64 * step).min(1.0))?;
            let u: Vec<f64> = (0..k).map(|j| instance.agent_utility(j, &pi)).collect::<Result<_>>()?;
            let best = rows
                .iter()
                .map(|r| r.iter().zip(&u).map(|(m, x)| x - m).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
    }
    Ok(worst)
}

/// Number of (item, agent) pairs where the embedding differs from `U`.
pub fn reduction_mismatches(instance: &GreedyInstance, menu: &Menu) -> Result<usize> {
    let emb = embed_menu(instance, menu)?;
    let mut bad = 0;
    for (m, pi) in menu.incentives().enumerate() {
        for j in 0..instance.num_agents() {
            if emb.row(m)[j] != instance.agent_utility(j, pi)? {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// Exhaustive check that every input row has a kept row within `tol` in the
/// sup norm and that the cover is no larger than its input.
pub fn covering_holds(input: &ArmEmbedding, cover: &ArmEmbedding, tol: f64) -> bool {
    cover.len() <= input.len()
        && input.rows().iter().all(|r| {
            cover
                .rows()
                .iter()
                .any(|c| c.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= tol)
        })
}

fn outcome(suite: &'static str, instance: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        suite,
        instance: instance.to_string(),
        passed,
        detail,
    }
}

/// Runs every suite that applies to the document.
pub fn verify_document(name: &str, doc: &InstanceDocument, horizon: u64) -> Result<Vec<CheckOutcome>> {
    doc.validate()?;
    let mut out = Vec::new();
    match doc.environment()? {
        Environment::Greedy(g) => {
            let menu = match doc.mode {
                IncentiveMode::Single => build_single_arm_menu(&g, horizon)?,
                IncentiveMode::General => build_general_menu(&g, horizon, DEFAULT_PROFILE_CAP, DEFAULT_VERTEX_ARM_CAP)?,
            };
            if doc.mode == IncentiveMode::Single {
                let eps = perturbation_size(g.num_arms(), &build_raw_menu(&g), horizon)?;
                let tol = 2.0 * eps + 1e-9;
                let short = dominance_shortfall(&g, &menu, DOMINANCE_STEP)?;
                out.push(outcome(
                    "dominance",
                    name,
                    short <= tol,
                    format!("worst shortfall {short:.3e} vs tolerance {tol:.3e}"),
                ));
            }
            let mut menus = vec![("constructed", menu)];
            if let Some(stored) = doc.menu()? {
                menus.push(("stored", stored));
            }
            for (which, m) in &menus {
                let bad = reduction_mismatches(&g, m)?;
                out.push(outcome(
                    "reduction",
                    name,
                    bad == 0,
                    format!("{which} menu of {}: {bad} mismatched entries", m.len()),
                ));
                let emb = embed_menu(&g, m)?;
                let tol = 1.0 / horizon as f64;
                let cover = cover_embeddings(&emb, tol)?;
                out.push(outcome(
                    "covering",
                    name,
                    covering_holds(&emb, &cover, tol),
                    format!("{which} menu: {} rows covered by {}", emb.len(), cover.len()),
                ));
            }
        }
        Environment::Smooth(s) => {
            let mut rng = stream(0, Stream::Audit);
            for (j, model) in s.types().iter().enumerate() {
                let ratio = lipschitz_audit(model, AUDIT_TRIALS, &mut rng)?;
                out.push(outcome(
                    "lipschitz",
                    name,
                    audit_passes(model, ratio),
                    format!("type {j}: observed ratio {ratio:.4} vs declared {}", model.lipschitz()),
                ));
            }
        }
    }
    Ok(out)
}

pub fn verify_golden(horizon: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (name, text) in GOLDEN {
        let doc = InstanceDocument::from_json(text)?;
        out.extend(verify_document(name, &doc, horizon)?);
    }
    Ok(out)
}
