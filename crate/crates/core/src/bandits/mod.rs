//! Learning layer: utility embeddings of menus, covering, EXP3 for linear
//! bandits and Tsallis-INF.

mod design;
mod embedding;
mod exp3;
mod tsallis;

pub use design::{g_optimal_design, max_leverage};
pub use embedding::{cover_embeddings, embed_menu, ArmEmbedding};
pub use exp3::{Exp3Config, Exp3LinearState, Exploration};
pub use tsallis::TsallisInfState;

use rand::{Rng, RngCore};

/// Inverse-CDF draw from a probability vector.
pub fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the last cumulative sum
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}
