use crate::domain::GreedyInstance;
use crate::error::{invalid, Result};
use crate::menu::Menu;

/// Row `m` holds `U(pi_m, j)` for every agent `j`, so the utility of menu
/// item `m` against an arrival of agent `j` is `<row_m, e_j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmEmbedding {
    rows: Vec<Vec<f64>>,
    source: Vec<usize>,
    dim: usize,
}

impl ArmEmbedding {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(dim) = rows.first().map(Vec::len) else {
            return invalid("embedding needs at least one row");
        };
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return invalid("embedding rows must share a positive dimension");
        }
        let source = (0..rows.len()).collect();
        Ok(Self { rows, source, dim })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.rows[m]
    }

    /// Menu index each row was computed from.
    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub fn embed_menu(instance: &GreedyInstance, menu: &Menu) -> Result<ArmEmbedding> {
    if menu.is_empty() {
        return invalid("cannot embed an empty menu");
    }
    let k = instance.num_agents();
    let mut rows = Vec::with_capacity(menu.len());
    for pi in menu.incentives() {
        if pi.len() != instance.num_arms() {
            return invalid("menu item does not match the instance");
        }
        rows.push((0..k).map(|j| instance.agent_utility_raw(j, pi.values())).collect());
    }
    ArmEmbedding::from_rows(rows)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Greedy `tol`-cover in the sup norm: rows are scanned in order and kept
/// when farther than `tol` from every row kept so far.
pub fn cover_embeddings(embedding: &ArmEmbedding, tol: f64) -> Result<ArmEmbedding> {
    if !(tol > 0.0) {
        return invalid("cover tolerance must be positive");
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut source = Vec::new();
    for (row, &src) in embedding.rows.iter().zip(&embedding.source) {
        if rows.iter().all(|kept| linf(kept, row) > tol) {
            rows.push(row.clone());
            source.push(src);
        }
    }
    Ok(ArmEmbedding {
        rows,
        source,
        dim: embedding.dim,
    })
}
