//! The comparator inside the regret: the best fixed candidate against the
//! realized arrival counts (or an arrival distribution).

use serde::{Deserialize, Serialize};

use super::env::Environment;
use crate::error::{invalid, Result};
use crate::menu::Menu;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hindsight {
    pub index: usize,
    pub value: f64,
}

/// How agents are weighted when scoring candidates.
#[derive(Clone, Copy, Debug)]
pub enum ArrivalWeights<'a> {
    Realized(&'a [usize]),
    Distribution(&'a [f64]),
}

/// Candidate utilities against each agent type, scored by type counts.
#[derive(Clone, Debug)]
pub struct Benchmark {
    table: Vec<Vec<f64>>,
    num_agents: usize,
}

impl Benchmark {
    pub fn new(env: &Environment, candidates: &Menu) -> Result<Self> {
        if candidates.is_empty() {
            return invalid("hindsight benchmark needs at least one candidate");
        }
        Ok(Self {
            table: env.utility_table(candidates)?,
            num_agents: env.num_agents(),
        })
    }

    pub fn from_table(table: Vec<Vec<f64>>) -> Result<Self> {
        let Some(k) = table.first().map(Vec::len) else {
            return invalid("hindsight benchmark needs at least one candidate");
        };
        if k == 0 || table.iter().any(|r| r.len() != k) {
            return invalid("utility table rows must share a positive length");
        }
        Ok(Self { table, num_agents: k })
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Best candidate for per-type weights; ties go to the lowest index.
    pub fn best(&self, weights: &[f64]) -> Hindsight {
        let mut best = Hindsight {
            index: 0,
            value: f64::NEG_INFINITY,
        };
        for (m, row) in self.table.iter().enumerate() {
            let value: f64 = row.iter().zip(weights).map(|(u, w)| u * w).sum();
            if value > best.value {
                best = Hindsight { index: m, value };
            }
        }
        best
    }

    /// Best candidate on every prefix `arrivals[..t]` for `t` in `points`.
    pub fn curve(&self, arrivals: &[usize], points: &[u64]) -> Result<Vec<Hindsight>> {
        let mut counts = vec![0.0; self.num_agents];
        let mut out = Vec::with_capacity(points.len());
        let mut done = 0usize;
        for &p in points {
            let p = p as usize;
            if p < done || p > arrivals.len() {
                return invalid("sample points must be increasing and within the horizon");
            }
            for &j in &arrivals[done..p] {
                if j >= self.num_agents {
                    return invalid(format!("arrival {j} out of range"));
                }
                counts[j] += 1.0;
            }
            done = p;
            out.push(self.best(&counts));
        }
        Ok(out)
    }
}

pub fn best_fixed_in_hindsight(env: &Environment, candidates: &Menu, weights: ArrivalWeights<'_>) -> Result<Hindsight> {
    let bench = Benchmark::new(env, candidates)?;
    let w = match weights {
        ArrivalWeights::Realized(seq) => {
            let mut c = vec![0.0; env.num_agents()];
            for &j in seq {
                if j >= c.len() {
                    return invalid(format!("arrival {j} out of range"));
                }
                c[j] += 1.0;
            }
            c
        }
        ArrivalWeights::Distribution(p) => {
            crate::domain::check_distribution(p, env.num_agents(), 1e-12)?;
            p.to_vec()
        }
    };
    Ok(bench.best(&w))
}
