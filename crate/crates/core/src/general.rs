//! General-incentive menus for greedy agents.
//!
//! `[0,1]^N` splits into regions `P_sigma` on which every agent `j` plays
//! arm `sigma_j`. Each non-empty region is an open polytope; the menu takes
//! every vertex of its closure and nudges it `eps` into the open region.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::domain::{GreedyInstance, IncentiveMode, IncentiveVector};
use crate::error::{invalid, Error, Result};
use crate::lp;
use crate::menu::{Menu, MenuItem, Provenance};

/// A region is open-feasible when its best max-slack exceeds this.
pub const STRICT_SLACK: f64 = 1e-9;
/// Minimum slack of a point returned by [`interior_shift`].
pub const INTERIOR_SLACK: f64 = 1e-10;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const VERTEX_DEDUP_TOL: f64 = 1e-7;
pub const MAX_CONDITION: f64 = 1e10;
pub const DEFAULT_PROFILE_CAP: u128 = 1_000_000;
pub const DEFAULT_VERTEX_ARM_CAP: usize = 6;

/// `sigma_j` = arm played by agent `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseProfile(pub Vec<usize>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    LowerBox,
    UpperBox,
    Preference,
}

/// `normal . pi <= offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub kind: ConstraintKind,
}

impl Halfspace {
    /// `offset - normal . x`; nonnegative inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Closure of `P_sigma`: the box plus `mu_j[sigma_j] + pi[sigma_j] >=
/// mu_j[i] + pi[i]` for every agent and every other arm.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponsePolytope {
    profile: ResponseProfile,
    halfspaces: Vec<Halfspace>,
    dim: usize,
}

impl ResponsePolytope {
    pub fn new(instance: &GreedyInstance, profile: ResponseProfile) -> Result<Self> {
        let n = instance.num_arms();
        if profile.0.len() != instance.num_agents() || profile.0.iter().any(|&s| s >= n) {
            return invalid("profile does not match the instance");
        }
        let mut halfspaces = Vec::with_capacity(2 * n + instance.num_agents() * (n - 1));
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = -1.0;
            halfspaces.push(Halfspace {
                normal: e.clone(),
                offset: 0.0,
                kind: ConstraintKind::LowerBox,
            });
            e[i] = 1.0;
            halfspaces.push(Halfspace {
                normal: e,
                offset: 1.0,
                kind: ConstraintKind::UpperBox,
            });
        }
        for (j, mu) in instance.preferences().iter().enumerate() {
            let s = profile.0[j];
            for i in (0..n).filter(|&i| i != s) {
                let mut normal = vec![0.0; n];
                normal[i] = 1.0;
                normal[s] = -1.0;
                halfspaces.push(Halfspace {
                    normal,
                    offset: mu[s] - mu[i],
                    kind: ConstraintKind::Preference,
                });
            }
        }
        Ok(Self {
            profile,
            halfspaces,
            dim: n,
        })
    }

    pub fn profile(&self) -> &ResponseProfile {
        &self.profile
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains_closed(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) >= -tol)
    }

    /// Smallest slack over the preference constraints (`+inf` if none).
    pub fn preference_slack(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .filter(|h| h.kind == ConstraintKind::Preference)
            .map(|h| h.slack(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Point of the closed box maximizing the smallest preference slack,
    /// together with that slack (capped at 1).
    pub fn max_slack_point(&self) -> Result<(Vec<f64>, f64)> {
        // variables: pi_0..pi_{n-1}, s' = s + 2 >= 0
        let n = self.dim;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for h in &self.halfspaces {
            match h.kind {
                ConstraintKind::LowerBox => {}
                ConstraintKind::UpperBox => {
                    let mut row = h.normal.clone();
                    row.push(0.0);
                    a.push(row);
                    b.push(h.offset);
                }
                ConstraintKind::Preference => {
                    let mut row = h.normal.clone();
                    row.push(1.0);
                    a.push(row);
                    b.push(h.offset + 2.0);
                }
            }
        }
        let mut cap = vec![0.0; n + 1];
        cap[n] = 1.0;
        a.push(cap);
        b.push(3.0);
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let sol = lp::maximize(&a, &b, &c)?;
        let x: Vec<f64> = sol.x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let slack = self.preference_slack(&x).min(1.0);
        Ok((x, slack))
    }

    pub fn is_open_feasible(&self) -> Result<bool> {
        Ok(self.max_slack_point()?.1 > STRICT_SLACK)
    }
}

fn profile_count(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, _| acc.saturating_mul(n as u128))
}

fn profile_from_index(mut idx: u128, n: usize, k: usize) -> ResponseProfile {
    let mut sigma = vec![0; k];
    for slot in sigma.iter_mut().rev() {
        *slot = (idx % n as u128) as usize;
        idx /= n as u128;
    }
    ResponseProfile(sigma)
}

/// Every profile whose open region is non-empty, sorted lexicographically.
pub fn enumerate_profiles(instance: &GreedyInstance, cap: u128) -> Result<Vec<ResponseProfile>> {
    let n = instance.num_arms();
    let k = instance.num_agents();
    let total = profile_count(n, k);
    if total > cap {
        return Err(Error::CapExceeded {
            what: "response profiles N^K",
            needed: total,
            cap,
        });
    }
    let found: Vec<Option<ResponseProfile>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let sigma = profile_from_index(idx, n, k);
            let poly = ResponsePolytope::new(instance, sigma.clone())?;
            Ok(poly.is_open_feasible()?.then_some(sigma))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

fn combinations(m: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > m {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let mut i = r;
        while i > 0 && idx[i - 1] == m - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Extreme points of the closed polytope by brute force over `N`-subsets of
/// active constraints.
pub fn polytope_vertices(polytope: &ResponsePolytope, arm_cap: usize) -> Result<Vec<Vec<f64>>> {
    let n = polytope.dim;
    if n > arm_cap {
        return Err(Error::CapExceeded {
            what: "vertex enumeration arms",
            needed: n as u128,
            cap: arm_cap as u128,
        });
    }
    let hs = &polytope.halfspaces;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut skipped = 0usize;
    combinations(hs.len(), n, |subset| {
        let a = DMatrix::from_fn(n, n, |r, c| hs[subset[r]].normal[c]);
        let b = DVector::from_fn(n, |r, _| hs[subset[r]].offset);
        let Some(inv) = a.clone().try_inverse() else {
            skipped += 1;
            return;
        };
        let cond = norm1(&a) * norm1(&inv);
        if !cond.is_finite() || cond > MAX_CONDITION {
            skipped += 1;
            return;
        }
        let x: Vec<f64> = (inv * b).iter().copied().collect();
        if !polytope.contains_closed(&x, FEASIBILITY_TOL) {
            return;
        }
        let dup = out
            .iter()
            .any(|y| y.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) <= VERTEX_DEDUP_TOL);
        if !dup {
            out.push(x);
        }
    });
    if skipped > 0 {
        log::debug!(
            "profile {:?}: skipped {skipped} singular or ill-conditioned constraint subsets",
            polytope.profile.0
        );
    }
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// A point of the open region within `eps` (sup norm) of `vertex`, found on
/// the segment from the vertex to the max-slack point.
pub fn interior_shift(polytope: &ResponsePolytope, vertex: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return invalid("interior_shift needs eps > 0");
    }
    if vertex.len() != polytope.dim {
        return invalid("vertex dimension does not match the polytope");
    }
    let (center, best) = polytope.max_slack_point()?;
    if best <= STRICT_SLACK {
        return Err(Error::Infeasible(format!(
            "open region of profile {:?} is empty",
            polytope.profile.0
        )));
    }
    if polytope.preference_slack(vertex) >= INTERIOR_SLACK && polytope.contains_closed(vertex, 0.0) {
        return Ok(vertex.to_vec());
    }
    let dist = vertex
        .iter()
        .zip(&center)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let t = if dist > 0.0 { (eps / dist).min(1.0) } else { 1.0 };
    let q: Vec<f64> = vertex
        .iter()
        .zip(&center)
        .map(|(v, c)| (v + t * (c - v)).clamp(0.0, 1.0))
        .collect();
    if polytope.preference_slack(&q) < INTERIOR_SLACK {
        return Err(Error::Numerical(format!(
            "eps = {eps} too small to reach the interior of profile {:?}",
            polytope.profile.0
        )));
    }
    Ok(q)
}

/// Union over open-feasible profiles of the interior-shifted vertices, with
/// `eps = 1/T`.
pub fn build_general_menu(instance: &GreedyInstance, horizon: u64, profile_cap: u128, arm_cap: usize) -> Result<Menu> {
    if horizon == 0 {
        return invalid("horizon must be at least 1");
    }
    let eps = 1.0 / horizon as f64;
    let profiles = enumerate_profiles(instance, profile_cap)?;
    let per_profile: Vec<Vec<MenuItem>> = profiles
        .into_par_iter()
        .map(|sigma| {
            let poly = ResponsePolytope::new(instance, sigma.clone())?;
            polytope_vertices(&poly, arm_cap)?
                .iter()
                .map(|v| {
                    let q = interior_shift(&poly, v, eps)?;
                    Ok(MenuItem {
                        incentive: IncentiveVector::new(q, IncentiveMode::General)?,
                        provenance: Provenance::Vertex {
                            profile: sigma.0.clone(),
                        },
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut menu = Menu::new();
    for item in per_profile.into_iter().flatten() {
        menu.push_dedup(item);
    }
    Ok(menu)
}

/// `C(2N + K(N-1), N)`, the trivial bound on vertices per region.
pub fn vertex_count_bound(n: usize, k: usize) -> u128 {
    let m = (2 * n + k * (n - 1)) as u128;
    let r = n as u128;
    (0..r).fold(1u128, |acc, i| acc * (m - i) / (i + 1))
}
