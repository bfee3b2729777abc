//! Combinatorial instance with `K0 = K - 2` ordinary types grouped into `M`
//! blocks. Each arm below `N0` encodes one choice of a type per block; a
//! tiny payment on that arm attracts exactly the chosen types.

use crate::domain::{GreedyInstance, IncentiveVector};
use crate::error::{invalid, Result};
use crate::menu::{Menu, MenuItem, Provenance};

#[derive(Clone, Debug)]
pub struct HardB2 {
    pub instance: GreedyInstance,
    pub k0: usize,
    pub m: usize,
    /// Block size `K0 / M`.
    pub block: usize,
    /// `(K0/M)^M + 1`; arm `N0` (1-based) is every ordinary type's favourite.
    pub n0: usize,
    /// 0-based block offsets `d_i = (i - 1) K0 / M`.
    pub offsets: Vec<usize>,
    /// `X` in encoding order: `points[a]` is the point mapped to arm `a`.
    pub points: Vec<Vec<bool>>,
    /// `pi^z` pays `1/T` on arm `f(z)`, in the order of `points`.
    pub menu: Menu,
    pub eps: f64,
    pub horizon: u64,
}

/// Integer `m` with `base^m = value`, if any.
fn exact_log(value: usize, base: usize) -> Option<usize> {
    if base < 2 || value < 1 {
        return None;
    }
    let (mut acc, mut m) = (1usize, 0usize);
    while acc < value {
        acc = acc.checked_mul(base)?;
        m += 1;
    }
    (acc == value).then_some(m)
}

/// `eps` defaults to `sqrt(M K0 / T) / 5`.
pub fn hard_b2(k: usize, n: usize, horizon: u64, eps: Option<f64>) -> Result<HardB2> {
    if k < 6 {
        return invalid("the construction needs K >= 6");
    }
    if horizon < 2 {
        return invalid("horizon must be at least 2");
    }
    let k0 = k - 2;
    let Some(m) = exact_log(n.saturating_sub(1), k0).filter(|m| *m >= 1) else {
        return invalid(format!(
            "log(N-1)/log(K-2) must be a positive integer (N = {n}, K = {k})"
        ));
    };
    if !k0.is_multiple_of(m) {
        return invalid(format!("K0/M = {k0}/{m} must be an integer"));
    }
    let block = k0 / m;
    let n0 = block.pow(m as u32) + 1;
    let t = horizon as f64;
    let eps = eps.unwrap_or_else(|| ((m * k0) as f64 / t).sqrt() / 5.0);
    if !(eps > 0.0 && eps <= 0.25) {
        return invalid(format!("eps must lie in (0, 1/4], got {eps}"));
    }
    let offsets: Vec<usize> = (0..m).map(|i| i * block).collect();
    let points: Vec<Vec<bool>> = (0..n0 - 1)
        .map(|code| {
            let mut x = vec![false; k0];
            let mut rest = code;
            for i in (0..m).rev() {
                x[offsets[i] + rest % block] = true;
                rest /= block;
            }
            x
        })
        .collect();

    let mut v = vec![0.0; n];
    for x in v.iter_mut().take(n0 - 1) {
        *x = 0.5 + 1.0 / t;
    }
    let mut mu = vec![vec![0.0; n]; k];
    for (arm, x) in points.iter().enumerate() {
        for j in 0..k0 {
            if x[j] {
                mu[j][arm] = 1.0 - 1.0 / t;
            }
        }
    }
    for row in mu.iter_mut().take(k0) {
        row[n0 - 1] = 1.0;
    }
    mu[k - 2][n0 - 1] = 1.0 / t;
    mu[k - 1][n0 - 1] = 1.0;
    // arms below N0 carry the lowest indices, so lowest-index ties prefer them
    let instance = GreedyInstance::with_lowest_index_ties(v, mu)?;

    let items = (0..n0 - 1)
        .map(|arm| {
            Ok(MenuItem {
                incentive: IncentiveVector::single(n, arm, 1.0 / t)?,
                provenance: Provenance::Manual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HardB2 {
        instance,
        k0,
        m,
        block,
        n0,
        offsets,
        points,
        menu: Menu::from_distinct(items),
        eps,
        horizon,
    })
}

impl HardB2 {
    fn check_tilde(&self, x: &[bool]) -> Result<()> {
        if x.len() != self.k0 {
            return invalid("point has the wrong length");
        }
        for &d in &self.offsets {
            if x[d..d + self.block].iter().filter(|b| **b).count() > 1 {
                return invalid("at most one coordinate per block may be set");
            }
        }
        Ok(())
    }

    /// The bijection `f`, as a 0-based arm index.
    pub fn encode(&self, x: &[bool]) -> Result<usize> {
        self.check_tilde(x)?;
        let mut code = 0;
        for &d in &self.offsets {
            let Some(pos) = x[d..d + self.block].iter().position(|b| *b) else {
                return invalid("every block needs exactly one set coordinate");
            };
            code = code * self.block + pos;
        }
        Ok(code)
    }

    /// `p(x, .)` for `x` with at most one set coordinate per block.
    pub fn distribution(&self, x: &[bool]) -> Result<Vec<f64>> {
        self.check_tilde(x)?;
        let m = self.m as f64;
        let ones = x.iter().filter(|b| **b).count() as f64;
        let mut p: Vec<f64> = x
            .iter()
            .map(|b| 1.0 / (2.0 * self.k0 as f64) + if *b { self.eps / m } else { 0.0 })
            .collect();
        p.push(0.25);
        p.push(0.25 - self.eps * ones / m);
        Ok(p)
    }

    /// `r(x, z) = 1/8 + M/(4 K0) + eps/(2M) * |x AND z|`.
    pub fn analytic_reward(&self, x: &[bool], z: &[bool]) -> f64 {
        let overlap = x.iter().zip(z).filter(|(a, b)| **a && **b).count() as f64;
        let m = self.m as f64;
        0.125 + m / (4.0 * self.k0 as f64) + self.eps / (2.0 * m) * overlap
    }
}
