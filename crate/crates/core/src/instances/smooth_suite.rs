use crate::error::{invalid, Result};
use crate::smooth::{SmoothChoiceModel, SmoothHardParams, SmoothInstance};

use super::ArrivalSpec;

#[derive(Clone, Debug)]
pub struct SmoothHardMember {
    pub params: SmoothHardParams,
    pub model: SmoothChoiceModel,
    /// A single type arrives every round.
    pub arrival: ArrivalSpec,
}

impl SmoothHardMember {
    /// Principal rewards `(1, ..., 1, 0)` with this member as the only type.
    pub fn instance(&self) -> Result<SmoothInstance> {
        SmoothInstance::new(hard_rewards(self.params.num_arms), vec![self.model.clone()])
    }
}

#[derive(Clone, Debug)]
pub struct SmoothHardSuite {
    pub eps: f64,
    pub members: Vec<SmoothHardMember>,
}

pub fn hard_rewards(n: usize) -> Vec<f64> {
    let mut v = vec![1.0; n];
    if let Some(last) = v.last_mut() {
        *last = 0.0;
    }
    v
}

/// `eps = (L-1)^{-2/3} N^{1/3} T^{-1/3}`.
pub fn suite_resolution(n: usize, lipschitz: f64, horizon: u64) -> Result<f64> {
    if n < 2 || !(lipschitz >= 3.0) || horizon == 0 {
        return invalid("the hard suite needs N >= 2, L >= 3 and T >= 1");
    }
    Ok((lipschitz - 1.0).powf(-2.0 / 3.0) * (n as f64).cbrt() / (horizon as f64).cbrt())
}

/// One member per type `(i, j)`: `i` ranges over the first `N - 1` arms and
/// `j` over the intervals `[j eps, (j+1) eps]` inside `[0, 1/2]`.
pub fn smooth_hard_suite(n: usize, lipschitz: f64, horizon: u64) -> Result<SmoothHardSuite> {
    let eps = suite_resolution(n, lipschitz, horizon)?;
    let intervals = (0.5 / eps + 1e-9).floor() as usize;
    if intervals == 0 {
        return invalid(format!("resolution {eps} leaves no interval inside [0, 1/2]"));
    }
    let mut members = Vec::with_capacity((n - 1) * intervals);
    for arm in 0..n - 1 {
        for interval in 0..intervals {
            let params = SmoothHardParams::new(arm, interval, eps, lipschitz, n)?;
            members.push(SmoothHardMember {
                params,
                model: SmoothChoiceModel::hard_instance(params)?,
                arrival: ArrivalSpec::Constant { agent: 0 },
            });
        }
    }
    Ok(SmoothHardSuite { eps, members })
}
