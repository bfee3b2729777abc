use rand::RngCore;

use super::sample_index;
use crate::error::{invalid, Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
const NEWTON_ITERS: usize = 100;
const BISECTION_ITERS: usize = 200;

/// Tsallis-INF (1/2-Tsallis entropy) with anytime rate `eta_t = 1/sqrt(t)`
/// and importance-weighted loss estimates.
#[derive(Clone, Debug)]
pub struct TsallisInfState {
    losses: Vec<f64>,
    round: u64,
    probs: Vec<f64>,
}

fn mass(losses: &[f64], eta: f64, x: f64) -> f64 {
    losses.iter().map(|l| 4.0 / (eta * (l - x)).powi(2)).sum()
}

/// Solves `sum_m 4 / (eta (L_m - x))^2 = 1` for `x < min L`.
fn normalizer(losses: &[f64], eta: f64) -> Result<f64> {
    let lo_l = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let m = losses.len() as f64;
    // f(x) = mass - 1 is increasing and convex left of min L; starting where
    // f >= 0, Newton steps move monotonically left onto the root.
    let mut x = lo_l - 2.0 / eta;
    for _ in 0..NEWTON_ITERS {
        let (f, df) = losses.iter().fold((-1.0, 0.0), |(f, df), l| {
            let gap = l - x;
            let w = 4.0 / (eta * gap).powi(2);
            (f + w, df + 2.0 * w / gap)
        });
        if f.abs() < RESIDUAL_TOL {
            return Ok(x);
        }
        let next = x - f / df;
        if !next.is_finite() || next >= lo_l {
            break;
        }
        x = next;
    }
    let (mut a, mut b) = (lo_l - 2.0 * m.sqrt() / eta, lo_l - 2.0 / eta);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (a + b);
        let f = mass(losses, eta, mid) - 1.0;
        if f.abs() < RESIDUAL_TOL {
            return Ok(mid);
        }
        if f > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Err(Error::Numerical("Tsallis-INF normalizer did not converge".into()))
}

impl TsallisInfState {
    pub fn new(num_arms: usize) -> Result<Self> {
        if num_arms == 0 {
            return invalid("Tsallis-INF needs at least one arm");
        }
        let mut state = Self {
            losses: vec![0.0; num_arms],
            round: 1,
            probs: Vec::new(),
        };
        state.refresh()?;
        Ok(state)
    }

    fn refresh(&mut self) -> Result<()> {
        let eta = 1.0 / (self.round as f64).sqrt();
        let x = normalizer(&self.losses, eta)?;
        let probs: Vec<f64> = self.losses.iter().map(|l| 4.0 / (eta * (l - x)).powi(2)).collect();
        let s: f64 = probs.iter().sum();
        self.probs = probs.into_iter().map(|p| p / s).collect();
        Ok(())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative_losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn step(&self, rng: &mut dyn RngCore) -> usize {
        sample_index(&self.probs, rng)
    }

    pub fn update(&mut self, arm: usize, loss: f64) -> Result<()> {
        if arm >= self.losses.len() {
            return invalid(format!("arm {arm} out of range"));
        }
        if !(0.0..=1.0).contains(&loss) {
            return invalid(format!("loss {loss} outside [0,1]"));
        }
        self.losses[arm] += loss / self.probs[arm];
        self.round += 1;
        self.refresh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_round_is_uniform() {
        let st = TsallisInfState::new(5).unwrap();
        assert!(st.probabilities().iter().all(|p| (p - 0.2).abs() < 1e-12));
        let one = TsallisInfState::new(1).unwrap();
        assert_eq!(one.probabilities(), &[1.0]);
    }

    #[test]
    fn rejects_bad_losses() {
        let mut st = TsallisInfState::new(2).unwrap();
        assert!(st.update(0, -0.1).is_err());
        assert!(st.update(0, 1.1).is_err());
        assert!(st.update(2, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn normalizer_residual(losses in proptest::collection::vec(0.0f64..500.0, 1..40), t in 1u64..100_000) {
            let eta = 1.0 / (t as f64).sqrt();
            let x = normalizer(&losses, eta).unwrap();
            prop_assert!((mass(&losses, eta, x) - 1.0).abs() < 1e-10);
            prop_assert!(losses.iter().all(|l| *l > x));
        }
    }
}
