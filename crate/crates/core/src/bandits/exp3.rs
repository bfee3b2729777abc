use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{g_optimal_design, sample_index, ArmEmbedding};
use crate::error::{invalid, Error, Result};

const PINV_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exploration {
    #[default]
    GOptimal,
    Uniform,
}

/// Hyperparameters; `None` means "use the horizon-tuned default".
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Exp3Config {
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub exploration: Exploration,
    pub clip: Option<f64>,
}

/// EXP3 for linear bandits over a finite embedded arm set.
///
/// Rewards are fed in directly: the least-squares estimate
/// `theta = Q^+ z_A r` is unbiased for the reward vector on the span of the
/// embedding, and exponential weights are taken over cumulative estimated
/// rewards.
#[derive(Clone, Debug)]
pub struct Exp3LinearState {
    rows: Vec<DVector<f64>>,
    cumulative: Vec<f64>,
    eta: f64,
    gamma: f64,
    clip: f64,
    exploration: Vec<f64>,
    probs: Vec<f64>,
}

impl Exp3LinearState {
    pub fn new(embedding: &ArmEmbedding, horizon: u64, config: &Exp3Config) -> Result<Self> {
        let m = embedding.len();
        if m == 0 {
            return invalid("EXP3-linear needs a nonempty embedding");
        }
        if horizon == 0 {
            return invalid("horizon must be at least 1");
        }
        let k = embedding.dim() as f64;
        let eta = config
            .eta
            .unwrap_or_else(|| (2.0 * (m as f64).ln() / (k * horizon as f64)).sqrt());
        let gamma = config.gamma.unwrap_or_else(|| (k * eta).min(0.5));
        if !(eta >= 0.0 && eta.is_finite()) {
            return invalid(format!("eta must be finite and nonnegative, got {eta}"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return invalid(format!("gamma must lie in [0,1], got {gamma}"));
        }
        let exploration = match config.exploration {
            Exploration::GOptimal => g_optimal_design(embedding),
            Exploration::Uniform => vec![1.0 / m as f64; m],
        };
        let clip = match config.clip {
            Some(c) if c > 0.0 => c,
            Some(c) => return invalid(format!("clip must be positive, got {c}")),
            None if gamma > 0.0 => 1.0 / gamma,
            None => f64::INFINITY,
        };
        let mut state = Self {
            rows: embedding.rows().iter().map(|r| DVector::from_column_slice(r)).collect(),
            cumulative: vec![0.0; m],
            eta,
            gamma,
            clip,
            exploration,
            probs: Vec::new(),
        };
        state.refresh();
        Ok(state)
    }

    fn refresh(&mut self) {
        let top = self.cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.cumulative.iter().map(|s| (self.eta * (s - top)).exp()).collect();
        let total: f64 = w.iter().sum();
        self.probs = w
            .iter()
            .zip(&self.exploration)
            .map(|(wi, ei)| (1.0 - self.gamma) * wi / total + self.gamma * ei)
            .collect();
        let s: f64 = self.probs.iter().sum();
        for p in &mut self.probs {
            *p /= s;
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn exploration(&self) -> &[f64] {
        &self.exploration
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative_estimates(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn step(&self, rng: &mut dyn RngCore) -> usize {
        sample_index(&self.probs, rng)
    }

    /// `Q^+` for the current sampling distribution, eigenvalues below the
    /// cutoff treated as zero.
    pub fn design_pinv(&self) -> DMatrix<f64> {
        let d = self.rows[0].len();
        let mut q = DMatrix::<f64>::zeros(d, d);
        for (z, p) in self.rows.iter().zip(&self.probs) {
            q.ger(*p, z, z, 1.0);
        }
        let eig = SymmetricEigen::new(q);
        let mut pinv = DMatrix::<f64>::zeros(d, d);
        for (i, lambda) in eig.eigenvalues.iter().enumerate() {
            if *lambda > PINV_CUTOFF {
                let u = eig.eigenvectors.column(i);
                pinv.ger(1.0 / lambda, &u, &u, 1.0);
            }
        }
        pinv
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.rows.len() {
            return invalid(format!("arm {arm} out of range"));
        }
        if !(-1.0..=1.0).contains(&reward) {
            return Err(Error::InvalidArgument(format!("reward {reward} outside [-1,1]")));
        }
        if reward != 0.0 {
            let theta = self.design_pinv() * &self.rows[arm] * reward;
            for (s, z) in self.cumulative.iter_mut().zip(&self.rows) {
                *s += z.dot(&theta).clamp(-self.clip, self.clip);
            }
        }
        self.refresh();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(k: usize) -> ArmEmbedding {
        ArmEmbedding::from_rows(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn default_rates() {
        let st = Exp3LinearState::new(&basis(2), 100, &Exp3Config::default()).unwrap();
        assert!((st.eta() - (2.0 * 2f64.ln() / 200.0).sqrt()).abs() < 1e-15);
        assert!((st.gamma() - 2.0 * st.eta()).abs() < 1e-15);
        let p = st.probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rewards_keep_the_initial_distribution() {
        let emb = ArmEmbedding::from_rows(vec![vec![0.3, 0.5], vec![1.0, 0.0], vec![0.2, 0.2]]).unwrap();
        let mut st = Exp3LinearState::new(&emb, 50, &Exp3Config::default()).unwrap();
        let p0 = st.probabilities().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = st.step(&mut rng);
            st.update(a, 0.0).unwrap();
        }
        assert_eq!(st.probabilities(), p0.as_slice());
    }

    #[test]
    fn single_arm_is_always_played() {
        let emb = ArmEmbedding::from_rows(vec![vec![0.4, -0.2]]).unwrap();
        let mut st = Exp3LinearState::new(&emb, 10, &Exp3Config::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert_eq!(st.step(&mut rng), 0);
            st.update(0, 0.4).unwrap();
        }
        // the estimate reproduces the reward in the one-dimensional span
        let theta = st.design_pinv() * DVector::from_column_slice(&[0.4, -0.2]) * 0.4;
        assert!((DVector::from_column_slice(&[0.4, -0.2]).dot(&theta) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn estimator_is_unbiased_on_the_span() {
        // rows span the plane x3 = 0 inside R^3
        let emb = ArmEmbedding::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![-0.3, 0.8, 0.0],
            vec![0.2, 0.1, 0.0],
        ])
        .unwrap();
        let st = Exp3LinearState::new(&emb, 1000, &Exp3Config::default()).unwrap();
        let theta = DVector::from_column_slice(&[0.3, -0.7, 0.9]);
        let pinv = st.design_pinv();
        let mut mean = DVector::<f64>::zeros(3);
        for (p, r) in st.probabilities().iter().zip(emb.rows()) {
            let z = DVector::from_column_slice(r);
            mean += *p * (&pinv * &z * z.dot(&theta));
        }
        let projected = DVector::from_column_slice(&[0.3, -0.7, 0.0]);
        assert!((mean - projected).amax() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let mut st = Exp3LinearState::new(&basis(2), 10, &Exp3Config::default()).unwrap();
        assert!(st.update(0, 1.5).is_err());
        assert!(st.update(5, 0.5).is_err());
        assert!(Exp3LinearState::new(&basis(2), 0, &Exp3Config::default()).is_err());
    }
}
