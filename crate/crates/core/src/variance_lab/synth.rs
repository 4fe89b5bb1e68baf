use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::LabeledPool;
use crate::rng;

/// A one-dimensional class distribution `N(mu, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianClassSpec {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianClassSpec {
    pub fn new(mu: f64, sigma: f64) -> Self {
        GaussianClassSpec { mu, sigma }
    }
}

/// A balanced synthetic dataset of 1-D Gaussian classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub class_specs: Vec<GaussianClassSpec>,
    /// Samples across all classes, split evenly.
    pub total_samples: usize,
    pub seed: u64,
}

impl SynthConfig {
    /// `N(−1, 1)` and `N(1, 1)` with `total_samples` samples overall.
    pub fn two_gaussians(total_samples: usize, seed: u64) -> Self {
        SynthConfig {
            class_specs: vec![GaussianClassSpec::new(-1.0, 1.0), GaussianClassSpec::new(1.0, 1.0)],
            total_samples,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SynthConfig { seed, ..self.clone() }
    }

    pub fn classes(&self) -> usize {
        self.class_specs.len()
    }

    pub fn per_class(&self) -> usize {
        self.total_samples / self.class_specs.len().max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_specs.len() < 2 {
            return Err(Error::Config("synthetic pools need at least two classes".into()));
        }
        if let Some(s) = self
            .class_specs
            .iter()
            .find(|s| !(s.sigma > 0.0 && s.sigma.is_finite() && s.mu.is_finite()))
        {
            return Err(Error::Config(format!(
                "class distribution N({}, {}) needs finite mu and sigma > 0",
                s.mu, s.sigma
            )));
        }
        if self.total_samples == 0 || !self.total_samples.is_multiple_of(self.class_specs.len()) {
            return Err(Error::Config(format!(
                "{} samples cannot be split evenly over {} classes",
                self.total_samples,
                self.class_specs.len()
            )));
        }
        Ok(())
    }
}

/// Draws a balanced one-dimensional pool. Class `c` uses sub-stream `c` of
/// the config seed.
pub fn gen_gaussian_pool(config: &SynthConfig) -> Result<LabeledPool> {
    config.validate()?;
    let n = config.per_class();
    let mut data = Vec::with_capacity(config.classes());
    for (c, spec) in config.class_specs.iter().enumerate() {
        let dist = Normal::new(spec.mu, spec.sigma).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = rng::substream(config.seed, c as u64);
        data.push((0..n).map(|_| dist.sample(&mut rng)).collect());
    }
    let labels = (0..config.classes()).map(|c| format!("g{c}")).collect();
    LabeledPool::from_class_data(labels, 1, data)
}
