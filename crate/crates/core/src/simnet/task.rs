//! Seeded synthetic classification tasks: Gaussian class clusters.
//!
//! Two related tasks stand in for two languages: they share input dimension
//! and class count, and a mixing coefficient controls how much their class
//! means overlap.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng_from, TAG_MEANS, TAG_SAMPLE};
use crate::error::{Error, Result};

/// Gaussian-cluster classification source: class c draws inputs from
/// N(mean_c, noise_std^2 I). Sampling is balanced to within one sample and
/// deterministic given the task and call seeds.
#[derive(Debug, Clone)]
pub struct Task {
    n_classes: usize,
    input_dim: usize,
    means: Array2<f64>,
    noise_std: f64,
    separation: f64,
    seed: u64,
}

impl Task {
    /// Fresh task with class means drawn N(0, separation^2) per coordinate.
    pub fn gaussian(n_classes: usize, input_dim: usize, seed: u64) -> Result<Self> {
        Self::with_params(n_classes, input_dim, seed, 2.0, 1.0)
    }

    pub fn with_params(
        n_classes: usize,
        input_dim: usize,
        seed: u64,
        separation: f64,
        noise_std: f64,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::Config("need at least 2 classes".into()));
        }
        if input_dim < 1 {
            return Err(Error::Config("input_dim must be >= 1".into()));
        }
        if !(separation > 0.0) || !(noise_std > 0.0) {
            return Err(Error::Config("separation and noise_std must be > 0".into()));
        }
        let mut rng = rng_from(&[seed, TAG_MEANS]);
        let means = Array2::from_shape_simple_fn((n_classes, input_dim), || {
            separation * rng.sample::<f64, _>(StandardNormal)
        });
        Ok(Self {
            n_classes,
            input_dim,
            means,
            noise_std,
            separation,
            seed,
        })
    }

    /// A related-but-distinct task: means are mix * self + (1 - mix) * fresh.
    /// mix = 1 reproduces this task's means; mix = 0 is unrelated.
    pub fn related(&self, seed: u64, mix: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mix) {
            return Err(Error::Config(format!("mix must be in [0, 1], got {mix}")));
        }
        let fresh = Self::with_params(
            self.n_classes,
            self.input_dim,
            seed,
            self.separation,
            self.noise_std,
        )?;
        let means = mix * &self.means + (1.0 - mix) * &fresh.means;
        Ok(Self {
            means,
            seed,
            ..fresh
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Draw `count` samples: labels cycle 0, 1, ..., k-1 (balanced to within
    /// one sample); inputs are the class mean plus isotropic Gaussian noise.
    pub fn sample(&self, count: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = rng_from(&[self.seed, seed, TAG_SAMPLE]);
        let labels: Vec<usize> = (0..count).map(|i| i % self.n_classes).collect();
        let mut inputs = Array2::<f64>::zeros((count, self.input_dim));
        for (i, &c) in labels.iter().enumerate() {
            for j in 0..self.input_dim {
                inputs[[i, j]] =
                    self.means[[c, j]] + self.noise_std * rng.sample::<f64, _>(StandardNormal);
            }
        }
        (inputs, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let t = Task::gaussian(3, 4, 7).unwrap();
        let (x1, y1) = t.sample(10, 99);
        let (x2, y2) = t.sample(10, 99);
        assert_eq!(x1, x2);
        assert_eq!(y1, y2);
        let counts = [
            y1.iter().filter(|&&c| c == 0).count(),
            y1.iter().filter(|&&c| c == 1).count(),
            y1.iter().filter(|&&c| c == 2).count(),
        ];
        assert_eq!(counts.iter().max().unwrap() - counts.iter().min().unwrap(), 1);
        let (x3, _) = t.sample(10, 100);
        assert_ne!(x1, x3);
    }

    #[test]
    fn related_mix_endpoints() {
        let a = Task::gaussian(3, 4, 7).unwrap();
        let same = a.related(8, 1.0).unwrap();
        assert_eq!(same.means, a.means);
        let fresh = Task::with_params(3, 4, 8, 2.0, 1.0).unwrap();
        let unrelated = a.related(8, 0.0).unwrap();
        assert_eq!(unrelated.means, fresh.means);
        assert!(a.related(8, 1.5).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Task::gaussian(1, 4, 0).is_err());
        assert!(Task::gaussian(3, 0, 0).is_err());
    }
}
