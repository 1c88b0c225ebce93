//! Desk-scale feedforward-network simulator.
//!
//! Small dense ReLU networks with manual backpropagation and plain SGD,
//! trained under one of five recipes: standard (every parameter updated each
//! step), untrained, freeze (layers frozen in depth order at regular
//! intervals), random-above-n (layers 1..=n keep their initialization), and
//! transfer-freeze (initialize from a source network, then freeze-train).
//! Everything is a pure function of the declared seeds.

mod experiment;
mod task;
mod train;

pub use experiment::{
    run_experiment, run_recipe, run_suite, write_run, DeskConfig, NetworkRun, RecipeKind, Suite,
    SuiteResult,
};
pub use task::Task;
pub use train::{
    evaluate_accuracy, forward_collect, gradients, init_params, mean_cross_entropy, train,
    training_set, Gradients,
};

use ndarray::{Array1, Array2};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Build a deterministic RNG from up to four 64-bit seed components.
pub(crate) fn rng_from(parts: &[u64]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (i, p) in parts.iter().take(4).enumerate() {
        key[i * 8..(i + 1) * 8].copy_from_slice(&p.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

// Stream tags keep the RNG streams for different purposes independent.
pub(crate) const TAG_INIT: u64 = 1;
pub(crate) const TAG_TRAIN_DATA: u64 = 2;
pub(crate) const TAG_SHUFFLE: u64 = 3;
pub(crate) const TAG_MEANS: u64 = 4;
pub(crate) const TAG_SAMPLE: u64 = 5;

/// Hidden-layer nonlinearity. Only ReLU is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Nonlinearity {
    #[default]
    Relu,
}

/// Architecture: layer widths from input to output. `n_layers` counts weight
/// layers, so `layer_widths.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetSpec {
    layer_widths: Vec<usize>,
    nonlinearity: Nonlinearity,
}

impl NetSpec {
    pub fn new(layer_widths: Vec<usize>) -> Result<Self> {
        if layer_widths.len() < 4 {
            return Err(Error::Config(format!(
                "need at least 3 weight layers (4 widths), got {} widths",
                layer_widths.len()
            )));
        }
        if layer_widths.iter().any(|&w| w < 1) {
            return Err(Error::Config("layer widths must be >= 1".into()));
        }
        Ok(Self {
            layer_widths,
            nonlinearity: Nonlinearity::Relu,
        })
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn n_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }
}

/// Weights and biases for every layer, plus the seed used at initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub(crate) weights: Vec<Array2<f64>>, // [in, out] per layer
    pub(crate) biases: Vec<Array1<f64>>,
    pub(crate) seed: u64,
}

impl Params {
    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight(&self, layer: usize) -> &Array2<f64> {
        &self.weights[layer]
    }

    pub fn bias(&self, layer: usize) -> &Array1<f64> {
        &self.biases[layer]
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    /// Copy with one weight entry nudged; used for finite-difference probes.
    pub fn with_weight_delta(&self, layer: usize, row: usize, col: usize, delta: f64) -> Params {
        let mut p = self.clone();
        p.weights[layer][[row, col]] += delta;
        p
    }

    /// Copy with one bias entry nudged.
    pub fn with_bias_delta(&self, layer: usize, idx: usize, delta: f64) -> Params {
        let mut p = self.clone();
        p.biases[layer][idx] += delta;
        p
    }

    pub fn matches_spec(&self, spec: &NetSpec) -> bool {
        self.weights.len() == spec.n_layers()
            && self
                .weights
                .iter()
                .enumerate()
                .all(|(l, w)| {
                    w.nrows() == spec.layer_widths()[l] && w.ncols() == spec.layer_widths()[l + 1]
                })
    }
}

/// Training regime.
#[derive(Debug, Clone)]
pub enum Recipe {
    /// Every parameter updated on every mini-batch.
    Standard,
    /// Randomly initialized and never trained.
    Untrained,
    /// Layers frozen in depth order. With `epochs_per_freeze = None`, layer i
    /// (1-based) freezes at the start of epoch floor(i * epochs / L); the
    /// final layer never freezes. With `Some(k)`, layer i freezes at epoch
    /// i * k instead.
    Freeze { epochs_per_freeze: Option<usize> },
    /// Layers 1..=n never receive updates and keep their initialization.
    RandomAbove { n: usize },
    /// Initialize from `source`, then apply the freeze schedule.
    TransferFreeze { source: Params },
}

impl Recipe {
    pub fn label(&self) -> &'static str {
        match self {
            Recipe::Standard => "standard",
            Recipe::Untrained => "untrained",
            Recipe::Freeze { .. } => "freeze",
            Recipe::RandomAbove { .. } => "random_above",
            Recipe::TransferFreeze { .. } => "transfer_freeze",
        }
    }

    pub fn n_random_layers(&self) -> usize {
        match self {
            Recipe::RandomAbove { n } => *n,
            _ => 0,
        }
    }

    pub(crate) fn validate(&self, spec: &NetSpec) -> Result<()> {
        match self {
            Recipe::RandomAbove { n } => {
                let l = spec.n_layers();
                if *n < 1 || *n > l - 1 {
                    return Err(Error::Config(format!(
                        "random_above n must be in [1, {}], got {n}",
                        l - 1
                    )));
                }
            }
            Recipe::TransferFreeze { source } => {
                if !source.matches_spec(spec) {
                    return Err(Error::Config(
                        "transfer_freeze source parameters do not match the network spec".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// SGD hyperparameters. `seed` drives initialization, the training sample,
/// and per-epoch batch shuffling.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub n_train: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(
        epochs: usize,
        batch_size: usize,
        learning_rate: f64,
        n_train: usize,
        seed: u64,
    ) -> Result<Self> {
        if batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be > 0".into()));
        }
        if n_train < 1 {
            return Err(Error::Config("n_train must be >= 1".into()));
        }
        Ok(Self {
            epochs,
            batch_size,
            learning_rate,
            n_train,
            seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
