//! Initialization, forward/backward passes, SGD training, and evaluation.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng_from, NetSpec, Params, Recipe, Task, TrainConfig, TAG_INIT, TAG_SHUFFLE, TAG_TRAIN_DATA};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// He-style initialization: weights ~ N(0, 2 / fan_in), biases 0.
pub fn init_params(spec: &NetSpec, seed: u64) -> Params {
    let mut rng = rng_from(&[seed, TAG_INIT]);
    let widths = spec.layer_widths();
    let mut weights = Vec::with_capacity(spec.n_layers());
    let mut biases = Vec::with_capacity(spec.n_layers());
    for l in 0..spec.n_layers() {
        let (fan_in, fan_out) = (widths[l], widths[l + 1]);
        let std = (2.0 / fan_in as f64).sqrt();
        weights.push(Array2::from_shape_simple_fn((fan_in, fan_out), || {
            std * rng.sample::<f64, _>(StandardNormal)
        }));
        biases.push(Array1::zeros(fan_out));
    }
    Params {
        weights,
        biases,
        seed,
    }
}

fn relu_inplace(z: &mut Array2<f64>) {
    z.mapv_inplace(|v| if v > 0.0 { v } else { 0.0 });
}

/// Forward pass keeping every layer's output: post-ReLU activations for
/// hidden layers, pre-softmax logits for the final layer.
fn forward_raw(p: &Params, inputs: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
    if inputs.ncols() != p.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "inputs have {} features, network expects {}",
            inputs.ncols(),
            p.input_dim()
        )));
    }
    let l = p.n_layers();
    let mut acts = Vec::with_capacity(l);
    for layer in 0..l {
        let prev = if layer == 0 { inputs } else { &acts[layer - 1] };
        let mut z = prev.dot(&p.weights[layer]) + &p.biases[layer];
        if layer + 1 < l {
            relu_inplace(&mut z);
        }
        acts.push(z);
    }
    Ok(acts)
}

/// Per-layer activations on a probe batch, depth order, labeled fc1..fcL.
/// The final entry holds pre-softmax logits.
pub fn forward_collect(p: &Params, inputs: &Array2<f64>) -> Result<Vec<DataMatrix>> {
    let acts = forward_raw(p, inputs)?;
    acts.into_iter()
        .enumerate()
        .map(|(i, a)| Ok(DataMatrix::new(a)?.with_label(format!("fc{}", i + 1))))
        .collect()
}

fn log_softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        row.mapv_inplace(|v| v - log_sum);
    }
    out
}

/// Mean softmax cross-entropy of the network on a labeled batch.
pub fn mean_cross_entropy(p: &Params, inputs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    let acts = forward_raw(p, inputs)?;
    let log_probs = log_softmax_rows(acts.last().expect("at least one layer"));
    let n = labels.len() as f64;
    Ok(labels
        .iter()
        .enumerate()
        .map(|(i, &c)| -log_probs[[i, c]])
        .sum::<f64>()
        / n)
}

/// Analytic gradients of the mean cross-entropy, one entry per layer.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Manual backpropagation through the ReLU stack.
pub fn gradients(p: &Params, inputs: &Array2<f64>, labels: &[usize]) -> Result<Gradients> {
    if labels.len() != inputs.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} input rows",
            labels.len(),
            inputs.nrows()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Config("batch must be non-empty".into()));
    }
    let l = p.n_layers();
    let acts = forward_raw(p, inputs)?;
    let batch = inputs.nrows() as f64;

    // softmax minus one-hot, divided by batch size
    let log_probs = log_softmax_rows(&acts[l - 1]);
    let mut delta = log_probs.mapv(f64::exp);
    for (i, &c) in labels.iter().enumerate() {
        delta[[i, c]] -= 1.0;
    }
    delta.mapv_inplace(|v| v / batch);

    let mut gw = vec![Array2::zeros((0, 0)); l];
    let mut gb = vec![Array1::zeros(0); l];
    for layer in (0..l).rev() {
        let prev = if layer == 0 { inputs } else { &acts[layer - 1] };
        gw[layer] = prev.t().dot(&delta);
        gb[layer] = delta.sum_axis(Axis(0));
        if layer > 0 {
            let mut d_prev = delta.dot(&p.weights[layer].t());
            // ReLU subgradient: zero wherever the unit was inactive.
            d_prev.zip_mut_with(&acts[layer - 1], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = d_prev;
        }
    }
    Ok(Gradients {
        weights: gw,
        biases: gb,
    })
}

/// The exact training sample a [`train`] call with this config will use.
pub fn training_set(task: &Task, cfg: &TrainConfig) -> (Array2<f64>, Vec<usize>) {
    task.sample(cfg.n_train, cfg.seed.wrapping_add(TAG_TRAIN_DATA))
}

/// Epoch at the start of which a layer (1-based depth index) stops updating.
/// `usize::MAX` means it never freezes.
fn freeze_threshold(layer: usize, n_layers: usize, epochs: usize, recipe: &Recipe) -> usize {
    match recipe {
        Recipe::Standard => usize::MAX,
        Recipe::Untrained => 0,
        Recipe::Freeze {
            epochs_per_freeze: Some(k),
        } => {
            if layer == n_layers {
                usize::MAX
            } else {
                layer * k
            }
        }
        Recipe::Freeze {
            epochs_per_freeze: None,
        }
        | Recipe::TransferFreeze { .. } => {
            if layer == n_layers {
                usize::MAX
            } else {
                layer * epochs / n_layers
            }
        }
        Recipe::RandomAbove { n } => {
            if layer <= *n {
                0
            } else {
                usize::MAX
            }
        }
    }
}

/// Minibatch SGD on softmax cross-entropy under the given recipe.
pub fn train(spec: &NetSpec, task: &Task, recipe: &Recipe, cfg: &TrainConfig) -> Result<Params> {
    recipe.validate(spec)?;
    if task.input_dim() != spec.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "task inputs have {} features, network expects {}",
            task.input_dim(),
            spec.input_dim()
        )));
    }
    if task.n_classes() > spec.output_dim() {
        return Err(Error::Config(format!(
            "{} classes but only {} output units",
            task.n_classes(),
            spec.output_dim()
        )));
    }
    let mut params = match recipe {
        Recipe::TransferFreeze { source } => source.clone(),
        _ => init_params(spec, cfg.seed),
    };
    if matches!(recipe, Recipe::Untrained) {
        return Ok(params);
    }

    let l = spec.n_layers();
    let thresholds: Vec<usize> = (1..=l)
        .map(|i| freeze_threshold(i, l, cfg.epochs, recipe))
        .collect();
    let (x, y) = training_set(task, cfg);
    let mut order: Vec<usize> = (0..cfg.n_train).collect();
    for epoch in 0..cfg.epochs {
        let mut rng = rng_from(&[cfg.seed, TAG_SHUFFLE, epoch as u64]);
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let bx = x.select(Axis(0), batch);
            let by: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let g = gradients(&params, &bx, &by)?;
            for layer in 0..l {
                if epoch < thresholds[layer] {
                    params.weights[layer].scaled_add(-cfg.learning_rate, &g.weights[layer]);
                    params.biases[layer].scaled_add(-cfg.learning_rate, &g.biases[layer]);
                }
            }
        }
    }
    Ok(params)
}

/// Top-1 accuracy on a freshly sampled evaluation set.
pub fn evaluate_accuracy(p: &Params, task: &Task, n_samples: usize, seed: u64) -> Result<f64> {
    let (x, y) = task.sample(n_samples, seed);
    let acts = forward_raw(p, &x)?;
    let logits = acts.last().expect("at least one layer");
    let correct = y
        .iter()
        .enumerate()
        .filter(|&(i, &c)| {
            let row = logits.row(i);
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best == c
        })
        .count();
    Ok(correct as f64 / n_samples as f64)
}
