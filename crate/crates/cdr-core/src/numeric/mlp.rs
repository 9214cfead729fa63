//! A small fully-connected network with hand-rolled backprop.
//!
//! Deliberately minimal: dense layers, two hidden activations, two output
//! activations, plain minibatch SGD. Weight initialization and batch
//! shuffling are driven by counter-based streams ([`crate::rng`]), so a fit
//! is a pure function of `(initial params, data, config)`.

use crate::error::{Error, Result};
use crate::rng::{self, derangement, StreamKey};
use serde::{Deserialize, Serialize};

use super::{RealVector, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed in terms of the pre-activation `z` and the
    /// activation value `a` (whichever is cheaper).
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

impl OutputActivation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::Sigmoid => sigmoid(z),
        }
    }

    #[inline]
    fn derivative(self, a: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Training objective for [`mlp_train`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Mean over the batch of `0.5 * ||y - t||^2`.
    SquaredError,
    /// Mean over the batch of elementwise binary cross-entropy. Requires a
    /// sigmoid output layer and targets in [0, 1].
    BinaryCrossEntropy,
    /// Negated variational lower bound on mutual information: for a batch of
    /// paired samples, `-(mean T(x, y) - ln mean exp T(x, y'))` where `y'`
    /// re-pairs the batch by a derangement (an approximate draw from the
    /// product of marginals). Requires scalar output; samples are the (x, y)
    /// halves of the network input.
    DvMiObjective,
}

/// Hyperparameters for [`mlp_train`] and the fit helpers built on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Half-width of the uniform weight-initialization interval.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate must be positive and finite"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::invalid("init_scale must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Weights and biases of a fully-connected network.
///
/// `layer_sizes = [in, h1, ..., out]`; `weights[l]` is row-major
/// `layer_sizes[l+1] x layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MlpParamsRaw", into = "MlpParamsRaw")]
pub struct MlpParams {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activation: Activation,
    output_activation: OutputActivation,
}

#[derive(Serialize, Deserialize)]
struct MlpParamsRaw {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activation: Activation,
    output_activation: OutputActivation,
}

impl TryFrom<MlpParamsRaw> for MlpParams {
    type Error = Error;
    fn try_from(raw: MlpParamsRaw) -> Result<Self> {
        MlpParams::new(raw.layer_sizes, raw.weights, raw.biases, raw.activation, raw.output_activation)
    }
}

impl From<MlpParams> for MlpParamsRaw {
    fn from(p: MlpParams) -> Self {
        MlpParamsRaw {
            layer_sizes: p.layer_sizes,
            weights: p.weights,
            biases: p.biases,
            activation: p.activation,
            output_activation: p.output_activation,
        }
    }
}

impl MlpParams {
    pub fn new(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        activation: Activation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::invalid("network needs at least input and output layers"));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        let n_layers = layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::dims(format!(
                "expected {n_layers} weight/bias blocks, got {}/{}",
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..n_layers {
            let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
            if weights[l].len() != rows * cols {
                return Err(Error::dims(format!(
                    "layer {l}: weight block has {} entries, expected {rows}x{cols}",
                    weights[l].len()
                )));
            }
            if biases[l].len() != rows {
                return Err(Error::dims(format!(
                    "layer {l}: bias block has {} entries, expected {rows}",
                    biases[l].len()
                )));
            }
            if weights[l].iter().chain(&biases[l]).any(|w| !w.is_finite()) {
                return Err(Error::invalid(format!("layer {l}: non-finite parameter")));
            }
        }
        Ok(MlpParams { layer_sizes, weights, biases, activation, output_activation })
    }

    /// Uniform init in `[-init_scale, init_scale]`. Each parameter is filled
    /// by a counter-indexed draw, so the layout is a pure function of
    /// `(layer_sizes, seed, init_scale)`.
    pub fn seeded(
        layer_sizes: Vec<usize>,
        activation: Activation,
        output_activation: OutputActivation,
        seed: u64,
        init_scale: f64,
    ) -> Result<Self> {
        if !(init_scale.is_finite() && init_scale >= 0.0) {
            return Err(Error::invalid("init_scale must be non-negative and finite"));
        }
        let mut stream = StreamKey::root(seed).child(rng::label::INIT).stream();
        let mut draw = |count: usize| -> Vec<f64> {
            (0..count)
                .map(|_| (stream.next_f64() * 2.0 - 1.0) * init_scale)
                .collect()
        };
        let n_layers = layer_sizes.len().saturating_sub(1);
        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            weights.push(draw(layer_sizes[l + 1] * layer_sizes[l]));
            biases.push(draw(layer_sizes[l + 1]));
        }
        MlpParams::new(layer_sizes, weights, biases, activation, output_activation)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn param(&self, flat: usize) -> f64 {
        *self.param_slot(flat)
    }

    fn param_slot(&self, mut flat: usize) -> &f64 {
        for l in 0..self.weights.len() {
            if flat < self.weights[l].len() {
                return &self.weights[l][flat];
            }
            flat -= self.weights[l].len();
            if flat < self.biases[l].len() {
                return &self.biases[l][flat];
            }
            flat -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    fn param_slot_mut(&mut self, mut flat: usize) -> &mut f64 {
        for l in 0..self.weights.len() {
            if flat < self.weights[l].len() {
                return &mut self.weights[l][flat];
            }
            flat -= self.weights[l].len();
            if flat < self.biases[l].len() {
                return &mut self.biases[l][flat];
            }
            flat -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    fn all_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|block| block.iter().all(|w| w.is_finite()))
    }

    /// Forward pass on a raw slice (length must equal `input_size`).
    fn forward_raw(&self, input: &[f64]) -> Vec<f64> {
        let mut a = input.to_vec();
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let (rows, cols) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            let mut next = Vec::with_capacity(rows);
            for r in 0..rows {
                let row = &self.weights[l][r * cols..(r + 1) * cols];
                let z: f64 =
                    row.iter().zip(&a).map(|(w, x)| w * x).sum::<f64>() + self.biases[l][r];
                next.push(if l == last {
                    self.output_activation.apply(z)
                } else {
                    self.activation.apply(z)
                });
            }
            a = next;
        }
        a
    }

    /// Forward pass keeping pre-activations and activations for backprop.
    fn forward_trace(&self, input: &[f64]) -> Trace {
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        let mut pre = Vec::with_capacity(self.weights.len());
        activations.push(input.to_vec());
        let last = self.weights.len() - 1;
        for l in 0..self.weights.len() {
            let (rows, cols) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            let a_prev = &activations[l];
            let mut z = Vec::with_capacity(rows);
            for r in 0..rows {
                let row = &self.weights[l][r * cols..(r + 1) * cols];
                z.push(
                    row.iter().zip(a_prev).map(|(w, x)| w * x).sum::<f64>() + self.biases[l][r],
                );
            }
            let a: Vec<f64> = if l == last {
                z.iter().map(|&v| self.output_activation.apply(v)).collect()
            } else {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            };
            pre.push(z);
            activations.push(a);
        }
        Trace { activations, pre }
    }

    /// Accumulate parameter gradients given `delta_last` = dL/dz for the
    /// output layer (already including any output-activation derivative).
    fn backprop(&self, trace: &Trace, delta_last: Vec<f64>, grads: &mut GradAccum) {
        let mut delta = delta_last;
        for l in (0..self.weights.len()).rev() {
            let (rows, cols) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            let a_prev = &trace.activations[l];
            for r in 0..rows {
                let d = delta[r];
                grads.biases[l][r] += d;
                let g_row = &mut grads.weights[l][r * cols..(r + 1) * cols];
                for c in 0..cols {
                    g_row[c] += d * a_prev[c];
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; cols];
                for r in 0..rows {
                    let d = delta[r];
                    let w_row = &self.weights[l][r * cols..(r + 1) * cols];
                    for c in 0..cols {
                        prev[c] += d * w_row[c];
                    }
                }
                for c in 0..cols {
                    prev[c] *=
                        self.activation.derivative(trace.pre[l - 1][c], trace.activations[l][c]);
                }
                delta = prev;
            }
        }
    }

    fn apply_gradients(&mut self, grads: &GradAccum, learning_rate: f64) {
        for l in 0..self.weights.len() {
            for (w, g) in self.weights[l].iter_mut().zip(&grads.weights[l]) {
                *w -= learning_rate * g;
            }
            for (b, g) in self.biases[l].iter_mut().zip(&grads.biases[l]) {
                *b -= learning_rate * g;
            }
        }
    }
}

struct Trace {
    /// `activations[0]` is the input; `activations[l + 1]` the output of
    /// layer `l`.
    activations: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl Trace {
    fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has layers")
    }
}

struct GradAccum {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl GradAccum {
    fn zeros_like(params: &MlpParams) -> Self {
        GradAccum {
            weights: params.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// Evaluate the network on one input.
pub fn mlp_forward(params: &MlpParams, input: &RealVector) -> Result<RealVector> {
    if input.len() != params.input_size() {
        return Err(Error::dims(format!(
            "input has length {}, network expects {}",
            input.len(),
            params.input_size()
        )));
    }
    RealVector::new(params.forward_raw(input.as_slice()))
}

const BCE_EPS: f64 = 1e-12;

/// Loss (and, when `grads` is given, accumulated parameter gradients) for one
/// batch. `batch` holds indices into `data`; `pairing` is the
/// negative-sample derangement for the variational MI objective (ignored by
/// the other losses). A single code path serves both the analytic gradients
/// and the finite-difference re-evaluations in [`gradient_check_set`].
fn batch_eval(
    params: &MlpParams,
    data: &SampleSet,
    batch: &[usize],
    loss: Loss,
    pairing: Option<&[usize]>,
    mut grads: Option<&mut GradAccum>,
) -> f64 {
    let b = batch.len() as f64;
    match loss {
        Loss::SquaredError | Loss::BinaryCrossEntropy => {
            let mut total = 0.0;
            for &i in batch {
                let (x, t) = &data.pairs()[i];
                let trace = params.forward_trace(x.as_slice());
                let y = trace.output();
                match loss {
                    Loss::SquaredError => {
                        total += 0.5
                            * y.iter()
                                .zip(t.as_slice())
                                .map(|(yi, ti)| (yi - ti) * (yi - ti))
                                .sum::<f64>()
                            / b;
                        if let Some(g) = grads.as_deref_mut() {
                            let delta: Vec<f64> = y
                                .iter()
                                .zip(t.as_slice())
                                .enumerate()
                                .map(|(j, (yi, ti))| {
                                    (yi - ti) / b * params.output_activation.derivative(y[j])
                                })
                                .collect();
                            params.backprop(&trace, delta, g);
                        }
                    }
                    Loss::BinaryCrossEntropy => {
                        total += y
                            .iter()
                            .zip(t.as_slice())
                            .map(|(yi, ti)| {
                                let yc = yi.clamp(BCE_EPS, 1.0 - BCE_EPS);
                                -(ti * yc.ln() + (1.0 - ti) * (1.0 - yc).ln())
                            })
                            .sum::<f64>()
                            / b;
                        if let Some(g) = grads.as_deref_mut() {
                            // Sigmoid + cross-entropy collapse to (y - t).
                            let delta: Vec<f64> = y
                                .iter()
                                .zip(t.as_slice())
                                .map(|(yi, ti)| (yi - ti) / b)
                                .collect();
                            params.backprop(&trace, delta, g);
                        }
                    }
                    Loss::DvMiObjective => unreachable!(),
                }
            }
            total
        }
        Loss::DvMiObjective => {
            let pairing = pairing.expect("variational MI objective requires a pairing");
            debug_assert_eq!(pairing.len(), batch.len());
            let joint_input = |i: usize, j: usize| -> Vec<f64> {
                let (x, _) = &data.pairs()[i];
                let (_, y) = &data.pairs()[j];
                let mut v = Vec::with_capacity(x.len() + y.len());
                v.extend_from_slice(x.as_slice());
                v.extend_from_slice(y.as_slice());
                v
            };
            let t_pos: Vec<f64> = batch
                .iter()
                .map(|&i| params.forward_raw(&joint_input(i, i))[0])
                .collect();
            let t_neg: Vec<f64> = batch
                .iter()
                .enumerate()
                .map(|(k, &i)| params.forward_raw(&joint_input(i, batch[pairing[k]]))[0])
                .collect();

            let mean_pos = t_pos.iter().sum::<f64>() / b;
            let m = t_neg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exp_sum: f64 = t_neg.iter().map(|&t| (t - m).exp()).sum();
            let lse_mean = m + (exp_sum / b).ln();
            let loss_value = -(mean_pos - lse_mean);

            if let Some(g) = grads.as_deref_mut() {
                for &i in batch {
                    let trace = params.forward_trace(&joint_input(i, i));
                    let d = -1.0 / b * params.output_activation.derivative(trace.output()[0]);
                    params.backprop(&trace, vec![d], g);
                }
                for (k, &i) in batch.iter().enumerate() {
                    let trace = params.forward_trace(&joint_input(i, batch[pairing[k]]));
                    let softmax = (t_neg[k] - m).exp() / exp_sum;
                    let d = softmax * params.output_activation.derivative(trace.output()[0]);
                    params.backprop(&trace, vec![d], g);
                }
            }
            loss_value
        }
    }
}

/// Value of the variational MI bound (sign-flipped training loss) on `data`
/// as a single batch, under the given negative pairing.
pub(crate) fn dv_bound(params: &MlpParams, data: &SampleSet, pairing: &[usize]) -> f64 {
    let batch: Vec<usize> = (0..data.len()).collect();
    -batch_eval(params, data, &batch, Loss::DvMiObjective, Some(pairing), None)
}

pub(crate) fn validate_training_shapes(params: &MlpParams, data: &SampleSet, loss: Loss) -> Result<()> {
    match loss {
        Loss::SquaredError | Loss::BinaryCrossEntropy => {
            if data.x_dim() != params.input_size() || data.y_dim() != params.output_size() {
                return Err(Error::dims(format!(
                    "data shape ({}, {}) does not match network ({}, {})",
                    data.x_dim(),
                    data.y_dim(),
                    params.input_size(),
                    params.output_size()
                )));
            }
            if loss == Loss::BinaryCrossEntropy {
                if params.output_activation != OutputActivation::Sigmoid {
                    return Err(Error::invalid(
                        "binary cross-entropy requires a sigmoid output layer",
                    ));
                }
                for (i, (_, t)) in data.pairs().iter().enumerate() {
                    if t.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
                        return Err(Error::invalid(format!(
                            "binary cross-entropy target {i} outside [0, 1]"
                        )));
                    }
                }
            }
        }
        Loss::DvMiObjective => {
            if data.x_dim() + data.y_dim() != params.input_size() {
                return Err(Error::dims(format!(
                    "joint sample dim {} does not match network input {}",
                    data.x_dim() + data.y_dim(),
                    params.input_size()
                )));
            }
            if params.output_size() != 1 {
                return Err(Error::dims(
                    "variational MI objective requires a scalar output".to_string(),
                ));
            }
            if data.len() < 2 {
                return Err(Error::invalid(
                    "variational MI objective needs at least 2 samples",
                ));
            }
        }
    }
    Ok(())
}

/// Minibatch SGD on `loss`. Deterministic given `(params, data, config)`:
/// epoch shuffles and negative pairings derive from `config.seed`.
///
/// Batches whose loss turns non-finite abort with
/// [`Error::TrainingDiverged`]. The variational MI objective silently skips
/// size-1 tail batches (a derangement needs two elements).
pub fn mlp_train(
    mut params: MlpParams,
    data: &SampleSet,
    loss: Loss,
    config: &TrainConfig,
) -> Result<MlpParams> {
    config.validate()?;
    validate_training_shapes(&params, data, loss)?;

    let n = data.len();
    let shuffle_key = StreamKey::root(config.seed).child(rng::label::SHUFFLE);
    let pairing_key = StreamKey::root(config.seed).child(rng::label::PAIRING);

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        shuffle_key.child(epoch as u64).stream().shuffle(&mut order);

        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            let pairing = match loss {
                Loss::DvMiObjective => {
                    if batch.len() < 2 {
                        continue;
                    }
                    Some(derangement(
                        batch.len(),
                        pairing_key.child(epoch as u64).child(batch_idx as u64),
                    ))
                }
                _ => None,
            };
            let mut grads = GradAccum::zeros_like(&params);
            let loss_value =
                batch_eval(&params, data, batch, loss, pairing.as_deref(), Some(&mut grads));
            if !loss_value.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch,
                    message: format!("batch {batch_idx} loss is {loss_value}"),
                });
            }
            params.apply_gradients(&grads, config.learning_rate);
        }
        if !params.all_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                message: "non-finite parameter after update".to_string(),
            });
        }
    }
    Ok(params)
}

const FD_STEP: f64 = 1e-5;

/// Maximum relative disagreement between analytic and central-difference
/// gradients of `loss` over `data` treated as one batch.
///
/// For the variational MI objective the negative pairing is fixed once (from
/// a constant key) and shared by the analytic and both perturbed evaluations,
/// so the comparison is on the exact same function.
pub fn gradient_check_set(params: &MlpParams, data: &SampleSet, loss: Loss) -> Result<f64> {
    validate_training_shapes(params, data, loss)?;
    let batch: Vec<usize> = (0..data.len()).collect();
    let pairing = match loss {
        Loss::DvMiObjective => Some(derangement(
            batch.len(),
            StreamKey::root(0).child(rng::label::EVAL_PAIRING),
        )),
        _ => None,
    };

    let mut grads = GradAccum::zeros_like(params);
    let base = batch_eval(params, data, &batch, loss, pairing.as_deref(), Some(&mut grads));
    if !base.is_finite() {
        return Err(Error::invalid("loss is non-finite at the given parameters"));
    }

    let flat_grad = |flat: usize| -> f64 {
        // GradAccum mirrors the parameter layout exactly.
        let mut idx = flat;
        for l in 0..grads.weights.len() {
            if idx < grads.weights[l].len() {
                return grads.weights[l][idx];
            }
            idx -= grads.weights[l].len();
            if idx < grads.biases[l].len() {
                return grads.biases[l][idx];
            }
            idx -= grads.biases[l].len();
        }
        unreachable!()
    };

    let mut worst = 0.0f64;
    let mut perturbed = params.clone();
    for flat in 0..params.param_count() {
        let original = params.param(flat);
        *perturbed.param_slot_mut(flat) = original + FD_STEP;
        let up = batch_eval(&perturbed, data, &batch, loss, pairing.as_deref(), None);
        *perturbed.param_slot_mut(flat) = original - FD_STEP;
        let down = batch_eval(&perturbed, data, &batch, loss, pairing.as_deref(), None);
        *perturbed.param_slot_mut(flat) = original;

        let numeric = (up - down) / (2.0 * FD_STEP);
        let analytic = flat_grad(flat);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// [`gradient_check_set`] on a single (input, target) pair.
pub fn gradient_check(
    params: &MlpParams,
    input: &RealVector,
    target: &RealVector,
    loss: Loss,
) -> Result<f64> {
    let data = SampleSet::new(vec![(input.clone(), target.clone())])?;
    gradient_check_set(params, &data, loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> SampleSet {
        let rows = [
            ([0.0, 0.0], [0.0]),
            ([0.0, 1.0], [1.0]),
            ([1.0, 0.0], [1.0]),
            ([1.0, 1.0], [0.0]),
        ];
        SampleSet::new(
            rows.iter()
                .map(|(x, t)| {
                    (RealVector::new(x.to_vec()).unwrap(), RealVector::new(t.to_vec()).unwrap())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn seeded_init_is_reproducible_and_bounded() {
        let a = MlpParams::seeded(
            vec![4, 8, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            9,
            0.25,
        )
        .unwrap();
        let b = MlpParams::seeded(
            vec![4, 8, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            9,
            0.25,
        )
        .unwrap();
        assert_eq!(a, b);
        for l in 0..a.weights.len() {
            assert!(a.weights[l].iter().all(|w| w.abs() <= 0.25));
        }
        let c = MlpParams::seeded(
            vec![4, 8, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            10,
            0.25,
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forward_identity_network_is_affine() {
        // 1-1 network with weight 2, bias -1, identity output.
        let p = MlpParams::new(
            vec![1, 1],
            vec![vec![2.0]],
            vec![vec![-1.0]],
            Activation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap();
        let y = mlp_forward(&p, &RealVector::new(vec![3.0]).unwrap()).unwrap();
        assert_eq!(y.as_slice(), &[5.0]);
    }

    #[test]
    fn forward_rejects_wrong_input_size() {
        let p = MlpParams::seeded(
            vec![3, 2],
            Activation::Relu,
            OutputActivation::Identity,
            0,
            0.1,
        )
        .unwrap();
        assert!(mlp_forward(&p, &RealVector::new(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn shape_validation_catches_bad_blocks() {
        assert!(MlpParams::new(
            vec![2, 2],
            vec![vec![1.0, 2.0, 3.0]],
            vec![vec![0.0, 0.0]],
            Activation::Tanh,
            OutputActivation::Identity,
        )
        .is_err());
        assert!(MlpParams::new(
            vec![2],
            vec![],
            vec![],
            Activation::Tanh,
            OutputActivation::Identity,
        )
        .is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = MlpParams::seeded(
            vec![2, 6, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            4,
            0.5,
        )
        .unwrap();
        let data = xor_data();
        let worst = gradient_check_set(&p, &data, Loss::BinaryCrossEntropy).unwrap();
        assert!(worst <= 1e-4, "BCE gradient error {worst}");

        let p_id = MlpParams::seeded(
            vec![2, 6, 2],
            Activation::Tanh,
            OutputActivation::Identity,
            4,
            0.5,
        )
        .unwrap();
        let data2 = SampleSet::new(vec![
            (
                RealVector::new(vec![0.3, -0.7]).unwrap(),
                RealVector::new(vec![1.0, -1.0]).unwrap(),
            ),
            (
                RealVector::new(vec![-0.2, 0.4]).unwrap(),
                RealVector::new(vec![0.5, 0.25]).unwrap(),
            ),
        ])
        .unwrap();
        let worst = gradient_check_set(&p_id, &data2, Loss::SquaredError).unwrap();
        assert!(worst <= 1e-4, "squared-error gradient error {worst}");
    }

    #[test]
    fn dv_gradients_match_finite_differences() {
        let p = MlpParams::seeded(
            vec![2, 8, 1],
            Activation::Tanh,
            OutputActivation::Identity,
            7,
            0.5,
        )
        .unwrap();
        let mut stream = StreamKey::root(21).stream();
        let pairs: Vec<(RealVector, RealVector)> = (0..16)
            .map(|_| {
                let x = stream.next_normal();
                let y = 0.8 * x + 0.2 * stream.next_normal();
                (RealVector::new(vec![x]).unwrap(), RealVector::new(vec![y]).unwrap())
            })
            .collect();
        let data = SampleSet::new(pairs).unwrap();
        let worst = gradient_check_set(&p, &data, Loss::DvMiObjective).unwrap();
        assert!(worst <= 1e-4, "variational MI gradient error {worst}");
    }

    #[test]
    fn relu_gradients_also_check_out() {
        let p = MlpParams::seeded(
            vec![2, 6, 1],
            Activation::Relu,
            OutputActivation::Sigmoid,
            11,
            0.5,
        )
        .unwrap();
        let worst = gradient_check_set(&p, &xor_data(), Loss::BinaryCrossEntropy).unwrap();
        assert!(worst <= 1e-4, "relu gradient error {worst}");
    }

    #[test]
    fn training_learns_xor() {
        let p = MlpParams::seeded(
            vec![2, 8, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            2,
            0.5,
        )
        .unwrap();
        let config = TrainConfig {
            learning_rate: 0.8,
            epochs: 1500,
            batch_size: 4,
            seed: 2,
            init_scale: 0.5,
        };
        let trained = mlp_train(p, &xor_data(), Loss::BinaryCrossEntropy, &config).unwrap();
        for (x, t) in xor_data().pairs() {
            let y = mlp_forward(&trained, x).unwrap().as_slice()[0];
            assert_eq!(y >= 0.5, t.as_slice()[0] >= 0.5, "xor({:?}) -> {y}", x.as_slice());
        }
    }

    #[test]
    fn training_is_deterministic() {
        let init = MlpParams::seeded(
            vec![2, 5, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            3,
            0.3,
        )
        .unwrap();
        let config = TrainConfig {
            learning_rate: 0.3,
            epochs: 50,
            batch_size: 2,
            seed: 3,
            init_scale: 0.3,
        };
        let a = mlp_train(init.clone(), &xor_data(), Loss::BinaryCrossEntropy, &config).unwrap();
        let b = mlp_train(init, &xor_data(), Loss::BinaryCrossEntropy, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let p = MlpParams::seeded(
            vec![1, 4, 1],
            Activation::Relu,
            OutputActivation::Identity,
            5,
            0.5,
        )
        .unwrap();
        let data = SampleSet::new(vec![(
            RealVector::new(vec![1e3]).unwrap(),
            RealVector::new(vec![0.0]).unwrap(),
        )])
        .unwrap();
        // The squared-error loss roughly squares per epoch at this rate, so
        // 40 epochs is far past the overflow horizon from any finite start.
        let config = TrainConfig {
            learning_rate: 1e12,
            epochs: 40,
            batch_size: 1,
            seed: 5,
            init_scale: 0.5,
        };
        match mlp_train(p, &data, Loss::SquaredError, &config) {
            Err(Error::TrainingDiverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn bce_requires_sigmoid_output() {
        let p = MlpParams::seeded(
            vec![2, 4, 1],
            Activation::Tanh,
            OutputActivation::Identity,
            1,
            0.2,
        )
        .unwrap();
        assert!(matches!(
            mlp_train(p, &xor_data(), Loss::BinaryCrossEntropy, &TrainConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn params_serde_round_trip_and_validation() {
        let p = MlpParams::seeded(
            vec![4, 3, 1],
            Activation::Tanh,
            OutputActivation::Sigmoid,
            6,
            0.2,
        )
        .unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: MlpParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);

        let broken = json.replace("[4,3,1]", "[4,2,1]");
        let res: std::result::Result<MlpParams, _> = serde_json::from_str(&broken);
        assert!(res.is_err());
    }
}
