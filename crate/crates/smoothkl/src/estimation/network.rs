//! A small dense softmax network trained by mini-batch Adam, with epoch-wise
//! held-out risks recorded so callers can select the epoch that minimized a
//! chosen risk.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimation::adam::{scheduled_lr, Adam};
use crate::estimation::dataset::Dataset;
use crate::estimation::evaluate::{eval_tsr, eval_ttr, Predictor};
use crate::estimation::linear::OptimizerConfig;
use crate::losses::{multiclass_loss, multiclass_loss_grad, LossSpec};
use crate::rng::substream;

const INIT_STREAM: u64 = 0x20;
const SHUFFLE_STREAM: u64 = 0x21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    /// Keeps the network linear end to end; used to cross-check against the
    /// linear trainer.
    Identity,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Hidden widths, activation, and logit dimension of a dense network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkArch {
    hidden: Vec<usize>,
    activation: Activation,
    output_dim: usize,
}

impl NetworkArch {
    pub fn new(hidden: Vec<usize>, activation: Activation, output_dim: usize) -> Result<Self> {
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::InvalidParameter(
                "need at least one hidden layer of positive width".into(),
            ));
        }
        if output_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "output dimension must be at least 2, got {output_dim}"
            )));
        }
        Ok(Self {
            hidden,
            activation,
            output_dim,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }
}

/// Dense network with un-normalized logit outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    sizes: Vec<usize>, // input, hidden..., output
    activation: Activation,
    // weight matrix (out x in, row-major) then bias per layer
    params: Vec<f64>,
}

impl Network {
    fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    fn layer_offsets(&self) -> Vec<(usize, usize, usize)> {
        // (weights offset, bias offset, next free)
        let mut out = Vec::with_capacity(self.layer_count());
        let mut off = 0;
        for l in 0..self.layer_count() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = off;
            let b = off + fan_in * fan_out;
            off = b + fan_out;
            out.push((w, b, off));
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layer_offsets().last().map_or(0, |&(.., end)| end)
    }

    /// He-style initialization from a dedicated stream.
    pub fn init(arch: &NetworkArch, input_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidParameter("input dimension must be positive".into()));
        }
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(&arch.hidden);
        sizes.push(arch.output_dim);
        let mut net = Self {
            sizes,
            activation: arch.activation,
            params: Vec::new(),
        };
        net.params = vec![0.0; net.param_count()];
        let mut rng = substream(seed, &[INIT_STREAM]);
        let offsets = net.layer_offsets();
        for (l, &(w_off, b_off, _)) in offsets.iter().enumerate() {
            let fan_in = net.sizes[l];
            let scale = (2.0 / fan_in as f64).sqrt();
            for w in &mut net.params[w_off..b_off] {
                *w = scale * rng.sample::<f64, _>(StandardNormal);
            }
            // biases start at zero
        }
        Ok(net)
    }

    fn forward_cached(&self, x: &[f64], pre: &mut Vec<Vec<f64>>, post: &mut Vec<Vec<f64>>) {
        pre.clear();
        post.clear();
        let offsets = self.layer_offsets();
        let mut input = x.to_vec();
        for (l, &(w_off, b_off, _)) in offsets.iter().enumerate() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let mut z = vec![0.0; fan_out];
            for o in 0..fan_out {
                let row = &self.params[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                let mut acc = self.params[b_off + o];
                for (wi, xi) in row.iter().zip(&input) {
                    acc += wi * xi;
                }
                z[o] = acc;
            }
            let last = l + 1 == self.layer_count();
            let a: Vec<f64> = if last {
                z.clone()
            } else {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            };
            pre.push(z);
            post.push(a.clone());
            input = a;
        }
    }

    /// Accumulates the parameter gradient of the loss at one sample into
    /// `grad`, returning the sample loss.
    fn backprop(
        &self,
        x: &[f64],
        y: usize,
        spec: &LossSpec,
        grad: &mut [f64],
        scale: f64,
    ) -> Result<f64> {
        let mut pre = Vec::new();
        let mut post = Vec::new();
        self.forward_cached(x, &mut pre, &mut post);
        let logits = post.last().unwrap();
        let loss = multiclass_loss(spec, logits, y)?;
        let mut delta = multiclass_loss_grad(spec, logits, y)?;
        let offsets = self.layer_offsets();
        for l in (0..self.layer_count()).rev() {
            let (w_off, b_off, _) = offsets[l];
            let fan_in = self.sizes[l];
            let below: &[f64] = if l == 0 { x } else { &post[l - 1] };
            for (o, &dz) in delta.iter().enumerate() {
                grad[b_off + o] += scale * dz;
                let row = &mut grad[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                for (g, xi) in row.iter_mut().zip(below) {
                    *g += scale * dz * xi;
                }
            }
            if l > 0 {
                let mut next = vec![0.0; fan_in];
                for (o, &dz) in delta.iter().enumerate() {
                    let row = &self.params[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                    for (ni, wi) in next.iter_mut().zip(row) {
                        *ni += dz * wi;
                    }
                }
                for (ni, &z) in next.iter_mut().zip(&pre[l - 1]) {
                    *ni *= self.activation.derivative(z);
                }
                delta = next;
            }
        }
        Ok(loss)
    }

    /// Loss gradient with respect to all parameters at one sample; used by the
    /// finite-difference checks.
    pub fn loss_grad(&self, x: &[f64], y: usize, spec: &LossSpec) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.param_count()];
        self.backprop(x, y, spec, &mut grad, 1.0)?;
        Ok(grad)
    }

    /// Loss at one sample, for finite differencing.
    pub fn loss_at(&self, x: &[f64], y: usize, spec: &LossSpec) -> Result<f64> {
        Ok(multiclass_loss(spec, &self.logits(x), y)?)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }
}

impl Predictor for Network {
    fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut pre = Vec::new();
        let mut post = Vec::new();
        self.forward_cached(x, &mut pre, &mut post);
        post.pop().unwrap()
    }
}

/// Held-out risks after one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochEval {
    pub epoch: usize,
    pub train_risk: f64,
    pub eval_tsr: f64,
    pub eval_ttr: f64,
}

/// Final network plus the epoch history and a snapshot of the network at the
/// epoch with the lowest held-out surrogate risk.
#[derive(Debug, Clone)]
pub struct NetworkFit {
    pub network: Network,
    pub history: Vec<EpochEval>,
    pub best_tsr_epoch: usize,
    pub network_at_best_tsr: Network,
}

/// Trains a dense network by mini-batch Adam under the given surrogate family.
/// Evaluation runs against `eval` at the end of every epoch.
pub fn fit_network(
    train: &Dataset,
    eval: &Dataset,
    spec: &LossSpec,
    arch: &NetworkArch,
    cfg: &OptimizerConfig,
) -> Result<NetworkFit> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Degenerate("cannot fit an empty dataset"));
    }
    if arch.output_dim() != train.class_count() {
        return Err(Error::DimensionMismatch {
            expected: train.class_count(),
            got: arch.output_dim(),
        });
    }
    if eval.dim() != train.dim() || eval.class_count() != train.class_count() {
        return Err(Error::InvalidParameter(
            "train and eval sets must share shape".into(),
        ));
    }
    if let Some(level) = spec.level() {
        if level.k() != train.class_count() {
            return Err(Error::DimensionMismatch {
                expected: train.class_count(),
                got: level.k(),
            });
        }
    }

    let mut net = Network::init(arch, train.dim(), cfg.seed)?;
    let mut opt = Adam::new(net.param_count(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
    let n = train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; net.param_count()];
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best_tsr = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_net = net.clone();

    for epoch in 0..cfg.epochs {
        let lr = scheduled_lr(
            cfg.learning_rate_init,
            cfg.decay_factor,
            cfg.decay_every_epochs,
            epoch,
        );
        // Fisher-Yates from a per-epoch stream
        let mut rng = substream(cfg.seed, &[SHUFFLE_STREAM, epoch as u64]);
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut train_risk = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                train_risk += net.backprop(train.row(i), train.label(i), spec, &mut grad, scale)?;
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::OptimizationFailed(format!(
                    "non-finite gradient in epoch {epoch}"
                )));
            }
            opt.step(net.params_mut(), &grad, lr);
        }
        train_risk /= n as f64;
        let tsr = eval_tsr(&net, eval, spec)?;
        let ttr = eval_ttr(&net, eval, spec)?;
        history.push(EpochEval {
            epoch,
            train_risk,
            eval_tsr: tsr,
            eval_ttr: ttr,
        });
        if tsr < best_tsr {
            best_tsr = tsr;
            best_epoch = epoch;
            best_net = net.clone();
        }
    }

    Ok(NetworkFit {
        network: net,
        history,
        best_tsr_epoch: best_epoch,
        network_at_best_tsr: best_net,
    })
}
