//! Empirical risk minimization for the binary linear model: full-batch Adam
//! with a stepwise learning-rate schedule and a multi-start strategy.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::adam::{scheduled_lr, Adam};
use crate::estimation::dataset::Dataset;
use crate::losses::{binary_loss, binary_loss_grad, LossSpec};
use crate::rng::substream;

const START_STREAM: u64 = 0x10;

/// Training protocol: Adam hyperparameters, the decay schedule, and the
/// multi-start configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate_init: f64,
    pub decay_factor: f64,
    pub decay_every_epochs: usize,
    pub epochs: usize,
    pub multistart: usize,
    pub multistart_scatter_sd: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Flag fits whose parameter norm passes this cap as runaway.
    pub divergence_norm_cap: f64,
    /// Mini-batch size for network training; linear fits are full batch.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate_init: 0.01,
            decay_factor: 10f64.powf(-0.5),
            decay_every_epochs: 50,
            epochs: 150,
            multistart: 1,
            multistart_scatter_sd: 1.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            divergence_norm_cap: 1e3,
            batch_size: 100,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    /// Protocol defaults: one start for plain logistic regression, thirty
    /// scattered starts for every other family.
    pub fn defaults_for(spec: &LossSpec) -> Self {
        let multistart = if matches!(spec, LossSpec::Lr) { 1 } else { 30 };
        Self {
            multistart,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate_init > 0.0 && self.decay_factor > 0.0) {
            return Err(Error::InvalidParameter("rates must be positive".into()));
        }
        if self.epochs == 0 || self.multistart == 0 || self.decay_every_epochs == 0 {
            return Err(Error::InvalidParameter(
                "epochs, multistart, and decay period must be at least 1".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub final_empirical_risk: f64,
    pub start_index_chosen: usize,
    pub converged_epochs: usize,
    /// Euclidean norm of the empirical risk gradient at the returned point.
    pub final_grad_norm: f64,
    /// Set when the parameter norm passed the configured cap, as happens on
    /// separable data where the minimizer runs away.
    pub divergence_flagged: bool,
}

/// Mean surrogate loss and its gradient for the margin model.
fn risk_and_grad(data: &Dataset, spec: &LossSpec, beta: &[f64]) -> (f64, Vec<f64>) {
    let n = data.len() as f64;
    let d = beta.len();
    let mut risk = 0.0;
    let mut grad = vec![0.0; d];
    for i in 0..data.len() {
        let x = data.row(i);
        let s = data.sign_label(i);
        let v: f64 = beta.iter().zip(x).map(|(b, xi)| b * xi).sum();
        risk += binary_loss(spec, s * v);
        let g = binary_loss_grad(spec, s * v) * s;
        for (gj, xj) in grad.iter_mut().zip(x) {
            *gj += g * xj;
        }
    }
    risk /= n;
    for gj in &mut grad {
        *gj /= n;
    }
    (risk, grad)
}

struct StartOutcome {
    beta: Vec<f64>,
    risk: f64,
    grad_norm: f64,
    epochs: usize,
}

fn run_start(data: &Dataset, spec: &LossSpec, cfg: &OptimizerConfig, init: &[f64]) -> Option<StartOutcome> {
    let mut beta = init.to_vec();
    let mut opt = Adam::new(beta.len(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
    let mut epochs = 0;
    for epoch in 0..cfg.epochs {
        let lr = scheduled_lr(
            cfg.learning_rate_init,
            cfg.decay_factor,
            cfg.decay_every_epochs,
            epoch,
        );
        let (risk, grad) = risk_and_grad(data, spec, &beta);
        if !risk.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        opt.step(&mut beta, &grad, lr);
        epochs += 1;
    }
    let (risk, grad) = risk_and_grad(data, spec, &beta);
    if !risk.is_finite() {
        return None;
    }
    Some(StartOutcome {
        beta,
        risk,
        grad_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        epochs,
    })
}

/// Fits the binary linear model by full-batch Adam. Start zero is `init`
/// itself; the remaining starts perturb it with independent normal noise, and
/// the start with the lowest final empirical risk wins.
pub fn fit_linear(
    data: &Dataset,
    spec: &LossSpec,
    cfg: &OptimizerConfig,
    init: &[f64],
) -> Result<FitResult> {
    cfg.validate()?;
    if data.class_count() != 2 {
        return Err(Error::InvalidParameter(format!(
            "linear fits are binary, got k = {}",
            data.class_count()
        )));
    }
    if data.is_empty() {
        return Err(Error::Degenerate("cannot fit an empty dataset"));
    }
    if init.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: init.len(),
        });
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("init must be finite".into()));
    }

    let starts: Vec<Vec<f64>> = (0..cfg.multistart)
        .map(|s| {
            if s == 0 {
                init.to_vec()
            } else {
                let mut rng = substream(cfg.seed, &[START_STREAM, s as u64]);
                init.iter()
                    .map(|&b| b + cfg.multistart_scatter_sd * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            }
        })
        .collect();

    let outcomes: Vec<Option<StartOutcome>> = starts
        .par_iter()
        .map(|start| run_start(data, spec, cfg, start))
        .collect();

    let mut best: Option<(usize, &StartOutcome)> = None;
    for (idx, outcome) in outcomes.iter().enumerate() {
        if let Some(o) = outcome {
            // strict comparison keeps the smallest index on ties
            if best.map_or(true, |(_, b)| o.risk < b.risk) {
                best = Some((idx, o));
            }
        }
    }
    let (start_index_chosen, chosen) = best.ok_or_else(|| {
        Error::OptimizationFailed("every start produced a non-finite loss".into())
    })?;
    let norm = chosen.beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    Ok(FitResult {
        beta: chosen.beta.clone(),
        final_empirical_risk: chosen.risk,
        start_index_chosen,
        converged_epochs: chosen.epochs,
        final_grad_norm: chosen.grad_norm,
        divergence_flagged: norm > cfg.divergence_norm_cap,
    })
}

/// Empirical risk of a parameter vector, exposed for multi-start checks.
pub fn empirical_risk(data: &Dataset, spec: &LossSpec, beta: &[f64]) -> f64 {
    risk_and_grad(data, spec, beta).0
}
