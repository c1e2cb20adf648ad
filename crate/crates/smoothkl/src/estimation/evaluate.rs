//! Evaluators: size of bias, test task risk, test surrogate risk, and the
//! simplex-deviation report of roughened-logit estimates over a dataset.

use crate::error::Result;
use crate::estimation::dataset::Dataset;
use crate::losses::{multiclass_loss, LossSpec};
use crate::predictors::{
    deviation_metrics_with, label_zero_one_from_logits, rlogit_probs, DeviationReport,
    LogitVector, MsorVariant,
};
use crate::smoothing::SmoothingLevel;

/// Anything that produces a logit vector from covariates.
pub trait Predictor {
    fn logits(&self, x: &[f64]) -> Vec<f64>;
}

/// Binary linear model exposed as a two-logit predictor `(βᵀx, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta: Vec<f64>,
}

impl Predictor for LinearModel {
    fn logits(&self, x: &[f64]) -> Vec<f64> {
        let g: f64 = self.beta.iter().zip(x).map(|(b, xi)| b * xi).sum();
        vec![g, 0.0]
    }
}

/// Euclidean distance between the fitted and true parameters.
pub fn eval_sob(beta_hat: &[f64], beta_true: &[f64]) -> f64 {
    beta_hat
        .iter()
        .zip(beta_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Mean zero-one loss of the family's labeling rule on a test set.
pub fn eval_ttr(model: &impl Predictor, test: &Dataset, spec: &LossSpec) -> Result<f64> {
    let mut wrong = 0usize;
    for i in 0..test.len() {
        let logits = model.logits(test.row(i));
        if label_zero_one_from_logits(&logits, spec) != test.label(i) {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / test.len() as f64)
}

/// Mean surrogate loss on a test set.
pub fn eval_tsr(model: &impl Predictor, test: &Dataset, spec: &LossSpec) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..test.len() {
        let logits = model.logits(test.row(i));
        total += multiclass_loss(spec, &logits, test.label(i))?;
    }
    Ok(total / test.len() as f64)
}

/// Deviation rates of the roughened-logit estimates a model produces over a
/// dataset.
pub fn eval_deviation(
    model: &impl Predictor,
    data: &Dataset,
    level: &SmoothingLevel,
    variant: MsorVariant,
) -> Result<DeviationReport> {
    let mut estimates = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let logits = LogitVector::new(model.logits(data.row(i)))?;
        estimates.push(rlogit_probs(&logits, level)?);
    }
    deviation_metrics_with(&estimates, variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::dataset::Dataset;

    #[test]
    fn sob_values() {
        assert_eq!(eval_sob(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(eval_sob(&[4.0, 6.0], &[1.0, 2.0]), 5.0);
        let a = [0.3, -1.2, 2.0];
        let b = [1.0, 0.5, -0.25];
        let brute: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert_eq!(eval_sob(&a, &b), brute);
    }

    fn fixture() -> Dataset {
        // 100 rows: x2 > 0 labeled 1, else 2, with 10 flipped rows
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..100 {
            let x2 = if i < 50 { 1.0 } else { -1.0 };
            xs.extend_from_slice(&[1.0, x2]);
            let mut y = if x2 > 0.0 { 1 } else { 2 };
            if i % 10 == 0 {
                y = 3 - y;
            }
            ys.push(y);
        }
        Dataset::new(xs, ys, 2, 2).unwrap()
    }

    #[test]
    fn ttr_matches_hand_count() {
        let data = fixture();
        // the margin model sign(x2) labels by x2, so exactly the 10 flipped
        // rows are misclassified
        let model = LinearModel {
            beta: vec![0.0, 5.0],
        };
        let ttr = eval_ttr(&model, &data, &LossSpec::Lr).unwrap();
        assert_eq!(ttr, 0.1);
    }

    #[test]
    fn constant_classifier_on_balanced_set() {
        let data = fixture();
        let model = LinearModel {
            beta: vec![10.0, 0.0],
        };
        let ttr = eval_ttr(&model, &data, &LossSpec::Lr).unwrap();
        assert_eq!(ttr, 0.5);
    }

    #[test]
    fn tsr_is_mean_multiclass_loss() {
        let data = fixture();
        let model = LinearModel {
            beta: vec![0.2, 1.0],
        };
        let tsr = eval_tsr(&model, &data, &LossSpec::Lr).unwrap();
        let mut brute = 0.0;
        for i in 0..data.len() {
            let logits = model.logits(data.row(i));
            brute += multiclass_loss(&LossSpec::Lr, &logits, data.label(i)).unwrap();
        }
        assert!((tsr - brute / 100.0).abs() < 1e-15);
    }
}
