//! Probability estimators over logits, labeling rules, and the metrics that
//! quantify how far roughened-logit estimates stray from the simplex.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::losses::{softmax, LossSpec};
use crate::smoothing::{unsmooth, ExtendedProbVector, SimplexVector, SmoothingLevel, COMPONENT_TOL};

/// A finite logit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector {
    g: Vec<f64>,
}

impl LogitVector {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        if g.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: g.len(),
            });
        }
        for (i, &v) in g.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidVector {
                    kind: "logit",
                    index: i,
                    value: v,
                });
            }
        }
        Ok(Self { g })
    }

    pub fn components(&self) -> &[f64] {
        &self.g
    }
}

/// Task loss matrix: `cost(j, k)` is the price of predicting `j` when the
/// truth is `k`. Labels are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskLossMatrix {
    k: usize,
    costs: Vec<f64>, // row-major k x k
}

impl TaskLossMatrix {
    pub fn new(k: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                got: costs.len(),
            });
        }
        if let Some(&bad) = costs.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "task loss entries must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self { k, costs })
    }

    /// Zero on the diagonal, one elsewhere.
    pub fn zero_one(k: usize) -> Self {
        let costs = (0..k * k)
            .map(|i| if i / k == i % k { 0.0 } else { 1.0 })
            .collect();
        Self { k, costs }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cost(&self, predicted: usize, truth: usize) -> f64 {
        self.costs[(predicted - 1) * self.k + (truth - 1)]
    }
}

/// Softmax of the logits; a point on the simplex.
pub fn logit_probs(g: &LogitVector) -> SimplexVector {
    SimplexVector::new(softmax(g.components())).expect("softmax output is a probability vector")
}

/// Inverse smoothing map applied to the softmax: sums to one but may leave
/// `[0, 1]` while staying inside [`crate::smoothing::rlogit_range`].
pub fn rlogit_probs(g: &LogitVector, level: &SmoothingLevel) -> Result<ExtendedProbVector> {
    let probs = softmax(g.components());
    let q = unsmooth(&probs, level)?;
    ExtendedProbVector::new(q, level)
}

/// Minimizes expected task cost over labels; ties go to the smallest label.
/// Accepts any finite probability-like weights, including roughened-logit
/// estimates with components outside `[0, 1]`.
pub fn label(probs: &[f64], costs: &TaskLossMatrix) -> Result<usize> {
    if probs.len() != costs.k() {
        return Err(Error::DimensionMismatch {
            expected: costs.k(),
            got: probs.len(),
        });
    }
    let mut best = 1usize;
    let mut best_cost = f64::INFINITY;
    for l in 1..=costs.k() {
        let expected: f64 = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| p * costs.cost(l, k + 1))
            .sum();
        if expected < best_cost {
            best_cost = expected;
            best = l;
        }
    }
    Ok(best)
}

/// Zero-one labeling straight from logits: the largest logit wins for every
/// family except smoothed-target regression above level one, where the
/// roughened link reverses the ordering and the smallest logit wins.
pub fn label_zero_one_from_logits(g: &[f64], spec: &LossSpec) -> usize {
    let argmin = matches!(spec, LossSpec::Lslr(l) if l.alpha() > 1.0);
    let mut best = 0usize;
    for (j, &v) in g.iter().enumerate() {
        let better = if argmin {
            v < g[best]
        } else {
            v > g[best]
        };
        if better {
            best = j;
        }
    }
    best + 1
}

/// Which form of the mean residual size to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MsorVariant {
    /// The printed formula, whose leading factor is the outlier component rate.
    #[default]
    AsPrinted,
    /// Mean residual conditional on the components that left `[0, 1]`.
    ConditionalMean,
}

/// Rates and magnitude of roughened-logit estimates escaping the simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    /// Fraction of estimate vectors not in the simplex.
    pub opder: f64,
    /// Fraction of all components outside `[0, 1]`.
    pub oper: f64,
    /// Mean size of residual, per the configured variant.
    pub msor: f64,
}

/// Computes the deviation rates over a batch of estimates with the printed
/// residual formula.
pub fn deviation_metrics(estimates: &[ExtendedProbVector]) -> Result<DeviationReport> {
    deviation_metrics_with(estimates, MsorVariant::AsPrinted)
}

/// [`deviation_metrics`] with an explicit residual variant.
pub fn deviation_metrics_with(
    estimates: &[ExtendedProbVector],
    variant: MsorVariant,
) -> Result<DeviationReport> {
    if estimates.is_empty() {
        return Err(Error::Degenerate("deviation metrics need at least one estimate"));
    }
    let k = estimates[0].len();
    if estimates.iter().any(|e| e.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: estimates.iter().map(|e| e.len()).find(|&l| l != k).unwrap(),
        });
    }
    let n = estimates.len();
    let in_unit = |v: f64| (-COMPONENT_TOL..=1.0 + COMPONENT_TOL).contains(&v);
    let (outlier_vecs, outlier_comps, residual) = estimates
        .par_iter()
        .map(|e| {
            let mut comps = 0usize;
            let mut res = 0.0;
            for &v in e.components() {
                if !in_unit(v) {
                    comps += 1;
                }
                res += ((v - 0.5).abs() - 0.5).max(0.0);
            }
            ((comps > 0) as usize, comps, res)
        })
        .reduce(
            || (0, 0, 0.0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );
    let total = (n * k) as f64;
    let oper = outlier_comps as f64 / total;
    let msor = match variant {
        MsorVariant::AsPrinted => oper / total * residual,
        MsorVariant::ConditionalMean => {
            if outlier_comps == 0 {
                0.0
            } else {
                residual / outlier_comps as f64
            }
        }
    };
    Ok(DeviationReport {
        opder: outlier_vecs as f64 / n as f64,
        oper,
        msor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::rlogit_range;

    fn level(alpha: f64, k: usize) -> SmoothingLevel {
        SmoothingLevel::new(alpha, k).unwrap()
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let g = LogitVector::new(vec![0.0; 4]).unwrap();
        for &p in logit_probs(&g).components() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_saturates() {
        let g = LogitVector::new(vec![40.0, 0.0]).unwrap();
        let p = logit_probs(&g);
        assert!((p.components()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_translation_invariance() {
        // dyadic inputs and shift keep the max-shifted exponents bit-identical
        let g = LogitVector::new(vec![0.25, -1.5, 2.0]).unwrap();
        let shifted = LogitVector::new(vec![4.25, 2.5, 6.0]).unwrap();
        assert_eq!(
            logit_probs(&g).components(),
            logit_probs(&shifted).components()
        );
    }

    #[test]
    fn rlogit_fixes_uniform_and_reduces_at_zero() {
        let g = LogitVector::new(vec![1.7, 1.7, 1.7]).unwrap();
        let q = rlogit_probs(&g, &level(0.6, 3)).unwrap();
        for &v in q.components() {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        let g = LogitVector::new(vec![0.4, -0.9]).unwrap();
        let q = rlogit_probs(&g, &level(0.0, 2)).unwrap();
        assert_eq!(q.components(), logit_probs(&g).components());
    }

    #[test]
    fn rlogit_reaches_range_endpoints() {
        let l = level(0.2, 2);
        let g = LogitVector::new(vec![40.0, 0.0]).unwrap();
        let q = rlogit_probs(&g, &l).unwrap();
        let (lo, hi) = rlogit_range(&l);
        assert!((q.components()[0] - hi).abs() < 1e-10);
        assert!((q.components()[1] - lo).abs() < 1e-10);
    }

    #[test]
    fn zero_one_label_is_argmax() {
        let zo = TaskLossMatrix::zero_one(3);
        assert_eq!(label(&[0.2, 0.5, 0.3], &zo).unwrap(), 2);
        // uniform ties break to the smallest label
        assert_eq!(label(&[0.25; 4], &TaskLossMatrix::zero_one(4)).unwrap(), 1);
    }

    #[test]
    fn cost_sensitive_label_matches_brute_force() {
        // cost(1,2) = 10, cost(2,1) = 1
        let m = TaskLossMatrix::new(2, vec![0.0, 10.0, 1.0, 0.0]).unwrap();
        let probs = [0.3, 0.7];
        let cost1 = 0.3 * m.cost(1, 1) + 0.7 * m.cost(1, 2);
        let cost2 = 0.3 * m.cost(2, 1) + 0.7 * m.cost(2, 2);
        assert!(cost2 < cost1);
        assert_eq!(label(&probs, &m).unwrap(), 2);
    }

    #[test]
    fn label_invariant_under_positive_affine_rescale() {
        let zo = TaskLossMatrix::zero_one(3);
        let probs = [0.2, 0.5, 0.3];
        let rescaled: Vec<f64> = probs.iter().map(|p| 3.0 * p + 0.1).collect();
        assert_eq!(
            label(&probs, &zo).unwrap(),
            label(&rescaled, &zo).unwrap()
        );
    }

    #[test]
    fn logit_labeling_respects_family() {
        let g = [3.0, 1.0, 2.0];
        let lvl3 = level(0.2, 3);
        assert_eq!(label_zero_one_from_logits(&g, &LossSpec::Lslr(lvl3)), 1);
        assert_eq!(label_zero_one_from_logits(&g, &LossSpec::Lr), 1);
        assert_eq!(label_zero_one_from_logits(&g, &LossSpec::Lsqlr), 1);

        let g10: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let hi = level(10.0 / 9.0, 10);
        assert_eq!(label_zero_one_from_logits(&g10, &LossSpec::Lslr(hi)), 1);
        assert_eq!(label_zero_one_from_logits(&g10, &LossSpec::Mlslr(hi)), 10);
    }

    #[test]
    fn deviation_metrics_inside_simplex() {
        let l = level(0.3, 2);
        let ests: Vec<_> = (0..10)
            .map(|i| {
                let p = 0.05 + 0.09 * i as f64;
                ExtendedProbVector::new(vec![p, 1.0 - p], &l).unwrap()
            })
            .collect();
        let rep = deviation_metrics(&ests).unwrap();
        assert_eq!((rep.opder, rep.oper, rep.msor), (0.0, 0.0, 0.0));
    }

    #[test]
    fn deviation_metrics_single_outlier() {
        let l = level(0.2, 2);
        let e = ExtendedProbVector::new(vec![1.125, -0.125], &l).unwrap();
        let rep = deviation_metrics(&[e]).unwrap();
        assert_eq!(rep.opder, 1.0);
        assert_eq!(rep.oper, 1.0);
        assert!((rep.msor - 0.125).abs() < 1e-15);
    }

    #[test]
    fn deviation_metrics_empty_input() {
        assert!(deviation_metrics(&[]).is_err());
    }

    #[test]
    fn conditional_mean_variant() {
        let l = level(0.2, 2);
        let a = ExtendedProbVector::new(vec![1.125, -0.125], &l).unwrap();
        let b = ExtendedProbVector::new(vec![0.5, 0.5], &l).unwrap();
        let rep = deviation_metrics_with(&[a, b], MsorVariant::ConditionalMean).unwrap();
        assert_eq!(rep.opder, 0.5);
        assert_eq!(rep.oper, 0.5);
        assert!((rep.msor - 0.125).abs() < 1e-15);
    }
}
