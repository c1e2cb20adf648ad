//! The smoothing map `s_α(v) = (1-α)v + α/K`, its inverse, and the
//! KL / smoothed-KL / squared divergences built on it.
//!
//! The smoothed KL divergence compares two vectors after pushing both through
//! the smoothing map; at `α = 0` it reduces to the plain KL divergence. The
//! inverse map defines the roughened-logit range, whose endpoints are exposed
//! by [`rlogit_range`].

use crate::error::{Error, Result};

/// Tolerance for sum-to-one checks on probability-like vectors.
pub const SUM_TOL: f64 = 1e-10;
/// Tolerance for componentwise bound checks.
pub const COMPONENT_TOL: f64 = 1e-12;

/// A validated smoothing level `α` together with the class count `K`.
///
/// Admissible levels are `α ∈ [0, 1) ∪ (1, K/(K-1)]`; the smoothed KL
/// divergence is identically zero at `α = 1`, so that value is rejected at
/// construction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingLevel {
    alpha: f64,
    k: usize,
}

impl SmoothingLevel {
    pub fn new(alpha: f64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidSmoothingLevel {
                alpha,
                k,
                reason: "class count must be at least 2",
            });
        }
        let upper = k as f64 / (k as f64 - 1.0);
        let ok = alpha.is_finite()
            && ((0.0..1.0).contains(&alpha) || (alpha > 1.0 && alpha <= upper));
        if !ok {
            return Err(Error::InvalidSmoothingLevel {
                alpha,
                k,
                reason: "alpha must lie in [0, 1) or (1, K/(K-1)]",
            });
        }
        Ok(Self { alpha, k })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Applies the smoothing map to a single component.
    pub fn smooth_component(&self, v: f64) -> f64 {
        (1.0 - self.alpha) * v + self.alpha / self.k as f64
    }

    /// Applies the inverse map to a single component.
    pub fn unsmooth_component(&self, v: f64) -> f64 {
        (v - self.alpha / self.k as f64) / (1.0 - self.alpha)
    }

    /// The mirrored level `K - (K-1)α`, which maps `(1, K/(K-1)]` back into `[0, 1)`.
    pub fn mirrored(&self) -> Result<Self> {
        Self::new(self.k as f64 - (self.k as f64 - 1.0) * self.alpha, self.k)
    }
}

/// A probability vector: components in `[0, 1]`, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    p: Vec<f64>,
}

impl SimplexVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: p.len(),
            });
        }
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < -COMPONENT_TOL || v > 1.0 + COMPONENT_TOL {
                return Err(Error::InvalidVector {
                    kind: "simplex",
                    index: i,
                    value: v,
                });
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidVector {
                kind: "simplex",
                index: 0,
                value: sum,
            });
        }
        Ok(Self { p })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            p: vec![1.0 / k as f64; k],
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// A signed probability-like vector from the inverse smoothing map: it sums to
/// one, but components may leave `[0, 1]` as long as they stay inside the
/// roughened-logit range for the given level.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedProbVector {
    q: Vec<f64>,
}

impl ExtendedProbVector {
    pub fn new(q: Vec<f64>, level: &SmoothingLevel) -> Result<Self> {
        if q.len() != level.k() {
            return Err(Error::DimensionMismatch {
                expected: level.k(),
                got: q.len(),
            });
        }
        let (low, high) = rlogit_range(level);
        for (i, &v) in q.iter().enumerate() {
            if !v.is_finite() || v < low - SUM_TOL || v > high + SUM_TOL {
                return Err(Error::InvalidVector {
                    kind: "extended probability",
                    index: i,
                    value: v,
                });
            }
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidVector {
                kind: "extended probability",
                index: 0,
                value: sum,
            });
        }
        Ok(Self { q })
    }

    pub fn components(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Membership test for the probability simplex, at [`COMPONENT_TOL`].
    pub fn in_simplex(&self) -> bool {
        self.q
            .iter()
            .all(|&v| (-COMPONENT_TOL..=1.0 + COMPONENT_TOL).contains(&v))
    }
}

/// Which divergence to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceKind {
    /// Plain Kullback-Leibler divergence.
    Kl,
    /// Smoothed KL divergence at the carried level.
    Skl(SmoothingLevel),
    /// Squared Euclidean distance.
    Sq,
}

/// Applies the smoothing map componentwise.
pub fn smooth(p: &[f64], level: &SmoothingLevel) -> Result<Vec<f64>> {
    if p.len() != level.k() {
        return Err(Error::DimensionMismatch {
            expected: level.k(),
            got: p.len(),
        });
    }
    Ok(p.iter().map(|&v| level.smooth_component(v)).collect())
}

/// Applies the inverse smoothing map componentwise.
pub fn unsmooth(q: &[f64], level: &SmoothingLevel) -> Result<Vec<f64>> {
    if q.len() != level.k() {
        return Err(Error::DimensionMismatch {
            expected: level.k(),
            got: q.len(),
        });
    }
    Ok(q.iter().map(|&v| level.unsmooth_component(v)).collect())
}

/// Endpoints of the componentwise range of the inverse smoothing map on the
/// simplex, ordered ascending. The interval always covers `[0, 1]`.
pub fn rlogit_range(level: &SmoothingLevel) -> (f64, f64) {
    let (alpha, k) = (level.alpha(), level.k() as f64);
    let a = -alpha / (k * (1.0 - alpha));
    let b = (k - alpha) / (k * (1.0 - alpha));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn kl_terms(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut out = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < 0.0 {
            return Err(Error::LogDomain {
                index: i,
                value: pi,
            });
        }
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::LogDomain {
                    index: i,
                    value: qi,
                });
            }
            out += pi * (pi / qi).ln();
        }
        // p_i = 0 contributes nothing: 0 ln 0 = 0.
    }
    Ok(out)
}

/// Evaluates the chosen divergence between `p` and `q`, validating lengths and
/// log domains. Domain violations surface as errors, never as NaN.
pub fn divergence(kind: &DivergenceKind, p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    match kind {
        DivergenceKind::Kl => kl_terms(p, q),
        DivergenceKind::Skl(level) => {
            if p.len() != level.k() {
                return Err(Error::DimensionMismatch {
                    expected: level.k(),
                    got: p.len(),
                });
            }
            let sp: Vec<f64> = p.iter().map(|&v| level.smooth_component(v)).collect();
            let sq: Vec<f64> = q.iter().map(|&v| level.smooth_component(v)).collect();
            kl_terms(&sp, &sq)
        }
        DivergenceKind::Sq => Ok(p
            .iter()
            .zip(q)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()),
    }
}

/// [`divergence`] without domain validation, for hot loops whose inputs are
/// known valid. Invalid inputs yield NaN or infinities here.
pub fn divergence_unchecked(kind: &DivergenceKind, p: &[f64], q: &[f64]) -> f64 {
    match kind {
        DivergenceKind::Kl => p
            .iter()
            .zip(q)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &qi)| pi * (pi / qi).ln())
            .sum(),
        DivergenceKind::Skl(level) => p
            .iter()
            .zip(q)
            .map(|(&pi, &qi)| {
                let sp = level.smooth_component(pi);
                let sq = level.smooth_component(qi);
                if sp > 0.0 {
                    sp * (sp / sq).ln()
                } else {
                    0.0
                }
            })
            .sum(),
        DivergenceKind::Sq => p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).sum(),
    }
}

/// Splits `D_KL(s_α(p) ‖ q)` into a scaled KL term, a uniform-target term, and
/// a residual that does not depend on `q`.
///
/// The returned triple is `((1-α) D_KL(p‖q), α D_KL(1/K‖q), residual)` with
/// residual defined so that the three parts sum to `D_KL(s_α(p) ‖ q)`.
pub fn regularization_decomposition(
    p: &SimplexVector,
    q: &SimplexVector,
    level: &SmoothingLevel,
) -> Result<(f64, f64, f64)> {
    if level.alpha() >= 1.0 {
        return Err(Error::InvalidParameter(
            "decomposition requires alpha in [0, 1)".into(),
        ));
    }
    if p.len() != level.k() || q.len() != level.k() {
        return Err(Error::DimensionMismatch {
            expected: level.k(),
            got: p.len(),
        });
    }
    let alpha = level.alpha();
    let uniform = SimplexVector::uniform(level.k());
    let kl_pq = kl_terms(p.components(), q.components())?;
    let kl_uq = kl_terms(uniform.components(), q.components())?;
    let sp: Vec<f64> = p
        .components()
        .iter()
        .map(|&v| level.smooth_component(v))
        .collect();
    let total = kl_terms(&sp, q.components())?;
    let kl_term = (1.0 - alpha) * kl_pq;
    let uniform_term = alpha * kl_uq;
    Ok((kl_term, uniform_term, total - kl_term - uniform_term))
}

/// The scaled ratio `(2α / ((1-α)² K)) · D_SKL(p‖q) / ‖p-q‖²`, which tends to
/// one as `α → 1` for fixed `p ≠ q`.
pub fn skl_limit_ratio(p: &[f64], q: &[f64], level: &SmoothingLevel) -> Result<f64> {
    let alpha = level.alpha();
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::InvalidParameter(
            "limit ratio requires alpha in (0, 1)".into(),
        ));
    }
    let sq_dist = divergence(&DivergenceKind::Sq, p, q)?;
    if sq_dist == 0.0 {
        return Err(Error::Degenerate("limit ratio is undefined for p = q"));
    }
    let skl = divergence(&DivergenceKind::Skl(*level), p, q)?;
    let k = level.k() as f64;
    Ok(2.0 * alpha / ((1.0 - alpha) * (1.0 - alpha) * k) * skl / sq_dist)
}
