//! Surrogate losses for the four regression families and the bounded
//! transformations that robustify the logistic loss.
//!
//! Binary losses use the margin convention `φ(v, y) = φ(y·v)` with labels in
//! `{+1, -1}`; multiclass losses act on logit vectors with one-hot targets.
//! The least-squares family is kept as its own closed form rather than as a
//! near-one smoothing level, which would cancel catastrophically.

use crate::error::{Error, Result};
use crate::smoothing::SmoothingLevel;

/// Which surrogate family an estimator minimizes.
///
/// The smoothed-target and smoothed-loss families carry their level; the
/// plain logistic family behaves as the zero level of both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    /// Plain logistic regression.
    Lr,
    /// Logistic regression with smoothed targets (smeared one-hot, plain log-loss).
    Lslr(SmoothingLevel),
    /// Smoothed loss with the plain logit model.
    Mlslr(SmoothingLevel),
    /// Least-squares logistic regression (Savage loss).
    Lsqlr,
}

impl LossSpec {
    pub fn level(&self) -> Option<&SmoothingLevel> {
        match self {
            LossSpec::Lslr(l) | LossSpec::Mlslr(l) => Some(l),
            _ => None,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.level().map_or(0.0, |l| l.alpha())
    }

    /// Short lowercase name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Lr => "lr",
            LossSpec::Lslr(_) => "lslr",
            LossSpec::Mlslr(_) => "mlslr",
            LossSpec::Lsqlr => "lsqlr",
        }
    }
}

impl std::fmt::Display for LossSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossSpec::Lr => write!(f, "LR"),
            LossSpec::Lslr(l) => write!(f, "LSLR(alpha={})", l.alpha()),
            LossSpec::Mlslr(l) => write!(f, "MLSLR(alpha={})", l.alpha()),
            LossSpec::Lsqlr => write!(f, "LSQLR"),
        }
    }
}

/// One-hot encoding of a 1-based class label.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHot {
    y: usize,
    k: usize,
}

impl OneHot {
    pub fn new(y: usize, k: usize) -> Result<Self> {
        if y == 0 || y > k {
            return Err(Error::InvalidParameter(format!(
                "label {y} outside 1..={k}"
            )));
        }
        Ok(Self { y, k })
    }

    pub fn label(&self) -> usize {
        self.y
    }

    pub fn component(&self, k: usize) -> f64 {
        if k + 1 == self.y {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.k).map(|k| self.component(k)).collect()
    }
}

/// `1 / (1 + e^{-v})`, stable across the whole f64 range.
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^{-v})`, the logistic loss, stable for |v| up to f64 limits.
fn log1p_exp_neg(v: f64) -> f64 {
    if v >= 0.0 {
        (-v).exp().ln_1p()
    } else {
        -v + v.exp().ln_1p()
    }
}

/// Binary surrogate loss at margin `v`.
pub fn binary_loss(spec: &LossSpec, v: f64) -> f64 {
    match spec {
        LossSpec::Lr => log1p_exp_neg(v),
        LossSpec::Lslr(l) => {
            let a = l.alpha();
            (1.0 - a / 2.0) * log1p_exp_neg(v) + (a / 2.0) * log1p_exp_neg(-v)
        }
        LossSpec::Mlslr(l) => {
            let a = l.alpha();
            if a == 0.0 {
                return log1p_exp_neg(v);
            }
            let sp = (1.0 - a) * sigmoid(v) + a / 2.0;
            let sq = (1.0 - a) * sigmoid(-v) + a / 2.0;
            // Coefficients vanish exactly where the argument can reach zero.
            let mut out = 0.0;
            if 1.0 - a / 2.0 != 0.0 {
                out -= (1.0 - a / 2.0) * sp.ln();
            }
            if a != 0.0 {
                out -= (a / 2.0) * sq.ln();
            }
            out
        }
        LossSpec::Lsqlr => {
            let s = sigmoid(-v);
            0.5 * s * s
        }
    }
}

/// Analytic derivative of [`binary_loss`] with respect to the margin.
pub fn binary_loss_grad(spec: &LossSpec, v: f64) -> f64 {
    let p = sigmoid(v);
    let q = sigmoid(-v);
    match spec {
        LossSpec::Lr => -q,
        LossSpec::Lslr(l) => {
            let a = l.alpha();
            -(1.0 - a / 2.0) * q + (a / 2.0) * p
        }
        LossSpec::Mlslr(l) => {
            let a = l.alpha();
            if a == 0.0 {
                return -q;
            }
            let sp = (1.0 - a) * p + a / 2.0;
            let sq = (1.0 - a) * q + a / 2.0;
            -(1.0 - a) * (1.0 - a) * p * q * q / (sp * sq)
        }
        LossSpec::Lsqlr => -p * q * q,
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Softmax with max-shift; always sums to one for finite logits.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|&x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn check_multiclass(spec: &LossSpec, v: &[f64], y: usize) -> Result<usize> {
    let k = v.len();
    if k < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: k });
    }
    if let Some(l) = spec.level() {
        if l.k() != k {
            return Err(Error::DimensionMismatch {
                expected: l.k(),
                got: k,
            });
        }
    }
    if y == 0 || y > k {
        return Err(Error::InvalidParameter(format!("label {y} outside 1..={k}")));
    }
    Ok(k)
}

/// Multiclass surrogate loss over logits `v` for 1-based label `y`.
pub fn multiclass_loss(spec: &LossSpec, v: &[f64], y: usize) -> Result<f64> {
    let k = check_multiclass(spec, v, y)?;
    let kf = k as f64;
    Ok(match spec {
        LossSpec::Lr => log_sum_exp(v) - v[y - 1],
        LossSpec::Lslr(l) => {
            let a = l.alpha();
            // Smoothed-target weights sum to one, so the log-partition term
            // appears exactly once.
            let mut out = log_sum_exp(v);
            for (j, &vj) in v.iter().enumerate() {
                let t = if j + 1 == y { 1.0 } else { 0.0 };
                out -= ((1.0 - a) * t + a / kf) * vj;
            }
            out
        }
        LossSpec::Mlslr(l) => {
            let a = l.alpha();
            if a == 0.0 {
                return multiclass_loss(&LossSpec::Lr, v, y);
            }
            let pi = softmax(v);
            let mut out = 0.0;
            for (j, &pj) in pi.iter().enumerate() {
                let t = if j + 1 == y { 1.0 } else { 0.0 };
                let c = (1.0 - a) * t + a / kf;
                let arg = (1.0 - a) * pj + a / kf;
                if c != 0.0 {
                    if arg <= 0.0 {
                        return Err(Error::LogDomain {
                            index: j,
                            value: arg,
                        });
                    }
                    out -= c * arg.ln();
                }
            }
            out
        }
        LossSpec::Lsqlr => {
            let pi = softmax(v);
            pi.iter()
                .enumerate()
                .map(|(j, &pj)| {
                    let t = if j + 1 == y { 1.0 } else { 0.0 };
                    (t - pj) * (t - pj)
                })
                .sum()
        }
    })
}

/// Analytic gradient of [`multiclass_loss`] with respect to the logits.
pub fn multiclass_loss_grad(spec: &LossSpec, v: &[f64], y: usize) -> Result<Vec<f64>> {
    let k = check_multiclass(spec, v, y)?;
    let kf = k as f64;
    let pi = softmax(v);
    Ok(match spec {
        LossSpec::Lr => (0..k)
            .map(|j| pi[j] - if j + 1 == y { 1.0 } else { 0.0 })
            .collect(),
        LossSpec::Lslr(l) => {
            let a = l.alpha();
            (0..k)
                .map(|j| {
                    let t = if j + 1 == y { 1.0 } else { 0.0 };
                    pi[j] - ((1.0 - a) * t + a / kf)
                })
                .collect()
        }
        LossSpec::Mlslr(l) => {
            let a = l.alpha();
            if a == 0.0 {
                return multiclass_loss_grad(&LossSpec::Lr, v, y);
            }
            let w: Vec<f64> = (0..k)
                .map(|j| {
                    let t = if j + 1 == y { 1.0 } else { 0.0 };
                    let c = (1.0 - a) * t + a / kf;
                    c * (1.0 - a) * pi[j] / ((1.0 - a) * pi[j] + a / kf)
                })
                .collect();
            let wsum: f64 = w.iter().sum();
            (0..k).map(|j| -w[j] + pi[j] * wsum).collect()
        }
        LossSpec::Lsqlr => {
            let resid: Vec<f64> = (0..k)
                .map(|j| {
                    let t = if j + 1 == y { 1.0 } else { 0.0 };
                    t - pi[j]
                })
                .collect();
            let inner: f64 = resid.iter().zip(&pi).map(|(r, p)| r * p).sum();
            (0..k).map(|j| -2.0 * pi[j] * (resid[j] - inner)).collect()
        }
    })
}

/// A bounded (or Huber-type) transformation applied to the logistic loss to
/// obtain a robust estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSpec {
    /// Huber-type split: identity below `c`, square-root growth above.
    Pregibon { c: f64 },
    /// Bounded transformation with a consistency correction term.
    BiancoYohai { c: f64 },
    /// Variant with an exponentially damped first part.
    CrouxHaesbroeck { c: f64 },
    /// The smoothed-loss family seen as a transformation of the logistic loss.
    Mls { level: SmoothingLevel },
    /// The least-squares family seen as a transformation of the logistic loss.
    Lsq,
}

impl RhoSpec {
    pub fn pregibon(c: f64) -> Result<Self> {
        Self::check_c(c)?;
        Ok(RhoSpec::Pregibon { c })
    }

    pub fn bianco_yohai(c: f64) -> Result<Self> {
        Self::check_c(c)?;
        Ok(RhoSpec::BiancoYohai { c })
    }

    pub fn croux_haesbroeck(c: f64) -> Result<Self> {
        Self::check_c(c)?;
        Ok(RhoSpec::CrouxHaesbroeck { c })
    }

    pub fn mls(alpha: f64) -> Result<Self> {
        Ok(RhoSpec::Mls {
            level: SmoothingLevel::new(alpha, 2)?,
        })
    }

    fn check_c(c: f64) -> Result<()> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transformation constant must be positive, got {c}"
            )));
        }
        Ok(())
    }

    /// Value at zero, in closed form.
    pub fn at_zero(&self) -> f64 {
        match self {
            RhoSpec::Pregibon { .. } | RhoSpec::Lsq => 0.0,
            RhoSpec::BiancoYohai { c } => zeta2(1.0, *c),
            RhoSpec::CrouxHaesbroeck { c } => eta_damped(1.0, *c),
            RhoSpec::Mls { level } => {
                let a = level.alpha();
                -(1.0 - a / 2.0) * (1.0 - a / 2.0).ln() - (a / 2.0) * (a / 2.0).ln()
            }
        }
    }

    /// Limit as the argument grows without bound, when it exists.
    pub fn sup(&self) -> Option<f64> {
        match self {
            RhoSpec::Pregibon { .. } => None,
            RhoSpec::BiancoYohai { c } => Some(c / 2.0 + zeta2(1.0, *c)),
            RhoSpec::CrouxHaesbroeck { c } => {
                let rc = c.sqrt();
                Some((-rc).exp() * (2.0 * (1.0 + rc) + c) + eta_damped(1.0, *c))
            }
            RhoSpec::Mls { level } => {
                let a = level.alpha();
                Some(-(1.0 - a / 2.0) * (a / 2.0).ln() - (a / 2.0) * (1.0 - a / 2.0).ln())
            }
            RhoSpec::Lsq => Some(0.5),
        }
    }
}

// Quadratically flattened first part of the Bianco-Yohai construction.
fn zeta1(u: f64, c: f64) -> f64 {
    if u <= c {
        u - u * u / (2.0 * c)
    } else {
        c / 2.0
    }
}

// Consistency correction; argument lives in [0, 1].
fn zeta2(u: f64, c: f64) -> f64 {
    let floor = (-c).exp();
    if u < floor {
        0.0
    } else {
        u - floor + (floor * (c + 1.0) + u * (u.ln() - 1.0)) / c
    }
}

// Damped first part of the Croux-Haesbroeck variant; its derivative is
// exp(-sqrt(max(u, c))).
fn zeta1_damped(u: f64, c: f64) -> f64 {
    let rc = c.sqrt();
    if u <= c {
        u * (-rc).exp()
    } else {
        let ru = u.sqrt();
        -2.0 * (-ru).exp() * (1.0 + ru) + (-rc).exp() * (2.0 * (1.0 + rc) + c)
    }
}

// Consistency correction matched to the damped first part: the integral of
// its derivative composed with -ln, in closed form through erfc.
fn eta_damped(w: f64, c: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let floor = (-c).exp();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    // tail integral of 2 s exp(-s^2 - s) from a to infinity
    let tail = |a: f64| {
        (-a * a - a).exp() - 0.25f64.exp() * (sqrt_pi / 2.0) * statrs::function::erf::erfc(a + 0.5)
    };
    if w < floor {
        tail((-w.ln()).sqrt())
    } else {
        tail(c.sqrt()) + (w - floor) * (-c.sqrt()).exp()
    }
}

/// Evaluates the named transformation at `u ≥ 0`.
pub fn rho(spec: &RhoSpec, u: f64) -> Result<f64> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "transformation argument must be nonnegative, got {u}"
        )));
    }
    Ok(match spec {
        RhoSpec::Pregibon { c } => {
            if u <= *c {
                u
            } else {
                2.0 * (c * u).sqrt() - c
            }
        }
        RhoSpec::BiancoYohai { c } => {
            let e = (-u).exp();
            zeta1(u, *c) + zeta2(e, *c) + zeta2(1.0 - e, *c)
        }
        RhoSpec::CrouxHaesbroeck { c } => {
            let e = (-u).exp();
            zeta1_damped(u, *c) + eta_damped(e, *c) + eta_damped(1.0 - e, *c)
        }
        RhoSpec::Mls { level } => {
            let a = level.alpha();
            let e = (-u).exp();
            -(1.0 - a / 2.0) * ((1.0 - a) * e + a / 2.0).ln()
                - (a / 2.0) * ((1.0 - a) * (1.0 - e) + a / 2.0).ln()
        }
        RhoSpec::Lsq => {
            let t = -(-u).exp_m1();
            0.5 * t * t
        }
    })
}

/// `{ρ(u) - ρ(0)} / {sup ρ - ρ(0)}`, mapping a bounded transformation onto `[0, 1]`.
pub fn rho_rescaled(spec: &RhoSpec, u: f64) -> Result<f64> {
    let sup = spec.sup().ok_or_else(|| {
        Error::InvalidParameter("rescaling is undefined for unbounded transformations".into())
    })?;
    let zero = spec.at_zero();
    Ok((rho(spec, u)? - zero) / (sup - zero))
}
