//! Large-sample covariance of the empirical risk minimizer for binary linear
//! models: the score-covariance and Hessian matrices, the sandwich covariance
//! `C = B⁻¹AB⁻¹`, and the efficiency ratio relative to plain logistic
//! regression.
//!
//! The integrands drop scalar factors of `(1-α)` that cancel inside the
//! sandwich, so the matrices agree with the conventional tabulated forms.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::losses::{sigmoid, LossSpec};
use crate::quadrature::{CovariateMeasure, QuadratureSpec};

/// The parameter vector of the data-generating linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueParameter {
    beta: Vec<f64>,
}

impl TrueParameter {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidParameter("empty parameter vector".into()));
        }
        if let Some(&bad) = beta.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "parameter components must be finite, got {bad}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn components(&self) -> &[f64] {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }
}

/// Everything the efficiency analysis produces for one method and parameter.
#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// `trace(C)`, the large-sample mean squared error scale.
    pub amse: f64,
    /// `trace(C_LR) / trace(C)` under the same measure and parameter.
    pub are_vs_lr: f64,
}

// Per-point integrand weights for the score covariance and the Hessian.
fn ab_weights(spec: &LossSpec, p: f64) -> Result<(f64, f64)> {
    let q = 1.0 - p;
    Ok(match spec {
        LossSpec::Lr => (p * q, p * q),
        LossSpec::Mlslr(level) => {
            // Levels above one coincide with their mirror below one.
            let alpha = if level.alpha() > 1.0 {
                2.0 - level.alpha()
            } else {
                level.alpha()
            };
            let sp = p - alpha * (p - 0.5);
            let sq = 1.0 - p + alpha * (p - 0.5);
            let pq = p * q;
            (pq * pq * pq / (sp * sp * sq * sq), pq * pq / (sp * sq))
        }
        LossSpec::Lsqlr => {
            let pq = p * q;
            (pq * pq * pq, pq * pq)
        }
        LossSpec::Lslr(_) => {
            return Err(Error::UnsupportedLoss(
                "smoothed-target regression estimates a different parameter under this model, \
                 so its efficiency is not comparable here"
                    .into(),
            ))
        }
    })
}

fn check_dims(spec: &LossSpec, beta: &TrueParameter, measure: &CovariateMeasure) -> Result<()> {
    if beta.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: beta.dim(),
        });
    }
    if let Some(level) = spec.level() {
        if level.k() != 2 {
            return Err(Error::UnsupportedLoss(format!(
                "efficiency analysis is binary only, got K = {}",
                level.k()
            )));
        }
    }
    Ok(())
}

/// Score-covariance matrix `A` and Hessian matrix `B` for the given family at
/// the true parameter, integrated over the covariate measure.
pub fn ab_matrices(
    spec: &LossSpec,
    beta: &TrueParameter,
    measure: &CovariateMeasure,
    quad: &QuadratureSpec,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dims(spec, beta, measure)?;
    // Surface family errors before touching the grid.
    ab_weights(spec, 0.5)?;
    let d = beta.dim();
    let mut a = DMatrix::zeros(d, d);
    let mut b = DMatrix::zeros(d, d);
    measure.for_each_node(quad, |x, weight| {
        let v: f64 = beta
            .components()
            .iter()
            .zip(x)
            .map(|(bi, xi)| bi * xi)
            .sum();
        let p = sigmoid(v);
        let (wa, wb) = ab_weights(spec, p).expect("family validated above");
        // accumulate the upper triangle of weight * w(p) * x xᵀ
        for i in 0..d {
            for j in i..d {
                let xx = weight * x[i] * x[j];
                a[(i, j)] += wa * xx;
                b[(i, j)] += wb * xx;
            }
        }
    })?;
    for i in 0..d {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
            b[(i, j)] = b[(j, i)];
        }
    }
    Ok((a, b))
}

/// Condition number estimate from the extreme eigenvalues of a symmetric matrix.
fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eigs = m.clone().symmetric_eigenvalues();
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// The sandwich covariance `C = B⁻¹AB⁻¹` via two symmetric positive definite
/// solves, plus its trace. Ill-conditioned `B` is reported, never regularized.
pub fn sandwich(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let cond = condition_number(b);
    if cond > 1e12 {
        eprintln!("warning: Hessian matrix condition number {cond:.3e} exceeds 1e12");
    }
    let chol = Cholesky::new(b.clone()).ok_or_else(|| {
        Error::SingularMatrix(
            "Hessian matrix is not positive definite; the covariate measure or parameter \
             is degenerate"
                .into(),
        )
    })?;
    // C = B⁻¹ A B⁻¹, built from solves only
    let left = chol.solve(a);
    let c = chol.solve(&left.transpose()).transpose();
    let amse = c.trace();
    Ok((c, amse))
}

/// Full report for one family: matrices, trace, and the efficiency ratio
/// against plain logistic regression under the same measure and parameter.
pub fn report(
    spec: &LossSpec,
    beta: &TrueParameter,
    measure: &CovariateMeasure,
    quad: &QuadratureSpec,
) -> Result<AsymptoticReport> {
    let (a, b) = ab_matrices(spec, beta, measure, quad)?;
    let (c, amse) = sandwich(&a, &b)?;
    let (a_lr, b_lr) = ab_matrices(&LossSpec::Lr, beta, measure, quad)?;
    let (_, amse_lr) = sandwich(&a_lr, &b_lr)?;
    Ok(AsymptoticReport {
        a,
        b,
        c,
        amse,
        are_vs_lr: amse_lr / amse,
    })
}

/// `trace(C_LR) / trace(C_spec)`: one when `spec` is plain logistic
/// regression, below one when the family pays an efficiency price.
pub fn are(
    spec: &LossSpec,
    beta: &TrueParameter,
    measure: &CovariateMeasure,
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(report(spec, beta, measure, quad)?.are_vs_lr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::SmoothingLevel;

    fn mls(alpha: f64) -> LossSpec {
        LossSpec::Mlslr(SmoothingLevel::new(alpha, 2).unwrap())
    }

    #[test]
    fn lr_at_origin_is_quarter_identity() {
        let beta = TrueParameter::new(vec![0.0, 0.0]).unwrap();
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        let (a, b) = ab_matrices(&LossSpec::Lr, &beta, &measure, &quad).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 0.25 } else { 0.0 };
                assert!((a[(i, j)] - expect).abs() < 1e-12);
                assert!((b[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mls_at_zero_level_matches_lr() {
        let beta = TrueParameter::new(vec![1.0, 2.0]).unwrap();
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        let (a0, b0) = ab_matrices(&mls(0.0), &beta, &measure, &quad).unwrap();
        let (a, b) = ab_matrices(&LossSpec::Lr, &beta, &measure, &quad).unwrap();
        assert!((&a0 - &a).abs().max() < 1e-10);
        assert!((&b0 - &b).abs().max() < 1e-10);
    }

    #[test]
    fn lsq_at_origin_closed_form() {
        let beta = TrueParameter::new(vec![0.0, 0.0]).unwrap();
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        let (a, b) = ab_matrices(&LossSpec::Lsqlr, &beta, &measure, &quad).unwrap();
        for i in 0..2 {
            let ea = 1.0 / 64.0;
            let eb = 1.0 / 16.0;
            assert!((a[(i, i)] - ea).abs() < 1e-12);
            assert!((b[(i, i)] - eb).abs() < 1e-12);
        }
    }

    #[test]
    fn lslr_is_rejected() {
        let beta = TrueParameter::new(vec![0.0, 1.0]).unwrap();
        let spec = LossSpec::Lslr(SmoothingLevel::new(0.4, 2).unwrap());
        let err = ab_matrices(
            &spec,
            &beta,
            &CovariateMeasure::intercept_normal(),
            &QuadratureSpec::default(),
        );
        assert!(matches!(err, Err(Error::UnsupportedLoss(_))));
    }

    #[test]
    fn sandwich_collapses_when_a_equals_b() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.5]);
        let (c, amse) = sandwich(&b, &b).unwrap();
        let binv = b.try_inverse().unwrap();
        assert!((&c - &binv).abs().max() < 1e-12);
        assert!((amse - binv.trace()).abs() < 1e-12);

        let id = DMatrix::identity(3, 3);
        let (c, amse) = sandwich(&id, &id).unwrap();
        assert!((&c - &DMatrix::identity(3, 3)).abs().max() < 1e-14);
        assert!((amse - 3.0).abs() < 1e-14);
    }

    // 3x3 inverse by cofactor expansion, independent of the solver path.
    fn inv3(m: &DMatrix<f64>) -> DMatrix<f64> {
        let g = |i: usize, j: usize| m[(i, j)];
        let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
            - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
        let mut out = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let r = [(i + 1) % 3, (i + 2) % 3];
                let c = [(j + 1) % 3, (j + 2) % 3];
                // adjugate entry (j, i)
                out[(j, i)] = (g(r[0], c[0]) * g(r[1], c[1]) - g(r[0], c[1]) * g(r[1], c[0])) / det;
            }
        }
        out
    }

    #[test]
    fn sandwich_matches_dense_inverse_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            // random SPD via M Mᵀ + I
            let make = |rng: &mut rand_chacha::ChaCha8Rng| {
                let m = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
                &m * m.transpose() + DMatrix::identity(3, 3)
            };
            let a = make(&mut rng);
            let b = make(&mut rng);
            let (c, _) = sandwich(&a, &b).unwrap();
            let binv = inv3(&b);
            let oracle = &binv * &a * &binv;
            assert!((&c - &oracle).abs().max() < 1e-10);
        }
    }

    #[test]
    fn sandwich_rejects_singular_hessian() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(sandwich(&a, &b), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn are_reference_entries() {
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        let b01 = TrueParameter::new(vec![0.0, 1.0]).unwrap();
        let got = are(&mls(0.2), &b01, &measure, &quad).unwrap();
        assert!((got - 0.9815).abs() < 0.002, "got {got}");

        let b24 = TrueParameter::new(vec![2.0, 4.0]).unwrap();
        let got = are(&LossSpec::Lsqlr, &b24, &measure, &quad).unwrap();
        assert!((got - 0.6277).abs() < 0.002, "got {got}");
    }

    #[test]
    fn are_is_one_without_signal_coordinate() {
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        for b1 in [0.0, 1.0, 2.0] {
            let beta = TrueParameter::new(vec![b1, 0.0]).unwrap();
            for spec in [mls(0.3), mls(0.8), LossSpec::Lsqlr] {
                let got = are(&spec, &beta, &measure, &quad).unwrap();
                assert!((got - 1.0).abs() < 1e-6, "beta1={b1} {spec}: {got}");
            }
        }
    }

    #[test]
    fn mirrored_levels_share_matrices() {
        let beta = TrueParameter::new(vec![1.0, 2.0]).unwrap();
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        for alpha in [0.2, 0.5, 0.8] {
            let (a_lo, b_lo) = ab_matrices(&mls(alpha), &beta, &measure, &quad).unwrap();
            let (a_hi, b_hi) = ab_matrices(&mls(2.0 - alpha), &beta, &measure, &quad).unwrap();
            assert!((&a_lo - &a_hi).abs().max() < 1e-10);
            assert!((&b_lo - &b_hi).abs().max() < 1e-10);
        }
    }
}
