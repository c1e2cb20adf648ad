//! Gauss-Hermite quadrature and product-measure integration over covariate
//! distributions built from point masses and standard normal coordinates.

use crate::error::{Error, Result};

/// Node count for Gauss-Hermite rules; at least 10.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    nodes: usize,
}

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 10 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 10 nodes, got {nodes}"
            )));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes: 200 }
    }
}

/// Nodes and weights for `∫ f(t) e^{-t²} dt ≈ Σ w_i f(t_i)`.
///
/// Golub-Welsch: eigenvalues of the symmetric tridiagonal Jacobi matrix give
/// the nodes, squared first eigenvector components give the weights. Robust
/// at any node count, unlike Newton iteration from asymptotic guesses.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 quadrature nodes, got {n}"
        )));
    }
    let mut jacobi = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i - 1, i)] = b;
        jacobi[(i, i - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], sqrt_pi * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// One coordinate of a product covariate measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateMeasure {
    PointMass(f64),
    StandardNormal,
}

/// Product measure over covariate coordinates; each coordinate is either a
/// point mass or a standard normal.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMeasure {
    coords: Vec<CoordinateMeasure>,
}

impl CovariateMeasure {
    pub fn new(coords: Vec<CoordinateMeasure>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter(
                "covariate measure needs at least one coordinate".into(),
            ));
        }
        for c in &coords {
            if let CoordinateMeasure::PointMass(v) = c {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "point mass location must be finite, got {v}"
                    )));
                }
            }
        }
        Ok(Self { coords })
    }

    /// The two-coordinate measure with an intercept at one and one standard
    /// normal coordinate.
    pub fn intercept_normal() -> Self {
        Self {
            coords: vec![
                CoordinateMeasure::PointMass(1.0),
                CoordinateMeasure::StandardNormal,
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[CoordinateMeasure] {
        &self.coords
    }

    /// Visits every node of the tensor quadrature grid with its weight.
    /// Normal coordinates use Gauss-Hermite after the change of variable
    /// `x = √2 t`; point masses contribute a single unit-weight node.
    pub fn for_each_node<F>(&self, quad: &QuadratureSpec, mut f: F) -> Result<()>
    where
        F: FnMut(&[f64], f64),
    {
        let (t, w) = gauss_hermite(quad.nodes())?;
        let sqrt2 = std::f64::consts::SQRT_2;
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let per_coord: Vec<(Vec<f64>, Vec<f64>)> = self
            .coords
            .iter()
            .map(|c| match c {
                CoordinateMeasure::PointMass(v) => (vec![*v], vec![1.0]),
                CoordinateMeasure::StandardNormal => (
                    t.iter().map(|&ti| sqrt2 * ti).collect(),
                    w.iter().map(|&wi| wi * inv_sqrt_pi).collect(),
                ),
            })
            .collect();
        let mut x = vec![0.0; self.dim()];
        let mut idx = vec![0usize; self.dim()];
        loop {
            let mut weight = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                x[d] = per_coord[d].0[i];
                weight *= per_coord[d].1[i];
            }
            f(&x, weight);
            // odometer increment over the product grid
            let mut d = 0;
            loop {
                if d == self.dim() {
                    return Ok(());
                }
                idx[d] += 1;
                if idx[d] < per_coord[d].0.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    /// Integrates a scalar function over the product measure.
    pub fn integrate<F>(&self, quad: &QuadratureSpec, mut f: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut total = 0.0;
        self.for_each_node(quad, |x, weight| total += weight * f(x))?;
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        for n in [10usize, 50, 200, 400] {
            let (t, w) = gauss_hermite(n).unwrap();
            let sqrt_pi = std::f64::consts::PI.sqrt();
            let m0: f64 = w.iter().sum();
            let m2: f64 = t.iter().zip(&w).map(|(ti, wi)| wi * ti * ti).sum();
            let m4: f64 = t.iter().zip(&w).map(|(ti, wi)| wi * ti.powi(4)).sum();
            assert!((m0 - sqrt_pi).abs() < 1e-12 * sqrt_pi, "n={n}");
            assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12, "n={n}");
            assert!((m4 - 0.75 * sqrt_pi).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn normal_moments_through_measure() {
        let measure = CovariateMeasure::new(vec![CoordinateMeasure::StandardNormal]).unwrap();
        let quad = QuadratureSpec::default();
        // E[z^{2m}] = (2m-1)!!
        for (power, expect) in [(2, 1.0), (4, 3.0), (6, 15.0), (8, 105.0)] {
            let got = measure.integrate(&quad, |x| x[0].powi(power)).unwrap();
            assert!((got - expect).abs() < 1e-9 * expect, "power {power}: {got}");
        }
        let odd = measure.integrate(&quad, |x| x[0].powi(3)).unwrap();
        assert!(odd.abs() < 1e-12);
    }

    #[test]
    fn product_measure_with_point_mass() {
        let measure = CovariateMeasure::intercept_normal();
        let quad = QuadratureSpec::default();
        let got = measure.integrate(&quad, |x| x[0] * x[1] * x[1]).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
        let cross = measure.integrate(&quad, |x| x[0] * x[1]).unwrap();
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn bounded_sigmoid_integral_converges() {
        let measure = CovariateMeasure::intercept_normal();
        let f = |x: &[f64]| {
            let p = 1.0 / (1.0 + (-(2.0 * x[0] + 4.0 * x[1])).exp());
            p * (1.0 - p) * x[1] * x[1]
        };
        let a = measure
            .integrate(&QuadratureSpec::new(200).unwrap(), f)
            .unwrap();
        let b = measure
            .integrate(&QuadratureSpec::new(400).unwrap(), f)
            .unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(9).is_err());
        assert!(QuadratureSpec::new(10).is_ok());
        assert!(CovariateMeasure::new(vec![]).is_err());
    }
}
