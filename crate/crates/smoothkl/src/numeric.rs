//! Derivative-free minimizers used by the verification suites: golden-section
//! search in one dimension and Nelder-Mead in a few.

/// Minimizes a unimodal function on `[a, b]` to the given interval width.
/// Returns the midpoint of the final bracket.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    debug_assert!(a < b);
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Nelder-Mead simplex minimization. Suited to smooth low-dimensional
/// objectives; returns the best vertex after convergence or the iteration cap.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    tol: f64,
) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        // order ascending by value
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = (values[worst] - values[best]).abs();
        let size = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < tol && size < tol {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; n];
        for (idx, v) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = f(&reflect);
        if fr < values[best] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let fc = f(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let best_v = simplex[best].clone();
                for idx in 0..=n {
                    if idx == best {
                        continue;
                    }
                    for (x, b) in simplex[idx].iter_mut().zip(&best_v) {
                        *x = b + sigma * (*x - b);
                    }
                    values[idx] = f(&simplex[idx]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())
        .unwrap();
    simplex.swap_remove(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section_min(|v| (v - 1.3) * (v - 1.3), -10.0, 10.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-8);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let x = nelder_mead(
            |v| (v[0] - 2.0).powi(2) + 3.0 * (v[1] + 1.0).powi(2) + v[0] * v[1] * 0.1,
            &[0.0, 0.0],
            0.5,
            2000,
            1e-12,
        );
        // minimum of the coupled quadratic by Cramer's rule
        let det = 2.0 * 6.0 - 0.1 * 0.1;
        let ex = (4.0 * 6.0 - 0.1 * -6.0) / det;
        let ey = (2.0 * -6.0 - 0.1 * 4.0) / det;
        assert!((x[0] - ex).abs() < 1e-5, "{x:?}");
        assert!((x[1] - ey).abs() < 1e-5, "{x:?}");
    }
}
