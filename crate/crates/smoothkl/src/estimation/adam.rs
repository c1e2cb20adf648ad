//! Plain Adam with bias correction, plus the stepwise learning-rate schedule
//! used throughout the simulation protocols.

/// First/second moment state for one flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(dim: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        debug_assert_eq!(params.len(), grad.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Learning rate after `epoch` epochs: the initial rate shrunk by a fixed
/// factor once per completed decay period.
pub fn scheduled_lr(lr_init: f64, decay_factor: f64, decay_every: usize, epoch: usize) -> f64 {
    lr_init * decay_factor.powi((epoch / decay_every) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_minimizes_quadratic() {
        let mut params = vec![5.0, -3.0];
        let mut opt = Adam::new(2, 0.9, 0.999, 1e-8);
        for _ in 0..2000 {
            let grad: Vec<f64> = params.iter().map(|&p| 2.0 * p).collect();
            opt.step(&mut params, &grad, 0.05);
        }
        assert!(params.iter().all(|p| p.abs() < 1e-3), "{params:?}");
    }

    #[test]
    fn schedule_decays_stepwise() {
        let f = 10f64.powf(-0.5);
        assert_eq!(scheduled_lr(0.01, f, 50, 0), 0.01);
        assert_eq!(scheduled_lr(0.01, f, 50, 49), 0.01);
        assert!((scheduled_lr(0.01, f, 50, 50) - 0.01 * f).abs() < 1e-18);
        assert!((scheduled_lr(0.01, f, 50, 149) - 0.01 * f * f).abs() < 1e-18);
    }
}
