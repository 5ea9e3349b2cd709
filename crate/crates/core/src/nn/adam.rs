use super::{real, Real};

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> Adam<T> {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
            step: 0,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
        }
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        debug_assert_eq!(params.len(), grads.len());
        self.step += 1;
        let (b1, b2) = (real::<T>(self.beta1), real::<T>(self.beta2));
        let one = T::one();
        let c1 = one - b1.powi(self.step);
        let c2 = one - b2.powi(self.step);
        let lr = real::<T>(self.lr);
        let eps = real::<T>(self.eps);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic() {
        let mut x = vec![3.0f64, -2.0];
        let mut opt = Adam::new(2, 0.1);
        for _ in 0..500 {
            let g = vec![2.0 * (x[0] - 1.0), 2.0 * (x[1] + 0.5)];
            opt.step(&mut x, &g);
        }
        assert!((x[0] - 1.0).abs() < 1e-2 && (x[1] + 0.5).abs() < 1e-2, "{x:?}");
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut x = vec![0.0f64];
        let mut opt = Adam::new(1, 0.001);
        opt.step(&mut x, &[5.0]);
        assert!((x[0] + 0.001).abs() < 1e-9);
    }
}
