use crate::scalar::Real;

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step: u64,
}

impl<T: Real> AdamState<T> {
    /// Zero moments shaped like `params`.
    pub fn new(shapes: &[&[T]]) -> Self {
        Self {
            m: shapes.iter().map(|p| vec![T::zero(); p.len()]).collect(),
            v: shapes.iter().map(|p| vec![T::zero(); p.len()]).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step<T: Real>(params: &mut [&mut [T]], grads: &[Vec<T>], state: &mut AdamState<T>, config: &AdamConfig) {
    assert_eq!(params.len(), grads.len(), "one gradient per parameter tensor");
    state.step += 1;
    let b1 = T::lit(config.beta1);
    let b2 = T::lit(config.beta2);
    let one = T::one();
    let t = state.step as i32;
    let c1 = one - T::lit(config.beta1.powi(t));
    let c2 = one - T::lit(config.beta2.powi(t));
    let lr = T::lit(config.learning_rate);
    let eps = T::lit(config.epsilon);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        assert_eq!(p.len(), g.len(), "gradient shape matches parameter");
        for (((pi, &gi), mi), vi) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + (one - b1) * gi;
            *vi = b2 * *vi + (one - b2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *pi -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(grads: &[f64], p0: f64, cfg: &AdamConfig) -> Vec<f64> {
        let mut p = [p0];
        let mut state = AdamState::new(&[&p[..]]);
        let mut out = Vec::new();
        for &g in grads {
            let mut params: Vec<&mut [f64]> = vec![&mut p[..]];
            adam_step(&mut params, &[vec![g]], &mut state, cfg);
            out.push(p[0]);
        }
        out
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient_sign() {
        let cfg = AdamConfig::default();
        for g in [3.0, -0.002, 1e4] {
            let p = run(&[g], 1.0, &cfg)[0];
            let expected = 1.0 - cfg.learning_rate * g.signum();
            assert!((p - expected).abs() < 1e-8, "g = {g}: {p} vs {expected}");
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let p = run(&[0.0, 0.0, 0.0], 0.25, &AdamConfig::default());
        assert!(p.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn two_steps_constant_gradient_by_hand() {
        let cfg = AdamConfig {
            learning_rate: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        };
        let g = 2.0f64;
        let p = run(&[g, g], 0.0, &cfg);
        // step 1: m = 0.2, v = 0.004; m̂ = 2, v̂ = 4
        let p1 = 0.0 - 0.1 * 2.0 / (2.0 + 1e-8);
        // step 2: m = 0.38, v = 0.007996; m̂ = 0.38/0.19 = 2, v̂ = 0.007996/0.001999 = 4
        let m2: f64 = 0.9 * 0.2 + 0.1 * 2.0;
        let v2: f64 = 0.999 * 0.004 + 0.001 * 4.0;
        let mh = m2 / (1.0 - 0.81);
        let vh = v2 / (1.0 - 0.999f64.powi(2));
        let p2 = p1 - 0.1 * mh / (vh.sqrt() + 1e-8);
        assert!((p[0] - p1).abs() < 1e-15);
        assert!((p[1] - p2).abs() < 1e-15);
        assert!((p2 - (-0.2)).abs() < 1e-7);
    }
}
