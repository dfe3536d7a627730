use super::model::AgentModel;

/// Anything exposing its parameters as a fixed list of flat tensors.
pub trait Parameters {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;
}

impl Parameters for AgentModel {
    fn tensors(&self) -> Vec<&[f64]> {
        AgentModel::tensors(self)
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        AgentModel::tensors_mut(self)
    }
}

impl Parameters for Vec<f64> {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.as_slice()]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.as_mut_slice()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new<P: Parameters + ?Sized>(params: &P, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step<P: Parameters + ?Sized>(params: &mut P, grads: &P, state: &mut AdamState, lr: f64) {
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    let grads = grads.tensors();
    let mut params = params.tensors_mut();
    assert_eq!(params.len(), state.m.len(), "parameter layout changed");
    for (k, p) in params.iter_mut().enumerate() {
        let (m, v, g) = (&mut state.m[k], &mut state.v[k], grads[k]);
        assert_eq!(p.len(), g.len(), "gradient shape mismatch");
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![1.0, -2.0];
        let mut s = AdamState::new(&p, 0.9, 0.999, 1e-8);
        for _ in 0..5 {
            adam_step(&mut p, &vec![0.0, 0.0], &mut s, 0.1);
        }
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn three_steps_match_hand_recursion() {
        // g = 0.5, -1.0, 2.0 with lr 0.01
        let gs = [0.5, -1.0, 2.0];
        let mut p = vec![1.0];
        let mut s = AdamState::new(&p, 0.9, 0.999, 1e-8);
        for g in gs {
            adam_step(&mut p, &vec![g], &mut s, 0.01);
        }
        // m1 = .05, v1 = .00025: step .01 * (.05/.1) / (sqrt(.00025/.001)+1e-8)
        // m2 = -.055, v2 = .00124975
        // m3 = .1505, v3 = .00524850025
        let mut expect = 1.0;
        let ms = [0.05, -0.055, 0.1505];
        let vs = [0.00025, 0.00124975, 0.005248_500_25];
        for t in 0..3 {
            let c1 = 1.0 - 0.9f64.powi(t + 1);
            let c2 = 1.0 - 0.999f64.powi(t + 1);
            expect -= 0.01 * (ms[t as usize] / c1) / ((vs[t as usize] / c2).sqrt() + 1e-8);
        }
        assert!((p[0] - expect).abs() < 1e-12, "{} vs {}", p[0], expect);
        assert!((s.m[0][0] - 0.1505).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_steps_approach_lr() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(&p, 0.9, 0.999, 1e-8);
        let mut last = 0.0;
        for _ in 0..2000 {
            let before = p[0];
            adam_step(&mut p, &vec![-3.0], &mut s, 1e-3);
            last = p[0] - before;
        }
        assert!((last - 1e-3).abs() < 1e-6);
    }
}
