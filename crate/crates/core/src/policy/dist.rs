use rand::Rng;

/// Categorical distribution over the `M + 1` actions.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionDistribution {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    /// Log-softmax, finite even where `probs` underflows.
    pub log_probs: Vec<f64>,
}

impl ActionDistribution {
    /// Softmax with max subtraction.
    pub fn from_logits(logits: Vec<f64>) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let log_sum = sum.ln();
        let probs = exps.iter().map(|e| e / sum).collect();
        let log_probs = logits.iter().map(|l| l - max - log_sum).collect();
        ActionDistribution {
            logits,
            probs,
            log_probs,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Most likely action, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        self.log_probs[action]
    }
}

/// Draws an action by inverse CDF; returns it with its log-probability.
pub fn sample_action<R: Rng + ?Sized>(dist: &ActionDistribution, rng: &mut R) -> (usize, f64) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut action = dist.len() - 1;
    for (i, &p) in dist.probs.iter().enumerate() {
        acc += p;
        if u < acc {
            action = i;
            break;
        }
    }
    // never return a zero-probability tail action due to rounding
    while dist.probs[action] == 0.0 && action > 0 {
        action -= 1;
    }
    (action, dist.log_prob(action))
}

/// Shannon entropy in nats, `0 ln 0 = 0`.
pub fn dist_entropy(dist: &ActionDistribution) -> f64 {
    -dist
        .probs
        .iter()
        .zip(&dist.log_probs)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, lp)| p * lp)
        .sum::<f64>()
}

/// d log p(action) / d logits = one_hot(action) - probs.
pub fn log_prob_grad(dist: &ActionDistribution, action: usize) -> Vec<f64> {
    let mut g: Vec<f64> = dist.probs.iter().map(|p| -p).collect();
    g[action] += 1.0;
    g
}

/// dH / d logits = -p_k (ln p_k + H).
pub fn entropy_grad(dist: &ActionDistribution) -> Vec<f64> {
    let h = dist_entropy(dist);
    dist.probs
        .iter()
        .zip(&dist.log_probs)
        .map(|(p, lp)| if *p > 0.0 { -p * (lp + h) } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn from_probs(p: &[f64]) -> ActionDistribution {
        ActionDistribution::from_logits(p.iter().map(|x| x.ln()).collect())
    }

    #[test]
    fn zero_logits_are_uniform() {
        let d = ActionDistribution::from_logits(vec![0.0; 5]);
        assert!(d.probs.iter().all(|p| (p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn shift_invariance() {
        let a = ActionDistribution::from_logits(vec![0.3, -1.2, 2.0, 0.0]);
        let b = ActionDistribution::from_logits(vec![10.3, 8.8, 12.0, 10.0]);
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(a.argmax(), b.argmax());
    }

    #[test]
    fn degenerate_distribution_always_samples_its_mode() {
        let d = ActionDistribution::from_logits(vec![-800.0, -800.0, 0.0, -800.0]);
        let mut rng = stream(0, Purpose::Sampling, 0);
        for _ in 0..1000 {
            let (a, lp) = sample_action(&d, &mut rng);
            assert_eq!(a, 2);
            assert_eq!(lp, 0.0);
        }
    }

    #[test]
    fn entropy_closed_forms() {
        assert!((dist_entropy(&from_probs(&[0.25; 4])) - 4f64.ln()).abs() < 1e-12);
        let one_hot = ActionDistribution::from_logits(vec![0.0, -1e4, -1e4]);
        assert_eq!(dist_entropy(&one_hot), 0.0);
        let half = ActionDistribution::from_logits(vec![0.0, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY]);
        assert!((dist_entropy(&half) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_samples() {
        let d = from_probs(&[0.1, 0.2, 0.3, 0.4]);
        let run = || {
            let mut rng = stream(5, Purpose::Sampling, 3);
            (0..50).map(|_| sample_action(&d, &mut rng).0).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn log_prob_gradient_closed_form() {
        let d = from_probs(&[0.1, 0.6, 0.3]);
        let g = log_prob_grad(&d, 1);
        let expect = [-0.1, 0.4, -0.3];
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
