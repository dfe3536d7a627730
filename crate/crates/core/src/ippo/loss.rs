use super::config::TrainConfig;
use super::model::{AgentModel, Architecture};
use crate::policy::{dist_entropy, entropy_grad, log_prob_grad};

/// One training sample.
#[derive(Clone, Copy, Debug)]
pub struct Sample<'a> {
    pub own: &'a [f64],
    pub neighbors: &'a [f64],
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub target: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    /// Clipped surrogate term, already negated.
    pub policy: f64,
    /// Mean squared value error, before weighting.
    pub value: f64,
    pub entropy: f64,
}

/// Clipped PPO objective over a minibatch:
///
/// ```text
/// L = -mean(min(r A, clip(r, 1-eps, 1+eps) A)) + c_v mean((V - G)^2) - c_e mean(H)
/// ```
///
/// Returns the loss and its exact gradient with respect to every parameter
/// of `model`, embedding layer included.
pub fn ppo_loss(
    model: &AgentModel,
    arch: Architecture,
    batch: &[Sample<'_>],
    config: &TrainConfig,
) -> (LossStats, AgentModel) {
    let mut grads = model.zeros_like();
    let mut stats = LossStats::default();
    if batch.is_empty() {
        return (stats, grads);
    }
    let inv = 1.0 / batch.len() as f64;
    let eps = config.clip_epsilon;
    for s in batch {
        let fwd = model.forward(arch, s.own, s.neighbors);
        let log_prob = fwd.dist.log_prob(s.action);
        let ratio = (log_prob - s.old_log_prob).exp();
        let unclipped = ratio * s.advantage;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * s.advantage;
        stats.policy -= unclipped.min(clipped) * inv;

        let entropy = dist_entropy(&fwd.dist);
        stats.entropy += entropy * inv;

        let v = fwd.value();
        let err = v - s.target;
        stats.value += err * err * inv;

        // the clipped branch is constant in the parameters
        let d_log_prob = if unclipped <= clipped { -s.advantage * ratio * inv } else { 0.0 };
        let mut d_logits = log_prob_grad(&fwd.dist, s.action);
        d_logits.iter_mut().for_each(|g| *g *= d_log_prob);
        let h_grad = entropy_grad(&fwd.dist);
        for (g, h) in d_logits.iter_mut().zip(&h_grad) {
            *g -= config.entropy_coef * inv * h;
        }
        let d_value = 2.0 * config.value_coef * err * inv;
        model.backward(arch, s.own, s.neighbors, &fwd, &d_logits, d_value, &mut grads);
    }
    stats.total = stats.policy + config.value_coef * stats.value - config.entropy_coef * stats.entropy;
    (stats, grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ippo::config::{EmbeddingMode, PolicyInput};
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    struct Owned {
        own: Vec<f64>,
        nb: Vec<f64>,
        action: usize,
        old: f64,
        adv: f64,
        target: f64,
    }

    fn batch(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Owned> {
        (0..n)
            .map(|_| Owned {
                own: (0..1 + 2 * m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                nb: (0..1 + 2 * m).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                action: rng.gen_range(0..=m),
                old: rng.gen_range(-2.5..-0.5),
                adv: rng.gen_range(-2.0..2.0),
                target: rng.gen_range(-1.0..1.0),
            })
            .collect()
    }

    fn view(b: &[Owned]) -> Vec<Sample<'_>> {
        b.iter()
            .map(|o| Sample {
                own: &o.own,
                neighbors: &o.nb,
                action: o.action,
                old_log_prob: o.old,
                advantage: o.adv,
                target: o.target,
            })
            .collect()
    }

    #[test]
    fn finite_differences_all_architectures() {
        let cfg = TrainConfig { hidden: 8, ..Default::default() };
        let mut rng = stream(9, Purpose::Sampling, 0);
        for embedding in [EmbeddingMode::Sage, EmbeddingMode::Local] {
            for policy_input in [PolicyInput::Embedding, PolicyInput::Concat] {
                let arch = Architecture { embedding, policy_input };
                let mut model = AgentModel::init(arch, 3, 2, 8, &mut rng);
                // scale up the head so ratios leave the clip range
                model.nets.policy.layers[2].weight.iter_mut().for_each(|w| *w *= 100.0);
                let owned = batch(&mut rng, 5, 2);
                let samples = view(&owned);
                let (_, grads) = ppo_loss(&model, arch, &samples, &cfg);
                let g = grads.tensors().concat();
                let mut k = 0;
                let n_tensors = model.tensors().len();
                for t in 0..n_tensors {
                    let len = model.tensors()[t].len();
                    for i in (0..len).step_by(3) {
                        let orig = model.tensors()[t][i];
                        let h = 1e-5;
                        model.tensors_mut()[t][i] = orig + h;
                        let up = ppo_loss(&model, arch, &samples, &cfg).0.total;
                        model.tensors_mut()[t][i] = orig - h;
                        let down = ppo_loss(&model, arch, &samples, &cfg).0.total;
                        model.tensors_mut()[t][i] = orig;
                        let num = (up - down) / (2.0 * h);
                        let idx = model.tensors()[..t].iter().map(|x| x.len()).sum::<usize>() + i;
                        let rel = (g[idx] - num).abs() / g[idx].abs().max(num.abs()).max(1e-6);
                        assert!(rel < 1e-4, "{arch:?} tensor {t} index {i}: {} vs {num}", g[idx]);
                        k += 1;
                    }
                }
                assert!(k > 50);
            }
        }
    }

    #[test]
    fn zero_advantage_leaves_only_value_and_entropy() {
        let cfg = TrainConfig { hidden: 8, entropy_coef: 0.0, ..Default::default() };
        let arch = Architecture::from_config(&cfg);
        let mut rng = stream(2, Purpose::Sampling, 0);
        let model = AgentModel::init(arch, 3, 2, 8, &mut rng);
        let mut owned = batch(&mut rng, 4, 2);
        owned.iter_mut().for_each(|o| o.adv = 0.0);
        let (stats, grads) = ppo_loss(&model, arch, &view(&owned), &cfg);
        assert_eq!(stats.policy, 0.0);
        assert!(grads.nets.policy.tensors().iter().all(|t| t.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn ratio_one_gives_vanilla_policy_gradient() {
        let cfg = TrainConfig {
            hidden: 8,
            entropy_coef: 0.0,
            value_coef: 0.0,
            ..Default::default()
        };
        let arch = Architecture::from_config(&cfg);
        let mut rng = stream(4, Purpose::Sampling, 0);
        let model = AgentModel::init(arch, 3, 3, 8, &mut rng);
        let mut owned = batch(&mut rng, 6, 3);
        for o in owned.iter_mut() {
            o.old = model.forward(arch, &o.own, &o.nb).dist.log_prob(o.action);
        }
        let (stats, grads) = ppo_loss(&model, arch, &view(&owned), &cfg);
        let mean_adv = owned.iter().map(|o| o.adv).sum::<f64>() / 6.0;
        assert!((stats.policy + mean_adv).abs() < 1e-12);
        // -mean(A grad log pi), accumulated independently
        let mut expect = model.zeros_like();
        for o in &owned {
            let fwd = model.forward(arch, &o.own, &o.nb);
            let mut d = log_prob_grad(&fwd.dist, o.action);
            d.iter_mut().for_each(|g| *g *= -o.adv / 6.0);
            model.backward(arch, &o.own, &o.nb, &fwd, &d, 0.0, &mut expect);
        }
        for (a, b) in grads.tensors().concat().iter().zip(expect.tensors().concat()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn clipped_surrogate_is_bounded_below() {
        let cfg = TrainConfig { hidden: 8, ..Default::default() };
        let arch = Architecture::from_config(&cfg);
        let mut rng = stream(5, Purpose::Sampling, 0);
        for _ in 0..20 {
            let mut model = AgentModel::init(arch, 3, 2, 8, &mut rng);
            model.nets.policy.layers[2].weight.iter_mut().for_each(|w| *w *= 300.0);
            let owned = batch(&mut rng, 8, 2);
            let max_a = owned.iter().map(|o| o.adv.abs()).fold(0.0, f64::max);
            let (stats, _) = ppo_loss(&model, arch, &view(&owned), &cfg);
            // negative advantages with large ratios are not clipped, so only
            // the lower bound holds
            assert!(stats.policy >= -(1.0 + cfg.clip_epsilon) * max_a - 1e-12);
        }
    }
}
