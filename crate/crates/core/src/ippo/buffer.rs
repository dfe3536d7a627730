use super::gae::compute_gae;

/// One agent's experience for a single update.
///
/// Raw observations are stored instead of embeddings so the embedding layer
/// can be re-evaluated, and trained, during the update.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RolloutBuffer {
    pub own: Vec<Vec<f64>>,
    pub neighbors: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    /// Filled per fragment by [`RolloutBuffer::finish_fragment`].
    pub advantages: Vec<f64>,
    pub targets: Vec<f64>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn clear(&mut self) {
        *self = RolloutBuffer::default();
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        own: Vec<f64>,
        neighbors: Vec<f64>,
        action: usize,
        log_prob: f64,
        value: f64,
        reward: f64,
        done: bool,
    ) {
        self.own.push(own);
        self.neighbors.push(neighbors);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.rewards.push(reward);
        self.dones.push(done);
    }

    /// Number of steps not yet covered by a finished fragment.
    pub fn pending(&self) -> usize {
        self.len() - self.advantages.len()
    }

    /// Computes advantages and targets for the steps pushed since the last
    /// call.
    pub fn finish_fragment(&mut self, bootstrap: f64, gamma: f64, lambda: f64) {
        let start = self.advantages.len();
        let (adv, targets) = compute_gae(
            &self.rewards[start..],
            &self.values[start..],
            &self.dones[start..],
            bootstrap,
            gamma,
            lambda,
        );
        self.advantages.extend(adv);
        self.targets.extend(targets);
    }

    pub fn check(&self) -> Result<(), String> {
        let n = self.len();
        let lens = [
            self.own.len(),
            self.neighbors.len(),
            self.log_probs.len(),
            self.rewards.len(),
            self.values.len(),
            self.dones.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(format!("parallel arrays differ in length: {lens:?} vs {n}"));
        }
        if self.rewards.iter().any(|r| !r.is_finite()) {
            return Err("non-finite reward".into());
        }
        if self.log_probs.iter().any(|&lp| lp > 0.0) {
            return Err("positive log-probability".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragments_are_independent() {
        let mut b = RolloutBuffer::default();
        for t in 0..3 {
            b.push(vec![], vec![], 0, -1.0, 0.0, t as f64, false);
        }
        b.finish_fragment(10.0, 0.5, 1.0);
        assert_eq!(b.pending(), 0);
        b.push(vec![], vec![], 0, -1.0, 0.0, 1.0, true);
        assert_eq!(b.pending(), 1);
        b.finish_fragment(99.0, 0.5, 1.0);
        // first fragment: 0 + .5*1 + .25*2 + .125*10
        assert_eq!(b.advantages, vec![2.25, 4.5, 7.0, 1.0]);
        b.check().unwrap();
    }
}
