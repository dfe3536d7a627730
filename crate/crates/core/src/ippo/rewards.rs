use super::config::TrainConfig;
use crate::allocators::AllocationOutcome;
use crate::pathing::CostMatrix;

/// Per-agent rewards of one decision step and their sum.
///
/// A winner earns the negated normalized cost of its task, plus the bonus
/// when that cost is below the threshold. Conflict losers, invalid requests
/// and requests from agents already holding a task cost `lambda_conflict`;
/// idling while a task waits costs `mu_idle`. Everything else earns zero.
pub fn compute_rewards(outcome: &AllocationOutcome, costs: &CostMatrix, config: &TrainConfig) -> (Vec<f64>, f64) {
    let mut r = vec![0.0; outcome.requests.len()];
    for a in &outcome.assignments {
        let c = costs.normalized[a.agent][a.slot];
        r[a.agent] = -c;
        if c < config.bonus_threshold {
            r[a.agent] += config.eta_bonus;
        }
    }
    for agent in outcome
        .conflict_losers()
        .chain(outcome.invalid.iter().copied())
        .chain(outcome.redundant.iter().copied())
    {
        r[agent] -= config.lambda_conflict;
    }
    for &agent in &outcome.idle_agents {
        r[agent] -= config.mu_idle;
    }
    let total = r.iter().sum();
    (r, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocators::resolve_conflicts;

    fn costs(normalized: Vec<Vec<f64>>) -> CostMatrix {
        CostMatrix {
            raw: normalized.clone(),
            normalized,
            c_max: 1.0,
        }
    }

    #[test]
    fn cheap_win_earns_bonus() {
        let c = costs(vec![vec![-0.8, 0.3]]);
        let out = resolve_conflicts(&[1], &c, &[true], &[true, true]);
        let (r, total) = compute_rewards(&out, &c, &TrainConfig::default());
        assert!((r[0] - 1.3).abs() < 1e-12);
        assert_eq!(total, r[0]);
        let out = resolve_conflicts(&[2], &c, &[true], &[true, true]);
        let (r, _) = compute_rewards(&out, &c, &TrainConfig::default());
        assert!((r[0] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn conflict_loser_pays_lambda() {
        let c = costs(vec![vec![0.1], vec![0.4]]);
        let out = resolve_conflicts(&[1, 1], &c, &[true, true], &[true]);
        let (r, total) = compute_rewards(&out, &c, &TrainConfig::default());
        assert!((r[0] + 0.1).abs() < 1e-12);
        assert_eq!(r[1], -1.0);
        assert!((total + 1.1).abs() < 1e-12);
    }

    #[test]
    fn idle_agents_pay_mu() {
        let c = costs(vec![vec![0.0, 0.0]; 3]);
        let out = resolve_conflicts(&[0, 0, 0], &c, &[true; 3], &[true, false]);
        let (r, total) = compute_rewards(&out, &c, &TrainConfig::default());
        assert_eq!(r, vec![-0.5; 3]);
        assert_eq!(total, -1.5);
    }

    #[test]
    fn nothing_waiting_idle_is_free_and_busy_request_is_penalized() {
        let c = costs(vec![vec![0.0], vec![0.0]]);
        let out = resolve_conflicts(&[0, 1], &c, &[true, false], &[false]);
        let (r, _) = compute_rewards(&out, &c, &TrainConfig::default());
        assert_eq!(r, vec![0.0, -1.0]);
    }

    #[test]
    fn invalid_request_pays_lambda() {
        let c = costs(vec![vec![0.0, 0.0]]);
        let out = resolve_conflicts(&[2], &c, &[true], &[true, false]);
        let (r, _) = compute_rewards(&out, &c, &TrainConfig::default());
        assert_eq!(r, vec![-1.0]);
    }
}
