/// Generalized advantage estimates and value targets for one fragment.
///
/// `dones[t]` marks the last step of an episode: nothing after it is
/// bootstrapped. `bootstrap` is the value of the state following the final
/// step and is ignored when that step is terminal.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "fragment arrays differ in length");
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap;
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let targets = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, targets)
}

/// Rescales to zero mean and unit variance; leaves constant input centered.
pub fn normalize(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for v in values.iter_mut() {
        *v = if std > 1e-12 { (*v - mean) / std } else { *v - mean };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    /// `A_t = sum_k (gamma lambda)^k delta_{t+k}`, stopping after a terminal step.
    fn brute_force(r: &[f64], v: &[f64], d: &[bool], boot: f64, g: f64, l: f64) -> Vec<f64> {
        let n = r.len();
        let delta = |t: usize| {
            let next = if d[t] {
                0.0
            } else if t + 1 < n {
                v[t + 1]
            } else {
                boot
            };
            r[t] + g * next - v[t]
        };
        (0..n)
            .map(|t| {
                let mut sum = 0.0;
                for k in 0..n - t {
                    sum += (g * l).powi(k as i32) * delta(t + k);
                    if d[t + k] {
                        break;
                    }
                }
                sum
            })
            .collect()
    }

    #[test]
    fn length_one_base_case() {
        let (a, t) = compute_gae(&[1.0], &[0.5], &[false], 2.0, 0.9, 0.95);
        assert!((a[0] - (1.0 + 0.9 * 2.0 - 0.5)).abs() < 1e-15);
        assert!((t[0] - (1.0 + 0.9 * 2.0)).abs() < 1e-15);
        let (a, _) = compute_gae(&[1.0], &[0.5], &[true], 2.0, 0.9, 0.95);
        assert_eq!(a[0], 0.5);
    }

    #[test]
    fn lambda_zero_gives_td_residuals() {
        let r = [1.0, -2.0, 0.5];
        let v = [0.3, 0.1, -0.4];
        let (a, _) = compute_gae(&r, &v, &[false; 3], 0.7, 0.99, 0.0);
        let expect = [1.0 + 0.99 * 0.1 - 0.3, -2.0 + 0.99 * -0.4 - 0.1, 0.5 + 0.99 * 0.7 + 0.4];
        for (x, y) in a.iter().zip(expect) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_direct_summation() {
        let mut rng = stream(3, Purpose::Sampling, 0);
        for case in 0..200 {
            let n = 1 + case % 64;
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let d: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.1)).collect();
            let boot = rng.gen_range(-2.0..2.0);
            let (a, t) = compute_gae(&r, &v, &d, boot, 0.99, 0.95);
            let oracle = brute_force(&r, &v, &d, boot, 0.99, 0.95);
            for i in 0..n {
                assert!((a[i] - oracle[i]).abs() < 1e-10);
                assert!((t[i] - (oracle[i] + v[i])).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normalize_moments() {
        let mut x = vec![1.0, 2.0, 3.0, 4.0];
        normalize(&mut x);
        let mean: f64 = x.iter().sum::<f64>() / 4.0;
        let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-15);
        assert!((var - 1.0).abs() < 1e-12);
        let mut c = vec![5.0; 3];
        normalize(&mut c);
        assert_eq!(c, vec![0.0; 3]);
    }
}
