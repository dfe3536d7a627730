use rand::seq::SliceRandom;
use rand::Rng;

/// Greedy matching: repeatedly take the globally cheapest remaining
/// `(row, col)` entry. Ties break by `(row, col)`.
pub fn greedy_assign(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    let mut entries: Vec<(f64, usize, usize)> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (cost[i][j], i, j)))
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut pairs = Vec::with_capacity(rows.min(cols));
    for (_, i, j) in entries {
        if row_used[i] || col_used[j] {
            continue;
        }
        row_used[i] = true;
        col_used[j] = true;
        pairs.push((i, j));
        if pairs.len() == rows.min(cols) {
            break;
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Uniformly random matching of `min(n_agents, m_tasks)` pairs.
pub fn random_assign<R: Rng + ?Sized>(n_agents: usize, m_tasks: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut agents: Vec<usize> = (0..n_agents).collect();
    let mut tasks: Vec<usize> = (0..m_tasks).collect();
    agents.shuffle(rng);
    tasks.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = agents.into_iter().zip(tasks).collect();
    pairs.sort_unstable();
    pairs
}
