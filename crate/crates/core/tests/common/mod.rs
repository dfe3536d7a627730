//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use swarm_alloc::world::{Cell, Connectivity, Occupancy};

/// Dijkstra over the grid graph with unit edge weights, written against the
/// raw occupancy bits rather than the library's neighbor iterator.
pub fn dijkstra(occ: &Occupancy, conn: Connectivity, start: Cell, goal: Cell) -> Option<u64> {
    let [nx, ny, nz] = occ.dims();
    let idx = |c: Cell| (c.z as usize * ny + c.y as usize) * nx + c.x as usize;
    let inside = |c: Cell| {
        c.x >= 0 && c.y >= 0 && c.z >= 0 && (c.x as usize) < nx && (c.y as usize) < ny && (c.z as usize) < nz
    };
    let planar = conn == Connectivity::Planar4;
    let ok = |c: Cell| inside(c) && !occ.is_blocked(c) && (!planar || c.z == 0);
    if !ok(start) || !ok(goal) {
        return None;
    }
    let mut dist = vec![u64::MAX; nx * ny * nz];
    let mut heap = BinaryHeap::new();
    dist[idx(start)] = 0;
    heap.push(Reverse((0u64, start.x, start.y, start.z)));
    let steps: &[[i32; 3]] = if planar {
        &[[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]]
    } else {
        &[[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    };
    while let Some(Reverse((d, x, y, z))) = heap.pop() {
        let c = Cell { x, y, z };
        if c == goal {
            return Some(d);
        }
        if d > dist[idx(c)] {
            continue;
        }
        for s in steps {
            let n = Cell { x: x + s[0], y: y + s[1], z: z + s[2] };
            if ok(n) && d + 1 < dist[idx(n)] {
                dist[idx(n)] = d + 1;
                heap.push(Reverse((d + 1, n.x, n.y, n.z)));
            }
        }
    }
    None
}

/// Minimum total over all injective row-to-column (or column-to-row)
/// matchings of size `min(rows, cols)`.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let transposed: Vec<Vec<f64>>;
    let c: &[Vec<f64>] = if rows <= cols {
        cost
    } else {
        transposed = (0..cols).map(|j| (0..rows).map(|i| cost[i][j]).collect()).collect();
        &transposed
    };
    fn go(c: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == c.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(c, row + 1, used, acc + c[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c[0].len()], 0.0, &mut best);
    best
}

/// `sum_k (gamma lambda)^k delta_{t+k}`, truncated after a terminal step.
pub fn gae_oracle(r: &[f64], v: &[f64], d: &[bool], boot: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = r.len();
    let delta = |t: usize| {
        let next = if d[t] {
            0.0
        } else if t + 1 < n {
            v[t + 1]
        } else {
            boot
        };
        r[t] + gamma * next - v[t]
    };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for k in t..n {
                sum += w * delta(k);
                if d[k] {
                    break;
                }
                w *= gamma * lambda;
            }
            sum
        })
        .collect()
}

/// Relative error with a pinned floor so zero gradients compare absolutely.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}
