//! Randomized invariants of the allocation and planning building blocks.

mod common;

use proptest::prelude::*;
use swarm_alloc::allocators::{assignment_total, greedy_assign, hungarian, resolve_conflicts};
use swarm_alloc::pathing::{astar, normalize_cost, CostMatrix};
use swarm_alloc::world::{Cell, Connectivity, Occupancy};

fn grid(dims: [usize; 3], blocked: &[bool]) -> Occupancy {
    let mut occ = Occupancy::empty(dims);
    for (i, &b) in blocked.iter().enumerate().take(occ.len()) {
        if b {
            let c = occ.cell(i);
            occ.set_blocked(c, true);
        }
    }
    occ
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..100.0, cols), rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn astar_length_equals_dijkstra(
        nx in 2usize..9, ny in 2usize..9, nz in 1usize..4,
        blocked in prop::collection::vec(prop::bool::weighted(0.2), 9 * 9 * 4),
        picks in prop::array::uniform4(0usize..10_000),
        spatial in any::<bool>(),
    ) {
        let occ = grid([nx, ny, nz], &blocked);
        let conn = if spatial { Connectivity::Spatial6 } else { Connectivity::Planar4 };
        let pick = |k: usize| {
            let c = occ.cell(k % occ.len());
            if spatial { c } else { Cell::new(c.x, c.y, 0) }
        };
        let (s, g) = (pick(picks[0]), pick(picks[1]));
        let got = astar(&occ, conn, s, g).map(|p| p.moves() as u64);
        prop_assert_eq!(got, common::dijkstra(&occ, conn, s, g));
        if let Some(p) = astar(&occ, conn, s, g) {
            prop_assert_eq!(p.start(), s);
            prop_assert_eq!(p.goal(), g);
            for w in p.cells.windows(2) {
                prop_assert!(conn.adjacent(w[0], w[1]));
                prop_assert!(occ.is_free(w[1]));
            }
        }
    }

    #[test]
    fn hungarian_is_optimal_and_greedy_is_not_better(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = swarm_alloc::rng::stream(seed, swarm_alloc::rng::Purpose::Sampling, 0);
        use rand::Rng;
        let cost: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
        let h = assignment_total(&cost, &hungarian(&cost));
        let best = common::brute_force_assignment(&cost);
        prop_assert!((h - best).abs() < 1e-9);
        prop_assert!(assignment_total(&cost, &greedy_assign(&cost)) >= h - 1e-9);
        prop_assert_eq!(hungarian(&cost).len(), rows.min(cols));
    }

    #[test]
    fn hungarian_pairs_invariant_under_positive_scaling(cost in matrix(4, 5), scale in 0.01f64..1000.0) {
        let scaled: Vec<Vec<f64>> = cost.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
        let a = hungarian(&cost);
        let b = hungarian(&scaled);
        // distinct optimal matchings can only arise from exact ties
        if a != b {
            let ta = assignment_total(&cost, &a);
            let tb = assignment_total(&cost, &b);
            prop_assert!((ta - tb).abs() <= 1e-9 * ta.abs().max(1.0));
        }
    }

    #[test]
    fn normalization_is_monotone_and_bounded(a in -10.0f64..200.0, b in -10.0f64..200.0, c_max in 1.0f64..100.0) {
        let (na, nb) = (normalize_cost(a, c_max), normalize_cost(b, c_max));
        prop_assert!((-1.0..=1.0).contains(&na));
        if a <= b {
            prop_assert!(na <= nb);
        }
    }

    #[test]
    fn resolver_output_is_one_to_one(
        n in 1usize..10, m in 1usize..8, seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = swarm_alloc::rng::stream(seed, swarm_alloc::rng::Purpose::Sampling, 1);
        let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
        let costs = CostMatrix::from_raw(raw, 10.0);
        let requests: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=m)).collect();
        let eligible: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
        let waiting: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.8)).collect();
        let out = resolve_conflicts(&requests, &costs, &eligible, &waiting);
        let mut agents: Vec<usize> = out.assignments.iter().map(|a| a.agent).collect();
        let mut slots: Vec<usize> = out.assignments.iter().map(|a| a.slot).collect();
        agents.sort_unstable();
        slots.sort_unstable();
        agents.dedup();
        slots.dedup();
        prop_assert_eq!(agents.len(), out.assignments.len());
        prop_assert_eq!(slots.len(), out.assignments.len());
        for a in &out.assignments {
            prop_assert!(eligible[a.agent] && waiting[a.slot]);
            prop_assert_eq!(requests[a.agent], a.slot + 1);
        }
        for c in &out.conflicts {
            let mut all: Vec<usize> = c.losers.clone();
            all.push(c.winner);
            all.sort_unstable();
            let expect: Vec<usize> = (0..n).filter(|&i| eligible[i] && requests[i] == c.slot + 1).collect();
            prop_assert_eq!(all, expect);
        }
    }
}
