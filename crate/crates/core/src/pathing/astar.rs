use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::world::{Cell, Connectivity, Occupancy};

/// A grid path, start and goal inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub cells: Vec<Cell>,
}

impl Path {
    /// Metric length: one meter per move.
    pub fn length_m(&self) -> f64 {
        self.moves() as f64
    }

    pub fn moves(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn start(&self) -> Cell {
        self.cells[0]
    }

    pub fn goal(&self) -> Cell {
        *self.cells.last().expect("path is never empty")
    }
}

const UNSEEN: u32 = u32::MAX;

/// Shortest path under `conn` through free cells, or `None` if unreachable.
///
/// Manhattan distance is the heuristic; it is exact in free space for both
/// move sets. Equal-f nodes pop in `(h, x, y, z)` order.
pub fn astar(occ: &Occupancy, conn: Connectivity, start: Cell, goal: Cell) -> Option<Path> {
    astar_avoiding(occ, conn, start, goal, |_| false)
}

/// Like [`astar`], with `avoid` marking extra temporarily blocked cells.
/// The start cell is never considered blocked.
pub fn astar_avoiding(
    occ: &Occupancy,
    conn: Connectivity,
    start: Cell,
    goal: Cell,
    avoid: impl Fn(Cell) -> bool,
) -> Option<Path> {
    let passable = |c: Cell| occ.is_free(c) && conn.admits(c) && !avoid(c);
    if !occ.is_free(start) || !conn.admits(start) || !passable(goal) {
        return None;
    }
    if start == goal {
        return Some(Path { cells: vec![start] });
    }

    let mut g = vec![UNSEEN; occ.len()];
    let mut parent = vec![usize::MAX; occ.len()];
    let mut heap = BinaryHeap::new();

    let si = occ.index(start);
    g[si] = 0;
    let h0 = start.manhattan(goal);
    heap.push(Reverse((h0, h0, start)));

    while let Some(Reverse((f, h, cell))) = heap.pop() {
        let ci = occ.index(cell);
        let gc = g[ci];
        if gc + h != f {
            // stale entry
            continue;
        }
        if cell == goal {
            return Some(Path {
                cells: unwind(occ, &parent, ci, si),
            });
        }
        for d in conn.offsets() {
            let n = cell.offset(*d);
            if !passable(n) {
                continue;
            }
            let ni = occ.index(n);
            let gn = gc + 1;
            if gn < g[ni] {
                g[ni] = gn;
                parent[ni] = ci;
                let hn = n.manhattan(goal);
                heap.push(Reverse((gn + hn, hn, n)));
            }
        }
    }
    None
}

fn unwind(occ: &Occupancy, parent: &[usize], mut at: usize, start: usize) -> Vec<Cell> {
    let mut cells = vec![occ.cell(at)];
    while at != start {
        at = parent[at];
        cells.push(occ.cell(at));
    }
    cells.reverse();
    cells
}

/// Breadth-first distances (in moves) from `source` to every cell reachable
/// under `conn`; `u32::MAX` marks unreachable cells.
///
/// Moves are symmetric, so a field rooted at a task gives every agent's
/// distance to it in one sweep.
pub fn distance_field(occ: &Occupancy, conn: Connectivity, source: Cell) -> Vec<u32> {
    let mut dist = vec![UNSEEN; occ.len()];
    if !occ.is_free(source) || !conn.admits(source) {
        return dist;
    }
    let mut queue = VecDeque::new();
    dist[occ.index(source)] = 0;
    queue.push_back(source);
    while let Some(c) = queue.pop_front() {
        let dc = dist[occ.index(c)];
        for n in occ.neighbors(c, conn) {
            let ni = occ.index(n);
            if dist[ni] == UNSEEN {
                dist[ni] = dc + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}

pub fn is_unreachable(d: u32) -> bool {
    d == UNSEEN
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_equals_goal() {
        let occ = Occupancy::empty([5, 5, 3]);
        let c = Cell::new(2, 2, 1);
        let p = astar(&occ, Connectivity::Spatial6, c, c).unwrap();
        assert_eq!(p.cells, vec![c]);
        assert_eq!(p.length_m(), 0.0);
    }

    #[test]
    fn free_space_is_manhattan() {
        let occ = Occupancy::empty([5, 5, 1]);
        let p = astar(
            &occ,
            Connectivity::Planar4,
            Cell::new(0, 0, 0),
            Cell::new(3, 2, 0),
        )
        .unwrap();
        assert_eq!(p.length_m(), 5.0);
        for w in p.cells.windows(2) {
            assert!(Connectivity::Planar4.adjacent(w[0], w[1]));
        }
    }

    #[test]
    fn walled_goal_is_unreachable() {
        let mut occ = Occupancy::empty([5, 5, 1]);
        let goal = Cell::new(2, 2, 0);
        for d in Connectivity::Planar4.offsets() {
            occ.set_blocked(goal.offset(*d), true);
        }
        assert!(astar(&occ, Connectivity::Planar4, Cell::new(0, 0, 0), goal).is_none());
        let field = distance_field(&occ, Connectivity::Planar4, goal);
        assert!(is_unreachable(field[occ.index(Cell::new(0, 0, 0))]));
    }

    #[test]
    fn ground_cannot_leave_the_floor() {
        let occ = Occupancy::empty([3, 3, 3]);
        assert!(astar(&occ, Connectivity::Planar4, Cell::new(0, 0, 0), Cell::new(0, 0, 1)).is_none());
        let p = astar(&occ, Connectivity::Spatial6, Cell::new(0, 0, 0), Cell::new(2, 2, 2)).unwrap();
        assert_eq!(p.moves(), 6);
    }

    #[test]
    fn detours_around_a_wall() {
        // wall at x = 2 except an opening at y = 4
        let mut occ = Occupancy::empty([5, 5, 1]);
        for y in 0..4 {
            occ.set_blocked(Cell::new(2, y, 0), true);
        }
        let p = astar(&occ, Connectivity::Planar4, Cell::new(0, 0, 0), Cell::new(4, 0, 0)).unwrap();
        assert_eq!(p.moves(), 4 + 8);
        assert!(p.cells.iter().all(|c| occ.is_free(*c)));
    }

    #[test]
    fn avoid_set_reroutes() {
        let occ = Occupancy::empty([3, 3, 1]);
        let blocker = Cell::new(1, 0, 0);
        let p = astar_avoiding(
            &occ,
            Connectivity::Planar4,
            Cell::new(0, 0, 0),
            Cell::new(2, 0, 0),
            |c| c == blocker,
        )
        .unwrap();
        assert_eq!(p.moves(), 4);
        assert!(!p.cells.contains(&blocker));
    }
}
