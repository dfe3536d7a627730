use serde::{Deserialize, Serialize};

/// A lattice cell. One cell is one meter on a side.
///
/// Ordering is lexicographic on `(x, y, z)`; the planner relies on it for
/// deterministic tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Cell { x, y, z }
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) + self.z.abs_diff(other.z)
    }

    pub fn offset(self, d: [i32; 3]) -> Cell {
        Cell::new(self.x + d[0], self.y + d[1], self.z + d[2])
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Move set available to an agent kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connectivity {
    /// 4-connected moves in the z = 0 plane.
    Planar4,
    /// 6-connected moves in 3D.
    Spatial6,
}

const PLANAR: [[i32; 3]; 4] = [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0]];
const SPATIAL: [[i32; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

impl Connectivity {
    pub fn offsets(self) -> &'static [[i32; 3]] {
        match self {
            Connectivity::Planar4 => &PLANAR,
            Connectivity::Spatial6 => &SPATIAL,
        }
    }

    /// Whether `cell` lies in the region this move set can ever visit.
    pub fn admits(self, cell: Cell) -> bool {
        match self {
            Connectivity::Planar4 => cell.z == 0,
            Connectivity::Spatial6 => true,
        }
    }

    pub fn adjacent(self, a: Cell, b: Cell) -> bool {
        self.admits(a) && self.admits(b) && a.manhattan(b) == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Ground,
    Aerial,
}

impl AgentKind {
    /// Nominal speed in m/s.
    pub fn velocity(self) -> f64 {
        match self {
            AgentKind::Ground => 3.0,
            AgentKind::Aerial => 5.0,
        }
    }

    pub fn connectivity(self) -> Connectivity {
        match self {
            AgentKind::Ground => Connectivity::Planar4,
            AgentKind::Aerial => Connectivity::Spatial6,
        }
    }
}

/// Static occupancy of a box-shaped lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occupancy {
    dims: [usize; 3],
    blocked: Vec<bool>,
}

impl Occupancy {
    pub fn empty(dims: [usize; 3]) -> Self {
        Occupancy {
            dims,
            blocked: vec![false; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0
            && c.y >= 0
            && c.z >= 0
            && (c.x as usize) < self.dims[0]
            && (c.y as usize) < self.dims[1]
            && (c.z as usize) < self.dims[2]
    }

    /// Flat index; `c` must be in bounds.
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.contains(c), "{c} outside {:?}", self.dims);
        (c.z as usize * self.dims[1] + c.y as usize) * self.dims[0] + c.x as usize
    }

    pub fn cell(&self, index: usize) -> Cell {
        let x = index % self.dims[0];
        let y = (index / self.dims[0]) % self.dims[1];
        let z = index / (self.dims[0] * self.dims[1]);
        Cell::new(x as i32, y as i32, z as i32)
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[self.index(c)]
    }

    /// In bounds and not an obstacle.
    pub fn is_free(&self, c: Cell) -> bool {
        self.contains(c) && !self.blocked[self.index(c)]
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        let i = self.index(c);
        self.blocked[i] = blocked;
    }

    pub fn obstacle_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Cell> + '_ {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| self.cell(i))
    }

    /// Free neighbors of `c` under `conn`.
    pub fn neighbors(&self, c: Cell, conn: Connectivity) -> impl Iterator<Item = Cell> + '_ {
        conn.offsets()
            .iter()
            .map(move |d| c.offset(*d))
            .filter(move |n| self.is_free(*n))
    }
}
