use std::collections::{HashMap, HashSet, VecDeque};

use rand::seq::index::sample;
use rand::Rng;

use super::config::{ScenarioConfig, TaskMode};
use super::entity::{Agent, AgentStatus, Job, Task, TaskId, TaskStatus};
use super::grid::{AgentKind, Cell, Connectivity, Occupancy};
use crate::allocators::{resolve_conflicts, AllocationOutcome};
use crate::error::{Error, Result};
use crate::pathing::{
    advance, astar, replan, scenario_c_max, travel_cost, CostMatrix, DistanceCache, MoveResult,
    ReservationTable, Traffic,
};
use crate::rng::{stream, Purpose, StreamRng};

const REJECTION_TRIES: usize = 64;

/// An agent reaching its task.
#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub agent: usize,
    pub task: TaskId,
    pub slot: usize,
    pub moves: u32,
    /// Realized travel time: moves made divided by the agent's speed.
    pub travel_time_s: f64,
    pub assigned_step: u64,
    pub completed_step: u64,
}

/// A task handed to an agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentRecord {
    pub agent: usize,
    pub task: TaskId,
    pub slot: usize,
    pub step: u64,
    /// Travel time estimate at decision time.
    pub planned_cost_s: f64,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub outcome: AllocationOutcome,
    /// Cost matrix the decisions were made against.
    pub costs: CostMatrix,
    pub assignments: Vec<AssignmentRecord>,
    pub completions: Vec<Completion>,
    /// Movement of each agent that had somewhere to go.
    pub moves: Vec<Option<MoveResult>>,
    /// Fixed mode: every task complete.
    pub done: bool,
    /// Horizon reached.
    pub truncated: bool,
}

impl StepResult {
    pub fn finished(&self) -> bool {
        self.done || self.truncated
    }
}

/// Discrete 3D world with agents, obstacles and a pool of task slots.
#[derive(Clone, Debug)]
pub struct GridWorld {
    config: ScenarioConfig,
    seed: u64,
    occupancy: Occupancy,
    /// Cells where tasks may appear.
    task_region: Vec<Cell>,
    agents: Vec<Agent>,
    /// `None` marks a slot retired in fixed mode.
    slots: Vec<Option<Task>>,
    clock: u64,
    next_task_id: u64,
    c_max: f64,
    replacement_rng: StreamRng,
    reservations: ReservationTable,
    distances: DistanceCache,
    costs: CostMatrix,
}

impl GridWorld {
    /// Random world: obstacles, then agents, then tasks, each on distinct
    /// free cells. Identical `(config, seed)` give identical worlds.
    ///
    /// Ground agents and tasks are drawn from the largest connected free
    /// region of the floor; aerial agents from the 3D region around it, so
    /// every task starts reachable by every agent. When the team has no
    /// ground agents, tasks may sit anywhere in the 3D region.
    pub fn new(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = stream(seed, Purpose::Placement, 0);
        let total = config.cell_count();

        let mut occupancy = Occupancy::empty(config.dims);
        let n_obstacles = (config.obstacle_density * total as f64).round() as usize;
        for i in sample(&mut rng, total, n_obstacles).into_vec() {
            let c = occupancy.cell(i);
            occupancy.set_blocked(c, true);
        }

        let floor = largest_component(&occupancy, Connectivity::Planar4, |c| c.z == 0);
        let air = match floor.first() {
            Some(&c) => component_of(&occupancy, Connectivity::Spatial6, c),
            None => largest_component(&occupancy, Connectivity::Spatial6, |_| true),
        };
        let task_region = if config.has_ground_agents() {
            floor.clone()
        } else {
            air.clone()
        };

        let mut taken = HashSet::new();
        let mut agents = Vec::with_capacity(config.n_agents());
        for (id, kind) in config.agent_kinds().into_iter().enumerate() {
            let region = match kind {
                AgentKind::Ground => &floor,
                AgentKind::Aerial => &air,
            };
            let cell = pick_cell(&mut rng, region, &taken, "agent")?;
            taken.insert(cell);
            agents.push(Agent::new(id, kind, cell));
        }
        let mut slots = Vec::with_capacity(config.task_slots);
        for j in 0..config.task_slots {
            let cell = pick_cell(&mut rng, &task_region, &taken, "task")?;
            taken.insert(cell);
            slots.push(Some(Task {
                id: TaskId(j as u64),
                location: cell,
                status: TaskStatus::Waiting,
                spawn_step: 0,
            }));
        }
        Ok(Self::assemble(config, seed, occupancy, task_region, agents, slots))
    }

    /// Hand-built world. Tasks may be placed on any free cell; replacement
    /// tasks are drawn from the free cells of the floor (or of the whole box
    /// when there are no ground agents).
    pub fn from_layout(
        config: &ScenarioConfig,
        occupancy: Occupancy,
        agents: &[(AgentKind, Cell)],
        tasks: &[Cell],
        seed: u64,
    ) -> Result<Self> {
        if occupancy.dims() != config.dims {
            return Err(Error::Shape(format!(
                "occupancy {:?} vs config {:?}",
                occupancy.dims(),
                config.dims
            )));
        }
        if agents.is_empty() || tasks.is_empty() {
            return Err(Error::config("layout needs at least one agent and one task"));
        }
        let agents: Vec<Agent> = agents
            .iter()
            .enumerate()
            .map(|(id, &(kind, cell))| Agent::new(id, kind, cell))
            .collect();
        let slots: Vec<Option<Task>> = tasks
            .iter()
            .enumerate()
            .map(|(j, &cell)| {
                Some(Task {
                    id: TaskId(j as u64),
                    location: cell,
                    status: TaskStatus::Waiting,
                    spawn_step: 0,
                })
            })
            .collect();
        let mut config = config.clone();
        config.task_slots = slots.len();
        let mut groups: Vec<super::AgentGroup> = Vec::new();
        for a in &agents {
            match groups.last_mut() {
                Some(g) if g.kind == a.kind => g.count += 1,
                _ => groups.push(super::AgentGroup { kind: a.kind, count: 1 }),
            }
        }
        config.agents = groups;
        let ground = config.has_ground_agents();
        let task_region: Vec<Cell> = (0..occupancy.len())
            .map(|i| occupancy.cell(i))
            .filter(|c| occupancy.is_free(*c) && (!ground || c.z == 0))
            .collect();
        let world = Self::assemble(&config, seed, occupancy, task_region, agents, slots);
        world.check_invariants().map_err(Error::config)?;
        Ok(world)
    }

    fn assemble(
        config: &ScenarioConfig,
        seed: u64,
        occupancy: Occupancy,
        task_region: Vec<Cell>,
        agents: Vec<Agent>,
        slots: Vec<Option<Task>>,
    ) -> Self {
        let c_max = scenario_c_max(config.dims, config.min_velocity());
        let next_task_id = slots.len() as u64;
        let mut world = GridWorld {
            config: config.clone(),
            seed,
            occupancy,
            task_region,
            agents,
            slots,
            clock: 0,
            next_task_id,
            c_max,
            replacement_rng: stream(seed, Purpose::Replacement, 0),
            reservations: ReservationTable::new(),
            distances: DistanceCache::new(),
            costs: CostMatrix::from_raw(Vec::new(), c_max),
        };
        world.refresh_costs();
        world
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn slots(&self) -> &[Option<Task>] {
        &self.slots
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn mode(&self) -> TaskMode {
        self.config.mode
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn m_tasks(&self) -> usize {
        self.slots.len()
    }

    pub fn reservations(&self) -> &ReservationTable {
        &self.reservations
    }

    /// Costs for the current state.
    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    pub fn waiting_mask(&self) -> Vec<bool> {
        self.slots
            .iter()
            .map(|s| matches!(s, Some(t) if t.status == TaskStatus::Waiting))
            .collect()
    }

    pub fn eligibility(&self) -> Vec<bool> {
        self.agents.iter().map(Agent::is_free).collect()
    }

    pub fn all_tasks_complete(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    /// Refills `slot` after its task was allocated.
    ///
    /// In fixed mode there is no replacement: the slot is retired and `None`
    /// is returned.
    pub fn replace_task(&mut self, slot: usize) -> Result<Option<Task>> {
        match self.slots.get(slot) {
            Some(Some(t)) if t.status == TaskStatus::Assigned => {}
            _ => {
                return Err(Error::InvalidState(format!(
                    "slot {slot} does not hold an assigned task"
                )))
            }
        }
        if self.config.mode == TaskMode::Fixed {
            self.slots[slot] = None;
            return Ok(None);
        }
        let mut taken: HashSet<Cell> = self.agents.iter().map(|a| a.position).collect();
        taken.extend(self.agents.iter().filter_map(Agent::goal));
        taken.extend(self.slots.iter().flatten().map(|t| t.location));
        let location = pick_cell(&mut self.replacement_rng, &self.task_region, &taken, "replacement task")?;
        let task = Task {
            id: TaskId(self.next_task_id),
            location,
            status: TaskStatus::Waiting,
            spawn_step: self.clock,
        };
        self.next_task_id += 1;
        self.slots[slot] = Some(task.clone());
        Ok(Some(task))
    }

    /// One decision step: `actions[i]` is agent `i`'s request (0 = none,
    /// `j` = slot `j - 1`). Contested requests go to the cheapest requester.
    pub fn step(&mut self, actions: &[usize]) -> Result<StepResult> {
        if actions.len() != self.agents.len() {
            return Err(Error::Shape(format!(
                "{} actions for {} agents",
                actions.len(),
                self.agents.len()
            )));
        }
        let m = self.slots.len();
        if let Some((agent, &action)) = actions.iter().enumerate().find(|(_, &a)| a > m) {
            return Err(Error::InvalidAction { agent, action, max: m });
        }
        let outcome = resolve_conflicts(actions, &self.costs, &self.eligibility(), &self.waiting_mask());
        self.apply(outcome)
    }

    /// Executes an already resolved allocation (used by centralized
    /// allocators), then moves every agent one step.
    pub fn apply(&mut self, outcome: AllocationOutcome) -> Result<StepResult> {
        let costs = self.costs.clone();

        for a in &mut self.agents {
            match a.status {
                AgentStatus::Complete => a.status = AgentStatus::Idle,
                AgentStatus::Accept => a.status = AgentStatus::Assign,
                _ => {}
            }
        }

        let mut assignments = Vec::with_capacity(outcome.assignments.len());
        for asg in &outcome.assignments {
            assignments.push(self.assign(asg.agent, asg.slot, &costs)?);
        }

        let mut completions = Vec::new();
        let moves = self.move_agents(&mut completions);

        self.clock += 1;
        self.reservations.purge_before(self.clock);
        self.refresh_costs();

        let done = self.config.mode == TaskMode::Fixed && self.all_tasks_complete();
        let truncated = !done && self.clock >= self.config.episode_len;
        Ok(StepResult {
            outcome,
            costs,
            assignments,
            completions,
            moves,
            done,
            truncated,
        })
    }

    fn assign(&mut self, agent: usize, slot: usize, costs: &CostMatrix) -> Result<AssignmentRecord> {
        let task = match self.slots.get_mut(slot) {
            Some(Some(t)) if t.status == TaskStatus::Waiting => t,
            _ => {
                return Err(Error::InvalidState(format!(
                    "slot {slot} is not waiting; cannot assign it to agent {agent}"
                )))
            }
        };
        let a = self
            .agents
            .get_mut(agent)
            .ok_or_else(|| Error::InvalidState(format!("no agent {agent}")))?;
        if !a.is_free() {
            return Err(Error::InvalidState(format!("agent {agent} already holds a task")));
        }
        task.status = TaskStatus::Assigned;
        let (task_id, location) = (task.id, task.location);

        a.status = AgentStatus::Accept;
        a.blockage_count = 0;
        a.job = Some(Job {
            task: task_id,
            slot,
            location,
            assigned_step: self.clock,
            moves: 0,
        });
        a.path = astar(&self.occupancy, a.kind.connectivity(), a.position, location)
            .map(|p| p.cells.into_iter().skip(1).collect())
            .unwrap_or_default();
        self.reservations.release_agent(agent);
        self.reservations.reserve_path(agent, a.path.iter(), self.clock + 1);

        if self.config.mode == TaskMode::Continuous {
            self.replace_task(slot)?;
        }
        Ok(AssignmentRecord {
            agent,
            task: task_id,
            slot,
            step: self.clock,
            planned_cost_s: costs.raw[agent][slot],
        })
    }

    fn move_agents(&mut self, completions: &mut Vec<Completion>) -> Vec<Option<MoveResult>> {
        let mut occupants: HashMap<Cell, usize> =
            self.agents.iter().map(|a| (a.position, a.id)).collect();
        let mut results = vec![None; self.agents.len()];
        let clock = self.clock;
        let mode = self.config.mode;

        for i in 0..self.agents.len() {
            let Some(goal) = self.agents[i].goal() else {
                continue;
            };
            if self.agents[i].position != goal {
                let mut traffic = Traffic {
                    occupancy: &self.occupancy,
                    occupants: &mut occupants,
                    reservations: &mut self.reservations,
                    clock,
                    threshold: self.config.blockage_threshold,
                };
                let agent = &mut self.agents[i];
                let result = if agent.path.is_empty() {
                    // no route at assignment time or after the last replan
                    if replan(agent, &mut traffic) {
                        MoveResult::Replanned
                    } else {
                        MoveResult::Blocked {
                            count: agent.blockage_count,
                        }
                    }
                } else {
                    advance(agent, &mut traffic)
                };
                if let MoveResult::Moved { .. } = result {
                    if let Some(job) = agent.job.as_mut() {
                        job.moves += 1;
                    }
                }
                results[i] = Some(result);
            }

            let agent = &mut self.agents[i];
            if agent.position == goal {
                let job = agent.job.take().expect("goal implies job");
                agent.status = AgentStatus::Complete;
                agent.path.clear();
                agent.blockage_count = 0;
                self.reservations.release_agent(i);
                completions.push(Completion {
                    agent: i,
                    task: job.task,
                    slot: job.slot,
                    moves: job.moves,
                    travel_time_s: travel_cost(job.moves as f64, agent.velocity),
                    assigned_step: job.assigned_step,
                    completed_step: clock + 1,
                });
                if mode == TaskMode::Fixed {
                    self.slots[job.slot] = None;
                }
            }
        }
        results
    }

    fn refresh_costs(&mut self) {
        let mut cache = std::mem::take(&mut self.distances);
        self.costs = cache.cost_matrix(self);
        self.distances = cache;
    }

    /// Exhaustive scan of the world invariants.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut cells = HashSet::new();
        for a in &self.agents {
            if !self.occupancy.is_free(a.position) {
                return Err(format!("agent {} on obstacle {}", a.id, a.position));
            }
            if !cells.insert(a.position) {
                return Err(format!("two agents share {}", a.position));
            }
            if a.kind == AgentKind::Ground && a.position.z != 0 {
                return Err(format!("ground agent {} off the floor", a.id));
            }
            if a.job.is_some() != a.is_assigned() {
                return Err(format!("agent {} status {:?} vs job {:?}", a.id, a.status, a.job));
            }
            if a.velocity <= 0.0 {
                return Err(format!("agent {} has non-positive velocity", a.id));
            }
        }
        for t in self.slots.iter().flatten() {
            if !self.occupancy.is_free(t.location) {
                return Err(format!("task {} on obstacle {}", t.id, t.location));
            }
        }
        if self.config.mode == TaskMode::Continuous && self.slots.iter().any(Option::is_none) {
            return Err("continuous mode lost a task slot".into());
        }
        let mut seen = HashSet::new();
        for (cell, step, _) in self.reservations.iter() {
            if step < self.clock {
                return Err(format!("stale reservation at step {step}"));
            }
            if !seen.insert((cell, step)) {
                return Err(format!("double reservation of {cell} at {step}"));
            }
        }
        Ok(())
    }
}

/// Uniform draw from the cells of `region` not in `taken`.
fn pick_cell(
    rng: &mut StreamRng,
    region: &[Cell],
    taken: &HashSet<Cell>,
    what: &'static str,
) -> Result<Cell> {
    if !region.is_empty() {
        for _ in 0..REJECTION_TRIES {
            let c = region[rng.gen_range(0..region.len())];
            if !taken.contains(&c) {
                return Ok(c);
            }
        }
    }
    // crowded region: draw from the explicit list of what is left
    let open: Vec<Cell> = region.iter().copied().filter(|c| !taken.contains(c)).collect();
    if open.is_empty() {
        return Err(Error::Placement {
            what,
            attempts: REJECTION_TRIES,
        });
    }
    Ok(open[rng.gen_range(0..open.len())])
}

/// Cells reachable from `start` under `conn`, in index order.
fn component_of(occ: &Occupancy, conn: Connectivity, start: Cell) -> Vec<Cell> {
    let mut seen = vec![false; occ.len()];
    let mut out = flood(occ, conn, start, &mut seen);
    out.sort_by_key(|c| occ.index(*c));
    out
}

/// Largest connected set of free cells satisfying `admit`; ties go to the
/// component containing the lowest cell index.
fn largest_component(occ: &Occupancy, conn: Connectivity, admit: impl Fn(Cell) -> bool) -> Vec<Cell> {
    let mut seen = vec![false; occ.len()];
    let mut best: Vec<Cell> = Vec::new();
    for i in 0..occ.len() {
        let c = occ.cell(i);
        if seen[i] || !occ.is_free(c) || !admit(c) || !conn.admits(c) {
            continue;
        }
        let comp = flood(occ, conn, c, &mut seen);
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_by_key(|c| occ.index(*c));
    best
}

fn flood(occ: &Occupancy, conn: Connectivity, start: Cell, seen: &mut [bool]) -> Vec<Cell> {
    let mut out = Vec::new();
    if !occ.is_free(start) || !conn.admits(start) {
        return out;
    }
    let mut queue = VecDeque::from([start]);
    seen[occ.index(start)] = true;
    while let Some(c) = queue.pop_front() {
        out.push(c);
        for n in occ.neighbors(c, conn) {
            let ni = occ.index(n);
            if !seen[ni] {
                seen[ni] = true;
                queue.push_back(n);
            }
        }
    }
    out
}
