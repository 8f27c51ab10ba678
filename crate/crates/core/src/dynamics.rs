//! K-discretized best-response dynamics.
//!
//! Each agent splits its budget into `2K` atoms of volume `budget / 2K`.
//! When active, an agent keeps moving one atom from its highest neighbor
//! good that carries its mass to its lowest neighbor good while their
//! levels differ by at least `budget / K`. Every such move strictly lowers
//! the sorted potential [`potential_phi`] by at least one atom volume, so
//! the dynamics terminate; with `K` from [`choose_k`] the resting state is
//! an additive epsilon-approximate equilibrium.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::game::{psi_of_levels, Allocation, GameInstance};
use crate::waterfill::best_response;

/// Relative slack on the `gap >= budget / K` move test.
const GAP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Agents `0, 1, ..., m-1, 0, ...` in turn.
    RoundRobin,
    /// Any agent, uniformly at random.
    UniformRandom { seed: u64 },
    /// Uniformly among agents that still have a move.
    StaleOnly { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Whole budget on the agent's first listed neighbor.
    AllOnFirstNeighbor,
    /// Atoms dealt evenly; the remainder goes to the lowest-index neighbor.
    UniformSplit,
    /// A uniformly random composition of the atoms over the neighbors.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub epsilon: f64,
    pub schedule: Schedule,
    pub max_rounds: usize,
    pub initial_state: InitialState,
}

impl DynamicsConfig {
    pub fn new(epsilon: f64) -> Self {
        DynamicsConfig {
            epsilon,
            schedule: Schedule::RoundRobin,
            max_rounds: 1_000_000,
            initial_state: InitialState::AllOnFirstNeighbor,
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_initial_state(mut self, initial_state: InitialState) -> Self {
        self.initial_state = initial_state;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.max_rounds == 0 {
            return Err(invalid("max_rounds must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    pub agent: usize,
    pub moves: u64,
    pub phi: f64,
    pub psi: f64,
    /// Smallest potential drop caused by a single move this round.
    pub min_phi_drop: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub rounds: Vec<RoundRecord>,
    pub converged: bool,
    pub total_moves: u64,
    pub k: u64,
    pub initial_phi: f64,
    pub initial_psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsOutcome {
    pub alloc: Allocation,
    pub trace: DynamicsTrace,
}

/// Discretization parameter `K = ceil(max_j budget_j / U_j^{-1}(epsilon / n))`,
/// at least 1, where `n` is the number of goods.
///
/// For `U(x) = x^p` and unit budgets this is `(n / epsilon)^(1/p)`.
pub fn choose_k(instance: &GameInstance, epsilon: f64) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("epsilon {epsilon} must be positive")));
    }
    let share = epsilon / instance.num_goods() as f64;
    let mut worst: f64 = 1.0;
    for a in instance.agents() {
        let step = a.utility.inverse_value(share)?;
        let k = a.budget / step;
        if !(step > 0.0 && k.is_finite() && k < 2f64.powi(52)) {
            return Err(invalid(format!(
                "epsilon/n = {share} is outside the usable range of {}",
                a.utility
            )));
        }
        worst = worst.max(k);
    }
    // Absorb rounding so that an exact integer does not ceil one step up.
    Ok(((worst * (1.0 - 1e-12)).ceil() as u64).max(1))
}

fn phi_with_order(levels: &[f64], order: &[usize]) -> f64 {
    let n = order.len();
    order.iter().enumerate().map(|(r, &g)| (n - 1 - r) as f64 * levels[g]).sum()
}

/// Sorted potential `sum_r (n - r) * l_(r)` over levels in non-increasing
/// order (`r` 1-based, ties by good index).
pub fn phi_of_levels(levels: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]).then(a.cmp(&b)));
    phi_with_order(levels, &order)
}

pub fn potential_phi(instance: &GameInstance, alloc: &Allocation) -> Result<f64> {
    Ok(phi_of_levels(&instance.water_levels(alloc)?))
}

/// Integer atom counts per edge, with levels and the level order kept in
/// step.
#[derive(Debug, Clone)]
pub struct AtomState<'a> {
    instance: &'a GameInstance,
    k: u64,
    counts: Vec<u64>,
    levels: Vec<f64>,
    /// Goods in non-increasing level order, ties by index.
    order: Vec<usize>,
    position: Vec<usize>,
    /// Scratch: edge of the active agent at each good, or `usize::MAX`.
    edge_at: Vec<usize>,
}

impl<'a> AtomState<'a> {
    pub fn new(instance: &'a GameInstance, k: u64, init: InitialState) -> Result<Self> {
        if k == 0 {
            return Err(invalid("K must be at least 1"));
        }
        let atoms = 2 * k;
        let mut counts = vec![0u64; instance.edges().len()];
        let mut rng = match init {
            InitialState::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        for j in 0..instance.num_agents() {
            let edges = instance.agent_edges(j);
            match init {
                InitialState::AllOnFirstNeighbor => counts[edges[0]] = atoms,
                InitialState::UniformSplit => {
                    let deg = edges.len() as u64;
                    for &e in edges {
                        counts[e] = atoms / deg;
                    }
                    let lowest = *edges
                        .iter()
                        .min_by_key(|&&e| instance.edges()[e].good)
                        .expect("agent has a neighbor");
                    counts[lowest] += atoms % deg;
                }
                InitialState::Random { .. } => {
                    let rng = rng.as_mut().expect("seeded");
                    let mut cuts: Vec<u64> = (1..edges.len()).map(|_| rng.gen_range(0..=atoms)).collect();
                    cuts.sort_unstable();
                    let mut prev = 0;
                    for (slot, &e) in edges.iter().enumerate() {
                        let cut = cuts.get(slot).copied().unwrap_or(atoms);
                        counts[e] = cut - prev;
                        prev = cut;
                    }
                }
            }
        }
        Ok(Self::with_counts(instance, k, counts))
    }

    /// Reads an allocation whose entries are multiples of each agent's atom
    /// volume.
    pub fn from_allocation(instance: &'a GameInstance, alloc: &Allocation, k: u64) -> Result<Self> {
        alloc.validate(instance)?;
        if k == 0 {
            return Err(invalid("K must be at least 1"));
        }
        let mut counts = Vec::with_capacity(alloc.values().len());
        for (e, edge) in instance.edges().iter().enumerate() {
            let vol = instance.agents()[edge.agent].budget / (2 * k) as f64;
            let atoms = alloc.get(e) / vol;
            let rounded = atoms.round();
            if (atoms - rounded).abs() > 1e-6 {
                return Err(invalid(format!("entry {} is not a multiple of the atom volume {vol}", alloc.get(e))));
            }
            counts.push(rounded as u64);
        }
        Ok(Self::with_counts(instance, k, counts))
    }

    fn with_counts(instance: &'a GameInstance, k: u64, counts: Vec<u64>) -> Self {
        let n = instance.num_goods();
        let mut state = AtomState {
            instance,
            k,
            counts,
            levels: vec![0.0; n],
            order: (0..n).collect(),
            position: vec![0; n],
            edge_at: vec![usize::MAX; n],
        };
        for g in 0..n {
            state.levels[g] = state.level_of(g);
        }
        let levels = &state.levels;
        state.order.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]).then(a.cmp(&b)));
        for (r, &g) in state.order.iter().enumerate() {
            state.position[g] = r;
        }
        state
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn phi(&self) -> f64 {
        phi_with_order(&self.levels, &self.order)
    }

    pub fn psi(&self) -> f64 {
        psi_of_levels(&self.levels)
    }

    fn volume(&self, agent: usize) -> f64 {
        self.instance.agents()[agent].budget / (2 * self.k) as f64
    }

    fn level_of(&self, good: usize) -> f64 {
        let inst = self.instance;
        inst.goods()[good].alpha
            + inst
                .good_edges(good)
                .iter()
                .map(|&e| self.counts[e] as f64 * self.volume(inst.edges()[e].agent))
                .sum::<f64>()
    }

    pub fn to_allocation(&self) -> Allocation {
        let mut alloc = Allocation::zeros(self.instance);
        for (e, edge) in self.instance.edges().iter().enumerate() {
            alloc.set(e, self.counts[e] as f64 * self.volume(edge.agent));
        }
        alloc
    }

    fn precedes(&self, a: usize, b: usize) -> bool {
        let (la, lb) = (self.levels[a], self.levels[b]);
        la > lb || (la == lb && a < b)
    }

    /// Restores the order after `good`'s level changed by shifting it left
    /// or right past its neighbors.
    fn reposition(&mut self, good: usize) {
        let mut r = self.position[good];
        while r > 0 && self.precedes(good, self.order[r - 1]) {
            let other = self.order[r - 1];
            self.order[r] = other;
            self.position[other] = r;
            r -= 1;
        }
        while r + 1 < self.order.len() && self.precedes(self.order[r + 1], good) {
            let other = self.order[r + 1];
            self.order[r] = other;
            self.position[other] = r;
            r += 1;
        }
        self.order[r] = good;
        self.position[good] = r;
    }

    fn mark(&mut self, agent: usize) {
        for &e in self.instance.agent_edges(agent) {
            self.edge_at[self.instance.edges()[e].good] = e;
        }
    }

    fn unmark(&mut self, agent: usize) {
        for &e in self.instance.agent_edges(agent) {
            self.edge_at[self.instance.edges()[e].good] = usize::MAX;
        }
    }

    /// Highest neighbor carrying the agent's mass and lowest neighbor,
    /// as edge indices, when their gap allows a move. Requires `mark`.
    fn candidate_move(&self, agent: usize) -> Option<(usize, usize)> {
        let src = self
            .order
            .iter()
            .map(|&g| self.edge_at[g])
            .find(|&e| e != usize::MAX && self.counts[e] > 0)?;
        let dst = self.order.iter().rev().map(|&g| self.edge_at[g]).find(|&e| e != usize::MAX)?;
        let edges = self.instance.edges();
        let (gs, gd) = (edges[src].good, edges[dst].good);
        if self.position[gs] >= self.position[gd] {
            return None;
        }
        let threshold = 2.0 * self.volume(agent) * (1.0 - GAP_SLACK);
        (self.levels[gs] - self.levels[gd] >= threshold).then_some((src, dst))
    }

    /// True when `agent` would move at least one atom if activated.
    pub fn has_move(&mut self, agent: usize) -> bool {
        self.mark(agent);
        let found = self.candidate_move(agent).is_some();
        self.unmark(agent);
        found
    }

    /// Runs the agent's discrete best response to completion. Returns the
    /// number of atoms moved and the smallest single-move drop in phi.
    pub fn sweep(&mut self, agent: usize) -> (u64, Option<f64>) {
        self.mark(agent);
        let mut moves = 0;
        let mut min_drop: Option<f64> = None;
        let mut phi = self.phi();
        while let Some((src, dst)) = self.candidate_move(agent) {
            let edges = self.instance.edges();
            let (gs, gd) = (edges[src].good, edges[dst].good);
            self.counts[src] -= 1;
            self.counts[dst] += 1;
            self.levels[gs] = self.level_of(gs);
            self.levels[gd] = self.level_of(gd);
            self.reposition(gs);
            self.reposition(gd);
            moves += 1;
            let next = self.phi();
            let drop = phi - next;
            min_drop = Some(min_drop.map_or(drop, |d| d.min(drop)));
            phi = next;
        }
        self.unmark(agent);
        (moves, min_drop)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// New row for the agent, ordered like its edges.
    pub row: Vec<f64>,
    pub moves: u64,
}

/// One agent's discrete best response from an atom-aligned allocation.
pub fn discrete_best_response_sweep(
    instance: &GameInstance,
    alloc: &Allocation,
    agent: usize,
    k: u64,
) -> Result<SweepResult> {
    instance.agent(agent)?;
    let mut state = AtomState::from_allocation(instance, alloc, k)?;
    let (moves, _) = state.sweep(agent);
    Ok(SweepResult { row: state.to_allocation().row(instance, agent), moves })
}

pub fn run_dynamics(instance: &GameInstance, config: &DynamicsConfig) -> Result<DynamicsOutcome> {
    config.validate()?;
    let k = choose_k(instance, config.epsilon)?;
    run_dynamics_with_k(instance, config, k)
}

/// As [`run_dynamics`] with an explicit discretization parameter.
pub fn run_dynamics_with_k(instance: &GameInstance, config: &DynamicsConfig, k: u64) -> Result<DynamicsOutcome> {
    config.validate()?;
    let mut state = AtomState::new(instance, k, config.initial_state)?;
    let m = instance.num_agents();
    let mut rng = match config.schedule {
        Schedule::UniformRandom { seed } | Schedule::StaleOnly { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Schedule::RoundRobin => None,
    };

    let initial_phi = state.phi();
    let initial_psi = state.psi();
    let mut rounds = Vec::new();
    let mut total_moves = 0;
    let mut converged = false;
    let mut movers = Vec::with_capacity(m);

    for round in 1..=config.max_rounds + 1 {
        movers.clear();
        movers.extend((0..m).filter(|&j| state.has_move(j)));
        if movers.is_empty() {
            converged = true;
            break;
        }
        if round > config.max_rounds {
            break;
        }
        let agent = match config.schedule {
            Schedule::RoundRobin => (round - 1) % m,
            Schedule::UniformRandom { .. } => rng.as_mut().expect("seeded").gen_range(0..m),
            Schedule::StaleOnly { .. } => movers[rng.as_mut().expect("seeded").gen_range(0..movers.len())],
        };
        let (moves, min_phi_drop) = state.sweep(agent);
        total_moves += moves;
        rounds.push(RoundRecord { round, agent, moves, phi: state.phi(), psi: state.psi(), min_phi_drop });
    }

    Ok(DynamicsOutcome {
        alloc: state.to_allocation(),
        trace: DynamicsTrace { rounds, converged, total_moves, k, initial_phi, initial_psi },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsNeReport {
    pub ok: bool,
    pub worst_gap: f64,
    pub worst_agent: usize,
    /// Best-response utility minus current utility, per agent.
    pub gaps: Vec<f64>,
}

/// Additive epsilon-equilibrium check against continuous best responses.
pub fn is_eps_ne(instance: &GameInstance, alloc: &Allocation, epsilon: f64) -> Result<EpsNeReport> {
    let levels = instance.water_levels(alloc)?;
    for (j, a) in instance.agents().iter().enumerate() {
        let spent: f64 = instance.agent_edges(j).iter().map(|&e| alloc.get(e)).sum();
        if (spent - a.budget).abs() > 1e-9 * a.budget.max(1.0) {
            return Err(invalid(format!("agent {:?} spends {spent} of budget {}", a.id, a.budget)));
        }
    }
    let mut gaps = Vec::with_capacity(instance.num_agents());
    for (j, a) in instance.agents().iter().enumerate() {
        let br = best_response(instance, alloc, j)?;
        let mut current = 0.0;
        let mut best = 0.0;
        for (&e, &x) in instance.agent_edges(j).iter().zip(&br) {
            let l = levels[instance.edges()[e].good];
            current += a.utility.value(l);
            best += a.utility.value((l - alloc.get(e)).max(0.0) + x);
        }
        gaps.push(best - current);
    }
    let (worst_agent, worst_gap) = gaps
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, g)| if g > acc.1 { (j, g) } else { acc });
    Ok(EpsNeReport { ok: worst_gap <= epsilon, worst_gap, worst_agent, gaps })
}
