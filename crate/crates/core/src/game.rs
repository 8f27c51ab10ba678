//! The networked common goods game: goods with ground levels, budgeted
//! agents, and the bipartite entitlement graph between them.

use std::collections::{HashMap, HashSet};

use crate::error::{invalid, Error, Result};
use crate::utility::UtilityFunction;

/// Slack allowed on per-agent budget sums.
pub const BUDGET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Good {
    pub id: String,
    /// Ground level: resource the good holds before any agent contributes.
    pub alpha: f64,
}

impl Good {
    pub fn new(id: impl Into<String>, alpha: f64) -> Self {
        Good { id: id.into(), alpha }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: String,
    pub budget: f64,
    pub utility: UtilityFunction,
}

impl Agent {
    /// Agent with the default unit budget.
    pub fn new(id: impl Into<String>, utility: UtilityFunction) -> Self {
        Agent { id: id.into(), budget: 1.0, utility }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }
}

/// Entitlement of `agent` to `good`, both as indices into the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub good: usize,
    pub agent: usize,
}

/// A validated game instance.
///
/// Edges keep their construction order. An agent's neighbor list follows
/// that order too, so "first neighbor" means the good of the agent's first
/// listed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    goods: Vec<Good>,
    agents: Vec<Agent>,
    edges: Vec<Edge>,
    agent_edges: Vec<Vec<usize>>,
    good_edges: Vec<Vec<usize>>,
}

impl GameInstance {
    pub fn new(goods: Vec<Good>, agents: Vec<Agent>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if goods.is_empty() {
            return Err(invalid("instance needs at least one good"));
        }
        if agents.is_empty() {
            return Err(invalid("instance needs at least one agent"));
        }
        let mut seen = HashSet::new();
        for g in &goods {
            if !seen.insert(g.id.as_str()) {
                return Err(invalid(format!("duplicate good id {:?}", g.id)));
            }
            if !(g.alpha.is_finite() && g.alpha >= 0.0) {
                return Err(invalid(format!("good {:?} has ground level {}", g.id, g.alpha)));
            }
        }
        let mut seen = HashSet::new();
        for a in &agents {
            if !seen.insert(a.id.as_str()) {
                return Err(invalid(format!("duplicate agent id {:?}", a.id)));
            }
            if !(a.budget.is_finite() && a.budget > 0.0) {
                return Err(invalid(format!("agent {:?} has budget {}", a.id, a.budget)));
            }
            a.utility.validate()?;
        }

        let mut agent_edges = vec![Vec::new(); agents.len()];
        let mut good_edges = vec![Vec::new(); goods.len()];
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (e, &(good, agent)) in edges.iter().enumerate() {
            if good >= goods.len() {
                return Err(Error::Lookup { kind: "good", index: good });
            }
            if agent >= agents.len() {
                return Err(Error::Lookup { kind: "agent", index: agent });
            }
            if !seen.insert((good, agent)) {
                return Err(invalid(format!(
                    "duplicate edge ({:?}, {:?})",
                    goods[good].id, agents[agent].id
                )));
            }
            agent_edges[agent].push(e);
            good_edges[good].push(e);
            out.push(Edge { good, agent });
        }
        if let Some(j) = agent_edges.iter().position(Vec::is_empty) {
            return Err(invalid(format!("agent {:?} has no adjacent good", agents[j].id)));
        }

        Ok(GameInstance { goods, agents, edges: out, agent_edges, good_edges })
    }

    /// Builds an instance from edges given as `(good id, agent id)` pairs.
    pub fn from_named_edges<S: AsRef<str>>(
        goods: Vec<Good>,
        agents: Vec<Agent>,
        edges: &[(S, S)],
    ) -> Result<Self> {
        let good_ix: HashMap<&str, usize> =
            goods.iter().enumerate().map(|(i, g)| (g.id.as_str(), i)).collect();
        let agent_ix: HashMap<&str, usize> =
            agents.iter().enumerate().map(|(j, a)| (a.id.as_str(), j)).collect();
        let mut pairs = Vec::with_capacity(edges.len());
        for (g, a) in edges {
            let (g, a) = (g.as_ref(), a.as_ref());
            let gi = *good_ix.get(g).ok_or_else(|| invalid(format!("edge references unknown good {g:?}")))?;
            let aj = *agent_ix.get(a).ok_or_else(|| invalid(format!("edge references unknown agent {a:?}")))?;
            pairs.push((gi, aj));
        }
        Self::new(goods, agents, pairs)
    }

    pub fn goods(&self) -> &[Good] {
        &self.goods
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_goods(&self) -> usize {
        self.goods.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, j: usize) -> Result<&Agent> {
        self.agents.get(j).ok_or(Error::Lookup { kind: "agent", index: j })
    }

    /// Edge indices of agent `j`, in edge order.
    pub fn agent_edges(&self, j: usize) -> &[usize] {
        &self.agent_edges[j]
    }

    /// Edge indices incident to good `i`.
    pub fn good_edges(&self, i: usize) -> &[usize] {
        &self.good_edges[i]
    }

    pub fn degree_of_good(&self, i: usize) -> usize {
        self.good_edges[i].len()
    }

    pub fn edge_index(&self, good: usize, agent: usize) -> Option<usize> {
        self.agent_edges
            .get(agent)?
            .iter()
            .copied()
            .find(|&e| self.edges[e].good == good)
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.goods.iter().map(|g| g.alpha).collect()
    }

    /// Copy of the instance with one ground level replaced.
    pub fn with_alpha(&self, good: usize, alpha: f64) -> Result<Self> {
        let mut goods = self.goods.clone();
        goods
            .get_mut(good)
            .ok_or(Error::Lookup { kind: "good", index: good })?
            .alpha = alpha;
        Self::new(goods, self.agents.clone(), self.edge_pairs())
    }

    /// Copy of the instance with every agent's utility replaced.
    pub fn with_utilities(&self, utilities: &[UtilityFunction]) -> Result<Self> {
        if utilities.len() != self.agents.len() {
            return Err(invalid(format!(
                "{} utilities for {} agents",
                utilities.len(),
                self.agents.len()
            )));
        }
        let agents = self
            .agents
            .iter()
            .zip(utilities)
            .map(|(a, &utility)| Agent { utility, ..a.clone() })
            .collect();
        Self::new(self.goods.clone(), agents, self.edge_pairs())
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.good, e.agent)).collect()
    }

    /// True when the bipartite graph has no cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.goods.len();
        let mut parent: Vec<usize> = (0..n + self.agents.len()).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.good), find(&mut parent, n + e.agent));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// True when every good and agent lies in one connected component.
    pub fn is_connected(&self) -> bool {
        let n = self.goods.len();
        let total = n + self.agents.len();
        let mut visited = vec![false; total];
        let mut stack = vec![0];
        visited[0] = true;
        while let Some(v) = stack.pop() {
            let incident: &[usize] = if v < n { &self.good_edges[v] } else { &self.agent_edges[v - n] };
            for &e in incident {
                let w = if v < n { n + self.edges[e].agent } else { self.edges[e].good };
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        visited.into_iter().all(|v| v)
    }

    /// `l_i = alpha_i + sum_j x_ij` for every good, in good order.
    pub fn water_levels(&self, alloc: &Allocation) -> Result<Vec<f64>> {
        alloc.validate(self)?;
        Ok(self.levels_unchecked(alloc))
    }

    pub(crate) fn levels_unchecked(&self, alloc: &Allocation) -> Vec<f64> {
        let mut levels = self.alphas();
        for (e, edge) in self.edges.iter().enumerate() {
            levels[edge.good] += alloc.x[e];
        }
        levels
    }

    /// Total utility agent `j` draws from its adjacent goods.
    pub fn agent_utility(&self, alloc: &Allocation, j: usize) -> Result<f64> {
        let agent = self.agent(j)?;
        let levels = self.water_levels(alloc)?;
        Ok(self.utility_at_levels(j, agent, &levels))
    }

    fn utility_at_levels(&self, j: usize, agent: &Agent, levels: &[f64]) -> f64 {
        self.agent_edges[j]
            .iter()
            .map(|&e| agent.utility.value(levels[self.edges[e].good]))
            .sum()
    }

    /// Sum of agent utilities.
    pub fn social_welfare(&self, alloc: &Allocation) -> Result<f64> {
        let levels = self.water_levels(alloc)?;
        Ok(self
            .agents
            .iter()
            .enumerate()
            .map(|(j, a)| self.utility_at_levels(j, a, &levels))
            .sum())
    }

    /// The exact potential `sum_i sqrt(l_i)`: every unilateral improvement
    /// by any agent raises it.
    pub fn potential_psi(&self, alloc: &Allocation) -> Result<f64> {
        Ok(psi_of_levels(&self.water_levels(alloc)?))
    }
}

pub fn psi_of_levels(levels: &[f64]) -> f64 {
    levels.iter().map(|l| l.max(0.0).sqrt()).sum()
}

/// Per-edge contributions `x_ij`, indexed like [`GameInstance::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    x: Vec<f64>,
}

impl Allocation {
    pub fn zeros(instance: &GameInstance) -> Self {
        Allocation { x: vec![0.0; instance.edges.len()] }
    }

    pub fn from_edge_values(instance: &GameInstance, x: Vec<f64>) -> Result<Self> {
        let alloc = Allocation { x };
        alloc.validate(instance)?;
        Ok(alloc)
    }

    /// Builds an allocation from `(good, agent, amount)` triples. Pairs
    /// without an edge are rejected.
    pub fn from_entries(
        instance: &GameInstance,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut alloc = Self::zeros(instance);
        for (good, agent, amount) in entries {
            let e = instance
                .edge_index(good, agent)
                .ok_or_else(|| invalid(format!("no edge between good {good} and agent {agent}")))?;
            alloc.x[e] += amount;
        }
        alloc.validate(instance)?;
        Ok(alloc)
    }

    /// Every agent puts its whole budget on its first listed neighbor.
    pub fn all_on_first_neighbor(instance: &GameInstance) -> Self {
        let mut alloc = Self::zeros(instance);
        for (j, a) in instance.agents.iter().enumerate() {
            alloc.x[instance.agent_edges[j][0]] = a.budget;
        }
        alloc
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.x[edge]
    }

    pub fn set(&mut self, edge: usize, amount: f64) {
        self.x[edge] = amount;
    }

    /// Agent `j`'s contributions, ordered like [`GameInstance::agent_edges`].
    pub fn row(&self, instance: &GameInstance, j: usize) -> Vec<f64> {
        instance.agent_edges[j].iter().map(|&e| self.x[e]).collect()
    }

    pub fn set_row(&mut self, instance: &GameInstance, j: usize, row: &[f64]) -> Result<()> {
        let edges = instance
            .agent_edges
            .get(j)
            .ok_or(Error::Lookup { kind: "agent", index: j })?;
        if edges.len() != row.len() {
            return Err(invalid(format!("row of length {} for agent of degree {}", row.len(), edges.len())));
        }
        for (&e, &v) in edges.iter().zip(row) {
            self.x[e] = v;
        }
        Ok(())
    }

    /// Checks support, sign and per-agent budget constraints.
    pub fn validate(&self, instance: &GameInstance) -> Result<()> {
        if self.x.len() != instance.edges.len() {
            return Err(invalid(format!(
                "allocation has {} entries but the instance has {} edges",
                self.x.len(),
                instance.edges.len()
            )));
        }
        if let Some(v) = self.x.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("allocation entry {v} is not a nonnegative number")));
        }
        for (j, a) in instance.agents.iter().enumerate() {
            let spent: f64 = instance.agent_edges[j].iter().map(|&e| self.x[e]).sum();
            if spent > a.budget + BUDGET_TOL {
                return Err(invalid(format!("agent {:?} spends {spent} of budget {}", a.id, a.budget)));
            }
        }
        Ok(())
    }

    /// True when every agent spends its budget to within `tol`.
    pub fn is_complete(&self, instance: &GameInstance, tol: f64) -> bool {
        instance.agents.iter().enumerate().all(|(j, a)| {
            let spent: f64 = instance.agent_edges[j].iter().map(|&e| self.x[e]).sum();
            (spent - a.budget).abs() <= tol
        })
    }
}
