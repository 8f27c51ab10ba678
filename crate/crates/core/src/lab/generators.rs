//! Seeded random instance families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::game::{Agent, GameInstance, Good};
use crate::utility::UtilityFunction;

/// Attempts before [`random_bipartite`] gives up on drawing a connected graph.
const MAX_ATTEMPTS: usize = 10_000;

/// How agent utilities are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilitySampler {
    /// Every agent gets the same utility.
    Fixed(UtilityFunction),
    /// Fair coin between `x^p` with `p` in `[0.5, 0.95]` and
    /// `c ln(1 + x)` with `c` in `[0.5, 4]`.
    Mixed,
}

impl UtilitySampler {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> UtilityFunction {
        match *self {
            UtilitySampler::Fixed(u) => u,
            UtilitySampler::Mixed => {
                if rng.gen_bool(0.5) {
                    UtilityFunction::Power { p: rng.gen_range(0.5..=0.95) }
                } else {
                    UtilityFunction::Log { c: rng.gen_range(0.5..=4.0) }
                }
            }
        }
    }
}

fn check_alpha_max(alpha_max: f64) -> Result<()> {
    if alpha_max.is_finite() && alpha_max >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha_max {alpha_max} must be a finite nonnegative number")))
    }
}

fn draw_alpha(rng: &mut ChaCha8Rng, alpha_max: f64) -> f64 {
    if alpha_max > 0.0 {
        rng.gen_range(0.0..alpha_max)
    } else {
        0.0
    }
}

/// Connected random bipartite instance with unit budgets; each of the
/// `goods * agents` possible edges is present with probability `edge_prob`,
/// isolated nodes are joined to a random partner, and graphs that are still
/// not connected are redrawn. Ground levels are uniform in `[0, alpha_max)`.
pub fn random_bipartite(
    goods: usize,
    agents: usize,
    edge_prob: f64,
    alpha_max: f64,
    sampler: &UtilitySampler,
    seed: u64,
) -> Result<GameInstance> {
    if goods == 0 || agents == 0 {
        return Err(invalid(format!("need at least one good and one agent, got {goods} and {agents}")));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(invalid(format!("edge probability {edge_prob} not in (0, 1]")));
    }
    check_alpha_max(alpha_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goods_list: Vec<Good> = (0..goods).map(|i| Good::new(format!("p{i}"), draw_alpha(&mut rng, alpha_max))).collect();
    let agents_list: Vec<Agent> = (0..agents).map(|j| Agent::new(format!("a{j}"), sampler.sample(&mut rng))).collect();
    for _ in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for j in 0..agents {
            for i in 0..goods {
                if rng.gen_bool(edge_prob) {
                    edges.push((i, j));
                }
            }
        }
        // Isolated nodes get one edge to a uniformly random partner.
        let mut agent_seen = vec![false; agents];
        let mut good_seen = vec![false; goods];
        for &(i, j) in &edges {
            good_seen[i] = true;
            agent_seen[j] = true;
        }
        for j in 0..agents {
            if !agent_seen[j] {
                let i = rng.gen_range(0..goods);
                edges.push((i, j));
                good_seen[i] = true;
            }
        }
        for i in 0..goods {
            if !good_seen[i] {
                edges.push((i, rng.gen_range(0..agents)));
            }
        }
        let inst = GameInstance::new(goods_list.clone(), agents_list.clone(), edges)?;
        if inst.is_connected() {
            return Ok(inst);
        }
    }
    Err(Error::Resource(format!(
        "no connected graph with {goods} goods, {agents} agents, edge probability {edge_prob} in {MAX_ATTEMPTS} draws"
    )))
}

/// Random bipartite tree on `size >= 2` nodes. Node 0 is a good; each later
/// node attaches to a uniformly random earlier node and takes the opposite
/// type, so every agent has a neighbor.
pub fn random_tree(size: usize, alpha_max: f64, sampler: &UtilitySampler, seed: u64) -> Result<GameInstance> {
    if size < 2 {
        return Err(invalid(format!("tree needs at least 2 nodes, got {size}")));
    }
    check_alpha_max(alpha_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (is_good, index within its side)
    let mut nodes = vec![(true, 0usize)];
    let mut goods = vec![Good::new("p0", draw_alpha(&mut rng, alpha_max))];
    let mut agents = Vec::new();
    let mut edges = Vec::new();
    for _ in 1..size {
        let (parent_is_good, parent) = nodes[rng.gen_range(0..nodes.len())];
        if parent_is_good {
            let j = agents.len();
            agents.push(Agent::new(format!("a{j}"), sampler.sample(&mut rng)));
            edges.push((parent, j));
            nodes.push((false, j));
        } else {
            let i = goods.len();
            goods.push(Good::new(format!("p{i}"), draw_alpha(&mut rng, alpha_max)));
            edges.push((i, parent));
            nodes.push((true, i));
        }
    }
    GameInstance::new(goods, agents, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_is_connected_and_deterministic() {
        for seed in 0..20 {
            let a = random_bipartite(8, 8, 0.4, 1.0, &UtilitySampler::Mixed, seed).unwrap();
            assert!(a.is_connected());
            assert_eq!(a.num_goods(), 8);
            assert_eq!(a.num_agents(), 8);
            assert_eq!(a, random_bipartite(8, 8, 0.4, 1.0, &UtilitySampler::Mixed, seed).unwrap());
        }
    }

    #[test]
    fn lopsided_shapes_connect() {
        for seed in 0..20 {
            assert!(random_bipartite(1, 9, 0.2, 1.0, &UtilitySampler::Mixed, seed).unwrap().is_connected());
            assert_eq!(random_bipartite(10, 1, 0.2, 1.0, &UtilitySampler::Mixed, seed).unwrap().edges().len(), 10);
        }
    }

    #[test]
    fn bipartite_rejects_bad_sizes() {
        let s = UtilitySampler::Fixed(UtilityFunction::sqrt());
        assert!(random_bipartite(5, 0, 0.5, 1.0, &s, 1).is_err());
        assert!(random_bipartite(0, 5, 0.5, 1.0, &s, 1).is_err());
        assert!(random_bipartite(3, 3, 0.0, 1.0, &s, 1).is_err());
        assert!(random_bipartite(3, 3, 0.5, -1.0, &s, 1).is_err());
    }

    #[test]
    fn trees_are_acyclic_and_connected() {
        for size in 2..16 {
            for seed in 0..10 {
                let t = random_tree(size, 1.0, &UtilitySampler::Mixed, seed).unwrap();
                assert!(t.is_acyclic());
                assert!(t.is_connected());
                assert_eq!(t.num_goods() + t.num_agents(), size);
                assert_eq!(t.edges().len(), size - 1);
            }
        }
        assert!(random_tree(1, 1.0, &UtilitySampler::Mixed, 0).is_err());
    }

    #[test]
    fn mixed_sampler_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut powers, mut logs) = (0, 0);
        for _ in 0..200 {
            match UtilitySampler::Mixed.sample(&mut rng) {
                UtilityFunction::Power { p } => {
                    assert!((0.5..=0.95).contains(&p));
                    powers += 1;
                }
                UtilityFunction::Log { c } => {
                    assert!((0.5..=4.0).contains(&c));
                    logs += 1;
                }
            }
        }
        assert!(powers > 50 && logs > 50);
    }
}
