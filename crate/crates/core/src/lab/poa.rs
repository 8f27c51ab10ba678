//! Price of anarchy: the star family and empirical ratio reports.
//!
//! In the star, agent `a_j` may fund its private good `p_j` (ground level 0)
//! or the common good `p_c` (ground level 1). Funding the private good is
//! every agent's best response, yet pooling everything on `p_c` is worth
//! `n U(n + 1)` against the equilibrium's `2n U(1)`.

use super::frank_wolfe::social_optimum_fw;
use super::find_equilibrium;
use crate::dynamics::{is_eps_ne, run_dynamics, DynamicsConfig, InitialState, Schedule};
use crate::error::{invalid, Error, Result};
use crate::game::{Agent, Allocation, GameInstance, Good};
use crate::utility::UtilityFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct PoaReport {
    /// Number of agents.
    pub n: usize,
    pub welfare_ne: f64,
    /// Welfare of the all-common state, for star instances.
    pub welfare_reference: Option<f64>,
    pub welfare_fw: Option<f64>,
    /// Best known welfare over the equilibrium welfare.
    pub ratio_lower_bound: f64,
}

fn report(n: usize, welfare_ne: f64, welfare_reference: Option<f64>, welfare_fw: Option<f64>) -> PoaReport {
    let best = welfare_reference.into_iter().chain(welfare_fw).fold(f64::NEG_INFINITY, f64::max);
    PoaReport { n, welfare_ne, welfare_reference, welfare_fw, ratio_lower_bound: best / welfare_ne }
}

/// Goods `[p_c, p_1, .., p_n]` with `alpha_c = 1`, agents `a_1..a_n`; each
/// agent lists its private good first, then the common good.
pub fn poa_star_instance(n: usize, utility: UtilityFunction) -> Result<GameInstance> {
    if n < 1 {
        return Err(invalid("star needs at least one agent"));
    }
    let mut goods = vec![Good::new("pc", 1.0)];
    goods.extend((1..=n).map(|j| Good::new(format!("p{j}"), 0.0)));
    let agents = (1..=n).map(|j| Agent::new(format!("a{j}"), utility)).collect();
    let edges = (0..n).flat_map(|j| [(j + 1, j), (0, j)]).collect();
    GameInstance::new(goods, agents, edges)
}

/// Every agent on its private good.
pub fn star_all_private(star: &GameInstance) -> Allocation {
    Allocation::all_on_first_neighbor(star)
}

/// Every agent's budget on the common good.
pub fn star_all_common(star: &GameInstance) -> Result<Allocation> {
    Allocation::from_entries(star, (0..star.num_agents()).map(|j| (0, j, star.agents()[j].budget)))
}

/// Equilibrium welfare from `find_equilibrium` against the Frank-Wolfe
/// optimum.
pub fn empirical_poa(instance: &GameInstance, epsilon: f64, seed: u64, fw_iterations: usize) -> Result<PoaReport> {
    let ne = find_equilibrium(instance, epsilon, seed)?;
    let welfare_ne = instance.social_welfare(&ne)?;
    let fw = social_optimum_fw(instance, fw_iterations)?;
    Ok(report(instance.num_agents(), welfare_ne, None, Some(fw.welfare)))
}

/// Star family report. The equilibrium comes from dynamics started at the
/// all-private state, which stays put and is verified as an
/// epsilon-equilibrium; the reference is the all-common state.
pub fn star_poa(n: usize, utility: UtilityFunction, epsilon: f64, fw_iterations: Option<usize>) -> Result<PoaReport> {
    let star = poa_star_instance(n, utility)?;
    let config = DynamicsConfig::new(epsilon)
        .with_schedule(Schedule::RoundRobin)
        .with_initial_state(InitialState::AllOnFirstNeighbor);
    let out = run_dynamics(&star, &config)?;
    if !out.trace.converged {
        return Err(Error::NotConverged { rounds: out.trace.rounds.len() });
    }
    let check = is_eps_ne(&star, &out.alloc, epsilon)?;
    if !check.ok {
        return Err(invalid(format!("star state fails the equilibrium check with gap {}", check.worst_gap)));
    }
    let welfare_ne = star.social_welfare(&out.alloc)?;
    let welfare_common = star.social_welfare(&star_all_common(&star)?)?;
    let welfare_fw = match fw_iterations {
        Some(it) => Some(social_optimum_fw(&star, it)?.welfare),
        None => None,
    };
    Ok(report(n, welfare_ne, Some(welfare_common), welfare_fw))
}
