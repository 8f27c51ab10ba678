//! Game-level experiments: equilibrium finding, uniqueness suites, the
//! price-of-anarchy star family, and a social-welfare optimizer.

pub mod frank_wolfe;
pub mod generators;
pub mod poa;
pub mod uniqueness;

pub use frank_wolfe::{social_optimum_fw, FwResult};
pub use generators::{random_bipartite, random_tree, UtilitySampler};
pub use poa::{empirical_poa, poa_star_instance, star_all_common, star_all_private, star_poa, PoaReport};
pub use uniqueness::{monotone_ne_check, strong_uniqueness_check, weak_uniqueness_check, MonotoneReport, UniquenessReport};

use crate::dynamics::{run_dynamics, DynamicsConfig, InitialState, Schedule};
use crate::error::{Error, Result};
use crate::game::{Allocation, GameInstance};

/// Round budget for [`find_equilibrium`].
pub const EQUILIBRIUM_MAX_ROUNDS: usize = 10_000_000;

/// An epsilon-approximate equilibrium from stale-only dynamics started at a
/// seeded random state.
pub fn find_equilibrium(instance: &GameInstance, epsilon: f64, seed: u64) -> Result<Allocation> {
    find_equilibrium_with_k(instance, epsilon, seed).map(|(alloc, _)| alloc)
}

/// As [`find_equilibrium`], also returning the discretization parameter.
pub fn find_equilibrium_with_k(instance: &GameInstance, epsilon: f64, seed: u64) -> Result<(Allocation, u64)> {
    let config = DynamicsConfig::new(epsilon)
        .with_schedule(Schedule::StaleOnly { seed })
        .with_initial_state(InitialState::Random { seed })
        .with_max_rounds(EQUILIBRIUM_MAX_ROUNDS);
    let out = run_dynamics(instance, &config)?;
    if !out.trace.converged {
        return Err(Error::NotConverged { rounds: out.trace.rounds.len() });
    }
    Ok((out.alloc, out.trace.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::choose_k;
    use crate::game::{Agent, Good};
    use crate::utility::UtilityFunction;

    #[test]
    fn complete_2x2_levels() {
        let inst = GameInstance::new(
            vec![Good::new("p1", 0.0), Good::new("p2", 0.0)],
            vec![Agent::new("a1", UtilityFunction::sqrt()), Agent::new("a2", UtilityFunction::Log { c: 2.0 })],
            vec![(0, 0), (1, 0), (0, 1), (1, 1)],
        )
        .unwrap();
        let alloc = find_equilibrium(&inst, 0.1, 5).unwrap();
        assert_eq!(inst.water_levels(&alloc).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn path_splits_evenly() {
        let inst = GameInstance::new(
            vec![Good::new("p1", 0.0), Good::new("p2", 0.0)],
            vec![Agent::new("a1", UtilityFunction::sqrt())],
            vec![(0, 0), (1, 0)],
        )
        .unwrap();
        for seed in 0..5 {
            let (alloc, k) = find_equilibrium_with_k(&inst, 0.05, seed).unwrap();
            assert_eq!(k, choose_k(&inst, 0.05).unwrap());
            for &x in alloc.values() {
                assert!((x - 0.5).abs() <= 1.0 / k as f64);
            }
        }
    }

    #[test]
    fn star_settles_on_private_goods() {
        let inst = poa_star_instance(3, UtilityFunction::sqrt()).unwrap();
        let alloc = find_equilibrium(&inst, 0.05, 11).unwrap();
        for j in 0..3 {
            // Private good p_j holds the whole budget: the common good sits
            // at level 1 or more, above any private level.
            let row = alloc.row(&inst, j);
            assert_eq!(row, vec![1.0, 0.0]);
        }
    }
}
