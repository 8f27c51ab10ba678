//! Falsification suites for equilibrium uniqueness and monotonicity.
//!
//! Discrete equilibria sit within `1/K` of a continuous one, so two of them
//! may differ by up to `2/K`; that is the tolerance these reports are
//! compared against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generators::UtilitySampler;
use super::find_equilibrium_with_k;
use crate::error::{invalid, Error, Result};
use crate::game::{Allocation, GameInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub trials: usize,
    /// Largest spread `max - min` of any good's level across trials.
    pub max_level_discrepancy: f64,
    /// Largest spread of any edge's allocation across trials.
    pub max_allocation_discrepancy: f64,
    pub epsilon_used: f64,
    /// Smallest discretization parameter over the trials.
    pub k_min: u64,
    /// Trials whose dynamics did not converge.
    pub non_converged: Vec<usize>,
}

impl UniquenessReport {
    /// The `2/K` bound, using the coarsest trial.
    pub fn tolerance(&self) -> f64 {
        2.0 / self.k_min as f64
    }

    pub fn levels_agree(&self) -> bool {
        self.non_converged.is_empty() && self.max_level_discrepancy <= self.tolerance() + 1e-9
    }

    pub fn allocations_agree(&self) -> bool {
        self.non_converged.is_empty() && self.max_allocation_discrepancy <= self.tolerance() + 1e-9
    }
}

fn spread(rows: &[Vec<f64>]) -> f64 {
    let Some(first) = rows.first() else { return 0.0 };
    (0..first.len())
        .map(|c| {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[c]), hi.max(r[c])));
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn run_trials(instance: &GameInstance, trials: usize, epsilon: f64, seed: u64) -> Result<UniquenessReport> {
    if trials < 2 {
        return Err(invalid(format!("need at least 2 trials, got {trials}")));
    }
    let mut levels = Vec::with_capacity(trials);
    let mut allocs = Vec::with_capacity(trials);
    let mut k_min = u64::MAX;
    let mut non_converged = Vec::new();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let utilities: Vec<_> = (0..instance.num_agents()).map(|_| UtilitySampler::Mixed.sample(&mut rng)).collect();
        let trial = instance.with_utilities(&utilities)?;
        match find_equilibrium_with_k(&trial, epsilon, rng.gen()) {
            Ok((alloc, k)) => {
                k_min = k_min.min(k);
                levels.push(trial.water_levels(&alloc)?);
                allocs.push(Allocation::values(&alloc).to_vec());
            }
            Err(Error::NotConverged { .. }) => non_converged.push(t),
            Err(e) => return Err(e),
        }
    }
    Ok(UniquenessReport {
        trials,
        max_level_discrepancy: spread(&levels),
        max_allocation_discrepancy: spread(&allocs),
        epsilon_used: epsilon,
        k_min: if k_min == u64::MAX { 1 } else { k_min },
        non_converged,
    })
}

/// Equilibria of the same graph under independently redrawn utilities and
/// random starting states; levels should agree on every good.
pub fn weak_uniqueness_check(instance: &GameInstance, trials: usize, epsilon: f64, seed: u64) -> Result<UniquenessReport> {
    run_trials(instance, trials, epsilon, seed)
}

/// As [`weak_uniqueness_check`] for acyclic graphs, where the per-edge
/// allocations should agree as well.
pub fn strong_uniqueness_check(instance: &GameInstance, trials: usize, epsilon: f64, seed: u64) -> Result<UniquenessReport> {
    if !instance.is_acyclic() {
        return Err(invalid("strong uniqueness check needs an acyclic graph"));
    }
    run_trials(instance, trials, epsilon, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub good: usize,
    pub delta: f64,
    pub level_before: f64,
    pub level_after: f64,
    pub k: u64,
    /// `level_after >= level_before - 2/K`.
    pub ok: bool,
}

/// Raises one good's ground level by `delta` and compares that good's
/// equilibrium level before and after.
pub fn monotone_ne_check(instance: &GameInstance, good: usize, delta: f64, epsilon: f64, seed: u64) -> Result<MonotoneReport> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(invalid(format!("delta {delta} must be positive")));
    }
    let alpha = instance
        .goods()
        .get(good)
        .ok_or(Error::Lookup { kind: "good", index: good })?
        .alpha;
    let raised = instance.with_alpha(good, alpha + delta)?;
    let (before, k) = find_equilibrium_with_k(instance, epsilon, seed)?;
    let (after, _) = find_equilibrium_with_k(&raised, epsilon, seed)?;
    let level_before = instance.water_levels(&before)?[good];
    let level_after = raised.water_levels(&after)?[good];
    Ok(MonotoneReport {
        good,
        delta,
        level_before,
        level_after,
        k,
        ok: level_after >= level_before - 2.0 / k as f64 - 1e-12,
    })
}
