//! Discrete common goods problem: `B` unit atoms spread over goods with
//! ground levels, maximizing `sum_i U(alpha_i + count_i)`.
//!
//! The problem is NP-hard for general increasing `U` (see [`ukp`] for the
//! knapsack gadget) but reduces to multiple-choice knapsack, which admits
//! a profit-scaling FPTAS (see [`mckp`]).

pub mod mckp;
pub mod ukp;

pub use mckp::{mckp_exact, mckp_fptas, mckp_reduce, MckpInstance, MckpItem, MckpSolution};
pub use ukp::{gadget_utility, ukp_brute, ukp_to_cgp, GadgetUtility, UkpInstance, UkpItem, UkpReduction};

use crate::error::{invalid, Error, Result};
use crate::utility::UtilityFunction;

/// Default cap on `n * B^2` for [`exact_dp`].
pub const DEFAULT_DP_CELL_LIMIT: u64 = 10_000_000;

/// Utility of a (possibly non-concave) water level.
pub trait LevelUtility {
    fn value(&self, level: f64) -> f64;
}

impl LevelUtility for UtilityFunction {
    fn value(&self, level: f64) -> f64 {
        UtilityFunction::value(self, level)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCgpInstance<U = UtilityFunction> {
    alphas: Vec<f64>,
    units: usize,
    utility: U,
}

impl<U: LevelUtility> DiscreteCgpInstance<U> {
    /// Validates `U(0) = 0`, monotonicity on the integer grid
    /// `0..=ceil(max alpha) + units`, and finiteness at every reachable
    /// level `alpha_i + j`.
    pub fn new(alphas: Vec<f64>, units: usize, utility: U) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("discrete problem needs at least one good"));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(invalid(format!("ground level {a} must be a finite nonnegative number")));
        }
        let at_zero = utility.value(0.0);
        if !(at_zero.abs() <= 1e-12) {
            return Err(invalid(format!("utility at zero is {at_zero}, expected 0")));
        }
        let top = alphas.iter().copied().fold(0.0, f64::max).ceil() as usize + units;
        let mut prev = at_zero;
        for level in 1..=top {
            let v = utility.value(level as f64);
            if !(v >= prev) {
                return Err(invalid(format!("utility decreases or is undefined at level {level}")));
            }
            prev = v;
        }
        for &a in &alphas {
            if let Some(j) = (0..=units).find(|&j| !utility.value(a + j as f64).is_finite()) {
                return Err(invalid(format!("utility undefined at level {}", a + j as f64)));
            }
        }
        Ok(DiscreteCgpInstance { alphas, units, utility })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn utility(&self) -> &U {
        &self.utility
    }

    /// `U(alpha_i + j)` for `j = 0..=units`.
    pub(crate) fn value_table(&self, i: usize) -> Vec<f64> {
        (0..=self.units).map(|j| self.utility.value(self.alphas[i] + j as f64)).collect()
    }

    pub fn total_utility(&self, counts: &[usize]) -> f64 {
        self.alphas
            .iter()
            .zip(counts)
            .map(|(&a, &c)| self.utility.value(a + c as f64))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    pub value: f64,
    /// Atoms placed on each good; sums to `units`.
    pub counts: Vec<usize>,
}

pub fn exact_dp<U: LevelUtility>(inst: &DiscreteCgpInstance<U>) -> Result<DiscreteSolution> {
    exact_dp_with_limit(inst, DEFAULT_DP_CELL_LIMIT)
}

/// Exact optimum over allocations of exactly `units` atoms.
///
/// Fills `best[i][b]`, the best value of goods `i..n` holding exactly `b`
/// atoms, then walks forward taking the smallest count at each good that
/// still reaches the optimum, so ties go to smaller counts on earlier
/// goods.
pub fn exact_dp_with_limit<U: LevelUtility>(inst: &DiscreteCgpInstance<U>, max_cells: u64) -> Result<DiscreteSolution> {
    let n = inst.alphas.len();
    let units = inst.units;
    let cells = (n as u64).saturating_mul((units as u64).saturating_mul(units as u64));
    if cells > max_cells {
        return Err(Error::Resource(format!("exact DP needs {cells} cells, limit is {max_cells}")));
    }

    let tables: Vec<Vec<f64>> = (0..n).map(|i| inst.value_table(i)).collect();
    let mut best = vec![vec![f64::NEG_INFINITY; units + 1]; n + 1];
    best[n][0] = 0.0;
    for i in (0..n).rev() {
        for b in 0..=units {
            let mut top = f64::NEG_INFINITY;
            for j in 0..=b {
                top = top.max(tables[i][j] + best[i + 1][b - j]);
            }
            best[i][b] = top;
        }
    }

    let mut counts = Vec::with_capacity(n);
    let mut left = units;
    for i in 0..n {
        let target = best[i][left];
        let slack = 1e-12 * target.abs().max(1.0);
        let j = (0..=left)
            .find(|&j| tables[i][j] + best[i + 1][left - j] >= target - slack)
            .expect("optimal count exists");
        counts.push(j);
        left -= j;
    }
    Ok(DiscreteSolution { value: inst.total_utility(&counts), counts })
}
