//! Unbounded knapsack and the gadget that embeds it into the discrete
//! common goods problem.
//!
//! Item `i` (1-based, weight order) becomes a good with ground level
//! `(i - 1) * B`. The gadget utility pays the full-knapsack value of every
//! bracket below the current one, plus the value of greedily packing the
//! remainder with the current bracket's item, plus a small linear term
//! that makes it strictly increasing. Optimal allocations then encode an
//! optimal knapsack packing.

use super::{DiscreteCgpInstance, LevelUtility};
use crate::error::{invalid, Error, Result};

/// Largest capacity [`ukp_brute`] accepts.
pub const UKP_BRUTE_MAX_CAPACITY: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UkpItem {
    pub value: u64,
    pub weight: u64,
}

/// A normalized unbounded knapsack instance: items sorted by weight with
/// distinct weights and strictly increasing values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UkpInstance {
    items: Vec<UkpItem>,
    capacity: u64,
}

impl UkpInstance {
    /// Validates and normalizes: for each weight only the most valuable
    /// item survives, and an item is dropped when a lighter-or-equal item
    /// is worth at least as much.
    pub fn new(items: Vec<UkpItem>, capacity: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("knapsack capacity must be positive"));
        }
        if let Some(it) = items.iter().find(|it| it.value == 0 || it.weight == 0) {
            return Err(invalid(format!("item {it:?} needs positive value and weight")));
        }
        let mut sorted = items;
        sorted.sort_by(|a, b| a.weight.cmp(&b.weight).then(b.value.cmp(&a.value)));
        let mut kept: Vec<UkpItem> = Vec::with_capacity(sorted.len());
        for it in sorted {
            if kept.last().is_none_or(|last| it.value > last.value) {
                kept.push(it);
            }
        }
        Ok(UkpInstance { items: kept, capacity })
    }

    pub fn items(&self) -> &[UkpItem] {
        &self.items
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }
}

/// The gadget utility for one knapsack instance, with bracket prefix sums
/// precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct GadgetUtility {
    items: Vec<UkpItem>,
    capacity: u64,
    /// `full[k] = sum_{i < k} floor(B / w_i) * v_i`.
    full: Vec<u64>,
    slope: f64,
}

impl GadgetUtility {
    pub fn new(inst: &UkpInstance) -> Self {
        let b = inst.capacity;
        let mut full = Vec::with_capacity(inst.items.len() + 1);
        full.push(0);
        for it in &inst.items {
            full.push(full.last().unwrap() + (b / it.weight) * it.value);
        }
        let n = inst.items.len() as f64;
        let slope = 1.0 / ((n * n - n + 2.0) * (b as f64) * (b as f64));
        GadgetUtility { items: inst.items.clone(), capacity: b, full, slope }
    }

    pub fn max_level(&self) -> u64 {
        self.items.len() as u64 * self.capacity
    }

    /// `U(l) = sum_{i < mu} floor(B / w_i) v_i + floor(r / w_mu) v_mu + l / ((n^2 - n + 2) B^2)`
    /// with bracket `mu = floor(l / B) + 1` and remainder `r = l mod B`.
    pub fn evaluate(&self, level: u64) -> Result<f64> {
        if level > self.max_level() {
            return Err(invalid(format!("gadget level {level} outside 0..={}", self.max_level())));
        }
        let bracket = (level / self.capacity) as usize;
        let rest = level % self.capacity;
        let partial = self
            .items
            .get(bracket)
            .map_or(0, |it| (rest / it.weight) * it.value);
        Ok((self.full[bracket] + partial) as f64 + level as f64 * self.slope)
    }
}

impl LevelUtility for GadgetUtility {
    /// Non-integral or out-of-range levels evaluate to NaN.
    fn value(&self, level: f64) -> f64 {
        if level < 0.0 || level.fract() != 0.0 {
            return f64::NAN;
        }
        self.evaluate(level as u64).unwrap_or(f64::NAN)
    }
}

pub fn gadget_utility(level: u64, inst: &UkpInstance) -> Result<f64> {
    GadgetUtility::new(inst).evaluate(level)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UkpReduction {
    pub cgp: DiscreteCgpInstance<GadgetUtility>,
    /// Offset such that the gadget optimum equals `baseline + knapsack optimum`.
    pub baseline: f64,
}

pub fn ukp_to_cgp(inst: &UkpInstance) -> Result<UkpReduction> {
    if inst.items.is_empty() {
        return Err(invalid("gadget needs at least one item"));
    }
    let gadget = GadgetUtility::new(inst);
    let b = inst.capacity;
    let stacked: u64 = gadget.full[..inst.items.len()].iter().sum();
    let baseline = stacked as f64 + 1.0 / (2.0 * b as f64);
    let alphas = (0..inst.items.len() as u64).map(|i| (i * b) as f64).collect();
    let cgp = DiscreteCgpInstance::new(alphas, b as usize, gadget)?;
    Ok(UkpReduction { cgp, baseline })
}

/// Exact knapsack optimum by unbounded DP over capacity.
pub fn ukp_brute(inst: &UkpInstance) -> Result<u64> {
    if inst.capacity > UKP_BRUTE_MAX_CAPACITY {
        return Err(Error::Resource(format!(
            "capacity {} exceeds the brute-force bound {UKP_BRUTE_MAX_CAPACITY}",
            inst.capacity
        )));
    }
    let cap = inst.capacity as usize;
    let mut best = vec![0u64; cap + 1];
    for c in 1..=cap {
        best[c] = best[c - 1];
        for it in &inst.items {
            let w = it.weight as usize;
            if w <= c {
                best[c] = best[c].max(best[c - w] + it.value);
            }
        }
    }
    Ok(best[cap])
}
