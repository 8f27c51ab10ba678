//! Multiple-choice knapsack: the reduction target of the discrete problem
//! and a profit-scaling FPTAS for it.

use super::{DiscreteCgpInstance, LevelUtility};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MckpItem {
    pub weight: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpInstance {
    classes: Vec<Vec<MckpItem>>,
    capacity: usize,
}

impl MckpInstance {
    pub fn new(classes: Vec<Vec<MckpItem>>, capacity: usize) -> Result<Self> {
        for (c, class) in classes.iter().enumerate() {
            for item in class {
                if item.weight > capacity {
                    return Err(invalid(format!(
                        "class {c} item of weight {} exceeds capacity {capacity}",
                        item.weight
                    )));
                }
                if !(item.value.is_finite() && item.value >= 0.0) {
                    return Err(invalid(format!("class {c} item value {} is not a nonnegative number", item.value)));
                }
            }
        }
        Ok(MckpInstance { classes, capacity })
    }

    pub fn classes(&self) -> &[Vec<MckpItem>] {
        &self.classes
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn value_of(&self, selection: &[Option<usize>]) -> f64 {
        selection
            .iter()
            .zip(&self.classes)
            .filter_map(|(s, class)| s.map(|k| class[k].value))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpSolution {
    pub value: f64,
    /// Chosen item index per class, `None` when the class is skipped.
    pub selection: Vec<Option<usize>>,
}

impl MckpSolution {
    pub fn weight(&self, inst: &MckpInstance) -> usize {
        self.selection
            .iter()
            .zip(&inst.classes)
            .filter_map(|(s, class)| s.map(|k| class[k].weight))
            .sum()
    }
}

/// One class per good; class `i` holds items `(j, U(alpha_i + j))` for
/// `j = 0..=B`, capacity `B`.
///
/// The weight-zero item carries the ground-level utility `U(alpha_i)`, so
/// optimal values match the source problem exactly. Item `j` of class `i`
/// means "place `j` atoms on good `i`".
pub fn mckp_reduce<U: LevelUtility>(inst: &DiscreteCgpInstance<U>) -> MckpInstance {
    let classes = (0..inst.alphas().len())
        .map(|i| {
            inst.value_table(i)
                .into_iter()
                .enumerate()
                .map(|(weight, value)| MckpItem { weight, value })
                .collect()
        })
        .collect();
    MckpInstance { classes, capacity: inst.units() }
}

/// Exact optimum by DP over used capacity.
pub fn mckp_exact(inst: &MckpInstance) -> MckpSolution {
    let cap = inst.capacity;
    let k = inst.classes.len();
    // best[c] = best value with total weight exactly c.
    let mut best = vec![f64::NEG_INFINITY; cap + 1];
    best[0] = 0.0;
    let mut choice = vec![vec![None; cap + 1]; k];
    for (ci, class) in inst.classes.iter().enumerate() {
        let mut next = best.clone();
        for c in 0..=cap {
            for (idx, item) in class.iter().enumerate() {
                if item.weight <= c && best[c - item.weight] > f64::NEG_INFINITY {
                    let v = best[c - item.weight] + item.value;
                    if v > next[c] {
                        next[c] = v;
                        choice[ci][c] = Some(idx);
                    }
                }
            }
        }
        best = next;
    }
    let mut c = (0..=cap).max_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap_or(0);
    let mut selection = vec![None; k];
    for ci in (0..k).rev() {
        if let Some(idx) = choice[ci][c] {
            selection[ci] = Some(idx);
            c -= inst.classes[ci][idx].weight;
        }
    }
    MckpSolution { value: inst.value_of(&selection), selection }
}

/// `(1 - eps)`-approximation by profit scaling.
///
/// With `P` the largest item value and `k` classes, profits are rounded
/// down to multiples of `delta = eps * P / k`; a DP over scaled profit
/// keeps the minimum weight reaching each profit, and the feasible
/// selection with the highest scaled profit is returned. Rounding loses at
/// most `k * delta = eps * P <= eps * OPT` because every single item fits.
pub fn mckp_fptas(inst: &MckpInstance, eps: f64) -> Result<MckpSolution> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps {eps} not in (0, 1)")));
    }
    let k = inst.classes.len();
    let top = inst
        .classes
        .iter()
        .flatten()
        .map(|item| item.value)
        .fold(0.0, f64::max);
    if k == 0 || top <= 0.0 {
        // Every selection is worth zero; take the first weight-feasible
        // item in each class if any, otherwise nothing.
        let selection = inst
            .classes
            .iter()
            .map(|class| class.iter().position(|it| it.weight == 0))
            .collect::<Vec<_>>();
        return Ok(MckpSolution { value: inst.value_of(&selection), selection });
    }

    let delta = eps * top / k as f64;
    let scaled: Vec<Vec<usize>> = inst
        .classes
        .iter()
        .map(|class| class.iter().map(|it| (it.value / delta).floor() as usize).collect())
        .collect();
    let total: usize = scaled.iter().map(|s| s.iter().copied().max().unwrap_or(0)).sum();

    const NONE: u32 = u32::MAX;
    const UNREACHED: usize = usize::MAX;
    // min_weight[q] = least weight reaching scaled profit exactly q.
    let mut min_weight = vec![UNREACHED; total + 1];
    min_weight[0] = 0;
    let mut choice = vec![vec![NONE; total + 1]; k];
    let mut reach = 0;
    for (ci, class) in inst.classes.iter().enumerate() {
        let mut next = min_weight.clone();
        let class_top = scaled[ci].iter().copied().max().unwrap_or(0);
        for q in 0..=reach {
            let w0 = min_weight[q];
            if w0 == UNREACHED {
                continue;
            }
            for (idx, item) in class.iter().enumerate() {
                let w = w0 + item.weight;
                let nq = q + scaled[ci][idx];
                if w <= inst.capacity && w < next[nq] {
                    next[nq] = w;
                    choice[ci][nq] = idx as u32;
                }
            }
        }
        reach += class_top;
        min_weight = next;
    }

    let mut q = (0..=reach).rev().find(|&q| min_weight[q] != UNREACHED).unwrap_or(0);
    let mut selection = vec![None; k];
    for ci in (0..k).rev() {
        let idx = choice[ci][q];
        if idx != NONE {
            let idx = idx as usize;
            selection[ci] = Some(idx);
            q -= scaled[ci][idx];
        }
    }
    Ok(MckpSolution { value: inst.value_of(&selection), selection })
}
