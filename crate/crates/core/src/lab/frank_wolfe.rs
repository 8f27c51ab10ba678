//! Frank-Wolfe ascent on social welfare over the product of the agents'
//! budget simplices.

use crate::error::{invalid, Result};
use crate::game::{Allocation, GameInstance};

/// Levels are clamped to at least this value when evaluating derivatives,
/// since `x^p` has an infinite slope at zero.
pub const GRADIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FwResult {
    /// Best iterate found.
    pub alloc: Allocation,
    pub welfare: f64,
    /// Best welfare so far after each iteration; non-decreasing.
    pub history: Vec<f64>,
}

/// Welfare gradient with respect to the level of each good:
/// `g_i = sum over agents k adjacent to good i of U_k'(l_i)`.
fn level_gradient(instance: &GameInstance, levels: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; instance.num_goods()];
    for e in instance.edges() {
        let u = &instance.agents()[e.agent].utility;
        g[e.good] += u.derivative(levels[e.good].max(GRADIENT_FLOOR));
    }
    g
}

/// Each agent's budget on its neighbor with the largest gradient, ties to
/// the lowest good index.
fn linear_oracle(instance: &GameInstance, g: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; instance.edges().len()];
    for (j, a) in instance.agents().iter().enumerate() {
        let edges = instance.agent_edges(j);
        let best = edges
            .iter()
            .copied()
            .reduce(|b, e| {
                let (gb, ge) = (instance.edges()[b].good, instance.edges()[e].good);
                if g[ge] > g[gb] || (g[ge] == g[gb] && ge < gb) {
                    e
                } else {
                    b
                }
            })
            .expect("agent has a neighbor");
        s[best] = a.budget;
    }
    s
}

/// Runs `iterations` Frank-Wolfe steps with step size `2 / (t + 2)` from
/// the first-neighbor allocation and returns the best iterate.
pub fn social_optimum_fw(instance: &GameInstance, iterations: usize) -> Result<FwResult> {
    if iterations == 0 {
        return Err(invalid("Frank-Wolfe needs at least one iteration"));
    }
    let mut x = Allocation::all_on_first_neighbor(instance);
    let mut best = x.clone();
    let mut best_welfare = instance.social_welfare(&x)?;
    let mut history = Vec::with_capacity(iterations);
    let mut values = x.values().to_vec();
    for t in 0..iterations {
        let levels = instance.water_levels(&x)?;
        let s = linear_oracle(instance, &level_gradient(instance, &levels));
        let step = 2.0 / (t as f64 + 2.0);
        for (v, sv) in values.iter_mut().zip(&s) {
            *v += step * (sv - *v);
        }
        x = Allocation::from_edge_values(instance, values.clone())?;
        let w = instance.social_welfare(&x)?;
        if w > best_welfare {
            best_welfare = w;
            best = x.clone();
        }
        history.push(best_welfare);
    }
    Ok(FwResult { alloc: best, welfare: best_welfare, history })
}
