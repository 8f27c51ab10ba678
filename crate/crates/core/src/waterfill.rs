//! Single-agent continuous common goods problem.
//!
//! Maximizing `sum_i U(alpha_i + x_i)` over `x >= 0, sum_i x_i = budget`
//! has the same optimum for every increasing, strictly concave,
//! differentiable `U`: raise the lowest goods to a common water level `w`
//! so that `sum_i max(0, w - alpha_i) = budget`. [`water_fill`] computes it
//! without consulting any utility; [`kkt_verify`] certifies a candidate
//! point against a specific utility.

use crate::error::{invalid, Result};
use crate::game::{Allocation, GameInstance};
use crate::utility::UtilityFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct CgpInstance {
    alphas: Vec<f64>,
    budget: f64,
}

impl CgpInstance {
    pub fn new(alphas: Vec<f64>, budget: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("common goods problem needs at least one good"));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(invalid(format!("ground level {a} must be a finite nonnegative number")));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(invalid(format!("budget {budget} must be positive")));
        }
        Ok(CgpInstance { alphas, budget })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterFillSolution {
    pub x: Vec<f64>,
    /// Common level reached by every good that receives resource.
    pub level: f64,
}

/// Optimality certificate for a candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    /// Multiplier of the budget equality.
    pub nu: f64,
    /// Multipliers of the sign constraints `x_i >= 0`.
    pub lambdas: Vec<f64>,
    /// Largest absolute violation among sign, budget balance,
    /// complementary slackness and stationarity conditions.
    pub max_violation: f64,
    pub passed: bool,
}

/// Sorts the ground levels and sweeps prefix sums to find the water level,
/// `O(n log n)`.
pub fn water_fill(inst: &CgpInstance) -> WaterFillSolution {
    let mut sorted = inst.alphas.clone();
    sorted.sort_by(f64::total_cmp);

    let n = sorted.len();
    let mut prefix = 0.0;
    let mut level = f64::NAN;
    for k in 0..n {
        prefix += sorted[k];
        let w = (inst.budget + prefix) / (k + 1) as f64;
        if k + 1 == n || w <= sorted[k + 1] {
            level = w;
            break;
        }
    }

    let x = inst.alphas.iter().map(|&a| (level - a).max(0.0)).collect();
    WaterFillSolution { x, level }
}

/// Checks the KKT conditions of the single-agent program at `x` under `u`.
///
/// The equality multiplier is read off the point itself: `nu` is the
/// smallest marginal utility over goods with `x_i > tol` (or the largest
/// marginal utility overall when no good clears `tol`), and
/// `lambda_i = max(0, nu - U'(alpha_i + x_i))`.
pub fn kkt_verify(inst: &CgpInstance, x: &[f64], u: &UtilityFunction, tol: f64) -> Result<KktCertificate> {
    if x.len() != inst.alphas.len() {
        return Err(invalid(format!(
            "point has {} coordinates but the instance has {} goods",
            x.len(),
            inst.alphas.len()
        )));
    }
    let slopes: Vec<f64> = inst.alphas.iter().zip(x).map(|(&a, &xi)| u.derivative(a + xi)).collect();

    let active = slopes.iter().zip(x).filter(|(_, &xi)| xi > tol).map(|(&s, _)| s);
    let nu = active
        .reduce(f64::min)
        .unwrap_or_else(|| slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let lambdas: Vec<f64> = slopes.iter().map(|&s| (nu - s).max(0.0)).collect();

    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        // sign
        worst = worst.max((-x[i]).max(0.0));
        // complementary slackness
        worst = worst.max((lambdas[i] * x[i]).abs());
        // stationarity: -U'(l_i) - lambda_i + nu = 0
        let r = -slopes[i] - lambdas[i] + nu;
        worst = worst.max(if r.is_nan() { f64::INFINITY } else { r.abs() });
    }
    // budget balance
    worst = worst.max((x.iter().sum::<f64>() - inst.budget).abs());

    Ok(KktCertificate { nu, lambdas, max_violation: worst, passed: worst <= tol })
}

/// Agent `j`'s best response to everyone else: water-fill its budget over
/// its neighbors, treating the others' contributions as ground level.
/// The row is ordered like [`GameInstance::agent_edges`].
pub fn best_response(instance: &GameInstance, alloc: &Allocation, j: usize) -> Result<Vec<f64>> {
    let agent = instance.agent(j)?;
    let levels = instance.water_levels(alloc)?;
    let edges = instance.agent_edges(j);
    if edges.is_empty() {
        return Err(invalid(format!("agent {:?} has no adjacent good", agent.id)));
    }
    let effective = edges
        .iter()
        .map(|&e| (levels[instance.edges()[e].good] - alloc.get(e)).max(0.0))
        .collect();
    Ok(water_fill(&CgpInstance::new(effective, agent.budget)?).x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Agent, Good};
    use proptest::prelude::*;

    fn cgp(alphas: &[f64]) -> CgpInstance {
        CgpInstance::new(alphas.to_vec(), 1.0).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Brute-force maximizer of `sum sqrt(alpha_i + x_i)` over a grid on the
    /// budget simplex, for up to three goods.
    fn simplex_grid_sqrt(alphas: &[f64], budget: f64, step: f64) -> (f64, Vec<f64>) {
        let steps = (budget / step).round() as usize;
        let f = |x: &[f64]| alphas.iter().zip(x).map(|(a, xi)| (a + xi).sqrt()).sum::<f64>();
        let mut best = (f64::NEG_INFINITY, vec![]);
        let mut consider = |x: Vec<f64>| {
            let v = f(&x);
            if v > best.0 {
                best = (v, x);
            }
        };
        match alphas.len() {
            1 => consider(vec![budget]),
            2 => (0..=steps).for_each(|a| {
                let x0 = a as f64 * step;
                consider(vec![x0, (budget - x0).max(0.0)])
            }),
            3 => {
                for a in 0..=steps {
                    for b in 0..=steps - a {
                        let (x0, x1) = (a as f64 * step, b as f64 * step);
                        consider(vec![x0, x1, (budget - x0 - x1).max(0.0)]);
                    }
                }
            }
            _ => unreachable!("grid oracle handles at most three goods"),
        }
        best
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(CgpInstance::new(vec![], 1.0).is_err());
        assert!(CgpInstance::new(vec![-1.0], 1.0).is_err());
        assert!(CgpInstance::new(vec![0.0], 0.0).is_err());
        assert!(CgpInstance::new(vec![f64::NAN], 1.0).is_err());
    }

    #[test]
    fn symmetric_ground_levels_split_evenly() {
        let s = water_fill(&cgp(&[0.0; 4]));
        assert_eq!(s.x, vec![0.25; 4]);
        assert_eq!(s.level, 0.25);
    }

    #[test]
    fn forced_to_lower_good() {
        let s = water_fill(&cgp(&[1.0, 0.0]));
        assert_eq!(s.x, vec![0.0, 1.0]);
        assert_eq!(s.level, 1.0);
    }

    #[test]
    fn three_goods_against_grid_oracle() {
        let alphas = [0.2, 0.5, 3.0];
        let (_, grid_x) = simplex_grid_sqrt(&alphas, 1.0, 1e-4);
        assert!(close(&grid_x, &[0.65, 0.35, 0.0], 1e-3), "oracle {grid_x:?}");

        let s = water_fill(&cgp(&alphas));
        assert!((s.level - 0.85).abs() < 1e-12);
        assert!(close(&s.x, &[0.65, 0.35, 0.0], 1e-12));
        assert!(close(&s.x, &grid_x, 1e-3));
    }

    #[test]
    fn kkt_examples() {
        let inst = cgp(&[0.2, 0.5, 3.0]);
        let s = water_fill(&inst);
        let cert = kkt_verify(&inst, &s.x, &UtilityFunction::sqrt(), 1e-6).unwrap();
        assert!(cert.passed, "{cert:?}");
        assert!(cert.lambdas[2] > 0.0 && cert.lambdas[0] == 0.0);

        let inst = cgp(&[1.0, 0.0]);
        let cert = kkt_verify(&inst, &[1.0, 0.0], &UtilityFunction::sqrt(), 1e-6).unwrap();
        assert!(!cert.passed);

        let inst = cgp(&[0.0, 0.0]);
        for u in [UtilityFunction::sqrt(), UtilityFunction::Power { p: 0.9 }, UtilityFunction::Log { c: 2.5 }] {
            assert!(kkt_verify(&inst, &[0.5, 0.5], &u, 1e-6).unwrap().passed);
        }
        assert!(kkt_verify(&inst, &[1.0], &UtilityFunction::sqrt(), 1e-6).is_err());
    }

    #[test]
    fn tie_at_water_level_gets_nothing() {
        let s = water_fill(&cgp(&[0.0, 1.0]));
        assert_eq!(s.level, 1.0);
        assert_eq!(s.x, vec![1.0, 0.0]);
    }

    fn star(n: usize) -> GameInstance {
        let u = UtilityFunction::sqrt();
        let mut goods = vec![Good::new("pc", 1.0)];
        goods.extend((1..=n).map(|j| Good::new(format!("p{j}"), 0.0)));
        let agents = (1..=n).map(|j| Agent::new(format!("a{j}"), u)).collect();
        let edges = (0..n).flat_map(|j| [(j + 1, j), (0, j)]).collect();
        GameInstance::new(goods, agents, edges).unwrap()
    }

    #[test]
    fn best_response_examples() {
        let inst = star(4);
        let private = Allocation::all_on_first_neighbor(&inst);
        assert_eq!(best_response(&inst, &private, 2).unwrap(), vec![1.0, 0.0]);

        let u = UtilityFunction::Log { c: 1.0 };
        let inst = GameInstance::new(
            vec![Good::new("p1", 0.0), Good::new("p2", 0.0)],
            vec![Agent::new("a1", u), Agent::new("a2", u)],
            vec![(0, 0), (1, 0), (0, 1), (1, 1)],
        )
        .unwrap();
        let alloc = Allocation::from_entries(&inst, [(0, 1, 0.5), (1, 1, 0.5), (0, 0, 1.0)]).unwrap();
        assert_eq!(best_response(&inst, &alloc, 0).unwrap(), vec![0.5, 0.5]);

        let single = GameInstance::new(
            vec![Good::new("p1", 1.0), Good::new("p2", 0.0)],
            vec![Agent::new("a", u)],
            vec![(0, 0), (1, 0)],
        )
        .unwrap();
        assert_eq!(best_response(&single, &Allocation::zeros(&single), 0).unwrap(), vec![0.0, 1.0]);
        assert!(best_response(&single, &Allocation::zeros(&single), 3).is_err());
    }

    fn alphas(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..3.0, 1..=max_n)
    }

    proptest! {
        #[test]
        fn solution_invariants(a in alphas(20), budget in 0.1f64..5.0) {
            let inst = CgpInstance::new(a.clone(), budget).unwrap();
            let s = water_fill(&inst);
            prop_assert!((s.x.iter().sum::<f64>() - budget).abs() <= 1e-9);
            for (xi, ai) in s.x.iter().zip(&a) {
                prop_assert!(*xi >= 0.0);
                prop_assert!((xi - (s.level - ai).max(0.0)).abs() <= 1e-9);
            }
        }

        #[test]
        fn matches_grid_oracle_on_small_instances(a in alphas(3)) {
            let inst = CgpInstance::new(a.clone(), 1.0).unwrap();
            let s = water_fill(&inst);
            let value: f64 = a.iter().zip(&s.x).map(|(ai, xi)| (ai + xi).sqrt()).sum();
            let (grid, _) = simplex_grid_sqrt(&a, 1.0, 1e-3);
            prop_assert!((value - grid).abs() <= 1e-2);
            prop_assert!(value >= grid - 1e-12);
        }

        #[test]
        fn raising_one_ground_level(a in alphas(8), pick in any::<prop::sample::Index>(), bump in 0.0f64..2.0) {
            let i = pick.index(a.len());
            let before = water_fill(&CgpInstance::new(a.clone(), 1.0).unwrap());
            let mut raised = a.clone();
            raised[i] += bump;
            let after = water_fill(&CgpInstance::new(raised.clone(), 1.0).unwrap());
            prop_assert!(after.x[i] <= before.x[i] + 1e-12);
            prop_assert!(after.level.max(raised[i]) >= before.level.max(a[i]) - 1e-12);
        }

        #[test]
        fn permutation_equivariant(a in alphas(10), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..a.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted: Vec<f64> = perm.iter().map(|&k| a[k]).collect();
            let s = water_fill(&CgpInstance::new(a, 1.0).unwrap());
            let p = water_fill(&CgpInstance::new(permuted, 1.0).unwrap());
            for (pos, &k) in perm.iter().enumerate() {
                prop_assert!((p.x[pos] - s.x[k]).abs() <= 1e-12);
            }
        }
    }
}
