//! The square-root potential under unilateral deviations.

use ncgg_core::lab::{random_bipartite, UtilitySampler};
use ncgg_core::waterfill::best_response;
use ncgg_core::{Agent, Allocation, GameInstance, Good, UtilityFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_row(rng: &mut ChaCha8Rng, len: usize, budget: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s * budget).collect()
}

fn random_alloc(rng: &mut ChaCha8Rng, inst: &GameInstance) -> Allocation {
    let mut alloc = Allocation::zeros(inst);
    for j in 0..inst.num_agents() {
        let row = random_row(rng, inst.agent_edges(j).len(), inst.agents()[j].budget);
        alloc.set_row(inst, j, &row).unwrap();
    }
    alloc
}

#[test]
fn sqrt_potential_is_exact_for_sqrt_agents() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut improving = 0;
    for t in 0..200u64 {
        let inst = random_bipartite(rng.gen_range(1..=8), rng.gen_range(1..=8), 0.5, 1.0, &UtilitySampler::Fixed(UtilityFunction::sqrt()), t).unwrap();
        let before = random_alloc(&mut rng, &inst);
        let j = rng.gen_range(0..inst.num_agents());
        let mut after = before.clone();
        after.set_row(&inst, j, &random_row(&mut rng, inst.agent_edges(j).len(), 1.0)).unwrap();
        let du = inst.agent_utility(&after, j).unwrap() - inst.agent_utility(&before, j).unwrap();
        let dpsi = inst.potential_psi(&after).unwrap() - inst.potential_psi(&before).unwrap();
        assert!((du - dpsi).abs() < 1e-9);
        if du > 0.0 {
            improving += 1;
            assert!(dpsi > 0.0);
        }
    }
    assert!(improving > 20);
}

#[test]
fn best_responses_raise_sqrt_potential_for_all_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for t in 0..200u64 {
        let inst = random_bipartite(rng.gen_range(1..=8), rng.gen_range(1..=8), 0.5, 1.0, &UtilitySampler::Mixed, t).unwrap();
        let before = random_alloc(&mut rng, &inst);
        let j = rng.gen_range(0..inst.num_agents());
        let mut after = before.clone();
        after.set_row(&inst, j, &best_response(&inst, &before, j).unwrap()).unwrap();
        let du = inst.agent_utility(&after, j).unwrap() - inst.agent_utility(&before, j).unwrap();
        let dpsi = inst.potential_psi(&after).unwrap() - inst.potential_psi(&before).unwrap();
        assert!(du >= -1e-12);
        assert!(dpsi >= -1e-12, "instance {t}: utility {du}, potential {dpsi}");
    }
}

#[test]
fn downhill_transfers_raise_sqrt_potential_for_all_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let mut moves = 0;
    for t in 0..200u64 {
        let inst = random_bipartite(rng.gen_range(2..=8), rng.gen_range(1..=8), 0.5, 1.0, &UtilitySampler::Mixed, t).unwrap();
        let before = random_alloc(&mut rng, &inst);
        let levels = inst.water_levels(&before).unwrap();
        let j = rng.gen_range(0..inst.num_agents());
        let edges = inst.agent_edges(j);
        if edges.len() < 2 {
            continue;
        }
        let (a, b) = (edges[0], edges[1]);
        let (la, lb) = (levels[inst.edges()[a].good], levels[inst.edges()[b].good]);
        let (src, dst, gap) = if la > lb { (a, b, la - lb) } else { (b, a, lb - la) };
        // Any amount below the gap that the source row can give.
        let amount = rng.gen_range(0.0..1.0) * gap.min(before.get(src));
        if amount <= 0.0 {
            continue;
        }
        let mut after = before.clone();
        after.set(src, before.get(src) - amount);
        after.set(dst, before.get(dst) + amount);
        let du = inst.agent_utility(&after, j).unwrap() - inst.agent_utility(&before, j).unwrap();
        let dpsi = inst.potential_psi(&after).unwrap() - inst.potential_psi(&before).unwrap();
        assert!(du > -1e-12 && dpsi > -1e-12, "instance {t}: utility {du}, potential {dpsi}");
        moves += 1;
    }
    assert!(moves > 50);
}

/// With a utility other than the square root, an improving deviation that
/// reshuffles several goods at once can lower the square-root potential.
#[test]
fn sqrt_potential_can_fall_under_log_utility() {
    let goods = (0..3).map(|i| Good::new(format!("p{i}"), 0.0)).collect();
    let inst = GameInstance::new(goods, vec![Agent::new("a", UtilityFunction::Log { c: 1.0 })], vec![(0, 0), (1, 0), (2, 0)]).unwrap();
    let before = Allocation::from_edge_values(&inst, vec![0.8, 0.1, 0.1]).unwrap();
    let after = Allocation::from_edge_values(&inst, vec![0.0, 0.5, 0.5]).unwrap();
    let du = inst.agent_utility(&after, 0).unwrap() - inst.agent_utility(&before, 0).unwrap();
    let dpsi = inst.potential_psi(&after).unwrap() - inst.potential_psi(&before).unwrap();
    assert!(du > 0.03);
    assert!(dpsi < -0.1);
}
