//! Discrete solvers against brute-force enumeration.

use ncgg_core::discrete::{
    exact_dp, gadget_utility, mckp_exact, mckp_fptas, mckp_reduce, ukp_brute, ukp_to_cgp, DiscreteCgpInstance,
    UkpInstance, UkpItem,
};
use ncgg_core::UtilityFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best total over every way of writing `units` as an ordered sum of
/// `alphas.len()` nonnegative counts.
fn enumerate_best(alphas: &[f64], units: usize, u: &UtilityFunction) -> f64 {
    fn go(alphas: &[f64], left: usize, u: &UtilityFunction, acc: f64, best: &mut f64) {
        if alphas.len() == 1 {
            *best = best.max(acc + u.value(alphas[0] + left as f64));
            return;
        }
        for c in 0..=left {
            go(&alphas[1..], left - c, u, acc + u.value(alphas[0] + c as f64), best);
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(alphas, units, u, 0.0, &mut best);
    best
}

/// Best knapsack value by enumerating item multiplicities.
fn enumerate_ukp(items: &[(u64, u64)], cap: u64) -> u64 {
    match items.split_first() {
        None => 0,
        Some((&(v, w), rest)) => (0..=cap / w).map(|c| c * v + enumerate_ukp(rest, cap - c * w)).max().unwrap(),
    }
}

fn random_utility(rng: &mut ChaCha8Rng) -> UtilityFunction {
    if rng.gen_bool(0.5) {
        UtilityFunction::power(rng.gen_range(0.1..0.99)).unwrap()
    } else {
        UtilityFunction::log(rng.gen_range(0.1..5.0)).unwrap()
    }
}

#[test]
fn exact_dp_and_fptas_against_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let units = rng.gen_range(0..=20);
        let alphas: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..4.0) })
            .collect();
        let u = random_utility(&mut rng);
        let inst = DiscreteCgpInstance::new(alphas.clone(), units, u).unwrap();
        let opt = enumerate_best(&alphas, units, &u);

        let dp = exact_dp(&inst).unwrap();
        assert!((dp.value - opt).abs() <= 1e-9, "dp {} vs {opt}", dp.value);
        assert_eq!(dp.counts.iter().sum::<usize>(), units);

        let m = mckp_reduce(&inst);
        assert!((mckp_exact(&m).value - opt).abs() <= 1e-9);
        for eps in [0.5, 0.1, 0.01] {
            let s = mckp_fptas(&m, eps).unwrap();
            assert!(s.value >= (1.0 - eps) * opt - 1e-12 && s.value <= opt + 1e-9, "eps {eps}: {} vs {opt}", s.value);
            assert!(s.weight(&m) <= units);
        }
    }
}

#[test]
fn gadget_reduction_matches_knapsack_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..100 {
        let cap = rng.gen_range(1..=12u64);
        let count = rng.gen_range(1..=4);
        let raw: Vec<(u64, u64)> = (0..count).map(|_| (rng.gen_range(1..=20), rng.gen_range(1..=cap))).collect();
        let inst = UkpInstance::new(raw.iter().map(|&(value, weight)| UkpItem { value, weight }).collect(), cap).unwrap();

        let brute = ukp_brute(&inst).unwrap();
        assert_eq!(brute, enumerate_ukp(&raw, cap));

        let red = ukp_to_cgp(&inst).unwrap();
        let opt = exact_dp(&red.cgp).unwrap().value;
        assert!((opt - red.baseline - brute as f64).abs() <= 1e-9, "{raw:?} cap {cap}: {opt} - {} vs {brute}", red.baseline);

        let top = inst.items().len() as u64 * cap;
        for l in 0..top {
            assert!(gadget_utility(l + 1, &inst).unwrap() > gadget_utility(l, &inst).unwrap());
        }
    }
}
