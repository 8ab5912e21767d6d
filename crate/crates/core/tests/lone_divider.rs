use num_rational::BigRational;
use num_traits::Zero;
use ordinal_mms::lone_divider::{
    balanced_partition_traced, is_l_balanced, lone_divider, ordinal_d, solve_ordinal_with, total_waste,
    BagStep, BalancedGroups, DividerCase, DividerState, ExhaustiveDivider, WitnessMethod,
};
use ordinal_mms::scaling::{rational, ScaledValuation};
use ordinal_mms::{mms_exact, Bundle, Instance, MmsSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, hi: u64) -> Instance {
    Instance::new((0..n).map(|_| (0..m).map(|_| rng.random_range(0..=hi)).collect()).collect()).unwrap()
}

#[test]
fn ordinal_guarantee_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = std::collections::BTreeMap::new();
    for trial in 0..300 {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(n..=12);
        let ell = rng.random_range(1..=2);
        let inst = random_instance(&mut rng, n, m, 20);
        let d = ordinal_d(ell, n);
        let sol = solve_ordinal_with(&inst, ell, WitnessMethod::Exact, &MmsSolver::default())
            .unwrap_or_else(|e| panic!("trial {trial}: {e} on {inst:?} ell {ell}"));
        assert!(sol.allocation.is_complete(m), "trial {trial}");
        let values = sol.allocation.values(&inst);
        for (i, &v) in values.iter().enumerate() {
            let share = mms_exact(&inst, i, ell, d).unwrap().value;
            assert!(v >= share, "trial {trial}: agent {i} got {v} < {share}");
        }
        let groups = BalancedGroups::new(n, ell);
        for b in &sol.ordered_allocation.bundles {
            assert!(is_l_balanced(b, &groups), "trial {trial}: {b} not balanced");
        }
        for (_, trace) in &sol.traces {
            *cases.entry(format!("{:?}", trace.case)).or_insert(0) += 1;
        }
    }
    println!("divider cases: {cases:?}");
}

#[test]
fn greedy_thresholds_are_met() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(n..=30);
        let ell = rng.random_range(1..=3);
        let inst = random_instance(&mut rng, n, m, 100);
        let sol = solve_ordinal_with(&inst, ell, WitnessMethod::Greedy, &MmsSolver::default()).unwrap();
        for (v, g) in sol.allocation.values(&inst).iter().zip(&sol.guarantees) {
            assert!(v >= g);
        }
    }
}

/// Generic Lone Divider with the unrestricted 1-out-of-(2n-2) thresholds.
#[test]
fn generic_lone_divider_reaches_reasonable_thresholds() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(1..=7);
        let inst = random_instance(&mut rng, n, m, 9);
        let d = (2 * n - 2).max(1);
        let thresholds: Vec<u64> = (0..n).map(|i| mms_exact(&inst, i, 1, d).unwrap().value).collect();
        let mut strategy = ExhaustiveDivider {
            values: inst.values().to_vec(),
            thresholds: thresholds.clone(),
        };
        let t: Vec<BigRational> = thresholds.iter().map(|&t| rational(t)).collect();
        let a = lone_divider(&inst, &t, &mut strategy).unwrap();
        for (v, t) in a.values(&inst).iter().zip(&thresholds) {
            assert!(v >= t);
        }
    }
}

fn scaled_sorted(row: &[u64], ell: usize, d: usize) -> ScaledValuation {
    let w = MmsSolver::with_max_goods(20).solve(row, ell, d).unwrap();
    ScaledValuation::from_witness(row, ell, &w).unwrap().sorted().0
}

/// Step 0 leaves every remaining tuple unacceptable, and the Mixed-case bags satisfy
/// the waste accounting.
#[test]
fn trace_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mixed = 0;
    for _ in 0..400 {
        let n = rng.random_range(2..=5);
        let ell = rng.random_range(1..=2);
        let m = rng.random_range(ordinal_d(ell, n)..=14);
        let mut row: Vec<u64> = (0..m).map(|_| rng.random_range(1..=30)).collect();
        row.sort_unstable_by(|a, b| b.cmp(a));
        let sv = scaled_sorted(&row, ell, ordinal_d(ell, n));
        let groups = BalancedGroups::new(n, ell);
        let (bundles, trace) = balanced_partition_traced(&sv, &DividerState::initial(m), &groups).unwrap();
        assert_eq!(bundles.len(), n);

        // after Step 0, the best remaining tuple is unacceptable
        if trace.case != DividerCase::TuplesOnly {
            let step0 = trace.bags_in(BagStep::Step0).count();
            let top: Bundle = (0..ell).map(|l| groups.group(l).start + step0).collect();
            assert!(sv.value(&top) < rational(ell as u64));
        }

        if trace.case == DividerCase::Mixed {
            mixed += 1;
            assert!(trace.analysis.hminus.len() * 2 <= n);
            let step1: Vec<Bundle> = trace.bags_in(BagStep::Step1).filter(|b| b.complete).map(|b| b.goods.clone()).collect();
            let s = step1.len();
            let step2: Vec<Bundle> =
                trace.bags_in(BagStep::Step2).filter(|b| b.complete).take(s).map(|b| b.goods.clone()).collect();
            let waste = total_waste(&sv, step1.iter().chain(&step2));
            assert!(waste <= rational(s as u64) * sv.part_cap());
        }
        // every witness part has at most one high-value good
        for part in &sv.witness {
            assert!(part.iter().filter(|&g| g < trace.analysis.h).count() <= 1);
        }
        assert!(total_waste(&sv, &bundles) >= BigRational::zero());
    }
    println!("mixed-case partitions: {mixed}");
}
