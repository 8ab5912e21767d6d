use ordinal_mms::scaling::rational;
use ordinal_mms::{order_instance, scale_to_mms, unorder_allocation, Allocation, Instance, MmsSolver};
use proptest::prelude::*;

fn instance(max_n: usize, max_m: usize, hi: u64) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        prop::collection::vec(prop::collection::vec(0..=hi, m), n).prop_map(|v| Instance::new(v).unwrap())
    })
}

fn row(max_m: usize, hi: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=hi, 1..=max_m)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ordering_is_idempotent(inst in instance(4, 10, 30)) {
        let (once, _) = order_instance(&inst);
        let (twice, maps) = order_instance(&once);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.is_ordered());
        let identity: Vec<usize> = (0..inst.m()).collect();
        for i in 0..inst.n() {
            prop_assert_eq!(inst.total(i), once.total(i));
            prop_assert_eq!(maps.agent(i), identity.as_slice());
        }
    }

    /// Any allocation of positions maps back to original goods worth at least as much
    /// to each agent.
    #[test]
    fn unordering_never_loses_value(inst in instance(4, 9, 30), owners in prop::collection::vec(0usize..5, 9)) {
        let (ordered, maps) = order_instance(&inst);
        let n = inst.n();
        let mut alloc = Allocation::empty(n);
        for (p, &owner) in owners.iter().enumerate().take(inst.m()) {
            match owner {
                o if o < n => { alloc.bundles[o].insert(p); }
                _ => { alloc.unallocated.insert(p); }
            }
        }
        let back = unorder_allocation(&alloc, &maps).unwrap();
        prop_assert!(back.validate(inst.m()).is_ok());
        prop_assert_eq!(back.unallocated.len(), alloc.unallocated.len());
        let (before, after) = (alloc.values(&ordered), back.values(&inst));
        for i in 0..n {
            prop_assert!(after[i] >= before[i], "agent {}: {} < {}", i, after[i], before[i]);
        }
    }

    #[test]
    fn bundle_value_is_additive(inst in instance(3, 10, 50), mask in any::<u16>()) {
        let a: Vec<usize> = (0..inst.m()).filter(|g| mask >> g & 1 == 1).collect();
        let b: Vec<usize> = (0..inst.m()).filter(|g| mask >> g & 1 == 0).collect();
        for i in 0..inst.n() {
            let va = ordinal_mms::bundle_value(&inst, i, &a.iter().copied().collect());
            let vb = ordinal_mms::bundle_value(&inst, i, &b.iter().copied().collect());
            prop_assert_eq!(va + vb, inst.total(i));
        }
    }

    #[test]
    fn mms_is_monotone_in_d(values in row(9, 40), ell in 1usize..=2) {
        let solver = MmsSolver::default();
        let mut prev = u64::MAX;
        for d in ell..=6 {
            let v = solver.solve(&values, ell, d).unwrap().value;
            prop_assert!(v <= prev);
            // the ℓ cheapest of d parts hold at most an ℓ/d fraction
            prop_assert!(v * d as u64 <= ell as u64 * values.iter().sum::<u64>());
            prev = v;
        }
    }

    #[test]
    fn mms_scales_linearly(values in row(9, 40), ell in 1usize..=2, d in 2usize..=5, c in 1u64..=7) {
        prop_assume!(ell <= d);
        let solver = MmsSolver::default();
        let scaled: Vec<u64> = values.iter().map(|v| v * c).collect();
        prop_assert_eq!(solver.solve(&scaled, ell, d).unwrap().value, c * solver.solve(&values, ell, d).unwrap().value);
    }

    /// After normalizing by a maximin witness, the ℓ cheapest witness parts are worth
    /// exactly ℓ.
    #[test]
    fn rescaled_share_is_ell(values in row(10, 40), ell in 1usize..=3, d in 3usize..=6) {
        prop_assume!(ell <= d);
        let inst = Instance::new(vec![values.clone()]).unwrap();
        let w = MmsSolver::default().solve(&values, ell, d).unwrap();
        prop_assume!(w.value > 0);
        let sv = scale_to_mms(&inst, 0, ell, d, &w).unwrap();
        let mut parts = sv.part_values();
        parts.sort();
        let cheapest = parts.iter().take(ell).fold(rational(0), |acc, p| acc + p);
        prop_assert_eq!(cheapest, rational(ell as u64));
    }
}
