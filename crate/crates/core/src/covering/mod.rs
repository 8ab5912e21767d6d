//! Bag-filling, threshold shares computed by simulation, exact bin covering, and the
//! ℓ-out-of-d allocation driven by a bin-covering oracle.

mod bag_filling;
mod exact;

pub use bag_filling::{
    bag_filling, bidirectional_bag_filling, simulate, unidirectional_bag_filling, CoverResult, FillDirection,
};
pub use exact::{cover_opt_exact, cover_opt_witness, EXACT_COVER_MAX_GOODS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{descending_order, order_instance, unorder_allocation, Allocation, Bundle, Instance};
use crate::lone_divider::{balanced_lone_divider, ordinal_d, prepare, scaled_or_degenerate, strip_dummies};
use crate::scaling::ScaledValuation;

/// A bin-covering procedure: fills as many bags worth at least `t` as it can from
/// goods valued `values` (in descending order).
pub trait CoverOracle: Sync {
    fn cover(&self, values: &[u64], t: u64) -> CoverResult;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BagFillingOracle(pub FillDirection);

impl CoverOracle for BagFillingOracle {
    fn cover(&self, values: &[u64], t: u64) -> CoverResult {
        simulate(values, t, None, self.0)
    }
}

/// Optimal covering; exponential in the number of goods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExactCoverOracle;

impl CoverOracle for ExactCoverOracle {
    fn cover(&self, values: &[u64], t: u64) -> CoverResult {
        let bundles = cover_opt_witness(values, t).expect("instance within the exact cover size cap");
        let mut used = vec![false; values.len()];
        for g in bundles.iter().flatten() {
            used[g] = true;
        }
        CoverResult {
            filled: bundles.into_iter().enumerate().collect(),
            leftover: (0..values.len()).filter(|&g| !used[g]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    #[default]
    Binary,
    /// Scans every threshold from `v(M)` down; for auditing the binary search.
    Linear,
}

/// The largest threshold at which the oracle fills `d` bags, and that run's bags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverShare {
    pub value: u64,
    pub witness: CoverResult,
}

impl CoverShare {
    /// `d` parts: the first `d` bags, with everything else merged into the last.
    pub fn partition(&self, d: usize) -> Vec<Bundle> {
        self.witness.partition(d).unwrap_or_else(|| {
            // Fewer than d goods: singletons, then empty parts.
            let goods: Vec<usize> = self.witness.filled.iter().flat_map(|(_, b)| b.iter()).chain(self.witness.leftover.iter()).collect();
            let mut parts: Vec<Bundle> = (0..d).map(|j| goods.get(j).map(|&g| Bundle::from(vec![g])).unwrap_or_default()).collect();
            if let Some(last) = parts.last_mut() {
                last.extend(goods.iter().skip(d).copied());
            }
            parts
        })
    }
}

/// Largest `t` at which `oracle` fills at least `d` bags from `values` (any order).
/// Bags in the witness refer to the original good indices.
pub fn cover_share(values: &[u64], d: usize, oracle: &dyn CoverOracle) -> Result<CoverShare> {
    cover_share_with(values, d, oracle, SearchMode::Binary)
}

pub fn cover_share_with(values: &[u64], d: usize, oracle: &dyn CoverOracle, mode: SearchMode) -> Result<CoverShare> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let order = descending_order(values);
    let sorted: Vec<u64> = order.iter().map(|&g| values[g]).collect();
    let total: u64 = sorted.iter().sum();
    let run = |t: u64| oracle.cover(&sorted, t);

    let value = match mode {
        SearchMode::Binary => {
            // Threshold 0 is taken to succeed; total + 1 cannot.
            let (mut lo, mut hi) = (0u64, total + 1);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if run(mid).count() >= d {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
        SearchMode::Linear => (1..=total).rev().find(|&t| run(t).count() >= d).unwrap_or(0),
    };
    let witness = run(value);
    debug_assert!(value == 0 || witness.count() >= d);
    debug_assert!(run(value + 1).count() < d);

    let relabel = |b: &Bundle| -> Bundle { b.iter().map(|p| order[p]).collect() };
    Ok(CoverShare {
        value,
        witness: CoverResult {
            filled: witness.filled.iter().map(|(r, b)| (*r, relabel(b))).collect(),
            leftover: relabel(&witness.leftover),
        },
    })
}

/// Bidirectional bag-filling share: the largest `t` at which `n` clones of the agent
/// fill `n` bags.
pub fn bbfs(values: &[u64], n: usize) -> Result<CoverShare> {
    cover_share(values, n, &BagFillingOracle(FillDirection::Bidirectional))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BbfsOutcome {
    pub allocation: Allocation,
    pub shares: Vec<u64>,
    /// Bags of the ordered instance in the order they were awarded.
    pub ordered: CoverResult,
}

/// Bidirectional bag-filling with every agent's threshold set to its share.
pub fn bbfs_allocation(inst: &Instance) -> Result<BbfsOutcome> {
    let n = inst.n();
    let (ordered, maps) = order_instance(inst);
    let sims: Vec<CoverShare> = (0..n)
        .into_par_iter()
        .map(|i| bbfs(ordered.row(i), n))
        .collect::<Result<_>>()?;
    let shares: Vec<u64> = sims.iter().map(|s| s.value).collect();

    // Before round k the consumed goods lie inside the first k bags of every remaining
    // agent's own simulation.
    let mut check = |round: usize, consumed: &Bundle, agents: &[usize]| -> Result<()> {
        for &i in agents {
            let prefix: Bundle = sims[i].witness.filled.iter().take(round).flat_map(|(_, b)| b.iter()).collect();
            if !consumed.is_subset(&prefix) {
                return Err(Error::PrefixContainment { round, agent: i });
            }
        }
        Ok(())
    };
    let result = bag_filling::bag_filling_observed(&ordered, &shares, FillDirection::Bidirectional, &mut check)?;
    if result.count() < n {
        return Err(Error::ContractViolation(format!(
            "bag-filling served {} of {n} agents at their shares",
            result.count()
        )));
    }
    let mut ordered_alloc = Allocation::empty(n);
    for (i, b) in &result.filled {
        ordered_alloc.bundles[*i] = b.clone();
    }
    ordered_alloc.unallocated = result.leftover.clone();
    Ok(BbfsOutcome {
        allocation: unorder_allocation(&ordered_alloc, &maps)?,
        shares,
        ordered: result,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxSolution {
    pub ell: usize,
    pub d: usize,
    pub allocation: Allocation,
    pub shares: Vec<u64>,
}

impl ApproxSolution {
    /// `ℓ·share_i`, the value agent `i` is guaranteed.
    pub fn guarantee(&self, agent: usize) -> u64 {
        self.ell as u64 * self.shares[agent]
    }
}

/// Balanced Lone Divider with each agent scaled by its cover share at
/// `d = ⌊(ℓ+½)n⌋`; every agent receives at least `ℓ` times its share.
pub fn ell_approx_allocation(inst: &Instance, ell: usize, oracle: &dyn CoverOracle) -> Result<ApproxSolution> {
    if ell < 2 {
        return Err(Error::InvalidParameter("ell must be at least 2".into()));
    }
    let n = inst.n();
    let d = ordinal_d(ell, n);
    let (_, ordered, maps) = prepare(inst, ell);
    let shares: Vec<CoverShare> = (0..n)
        .into_par_iter()
        .map(|i| cover_share(ordered.row(i), d, oracle))
        .collect::<Result<_>>()?;
    let scaled = shares
        .iter()
        .enumerate()
        .map(|(i, s)| scaled_or_degenerate(ScaledValuation::from_cover(ordered.row(i), ell, s.value, &s.partition(d))))
        .collect::<Result<Vec<_>>>()?;
    let (ordered_alloc, _) = balanced_lone_divider(&ordered, ell, scaled)?;
    Ok(ApproxSolution {
        ell,
        d,
        allocation: strip_dummies(unorder_allocation(&ordered_alloc, &maps)?, inst.m()),
        shares: shares.iter().map(|s| s.value).collect(),
    })
}

/// Number of bins the bin-covering AFPTAS is guaranteed to fill when `opt` can be:
/// `opt − 2.35·opt^{2/3} − 1`.
pub fn js_bound(opt: u64) -> f64 {
    let o = opt as f64;
    o - 2.35 * o.cbrt().powi(2) - 1.0
}

/// The accuracy `(13t/s)^{1/3}` used for total value `s` and bin size `t`.
pub fn js_epsilon(s: f64, t: f64) -> f64 {
    (13.0 * t / s).cbrt()
}

/// `⌈d + 15·d^{2/3} + ℓ⌉` with `d = ⌊(ℓ+½)n⌋`: the number of parts whose ℓ-out-of
/// share the AFPTAS-based allocation guarantees.
pub fn approx_d(ell: usize, n: usize) -> u64 {
    let d = ordinal_d(ell, n) as f64;
    (d + 15.0 * d.cbrt().powi(2) + ell as f64).ceil() as u64
}
