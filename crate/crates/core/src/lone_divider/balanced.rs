//! The divider's construction of ℓ-balanced acceptable bundles.
//!
//! Positions are those of the ordered instance, so group `l` (0-based) holds
//! positions `l·n .. (l+1)·n` and every agent agrees on which goods are in it. The
//! divider works with its scaled valuation relabelled in descending order and the
//! witness parts moved along with it.
//!
//! The construction runs in stages. Step 0 peels off ℓ-tuples made of the top
//! remaining good of every group while such a tuple is already acceptable. What
//! follows depends on the number `h` of high-value goods (value above (ℓ−x)/2) and on
//! how many tuple bundles `k'` exist after Step 0:
//!
//! * few high-value goods (`h ≤ ℓn`) or many tuple bundles (`2k' ≥ n`): seed each bag
//!   with one good per group and fill it from the goods outside the groups;
//! * otherwise seed bags with the cheapest group goods and fill them with the
//!   high-value goods outside the groups (Step 1), then with the remainder sets of
//!   the high-value goods that matter (Step 2), then with anything low-valued (Step 3).

use std::collections::VecDeque;
use std::ops::Range;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Bundle;
use crate::scaling::{rational, ScaledValuation};

/// The top `ℓ·n` positions of the ordered instance split into `ℓ` groups of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedGroups {
    pub n: usize,
    pub ell: usize,
}

impl BalancedGroups {
    pub fn new(n: usize, ell: usize) -> Self {
        BalancedGroups { n, ell }
    }

    /// Positions in group `l` (0-based).
    pub fn group(&self, l: usize) -> Range<usize> {
        l * self.n..(l + 1) * self.n
    }

    pub fn group_of(&self, pos: usize) -> Option<usize> {
        (pos < self.span()).then(|| pos / self.n)
    }

    /// `ℓ·n`, the number of grouped positions.
    pub fn span(&self) -> usize {
        self.n * self.ell
    }
}

/// A non-empty bundle is ℓ-balanced when, for every `l < min(|b|, ℓ)`, it holds exactly
/// one good of group `l`, and nothing from the remaining groups.
pub fn is_l_balanced(b: &Bundle, groups: &BalancedGroups) -> bool {
    if b.is_empty() {
        return false;
    }
    let mut counts = vec![0usize; groups.ell];
    for g in b {
        if let Some(l) = groups.group_of(g) {
            counts[l] += 1;
        }
    }
    let filled = b.len().min(groups.ell);
    counts
        .iter()
        .enumerate()
        .all(|(l, &c)| c == usize::from(l < filled))
}

/// What the divider sees when it is its turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DividerState {
    /// Bundles already handed to other agents; all unacceptable to this divider.
    pub allocated: Vec<Bundle>,
    pub remaining: Bundle,
}

impl DividerState {
    pub fn initial(m: usize) -> Self {
        DividerState {
            allocated: Vec::new(),
            remaining: Bundle::full(m),
        }
    }

    pub fn k(&self) -> usize {
        self.allocated.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DividerCase {
    /// Step 0 alone produced every bundle.
    TuplesOnly,
    /// `h ≤ ℓn`.
    FewHighValue,
    /// `2k' ≥ n`.
    ManyTuples,
    /// `h > ℓn` and `2k' < n`.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BagStep {
    Step0,
    Fill,
    Step1,
    Step2,
    Step3,
}

/// One bag built by the divider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BagRecord {
    pub step: BagStep,
    /// Group goods the bag was initialised with, one per group.
    pub seeds: Vec<usize>,
    pub goods: Bundle,
    pub value: BigRational,
    /// The item that made the bag acceptable: a good, or in Step 2 the high-value good
    /// whose remainder set was added last.
    pub closing: Option<usize>,
    pub complete: bool,
}

/// A high-value good, the witness part holding it and the rest of that part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighGood {
    pub good: usize,
    pub witness_part: usize,
    pub remainder: Bundle,
    pub remainder_value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighValueAnalysis {
    /// Number of goods (over all of M) worth more than (ℓ−x)/2.
    pub h: usize,
    /// Remaining group goods after Step 0.
    pub hplus: Bundle,
    /// Remaining high-value goods outside the groups.
    pub hminus: Bundle,
    pub goods: Vec<HighGood>,
}

impl HighValueAnalysis {
    pub fn record(&self, good: usize) -> Option<&HighGood> {
        self.goods.get(good).filter(|r| r.good == good)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTrace {
    pub k: usize,
    pub kprime: usize,
    pub case: DividerCase,
    pub analysis: HighValueAnalysis,
    /// Bags in construction order, Step 0 first.
    pub bags: Vec<BagRecord>,
}

impl PartitionTrace {
    pub fn bags_in(&self, step: BagStep) -> impl Iterator<Item = &BagRecord> {
        self.bags.iter().filter(move |b| b.step == step)
    }
}

struct Bag {
    goods: Bundle,
    value: BigRational,
    seeds: Vec<usize>,
    closing: Option<usize>,
}

impl Bag {
    fn seeded(sv: &ScaledValuation, seeds: Vec<usize>) -> Self {
        let goods: Bundle = seeds.iter().copied().collect();
        Bag {
            value: sv.value(&goods),
            goods,
            seeds,
            closing: None,
        }
    }

    fn add(&mut self, sv: &ScaledValuation, good: usize) {
        self.value += &sv.values[good];
        self.goods.insert(good);
        self.closing = Some(good);
    }

    fn record(&self, step: BagStep, threshold: &BigRational) -> BagRecord {
        BagRecord {
            step,
            seeds: self.seeds.clone(),
            goods: self.goods.clone(),
            value: self.value.clone(),
            closing: self.closing,
            complete: self.value >= *threshold,
        }
    }
}

/// Builds the bundles one divider proposes, enforcing its preconditions and recording
/// the intermediate state for inspection.
struct Builder<'a> {
    sv: &'a ScaledValuation,
    groups: BalancedGroups,
    threshold: BigRational,
    /// Unused goods of each group in ascending position (descending value).
    avail: Vec<VecDeque<usize>>,
    used: Vec<bool>,
    bundles: Vec<Bundle>,
    bags: Vec<BagRecord>,
}

impl Builder<'_> {
    fn take_top_tuple(&mut self) -> Vec<usize> {
        self.avail.iter_mut().map(|q| q.pop_front().expect("group not empty")).collect()
    }

    fn take_bottom_tuple(&mut self) -> Vec<usize> {
        self.avail.iter_mut().map(|q| q.pop_back().expect("group not empty")).collect()
    }

    fn groups_empty(&self) -> bool {
        self.avail[0].is_empty()
    }

    fn seed(&mut self, seeds: Vec<usize>) -> Bag {
        for &g in &seeds {
            self.used[g] = true;
        }
        Bag::seeded(self.sv, seeds)
    }

    fn add(&mut self, bag: &mut Bag, good: usize) {
        debug_assert!(!self.used[good]);
        self.used[good] = true;
        bag.add(self.sv, good);
    }

    fn close(&mut self, bag: Bag, step: BagStep) -> bool {
        let rec = bag.record(step, &self.threshold);
        let complete = rec.complete;
        self.bags.push(rec);
        if complete {
            self.bundles.push(bag.goods);
        }
        complete
    }

    fn fail(&self, what: &str) -> Error {
        Error::ContractViolation(format!(
            "{what}: built {} acceptable bundles ({} remaining per group)",
            self.bundles.len(),
            self.avail[0].len()
        ))
    }

    /// Seed with one good per group, fill from `pool` in order.
    fn plain_fill(&mut self, pool: &mut VecDeque<usize>, step: BagStep, bottom: bool) -> Result<()> {
        while !self.groups_empty() {
            let seeds = if bottom { self.take_bottom_tuple() } else { self.take_top_tuple() };
            let bag = self.seed(seeds);
            self.fill_bag(bag, pool, step)?;
        }
        Ok(())
    }

    fn fill_bag(&mut self, mut bag: Bag, pool: &mut VecDeque<usize>, step: BagStep) -> Result<()> {
        while bag.value < self.threshold {
            match pool.pop_front() {
                Some(g) => self.add(&mut bag, g),
                None => break,
            }
        }
        if self.close(bag, step) {
            Ok(())
        } else {
            Err(self.fail("bag-filling ran out of goods"))
        }
    }
}

/// The divider's `n − k` pairwise-disjoint ℓ-balanced bundles, each worth at least ℓ,
/// covering every remaining good.
///
/// `sv` must be sorted in descending value (see [`ScaledValuation::sorted`]) over at
/// least `ℓ·n` positions, and every allocated bundle must be ℓ-balanced and worth less
/// than ℓ to the divider.
pub fn balanced_partition(
    sv: &ScaledValuation,
    state: &DividerState,
    groups: &BalancedGroups,
) -> Result<Vec<Bundle>> {
    balanced_partition_traced(sv, state, groups).map(|(b, _)| b)
}

pub fn balanced_partition_traced(
    sv: &ScaledValuation,
    state: &DividerState,
    groups: &BalancedGroups,
) -> Result<(Vec<Bundle>, PartitionTrace)> {
    let (n, ell, m) = (groups.n, groups.ell, sv.m());
    let k = state.k();
    if sv.ell != ell {
        return Err(Error::InvalidParameter(format!(
            "valuation is scaled for ell = {}, groups use {ell}",
            sv.ell
        )));
    }
    if m < groups.span() {
        return Err(Error::InvalidParameter(format!(
            "{m} goods cannot fill {ell} groups of {n}; pad the instance first"
        )));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!("{k} bundles already allocated to {n} agents")));
    }
    if !sv.values.windows(2).all(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("divider valuation is not in descending order".into()));
    }
    let threshold = rational(ell as u64);
    for b in &state.allocated {
        if !is_l_balanced(b, groups) || sv.value(b) >= threshold {
            return Err(Error::InvalidParameter(format!(
                "allocated bundle {b} is not an unacceptable ℓ-balanced bundle"
            )));
        }
    }

    let mut used = vec![true; m];
    for g in &state.remaining {
        used[g] = false;
    }
    let avail: Vec<VecDeque<usize>> = (0..ell)
        .map(|l| groups.group(l).filter(|&p| !used[p]).collect())
        .collect();
    if let Some(l) = avail.iter().position(|q| q.len() != n - k) {
        return Err(Error::InvalidParameter(format!(
            "group {l} has {} remaining goods, expected {}",
            avail[l].len(),
            n - k
        )));
    }

    let mut b = Builder {
        sv,
        groups: *groups,
        threshold: threshold.clone(),
        avail,
        used,
        bundles: Vec::new(),
        bags: Vec::new(),
    };

    // Step 0: the top tuple is the most valuable one left, so once it is
    // unacceptable every remaining tuple is.
    while !b.groups_empty() {
        let top: Bundle = b.avail.iter().map(|q| q[0]).collect();
        if sv.value(&top) < threshold {
            break;
        }
        let seeds = b.take_top_tuple();
        let bag = b.seed(seeds);
        b.close(bag, BagStep::Step0);
    }
    let kprime = k + b.bundles.len();

    let analysis = analyse_high_value(sv, groups, &b);
    let h = analysis.h;
    let outside = |b: &Builder, pred: &dyn Fn(usize) -> bool| -> VecDeque<usize> {
        (groups.span()..m).filter(|&p| !b.used[p] && pred(p)).collect()
    };

    let case = if b.groups_empty() {
        DividerCase::TuplesOnly
    } else if h <= groups.span() {
        DividerCase::FewHighValue
    } else if 2 * kprime >= n {
        DividerCase::ManyTuples
    } else {
        DividerCase::Mixed
    };

    match case {
        DividerCase::TuplesOnly => {}
        DividerCase::FewHighValue | DividerCase::ManyTuples => {
            let mut pool = outside(&b, &|_| true);
            b.plain_fill(&mut pool, BagStep::Fill, false)?;
        }
        DividerCase::Mixed => mixed_case(&mut b, state, &analysis, &outside)?,
    }

    if b.bundles.len() != n - k {
        return Err(b.fail("wrong number of bundles"));
    }
    // Leftover low-value goods go to the last bundle.
    let leftover: Vec<usize> = (0..m).filter(|&g| !b.used[g]).collect();
    b.bundles.last_mut().expect("n - k >= 1").extend(leftover);

    for bundle in &b.bundles {
        if !is_l_balanced(bundle, groups) || sv.value(bundle) < threshold {
            return Err(Error::ContractViolation(format!(
                "constructed bundle {bundle} is not acceptable and ℓ-balanced"
            )));
        }
    }

    let trace = PartitionTrace {
        k,
        kprime,
        case,
        analysis,
        bags: b.bags,
    };
    Ok((b.bundles, trace))
}

fn analyse_high_value(sv: &ScaledValuation, groups: &BalancedGroups, b: &Builder) -> HighValueAnalysis {
    let half = sv.part_cap() / rational(2);
    let h = sv.values.iter().take_while(|v| **v > half).count();
    let mut part_of = vec![usize::MAX; sv.m()];
    for (i, part) in sv.witness.iter().enumerate() {
        for g in part {
            part_of[g] = i;
        }
    }
    let goods = (0..h)
        .map(|g| {
            let part = part_of[g];
            let mut remainder = sv.witness[part].clone();
            remainder.remove(g);
            HighGood {
                good: g,
                witness_part: part,
                remainder_value: sv.value(&remainder),
                remainder,
            }
        })
        .collect();
    HighValueAnalysis {
        h,
        hplus: b.avail.iter().flatten().copied().collect(),
        hminus: (groups.span()..h.max(groups.span())).filter(|&p| !b.used[p]).collect(),
        goods,
    }
}

/// Goods outside the top groups, restricted by a predicate, in fill order.
type OutsideGoods<'a> = dyn Fn(&Builder, &dyn Fn(usize) -> bool) -> VecDeque<usize> + 'a;

fn mixed_case(
    b: &mut Builder,
    state: &DividerState,
    analysis: &HighValueAnalysis,
    outside: &OutsideGoods,
) -> Result<()> {
    let groups = b.groups;

    // Step 1: cheapest tuple per bag, filled with high-value goods from outside the groups.
    let mut hminus: VecDeque<usize> = analysis.hminus.iter().collect();
    let mut incomplete = None;
    let mut step1_closed = Vec::new();
    while !hminus.is_empty() {
        if b.groups_empty() {
            return Err(b.fail("high-value goods outlasted the groups"));
        }
        let seeds = b.take_bottom_tuple();
        let mut bag = b.seed(seeds);
        while bag.value < b.threshold {
            match hminus.pop_front() {
                Some(g) => b.add(&mut bag, g),
                None => break,
            }
        }
        if bag.value >= b.threshold {
            step1_closed.push((bag.seeds.clone(), bag.closing.expect("filled")));
            b.close(bag, BagStep::Step1);
        } else {
            incomplete = Some(bag);
        }
    }

    // Step 2: remainder sets of the group goods inside the unacceptable bundles and of
    // the goods that made up the Step 1 bundles, by witness part.
    let mut sources: Vec<usize> = state
        .allocated
        .iter()
        .flat_map(|bundle| bundle.iter().filter(|&g| groups.group_of(g).is_some()))
        .collect();
    for (seeds, closing) in &step1_closed {
        sources.extend(seeds.iter().copied());
        sources.push(*closing);
    }
    let mut remainders: Vec<(usize, usize)> = sources
        .into_iter()
        .filter_map(|g| analysis.record(g).map(|r| (r.witness_part, g)))
        .collect();
    remainders.sort_unstable();
    let mut remainders: VecDeque<(usize, usize)> = remainders.into();

    let mut current = incomplete;
    while !remainders.is_empty() {
        let mut bag = match current.take() {
            Some(bag) => bag,
            None if b.groups_empty() => break,
            None => {
                let seeds = b.take_bottom_tuple();
                b.seed(seeds)
            }
        };
        while bag.value < b.threshold {
            let Some((part, high)) = remainders.pop_front() else { break };
            let goods: Vec<usize> = analysis
                .record(high)
                .map(|r| r.remainder.iter().filter(|&g| !b.used[g]).collect())
                .unwrap_or_default();
            debug_assert!(part < usize::MAX);
            if goods.is_empty() {
                continue;
            }
            for g in goods {
                b.add(&mut bag, g);
            }
            bag.closing = Some(high);
        }
        if bag.value >= b.threshold {
            b.close(bag, BagStep::Step2);
        } else {
            current = Some(bag);
        }
    }

    // Step 3: plain bag-filling with whatever low-value goods are left.
    let mut pool = outside(b, &|_| true);
    if let Some(bag) = current {
        b.fill_bag(bag, &mut pool, BagStep::Step3)?;
    }
    b.plain_fill(&mut pool, BagStep::Step3, true)
}

/// Any ℓ-balanced partition of the remaining goods into `n − k` bundles. Used for
/// dividers that value everything at zero, to whom every bundle is acceptable.
pub fn any_balanced_partition(state: &DividerState, groups: &BalancedGroups) -> Result<Vec<Bundle>> {
    let parts = groups.n.checked_sub(state.k()).filter(|&p| p > 0).ok_or_else(|| {
        Error::InvalidParameter(format!("{} bundles already allocated to {} agents", state.k(), groups.n))
    })?;
    let avail: Vec<Vec<usize>> = (0..groups.ell)
        .map(|l| groups.group(l).filter(|&p| state.remaining.contains(p)).collect())
        .collect();
    if avail.iter().any(|q| q.len() != parts) {
        return Err(Error::InvalidParameter("groups do not have n - k remaining goods each".into()));
    }
    let mut bundles: Vec<Bundle> = (0..parts).map(|a| avail.iter().map(|q| q[a]).collect()).collect();
    let leftover = state.remaining.iter().filter(|&g| groups.group_of(g).is_none());
    bundles.last_mut().expect("parts > 0").extend(leftover);
    Ok(bundles)
}

/// `v(B) − ℓ` under the scaled valuation.
pub fn waste(sv: &ScaledValuation, b: &Bundle) -> BigRational {
    sv.waste(b)
}

/// Total waste of a collection of bundles.
pub fn total_waste<'a>(sv: &ScaledValuation, bundles: impl IntoIterator<Item = &'a Bundle>) -> BigRational {
    bundles.into_iter().fold(BigRational::zero(), |acc, b| acc + sv.waste(b))
}
