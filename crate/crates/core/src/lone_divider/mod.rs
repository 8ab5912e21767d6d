//! The Lone Divider loop and the ordinal solver built on the balanced divider.
//!
//! Each round the lowest-index remaining agent partitions the remaining goods into
//! one bundle per remaining agent, all acceptable to itself. Bundles are matched to
//! agents by a maximum envy-free matching; matched agents leave with their bundles and
//! everything else goes back into the pool for the next round.

mod balanced;

pub use balanced::{
    any_balanced_partition, balanced_partition, balanced_partition_traced, is_l_balanced, total_waste, waste,
    BagRecord, BagStep, BalancedGroups, DividerCase, DividerState, HighGood, HighValueAnalysis, PartitionTrace,
};

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{order_instance, pad_with_dummies, unorder_allocation, Allocation, Bundle, Instance};
use crate::matching::{envy_free_matching, AcceptabilityGraph};
use crate::mms::{row_greedy_lower_bound, MmsSolver, MmsWitness};
use crate::scaling::{rational, ScaledValuation};

/// Per-agent acceptability levels.
pub type ThresholdVector = Vec<BigRational>;

/// How the divider of a round partitions the remaining goods.
pub trait DividerStrategy {
    /// Splits `state.remaining` into `parts` disjoint bundles covering it, each
    /// acceptable to `divider`.
    fn divide(&mut self, divider: usize, state: &DividerState, parts: usize) -> Result<Vec<Bundle>>;
}

/// One round of the loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub divider: usize,
    pub partition: Vec<Bundle>,
    /// `(agent, index into partition)`.
    pub matching: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoneDividerRun {
    pub allocation: Allocation,
    pub rounds: Vec<Round>,
}

/// Lone Divider over an instance with integer values.
pub fn lone_divider(
    inst: &Instance,
    thresholds: &[BigRational],
    strategy: &mut dyn DividerStrategy,
) -> Result<Allocation> {
    let values: Vec<Vec<BigRational>> = inst
        .values()
        .iter()
        .map(|row| row.iter().map(|&v| rational(v)).collect())
        .collect();
    lone_divider_traced(&values, thresholds, strategy).map(|run| run.allocation)
}

/// Lone Divider over rational values, keeping the per-round record.
pub fn lone_divider_traced(
    values: &[Vec<BigRational>],
    thresholds: &[BigRational],
    strategy: &mut dyn DividerStrategy,
) -> Result<LoneDividerRun> {
    let n = values.len();
    if thresholds.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} thresholds for {n} agents",
            thresholds.len()
        )));
    }
    let m = values.first().map_or(0, Vec::len);
    if values.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidInstance("rows have different lengths".into()));
    }
    let value = |agent: usize, b: &Bundle| -> BigRational { b.iter().map(|g| &values[agent][g]).sum() };

    let mut agents: Vec<usize> = (0..n).collect();
    let mut state = DividerState::initial(m);
    let mut allocation = Allocation::empty(n);
    let mut rounds = Vec::new();
    while let Some(&divider) = agents.first() {
        let parts = agents.len();
        let partition = strategy.divide(divider, &state, parts)?;
        check_partition(&partition, &state.remaining, parts)?;

        let mut graph = AcceptabilityGraph::new(parts, parts);
        for (a, &agent) in agents.iter().enumerate() {
            for (p, b) in partition.iter().enumerate() {
                if value(agent, b) >= thresholds[agent] {
                    graph.add_edge(a, p);
                }
            }
        }
        if graph.neighbours(0).count() != parts {
            return Err(Error::ContractViolation(format!(
                "divider {divider} does not accept all of its own bundles"
            )));
        }
        let matching = envy_free_matching(&graph);
        debug_assert!(!matching.is_empty());

        let mut matched = vec![false; parts];
        for &(a, p) in &matching {
            let b = &partition[p];
            allocation.bundles[agents[a]] = b.clone();
            state.remaining = state.remaining.difference(b);
            state.allocated.push(b.clone());
            matched[a] = true;
        }
        rounds.push(Round {
            divider,
            matching: matching.iter().map(|&(a, p)| (agents[a], p)).collect(),
            partition,
        });
        agents = agents
            .iter()
            .zip(&matched)
            .filter(|(_, &done)| !done)
            .map(|(&agent, _)| agent)
            .collect();
    }
    allocation.unallocated = state.remaining;
    Ok(LoneDividerRun { allocation, rounds })
}

fn check_partition(partition: &[Bundle], remaining: &Bundle, parts: usize) -> Result<()> {
    if partition.len() != parts {
        return Err(Error::ContractViolation(format!(
            "divider produced {} bundles, {parts} needed",
            partition.len()
        )));
    }
    let mut union = Bundle::new();
    for b in partition {
        if !b.is_disjoint(&union) {
            return Err(Error::ContractViolation("divider bundles overlap".into()));
        }
        union = union.union(b);
    }
    if union != *remaining {
        return Err(Error::ContractViolation(
            "divider bundles do not cover the remaining goods".into(),
        ));
    }
    Ok(())
}

/// Exhaustive divider for small instances: finds any partition of the remaining goods
/// in which every bundle meets the divider's integer threshold.
#[derive(Debug, Clone)]
pub struct ExhaustiveDivider {
    pub values: Vec<Vec<u64>>,
    pub thresholds: Vec<u64>,
}

impl DividerStrategy for ExhaustiveDivider {
    fn divide(&mut self, divider: usize, state: &DividerState, parts: usize) -> Result<Vec<Bundle>> {
        let row = &self.values[divider];
        let t = self.thresholds[divider];
        let mut goods: Vec<usize> = state.remaining.iter().collect();
        goods.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
        let mut suffix = vec![0u64; goods.len() + 1];
        for i in (0..goods.len()).rev() {
            suffix[i] = suffix[i + 1] + row[goods[i]];
        }

        fn search(
            i: usize,
            goods: &[usize],
            row: &[u64],
            suffix: &[u64],
            t: u64,
            sums: &mut Vec<u64>,
            assign: &mut Vec<usize>,
        ) -> bool {
            let deficit: u64 = sums.iter().map(|&s| t.saturating_sub(s)).sum();
            if deficit > suffix[i] {
                return false;
            }
            if i == goods.len() {
                return true;
            }
            let mut opened_empty = false;
            for p in 0..sums.len() {
                if sums[p] == 0 && assign.iter().all(|&q| q != p) {
                    // Empty parts are interchangeable.
                    if std::mem::replace(&mut opened_empty, true) {
                        continue;
                    }
                }
                sums[p] += row[goods[i]];
                assign.push(p);
                if search(i + 1, goods, row, suffix, t, sums, assign) {
                    return true;
                }
                assign.pop();
                sums[p] -= row[goods[i]];
            }
            false
        }

        let mut sums = vec![0u64; parts];
        let mut assign = Vec::with_capacity(goods.len());
        if !search(0, &goods, row, &suffix, t, &mut sums, &mut assign) {
            return Err(Error::ContractViolation(format!(
                "threshold {t} is not reasonable for agent {divider}: no {parts}-partition reaches it"
            )));
        }
        let mut partition = vec![Bundle::new(); parts];
        for (&g, &p) in goods.iter().zip(&assign) {
            partition[p].insert(g);
        }
        Ok(partition)
    }
}

/// The restricted divider: every agent divides into ℓ-balanced bundles using its
/// scaled valuation in descending order. Agents without one value everything at zero.
#[derive(Debug, Clone)]
pub struct BalancedDivider {
    pub scaled: Vec<Option<ScaledValuation>>,
    pub groups: BalancedGroups,
    /// `(divider, trace)` for every round.
    pub traces: Vec<(usize, PartitionTrace)>,
}

impl BalancedDivider {
    pub fn new(scaled: Vec<Option<ScaledValuation>>, groups: BalancedGroups) -> Self {
        BalancedDivider {
            scaled,
            groups,
            traces: Vec::new(),
        }
    }
}

impl DividerStrategy for BalancedDivider {
    fn divide(&mut self, divider: usize, state: &DividerState, parts: usize) -> Result<Vec<Bundle>> {
        if parts != self.groups.n - state.k() {
            return Err(Error::ContractViolation(format!(
                "{parts} bundles requested after {} allocations among {} agents",
                state.k(),
                self.groups.n
            )));
        }
        match &self.scaled[divider] {
            Some(sv) => {
                let (bundles, trace) = balanced_partition_traced(sv, state, &self.groups)?;
                self.traces.push((divider, trace));
                Ok(bundles)
            }
            None => any_balanced_partition(state, &self.groups),
        }
    }
}

/// `⌊(ℓ+½)n⌋`.
pub fn ordinal_d(ell: usize, n: usize) -> usize {
    (2 * ell + 1) * n / 2
}

/// Where the partition used for scaling comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessMethod {
    /// The exact maximin partition; the guarantee is the exact share.
    #[default]
    Exact,
    /// Greedy number partitioning; the guarantee is the greedy lower bound.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalSolution {
    pub ell: usize,
    pub d: usize,
    /// Allocation of the original goods.
    pub allocation: Allocation,
    /// The same allocation as positions of the padded, ordered instance.
    pub ordered_allocation: Allocation,
    /// Value each agent is guaranteed (the ℓ-smallest sum of its scaling partition).
    pub guarantees: Vec<u64>,
    pub traces: Vec<(usize, PartitionTrace)>,
}

/// An allocation giving every agent at least its ℓ-out-of-⌊(ℓ+½)n⌋ maximin share.
pub fn solve_ordinal(inst: &Instance, ell: usize) -> Result<Allocation> {
    solve_ordinal_with(inst, ell, WitnessMethod::Exact, &MmsSolver::default()).map(|s| s.allocation)
}

pub fn solve_ordinal_with(
    inst: &Instance,
    ell: usize,
    method: WitnessMethod,
    solver: &MmsSolver,
) -> Result<OrdinalSolution> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    let n = inst.n();
    let d = ordinal_d(ell, n);
    let (padded, ordered, maps) = prepare(inst, ell);
    let witnesses: Vec<MmsWitness> = (0..n)
        .into_par_iter()
        .map(|i| match method {
            WitnessMethod::Exact => solver.solve(ordered.row(i), ell, d),
            WitnessMethod::Greedy => row_greedy_lower_bound(ordered.row(i), ell, d),
        })
        .collect::<Result<_>>()?;
    let scaled = witnesses
        .iter()
        .enumerate()
        .map(|(i, w)| scaled_or_degenerate(ScaledValuation::from_witness(ordered.row(i), ell, w)))
        .collect::<Result<Vec<_>>>()?;
    let (ordered_allocation, traces) = balanced_lone_divider(&ordered, ell, scaled)?;
    let allocation = strip_dummies(unorder_allocation(&ordered_allocation, &maps)?, inst.m());
    debug_assert_eq!(padded.m(), ordered.m());
    Ok(OrdinalSolution {
        ell,
        d,
        allocation,
        ordered_allocation,
        guarantees: witnesses.iter().map(|w| w.value).collect(),
        traces,
    })
}

/// Pads to at least `ℓn` goods and orders.
pub(crate) fn prepare(inst: &Instance, ell: usize) -> (Instance, Instance, crate::instance::OrderingMaps) {
    let padded = pad_with_dummies(inst, (ell * inst.n()).saturating_sub(inst.m()));
    let (ordered, maps) = order_instance(&padded);
    (padded, ordered, maps)
}

pub(crate) fn scaled_or_degenerate(sv: Result<ScaledValuation>) -> Result<Option<ScaledValuation>> {
    match sv {
        Ok(sv) => Ok(Some(sv)),
        Err(Error::DegenerateValuation) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Drops padding goods (indices `>= m`).
pub(crate) fn strip_dummies(mut alloc: Allocation, m: usize) -> Allocation {
    for b in alloc.bundles.iter_mut().chain(std::iter::once(&mut alloc.unallocated)) {
        *b = b.iter().filter(|&g| g < m).collect();
    }
    alloc
}

/// Runs the loop with threshold ℓ for every scaled agent and 0 for degenerate ones,
/// each agent valuing positions by its trimmed values in descending order.
pub(crate) fn balanced_lone_divider(
    ordered: &Instance,
    ell: usize,
    scaled: Vec<Option<ScaledValuation>>,
) -> Result<(Allocation, Vec<(usize, PartitionTrace)>)> {
    let n = ordered.n();
    let sorted: Vec<Option<ScaledValuation>> = scaled.iter().map(|s| s.as_ref().map(|sv| sv.sorted().0)).collect();
    let values: Vec<Vec<BigRational>> = sorted
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            Some(sv) => sv.values.clone(),
            None => ordered.row(i).iter().map(|&v| rational(v)).collect(),
        })
        .collect();
    let thresholds: ThresholdVector = sorted
        .iter()
        .map(|s| s.as_ref().map_or_else(BigRational::zero, |_| rational(ell as u64)))
        .collect();
    let mut strategy = BalancedDivider::new(sorted, BalancedGroups::new(n, ell));
    let run = lone_divider_traced(&values, &thresholds, &mut strategy)?;
    Ok((run.allocation, strategy.traces))
}
