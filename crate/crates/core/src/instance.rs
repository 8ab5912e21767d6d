//! Instances, bundles, allocations and the ordering / picking-sequence machinery.
//!
//! Goods are identified by their column index `0..m`. Valuations are additive and
//! non-negative integers; `values[i][g]` is agent `i`'s value for good `g`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` agents with additive non-negative integer valuations over `m` goods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    values: Vec<Vec<u64>>,
    m: usize,
}

/// `n` and `m` are optional on input; when present they must match `values`.
#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: Option<usize>,
    m: Option<usize>,
    values: Vec<Vec<u64>>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        if let Some(n) = raw.n.filter(|&n| n != raw.values.len()) {
            return Err(Error::InvalidInstance(format!(
                "declared n = {n} but {} rows given",
                raw.values.len()
            )));
        }
        let m = raw.m.unwrap_or_else(|| raw.values.first().map_or(0, Vec::len));
        Instance::with_goods(raw.values, m)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            n: Some(inst.n()),
            m: Some(inst.m),
            values: inst.values,
        }
    }
}

impl Instance {
    /// Builds an instance from a non-empty list of equally long rows.
    pub fn new(values: Vec<Vec<u64>>) -> Result<Self> {
        let m = values.first().map_or(0, Vec::len);
        Self::with_goods(values, m)
    }

    fn with_goods(values: Vec<Vec<u64>>, m: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInstance("at least one agent is required".into()));
        }
        if let Some((i, row)) = values.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::InvalidInstance(format!(
                "row {i} has {} values, expected m = {m}",
                row.len()
            )));
        }
        Ok(Instance { values, m })
    }

    /// `n` agents sharing one valuation.
    pub fn identical(n: usize, row: Vec<u64>) -> Result<Self> {
        Self::new(vec![row; n])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Vec<u64>] {
        &self.values
    }

    pub fn row(&self, agent: usize) -> &[u64] {
        &self.values[agent]
    }

    pub fn value(&self, agent: usize, good: usize) -> u64 {
        self.values[agent][good]
    }

    /// `v_i(M)`.
    pub fn total(&self, agent: usize) -> u64 {
        self.values[agent].iter().sum()
    }

    /// Whether every agent's row is non-increasing.
    pub fn is_ordered(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] >= w[1]))
    }

    pub(crate) fn check_agent(&self, agent: usize) -> Result<()> {
        if agent < self.n() {
            Ok(())
        } else {
            Err(Error::AgentOutOfRange {
                agent,
                agents: self.n(),
            })
        }
    }
}

/// A set of goods, kept sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct Bundle(Vec<usize>);

impl Bundle {
    pub fn new() -> Self {
        Bundle(Vec::new())
    }

    /// The goods `0..m`.
    pub fn full(m: usize) -> Self {
        Bundle((0..m).collect())
    }

    pub fn goods(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, good: usize) -> bool {
        self.0.binary_search(&good).is_ok()
    }

    pub fn insert(&mut self, good: usize) -> bool {
        match self.0.binary_search(&good) {
            Ok(_) => false,
            Err(at) => {
                self.0.insert(at, good);
                true
            }
        }
    }

    pub fn remove(&mut self, good: usize) -> bool {
        match self.0.binary_search(&good) {
            Ok(at) => {
                self.0.remove(at);
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &Bundle) -> Bundle {
        self.iter().filter(|&g| !other.contains(g)).collect()
    }

    pub fn is_disjoint(&self, other: &Bundle) -> bool {
        self.iter().all(|g| !other.contains(g))
    }

    pub fn is_subset(&self, other: &Bundle) -> bool {
        self.iter().all(|g| other.contains(g))
    }

    pub fn extend(&mut self, goods: impl IntoIterator<Item = usize>) {
        self.0.extend(goods);
        self.0.sort_unstable();
        self.0.dedup();
    }
}

impl From<Vec<usize>> for Bundle {
    fn from(mut goods: Vec<usize>) -> Self {
        goods.sort_unstable();
        goods.dedup();
        Bundle(goods)
    }
}

impl From<Bundle> for Vec<usize> {
    fn from(b: Bundle) -> Self {
        b.0
    }
}

impl FromIterator<usize> for Bundle {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Bundle::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl<'a> IntoIterator for &'a Bundle {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "}}")
    }
}

/// One bundle per agent plus whatever was left unallocated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
    pub unallocated: Bundle,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation {
            bundles: vec![Bundle::new(); n],
            unallocated: Bundle::new(),
        }
    }

    /// Checks pairwise disjointness and that every good is below `m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        let mut seen = BTreeSet::new();
        for b in self.bundles.iter().chain(std::iter::once(&self.unallocated)) {
            for g in b {
                if g >= m {
                    return Err(Error::GoodOutOfRange { index: g, goods: m });
                }
                if !seen.insert(g) {
                    return Err(Error::OverlappingBundles(g));
                }
            }
        }
        Ok(())
    }

    /// Every good in `0..m` is either held by an agent or listed as unallocated.
    pub fn is_complete(&self, m: usize) -> bool {
        self.validate(m).is_ok()
            && self.bundles.iter().map(Bundle::len).sum::<usize>() + self.unallocated.len() == m
    }

    pub fn values(&self, inst: &Instance) -> Vec<u64> {
        self.bundles
            .iter()
            .enumerate()
            .map(|(i, b)| bundle_value(inst, i, b))
            .collect()
    }
}

/// Per agent, `maps[i][p]` is agent `i`'s `p`-th most valuable good.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingMaps(pub Vec<Vec<usize>>);

impl OrderingMaps {
    pub fn identity(n: usize, m: usize) -> Self {
        OrderingMaps(vec![(0..m).collect(); n])
    }

    pub fn agent(&self, agent: usize) -> &[usize] {
        &self.0[agent]
    }
}

/// Goods of `row` sorted by value descending, ties by ascending index.
pub fn descending_order(row: &[u64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..row.len()).collect();
    perm.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
    perm
}

/// The ordered instance: each agent values position `p` at its `p`-th largest value.
pub fn order_instance(inst: &Instance) -> (Instance, OrderingMaps) {
    let mut rows = Vec::with_capacity(inst.n());
    let mut maps = Vec::with_capacity(inst.n());
    for row in inst.values() {
        let perm = descending_order(row);
        rows.push(perm.iter().map(|&g| row[g]).collect());
        maps.push(perm);
    }
    let ordered = Instance {
        values: rows,
        m: inst.m(),
    };
    (ordered, OrderingMaps(maps))
}

/// Maps an allocation of the ordered instance back to original goods by a picking sequence.
///
/// Positions are processed as turns `0..m`; the agent holding position `p` takes its
/// most valuable remaining original good at turn `p`. Turns of unallocated positions
/// are skipped, and the goods nobody picked become the unallocated set.
pub fn unorder_allocation(alloc: &Allocation, maps: &OrderingMaps) -> Result<Allocation> {
    let n = alloc.bundles.len();
    if maps.0.len() != n {
        return Err(Error::InvalidParameter(format!(
            "ordering maps cover {} agents, allocation has {n}",
            maps.0.len()
        )));
    }
    let m = maps.0.first().map_or(0, Vec::len);
    alloc.validate(m)?;

    let mut owner = vec![None; m];
    for (agent, bundle) in alloc.bundles.iter().enumerate() {
        for p in bundle {
            owner[p] = Some(agent);
        }
    }

    let mut taken = vec![false; m];
    // Each agent walks its own preference list; the cursor only moves forward.
    let mut cursor = vec![0usize; n];
    let mut result = Allocation::empty(n);
    for agent in owner.into_iter().flatten() {
        let prefs = maps.agent(agent);
        while taken[prefs[cursor[agent]]] {
            cursor[agent] += 1;
        }
        let good = prefs[cursor[agent]];
        taken[good] = true;
        result.bundles[agent].insert(good);
    }
    result.unallocated = (0..m).filter(|&g| !taken[g]).collect();
    Ok(result)
}

/// Appends `count` goods that every agent values at zero.
pub fn pad_with_dummies(inst: &Instance, count: usize) -> Instance {
    let values = inst
        .values()
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.resize(row.len() + count, 0);
            r
        })
        .collect();
    Instance {
        values,
        m: inst.m() + count,
    }
}

/// Additive value `v_i(B)`.
pub fn bundle_value(inst: &Instance, agent: usize, bundle: &Bundle) -> u64 {
    row_value(inst.row(agent), bundle)
}

pub(crate) fn row_value(row: &[u64], bundle: &Bundle) -> u64 {
    bundle.iter().map(|g| row[g]).sum()
}
