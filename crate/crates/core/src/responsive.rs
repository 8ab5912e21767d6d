//! Two agents with responsive valuations for whom no allocation gives both their
//! 1-out-of-d maximin share.
//!
//! There are `m = 2^{d²} − 1` goods ranked `g_1 > g_2 > …` (indices `0, 1, …`). The
//! family `B_j` holds the bundles containing a strict majority of the first `2^j − 1`
//! goods. Agent 1 values a bundle at 1 when, for some `i`, it lies in every
//! `B_{(i−1)d+j}`; agent 2 when, for some `i`, it lies in every `B_{(j−1)d+i}`. All
//! other bundles are worth 0. Each agent can split the goods into `d` bundles of value
//! 1, yet any two disjoint bundles fail one of the agents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Bundle;

/// Largest `d` for which the construction's good count fits comfortably in memory.
pub const MAX_CONSTRUCTION_D: usize = 5;
/// Largest `d` for which every bipartition is enumerated.
pub const MAX_VERIFY_D: usize = 2;

/// Whether `x ≾ y`: some injection maps every good of `x` to a distinct good of `y`
/// ranked at least as high. `ranking` lists goods best first.
///
/// # Panics
/// If a good of `x` or `y` is missing from `ranking`.
pub fn dominates(ranking: &[usize], x: &Bundle, y: &Bundle) -> bool {
    if x.len() > y.len() {
        return false;
    }
    let size = ranking.iter().max().map_or(0, |&g| g + 1);
    let mut rank = vec![usize::MAX; size];
    for (r, &g) in ranking.iter().enumerate() {
        rank[g] = r;
    }
    let ranks = |b: &Bundle| -> Vec<usize> {
        let mut r: Vec<usize> = b
            .iter()
            .map(|g| {
                let r = rank.get(g).copied().unwrap_or(usize::MAX);
                assert!(r != usize::MAX, "good {g} is not ranked");
                r
            })
            .collect();
        r.sort_unstable();
        r
    };
    let (rx, ry) = (ranks(x), ranks(y));
    rx.iter().zip(&ry).all(|(a, b)| b <= a)
}

/// `B_j`: bundles holding a strict majority of the first `2^j − 1` goods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityFamily {
    pub j: usize,
}

impl MajorityFamily {
    pub fn new(j: usize) -> Self {
        assert!((1..64).contains(&j), "family index {j} out of range");
        MajorityFamily { j }
    }

    pub fn prefix_len(&self) -> usize {
        (1usize << self.j) - 1
    }

    pub fn contains(&self, b: &Bundle) -> bool {
        b.iter().filter(|&g| g < self.prefix_len()).count() > self.prefix_len() / 2
    }

    /// `G_j = {g_{2^{j−1}}, …, g_{2^j − 1}}`, which lies in `B_j`; the blocks partition
    /// the goods.
    pub fn block(&self) -> Bundle {
        ((1usize << (self.j - 1)) - 1..self.prefix_len()).collect()
    }

    fn mask_contains(&self, mask: u64) -> bool {
        (mask & ((1u64 << self.prefix_len()) - 1)).count_ones() as usize > self.prefix_len() / 2
    }
}

fn check_d(d: usize, cap: usize) -> Result<usize> {
    if d == 0 || d > cap {
        return Err(Error::InvalidParameter(format!("d = {d} must lie in 1..={cap}")));
    }
    Ok((1usize << (d * d)) - 1)
}

/// Number of goods in the construction for `d`.
pub fn counterexample_goods(d: usize) -> Result<usize> {
    check_d(d, MAX_CONSTRUCTION_D)
}

/// Family indices (1-based) agent `agent` needs for option `i` (1-based).
fn families(d: usize, agent: u8, i: usize) -> impl Iterator<Item = MajorityFamily> {
    (1..=d).map(move |j| {
        MajorityFamily::new(match agent {
            1 => (i - 1) * d + j,
            _ => (j - 1) * d + i,
        })
    })
}

fn check_agent(agent: u8) -> Result<()> {
    if agent != 1 && agent != 2 {
        return Err(Error::AgentOutOfRange {
            agent: agent as usize,
            agents: 2,
        });
    }
    Ok(())
}

/// Agent `agent` (1 or 2) values `b` at 1 or 0.
pub fn counterexample_value(d: usize, agent: u8, b: &Bundle) -> Result<u8> {
    let m = counterexample_goods(d)?;
    check_agent(agent)?;
    if let Some(g) = b.iter().find(|&g| g >= m) {
        return Err(Error::GoodOutOfRange { index: g, goods: m });
    }
    let accepted = (1..=d).any(|i| families(d, agent, i).all(|f| f.contains(b)));
    Ok(u8::from(accepted))
}

fn mask_value(d: usize, agent: u8, mask: u64) -> bool {
    (1..=d).any(|i| families(d, agent, i).all(|f| f.mask_contains(mask)))
}

/// The partitions `P` (agent 1) and `Q` (agent 2) into `d` bundles of value 1.
pub fn witness_partitions(d: usize) -> Result<(Vec<Bundle>, Vec<Bundle>)> {
    counterexample_goods(d)?;
    let build = |agent: u8| -> Vec<Bundle> {
        (1..=d)
            .map(|i| families(d, agent, i).fold(Bundle::new(), |acc, f| acc.union(&f.block())))
            .collect()
    };
    Ok((build(1), build(2)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub d: usize,
    pub goods: usize,
    pub bipartitions: u64,
    /// Both witness partitions cover the goods with bundles of value 1.
    pub witnesses_hold: bool,
    /// Bipartitions `(A_1, A_2)` giving both agents value 1.
    pub fair_bipartitions: u64,
}

impl Verification {
    pub fn verified(&self) -> bool {
        self.witnesses_hold && self.fair_bipartitions == 0
    }
}

/// Exhaustively checks the construction for `d ≤ 2`.
pub fn verify_counterexample(d: usize) -> Result<bool> {
    verify_counterexample_report(d).map(|v| v.verified())
}

pub fn verify_counterexample_report(d: usize) -> Result<Verification> {
    let m = check_d(d, MAX_VERIFY_D)?;
    let (p, q) = witness_partitions(d)?;
    let covers = |parts: &[Bundle]| {
        let mut all = Bundle::new();
        for b in parts {
            if !all.is_disjoint(b) {
                return false;
            }
            all = all.union(b);
        }
        all == Bundle::full(m)
    };
    let all_one = |agent: u8, parts: &[Bundle]| {
        parts
            .iter()
            .all(|b| counterexample_value(d, agent, b).is_ok_and(|v| v == 1))
    };
    let witnesses_hold = covers(&p) && covers(&q) && all_one(1, &p) && all_one(2, &q);

    let full = (1u64 << m) - 1;
    let fair = (0..=full)
        .filter(|&a1| mask_value(d, 1, a1) && mask_value(d, 2, full ^ a1))
        .count() as u64;
    Ok(Verification {
        d,
        goods: m,
        bipartitions: full + 1,
        witnesses_hold,
        fair_bipartitions: fair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(goods: &[usize]) -> Bundle {
        Bundle::from(goods.to_vec())
    }

    #[test]
    fn domination_examples() {
        let order: Vec<usize> = (0..4).collect();
        assert!(dominates(&order, &b(&[2]), &b(&[0])));
        assert!(!dominates(&order, &b(&[0]), &b(&[2])));
        // w < x < y < z as goods 3, 2, 1, 0
        assert!(!dominates(&order, &b(&[0]), &b(&[1, 2])));
        assert!(!dominates(&order, &b(&[1, 2]), &b(&[0])));
        assert!(dominates(&order, &b(&[1, 3]), &b(&[0, 1, 3])));
    }

    #[test]
    fn construction_bundles() {
        assert_eq!(counterexample_value(2, 1, &b(&[0, 1, 2])).unwrap(), 1);
        assert_eq!(counterexample_value(2, 2, &b(&[0, 3, 4, 5, 6])).unwrap(), 1);
        assert_eq!(counterexample_value(2, 1, &Bundle::new()).unwrap(), 0);
        assert_eq!(counterexample_value(2, 2, &Bundle::new()).unwrap(), 0);
        assert!(counterexample_value(2, 1, &b(&[15])).is_err());
        assert!(counterexample_value(2, 3, &b(&[0])).is_err());
    }

    #[test]
    fn witnesses() {
        let (p, q) = witness_partitions(2).unwrap();
        assert_eq!(p[0], b(&[0, 1, 2]));
        assert_eq!(q[0], b(&[0, 3, 4, 5, 6]));
        assert_eq!(p[1].len(), 12);
    }

    #[test]
    fn blocks_partition_goods() {
        let mut all = Bundle::new();
        for j in 1..=4 {
            let f = MajorityFamily::new(j);
            let g = f.block();
            assert!(f.contains(&g));
            assert!(all.is_disjoint(&g));
            all = all.union(&g);
        }
        assert_eq!(all, Bundle::full(15));
    }

    #[test]
    fn small_d_verified() {
        assert!(verify_counterexample(1).unwrap());
        let v = verify_counterexample_report(2).unwrap();
        assert_eq!(v.bipartitions, 32768);
        assert!(v.verified());
        assert!(verify_counterexample(3).is_err());
    }
}
