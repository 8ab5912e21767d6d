//! Bag-filling over an ordered instance.
//!
//! The remaining goods always form a contiguous interval `[lo, hi)` of positions. Each
//! bag starts with the leftmost remaining good. The bidirectional variant then adds
//! goods from the right end (cheapest first); the unidirectional one keeps taking from
//! the left. A bag goes to the lowest-index remaining agent that accepts it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Bundle, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillDirection {
    #[default]
    Bidirectional,
    Unidirectional,
}

/// Filled bags in the order they were closed, plus what was never put in a bag.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverResult {
    /// `(receiver, bag)`; receivers are agent indices, or clone indices in a simulation.
    pub filled: Vec<(usize, Bundle)>,
    pub leftover: Bundle,
}

impl CoverResult {
    pub fn count(&self) -> usize {
        self.filled.len()
    }

    /// The first `d` bags with everything else merged into the last one, or `None` if
    /// fewer than `d` bags were filled.
    pub fn partition(&self, d: usize) -> Option<Vec<Bundle>> {
        if d == 0 || self.filled.len() < d {
            return None;
        }
        let mut parts: Vec<Bundle> = self.filled[..d].iter().map(|(_, b)| b.clone()).collect();
        let last = parts.last_mut().expect("d > 0");
        for (_, b) in &self.filled[d..] {
            last.extend(b.iter());
        }
        last.extend(self.leftover.iter());
        Some(parts)
    }
}

struct Interval {
    lo: usize,
    hi: usize,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    fn next_fill(&mut self, dir: FillDirection) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        Some(match dir {
            FillDirection::Bidirectional => {
                self.hi -= 1;
                self.hi
            }
            FillDirection::Unidirectional => {
                self.lo += 1;
                self.lo - 1
            }
        })
    }

    fn goods(&self) -> impl Iterator<Item = usize> {
        self.lo..self.hi
    }
}

/// Bags for `n` clones of one descending valuation, all at threshold `t`; with
/// `n = None` bags are filled for as long as the remaining goods are worth `t`.
pub fn simulate(row: &[u64], t: u64, n: Option<usize>, dir: FillDirection) -> CoverResult {
    let mut rest = Interval { lo: 0, hi: row.len() };
    let mut remaining_value: u64 = row.iter().sum();
    let mut result = CoverResult::default();
    while n.is_none_or(|n| result.filled.len() < n) && !rest.is_empty() && remaining_value >= t {
        let seed = rest.lo;
        rest.lo += 1;
        let mut bag = Bundle::from(vec![seed]);
        let mut value = row[seed];
        while value < t {
            let g = rest.next_fill(dir).expect("remaining goods are worth t");
            bag.insert(g);
            value += row[g];
        }
        remaining_value -= value;
        result.filled.push((result.filled.len(), bag));
    }
    result.leftover = rest.goods().collect();
    result
}

pub(crate) type RoundObserver<'a> = dyn FnMut(usize, &Bundle, &[usize]) -> Result<()> + 'a;

/// Bag-filling on an ordered instance with per-agent integer thresholds.
pub fn bag_filling(inst: &Instance, thresholds: &[u64], dir: FillDirection) -> Result<CoverResult> {
    bag_filling_observed(inst, thresholds, dir, &mut |_, _, _| Ok(()))
}

pub fn bidirectional_bag_filling(inst: &Instance, thresholds: &[u64]) -> Result<CoverResult> {
    bag_filling(inst, thresholds, FillDirection::Bidirectional)
}

pub fn unidirectional_bag_filling(inst: &Instance, thresholds: &[u64]) -> Result<CoverResult> {
    bag_filling(inst, thresholds, FillDirection::Unidirectional)
}

/// As [`bag_filling`], calling `observe(round, consumed, remaining_agents)` before each
/// round.
pub(crate) fn bag_filling_observed(
    inst: &Instance,
    thresholds: &[u64],
    dir: FillDirection,
    observe: &mut RoundObserver,
) -> Result<CoverResult> {
    let n = inst.n();
    if thresholds.len() != n {
        return Err(Error::InvalidParameter(format!("{} thresholds for {n} agents", thresholds.len())));
    }
    if !inst.is_ordered() {
        return Err(Error::InvalidParameter("bag-filling needs an ordered instance".into()));
    }
    let m = inst.m();
    let mut rest = Interval { lo: 0, hi: m };
    let mut remaining_value: Vec<u64> = (0..n).map(|i| inst.total(i)).collect();
    let mut agents: Vec<usize> = (0..n).collect();
    let mut result = CoverResult::default();
    let mut consumed = Bundle::new();

    while !agents.is_empty() {
        observe(result.filled.len(), &consumed, &agents)?;
        if !agents.iter().any(|&i| remaining_value[i] >= thresholds[i]) {
            break;
        }
        if rest.is_empty() {
            // Only agents with threshold zero are left; they accept empty bags.
            let (zero, others): (Vec<usize>, Vec<usize>) = agents.iter().partition(|&&i| thresholds[i] == 0);
            result.filled.extend(zero.into_iter().map(|i| (i, Bundle::new())));
            agents = others;
            continue;
        }
        let seed = rest.lo;
        rest.lo += 1;
        let mut bag = Bundle::from(vec![seed]);
        let mut values: Vec<u64> = agents.iter().map(|&i| inst.value(i, seed)).collect();
        let winner = loop {
            if let Some(k) = agents.iter().zip(&values).position(|(&i, &v)| v >= thresholds[i]) {
                break k;
            }
            let g = rest
                .next_fill(dir)
                .expect("some agent values the remaining goods at its threshold");
            bag.insert(g);
            for (v, &i) in values.iter_mut().zip(&agents) {
                *v += inst.value(i, g);
            }
        };
        for &i in &agents {
            remaining_value[i] -= bag.iter().map(|g| inst.value(i, g)).sum::<u64>();
        }
        consumed.extend(bag.iter());
        result.filled.push((agents.remove(winner), bag));
    }
    result.leftover = rest.goods().collect();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Instance {
        Instance::new(vec![
            vec![10, 8, 6, 3, 2, 1],
            vec![12, 7, 6, 5, 4, 2],
            vec![9, 8, 7, 4, 3, 1],
        ])
        .unwrap()
    }

    fn b(goods: &[usize]) -> Bundle {
        Bundle::from(goods.to_vec())
    }

    #[test]
    fn circled_allocation() {
        let r = bidirectional_bag_filling(&example(), &[9, 11, 10]).unwrap();
        assert_eq!(r.filled, vec![(0, b(&[0])), (1, b(&[1, 4, 5])), (2, b(&[2, 3]))]);
        assert!(r.leftover.is_empty());
    }

    #[test]
    fn unidirectional_leaves_agent_three_unserved() {
        let r = unidirectional_bag_filling(&example(), &[9, 11, 10]).unwrap();
        assert_eq!(r.filled, vec![(0, b(&[0])), (1, b(&[1, 2]))]);
        assert_eq!(r.leftover, b(&[3, 4, 5]));
    }

    #[test]
    fn clone_simulations() {
        let row = [10, 8, 6, 3, 2, 1];
        let ok = simulate(&row, 9, Some(3), FillDirection::Bidirectional);
        assert_eq!(ok.filled.iter().map(|(_, b)| b.clone()).collect::<Vec<_>>(), vec![b(&[0]), b(&[1, 5]), b(&[2, 3, 4])]);
        assert_eq!(simulate(&row, 10, None, FillDirection::Bidirectional).count(), 2);
    }

    #[test]
    fn single_agent() {
        let inst = Instance::new(vec![vec![5, 3, 1]]).unwrap();
        let r = bidirectional_bag_filling(&inst, &[6]).unwrap();
        assert_eq!(r.filled, vec![(0, b(&[0, 2]))]);
        assert_eq!(r.leftover, b(&[1]));
    }

    #[test]
    fn zero_thresholds_get_empty_bags() {
        let inst = Instance::identical(3, vec![4]).unwrap();
        let r = bidirectional_bag_filling(&inst, &[0, 0, 0]).unwrap();
        assert_eq!(r.filled.len(), 3);
        assert_eq!(r.filled[0], (0, b(&[0])));
    }

    #[test]
    fn unordered_input_is_rejected() {
        let inst = Instance::new(vec![vec![1, 2]]).unwrap();
        assert!(bidirectional_bag_filling(&inst, &[1]).is_err());
    }
}
