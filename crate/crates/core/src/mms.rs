//! Maximin shares: the exact ℓ-out-of-d solver, bracketing bounds, the greedy
//! number-partitioning lower bound, and the proportional share.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{descending_order, row_value, Bundle, Instance};

/// Default cap on the number of positively valued goods the exact solver accepts.
pub const DEFAULT_MAX_GOODS: usize = 14;

/// A `d`-partition together with the sum of its `ℓ` least valuable parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmsWitness {
    pub value: u64,
    pub partition: Vec<Bundle>,
}

impl MmsWitness {
    /// Builds a witness for `partition`, computing its ℓ-smallest sum under `row`.
    pub fn from_partition(row: &[u64], ell: usize, partition: Vec<Bundle>) -> Self {
        let values: Vec<u64> = partition.iter().map(|b| row_value(row, b)).collect();
        MmsWitness {
            value: ell_smallest_sum(&values, ell),
            partition,
        }
    }

    /// Part values under `row`.
    pub fn part_values(&self, row: &[u64]) -> Vec<u64> {
        self.partition.iter().map(|b| row_value(row, b)).collect()
    }
}

/// Sum of the `ell` smallest entries (all of them when `ell >= values.len()`).
pub fn ell_smallest_sum(values: &[u64], ell: usize) -> u64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.iter().take(ell).sum()
}

fn check_params(ell: usize, d: usize) -> Result<()> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be at least 1".into()));
    }
    if d < ell {
        return Err(Error::InvalidParameter(format!(
            "d = {d} must be at least ell = {ell}"
        )));
    }
    Ok(())
}

/// Exact ℓ-out-of-d maximin share by branch and bound.
#[derive(Debug, Clone, Copy)]
pub struct MmsSolver {
    pub max_goods: usize,
}

impl Default for MmsSolver {
    fn default() -> Self {
        MmsSolver {
            max_goods: DEFAULT_MAX_GOODS,
        }
    }
}

impl MmsSolver {
    pub fn with_max_goods(max_goods: usize) -> Self {
        MmsSolver { max_goods }
    }

    /// `MMS^{ℓ,d}` of `row` and a partition attaining it.
    ///
    /// Goods of value zero never change a part's value, so they are left out of the
    /// search (and out of the size cap) and dropped into the first part afterwards.
    pub fn solve(&self, row: &[u64], ell: usize, d: usize) -> Result<MmsWitness> {
        check_params(ell, d)?;
        let order: Vec<usize> = descending_order(row)
            .into_iter()
            .filter(|&g| row[g] > 0)
            .collect();
        if order.len() > self.max_goods {
            return Err(Error::TooLarge {
                goods: order.len(),
                cap: self.max_goods,
            });
        }
        let vals: Vec<u64> = order.iter().map(|&g| row[g]).collect();
        let total: u64 = vals.iter().sum();

        // Incumbent from greedy number partitioning.
        let mut greedy_parts = vec![0u64; d];
        let mut greedy_assign = Vec::with_capacity(vals.len());
        for &v in &vals {
            let j = lightest(&greedy_parts);
            greedy_parts[j] += v;
            greedy_assign.push(j);
        }

        let mut search = Search {
            vals: &vals,
            suffix: suffix_sums(&vals),
            ell,
            cap: ((ell as u128 * total as u128) / d as u128) as u64,
            parts: vec![0; d],
            assign: vec![0; vals.len()],
            best: ell_smallest_sum(&greedy_parts, ell),
            best_assign: greedy_assign,
            seen: HashSet::new(),
        };
        if search.best < search.cap {
            search.dfs(0);
        }

        let mut partition = vec![Bundle::new(); d];
        for (i, &part) in search.best_assign.iter().enumerate() {
            partition[part].insert(order[i]);
        }
        for g in (0..row.len()).filter(|&g| row[g] == 0) {
            partition[0].insert(g);
        }
        Ok(MmsWitness {
            value: search.best,
            partition,
        })
    }
}

fn lightest(parts: &[u64]) -> usize {
    let mut best = 0;
    for (j, &p) in parts.iter().enumerate() {
        if p < parts[best] {
            best = j;
        }
    }
    best
}

fn suffix_sums(vals: &[u64]) -> Vec<u64> {
    let mut s = vec![0; vals.len() + 1];
    for i in (0..vals.len()).rev() {
        s[i] = s[i + 1] + vals[i];
    }
    s
}

struct Search<'a> {
    vals: &'a [u64],
    suffix: Vec<u64>,
    ell: usize,
    // floor(ℓ·v(M)/d), an upper bound on any ℓ-smallest sum
    cap: u64,
    parts: Vec<u64>,
    assign: Vec<usize>,
    best: u64,
    best_assign: Vec<usize>,
    seen: HashSet<(usize, Vec<u64>)>,
}

impl Search<'_> {
    fn dfs(&mut self, i: usize) {
        let current = ell_smallest_sum(&self.parts, self.ell);
        if i == self.vals.len() {
            if current > self.best {
                self.best = current;
                self.best_assign.clone_from(&self.assign);
            }
            return;
        }
        // The parts that are now the ℓ smallest can gain at most what is left.
        if self.cap.min(current + self.suffix[i]) <= self.best {
            return;
        }
        let mut key = self.parts.clone();
        key.sort_unstable();
        if !self.seen.insert((i, key)) {
            return;
        }

        let mut idx: Vec<usize> = (0..self.parts.len()).collect();
        idx.sort_by_key(|&j| (self.parts[j], j));
        let mut last = None;
        for j in idx {
            // Parts of equal value are interchangeable.
            if last == Some(self.parts[j]) {
                continue;
            }
            last = Some(self.parts[j]);
            self.parts[j] += self.vals[i];
            self.assign[i] = j;
            self.dfs(i + 1);
            self.parts[j] -= self.vals[i];
            if self.best >= self.cap {
                return;
            }
        }
    }
}

/// `MMS_i^{ℓ,d}(M)` with the default size cap.
pub fn mms_exact(inst: &Instance, agent: usize, ell: usize, d: usize) -> Result<MmsWitness> {
    inst.check_agent(agent)?;
    MmsSolver::default().solve(inst.row(agent), ell, d)
}

/// `(ℓ·MMS^{1,d}, ℓ·MMS^{1,d-ℓ+1})`, which bracket `MMS^{ℓ,d}`.
pub fn mms_bounds(inst: &Instance, agent: usize, ell: usize, d: usize) -> Result<(u64, u64)> {
    inst.check_agent(agent)?;
    row_mms_bounds(inst.row(agent), ell, d, &MmsSolver::default())
}

pub fn row_mms_bounds(row: &[u64], ell: usize, d: usize, solver: &MmsSolver) -> Result<(u64, u64)> {
    check_params(ell, d)?;
    let k = ell as u64;
    let lower = k * solver.solve(row, 1, d)?.value;
    let upper = k * solver.solve(row, 1, d - ell + 1)?.value;
    Ok((lower, upper))
}

/// Greedy number partitioning: goods in descending value, each into the currently
/// lightest of `d` parts (ties to the lowest part index). The ℓ-smallest sum of the
/// result is a lower bound on `MMS^{ℓ,d}`.
pub fn greedy_lower_bound(inst: &Instance, agent: usize, ell: usize, d: usize) -> Result<MmsWitness> {
    inst.check_agent(agent)?;
    row_greedy_lower_bound(inst.row(agent), ell, d)
}

pub fn row_greedy_lower_bound(row: &[u64], ell: usize, d: usize) -> Result<MmsWitness> {
    if d == 0 || ell == 0 {
        return Err(Error::InvalidParameter("ell and d must be positive".into()));
    }
    let mut sums = vec![0u64; d];
    let mut partition = vec![Bundle::new(); d];
    for g in descending_order(row) {
        let j = lightest(&sums);
        sums[j] += row[g];
        partition[j].insert(g);
    }
    Ok(MmsWitness {
        value: ell_smallest_sum(&sums, ell),
        partition,
    })
}

/// `v_i(M)/n`.
pub fn proportional_share(inst: &Instance, agent: usize) -> BigRational {
    BigRational::new(BigInt::from(inst.total(agent)), BigInt::from(inst.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Every assignment of goods to `d` labelled parts.
    fn brute_force(row: &[u64], ell: usize, d: usize) -> u64 {
        let m = row.len();
        let mut best = 0;
        let total = (d as u64).pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let mut parts = vec![0; d];
            for &v in row {
                parts[(c % d as u64) as usize] += v;
                c /= d as u64;
            }
            best = best.max(ell_smallest_sum(&parts, ell));
        }
        best
    }

    fn check_witness(row: &[u64], ell: usize, d: usize, w: &MmsWitness) {
        assert_eq!(w.partition.len(), d);
        let mut all: Vec<usize> = w.partition.iter().flat_map(|b| b.iter()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..row.len()).collect::<Vec<_>>());
        assert_eq!(ell_smallest_sum(&w.part_values(row), ell), w.value);
    }

    #[test]
    fn two_out_of_four_exceeds_twice_one_out_of_four() {
        let row = [10, 10, 10, 5];
        let w = MmsSolver::default().solve(&row, 2, 4).unwrap();
        assert_eq!(w.value, 15);
        check_witness(&row, 2, 4, &w);
        assert_eq!(2 * MmsSolver::default().solve(&row, 1, 4).unwrap().value, 10);
    }

    #[test]
    fn single_part_is_everything() {
        let row = [4, 0, 7, 1];
        assert_eq!(MmsSolver::default().solve(&row, 1, 1).unwrap().value, 12);
    }

    #[test]
    fn matches_enumeration_of_three_colourings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let row: Vec<u64> = (0..8).map(|_| rng.random_range(0..=30)).collect();
        let w = MmsSolver::default().solve(&row, 1, 3).unwrap();
        assert_eq!(w.value, brute_force(&row, 1, 3));
        check_witness(&row, 1, 3, &w);
    }

    #[test]
    fn matches_enumeration_on_random_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let m = rng.random_range(0..=7);
            let d = rng.random_range(1..=4);
            let ell = rng.random_range(1..=d);
            let row: Vec<u64> = (0..m).map(|_| rng.random_range(0..=12)).collect();
            let w = MmsSolver::default().solve(&row, ell, d).unwrap();
            assert_eq!(w.value, brute_force(&row, ell, d), "{row:?} l={ell} d={d}");
            check_witness(&row, ell, d, &w);
        }
    }

    #[test]
    fn size_cap_counts_positive_goods() {
        let solver = MmsSolver::with_max_goods(3);
        assert!(matches!(
            solver.solve(&[1, 1, 1, 1], 1, 2),
            Err(Error::TooLarge { goods: 4, cap: 3 })
        ));
        assert!(solver.solve(&[1, 1, 1, 0, 0], 1, 2).is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MmsSolver::default().solve(&[1], 0, 1).is_err());
        assert!(MmsSolver::default().solve(&[1], 3, 2).is_err());
    }

    #[test]
    fn bounds_bracket_the_share() {
        let inst = Instance::new(vec![vec![10, 10, 10, 5]]).unwrap();
        assert_eq!(mms_bounds(&inst, 0, 2, 4).unwrap(), (10, 20));
        let (lo, hi) = mms_bounds(&inst, 0, 1, 3).unwrap();
        assert_eq!(lo, hi);
        let inst = Instance::new(vec![vec![6; 5]]).unwrap();
        assert_eq!(mms_bounds(&inst, 0, 2, 5).unwrap(), (12, 12));
    }

    #[test]
    fn greedy_partitioning() {
        let inst = Instance::new(vec![vec![8, 7, 6, 5, 4]]).unwrap();
        let w = greedy_lower_bound(&inst, 0, 1, 2).unwrap();
        assert_eq!(w.value, 13);
        assert_eq!(w.partition, vec![Bundle::from(vec![0, 3, 4]), Bundle::from(vec![1, 2])]);
        assert_eq!(mms_exact(&inst, 0, 1, 2).unwrap().value, 15);

        let inst = Instance::new(vec![vec![5, 5]]).unwrap();
        assert_eq!(greedy_lower_bound(&inst, 0, 1, 3).unwrap().value, 0);
        let inst = Instance::new(vec![vec![9; 4]]).unwrap();
        assert_eq!(greedy_lower_bound(&inst, 0, 1, 4).unwrap().value, 9);
    }

    #[test]
    fn proportional_shares() {
        let inst = Instance::new(vec![vec![10, 8, 6, 3, 2, 1], vec![0; 6], vec![1; 6]]).unwrap();
        assert_eq!(proportional_share(&inst, 0), BigRational::from_integer(10.into()));
        assert_eq!(proportional_share(&inst, 1), BigRational::from_integer(0.into()));
        let single = Instance::new(vec![vec![3, 4]]).unwrap();
        assert_eq!(proportional_share(&single, 0), BigRational::from_integer(7.into()));
    }
}
