//! Normalization of one agent's valuation against a witness partition.
//!
//! After scaling, the witness's ℓ least valuable parts sum to exactly ℓ. With `x` the
//! sum of its ℓ−1 least valuable parts, every other part is then trimmed down to
//! exactly ℓ−x by lowering the values of its goods, largest first. Bundles acceptable
//! under the trimmed valuation (value ≥ ℓ) are worth at least the witness value under
//! the original one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Bundle, Instance};
use crate::mms::MmsWitness;

pub fn rational(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledValuation {
    pub values: Vec<BigRational>,
    pub ell: usize,
    pub x: BigRational,
    pub witness: Vec<Bundle>,
}

impl ScaledValuation {
    /// Scales `row` so the witness's ℓ-smallest sum becomes ℓ, then trims every part to ℓ−x.
    pub fn from_witness(row: &[u64], ell: usize, witness: &MmsWitness) -> Result<Self> {
        check_partition(row.len(), &witness.partition, ell)?;
        if witness.value == 0 {
            return Err(Error::DegenerateValuation);
        }
        let factor = ratio(ell as u64, witness.value);
        let values: Vec<BigRational> = row.iter().map(|&v| rational(v) * &factor).collect();

        let mut part_values: Vec<BigRational> = witness
            .partition
            .iter()
            .map(|b| b.iter().map(|g| &values[g]).sum())
            .collect();
        part_values.sort();
        let x: BigRational = part_values.iter().take(ell - 1).sum();

        let mut sv = ScaledValuation {
            values,
            ell,
            x,
            witness: witness.partition.clone(),
        };
        let cap = sv.part_cap();
        sv.trim_parts_to(&cap);
        Ok(sv)
    }

    /// Scales `row` by `1/share` and trims every part of `partition` to exactly 1, so
    /// `x = ℓ−1`. Every part must be worth at least `share`.
    pub fn from_cover(row: &[u64], ell: usize, share: u64, partition: &[Bundle]) -> Result<Self> {
        check_partition(row.len(), partition, ell)?;
        if share == 0 {
            return Err(Error::DegenerateValuation);
        }
        if let Some(b) = partition
            .iter()
            .find(|b| b.iter().map(|g| row[g]).sum::<u64>() < share)
        {
            return Err(Error::InvalidParameter(format!(
                "cover part {b} is worth less than the share {share}"
            )));
        }
        let values = row.iter().map(|&v| ratio(v, share)).collect();
        let mut sv = ScaledValuation {
            values,
            ell,
            x: rational(ell as u64 - 1),
            witness: partition.to_vec(),
        };
        sv.trim_parts_to(&BigRational::one());
        Ok(sv)
    }

    fn trim_parts_to(&mut self, cap: &BigRational) {
        for part in &self.witness {
            let mut excess: BigRational = part.iter().map(|g| &self.values[g]).sum::<BigRational>() - cap;
            if excess <= BigRational::zero() {
                continue;
            }
            let mut goods: Vec<usize> = part.goods().to_vec();
            goods.sort_by(|&a, &b| self.values[b].cmp(&self.values[a]).then(a.cmp(&b)));
            for g in goods {
                if excess.is_zero() {
                    break;
                }
                let dec = if self.values[g] < excess {
                    self.values[g].clone()
                } else {
                    excess.clone()
                };
                self.values[g] -= &dec;
                excess -= dec;
            }
        }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn ell_rational(&self) -> BigRational {
        rational(self.ell as u64)
    }

    /// ℓ − x, the value of every trimmed witness part.
    pub fn part_cap(&self) -> BigRational {
        self.ell_rational() - &self.x
    }

    pub fn value(&self, bundle: &Bundle) -> BigRational {
        bundle.iter().map(|g| &self.values[g]).sum()
    }

    pub fn total(&self) -> BigRational {
        self.values.iter().sum()
    }

    pub fn part_values(&self) -> Vec<BigRational> {
        self.witness.iter().map(|b| self.value(b)).collect()
    }

    /// `v(B) − ℓ`.
    pub fn waste(&self, bundle: &Bundle) -> BigRational {
        self.value(bundle) - self.ell_rational()
    }

    /// Lower bound on the total value when the witness has `d = ⌊(ℓ+½)n⌋` parts:
    /// `nℓ + (n−1)ℓ(ℓ−1−x) + (n−1)(ℓ−x)/2`.
    pub fn total_value_bound(&self, n: usize) -> BigRational {
        let l = self.ell_rational();
        let n1 = rational(n as u64 - 1);
        rational(n as u64) * &l
            + &n1 * &l * (&l - BigRational::one() - &self.x)
            + n1 * self.part_cap() / rational(2)
    }

    /// The same valuation with goods relabelled in descending value (ties by index).
    /// Returns the relabelled valuation and `perm`, where new good `p` is old good `perm[p]`.
    pub fn sorted(&self) -> (ScaledValuation, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.m()).collect();
        perm.sort_by(|&a, &b| self.values[b].cmp(&self.values[a]).then(a.cmp(&b)));
        let mut position = vec![0; self.m()];
        for (p, &g) in perm.iter().enumerate() {
            position[g] = p;
        }
        let sv = ScaledValuation {
            values: perm.iter().map(|&g| self.values[g].clone()).collect(),
            ell: self.ell,
            x: self.x.clone(),
            witness: self
                .witness
                .iter()
                .map(|b| b.iter().map(|g| position[g]).collect())
                .collect(),
        };
        (sv, perm)
    }
}

fn check_partition(m: usize, partition: &[Bundle], ell: usize) -> Result<()> {
    if ell == 0 || partition.len() < ell {
        return Err(Error::InvalidParameter(format!(
            "a partition into {} parts cannot serve ell = {ell}",
            partition.len()
        )));
    }
    let mut seen = vec![false; m];
    for b in partition {
        for g in b {
            if g >= m {
                return Err(Error::GoodOutOfRange { index: g, goods: m });
            }
            if std::mem::replace(&mut seen[g], true) {
                return Err(Error::OverlappingBundles(g));
            }
        }
    }
    if let Some(g) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidParameter(format!(
            "witness partition misses good {g}"
        )));
    }
    Ok(())
}

/// Normalizes agent `agent`'s valuation with the given `d`-part witness.
pub fn scale_to_mms(
    inst: &Instance,
    agent: usize,
    ell: usize,
    d: usize,
    witness: &MmsWitness,
) -> Result<ScaledValuation> {
    inst.check_agent(agent)?;
    if witness.partition.len() != d {
        return Err(Error::InvalidParameter(format!(
            "witness has {} parts, expected d = {d}",
            witness.partition.len()
        )));
    }
    ScaledValuation::from_witness(inst.row(agent), ell, witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::MmsSolver;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    fn singletons(m: usize) -> Vec<Bundle> {
        (0..m).map(|g| Bundle::from(vec![g])).collect()
    }

    #[test]
    fn seventeen_unit_goods() {
        // n = 5, l = 3, d = 17
        let row = vec![1u64; 17];
        let w = MmsSolver::with_max_goods(17).solve(&row, 3, 17).unwrap();
        assert_eq!(w.value, 3);
        let sv = ScaledValuation::from_witness(&row, 3, &w).unwrap();
        assert_eq!(sv.x, q(2, 1));
        assert!(sv.part_values().iter().all(|v| *v == q(1, 1)));
        assert_eq!(sv.total(), q(17, 1));
        assert_eq!(sv.total_value_bound(5), q(17, 1));
    }

    #[test]
    fn sixteen_large_goods_and_one_small() {
        let mut row = vec![12u64; 16];
        row.push(6);
        let w = MmsWitness::from_partition(&row, 3, singletons(17));
        assert_eq!(w.value, 30);
        let sv = ScaledValuation::from_witness(&row, 3, &w).unwrap();
        assert_eq!(sv.x, q(9, 5));
        assert_eq!(sv.part_cap(), q(6, 5));
        assert_eq!(sv.total(), q(99, 5));
        assert_eq!(sv.total_value_bound(5), q(99, 5));
    }

    #[test]
    fn single_part() {
        let row = [5u64, 2];
        let w = MmsWitness::from_partition(&row, 1, vec![Bundle::full(2)]);
        let sv = ScaledValuation::from_witness(&row, 1, &w).unwrap();
        assert_eq!(sv.total(), q(1, 1));
        assert_eq!(sv.x, q(0, 1));
    }

    #[test]
    fn trimming_lowers_the_largest_goods_first() {
        // parts {0,1} = 9 and {2} = 3, l = 1: scale by 1/3, cap 1
        let row = [6u64, 3, 3];
        let w = MmsWitness::from_partition(&row, 1, vec![Bundle::from(vec![0, 1]), Bundle::from(vec![2])]);
        let sv = ScaledValuation::from_witness(&row, 1, &w).unwrap();
        assert_eq!(sv.values, vec![q(0, 1), q(1, 1), q(1, 1)]);
    }

    #[test]
    fn all_zero_rows_are_degenerate() {
        let row = [0u64; 4];
        let w = MmsSolver::default().solve(&row, 1, 2).unwrap();
        assert_eq!(
            ScaledValuation::from_witness(&row, 1, &w),
            Err(Error::DegenerateValuation)
        );
    }

    #[test]
    fn cover_scaling_makes_every_part_one() {
        let row = [5u64, 4, 3, 3, 1];
        let parts = vec![
            Bundle::from(vec![0]),
            Bundle::from(vec![1]),
            Bundle::from(vec![2, 3, 4]),
        ];
        let sv = ScaledValuation::from_cover(&row, 2, 4, &parts).unwrap();
        assert!(sv.part_values().iter().all(|v| *v == q(1, 1)));
        assert_eq!(sv.x, q(1, 1));
        assert!(ScaledValuation::from_cover(&row, 2, 5, &parts).is_err());
    }

    #[test]
    fn sorted_relabels_witness() {
        let row = [1u64, 5, 3];
        let w = MmsWitness::from_partition(&row, 1, vec![Bundle::from(vec![0, 1]), Bundle::from(vec![2])]);
        let sv = ScaledValuation::from_witness(&row, 1, &w).unwrap();
        let (sorted, perm) = sv.sorted();
        // trimmed values are (1/3, 2/3, 1)
        assert_eq!(perm, vec![2, 1, 0]);
        assert!(sorted.values.windows(2).all(|p| p[0] >= p[1]));
        assert_eq!(sorted.witness, vec![Bundle::from(vec![1, 2]), Bundle::from(vec![0])]);
        assert_eq!(sorted.part_values(), sv.part_values());
    }
}
