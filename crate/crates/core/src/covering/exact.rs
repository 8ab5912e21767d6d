//! Exact bin covering by dynamic programming over subsets of goods.

use crate::error::{Error, Result};
use crate::instance::Bundle;

/// Largest instance [`cover_opt_exact`] accepts; the table has `2^m` entries and the
/// recurrence enumerates `3^m` subset pairs.
pub const EXACT_COVER_MAX_GOODS: usize = 16;

/// Maximum number of disjoint non-empty bundles each worth at least `t`.
pub fn cover_opt_exact(values: &[u64], t: u64) -> Result<usize> {
    Ok(cover_opt_witness(values, t)?.len())
}

/// An optimal cover as a list of bundles.
pub fn cover_opt_witness(values: &[u64], t: u64) -> Result<Vec<Bundle>> {
    let m = values.len();
    if m > EXACT_COVER_MAX_GOODS {
        return Err(Error::TooLarge {
            goods: m,
            cap: EXACT_COVER_MAX_GOODS,
        });
    }
    let full = (1usize << m) - 1;
    let mut sum = vec![0u64; full + 1];
    for s in 1..=full {
        let g = s.trailing_zeros() as usize;
        sum[s] = sum[s & (s - 1)] + values[g];
    }

    // best[s]: most bundles coverable from s. Either the lowest good of s is left
    // out, or it belongs to some bundle c ⊆ s.
    let mut best = vec![0u8; full + 1];
    let mut choice = vec![0usize; full + 1];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut b = best[rest];
        let mut pick = 0;
        let mut sub = rest;
        loop {
            let c = sub | low;
            if sum[c] >= t && best[s ^ c] + 1 > b {
                b = best[s ^ c] + 1;
                pick = c;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[s] = b;
        choice[s] = pick;
    }

    let mut bundles = Vec::new();
    let mut s = full;
    while s != 0 {
        match choice[s] {
            0 => s &= s - 1,
            c => {
                bundles.push((0..m).filter(|g| c >> g & 1 == 1).collect());
                s ^= c;
            }
        }
    }
    Ok(bundles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(cover_opt_exact(&[8, 7, 6, 5, 4], 15).unwrap(), 2);
        assert_eq!(cover_opt_exact(&[8, 7, 6, 5, 4], 0).unwrap(), 5);
        assert_eq!(cover_opt_exact(&[8, 7, 6, 5, 4], 31).unwrap(), 0);
        assert_eq!(cover_opt_exact(&[], 3).unwrap(), 0);
        assert_eq!(cover_opt_exact(&[1; 10], 2).unwrap(), 5);
    }

    #[test]
    fn witness_meets_threshold() {
        let v = [9, 7, 5, 5, 3, 2, 2, 1];
        let w = cover_opt_witness(&v, 10).unwrap();
        assert_eq!(w.len(), 3);
        for b in &w {
            assert!(b.iter().map(|g| v[g]).sum::<u64>() >= 10);
        }
    }

    #[test]
    fn too_large() {
        assert!(cover_opt_exact(&[1; 17], 1).is_err());
    }
}
