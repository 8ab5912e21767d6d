//! Named instances from worked examples. Values are scaled by 1000 with ε = 1 so
//! every comparison stays in integers.

use serde::{Deserialize, Serialize};

use crate::instance::{Bundle, Instance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub instance: Instance,
}

pub const FIXTURE_NAMES: [&str; 4] = ["stranded-divider", "balanced-tightness", "heavy-thirty", "three-agents"];

fn repeat(parts: &[(u64, usize)]) -> Vec<u64> {
    parts.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect()
}

pub fn fixture(name: &str) -> Option<Fixture> {
    let (description, instance) = match name {
        "stranded-divider" => (
            "n = 4: five goods of 1-ε and five of ε; the unrestricted divider can strand the others",
            Instance::identical(4, repeat(&[(999, 5), (1, 5)])),
        ),
        "balanced-tightness" => (
            "n = 6, l = 2: eleven (1-ε, ε) pairs, one (1-12ε, 12ε) pair and one (1/2, 1/2) pair",
            Instance::identical(6, repeat(&[(999, 11), (988, 1), (500, 2), (12, 1), (1, 11)])),
        ),
        "heavy-thirty" => (
            "n = 20: thirty goods of 1-ε and one of 30ε",
            Instance::identical(20, repeat(&[(999, 30), (30, 1)])),
        ),
        "three-agents" => (
            "three agents, six goods; bidirectional shares 9, 11, 10",
            Instance::new(vec![
                vec![10, 8, 6, 3, 2, 1],
                vec![12, 7, 6, 5, 4, 2],
                vec![9, 8, 7, 4, 3, 1],
            ]),
        ),
        _ => return None,
    };
    let name = FIXTURE_NAMES.iter().find(|&&n| n == name).expect("listed");
    Some(Fixture {
        name,
        description,
        instance: instance.expect("fixture is a valid instance"),
    })
}

pub fn all_fixtures() -> Vec<Fixture> {
    FIXTURE_NAMES.iter().filter_map(|n| fixture(n)).collect()
}

/// The 2-balanced bundle the first divider takes in `balanced-tightness`: one 1-ε good, the
/// 1-12ε good and the eleven ε goods (positions of the ordered instance).
pub fn tightness_divider_bundle() -> Bundle {
    std::iter::once(0).chain(std::iter::once(11)).chain(15..26).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::cover_opt_exact;
    use crate::lone_divider::{is_l_balanced, BalancedGroups};
    use crate::mms::MmsSolver;

    #[test]
    fn fixtures_load() {
        for f in all_fixtures() {
            assert!(f.instance.is_ordered(), "{}", f.name);
        }
        assert_eq!(fixture("balanced-tightness").unwrap().instance.m(), 26);
        assert_eq!(fixture("heavy-thirty").unwrap().instance.total(0), 30_000);
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn tightness_counting() {
        let inst = fixture("balanced-tightness").unwrap().instance;
        let row = inst.row(1);
        let taken = tightness_divider_bundle();
        assert!(is_l_balanced(&taken, &BalancedGroups::new(6, 2)));
        let taken_value: u64 = taken.iter().map(|g| row[g]).sum();
        assert!(taken_value < 2000);
        let rest: Vec<u64> = (0..inst.m()).filter(|&g| !taken.contains(g)).map(|g| row[g]).collect();
        assert_eq!(rest.len(), 13);
        // any two remaining goods are worth less than 2000
        assert!(rest[0] + rest[1] < 2000);
        assert_eq!(cover_opt_exact(&rest, 2000).unwrap(), 4);
        // each pair is worth 1000, so the 2-out-of-13 share is 2000
        let w = MmsSolver::with_max_goods(26).solve(row, 2, 13).unwrap();
        assert_eq!(w.value, 2000);
    }
}
