use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported party count; subsets are enumerated as bitmasks.
pub const MAX_PARTIES: usize = 16;

/// A set of parties, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u32);

impl Coalition {
    pub fn from_parties(parties: &[usize], p: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &j in parties {
            if j == 0 || j > p {
                return Err(Error::Domain(format!("party {j} outside 1..={p}")));
            }
            mask |= 1 << (j - 1);
        }
        Ok(Self(mask))
    }

    pub fn parties(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b as usize + 1).collect()
    }

    pub fn contains(self, party: usize) -> bool {
        (1..=32).contains(&party) && self.0 >> (party - 1) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.parties().iter().map(|j| j.to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Wire format: the party count and a list of (minimal) authorized sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessStructureJson {
    pub p: usize,
    pub authorized: Vec<Vec<usize>>,
}

/// Family of authorized coalitions.
///
/// Invariants: monotone, non-empty, and no authorized set has an authorized complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessStructure {
    parties: usize,
    authorized: BTreeSet<Coalition>,
}

impl AccessStructure {
    /// The monotone closure of `generators`.
    pub fn generated(p: usize, generators: &[Vec<usize>]) -> Result<Self> {
        check_party_count(p)?;
        let gens = generators
            .iter()
            .map(|g| Coalition::from_parties(g, p))
            .collect::<Result<Vec<_>>>()?;
        let authorized = all_coalitions(p)
            .filter(|s| gens.iter().any(|g| g.is_subset_of(*s)))
            .collect();
        Self::validated(p, authorized)
    }

    /// An explicitly listed family; it must already be monotone.
    pub fn explicit(p: usize, sets: &[Vec<usize>]) -> Result<Self> {
        check_party_count(p)?;
        let authorized: BTreeSet<Coalition> = sets
            .iter()
            .map(|s| Coalition::from_parties(s, p))
            .collect::<Result<_>>()?;
        let full = full_mask(p);
        for s in &authorized {
            for j in 0..p {
                let sup = Coalition(s.0 | 1 << j);
                if sup.0 & !full == 0 && !authorized.contains(&sup) {
                    return Err(Error::Domain(format!(
                        "not monotone: {s} is authorized but its superset {sup} is not"
                    )));
                }
            }
        }
        Self::validated(p, authorized)
    }

    /// Every coalition of at least `t` out of `p` parties.
    pub fn threshold(p: usize, t: usize) -> Result<Self> {
        check_party_count(p)?;
        let authorized = all_coalitions(p).filter(|s| s.len() >= t).collect();
        Self::validated(p, authorized)
    }

    fn validated(p: usize, authorized: BTreeSet<Coalition>) -> Result<Self> {
        if authorized.is_empty() {
            return Err(Error::Domain("no authorized set".into()));
        }
        let full = full_mask(p);
        for s in &authorized {
            let complement = Coalition(full & !s.0);
            if authorized.contains(&complement) {
                return Err(Error::Domain(format!(
                    "{s} and its complement {complement} are both authorized, which would clone the secret"
                )));
            }
        }
        Ok(Self { parties: p, authorized })
    }

    pub fn from_json(json: &AccessStructureJson) -> Result<Self> {
        Self::generated(json.p, &json.authorized)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    /// The minimal generators in canonical order.
    pub fn to_json(&self) -> AccessStructureJson {
        AccessStructureJson {
            p: self.parties,
            authorized: self.minimal_sets().into_iter().map(Coalition::parties).collect(),
        }
    }

    pub fn party_count(&self) -> usize {
        self.parties
    }

    pub fn is_authorized(&self, parties: &[usize]) -> Result<bool> {
        Ok(self.authorized.contains(&Coalition::from_parties(parties, self.parties)?))
    }

    /// Authorized sets none of whose proper subsets is authorized.
    pub fn minimal_sets(&self) -> Vec<Coalition> {
        let mut out: Vec<Coalition> = self
            .authorized
            .iter()
            .copied()
            .filter(|s| s.parties().iter().all(|&j| !self.authorized.contains(&Coalition(s.0 & !(1 << (j - 1))))))
            .collect();
        out.sort_by_key(|s| (s.len(), s.parties()));
        out
    }

    /// Unauthorized sets that become authorized when any party joins.
    pub fn maximal_unauthorized(&self) -> Vec<Coalition> {
        let full = full_mask(self.parties);
        let mut out: Vec<Coalition> = all_coalitions(self.parties)
            .filter(|s| !self.authorized.contains(s))
            .filter(|s| (0..self.parties).all(|j| s.0 >> j & 1 == 1 || self.authorized.contains(&Coalition((s.0 | 1 << j) & full))))
            .collect();
        out.sort_by_key(|s| (s.len(), s.parties()));
        out
    }

    pub fn authorized_sets(&self) -> impl Iterator<Item = Coalition> + '_ {
        self.authorized.iter().copied()
    }
}

fn check_party_count(p: usize) -> Result<()> {
    if p == 0 || p > MAX_PARTIES {
        return Err(Error::Domain(format!("party count {p} outside 1..={MAX_PARTIES}")));
    }
    Ok(())
}

fn full_mask(p: usize) -> u32 {
    ((1u64 << p) - 1) as u32
}

fn all_coalitions(p: usize) -> impl Iterator<Item = Coalition> {
    (0..=full_mask(p)).map(Coalition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_of_five_closure() {
        let json = r#"{ "p": 5, "authorized": [[1,2,3],[1,2,4],[1,2,5],[1,3,4],[1,3,5],[1,4,5],[2,3,4],[2,3,5],[2,4,5],[3,4,5]] }"#;
        let access = AccessStructure::parse_json(json).unwrap();
        assert_eq!(access, AccessStructure::threshold(5, 3).unwrap());
        assert!(access.is_authorized(&[1, 2, 3, 5]).unwrap());
        assert!(!access.is_authorized(&[4, 5]).unwrap());
        assert_eq!(access.minimal_sets().len(), 10);
        assert_eq!(access.maximal_unauthorized().len(), 10);
        assert_eq!(AccessStructure::from_json(&access.to_json()).unwrap(), access);
    }

    #[test]
    fn rejects_cloning_and_non_monotone_families() {
        assert!(AccessStructure::threshold(4, 2).is_err());
        assert!(AccessStructure::generated(2, &[vec![1], vec![2]]).is_err());
        assert!(AccessStructure::explicit(3, &[vec![1, 2]]).is_err());
        assert!(AccessStructure::explicit(3, &[vec![1, 2], vec![1, 2, 3]]).is_ok());
        assert!(AccessStructure::generated(3, &[vec![4]]).is_err());
    }
}
