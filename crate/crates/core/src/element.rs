use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Index of an element in the ground set. Ids are dense `0..n` and double as
/// the deterministic tie-break order used throughout the algorithms.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ElementId {
    fn from(v: u32) -> Self {
        ElementId(v)
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn id_token(id: ElementId) -> u128 {
    let hi = splitmix64(id.0 as u64 ^ 0x6a09e667f3bcc908);
    let lo = splitmix64(id.0 as u64 ^ 0xbb67ae8584caa73b);
    ((hi as u128) << 64) | lo as u128
}

/// A subset of the ground set, kept as strictly increasing ids.
///
/// The `token` is an order-independent content hash maintained incrementally;
/// oracles use it to recognize a previously seen base set in O(1).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElementSet {
    ids: Vec<ElementId>,
    token: u128,
}

impl ElementSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(e: ElementId) -> Self {
        ElementSet {
            ids: vec![e],
            token: id_token(e),
        }
    }

    pub fn from_ids<I: IntoIterator<Item = ElementId>>(iter: I) -> Self {
        let mut ids: Vec<ElementId> = iter.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let token = ids.iter().fold(0u128, |t, &e| t.wrapping_add(id_token(e)));
        ElementSet { ids, token }
    }

    /// Convenience constructor from raw indices, mostly for tests.
    pub fn of(ids: &[u32]) -> Self {
        Self::from_ids(ids.iter().copied().map(ElementId))
    }

    /// Set of the lowest `count` bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        let mut ids = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros();
            ids.push(ElementId(b));
            m &= m - 1;
        }
        let token = ids.iter().fold(0u128, |t, &e| t.wrapping_add(id_token(e)));
        ElementSet { ids, token }
    }

    #[inline]
    pub fn ids(&self) -> &[ElementId] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.ids.iter().copied()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub(crate) fn token(&self) -> u128 {
        self.token
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.ids.binary_search(&e).is_ok()
    }

    /// Inserts `e`, returning false if it was already present.
    pub fn insert(&mut self, e: ElementId) -> bool {
        match self.ids.binary_search(&e) {
            Ok(_) => false,
            Err(pos) => {
                self.ids.insert(pos, e);
                self.token = self.token.wrapping_add(id_token(e));
                true
            }
        }
    }

    pub fn with(&self, e: ElementId) -> Self {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    pub fn union(&self, other: &ElementSet) -> Self {
        Self::from_ids(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &ElementSet) -> Self {
        Self::from_ids(self.iter().filter(|&e| !other.contains(e)))
    }
}

impl FromIterator<ElementId> for ElementSet {
    fn from_iter<I: IntoIterator<Item = ElementId>>(iter: I) -> Self {
        Self::from_ids(iter)
    }
}

impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.ids.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ElementSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids = Vec::<ElementId>::deserialize(deserializer)?;
        let set = ElementSet::from_ids(ids.iter().copied());
        if set.len() != ids.len() {
            return Err(D::Error::custom("duplicate element ids in set"));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_dedup_construction() {
        let s = ElementSet::of(&[3, 1, 3, 0]);
        assert_eq!(s.ids(), &[ElementId(0), ElementId(1), ElementId(3)]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(ElementId(1)));
        assert!(!s.contains(ElementId(2)));
    }

    #[test]
    fn token_is_order_independent() {
        let a = ElementSet::of(&[5, 2, 9]);
        let mut b = ElementSet::new();
        for id in [9, 5, 2] {
            b.insert(ElementId(id));
        }
        assert_eq!(a.token(), b.token());
        assert_eq!(a, b);
    }

    #[test]
    fn set_order_is_tuple_lexicographic() {
        // {0} < {0,1} < {0,2} < {1}
        let s0 = ElementSet::of(&[0]);
        let s01 = ElementSet::of(&[0, 1]);
        let s02 = ElementSet::of(&[0, 2]);
        let s1 = ElementSet::of(&[1]);
        assert!(s0 < s01);
        assert!(s01 < s02);
        assert!(s02 < s1);
    }

    #[test]
    fn mask_roundtrip() {
        let s = ElementSet::from_mask(0b101101);
        assert_eq!(s, ElementSet::of(&[0, 2, 3, 5]));
    }
}
