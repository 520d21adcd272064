//! Bundles of goods as bitmasks.
//!
//! Good `k` (numbered from 1 in all user-facing text) occupies bit `k - 1`.
//! Internally goods are 0-based indices.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest number of goods any valuation may carry.
pub const MAX_GOODS: usize = 24;

/// Largest number of goods for which full tables are materialized.
pub const MAX_DENSE_GOODS: usize = 20;

/// A set of goods.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(pub u32);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn full(goods: usize) -> Bundle {
        debug_assert!(goods <= MAX_GOODS);
        Bundle(((1u64 << goods) - 1) as u32)
    }

    pub fn singleton(good: usize) -> Bundle {
        Bundle(1 << good)
    }

    pub fn from_goods<I: IntoIterator<Item = usize>>(goods: I) -> Bundle {
        Bundle(goods.into_iter().fold(0, |m, g| m | (1 << g)))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, good: usize) -> bool {
        self.0 >> good & 1 == 1
    }

    pub fn with(self, good: usize) -> Bundle {
        Bundle(self.0 | 1 << good)
    }

    pub fn without(self, good: usize) -> Bundle {
        Bundle(self.0 & !(1 << good))
    }

    pub fn union(self, other: Bundle) -> Bundle {
        Bundle(self.0 | other.0)
    }

    pub fn difference(self, other: Bundle) -> Bundle {
        Bundle(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    /// Symmetric-difference size.
    pub fn hamming(self, other: Bundle) -> usize {
        (self.0 ^ other.0).count_ones() as usize
    }

    /// Goods in ascending order.
    pub fn goods(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let g = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(g)
        })
    }

    /// Goods among the first `goods` that are not in the bundle, ascending.
    pub fn complement_goods(self, goods: usize) -> impl Iterator<Item = usize> {
        Bundle::full(goods).difference(self).goods()
    }

    /// All subsets, starting from the bundle itself and ending with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = Bundle> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(Bundle(cur))
        })
    }
}

/// Brace notation with 1-based goods, e.g. `{1,3}`.
impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, g) in self.goods().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", g + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All bundles of exactly `size` goods among `goods`, ascending by mask.
pub fn bundles_of_size(goods: usize, size: usize) -> impl Iterator<Item = Bundle> {
    (0..1u32 << goods)
        .filter(move |m| m.count_ones() as usize == size)
        .map(Bundle)
}

/// Unordered pairs `(i, j)` with `i < j` of goods outside `base`, lexicographic.
pub fn pairs_outside(base: Bundle, goods: usize) -> Vec<(usize, usize)> {
    let free: Vec<usize> = base.complement_goods(goods).collect();
    let mut out = Vec::with_capacity(free.len() * free.len().saturating_sub(1) / 2);
    for (a, &i) in free.iter().enumerate() {
        for &j in &free[a + 1..] {
            out.push((i, j));
        }
    }
    out
}

/// Triples `i < j < k` of goods outside `base`, lexicographic.
pub fn triples_outside(base: Bundle, goods: usize) -> Vec<(usize, usize, usize)> {
    let free: Vec<usize> = base.complement_goods(goods).collect();
    let mut out = Vec::new();
    for a in 0..free.len() {
        for b in a + 1..free.len() {
            for c in b + 1..free.len() {
                out.push((free[a], free[b], free[c]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_order() {
        let b = Bundle::from_goods([0, 2]);
        assert_eq!(b.mask(), 0b101);
        assert_eq!(b.to_string(), "{1,3}");
        assert_eq!(b.len(), 2);
        assert!(b.contains(2) && !b.contains(1));
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let b = Bundle(0b1011);
        let subs: Vec<_> = b.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset_of(b)));
        assert_eq!(subs.first(), Some(&b));
        assert_eq!(subs.last(), Some(&Bundle::EMPTY));
        assert_eq!(Bundle::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn pairs_and_triples() {
        let base = Bundle::singleton(1);
        assert_eq!(pairs_outside(base, 4), vec![(0, 2), (0, 3), (2, 3)]);
        assert_eq!(triples_outside(base, 4), vec![(0, 2, 3)]);
        assert_eq!(bundles_of_size(4, 2).count(), 6);
    }
}
