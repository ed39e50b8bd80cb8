//! Multi-indices and the downward-closed set machinery that drives the
//! adaptive index selection.
//!
//! Indices are 1-based: a component value of 1 is the coarsest level. A
//! combined index `[alpha, beta]` stores the physical (fidelity) components
//! first and the parametric (quadrature) components after them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered tuple of positive integer levels.
///
/// Ordering is lexicographic, which gives deterministic iteration order and
/// tie-breaking wherever sets of indices are scanned.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        let idx = MultiIndex(components);
        if idx.0.contains(&0) {
            return Err(Error::InvalidIndex(idx));
        }
        Ok(idx)
    }

    /// The all-ones index of length `dim`.
    pub fn root(dim: usize) -> Self {
        MultiIndex(vec![1; dim])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `self + e_k`.
    pub fn step_up(&self, k: usize) -> Self {
        let mut c = self.0.clone();
        c[k] += 1;
        MultiIndex(c)
    }

    /// `self - e_k`, or `None` when component `k` is already 1.
    pub fn step_down(&self, k: usize) -> Option<Self> {
        if self.0[k] <= 1 {
            return None;
        }
        let mut c = self.0.clone();
        c[k] -= 1;
        Some(MultiIndex(c))
    }

    /// Backward neighbours `self - e_k` for every `k` with component > 1.
    pub fn backward_neighbours(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).filter_map(move |k| self.step_down(k))
    }

    /// Splits a combined `[alpha, beta]` index after `d_phys` components.
    pub fn split(&self, d_phys: usize) -> (MultiIndex, MultiIndex) {
        (
            MultiIndex(self.0[..d_phys].to_vec()),
            MultiIndex(self.0[d_phys..].to_vec()),
        )
    }

    pub fn concat(alpha: &MultiIndex, beta: &MultiIndex) -> MultiIndex {
        let mut c = alpha.0.clone();
        c.extend_from_slice(&beta.0);
        MultiIndex(c)
    }

    /// Componentwise `self <= other`.
    pub fn le_all(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        MultiIndex::new(v)
    }
}

/// A finite set of equal-length multi-indices.
///
/// Serializes as a JSON array of arrays in lexicographic order.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MultiIndex>", into = "Vec<MultiIndex>")]
pub struct IndexSet {
    dim: usize,
    members: BTreeSet<MultiIndex>,
    downward_closed: bool,
}

impl IndexSet {
    pub fn new(dim: usize) -> Self {
        IndexSet {
            dim,
            members: BTreeSet::new(),
            downward_closed: true,
        }
    }

    pub fn from_indices<I: IntoIterator<Item = MultiIndex>>(dim: usize, it: I) -> Result<Self> {
        let mut s = IndexSet::new(dim);
        for i in it {
            s.insert(i)?;
        }
        Ok(s)
    }

    /// Convenience constructor for tests and examples.
    pub fn from_slices(items: &[&[u32]]) -> Result<Self> {
        let dim = items.first().map_or(0, |s| s.len());
        IndexSet::from_indices(
            dim,
            items
                .iter()
                .map(|s| MultiIndex::new(s.to_vec()))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: &MultiIndex) -> bool {
        self.members.contains(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// Inserts `i`, returning whether it was new. Keeps the downward-closed
    /// flag consistent.
    pub fn insert(&mut self, i: MultiIndex) -> Result<bool> {
        if i.len() != self.dim {
            return Err(Error::IndexLength {
                expected: self.dim,
                found: i.len(),
            });
        }
        if self.members.contains(&i) {
            return Ok(false);
        }
        if self.downward_closed {
            self.downward_closed = i.backward_neighbours().all(|b| self.members.contains(&b));
            self.members.insert(i);
        } else {
            // the new member may be the one that was missing
            self.members.insert(i);
            self.downward_closed = self.check_closed();
        }
        Ok(true)
    }

    pub fn remove(&mut self, i: &MultiIndex) -> bool {
        let removed = self.members.remove(i);
        if removed {
            self.downward_closed = self.check_closed();
        }
        removed
    }

    pub fn is_downward_closed(&self) -> bool {
        self.downward_closed
    }

    fn check_closed(&self) -> bool {
        self.members
            .iter()
            .all(|k| k.backward_neighbours().all(|b| self.members.contains(&b)))
    }

    /// Indices reachable from the set within one step, excluding the set.
    pub fn margin(&self) -> IndexSet {
        let mut out = IndexSet::new(self.dim);
        for j in &self.members {
            for k in 0..self.dim {
                let i = j.step_up(k);
                if !self.members.contains(&i) {
                    out.members.insert(i);
                }
            }
        }
        out.downward_closed = out.check_closed();
        out
    }

    /// Margin members whose addition keeps the set downward closed.
    pub fn reduced_margin(&self) -> IndexSet {
        let mut out = IndexSet::new(self.dim);
        for i in self.margin().members {
            if i.backward_neighbours().all(|b| self.members.contains(&b)) {
                out.members.insert(i);
            }
        }
        out.downward_closed = out.check_closed();
        out
    }

    /// The set of all indices componentwise below `top` (a full box).
    pub fn full_box(top: &MultiIndex) -> IndexSet {
        let dim = top.len();
        let mut out = IndexSet::new(dim);
        let mut cur = vec![1u32; dim];
        loop {
            out.members.insert(MultiIndex(cur.clone()));
            let mut k = 0;
            loop {
                if k == dim {
                    out.downward_closed = true;
                    return out;
                }
                if cur[k] < top.0[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = 1;
                k += 1;
            }
        }
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}

impl TryFrom<Vec<MultiIndex>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<MultiIndex>) -> Result<Self> {
        let dim = v.first().map_or(0, |i| i.len());
        IndexSet::from_indices(dim, v)
    }
}

impl From<IndexSet> for Vec<MultiIndex> {
    fn from(s: IndexSet) -> Self {
        s.members.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::collections::btree_set::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[&[u32]]) -> IndexSet {
        IndexSet::from_slices(items).unwrap()
    }

    #[test]
    fn downward_closed_examples() {
        assert!(set(&[&[1, 1]]).is_downward_closed());
        assert!(set(&[&[1, 1], &[2, 1], &[1, 2]]).is_downward_closed());
        assert!(!set(&[&[1, 1], &[2, 2]]).is_downward_closed());
    }

    #[test]
    fn flag_recovers_when_missing_member_inserted() {
        let mut s = set(&[&[1, 1], &[2, 2]]);
        s.insert(MultiIndex::new(vec![2, 1]).unwrap()).unwrap();
        assert!(!s.is_downward_closed());
        s.insert(MultiIndex::new(vec![1, 2]).unwrap()).unwrap();
        assert!(s.is_downward_closed());
    }

    #[test]
    fn mixed_lengths_rejected() {
        let mut s = set(&[&[1, 1]]);
        let err = s.insert(MultiIndex::new(vec![1, 1, 1]).unwrap());
        assert!(matches!(err, Err(Error::IndexLength { .. })));
        assert!(MultiIndex::new(vec![0, 1]).is_err());
    }

    #[test]
    fn margin_examples() {
        assert_eq!(set(&[&[1, 1]]).margin(), set(&[&[2, 1], &[1, 2]]));
        assert_eq!(
            set(&[&[1, 1], &[2, 1]]).margin(),
            set(&[&[3, 1], &[2, 2], &[1, 2]])
        );
        assert_eq!(
            set(&[&[1, 1], &[2, 1], &[1, 2]]).margin(),
            set(&[&[3, 1], &[2, 2], &[1, 3]])
        );
    }

    #[test]
    fn reduced_margin_examples() {
        assert_eq!(set(&[&[1, 1]]).reduced_margin(), set(&[&[2, 1], &[1, 2]]));
        // (2,2) is in the margin but needs (1,2), which is absent
        assert_eq!(
            set(&[&[1, 1], &[2, 1]]).reduced_margin(),
            set(&[&[3, 1], &[1, 2]])
        );
        // staircase {(1,1),(2,1),(3,1),(1,2)}: (2,2) is admissible, (3,2)
        // and (4,2) would not be.
        let gray = set(&[&[1, 1], &[2, 1], &[3, 1], &[1, 2]]);
        let margin = gray.margin();
        let reduced = gray.reduced_margin();
        assert_eq!(margin, set(&[&[4, 1], &[2, 2], &[3, 2], &[1, 3]]));
        assert_eq!(reduced, set(&[&[4, 1], &[2, 2], &[1, 3]]));
    }

    #[test]
    fn full_box_enumerates_all() {
        let b = IndexSet::full_box(&MultiIndex::new(vec![2, 3]).unwrap());
        assert_eq!(b.len(), 6);
        assert!(b.is_downward_closed());
    }

    #[test]
    fn json_round_trip() {
        let s = set(&[&[2, 1], &[1, 1]]);
        let txt = serde_json::to_string(&s).unwrap();
        assert_eq!(txt, "[[1,1],[2,1]]");
        let back: IndexSet = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, s);
    }

    /// Random downward-closed set: grow from the root by admissible steps.
    fn closed_set_strategy() -> impl Strategy<Value = IndexSet> {
        (1usize..=4, proptest::collection::vec(any::<u32>(), 0..12)).prop_map(|(dim, picks)| {
            let mut s = IndexSet::from_indices(dim, [MultiIndex::root(dim)]).unwrap();
            for p in picks {
                let cands: Vec<MultiIndex> = s
                    .reduced_margin()
                    .iter()
                    .filter(|i| i.components().iter().all(|&c| c <= 5))
                    .cloned()
                    .collect();
                if cands.is_empty() {
                    break;
                }
                s.insert(cands[p as usize % cands.len()].clone()).unwrap();
            }
            s
        })
    }

    proptest! {
        #[test]
        fn margin_properties(s in closed_set_strategy()) {
            prop_assert!(s.is_downward_closed());
            let m = s.margin();
            let r = s.reduced_margin();
            for i in &r {
                prop_assert!(m.contains(i));
                let mut grown = s.clone();
                grown.insert(i.clone()).unwrap();
                prop_assert!(grown.is_downward_closed());
            }
            for i in &m {
                prop_assert!(!s.contains(i));
            }
        }

        #[test]
        fn insertion_order_irrelevant(s in closed_set_strategy()) {
            let items: Vec<MultiIndex> = s.iter().cloned().collect();
            let rev = IndexSet::from_indices(s.dim(), items.into_iter().rev()).unwrap();
            prop_assert_eq!(rev.is_downward_closed(), s.is_downward_closed());
            prop_assert_eq!(rev.margin(), s.margin());
            prop_assert_eq!(rev.reduced_margin(), s.reduced_margin());
        }
    }
}
