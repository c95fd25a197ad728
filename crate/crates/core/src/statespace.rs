//! Ordered active state sets with O(1) average lookup.

use alloc::vec::Vec;
use core::fmt;
use core::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};

use crate::error::{Error, Result};
use crate::network::{apply_into, Kinetics};

/// An insertion-ordered set of population states.
///
/// States are stored contiguously (`len * n_species` counts); the hash table
/// holds indices into that storage, so `index_of(states[i]) == i` by construction.
#[derive(Clone)]
pub struct StateSet {
    n_species: usize,
    counts: Vec<u32>,
    table: HashTable<usize>,
    hasher: DefaultHashBuilder,
}

impl StateSet {
    pub fn new(n_species: usize) -> Self {
        Self::with_capacity(n_species, 0)
    }

    pub fn with_capacity(n_species: usize, capacity: usize) -> Self {
        Self {
            n_species,
            counts: Vec::with_capacity(capacity * n_species),
            table: HashTable::with_capacity(capacity),
            hasher: DefaultHashBuilder::default(),
        }
    }

    /// Builds a set from states in order, ignoring duplicates.
    pub fn from_states<'a, I>(n_species: usize, states: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut set = Self::new(n_species);
        for x in states {
            set.try_insert(x)?;
        }
        Ok(set)
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// The `i`-th state. Panics if out of range.
    #[inline]
    pub fn state(&self, i: usize) -> &[u32] {
        &self.counts[i * self.n_species..(i + 1) * self.n_species]
    }

    pub fn get(&self, i: usize) -> Option<&[u32]> {
        (i < self.len()).then(|| self.state(i))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        // chunks_exact on an empty slice with a zero stride would panic
        self.counts.chunks_exact(self.n_species.max(1)).take(self.len())
    }

    #[inline]
    pub fn index_of(&self, x: &[u32]) -> Option<usize> {
        if x.len() != self.n_species {
            return None;
        }
        let hash = self.hasher.hash_one(x);
        let d = self.n_species;
        let counts = &self.counts;
        self.table.find(hash, |&i| &counts[i * d..(i + 1) * d] == x).copied()
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        self.index_of(x).is_some()
    }

    /// Inserts `x` if absent. Returns its index and whether it was new.
    pub fn insert(&mut self, x: &[u32]) -> (usize, bool) {
        assert_eq!(x.len(), self.n_species, "state dimension mismatch");
        let hash = self.hasher.hash_one(x);
        let d = self.n_species;
        let counts = &self.counts;
        if let Some(&i) = self.table.find(hash, |&i| &counts[i * d..(i + 1) * d] == x) {
            return (i, false);
        }
        let i = self.table.len();
        self.counts.extend_from_slice(x);
        let (counts, hasher) = (&self.counts, &self.hasher);
        self.table.insert_unique(hash, i, |&j| hasher.hash_one(&counts[j * d..(j + 1) * d]));
        (i, true)
    }

    pub fn try_insert(&mut self, x: &[u32]) -> Result<(usize, bool)> {
        if x.len() != self.n_species {
            return Err(Error::DimensionMismatch { expected: self.n_species, found: x.len() });
        }
        Ok(self.insert(x))
    }

    /// Adds every state reachable from `self` by at most `radius` admissible
    /// firings. A firing of reaction `k` from `x` is admissible when
    /// `alpha_k(x) > 0` and `x + nu_k` is non-negative.
    ///
    /// Existing states keep their indices. New states are appended breadth-first
    /// by round, then by reaction index, then by source index.
    pub fn expand<K: Kinetics + ?Sized>(&self, kinetics: &K, radius: usize) -> StateSet {
        let mut out = self.clone();
        let d = self.n_species;
        let mut src = alloc::vec![0u32; d];
        let mut dst = alloc::vec![0u32; d];
        let mut frontier = 0..self.len();
        for _ in 0..radius {
            let round_start = out.len();
            for k in 0..kinetics.n_reactions() {
                let nu = kinetics.stoichiometry(k);
                for i in frontier.clone() {
                    src.copy_from_slice(out.state(i));
                    if !apply_into(&src, nu, &mut dst) || out.contains(&dst) {
                        continue;
                    }
                    if kinetics.rate(k, &src) > 0.0 {
                        out.insert(&dst);
                    }
                }
            }
            if out.len() == round_start {
                break;
            }
            frontier = round_start..out.len();
        }
        out
    }

    /// Keeps the states at `keep` (any order, duplicates ignored), preserving
    /// their relative order. The returned map sends old indices to new ones.
    pub fn restrict(&self, keep: &[usize]) -> Result<(StateSet, Vec<Option<usize>>)> {
        let mut mask = alloc::vec![false; self.len()];
        for &i in keep {
            if i >= self.len() {
                return Err(Error::StateOutOfRange { index: i, len: self.len() });
            }
            mask[i] = true;
        }
        self.restrict_mask(&mask)
    }

    pub fn restrict_mask(&self, mask: &[bool]) -> Result<(StateSet, Vec<Option<usize>>)> {
        if mask.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: mask.len() });
        }
        let kept = mask.iter().filter(|&&m| m).count();
        if kept == 0 {
            return Err(Error::EmptyKeepSet);
        }
        let mut out = StateSet::with_capacity(self.n_species, kept);
        let mut map = alloc::vec![None; self.len()];
        for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let (j, _) = out.insert(self.state(i));
            map[i] = Some(j);
        }
        Ok((out, map))
    }

    /// Probability-weighted mean copy number of each species.
    pub fn means(&self, p: &[f64]) -> Vec<f64> {
        let mut means = alloc::vec![0.0; self.n_species];
        for (x, &pi) in self.iter().zip(p) {
            if pi == 0.0 {
                continue;
            }
            for (m, &c) in means.iter_mut().zip(x) {
                *m += pi * f64::from(c);
            }
        }
        means
    }
}

impl PartialEq for StateSet {
    /// Equal when both hold the same states in the same order.
    fn eq(&self, other: &Self) -> bool {
        self.n_species == other.n_species && self.len() == other.len() && self.counts == other.counts
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_model;
    use alloc::vec;
    use alloc::vec::Vec;

    fn states(set: &StateSet) -> Vec<Vec<u32>> {
        set.iter().map(|x| x.to_vec()).collect()
    }

    #[test]
    fn bottleneck_one_round() {
        let (net, x0) = builtin_model("bottleneck").unwrap();
        let s = StateSet::from_states(3, [x0.counts()]).unwrap();
        let e = s.expand(&net, 1);
        assert_eq!(states(&e), vec![vec![1, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn bottleneck_two_rounds() {
        let (net, x0) = builtin_model("bottleneck").unwrap();
        let s = StateSet::from_states(3, [x0.counts()]).unwrap();
        let e = s.expand(&net, 2);
        assert_eq!(states(&e), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 1, 1]]);
    }

    #[test]
    fn absorbing_state_does_not_expand() {
        let (net, _) = builtin_model("robertson").unwrap();
        let s = StateSet::from_states(3, [&[0u32, 0, 5][..]]).unwrap();
        assert_eq!(s.expand(&net, 3), s);
    }

    #[test]
    fn lookup_is_consistent_with_order() {
        let mut s = StateSet::new(2);
        for i in 0..500u32 {
            s.insert(&[i % 37, i / 37]);
        }
        assert_eq!(s.insert(&[3, 0]), (3, false));
        for i in 0..s.len() {
            assert_eq!(s.index_of(s.state(i)), Some(i));
        }
        assert_eq!(s.index_of(&[1, 1, 1]), None);
        assert!(s.try_insert(&[1]).is_err());
    }

    #[test]
    fn restrict_examples() {
        let mut s = StateSet::new(1);
        for i in 0..4u32 {
            s.insert(&[i * 10]);
        }
        let (all, map) = s.restrict(&[0, 1, 2, 3]).unwrap();
        assert_eq!(all, s);
        assert_eq!(map, vec![Some(0), Some(1), Some(2), Some(3)]);

        let (two, map) = s.restrict(&[2, 0]).unwrap();
        assert_eq!(states(&two), vec![vec![0], vec![20]]);
        assert_eq!(map, vec![Some(0), None, Some(1), None]);

        assert_eq!(s.restrict(&[]).unwrap_err(), Error::EmptyKeepSet);
        assert!(s.restrict(&[7]).is_err());
    }

    #[test]
    fn means_weight_counts() {
        let s = StateSet::from_states(2, [&[0u32, 4][..], &[2, 0]]).unwrap();
        assert_eq!(s.means(&[0.5, 0.5]), vec![1.0, 2.0]);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::models::BuiltinModel;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn seed_set(model: BuiltinModel, offsets: &[(u32, u32)]) -> (crate::ReactionNetwork, StateSet) {
        let (net, x0) = model.build();
        let mut s = StateSet::new(x0.len());
        s.insert(&x0);
        for &(a, b) in offsets {
            let mut x = x0.to_vec();
            x[0] = x[0].saturating_add(a);
            x[1] = x[1].saturating_sub(b);
            s.insert(&x);
        }
        (net, s)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn expansion_is_monotone_and_composes(
            which in 0usize..4,
            offsets in proptest::collection::vec((0u32..3, 0u32..3), 0..4),
        ) {
            let (net, s) = seed_set(BuiltinModel::ALL[which], &offsets);
            let once = s.expand(&net, 1);
            for i in 0..s.len() {
                prop_assert_eq!(once.state(i), s.state(i));
            }
            let twice = once.expand(&net, 1);
            let direct = s.expand(&net, 2);
            prop_assert_eq!(twice.len(), direct.len());
            for x in direct.iter() {
                prop_assert!(twice.contains(x));
            }
            // determinism
            prop_assert_eq!(s.expand(&net, 2), direct);
        }

        #[test]
        fn new_states_have_an_admissible_predecessor(
            which in 0usize..4,
            offsets in proptest::collection::vec((0u32..3, 0u32..3), 0..4),
        ) {
            let (net, s) = seed_set(BuiltinModel::ALL[which], &offsets);
            let e = s.expand(&net, 1);
            for j in s.len()..e.len() {
                let y = e.state(j);
                let found = (0..s.len()).any(|i| {
                    (0..net.n_reactions()).any(|k| {
                        let nu = net.stoichiometry(k);
                        let mut dst: Vec<u32> = alloc::vec![0; y.len()];
                        apply_into(s.state(i), nu, &mut dst) && dst == y && net.rate(k, s.state(i)) > 0.0
                    })
                });
                prop_assert!(found);
            }
        }
    }
}
