//! Picking orders over students and the algebra used to compare them.
//!
//! Ranks are 0-based: the student at rank 0 picks first. A transposition
//! `(i, j)` names two *students* and swaps their ranks.

use alloc::vec::Vec;

use crate::error::InstanceError;

/// A picking order, stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    rank_of: Vec<u32>,
    student_at: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let ids: Vec<u32> = (0..n as u32).collect();
        Permutation { rank_of: ids.clone(), student_at: ids }
    }

    /// Builds from the rank → student direction.
    pub fn from_student_at(student_at: Vec<u32>) -> Result<Self, InstanceError> {
        let rank_of = invert(&student_at).ok_or(InstanceError::NotAPermutation)?;
        Ok(Permutation { rank_of, student_at })
    }

    /// Builds from the student → rank direction.
    pub fn from_rank_of(rank_of: Vec<u32>) -> Result<Self, InstanceError> {
        let student_at = invert(&rank_of).ok_or(InstanceError::NotAPermutation)?;
        Ok(Permutation { rank_of, student_at })
    }

    pub fn len(&self) -> usize {
        self.rank_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_of.is_empty()
    }

    #[inline]
    pub fn rank_of(&self, student: usize) -> usize {
        self.rank_of[student] as usize
    }

    #[inline]
    pub fn student_at(&self, rank: usize) -> usize {
        self.student_at[rank] as usize
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank_of
    }

    /// Students in picking order.
    pub fn order(&self) -> &[u32] {
        &self.student_at
    }

    /// Rebuilds `self` in place from a new picking order of the same length.
    ///
    /// Used by the sampling loops to avoid reallocating per replication.
    pub(crate) fn set_order_unchecked(&mut self) {
        for (r, &s) in self.student_at.iter().enumerate() {
            self.rank_of[s as usize] = r as u32;
        }
    }

    pub(crate) fn order_mut(&mut self) -> &mut [u32] {
        &mut self.student_at
    }

    /// `t_ij · self`: students `i` and `j` exchange ranks.
    pub fn apply_transposition(&self, i: usize, j: usize) -> Permutation {
        let mut out = self.clone();
        out.transpose_in_place(i, j);
        out
    }

    pub fn transpose_in_place(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.rank_of[i], self.rank_of[j]);
        self.rank_of.swap(i, j);
        self.student_at[ri as usize] = j as u32;
        self.student_at[rj as usize] = i as u32;
    }

    /// The insertion operator `(j → s)`: student `j` is removed from the
    /// order and re-inserted at rank `s`; every other student keeps its
    /// relative order.
    ///
    /// # Panics
    /// If `s >= n` or `j >= n`.
    pub fn insertion(&self, j: usize, s: usize) -> Permutation {
        assert!(s < self.len(), "insertion rank {s} out of range");
        let from = self.rank_of(j);
        let mut order = self.student_at.clone();
        if s < from {
            order[s..=from].rotate_right(1);
        } else {
            order[from..=s].rotate_left(1);
        }
        let mut out = Permutation { rank_of: self.rank_of.clone(), student_at: order };
        out.set_order_unchecked();
        out
    }

    /// Number of students whose ranks differ.
    pub fn hamming_distance(&self, other: &Permutation) -> usize {
        assert_eq!(self.len(), other.len(), "orders over different student sets");
        self.rank_of.iter().zip(&other.rank_of).filter(|(a, b)| a != b).count()
    }

    /// Transpositions `(i, j)` such that applying them to `self` in sequence
    /// yields `target`.
    ///
    /// Walks ranks in order and fixes each mismatched rank with one swap, so
    /// each cycle of `target ∘ self⁻¹` of length `L` costs `L - 1` swaps and
    /// the result is never longer than `self.hamming_distance(target)`.
    pub fn decompose_into_transpositions(&self, target: &Permutation) -> Vec<(usize, usize)> {
        assert_eq!(self.len(), target.len(), "orders over different student sets");
        let mut cur = self.clone();
        let mut out = Vec::new();
        for r in 0..cur.len() {
            let want = target.student_at(r);
            let have = cur.student_at(r);
            if want != have {
                cur.transpose_in_place(have, want);
                out.push((have, want));
            }
        }
        out
    }
}

fn invert(map: &[u32]) -> Option<Vec<u32>> {
    let n = map.len();
    let mut inv = alloc::vec![u32::MAX; n];
    for (a, &b) in map.iter().enumerate() {
        let b = b as usize;
        if b >= n || inv[b] != u32::MAX {
            return None;
        }
        inv[b] = a as u32;
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n as u32).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_student_at(v).unwrap())
    }

    #[test]
    fn transposition_examples() {
        let id = Permutation::identity(3);
        let t = id.apply_transposition(0, 1);
        assert_eq!(t.ranks(), &[1, 0, 2]);
        assert_eq!(t.apply_transposition(0, 1), id);
        assert_eq!(id.hamming_distance(&t), 2);
    }

    #[test]
    fn insertion_examples() {
        let id = Permutation::identity(3);
        assert_eq!(id.insertion(2, 0).order(), &[2, 0, 1]);
        assert_eq!(id.insertion(0, 2).order(), &[1, 2, 0]);
        for j in 0..3 {
            assert_eq!(id.insertion(j, j), id);
        }
    }

    #[test]
    fn hamming_examples() {
        let id = Permutation::identity(4);
        assert_eq!(id.hamming_distance(&id), 0);
        let shift = Permutation::from_student_at(vec![1, 2, 3, 0]).unwrap();
        assert_eq!(id.hamming_distance(&shift), 4);
    }

    #[test]
    fn decomposition_examples() {
        let id = Permutation::identity(3);
        assert!(id.decompose_into_transpositions(&id).is_empty());
        let swapped = id.apply_transposition(0, 1);
        let ts = id.decompose_into_transpositions(&swapped);
        assert_eq!(ts.len(), 1);
        let (a, b) = ts[0];
        assert_eq!((a.min(b), a.max(b)), (0, 1));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_student_at(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_rank_of(vec![0, 3, 1]).is_err());
    }

    proptest! {
        #[test]
        fn directions_are_inverse(p in (1usize..40).prop_flat_map(perm)) {
            for s in 0..p.len() {
                prop_assert_eq!(p.student_at(p.rank_of(s)), s);
            }
        }

        #[test]
        fn transposition_is_two_insertions(
            (p, i, j) in (2usize..30).prop_flat_map(|n| (perm(n), 0..n, 0..n))
        ) {
            prop_assume!(i != j);
            let ri = p.rank_of(i);
            let rj = p.rank_of(j);
            let via = p.insertion(i, rj).insertion(j, ri);
            prop_assert_eq!(p.apply_transposition(i, j), via);
        }

        #[test]
        fn insertion_keeps_relative_order(
            (p, j, s) in (1usize..30).prop_flat_map(|n| (perm(n), 0..n, 0..n))
        ) {
            let q = p.insertion(j, s);
            prop_assert_eq!(q.rank_of(j), s);
            let a: Vec<u32> = p.order().iter().copied().filter(|&x| x as usize != j).collect();
            let b: Vec<u32> = q.order().iter().copied().filter(|&x| x as usize != j).collect();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn decomposition_replays_to_target(
            (a, b) in (1usize..40).prop_flat_map(|n| (perm(n), perm(n)))
        ) {
            let ts = a.decompose_into_transpositions(&b);
            prop_assert!(ts.len() <= a.hamming_distance(&b));
            let mut cur = a.clone();
            for (i, j) in ts {
                prop_assert!(i != j);
                cur = cur.apply_transposition(i, j);
            }
            prop_assert_eq!(cur, b);
        }
    }
}
