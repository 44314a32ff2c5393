//! Strict binary relations on `0..n`, stored as dense bit matrices.

use std::collections::BinaryHeap;
use std::cmp::Reverse;

use crate::bits::{ones, BitMatrix, BitSet};
use crate::error::{Error, Result};

/// A strict relation: `get(i, j)` means `i R j`. Self-pairs are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Relation {
    m: BitMatrix,
}

impl Relation {
    pub fn new(n: usize) -> Self {
        Self { m: BitMatrix::new(n) }
    }

    /// Builds a relation from index pairs; self-pairs are rejected as cycles.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut r = Self::new(n);
        for (i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("pair ({i}, {j}) out of range for {n} points")));
            }
            if i == j {
                return Err(Error::NotPartialOrder { cycle: vec![i as u64] });
            }
            r.m.set(i, j);
        }
        Ok(r)
    }

    pub fn from_matrix(m: BitMatrix) -> Self {
        Self { m }
    }

    pub fn len(&self) -> usize {
        self.m.size()
    }

    pub fn is_empty(&self) -> bool {
        self.m.size() == 0
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.m.set(i, j);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.m.unset(i, j);
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.m.get(i, j)
    }

    /// Successor row of `i` as raw words.
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        self.m.row(i)
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.m.row(i))
    }

    pub fn successor_set(&self, i: usize) -> BitSet {
        self.m.row_set(i)
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> BitMatrix {
        self.m
    }

    pub fn pair_count(&self) -> usize {
        self.m.count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.m.pairs()
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.m.is_subset(&other.m)
    }

    /// Topological order (smallest index first among ready nodes).
    ///
    /// Fails with the indices of one cycle when the relation is cyclic.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for (_, j) in self.pairs() {
            indeg[j] += 1;
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(i);
            for j in self.successors(i) {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push(Reverse(j));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let stuck: Vec<bool> = (0..n).map(|i| indeg[i] > 0).collect();
            Err(Error::NotPartialOrder { cycle: self.find_cycle(&stuck) })
        }
    }

    /// Walks backwards through unresolved nodes until a node repeats.
    fn find_cycle(&self, stuck: &[bool]) -> Vec<u64> {
        let n = self.len();
        let t = self.transpose();
        let start = stuck.iter().position(|&s| s).expect("cycle present");
        let mut seen = vec![usize::MAX; n];
        let mut path = Vec::new();
        let mut cur = start;
        while seen[cur] == usize::MAX {
            seen[cur] = path.len();
            path.push(cur);
            cur = t.successors(cur).find(|&p| stuck[p]).expect("stuck node has stuck predecessor");
        }
        let mut cycle: Vec<u64> = path[seen[cur]..].iter().rev().map(|&i| i as u64).collect();
        // Rotate so the cycle starts at its smallest member.
        let k = cycle.iter().enumerate().min_by_key(|(_, v)| **v).map(|(k, _)| k).unwrap_or(0);
        cycle.rotate_left(k);
        cycle
    }

    /// Smallest transitive superset. Errors on cycles.
    pub fn transitive_closure(&self) -> Result<Self> {
        let order = self.topo_order()?;
        let n = self.len();
        let mut pos = vec![0usize; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let mut out = BitMatrix::new(n);
        for &i in order.iter().rev() {
            let mut succ: Vec<usize> = self.successors(i).collect();
            succ.sort_by_key(|&j| pos[j]);
            for j in succ {
                if !out.get(i, j) {
                    out.set(i, j);
                    out.union_rows(i, j);
                }
            }
        }
        Ok(Self { m: out })
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.len()).all(|i| {
            self.successors(i).all(|j| {
                let (ri, rj) = (self.row(i), self.row(j));
                ri.iter().zip(rj).all(|(a, b)| b & !a == 0)
            })
        })
    }

    /// Hasse diagram: the unique minimal relation with the same closure.
    ///
    /// The input is closed first, so any acyclic relation is accepted.
    pub fn transitive_reduction(&self) -> Result<Self> {
        let closed = self.transitive_closure()?;
        let n = self.len();
        let mut out = BitMatrix::new(n);
        let words = n.div_ceil(64);
        let mut covered = vec![0u64; words];
        for i in 0..n {
            covered.iter_mut().for_each(|w| *w = 0);
            for k in closed.successors(i) {
                for (c, r) in covered.iter_mut().zip(closed.row(k)) {
                    *c |= r;
                }
            }
            for (o, (r, c)) in out.row_mut(i).iter_mut().zip(closed.row(i).iter().zip(&covered)) {
                *o = r & !c;
            }
        }
        Ok(Self { m: out })
    }
}
