//! Finite ordered measure spaces: weighted points with a causal order and a
//! chronological sub-order.
//!
//! Points are stored in a linear extension of the causal order, so `i <= j`
//! causally implies `i <= j` as indices. Constructors relabel when needed and
//! keep the caller's identities in [`OrderedMeasureSpace::ids`].

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{and_count, ones, BitSet};
use crate::error::{Error, Result};
use crate::metrics::SigmaMatrix;
use crate::model::EventCoords;
use crate::relation::Relation;

/// Which relation a query uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrderMode {
    /// `<=`: pasts and futures include the point itself.
    Causal,
    /// `<<`: strict pasts and futures.
    #[default]
    Chrono,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedMeasureSpace {
    ids: Vec<u64>,
    weights: Vec<f64>,
    coords: Option<Vec<EventCoords>>,
    causal: Relation,
    causal_past: Relation,
    chrono: Relation,
    chrono_past: Relation,
    uniform_weight: Option<f64>,
}

impl OrderedMeasureSpace {
    /// Builds a space from strict relations given on index positions.
    ///
    /// Both relations are transitively closed; `chrono` must lie inside the
    /// closed causal relation. If the indices are not a linear extension, all
    /// per-point data is permuted into one (stable Kahn order).
    pub fn new(
        ids: Vec<u64>,
        weights: Vec<f64>,
        coords: Option<Vec<EventCoords>>,
        causal: Relation,
        chrono: Relation,
    ) -> Result<Self> {
        let n = ids.len();
        if weights.len() != n || causal.len() != n || chrono.len() != n {
            return Err(Error::InvalidSpace("ids, weights and relations disagree in size".into()));
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::InvalidSpace("coords length differs from point count".into()));
            }
        }
        let mut seen = HashMap::with_capacity(n);
        for &id in &ids {
            if seen.insert(id, ()).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidSpace(format!("weights must be finite and non-negative, got {w}")));
        }
        if n > 0 && weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidSpace("total weight must be positive".into()));
        }
        let named = |e: Error| match e {
            Error::NotPartialOrder { cycle } => Error::NotPartialOrder { cycle: cycle.iter().map(|&i| ids[i as usize]).collect() },
            other => other,
        };
        let causal = causal.transitive_closure().map_err(named)?;
        let chrono = chrono.transitive_closure().map_err(named)?;
        if !chrono.is_subset(&causal) {
            let (i, j) = chrono.pairs().find(|&(i, j)| !causal.get(i, j)).expect("non-subset has a witness");
            return Err(Error::InvalidSpace(format!(
                "chronological pair ({}, {}) is not causal",
                ids[i], ids[j]
            )));
        }
        let order = causal.topo_order()?;
        if order.iter().enumerate().all(|(k, &i)| k == i) {
            return Ok(Self::assemble(ids, weights, coords, causal, chrono));
        }
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let permute = |r: &Relation| {
            let mut out = Relation::new(n);
            for (i, j) in r.pairs() {
                out.insert(pos[i], pos[j]);
            }
            out
        };
        let ids2 = order.iter().map(|&i| ids[i]).collect();
        let w2 = order.iter().map(|&i| weights[i]).collect();
        let c2 = coords.map(|c| order.iter().map(|&i| c[i].clone()).collect());
        Ok(Self::assemble(ids2, w2, c2, permute(&causal), permute(&chrono)))
    }

    /// Assembles a space whose relations are already closed, consistent and
    /// naturally labelled.
    pub(crate) fn assemble(
        ids: Vec<u64>,
        weights: Vec<f64>,
        coords: Option<Vec<EventCoords>>,
        causal: Relation,
        chrono: Relation,
    ) -> Self {
        let uniform_weight = match weights.first() {
            Some(&w0) if weights.iter().all(|&w| w == w0) => Some(w0),
            _ => None,
        };
        let causal_past = causal.transpose();
        let chrono_past = chrono.transpose();
        Self { ids, weights, coords, causal, causal_past, chrono, chrono_past, uniform_weight }
    }

    /// Convenience constructor from index pairs with default ids `0..n`.
    pub fn from_pairs(
        weights: Vec<f64>,
        causal: &[(usize, usize)],
        chrono: &[(usize, usize)],
    ) -> Result<Self> {
        let n = weights.len();
        Self::new(
            (0..n as u64).collect(),
            weights,
            None,
            Relation::from_pairs(n, causal.iter().copied())?,
            Relation::from_pairs(n, chrono.iter().copied())?,
        )
    }

    /// Unit-weight space where both relations are the closure of `pairs`.
    pub fn unit_poset(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::from_pairs(vec![1.0; n], pairs, pairs)
    }

    /// Unit-weight chain `0 < 1 < ... < n-1` in both relations.
    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::unit_poset(n, &pairs).expect("a chain is a partial order")
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// The common weight when all points carry the same mass.
    pub fn uniform_weight(&self) -> Option<f64> {
        self.uniform_weight
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn coords(&self) -> Option<&[EventCoords]> {
        self.coords.as_deref()
    }

    /// Copy with every weight multiplied by `lambda`.
    pub fn scaled_weights(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight scale must be positive, got {lambda}")));
        }
        let weights = self.weights.iter().map(|w| w * lambda).collect();
        Ok(Self::assemble(self.ids.clone(), weights, self.coords.clone(), self.causal.clone(), self.chrono.clone()))
    }

    /// Copy with replaced weights (same length).
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.ids.clone(), weights, self.coords.clone(), self.causal.clone(), self.chrono.clone())
    }

    /// Strict causal relation `<`.
    pub fn causal(&self) -> &Relation {
        &self.causal
    }

    pub fn chrono(&self) -> &Relation {
        &self.chrono
    }

    pub fn relation(&self, mode: OrderMode) -> &Relation {
        match mode {
            OrderMode::Causal => &self.causal,
            OrderMode::Chrono => &self.chrono,
        }
    }

    fn past_relation(&self, mode: OrderMode) -> &Relation {
        match mode {
            OrderMode::Causal => &self.causal_past,
            OrderMode::Chrono => &self.chrono_past,
        }
    }

    /// Strict precedence `i < j` (causal) or `i << j` (chrono).
    #[inline]
    pub fn precedes(&self, i: usize, j: usize, mode: OrderMode) -> bool {
        self.relation(mode).get(i, j)
    }

    /// `i <= j`, reflexive.
    #[inline]
    pub fn causal_le(&self, i: usize, j: usize) -> bool {
        i == j || self.causal.get(i, j)
    }

    /// Raw words of the strict future row of `i`.
    #[inline]
    pub fn future_words(&self, i: usize, mode: OrderMode) -> &[u64] {
        self.relation(mode).row(i)
    }

    /// Raw words of the strict past row of `i`.
    #[inline]
    pub fn past_words(&self, i: usize, mode: OrderMode) -> &[u64] {
        self.past_relation(mode).row(i)
    }

    /// `I^-(p)` for chrono, `J^-(p)` (including `p`) for causal.
    pub fn past_of(&self, p: usize, mode: OrderMode) -> BitSet {
        let mut s = BitSet::from_words(self.len(), self.past_words(p, mode));
        if mode == OrderMode::Causal {
            s.insert(p);
        }
        s
    }

    /// `I^+(p)` for chrono, `J^+(p)` (including `p`) for causal.
    pub fn future_of(&self, p: usize, mode: OrderMode) -> BitSet {
        let mut s = BitSet::from_words(self.len(), self.future_words(p, mode));
        if mode == OrderMode::Causal {
            s.insert(p);
        }
        s
    }

    /// `J^+(p) ∩ J^-(q)` (causal, closed) or `I^+(p) ∩ I^-(q)` (chrono).
    pub fn diamond(&self, p: usize, q: usize, mode: OrderMode) -> BitSet {
        let mut s = self.future_of(p, mode);
        s.intersect_with(self.past_of(q, mode).words());
        s
    }

    /// Number of points strictly between `p` and `q` in the causal order.
    #[inline]
    pub fn interior_count(&self, p: usize, q: usize) -> usize {
        and_count(self.causal.row(p), self.causal_past.row(q))
    }

    /// Weight of the open causal interior of `J(p, q)`.
    pub fn interior_volume(&self, p: usize, q: usize) -> f64 {
        match self.uniform_weight {
            Some(w) => self.interior_count(p, q) as f64 * w,
            None => {
                let (a, b) = (self.causal.row(p), self.causal_past.row(q));
                let mut s = 0.0;
                for (k, (x, y)) in a.iter().zip(b).enumerate() {
                    let mut m = x & y;
                    while m != 0 {
                        s += self.weights[k * 64 + m.trailing_zeros() as usize];
                        m &= m - 1;
                    }
                }
                s
            }
        }
    }

    /// Sum of weights over a point set, in index order.
    pub fn vol_of(&self, set: &BitSet) -> f64 {
        set.iter().map(|i| self.weights[i]).sum()
    }

    /// Sum of weights over the set bits of raw words, in index order.
    pub fn vol_of_words(&self, words: &[u64]) -> f64 {
        ones(words).map(|i| self.weights[i]).sum()
    }

    /// Pairs `(x, y)`, `x != y`, with `I^-(x) ⊆ I^-(y)`.
    pub fn induce_alpha(&self) -> InducedAlpha {
        let n = self.len();
        let rows: Vec<(Vec<usize>, Vec<usize>)> = (0..n)
            .into_par_iter()
            .map(|x| {
                let px = self.chrono_past.row(x);
                let mut sub = Vec::new();
                let mut eq = Vec::new();
                for y in 0..n {
                    if y == x {
                        continue;
                    }
                    let py = self.chrono_past.row(y);
                    if px.iter().zip(py).all(|(a, b)| a & !b == 0) {
                        sub.push(y);
                        if px == py {
                            eq.push(y);
                        }
                    }
                }
                (sub, eq)
            })
            .collect();
        let mut relation = Relation::new(n);
        let mut equal_pasts = Relation::new(n);
        for (x, (sub, eq)) in rows.into_iter().enumerate() {
            for y in sub {
                relation.insert(x, y);
            }
            for y in eq {
                equal_pasts.insert(x, y);
            }
        }
        InducedAlpha { relation, equal_pasts }
    }

    /// Whether the closed causal diamond `J(u, v)` contains an incomparable pair.
    pub fn diamond_is_totally_ordered(&self, u: usize, v: usize) -> bool {
        let inner: Vec<usize> = ones(self.causal.row(u)).filter(|&w| self.causal_past.get(v, w)).collect();
        inner.iter().enumerate().all(|(k, &a)| inner[k + 1..].iter().all(|&b| self.causal.get(a, b) || self.causal.get(b, a)))
    }

    /// `{(x, y) : exists u, v with x < u < v < y and J(u, v) not totally ordered}`.
    pub fn induce_beta(&self) -> Relation {
        let n = self.len();
        // G[u] = union of strict futures of all v with a non-chain diamond J(u, v).
        let g: Vec<BitSet> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut acc = BitSet::new(n);
                for v in ones(self.causal.row(u)) {
                    if acc.contains(v) {
                        // Every point above v is already included.
                        continue;
                    }
                    if !self.diamond_is_totally_ordered(u, v) {
                        acc.union_with(self.causal.row(v));
                    }
                }
                acc
            })
            .collect();
        let rows: Vec<BitSet> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut acc = BitSet::new(n);
                for u in ones(self.causal.row(x)) {
                    acc.union_with(g[u].words());
                }
                acc
            })
            .collect();
        let mut out = Relation::new(n);
        for (x, row) in rows.iter().enumerate() {
            for y in row.iter() {
                out.insert(x, y);
            }
        }
        out
    }

    /// `t(x) = sum_j sigma(p_j, x) - sum_k sigma(x, q_k)`.
    pub fn time_function(&self, lower: &[usize], upper: &[usize], sigma: &SigmaMatrix) -> Result<Vec<f64>> {
        self.check_sigma(sigma)?;
        Ok((0..self.len())
            .map(|x| {
                let a: f64 = lower.iter().map(|&p| sigma.get(p, x)).sum();
                let b: f64 = upper.iter().map(|&q| sigma.get(x, q)).sum();
                a - b
            })
            .collect())
    }

    /// `min_a max_b |sigma(a, b)|`; zero for spaces with fewer than two points.
    pub fn thickness(&self, sigma: &SigmaMatrix) -> Result<f64> {
        self.check_sigma(sigma)?;
        let n = self.len();
        if n == 0 {
            return Ok(0.0);
        }
        Ok((0..n)
            .map(|a| (0..n).map(|b| sigma.get(a, b).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min))
    }

    /// Checks antisymmetry, the conditional inverse triangle inequality, and
    /// `sigma > 0 <=> <<`.
    pub fn validate_alp(&self, sigma: &SigmaMatrix) -> Result<AlpReport> {
        self.check_sigma(sigma)?;
        let n = self.len();
        let mut report = AlpReport::default();
        for i in 0..n {
            for j in i..n {
                let (a, b) = (sigma.get(i, j), sigma.get(j, i));
                if a != -b {
                    report.antisymmetry_count += 1;
                    push_capped(&mut report.antisymmetry, (i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && (sigma.get(i, j) > 0.0) != self.chrono.get(i, j) {
                    report.consistency_count += 1;
                    push_capped(&mut report.consistency, (i, j));
                }
            }
        }
        let per_x: Vec<(usize, Vec<(usize, usize, usize)>)> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut count = 0;
                let mut bad = Vec::new();
                let row_x = sigma.row(x);
                for y in 0..n {
                    let sxy = row_x[y];
                    if sxy <= 0.0 {
                        continue;
                    }
                    let row_y = sigma.row(y);
                    for z in 0..n {
                        let syz = row_y[z];
                        if syz > 0.0 && row_x[z] < sxy + syz {
                            count += 1;
                            push_capped(&mut bad, (x, y, z));
                        }
                    }
                }
                (count, bad)
            })
            .collect();
        for (c, bad) in per_x {
            report.triangle_count += c;
            for t in bad {
                push_capped(&mut report.triangle, t);
            }
        }
        Ok(report)
    }

    fn check_sigma(&self, sigma: &SigmaMatrix) -> Result<()> {
        if sigma.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "sigma is {}x{}, space has {} points",
                sigma.len(),
                sigma.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Past-set closure `I^-(S) ∪ S` under the chronological order.
    pub fn chrono_down_closure(&self, set: &BitSet) -> BitSet {
        let mut out = set.clone();
        for s in set.iter() {
            out.union_with(self.chrono_past.row(s));
        }
        out
    }

    /// `I^-(S) = ∪_{s ∈ S} I^-(s)`.
    pub fn chrono_past_of_set(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.len());
        for s in set.iter() {
            out.union_with(self.chrono_past.row(s));
        }
        out
    }
}

pub(crate) const REPORT_CAP: usize = 100;

fn push_capped<T>(v: &mut Vec<T>, x: T) {
    if v.len() < REPORT_CAP {
        v.push(x);
    }
}

/// Output of [`OrderedMeasureSpace::induce_alpha`].
#[derive(Clone, Debug, PartialEq)]
pub struct InducedAlpha {
    /// All `x != y` with `I^-(x) ⊆ I^-(y)`.
    pub relation: Relation,
    /// The subset with `I^-(x) = I^-(y)` (symmetric; breaks antisymmetry).
    pub equal_pasts: Relation,
}

impl InducedAlpha {
    pub fn is_strict(&self, x: usize, y: usize) -> bool {
        self.relation.get(x, y) && !self.equal_pasts.get(x, y)
    }
}

/// Result of [`OrderedMeasureSpace::validate_alp`]. Lists hold at most 100
/// counterexamples each; the counts are exact.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AlpReport {
    pub antisymmetry_count: usize,
    pub antisymmetry: Vec<(usize, usize)>,
    pub triangle_count: usize,
    pub triangle: Vec<(usize, usize, usize)>,
    pub consistency_count: usize,
    pub consistency: Vec<(usize, usize)>,
}

impl AlpReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry_count == 0 && self.triangle_count == 0 && self.consistency_count == 0
    }

    /// Passes on antisymmetry and the inverse triangle inequality.
    pub fn passed_structural(&self) -> bool {
        self.antisymmetry_count == 0 && self.triangle_count == 0
    }
}

/// A subset that is down-closed under the chronological order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PastSet {
    members: BitSet,
}

impl PastSet {
    pub fn new(space: &OrderedMeasureSpace, members: BitSet) -> Result<Self> {
        if members.len() != space.len() {
            return Err(Error::ShapeMismatch("past set over a different point count".into()));
        }
        if !is_down_closed(space, &members, OrderMode::Chrono) {
            return Err(Error::InvalidArgument("set is not down-closed under <<".into()));
        }
        Ok(Self { members })
    }

    pub(crate) fn new_unchecked(members: BitSet) -> Self {
        Self { members }
    }

    /// `{p} ∪ I^-(p)`.
    pub fn principal(space: &OrderedMeasureSpace, p: usize) -> Self {
        let mut m = space.past_of(p, OrderMode::Chrono);
        m.insert(p);
        Self { members: m }
    }

    /// `I^-(p)`.
    pub fn strict_past(space: &OrderedMeasureSpace, p: usize) -> Self {
        Self { members: space.past_of(p, OrderMode::Chrono) }
    }

    pub fn empty(n: usize) -> Self {
        Self { members: BitSet::new(n) }
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn into_members(self) -> BitSet {
        self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    /// Sorted caller ids of the members.
    pub fn ids(&self, space: &OrderedMeasureSpace) -> Vec<u64> {
        let mut v: Vec<u64> = self.members.iter().map(|i| space.id(i)).collect();
        v.sort_unstable();
        v
    }
}

/// Whether `set` is down-closed under the given strict order.
pub fn is_down_closed(space: &OrderedMeasureSpace, set: &BitSet, mode: OrderMode) -> bool {
    set.iter().all(|q| {
        space.past_words(q, mode).iter().zip(set.words()).all(|(p, s)| p & !s == 0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SigmaSource;
    use proptest::prelude::*;

    fn chain3_sigma() -> SigmaMatrix {
        SigmaMatrix::from_upper(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)], SigmaSource::User).unwrap()
    }

    #[test]
    fn pasts_and_futures_on_chain() {
        let x = OrderedMeasureSpace::chain(3);
        assert_eq!(x.past_of(2, OrderMode::Chrono).to_vec(), vec![0, 1]);
        assert!(x.past_of(0, OrderMode::Chrono).is_empty());
        assert_eq!(x.past_of(1, OrderMode::Causal).to_vec(), vec![0, 1]);
        assert_eq!(x.future_of(0, OrderMode::Causal).to_vec(), vec![0, 1, 2]);
    }

    #[test]
    fn diamond_examples() {
        let x = OrderedMeasureSpace::chain(3);
        assert_eq!(x.diamond(0, 2, OrderMode::Causal).to_vec(), vec![0, 1, 2]);
        assert!(x.diamond(2, 0, OrderMode::Causal).is_empty());
        assert_eq!(x.interior_count(0, 2), 1);
        assert_eq!(x.interior_count(0, 0), 0);
        let anti = OrderedMeasureSpace::unit_poset(2, &[]).unwrap();
        assert!(anti.diamond(0, 1, OrderMode::Causal).is_empty());
    }

    #[test]
    fn relabels_into_linear_extension() {
        let x = OrderedMeasureSpace::new(
            vec![10, 20, 30],
            vec![1.0; 3],
            None,
            Relation::from_pairs(3, [(2, 1), (1, 0)]).unwrap(),
            Relation::from_pairs(3, [(2, 1), (1, 0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(x.ids(), &[30, 20, 10]);
        assert!(x.precedes(0, 2, OrderMode::Causal));
    }

    #[test]
    fn rejects_bad_input() {
        let r = Relation::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        match OrderedMeasureSpace::new(vec![7, 9], vec![1.0; 2], None, r.clone(), Relation::new(2)) {
            Err(Error::NotPartialOrder { cycle }) => assert_eq!(cycle, vec![7, 9]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            OrderedMeasureSpace::new(vec![1, 1], vec![1.0; 2], None, Relation::new(2), Relation::new(2)),
            Err(Error::DuplicateId(1))
        ));
        assert!(OrderedMeasureSpace::from_pairs(vec![1.0, -1.0], &[], &[]).is_err());
        assert!(OrderedMeasureSpace::from_pairs(vec![1.0, 1.0], &[], &[(0, 1)]).is_err());
    }

    #[test]
    fn alpha_examples() {
        let x = OrderedMeasureSpace::chain(3);
        let a = x.induce_alpha();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(a.is_strict(i, j));
        }
        let anti = OrderedMeasureSpace::unit_poset(2, &[]).unwrap();
        let a = anti.induce_alpha();
        assert!(a.relation.get(0, 1) && a.relation.get(1, 0));
        assert!(!a.is_strict(0, 1));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(OrderedMeasureSpace::chain(6).induce_beta().pair_count(), 0);
        // x=0 < u=1 < {2, 3} < v=4 < y=5 with 2, 3 incomparable.
        let pairs = [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 5)];
        let x = OrderedMeasureSpace::unit_poset(6, &pairs).unwrap();
        let b = x.induce_beta();
        assert!(b.get(0, 5));
        assert!(!b.get(1, 4));
        assert!(b.is_subset(x.causal()));
        // Direct enumeration of the definition.
        for i in 0..6 {
            for j in 0..6 {
                let direct = (0..6).any(|u| {
                    (0..6).any(|v| {
                        x.precedes(i, u, OrderMode::Causal)
                            && x.precedes(u, v, OrderMode::Causal)
                            && x.precedes(v, j, OrderMode::Causal)
                            && !x.diamond_is_totally_ordered(u, v)
                    })
                });
                assert_eq!(direct, b.get(i, j), "({i}, {j})");
            }
        }
    }

    #[test]
    fn time_function_on_chain() {
        let x = OrderedMeasureSpace::chain(3);
        let s = chain3_sigma();
        assert_eq!(x.time_function(&[0], &[2], &s).unwrap(), vec![-2.0, 0.0, 2.0]);
        assert_eq!(x.time_function(&[], &[], &s).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn thickness_examples() {
        let x = OrderedMeasureSpace::chain(3);
        assert_eq!(x.thickness(&chain3_sigma()).unwrap(), 1.0);
        let one = OrderedMeasureSpace::chain(1);
        assert_eq!(one.thickness(&SigmaMatrix::zeros(1, SigmaSource::User)).unwrap(), 0.0);
        let anti = OrderedMeasureSpace::unit_poset(2, &[]).unwrap();
        assert_eq!(anti.thickness(&SigmaMatrix::zeros(2, SigmaSource::User)).unwrap(), 0.0);
    }

    #[test]
    fn validate_alp_examples() {
        let x = OrderedMeasureSpace::chain(3);
        assert!(x.validate_alp(&chain3_sigma()).unwrap().passed());
        let bad = SigmaMatrix::from_upper(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], SigmaSource::User).unwrap();
        let r = x.validate_alp(&bad).unwrap();
        assert_eq!(r.triangle, vec![(0, 1, 2)]);
        let empty = OrderedMeasureSpace::chain(0);
        assert!(empty.validate_alp(&SigmaMatrix::zeros(0, SigmaSource::User)).unwrap().passed());
    }

    #[test]
    fn past_sets() {
        let x = OrderedMeasureSpace::chain(3);
        assert!(PastSet::new(&x, BitSet::from_indices(3, [2])).is_err());
        assert!(PastSet::new(&x, BitSet::new(3)).is_ok());
        assert_eq!(PastSet::principal(&x, 1).ids(&x), vec![0, 1]);
    }

    fn arb_poset(max_n: usize) -> impl Strategy<Value = OrderedMeasureSpace> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
                let pairs: Vec<_> = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| bits[i * n + j])
                    .collect();
                OrderedMeasureSpace::unit_poset(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn diamond_is_future_cap_past(x in arb_poset(10)) {
            for p in 0..x.len() {
                for q in 0..x.len() {
                    for mode in [OrderMode::Causal, OrderMode::Chrono] {
                        let mut want = x.future_of(p, mode);
                        want.intersect_with(x.past_of(q, mode).words());
                        prop_assert_eq!(x.diamond(p, q, mode), want);
                    }
                }
            }
        }

        #[test]
        fn alpha_contains_chrono(x in arb_poset(10)) {
            prop_assert!(x.chrono().is_subset(&x.induce_alpha().relation));
        }

        #[test]
        fn beta_inside_causal(x in arb_poset(10)) {
            prop_assert!(x.induce_beta().is_subset(x.causal()));
        }

        #[test]
        fn thickness_is_relabel_invariant(n in 1usize..8, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut rng = crate::rng::stream(seed, 0);
            let vals: Vec<f64> = (0..n * n).map(|k| ((k * 7 + seed as usize) % 11) as f64).collect();
            let s = SigmaMatrix::from_fn(n, SigmaSource::User, |i, j| if i < j { vals[i * n + j] } else { -vals[j * n + i] });
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let t = SigmaMatrix::from_fn(n, SigmaSource::User, |i, j| s.get(perm[i], perm[j]));
            let x = OrderedMeasureSpace::unit_poset(n, &[]).unwrap();
            prop_assert_eq!(x.thickness(&s).unwrap(), x.thickness(&t).unwrap());
        }
    }
}
