//! Past-set algebra on finite ordered measure spaces: indecomposable past
//! sets, set-theoretic limits of sequences and the limit operators `L-`, `L+`.
//!
//! In a finite space every indecomposable past set is the down-closure of a
//! single point, so there are no ideal boundary points; only the limit
//! operator calculus survives.
//!
//! Past sets are down-closed under `<<` by default. [`OrderMode::Causal`] gives
//! the variant built on causal down-sets, where the principal past of `p` is
//! `J^-(p)`.

use serde::Serialize;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::omspace::{is_down_closed, OrderMode, OrderedMeasureSpace, PastSet};

/// Whether `set` is down-closed under `<<`.
pub fn is_past_set(space: &OrderedMeasureSpace, set: &BitSet) -> bool {
    set.len() == space.len() && is_down_closed(space, set, OrderMode::Chrono)
}

/// The down-closure of `p`: `{p} ∪ I^-(p)` in chrono mode, `J^-(p)` in causal mode.
pub fn principal(space: &OrderedMeasureSpace, p: usize, mode: OrderMode) -> PastSet {
    match mode {
        OrderMode::Chrono => PastSet::principal(space, p),
        OrderMode::Causal => PastSet::new_unchecked(space.past_of(p, OrderMode::Causal)),
    }
}

/// Points of `set` with no strict successor inside `set`.
pub fn maximal_points(space: &OrderedMeasureSpace, set: &BitSet, mode: OrderMode) -> Vec<usize> {
    set.iter()
        .filter(|&x| !space.future_words(x, mode).iter().zip(set.words()).any(|(f, s)| f & s != 0))
        .collect()
}

/// Whether `s` cannot be written as a union of two proper past subsets.
///
/// Finite characterization: `s` has exactly one maximal point.
pub fn is_indecomposable(space: &OrderedMeasureSpace, s: &PastSet, mode: OrderMode) -> Result<bool> {
    if s.is_empty() {
        return Err(Error::EmptySet("indecomposable past sets are non-empty"));
    }
    if mode == OrderMode::Causal && !is_down_closed(space, s.members(), OrderMode::Causal) {
        return Err(Error::InvalidArgument("set is not down-closed under <=".into()));
    }
    Ok(maximal_points(space, s.members(), mode).len() == 1)
}

/// Brute-force check of the union-split definition over all pairs of
/// down-closed subsets. Exponential in `|s|`.
pub fn is_indecomposable_brute_force(space: &OrderedMeasureSpace, s: &PastSet, mode: OrderMode) -> Result<bool> {
    if s.is_empty() {
        return Err(Error::EmptySet("indecomposable past sets are non-empty"));
    }
    let members = s.members().to_vec();
    if members.len() > 20 {
        return Err(Error::InvalidArgument("brute force is limited to 20 points".into()));
    }
    let full = (1u32 << members.len()) - 1;
    let subset = |mask: u32| {
        BitSet::from_indices(space.len(), members.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &x)| x))
    };
    let proper: Vec<u32> = (0..full).filter(|&m| is_down_closed(space, &subset(m), mode)).collect();
    for (i, &a) in proper.iter().enumerate() {
        if proper[i..].iter().any(|&b| a | b == full) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An eventually periodic sequence `prefix, cycle, cycle, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetSequence {
    prefix: Vec<PastSet>,
    cycle: Vec<PastSet>,
}

impl SetSequence {
    pub fn new(space: &OrderedMeasureSpace, prefix: Vec<PastSet>, cycle: Vec<PastSet>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::EmptySet("sequence cycle"));
        }
        for s in prefix.iter().chain(&cycle) {
            if !is_past_set(space, s.members()) {
                return Err(Error::InvalidArgument("sequence term is not a past set of this space".into()));
            }
        }
        Ok(Self { prefix, cycle })
    }

    pub fn constant(space: &OrderedMeasureSpace, p: PastSet) -> Result<Self> {
        Self::new(space, Vec::new(), vec![p])
    }

    pub fn prefix(&self) -> &[PastSet] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[PastSet] {
        &self.cycle
    }

    /// Term `k` (0-based).
    pub fn term(&self, k: usize) -> &PastSet {
        if k < self.prefix.len() {
            &self.prefix[k]
        } else {
            &self.cycle[(k - self.prefix.len()) % self.cycle.len()]
        }
    }

    fn universe(&self) -> usize {
        self.cycle[0].members().len()
    }
}

/// `(liminf, limsup)`: intersection and union over the cycle.
pub fn liminf_limsup(seq: &SetSequence) -> (BitSet, BitSet) {
    let n = seq.universe();
    let mut inf = BitSet::full(n);
    let mut sup = BitSet::new(n);
    for s in &seq.cycle {
        inf.intersect_with(s.members().words());
        sup.union_with(s.members().words());
    }
    (inf, sup)
}

/// Strict past `I^-(S)` of a set in the chosen mode.
fn strict_past_of_set(space: &OrderedMeasureSpace, set: &BitSet, mode: OrderMode) -> BitSet {
    let mut out = BitSet::new(space.len());
    for s in set.iter() {
        out.union_with(strict_past(space, s, mode).words());
    }
    out
}

fn strict_past(space: &OrderedMeasureSpace, p: usize, mode: OrderMode) -> BitSet {
    let mut past = space.past_of(p, mode);
    past.remove(p);
    past
}

/// `L-(a)`: non-empty indecomposable past sets inside `liminf` that are maximal
/// among the indecomposable past subsets of `limsup`.
///
/// These are the principal pasts of points that are maximal in `limsup` and lie
/// in `liminf`. Sorted by point index.
pub fn l_minus(space: &OrderedMeasureSpace, seq: &SetSequence, mode: OrderMode) -> Vec<PastSet> {
    let (inf, sup) = liminf_limsup(seq);
    maximal_points(space, &sup, mode)
        .into_iter()
        .filter(|&p| inf.contains(p))
        .map(|p| principal(space, p, mode))
        .collect()
}

/// `L+(a)`: indecomposable past sets `P` with `I^-(liminf) = I^-(limsup) = I^-(P)`.
/// Sorted by generating point index.
pub fn l_plus(space: &OrderedMeasureSpace, seq: &SetSequence, mode: OrderMode) -> Vec<PastSet> {
    let (inf, sup) = liminf_limsup(seq);
    let target = strict_past_of_set(space, &inf, mode);
    if strict_past_of_set(space, &sup, mode) != target {
        return Vec::new();
    }
    (0..space.len())
        .filter(|&p| strict_past(space, p, mode) == target)
        .map(|p| principal(space, p, mode))
        .collect()
}

/// `Vol(A △ B)`.
pub fn beem_distance(space: &OrderedMeasureSpace, a: &BitSet, b: &BitSet) -> f64 {
    a.words()
        .iter()
        .zip(b.words())
        .enumerate()
        .map(|(k, (x, y))| crate::bits::ones(&[x ^ y]).map(|bit| space.weight(k * 64 + bit)).sum::<f64>())
        .sum::<f64>()
        + 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    /// Sorted member ids of each element of `L-`.
    pub l_minus: Vec<Vec<u64>>,
    pub l_plus: Vec<Vec<u64>>,
    /// Whether `L+ ⊆ L-` holds on this instance.
    pub plus_in_minus: bool,
    /// Whether the inclusion is strict.
    pub strict: bool,
    /// For each element of `L+`, Beem distances from the first
    /// `prefix + 2 * cycle` terms of the sequence.
    pub distances: Vec<Vec<f64>>,
    /// Whether each distance series is non-increasing.
    pub non_increasing: Vec<bool>,
}

/// Computes both limit sets, the inclusion `L+ ⊆ L-` and the Beem distances of
/// the sequence terms to each element of `L+`. Counterexamples to the
/// inclusion are reported, not suppressed.
pub fn tau_plus_convergence_demo(space: &OrderedMeasureSpace, seq: &SetSequence, mode: OrderMode) -> LimitReport {
    let lm = l_minus(space, seq, mode);
    let lp = l_plus(space, seq, mode);
    let plus_in_minus = lp.iter().all(|p| lm.contains(p));
    let horizon = seq.prefix.len() + 2 * seq.cycle.len();
    let distances: Vec<Vec<f64>> = lp
        .iter()
        .map(|p| (0..horizon).map(|k| beem_distance(space, seq.term(k).members(), p.members())).collect())
        .collect();
    let non_increasing = distances
        .iter()
        .map(|d| d.windows(2).all(|w| w[1] <= w[0]))
        .collect();
    LimitReport {
        l_minus: lm.iter().map(|p| p.ids(space)).collect(),
        l_plus: lp.iter().map(|p| p.ids(space)).collect(),
        plus_in_minus,
        strict: plus_in_minus && lp.len() < lm.len(),
        distances,
        non_increasing,
    }
}

/// Six points where `L+` is a strict, non-empty subset of `L-`.
///
/// Order: `x1 << p`, `x2 << p`, `x1 << r`, `x2 << s`, and `t` above `p, r, s`.
/// The sequence alternates `D(p) ∪ D(r) ∪ D(s)` and `D(p) ∪ D(r)`, so
/// `liminf ≠ limsup` while both have strict past `{x1, x2} = I^-(p)`. Returns the
/// space (ids 0..6 = x1, x2, p, r, s, t) and the sequence.
pub fn strict_inclusion_witness() -> (OrderedMeasureSpace, SetSequence) {
    let pairs = [(0, 2), (1, 2), (0, 3), (1, 4), (2, 5), (3, 5), (4, 5), (0, 5), (1, 5)];
    let space = OrderedMeasureSpace::unit_poset(6, &pairs).expect("witness is a valid poset");
    let idx = |id: u64| space.index_of(id).expect("witness id");
    let set = |ids: &[u64]| PastSet::new(&space, BitSet::from_indices(6, ids.iter().map(|&i| idx(i)))).expect("witness past set");
    let a = set(&[0, 1, 2, 3, 4]);
    let b = set(&[0, 1, 2, 3]);
    let seq = SetSequence::new(&space, vec![], vec![a, b]).expect("witness sequence");
    (space, seq)
}
