//! Lorentzian Hausdorff measure with causal diamonds as covering sets.
//!
//! Every reported number is the cost of a concrete cover that has been
//! checked for membership and diameter, i.e. a certified upper bound on
//! `mu_{N, delta}`. Exact tilings are available for 2D flat regions given in
//! null coordinates `u = t + x`, `v = t - x`, where diamonds are rectangles with
//! `sigma^2 = du * dv` and area `du * dv / 2`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bits::{ones, BitSet};
use crate::error::{Error, Result};
use crate::metrics::SigmaMatrix;
use crate::model::EventCoords;
use crate::omspace::{OrderMode, OrderedMeasureSpace};

/// `omega(N) = pi^{(N-1)/2} / (N Gamma((N+1)/2) 2^{N-1})`, so that
/// `omega(N) sigma^N` is the volume of an `N`-dimensional flat diamond.
///
/// Integer arguments use closed forms without `Gamma`.
pub fn omega(n: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega needs N > 0, got {n}")));
    }
    if n.fract() == 0.0 && n <= 60.0 {
        let k = n as u32;
        let two_pow = 2f64.powi(k as i32 - 1);
        let factorial = |m: u32| (1..=m).map(f64::from).product::<f64>();
        return Ok(if k % 2 == 1 {
            let m = (k - 1) / 2;
            PI.powi(m as i32) / (n * factorial(m) * two_pow)
        } else {
            let m = k / 2;
            PI.powi(m as i32 - 1) * 4f64.powi(m as i32) * factorial(m) / (n * factorial(2 * m) * two_pow)
        });
    }
    Ok(PI.powf((n - 1.0) / 2.0) / (n * gamma((n + 1.0) / 2.0) * 2f64.powf(n - 1.0)))
}

/// Slack for coordinate membership tests in null coordinates.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// Axis-aligned rectangle `[u0, u1] x [v0, v1]` in 2D null coordinates; the
/// causal diamond between its bottom and top corners.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullRect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl NullRect {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Result<Self> {
        if !(u1 > u0 && v1 > v0) || ![u0, u1, v0, v1].iter().all(|x| x.is_finite()) {
            return Err(Error::NonTileable(format!("degenerate null rectangle [{u0}, {u1}] x [{v0}, {v1}]")));
        }
        Ok(Self { u0, u1, v0, v1 })
    }

    /// The diamond `J(p, q)` of two 2D events.
    pub fn from_diamond(p: &EventCoords, q: &EventCoords) -> Result<Self> {
        if p.dim() != 2 || q.dim() != 2 {
            return Err(Error::NonTileable("null rectangles need 2D events".into()));
        }
        Self::new(p.time() + p.space()[0], q.time() + q.space()[0], p.time() - p.space()[0], q.time() - q.space()[0])
    }

    /// `J((0, 0), (1, 0))`.
    pub fn unit_diamond() -> Self {
        Self { u0: 0.0, u1: 1.0, v0: 0.0, v1: 1.0 }
    }

    pub fn sigma(&self) -> f64 {
        ((self.u1 - self.u0) * (self.v1 - self.v0)).sqrt()
    }

    pub fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0) / 2.0
    }

    pub fn bottom(&self) -> EventCoords {
        EventCoords(vec![0.5 * (self.u0 + self.v0), 0.5 * (self.u0 - self.v0)])
    }

    pub fn top(&self) -> EventCoords {
        EventCoords(vec![0.5 * (self.u1 + self.v1), 0.5 * (self.u1 - self.v1)])
    }

    pub fn contains(&self, c: &EventCoords) -> bool {
        let (u, v) = (c.time() + c.space()[0], c.time() - c.space()[0]);
        u >= self.u0 - MEMBERSHIP_TOL
            && u <= self.u1 + MEMBERSHIP_TOL
            && v >= self.v0 - MEMBERSHIP_TOL
            && v <= self.v1 + MEMBERSHIP_TOL
    }

    fn contains_uv(&self, u: f64, v: f64) -> bool {
        u >= self.u0 && u <= self.u1 && v >= self.v0 && v <= self.v1
    }
}

/// One covering set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverElement {
    /// `J(p, q)` over sample points.
    Sample { p: usize, q: usize },
    /// A flat 2D diamond given by coordinates.
    Region { rect: NullRect },
    /// Degenerate `J(x, x)` with `sigma = 0`, used only when nothing else fits.
    Singleton { x: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMethod {
    Tiling,
    Greedy,
    GreedySeeded,
}

impl CoverMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoverMethod::Tiling => "tiling",
            CoverMethod::Greedy => "greedy",
            CoverMethod::GreedySeeded => "greedy_seeded",
        }
    }
}

/// How the diameter of a covering diamond is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiameterGauge {
    /// Local metric `d_{J(p,q)}(x, y) = max_{c in J} |sigma(x,c) - sigma(y,c)|`
    /// over the sample points inside the diamond.
    #[default]
    Noldus,
    /// `sigma(p, q)`.
    SigmaProxy,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoverTarget {
    /// Indices of sample points to cover.
    Points(BitSet),
    /// A continuum region.
    Region(NullRect),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiamondCover {
    pub target: CoverTarget,
    pub elements: Vec<CoverElement>,
    pub delta: f64,
    pub method: CoverMethod,
    pub gauge: DiameterGauge,
}

impl DiamondCover {
    /// Target points that fell back to singletons.
    pub fn fallback_points(&self) -> Vec<usize> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                CoverElement::Singleton { x } => Some(*x),
                _ => None,
            })
            .collect()
    }
}

/// What the cover's indices and coordinates refer to.
#[derive(Clone, Copy, Debug)]
pub enum Carrier<'a> {
    Continuum,
    Sample { space: &'a OrderedMeasureSpace, sigma: &'a SigmaMatrix },
}

fn element_sigma(e: &CoverElement, carrier: &Carrier) -> Result<f64> {
    match (e, carrier) {
        (CoverElement::Region { rect }, _) => Ok(rect.sigma()),
        (CoverElement::Sample { p, q }, Carrier::Sample { sigma, .. }) => Ok(sigma.get(*p, *q)),
        (CoverElement::Singleton { .. }, _) => Ok(0.0),
        (CoverElement::Sample { .. }, Carrier::Continuum) => {
            Err(Error::InvalidArgument("sample diamonds need a sample carrier".into()))
        }
    }
}

fn element_members(e: &CoverElement, space: &OrderedMeasureSpace) -> Result<BitSet> {
    Ok(match e {
        CoverElement::Sample { p, q } => space.diamond(*p, *q, OrderMode::Causal),
        CoverElement::Singleton { x } => BitSet::from_indices(space.len(), [*x]),
        CoverElement::Region { rect } => {
            let coords = space
                .coords()
                .ok_or_else(|| Error::InvalidArgument("region diamonds need sample coordinates".into()))?;
            BitSet::from_indices(space.len(), (0..space.len()).filter(|&i| rect.contains(&coords[i])))
        }
    })
}

/// `max_{x, y, c in S} |sigma(x, c) - sigma(y, c)|`.
fn noldus_diameter(sigma: &SigmaMatrix, members: &BitSet) -> f64 {
    let idx = members.to_vec();
    idx.iter()
        .map(|&c| {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                let s = sigma.get(x, c);
                (lo.min(s), hi.max(s))
            });
            if idx.is_empty() {
                0.0
            } else {
                hi - lo
            }
        })
        .fold(0.0, f64::max)
}

fn element_diameter(e: &CoverElement, carrier: &Carrier, gauge: DiameterGauge) -> Result<f64> {
    match (gauge, carrier) {
        (DiameterGauge::Noldus, Carrier::Sample { space, sigma }) => Ok(noldus_diameter(sigma, &element_members(e, space)?)),
        // On a flat continuum diamond the local metric diameter is sigma(p, q).
        _ => element_sigma(e, carrier),
    }
}

/// Checks membership and `diam < delta` for every element.
pub fn validate_cover(cover: &DiamondCover, carrier: &Carrier) -> Result<()> {
    if !(cover.delta > 0.0) {
        return Err(Error::InvalidArgument("cover delta must be positive".into()));
    }
    for (index, e) in cover.elements.iter().enumerate() {
        match (e, carrier) {
            (CoverElement::Sample { p, q }, Carrier::Sample { space, .. }) => {
                if *p >= space.len() || *q >= space.len() || !space.causal_le(*p, *q) {
                    return Err(Error::InvalidCover { index, reason: "q is not in the causal future of p".into() });
                }
            }
            (CoverElement::Singleton { x }, Carrier::Sample { space, .. }) if *x >= space.len() => {
                return Err(Error::InvalidCover { index, reason: "point out of range".into() });
            }
            (CoverElement::Sample { .. } | CoverElement::Singleton { .. }, Carrier::Continuum) => {
                return Err(Error::InvalidCover { index, reason: "sample element on a continuum carrier".into() });
            }
            _ => {}
        }
        let d = element_diameter(e, carrier, cover.gauge)?;
        if !(d < cover.delta) {
            return Err(Error::InvalidCover { index, reason: format!("diameter {d} is not below delta {}", cover.delta) });
        }
    }
    match (&cover.target, carrier) {
        (CoverTarget::Points(target), Carrier::Sample { space, .. }) => {
            let mut covered = BitSet::new(space.len());
            for e in &cover.elements {
                covered.union_with(element_members(e, space)?.words());
            }
            if let Some(x) = target.iter().find(|&x| !covered.contains(x)) {
                return Err(Error::InvalidCover {
                    index: cover.elements.len(),
                    reason: format!("target point {} is not covered", space.id(x)),
                });
            }
        }
        (CoverTarget::Region(rect), _) => region_covered(rect, &cover.elements)?,
        (CoverTarget::Points(_), Carrier::Continuum) => {
            return Err(Error::InvalidArgument("point targets need a sample carrier".into()));
        }
    }
    Ok(())
}

/// Every cell of the arrangement of element edges inside `target` must lie in
/// some element.
fn region_covered(target: &NullRect, elements: &[CoverElement]) -> Result<()> {
    let rects: Vec<&NullRect> = elements
        .iter()
        .filter_map(|e| match e {
            CoverElement::Region { rect } => Some(rect),
            _ => None,
        })
        .collect();
    let mut us = vec![target.u0, target.u1];
    let mut vs = vec![target.v0, target.v1];
    for r in &rects {
        us.extend([r.u0, r.u1].into_iter().filter(|&u| u > target.u0 && u < target.u1));
        vs.extend([r.v0, r.v1].into_iter().filter(|&v| v > target.v0 && v < target.v1));
    }
    us.sort_by(f64::total_cmp);
    us.dedup();
    vs.sort_by(f64::total_cmp);
    vs.dedup();
    for uw in us.windows(2) {
        for vw in vs.windows(2) {
            let (u, v) = (0.5 * (uw[0] + uw[1]), 0.5 * (vw[0] + vw[1]));
            if !rects.iter().any(|r| r.contains_uv(u, v)) {
                return Err(Error::InvalidCover {
                    index: elements.len(),
                    reason: format!("region point (u={u}, v={v}) is not covered"),
                });
            }
        }
    }
    Ok(())
}

/// `omega(N) * sum_k sigma_k^N` after validating the cover.
pub fn cover_cost(cover: &DiamondCover, carrier: &Carrier, n: f64) -> Result<f64> {
    validate_cover(cover, carrier)?;
    cost_unchecked(&cover.elements, carrier, n)
}

fn cost_unchecked(elements: &[CoverElement], carrier: &Carrier, n: f64) -> Result<f64> {
    let w = omega(n)?;
    let mut s = 0.0;
    for e in elements {
        let sg = element_sigma(e, carrier)?;
        if sg > 0.0 {
            s += if n == 2.0 { sg * sg } else { sg.powf(n) };
        }
    }
    Ok(w * s)
}

/// Partition of `a` into `cells x cells` congruent null rectangles.
///
/// The cover's `delta` is the next float above the tile `sigma`.
pub fn tile_cover_minkowski2(a: NullRect, cells: usize) -> Result<DiamondCover> {
    if cells == 0 {
        return Err(Error::NonTileable("need at least one cell per side".into()));
    }
    NullRect::new(a.u0, a.u1, a.v0, a.v1)?;
    let (du, dv) = ((a.u1 - a.u0) / cells as f64, (a.v1 - a.v0) / cells as f64);
    let mut elements = Vec::with_capacity(cells * cells);
    for i in 0..cells {
        for j in 0..cells {
            let u1 = if i + 1 == cells { a.u1 } else { a.u0 + (i + 1) as f64 * du };
            let v1 = if j + 1 == cells { a.v1 } else { a.v0 + (j + 1) as f64 * dv };
            let rect = NullRect { u0: a.u0 + i as f64 * du, u1, v0: a.v0 + j as f64 * dv, v1 };
            elements.push(CoverElement::Region { rect });
        }
    }
    let tile_sigma = elements
        .iter()
        .map(|e| match e {
            CoverElement::Region { rect } => rect.sigma(),
            _ => 0.0,
        })
        .fold(0.0, f64::max);
    Ok(DiamondCover {
        target: CoverTarget::Region(a),
        elements,
        delta: f64::from_bits(tile_sigma.to_bits() + 1),
        method: CoverMethod::Tiling,
        gauge: DiameterGauge::Noldus,
    })
}

/// Smallest tile count per side whose tiles have `sigma < delta`.
pub fn cells_for_delta(a: &NullRect, delta: f64) -> usize {
    (a.sigma() / delta).floor() as usize + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOptions {
    pub gauge: DiameterGauge,
    /// Candidates need `sigma >= min_sigma_fraction * delta`, so that covers
    /// operate at scale `delta` instead of pairing nearby points.
    pub min_sigma_fraction: f64,
    /// Elements accepted before the greedy loop starts.
    pub seed: Vec<CoverElement>,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self { gauge: DiameterGauge::Noldus, min_sigma_fraction: 0.5, seed: Vec::new() }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Score(f64);

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Greedy cover of sample points by diamonds `J(p, q)` with
/// `min_sigma_fraction * delta <= sigma(p, q) < delta`, picking at each step the
/// candidate with the most uncovered weight per unit `omega(N) sigma^N`.
///
/// Ties go to the lowest candidate index (pairs in lexicographic order).
/// Under the Noldus gauge a candidate whose local diameter reaches `delta` is
/// skipped when it comes up for acceptance.
/// Points no candidate reaches become `sigma = 0` singletons. The cover is
/// validated before it is returned.
pub fn greedy_cover(
    space: &OrderedMeasureSpace,
    target: &BitSet,
    delta: f64,
    sigma: &SigmaMatrix,
    n: f64,
    opts: &GreedyOptions,
) -> Result<DiamondCover> {
    if sigma.len() != space.len() || target.len() != space.len() {
        return Err(Error::ShapeMismatch("space, sigma and target differ in size".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let w_n = omega(n)?;
    let carrier = Carrier::Sample { space, sigma };
    let mut uncovered = target.clone();
    let mut elements = Vec::new();
    for e in &opts.seed {
        uncovered.difference_with(element_members(e, space)?.words());
        elements.push(e.clone());
    }
    let lo = opts.min_sigma_fraction * delta;
    let candidates: Vec<(usize, usize)> = (0..space.len())
        .into_par_iter()
        .flat_map_iter(|p| {
            ones(space.future_words(p, OrderMode::Causal))
                .filter(move |&q| {
                    let s = sigma.get(p, q);
                    s > 0.0 && s >= lo && s < delta
                })
                .map(move |q| (p, q))
                .collect::<Vec<_>>()
        })
        .collect();
    let fresh = |p: usize, q: usize, unc: &BitSet| -> f64 {
        let (f, b) = (space.future_words(p, OrderMode::Causal), space.past_words(q, OrderMode::Causal));
        let u = unc.words();
        let mut s = 0.0;
        for (k, ((x, y), z)) in f.iter().zip(b).zip(u).enumerate() {
            let mut m = x & y & z;
            while m != 0 {
                s += space.weight(k * 64 + m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        for e in [p, q] {
            if unc.contains(e) {
                s += space.weight(e);
            }
        }
        s
    };
    let cost = |p: usize, q: usize| {
        let s = sigma.get(p, q);
        w_n * if n == 2.0 { s * s } else { s.powf(n) }
    };
    let mut heap: BinaryHeap<(Score, Reverse<usize>)> = candidates
        .par_iter()
        .enumerate()
        .filter_map(|(k, &(p, q))| {
            let f = fresh(p, q, &uncovered);
            (f > 0.0).then(|| (Score(f / cost(p, q)), Reverse(k)))
        })
        .collect::<Vec<_>>()
        .into();
    let mut accepted = vec![false; candidates.len()];
    while !uncovered.is_empty() {
        let Some((Score(stale), Reverse(k))) = heap.pop() else { break };
        if accepted[k] {
            continue;
        }
        let (p, q) = candidates[k];
        let f = fresh(p, q, &uncovered);
        if f <= 0.0 {
            continue;
        }
        let score = f / cost(p, q);
        if score < stale {
            if let Some((Score(next), Reverse(nk))) = heap.peek() {
                if score < *next || (score == *next && nk < &k) {
                    heap.push((Score(score), Reverse(k)));
                    continue;
                }
            }
        }
        accepted[k] = true;
        let e = CoverElement::Sample { p, q };
        // Candidates are prefiltered by sigma; the local metric can still exceed delta.
        if opts.gauge == DiameterGauge::Noldus && !(element_diameter(&e, &carrier, opts.gauge)? < delta) {
            continue;
        }
        elements.push(e);
        uncovered.difference_with(space.diamond(p, q, OrderMode::Causal).words());
    }
    let fallback = uncovered.to_vec();
    if !fallback.is_empty() {
        log::debug!("greedy cover: {} points fell back to singletons", fallback.len());
    }
    elements.extend(fallback.into_iter().map(|x| CoverElement::Singleton { x }));
    let cover = DiamondCover {
        target: CoverTarget::Points(target.clone()),
        elements,
        delta,
        method: if opts.seed.is_empty() { CoverMethod::Greedy } else { CoverMethod::GreedySeeded },
        gauge: opts.gauge,
    };
    validate_cover(&cover, &carrier)?;
    Ok(cover)
}

/// What a scan covers.
#[derive(Clone, Copy, Debug)]
pub enum ScanTarget<'a> {
    /// Continuum 2D region, covered by exact tilings.
    Region(NullRect),
    /// Sample points, covered greedily; with `seed_region` the tiling of that
    /// region is also tried (alone and as a greedy seed).
    Sample {
        space: &'a OrderedMeasureSpace,
        target: &'a BitSet,
        sigma: &'a SigmaMatrix,
        seed_region: Option<NullRect>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    /// `N*` is the largest `N` whose extrapolated value reaches this.
    pub threshold: f64,
    pub greedy: GreedyOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { threshold: 0.1, greedy: GreedyOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub delta: f64,
    /// Running minimum over all certified covers at this or any smaller delta.
    pub cost: f64,
    /// Cost of the best cover built for this delta alone.
    pub raw_cost: f64,
    pub method: String,
    pub certified_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    #[serde(rename = "N")]
    pub n: f64,
    /// Value at the smallest delta.
    pub value: f64,
    /// `d log(cost) / d log(delta)` over the two smallest deltas; negative
    /// means growth as delta shrinks.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub extrapolated: Vec<Extrapolation>,
    pub n_star: Option<f64>,
    pub gauge: DiameterGauge,
}

impl ScanResult {
    /// Reported (running minimum) costs for one `N`, ordered by decreasing delta.
    pub fn series(&self, n: f64) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.n == n).map(|r| (r.delta, r.cost)).collect()
    }

    /// Per-delta cover costs for one `N`, ordered by decreasing delta.
    pub fn raw_series(&self, n: f64) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.n == n).map(|r| (r.delta, r.raw_cost)).collect()
    }
}

fn best_cover_cost(target: &ScanTarget, n: f64, delta: f64, opts: &ScanOptions) -> Result<(f64, CoverMethod)> {
    match *target {
        ScanTarget::Region(rect) => {
            let cover = tile_cover_minkowski2(rect, cells_for_delta(&rect, delta))?;
            Ok((cover_cost(&cover, &Carrier::Continuum, n)?, CoverMethod::Tiling))
        }
        ScanTarget::Sample { space, target, sigma, seed_region } => {
            let carrier = Carrier::Sample { space, sigma };
            let mut best: Option<(f64, CoverMethod)> = None;
            let mut consider = |cost: f64, m: CoverMethod| {
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, m));
                }
            };
            let mut g = opts.greedy.clone();
            g.seed.clear();
            let cover = greedy_cover(space, target, delta, sigma, n, &g)?;
            consider(cost_unchecked(&cover.elements, &carrier, n)?, CoverMethod::Greedy);
            if let Some(rect) = seed_region {
                let tiles = tile_cover_minkowski2(rect, cells_for_delta(&rect, delta))?;
                let mut tiled = DiamondCover { target: CoverTarget::Points(target.clone()), gauge: g.gauge, ..tiles.clone() };
                tiled.delta = delta;
                if validate_cover(&tiled, &carrier).is_ok() {
                    consider(cost_unchecked(&tiled.elements, &carrier, n)?, CoverMethod::Tiling);
                }
                g.seed = tiles.elements;
                if let Ok(cover) = greedy_cover(space, target, delta, sigma, n, &g) {
                    consider(cost_unchecked(&cover.elements, &carrier, n)?, CoverMethod::GreedySeeded);
                }
            }
            Ok(best.expect("greedy always yields a cover"))
        }
    }
}

/// Certified cover costs over `n_grid x delta_schedule`, with running minima
/// so that costs never decrease as delta shrinks, a per-`N` extrapolation and
/// the transition point `N*`.
pub fn hausdorff_scan(target: &ScanTarget, n_grid: &[f64], delta_schedule: &[f64], opts: &ScanOptions) -> Result<ScanResult> {
    if n_grid.is_empty() || delta_schedule.is_empty() {
        return Err(Error::InvalidArgument("N grid and delta schedule must be non-empty".into()));
    }
    if n_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("N grid must be strictly ascending".into()));
    }
    let mut deltas = delta_schedule.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let gauge = match target {
        ScanTarget::Region(_) => DiameterGauge::Noldus,
        ScanTarget::Sample { .. } => opts.greedy.gauge,
    };
    let mut rows = Vec::new();
    let mut extrapolated = Vec::new();
    for &n in n_grid {
        // Smallest delta first: a cover valid at delta is valid at any larger delta.
        let mut running: Option<(f64, CoverMethod)> = None;
        let mut raw = Vec::new();
        for &delta in &deltas {
            let (c, m) = best_cover_cost(target, n, delta, opts)?;
            if running.is_none_or(|(rc, _)| c < rc) {
                running = Some((c, m));
            }
            let (rc, rm) = running.unwrap();
            raw.push((delta, c));
            rows.push(ScanRow { n, delta, cost: rc, raw_cost: c, method: rm.as_str().into(), certified_bound: true });
        }
        let value = raw[0].1;
        let slope = if raw.len() >= 2 {
            let ((d0, c0), (d1, c1)) = (raw[0], raw[1]);
            (c0 > 0.0 && c1 > 0.0).then(|| (c1.ln() - c0.ln()) / (d1.ln() - d0.ln()))
        } else {
            None
        };
        extrapolated.push(Extrapolation { n, value, slope });
    }
    rows.sort_by(|a, b| a.n.total_cmp(&b.n).then(b.delta.total_cmp(&a.delta)));
    let n_star = extrapolated.iter().filter(|e| e.value >= opts.threshold).map(|e| e.n).last();
    Ok(ScanResult { rows, extrapolated, n_star, gauge })
}
