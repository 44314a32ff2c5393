//! Reconstruction of Lorentzian geometry from order and volume alone:
//! midpoint volume ratios and dimension, segment lengths, the `L^-`/`K^-`
//! maps, and the all-pairs distance `sigma_hat = K^-(l)`.
//!
//! Diamond volumes are always taken over the open interior
//! `J(p, q) \ {p, q}`, which is the unbiased Poisson estimator of the
//! continuum volume.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::ones;
use crate::error::{Error, Result};
use crate::hausdorff::omega;
use crate::metrics::{SigmaMatrix, SigmaSource};
use crate::omspace::{OrderMode, OrderedMeasureSpace};
use crate::relation::Relation;
use crate::rng;
use crate::stats;

pub const DEFAULT_K_MIN: usize = 20;

/// Fixed-point scale for path sums; integer addition keeps the longest-path
/// table exactly superadditive.
const FIXED_SCALE: f64 = (1u64 << 32) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoefMode {
    /// Inverts the volume of one cone of height `sigma`.
    SingleCone,
    /// Inverts the volume of the diamond of proper time `sigma`.
    #[default]
    DiamondExact,
}

/// The constant `c` in `l = (c Vol)^{1/D}`.
///
/// `DiamondExact` is `1 / omega(D)`, so `(c V_D(sigma))^{1/D} = sigma`;
/// `SingleCone` is `2^{1-D}` times that.
pub fn length_coefficient(dimension: f64, mode: CoefMode) -> Result<f64> {
    if !(dimension >= 1.0 && dimension.is_finite()) {
        return Err(Error::InvalidArgument(format!("dimension must be >= 1, got {dimension}")));
    }
    let exact = 1.0 / omega(dimension)?;
    Ok(match mode {
        CoefMode::DiamondExact => exact,
        CoefMode::SingleCone => exact * 2f64.powf(1.0 - dimension),
    })
}

/// `(c * Vol(int J(p, q)))^{1/D}`; zero when `p` does not precede `q`.
pub fn segment_length(space: &OrderedMeasureSpace, p: usize, q: usize, dimension: f64, mode: CoefMode) -> Result<f64> {
    let c = length_coefficient(dimension, mode)?;
    Ok(segment_length_with(space, p, q, dimension, c))
}

#[inline]
fn segment_length_with(space: &OrderedMeasureSpace, p: usize, q: usize, dimension: f64, coef: f64) -> f64 {
    if p == q || !space.precedes(p, q, OrderMode::Causal) {
        return 0.0;
    }
    let v = space.interior_volume(p, q);
    if v <= 0.0 {
        return 0.0;
    }
    if dimension == 2.0 {
        (coef * v).sqrt()
    } else {
        (coef * v).powf(1.0 / dimension)
    }
}

/// A strictly increasing sequence of points under the causal order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain(Vec<usize>);

impl Chain {
    pub fn new(space: &OrderedMeasureSpace, points: Vec<usize>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a chain needs at least two points".into()));
        }
        if let Some(w) = points.windows(2).find(|w| !space.precedes(w[0], w[1], OrderMode::Causal)) {
            return Err(Error::InvalidArgument(format!(
                "chain step {} -> {} is not causal",
                space.id(w[0]),
                space.id(w[1])
            )));
        }
        Ok(Self(points))
    }

    /// Skips validation; the caller guarantees the ordering.
    pub fn from_vec_unchecked(points: Vec<usize>) -> Self {
        Self(points)
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Length of a chain: the sum of its segment lengths.
pub fn chain_length(space: &OrderedMeasureSpace, chain: &Chain, dimension: f64, mode: CoefMode) -> Result<f64> {
    let c = length_coefficient(dimension, mode)?;
    Ok(chain.points().windows(2).map(|w| segment_length_with(space, w[0], w[1], dimension, c)).sum())
}

/// Infimum over sub-partitions of the chain (keeping both endpoints) of the
/// summed values; shortest path over the chain's index DAG.
pub fn discrete_l_minus(value: impl Fn(usize, usize) -> f64, chain: &Chain) -> f64 {
    let c = chain.points();
    let k = c.len();
    if k < 2 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; k];
    best[0] = 0.0;
    for j in 1..k {
        for i in 0..j {
            let cand = best[i] + value(c[i], c[j]);
            if cand < best[j] {
                best[j] = cand;
            }
        }
    }
    best[k - 1]
}

/// Longest admissible chain sum from `p` to `q`, or 0.
///
/// An edge `(u, v)` with `u < v` is admissible when its open interior has at
/// least `k_min` points; its weight is `value(u, v)`.
pub fn discrete_k_minus(
    space: &OrderedMeasureSpace,
    value: impl Fn(usize, usize) -> f64,
    p: usize,
    q: usize,
    k_min: usize,
) -> f64 {
    if p == q || !space.precedes(p, q, OrderMode::Causal) {
        return 0.0;
    }
    let members: Vec<usize> = ones(space.future_words(p, OrderMode::Causal))
        .filter(|&v| v == q || space.precedes(v, q, OrderMode::Causal))
        .collect();
    let mut nodes = Vec::with_capacity(members.len() + 1);
    nodes.push(p);
    nodes.extend(members);
    let mut dist = vec![f64::NEG_INFINITY; nodes.len()];
    dist[0] = 0.0;
    for j in 1..nodes.len() {
        let v = nodes[j];
        for i in 0..j {
            let u = nodes[i];
            if dist[i] == f64::NEG_INFINITY || !space.precedes(u, v, OrderMode::Causal) {
                continue;
            }
            if space.interior_count(u, v) < k_min {
                continue;
            }
            let cand = dist[i] + value(u, v);
            if cand > dist[j] {
                dist[j] = cand;
            }
        }
    }
    dist[nodes.len() - 1].max(0.0)
}

/// Outcome of the midpoint ratio search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MidpointRatio {
    /// Best ratio and the witness point `b`.
    Value { phi: f64, witness: usize },
    /// No interior point is balanced.
    NoWitness,
}

impl MidpointRatio {
    pub fn phi(&self) -> Option<f64> {
        match self {
            MidpointRatio::Value { phi, .. } => Some(*phi),
            MidpointRatio::NoWitness => None,
        }
    }
}

/// `Phi(a, c) = max_b (Vol(int J(a,b)) + mu(b) + Vol(int J(b,c))) / Vol(int J(a,c))`
/// over interior `b` whose two open interiors differ in count by at most
/// `balance_tol`.
///
/// The three numerator pieces are disjoint subsets of the denominator, so the
/// ratio lies in `(0, 1]`; a totally ordered diamond gives exactly 1. With
/// uniform weights the ratio is taken on counts, making it exactly invariant
/// under weight rescaling.
pub fn midpoint_ratio(space: &OrderedMeasureSpace, a: usize, c: usize, balance_tol: usize) -> Result<MidpointRatio> {
    if a == c || !space.precedes(a, c, OrderMode::Causal) {
        return Err(Error::EmptySet("diamond J(a, c)"));
    }
    let n_ac = space.interior_count(a, c);
    if n_ac == 0 {
        return Ok(MidpointRatio::NoWitness);
    }
    let uniform = space.uniform_weight().is_some();
    let denom = if uniform { n_ac as f64 } else { space.interior_volume(a, c) };
    if denom <= 0.0 {
        return Ok(MidpointRatio::NoWitness);
    }
    let mut best: Option<(f64, usize)> = None;
    let fa = space.future_words(a, OrderMode::Causal);
    let pc = space.past_words(c, OrderMode::Causal);
    for (k, (x, y)) in fa.iter().zip(pc).enumerate() {
        let mut m = x & y;
        while m != 0 {
            let b = k * 64 + m.trailing_zeros() as usize;
            m &= m - 1;
            let n_ab = space.interior_count(a, b);
            let n_bc = space.interior_count(b, c);
            if n_ab.abs_diff(n_bc) > balance_tol {
                continue;
            }
            let num = if uniform {
                (n_ab + 1 + n_bc) as f64
            } else {
                space.interior_volume(a, b) + space.weight(b) + space.interior_volume(b, c)
            };
            let phi = num / denom;
            if best.is_none_or(|(bp, _)| phi > bp) {
                best = Some((phi, b));
            }
        }
    }
    Ok(match best {
        Some((phi, witness)) => MidpointRatio::Value { phi, witness },
        None => MidpointRatio::NoWitness,
    })
}

/// Monte-Carlo midpoint ratio of the flat continuum diamond `J(a, c)` with
/// `a = 0`, `c = (1, 0, ...)` in `dimension` spacetime dimensions.
///
/// `n_samples` uniform points of `J(a, c)` estimate the volume fraction of
/// `J(a, b) ∪ J(b, c)`. Balanced points `b` (equal continuum volumes) form the
/// slice `t = 1/2`; the sup runs over its centre and `n_candidates` further
/// seeded points of the slice.
pub fn continuum_midpoint_ratio(dimension: usize, n_samples: u64, n_candidates: usize, seed: u64) -> Result<f64> {
    use rand::Rng;
    if dimension < 2 || n_samples == 0 {
        return Err(Error::InvalidArgument("need dimension >= 2 and at least one sample".into()));
    }
    let ds = dimension - 1;
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut candidates = vec![vec![0.5; 1].into_iter().chain(std::iter::repeat_n(0.0, ds)).collect::<Vec<f64>>()];
    let mut r = rng::stream(seed, rng::RESERVED_STREAM_BASE + 2);
    while candidates.len() <= n_candidates {
        let x: Vec<f64> = (0..ds).map(|_| r.random_range(-0.5..0.5)).collect();
        if norm(&x) < 0.5 {
            candidates.push(std::iter::once(0.5).chain(x).collect());
        }
    }
    let sizes = rng::shard_sizes(n_samples, rng::MC_SHARDS);
    let hits: Vec<Vec<u64>> = sizes
        .par_iter()
        .enumerate()
        .map(|(shard, &count)| {
            let mut r = rng::stream(seed, shard as u64);
            let mut h = vec![0u64; candidates.len()];
            let mut y = vec![0.0; dimension];
            let mut drawn = 0;
            while drawn < count {
                y[0] = r.random::<f64>();
                for v in &mut y[1..] {
                    *v = r.random_range(-0.5..0.5);
                }
                let rad = norm(&y[1..]);
                if rad > y[0].min(1.0 - y[0]) {
                    continue;
                }
                drawn += 1;
                for (k, b) in candidates.iter().enumerate() {
                    let d: f64 = y[1..].iter().zip(&b[1..]).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                    let dt = y[0] - b[0];
                    // J(a, b): y after a (always) and before b; J(b, c): y after b.
                    let in_ab = -dt >= d && y[0] >= rad;
                    let in_bc = dt >= d && 1.0 - y[0] >= rad;
                    if in_ab || in_bc {
                        h[k] += 1;
                    }
                }
            }
            h
        })
        .collect();
    let total: Vec<u64> = (0..candidates.len()).map(|k| hits.iter().map(|h| h[k]).sum()).collect();
    Ok(total.iter().map(|&h| h as f64 / n_samples as f64).fold(0.0, f64::max))
}

/// Parameters of the windowed dimension estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DimensionParams {
    /// Smallest open-interior count of a sampled diamond.
    pub k_min: usize,
    /// Largest open-interior count of a sampled diamond.
    pub k_max: usize,
    /// Diamonds sampled per point.
    pub n_pairs: usize,
    pub balance_tol: usize,
}

impl Default for DimensionParams {
    fn default() -> Self {
        Self { k_min: 50, k_max: 200, n_pairs: 200, balance_tol: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub n_diamonds_used: usize,
    /// Inter-quartile range of the per-diamond values.
    pub spread: f64,
}

/// Median of `-log2(Phi) + 1` over up to `n_pairs` diamonds `J(p, q)` with
/// `p < b < q` and open count in `[k_min, k_max]`.
pub fn estimate_dimension(space: &OrderedMeasureSpace, b: usize, params: &DimensionParams, seed: u64) -> Result<DimensionEstimate> {
    if params.k_min > params.k_max {
        return Err(Error::InvalidArgument("k_min exceeds k_max".into()));
    }
    // J(p, q) contains J(p, b) ∪ {b}, so only near pasts and futures qualify.
    let lower: Vec<usize> = ones(space.past_words(b, OrderMode::Causal))
        .filter(|&p| space.interior_count(p, b) < params.k_max)
        .collect();
    let upper: Vec<usize> = ones(space.future_words(b, OrderMode::Causal))
        .filter(|&q| space.interior_count(b, q) < params.k_max)
        .collect();
    let mut candidates = Vec::new();
    for &p in &lower {
        for &q in &upper {
            let n = space.interior_count(p, q);
            if n >= params.k_min && n <= params.k_max {
                candidates.push((p, q));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no diamond around point {} with count in [{}, {}]",
            space.id(b),
            params.k_min,
            params.k_max
        )));
    }
    if candidates.len() > params.n_pairs {
        let mut r = rng::stream(seed, b as u64);
        let mut picked = sample(&mut r, candidates.len(), params.n_pairs).into_vec();
        picked.sort_unstable();
        candidates = picked.into_iter().map(|k| candidates[k]).collect();
    }
    let mut values = Vec::with_capacity(candidates.len());
    for (p, q) in candidates {
        if let MidpointRatio::Value { phi, .. } = midpoint_ratio(space, p, q, params.balance_tol)? {
            values.push(-phi.log2() + 1.0);
        }
    }
    if values.is_empty() {
        return Err(Error::InsufficientData(format!("no balanced midpoint around point {}", space.id(b))));
    }
    Ok(DimensionEstimate {
        value: stats::median(&values).expect("non-empty"),
        n_diamonds_used: values.len(),
        spread: stats::iqr(&values).expect("non-empty"),
    })
}

/// Per-point dimension estimates for a seeded sample of points; points
/// without admissible diamonds are skipped.
pub fn sample_dimensions(
    space: &OrderedMeasureSpace,
    params: &DimensionParams,
    n_points: usize,
    seed: u64,
) -> Vec<(usize, DimensionEstimate)> {
    let n = space.len();
    let mut pts: Vec<usize> = if n_points >= n {
        (0..n).collect()
    } else {
        let mut r = rng::stream(seed, rng::RESERVED_STREAM_BASE + 1);
        sample(&mut r, n, n_points).into_vec()
    };
    pts.sort_unstable();
    pts.into_par_iter()
        .filter_map(|b| estimate_dimension(space, b, params, seed).ok().map(|e| (b, e)))
        .collect()
}

/// Median of per-point estimates over a seeded sample.
pub fn global_dimension(space: &OrderedMeasureSpace, params: &DimensionParams, n_points: usize, seed: u64) -> Result<f64> {
    let est = sample_dimensions(space, params, n_points, seed);
    let values: Vec<f64> = est.iter().map(|(_, e)| e.value).collect();
    stats::median(&values).ok_or_else(|| Error::InsufficientData("no point admits a dimension estimate".into()))
}

/// How the dimension entering segment lengths is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DimensionMode {
    Fixed { value: f64 },
    /// Global median of sampled per-point estimates.
    Estimated { n_points: usize, seed: u64 },
    /// Each edge uses the estimate at its lower endpoint; points without an
    /// estimate fall back to the global median.
    PerPoint { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructConfig {
    pub dimension: DimensionMode,
    pub coef_mode: CoefMode,
    pub k_min: usize,
    pub dim_params: DimensionParams,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self {
            dimension: DimensionMode::Fixed { value: 2.0 },
            coef_mode: CoefMode::DiamondExact,
            k_min: DEFAULT_K_MIN,
            dim_params: DimensionParams::default(),
        }
    }
}

enum DimPlan {
    Global(f64),
    PerPoint(Vec<f64>),
}

fn resolve_dimension(space: &OrderedMeasureSpace, cfg: &ReconstructConfig) -> Result<DimPlan> {
    match cfg.dimension {
        DimensionMode::Fixed { value } => {
            length_coefficient(value, cfg.coef_mode)?;
            Ok(DimPlan::Global(value))
        }
        DimensionMode::Estimated { n_points, seed } => {
            let d = global_dimension(space, &cfg.dim_params, n_points, seed)?;
            log::info!("estimated dimension {d:.3}");
            Ok(DimPlan::Global(d))
        }
        DimensionMode::PerPoint { seed } => {
            let est = sample_dimensions(space, &cfg.dim_params, space.len(), seed);
            let values: Vec<f64> = est.iter().map(|(_, e)| e.value).collect();
            let fallback = stats::median(&values)
                .ok_or_else(|| Error::InsufficientData("no point admits a dimension estimate".into()))?;
            let mut per = vec![fallback; space.len()];
            for (b, e) in est {
                per[b] = e.value;
            }
            Ok(DimPlan::PerPoint(per))
        }
    }
}

/// Admissible edges grouped by head, sorted by tail, with fixed-point weights.
struct EdgeGraph {
    incoming: Vec<Vec<(u32, i64)>>,
}

impl EdgeGraph {
    fn build(space: &OrderedMeasureSpace, k_min: usize, plan: &DimPlan, mode: CoefMode) -> Result<Self> {
        let coef_global = match plan {
            DimPlan::Global(d) => Some(length_coefficient(*d, mode)?),
            DimPlan::PerPoint(_) => None,
        };
        let per_coef: Vec<f64> = match plan {
            DimPlan::PerPoint(ds) => ds.iter().map(|&d| length_coefficient(d, mode)).collect::<Result<_>>()?,
            DimPlan::Global(_) => Vec::new(),
        };
        let incoming = (0..space.len())
            .into_par_iter()
            .map(|v| {
                ones(space.past_words(v, OrderMode::Causal))
                    .filter(|&u| space.interior_count(u, v) >= k_min)
                    .map(|u| {
                        let len = match plan {
                            DimPlan::Global(d) => segment_length_with(space, u, v, *d, coef_global.unwrap()),
                            DimPlan::PerPoint(ds) => segment_length_with(space, u, v, ds[u], per_coef[u]),
                        };
                        (u as u32, (len * FIXED_SCALE).round() as i64)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { incoming })
    }

    /// Longest admissible path sums from `src` to every later point.
    fn single_source(&self, space: &OrderedMeasureSpace, src: usize) -> Vec<i64> {
        let n = space.len();
        let mut dist = vec![i64::MIN; n];
        dist[src] = 0;
        for v in ones(space.future_words(src, OrderMode::Causal)) {
            let edges = &self.incoming[v];
            let start = edges.partition_point(|&(u, _)| (u as usize) < src);
            let mut best = i64::MIN;
            for &(u, w) in &edges[start..] {
                let du = dist[u as usize];
                if du != i64::MIN && du + w > best {
                    best = du + w;
                }
            }
            dist[v] = best;
        }
        dist
    }
}

fn to_length(d: i64) -> f64 {
    if d <= 0 {
        0.0
    } else {
        d as f64 / FIXED_SCALE
    }
}

/// `sigma_hat(p, q) = K^-(l)(p, q)` for all pairs, antisymmetrised.
///
/// Path sums are accumulated in fixed point (2^-32 resolution), so the table
/// is exactly antisymmetric and exactly satisfies the inverse triangle
/// inequality.
pub fn reconstruct_sigma(space: &OrderedMeasureSpace, cfg: &ReconstructConfig) -> Result<SigmaMatrix> {
    if space.is_empty() {
        return Err(Error::InvalidSpace("cannot reconstruct on an empty space".into()));
    }
    let plan = resolve_dimension(space, cfg)?;
    let graph = EdgeGraph::build(space, cfg.k_min, &plan, cfg.coef_mode)?;
    let n = space.len();
    let rows: Vec<Vec<i64>> = (0..n).into_par_iter().map(|p| graph.single_source(space, p)).collect();
    Ok(SigmaMatrix::from_fn(n, SigmaSource::Reconstructed, |p, q| to_length(rows[p][q])))
}

/// Row `src` of [`reconstruct_sigma`].
pub fn reconstruct_from(space: &OrderedMeasureSpace, src: usize, cfg: &ReconstructConfig) -> Result<Vec<f64>> {
    if src >= space.len() {
        return Err(Error::InvalidArgument(format!("source index {src} out of range")));
    }
    let plan = resolve_dimension(space, cfg)?;
    let graph = EdgeGraph::build(space, cfg.k_min, &plan, cfg.coef_mode)?;
    Ok(graph.single_source(space, src).into_iter().map(to_length).collect())
}

/// Options for [`kl_roundtrip_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlOptions {
    /// Pairs with at most this many saturated chains are enumerated exactly.
    pub path_limit: u64,
    /// Random saturated chains used for the `L^- K^- = Id` half.
    pub n_paths: usize,
    pub seed: u64,
    /// Relative tolerance for comparisons.
    pub tolerance: f64,
}

impl Default for KlOptions {
    fn default() -> Self {
        Self { path_limit: 256, n_paths: 200, seed: 0, tolerance: 1e-9 }
    }
}

/// Outcome of [`kl_roundtrip_check`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct KlReport {
    /// Chronological pairs examined.
    pub pairs_checked: usize,
    /// Pairs where every saturated chain was enumerated.
    pub enumerated: usize,
    /// Pairs certified through the link-sum upper bound.
    pub bounded: usize,
    /// Pairs with `K^-(L^-(sigma)) > sigma` beyond tolerance (capped list).
    pub violations: Vec<(usize, usize, f64, f64)>,
    pub violation_count: usize,
    /// Mean of `K^-(L^-(sigma)) / sigma` over enumerated pairs.
    pub mean_ratio_enumerated: Option<f64>,
    /// Chains and functionals tested for `L^-(K^-(l)) = l`.
    pub lk_checks: usize,
    pub lk_violations: usize,
}

impl KlReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0 && self.lk_violations == 0
    }
}

/// Saturated chains from `p` to `q` in the Hasse diagram, depth first.
fn enumerate_paths(hasse: &Relation, space: &OrderedMeasureSpace, p: usize, q: usize, mut visit: impl FnMut(&[usize])) {
    let mut path = vec![p];
    let mut stack: Vec<Vec<usize>> = vec![next_steps(hasse, space, p, q)];
    while let Some(top) = stack.last_mut() {
        match top.pop() {
            Some(v) => {
                path.push(v);
                if v == q {
                    visit(&path);
                    path.pop();
                } else {
                    stack.push(next_steps(hasse, space, v, q));
                }
            }
            None => {
                stack.pop();
                path.pop();
            }
        }
    }
}

fn next_steps(hasse: &Relation, space: &OrderedMeasureSpace, v: usize, q: usize) -> Vec<usize> {
    hasse.successors(v).filter(|&w| space.causal_le(w, q)).collect()
}

/// Checks `K^- ∘ L^- <= Id` on every chronological pair and `L^- ∘ K^- = Id`
/// on additive chain functionals, with curves modelled as saturated chains.
///
/// Pairs whose chain count exceeds `path_limit` are certified with the bound
/// `K^-(L^-(sigma)) <= min(sigma(p, q), max over chains of the link sum)`.
pub fn kl_roundtrip_check(sigma: &SigmaMatrix, space: &OrderedMeasureSpace, opts: &KlOptions) -> Result<KlReport> {
    if sigma.len() != space.len() {
        return Err(Error::ShapeMismatch("sigma and space differ in size".into()));
    }
    let n = space.len();
    let hasse = space.causal().transitive_reduction()?;
    let tol = opts.tolerance;
    struct Row {
        checked: usize,
        enumerated: usize,
        bounded: usize,
        violations: Vec<(usize, usize, f64, f64)>,
        ratio_sum: f64,
        ratio_n: usize,
    }
    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map(|p| {
            // Path counts (saturating) and best link sums from p over the Hasse DAG.
            let mut count = vec![0u64; n];
            let mut link = vec![f64::NEG_INFINITY; n];
            count[p] = 1;
            link[p] = 0.0;
            let mut row = Row { checked: 0, enumerated: 0, bounded: 0, violations: Vec::new(), ratio_sum: 0.0, ratio_n: 0 };
            for u in std::iter::once(p).chain(ones(space.future_words(p, OrderMode::Causal))) {
                if count[u] == 0 {
                    continue;
                }
                for v in hasse.successors(u) {
                    count[v] = count[v].saturating_add(count[u]);
                    link[v] = link[v].max(link[u] + sigma.get(u, v));
                }
            }
            for q in ones(space.future_words(p, OrderMode::Chrono)) {
                let s = sigma.get(p, q);
                row.checked += 1;
                let value = if count[q] <= opts.path_limit {
                    row.enumerated += 1;
                    let mut best = 0.0f64;
                    enumerate_paths(&hasse, space, p, q, |path| {
                        let c = Chain::from_vec_unchecked(path.to_vec());
                        best = best.max(discrete_l_minus(|a, b| sigma.get(a, b), &c));
                    });
                    if s > 0.0 {
                        row.ratio_sum += best / s;
                        row.ratio_n += 1;
                    }
                    best
                } else {
                    row.bounded += 1;
                    s.min(link[q]).max(0.0)
                };
                if value > s + tol * (1.0 + s.abs()) {
                    row.violations.push((p, q, value, s));
                }
            }
            row
        })
        .collect();
    let mut report = KlReport::default();
    let (mut rs, mut rn) = (0.0, 0usize);
    for r in rows {
        report.pairs_checked += r.checked;
        report.enumerated += r.enumerated;
        report.bounded += r.bounded;
        report.violation_count += r.violations.len();
        for v in r.violations {
            if report.violations.len() < crate::omspace::REPORT_CAP {
                report.violations.push(v);
            }
        }
        rs += r.ratio_sum;
        rn += r.ratio_n;
    }
    report.mean_ratio_enumerated = (rn > 0).then(|| rs / rn as f64);

    // L^-(K^-(l)) = l for additive functionals on random saturated chains.
    let mut r = rng::stream(opts.seed, rng::RESERVED_STREAM_BASE + 2);
    let random_link: Vec<f64> = {
        use rand::Rng;
        (0..n * n).map(|_| r.random::<f64>()).collect()
    };
    let functionals: [&(dyn Fn(usize, usize) -> f64 + Sync); 3] = [
        &|_, _| 1.0,
        &|u, v| sigma.get(u, v).max(0.0),
        &|u, v| random_link[u * n + v],
    ];
    let paths = random_saturated_chains(&hasse, n, opts.n_paths, opts.seed);
    for phi in functionals {
        // K^-(l) restricted to the chain's points: longest Hasse path sums.
        for path in &paths {
            let k_of = |a: usize, b: usize| longest_hasse(&hasse, space, a, b, phi);
            let chain = Chain::from_vec_unchecked(path.clone());
            let lk = discrete_l_minus(k_of, &chain);
            let l: f64 = path.windows(2).map(|w| phi(w[0], w[1])).sum();
            report.lk_checks += 1;
            if (lk - l).abs() > tol * (1.0 + l.abs()) {
                report.lk_violations += 1;
            }
        }
    }
    Ok(report)
}

fn longest_hasse(hasse: &Relation, space: &OrderedMeasureSpace, a: usize, b: usize, phi: &(dyn Fn(usize, usize) -> f64 + Sync)) -> f64 {
    if a == b || !space.precedes(a, b, OrderMode::Causal) {
        return 0.0;
    }
    let mut best = std::collections::BTreeMap::new();
    best.insert(a, 0.0f64);
    let mut order: Vec<usize> = vec![a];
    order.extend(ones(space.future_words(a, OrderMode::Causal)).filter(|&v| space.causal_le(v, b)));
    for &u in &order {
        let Some(&du) = best.get(&u) else { continue };
        for v in hasse.successors(u).filter(|&v| space.causal_le(v, b)) {
            let e = best.entry(v).or_insert(f64::NEG_INFINITY);
            *e = e.max(du + phi(u, v));
        }
    }
    best.get(&b).copied().unwrap_or(0.0).max(0.0)
}

fn random_saturated_chains(hasse: &Relation, n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::Rng;
    let mut r = rng::stream(seed, rng::RESERVED_STREAM_BASE + 3);
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut attempts = 0;
    while out.len() < count && attempts < count * 20 {
        attempts += 1;
        let mut v = r.random_range(0..n);
        let mut path = vec![v];
        let steps = r.random_range(1..=30);
        for _ in 0..steps {
            let succ: Vec<usize> = hasse.successors(v).collect();
            if succ.is_empty() {
                break;
            }
            v = succ[r.random_range(0..succ.len())];
            path.push(v);
        }
        if path.len() >= 2 {
            out.push(path);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpacetime;
    use crate::sprinkle::{sprinkle, SprinkleConfig};
    use proptest::prelude::*;

    fn chain3_sigma(ac: f64) -> SigmaMatrix {
        SigmaMatrix::from_upper(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, ac)], SigmaSource::User).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(length_coefficient(2.0, CoefMode::SingleCone).unwrap(), 1.0);
        assert_eq!(length_coefficient(2.0, CoefMode::DiamondExact).unwrap(), 2.0);
        let c4 = length_coefficient(4.0, CoefMode::DiamondExact).unwrap();
        assert!((c4 - 24.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!(length_coefficient(0.5, CoefMode::SingleCone).is_err());
    }

    #[test]
    fn l_minus_examples() {
        let s = chain3_sigma(3.0);
        let get = |a: usize, b: usize| s.get(a, b);
        assert_eq!(discrete_l_minus(get, &Chain::from_vec_unchecked(vec![0, 1, 2])), 2.0);
        assert_eq!(discrete_l_minus(get, &Chain::from_vec_unchecked(vec![0, 2])), 3.0);
        let eq = chain3_sigma(2.0);
        assert_eq!(discrete_l_minus(|a, b| eq.get(a, b), &Chain::from_vec_unchecked(vec![0, 1, 2])), 2.0);
    }

    #[test]
    fn k_minus_examples() {
        let x = OrderedMeasureSpace::chain(3);
        let s = chain3_sigma(3.0);
        assert_eq!(discrete_k_minus(&x, |a, b| s.get(a, b), 2, 0, 0), 0.0);
        assert_eq!(discrete_k_minus(&x, |a, b| s.get(a, b), 0, 2, 0), 3.0);
    }

    #[test]
    fn midpoint_ratio_on_chains() {
        let x = OrderedMeasureSpace::chain(3);
        assert_eq!(midpoint_ratio(&x, 0, 2, 1).unwrap().phi(), Some(1.0));
        let x = OrderedMeasureSpace::chain(2);
        assert_eq!(midpoint_ratio(&x, 0, 1, 1).unwrap(), MidpointRatio::NoWitness);
        assert!(midpoint_ratio(&x, 1, 0, 1).is_err());
        let long = OrderedMeasureSpace::chain(40);
        let e = estimate_dimension(&long, 20, &DimensionParams { k_min: 5, k_max: 30, n_pairs: 50, balance_tol: 1 }, 0).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn segment_length_edge_cases() {
        let x = OrderedMeasureSpace::chain(2);
        assert_eq!(segment_length(&x, 0, 0, 2.0, CoefMode::DiamondExact).unwrap(), 0.0);
        assert_eq!(segment_length(&x, 0, 1, 2.0, CoefMode::DiamondExact).unwrap(), 0.0);
    }

    #[test]
    fn kl_examples() {
        let x = OrderedMeasureSpace::chain(3);
        let r = kl_roundtrip_check(&chain3_sigma(3.0), &x, &KlOptions::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.pairs_checked, 3);
        let empty = OrderedMeasureSpace::unit_poset(3, &[]).unwrap();
        let r = kl_roundtrip_check(&SigmaMatrix::zeros(3, SigmaSource::User), &empty, &KlOptions::default()).unwrap();
        assert!(r.passed() && r.pairs_checked == 0);
    }

    #[test]
    fn reconstruction_is_structurally_exact() {
        let m = ModelSpacetime::minkowski(2, 0.5, (0.0, 1.0)).unwrap();
        let x = sprinkle(&SprinkleConfig::with_density(m, 400.0, 3)).unwrap();
        let cfg = ReconstructConfig { k_min: 5, ..Default::default() };
        let s = reconstruct_sigma(&x, &cfg).unwrap();
        let n = x.len();
        for p in 0..n {
            assert_eq!(s.get(p, p), 0.0);
            for q in 0..n {
                assert_eq!(s.get(p, q), -s.get(q, p));
                if x.precedes(p, q, OrderMode::Causal) {
                    assert!(s.get(p, q) >= 0.0);
                }
                for r in 0..n {
                    if s.get(p, q) > 0.0 && s.get(q, r) > 0.0 {
                        assert!(s.get(p, r) >= s.get(p, q) + s.get(q, r));
                    }
                }
            }
        }
        // Row agrees with the generic longest-path routine.
        let row = reconstruct_from(&x, 0, &cfg).unwrap();
        for q in 0..n {
            assert_eq!(row[q], s.get(0, q));
            let generic = discrete_k_minus(&x, |a, b| segment_length(&x, a, b, 2.0, CoefMode::DiamondExact).unwrap(), 0, q, 5);
            assert!((generic - row[q]).abs() < 1e-6, "{q}: {generic} vs {}", row[q]);
        }
    }

    #[test]
    fn dimension_is_weight_scale_invariant() {
        let m = ModelSpacetime::minkowski(2, 0.5, (0.0, 1.0)).unwrap();
        let x = sprinkle(&SprinkleConfig::with_density(m, 1500.0, 5)).unwrap();
        let params = DimensionParams { k_min: 30, k_max: 120, n_pairs: 60, balance_tol: 1 };
        let b = x.len() / 2;
        let a = estimate_dimension(&x, b, &params, 1).unwrap();
        let y = x.scaled_weights(0.37).unwrap();
        assert_eq!(a, estimate_dimension(&y, b, &params, 1).unwrap());
        let len = segment_length(&x, 0, x.len() - 1, 2.0, CoefMode::DiamondExact).unwrap();
        let len2 = segment_length(&y, 0, x.len() - 1, 2.0, CoefMode::DiamondExact).unwrap();
        if len > 0.0 {
            assert!((len2 / len - 0.37f64.sqrt()).abs() < 1e-12);
        }
    }

    fn arb_space(max_n: usize) -> impl Strategy<Value = OrderedMeasureSpace> {
        (2..=max_n).prop_flat_map(|n| {
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
        fn k_minus_grows_as_k_min_drops(x in arb_space(9), k in 0usize..4) {
            let n = x.len();
            let v = |a: usize, b: usize| 1.0 + (a + b) as f64 * 0.1;
            for p in 0..n {
                for q in 0..n {
                    prop_assert!(discrete_k_minus(&x, v, p, q, k) <= discrete_k_minus(&x, v, p, q, k.saturating_sub(1)));
                }
            }
        }

        #[test]
        fn l_minus_refinement_never_increases(vals in proptest::collection::vec(0.0f64..5.0, 36), extra in 1usize..5) {
            let n = 6;
            let s = SigmaMatrix::from_fn(n, SigmaSource::User, |i, j| vals[i * n + j]);
            let coarse = Chain::from_vec_unchecked(vec![0, 5]);
            let mut fine = vec![0, extra, 5];
            fine.dedup();
            let fine = Chain::from_vec_unchecked(fine);
            prop_assert!(discrete_l_minus(|a, b| s.get(a, b), &fine) <= discrete_l_minus(|a, b| s.get(a, b), &coarse));
        }
    }
}
