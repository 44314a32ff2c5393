//! Poisson sprinkling of model spacetimes into ordered measure spaces.
//!
//! Points are drawn in fixed blocks of [`BLOCK`] draws, block `b` using stream
//! `b` of the master seed; the point count comes from a reserved stream. The
//! merged sample is sorted by `(time, draw index)` before the relations are
//! built, so the output does not depend on how blocks are scheduled.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::model::{flat_causal, minkowski_sigma, CausalOrder, ConformalSlab2D, EventCoords, MinkowskiSlab, ModelSpacetime};
use crate::omspace::OrderedMeasureSpace;
use crate::relation::Relation;
use crate::rng::{self, StreamRng};

/// Draws per random stream.
pub const BLOCK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Unit,
    #[default]
    InverseDensity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointCount {
    /// Expected points per unit volume; the count is Poisson.
    Density(f64),
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SprinkleConfig {
    pub model: ModelSpacetime,
    pub count: PointCount,
    pub seed: u64,
    pub weight_mode: WeightMode,
}

impl SprinkleConfig {
    pub fn with_density(model: ModelSpacetime, density: f64, seed: u64) -> Self {
        Self { model, count: PointCount::Density(density), seed, weight_mode: WeightMode::InverseDensity }
    }

    pub fn with_points(model: ModelSpacetime, n_points: usize, seed: u64) -> Self {
        Self { model, count: PointCount::Fixed(n_points), seed, weight_mode: WeightMode::InverseDensity }
    }

    pub fn weight_mode(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    /// Points per unit volume (nominal `n / Vol` in fixed-count mode).
    pub fn effective_density(&self) -> f64 {
        match self.count {
            PointCount::Density(d) => d,
            PointCount::Fixed(n) => n as f64 / self.model.volume(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let PointCount::Density(d) = self.count {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidArgument(format!("density must be positive, got {d}")));
            }
        }
        let v = self.model.volume();
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidModel(format!("region volume must be positive and finite, got {v}")));
        }
        Ok(())
    }
}

/// Serialized sprinkle description (the `"sprinkle"` object of experiment configs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SprinkleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub weight_mode: WeightMode,
}

impl SprinkleSpec {
    pub fn to_config(&self, model: ModelSpacetime) -> Result<SprinkleConfig> {
        let count = match (self.density, self.n_points) {
            (Some(d), None) => PointCount::Density(d),
            (None, Some(n)) => PointCount::Fixed(n),
            _ => return Err(Error::InvalidArgument("set exactly one of `density` and `n_points`".into())),
        };
        let cfg = SprinkleConfig { model, count, seed: self.seed, weight_mode: self.weight_mode };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn draw_point(model: &ModelSpacetime, max_density: f64, r: &mut StreamRng) -> Vec<f64> {
    loop {
        let x = model.sample_box(r);
        match model {
            ModelSpacetime::Minkowski(_) => return x,
            ModelSpacetime::Conformal2D(_) => {
                let accept: f64 = r.random();
                if accept * max_density < model.density_at(&x) {
                    return x;
                }
            }
        }
    }
}

fn draw_blocks(n: usize, seed: u64, draw: impl Fn(&mut StreamRng) -> Vec<f64> + Sync) -> Vec<Vec<f64>> {
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut r = rng::stream(seed, b as u64);
            let len = BLOCK.min(n - b * BLOCK);
            (0..len).map(|_| draw(&mut r)).collect::<Vec<_>>()
        })
        .collect()
}

fn poisson_count(mean: f64, seed: u64) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
    let mut r = rng::stream(seed, rng::RESERVED_STREAM_BASE);
    Ok(dist.sample(&mut r) as usize)
}

/// Sorts coordinates by `(time, draw index)` and builds the causal and
/// chronological relations from the flat light cone.
pub(crate) fn space_from_points(mut pts: Vec<Vec<f64>>, weight: f64) -> OrderedMeasureSpace {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(a.cmp(&b)));
    let coords: Vec<EventCoords> = order.iter().map(|&i| EventCoords(std::mem::take(&mut pts[i]))).collect();
    space_from_sorted(coords, vec![weight; order.len()])
}

/// Builds relations for coordinates already sorted by time.
pub(crate) fn space_from_sorted(coords: Vec<EventCoords>, weights: Vec<f64>) -> OrderedMeasureSpace {
    let n = coords.len();
    let rows: Vec<(Vec<usize>, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = Vec::new();
            let mut t = Vec::new();
            for j in i + 1..n {
                if flat_causal(&coords[i], &coords[j]) == CausalOrder::Future && coords[i] != coords[j] {
                    c.push(j);
                    if minkowski_sigma(&coords[i], &coords[j]) > 0.0 {
                        t.push(j);
                    }
                }
            }
            (c, t)
        })
        .collect();
    let mut causal = BitMatrix::new(n);
    let mut chrono = BitMatrix::new(n);
    for (i, (c, t)) in rows.iter().enumerate() {
        for &j in c {
            causal.set(i, j);
        }
        for &j in t {
            chrono.set(i, j);
        }
    }
    OrderedMeasureSpace::assemble(
        (0..n as u64).collect(),
        weights,
        Some(coords),
        Relation::from_matrix(causal),
        Relation::from_matrix(chrono),
    )
}

/// Poisson (or fixed-count) sample of the model region.
///
/// Point ids are positions in time order. Conformal slabs are sampled by
/// rejection against `Omega^2`.
pub fn sprinkle(cfg: &SprinkleConfig) -> Result<OrderedMeasureSpace> {
    cfg.validate()?;
    let vol = cfg.model.volume();
    let n = match cfg.count {
        PointCount::Density(d) => poisson_count(d * vol, cfg.seed)?,
        PointCount::Fixed(n) => n,
    };
    if n == 0 {
        return Err(Error::EmptySprinkle);
    }
    let max_density = match &cfg.model {
        ModelSpacetime::Minkowski(_) => 1.0,
        ModelSpacetime::Conformal2D(c) => c.max_density(),
    };
    let model = &cfg.model;
    let pts = draw_blocks(n, cfg.seed, |r| draw_point(model, max_density, r));
    let weight = match cfg.weight_mode {
        WeightMode::Unit => 1.0,
        WeightMode::InverseDensity => 1.0 / cfg.effective_density(),
    };
    log::debug!("sprinkled {n} points (expected {:.1})", cfg.effective_density() * vol);
    Ok(space_from_points(pts, weight))
}

/// `density * Vol(J(p, q))` for the configured model.
pub fn expected_diamond_count(cfg: &SprinkleConfig, p: &EventCoords, q: &EventCoords) -> Result<f64> {
    cfg.validate()?;
    let d = cfg.effective_density();
    match &cfg.model {
        ModelSpacetime::Minkowski(m) => Ok(d * m.diamond_volume(p, q)?),
        ModelSpacetime::Conformal2D(c) => match c.factor() {
            crate::model::ConformalFactor::Constant { scale } => {
                let flat = MinkowskiSlab::new(2, c.spatial_extent(), c.time_interval())?;
                Ok(d * scale * scale * flat.diamond_volume(p, q)?)
            }
            _ => Err(Error::NoClosedForm("exp_time conformal slab")),
        },
    }
}

/// Sprinkles the coordinate diamond `J(p, q)` of a conformal slab with
/// intensity `density * Omega^2`, then adds `p` (first) and `q` (last).
///
/// `p` must precede `q` with a timelike separation.
pub fn sprinkle_diamond_2d(m: &ConformalSlab2D, p: &EventCoords, q: &EventCoords, density: f64, seed: u64) -> Result<OrderedMeasureSpace> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::InvalidArgument(format!("density must be positive, got {density}")));
    }
    let (up, vp) = (p.time() + p.space()[0], p.time() - p.space()[0]);
    let (uq, vq) = (q.time() + q.space()[0], q.time() - q.space()[0]);
    let (du, dv) = (uq - up, vq - vp);
    if !(du > 0.0 && dv > 0.0) {
        return Err(Error::InvalidArgument("sprinkle_diamond_2d needs a timelike future pair".into()));
    }
    let f = m.factor();
    let max_w = f.omega(p.time()).max(f.omega(q.time())).powi(2);
    // Thinning a homogeneous process of intensity density * max_w.
    let n_box = poisson_count(density * max_w * du * dv / 2.0, seed)?;
    let raw = draw_blocks(n_box, seed, |r| {
        let (a, b): (f64, f64) = (r.random(), r.random());
        let (u, v) = (up + a * du, vp + b * dv);
        let t = 0.5 * (u + v);
        let keep: f64 = r.random();
        if keep * max_w < f.omega(t).powi(2) {
            vec![t, 0.5 * (u - v)]
        } else {
            Vec::new()
        }
    });
    let mut pts: Vec<Vec<f64>> = raw.into_iter().filter(|x| !x.is_empty()).collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(a.cmp(&b)));
    let mut coords = Vec::with_capacity(order.len() + 2);
    coords.push(p.clone());
    coords.extend(order.iter().map(|&i| EventCoords(std::mem::take(&mut pts[i]))));
    coords.push(q.clone());
    let weights = vec![1.0 / density; coords.len()];
    Ok(space_from_sorted(coords, weights))
}

/// Null-coordinate lattice on the diamond `J((0,0), (sigma,0))`: points
/// `u = i sigma / cells`, `v = j sigma / cells` for `0 <= i, j <= cells`,
/// each carrying weight `area / (cells + 1)^2`.
pub fn diamond_lattice_2d(sigma: f64, cells: usize) -> Result<OrderedMeasureSpace> {
    if !(sigma > 0.0) || cells == 0 {
        return Err(Error::InvalidArgument("diamond lattice needs sigma > 0 and cells >= 1".into()));
    }
    let h = sigma / cells as f64;
    let mut coords = Vec::with_capacity((cells + 1) * (cells + 1));
    for i in 0..=cells {
        for j in 0..=cells {
            let (u, v) = (i as f64 * h, j as f64 * h);
            coords.push(((i + j, i), EventCoords(vec![0.5 * (u + v), 0.5 * (u - v)])));
        }
    }
    coords.sort_by(|a, b| a.0.cmp(&b.0));
    let coords: Vec<EventCoords> = coords.into_iter().map(|(_, c)| c).collect();
    let w = sigma * sigma / 2.0 / coords.len() as f64;
    let n = coords.len();
    Ok(space_from_sorted(coords, vec![w; n]))
}
