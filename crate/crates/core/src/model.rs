//! Continuum model spacetimes used as ground truth.
//!
//! Two families are provided: `D`-dimensional Minkowski slabs
//! `(t0, t1) x [-E, E]^(D-1)` and 2D slabs carrying a conformally flat metric
//! `Omega^2 (-dt^2 + dx^2)` from a closed catalog of factors. Conformal factors do
//! not change the causal relation, only volumes and lengths.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng;

/// Event coordinates; entry 0 is time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventCoords(pub Vec<f64>);

impl EventCoords {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into())
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn space(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for EventCoords {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Result of the flat-cone test `causally_related(p, q)`, read from `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalOrder {
    /// `q` lies in the causal past of `p`.
    Past,
    Unrelated,
    /// `q` lies in the causal future of `p` (including `q == p`).
    Future,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinkowskiSlab {
    dimension: usize,
    spatial_extent: f64,
    time: (f64, f64),
}

impl MinkowskiSlab {
    pub fn new(dimension: usize, spatial_extent: f64, time: (f64, f64)) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidModel(format!("dimension must be >= 2, got {dimension}")));
        }
        check_slab(spatial_extent, time)?;
        Ok(Self { dimension, spatial_extent, time })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spatial_extent(&self) -> f64 {
        self.spatial_extent
    }

    pub fn time_interval(&self) -> (f64, f64) {
        self.time
    }

    pub fn volume(&self) -> f64 {
        (self.time.1 - self.time.0) * (2.0 * self.spatial_extent).powi(self.dimension as i32 - 1)
    }

    /// Exact volume of the Alexandrov interval `J(p, q)`.
    ///
    /// Fails with [`Error::ClippedDiamond`] when the interval leaves the slab.
    pub fn diamond_volume(&self, p: &EventCoords, q: &EventCoords) -> Result<f64> {
        let m = ModelSpacetime::Minkowski(self.clone());
        if m.causally_related(p, q)? != CausalOrder::Future {
            return Err(Error::InvalidArgument("diamond_volume needs q in the causal future of p".into()));
        }
        if !self.diamond_inside(p, q) {
            return Err(Error::ClippedDiamond);
        }
        let sigma = minkowski_sigma(p, q);
        Ok(diamond_volume_formula(self.dimension as f64, sigma))
    }

    /// Whether `J(p, q)` (with `q` in the future of `p`) lies inside the slab.
    ///
    /// The spatial shadow of the diamond is the ellipsoid with foci `x_p`, `x_q`
    /// and major axis `t_q - t_p`; its half-width along axis `i` decides.
    pub fn diamond_inside(&self, p: &EventCoords, q: &EventCoords) -> bool {
        let (t0, t1) = self.time;
        if p.time() < t0 || q.time() > t1 {
            return false;
        }
        let dt = q.time() - p.time();
        let dx: Vec<f64> = q.space().iter().zip(p.space()).map(|(a, b)| a - b).collect();
        let dx_norm = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = dt / 2.0;
        let b2 = (a * a - dx_norm * dx_norm / 4.0).max(0.0);
        let e = self.spatial_extent;
        for (&pi, &di) in p.space().iter().zip(&dx) {
            let u = if dx_norm > 0.0 { di / dx_norm } else { 0.0 };
            let h = (a * a * u * u + b2 * (1.0 - u * u)).sqrt();
            let centre = pi + di / 2.0;
            if centre - h < -e || centre + h > e {
                return false;
            }
        }
        true
    }
}

fn check_slab(spatial_extent: f64, time: (f64, f64)) -> Result<()> {
    if !(spatial_extent > 0.0 && spatial_extent.is_finite()) {
        return Err(Error::InvalidModel(format!("spatial extent must be positive, got {spatial_extent}")));
    }
    if !(time.0 < time.1) || !time.0.is_finite() || !time.1.is_finite() {
        return Err(Error::InvalidModel(format!("time interval must satisfy t0 < t1, got {time:?}")));
    }
    Ok(())
}

/// Closed catalog of conformal factors `Omega(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConformalFactor {
    /// `Omega = scale`.
    Constant { scale: f64 },
    /// `Omega = scale * exp(rate * t)`.
    ExpTime { scale: f64, rate: f64 },
}

impl ConformalFactor {
    pub fn omega(&self, t: f64) -> f64 {
        match *self {
            ConformalFactor::Constant { scale } => scale,
            ConformalFactor::ExpTime { scale, rate } => scale * (rate * t).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let scale = match *self {
            ConformalFactor::Constant { scale } => scale,
            ConformalFactor::ExpTime { scale, rate } => {
                if !rate.is_finite() {
                    return Err(Error::InvalidModel("conformal rate must be finite".into()));
                }
                scale
            }
        };
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModel(format!("conformal scale must be positive, got {scale}")));
        }
        Ok(())
    }

    /// `int_{t0}^{t1} Omega(t)^2 dt`.
    fn omega_sq_integral(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            ConformalFactor::Constant { scale } => scale * scale * (t1 - t0),
            ConformalFactor::ExpTime { scale, rate } => {
                if rate == 0.0 {
                    scale * scale * (t1 - t0)
                } else {
                    scale * scale * ((2.0 * rate * t1).exp() - (2.0 * rate * t0).exp()) / (2.0 * rate)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalSlab2D {
    factor: ConformalFactor,
    spatial_extent: f64,
    time: (f64, f64),
}

impl ConformalSlab2D {
    pub fn new(factor: ConformalFactor, spatial_extent: f64, time: (f64, f64)) -> Result<Self> {
        factor.validate()?;
        check_slab(spatial_extent, time)?;
        Ok(Self { factor, spatial_extent, time })
    }

    pub fn factor(&self) -> ConformalFactor {
        self.factor
    }

    pub fn spatial_extent(&self) -> f64 {
        self.spatial_extent
    }

    pub fn time_interval(&self) -> (f64, f64) {
        self.time
    }

    pub fn volume(&self) -> f64 {
        2.0 * self.spatial_extent * self.factor.omega_sq_integral(self.time.0, self.time.1)
    }

    /// Largest value of `Omega^2` on the slab.
    pub fn max_density(&self) -> f64 {
        let a = self.factor.omega(self.time.0);
        let b = self.factor.omega(self.time.1);
        a.max(b).powi(2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpacetime {
    Minkowski(MinkowskiSlab),
    Conformal2D(ConformalSlab2D),
}

impl ModelSpacetime {
    pub fn minkowski(dimension: usize, spatial_extent: f64, time: (f64, f64)) -> Result<Self> {
        Ok(Self::Minkowski(MinkowskiSlab::new(dimension, spatial_extent, time)?))
    }

    pub fn conformal(factor: ConformalFactor, spatial_extent: f64, time: (f64, f64)) -> Result<Self> {
        Ok(Self::Conformal2D(ConformalSlab2D::new(factor, spatial_extent, time)?))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Minkowski(m) => m.dimension,
            Self::Conformal2D(_) => 2,
        }
    }

    pub fn spatial_extent(&self) -> f64 {
        match self {
            Self::Minkowski(m) => m.spatial_extent,
            Self::Conformal2D(c) => c.spatial_extent,
        }
    }

    pub fn time_interval(&self) -> (f64, f64) {
        match self {
            Self::Minkowski(m) => m.time,
            Self::Conformal2D(c) => c.time,
        }
    }

    /// Metric volume of the whole region.
    pub fn volume(&self) -> f64 {
        match self {
            Self::Minkowski(m) => m.volume(),
            Self::Conformal2D(c) => c.volume(),
        }
    }

    /// Coordinate volume of the bounding box (equals the region for slabs).
    pub fn coordinate_volume(&self) -> f64 {
        let (t0, t1) = self.time_interval();
        (t1 - t0) * (2.0 * self.spatial_extent()).powi(self.dimension() as i32 - 1)
    }

    /// Volume element `sqrt|g|` at `x` relative to coordinate volume.
    pub fn density_at(&self, x: &[f64]) -> f64 {
        match self {
            Self::Minkowski(_) => 1.0,
            Self::Conformal2D(c) => c.factor.omega(x[0]).powi(2),
        }
    }

    pub fn contains(&self, p: &EventCoords) -> bool {
        if p.dim() != self.dimension() {
            return false;
        }
        let (t0, t1) = self.time_interval();
        let e = self.spatial_extent();
        p.time() >= t0 && p.time() <= t1 && p.space().iter().all(|x| x.abs() <= e)
    }

    fn check(&self, p: &EventCoords) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideRegion { coords: p.0.clone() })
        }
    }

    pub fn causally_related(&self, p: &EventCoords, q: &EventCoords) -> Result<CausalOrder> {
        self.check(p)?;
        self.check(q)?;
        Ok(flat_causal(p, q))
    }

    /// Signed Lorentzian distance, positive when `p` precedes `q`.
    ///
    /// Exponential conformal factors have no closed form off the vertical axis;
    /// those return [`Error::NoClosedForm`] and callers should fall back to
    /// [`densified_sigma`].
    pub fn exact_sigma(&self, p: &EventCoords, q: &EventCoords) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        match self {
            Self::Minkowski(_) => Ok(minkowski_sigma(p, q)),
            Self::Conformal2D(c) => conformal_sigma(c.factor, p, q),
        }
    }

    /// Uniform sample of the coordinate box.
    pub fn sample_box<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let (t0, t1) = self.time_interval();
        let e = self.spatial_extent();
        let mut x = Vec::with_capacity(self.dimension());
        x.push(rng.random_range(t0..t1));
        for _ in 1..self.dimension() {
            x.push(rng.random_range(-e..e));
        }
        x
    }
}

pub(crate) fn flat_causal(p: &EventCoords, q: &EventCoords) -> CausalOrder {
    let dt = q.time() - p.time();
    let dx2: f64 = q.space().iter().zip(p.space()).map(|(a, b)| (a - b) * (a - b)).sum();
    if dt * dt >= dx2 {
        if dt >= 0.0 {
            CausalOrder::Future
        } else {
            CausalOrder::Past
        }
    } else {
        CausalOrder::Unrelated
    }
}

/// Exact signed Minkowski distance (no region check).
pub fn minkowski_sigma(p: &EventCoords, q: &EventCoords) -> f64 {
    let dt = q.time() - p.time();
    let dx2: f64 = q.space().iter().zip(p.space()).map(|(a, b)| (a - b) * (a - b)).sum();
    let s2 = dt * dt - dx2;
    if s2 <= 0.0 {
        return 0.0;
    }
    if dt > 0.0 {
        s2.sqrt()
    } else {
        -s2.sqrt()
    }
}

fn conformal_sigma(factor: ConformalFactor, p: &EventCoords, q: &EventCoords) -> Result<f64> {
    let flat = minkowski_sigma(p, q);
    if flat == 0.0 {
        return Ok(0.0);
    }
    match factor {
        ConformalFactor::Constant { scale } => Ok(scale * flat),
        ConformalFactor::ExpTime { scale, rate } => {
            // On a vertical segment the t-axis is the maximiser by x-translation
            // symmetry, so its proper time is exact.
            if p.space() == q.space() {
                let (a, b) = (p.time().min(q.time()), p.time().max(q.time()));
                let len = if rate == 0.0 {
                    scale * (b - a)
                } else {
                    scale * ((rate * b).exp() - (rate * a).exp()) / rate
                };
                Ok(len.copysign(flat))
            } else {
                Err(Error::NoClosedForm("exp_time conformal slab"))
            }
        }
    }
}

/// Volume of the Euclidean `n`-ball of radius `r`.
pub fn ball_volume(n: f64, r: f64) -> f64 {
    PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0) * r.powf(n)
}

/// Volume of the `n`-dimensional light cone of height `h` (aperture pi/2).
pub fn cone_volume(n: f64, h: f64) -> f64 {
    PI.powf((n - 1.0) / 2.0) / (n * gamma((n - 1.0) / 2.0 + 1.0)) * h.powf(n)
}

/// Volume of a `D`-dimensional Minkowski diamond with proper time `sigma`:
/// two cones of height `sigma / 2`.
pub fn diamond_volume_formula(dimension: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    2.0 * cone_volume(dimension, sigma / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Hit-or-miss Monte-Carlo estimate of the metric volume of `{x : predicate(x)}`.
///
/// Samples are uniform in the coordinate box and weighted by the volume
/// element, so conformal slabs report `Omega^2`-volumes. The work is split over
/// [`rng::MC_SHARDS`] fixed streams and reduced in shard order.
pub fn monte_carlo_volume<F>(m: &ModelSpacetime, predicate: F, n_samples: u64, seed: u64) -> Result<VolumeEstimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    let sizes = rng::shard_sizes(n_samples, rng::MC_SHARDS);
    let partial: Vec<(f64, f64)> = sizes
        .par_iter()
        .enumerate()
        .map(|(shard, &count)| {
            let mut r = rng::stream(seed, shard as u64);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x = m.sample_box(&mut r);
                if predicate(&x) {
                    let w = m.density_at(&x);
                    s1 += w;
                    s2 += w * w;
                }
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = n_samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    let vbox = m.coordinate_volume();
    Ok(VolumeEstimate { estimate: vbox * mean, std_error: vbox * (var / n).sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsBounds {
    /// Largest sampled `sigma(x, y)`; a lower bound of `sup sigma`.
    pub sup_sigma: f64,
    /// Largest sampled estimate of `Vol(J(p))`.
    pub jv_sup: f64,
    /// Largest sampled estimate of the boundary measure of `J(p)` on the two
    /// Cauchy faces.
    pub jv_boundary_sup: f64,
}

/// Monte-Carlo diagnostics of `sup sigma`, `JV(X)` and `JV(dX)`.
///
/// `n_samples` interior points are drawn; `sup_sigma` maximises the exact
/// distance over sampled pairs, the volume suprema maximise per-point counting
/// estimates against the same sample (interior) or an equal-size sample of the
/// two boundary faces.
pub fn diagnostics_bounds(m: &ModelSpacetime, n_samples: usize, seed: u64) -> Result<DiagnosticsBounds> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    if let ModelSpacetime::Conformal2D(c) = m {
        if matches!(c.factor, ConformalFactor::ExpTime { .. }) {
            return Err(Error::NoClosedForm("exp_time conformal slab"));
        }
    }
    let mut r = rng::stream(seed, 0);
    let pts: Vec<EventCoords> = (0..n_samples).map(|_| EventCoords(m.sample_box(&mut r))).collect();
    let (t0, t1) = m.time_interval();
    let mut rb = rng::stream(seed, 1);
    let boundary: Vec<EventCoords> = (0..n_samples)
        .map(|i| {
            let mut x = m.sample_box(&mut rb);
            x[0] = if i % 2 == 0 { t0 } else { t1 };
            EventCoords(x)
        })
        .collect();

    let sup_sigma = pts
        .par_iter()
        .map(|p| {
            let mut best = 0.0f64;
            for q in &pts {
                best = best.max(m.exact_sigma(p, q).unwrap_or(0.0));
            }
            best
        })
        .reduce(|| 0.0, f64::max);

    let vbox = m.coordinate_volume();
    let weights: Vec<f64> = pts.iter().map(|p| m.density_at(&p.0)).collect();
    let n = n_samples as f64;
    let jv_sup = pts
        .par_iter()
        .map(|p| {
            let s: f64 = pts
                .iter()
                .zip(&weights)
                .filter(|(q, _)| flat_causal(p, q) != CausalOrder::Unrelated)
                .map(|(_, w)| *w)
                .sum();
            vbox * s / n
        })
        .reduce(|| 0.0, f64::max);

    // Each face has coordinate area (2E)^(D-1); half the boundary sample sits on each.
    let face = (2.0 * m.spatial_extent()).powi(m.dimension() as i32 - 1);
    let face_weight = |x: &EventCoords| match m {
        ModelSpacetime::Minkowski(_) => 1.0,
        ModelSpacetime::Conformal2D(c) => c.factor.omega(x.time()),
    };
    let bweights: Vec<f64> = boundary.iter().map(face_weight).collect();
    let per_face = (n / 2.0).max(1.0);
    let jv_boundary_sup = pts
        .par_iter()
        .map(|p| {
            let s: f64 = boundary
                .iter()
                .zip(&bweights)
                .filter(|(q, _)| flat_causal(p, q) != CausalOrder::Unrelated)
                .map(|(_, w)| *w)
                .sum();
            face * s / per_face
        })
        .reduce(|| 0.0, f64::max);

    Ok(DiagnosticsBounds { sup_sigma, jv_sup, jv_boundary_sup })
}

/// Options for the densified distance oracle.
#[derive(Clone, Copy, Debug)]
pub struct DensifiedOptions {
    /// Expected points per unit metric volume.
    pub density: f64,
    pub seed: u64,
    /// Minimum interior count for a chain link.
    pub k_min: usize,
}

impl Default for DensifiedOptions {
    fn default() -> Self {
        Self { density: 500.0, seed: 0, k_min: crate::fld::DEFAULT_K_MIN }
    }
}

/// Numeric oracle for `sigma` on a conformal slab.
///
/// Sprinkles the coordinate diamond `J(p, q)` with the conformal volume
/// element at the given density, adds `p` and `q`, and runs the chain-based
/// reconstruction with `D = 2`. Accuracy improves with density.
pub fn densified_sigma(m: &ConformalSlab2D, p: &EventCoords, q: &EventCoords, opts: &DensifiedOptions) -> Result<f64> {
    let model = ModelSpacetime::Conformal2D(m.clone());
    match model.causally_related(p, q)? {
        CausalOrder::Unrelated => return Ok(0.0),
        CausalOrder::Past => return densified_sigma(m, q, p, opts).map(|s| -s),
        CausalOrder::Future => {}
    }
    if minkowski_sigma(p, q) == 0.0 {
        return Ok(0.0);
    }
    let space = crate::sprinkle::sprinkle_diamond_2d(m, p, q, opts.density, opts.seed)?;
    let cfg = crate::fld::ReconstructConfig {
        dimension: crate::fld::DimensionMode::Fixed { value: 2.0 },
        coef_mode: crate::fld::CoefMode::DiamondExact,
        k_min: opts.k_min,
        ..Default::default()
    };
    let (src, dst) = (0, space.len() - 1);
    let s = crate::fld::reconstruct_from(&space, src, &cfg)?;
    let v = s[dst];
    if v <= 0.0 {
        return Err(Error::InsufficientDensity);
    }
    Ok(v)
}

/// Serialized model description (the `"model"` object of experiment configs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `"minkowski"` or `"conformal2d"`.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub extent: f64,
    pub time: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalFactor>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<ModelSpacetime> {
        let time = (self.time[0], self.time[1]);
        match self.model.as_str() {
            "minkowski" => {
                if self.conformal.is_some() {
                    return Err(Error::InvalidModel("minkowski model takes no conformal factor".into()));
                }
                let d = self.dimension.ok_or_else(|| Error::InvalidModel("minkowski model needs a dimension".into()))?;
                ModelSpacetime::minkowski(d, self.extent, time)
            }
            "conformal2d" => {
                if let Some(d) = self.dimension {
                    if d != 2 {
                        return Err(Error::InvalidModel(format!("conformal2d has dimension 2, got {d}")));
                    }
                }
                let f = self.conformal.ok_or_else(|| Error::InvalidModel("conformal2d needs a conformal factor".into()))?;
                ModelSpacetime::conformal(f, self.extent, time)
            }
            other => Err(Error::InvalidModel(format!("unknown model `{other}`"))),
        }
    }
}

impl From<&ModelSpacetime> for ModelSpec {
    fn from(m: &ModelSpacetime) -> Self {
        let (t0, t1) = m.time_interval();
        match m {
            ModelSpacetime::Minkowski(s) => ModelSpec {
                model: "minkowski".into(),
                dimension: Some(s.dimension),
                extent: s.spatial_extent,
                time: [t0, t1],
                conformal: None,
            },
            ModelSpacetime::Conformal2D(c) => ModelSpec {
                model: "conformal2d".into(),
                dimension: Some(2),
                extent: c.spatial_extent,
                time: [t0, t1],
                conformal: Some(c.factor),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(v: &[f64]) -> EventCoords {
        EventCoords::new(v.to_vec())
    }

    fn slab(d: usize) -> ModelSpacetime {
        ModelSpacetime::minkowski(d, 10.0, (-10.0, 10.0)).unwrap()
    }

    #[test]
    fn causal_examples() {
        let m = slab(2);
        assert_eq!(m.causally_related(&c(&[0., 0.]), &c(&[2., 0.])).unwrap(), CausalOrder::Future);
        assert_eq!(m.causally_related(&c(&[0., 0.]), &c(&[0., 1.])).unwrap(), CausalOrder::Unrelated);
        let m3 = slab(3);
        assert_eq!(m3.causally_related(&c(&[0., 0., 0.]), &c(&[1., 1., 0.])).unwrap(), CausalOrder::Future);
        assert_eq!(m.causally_related(&c(&[1., 0.]), &c(&[1., 0.])).unwrap(), CausalOrder::Future);
        assert!(matches!(
            m.causally_related(&c(&[0., 0.]), &c(&[0., 11.])),
            Err(Error::OutsideRegion { .. })
        ));
    }

    #[test]
    fn sigma_examples() {
        let m = slab(2);
        assert_eq!(m.exact_sigma(&c(&[0., 0.]), &c(&[2., 0.])).unwrap(), 2.0);
        assert_eq!(m.exact_sigma(&c(&[2., 0.]), &c(&[0., 0.])).unwrap(), -2.0);
        let m4 = slab(4);
        assert_eq!(m4.exact_sigma(&c(&[0., 0., 0., 0.]), &c(&[5., 3., 0., 4.])).unwrap(), 0.0);
    }

    #[test]
    fn diamond_volume_examples() {
        let m2 = MinkowskiSlab::new(2, 10.0, (-10.0, 10.0)).unwrap();
        let v = m2.diamond_volume(&c(&[0., 0.]), &c(&[2., 0.])).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(m2.diamond_volume(&c(&[0., 0.]), &c(&[1., 1.])).unwrap(), 0.0);
        let m4 = MinkowskiSlab::new(4, 10.0, (-10.0, 10.0)).unwrap();
        let v4 = m4.diamond_volume(&c(&[0., 0., 0., 0.]), &c(&[1., 0., 0., 0.])).unwrap();
        assert!((v4 - PI / 24.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_diamond_is_an_error() {
        let m = MinkowskiSlab::new(2, 0.5, (0.0, 2.0)).unwrap();
        assert!(matches!(
            m.diamond_volume(&c(&[0., 0.]), &c(&[2., 0.])),
            Err(Error::ClippedDiamond)
        ));
        // A boosted diamond whose shadow pokes out sideways.
        let m = MinkowskiSlab::new(2, 1.0, (0.0, 2.0)).unwrap();
        assert!(m.diamond_inside(&c(&[0., 0.]), &c(&[2., 0.])));
        assert!(!m.diamond_inside(&c(&[0., 0.5]), &c(&[2., 0.5])));
    }

    #[test]
    fn monte_carlo_diamond_matches_formula() {
        let m = ModelSpacetime::minkowski(2, 1.0, (0.0, 2.0)).unwrap();
        let (p, q) = (c(&[0., 0.]), c(&[2., 0.]));
        let est = monte_carlo_volume(&m, |x| {
            let y = EventCoords(x.to_vec());
            flat_causal(&p, &y) == CausalOrder::Future && flat_causal(&y, &q) == CausalOrder::Future
        }, 1_000_000, 11)
        .unwrap();
        assert!((est.estimate - 2.0).abs() < 0.02, "{est:?}");
        assert!((est.estimate - 2.0).abs() < 3.0 * est.std_error + 1e-12);
    }

    #[test]
    fn monte_carlo_trivial_predicates() {
        let m = ModelSpacetime::minkowski(3, 0.5, (0.0, 2.0)).unwrap();
        let full = monte_carlo_volume(&m, |_| true, 1000, 1).unwrap();
        assert!((full.estimate - m.volume()).abs() <= 3.0 * full.std_error + 1e-12);
        let empty = monte_carlo_volume(&m, |_| false, 1000, 1).unwrap();
        assert_eq!(empty.estimate, 0.0);
        assert!(monte_carlo_volume(&m, |_| true, 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_conformal_volume() {
        let f = ConformalFactor::ExpTime { scale: 1.0, rate: 0.7 };
        let m = ModelSpacetime::conformal(f, 0.5, (0.0, 1.0)).unwrap();
        let est = monte_carlo_volume(&m, |_| true, 200_000, 5).unwrap();
        let exact = m.volume();
        assert!((est.estimate - exact).abs() < 4.0 * est.std_error, "{est:?} vs {exact}");
    }

    #[test]
    fn diagnostics_examples() {
        let m = ModelSpacetime::minkowski(2, 10.0, (0.0, 1.0)).unwrap();
        let d = diagnostics_bounds(&m, 10_000, 3).unwrap();
        assert!(d.sup_sigma <= 1.0 && d.sup_sigma >= 0.95, "{d:?}");
        assert!(d.jv_sup <= m.volume());
        let thin = ModelSpacetime::minkowski(2, 10.0, (0.0, 1e-6)).unwrap();
        let d = diagnostics_bounds(&thin, 500, 3).unwrap();
        assert!(d.sup_sigma <= 1e-6);
    }

    #[test]
    fn conformal_constant_scales_sigma() {
        let m = ModelSpacetime::conformal(ConformalFactor::Constant { scale: 2.0 }, 2.0, (-1.0, 3.0)).unwrap();
        assert_eq!(m.exact_sigma(&c(&[0., 0.]), &c(&[2., 0.])).unwrap(), 4.0);
        assert_eq!(m.causally_related(&c(&[0., 0.]), &c(&[0.5, 1.0])).unwrap(), CausalOrder::Unrelated);
    }

    #[test]
    fn exp_factor_has_closed_form_only_on_axis() {
        let f = ConformalFactor::ExpTime { scale: 1.0, rate: 0.5 };
        let m = ModelSpacetime::conformal(f, 2.0, (0.0, 2.0)).unwrap();
        let s = m.exact_sigma(&c(&[0., 0.]), &c(&[2., 0.])).unwrap();
        assert!((s - 2.0 * (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!(matches!(
            m.exact_sigma(&c(&[0., 0.]), &c(&[2., 0.5])),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn model_spec_round_trip() {
        let json = r#"{"model":"conformal2d","extent":1.0,"time":[0.0,1.0],"conformal":{"kind":"exp_time","scale":1.0,"rate":0.5}}"#;
        let spec: ModelSpec = serde_json::from_str(json).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.dimension(), 2);
        let bad = r#"{"model":"minkowski","dimension":2,"extent":1.0,"time":[0.0,1.0],"colour":1}"#;
        assert!(serde_json::from_str::<ModelSpec>(bad).is_err());
        assert!(ModelSpec { model: "minkowski".into(), dimension: Some(1), extent: 1.0, time: [0.0, 1.0], conformal: None }
            .build()
            .is_err());
    }

    fn arb_point(d: usize) -> impl Strategy<Value = EventCoords> {
        proptest::collection::vec(-4.0f64..4.0, d).prop_map(EventCoords)
    }

    proptest! {
        #[test]
        fn sigma_antisymmetric(p in arb_point(3), q in arb_point(3)) {
            let m = ModelSpacetime::minkowski(3, 5.0, (-5.0, 5.0)).unwrap();
            prop_assert_eq!(m.exact_sigma(&p, &q).unwrap(), -m.exact_sigma(&q, &p).unwrap());
        }

        #[test]
        fn inverse_triangle_and_transitivity(p in arb_point(3), q in arb_point(3), r in arb_point(3)) {
            let m = ModelSpacetime::minkowski(3, 5.0, (-5.0, 5.0)).unwrap();
            let (a, b, ac) = (m.exact_sigma(&p, &q).unwrap(), m.exact_sigma(&q, &r).unwrap(), m.exact_sigma(&p, &r).unwrap());
            if a > 0.0 && b > 0.0 {
                prop_assert!(ac >= a + b - 1e-12);
            }
            if m.causally_related(&p, &q).unwrap() == CausalOrder::Future
                && m.causally_related(&q, &r).unwrap() == CausalOrder::Future
                && a > 0.0 && b > 0.0
            {
                prop_assert_eq!(m.causally_related(&p, &r).unwrap(), CausalOrder::Future);
            }
        }
    }
}
