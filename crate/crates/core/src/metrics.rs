//! Signed distance tables and the metrics built from them: `L^p` pullbacks of
//! `x -> f(sigma(x, .))`, the Beem past-volume metric, Noldus local metrics and
//! Busemann's distance on closed sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::ones;
use crate::error::{Error, Result};
use crate::model::ModelSpacetime;
use crate::omspace::OrderedMeasureSpace;

/// Where a [`SigmaMatrix`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    ExactModel,
    Reconstructed,
    User,
}

impl SigmaSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            SigmaSource::ExactModel => "exact_model",
            SigmaSource::Reconstructed => "reconstructed",
            SigmaSource::User => "user",
        }
    }
}

/// Antisymmetric `n x n` table of signed Lorentzian distances, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMatrix {
    n: usize,
    data: Vec<f64>,
    source: SigmaSource,
}

impl SigmaMatrix {
    pub fn zeros(n: usize, source: SigmaSource) -> Self {
        Self { n, data: vec![0.0; n * n], source }
    }

    /// Evaluates `f(i, j)` for `i < j` and fills the lower triangle by negation.
    pub fn from_fn(n: usize, source: SigmaSource, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n, source);
        for i in 0..n {
            for j in i + 1..n {
                m.set_pair(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from `(i, j, sigma(i, j))` triples; unlisted pairs are 0.
    pub fn from_upper(n: usize, entries: &[(usize, usize, f64)], source: SigmaSource) -> Result<Self> {
        let mut m = Self::zeros(n, source);
        for &(i, j, v) in entries {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidArgument(format!("bad sigma entry ({i}, {j})")));
            }
            m.set_pair(i, j, v);
        }
        Ok(m)
    }

    /// Wraps a dense row-major table, checking antisymmetry and the zero diagonal.
    pub fn from_dense(n: usize, data: Vec<f64>, source: SigmaSource) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("sigma diagonal entry {i} is non-zero")));
            }
            for j in i + 1..n {
                if data[i * n + j] != -data[j * n + i] {
                    return Err(Error::InvalidArgument(format!("sigma not antisymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data, source })
    }

    /// Exact model distances between the coordinates of a sprinkled space.
    pub fn exact(space: &OrderedMeasureSpace, model: &ModelSpacetime) -> Result<Self> {
        let coords = space
            .coords()
            .ok_or_else(|| Error::InvalidArgument("space carries no coordinates".into()))?;
        let n = space.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| if j > i { model.exact_sigma(&coords[i], &coords[j]) } else { Ok(0.0) })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_fn(n, SigmaSource::ExactModel, |i, j| rows[i][j]))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn source(&self) -> SigmaSource {
        self.source
    }

    pub fn with_source(mut self, source: SigmaSource) -> Self {
        self.source = source;
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Sets `sigma(i, j) = v` and `sigma(j, i) = -v`.
    pub fn set_pair(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = -v;
    }

    /// Restriction to the given indices, in the given order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.source, |a, b| self.get(idx[a], idx[b]))
    }
}

/// Symmetric table of (pseudo-)distances, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| if j > i { f(i, j) } else { 0.0 }).collect())
            .collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                data[i * n + j] = rows[i][j];
                data[j * n + i] = rows[i][j];
            }
        }
        Self { n, data }
    }

    /// Wraps an arbitrary table; no properties are assumed.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Symmetry, zero diagonal and triangle inequality, up to `tol`.
    pub fn check(&self, tol: f64) -> MetricCheck {
        let n = self.n;
        let mut c = MetricCheck::default();
        for i in 0..n {
            if self.get(i, i).abs() > tol {
                c.diagonal_violations += 1;
            }
            for j in 0..n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    c.symmetry_violations += 1;
                }
                if self.get(i, j) < -tol {
                    c.negative_entries += 1;
                }
            }
        }
        c.triangle_violations = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut bad = 0usize;
                for j in 0..n {
                    let dij = self.get(i, j);
                    for k in 0..n {
                        if self.get(i, k) > dij + self.get(j, k) + tol {
                            bad += 1;
                        }
                    }
                }
                bad
            })
            .sum();
        c
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricCheck {
    pub symmetry_violations: usize,
    pub diagonal_violations: usize,
    pub negative_entries: usize,
    pub triangle_violations: usize,
}

impl MetricCheck {
    pub fn passed(&self) -> bool {
        *self == MetricCheck::default()
    }
}

/// Catalog of functions `f` with `f(0) = 0` used to embed `x -> f(sigma_x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdmFunction {
    /// Indicator of the negative half-line.
    ChiMinus,
    Abs,
    /// The identity.
    Id,
    /// `(1/2 + (r/2) sgn(s)) |s| s^3`, `r` in `(-1, 1)`.
    FR { r: f64 },
    /// `s^4`.
    H,
}

impl AdmFunction {
    #[inline]
    pub fn apply(&self, s: f64) -> f64 {
        match *self {
            AdmFunction::ChiMinus => {
                if s < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            AdmFunction::Abs => s.abs(),
            AdmFunction::Id => s,
            AdmFunction::FR { r } => {
                let sgn = if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                (0.5 + 0.5 * r * sgn) * s.abs() * s * s * s
            }
            AdmFunction::H => s * s * s * s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AdmFunction::FR { r } = *self {
            if !(r > -1.0 && r < 1.0) {
                return Err(Error::InvalidArgument(format!("f_r needs r in (-1, 1), got {r}")));
            }
        }
        Ok(())
    }

    /// Checks `f^{-1}(0) = {0}` and injectivity on each open half-line on a
    /// sample grid. The indicator `chi_minus` fails the injectivity clause.
    pub fn is_admissible_on_grid(&self) -> bool {
        if self.apply(0.0) != 0.0 {
            return false;
        }
        let grid: Vec<f64> = (1..=200).map(|k| k as f64 * 0.05).collect();
        for sign in [1.0, -1.0] {
            let vals: Vec<f64> = grid.iter().map(|&s| self.apply(sign * s)).collect();
            if vals.iter().any(|&v| v == 0.0) {
                return false;
            }
            let mut sorted = vals.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
        true
    }

    pub fn label(&self) -> String {
        match self {
            AdmFunction::ChiMinus => "chi_minus".into(),
            AdmFunction::Abs => "abs".into(),
            AdmFunction::Id => "id".into(),
            AdmFunction::FR { r } => format!("f_r({r})"),
            AdmFunction::H => "h".into(),
        }
    }
}

/// Exponent of the pullback norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpNorm {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl std::str::FromStr for LpNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(LpNorm::One),
            "2" => Ok(LpNorm::Two),
            "inf" | "infinity" => Ok(LpNorm::Inf),
            _ => Err(Error::InvalidArgument(format!("unknown norm `{s}` (expected 1, 2 or inf)"))),
        }
    }
}

/// `d(x, y) = || f(sigma(x, .)) - f(sigma(y, .)) ||_p` against the weights.
///
/// `p = 1` and `p = 2` weight each probe point; `p = inf` is the unweighted max.
/// Sums run over probe points in index order.
pub fn lp_pullback(sigma: &SigmaMatrix, weights: &[f64], f: AdmFunction, p: LpNorm) -> Result<DistanceMatrix> {
    let n = sigma.len();
    if weights.len() != n {
        return Err(Error::ShapeMismatch(format!("{} weights for {n} points", weights.len())));
    }
    f.validate()?;
    let fv: Vec<f64> = sigma.data().iter().map(|&s| f.apply(s)).collect();
    let row = |i: usize| &fv[i * n..(i + 1) * n];
    Ok(DistanceMatrix::from_fn(n, |x, y| {
        let (a, b) = (row(x), row(y));
        match p {
            LpNorm::One => {
                let mut s = 0.0;
                for c in 0..n {
                    s += weights[c] * (a[c] - b[c]).abs();
                }
                s
            }
            LpNorm::Two => {
                let mut s = 0.0;
                for c in 0..n {
                    let d = a[c] - b[c];
                    s += weights[c] * d * d;
                }
                s.sqrt()
            }
            LpNorm::Inf => a.iter().zip(b).fold(0.0, |m, (u, v)| f64::max(m, (u - v).abs())),
        }
    }))
}

/// `d(p, q) = Vol(I^-(p) △ I^-(q))`, summed in index order.
pub fn beem_metric(space: &OrderedMeasureSpace) -> DistanceMatrix {
    let w = space.weights();
    DistanceMatrix::from_fn(space.len(), |p, q| {
        let (a, b) = (space.past_words(p, crate::OrderMode::Chrono), space.past_words(q, crate::OrderMode::Chrono));
        let mut s = 0.0;
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            for bit in ones(&[x ^ y]) {
                s += w[k * 64 + bit];
            }
        }
        s
    })
}

/// `d_K(p, q) = max_{c in K} |sigma(p, c) - sigma(q, c)|`.
pub fn noldus_metric(sigma: &SigmaMatrix, k: &[usize]) -> Result<DistanceMatrix> {
    if k.is_empty() {
        return Err(Error::EmptySet("noldus probe set K"));
    }
    if let Some(&c) = k.iter().find(|&&c| c >= sigma.len()) {
        return Err(Error::InvalidArgument(format!("probe index {c} out of range")));
    }
    Ok(DistanceMatrix::from_fn(sigma.len(), |p, q| {
        k.iter().fold(0.0, |m, &c| f64::max(m, (sigma.get(p, c) - sigma.get(q, c)).abs()))
    }))
}

/// A non-empty subset of a finite metric carrier, with a base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSetRep {
    pub members: Vec<usize>,
    pub base: usize,
}

impl ClosedSetRep {
    pub fn new(members: Vec<usize>, base: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySet("closed set"));
        }
        Ok(Self { members, base })
    }
}

fn set_distance(metric: &DistanceMatrix, x: usize, s: &[usize]) -> f64 {
    s.iter().map(|&a| metric.get(x, a)).fold(f64::INFINITY, f64::min)
}

/// `max_x |delta(x, A) - delta(x, B)| exp(-delta(x0, x))` over `samples`.
///
/// Exact when `samples` is the whole carrier, an estimate otherwise.
pub fn busemann_d1(a: &ClosedSetRep, b: &ClosedSetRep, metric: &DistanceMatrix, samples: &[usize]) -> Result<f64> {
    if a.members.is_empty() || b.members.is_empty() {
        return Err(Error::EmptySet("closed set"));
    }
    if a.base != b.base {
        return Err(Error::InvalidArgument("closed sets use different base points".into()));
    }
    if samples.is_empty() {
        return Err(Error::EmptySet("sample set"));
    }
    let n = metric.len();
    if a.members.iter().chain(&b.members).chain(samples).chain([&a.base]).any(|&i| i >= n) {
        return Err(Error::InvalidArgument("index outside the carrier".into()));
    }
    Ok(samples.iter().fold(0.0, |m, &x| {
        let v = (set_distance(metric, x, &a.members) - set_distance(metric, x, &b.members)).abs()
            * (-metric.get(a.base, x)).exp();
        f64::max(m, v)
    }))
}
