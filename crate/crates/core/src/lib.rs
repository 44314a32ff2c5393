//! Finite ordered measure spaces and the Lorentzian geometry that can be
//! recovered from them.
//!
//! The crate is organised around a handful of pipelines:
//!
//! * [`model`] supplies continuum ground truth (flat slabs in any dimension and
//!   a small catalog of conformally flat 2D slabs).
//! * [`sprinkle`] Poisson-samples a model into an [`OrderedMeasureSpace`].
//! * [`fld`] rebuilds the signed Lorentzian distance, the dimension and curve
//!   lengths from order and volume data alone.
//! * [`metrics`], [`hausdorff`] and [`pastsets`] evaluate the metric, measure and
//!   past-set constructions on the same finite objects.
//! * [`io`] and [`pipeline`] cover file formats and reproducible experiment runs.

pub mod bits;
pub mod error;
pub mod fld;
pub mod hausdorff;
pub mod io;
pub mod metrics;
pub mod model;
pub mod omspace;
pub mod pastsets;
pub mod pipeline;
pub mod relation;
pub mod rng;
pub mod sprinkle;
pub mod stats;

pub use error::{Error, Result};
pub use metrics::{SigmaMatrix, SigmaSource};
pub use model::{ConformalFactor, ConformalSlab2D, EventCoords, MinkowskiSlab, ModelSpacetime};
pub use omspace::{OrderMode, OrderedMeasureSpace, PastSet};
pub use relation::Relation;
pub use sprinkle::{SprinkleConfig, WeightMode};
