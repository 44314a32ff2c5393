//! Fixtures shared by the benchmarks in `benches/`.

use ordgeo::sprinkle::sprinkle;
use ordgeo::{ModelSpacetime, OrderedMeasureSpace, SigmaMatrix, SprinkleConfig};

/// 2D Minkowski slab `[0, 1] x [-0.5, 0.5]`.
pub fn slab_2d() -> ModelSpacetime {
    ModelSpacetime::minkowski(2, 0.5, (0.0, 1.0)).expect("valid model")
}

/// Fixed-size sprinkle of [`slab_2d`].
pub fn sprinkle_2d(n_points: usize, seed: u64) -> OrderedMeasureSpace {
    sprinkle(&SprinkleConfig::with_points(slab_2d(), n_points, seed)).expect("non-empty sprinkle")
}

pub fn exact_sigma(space: &OrderedMeasureSpace) -> SigmaMatrix {
    SigmaMatrix::exact(space, &slab_2d()).expect("minkowski sigma")
}
