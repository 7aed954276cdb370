//! Weighted coefficient spaces and the exact actions of `M_z` and its
//! canonical left inverse.

mod function;
mod model;
mod weights;

pub use function::CoeffFunction;
pub use model::{
    make_custom_space, make_space, Evaluation, SpaceModel, DEFAULT_TOL, MIN_TRUNCATION,
};
pub use weights::{WeightKind, WeightSequence};

pub(crate) use model::{fiber_norm_sqr, unit_vector};
