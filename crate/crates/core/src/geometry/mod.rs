//! Convex geometry on finite point sets.
//!
//! All values are immutable once built and every operation is a pure
//! function, so hulls and balls can be shared freely across threads.

mod ball;
mod hausdorff;
mod hull;
mod linalg;
mod point;
mod projection;

pub use ball::{min_enclosing_ball, Ball};
pub use hausdorff::{
    directed_vertex_distance, hausdorff_hulls, hausdorff_hulls_with, hausdorff_support_grid,
    unit_directions, HausdorffDistance, DEFAULT_DIRECTIONS_ND,
};
pub use hull::{
    convex_hull, hull_contains, hull_of_rows, padded_hull, point_to_hull_distance, HullEstimate,
};
pub use point::{Point, PointCloud};
pub use projection::{project_onto_hull, Projection, PROJECTION_MAX_ITER, PROJECTION_TOL};

pub(crate) use point::{dist, dot, norm};
