//! Sampling-based reachability analysis.
//!
//! The central estimator samples inputs from a set `X`, pushes them through a
//! reachability map `f`, and returns the convex hull of the images padded by a
//! radius `eps`. Around it sit the pieces needed to reason about how good that
//! estimate is:
//!
//! - [`geometry`]: hulls, enclosing balls, point-to-hull distances and the
//!   Hausdorff distance between (padded) convex bodies.
//! - [`specfun`]: log-gamma, the regularized incomplete beta function and
//!   hyperspherical cap volumes.
//! - [`domains`]: input sets and the samplers defined over them.
//! - [`maps`]: affine maps, ReLU networks, closed-loop systems, Jacobians and a
//!   sampled Lipschitz estimator.
//! - [`estimators`]: the padded-hull estimator, the outer-ball baseline and the
//!   union-of-balls membership oracle.
//! - [`bounds`]: covering numbers, failure-probability thresholds, minimal
//!   sample counts and guaranteed accuracy radii.
//! - [`experiments`]: config-driven benchmark runners used by the CLI.
//!
//! Data-parallel loops go through [`exec`]; with the `parallel` feature
//! disabled everything runs sequentially and produces identical results.

// `!(x > 0.0)` is used on purpose to reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod domains;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod maps;
pub mod specfun;

pub use error::{Error, Result};
pub use geometry::{Ball, HullEstimate, Point, PointCloud};
