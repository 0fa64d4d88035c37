//! Special functions behind the finite-sample bounds.

mod beta;
mod caps;
mod gamma;

pub use beta::incomplete_beta;
pub use caps::{
    ball_volume, cap_intersection_volume, cap_volume, CapIntersection, CapIntersectionQuery,
};
pub use gamma::ln_gamma;
