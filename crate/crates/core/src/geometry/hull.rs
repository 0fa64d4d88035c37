use serde::{Deserialize, Serialize};

use super::point::{dist, dot, lex_cmp, PointCloud};
use super::projection::project_onto_hull;
use super::Ball;
use crate::error::{Error, Result};

/// Extreme points of a sample hull together with a padding radius.
///
/// Represents `conv(vertices) + B(0, padding)`. In dimension 2 the vertices are
/// counter-clockwise, start at the lexicographically smallest point and contain
/// no three consecutive collinear points. In dimension 3 and above the
/// deduplicated generating cloud is kept as an implicit representation.
#[derive(Debug, Clone, PartialEq)]
pub struct HullEstimate {
    vertices: PointCloud,
    padding: f64,
}

impl HullEstimate {
    pub fn dim(&self) -> usize {
        self.vertices.dim()
    }

    pub fn vertices(&self) -> &PointCloud {
        &self.vertices
    }

    pub fn padding(&self) -> f64 {
        self.padding
    }

    /// The same hull with a different padding radius.
    pub fn with_padding(mut self, padding: f64) -> Result<Self> {
        check_padding(padding)?;
        self.padding = padding;
        Ok(self)
    }

    /// A ball viewed as a padded one-point hull.
    pub fn from_ball(ball: &Ball) -> Self {
        HullEstimate {
            vertices: PointCloud::from_rows(&[ball.center.coords()]).expect("valid center"),
            padding: ball.radius,
        }
    }

    /// Support function `h(u) = max_v <u, v> + padding`.
    pub fn support(&self, u: &[f64]) -> f64 {
        let norm_u = dot(u, u).sqrt();
        self.vertices
            .iter()
            .map(|v| dot(u, v))
            .fold(f64::NEG_INFINITY, f64::max)
            + self.padding * norm_u
    }
}

impl Serialize for HullEstimate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HullRepr {
            dim: self.dim(),
            vertices: self.vertices.iter().map(<[f64]>::to_vec).collect(),
            padding: self.padding,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HullEstimate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = HullRepr::deserialize(d)?;
        let mut cloud = PointCloud::new(repr.dim).map_err(serde::de::Error::custom)?;
        for v in &repr.vertices {
            cloud.push(v).map_err(serde::de::Error::custom)?;
        }
        // Re-hulling restores vertex order and extremality for foreign input.
        padded_hull(&cloud, repr.padding).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct HullRepr {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    padding: f64,
}

fn check_padding(padding: f64) -> Result<()> {
    if padding >= 0.0 && padding.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "padding must be finite and >= 0, got {padding}"
        )))
    }
}

/// Convex hull of a nonempty cloud, with zero padding.
pub fn convex_hull(cloud: &PointCloud) -> Result<HullEstimate> {
    cloud.ensure_nonempty()?;
    let vertices = match cloud.dim() {
        1 => hull_1d(cloud),
        2 => hull_2d(cloud),
        _ => dedup_sorted(cloud),
    };
    Ok(HullEstimate {
        vertices,
        padding: 0.0,
    })
}

/// Padded hull `conv(cloud) + B(0, padding)`.
pub fn padded_hull(cloud: &PointCloud, padding: f64) -> Result<HullEstimate> {
    convex_hull(cloud)?.with_padding(padding)
}

fn hull_1d(cloud: &PointCloud) -> PointCloud {
    let (lo, hi) = cloud
        .iter()
        .map(|p| p[0])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
    let data = if lo == hi { vec![lo] } else { vec![lo, hi] };
    PointCloud::from_flat(1, data).expect("finite")
}

fn dedup_sorted(cloud: &PointCloud) -> PointCloud {
    let mut rows: Vec<&[f64]> = cloud.iter().collect();
    rows.sort_by(|a, b| lex_cmp(a, b));
    rows.dedup();
    PointCloud::from_rows(&rows).expect("homogeneous")
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear points are dropped.
fn hull_2d(cloud: &PointCloud) -> PointCloud {
    let mut pts: Vec<[f64; 2]> = cloud.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| lex_cmp(a, b));
    pts.dedup();
    if pts.len() <= 2 {
        return PointCloud::from_rows(&pts).expect("homogeneous");
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() + 1);
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    PointCloud::from_rows(&hull).expect("homogeneous")
}

/// `max(d(q, conv(vertices)) - padding, 0)`.
pub fn point_to_hull_distance(q: &[f64], hull: &HullEstimate) -> Result<f64> {
    Ok((unpadded_distance(q, hull)? - hull.padding).max(0.0))
}

/// Membership in the closed padded hull, up to `tol`.
pub fn hull_contains(hull: &HullEstimate, q: &[f64], tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::domain("tolerance must be >= 0"));
    }
    Ok(point_to_hull_distance(q, hull)? <= tol)
}

/// Euclidean distance from `q` to `conv(vertices)`, ignoring the padding.
pub(crate) fn unpadded_distance(q: &[f64], hull: &HullEstimate) -> Result<f64> {
    Error::check_dim(hull.dim(), q.len())?;
    let v = &hull.vertices;
    match hull.dim() {
        1 => {
            let lo = v.point(0)[0];
            let hi = v.point(v.len() - 1)[0];
            Ok((lo - q[0]).max(q[0] - hi).max(0.0))
        }
        2 => Ok(polygon_distance(v, q)),
        _ => Ok(project_onto_hull(v, q)?.distance),
    }
}

fn segment_distance(a: &[f64], b: &[f64], q: &[f64]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = [q[0] - a[0], q[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((aq[0] * ab[0] + aq[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = aq[0] - t * ab[0];
    let dy = aq[1] - t * ab[1];
    (dx * dx + dy * dy).sqrt()
}

fn polygon_distance(v: &PointCloud, q: &[f64]) -> f64 {
    let n = v.len();
    match n {
        1 => dist(v.point(0), q),
        2 => segment_distance(v.point(0), v.point(1), q),
        _ => {
            let mut inside = true;
            let mut best = f64::INFINITY;
            for i in 0..n {
                let a = v.point(i);
                let b = v.point((i + 1) % n);
                if cross(a, b, q) < 0.0 {
                    inside = false;
                }
                best = best.min(segment_distance(a, b, q));
            }
            if inside {
                0.0
            } else {
                best
            }
        }
    }
}

/// Convenience: a hull from explicit vertex rows.
pub fn hull_of_rows<R: AsRef<[f64]>>(rows: &[R], padding: f64) -> Result<HullEstimate> {
    padded_hull(&PointCloud::from_rows(rows)?, padding)
}
