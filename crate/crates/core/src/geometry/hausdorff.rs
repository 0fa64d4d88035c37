//! Hausdorff distance between padded convex hulls.
//!
//! Everything rests on the support-function identity
//! `d_H(A, B) = sup_{|u| = 1} |h_A(u) - h_B(u)|`.
//!
//! In the plane the support points of both polygons are constant on the arcs
//! between consecutive edge normals, so the supremum is found exactly by
//! merging the two normal fans. In higher dimension, equal paddings reduce to
//! the unpadded hulls, where the distance is attained at a vertex because the
//! distance to a convex set is a convex function. Unequal paddings there have
//! no finite witness set, so the identity is evaluated on a direction grid and
//! the result is flagged as approximate.

use serde::Serialize;

use super::hull::{unpadded_distance, HullEstimate};
use crate::error::{Error, Result};

/// Direction count for the grid route in dimension >= 3.
pub const DEFAULT_DIRECTIONS_ND: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffDistance {
    pub value: f64,
    /// True when the value comes from a finite direction grid.
    pub approximate: bool,
}

pub fn hausdorff_hulls(a: &HullEstimate, b: &HullEstimate) -> Result<HausdorffDistance> {
    hausdorff_hulls_with(a, b, DEFAULT_DIRECTIONS_ND)
}

/// As [`hausdorff_hulls`], with `directions` grid points for the approximate
/// route.
pub fn hausdorff_hulls_with(
    a: &HullEstimate,
    b: &HullEstimate,
    directions: usize,
) -> Result<HausdorffDistance> {
    Error::check_dim(a.dim(), b.dim())?;
    if a.dim() == 1 {
        // Two directions are the whole unit sphere of R^1.
        return Ok(HausdorffDistance {
            value: support_grid(a, b, &[vec![1.0], vec![-1.0]]),
            approximate: false,
        });
    }
    if a.dim() == 2 {
        return Ok(HausdorffDistance {
            value: planar_hausdorff(a, b),
            approximate: false,
        });
    }
    if a.padding() == b.padding() {
        return Ok(HausdorffDistance {
            value: vertex_hausdorff(a, b)?,
            approximate: false,
        });
    }
    Ok(HausdorffDistance {
        value: hausdorff_support_grid(a, b, directions)?,
        approximate: true,
    })
}

/// Largest distance from a vertex of `from` to the unpadded hull of `to`.
pub fn directed_vertex_distance(from: &HullEstimate, to: &HullEstimate) -> Result<f64> {
    Error::check_dim(from.dim(), to.dim())?;
    from.vertices()
        .iter()
        .map(|v| unpadded_distance(v, to))
        .try_fold(0.0_f64, |acc, d| Ok(acc.max(d?)))
}

fn vertex_hausdorff(a: &HullEstimate, b: &HullEstimate) -> Result<f64> {
    Ok(directed_vertex_distance(a, b)?.max(directed_vertex_distance(b, a)?))
}

/// Support vertex lookup for a convex polygon in counterclockwise order.
struct NormalFan<'a> {
    verts: &'a [f64],
    /// `(angle, vertex)`: the vertex supports directions from this angle up to
    /// the next entry's angle, cyclically.
    arcs: Vec<(f64, usize)>,
}

fn angle_of(x: f64, y: f64) -> f64 {
    let t = y.atan2(x);
    if t < 0.0 {
        t + std::f64::consts::TAU
    } else {
        t
    }
}

impl<'a> NormalFan<'a> {
    fn new(hull: &'a HullEstimate) -> Self {
        let verts = hull.vertices().as_flat();
        let n = verts.len() / 2;
        let mut arcs = Vec::with_capacity(n);
        if n >= 2 {
            for i in 0..n {
                let j = (i + 1) % n;
                let (dx, dy) = (
                    verts[2 * j] - verts[2 * i],
                    verts[2 * j + 1] - verts[2 * i + 1],
                );
                // Outward normal of a counterclockwise edge.
                arcs.push((angle_of(dy, -dx), j));
            }
            arcs.sort_by(|p, q| p.0.total_cmp(&q.0));
        }
        NormalFan { verts, arcs }
    }

    fn support_vertex(&self, theta: f64) -> [f64; 2] {
        let k = if self.arcs.is_empty() {
            0
        } else {
            let pos = self.arcs.partition_point(|&(t, _)| t <= theta);
            if pos == 0 {
                self.arcs[self.arcs.len() - 1].1
            } else {
                self.arcs[pos - 1].1
            }
        };
        [self.verts[2 * k], self.verts[2 * k + 1]]
    }
}

/// Exact planar Hausdorff distance by merging normal fans.
fn planar_hausdorff(a: &HullEstimate, b: &HullEstimate) -> f64 {
    use std::f64::consts::{PI, TAU};
    let (fa, fb) = (NormalFan::new(a), NormalFan::new(b));
    let mut cuts: Vec<f64> = fa.arcs.iter().chain(&fb.arcs).map(|&(t, _)| t).collect();
    cuts.push(0.0);
    cuts.push(TAU);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let c = a.padding() - b.padding();
    let mut best = 0.0_f64;
    for arc in cuts.windows(2) {
        let (t0, t1) = (arc[0], arc[1]);
        let mid = 0.5 * (t0 + t1);
        let (va, vb) = (fa.support_vertex(mid), fb.support_vertex(mid));
        let w = [va[0] - vb[0], va[1] - vb[1]];
        // On this arc h_a - h_b = <u(theta), w> + c, extremal at the ends or
        // where u is parallel to w.
        let g = |t: f64| (t.cos() * w[0] + t.sin() * w[1] + c).abs();
        best = best.max(g(t0)).max(g(t1));
        let wn = w[0].hypot(w[1]);
        if wn > 0.0 {
            let tw = angle_of(w[0], w[1]);
            let tw_opp = if tw >= PI { tw - PI } else { tw + PI };
            if t0 <= tw && tw <= t1 {
                best = best.max((wn + c).abs());
            }
            if t0 <= tw_opp && tw_opp <= t1 {
                best = best.max((c - wn).abs());
            }
        }
    }
    best
}

/// `max_u |h_a(u) - h_b(u)|` over `n` unit directions.
pub fn hausdorff_support_grid(a: &HullEstimate, b: &HullEstimate, n: usize) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    if n == 0 {
        return Err(Error::domain("direction grid must be nonempty"));
    }
    Ok(support_grid(a, b, &unit_directions(a.dim(), n)))
}

fn support_grid(a: &HullEstimate, b: &HullEstimate, dirs: &[Vec<f64>]) -> f64 {
    dirs.iter()
        .map(|u| (a.support(u) - b.support(u)).abs())
        .fold(0.0, f64::max)
}

/// Deterministic unit directions: an equiangular fan in the plane, Halton
/// points pushed through Box-Muller and normalized otherwise.
pub fn unit_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let bases = first_primes(dim + dim % 2);
            (1..=n)
                .map(|k| {
                    let mut g = Vec::with_capacity(dim + 1);
                    for pair in bases.chunks(2) {
                        let u1 = radical_inverse(k as u64, pair[0]);
                        let u2 = radical_inverse(k as u64, pair[1]);
                        let r = (-2.0 * u1.ln()).sqrt();
                        let t = std::f64::consts::TAU * u2;
                        g.push(r * t.cos());
                        g.push(r * t.sin());
                    }
                    g.truncate(dim);
                    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    g.iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    r
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}
