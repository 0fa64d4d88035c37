//! Euclidean projection onto the convex hull of a finite point set.
//!
//! Uses Wolfe's minimum-norm-point method on the translated set `v_i - q`: an
//! active-set iteration that alternates a linear-minimization step over all
//! vertices with an exact affine minimization over the active corral.

use super::linalg::solve_in_place;
use super::point::{dot, PointCloud};
use crate::error::{Error, Result};

/// Absolute accuracy of the returned distance.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Major-iteration cap.
pub const PROJECTION_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Projection {
    pub distance: f64,
    /// Closest point of the hull to the query.
    pub nearest: Vec<f64>,
    pub iterations: usize,
}

/// Projects `q` onto `conv(vertices)`.
pub fn project_onto_hull(vertices: &PointCloud, q: &[f64]) -> Result<Projection> {
    vertices.ensure_nonempty()?;
    Error::check_dim(vertices.dim(), q.len())?;
    let d = vertices.dim();
    let n = vertices.len();

    let shifted: Vec<f64> = vertices
        .iter()
        .flat_map(|v| v.iter().zip(q).map(|(a, b)| a - b))
        .collect();
    let p = |i: usize| &shifted[i * d..(i + 1) * d];

    let (start, start_n2) = (0..n)
        .map(|i| (i, dot(p(i), p(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let scale2 = (0..n).map(|i| dot(p(i), p(i))).fold(0.0_f64, f64::max);
    if start_n2 == 0.0 || n == 1 {
        return Ok(finish(q, p(start).to_vec(), 0));
    }

    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut x = p(start).to_vec();

    for iter in 1..=PROJECTION_MAX_ITER {
        let xx = dot(&x, &x);
        if xx <= 1e-30 * scale2 {
            return Ok(finish(q, x, iter));
        }
        let (j, min_dot) = (0..n)
            .map(|i| (i, dot(&x, p(i))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let gap = xx - min_dot;
        if gap <= 1e-12 * scale2 || gap <= 1e-3 * PROJECTION_TOL * xx.sqrt() || active.contains(&j)
        {
            return Ok(finish(q, x, iter));
        }

        active.push(j);
        weights.push(0.0);

        loop {
            let Some(alpha) = affine_min_norm(&active, &p) else {
                // The new vertex is affinely dependent on the corral up to
                // rounding; the current iterate is as good as it gets.
                active.pop();
                weights.pop();
                let x = combine(&active, &weights, &p, d);
                let xx = dot(&x, &x);
                let min_dot = (0..n).map(|i| dot(&x, p(i))).fold(f64::INFINITY, f64::min);
                if xx - min_dot <= 1e-7 * scale2.max(f64::MIN_POSITIVE) {
                    return Ok(finish(q, x, iter));
                }
                return Err(Error::Numerical(format!(
                    "hull projection stalled on a degenerate corral (gap {:.3e})",
                    xx - min_dot
                )));
            };
            if alpha.iter().all(|&a| a > 0.0) {
                weights = alpha;
                break;
            }
            let mut theta = f64::INFINITY;
            let mut blocking = 0;
            for (k, (&w, &a)) in weights.iter().zip(&alpha).enumerate() {
                if a <= 0.0 {
                    let t = w / (w - a);
                    if t < theta {
                        theta = t;
                        blocking = k;
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            weights[blocking] = 0.0;
            let mut k = 0;
            while k < active.len() {
                if weights[k] <= 0.0 {
                    active.swap_remove(k);
                    weights.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            if active.len() == 1 {
                weights = vec![1.0];
                break;
            }
        }
        x = combine(&active, &weights, &p, d);
    }
    Err(Error::Numerical(format!(
        "hull projection did not converge within {PROJECTION_MAX_ITER} iterations"
    )))
}

fn finish(q: &[f64], x: Vec<f64>, iterations: usize) -> Projection {
    let distance = dot(&x, &x).sqrt();
    let nearest = x.iter().zip(q).map(|(a, b)| a + b).collect();
    Projection {
        distance,
        nearest,
        iterations,
    }
}

fn combine<'a>(
    active: &[usize],
    weights: &[f64],
    p: &impl Fn(usize) -> &'a [f64],
    d: usize,
) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (&i, &w) in active.iter().zip(weights) {
        for (xk, pk) in x.iter_mut().zip(p(i)) {
            *xk += w * pk;
        }
    }
    x
}

/// Affine weights (summing to one) of the minimum-norm point in the affine
/// hull of the active points.
fn affine_min_norm<'a>(active: &[usize], p: &impl Fn(usize) -> &'a [f64]) -> Option<Vec<f64>> {
    let k = active.len() - 1;
    if k == 0 {
        return Some(vec![1.0]);
    }
    let base = p(active[0]);
    let edges: Vec<Vec<f64>> = active[1..]
        .iter()
        .map(|&i| p(i).iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for r in 0..k {
        for c in r..k {
            let g = dot(&edges[r], &edges[c]);
            gram[r * k + c] = g;
            gram[c * k + r] = g;
        }
        rhs[r] = -dot(&edges[r], base);
    }
    solve_in_place(&mut gram, &mut rhs, k, 1e-13)?;
    let mut alpha = Vec::with_capacity(k + 1);
    alpha.push(1.0 - rhs.iter().sum::<f64>());
    alpha.extend(rhs);
    Some(alpha)
}
