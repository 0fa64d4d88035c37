use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::solve_in_place;
use super::point::{dist, dist2, dot, Point, PointCloud};
use crate::error::{Error, Result};

/// Closed ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "ball radius must be finite and >= 0, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, q: &[f64], tol: f64) -> bool {
        dist(self.center.coords(), q) <= self.radius + tol
    }
}

// Shuffling only affects running time; a fixed seed keeps results reproducible.
const SHUFFLE_SEED: u64 = 0x6d65_625f_7368_7566;

/// Smallest ball enclosing every point of a nonempty cloud.
///
/// Exact move-to-front recursion over support sets of at most `dim + 1`
/// points, run on a deterministically shuffled order. Used in every dimension.
pub fn min_enclosing_ball(cloud: &PointCloud) -> Result<Ball> {
    cloud.ensure_nonempty()?;
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    let mut solver = MoveToFront {
        cloud,
        order,
        support: Vec::with_capacity(cloud.dim() + 1),
    };
    let n = cloud.len();
    let (center, r2) = solver.run(n);
    let center = Point::new(center)?;
    // Report the radius actually needed by the data, which absorbs the
    // containment slack used during the recursion.
    let radius = cloud
        .iter()
        .map(|p| dist2(center.coords(), p))
        .fold(r2.max(0.0), f64::max)
        .sqrt();
    Ball::new(center, radius)
}

struct MoveToFront<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    support: Vec<usize>,
}

impl MoveToFront<'_> {
    fn run(&mut self, end: usize) -> (Vec<f64>, f64) {
        let mut ball = self.support_ball();
        if self.support.len() == self.cloud.dim() + 1 {
            return ball;
        }
        let mut i = 0;
        while i < end {
            let idx = self.order[i];
            let p = self.cloud.point(idx);
            if violates(&ball, p) {
                self.support.push(idx);
                ball = self.run(i);
                self.support.pop();
                self.order[..=i].rotate_right(1);
            }
            i += 1;
        }
        ball
    }

    /// Smallest ball with every support point on its boundary: the
    /// circumcenter within the affine hull of the support.
    fn support_ball(&self) -> (Vec<f64>, f64) {
        let d = self.cloud.dim();
        let Some((&first, rest)) = self.support.split_first() else {
            return (vec![0.0; d], -1.0);
        };
        let base = self.cloud.point(first);
        if rest.is_empty() {
            return (base.to_vec(), 0.0);
        }
        let k = rest.len();
        let edges: Vec<Vec<f64>> = rest
            .iter()
            .map(|&i| {
                self.cloud
                    .point(i)
                    .iter()
                    .zip(base)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        let mut gram = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for r in 0..k {
            for c in r..k {
                let g = dot(&edges[r], &edges[c]);
                gram[r * k + c] = g;
                gram[c * k + r] = g;
            }
            rhs[r] = 0.5 * dot(&edges[r], &edges[r]);
        }
        if solve_in_place(&mut gram, &mut rhs, k, 1e-12).is_none() {
            return self.diametral_fallback();
        }
        let mut center = base.to_vec();
        for (beta, e) in rhs.iter().zip(&edges) {
            for (c, ek) in center.iter_mut().zip(e) {
                *c += beta * ek;
            }
        }
        let r2 = dist2(&center, base);
        (center, r2)
    }

    /// Ball on the farthest support pair, for affinely dependent supports
    /// that only arise from rounding.
    fn diametral_fallback(&self) -> (Vec<f64>, f64) {
        let mut best = (0, 0, -1.0);
        for (a, &i) in self.support.iter().enumerate() {
            for &j in &self.support[a + 1..] {
                let d2 = dist2(self.cloud.point(i), self.cloud.point(j));
                if d2 > best.2 {
                    best = (i, j, d2);
                }
            }
        }
        let (p, q) = (self.cloud.point(best.0), self.cloud.point(best.1));
        let center: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
        (center, 0.25 * best.2)
    }
}

fn violates(ball: &(Vec<f64>, f64), p: &[f64]) -> bool {
    let (center, r2) = ball;
    if *r2 < 0.0 {
        return true;
    }
    dist2(center, p).sqrt() > r2.sqrt() * (1.0 + 1e-12)
}
