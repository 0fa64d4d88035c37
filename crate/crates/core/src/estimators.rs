//! Set estimators built from propagated samples.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::domains::{sample, InputSet, SamplingSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{
    dist, hull_contains, min_enclosing_ball, padded_hull, Ball, HullEstimate, PointCloud,
};
use crate::maps::ReachMap;

/// Default slack for coverage checks; `eps` does the covering.
pub const COVERAGE_TOL: f64 = 1e-9;

/// Output of the padded-hull estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandupResult {
    /// Convex hull of the images, padded by `eps`.
    pub hull: HullEstimate,
    pub samples_out: PointCloud,
    /// Seconds spent sampling, propagating and hulling.
    pub elapsed: f64,
    pub seed: u64,
}

/// Output of the outer-ball estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallResult {
    /// Minimum enclosing ball of the images, radius already padded by `eps`.
    pub ball: Ball,
    pub samples_out: PointCloud,
    pub elapsed: f64,
    pub seed: u64,
}

fn check_inputs(map: &ReachMap, set: &InputSet, m: usize, eps: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "eps must be finite and >= 0, got {eps}"
        )));
    }
    Error::check_dim(map.in_dim(), set.dim())
}

fn propagate(
    map: &ReachMap,
    set: &InputSet,
    spec: &SamplingSpec,
    m: usize,
    exec: Execution,
) -> Result<PointCloud> {
    map.eval_cloud(&sample(set, spec, m)?, exec)
}

/// Samples `m` inputs, maps them and returns their hull padded by `eps`.
pub fn randup(
    map: &ReachMap,
    set: &InputSet,
    spec: &SamplingSpec,
    m: usize,
    eps: f64,
) -> Result<RandupResult> {
    randup_with(map, set, spec, m, eps, Execution::default())
}

/// [`randup`] with an explicit execution policy for the batched map
/// evaluation. The result does not depend on the policy.
pub fn randup_with(
    map: &ReachMap,
    set: &InputSet,
    spec: &SamplingSpec,
    m: usize,
    eps: f64,
    exec: Execution,
) -> Result<RandupResult> {
    check_inputs(map, set, m, eps)?;
    let start = Instant::now();
    let samples_out = propagate(map, set, spec, m, exec)?;
    let hull = padded_hull(&samples_out, eps)?;
    Ok(RandupResult {
        hull,
        samples_out,
        elapsed: start.elapsed().as_secs_f64(),
        seed: spec.seed,
    })
}

/// Same sampling as [`randup`], bounded by the minimum enclosing ball instead
/// of the hull.
pub fn gotube_ball(
    map: &ReachMap,
    set: &InputSet,
    spec: &SamplingSpec,
    m: usize,
    eps: f64,
) -> Result<BallResult> {
    gotube_ball_with(map, set, spec, m, eps, Execution::default())
}

pub fn gotube_ball_with(
    map: &ReachMap,
    set: &InputSet,
    spec: &SamplingSpec,
    m: usize,
    eps: f64,
    exec: Execution,
) -> Result<BallResult> {
    check_inputs(map, set, m, eps)?;
    let start = Instant::now();
    let samples_out = propagate(map, set, spec, m, exec)?;
    let tight = min_enclosing_ball(&samples_out)?;
    let ball = Ball::new(tight.center, tight.radius + eps)?;
    Ok(BallResult {
        ball,
        samples_out,
        elapsed: start.elapsed().as_secs_f64(),
        seed: spec.seed,
    })
}

/// `union_i B(y_i, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionOfBalls {
    centers: PointCloud,
    radius: f64,
}

impl UnionOfBalls {
    pub fn new(centers: PointCloud, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!(
                "radius must be finite and >= 0, got {radius}"
            )));
        }
        Ok(UnionOfBalls { centers, radius })
    }

    pub fn centers(&self) -> &PointCloud {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Whether `q` lies within `radius` of some center.
pub fn union_contains(u: &UnionOfBalls, q: &[f64]) -> Result<bool> {
    Error::check_dim(u.centers.dim(), q.len())?;
    Ok(u.centers.iter().any(|c| dist(c, q) <= u.radius))
}

/// Fraction of `truth` points inside the padded hull, up to `tol`.
pub fn empirical_coverage(estimate: &RandupResult, truth: &PointCloud, tol: f64) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::domain("ground-truth cloud is empty"));
    }
    Error::check_dim(estimate.hull.dim(), truth.dim())?;
    let mut inside = 0usize;
    for q in truth.iter() {
        if hull_contains(&estimate.hull, q, tol)? {
            inside += 1;
        }
    }
    Ok(inside as f64 / truth.len() as f64)
}

/// `n` points at equally spaced angles on the ellipse with semi-axes `a`
/// (first coordinate) and `b`, starting at `(a, 0)`.
pub fn ellipse_boundary(a: f64, b: f64, n: usize) -> Result<PointCloud> {
    if !(a > 0.0 && b > 0.0) || n < 3 {
        return Err(Error::domain(
            "ellipse needs positive semi-axes and at least 3 points",
        ));
    }
    let mut data = Vec::with_capacity(2 * n);
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n as f64;
        data.push(a * t.cos());
        data.push(b * t.sin());
    }
    PointCloud::from_flat(2, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::SamplingKind;
    use crate::geometry::Point;

    fn disk_setup(l: f64) -> (ReachMap, InputSet) {
        (ReachMap::scaling(l).unwrap(), InputSet::unit_ball(2))
    }

    #[test]
    fn single_sample() {
        let (f, x) = disk_setup(1.0);
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, 3);
        let r = randup(&f, &x, &spec, 1, 0.1).unwrap();
        assert_eq!(r.hull.vertices().len(), 1);
        assert_eq!(r.hull.padding(), 0.1);
        let b = gotube_ball(&f, &x, &spec, 1, 0.1).unwrap();
        assert_eq!(b.ball.radius, 0.1);
        assert_eq!(b.ball.center.coords(), r.samples_out.point(0));
    }

    #[test]
    fn inner_approximation_and_samples_inside() {
        let (f, x) = disk_setup(1.0);
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, 11);
        let r = randup(&f, &x, &spec, 500, 0.0).unwrap();
        assert!(r
            .hull
            .vertices()
            .iter()
            .all(|v| (v[0] * v[0] + v[1] * v[1]).sqrt() <= 1.0));
        for y in r.samples_out.iter() {
            assert!(hull_contains(&r.hull, y, 1e-9).unwrap());
        }
    }

    #[test]
    fn ball_contains_hull() {
        let (f, x) = disk_setup(2.0);
        let spec = SamplingSpec::new(SamplingKind::BetaRadial { alpha: 2.0 }, 5);
        let r = randup(&f, &x, &spec, 300, 0.05).unwrap();
        let b = gotube_ball(&f, &x, &spec, 300, 0.05).unwrap();
        assert_eq!(r.samples_out, b.samples_out);
        let tight = b.ball.radius - 0.05;
        for v in r.hull.vertices().iter() {
            assert!(dist(v, b.ball.center.coords()) <= tight + 1e-9);
        }
    }

    #[test]
    fn execution_policy_is_invisible() {
        let (f, x) = disk_setup(2.0);
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, 8);
        let a = randup_with(&f, &x, &spec, 10_000, 0.0, Execution::Sequential).unwrap();
        let b = randup_with(&f, &x, &spec, 10_000, 0.0, Execution::Parallel).unwrap();
        assert_eq!(a.hull, b.hull);
        assert_eq!(a.samples_out, b.samples_out);
    }

    #[test]
    fn union_membership() {
        let c = PointCloud::from_rows(&[[0.0, 0.0], [3.0, 0.0]]).unwrap();
        let u = UnionOfBalls::new(c, 1.0).unwrap();
        assert!(union_contains(&u, &[3.0, 0.0]).unwrap());
        assert!(union_contains(&u, &[0.0, 1.0]).unwrap());
        assert!(!union_contains(&u, &[1.5, 0.0]).unwrap());
        assert!(union_contains(&u, &[1.0]).is_err());
        assert!(UnionOfBalls::new(PointCloud::new(2).unwrap(), -1.0).is_err());
    }

    #[test]
    fn coverage_edges() {
        let (f, x) = disk_setup(1.0);
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, 2);
        let r = randup(&f, &x, &spec, 50, 0.0).unwrap();
        assert_eq!(
            empirical_coverage(&r, &r.samples_out, COVERAGE_TOL).unwrap(),
            1.0
        );
        let huge = RandupResult {
            hull: r.hull.clone().with_padding(10.0).unwrap(),
            ..r.clone()
        };
        let truth = ellipse_boundary(1.0, 1.0, 100).unwrap();
        assert_eq!(
            empirical_coverage(&huge, &truth, COVERAGE_TOL).unwrap(),
            1.0
        );
        assert!(empirical_coverage(&r, &truth, COVERAGE_TOL).unwrap() < 1.0);
        assert!(empirical_coverage(&r, &PointCloud::new(2).unwrap(), COVERAGE_TOL).is_err());
    }

    #[test]
    fn argument_checks() {
        let (f, x) = disk_setup(1.0);
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, 2);
        assert!(randup(&f, &x, &spec, 0, 0.0).is_err());
        assert!(randup(&f, &x, &spec, 5, -1.0).is_err());
        let x3 = InputSet::ball(Point::origin(3), 1.0).unwrap();
        assert!(matches!(
            randup(&f, &x3, &spec, 5, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn result_round_trips_through_json() {
        let (f, x) = disk_setup(1.5);
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, 4);
        let r = randup(&f, &x, &spec, 20, 0.01).unwrap();
        let back: RandupResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
