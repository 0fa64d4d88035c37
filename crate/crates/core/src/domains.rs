//! Input sets and the sampling distributions defined over them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, Point, PointCloud};

/// Compact input domain `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSet {
    Ball { center: Point, radius: f64 },
    AxisRectangle { lo: Point, hi: Point },
}

/// Inward ball radius of the set: every boundary point lies on a ball of
/// radius `r` contained in the set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RConvexityData {
    pub r: f64,
}

impl InputSet {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        let set = InputSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn unit_ball(dim: usize) -> Self {
        InputSet::Ball {
            center: Point::origin(dim),
            radius: 1.0,
        }
    }

    pub fn rectangle(lo: Point, hi: Point) -> Result<Self> {
        let set = InputSet::AxisRectangle { lo, hi };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InputSet::Ball { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::domain(format!(
                        "ball radius must be > 0, got {radius}"
                    )));
                }
            }
            InputSet::AxisRectangle { lo, hi } => {
                Error::check_dim(lo.dim(), hi.dim())?;
                if lo.coords().iter().zip(hi.coords()).any(|(l, h)| !(l < h)) {
                    return Err(Error::domain(
                        "rectangle requires lo < hi in every coordinate",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            InputSet::Ball { center, .. } => center.dim(),
            InputSet::AxisRectangle { lo, .. } => lo.dim(),
        }
    }

    pub fn contains(&self, q: &[f64], tol: f64) -> bool {
        match self {
            InputSet::Ball { center, radius } => {
                let d: f64 = q
                    .iter()
                    .zip(center.coords())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d.sqrt() <= radius + tol
            }
            InputSet::AxisRectangle { lo, hi } => q
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol),
        }
    }

    /// Balls carry their own radius; rectangles have corners and carry none.
    pub fn r_convexity(&self) -> Option<RConvexityData> {
        match self {
            InputSet::Ball { radius, .. } => Some(RConvexityData { r: *radius }),
            InputSet::AxisRectangle { .. } => None,
        }
    }

    /// Side lengths of a rectangle.
    pub fn side_lengths(&self) -> Option<Vec<f64>> {
        match self {
            InputSet::AxisRectangle { lo, hi } => Some(
                lo.coords()
                    .iter()
                    .zip(hi.coords())
                    .map(|(l, h)| h - l)
                    .collect(),
            ),
            InputSet::Ball { .. } => None,
        }
    }

    /// Perimeter of a planar rectangle or circumference of a disk.
    pub fn perimeter(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::domain("perimeter is only defined for planar sets"));
        }
        Ok(match self {
            InputSet::Ball { radius, .. } => std::f64::consts::TAU * radius,
            InputSet::AxisRectangle { .. } => {
                let s = self.side_lengths().expect("rectangle");
                2.0 * (s[0] + s[1])
            }
        })
    }
}

/// Shape of the sampling distribution `P_X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplingKind {
    /// Uniform with respect to volume.
    UniformVolume,
    /// Uniform with respect to surface measure on the boundary.
    UniformBoundary,
    /// Ball only: radius drawn as `u^{1/p}` with `u ~ Beta(alpha, 1)`.
    /// `alpha = 1` is uniform; larger values push mass toward the boundary.
    BetaRadial { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    #[serde(flatten)]
    pub kind: SamplingKind,
    #[serde(default)]
    pub seed: u64,
}

impl SamplingSpec {
    pub fn new(kind: SamplingKind, seed: u64) -> Self {
        SamplingSpec { kind, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SamplingSpec { seed, ..self }
    }

    pub fn validate_for(&self, set: &InputSet) -> Result<()> {
        if let SamplingKind::BetaRadial { alpha } = self.kind {
            if !(alpha >= 1.0 && alpha.is_finite()) {
                return Err(Error::domain(format!(
                    "beta-radial alpha must be >= 1, got {alpha}"
                )));
            }
            if !matches!(set, InputSet::Ball { .. }) {
                return Err(Error::domain(
                    "beta-radial sampling is only defined on balls",
                ));
            }
        }
        Ok(())
    }
}

/// Streaming sampler with a private RNG. Draws are consumed sequentially, so
/// the first `m` draws of a seed do not depend on how many follow.
pub struct Sampler<'a> {
    set: &'a InputSet,
    kind: SamplingKind,
    rng: ChaCha8Rng,
    face_weights: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(set: &'a InputSet, spec: &SamplingSpec) -> Result<Self> {
        set.validate()?;
        spec.validate_for(set)?;
        let face_weights = match set.side_lengths() {
            Some(sides) => (0..sides.len())
                .map(|i| {
                    sides
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, s)| s)
                        .product()
                })
                .collect(),
            None => Vec::new(),
        };
        Ok(Sampler {
            set,
            kind: spec.kind,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            face_weights,
        })
    }

    /// Writes the next sample into `out` (length = set dimension).
    pub fn draw_into(&mut self, out: &mut [f64]) {
        match self.set {
            InputSet::Ball { center, radius } => {
                let p = center.dim();
                let scale = match self.kind {
                    SamplingKind::UniformVolume => self.rng.random::<f64>().powf(1.0 / p as f64),
                    SamplingKind::UniformBoundary => 1.0,
                    SamplingKind::BetaRadial { alpha } => {
                        // Beta(alpha, 1) by inversion, then the volume radius map.
                        let u = self.rng.random::<f64>().powf(1.0 / alpha);
                        u.powf(1.0 / p as f64)
                    }
                };
                let nz = loop {
                    for o in out.iter_mut() {
                        *o = self.rng.sample(StandardNormal);
                    }
                    let nz = norm(out);
                    if nz > 0.0 {
                        break nz;
                    }
                };
                for (o, c) in out.iter_mut().zip(center.coords()) {
                    *o = c + radius * scale * *o / nz;
                }
            }
            InputSet::AxisRectangle { lo, hi } => {
                for ((o, l), h) in out.iter_mut().zip(lo.coords()).zip(hi.coords()) {
                    *o = l + (h - l) * self.rng.random::<f64>();
                }
                if self.kind == SamplingKind::UniformBoundary {
                    let total: f64 = self.face_weights.iter().sum();
                    let mut pick = self.rng.random::<f64>() * total;
                    let mut axis = self.face_weights.len() - 1;
                    for (i, w) in self.face_weights.iter().enumerate() {
                        if pick < *w {
                            axis = i;
                            break;
                        }
                        pick -= w;
                    }
                    out[axis] = if self.rng.random::<bool>() {
                        hi.coords()[axis]
                    } else {
                        lo.coords()[axis]
                    };
                }
            }
        }
    }
}

/// `m` i.i.d. samples from `spec` over `set`; deterministic given the seed.
pub fn sample(set: &InputSet, spec: &SamplingSpec, m: usize) -> Result<PointCloud> {
    if m == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    let mut sampler = Sampler::new(set, spec)?;
    let dim = set.dim();
    let mut data = vec![0.0; m * dim];
    for row in data.chunks_exact_mut(dim) {
        sampler.draw_into(row);
    }
    PointCloud::from_flat(dim, data)
}

/// Density ratio `p0` of a radial sampler near the boundary of a ball, relative
/// to the uniform distribution: with `x = (1 - eps_bar / radius)^p`,
/// `p0 = (1 - x^alpha) / (1 - x)`.
///
/// This is the probability ratio of the shell of width `eps_bar` under
/// `Beta(alpha, 1)` radial sampling versus uniform sampling; it is not a global
/// lower bound on the density (the radial density vanishes at the center for
/// `alpha > 1`). `eps_bar = radius` is the clamped limit `x = 0`, giving 1.
pub fn boundary_density_constant(set: &InputSet, kind: &SamplingKind, eps_bar: f64) -> Result<f64> {
    let InputSet::Ball { center, radius } = set else {
        return Err(Error::domain(
            "boundary density constant requires a ball input set",
        ));
    };
    let alpha = match *kind {
        SamplingKind::UniformVolume => 1.0,
        SamplingKind::BetaRadial { alpha } => alpha,
        SamplingKind::UniformBoundary => {
            return Err(Error::domain("boundary sampling has no volume density"));
        }
    };
    if !(alpha >= 1.0) {
        return Err(Error::domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if !(eps_bar > 0.0) || eps_bar > *radius {
        return Err(Error::domain(format!(
            "eps_bar must lie in (0, radius = {radius}], got {eps_bar}"
        )));
    }
    let p = center.dim() as f64;
    let e = eps_bar / radius;
    if e >= 1.0 {
        return Ok(1.0);
    }
    let ln_x = p * (-e).ln_1p();
    Ok((-(alpha * ln_x).exp_m1()) / (-ln_x.exp_m1()))
}

/// Probability that perimeter-uniform sampling on a planar rectangle lands on
/// a boundary arc of length `2 * half_width`: `2 * half_width / perimeter`.
///
/// Corner overlap is ignored, which makes this a lower bound.
pub fn boundary_coverage_constant(set: &InputSet, half_width: f64) -> Result<f64> {
    let Some(sides) = set.side_lengths() else {
        return Err(Error::domain(
            "boundary coverage constant requires a rectangle input set",
        ));
    };
    if sides.len() != 2 {
        return Err(Error::domain(
            "boundary coverage constant requires a planar rectangle",
        ));
    }
    let min_side = sides.iter().copied().fold(f64::INFINITY, f64::min);
    if !(half_width > 0.0) || half_width >= min_side / 2.0 {
        return Err(Error::domain(format!(
            "half width must lie in (0, {}), got {half_width}",
            min_side / 2.0
        )));
    }
    Ok(2.0 * half_width / set.perimeter()?)
}
