//! Finite-sample guarantees for the padded-hull estimator.
//!
//! With `d = eps / (2 L)`, the estimate is `eps`-accurate and conservative
//! with probability at least `1 - delta_M`, where
//! `delta_M = D(boundary, d) * (1 - Lambda)^M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{CapIntersection, CapIntersectionQuery};

/// Upper bound on a `d`-covering number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CoveringDescriptor {
    /// Circle of radius `radius` (boundary of a disk).
    #[serde(rename = "circle-2d")]
    Circle2D { radius: f64 },
    /// Closed planar curve of length `perimeter`, such as a rectangle boundary.
    #[serde(rename = "rect-boundary-2d")]
    RectBoundary2D { perimeter: f64 },
    /// Any set of diameter at most `d_sup` in `R^n`.
    #[serde(rename = "general-ball")]
    GeneralBall { d_sup: f64, n: usize },
}

impl CoveringDescriptor {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            CoveringDescriptor::Circle2D { radius } => ("radius", radius),
            CoveringDescriptor::RectBoundary2D { perimeter } => ("perimeter", perimeter),
            CoveringDescriptor::GeneralBall { d_sup, n } => {
                if n == 0 {
                    return Err(Error::domain("covering dimension n must be >= 1"));
                }
                ("d_sup", d_sup)
            }
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "covering {name} must be > 0, got {v}"
            )))
        }
    }

    fn is_boundary_only(&self) -> bool {
        !matches!(self, CoveringDescriptor::GeneralBall { .. })
    }
}

/// Covering number bound at radius `d`.
pub fn covering_bound(c: &CoveringDescriptor, d: f64) -> Result<f64> {
    c.validate()?;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!(
            "covering radius must be > 0, got {d}"
        )));
    }
    Ok(match *c {
        CoveringDescriptor::Circle2D { radius } => std::f64::consts::PI * radius / d + 1.0,
        CoveringDescriptor::RectBoundary2D { perimeter } => perimeter / (2.0 * d) + 1.0,
        CoveringDescriptor::GeneralBall { d_sup, n } => {
            let n = n as f64;
            (n * ((2.0 * d_sup * n.sqrt()).ln() - d.ln())).exp()
        }
    })
}

/// Where the boundary sampling constant `Lambda` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaSource {
    /// Supplied directly.
    Direct { lambda: f64 },
    /// `p0 * vol(B(0, eps/(2L)) ∩ B(r e_1, r))` for an input set whose
    /// boundary points all lie on an inward ball of radius `r`, sampled with a
    /// density bounded below by `p0`.
    Lens { p: usize, r: f64, p0: f64 },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub eps: f64,
    /// Lipschitz constant of the map.
    pub lipschitz: f64,
    pub covering: CoveringDescriptor,
    pub lambda_source: LambdaSource,
    /// The guarantee assumes the boundary of the reachable set is the image
    /// of boundary inputs. When this does not hold, sample the full input set
    /// and describe it with a `general-ball` covering of the set itself.
    #[serde(default = "default_true")]
    pub boundary_image_assumed: bool,
}

/// Constants entering `delta_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `eps / (2 L)`.
    pub covering_radius: f64,
    #[serde(rename = "D")]
    pub covering_number: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lens: Option<CapIntersection>,
}

impl BoundSpec {
    pub fn direct(
        eps: f64,
        lipschitz: f64,
        covering: CoveringDescriptor,
        lambda: f64,
    ) -> Result<Self> {
        let s = BoundSpec {
            eps,
            lipschitz,
            covering,
            lambda_source: LambdaSource::Direct { lambda },
            boundary_image_assumed: true,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn lens(
        eps: f64,
        lipschitz: f64,
        covering: CoveringDescriptor,
        p: usize,
        r: f64,
        p0: f64,
    ) -> Result<Self> {
        let s = BoundSpec {
            eps,
            lipschitz,
            covering,
            lambda_source: LambdaSource::Lens { p, r, p0 },
            boundary_image_assumed: true,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eps", self.eps)?;
        positive("lipschitz", self.lipschitz)?;
        self.covering.validate()?;
        match self.lambda_source {
            LambdaSource::Direct { lambda } => {
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(Error::domain(format!(
                        "Lambda must lie in (0, 1), got {lambda}"
                    )));
                }
            }
            LambdaSource::Lens { p, r, p0 } => {
                if p == 0 {
                    return Err(Error::domain("lens dimension p must be >= 1"));
                }
                positive("r", r)?;
                positive("p0", p0)?;
            }
        }
        if !self.boundary_image_assumed && self.covering.is_boundary_only() {
            return Err(Error::domain(
                "without the boundary-image assumption the covering must describe the full input set (general-ball)",
            ));
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<BoundConstants> {
        self.validate()?;
        let d = self.eps / (2.0 * self.lipschitz);
        let covering_number = covering_bound(&self.covering, d)?;
        let (lambda, p0, lens) = match self.lambda_source {
            LambdaSource::Direct { lambda } => (lambda, None, None),
            LambdaSource::Lens { p, r, p0 } => {
                let lens = CapIntersectionQuery::new(p, d, r)?.evaluate()?;
                (p0 * lens.volume, Some(p0), Some(lens))
            }
        };
        Ok(BoundConstants {
            covering_radius: d,
            covering_number,
            lambda,
            p0,
            lens,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Lambda = {lambda} is outside (0, 1); the guarantee is degenerate"
        )))
    }
}

/// `D (1 - Lambda)^M`, evaluated in log space.
fn delta_from(covering_number: f64, lambda: f64, m: usize) -> f64 {
    if m == 0 {
        return covering_number;
    }
    (covering_number.ln() + m as f64 * (-lambda).ln_1p()).exp()
}

/// Failure probability bound `delta_M`. Values above 1 are returned as is.
pub fn delta_m(spec: &BoundSpec, m: usize) -> Result<f64> {
    let c = spec.constants()?;
    check_lambda(c.lambda)?;
    Ok(delta_from(c.covering_number, c.lambda, m))
}

/// Smallest `M` with `delta_M <= delta_target`. Targets at or above `D` need
/// no samples.
pub fn min_samples(spec: &BoundSpec, delta_target: f64) -> Result<usize> {
    let c = spec.constants()?;
    check_lambda(c.lambda)?;
    min_samples_from(c.covering_number, c.lambda, delta_target)
}

fn min_samples_from(covering_number: f64, lambda: f64, delta_target: f64) -> Result<usize> {
    if !(delta_target > 0.0) || !delta_target.is_finite() {
        return Err(Error::domain(format!(
            "delta target must be positive and finite, got {delta_target}"
        )));
    }
    if delta_target >= covering_number {
        return Ok(0);
    }
    let raw = ((delta_target.ln() - covering_number.ln()) / (-lambda).ln_1p()).ceil();
    if !raw.is_finite() || raw > u32::MAX as f64 {
        return Err(Error::Infeasible(format!(
            "required sample count {raw} is not representable (Lambda = {lambda})"
        )));
    }
    let mut m = raw.max(0.0) as usize;
    // The closed form can be off by one either way after rounding.
    while m > 0 && delta_from(covering_number, lambda, m - 1) <= delta_target {
        m -= 1;
    }
    while delta_from(covering_number, lambda, m) > delta_target {
        m += 1;
    }
    Ok(m)
}

/// Lower end of the initial bisection bracket.
pub const EPS_BRACKET_LO: f64 = 1e-8;
/// Relative width at which bisection stops.
pub const EPS_REL_TOL: f64 = 1e-6;
const MAX_BRACKET_DOUBLINGS: usize = 64;

/// Inputs of [`eps_for_delta`] other than the `p0(eps)` closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsQuery {
    pub p: usize,
    pub r: f64,
    pub covering: CoveringDescriptor,
    pub lipschitz: f64,
    pub m: usize,
    pub delta_target: f64,
}

/// Smallest padding radius `eps` (to relative tolerance [`EPS_REL_TOL`]) whose
/// lens-based bound meets `delta_target`. `p0_of_eps` may depend on `eps`.
pub fn eps_for_delta<F>(q: &EpsQuery, p0_of_eps: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if q.m == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    if !(q.delta_target > 0.0 && q.delta_target < 1.0) {
        return Err(Error::domain(format!(
            "delta target must lie in (0, 1), got {}",
            q.delta_target
        )));
    }
    if q.p == 0 {
        return Err(Error::domain("dimension p must be >= 1"));
    }
    positive("r", q.r)?;
    positive("lipschitz", q.lipschitz)?;
    q.covering.validate()?;

    // log(delta_M(eps)) - log(target); Lambda >= 1 means no boundary point can
    // be missed, so the bound is 0 there.
    let excess = |eps: f64| -> Result<f64> {
        let d = eps / (2.0 * q.lipschitz);
        let covering_number = covering_bound(&q.covering, d)?;
        let lambda = p0_of_eps(eps)? * CapIntersectionQuery::new(q.p, d, q.r)?.evaluate()?.volume;
        if lambda >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(covering_number.ln() + q.m as f64 * (-lambda).ln_1p() - q.delta_target.ln())
    };

    let mut lo = EPS_BRACKET_LO;
    if excess(lo)? <= 0.0 {
        return Ok(lo);
    }
    let mut hi = 4.0 * q.lipschitz * q.r;
    let mut hi_excess = excess(hi)?;
    let mut doublings = 0;
    while hi_excess > 0.0 {
        if doublings == MAX_BRACKET_DOUBLINGS {
            return Err(Error::Infeasible(format!(
                "no eps in [{EPS_BRACKET_LO:e}, {hi:e}] reaches delta = {}; delta_M at the endpoints is {:e} and {:e}",
                q.delta_target,
                (excess(EPS_BRACKET_LO)? + q.delta_target.ln()).exp(),
                (hi_excess + q.delta_target.ln()).exp(),
            )));
        }
        lo = hi;
        hi *= 2.0;
        hi_excess = excess(hi)?;
        doublings += 1;
    }
    while hi - lo > EPS_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Everything the bounds calculator reports for one spec.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub spec: BoundSpec,
    #[serde(flatten)]
    pub constants: BoundConstants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "delta_M", skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_target: Option<f64>,
    #[serde(rename = "M_min", skip_serializing_if = "Option::is_none")]
    pub m_min: Option<usize>,
}

/// Constants plus `delta_M` at `m` and/or `M_min` at `delta_target`.
pub fn evaluate(
    spec: &BoundSpec,
    m: Option<usize>,
    delta_target: Option<f64>,
) -> Result<BoundResult> {
    let constants = spec.constants()?;
    check_lambda(constants.lambda)?;
    let delta_m = m.map(|m| delta_from(constants.covering_number, constants.lambda, m));
    let m_min = delta_target
        .map(|t| min_samples_from(constants.covering_number, constants.lambda, t))
        .transpose()?;
    Ok(BoundResult {
        spec: *spec,
        constants,
        m,
        delta_m,
        delta_target,
        m_min,
    })
}
