//! Volumes of hyperspherical caps and of the lens `B(0, rho) ∩ B(r e_1, r)`.
//!
//! Everything is assembled in log space so that `r^p` and the gamma factor do
//! not overflow in high dimension.

use serde::Serialize;

use super::beta::incomplete_beta;
use super::gamma::ln_gamma_pos;
use crate::error::{Error, Result};

fn check_dim(p: usize) -> Result<()> {
    if p == 0 {
        Err(Error::domain("dimension must be >= 1"))
    } else {
        Ok(())
    }
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {r}"
        )))
    }
}

/// `ln(pi^{p/2} r^p / Gamma(p/2 + 1))`.
fn ln_ball_volume(p: usize, r: f64) -> f64 {
    let half_p = p as f64 / 2.0;
    half_p * std::f64::consts::PI.ln() - ln_gamma_pos(half_p + 1.0) + p as f64 * r.ln()
}

/// Lebesgue volume of the `p`-ball of radius `r`.
pub fn ball_volume(p: usize, r: f64) -> Result<f64> {
    check_dim(p)?;
    check_radius("radius", r)?;
    Ok(ln_ball_volume(p, r).exp())
}

/// Volume of the part of the `p`-ball of radius `r` lying beyond the
/// hyperplane at signed distance `a` from its center.
///
/// `a = r` is the empty cap, `a = 0` half the ball and `a = -r` the whole ball.
pub fn cap_volume(p: usize, r: f64, a: f64) -> Result<f64> {
    check_dim(p)?;
    check_radius("radius", r)?;
    if !a.is_finite() || a.abs() > r {
        return Err(Error::domain(format!(
            "cap offset |a| = {} exceeds radius {r}",
            a.abs()
        )));
    }
    let t = a / r;
    // 1 - t^2 without cancellation near |t| = 1.
    let z = ((1.0 - t) * (1.0 + t)).clamp(0.0, 1.0);
    let i = incomplete_beta(z, (p as f64 + 1.0) / 2.0, 0.5)?;
    let ln_half = ln_ball_volume(p, r) - std::f64::consts::LN_2;
    let factor = if a >= 0.0 { i } else { 2.0 - i };
    if factor <= 0.0 {
        return Ok(0.0);
    }
    Ok((ln_half + factor.ln()).exp())
}

/// The lens `B(0, rho) ∩ B(r e_1, r)` in `R^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapIntersectionQuery {
    pub p: usize,
    pub rho: f64,
    pub r: f64,
}

/// Lens volume with the intermediate constants that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapIntersection {
    pub volume: f64,
    /// Offset of the cutting plane from the origin, `rho^2 / (2 r)`.
    pub c1: f64,
    /// Offset of the cutting plane from `r e_1`, `(2 r^2 - rho^2) / (2 r)`.
    pub c2: f64,
    pub cap_small: f64,
    pub cap_large: f64,
    /// True when `rho >= 2 r` and the offset ball lies inside `B(0, rho)`.
    pub contained: bool,
}

impl CapIntersectionQuery {
    pub fn new(p: usize, rho: f64, r: f64) -> Result<Self> {
        check_dim(p)?;
        check_radius("offset ball radius r", r)?;
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!(
                "rho must be finite and >= 0, got {rho}"
            )));
        }
        Ok(CapIntersectionQuery { p, rho, r })
    }

    pub fn evaluate(&self) -> Result<CapIntersection> {
        let CapIntersectionQuery { p, rho, r } = *self;
        check_dim(p)?;
        check_radius("offset ball radius r", r)?;
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!(
                "rho must be finite and >= 0, got {rho}"
            )));
        }
        let c1 = rho * rho / (2.0 * r);
        let c2 = (2.0 * r * r - rho * rho) / (2.0 * r);
        if rho == 0.0 {
            return Ok(CapIntersection {
                volume: 0.0,
                c1,
                c2,
                cap_small: 0.0,
                cap_large: 0.0,
                contained: false,
            });
        }
        if rho >= 2.0 * r {
            // Every point of B(r e_1, r) has norm <= 2 r.
            let full = ball_volume(p, r)?;
            return Ok(CapIntersection {
                volume: full,
                c1,
                c2,
                cap_small: 0.0,
                cap_large: full,
                contained: true,
            });
        }
        let cap_small = cap_volume(p, rho, c1.min(rho))?;
        let cap_large = cap_volume(p, r, c2.clamp(-r, r))?;
        Ok(CapIntersection {
            volume: cap_small + cap_large,
            c1,
            c2,
            cap_small,
            cap_large,
            contained: false,
        })
    }
}

/// `λ(B(0, rho) ∩ B(r e_1, r))`.
pub fn cap_intersection_volume(q: &CapIntersectionQuery) -> Result<f64> {
    Ok(q.evaluate()?.volume)
}
