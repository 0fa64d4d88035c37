//! Front end for the bound calculators.

use serde::Serialize;

use super::config::{EpsSearchSection, ExperimentConfig, ExperimentKind};
use crate::bounds::{delta_m, eps_for_delta, evaluate, BoundResult, BoundSpec, EpsQuery};
use crate::domains::{boundary_density_constant, InputSet, SamplingKind};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSearchReport {
    pub query: EpsSearchSection,
    pub eps_guaranteed: f64,
    /// `p0` evaluated at the returned radius.
    pub p0: f64,
    /// `delta_M` at the returned radius.
    #[serde(rename = "delta_M")]
    pub delta_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_search: Option<EpsSearchReport>,
}

pub fn run_bounds_calc(cfg: &ExperimentConfig) -> Result<BoundsReport> {
    cfg.expect(ExperimentKind::BoundsCalc)?;
    let sec = &cfg.bounds;
    if sec.spec.is_none() && sec.eps_search.is_none() {
        return Err(Error::Config(
            "bounds-calc needs [bounds.spec] and/or [bounds.eps_search]".into(),
        ));
    }
    let bound = sec
        .spec
        .as_ref()
        .map(|spec| evaluate(spec, sec.m, sec.delta_target))
        .transpose()?;
    let eps_search = sec.eps_search.as_ref().map(search).transpose()?;
    Ok(BoundsReport { bound, eps_search })
}

fn search(q: &EpsSearchSection) -> Result<EpsSearchReport> {
    let p0_of_eps: Box<dyn Fn(f64) -> Result<f64>> = match (q.p0, q.alpha) {
        (Some(p0), None) => Box::new(move |_| Ok(p0)),
        (None, Some(alpha)) => {
            let ball = InputSet::ball(Point::origin(q.p), q.r)
                .map_err(|e| Error::Config(format!("eps_search: {e}")))?;
            let kind = SamplingKind::BetaRadial { alpha };
            let l = q.lipschitz;
            let r = q.r;
            Box::new(move |e| boundary_density_constant(&ball, &kind, (e / (2.0 * l)).min(r)))
        }
        _ => {
            return Err(Error::Config(
                "eps_search needs exactly one of p0 and alpha".into(),
            ))
        }
    };
    let query = EpsQuery {
        p: q.p,
        r: q.r,
        covering: q.covering,
        lipschitz: q.lipschitz,
        m: q.m,
        delta_target: q.delta_target,
    };
    let eps = eps_for_delta(&query, &p0_of_eps)?;
    let p0 = p0_of_eps(eps)?;
    let spec = BoundSpec::lens(eps, q.lipschitz, q.covering, q.p, q.r, p0)?;
    let delta = if spec.constants()?.lambda >= 1.0 {
        0.0
    } else {
        delta_m(&spec, q.m)?
    };
    Ok(EpsSearchReport {
        query: *q,
        eps_guaranteed: eps,
        p0,
        delta_m: delta,
    })
}
