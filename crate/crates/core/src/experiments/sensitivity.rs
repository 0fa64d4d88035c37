//! Accuracy of the padded hull against its guaranteed radius, over a grid of
//! map smoothness `L` and boundary-heavy sampling shapes `alpha`.
//!
//! The input set is a disk and the map `(x1, x2) -> (L x1, x2)`, so the true
//! reachable set is an ellipse, discretized densely for ground truth.

use serde::Serialize;

use super::config::{EpsSetting, ExperimentConfig, ExperimentKind};
use super::{summarize, TimingRow};
use crate::bounds::{eps_for_delta, CoveringDescriptor, EpsQuery};
use crate::domains::{boundary_density_constant, InputSet, SamplingKind, SamplingSpec};
use crate::error::{Error, Result};
use crate::estimators::{ellipse_boundary, empirical_coverage, randup_with, COVERAGE_TOL};
use crate::exec::{trial_seed, Execution};
use crate::geometry::{convex_hull, hausdorff_hulls, HullEstimate, PointCloud};
use crate::maps::ReachMap;

const DEFAULT_M: [usize; 1] = [1000];
const DEFAULT_DELTA: f64 = 1e-3;

/// One trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    /// Hausdorff distance of the unpadded sample hull to the true hull.
    #[serde(rename = "d_H_empirical")]
    pub d_h_empirical: f64,
    /// Guaranteed radius at the configured failure probability; NaN when the
    /// bound is infeasible.
    pub eps_theoretical: f64,
    /// Hausdorff distance of the hull padded by `eps_theoretical`.
    #[serde(rename = "d_H_padded")]
    pub d_h_padded: f64,
    /// Every ground-truth boundary point lies in the padded hull.
    pub covered: bool,
    /// `covered` and `d_H_padded <= eps_theoretical` (up to the ground-truth
    /// discretization error).
    pub guarantee_holds: bool,
    pub bound_feasible: bool,
}

/// Aggregates for one `(L, alpha, M)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityCell {
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub eps_theoretical: f64,
    pub bound_feasible: bool,
    pub trials: usize,
    #[serde(rename = "d_H_mean")]
    pub d_h_mean: f64,
    #[serde(rename = "d_H_median")]
    pub d_h_median: f64,
    #[serde(rename = "d_H_std")]
    pub d_h_std: f64,
    /// Fraction of trials in which the guarantee held.
    pub guarantee_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityOutput {
    pub rows: Vec<SensitivityRow>,
    pub cells: Vec<SensitivityCell>,
    pub timing: Vec<TimingRow>,
}

struct Cell {
    l: f64,
    alpha: f64,
    m: usize,
    eps: Option<f64>,
    map: ReachMap,
    kind: SamplingKind,
    truth_points: PointCloud,
    truth: HullEstimate,
    resolution: f64,
}

pub fn run_sensitivity(cfg: &ExperimentConfig) -> Result<SensitivityOutput> {
    run_sensitivity_with(cfg, Execution::default())
}

/// [`run_sensitivity`] with an explicit policy for the trial fan-out.
pub fn run_sensitivity_with(cfg: &ExperimentConfig, exec: Execution) -> Result<SensitivityOutput> {
    cfg.expect(ExperimentKind::Sensitivity)?;
    let delta =
        match cfg.eps.unwrap_or(EpsSetting::Auto {
            delta: DEFAULT_DELTA,
        }) {
            EpsSetting::Auto { delta } => delta,
            EpsSetting::Fixed(_) => return Err(Error::Config(
                "sensitivity derives eps from a failure probability; use eps = \"auto(<delta>)\""
                    .into(),
            )),
        };
    let set = cfg
        .input_set
        .clone()
        .unwrap_or_else(|| InputSet::unit_ball(2));
    let InputSet::Ball { center, radius } = &set else {
        return Err(Error::Config("sensitivity needs a ball input set".into()));
    };
    if set.dim() != 2 {
        return Err(Error::Config("sensitivity needs a planar input set".into()));
    }
    let sec = &cfg.sensitivity;
    if sec.lipschitz.is_empty() || sec.alpha.is_empty() {
        return Err(Error::Config("sensitivity grid is empty".into()));
    }
    if let Some(l) = sec.lipschitz.iter().find(|l| !(**l >= 1.0)) {
        return Err(Error::Config(format!(
            "sensitivity lipschitz values must be >= 1, got {l}"
        )));
    }
    if let Some(a) = sec.alpha.iter().find(|a| !(**a >= 1.0)) {
        return Err(Error::Config(format!(
            "sensitivity alpha values must be >= 1, got {a}"
        )));
    }
    if sec.truth_points < 3 {
        return Err(Error::Config("truth_points must be >= 3".into()));
    }
    let (c, r) = (center.coords().to_vec(), *radius);

    let mut cells = Vec::new();
    for &l in &sec.lipschitz {
        let map = ReachMap::scaling(l)?;
        let mut truth_points = ellipse_boundary(l * r, r, sec.truth_points)?;
        let shifted: Vec<f64> = truth_points
            .iter()
            .flat_map(|q| [q[0] + l * c[0], q[1] + c[1]])
            .collect();
        truth_points = PointCloud::from_flat(2, shifted)?;
        let truth = convex_hull(&truth_points)?;
        // Largest gap between the ellipse and its inscribed polygon.
        let resolution = l * r * (1.0 - (std::f64::consts::PI / sec.truth_points as f64).cos());
        for &alpha in &sec.alpha {
            let kind = SamplingKind::BetaRadial { alpha };
            for m in cfg.m_values_or(&DEFAULT_M) {
                let query = EpsQuery {
                    p: 2,
                    r,
                    covering: CoveringDescriptor::Circle2D { radius: r },
                    lipschitz: l,
                    m,
                    delta_target: delta,
                };
                let eps = eps_for_delta(&query, |e| {
                    boundary_density_constant(&set, &kind, (e / (2.0 * l)).min(r))
                });
                let eps = match eps {
                    Ok(e) => Some(e),
                    Err(Error::Infeasible(msg)) => {
                        log::warn!("L = {l}, alpha = {alpha}, M = {m}: {msg}");
                        None
                    }
                    Err(e) => return Err(e),
                };
                cells.push(Cell {
                    l,
                    alpha,
                    m,
                    eps,
                    map: map.clone(),
                    kind,
                    truth_points: truth_points.clone(),
                    truth: truth.clone(),
                    resolution,
                });
            }
        }
    }

    let trials = cfg.trials;
    let results = exec.map_indexed(cells.len() * trials, |job| {
        let (cell, trial) = (&cells[job / trials], job % trials);
        run_trial(cell, &set, trial, trial_seed(cfg.seed, trial as u64))
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut timing = Vec::with_capacity(results.len());
    for res in results {
        let (row, elapsed) = res?;
        timing.push(TimingRow {
            label: format!("L={} alpha={}", row.l, row.alpha),
            m: row.m,
            trial: row.trial,
            elapsed_s: elapsed,
        });
        rows.push(row);
    }
    let summary = rows
        .chunks(trials)
        .zip(&cells)
        .map(|(chunk, cell)| {
            let d: Vec<f64> = chunk.iter().map(|r| r.d_h_empirical).collect();
            let s = summarize(&d);
            SensitivityCell {
                l: cell.l,
                alpha: cell.alpha,
                m: cell.m,
                eps_theoretical: cell.eps.unwrap_or(f64::NAN),
                bound_feasible: cell.eps.is_some(),
                trials,
                d_h_mean: s.mean,
                d_h_median: s.median,
                d_h_std: s.std,
                guarantee_rate: chunk.iter().filter(|r| r.guarantee_holds).count() as f64
                    / trials as f64,
            }
        })
        .collect();
    Ok(SensitivityOutput {
        rows,
        cells: summary,
        timing,
    })
}

fn run_trial(
    cell: &Cell,
    set: &InputSet,
    trial: usize,
    seed: u64,
) -> Result<(SensitivityRow, f64)> {
    let spec = SamplingSpec::new(cell.kind, seed);
    let pad = cell.eps.unwrap_or(0.0);
    let res = randup_with(&cell.map, set, &spec, cell.m, pad, Execution::Sequential)?;
    let bare = res.hull.clone().with_padding(0.0)?;
    let d_h_empirical = hausdorff_hulls(&bare, &cell.truth)?.value;
    let (d_h_padded, covered, guarantee_holds) = match cell.eps {
        Some(eps) => {
            let d = hausdorff_hulls(&res.hull, &cell.truth)?.value;
            let covered = empirical_coverage(&res, &cell.truth_points, COVERAGE_TOL)? == 1.0;
            (d, covered, covered && d <= eps + cell.resolution)
        }
        None => (f64::NAN, false, false),
    };
    Ok((
        SensitivityRow {
            l: cell.l,
            alpha: cell.alpha,
            m: cell.m,
            trial,
            seed,
            d_h_empirical,
            eps_theoretical: cell.eps.unwrap_or(f64::NAN),
            d_h_padded,
            covered,
            guarantee_holds,
            bound_feasible: cell.eps.is_some(),
        },
        res.elapsed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
            experiment = "sensitivity"
            seed = 3
            trials = 4
            m_values = [200]
            eps = "auto(1e-2)"
            [sensitivity]
            lipschitz = [1, 2]
            alpha = [1, 4]
            truth_points = 2000
            "#,
        )
        .unwrap()
    }

    #[test]
    fn grid_shape_and_determinism() {
        let cfg = small_config();
        let a = run_sensitivity_with(&cfg, Execution::Parallel).unwrap();
        let b = run_sensitivity_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 2 * 2 * 4);
        assert_eq!(a.cells.len(), 4);
        for r in &a.rows {
            assert!(r.bound_feasible);
            assert!(r.d_h_empirical >= 0.0 && r.d_h_empirical < r.eps_theoretical);
        }
    }

    #[test]
    fn rejects_fixed_eps_and_rectangles() {
        let mut cfg = small_config();
        cfg.eps = Some(EpsSetting::Fixed(0.1));
        assert!(matches!(run_sensitivity(&cfg), Err(Error::Config(_))));
        let mut cfg = small_config();
        cfg.input_set = Some(
            InputSet::rectangle(
                crate::Point::new(vec![0.0, 0.0]).unwrap(),
                crate::Point::new(vec![1.0, 1.0]).unwrap(),
            )
            .unwrap(),
        );
        assert!(matches!(run_sensitivity(&cfg), Err(Error::Config(_))));
    }
}
