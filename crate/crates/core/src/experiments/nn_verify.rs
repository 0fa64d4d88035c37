//! Closed-loop reachability of a ReLU-controlled linear system: padded hull
//! versus enclosing ball, both measured against a large-sample ground truth.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{EpsSetting, EstimatorKind, ExperimentConfig, ExperimentKind};
use super::{summarize, TimingRow, GROUND_TRUTH_STREAM};
use crate::bounds::{evaluate, BoundResult, BoundSpec, CoveringDescriptor};
use crate::domains::{boundary_coverage_constant, InputSet, SamplingKind, SamplingSpec};
use crate::error::{Error, Result};
use crate::estimators::{gotube_ball_with, randup_with, COVERAGE_TOL};
use crate::exec::{trial_seed, Execution};
use crate::geometry::{hausdorff_hulls, hull_contains, HullEstimate, Point};
use crate::maps::{
    build_saturated_feedback_controller, estimate_lipschitz, Matrix, ReachMap, ReluNetwork,
};

const DEFAULT_M: [usize; 3] = [100, 1_000, 10_000];

/// One estimator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub experiment: &'static str,
    pub horizon: usize,
    pub estimator: EstimatorKind,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub eps: f64,
    pub hausdorff_error: f64,
    /// The distance came from a direction grid rather than an exact route.
    pub approximate: bool,
    /// Every ground-truth hull vertex lies inside the estimate.
    pub covered: bool,
    /// Reported through the timing sidecar only, so that the main CSV is
    /// reproducible.
    #[serde(skip)]
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NnSummaryRow {
    pub horizon: usize,
    pub estimator: EstimatorKind,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    #[serde(rename = "d_H_mean")]
    pub d_h_mean: f64,
    #[serde(rename = "d_H_median")]
    pub d_h_median: f64,
    #[serde(rename = "d_H_std")]
    pub d_h_std: f64,
    pub coverage_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruthInfo {
    pub horizon: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    pub vertices: usize,
    pub from_cache: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonLipschitz {
    pub horizon: usize,
    pub l_hat: f64,
    pub samples: usize,
}

/// Contents of the bounds sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NnBoundsReport {
    /// `"constructed"` or the weights file that was loaded.
    pub controller: String,
    pub warnings: Vec<String>,
    /// Minimal boundary sample count for the configured `eps`, `delta`, `L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundResult>,
    pub lipschitz_sampled: Vec<HorizonLipschitz>,
    pub ground_truth: Vec<GroundTruthInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnVerifyOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<NnSummaryRow>,
    pub bounds: NnBoundsReport,
    pub timing: Vec<TimingRow>,
}

pub fn run_nn_verify(cfg: &ExperimentConfig) -> Result<NnVerifyOutput> {
    run_nn_verify_with(cfg, Execution::default())
}

/// [`run_nn_verify`] with an explicit policy for ground-truth evaluation and
/// the trial fan-out.
pub fn run_nn_verify_with(cfg: &ExperimentConfig, exec: Execution) -> Result<NnVerifyOutput> {
    cfg.expect(ExperimentKind::NnVerify)?;
    let sec = &cfg.nn_verify;
    let eps = match cfg.eps.unwrap_or(EpsSetting::Fixed(0.0)) {
        EpsSetting::Fixed(e) => e,
        EpsSetting::Auto { .. } => {
            return Err(Error::Config(
                "nn-verify needs a fixed eps (0 for error reporting)".into(),
            ))
        }
    };
    if sec.horizons.is_empty() || sec.estimators.is_empty() {
        return Err(Error::Config(
            "nn-verify needs at least one horizon and one estimator".into(),
        ));
    }
    let set = match &cfg.input_set {
        Some(s) => s.clone(),
        None => InputSet::rectangle(Point::new(vec![2.5, -0.25])?, Point::new(vec![3.0, 0.25])?)?,
    };
    let kind = cfg.sampling.unwrap_or(SamplingKind::UniformVolume);
    SamplingSpec::new(kind, cfg.seed)
        .validate_for(&set)
        .map_err(|e| Error::Config(format!("sampling: {e}")))?;

    let mut warnings = Vec::new();
    let (controller, controller_name) = load_controller(sec, &mut warnings)?;
    let a =
        Matrix::from_rows(sec.a.clone()).map_err(|e| Error::Config(format!("nn_verify.a: {e}")))?;
    let b =
        Matrix::from_rows(sec.b.clone()).map_err(|e| Error::Config(format!("nn_verify.b: {e}")))?;
    let maps: Vec<(usize, ReachMap)> = sec
        .horizons
        .iter()
        .map(|&h| {
            ReachMap::closed_loop(a.clone(), b.clone(), controller.clone(), h)
                .map(|m| (h, m))
                .map_err(|e| Error::Config(format!("closed loop: {e}")))
        })
        .collect::<Result<_>>()?;
    if maps[0].1.in_dim() != set.dim() {
        return Err(Error::Config(format!(
            "input set has dimension {}, the system state has {}",
            set.dim(),
            maps[0].1.in_dim()
        )));
    }

    let mut cache = GroundTruthCache::open(sec.ground_truth_cache.as_deref(), &mut warnings);
    let gt_seed = cfg.seed ^ GROUND_TRUTH_STREAM;
    let mut truths = Vec::with_capacity(maps.len());
    let mut truth_info = Vec::with_capacity(maps.len());
    for (h, map) in &maps {
        let key = serde_json::to_string(&(map, &set, kind, cfg.ground_truth_m, gt_seed))?;
        let (hull, from_cache) = match cache.get(&key) {
            Some(hull) => (hull, true),
            None => {
                let spec = SamplingSpec::new(kind, gt_seed);
                let hull = randup_with(map, &set, &spec, cfg.ground_truth_m, 0.0, exec)?.hull;
                cache.insert(key, hull.clone());
                (hull, false)
            }
        };
        truth_info.push(GroundTruthInfo {
            horizon: *h,
            m: cfg.ground_truth_m,
            seed: gt_seed,
            vertices: hull.vertices().len(),
            from_cache,
        });
        truths.push(hull);
    }
    cache.save(&mut warnings);

    let m_values = cfg.m_values_or(&DEFAULT_M);
    let mut jobs = Vec::new();
    for (hi, _) in maps.iter().enumerate() {
        for &est in &sec.estimators {
            for &m in &m_values {
                for trial in 0..cfg.trials {
                    jobs.push((hi, est, m, trial));
                }
            }
        }
    }
    let results = exec.map_indexed(jobs.len(), |j| {
        let (hi, est, m, trial) = jobs[j];
        run_trial(
            &maps[hi],
            &truths[hi],
            &set,
            kind,
            est,
            m,
            trial,
            cfg.seed,
            eps,
        )
    });
    let records: Vec<TrialRecord> = results.into_iter().collect::<Result<_>>()?;

    let summary = records
        .chunks(cfg.trials)
        .map(|chunk| {
            let d: Vec<f64> = chunk.iter().map(|r| r.hausdorff_error).collect();
            let s = summarize(&d);
            NnSummaryRow {
                horizon: chunk[0].horizon,
                estimator: chunk[0].estimator,
                m: chunk[0].m,
                trials: chunk.len(),
                d_h_mean: s.mean,
                d_h_median: s.median,
                d_h_std: s.std,
                coverage_rate: chunk.iter().filter(|r| r.covered).count() as f64
                    / chunk.len() as f64,
            }
        })
        .collect();
    let timing = records
        .iter()
        .map(|r| TimingRow {
            label: format!("h={} {}", r.horizon, r.estimator),
            m: r.m,
            trial: r.trial,
            elapsed_s: r.elapsed_s,
        })
        .collect();

    let bound = boundary_bound(
        &set,
        sec.bound_eps,
        sec.lipschitz,
        sec.bound_delta,
        &mut warnings,
    )?;
    let mut lipschitz_sampled = Vec::new();
    if sec.lipschitz_samples > 0 {
        let spec = SamplingSpec::new(SamplingKind::UniformVolume, cfg.seed);
        for (h, map) in &maps {
            let est = estimate_lipschitz(map, &set, &spec, sec.lipschitz_samples, None)?;
            lipschitz_sampled.push(HorizonLipschitz {
                horizon: *h,
                l_hat: est.l_hat,
                samples: est.m_used,
            });
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(NnVerifyOutput {
        records,
        summary,
        bounds: NnBoundsReport {
            controller: controller_name,
            warnings,
            bound,
            lipschitz_sampled,
            ground_truth: truth_info,
        },
        timing,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    (horizon, map): &(usize, ReachMap),
    truth: &HullEstimate,
    set: &InputSet,
    kind: SamplingKind,
    est: EstimatorKind,
    m: usize,
    trial: usize,
    base_seed: u64,
    eps: f64,
) -> Result<TrialRecord> {
    let seed = trial_seed(base_seed, trial as u64);
    let spec = SamplingSpec::new(kind, seed);
    let (estimate, elapsed) = match est {
        EstimatorKind::Randup => {
            let r = randup_with(map, set, &spec, m, eps, Execution::Sequential)?;
            (r.hull, r.elapsed)
        }
        EstimatorKind::Gotube => {
            let r = gotube_ball_with(map, set, &spec, m, eps, Execution::Sequential)?;
            (HullEstimate::from_ball(&r.ball), r.elapsed)
        }
    };
    let d = hausdorff_hulls(&estimate, truth)?;
    let mut covered = true;
    for v in truth.vertices().iter() {
        if !hull_contains(&estimate, v, COVERAGE_TOL)? {
            covered = false;
            break;
        }
    }
    Ok(TrialRecord {
        experiment: "nn-verify",
        horizon: *horizon,
        estimator: est,
        m,
        trial,
        seed,
        eps,
        hausdorff_error: d.value,
        approximate: d.approximate,
        covered,
        elapsed_s: elapsed,
    })
}

fn load_controller(
    sec: &super::config::NnVerifySection,
    warnings: &mut Vec<String>,
) -> Result<(ReluNetwork, String)> {
    if let Some(path) = &sec.weights {
        match ReluNetwork::load(path) {
            Ok(net) => return Ok((net, path.display().to_string())),
            Err(e) => warnings.push(format!(
                "could not load controller weights from {}: {e}; using the constructed controller",
                path.display()
            )),
        }
    }
    let net = build_saturated_feedback_controller(&sec.gain, sec.u_min, sec.u_max)
        .map_err(|e| Error::Config(format!("constructed controller: {e}")))?;
    Ok((net, "constructed".into()))
}

/// Boundary-sampling bound for a planar rectangle; other sets get a warning.
fn boundary_bound(
    set: &InputSet,
    eps: f64,
    lipschitz: f64,
    delta: f64,
    warnings: &mut Vec<String>,
) -> Result<Option<BoundResult>> {
    if set.dim() != 2 || set.side_lengths().is_none() {
        warnings.push("bounds sidecar needs a planar rectangle input set; bound omitted".into());
        return Ok(None);
    }
    let half_width = eps / (2.0 * lipschitz);
    let lambda = boundary_coverage_constant(set, half_width)
        .map_err(|e| Error::Config(format!("bounds sidecar: {e}")))?;
    let covering = CoveringDescriptor::RectBoundary2D {
        perimeter: set.perimeter()?,
    };
    let spec = BoundSpec::direct(eps, lipschitz, covering, lambda)
        .map_err(|e| Error::Config(format!("bounds sidecar: {e}")))?;
    Ok(Some(evaluate(&spec, None, Some(delta))?))
}

#[derive(Default, Serialize, Deserialize)]
struct CacheFile {
    entries: BTreeMap<String, HullEstimate>,
}

struct GroundTruthCache {
    path: Option<PathBuf>,
    file: CacheFile,
    dirty: bool,
}

impl GroundTruthCache {
    fn open(path: Option<&Path>, warnings: &mut Vec<String>) -> Self {
        let mut file = CacheFile::default();
        if let Some(p) = path {
            if p.exists() {
                match std::fs::read_to_string(p)
                    .map_err(Error::from)
                    .and_then(|t| serde_json::from_str(&t).map_err(Error::from))
                {
                    Ok(f) => file = f,
                    Err(e) => warnings.push(format!(
                        "ignoring unreadable ground-truth cache {}: {e}",
                        p.display()
                    )),
                }
            }
        }
        GroundTruthCache {
            path: path.map(Path::to_path_buf),
            file,
            dirty: false,
        }
    }

    fn get(&self, key: &str) -> Option<HullEstimate> {
        self.file.entries.get(key).cloned()
    }

    fn insert(&mut self, key: String, hull: HullEstimate) {
        self.file.entries.insert(key, hull);
        self.dirty = true;
    }

    fn save(&self, warnings: &mut Vec<String>) {
        let Some(p) = &self.path else { return };
        if !self.dirty {
            return;
        }
        if let Err(e) = super::write_json(p, &self.file) {
            warnings.push(format!(
                "could not write ground-truth cache {}: {e}",
                p.display()
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
            experiment = "nn-verify"
            seed = 1
            trials = 3
            m_values = [50, 500]
            ground_truth_m = 20000
            [nn_verify]
            horizons = [2, 4]
            lipschitz_samples = 50
            "#,
        )
        .unwrap()
    }

    #[test]
    fn records_shape_and_determinism() {
        let cfg = small_config();
        let a = run_nn_verify_with(&cfg, Execution::Parallel).unwrap();
        let b = run_nn_verify_with(&cfg, Execution::Sequential).unwrap();
        let strip = |o: &NnVerifyOutput| {
            o.records
                .iter()
                .map(|r| TrialRecord {
                    elapsed_s: 0.0,
                    ..r.clone()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.records.len(), 2 * 2 * 2 * 3);
        assert_eq!(a.summary.len(), 8);
        assert_eq!(a.bounds.bound.as_ref().unwrap().m_min, Some(1376));
        assert_eq!(a.bounds.controller, "constructed");
        assert!(a
            .records
            .iter()
            .all(|r| !r.approximate && r.hausdorff_error >= 0.0));
    }

    #[test]
    fn missing_weights_fall_back_with_warning() {
        let mut cfg = small_config();
        cfg.trials = 1;
        cfg.m_values = vec![10];
        cfg.ground_truth_m = 100;
        cfg.nn_verify.weights = Some("/nonexistent/weights.json".into());
        let out = run_nn_verify(&cfg).unwrap();
        assert_eq!(out.bounds.controller, "constructed");
        assert_eq!(out.bounds.warnings.len(), 1);
    }

    #[test]
    fn ground_truth_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config();
        cfg.trials = 1;
        cfg.nn_verify.ground_truth_cache = Some(dir.path().join("gt.json"));
        let first = run_nn_verify(&cfg).unwrap();
        assert!(first.bounds.ground_truth.iter().all(|g| !g.from_cache));
        let second = run_nn_verify(&cfg).unwrap();
        assert!(second.bounds.ground_truth.iter().all(|g| g.from_cache));
        assert_eq!(
            first
                .records
                .iter()
                .map(|r| r.hausdorff_error)
                .collect::<Vec<_>>(),
            second
                .records
                .iter()
                .map(|r| r.hausdorff_error)
                .collect::<Vec<_>>()
        );
    }
}
