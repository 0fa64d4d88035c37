//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::{BoundSpec, CoveringDescriptor};
use crate::domains::{InputSet, SamplingKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sensitivity,
    NnVerify,
    BoundsCalc,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Sensitivity => "sensitivity",
            ExperimentKind::NnVerify => "nn-verify",
            ExperimentKind::BoundsCalc => "bounds-calc",
        })
    }
}

/// Padding radius: a fixed value, or `"auto(<delta>)"` to derive it from a
/// target failure probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsSetting {
    Fixed(f64),
    Auto { delta: f64 },
}

impl Default for EpsSetting {
    fn default() -> Self {
        EpsSetting::Fixed(0.0)
    }
}

impl fmt::Display for EpsSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsSetting::Fixed(e) => write!(f, "{e}"),
            EpsSetting::Auto { delta } => write!(f, "auto({delta})"),
        }
    }
}

impl FromStr for EpsSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || {
            Error::Config(format!(
                "eps must be a number or \"auto(<delta>)\", got {s:?}"
            ))
        };
        if let Some(inner) = t.strip_prefix("auto(").and_then(|r| r.strip_suffix(')')) {
            let delta: f64 = inner.trim().parse().map_err(|_| bad())?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::Config(format!(
                    "auto eps needs delta in (0, 1), got {delta}"
                )));
            }
            return Ok(EpsSetting::Auto { delta });
        }
        let e: f64 = t.parse().map_err(|_| bad())?;
        EpsSetting::fixed(e)
    }
}

impl EpsSetting {
    fn fixed(e: f64) -> Result<Self> {
        if e >= 0.0 && e.is_finite() {
            Ok(EpsSetting::Fixed(e))
        } else {
            Err(Error::Config(format!(
                "eps must be finite and >= 0, got {e}"
            )))
        }
    }
}

impl<'de> Deserialize<'de> for EpsSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(e) => EpsSetting::fixed(e),
            Raw::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

impl Serialize for EpsSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EpsSetting::Fixed(e) => s.serialize_f64(*e),
            EpsSetting::Auto { .. } => s.collect_str(self),
        }
    }
}

fn one() -> usize {
    1
}

fn default_ground_truth_m() -> usize {
    1_000_000
}

/// Top-level experiment definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    /// Sample counts to sweep; each experiment has its own default.
    #[serde(default)]
    pub m_values: Vec<usize>,
    /// Padding radius; each experiment has its own default.
    #[serde(default)]
    pub eps: Option<EpsSetting>,
    #[serde(default = "default_ground_truth_m")]
    pub ground_truth_m: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Input set override; each experiment has its own default.
    #[serde(default)]
    pub input_set: Option<InputSet>,
    /// Sampling distribution override (nn-verify only).
    #[serde(default)]
    pub sampling: Option<SamplingKind>,
    #[serde(default)]
    pub sensitivity: SensitivitySection,
    #[serde(default)]
    pub nn_verify: NnVerifySection,
    #[serde(default)]
    pub bounds: BoundsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivitySection {
    /// Scaling factors of the map `(x1, x2) -> (L x1, x2)`.
    pub lipschitz: Vec<f64>,
    /// Beta-radial shape parameters; 1 is uniform.
    pub alpha: Vec<f64>,
    /// Boundary points of the ellipse used as ground truth.
    pub truth_points: usize,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        SensitivitySection {
            lipschitz: vec![1.0, 2.0, 4.0],
            alpha: vec![1.0, 2.0, 4.0, 8.0],
            truth_points: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Randup,
    Gotube,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Randup => "randup",
            EstimatorKind::Gotube => "gotube",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NnVerifySection {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub horizons: Vec<usize>,
    /// Gain `K` of the constructed controller `u = clamp(-K^T x, u_min, u_max)`.
    pub gain: Vec<f64>,
    pub u_min: f64,
    pub u_max: f64,
    /// JSON network weights; the constructed controller is used when absent
    /// or unreadable.
    pub weights: Option<PathBuf>,
    pub estimators: Vec<EstimatorKind>,
    /// Lipschitz constant assumed by the bounds sidecar.
    pub lipschitz: f64,
    pub bound_eps: f64,
    pub bound_delta: f64,
    /// Samples for the informational sampled Lipschitz estimate; 0 skips it.
    pub lipschitz_samples: usize,
    /// JSON file caching ground-truth hulls across runs.
    pub ground_truth_cache: Option<PathBuf>,
}

impl Default for NnVerifySection {
    fn default() -> Self {
        NnVerifySection {
            a: vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            b: vec![vec![0.5], vec![1.0]],
            horizons: vec![4],
            gain: vec![0.25, 0.875],
            u_min: -1.0,
            u_max: 1.0,
            weights: None,
            estimators: vec![EstimatorKind::Randup, EstimatorKind::Gotube],
            lipschitz: 1.0,
            bound_eps: 0.02,
            bound_delta: 1e-4,
            lipschitz_samples: 1000,
            ground_truth_cache: None,
        }
    }
}

/// Guaranteed-accuracy search for a ball input set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsSearchSection {
    pub p: usize,
    /// Input ball radius (also its inward-ball radius).
    pub r: f64,
    pub covering: CoveringDescriptor,
    pub lipschitz: f64,
    pub m: usize,
    pub delta_target: f64,
    /// Constant density ratio; mutually exclusive with `alpha`.
    #[serde(default)]
    pub p0: Option<f64>,
    /// Beta-radial shape parameter from which `p0(eps)` is derived.
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub spec: Option<BoundSpec>,
    /// Report `delta_M` at this sample count.
    pub m: Option<usize>,
    /// Report the minimal sample count for this failure probability.
    pub delta_target: Option<f64>,
    pub eps_search: Option<EpsSearchSection>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub weights: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(w) = &o.weights {
            self.nn_verify.weights = Some(w.clone());
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.m_values.contains(&0) {
            return Err(Error::Config("m_values must be positive".into()));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("m_values must be strictly ascending".into()));
        }
        if self.ground_truth_m == 0 {
            return Err(Error::Config("ground_truth_m must be >= 1".into()));
        }
        if let Some(set) = &self.input_set {
            set.validate()
                .map_err(|e| Error::Config(format!("input_set: {e}")))?;
        }
        Ok(())
    }

    /// Sample counts, or `default` when none were configured.
    pub fn m_values_or(&self, default: &[usize]) -> Vec<usize> {
        if self.m_values.is_empty() {
            default.to_vec()
        } else {
            self.m_values.clone()
        }
    }

    pub(crate) fn expect(&self, kind: ExperimentKind) -> Result<()> {
        if self.experiment == kind {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "config describes a {} experiment, not {kind}",
                self.experiment
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_parsing() {
        assert_eq!(
            "auto(1e-3)".parse::<EpsSetting>().unwrap(),
            EpsSetting::Auto { delta: 1e-3 }
        );
        assert_eq!(
            " 0.5 ".parse::<EpsSetting>().unwrap(),
            EpsSetting::Fixed(0.5)
        );
        assert!("auto(2)".parse::<EpsSetting>().is_err());
        assert!("auto".parse::<EpsSetting>().is_err());
        assert!("-1".parse::<EpsSetting>().is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml("experiment = \"nn-verify\"\n").unwrap();
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.ground_truth_m, 1_000_000);
        assert_eq!(cfg.eps, None);
        assert_eq!(cfg.nn_verify.horizons, vec![4]);
    }

    #[test]
    fn full_config() {
        let text = r#"
            experiment = "sensitivity"
            seed = 7
            trials = 3
            m_values = [100, 1000]
            eps = "auto(1e-3)"
            input_set = { kind = "ball", center = [0, 0], radius = 1 }

            [sensitivity]
            lipschitz = [1, 2]
            alpha = [1, 4]
            truth_points = 500
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.sensitivity.alpha, vec![1.0, 4.0]);
        assert_eq!(cfg.input_set, Some(InputSet::unit_ball(2)));
    }

    #[test]
    fn bounds_section() {
        let text = r#"
            experiment = "bounds-calc"
            [bounds]
            m = 1376
            delta_target = 1e-4
            [bounds.spec]
            eps = 0.02
            lipschitz = 1
            covering = { kind = "rect-boundary-2d", perimeter = 2 }
            lambda_source = { kind = "direct", lambda = 0.01 }
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let spec = cfg.bounds.spec.unwrap();
        assert_eq!(
            spec.covering,
            CoveringDescriptor::RectBoundary2D { perimeter: 2.0 }
        );
        assert!(spec.boundary_image_assumed);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "experiment = \"nope\"",
            "experiment = \"nn-verify\"\ntrials = 0",
            "experiment = \"nn-verify\"\nm_values = [100, 10]",
            "experiment = \"nn-verify\"\nunknown_key = 1",
            "experiment = \"nn-verify\"\neps = \"auto(x)\"",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }
}
