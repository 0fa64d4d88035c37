//! Config-driven benchmark runners and their CSV/JSON outputs.
//!
//! Every runner is deterministic given its config: trials derive their seeds
//! from the base seed, rows are emitted in a fixed order, and wall-clock
//! timings go to a separate sidecar so the main outputs stay byte-identical
//! across runs and thread counts.

mod bounds_calc;
mod config;
mod nn_verify;
mod sensitivity;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub use bounds_calc::{run_bounds_calc, BoundsReport, EpsSearchReport};
pub use config::{
    BoundsSection, EpsSearchSection, EpsSetting, EstimatorKind, ExperimentConfig, ExperimentKind,
    NnVerifySection, Overrides, SensitivitySection,
};
pub use nn_verify::{
    run_nn_verify, run_nn_verify_with, GroundTruthInfo, HorizonLipschitz, NnBoundsReport,
    NnSummaryRow, NnVerifyOutput, TrialRecord,
};
pub use sensitivity::{
    run_sensitivity, run_sensitivity_with, SensitivityCell, SensitivityOutput, SensitivityRow,
};

/// Wall-clock time of one estimator call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub label: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub elapsed_s: f64,
}

/// Mean, median and sample standard deviation of the finite values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let n = v.len();
    if n == 0 {
        return Summary {
            count: 0,
            mean: f64::NAN,
            median: f64::NAN,
            std: f64::NAN,
        };
    }
    v.sort_by(f64::total_cmp);
    let mean = v.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    let std = if n > 1 {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        count: n,
        mean,
        median,
        std,
    }
}

/// `dir/stem.<tag>.<ext>` next to `out`.
pub fn sidecar_path(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Seed of the ground-truth stream; trial seeds only flip low bits.
pub(crate) const GROUND_TRUTH_STREAM: u64 = 0x6772_6f75_6e64_0000;
