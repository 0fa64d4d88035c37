//! Reachability maps `f: R^p -> R^n`, their Jacobians, and a sampled
//! Lipschitz estimator for piecewise-affine maps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domains::{sample, InputSet, SamplingKind, SamplingSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{dot, norm, PointCloud};

/// Dense row-major matrix. Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::domain(
                "matrix must have at least one row and one column",
            ));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("matrix rows have inconsistent lengths"));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks_exact(self.cols)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| dot(row, x))
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Largest singular value, by power iteration on the smaller Gram matrix.
    pub fn spectral_norm(&self) -> f64 {
        let gram = if self.rows < self.cols {
            self.matmul(&self.transpose())
        } else {
            self.transpose().matmul(self)
        };
        largest_eigenvalue_psd(&gram).max(0.0).sqrt()
    }
}

const POWER_REL_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

fn largest_eigenvalue_psd(g: &Matrix) -> f64 {
    let n = g.rows;
    let max_diag = (0..n).map(|i| g.get(i, i)).fold(0.0_f64, f64::max);
    if max_diag == 0.0 {
        return 0.0;
    }
    // Start from the heaviest column plus a small irregular perturbation so the
    // start is not orthogonal to the dominant eigenvector for structured inputs.
    let k = (0..n)
        .max_by(|&a, &b| g.get(a, a).total_cmp(&g.get(b, b)))
        .unwrap_or(0);
    let mut v: Vec<f64> = (0..n)
        .map(|i| g.get(i, k) + 1e-3 * max_diag * (1.0 + (i as f64 * 0.618_033_988_749_895).fract()))
        .collect();
    let mut nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = g.matvec(&v);
        let next = dot(&v, &w);
        nv = norm(&w);
        if nv == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / nv).collect();
        if (next - lambda).abs() <= POWER_REL_TOL * POWER_REL_TOL * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotient of the final iterate.
    dot(&v, &g.matvec(&v)).max(lambda)
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Matrix::from_rows(Vec::<Vec<f64>>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// One affine layer `x -> W x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReluLayer {
    #[serde(rename = "W")]
    pub w: Matrix,
    pub b: Vec<f64>,
}

/// Feed-forward network: ReLU after every layer except the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr")]
pub struct ReluNetwork {
    layers: Vec<ReluLayer>,
}

#[derive(Deserialize)]
struct NetworkRepr {
    layers: Vec<ReluLayer>,
}

impl TryFrom<NetworkRepr> for ReluNetwork {
    type Error = Error;

    fn try_from(r: NetworkRepr) -> Result<Self> {
        ReluNetwork::new(r.layers)
    }
}

impl ReluNetwork {
    pub fn new(layers: Vec<ReluLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::domain(
                "network needs at least one (final affine) layer",
            ));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.b.len() != l.w.rows() {
                return Err(Error::domain(format!(
                    "layer {k}: bias length {} does not match {} rows",
                    l.b.len(),
                    l.w.rows()
                )));
            }
            if l.b.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!(
                    "layer {k}: bias entries must be finite"
                )));
            }
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].w.cols() != pair[0].w.rows() {
                return Err(Error::domain(format!(
                    "layer {}: expects input of size {}, previous layer outputs {}",
                    k + 1,
                    pair[1].w.cols(),
                    pair[0].w.rows()
                )));
            }
        }
        Ok(ReluNetwork { layers })
    }

    pub fn layers(&self) -> &[ReluLayer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].w.rows()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (k, l) in self.layers.iter().enumerate() {
            h = l.w.matvec(&h);
            for (v, b) in h.iter_mut().zip(&l.b) {
                *v += b;
                if k < last {
                    *v = v.max(0.0);
                }
            }
        }
        h
    }

    /// `W_last D_{last-1} W_{last-1} ... D_0 W_0`, with the mask entry 0 where a
    /// pre-activation is exactly 0.
    fn forward_jacobian(&self, x: &[f64]) -> Matrix {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        let mut jac = Matrix::identity(x.len());
        for (k, l) in self.layers.iter().enumerate() {
            let pre: Vec<f64> =
                l.w.matvec(&h)
                    .iter()
                    .zip(&l.b)
                    .map(|(a, b)| a + b)
                    .collect();
            let mut j = l.w.matmul(&jac);
            if k < last {
                for (r, &z) in pre.iter().enumerate() {
                    if z <= 0.0 {
                        j.data[r * j.cols..(r + 1) * j.cols].fill(0.0);
                    }
                }
                h = pre.into_iter().map(|z| z.max(0.0)).collect();
            }
            jac = j;
        }
        jac
    }

    /// Product of layer spectral norms; a global Lipschitz bound.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        self.layers.iter().map(|l| l.w.spectral_norm()).product()
    }
}

/// Exact ReLU realization of `u = clamp(-K^T x, lo, hi)`:
/// `lo + relu(v - lo) - relu(v - hi)` with `v = -K^T x`.
pub fn build_saturated_feedback_controller(gain: &[f64], lo: f64, hi: f64) -> Result<ReluNetwork> {
    if !(lo < hi) {
        return Err(Error::domain(format!(
            "saturation requires lo < hi, got [{lo}, {hi}]"
        )));
    }
    if gain.is_empty() {
        return Err(Error::domain("feedback gain must be nonempty"));
    }
    let neg: Vec<f64> = gain.iter().map(|k| -k).collect();
    ReluNetwork::new(vec![
        ReluLayer {
            w: Matrix::from_rows(vec![neg.clone(), neg])?,
            b: vec![-lo, -hi],
        },
        ReluLayer {
            w: Matrix::from_rows(vec![vec![1.0, -1.0]])?,
            b: vec![lo],
        },
    ])
}

/// A reachability map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReachMap {
    Affine {
        a: Matrix,
        b: Vec<f64>,
    },
    /// `(x_1, x_2) -> (l x_1, x_2)`.
    Scaling {
        l: f64,
    },
    Relu {
        network: ReluNetwork,
    },
    /// `horizon` steps of `x <- A x + B controller(x)`.
    ClosedLoop {
        a: Matrix,
        b: Matrix,
        controller: ReluNetwork,
        horizon: usize,
    },
}

impl ReachMap {
    pub fn affine(a: Matrix, b: Vec<f64>) -> Result<Self> {
        let m = ReachMap::Affine { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn scaling(l: f64) -> Result<Self> {
        let m = ReachMap::Scaling { l };
        m.validate()?;
        Ok(m)
    }

    pub fn closed_loop(
        a: Matrix,
        b: Matrix,
        controller: ReluNetwork,
        horizon: usize,
    ) -> Result<Self> {
        let m = ReachMap::ClosedLoop {
            a,
            b,
            controller,
            horizon,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReachMap::Affine { a, b } => {
                if b.len() != a.rows() {
                    return Err(Error::domain(
                        "affine offset length must equal the row count of A",
                    ));
                }
            }
            ReachMap::Scaling { l } => {
                if !(*l >= 1.0 && l.is_finite()) {
                    return Err(Error::domain(format!(
                        "scaling factor must be >= 1, got {l}"
                    )));
                }
            }
            ReachMap::Relu { .. } => {}
            ReachMap::ClosedLoop {
                a, b, controller, ..
            } => {
                let n = a.rows();
                if a.cols() != n {
                    return Err(Error::domain("closed-loop A must be square"));
                }
                if b.rows() != n {
                    return Err(Error::domain("closed-loop B must have as many rows as A"));
                }
                if controller.in_dim() != n || controller.out_dim() != b.cols() {
                    return Err(Error::domain(format!(
                        "controller maps R^{} -> R^{}, closed loop needs R^{n} -> R^{}",
                        controller.in_dim(),
                        controller.out_dim(),
                        b.cols()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn in_dim(&self) -> usize {
        match self {
            ReachMap::Affine { a, .. } => a.cols(),
            ReachMap::Scaling { .. } => 2,
            ReachMap::Relu { network } => network.in_dim(),
            ReachMap::ClosedLoop { a, .. } => a.rows(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            ReachMap::Affine { a, .. } => a.rows(),
            ReachMap::Scaling { .. } => 2,
            ReachMap::Relu { network } => network.out_dim(),
            ReachMap::ClosedLoop { a, .. } => a.rows(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.in_dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ReachMap::Affine { a, b } => a.matvec(x).iter().zip(b).map(|(v, o)| v + o).collect(),
            ReachMap::Scaling { l } => vec![l * x[0], x[1]],
            ReachMap::Relu { network } => network.forward(x),
            ReachMap::ClosedLoop {
                a,
                b,
                controller,
                horizon,
            } => {
                let mut state = x.to_vec();
                for _ in 0..*horizon {
                    let u = controller.forward(&state);
                    let bu = b.matvec(&u);
                    state = a
                        .matvec(&state)
                        .iter()
                        .zip(&bu)
                        .map(|(p, q)| p + q)
                        .collect();
                }
                state
            }
        }
    }

    /// Images of every point in `cloud`, in order.
    pub fn eval_cloud(&self, cloud: &PointCloud, exec: Execution) -> Result<PointCloud> {
        Error::check_dim(self.in_dim(), cloud.dim())?;
        let p = cloud.dim();
        const CHUNK_POINTS: usize = 2048;
        let out = exec.map_chunks(cloud.as_flat(), CHUNK_POINTS * p, |chunk| {
            chunk
                .chunks_exact(p)
                .flat_map(|x| self.eval_unchecked(x))
                .collect()
        });
        PointCloud::from_flat(self.out_dim(), out)
    }

    /// Jacobian `df/dx` (`out_dim x in_dim`); at ReLU kinks the inactive
    /// branch is taken.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        Error::check_dim(self.in_dim(), x.len())?;
        Ok(match self {
            ReachMap::Affine { a, .. } => a.clone(),
            ReachMap::Scaling { l } => Matrix::diag(&[*l, 1.0]),
            ReachMap::Relu { network } => network.forward_jacobian(x),
            ReachMap::ClosedLoop {
                a,
                b,
                controller,
                horizon,
            } => {
                let mut state = x.to_vec();
                let mut jac = Matrix::identity(x.len());
                for _ in 0..*horizon {
                    let step = a.add(&b.matmul(&controller.forward_jacobian(&state)));
                    jac = step.matmul(&jac);
                    let bu = b.matvec(&controller.forward(&state));
                    state = a
                        .matvec(&state)
                        .iter()
                        .zip(&bu)
                        .map(|(p, q)| p + q)
                        .collect();
                }
                jac
            }
        })
    }

    /// A global Lipschitz bound built from operator norms.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        match self {
            ReachMap::Affine { a, .. } => a.spectral_norm(),
            ReachMap::Scaling { l } => l.max(1.0),
            ReachMap::Relu { network } => network.lipschitz_upper_bound(),
            ReachMap::ClosedLoop {
                a,
                b,
                controller,
                horizon,
            } => {
                let step =
                    a.spectral_norm() + b.spectral_norm() * controller.lipschitz_upper_bound();
                step.powi(*horizon as i32)
            }
        }
    }
}

/// Sampled Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub l_hat: f64,
    pub m_used: usize,
    /// `N (1 - Lambda_N)^M` when the activation-region count `N` and smallest
    /// normalized region volume `Lambda_N` were supplied.
    pub confidence_delta: Option<f64>,
}

/// Activation-region data for the confidence statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionData {
    pub count: usize,
    pub min_volume_fraction: f64,
}

/// Probability bound that some activation region received no sample.
pub fn region_miss_probability(region: &RegionData, m: usize) -> Result<f64> {
    let l = region.min_volume_fraction;
    if !(l > 0.0 && l <= 1.0) || region.count == 0 {
        return Err(Error::domain(
            "region data needs N >= 1 and Lambda_N in (0, 1]",
        ));
    }
    Ok(region.count as f64 * (1.0 - l).powf(m as f64))
}

/// Max of Jacobian spectral norms over `m` uniform samples of `set`.
pub fn estimate_lipschitz(
    map: &ReachMap,
    set: &InputSet,
    spec: &SamplingSpec,
    m: usize,
    region: Option<RegionData>,
) -> Result<LipschitzEstimate> {
    if m == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    if spec.kind != SamplingKind::UniformVolume {
        return Err(Error::domain(
            "Lipschitz estimation requires uniform volume sampling",
        ));
    }
    Error::check_dim(map.in_dim(), set.dim())?;
    let xs = sample(set, spec, m)?;
    let mut l_hat = 0.0_f64;
    for x in xs.iter() {
        l_hat = l_hat.max(map.jacobian(x)?.spectral_norm());
    }
    let confidence_delta = region.map(|r| region_miss_probability(&r, m)).transpose()?;
    Ok(LipschitzEstimate {
        l_hat,
        m_used: m,
        confidence_delta,
    })
}
