//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerics.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Quadrature

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (whole, _) = gk15(f, a, b);
    refine(f, a, b, whole, rel_tol, whole.abs().max(1e-300), 0)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    est: f64,
    rel: f64,
    scale: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m);
    let (r, er) = gk15(f, m, b);
    let _ = est;
    if depth > 40 || el + er <= rel * scale {
        return l + r;
    }
    refine(f, a, m, l, rel, scale, depth + 1) + refine(f, m, b, r, rel, scale, depth + 1)
}

/// `Gamma(x)` for moderate `x > 0` as `int_0^inf t^(x-1) e^(-t) dt`.
pub fn gamma_by_quadrature(x: f64) -> f64 {
    // t = u^(1/x) removes the t^(x-1) singularity on [0, 1].
    let head = |u: f64| (-u.powf(1.0 / x)).exp() / x;
    let f = |t: f64| t.powf(x - 1.0) * (-t).exp();
    let mut total = integrate(&head, 0.0, 1.0, 1e-14);
    let mut lo = 1.0;
    for hi in [5.0, 20.0, 60.0, 200.0] {
        total += integrate(&f, lo, hi, 1e-14);
        lo = hi;
    }
    total
}

/// `I_x(a, b)` by quadrature. Endpoint singularities are removed with
/// `t = u^(1/a)` on `[0, 1/2]` and `1 - t = v^(1/b)` on `[1/2, 1]`.
pub fn incomplete_beta_by_quadrature(x: f64, a: f64, b: f64) -> f64 {
    // int_0^c t^(a-1) (1-t)^(b-1) dt
    let left = |c: f64| -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        let g = |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a;
        integrate(&g, 0.0, c.powf(a), 1e-14)
    };
    // int_{1-c}^1 t^(a-1) (1-t)^(b-1) dt
    let right = |c: f64| -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        let g = |v: f64| (1.0 - v.powf(1.0 / b)).powf(a - 1.0) / b;
        integrate(&g, 0.0, c.powf(b), 1e-14)
    };
    let total = left(0.5) + right(0.5);
    if x <= 0.5 {
        left(x) / total
    } else {
        (total - right(1.0 - x)) / total
    }
}

// ---------------------------------------------------------------------------
// Volumes

/// Volume of the unit `p`-ball for `p <= 6`.
pub fn unit_ball_volume(p: usize) -> f64 {
    use std::f64::consts::PI;
    match p {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        6 => PI.powi(3) / 6.0,
        _ => panic!("no tabulated volume for p = {p}"),
    }
}

/// Monte Carlo estimate of `vol(B(0, rho) ∩ B(r e_1, r))` and its standard
/// error, sampling the bounding box of the lens.
pub fn lens_volume_mc(p: usize, rho: f64, r: f64, n: usize, seed: u64) -> (f64, f64) {
    let x_hi = rho.min(2.0 * r);
    let half = rho.min(r);
    let box_vol = x_hi * (2.0 * half).powi(p as i32 - 1);
    let chunks = 64;
    let per = n / chunks;
    let hits: usize = (0..chunks)
        .map(|c| {
            let mut g = rng(seed.wrapping_mul(1_000_003).wrapping_add(c as u64));
            let mut hits = 0usize;
            let mut x = vec![0.0; p];
            for _ in 0..per {
                x[0] = g.random::<f64>() * x_hi;
                for xi in x.iter_mut().skip(1) {
                    *xi = (g.random::<f64>() * 2.0 - 1.0) * half;
                }
                let n0: f64 = x.iter().map(|v| v * v).sum();
                let n1 = n0 - 2.0 * r * x[0] + r * r;
                if n0 <= rho * rho && n1 <= r * r {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let total = (per * chunks) as f64;
    let f = hits as f64 / total;
    (f * box_vol, (f * (1.0 - f) / total).sqrt() * box_vol)
}

// ---------------------------------------------------------------------------
// Planar geometry on exactly representable inputs

pub fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Hull vertices in counterclockwise order from the lexicographic minimum,
/// found by testing every directed pair as a candidate edge.
pub fn brute_force_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 1 {
        return pts;
    }
    let between = |a: [f64; 2], b: [f64; 2], q: [f64; 2]| {
        (q[0] - a[0]) * (q[0] - b[0]) <= 0.0 && (q[1] - a[1]) * (q[1] - b[1]) <= 0.0
    };
    let n = pts.len();
    let mut next = vec![None; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let ok = (0..n).all(|k| {
                if k == i || k == j {
                    return true;
                }
                let c = cross(pts[i], pts[j], pts[k]);
                c > 0.0 || (c == 0.0 && between(pts[i], pts[j], pts[k]))
            });
            if ok {
                next[i] = Some(j);
            }
        }
    }
    let mut out = vec![pts[0]];
    let mut cur = 0;
    while let Some(j) = next[cur] {
        if j == 0 {
            break;
        }
        out.push(pts[j]);
        cur = j;
        if out.len() > n {
            panic!("hull edges do not form a cycle");
        }
    }
    out
}

/// Distance from `q` to the segment `[a, b]`.
pub fn segment_distance(q: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let w: Vec<f64> = q.iter().zip(a).map(|(x, y)| x - y).collect();
    let dd: f64 = d.iter().map(|x| x * x).sum();
    let t = if dd == 0.0 {
        0.0
    } else {
        (w.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>() / dd).clamp(0.0, 1.0)
    };
    q.iter()
        .zip(a.iter().zip(&d))
        .map(|(qi, (ai, di))| (qi - ai - t * di).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Distance from `q` to a convex polygon given counterclockwise.
pub fn polygon_distance(q: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n == 1 {
        return ((q[0] - poly[0][0]).powi(2) + (q[1] - poly[0][1]).powi(2)).sqrt();
    }
    if n >= 3 && (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], q) >= 0.0) {
        return 0.0;
    }
    (0..n)
        .map(|i| segment_distance(&q, &poly[i], &poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between two unpadded convex polygons.
pub fn polygon_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let d_ab = a
        .iter()
        .map(|&p| polygon_distance(p, b))
        .fold(0.0, f64::max);
    let d_ba = b
        .iter()
        .map(|&p| polygon_distance(p, a))
        .fold(0.0, f64::max);
    d_ab.max(d_ba)
}

// ---------------------------------------------------------------------------
// Enclosing balls

fn circumcenter_2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<[f64; 2]> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-12 {
        return None;
    }
    let (a2, b2, c2) = (
        a[0] * a[0] + a[1] * a[1],
        b[0] * b[0] + b[1] * b[1],
        c[0] * c[0] + c[1] * c[1],
    );
    Some([
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ])
}

/// Smallest enclosing circle radius by trying every 2- and 3-point support.
pub fn meb_radius_exhaustive(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n == 1 {
        return 0.0;
    }
    let dist = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let encloses = |c: [f64; 2], r: f64| {
        points
            .iter()
            .all(|&p| dist(p, c) <= r * (1.0 + 1e-12) + 1e-15)
    };
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let c = [
                0.5 * (points[i][0] + points[j][0]),
                0.5 * (points[i][1] + points[j][1]),
            ];
            let r = 0.5 * dist(points[i], points[j]);
            if r < best && encloses(c, r) {
                best = r;
            }
            for k in j + 1..n {
                if let Some(c) = circumcenter_2d(points[i], points[j], points[k]) {
                    let r = dist(c, points[i]);
                    if r < best && encloses(c, r) {
                        best = r;
                    }
                }
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Linear algebra and networks

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Largest singular value via the eigenvalues of `A^T A`.
pub fn spectral_norm(a: &[Vec<f64>]) -> f64 {
    let cols = a[0].len();
    let ata: Vec<Vec<f64>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| a.iter().map(|row| row[i] * row[j]).sum())
                .collect()
        })
        .collect();
    symmetric_eigenvalues(ata)
        .into_iter()
        .fold(0.0, f64::max)
        .sqrt()
}

/// A dense layer `(W, b)`.
pub type Layer = (Vec<Vec<f64>>, Vec<f64>);

fn matvec(w: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    w.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// ReLU network output and the smallest |pre-activation| of the hidden units.
pub fn network_eval(layers: &[Layer], x: &[f64]) -> (Vec<f64>, f64) {
    let mut h = x.to_vec();
    let mut margin = f64::INFINITY;
    for (k, (w, b)) in layers.iter().enumerate() {
        let z: Vec<f64> = matvec(w, &h).iter().zip(b).map(|(a, c)| a + c).collect();
        if k + 1 < layers.len() {
            margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
            h = z.into_iter().map(|v| v.max(0.0)).collect();
        } else {
            h = z;
        }
    }
    (h, margin)
}

/// `horizon` steps of `x <- A x + B pi(x)`, with the smallest hidden margin
/// seen along the way.
pub fn closed_loop_eval(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    layers: &[Layer],
    horizon: usize,
    x: &[f64],
) -> (Vec<f64>, f64) {
    let mut s = x.to_vec();
    let mut margin = f64::INFINITY;
    for _ in 0..horizon {
        let (u, m) = network_eval(layers, &s);
        margin = margin.min(m);
        let ax = matvec(a, &s);
        let bu = matvec(b, &u);
        s = ax.iter().zip(&bu).map(|(p, q)| p + q).collect();
    }
    (s, margin)
}

/// Central-difference Jacobian, `rows x cols`.
pub fn finite_difference_jacobian<F: Fn(&[f64]) -> Vec<f64>>(
    f: F,
    x: &[f64],
    h: f64,
) -> Vec<Vec<f64>> {
    let cols = x.len();
    let mut columns = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        columns.push(
            fp.iter()
                .zip(&fm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    let rows = columns[0].len();
    (0..rows)
        .map(|i| (0..cols).map(|j| columns[j][i]).collect())
        .collect()
}

pub fn random_layers(g: &mut ChaCha8Rng, sizes: &[usize]) -> Vec<Layer> {
    sizes
        .windows(2)
        .map(|w| {
            let weights = (0..w[1])
                .map(|_| (0..w[0]).map(|_| g.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let bias = (0..w[1]).map(|_| g.random::<f64>() - 0.5).collect();
            (weights, bias)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ground truth for the scaled disk

/// `n` ellipse boundary points, semi-axes `(a, b)`, equally spaced in angle.
pub fn ellipse_points(a: f64, b: f64, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [a * t.cos(), b * t.sin()]
        })
        .collect()
}

/// Whether `q` lies in the closed ellipse with semi-axes `(a, b)`, with slack.
pub fn in_ellipse(q: &[f64], a: f64, b: f64, tol: f64) -> bool {
    (q[0] / a).powi(2) + (q[1] / b).powi(2) <= 1.0 + tol
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
