//! Regions in the plane, Fekete-type maximisation of Vandermonde
//! determinants, and the closed-form diameter values and bounds built from
//! them.

use std::collections::BTreeMap;
use std::f64::consts::{E, SQRT_2};
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::{family_basis, Family, ModuleBasis};
use crate::exactnum::BigRational;
use crate::linalg::{rational_rank, Lu};
use crate::vandermonde::PointConfig;

/// Boundary tolerance for membership.
pub const MEMBERSHIP_TOL: f64 = 1e-14;
/// Largest rank accepted by [`fekete_maximize`].
pub const MAX_FEKETE_RANK: usize = 400;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiameterError {
    #[error("no closed form is catalogued for {0}")]
    NoClosedForm(String),
    #[error("linear map is singular")]
    SingularMatrix,
    #[error("every candidate determinant vanishes")]
    DegenerateBasis,
    #[error("rank {0} exceeds the limit {MAX_FEKETE_RANK}")]
    RankTooLarge(usize),
    #[error("basis has {basis} variables but the region lives in dimension {region}")]
    DimensionMismatch { basis: usize, region: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Closed subsets of the line or plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interval {
        a: f64,
        b: f64,
    },
    Box {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    Triangle {
        vertices: [[f64; 2]; 3],
    },
    /// Disc of the given radius centred at the origin.
    Ball {
        radius: f64,
    },
    /// `{0 ≤ x, y ≤ 1, xy ≤ ε}`.
    TauEps {
        eps: f64,
    },
    /// Image of the unit square under `(x, y) ↦ (f1, f2)`:
    /// `0 ≤ v ≤ 1`, `0 ≤ u ≤ ((v − 1)/(v + 1))²`.
    TwoParamImage,
    AffineImage {
        p: [[f64; 2]; 2],
        inner: Box<Region>,
    },
    /// Image under `(x, y) ↦ (xy, x + y)`.
    PhiImage(Box<Region>),
    /// Image under `(x, y) ↦ (xy, x)`.
    PhiXImage(Box<Region>),
    /// Image under `(x, y) ↦ (xy, y)`.
    PhiYImage(Box<Region>),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Interval { a, b } => write!(f, "interval[{a}, {b}]"),
            Region::Box { a, b, c, d } => write!(f, "box[{a}, {b}]x[{c}, {d}]"),
            Region::Triangle { vertices: v } => {
                write!(f, "triangle({:?}, {:?}, {:?})", v[0], v[1], v[2])
            }
            Region::Ball { radius } => write!(f, "ball(r = {radius})"),
            Region::TauEps { eps } => write!(f, "tau_eps(eps = {eps})"),
            Region::TwoParamImage => f.write_str("two_param_image"),
            Region::AffineImage { p, inner } => write!(f, "affine({p:?}, {inner})"),
            Region::PhiImage(r) => write!(f, "phi({r})"),
            Region::PhiXImage(r) => write!(f, "phi_x({r})"),
            Region::PhiYImage(r) => write!(f, "phi_y({r})"),
        }
    }
}

impl std::str::FromStr for Region {
    type Err = String;

    /// `interval:a,b`, `box:a,b,c,d`, `triangle:x1,y1,x2,y2,x3,y3`,
    /// `unit_triangle`, `ball:r`, `tau_eps:eps`, `image`,
    /// `phi:<region>`, `phi_x:<region>`, `phi_y:<region>`,
    /// `affine:p11,p12,p21,p22:<region>`.
    fn from_str(s: &str) -> Result<Region, String> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = |t: &str, k: usize| -> Result<Vec<f64>, String> {
            let v: Vec<f64> = t
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad number {x:?} in {s:?}: {e}")))
                .collect::<Result<_, _>>()?;
            if v.len() != k {
                return Err(format!("{head} needs {k} numbers, got {}", v.len()));
            }
            Ok(v)
        };
        let inner = |t: &str| -> Result<Box<Region>, String> { Ok(Box::new(t.parse::<Region>()?)) };
        match head.replace('-', "_").as_str() {
            "interval" => {
                let v = nums(rest, 2)?;
                Ok(Region::Interval { a: v[0], b: v[1] })
            }
            "box" => {
                let v = nums(rest, 4)?;
                Ok(Region::Box { a: v[0], b: v[1], c: v[2], d: v[3] })
            }
            "unit_square" => Ok(Region::unit_square()),
            "unit_interval" => Ok(Region::unit_interval()),
            "unit_triangle" => Ok(Region::unit_triangle()),
            "triangle" => {
                let v = nums(rest, 6)?;
                Ok(Region::Triangle { vertices: [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]] })
            }
            "ball" => Ok(Region::Ball { radius: nums(rest, 1)?[0] }),
            "tau_eps" => Ok(Region::TauEps { eps: nums(rest, 1)?[0] }),
            "image" | "two_param_image" => Ok(Region::TwoParamImage),
            "phi" => Ok(Region::PhiImage(inner(rest)?)),
            "phi_x" => Ok(Region::PhiXImage(inner(rest)?)),
            "phi_y" => Ok(Region::PhiYImage(inner(rest)?)),
            "affine" => {
                let (m, r) = rest.split_once(':').ok_or("affine needs p11,p12,p21,p22:<region>")?;
                let v = nums(m, 4)?;
                Ok(Region::AffineImage { p: [[v[0], v[1]], [v[2], v[3]]], inner: inner(r)? })
            }
            _ => Err(format!("unknown region {s:?}")),
        }
    }
}

fn det2(p: &[[f64; 2]; 2]) -> f64 {
    p[0][0] * p[1][1] - p[0][1] * p[1][0]
}

fn edge(a: [f64; 2], b: [f64; 2], z: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0])
}

/// Shoelace area of a triangle.
pub fn triangle_area(v: &[[f64; 2]; 3]) -> f64 {
    edge(v[0], v[1], v[2]).abs() / 2.0
}

/// Maps from the source region of a pullback to the region being optimised.
#[derive(Clone, Debug, PartialEq)]
pub enum PointMap {
    Phi,
    PhiX,
    PhiY,
    Affine([[f64; 2]; 2]),
    /// `(x, y) ↦` the ambient values of a family.
    Family(Family),
}

impl PointMap {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        match self {
            PointMap::Phi => vec![z[0] * z[1], z[0] + z[1]],
            PointMap::PhiX => vec![z[0] * z[1], z[0]],
            PointMap::PhiY => vec![z[0] * z[1], z[1]],
            PointMap::Affine(p) => vec![p[0][0] * z[0] + p[0][1] * z[1], p[1][0] * z[0] + p[1][1] * z[1]],
            PointMap::Family(f) => f.ambient_values(z[0], z[1]),
        }
    }
}

impl Region {
    pub fn unit_interval() -> Region {
        Region::Interval { a: 0.0, b: 1.0 }
    }

    pub fn unit_square() -> Region {
        Region::Box { a: 0.0, b: 1.0, c: 0.0, d: 1.0 }
    }

    pub fn unit_triangle() -> Region {
        Region::Triangle { vertices: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        self.contains_tol(z, MEMBERSHIP_TOL)
    }

    pub fn contains_tol(&self, z: &[f64], tol: f64) -> bool {
        if z.len() != self.dim() || z.iter().any(|c| !c.is_finite()) {
            return false;
        }
        let within = |x: f64, lo: f64, hi: f64| x >= lo - tol && x <= hi + tol;
        match self {
            Region::Interval { a, b } => within(z[0], *a, *b),
            Region::Box { a, b, c, d } => within(z[0], *a, *b) && within(z[1], *c, *d),
            Region::Triangle { vertices: v } => {
                let orient = edge(v[0], v[1], v[2]).signum();
                let p = [z[0], z[1]];
                let scale = |a: [f64; 2], b: [f64; 2]| ((b[0] - a[0]).hypot(b[1] - a[1])).max(1e-300);
                (0..3).all(|k| {
                    let (a, b) = (v[k], v[(k + 1) % 3]);
                    orient * edge(a, b, p) / scale(a, b) >= -tol
                })
            }
            Region::Ball { radius } => z[0].hypot(z[1]) <= radius + tol,
            Region::TauEps { eps } => within(z[0], 0.0, 1.0) && within(z[1], 0.0, 1.0) && z[0] * z[1] <= eps + tol,
            Region::TwoParamImage => {
                let (u, v) = (z[0], z[1]);
                within(v, 0.0, 1.0) && within(u, 0.0, ((v - 1.0) / (v + 1.0)).powi(2))
            }
            Region::AffineImage { p, inner } => {
                let d = det2(p);
                if d == 0.0 {
                    return false;
                }
                let x = (p[1][1] * z[0] - p[0][1] * z[1]) / d;
                let y = (-p[1][0] * z[0] + p[0][0] * z[1]) / d;
                inner.contains_tol(&[x, y], tol)
            }
            Region::PhiImage(inner) => {
                // x, y are the roots of t² − (x+y)t + xy; root finding loses
                // up to half the digits near a double root.
                let (s, p) = (z[0], z[1]);
                let disc = p * p - 4.0 * s;
                let slack = 1e-7 * (1.0 + p.abs());
                if disc < -slack {
                    return false;
                }
                let r = disc.max(0.0).sqrt();
                let (x, y) = ((p + r) / 2.0, (p - r) / 2.0);
                let t = tol + slack;
                inner.contains_tol(&[x, y], t) || inner.contains_tol(&[y, x], t)
            }
            Region::PhiXImage(inner) => preimage_with_known(inner, z[0], z[1], true, tol),
            Region::PhiYImage(inner) => preimage_with_known(inner, z[0], z[1], false, tol),
        }
    }

    /// Bounding box, one `(lo, hi)` per coordinate.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let span = |xs: &[f64]| {
            (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        };
        match self {
            Region::Interval { a, b } => vec![(*a, *b)],
            Region::Box { a, b, c, d } => vec![(*a, *b), (*c, *d)],
            Region::Triangle { vertices: v } => {
                vec![span(&[v[0][0], v[1][0], v[2][0]]), span(&[v[0][1], v[1][1], v[2][1]])]
            }
            Region::Ball { radius } => vec![(-radius, *radius), (-radius, *radius)],
            Region::TauEps { .. } | Region::TwoParamImage => vec![(0.0, 1.0), (0.0, 1.0)],
            Region::AffineImage { p, inner } => {
                let bb = inner.bounding_box();
                let corners: Vec<Vec<f64>> = [(0, 0), (0, 1), (1, 0), (1, 1)]
                    .iter()
                    .map(|&(i, j)| {
                        let x = if i == 0 { bb[0].0 } else { bb[0].1 };
                        let y = if j == 0 { bb[1].0 } else { bb[1].1 };
                        PointMap::Affine(*p).apply(&[x, y])
                    })
                    .collect();
                vec![
                    span(&corners.iter().map(|c| c[0]).collect::<Vec<_>>()),
                    span(&corners.iter().map(|c| c[1]).collect::<Vec<_>>()),
                ]
            }
            Region::PhiImage(inner) | Region::PhiXImage(inner) | Region::PhiYImage(inner) => {
                let bb = inner.bounding_box();
                let (x, y) = (bb[0], bb[1]);
                let products = span(&[x.0 * y.0, x.0 * y.1, x.1 * y.0, x.1 * y.1]);
                let second = match self {
                    Region::PhiImage(_) => (x.0 + y.0, x.1 + y.1),
                    Region::PhiXImage(_) => x,
                    _ => y,
                };
                vec![products, second]
            }
        }
    }

    /// Corner points worth offering to the optimiser.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Region::Interval { a, b } => vec![vec![*a], vec![*b]],
            Region::Box { a, b, c, d } => vec![vec![*a, *c], vec![*b, *c], vec![*a, *d], vec![*b, *d]],
            Region::Triangle { vertices } => vertices.iter().map(|v| v.to_vec()).collect(),
            Region::TauEps { eps } => {
                vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, *eps], vec![*eps, 1.0]]
            }
            Region::TwoParamImage => vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            _ => Vec::new(),
        }
    }

    /// Uniform sample by rejection from the bounding box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let bb = self.bounding_box();
        for _ in 0..1_000_000 {
            let z: Vec<f64> = bb.iter().map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..=hi) } else { lo }).collect();
            if self.contains(&z) {
                return z;
            }
        }
        // Thin images: push a source sample forward instead.
        let (source, maps) = self.pullback();
        assert!(!maps.is_empty(), "region {self} has no interior to sample");
        let z = source.sample(rng);
        maps.iter().fold(z, |z, m| m.apply(&z))
    }

    /// A simpler source region and the maps carrying it onto `self`.
    pub fn pullback(&self) -> (Region, Vec<PointMap>) {
        let wrap = |inner: &Region, map: PointMap| {
            let (src, mut maps) = inner.pullback();
            maps.push(map);
            (src, maps)
        };
        match self {
            Region::TwoParamImage => (Region::unit_square(), vec![PointMap::Family(Family::TwoParam)]),
            Region::AffineImage { p, inner } => wrap(inner, PointMap::Affine(*p)),
            Region::PhiImage(inner) => wrap(inner, PointMap::Phi),
            Region::PhiXImage(inner) => wrap(inner, PointMap::PhiX),
            Region::PhiYImage(inner) => wrap(inner, PointMap::PhiY),
            other => (other.clone(), Vec::new()),
        }
    }
}

/// Membership in the image of `(x, y) ↦ (xy, x)` (`x_known`) or `(xy, y)`.
fn preimage_with_known(inner: &Region, prod: f64, known: f64, x_known: bool, tol: f64) -> bool {
    let place = |k: f64, other: f64| if x_known { [k, other] } else { [other, k] };
    if known.abs() > 1e-12 {
        return inner.contains_tol(&place(known, prod / known), tol + 1e-12 * (prod / known).abs());
    }
    if prod.abs() > tol {
        return false;
    }
    let bb = inner.bounding_box();
    let (lo, hi) = if x_known { bb[1] } else { bb[0] };
    (0..=1000).any(|k| inner.contains_tol(&place(0.0, lo + (hi - lo) * k as f64 / 1000.0), tol))
}

// ---------------------------------------------------------------------------
// Fekete maximisation

#[derive(Clone, Debug)]
pub struct FeketeConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    pub pool_size: usize,
    pub polish: bool,
}

impl Default for FeketeConfig {
    fn default() -> Self {
        FeketeConfig { restarts: 4, max_sweeps: 60, seed: 1, pool_size: 512, polish: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FeketeResult {
    pub basis: String,
    pub rank: usize,
    pub e_n: u64,
    /// Points in the coordinates of the region (or of the family's ambient space).
    pub points: PointConfig,
    /// The same points in the source region of the pullback.
    pub source_points: Vec<Vec<f64>>,
    pub log_abs_det: f64,
    /// `|det|^{1/e_n}`, or `|det|` when `e_n = 0`.
    pub proxy: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// Proxy after initialisation and after each sweep of the winning run.
    pub history: Vec<f64>,
}

struct Domain<'a> {
    basis: &'a ModuleBasis,
    source: Region,
    maps: Vec<PointMap>,
    bbox: Vec<(f64, f64)>,
}

impl Domain<'_> {
    fn image(&self, p: &[f64]) -> Vec<f64> {
        self.maps.iter().fold(p.to_vec(), |z, m| m.apply(&z))
    }

    fn row(&self, p: &[f64], out: &mut [f64]) {
        self.basis.eval_row(&self.image(p), out);
    }

    fn clamp(&self, p: &mut [f64]) {
        for (x, &(lo, hi)) in p.iter_mut().zip(&self.bbox) {
            *x = x.clamp(lo, hi);
        }
    }

    fn admissible(&self, p: &[f64]) -> bool {
        self.source.contains(p)
    }

    /// Low-discrepancy candidates plus the source vertices.
    fn pool(&self, size: usize, shift: &[f64], offset: u64) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.source.vertices();
        let mut k = offset;
        let mut attempts = 0;
        while out.len() < size && attempts < 200 * size {
            k += 1;
            attempts += 1;
            let p: Vec<f64> = self
                .bbox
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| {
                    let h = (radical_inverse(k, [2, 3][d]) + shift[d]).fract();
                    lo + (hi - lo) * h
                })
                .collect();
            if self.admissible(&p) {
                out.push(p);
            }
        }
        out
    }
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while k > 0 {
        r += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    r
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Run {
    points: Vec<Vec<f64>>,
    log_det: f64,
    history: Vec<f64>,
    sweeps: usize,
}

fn proxy_of(log_det: f64, e_n: u64) -> f64 {
    if e_n == 0 {
        log_det.exp()
    } else {
        (log_det / e_n as f64).exp()
    }
}

/// Greedy LU on the candidate rows: each step keeps the candidate with the
/// largest remaining pivot.
fn leja_init(dom: &Domain, pool: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, DiameterError> {
    let n = dom.basis.rank();
    if pool.len() < n {
        return Err(DiameterError::DegenerateBasis);
    }
    let mut rows: Vec<Vec<f64>> = pool
        .iter()
        .map(|p| {
            let mut r = vec![0.0; n];
            dom.row(p, &mut r);
            r
        })
        .collect();
    let scale = rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(DiameterError::DegenerateBasis);
    }
    let mut used = vec![false; pool.len()];
    let mut chosen = Vec::with_capacity(n);
    for k in 0..n {
        let (best, val) = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, r)| (i, r[k].abs()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || val <= 1e-13 * scale {
            return Err(DiameterError::DegenerateBasis);
        }
        used[best] = true;
        chosen.push(pool[best].clone());
        let pivot = rows[best].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if used[i] {
                continue;
            }
            let f = r[k] / pivot[k];
            for j in k..n {
                r[j] -= f * pivot[j];
            }
        }
    }
    Ok(chosen)
}

fn vandermonde_of(dom: &Domain, pts: &[Vec<f64>]) -> Vec<f64> {
    let n = dom.basis.rank();
    let mut v = vec![0.0; n * n];
    for (p, row) in pts.iter().zip(v.chunks_mut(n)) {
        dom.row(p, row);
    }
    v
}

/// Nelder–Mead maximisation of `|row(p)·col|` inside the source region.
fn polish(dom: &Domain, start: &[f64], col: &[f64], step: f64) -> (Vec<f64>, f64) {
    let n = dom.basis.rank();
    let d = start.len();
    let mut buf = vec![0.0; n];
    let mut f = |p: &[f64]| -> (Vec<f64>, f64) {
        let mut q = p.to_vec();
        dom.clamp(&mut q);
        if !dom.admissible(&q) {
            return (q, f64::INFINITY);
        }
        dom.row(&q, &mut buf);
        let v = -dot(&buf, col).abs();
        (q, v)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![f(start)];
    for k in 0..d {
        let mut p = start.to_vec();
        p[k] += step;
        let mut cand = f(&p);
        if cand.1.is_infinite() {
            p[k] = start[k] - step;
            cand = f(&p);
        }
        simplex.push(cand);
    }
    for _ in 0..40 * d {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[d].clone();
        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|s| s.0[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (worst.0[k] - centroid[k])).collect() };
        let refl = f(&along(-1.0));
        if refl.1 < simplex[0].1 {
            let exp = f(&along(-2.0));
            simplex[d] = if exp.1 < refl.1 { exp } else { refl };
        } else if refl.1 < simplex[d - 1].1 {
            simplex[d] = refl;
        } else {
            let contr = f(&along(0.5));
            if contr.1 < worst.1 {
                simplex[d] = contr;
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = (0..d).map(|k| best[k] + 0.5 * (s.0[k] - best[k])).collect();
                    *s = f(&p);
                }
            }
        }
        let spread = simplex.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
            - simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        if spread.abs() < 1e-15 * simplex[0].1.abs() {
            break;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, v) = simplex.swap_remove(0);
    (p, -v)
}

fn run_once(dom: &Domain, cfg: &FeketeConfig, stream: u64) -> Result<Run, DiameterError> {
    let n = dom.basis.rank();
    let e_n = dom.basis.e_n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let dims = dom.bbox.len();
    let mut shift = || -> Vec<f64> { (0..dims).map(|_| rng.gen::<f64>()).collect() };
    let init_pool = dom.pool(cfg.pool_size.max(2 * n), &shift(), 0);
    let mut points = leja_init(dom, &init_pool)?;
    let mut v = vandermonde_of(dom, &points);
    let lu = Lu::new(&v, n);
    if lu.is_singular() {
        return Err(DiameterError::DegenerateBasis);
    }
    let mut log_det = lu.log_abs_det();
    let mut history = vec![proxy_of(log_det, e_n)];
    let extent = dom.bbox.iter().map(|&(lo, hi)| hi - lo).fold(0.0, f64::max).max(1e-12);
    let mut row = vec![0.0; n];
    let mut sweeps = 0;
    for sweep in 0..cfg.max_sweeps {
        sweeps = sweep + 1;
        let saved = (points.clone(), v.clone(), log_det);
        let mut vinv = Lu::new(&v, n).inverse();
        let pool = dom.pool(cfg.pool_size, &shift(), (sweep as u64 + 1) * 7919);
        let pool_rows: Vec<Vec<f64>> = pool
            .iter()
            .map(|p| {
                let mut r = vec![0.0; n];
                dom.row(p, &mut r);
                r
            })
            .collect();
        let step = 0.05 * extent / (1.0 + sweep as f64);
        for i in 0..n {
            let col: Vec<f64> = (0..n).map(|a| vinv[a * n + i]).collect();
            let (mut best_p, mut best_r) = (None, 1.0);
            for (p, r) in pool.iter().zip(&pool_rows) {
                let ratio = dot(r, &col).abs();
                if ratio > best_r * (1.0 + 1e-12) {
                    best_r = ratio;
                    best_p = Some(p.clone());
                }
            }
            let start = best_p.clone().unwrap_or_else(|| points[i].clone());
            if cfg.polish {
                let (p, r) = polish(dom, &start, &col, step);
                if r > best_r * (1.0 + 1e-12) {
                    best_p = Some(p);
                }
            }
            let Some(p) = best_p else { continue };
            dom.row(&p, &mut row);
            let ratio = dot(&row, &col);
            if ratio.abs() <= 1.0 {
                continue;
            }
            // Sherman–Morrison for replacing row i of V.
            let diff: Vec<f64> = (0..n).map(|j| row[j] - v[i * n + j]).collect();
            let w: Vec<f64> = (0..n).map(|b| (0..n).map(|a| diff[a] * vinv[a * n + b]).sum()).collect();
            for a in 0..n {
                let ca = col[a] / ratio;
                for b in 0..n {
                    vinv[a * n + b] -= ca * w[b];
                }
            }
            v[i * n..(i + 1) * n].copy_from_slice(&row);
            points[i] = p;
        }
        let fresh = Lu::new(&v, n);
        let fresh_log = if fresh.is_singular() { f64::NEG_INFINITY } else { fresh.log_abs_det() };
        let old = saved.2;
        if fresh_log <= old {
            points = saved.0;
            log_det = old;
            history.push(proxy_of(log_det, e_n));
            break;
        }
        log_det = fresh_log;
        history.push(proxy_of(log_det, e_n));
        if log_det - old < 1e-8 * old.abs().max(1.0) {
            break;
        }
    }
    Ok(Run { points, log_det, history, sweeps })
}

fn describe(basis: &ModuleBasis) -> String {
    match &basis.kind {
        crate::bases::BasisKind::Rectangular { sizes } => format!("rectangular{sizes:?}"),
        crate::bases::BasisKind::Homogeneous { r } => format!("homogeneous(n = {}, r = {r})", basis.n),
        crate::bases::BasisKind::Family(f) => format!("{f}(n = {})", basis.n),
    }
}

fn optimise(dom: Domain, cfg: &FeketeConfig) -> Result<FeketeResult, DiameterError> {
    let n = dom.basis.rank();
    if n > MAX_FEKETE_RANK {
        return Err(DiameterError::RankTooLarge(n));
    }
    let restarts = cfg.restarts.max(1);
    let runs: Vec<Result<Run, DiameterError>> =
        (0..restarts as u64).into_par_iter().map(|k| run_once(&dom, cfg, k)).collect();
    let mut best: Option<Run> = None;
    let mut err = None;
    for r in runs {
        match r {
            Ok(run) => {
                if best.as_ref().is_none_or(|b| run.log_det > b.log_det) {
                    best = Some(run);
                }
            }
            Err(e) => err = Some(e),
        }
    }
    let run = best.ok_or_else(|| err.unwrap_or(DiameterError::DegenerateBasis))?;
    Ok(FeketeResult {
        basis: describe(dom.basis),
        rank: n,
        e_n: dom.basis.e_n,
        points: PointConfig::new(run.points.iter().map(|p| dom.image(p)).collect()),
        source_points: run.points,
        log_abs_det: run.log_det,
        proxy: proxy_of(run.log_det, dom.basis.e_n),
        iterations: run.sweeps,
        restarts,
        history: run.history,
    })
}

/// Searches for points of `region` with large `|det V(z)|`. Image regions are
/// optimised through the pullback of the basis to their source region.
pub fn fekete_maximize(
    basis: &ModuleBasis,
    region: &Region,
    cfg: &FeketeConfig,
) -> Result<FeketeResult, DiameterError> {
    if basis.dim() != region.dim() {
        return Err(DiameterError::DimensionMismatch { basis: basis.dim(), region: region.dim() });
    }
    let (source, maps) = region.pullback();
    let bbox = source.bounding_box();
    optimise(Domain { basis, source, maps, bbox }, cfg)
}

/// Fekete search for a family basis over the image of the unit square; the
/// points are reported in the family's ambient variables.
pub fn fekete_maximize_family(family: Family, n: u32, cfg: &FeketeConfig) -> Result<FeketeResult, DiameterError> {
    let basis = family_basis(family, n);
    let source = Region::unit_square();
    let bbox = source.bounding_box();
    optimise(Domain { basis: &basis, source, maps: vec![PointMap::Family(family)], bbox }, cfg)
}

// ---------------------------------------------------------------------------
// Bound values with an audit trail

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivationStep {
    pub rule: String,
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub derivation: Vec<DerivationStep>,
}

/// Evaluates a named rule on its inputs.
pub fn apply_rule(rule: &str, x: &[f64]) -> Option<f64> {
    let v = match (rule, x.len()) {
        ("constant", 1) => x[0],
        ("interval", 2) => (x[1] - x[0]) / 4.0,
        ("rectangle", 4) => ((x[1] - x[0]) * (x[3] - x[2])).sqrt() / 4.0,
        ("shoelace", 6) => triangle_area(&[[x[0], x[1]], [x[2], x[3]], [x[4], x[5]]]),
        ("triangle", 1) => x[0].sqrt() / (E * SQRT_2),
        ("ball", 1) => x[0] / (2.0 * E).sqrt(),
        ("gl_scaling", 3) => x[0].abs().powf(1.0 / x[1]) * x[2],
        ("product_rule", 4) => x[0].powf(x[1] / (x[1] + x[3])) * x[2].powf(x[3] / (x[1] + x[3])),
        ("tensor_limit", 4) => x[0].powf(x[1]) * x[2].powf(x[3]),
        ("directsum_limit", k) if k % 2 == 0 => {
            let h = k / 2;
            (0..h).map(|i| x[i].powf(x[h + i])).product()
        }
        ("power", 2) => x[0].powf(x[1]),
        ("intuitive_threshold", 2) => ((x[1] / x[0]) * (2.0 * x[0] + 1.0) / (x[0] + 1.0)).exp(),
        _ => return None,
    };
    Some(v)
}

impl BoundValue {
    pub fn leaf(rule: &str, inputs: &[(&str, f64)]) -> BoundValue {
        BoundValue { value: 0.0, derivation: Vec::new() }.then(rule, inputs)
    }

    /// Appends a step; its value becomes the value of the bound.
    pub fn then(mut self, rule: &str, inputs: &[(&str, f64)]) -> BoundValue {
        let xs: Vec<f64> = inputs.iter().map(|(_, v)| *v).collect();
        let value = apply_rule(rule, &xs).unwrap_or_else(|| panic!("unknown rule {rule}/{}", xs.len()));
        self.derivation.push(DerivationStep {
            rule: rule.to_string(),
            inputs: inputs.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
            value,
        });
        self.value = value;
        self
    }

    /// Merges the trails of `parts` in front of a final step.
    pub fn combine(parts: &[&BoundValue], rule: &str, inputs: &[(&str, f64)]) -> BoundValue {
        let derivation = parts.iter().flat_map(|p| p.derivation.iter().cloned()).collect();
        BoundValue { value: 0.0, derivation }.then(rule, inputs)
    }

    /// Re-evaluates every step and returns the final value, or the index of
    /// the first step that does not reproduce.
    pub fn replay(&self) -> Result<f64, usize> {
        for (k, s) in self.derivation.iter().enumerate() {
            let xs: Vec<f64> = s.inputs.iter().map(|(_, v)| *v).collect();
            match apply_rule(&s.rule, &xs) {
                Some(v) if (v - s.value).abs() <= 1e-12 * v.abs().max(1e-300) || v == s.value => {}
                _ => return Err(k),
            }
        }
        match self.derivation.last() {
            Some(s) if s.value == self.value => Ok(self.value),
            _ => Err(self.derivation.len()),
        }
    }
}

/// Catalogued transfinite diameters.
pub fn closed_form_diameter(region: &Region) -> Result<BoundValue, DiameterError> {
    match region {
        Region::Interval { a, b } => Ok(BoundValue::leaf("interval", &[("a", *a), ("b", *b)])),
        Region::Box { a, b, c, d } => Ok(BoundValue::leaf("rectangle", &[("a", *a), ("b", *b), ("c", *c), ("d", *d)])),
        Region::Triangle { vertices: v } => {
            let area = BoundValue::leaf(
                "shoelace",
                &[("x1", v[0][0]), ("y1", v[0][1]), ("x2", v[1][0]), ("y2", v[1][1]), ("x3", v[2][0]), ("y3", v[2][1])],
            );
            let vol = area.value;
            Ok(area.then("triangle", &[("vol", vol)]))
        }
        Region::Ball { radius } => Ok(BoundValue::leaf("ball", &[("radius", *radius)])),
        Region::AffineImage { p, inner } => gl_scaling(p, &closed_form_diameter(inner)?, 2),
        other => Err(DiameterError::NoClosedForm(other.to_string())),
    }
}

/// `|det P|^{1/n}·diam`.
pub fn gl_scaling(p: &[[f64; 2]; 2], diam: &BoundValue, n: u32) -> Result<BoundValue, DiameterError> {
    let d = det2(p);
    if d == 0.0 {
        return Err(DiameterError::SingularMatrix);
    }
    Ok(BoundValue::combine(&[diam], "gl_scaling", &[("det", d), ("n", n as f64), ("diam", diam.value)]))
}

/// `d1^{m/(m+n)} d2^{n/(m+n)}`.
pub fn product_rule(d1: &BoundValue, m: u32, d2: &BoundValue, n: u32) -> BoundValue {
    BoundValue::combine(
        &[d1, d2],
        "product_rule",
        &[("diam1", d1.value), ("m", m as f64), ("diam2", d2.value), ("n", n as f64)],
    )
}

/// `supM^α · supN^β`.
pub fn tensor_limit_bound(sup_m: &BoundValue, alpha: f64, sup_n: &BoundValue, beta: f64) -> BoundValue {
    BoundValue::combine(
        &[sup_m, sup_n],
        "tensor_limit",
        &[("sup_m", sup_m.value), ("alpha", alpha), ("sup_n", sup_n.value), ("beta", beta)],
    )
}

/// `∏ sups_i^{α_i}`.
pub fn directsum_limit_bound(sups: &[BoundValue], alphas: &[f64]) -> Result<BoundValue, DiameterError> {
    if sups.len() != alphas.len() || sups.is_empty() {
        return Err(DiameterError::InvalidParameter("need one exponent per summand".into()));
    }
    let names: Vec<String> =
        (0..sups.len()).map(|i| format!("sup{i}")).chain((0..sups.len()).map(|i| format!("alpha{i}"))).collect();
    let values: Vec<f64> = sups.iter().map(|s| s.value).chain(alphas.iter().copied()).collect();
    let inputs: Vec<(&str, f64)> = names.iter().map(String::as_str).zip(values).collect();
    let parts: Vec<&BoundValue> = sups.iter().collect();
    Ok(BoundValue::combine(&parts, "directsum_limit", &inputs))
}

#[derive(Clone, Debug, Serialize)]
pub struct TauEpsBounds {
    pub eps: f64,
    pub naive: f64,
    pub rect_cube_root: f64,
    pub triangle_bound: f64,
    pub lower_bound: f64,
    pub best_upper: f64,
}

/// Upper and lower bounds for the rectangular diameter of `τ_ε`.
pub fn tau_eps_bounds(eps: f64) -> Result<TauEpsBounds, DiameterError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(DiameterError::InvalidParameter(format!("eps = {eps} outside (0, 1]")));
    }
    let naive: f64 = 0.25;
    let rect_cube_root = (eps / 16.0).cbrt();
    let triangle_bound = (eps / (4.0 * E * E * (2.0 * eps.sqrt() - eps))).cbrt();
    let lower_bound = (eps * (1.0 - eps.sqrt()).powi(2) / 16.0).cbrt();
    let best_upper = naive.min(rect_cube_root).min(triangle_bound);
    debug_assert!(lower_bound <= rect_cube_root && lower_bound <= triangle_bound);
    Ok(TauEpsBounds { eps, naive, rect_cube_root, triangle_bound, lower_bound, best_upper })
}

/// `ε` where the two non-trivial upper bounds agree, by bisection.
pub fn tau_eps_crossover() -> f64 {
    let g = |e: f64| {
        let b = tau_eps_bounds(e).expect("eps in range");
        b.rect_cube_root - b.triangle_bound
    };
    let (mut lo, mut hi) = (0.01, 0.9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo).signum() == g(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(1 − √(1 − 4/e²))²`, the crossover in closed form.
pub fn tau_eps_crossover_closed_form() -> f64 {
    (1.0 - (1.0 - 4.0 / (E * E)).sqrt()).powi(2)
}

/// Triangles enclosing and enclosed by the image of the two-parameter region
/// under `(x, y) ↦ (xy, x + y)`.
pub const T_MAX: [[f64; 2]; 3] = [[0.0, 0.0], [0.0, 1.05], [0.098, 0.653]];
pub const T_MIN: [[f64; 2]; 3] = [[0.0, 0.25], [0.0, 0.99], [0.0885, 0.63]];

#[derive(Clone, Debug, Serialize)]
pub struct Zeta2RegionBound {
    pub lower: BoundValue,
    pub upper: BoundValue,
    /// `upper^{3/2}`, the bound for the five-parameter family.
    pub five_param: BoundValue,
    /// The quantity bounded, under both of its names.
    pub labels: [&'static str; 2],
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub five_param_ok: bool,
}

fn triangle_chain(v: &[[f64; 2]; 3]) -> BoundValue {
    let d = closed_form_diameter(&Region::Triangle { vertices: *v }).expect("triangle");
    let one = BoundValue::leaf("constant", &[("one", 1.0)]);
    let rect = tensor_limit_bound(&d, 2.0 / 3.0, &one, 0.0);
    let r = rect.value;
    rect.then("power", &[("sup", r), ("exponent", 2.0)])
}

/// `(vol(T)/(2e²))^{2/3}` for the inner and outer triangles.
pub fn zeta2_region_bound() -> Zeta2RegionBound {
    let lower = triangle_chain(&T_MIN);
    let upper = triangle_chain(&T_MAX);
    let u = upper.value;
    let five_param = upper.clone().then("power", &[("bound", u), ("exponent", 1.5)]);
    Zeta2RegionBound {
        lower_ok: lower.value > 0.017,
        upper_ok: upper.value < 0.023,
        five_param_ok: five_param.value < 0.003488,
        lower,
        upper,
        five_param,
        labels: ["Sup^hom_(1,1)(tau)", "(Sup^rec)^2"],
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaConstants {
    pub eta: f64,
    pub theta_classical: f64,
    pub theta_one: f64,
    pub grid_max: f64,
    pub grid_argmax: (f64, f64),
}

/// Maximum of `x(1−x)y(1−y)/(1−xy)` on the unit square, in closed form and
/// on a grid of step `1/grid`.
pub fn eta_critical(grid: u32) -> EtaConstants {
    let eta = (5.0 * 5f64.sqrt() - 11.0) / 2.0;
    let g = grid as f64;
    let (grid_max, grid_argmax) = (0..=grid)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / g;
            (0..=grid)
                .map(|j| {
                    let y = j as f64 / g;
                    let d = 1.0 - x * y;
                    let f = if d > 0.0 { x * (1.0 - x) * y * (1.0 - y) / d } else { 0.0 };
                    (f, (x, y))
                })
                .fold((f64::NEG_INFINITY, (0.0, 0.0)), |a, b| if b.0 > a.0 { b } else { a })
        })
        .reduce(|| (f64::NEG_INFINITY, (0.0, 0.0)), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    EtaConstants { eta, theta_classical: -eta.ln() / 2.0, theta_one: -(eta / 4.0).ln() / 3.0, grid_max, grid_argmax }
}

/// `exp((w/r)(2r+1)/(r+1))`: the factor by which the rectangular diameter
/// of the image must beat 1.
pub fn intuitive_threshold(r: u32, w: f64) -> Result<BoundValue, DiameterError> {
    if r == 0 || w < 0.0 {
        return Err(DiameterError::InvalidParameter(format!("need r ≥ 1 and w ≥ 0, got r = {r}, w = {w}")));
    }
    Ok(BoundValue::leaf("intuitive_threshold", &[("r", r as f64), ("w", w)]))
}

// ---------------------------------------------------------------------------
// Change of variables (xy, x+y)

type Poly = BTreeMap<(u32, u32), BigInt>;

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `x^a (xy)^i (x+y)^j` expanded.
fn sym_poly(a: u32, i: u32, j: u32) -> Poly {
    (0..=j).map(|k| ((a + i + k, i + j - k), binomial(j, k))).collect()
}

fn monomial_poly(a: u32, b: u32) -> Poly {
    [((a, b), BigInt::from(1))].into_iter().collect()
}

fn span_rank(polys: &[Poly]) -> usize {
    let keys: Vec<(u32, u32)> =
        polys.iter().flat_map(|p| p.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let m: Vec<Vec<BigRational>> = polys
        .iter()
        .map(|p| keys.iter().map(|k| BigRational::from_integer(p.get(k).cloned().unwrap_or_default())).collect())
        .collect();
    rational_rank(&m)
}

fn same_span(a: &[Poly], b: &[Poly]) -> bool {
    let both: Vec<Poly> = a.iter().chain(b).cloned().collect();
    let r = span_rank(&both);
    span_rank(a) == r && span_rank(b) == r
}

/// `P_n ⊗ {1, x}`: `x^a (xy)^i (x+y)^j`, `i + j < n`, `a ∈ {0, 1}`.
fn p_tensor_n(n: u32) -> Vec<Poly> {
    (0..n).flat_map(|i| (0..n - i).flat_map(move |j| (0..2).map(move |a| sym_poly(a, i, j)))).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RankIdentity {
    pub n: u32,
    pub rank_m: usize,
    pub rank_p_tensor_n: usize,
    pub rank_p_prev_tensor_n: usize,
    pub rank_c: usize,
    pub rank_k: usize,
    /// `span(P_{n−1} ⊗ N ∪ C_n) = span(M_n)` with full rank `n²`.
    pub m_from_p_prev_and_c: bool,
    /// `span(M_n ∪ K_n) = span(P_n ⊗ N)` with full rank `n(n+1)`.
    pub p_from_m_and_k: bool,
}

impl RankIdentity {
    pub fn holds(&self) -> bool {
        self.m_from_p_prev_and_c
            && self.p_from_m_and_k
            && self.rank_c == self.n as usize
            && self.rank_k == self.n as usize
    }
}

/// Exact rank bookkeeping for the decomposition of the rectangular module
/// through `ℤ[xy, x+y] ⊗ (ℤ ⊕ ℤx)`.
pub fn rank_identity_check(n: u32) -> RankIdentity {
    assert!(n >= 1);
    let m: Vec<Poly> = (0..n).flat_map(|j| (0..n).map(move |i| monomial_poly(i, j))).collect();
    let c: Vec<Poly> = (0..n).map(|i| monomial_poly(i, n - 1)).collect();
    let k: Vec<Poly> = (0..n).map(|i| sym_poly(1, i, n - 1 - i)).collect();
    let p = p_tensor_n(n);
    let p_prev = p_tensor_n(n - 1);
    let nn = n as usize;
    let with_c: Vec<Poly> = p_prev.iter().chain(&c).cloned().collect();
    let with_k: Vec<Poly> = m.iter().chain(&k).cloned().collect();
    RankIdentity {
        n,
        rank_m: span_rank(&m),
        rank_p_tensor_n: span_rank(&p),
        rank_p_prev_tensor_n: span_rank(&p_prev),
        rank_c: span_rank(&c),
        rank_k: span_rank(&k),
        m_from_p_prev_and_c: span_rank(&with_c) == nn * nn && with_c.len() == nn * nn && same_span(&with_c, &m),
        p_from_m_and_k: span_rank(&with_k) == nn * (nn + 1) && with_k.len() == nn * (nn + 1) && same_span(&with_k, &p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{homogeneous_basis, rectangular_basis};

    fn quick() -> FeketeConfig {
        FeketeConfig { restarts: 2, max_sweeps: 30, seed: 3, pool_size: 256, polish: true }
    }

    #[test]
    fn membership_basics() {
        let t = Region::unit_triangle();
        assert!(t.contains(&[0.0, 0.0]) && t.contains(&[0.5, 0.5]) && !t.contains(&[0.6, 0.5]));
        let tau = Region::TauEps { eps: 0.1 };
        assert!(tau.contains(&[1.0, 0.1]) && !tau.contains(&[0.5, 0.5]));
        assert!(Region::TwoParamImage.contains(&[1.0, 0.0]) && !Region::TwoParamImage.contains(&[0.5, 0.5]));
        let ball = Region::Ball { radius: 2.0 };
        assert!(ball.contains(&[2.0, 0.0]) && !ball.contains(&[1.5, 1.5]));
    }

    #[test]
    fn image_membership_matches_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sq = Region::unit_square();
        for map in [PointMap::Phi, PointMap::PhiX, PointMap::PhiY] {
            let img = match map {
                PointMap::Phi => Region::PhiImage(Box::new(sq.clone())),
                PointMap::PhiX => Region::PhiXImage(Box::new(sq.clone())),
                _ => Region::PhiYImage(Box::new(sq.clone())),
            };
            for _ in 0..500 {
                let z = sq.sample(&mut rng);
                assert!(img.contains(&map.apply(&z)), "{img} at {z:?}");
            }
        }
        let phi = Region::PhiImage(Box::new(sq));
        assert!(!phi.contains(&[0.5, 0.2]));
    }

    #[test]
    fn two_param_map_lands_in_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20_000 {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            assert!(Region::TwoParamImage.contains(&Family::TwoParam.ambient_values(x, y)));
        }
    }

    #[test]
    fn samples_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let regions = [
            Region::unit_triangle(),
            Region::Ball { radius: 1.0 },
            Region::TauEps { eps: 0.05 },
            Region::TwoParamImage,
            Region::AffineImage { p: [[1.0, 0.0], [-1.0, 1.0]], inner: Box::new(Region::unit_square()) },
        ];
        for r in &regions {
            for _ in 0..200 {
                assert!(r.contains(&r.sample(&mut rng)));
            }
        }
    }

    #[test]
    fn catalog_values() {
        assert!((closed_form_diameter(&Region::unit_interval()).unwrap().value - 0.25).abs() < 1e-15);
        let t = closed_form_diameter(&Region::unit_triangle()).unwrap();
        assert!((t.value - 1.0 / (2.0 * E)).abs() < 1e-15);
        assert_eq!(t.replay(), Ok(t.value));
        assert!(matches!(closed_form_diameter(&Region::TwoParamImage), Err(DiameterError::NoClosedForm(_))));
    }

    #[test]
    fn scaling_laws() {
        let ball = closed_form_diameter(&Region::Ball { radius: 1.0 }).unwrap();
        let scaled = gl_scaling(&[[3.0, 0.0], [0.0, 3.0]], &ball, 2).unwrap();
        assert!((scaled.value - 3.0 / (2.0 * E).sqrt()).abs() < 1e-14);
        let shear = gl_scaling(&[[1.0, 0.0], [-1.0, 1.0]], &ball, 2).unwrap();
        assert!((shear.value - ball.value).abs() < 1e-15);
        assert_eq!(gl_scaling(&[[1.0, 2.0], [2.0, 4.0]], &ball, 2), Err(DiameterError::SingularMatrix));
        let i = closed_form_diameter(&Region::unit_interval()).unwrap();
        assert!((product_rule(&i, 1, &i, 1).value - 0.25).abs() < 1e-15);
        let eps = closed_form_diameter(&Region::Interval { a: 0.0, b: 0.09 }).unwrap();
        assert!((product_rule(&eps, 1, &i, 1).value - 0.3 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn tau_eps_crossover_and_limits() {
        let c = tau_eps_crossover();
        assert!((c - tau_eps_crossover_closed_form()).abs() < 1e-10);
        assert!((c - 0.1042).abs() < 0.002);
        let above = tau_eps_bounds(0.2).unwrap();
        assert!(above.triangle_bound < above.rect_cube_root);
        let below = tau_eps_bounds(0.05).unwrap();
        assert!(below.triangle_bound > below.rect_cube_root);
        let one = tau_eps_bounds(1.0).unwrap();
        assert_eq!(one.best_upper, 0.25);
        let tiny = tau_eps_bounds(1e-9).unwrap();
        assert_eq!(tiny.best_upper, tiny.rect_cube_root);
        assert!(tau_eps_bounds(0.0).is_err());
    }

    #[test]
    fn zeta2_region_values() {
        let z = zeta2_region_bound();
        assert!(z.upper_ok && z.five_param_ok, "{z:?}");
        // The inner triangle's vertices give 0.016996…, just under 0.017.
        assert!((z.lower.value - 0.0169962).abs() < 1e-6);
        assert!((triangle_area(&T_MAX) - 0.05145).abs() < 1e-15);
        assert!(z.upper.replay().is_ok() && z.five_param.replay().is_ok());
    }

    #[test]
    fn thresholds() {
        let t = intuitive_threshold(1, 2.0).unwrap();
        assert!((t.value - 3f64.exp()).abs() < 1e-12);
        let eta = eta_critical(200).eta;
        assert!((eta / 4.0 * t.value - 0.4527).abs() < 1e-4);
        let t22 = intuitive_threshold(2, 2.0).unwrap();
        assert!((4.0 / t22.value - 0.7555).abs() < 1e-4);
        for w in 1..5 {
            let t = intuitive_threshold(w, w as f64).unwrap();
            assert!((t.value - (2.0 - 1.0 / (w as f64 + 1.0)).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn fekete_trivial_cases() {
        let r = fekete_maximize(&rectangular_basis(&[2]), &Region::unit_interval(), &quick()).unwrap();
        assert!((r.log_abs_det.exp() - 1.0).abs() < 1e-12 && (r.proxy - 1.0).abs() < 1e-12);
        let r = fekete_maximize(&rectangular_basis(&[3]), &Region::Interval { a: -1.0, b: 1.0 }, &quick()).unwrap();
        assert!((r.log_abs_det.exp() - 2.0).abs() < 1e-6, "{}", r.log_abs_det.exp());
        let mut xs: Vec<f64> = r.points.points.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 1.0).abs() < 1e-3 && xs[1].abs() < 1e-3 && (xs[2] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fekete_ascends_and_stays_inside() {
        let region = Region::unit_triangle();
        let r = fekete_maximize(&homogeneous_basis(4, 2), &region, &quick()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.points.points.iter().all(|p| region.contains(p)));
    }

    #[test]
    fn degenerate_region_reported() {
        let pt = Region::Box { a: 0.5, b: 0.5, c: 0.5, d: 0.5 };
        assert_eq!(
            fekete_maximize(&rectangular_basis(&[2, 2]), &pt, &quick()).unwrap_err(),
            DiameterError::DegenerateBasis
        );
    }

    #[test]
    fn region_parsing() {
        assert_eq!("interval:0,1".parse::<Region>().unwrap(), Region::unit_interval());
        assert_eq!("image".parse::<Region>().unwrap(), Region::TwoParamImage);
        let r: Region = "affine:1,0,-1,1:phi:box:0,1,0,1".parse().unwrap();
        assert_eq!(
            r,
            Region::AffineImage {
                p: [[1.0, 0.0], [-1.0, 1.0]],
                inner: Box::new(Region::PhiImage(Box::new(Region::unit_square())))
            }
        );
        assert!("ball".parse::<Region>().is_err() && "torus:1".parse::<Region>().is_err());
    }

    #[test]
    fn rank_identity_small() {
        for n in 1..=4 {
            let r = rank_identity_check(n);
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.rank_p_tensor_n, (n * (n + 1)) as usize);
        }
    }
}
