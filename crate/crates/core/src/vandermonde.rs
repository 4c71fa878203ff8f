//! Generalized Vandermonde matrices, amalgamated products and the
//! permutation-sum formula for their determinants.

use std::ops::Mul;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bases::{ModuleBasis, Monomial};
use crate::diameter::Region;
use crate::exactnum::BigRational;
use crate::linalg::{rational_det, Lu};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VdmError {
    #[error("expected {expected} points of dimension {dim}, got {got} points")]
    DimensionMismatch { expected: usize, dim: usize, got: usize },
    #[error("amalgam needs A: mn×m and B: mn×n, got A {a_rows}×{a_cols}, B {b_rows}×{b_cols}")]
    ShapeError { a_rows: usize, a_cols: usize, b_rows: usize, b_cols: usize },
    #[error("permutation sum over {0}! terms exceeds the limit of 8!")]
    SizeLimit(usize),
}

/// `N` points in `ℝ^r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointConfig {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointConfig {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        let dim = points.first().map_or(0, Vec::len);
        PointConfig { dim, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_shape(basis: &ModuleBasis, z: &PointConfig) -> Result<(), VdmError> {
    if z.len() != basis.rank() || z.points.iter().any(|p| p.len() != basis.dim()) {
        return Err(VdmError::DimensionMismatch { expected: basis.rank(), dim: basis.dim(), got: z.len() });
    }
    Ok(())
}

/// `(m_j(z_i))`: rows are points, columns basis monomials.
pub fn vdm_matrix(basis: &ModuleBasis, z: &PointConfig) -> Result<Vec<Vec<f64>>, VdmError> {
    check_shape(basis, z)?;
    Ok(z.points.iter().map(|p| basis.monomials.iter().map(|m| m.eval(p)).collect()).collect())
}

fn flat(m: &[Vec<f64>]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

pub fn vdm_log_abs_det(basis: &ModuleBasis, z: &PointConfig) -> Result<f64, VdmError> {
    let v = vdm_matrix(basis, z)?;
    Ok(Lu::new(&flat(&v), v.len()).log_abs_det())
}

pub fn vdm_det_abs(basis: &ModuleBasis, z: &PointConfig) -> Result<f64, VdmError> {
    let v = vdm_matrix(basis, z)?;
    Ok(Lu::new(&flat(&v), v.len()).det().abs())
}

fn monomial_at_rational(m: &Monomial, p: &[BigRational]) -> BigRational {
    m.exponents.iter().zip(p).fold(BigRational::from_integer(m.coefficient.into()), |acc, (&e, x)| {
        acc * num_traits::pow(x.clone(), e as usize)
    })
}

/// Exact Vandermonde matrix at rational points.
pub fn vdm_matrix_exact(basis: &ModuleBasis, z: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>, VdmError> {
    if z.len() != basis.rank() || z.iter().any(|p| p.len() != basis.dim()) {
        return Err(VdmError::DimensionMismatch { expected: basis.rank(), dim: basis.dim(), got: z.len() });
    }
    Ok(z.iter().map(|p| basis.monomials.iter().map(|m| monomial_at_rational(m, p)).collect()).collect())
}

pub fn vdm_det_exact(basis: &ModuleBasis, z: &[Vec<BigRational>]) -> Result<BigRational, VdmError> {
    Ok(rational_det(&vdm_matrix_exact(basis, z)?))
}

/// Row `i` of `A ⋆ B` is `a_i ⊗ b_i`, the index into `a_i` varying fastest.
pub fn amalgam<T: Clone + Mul<Output = T>>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<Vec<Vec<T>>, VdmError> {
    let m = a.first().map_or(0, Vec::len);
    let n = b.first().map_or(0, Vec::len);
    let shape = VdmError::ShapeError { a_rows: a.len(), a_cols: m, b_rows: b.len(), b_cols: n };
    if a.len() != m * n || b.len() != m * n || a.iter().any(|r| r.len() != m) || b.iter().any(|r| r.len() != n) {
        return Err(shape);
    }
    Ok(a.iter()
        .zip(b)
        .map(|(ra, rb)| rb.iter().flat_map(|y| ra.iter().map(move |x| x.clone() * y.clone())).collect())
        .collect())
}

/// `H_{m,n} = ∏_{i<n} (m+i)!/i!`.
pub fn h_constant(m: u32, n: u32) -> BigUint {
    let fact = |k: u32| (1..=k).fold(BigUint::one(), |acc, j| acc * j);
    (0..n).fold(BigUint::one(), |acc, i| acc * fact(m + i) / fact(i))
}

/// Calls `f(perm, sign)` for every permutation of `0..k` (Heap's algorithm).
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize], i32)) {
    let mut p: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut sign = 1;
    f(&p, sign);
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            sign = -sign;
            f(&p, sign);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn sub_det(m: &[Vec<BigRational>], rows: &[usize]) -> BigRational {
    rational_det(&rows.iter().map(|&r| m[r].clone()).collect::<Vec<_>>())
}

/// `det(A ⋆ B)` via the signed sum over `Σ_{mn}` of tableau products: the
/// numbers `1..mn` fill an `m × n` tableau top to bottom, left to right;
/// `A_σ` multiplies the `m×m` minors of `A` on the permuted columns and
/// `B_σ` the `n×n` minors of `B` on the permuted rows.
pub fn amalgam_det_formula(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Result<BigRational, VdmError> {
    amalgam(a, b)?;
    let m = a[0].len();
    let n = b[0].len();
    let k = m * n;
    if k > 8 {
        return Err(VdmError::SizeLimit(k));
    }
    let mut total = BigRational::zero();
    let mut col_rows = vec![0usize; m];
    let mut row_rows = vec![0usize; n];
    for_each_permutation(k, |sigma, sign| {
        let mut term = BigRational::one();
        for c in 0..n {
            for r in 0..m {
                col_rows[r] = sigma[c * m + r];
            }
            term *= sub_det(a, &col_rows);
            if term.is_zero() {
                return;
            }
        }
        for r in 0..m {
            for c in 0..n {
                row_rows[c] = sigma[c * m + r];
            }
            term *= sub_det(b, &row_rows);
            if term.is_zero() {
                return;
            }
        }
        if sign > 0 {
            total += term;
        } else {
            total -= term;
        }
    });
    let h = BigRational::from_integer(h_constant(m as u32, n as u32).into());
    Ok(total / h)
}

/// Basis of products `m1·m2`, the first factor varying fastest.
pub fn tensor_basis(b1: &ModuleBasis, b2: &ModuleBasis) -> ModuleBasis {
    assert_eq!(b1.dim(), b2.dim(), "tensor factors must share ambient variables");
    let monomials = b2
        .monomials
        .iter()
        .flat_map(|y| {
            b1.monomials.iter().map(move |x| Monomial {
                exponents: x.exponents.iter().zip(&y.exponents).map(|(p, q)| p + q).collect(),
                coefficient: x.coefficient * y.coefficient,
            })
        })
        .collect::<Vec<_>>();
    ModuleBasis { monomials, e_n: b1.e_n * b2.rank() as u64 + b2.e_n * b1.rank() as u64, ..b1.clone() }
}

/// Concatenation of two bases.
pub fn direct_sum_basis(b1: &ModuleBasis, b2: &ModuleBasis) -> ModuleBasis {
    assert_eq!(b1.dim(), b2.dim(), "summands must share ambient variables");
    let mut monomials = b1.monomials.clone();
    monomials.extend(b2.monomials.iter().cloned());
    ModuleBasis { monomials, e_n: b1.e_n + b2.e_n, ..b1.clone() }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Largest `|det V(z_I)|` over `rank`-subsets `I` of the points.
pub fn max_minor(basis: &ModuleBasis, z: &PointConfig) -> f64 {
    let k = basis.rank();
    combinations(z.len(), k)
        .iter()
        .map(|idx| {
            let sub = PointConfig::new(idx.iter().map(|&i| z.points[i].clone()).collect());
            vdm_det_abs(basis, &sub).unwrap_or(0.0)
        })
        .fold(0.0, f64::max)
}

/// Outcome of a sampled inequality check.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    /// The combined basis is not free, so its determinant vanishes identically.
    pub not_free: bool,
    pub samples: usize,
    /// Largest observed `LHS / RHS`.
    pub max_ratio: f64,
    /// Largest sampled `|det|` of the combined basis.
    pub sampled_lhs: f64,
    pub constant: f64,
}

fn has_duplicates(b: &ModuleBasis) -> bool {
    let set: std::collections::HashSet<_> = b.monomials.iter().map(|m| &m.exponents).collect();
    set.len() != b.rank()
}

fn sample_config(region: &Region, k: usize, rng: &mut ChaCha8Rng) -> PointConfig {
    PointConfig::new((0..k).map(|_| region.sample(rng)).collect())
}

fn check_pointwise(
    combined: &ModuleBasis,
    region: &Region,
    samples: usize,
    seed: u64,
    constant: f64,
    rhs: impl Fn(&PointConfig) -> f64,
) -> BoundCheck {
    if has_duplicates(combined) {
        return BoundCheck { holds: true, not_free: true, samples: 0, max_ratio: 0.0, sampled_lhs: 0.0, constant };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holds = true;
    let mut max_ratio: f64 = 0.0;
    let mut sampled_lhs: f64 = 0.0;
    for _ in 0..samples {
        let z = sample_config(region, combined.rank(), &mut rng);
        let lhs = vdm_det_abs(combined, &z).expect("shape fixed by construction");
        let r = constant * rhs(&z);
        sampled_lhs = sampled_lhs.max(lhs);
        if lhs > r * (1.0 + 1e-9) + 1e-300 {
            holds = false;
        }
        if r > 0.0 {
            max_ratio = max_ratio.max(lhs / r);
        }
    }
    BoundCheck { holds, not_free: false, samples, max_ratio, sampled_lhs, constant }
}

/// Checks `|det V_{N1⊗N2}(z)| ≤ ((n1n2)!/H) · max|det V1|^{n2} · max|det V2|^{n1}`
/// at sampled configurations, the maxima running over subsets of `z`. The
/// supremum bound follows by taking suprema of both sides.
pub fn tensor_bound_check(
    b1: &ModuleBasis,
    b2: &ModuleBasis,
    region: &Region,
    samples: usize,
    seed: u64,
) -> BoundCheck {
    let (n1, n2) = (b1.rank(), b2.rank());
    let combined = tensor_basis(b1, b2);
    let fact: f64 = (1..=n1 * n2).map(|k| k as f64).product();
    let h = h_constant(n1 as u32, n2 as u32);
    let constant = fact / h.to_string().parse::<f64>().expect("finite");
    check_pointwise(&combined, region, samples, seed, constant, |z| {
        max_minor(b1, z).powi(n2 as i32) * max_minor(b2, z).powi(n1 as i32)
    })
}

/// Checks the Laplace bound `|det V_{N1⊕N2}| ≤ C(n1+n2, n1)·max|det V1|·max|det V2|`.
pub fn direct_sum_check(b1: &ModuleBasis, b2: &ModuleBasis, region: &Region, samples: usize, seed: u64) -> BoundCheck {
    let (n1, n2) = (b1.rank(), b2.rank());
    let combined = direct_sum_basis(b1, b2);
    let binom = combinations(n1 + n2, n1).len() as f64;
    check_pointwise(&combined, region, samples, seed, binom, |z| max_minor(b1, z) * max_minor(b2, z))
}
