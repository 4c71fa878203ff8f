//! Dense linear algebra over integers, rationals, BigFloat and f64.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{BigFloat, BigRational};

/// Fraction-free (Bareiss) determinant with row pivoting.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Scales every row to integers, returning the integer rows and the product
/// of the row scale factors.
pub fn clear_row_denominators(m: &[Vec<BigRational>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let rows = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
            scale *= &l;
            row.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    (rows, scale)
}

/// Exact determinant of a rational matrix.
pub fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    let (rows, scale) = clear_row_denominators(m);
    BigRational::new(bareiss_det(rows), scale)
}

/// Exact rank of a rational matrix.
pub fn rational_rank(m: &[Vec<BigRational>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in rank + 1..rows {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &pivot;
            for k in c..cols {
                let v = &a[rank][k] * &f;
                a[r][k] -= v;
            }
        }
        rank += 1;
    }
    rank
}

/// Rational matrix product.
pub fn rational_matmul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).fold(BigRational::zero(), |acc, k| acc + &row[k] * &b[k][j])).collect())
        .collect()
}

/// Determinant by partial-pivot elimination in BigFloat.
pub fn bigfloat_det(mut m: Vec<Vec<BigFloat>>, precision: u32) -> BigFloat {
    let n = m.len();
    let mut det = BigFloat::from_i64(1, precision);
    for k in 0..n {
        let p = (k..n).max_by(|&a, &b| m[a][k].abs().cmp_value(&m[b][k].abs())).expect("nonempty range");
        if m[p][k].is_zero() {
            return BigFloat::zero(precision);
        }
        if p != k {
            m.swap(p, k);
            det = det.neg();
        }
        det = det.mul(&m[k][k]);
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].div(&pivot);
            for j in k + 1..n {
                let v = f.mul(&m[k][j]);
                m[i][j] = m[i][j].sub(&v);
            }
        }
    }
    det
}

/// `LDLᵀ` pivots of a symmetric matrix, in order (no pivoting).
pub fn bigfloat_ldl_pivots(mut m: Vec<Vec<BigFloat>>) -> Vec<BigFloat> {
    let n = m.len();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = m[k][k].clone();
        pivots.push(pivot.clone());
        if pivot.signum() <= 0 {
            break;
        }
        for i in k + 1..n {
            let f = m[i][k].div(&pivot);
            for j in k + 1..=i {
                let v = f.mul(&m[k][j]);
                m[i][j] = m[i][j].sub(&v);
                if i != j {
                    m[j][i] = m[i][j].clone();
                }
            }
        }
    }
    pivots
}

/// LU factorisation with partial pivoting of a row-major `n×n` matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &[f64], n: usize) -> Lu {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                singular = true;
                continue;
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / pivot;
                lu[r * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= f * lu[k * n + c];
                    }
                }
            }
        }
        Lu { n, lu, perm, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `ln|det|`; `-inf` when singular.
    pub fn log_abs_det(&self) -> f64 {
        if self.singular {
            return f64::NEG_INFINITY;
        }
        (0..self.n).map(|k| self.lu[k * self.n + k].abs().ln()).sum()
    }

    pub fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        self.sign * (0..self.n).map(|k| self.lu[k * self.n + k]).product::<f64>()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// Row-major inverse.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

/// Magnitude helper for integer matrices.
pub fn max_abs(m: &[Vec<BigInt>]) -> BigInt {
    m.iter().flatten().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
}
