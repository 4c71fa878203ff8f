//! Integral rescaling of Gram matrices, denominator bounds, and extraction
//! of small integral linear forms in `1, ζ(2)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::{family_element, Family};
use crate::contiguity::{pole_vector, ExponentVector5, PeriodTable};
use crate::exactnum::{rational_to_string, zeta2, BigFloat, BigRational, IntFactorization, LinearForm};
use crate::gram::{build_gram, det_numeric_direct, report, GramError, GramMatrix, ReportConfig};
use crate::linalg::Lu;

#[derive(Debug, thiserror::Error)]
pub enum LatticeError {
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error("every candidate combination vanishes")]
    AllZero,
    #[error("matrix is singular")]
    Singular,
}

/// `Ã = D_left · Q · D_right` with integral coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct IntegerizedGram {
    #[serde(serialize_with = "rational_list")]
    pub d_left: Vec<BigRational>,
    #[serde(serialize_with = "rational_list")]
    pub d_right: Vec<BigRational>,
    #[serde(skip)]
    pub gram: GramMatrix,
    pub a_tilde: Vec<Vec<LinearForm>>,
    /// `|det D_left · det D_right|`.
    #[serde(serialize_with = "rational")]
    pub delta: BigRational,
    pub delta_numerator: IntFactorization,
    pub delta_denominator: IntFactorization,
}

fn rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

fn rational_list<S: serde::Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational_to_string))
}

impl IntegerizedGram {
    pub fn rank(&self) -> usize {
        self.a_tilde.len()
    }

    /// `Ã` as a Gram matrix, for the numeric determinant routines.
    pub fn as_gram(&self) -> GramMatrix {
        GramMatrix { basis: self.gram.basis.clone(), entries: self.a_tilde.clone() }
    }

    pub fn is_integral(&self) -> bool {
        self.a_tilde.iter().flatten().all(LinearForm::is_integral)
    }
}

/// Row LCMs of the denominators on the left, then the reciprocal gcd of
/// each column's integer coefficients on the right.
pub fn integerize(g: &GramMatrix) -> IntegerizedGram {
    let n = g.rank();
    let lefts = g.row_lcms();
    let scaled: Vec<Vec<LinearForm>> = g
        .entries
        .iter()
        .zip(&lefts)
        .map(|(row, l)| row.iter().map(|f| f.scale(&BigRational::from_integer(l.clone()))).collect())
        .collect();
    let gcds: Vec<BigInt> = (0..n)
        .map(|j| {
            let g = scaled.iter().fold(BigInt::zero(), |acc, row| {
                acc.gcd(&row[j].const_part.to_integer()).gcd(&row[j].xi_part.to_integer())
            });
            if g.is_zero() {
                BigInt::one()
            } else {
                g
            }
        })
        .collect();
    let a_tilde = scaled
        .iter()
        .map(|row| row.iter().zip(&gcds).map(|(f, c)| f.scale(&BigRational::new(BigInt::one(), c.clone()))).collect())
        .collect();
    let d_left: Vec<BigRational> = lefts.into_iter().map(BigRational::from_integer).collect();
    let d_right: Vec<BigRational> = gcds.into_iter().map(|c| BigRational::new(BigInt::one(), c)).collect();
    let delta: BigRational = d_left.iter().chain(&d_right).fold(BigRational::one(), |acc, d| acc * d).abs();
    IntegerizedGram {
        delta_numerator: IntFactorization::of_bigint(delta.numer()),
        delta_denominator: IntFactorization::of_bigint(delta.denom()),
        d_left,
        d_right,
        gram: g.clone(),
        a_tilde,
        delta,
    }
}

/// `d_{m1}·d_{m2}` for the two largest pole-vector entries (negatives count as 0).
pub fn pole_denominator_bound(s: &ExponentVector5) -> BigUint {
    let mut p = pole_vector(s).0.map(|x| x.max(0) as u64);
    p.sort_unstable_by(|a, b| b.cmp(a));
    crate::exactnum::lcm_consecutive(p[0]) * crate::exactnum::lcm_consecutive(p[1])
}

#[derive(Clone, Debug, Serialize)]
pub struct DenominatorCheck {
    pub entries_checked: usize,
    /// First entry `(i, j)` not made integral by its bound.
    pub violation: Option<(usize, usize, LinearForm)>,
}

impl DenominatorCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that each Gram entry times the LCM of the pole bounds of its
/// integrands is integral.
pub fn verify_denominator(table: &PeriodTable, family: Family, n: u32) -> Result<DenominatorCheck, GramError> {
    let g = build_gram(table, family, n)?;
    let elements: Vec<Vec<(BigInt, ExponentVector5)>> =
        g.basis.monomials.iter().map(|m| family_element(family, m)).collect();
    let mut checked = 0;
    for i in 0..g.rank() {
        for j in i..g.rank() {
            let bound = elements[i]
                .iter()
                .flat_map(|(_, a)| elements[j].iter().map(move |(_, b)| pole_denominator_bound(&a.add(b))))
                .fold(BigUint::one(), |acc, d| acc.lcm(&d));
            let entry = &g.entries[i][j];
            checked += 1;
            if !entry.scale(&BigRational::from_integer(bound.into())).is_integral() {
                return Ok(DenominatorCheck { entries_checked: checked, violation: Some((i, j, entry.clone())) });
            }
        }
    }
    Ok(DenominatorCheck { entries_checked: checked, violation: None })
}

/// Ways of bounding the row denominators of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorScheme {
    /// Rows of a rectangular basis in `r` variables, entries with
    /// denominators dividing `d_m^w`.
    Rectangular { r: u32, w: u32 },
    /// The two-parameter family in the basis `g1^a g2^b`.
    GBasis,
    /// Five cyclic copies of the homogeneous basis.
    FiveParam,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenominatorAsymptotics {
    pub scheme: DenominatorScheme,
    /// `lim log δ^{1/e_n}`, exactly.
    pub limit_log: String,
    pub limit_log_value: f64,
    /// `(n, Σ log-denominator / e_n)` with `log d_m` replaced by `m`.
    pub finite: Vec<(u32, f64)>,
}

fn limit_of(scheme: DenominatorScheme) -> Ratio<i64> {
    match scheme {
        DenominatorScheme::Rectangular { r, w } => {
            let (r, w) = (r as i64, w as i64);
            Ratio::new(2 * w * (2 * r + 1), r * (r + 1))
        }
        DenominatorScheme::GBasis => Ratio::new(19, 12) + Ratio::new(29, 18),
        DenominatorScheme::FiveParam => Ratio::new(5, 1) * (Ratio::new(5, 6) + Ratio::new(3, 4)) / Ratio::new(5, 3),
    }
}

/// Finite-`n` value of the row-denominator sum divided by `e_n`, with
/// `log d_m ≈ m`.
pub fn denominator_sum_ratio(scheme: DenominatorScheme, n: u32) -> f64 {
    let nf = n as f64;
    match scheme {
        DenominatorScheme::Rectangular { r, w } => {
            // #{i ∈ [0,n)^r : max i = m} = (m+1)^r − m^r
            let sum: f64 = (0..n)
                .map(|m| {
                    let m = m as f64;
                    (nf + m) * ((m + 1.0).powi(r as i32) - m.powi(r as i32))
                })
                .sum();
            let e = r as f64 * nf.powi(r as i32) * (nf - 1.0) / 2.0;
            w as f64 * sum / e
        }
        DenominatorScheme::GBasis => {
            let mut sum = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let (a, b) = (a as f64, b as f64);
                    sum += (a + nf).max(b - a + nf) + (b + nf).max(a - b / 2.0 + nf);
                }
            }
            sum / (nf * nf * (nf - 1.0))
        }
        DenominatorScheme::FiveParam => {
            let mut sum = 0.0;
            for a in 0..=n {
                for b in 0..=n - a {
                    let (a, b) = (a as f64, b as f64);
                    sum += (a + b + nf) + (a.max(b) + nf);
                }
            }
            let e = 5.0 * nf * (nf + 1.0) * (2.0 * nf + 1.0) / 6.0;
            5.0 * sum / e
        }
    }
}

pub fn denominator_asymptotics(scheme: DenominatorScheme, ns: &[u32]) -> DenominatorAsymptotics {
    if let DenominatorScheme::Rectangular { r, .. } = scheme {
        assert!(r >= 1, "r must be positive");
    }
    let lim = limit_of(scheme);
    DenominatorAsymptotics {
        scheme,
        limit_log: if lim.is_integer() { lim.numer().to_string() } else { format!("{}/{}", lim.numer(), lim.denom()) },
        limit_log_value: *lim.numer() as f64 / *lim.denom() as f64,
        finite: ns.iter().map(|&n| (n, denominator_sum_ratio(scheme, n))).collect(),
    }
}

/// A nonzero integral combination of the rows of `Ã` that is small at ζ(2).
#[derive(Clone, Debug, Serialize)]
pub struct SmallForm {
    pub c: Vec<i64>,
    pub row: usize,
    /// `Σ_j Ã[row][j]·c_j`.
    pub value: LinearForm,
    pub numeric: BigFloat,
    /// `|det Ã|^{1/N}`.
    pub bound: BigFloat,
    /// `|numeric| / bound`.
    pub slack: f64,
    /// `max_i |(Ãc)_i| / bound`.
    pub max_slack: f64,
    pub method: &'static str,
}

const EXHAUSTIVE_MAX_RANK: usize = 6;
const EXHAUSTIVE_RANGE: i64 = 8;

fn combine(a: &[Vec<LinearForm>], c: &[i64]) -> Vec<LinearForm> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(c)
                .filter(|(_, &k)| k != 0)
                .fold(LinearForm::zero(), |acc, (f, &k)| acc + f.scale(&BigRational::from_integer(k.into())))
        })
        .collect()
}

/// Lexicographic successor within `[-r, r]^n`; false after the last vector.
fn next_vector(c: &mut [i64], r: i64) -> bool {
    for x in c.iter_mut().rev() {
        if *x < r {
            *x += 1;
            return true;
        }
        *x = -r;
    }
    false
}

fn exhaustive(a: &[Vec<f64>]) -> Option<Vec<i64>> {
    let n = a.len();
    let r = EXHAUSTIVE_RANGE;
    // The leading nonzero coordinate of c is taken positive.
    let lead: Vec<(usize, i64)> = (0..n).flat_map(|k| (1..=r).map(move |v| (k, v))).collect();
    lead.par_iter()
        .filter_map(|&(k, v)| {
            let mut c = vec![0i64; n];
            c[k] = v;
            let tail = n - k - 1;
            let mut rest = vec![-r; tail];
            let mut best: Option<(f64, Vec<i64>)> = None;
            loop {
                c[k + 1..].copy_from_slice(&rest);
                let m = a
                    .iter()
                    .map(|row| row.iter().zip(&c).map(|(x, &y)| x * y as f64).sum::<f64>().abs())
                    .fold(0.0, f64::max);
                if best.as_ref().is_none_or(|b| m < b.0) {
                    best = Some((m, c.clone()));
                }
                if tail == 0 || !next_vector(&mut rest, r) {
                    break;
                }
            }
            best
        })
        .min_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1)))
        .map(|(_, c)| c)
}

fn round_div(a: &BigInt, d: &BigInt) -> BigInt {
    // Nearest integer to a/d for d > 0.
    let two = BigInt::from(2);
    (a * &two + d).div_floor(&(d * &two))
}

/// Integral LLL (δ = 3/4) on the rows of `b`, applying the same moves to `h`.
pub fn lll_reduce(b: &mut [Vec<BigInt>], h: &mut [Vec<i64>]) -> Result<(), LatticeError> {
    let n = b.len();
    if n <= 1 {
        return Ok(());
    }
    let dotp = |x: &[BigInt], y: &[BigInt]| x.iter().zip(y).fold(BigInt::zero(), |acc, (p, q)| acc + p * q);
    // d[0] = 1, d[i] for vector i − 1; lambda[k][j] for j < k.
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lambda = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::one();
    d[1] = dotp(&b[0], &b[0]);
    if d[1].is_zero() {
        return Err(LatticeError::Singular);
    }
    let mut k = 1usize;
    let mut kmax = 0usize;
    let red =
        |b: &mut [Vec<BigInt>], h: &mut [Vec<i64>], lambda: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize| {
            if (&lambda[k][l] * BigInt::from(2)).abs() > d[l + 1] {
                let q = round_div(&lambda[k][l], &d[l + 1]);
                let (bl, hl) = (b[l].clone(), h[l].clone());
                let qi = q.to_i64().expect("multiplier fits in i64");
                for (x, y) in b[k].iter_mut().zip(&bl) {
                    *x -= &q * y;
                }
                for (x, y) in h[k].iter_mut().zip(&hl) {
                    *x -= qi * y;
                }
                lambda[k][l] -= &q * &d[l + 1];
                for i in 0..l {
                    let t = &q * &lambda[l][i];
                    lambda[k][i] -= t;
                }
            }
        };
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dotp(&b[k], &b[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lambda[k][i] * &lambda[j][i]) / &d[i];
                }
                if j < k {
                    lambda[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(LatticeError::Singular);
                    }
                    d[k + 1] = u;
                }
            }
        }
        loop {
            red(b, h, &mut lambda, &d, k, k - 1);
            let lhs = BigInt::from(4) * &d[k + 1] * &d[k - 1];
            let rhs = BigInt::from(3) * &d[k] * &d[k] - BigInt::from(4) * &lambda[k][k - 1] * &lambda[k][k - 1];
            if lhs < rhs {
                b.swap(k, k - 1);
                h.swap(k, k - 1);
                for j in 0..k - 1 {
                    let t = lambda[k][j].clone();
                    lambda[k][j] = lambda[k - 1][j].clone();
                    lambda[k - 1][j] = t;
                }
                let lam = lambda[k][k - 1].clone();
                let big_b = (&d[k - 1] * &d[k + 1] + &lam * &lam) / &d[k];
                for i in k + 1..=kmax {
                    let t = lambda[i][k].clone();
                    lambda[i][k] = (&d[k + 1] * &lambda[i][k - 1] - &lam * &t) / &d[k];
                    lambda[i][k - 1] = (&big_b * &t + &lam * &lambda[i][k]) / &d[k + 1];
                }
                d[k] = big_b;
                if k > 1 {
                    k -= 1;
                }
            } else {
                for l in (0..k - 1).rev() {
                    red(b, h, &mut lambda, &d, k, l);
                }
                k += 1;
                break;
            }
        }
    }
    Ok(())
}

fn eval_matrix(a: &[Vec<LinearForm>], precision: u32) -> Vec<Vec<BigFloat>> {
    let z = zeta2(precision);
    a.iter()
        .map(|row| {
            row.iter()
                .map(|f| BigFloat::from_rational(&f.const_part, precision).add(&z.mul_rational(&f.xi_part)))
                .collect()
        })
        .collect()
}

fn reduced_candidates(a: &[Vec<LinearForm>], precision: u32, log10_bound: f64) -> Result<Vec<Vec<i64>>, LatticeError> {
    let n = a.len();
    // Enough digits to resolve the expected minimum with room to spare.
    let digits = (precision / 2).max((-log10_bound).ceil().max(0.0) as u32 + 12);
    let work = digits + 20;
    let num = eval_matrix(a, work);
    let scale =
        BigFloat::from_rational(&BigRational::from_integer(num_traits::pow(BigInt::from(10), digits as usize)), work);
    // Rows of `basis` are the columns of Ã (lattice vectors Ã e_j).
    let mut basis: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let v = num[i][j].mul(&scale).to_rational();
                    let (q, r) = v.numer().div_rem(v.denom());
                    if (r.abs() * BigInt::from(2)) >= *v.denom() {
                        q + v.numer().signum()
                    } else {
                        q
                    }
                })
                .collect()
        })
        .collect();
    let mut h: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|i| i64::from(i == j)).collect()).collect();
    lll_reduce(&mut basis, &mut h)?;
    Ok(h)
}

/// Minkowski-style search: exhaustive over `|c_j| ≤ 8` for `N ≤ 6`, lattice
/// reduction of the columns of `Ã(ζ(2))` otherwise.
pub fn extract_small_form(ig: &IntegerizedGram, precision: u32) -> Result<SmallForm, LatticeError> {
    let a = &ig.a_tilde;
    let n = a.len();
    let precision = precision.max(30);
    let det = det_numeric_direct(&ig.as_gram(), precision)?;
    if det.is_zero() {
        return Err(LatticeError::Singular);
    }
    let log10_bound = det.log10_abs() / n as f64;
    let bound = BigFloat::from_f64(10f64.powf(log10_bound), precision);
    let (candidates, method): (Vec<Vec<i64>>, &'static str) = if n <= EXHAUSTIVE_MAX_RANK {
        let af: Vec<Vec<f64>> = a.iter().map(|row| row.iter().map(LinearForm::to_f64).collect()).collect();
        (exhaustive(&af).into_iter().collect(), "exhaustive")
    } else {
        (reduced_candidates(a, precision, log10_bound)?, "lll")
    };
    let work = precision + (-log10_bound).max(0.0) as u32 + 10;
    let mut best: Option<(BigFloat, Vec<i64>, Vec<LinearForm>)> = None;
    for c in candidates {
        let values = combine(a, &c);
        if values.iter().all(LinearForm::is_zero) {
            continue;
        }
        let max = values.iter().map(|v| v.eval(work).abs()).fold(BigFloat::zero(work), |m, x| {
            if x.cmp_value(&m) == std::cmp::Ordering::Greater {
                x
            } else {
                m
            }
        });
        if best.as_ref().is_none_or(|b| max.cmp_value(&b.0) == std::cmp::Ordering::Less) {
            best = Some((max, c, values));
        }
    }
    let (max, c, values) = best.ok_or(LatticeError::AllZero)?;
    let row = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i, v.eval(work).abs()))
        .min_by(|x, y| x.1.cmp_value(&y.1))
        .map(|(i, _)| i)
        .ok_or(LatticeError::AllZero)?;
    let value = values[row].clone();
    let numeric = value.eval(work).with_precision(precision);
    let ratio = |x: &BigFloat| 10f64.powf(x.log10_abs() - log10_bound);
    Ok(SmallForm { slack: ratio(&numeric), max_slack: ratio(&max), c, row, value, numeric, bound, method })
}

/// One term of the sequence `d_n·|det Q_n|`.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionPoint {
    pub n: u32,
    pub d_n: IntFactorization,
    pub d_n_exact: bool,
    pub det: BigFloat,
    pub value: f64,
    pub log10_value: f64,
}

pub fn det_criterion_series(
    table: &PeriodTable,
    family: Family,
    n_max: u32,
    cfg: &ReportConfig,
) -> Result<Vec<CriterionPoint>, GramError> {
    (family.min_level().max(1)..=n_max)
        .map(|n| {
            let r = report(table, family, n, cfg)?;
            let log10_value = r.det_numeric.log10_abs() + r.d_n.ln() / std::f64::consts::LN_10;
            Ok(CriterionPoint {
                n,
                d_n_exact: r.d_n_exact,
                value: 10f64.powf(log10_value),
                log10_value,
                d_n: r.d_n,
                det: r.det_numeric,
            })
        })
        .collect()
}

/// `|det Ã|` in floating point, for quick checks.
pub fn det_f64(a: &[Vec<LinearForm>]) -> f64 {
    let n = a.len();
    let flat: Vec<f64> = a.iter().flatten().map(LinearForm::to_f64).collect();
    Lu::new(&flat, n).det().abs()
}
