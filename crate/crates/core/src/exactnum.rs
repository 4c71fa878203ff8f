//! Exact rationals, linear forms `a + b·ζ(2)`, polynomials in ζ(2), and a
//! binary floating type for high-precision evaluation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use num_rational::BigRational;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Default trial-division bound used when factoring denominators.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rint(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `"p/q"` (or `"p"` for integers).
pub fn rational_to_string(r: &BigRational) -> String {
    r.to_string()
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

// ---------------------------------------------------------------------------
// LinearForm

/// Exact value `const_part + xi_part·ζ(2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LinearForm {
    pub const_part: BigRational,
    pub xi_part: BigRational,
}

impl LinearForm {
    pub fn new(const_part: BigRational, xi_part: BigRational) -> Self {
        LinearForm { const_part, xi_part }
    }

    pub fn from_ints(c: i64, x: i64) -> Self {
        LinearForm::new(rint(c), rint(x))
    }

    pub fn zero() -> Self {
        LinearForm::default()
    }

    pub fn one() -> Self {
        LinearForm::from_ints(1, 0)
    }

    /// The form `ζ(2)` itself.
    pub fn xi() -> Self {
        LinearForm::from_ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.const_part.is_zero() && self.xi_part.is_zero()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        LinearForm::new(&self.const_part * c, &self.xi_part * c)
    }

    /// The product, which lives in degree two.
    pub fn mul_form(&self, other: &LinearForm) -> XiPolynomial {
        self.to_poly().mul(&other.to_poly())
    }

    pub fn to_poly(&self) -> XiPolynomial {
        XiPolynomial::new(vec![self.const_part.clone(), self.xi_part.clone()])
    }

    /// Value at `ξ = t`.
    pub fn at(&self, t: &BigRational) -> BigRational {
        &self.const_part + &self.xi_part * t
    }

    /// LCM of the denominators of both coefficients.
    pub fn denominator_lcm(&self) -> BigInt {
        lcm_big(self.const_part.denom(), self.xi_part.denom())
    }

    /// True when both coefficients are integers.
    pub fn is_integral(&self) -> bool {
        self.const_part.is_integer() && self.xi_part.is_integer()
    }

    pub fn eval(&self, precision: u32) -> BigFloat {
        eval_xi(&self.to_poly(), precision)
    }

    /// Double-precision value; adequate when there is no severe cancellation.
    pub fn to_f64(&self) -> f64 {
        self.eval(30).to_f64()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·zeta2", self.const_part, self.xi_part)
    }
}

impl Serialize for LinearForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LinearForm", 2)?;
        st.serialize_field("const_part", &rational_to_string(&self.const_part))?;
        st.serialize_field("xi_part", &rational_to_string(&self.xi_part))?;
        st.end()
    }
}

impl Add for &LinearForm {
    type Output = LinearForm;
    fn add(self, o: &LinearForm) -> LinearForm {
        LinearForm::new(&self.const_part + &o.const_part, &self.xi_part + &o.xi_part)
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(self, o: LinearForm) -> LinearForm {
        &self + &o
    }
}

impl Sub for &LinearForm {
    type Output = LinearForm;
    fn sub(self, o: &LinearForm) -> LinearForm {
        LinearForm::new(&self.const_part - &o.const_part, &self.xi_part - &o.xi_part)
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, o: LinearForm) -> LinearForm {
        &self - &o
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm::new(-self.const_part, -self.xi_part)
    }
}

impl Mul<&BigRational> for &LinearForm {
    type Output = LinearForm;
    fn mul(self, c: &BigRational) -> LinearForm {
        self.scale(c)
    }
}

// ---------------------------------------------------------------------------
// XiPolynomial

/// Polynomial in ξ = ζ(2); `coeffs[k]` multiplies ξ^k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct XiPolynomial {
    coeffs: Vec<BigRational>,
}

impl XiPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        XiPolynomial { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        XiPolynomial::new(coeffs.iter().map(|&c| rint(c)).collect())
    }

    pub fn zero() -> Self {
        XiPolynomial::default()
    }

    pub fn constant(c: BigRational) -> Self {
        XiPolynomial::new(vec![c])
    }

    /// The identity polynomial `ξ`.
    pub fn x() -> Self {
        XiPolynomial::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &XiPolynomial) -> XiPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        XiPolynomial::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &XiPolynomial) -> XiPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        XiPolynomial::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &XiPolynomial) -> XiPolynomial {
        if self.is_zero() || o.is_zero() {
            return XiPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        XiPolynomial::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> XiPolynomial {
        XiPolynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, k: u32) -> XiPolynomial {
        let mut out = XiPolynomial::constant(BigRational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval_rational(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_bigfloat(&self, t: &BigFloat) -> BigFloat {
        let p = t.precision;
        let mut acc = BigFloat::zero(p);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(t).add(&BigFloat::from_rational(c, p));
        }
        acc
    }

    /// LCM of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| lcm_big(&acc, c.denom()))
    }
}

impl fmt::Display for XiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let coef = if mag.is_one() && k > 0 { String::new() } else { format!("({mag})") };
            match k {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{coef}x")?,
                _ => write!(f, "{coef}x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for XiPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(rational_to_string).collect();
        v.serialize(s)
    }
}

// ---------------------------------------------------------------------------
// BigFloat

/// `mantissa · 2^exponent`, rounded to the bit length implied by `precision`
/// decimal digits plus guard bits.
#[derive(Clone, Debug)]
pub struct BigFloat {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

fn working_bits(precision: u32) -> u64 {
    (precision as f64 * LOG2_10).ceil() as u64 + 24
}

impl BigFloat {
    pub fn zero(precision: u32) -> Self {
        BigFloat { mantissa: BigInt::zero(), exponent: 0, precision }
    }

    fn build(mantissa: BigInt, exponent: i64, precision: u32) -> Self {
        let bits = working_bits(precision);
        let (sign, mag) = mantissa.into_parts();
        if mag.is_zero() {
            return BigFloat::zero(precision);
        }
        let len = mag.bits();
        let (mag, exponent) = if len > bits {
            let shift = len - bits;
            let half = BigUint::one() << (shift - 1);
            ((mag + half) >> shift, exponent + shift as i64)
        } else {
            (mag, exponent)
        };
        BigFloat { mantissa: BigInt::from_biguint(sign, mag), exponent, precision }
    }

    pub fn from_bigint(n: &BigInt, precision: u32) -> Self {
        BigFloat::build(n.clone(), 0, precision)
    }

    pub fn from_i64(n: i64, precision: u32) -> Self {
        BigFloat::build(BigInt::from(n), 0, precision)
    }

    pub fn from_rational(r: &BigRational, precision: u32) -> Self {
        if r.is_zero() {
            return BigFloat::zero(precision);
        }
        let bits = working_bits(precision) as i64 + 2;
        let (n, d) = (r.numer(), r.denom());
        let shift = (bits + d.bits() as i64 - n.bits() as i64).max(0);
        let q = (n << shift as usize) / d;
        BigFloat::build(q, -shift, precision)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64, precision: u32) -> Self {
        if x == 0.0 || !x.is_finite() {
            return BigFloat::zero(precision);
        }
        let bits = x.abs().to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        let m = if x < 0.0 { -BigInt::from(m) } else { BigInt::from(m) };
        BigFloat::build(m, e, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Same value rounded to a different precision tag.
    pub fn with_precision(&self, precision: u32) -> Self {
        BigFloat::build(self.mantissa.clone(), self.exponent, precision)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat { mantissa: self.mantissa.abs(), ..self.clone() }
    }

    pub fn neg(&self) -> Self {
        BigFloat { mantissa: -&self.mantissa, ..self.clone() }
    }

    /// Binary position just above the leading bit.
    fn top(&self) -> i64 {
        self.exponent + self.mantissa.bits() as i64
    }

    pub fn add(&self, o: &BigFloat) -> BigFloat {
        let p = self.precision.min(o.precision);
        if self.is_zero() {
            return o.with_precision(p);
        }
        if o.is_zero() {
            return self.with_precision(p);
        }
        let bits = working_bits(p) as i64 + 4;
        if self.top() < o.top() - bits {
            return o.with_precision(p);
        }
        if o.top() < self.top() - bits {
            return self.with_precision(p);
        }
        let e = self.exponent.min(o.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &o.mantissa << (o.exponent - e) as usize;
        BigFloat::build(a + b, e, p)
    }

    pub fn sub(&self, o: &BigFloat) -> BigFloat {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BigFloat) -> BigFloat {
        let p = self.precision.min(o.precision);
        BigFloat::build(&self.mantissa * &o.mantissa, self.exponent + o.exponent, p)
    }

    /// Quotient; panics on division by zero.
    pub fn div(&self, o: &BigFloat) -> BigFloat {
        assert!(!o.is_zero(), "BigFloat division by zero");
        let p = self.precision.min(o.precision);
        if self.is_zero() {
            return BigFloat::zero(p);
        }
        let bits = working_bits(p) as i64 + 2;
        let shift = (bits + o.mantissa.bits() as i64 - self.mantissa.bits() as i64).max(0);
        let q = (&self.mantissa << shift as usize) / &o.mantissa;
        BigFloat::build(q, self.exponent - o.exponent - shift, p)
    }

    pub fn mul_rational(&self, r: &BigRational) -> BigFloat {
        self.mul(&BigFloat::from_rational(r, self.precision))
    }

    pub fn cmp_value(&self, o: &BigFloat) -> Ordering {
        self.sub(o).signum().cmp(&0)
    }

    /// Natural log of the absolute value, as a double; finite for any nonzero
    /// magnitude, however small.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let mag = self.mantissa.magnitude();
        let len = mag.bits();
        let drop = len.saturating_sub(64);
        let top = (mag >> drop).to_f64().unwrap_or(f64::MAX);
        top.ln() + (self.exponent + drop as i64) as f64 * std::f64::consts::LN_2
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    /// Nearest double (0 or ±inf outside the double range).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let s = self.signum() as f64;
        let l = self.ln_abs();
        if l > 709.0 {
            return s * f64::INFINITY;
        }
        if l < -744.0 {
            return 0.0;
        }
        let mag = self.mantissa.magnitude();
        let drop = mag.bits().saturating_sub(64);
        let top = (mag >> drop).to_f64().unwrap_or(0.0);
        let e = self.exponent + drop as i64;
        // Two steps keep the intermediate inside the double range.
        let half = e / 2;
        s * top * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
    }

    /// Exact dyadic value as a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as usize)
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1) as i64;
        let mag = self.to_rational().abs();
        let mut k = self.log10_abs().floor() as i64;
        let mut n;
        loop {
            let p = digits - 1 - k;
            let ten = BigInt::from(10);
            let scaled = if p >= 0 {
                &mag * BigRational::from_integer(num_traits::pow(ten, p as usize))
            } else {
                &mag / BigRational::from_integer(num_traits::pow(ten, (-p) as usize))
            };
            n = scaled.round().to_integer();
            let len = n.to_string().len() as i64;
            if len > digits {
                k += 1;
            } else if len < digits {
                k -= 1;
            } else {
                break;
            }
        }
        let ds = n.to_string();
        let sign = if self.signum() < 0 { "-" } else { "" };
        if (-5..=20).contains(&k) {
            if k >= 0 {
                let (int, frac) = ds.split_at((k + 1).min(digits) as usize);
                let pad = "0".repeat((k + 1 - digits).max(0) as usize);
                if frac.is_empty() {
                    format!("{sign}{int}{pad}")
                } else {
                    format!("{sign}{int}.{frac}")
                }
            } else {
                format!("{sign}0.{}{}", "0".repeat((-k - 1) as usize), ds)
            }
        } else {
            let (lead, rest) = ds.split_at(1);
            if rest.is_empty() {
                format!("{sign}{lead}e{k}")
            } else {
                format!("{sign}{lead}.{rest}e{k}")
            }
        }
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(self.precision))
    }
}

impl Serialize for BigFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BigFloat", 2)?;
        st.serialize_field("value", &self.to_string())?;
        st.serialize_field("precision", &self.precision)?;
        st.end()
    }
}

// ---------------------------------------------------------------------------
// ζ(2)

/// `3·Σ 1/(k²·C(2k,k))` in fixed point with scale `2^bits`. Terms shrink by a
/// factor of at least 4, so the tail after the last nonzero term is below
/// one unit.
fn zeta2_fixed(bits: u64) -> BigInt {
    let mut inv_binom = BigInt::from(3) << bits as usize;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        // inv_binom holds 3·2^bits / C(2k,k) before the update below.
        let num = BigInt::from(k + 1) * BigInt::from(k + 1);
        let den = BigInt::from(2 * k + 1) * BigInt::from(2 * k + 2);
        inv_binom = inv_binom * num / den;
        k += 1;
        let term = &inv_binom / (BigInt::from(k) * BigInt::from(k));
        if term.is_zero() {
            break;
        }
        sum += term;
    }
    sum
}

fn zeta2_at_bits(bits: u64, precision: u32) -> BigFloat {
    BigFloat::build(zeta2_fixed(bits), -(bits as i64), precision)
}

static ZETA2_CACHE: OnceLock<Mutex<Option<BigFloat>>> = OnceLock::new();

/// ζ(2) to `precision` significant digits.
pub fn zeta2(precision: u32) -> BigFloat {
    let precision = precision.max(10);
    let cache = ZETA2_CACHE.get_or_init(|| Mutex::new(None));
    if let Some(z) = cache.lock().expect("zeta2 cache poisoned").as_ref() {
        if z.precision >= precision {
            return z.with_precision(precision);
        }
    }
    let base = working_bits(precision);
    let mut guard = 32u64;
    let z = loop {
        let a = zeta2_at_bits(base + guard, precision);
        let b = zeta2_at_bits(base + 2 * guard, precision);
        if a.to_decimal_string(precision) == b.to_decimal_string(precision) || guard >= 4096 {
            break b;
        }
        guard *= 2;
    };
    let mut slot = cache.lock().expect("zeta2 cache poisoned");
    if slot.as_ref().is_none_or(|c| c.precision < precision) {
        *slot = Some(z.clone());
    }
    z
}

/// Evaluates `p` at ζ(2). The working precision grows until the digits lost
/// to cancellation are covered, so the result carries `precision` good digits.
pub fn eval_xi(p: &XiPolynomial, precision: u32) -> BigFloat {
    let precision = precision.max(10);
    if p.is_zero() {
        return BigFloat::zero(precision);
    }
    let deg = p.degree().unwrap_or(0) as u32;
    let mut work = precision + 10 + deg;
    loop {
        let z = zeta2(work);
        let value = p.eval_bigfloat(&z);
        // Magnitude of the largest term bounds the rounding noise.
        let largest = p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| BigFloat::from_rational(c, 20).ln_abs() + k as f64 * z.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let lost = if value.is_zero() { f64::INFINITY } else { (largest - value.ln_abs()) / std::f64::consts::LN_10 };
        if lost + (precision as f64) + 5.0 < work as f64 || work > 400_000 {
            return value.with_precision(precision);
        }
        work *= 2;
    }
}

// ---------------------------------------------------------------------------
// Integers

fn primes_up_to(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

fn default_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_DIVISION_BOUND))
}

/// Prime factorization with an unfactored cofactor (1 when fully split).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntFactorization {
    pub factors: Vec<(u64, u32)>,
    pub cofactor: BigUint,
}

impl IntFactorization {
    pub fn one() -> Self {
        IntFactorization { factors: Vec::new(), cofactor: BigUint::one() }
    }

    /// Trial division by primes up to `bound`.
    pub fn of(n: &BigUint, bound: u64) -> Self {
        assert!(!n.is_zero(), "cannot factor zero");
        let owned;
        let primes: &[u64] = if bound <= TRIAL_DIVISION_BOUND {
            let all = default_primes();
            &all[..all.partition_point(|&p| p <= bound)]
        } else {
            owned = primes_up_to(bound);
            &owned
        };
        let mut rest = n.clone();
        let mut factors = Vec::new();
        for &p in primes {
            if rest.is_one() {
                break;
            }
            let pb = BigUint::from(p);
            if &pb * &pb > rest {
                // What remains is prime.
                if let Some(q) = rest.to_u64() {
                    if q <= bound {
                        factors.push((q, 1));
                        rest = BigUint::one();
                    }
                }
                break;
            }
            let mut e = 0u32;
            loop {
                let (q, r) = rest.div_rem(&pb);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                factors.push((p, e));
            }
        }
        factors.sort_unstable();
        IntFactorization { factors, cofactor: rest }
    }

    pub fn of_bigint(n: &BigInt) -> Self {
        IntFactorization::of(n.magnitude(), TRIAL_DIVISION_BOUND)
    }

    pub fn from_pairs(pairs: &[(u64, u32)]) -> Self {
        let mut factors: Vec<(u64, u32)> = pairs.iter().copied().filter(|&(_, e)| e > 0).collect();
        factors.sort_unstable();
        IntFactorization { factors, cofactor: BigUint::one() }
    }

    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, &(p, e)| acc * num_traits::pow(BigUint::from(p), e as usize))
    }

    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    pub fn ln(&self) -> f64 {
        let cof = BigFloat::from_bigint(&BigInt::from(self.cofactor.clone()), 20).ln_abs();
        self.factors.iter().map(|&(p, e)| e as f64 * (p as f64).ln()).sum::<f64>() + cof
    }
}

impl fmt::Display for IntFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.factors.iter().map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") }).collect();
        if !self.cofactor.is_one() {
            parts.push(format!("[{}]", self.cofactor));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

impl Serialize for IntFactorization {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntFactorization", 3)?;
        st.serialize_field("factored", &self.to_string())?;
        st.serialize_field("value", &self.value().to_string())?;
        st.serialize_field("complete", &self.is_complete())?;
        st.end()
    }
}

/// LCM of the coefficient denominators of `p`, factored.
pub fn denominator_lcm(p: &XiPolynomial) -> IntFactorization {
    IntFactorization::of_bigint(&p.denominator())
}

/// `lcm(1, …, n)`; 1 for `n = 0`.
pub fn lcm_consecutive(n: u64) -> BigUint {
    let mut out = BigUint::one();
    if n < 2 {
        return out;
    }
    for p in primes_up_to(n) {
        let mut q = p;
        while q <= n / p {
            q *= p;
        }
        out *= BigUint::from(q);
    }
    out
}
