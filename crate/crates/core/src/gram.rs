//! Gram matrices `Q_ij = ∫ m_i m_j ω` of a family basis, their determinants
//! (exact in ζ(2) and numeric), and the summary metrics of a level.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::{family_basis, family_element, Family, ModuleBasis};
use crate::contiguity::{ContiguityError, ExponentVector5, PeriodTable};
use crate::exactnum::{
    denominator_lcm, eval_xi, zeta2, BigFloat, BigRational, IntFactorization, LinearForm, XiPolynomial,
};
use crate::linalg::{bareiss_det, bigfloat_det, bigfloat_ldl_pivots, Lu};

/// Largest rank handled by [`det_exact`] unless configured otherwise.
pub const DEFAULT_EXACT_LIMIT: usize = 40;
/// Working-precision ceiling (decimal digits) for numeric determinants.
pub const PRECISION_CAP: u32 = 20_000;
/// Floor for the working precision of table numerics.
pub const MIN_WORKING_PRECISION: u32 = 50;

#[derive(Debug, thiserror::Error)]
pub enum GramError {
    #[error(transparent)]
    Contiguity(#[from] ContiguityError),
    #[error("rank {rank} exceeds the exact-determinant limit {limit}")]
    ExactLimitExceeded { rank: usize, limit: usize },
    #[error("precision doubling passed the cap of {cap} digits")]
    PrecisionExhausted { cap: u32 },
    #[error("level {n} is not valid for {family}")]
    BadLevel { family: Family, n: u32 },
}

/// Symmetric matrix of linear forms in ζ(2).
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub basis: ModuleBasis,
    pub entries: Vec<Vec<LinearForm>>,
}

impl GramMatrix {
    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn family(&self) -> Option<Family> {
        self.basis.family()
    }

    pub fn n(&self) -> u32 {
        self.basis.n
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| (0..i).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// Entries evaluated at ζ(2).
    pub fn eval(&self, precision: u32) -> Vec<Vec<BigFloat>> {
        let z = zeta2(precision);
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|f| BigFloat::from_rational(&f.const_part, precision).add(&z.mul_rational(&f.xi_part)))
                    .collect()
            })
            .collect()
    }

    /// Per-row LCM of all coefficient denominators.
    pub fn row_lcms(&self) -> Vec<BigInt> {
        self.entries
            .iter()
            .map(|row| row.iter().fold(BigInt::one(), |acc, f| num_integer::Integer::lcm(&acc, &f.denominator_lcm())))
            .collect()
    }

    /// Same matrix in a permuted basis order.
    pub fn permuted(&self, perm: &[usize]) -> GramMatrix {
        GramMatrix {
            basis: self.basis.permuted(perm),
            entries: perm.iter().map(|&i| perm.iter().map(|&j| self.entries[i][j].clone()).collect()).collect(),
        }
    }
}

/// Gram matrix of integrand combinations `Σ c·u^s`.
pub fn gram_from_elements(
    table: &PeriodTable,
    elements: &[Vec<(BigInt, ExponentVector5)>],
) -> Result<Vec<Vec<LinearForm>>, ContiguityError> {
    let n = elements.len();
    let upper: Vec<Vec<LinearForm>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let mut acc = LinearForm::zero();
                    for (ca, sa) in &elements[i] {
                        for (cb, sb) in &elements[j] {
                            let v = table.mellin_integral(&sa.add(sb))?;
                            acc = acc + v.scale(&BigRational::from_integer(ca * cb));
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>, ContiguityError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok((0..n)
        .map(|i| (0..n).map(|j| if j >= i { upper[i][j - i].clone() } else { upper[j][i - j].clone() }).collect())
        .collect())
}

/// Gram matrix for any family basis.
pub fn build_gram_for_basis(table: &PeriodTable, basis: ModuleBasis) -> Result<GramMatrix, GramError> {
    let family = basis.family().expect("Gram matrices need a family basis");
    let elements: Vec<_> = basis.monomials.iter().map(|m| family_element(family, m)).collect();
    let entries = gram_from_elements(table, &elements)?;
    Ok(GramMatrix { basis, entries })
}

pub fn build_gram(table: &PeriodTable, family: Family, n: u32) -> Result<GramMatrix, GramError> {
    if n < family.min_level().max(1) {
        return Err(GramError::BadLevel { family, n });
    }
    build_gram_for_basis(table, family_basis(family, n))
}

/// Exact determinant as a polynomial in ξ, by evaluation at `ξ = 0, 1, …, N`
/// and interpolation.
pub fn det_exact(g: &GramMatrix, limit: usize) -> Result<XiPolynomial, GramError> {
    let n = g.rank();
    if n > limit {
        return Err(GramError::ExactLimitExceeded { rank: n, limit });
    }
    let lcms = g.row_lcms();
    let scale: BigInt = lcms.iter().product();
    let (a, b): (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) = g
        .entries
        .iter()
        .zip(&lcms)
        .map(|(row, l)| {
            let l = BigRational::from_integer(l.clone());
            row.iter().map(|f| ((&f.const_part * &l).to_integer(), (&f.xi_part * &l).to_integer())).unzip()
        })
        .unzip();
    let values: Vec<BigInt> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let t = BigInt::from(k);
            let m = a.iter().zip(&b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y * &t).collect()).collect();
            bareiss_det(m)
        })
        .collect();
    Ok(interpolate_integer_nodes(&values).scale(&BigRational::new(BigInt::one(), scale)))
}

/// The polynomial of degree ≤ len−1 taking `values[k]` at `t = k`, written
/// as `Σ Δ^m f(0)·C(t, m)`.
pub fn interpolate_integer_nodes(values: &[BigInt]) -> XiPolynomial {
    let mut diffs = values.to_vec();
    let mut forward = Vec::with_capacity(values.len());
    for _ in 0..values.len() {
        forward.push(diffs[0].clone());
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    let mut result = XiPolynomial::zero();
    let mut falling = XiPolynomial::constant(BigRational::one());
    let mut factorial = BigInt::one();
    for (m, d) in forward.iter().enumerate() {
        if m > 0 {
            factorial *= BigInt::from(m);
        }
        if !d.is_zero() {
            result = result.add(&falling.scale(&BigRational::new(d.clone(), factorial.clone())));
        }
        falling = falling
            .mul(&XiPolynomial::new(vec![BigRational::from_integer(BigInt::from(-(m as i64))), BigRational::one()]));
    }
    result
}

fn below_half_precision(d: &BigFloat, digits: u32) -> bool {
    d.is_zero() || d.log10_abs() < -(digits as f64) / 2.0
}

/// Determinant of the evaluated matrix, raising the working precision while
/// the result is small relative to it or unstable under doubling.
pub fn det_numeric_direct(g: &GramMatrix, precision: u32) -> Result<BigFloat, GramError> {
    det_numeric_with_cap(g, precision, PRECISION_CAP)
}

pub fn det_numeric_with_cap(g: &GramMatrix, precision: u32, cap: u32) -> Result<BigFloat, GramError> {
    let precision = precision.max(10);
    let mut work = precision.max(MIN_WORKING_PRECISION);
    let mut previous: Option<BigFloat> = None;
    loop {
        if work > cap {
            return Err(GramError::PrecisionExhausted { cap });
        }
        let d = bigfloat_det(g.eval(work), work);
        if !below_half_precision(&d, work) {
            if let Some(p) = &previous {
                let rel = d.sub(p).log10_abs() - d.log10_abs();
                if rel < -(precision as f64) - 2.0 {
                    return Ok(d.with_precision(precision));
                }
            }
            previous = Some(d);
        }
        work *= 2;
    }
}

/// True iff `scalar·∏ factors = p` exactly.
pub fn verify_factorization(p: &XiPolynomial, factors: &[XiPolynomial], scalar: &BigRational) -> bool {
    let prod = factors.iter().fold(XiPolynomial::constant(scalar.clone()), |acc, f| acc.mul(f));
    &prod == p
}

/// Numeric `LDLᵀ` at ζ(2): every pivot must exceed `10^(−w/2)` at working
/// precision `w`. Small pivots trigger a retry at doubled precision, so a
/// genuinely semidefinite matrix is rejected once the cap is reached.
pub fn positivity_check(g: &GramMatrix, precision: u32) -> bool {
    positivity_check_with_cap(g, precision, 4096)
}

pub fn positivity_check_with_cap(g: &GramMatrix, precision: u32, cap: u32) -> bool {
    let mut work = precision.max(10);
    while work <= cap {
        let pivots = bigfloat_ldl_pivots(g.eval(work));
        let threshold = -(work as f64) / 2.0;
        let small = pivots.iter().any(|p| p.is_zero() || p.log10_abs() < threshold);
        if pivots.len() == g.rank() && !small && pivots.iter().all(|p| p.signum() > 0) {
            return true;
        }
        if !small {
            // A clearly negative pivot.
            return false;
        }
        work *= 2;
    }
    false
}

/// Settings shared by the report pipeline.
#[derive(Clone, Copy, Debug)]
pub struct ReportConfig {
    pub precision: u32,
    pub exact_limit: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { precision: MIN_WORKING_PRECISION, exact_limit: DEFAULT_EXACT_LIMIT }
    }
}

/// Summary of one level of a family.
#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub family: Family,
    pub n: u32,
    pub rank: usize,
    pub e_n: u64,
    pub det_poly: Option<XiPolynomial>,
    pub det_numeric: BigFloat,
    /// Denominator of the exact determinant, or the row-LCM product when the
    /// exact determinant was not computed.
    pub d_n: IntFactorization,
    pub d_n_exact: bool,
    /// Product of the row-LCM denominators of the Gram matrix.
    pub row_lcm_denominator: IntFactorization,
    /// `det^{1/e_n}`.
    pub proxy: Option<f64>,
    pub log_d_per_e: Option<f64>,
    pub product: Option<f64>,
    pub threshold: Option<f64>,
}

/// Builds the Gram matrix of a level and assembles its metrics.
pub fn report(table: &PeriodTable, family: Family, n: u32, cfg: &ReportConfig) -> Result<GramReport, GramError> {
    let g = build_gram(table, family, n)?;
    report_for(&g, cfg)
}

pub fn report_for(g: &GramMatrix, cfg: &ReportConfig) -> Result<GramReport, GramError> {
    let family = g.family().expect("family basis");
    let precision = cfg.precision.max(MIN_WORKING_PRECISION);
    let row_lcm: BigInt = g.row_lcms().iter().product();
    let row_lcm_denominator = IntFactorization::of_bigint(&row_lcm);
    let (det_poly, det_numeric, d_n, d_n_exact) = match det_exact(g, cfg.exact_limit) {
        Ok(p) => {
            let num = eval_xi(&p, precision);
            let d = denominator_lcm(&p);
            (Some(p), num, d, true)
        }
        Err(GramError::ExactLimitExceeded { .. }) => {
            (None, det_numeric_direct(g, precision)?, row_lcm_denominator.clone(), false)
        }
        Err(e) => return Err(e),
    };
    let e_n = g.basis.e_n;
    let ln_det = det_numeric.ln_abs();
    let ln_d = d_n.ln();
    let positive = det_numeric.signum() > 0;
    let proxy = (positive && e_n > 0).then(|| (ln_det / e_n as f64).exp());
    let log_d_per_e = (e_n > 0).then(|| ln_d / e_n as f64);
    let product = proxy.zip(log_d_per_e).map(|(p, l)| p * l.exp());
    let threshold = (positive && ln_d > 0.0).then(|| -ln_det / ln_d);
    Ok(GramReport {
        family,
        n: g.n(),
        rank: g.rank(),
        e_n,
        det_poly,
        det_numeric,
        d_n,
        d_n_exact,
        row_lcm_denominator,
        proxy,
        log_d_per_e,
        product,
        threshold,
    })
}

/// Result of the sampled determinant identity.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloResult {
    pub samples: u64,
    pub estimate: f64,
    pub exact: f64,
    pub std_error: f64,
    pub rel_deviation: f64,
    /// `|estimate − exact| / std_error`.
    pub z_score: f64,
}

/// Draws `(x, y)` from `ω/ζ(2)`, a mixture over `k ≥ 0` of weights
/// `∝ 1/(k+1)²` and densities `(k+1)² (xy)^k`.
pub fn sample_omega<R: Rng>(rng: &mut R) -> (f64, f64) {
    let m = loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let m = (1.0 / u).floor();
        // floor(1/U) has P(m) = 1/(m(m+1)); thin to 1/m².
        if m < 1e15 && rng.gen::<f64>() < (m + 1.0) / (2.0 * m) {
            break m;
        }
    };
    let p = 1.0 / m;
    let x = (1.0 - rng.gen::<f64>()).powf(p);
    let y = (1.0 - rng.gen::<f64>()).powf(p);
    (x, y)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Monte Carlo estimate of `(1/N!) ∫ (det V)² ω^{⊠N}` against the exact
/// determinant of the Gram matrix.
pub fn montecarlo_det_identity(
    table: &PeriodTable,
    family: Family,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloResult, GramError> {
    let g = build_gram(table, family, n)?;
    let exact = det_numeric_direct(&g, 30)?.to_f64();
    let basis = &g.basis;
    let rank = basis.rank();
    const CHUNK: u64 = 1 << 16;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut v = vec![0.0; rank * rank];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for row in v.chunks_mut(rank) {
                    let (x, y) = sample_omega(&mut rng);
                    basis.eval_row(&family.ambient_values(x, y), row);
                }
                let d = Lu::new(&v, rank).det();
                let x = d * d;
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let count = samples as f64;
    let mean = s1 / count;
    let var = (s2 / count - mean * mean).max(0.0);
    let z = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let scale = (rank as f64 * z.ln() - ln_factorial(rank)).exp();
    let estimate = scale * mean;
    let std_error = scale * (var / count).sqrt();
    Ok(MonteCarloResult {
        samples,
        estimate,
        exact,
        std_error,
        rel_deviation: (estimate - exact).abs() / exact.abs(),
        z_score: (estimate - exact).abs() / std_error,
    })
}
