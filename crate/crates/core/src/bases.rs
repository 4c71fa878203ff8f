//! Monomial bases of the filtered modules: rectangular and homogeneous
//! polynomial bases, and the families of functions on the unit square used
//! for the Gram matrices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::contiguity::ExponentVector5;

/// A monomial in the ambient variables, with an integer coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coefficient: i64,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial { exponents, coefficient: 1 }
    }

    pub fn degree(&self) -> u64 {
        self.exponents.iter().map(|&e| u64::from(e)).sum()
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.exponents.iter().zip(z).fold(self.coefficient as f64, |acc, (&e, &x)| acc * x.powi(e as i32))
    }
}

/// Families of functions on the unit square, written in ambient variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Powers of `f = u1u2u3u4u5`.
    OneParam,
    /// `f1^i f2^j` with `f1 = u2u4`, `f2 = u1u3u5`.
    TwoParam,
    /// `g1^a g2^b` with `g1 = 1 − f1 = u3`, `g2 = 1 + f2 = u1 + u5`.
    TwoParamG,
    /// The two-parameter basis together with its multiples by `u1`.
    TwoCopies,
    /// `1` and `u_i^a u_{i+1}^b` with `a ≥ 1`, `a + b ≤ n`.
    FiveParam,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::OneParam, Family::TwoParam, Family::TwoParamG, Family::TwoCopies, Family::FiveParam];

    pub fn name(&self) -> &'static str {
        match self {
            Family::OneParam => "one_param",
            Family::TwoParam => "two_param",
            Family::TwoParamG => "two_param_g",
            Family::TwoCopies => "two_copies",
            Family::FiveParam => "five_param",
        }
    }

    /// Names of the ambient variables.
    pub fn variables(&self) -> Vec<&'static str> {
        match self {
            Family::OneParam => vec!["f"],
            Family::TwoParam => vec!["f1", "f2"],
            Family::TwoParamG => vec!["g1", "g2"],
            Family::TwoCopies => vec!["f1", "f2", "u1"],
            Family::FiveParam => vec!["u1", "u2", "u3", "u4", "u5"],
        }
    }

    /// Smallest meaningful level.
    pub fn min_level(&self) -> u32 {
        match self {
            Family::FiveParam => 0,
            _ => 1,
        }
    }

    /// Ambient variable values at the point `(x, y)` of the unit square.
    pub fn ambient_values(&self, x: f64, y: f64) -> Vec<f64> {
        let u = u_coordinates(x, y);
        match self {
            Family::OneParam => vec![u.iter().product()],
            Family::TwoParam => vec![u[1] * u[3], u[0] * u[2] * u[4]],
            Family::TwoParamG => vec![u[2], u[0] + u[4]],
            Family::TwoCopies => vec![u[1] * u[3], u[0] * u[2] * u[4], u[0]],
            Family::FiveParam => u.to_vec(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim().replace('-', "_");
        Family::ALL.iter().copied().find(|f| f.name() == key).ok_or_else(|| {
            format!("unknown family {s:?} (expected one of one_param, two_param, two_param_g, two_copies, five_param)")
        })
    }
}

/// Dihedral coordinates `(u1, …, u5)` at `(x, y)`.
pub fn u_coordinates(x: f64, y: f64) -> [f64; 5] {
    let d = 1.0 - x * y;
    [x, (1.0 - x) / d, (1.0 - y) / d, y, d]
}

/// How a basis was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Rectangular { sizes: Vec<u32> },
    Homogeneous { r: u32 },
    Family(Family),
}

/// Ordered basis of one filtered piece, with its exponent `e_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleBasis {
    pub kind: BasisKind,
    pub n: u32,
    pub variables: Vec<String>,
    pub monomials: Vec<Monomial>,
    pub e_n: u64,
}

impl ModuleBasis {
    pub fn rank(&self) -> usize {
        self.monomials.len()
    }

    /// Ambient dimension `r`.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Sum of the total degrees of the monomials.
    pub fn degree(&self) -> u64 {
        self.monomials.iter().map(Monomial::degree).sum()
    }

    pub fn family(&self) -> Option<Family> {
        match self.kind {
            BasisKind::Family(f) => Some(f),
            _ => None,
        }
    }

    /// Values of every basis monomial at the ambient point `z`.
    pub fn eval_row(&self, z: &[f64], out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(&self.monomials) {
            *o = m.eval(z);
        }
    }

    /// Reordered copy, `perm[k]` giving the old index of the new k-th element.
    pub fn permuted(&self, perm: &[usize]) -> ModuleBasis {
        ModuleBasis { monomials: perm.iter().map(|&k| self.monomials[k].clone()).collect(), ..self.clone() }
    }

    fn plain(kind: BasisKind, n: u32, vars: usize, monomials: Vec<Monomial>) -> ModuleBasis {
        let variables =
            (1..=vars).map(|k| if vars <= 3 { ["x", "y", "z"][k - 1].to_string() } else { format!("x{k}") }).collect();
        let e_n = monomials.iter().map(Monomial::degree).sum();
        ModuleBasis { kind, n, variables, monomials, e_n }
    }
}

/// Exponents `(i_1, …, i_r)` with `i_k < sizes[k]`, the first variable
/// varying fastest (so that the Vandermonde matrix is the amalgam of the
/// one-variable ones).
fn box_exponents(sizes: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &n in sizes.iter().rev() {
        out = out
            .into_iter()
            .flat_map(|tail| {
                (0..n).map(move |e| {
                    let mut v = vec![e];
                    v.extend_from_slice(&tail);
                    v
                })
            })
            .collect();
    }
    // Built with the last variable outermost; reorder so the first is fastest.
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

/// All monomials with exponent in `x_k` below `sizes[k]`.
pub fn rectangular_basis(sizes: &[u32]) -> ModuleBasis {
    assert!(!sizes.is_empty() && sizes.iter().all(|&n| n >= 1), "rectangular sizes must be positive");
    let monomials = box_exponents(sizes).into_iter().map(Monomial::new).collect();
    ModuleBasis::plain(BasisKind::Rectangular { sizes: sizes.to_vec() }, sizes[0], sizes.len(), monomials)
}

/// Exponent vectors of total degree `d` in `r` variables, lexicographically
/// descending (`x^2, xy, y^2`).
fn compositions(d: u32, r: usize) -> Vec<Vec<u32>> {
    if r == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in compositions(d - first, r - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All monomials of total degree below `n`, graded then lexicographic.
pub fn homogeneous_basis(n: u32, r: u32) -> ModuleBasis {
    assert!(n >= 1 && r >= 1, "homogeneous basis needs n, r ≥ 1");
    let monomials = (0..n).flat_map(|d| compositions(d, r as usize)).map(Monomial::new).collect();
    ModuleBasis::plain(BasisKind::Homogeneous { r }, n, r as usize, monomials)
}

/// `(a, b)` pairs with `a ≥ 1`, `a + b = d`, in basis order (`b` descending).
fn m05_pairs(d: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..d).rev().map(move |b| (d - b, b))
}

fn m05_monomials(n: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::new(vec![0; 5])];
    for d in 1..=n {
        for (a, b) in m05_pairs(d) {
            for i in 0..5 {
                let mut e = vec![0; 5];
                e[i] += a;
                e[(i + 1) % 5] += b;
                out.push(Monomial::new(e));
            }
        }
    }
    out
}

/// Basis `1, u_i^a u_{i+1}^b` (`a ≥ 1`, `a + b ≤ n`) of the five-parameter family.
pub fn m05_basis(n: u32) -> ModuleBasis {
    family_basis(Family::FiveParam, n)
}

/// `M_n ⊕ u1·M_n` for the two-parameter `M_n`.
pub fn two_copies_basis(n: u32) -> ModuleBasis {
    family_basis(Family::TwoCopies, n)
}

/// The level-`n` basis of a family, in ambient variables.
pub fn family_basis(family: Family, n: u32) -> ModuleBasis {
    assert!(n >= family.min_level(), "level {n} below the minimum for {family}");
    let n64 = u64::from(n);
    let (monomials, e_n): (Vec<Monomial>, u64) = match family {
        Family::OneParam => ((0..n).map(|k| Monomial::new(vec![k])).collect(), n64 * n64.saturating_sub(1) / 2),
        Family::TwoParam | Family::TwoParamG => {
            (box_exponents(&[n, n]).into_iter().map(Monomial::new).collect(), n64 * n64 * (n64 - 1))
        }
        Family::TwoCopies => {
            let mut m = Vec::new();
            for c in 0..2 {
                for mut e in box_exponents(&[n, n]) {
                    e.push(c);
                    m.push(Monomial::new(e));
                }
            }
            (m, 2 * n64 * n64 * (n64 - 1))
        }
        Family::FiveParam => (m05_monomials(n), 5 * n64 * (n64 + 1) * (2 * n64 + 1) / 6),
    };
    ModuleBasis {
        kind: BasisKind::Family(family),
        n,
        variables: family.variables().into_iter().map(String::from).collect(),
        monomials,
        e_n,
    }
}

/// The ambient monomial rewritten in `u1 … u5`. Families whose variables are
/// sums (the g-basis) have no single exponent vector; see [`family_element`].
pub fn to_exponent_vector(family: Family, m: &Monomial) -> Option<ExponentVector5> {
    let e = &m.exponents;
    let s = match family {
        Family::OneParam => [e[0]; 5],
        Family::TwoParam => [e[1], e[0], e[1], e[0], e[1]],
        Family::TwoCopies => [e[1] + e[2], e[0], e[1], e[0], e[1]],
        Family::FiveParam => [e[0], e[1], e[2], e[3], e[4]],
        Family::TwoParamG => return None,
    };
    Some(ExponentVector5(s))
}

/// Expansion of `g1^a g2^b = u3^a (u1 + u5)^b`.
pub fn binomial_expand_g_basis(a: u32, b: u32) -> Vec<(BigInt, ExponentVector5)> {
    let mut out = Vec::with_capacity(b as usize + 1);
    let mut c = BigInt::one();
    for k in (0..=b).rev() {
        out.push((c.clone(), ExponentVector5([k, 0, a, 0, b - k])));
        // C(b, k−1) = C(b, k)·k/(b−k+1)
        c = c * BigInt::from(k) / BigInt::from(b - k + 1);
    }
    out
}

/// A basis element as a combination of integrands `Σ c·u^s`.
pub fn family_element(family: Family, m: &Monomial) -> Vec<(BigInt, ExponentVector5)> {
    let coef = BigInt::from(m.coefficient);
    match to_exponent_vector(family, m) {
        Some(s) => vec![(coef, s)],
        None => {
            binomial_expand_g_basis(m.exponents[0], m.exponents[1]).into_iter().map(|(c, s)| (c * &coef, s)).collect()
        }
    }
}

/// Coefficients of `(1 + 3t + t²)/(1 − t)²` through `t^max_n`.
pub fn poincare_series(max_n: usize) -> Vec<u64> {
    let num = [1u64, 3, 1];
    // 1/(1−t)² = Σ (k+1) t^k
    (0..=max_n).map(|d| (0..=d.min(2)).map(|k| num[k] * (d - k + 1) as u64).sum()).collect()
}

/// Compares the graded rank increments of the five-parameter bases with the
/// Poincaré series.
pub fn poincare_check(max_n: u32) -> bool {
    let series = poincare_series(max_n as usize);
    let mut prev = 0usize;
    (0..=max_n).all(|n| {
        let rank = m05_basis(n).rank();
        let ok = (rank - prev) as u64 == series[n as usize];
        prev = rank;
        ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn exps(b: &ModuleBasis) -> Vec<Vec<u32>> {
        b.monomials.iter().map(|m| m.exponents.clone()).collect()
    }

    #[test]
    fn rectangular_examples() {
        let b = rectangular_basis(&[3, 2]);
        assert_eq!((b.rank(), b.e_n), (6, 9));
        assert_eq!(exps(&b), vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![0, 1], vec![1, 1], vec![2, 1]]);
        let one = rectangular_basis(&[1]);
        assert_eq!((one.rank(), one.e_n), (1, 0));
        for n in 1..6u64 {
            let b = rectangular_basis(&[n as u32, n as u32]);
            assert_eq!((b.rank() as u64, b.e_n), (n * n, n * n * (n - 1)));
        }
    }

    #[test]
    fn homogeneous_examples() {
        let b = homogeneous_basis(3, 2);
        assert_eq!((b.rank(), b.e_n), (6, 8));
        assert_eq!(exps(&b), vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(homogeneous_basis(1, 5).rank(), 1);
        let b = homogeneous_basis(4, 2);
        assert_eq!((b.rank(), b.e_n), (10, 20));
    }

    #[test]
    fn m05_examples() {
        let b = m05_basis(1);
        assert_eq!((b.rank(), b.e_n), (6, 5));
        let b = m05_basis(2);
        assert_eq!(b.rank(), 16);
        // u1u2 … u5u1 precede the squares.
        assert_eq!(b.monomials[6].exponents, vec![1, 1, 0, 0, 0]);
        assert_eq!(b.monomials[10].exponents, vec![1, 0, 0, 0, 1]);
        assert_eq!(b.monomials[11].exponents, vec![2, 0, 0, 0, 0]);
        let b = m05_basis(3);
        assert_eq!((b.rank(), b.e_n), (31, 70));
    }

    #[test]
    fn m05_ranks_and_exponents() {
        let ranks = [6, 16, 31, 51, 76, 106, 141, 181, 226, 276, 331];
        for (k, &r) in ranks.iter().enumerate() {
            let b = m05_basis(k as u32 + 1);
            assert_eq!(b.rank(), r);
            assert_eq!(b.e_n, b.degree());
            let set: HashSet<_> = b.monomials.iter().collect();
            assert_eq!(set.len(), r);
        }
    }

    #[test]
    fn poincare_series_coefficients() {
        assert_eq!(poincare_series(4), vec![1, 5, 10, 15, 20]);
        assert!(poincare_check(12));
    }

    #[test]
    fn two_copies_ranks() {
        assert_eq!((two_copies_basis(1).rank(), two_copies_basis(1).e_n), (2, 0));
        assert_eq!((two_copies_basis(2).rank(), two_copies_basis(2).e_n), (8, 8));
        assert_eq!((two_copies_basis(3).rank(), two_copies_basis(3).e_n), (18, 36));
    }

    #[test]
    fn exponent_vectors() {
        let tp = |i, j| to_exponent_vector(Family::TwoParam, &Monomial::new(vec![i, j])).unwrap();
        assert_eq!(tp(1, 0), ExponentVector5([0, 1, 0, 1, 0]));
        assert_eq!(tp(0, 1), ExponentVector5([1, 0, 1, 0, 1]));
        let u = to_exponent_vector(Family::FiveParam, &Monomial::new(vec![0, 0, 2, 1, 0])).unwrap();
        assert_eq!(u, ExponentVector5([0, 0, 2, 1, 0]));
        let c = to_exponent_vector(Family::TwoCopies, &Monomial::new(vec![1, 2, 1])).unwrap();
        assert_eq!(c, ExponentVector5([3, 1, 2, 1, 2]));
        assert_eq!(to_exponent_vector(Family::OneParam, &Monomial::new(vec![3])).unwrap(), ExponentVector5([3; 5]));
    }

    #[test]
    fn g_basis_expansion() {
        let v = |c: i64, s: [u32; 5]| (BigInt::from(c), ExponentVector5(s));
        assert_eq!(binomial_expand_g_basis(1, 0), vec![v(1, [0, 0, 1, 0, 0])]);
        assert_eq!(
            binomial_expand_g_basis(0, 2),
            vec![v(1, [2, 0, 0, 0, 0]), v(2, [1, 0, 0, 0, 1]), v(1, [0, 0, 0, 0, 2])]
        );
        assert_eq!(binomial_expand_g_basis(1, 1), vec![v(1, [1, 0, 1, 0, 0]), v(1, [0, 0, 1, 0, 1])]);
    }

    #[test]
    fn ambient_values_match_definitions() {
        let (x, y) = (0.3, 0.7);
        let u = u_coordinates(x, y);
        // u1 u4 + u5 = 1 type relations
        assert!((u[0] * u[3] + u[4] - 1.0).abs() < 1e-15);
        let f = Family::TwoParam.ambient_values(x, y);
        assert!((f[0] - y * (1.0 - x) / (1.0 - x * y)).abs() < 1e-15);
        assert!((f[1] - x * (1.0 - y)).abs() < 1e-15);
        let g = Family::TwoParamG.ambient_values(x, y);
        assert!((g[0] - (1.0 - f[0])).abs() < 1e-15 && (g[1] - (1.0 + f[1])).abs() < 1e-15);
    }

    #[test]
    fn family_parse() {
        assert_eq!("two-param".parse::<Family>().unwrap(), Family::TwoParam);
        assert!("three_param".parse::<Family>().is_err());
    }
}
