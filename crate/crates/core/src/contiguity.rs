//! Mellin integrals `I(s) = ∫∫ u1^s1 … u5^s5 dxdy/(1−xy)` over the unit
//! square, computed exactly as linear forms in ζ(2) by composing 2×2
//! contiguity matrices from the base pair `(ζ(2), 1)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactnum::{rat, rint, BigRational, LinearForm};

/// Exponents `(s1, …, s5)` of the dihedral coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ExponentVector5(pub [u32; 5]);

impl ExponentVector5 {
    pub const ZERO: ExponentVector5 = ExponentVector5([0; 5]);

    pub fn new(s: [u32; 5]) -> Self {
        ExponentVector5(s)
    }

    /// Unit vector `e_i` for `i` in `1..=5`.
    pub fn unit(i: usize) -> Self {
        let mut s = [0; 5];
        s[i - 1] = 1;
        ExponentVector5(s)
    }

    pub fn add(&self, o: &ExponentVector5) -> Self {
        ExponentVector5(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }

    /// `τ_i s = s + e_i`.
    pub fn shifted(&self, i: usize) -> Self {
        let mut s = self.0;
        s[i - 1] += 1;
        ExponentVector5(s)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Cyclic rotation `s ↦ (s_{1+k}, …, s_{5+k})`.
    pub fn rotate(&self, k: usize) -> Self {
        ExponentVector5(std::array::from_fn(|i| self.0[(i + k) % 5]))
    }

    /// Reflection `s_i ↦ s_{k−i}` (indices mod 5).
    pub fn reflect(&self, k: usize) -> Self {
        ExponentVector5(std::array::from_fn(|i| self.0[(k + 5 - i) % 5]))
    }

    /// All ten images under the dihedral group of the pentagon.
    pub fn dihedral_images(&self) -> [ExponentVector5; 10] {
        std::array::from_fn(|g| if g < 5 { self.rotate(g) } else { self.reflect(g - 5) })
    }
}

impl fmt::Display for ExponentVector5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        write!(f, "({},{},{},{},{})", s[0], s[1], s[2], s[3], s[4])
    }
}

impl std::str::FromStr for ExponentVector5 {
    type Err = String;
    fn from_str(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.trim().trim_matches(|c| c == '(' || c == ')').split(',').collect();
        if parts.len() != 5 {
            return Err(format!("expected five comma-separated exponents, got {text:?}"));
        }
        let mut s = [0u32; 5];
        for (slot, p) in s.iter_mut().zip(parts) {
            *slot = p.trim().parse().map_err(|_| format!("exponent {p:?} is not a non-negative integer"))?;
        }
        Ok(ExponentVector5(s))
    }
}

/// Lexicographically smallest member of the dihedral orbit.
pub fn dihedral_orbit(s: &ExponentVector5) -> ExponentVector5 {
    *s.dihedral_images().iter().min().expect("orbit is nonempty")
}

/// `(p1, …, p5)` governing the pole orders, and hence denominators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PoleVector(pub [i64; 5]);

pub fn pole_vector(s: &ExponentVector5) -> PoleVector {
    let v = s.0.map(i64::from);
    PoleVector(std::array::from_fn(|i| v[(i + 1) % 5] + v[(i + 2) % 5] - v[(i + 4) % 5]))
}

/// `a_i = p_{i+1} + 1`, cyclically.
pub fn a_params(s: &ExponentVector5) -> [i64; 5] {
    let p = pole_vector(s).0;
    std::array::from_fn(|i| p[(i + 1) % 5] + 1)
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ContiguityError {
    #[error("M{index} has a pole at {s}: {factor} = 0")]
    Pole { index: usize, s: ExponentVector5, factor: String },
    #[error("no pole-free increment path reaches {s}; blocked states: {}", fmt_states(.blocked))]
    PathNotFound { s: ExponentVector5, blocked: Vec<ExponentVector5> },
    #[error("quadrature did not reach tolerance {tol:e} for {s} (last change {last_change:e})")]
    NonConvergence { s: ExponentVector5, tol: f64, last_change: f64 },
    #[error("index {0} outside 1..=5")]
    BadIndex(usize),
}

fn fmt_states(v: &[ExponentVector5]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub type Mat2 = [[BigRational; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j]))
}

pub fn mat2_det(a: &Mat2) -> BigRational {
    &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0]
}

/// Exact matrix `M_i(s)` sending `(I(s), I(τ5 s))` to `(I(τ_i s), I(τ_i τ5 s))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContiguityMatrix {
    pub index: usize,
    pub s: ExponentVector5,
    pub entries: Mat2,
}

impl ContiguityMatrix {
    pub fn apply(&self, v: &(LinearForm, LinearForm)) -> (LinearForm, LinearForm) {
        let row = |r: usize| v.0.scale(&self.entries[r][0]) + v.1.scale(&self.entries[r][1]);
        (row(0), row(1))
    }
}

pub fn contiguity_matrix(i: usize, s: &ExponentVector5) -> Result<ContiguityMatrix, ContiguityError> {
    let [a1, a2, a3, a4, a5] = a_params(s);
    // Denominator factors, each labelled for diagnostics.
    let (factors, nums): ([(&str, i64); 2], [[i64; 2]; 2]) = match i {
        1 => (
            [("a4", a4), ("1 + a3", 1 + a3)],
            [[(1 + a3) * (a5 - a1), (1 + a3) * a2], [(a1 + a4 - a5) * (a5 - 1), (1 - a1 + a2) * a4 - a2 * (a5 - 1)]],
        ),
        2 => ([("a4", a4), ("a5", a5)], [[(a1 - a2) * a4 + a3 * (a5 - a1), a2 * a3], [(a1 + a4 - a5) * a5, -a2 * a5]]),
        3 => ([("a1", a1), ("a5", a5)], [[(a4 - a3) * a1 + a2 * (a5 - a4), a2 * a3], [(a1 + a4 - a5) * a5, -a3 * a5]]),
        4 => (
            [("a1", a1), ("1 + a2", 1 + a2)],
            [[(1 + a2) * (a5 - a4), (1 + a2) * a3], [(a1 + a4 - a5) * (a5 - 1), (a3 - a4 + 1) * a1 - a3 * (a5 - 1)]],
        ),
        5 => (
            [("1 + a2", 1 + a2), ("1 + a3", 1 + a3)],
            [
                [0, (1 + a3) * (1 + a2)],
                [(a1 + a4 - a5) * (a5 - 1), (a4 - a5 + 1) * (a2 + 1) + (a1 - a5 + 1) * a3 + (1 - a4) * a1],
            ],
        ),
        _ => return Err(ContiguityError::BadIndex(i)),
    };
    if let Some((name, _)) = factors.iter().find(|(_, v)| *v == 0) {
        return Err(ContiguityError::Pole { index: i, s: *s, factor: (*name).to_string() });
    }
    let den = factors[0].1 * factors[1].1;
    let entries = std::array::from_fn(|r| std::array::from_fn(|c| rat(nums[r][c], den)));
    Ok(ContiguityMatrix { index: i, s: *s, entries })
}

/// Diagonal shift `(n,…,n) → (n+1,…,n+1)` on the state pair.
pub fn apery_diagonal_matrix(n: u32) -> Mat2 {
    let n = i64::from(n);
    let d = (n + 2) * (n + 2);
    [[rint(-3), rint(5)], [rat(5 * n * n + 13 * n + 8, d), rat(-(8 * n * n + 21 * n + 13), d)]]
}

/// Applies `M_j(τ_i s) M_i(s)` and `M_i(τ_j s) M_j(s)`; `None` when any
/// factor has a pole, otherwise whether the products agree.
pub fn commutation_holds(i: usize, j: usize, s: &ExponentVector5) -> Option<bool> {
    let mi = contiguity_matrix(i, s).ok()?;
    let mj = contiguity_matrix(j, s).ok()?;
    let mj_after = contiguity_matrix(j, &s.shifted(i)).ok()?;
    let mi_after = contiguity_matrix(i, &s.shifted(j)).ok()?;
    Some(mat2_mul(&mj_after.entries, &mi.entries) == mat2_mul(&mi_after.entries, &mj.entries))
}

pub type PeriodState = (LinearForm, LinearForm);

fn base_state() -> PeriodState {
    (LinearForm::xi(), LinearForm::one())
}

/// Applies the increments in `order` (indices 1..=5) starting from zero.
pub fn mellin_integral_along(order: &[usize]) -> Result<(ExponentVector5, PeriodState), ContiguityError> {
    let mut s = ExponentVector5::ZERO;
    let mut state = base_state();
    for &i in order {
        state = contiguity_matrix(i, &s)?.apply(&state);
        s = s.shifted(i);
    }
    Ok((s, state))
}

/// Memo of states and integrals. Reads are concurrent; writes take a
/// short exclusive lock, so batch fills can run in parallel.
#[derive(Default)]
pub struct PeriodTable {
    states: RwLock<HashMap<ExponentVector5, PeriodState>>,
    blocked: RwLock<HashSet<ExponentVector5>>,
    values: RwLock<HashMap<ExponentVector5, LinearForm>>,
}

impl PeriodTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The exact value of `I(s)`.
    pub fn mellin_integral(&self, s: &ExponentVector5) -> Result<LinearForm, ContiguityError> {
        let key = dihedral_orbit(s);
        if let Some(v) = self.values.read().expect("memo poisoned").get(&key) {
            return Ok(v.clone());
        }
        let value = self.state(&key)?.0;
        self.values.write().expect("memo poisoned").insert(key, value.clone());
        Ok(value)
    }

    /// The pair `(I(s), I(τ5 s))`.
    pub fn state(&self, s: &ExponentVector5) -> Result<PeriodState, ContiguityError> {
        self.search(s).ok_or_else(|| {
            let mut blocked: Vec<_> = self.blocked.read().expect("memo poisoned").iter().copied().collect();
            blocked.sort();
            blocked.truncate(32);
            ContiguityError::PathNotFound { s: *s, blocked }
        })
    }

    fn search(&self, t: &ExponentVector5) -> Option<PeriodState> {
        if *t == ExponentVector5::ZERO {
            return Some(base_state());
        }
        if let Some(v) = self.states.read().expect("memo poisoned").get(t) {
            return Some(v.clone());
        }
        if self.blocked.read().expect("memo poisoned").contains(t) {
            return None;
        }
        let mut order: Vec<usize> = (1..=5).filter(|&i| t.0[i - 1] > 0).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(t.0[i - 1]));
        for i in order {
            let mut prev = t.0;
            prev[i - 1] -= 1;
            let prev = ExponentVector5(prev);
            let Ok(m) = contiguity_matrix(i, &prev) else { continue };
            if let Some(p) = self.search(&prev) {
                let st = m.apply(&p);
                self.states.write().expect("memo poisoned").insert(*t, st.clone());
                return Some(st);
            }
        }
        self.blocked.write().expect("memo poisoned").insert(*t);
        None
    }

    /// Number of distinct canonical integrals stored.
    pub fn len(&self) -> usize {
        self.values.read().expect("memo poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored integrals keyed by canonical exponent vector, sorted.
    pub fn export(&self) -> Vec<(ExponentVector5, LinearForm)> {
        let mut v: Vec<_> = self.values.read().expect("memo poisoned").iter().map(|(k, f)| (*k, f.clone())).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    /// Seeds the integral memo, e.g. from a cache file.
    pub fn import(&self, entries: impl IntoIterator<Item = (ExponentVector5, LinearForm)>) {
        let mut w = self.values.write().expect("memo poisoned");
        for (s, f) in entries {
            w.insert(dihedral_orbit(&s), f);
        }
    }
}

/// Process-wide table used by the free functions.
pub fn global_table() -> &'static PeriodTable {
    static TABLE: OnceLock<PeriodTable> = OnceLock::new();
    TABLE.get_or_init(PeriodTable::new)
}

pub fn mellin_integral(s: &ExponentVector5) -> Result<LinearForm, ContiguityError> {
    global_table().mellin_integral(s)
}

// ---------------------------------------------------------------------------
// Quadrature oracle

struct AxisNode {
    x: f64,
    cx: f64,
    w: f64,
}

fn tanh_sinh_nodes(h: f64) -> Vec<AxisNode> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::new();
    let mut k: i64 = 0;
    loop {
        let t = k as f64 * h;
        let mut any = false;
        for sign in [1.0, -1.0] {
            if k == 0 && sign < 0.0 {
                continue;
            }
            let t = sign * t;
            let u = half_pi * t.sinh();
            let cu = u.cosh();
            let w = h * half_pi * t.cosh() / (2.0 * cu * cu);
            // x = 1/(1+e^{-2u}), 1−x = 1/(1+e^{2u}).
            let x = 1.0 / (1.0 + (-2.0 * u).exp());
            let cx = 1.0 / (1.0 + (2.0 * u).exp());
            if w > 1e-300 && x > 0.0 && cx > 0.0 {
                out.push(AxisNode { x, cx, w });
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    out
}

fn integrand(s: &[i32; 5], a: &AxisNode, b: &AxisNode) -> f64 {
    let d = a.cx + b.cx - a.cx * b.cx;
    let u = [a.x, a.cx / d, b.cx / d, b.x, d];
    let mut v = 1.0 / d;
    for k in 0..5 {
        if s[k] > 0 {
            v *= u[k].powi(s[k]);
        }
    }
    v
}

/// Tanh-sinh product quadrature of `I(s)` to absolute tolerance `tol`.
pub fn quad_oracle(s: &ExponentVector5, tol: f64) -> Result<f64, ContiguityError> {
    let e = s.0.map(|v| v as i32);
    let mut prev: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    for level in 2..=9 {
        let h = 0.5f64.powi(level);
        let nodes = tanh_sinh_nodes(h);
        let mut total = 0.0;
        for a in &nodes {
            let mut row = 0.0;
            for b in &nodes {
                row += b.w * integrand(&e, a, b);
            }
            total += a.w * row;
        }
        if let Some(p) = prev {
            last_change = (total - p).abs();
            if last_change <= tol {
                return Ok(total);
            }
        }
        prev = Some(total);
    }
    Err(ContiguityError::NonConvergence { s: *s, tol, last_change })
}

/// The starting pair `(I(0), I(e5)) = (ζ(2), 1)`.
pub fn base_pair() -> PeriodState {
    base_state()
}

pub fn mat2_identity() -> Mat2 {
    [[BigRational::one(), BigRational::zero()], [BigRational::zero(), BigRational::one()]]
}
