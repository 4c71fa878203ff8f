use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use periodgram::bases::{family_basis, homogeneous_basis, rectangular_basis, Family};
use periodgram::cli::amalgam_trials;
use periodgram::contiguity::{commutation_holds, mellin_integral_along, ExponentVector5, PeriodTable};
use periodgram::diameter::{eta_critical, fekete_maximize, FeketeConfig, Region};
use periodgram::exactnum::{eval_xi, lcm_consecutive, BigRational, LinearForm, XiPolynomial};
use periodgram::gram::{build_gram, det_exact, det_numeric_direct};
use periodgram::lattice::integerize;
use periodgram::vandermonde::{direct_sum_check, vdm_det_abs, PointConfig};

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn linear_form() -> impl Strategy<Value = LinearForm> {
    (small_rational(), small_rational()).prop_map(|(c, x)| LinearForm::new(c, x))
}

fn poly(max_degree: usize) -> impl Strategy<Value = XiPolynomial> {
    prop::collection::vec(small_rational(), 0..=max_degree + 1).prop_map(XiPolynomial::new)
}

fn exponents(max: u32) -> impl Strategy<Value = ExponentVector5> {
    prop::array::uniform5(0..=max).prop_map(ExponentVector5)
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn linear_form_module_laws(f in linear_form(), g in linear_form(), c in small_rational()) {
        prop_assert_eq!(&(&f + &g) - &g, f.clone());
        prop_assert_eq!((&f + &g).scale(&c), &f.scale(&c) + &g.scale(&c));
        prop_assert_eq!(f.mul_form(&g), g.mul_form(&f));
    }

    #[test]
    fn polynomial_ring_laws(p in poly(4), q in poly(4), r in poly(4)) {
        prop_assert_eq!(p.mul(&q), q.mul(&p));
        prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
        prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
    }

    #[test]
    fn zeta_evaluation_is_multiplicative(p in poly(4), q in poly(4)) {
        let prec = 40;
        let lhs = eval_xi(&p.mul(&q), prec);
        let rhs = eval_xi(&p, prec).mul(&eval_xi(&q, prec));
        if rhs.is_zero() || lhs.is_zero() {
            prop_assert!(lhs.is_zero() && rhs.is_zero() || p.is_zero() || q.is_zero());
        } else {
            let diff = lhs.sub(&rhs).abs().div(&rhs.abs());
            prop_assert!(diff.log10_abs() <= 2.0 - prec as f64, "relative error 1e{}", diff.log10_abs());
        }
    }

    #[test]
    fn commutation_relations(s in exponents(6), i in 1usize..=5, j in 1usize..=5) {
        if let Some(holds) = commutation_holds(i, j, &s) {
            prop_assert!(holds, "M{} and M{} do not commute at {}", i, j, s);
        }
    }

    #[test]
    fn path_independence(counts in prop::array::uniform5(0u32..=3), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..5).flat_map(|i| std::iter::repeat_n(i + 1, counts[i] as usize)).collect();
        let forward = mellin_integral_along(&order);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let shuffled = mellin_integral_along(&order);
        if let (Ok((s1, a)), Ok((s2, b))) = (forward, shuffled) {
            prop_assert_eq!(s1, s2);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn dihedral_invariance(s in exponents(5)) {
        let t = PeriodTable::new();
        let base = t.mellin_integral(&s).unwrap();
        for g in s.dihedral_images() {
            prop_assert_eq!(t.mellin_integral(&g).unwrap(), base.clone());
        }
    }

    #[test]
    fn state_coherence(s in exponents(5)) {
        let t = PeriodTable::new();
        if let Ok((first, second)) = t.state(&s) {
            prop_assert_eq!(first, t.mellin_integral(&s).unwrap());
            prop_assert_eq!(second, t.mellin_integral(&s.shifted(5)).unwrap());
        }
    }

    #[test]
    fn vandermonde_permutation_invariance(seed in any::<u64>(), n in 2u32..=4) {
        use rand::seq::SliceRandom;
        let basis = homogeneous_basis(n, 2);
        let region: Region = "unit_triangle".parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..basis.rank()).map(|_| region.sample(&mut rng)).collect();
        let d = vdm_det_abs(&basis, &PointConfig { dim: 2, points: points.clone() }).unwrap();
        let mut shuffled = points;
        shuffled.shuffle(&mut rng);
        let d2 = vdm_det_abs(&basis, &PointConfig { dim: 2, points: shuffled.clone() }).unwrap();
        prop_assert!(rel_close(d, d2, 1e-9));
        let mut perm: Vec<usize> = (0..basis.rank()).collect();
        perm.shuffle(&mut rng);
        let d3 = vdm_det_abs(&basis.permuted(&perm), &PointConfig { dim: 2, points: shuffled }).unwrap();
        prop_assert!(rel_close(d, d3, 1e-9));
    }

    #[test]
    fn region_samples_are_members(seed in any::<u64>(), which in 0usize..6) {
        let spec = ["unit_square", "unit_triangle", "ball:1.5", "tau_eps:0.2", "image", "phi:unit_square"][which];
        let region: Region = spec.parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let z = region.sample(&mut rng);
            prop_assert!(region.contains(&z), "{} sampled {:?}", spec, z);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn amalgam_formula_matches_determinant(seed in any::<u64>(), shape in 0usize..4) {
        let (m, n) = [(1, 2), (2, 2), (3, 2), (2, 3)][shape];
        for (direct, formula) in amalgam_trials(m, n, 3, seed).unwrap() {
            prop_assert_eq!(direct, formula);
        }
    }

    #[test]
    fn direct_sum_bound(seed in any::<u64>(), a in 1u32..=3, b in 1u32..=3) {
        let r1 = rectangular_basis(&[a, 2]);
        let mut r2 = rectangular_basis(&[b, 1]);
        for m in &mut r2.monomials {
            m.exponents[1] += 2;
        }
        let c = direct_sum_check(&r1, &r2, &Region::unit_square(), 200, seed);
        prop_assert!(c.holds || c.not_free, "ratio {}", c.max_ratio);
    }

    #[test]
    fn basis_order_does_not_change_determinant(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let t = PeriodTable::new();
        let g = build_gram(&t, Family::TwoParam, 3).unwrap();
        let mut perm: Vec<usize> = (0..g.rank()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(det_exact(&g.permuted(&perm), 40).unwrap(), det_exact(&g, 40).unwrap());
    }
}

#[test]
fn lcm_of_consecutive_integers() {
    for n in 1..=60u64 {
        let l = lcm_consecutive(n);
        for k in 1..=n {
            assert!((&l % k).is_zero(), "lcm(1..{n}) not divisible by {k}");
        }
        // Every prime power dividing the lcm is at most n.
        for p in (2..=n).filter(|p| (2..*p).all(|d| p % d != 0)) {
            let mut q = p;
            while q <= n {
                q *= p;
            }
            assert!(!(&l % q).is_zero(), "{q} divides lcm(1..{n})");
        }
    }
}

#[test]
fn gram_matrices_are_symmetric() {
    let t = PeriodTable::new();
    for family in Family::ALL {
        for n in family.min_level().max(1)..=4 {
            if family == Family::FiveParam && n > 3 {
                continue;
            }
            assert!(build_gram(&t, family, n).unwrap().is_symmetric(), "{family} n={n}");
        }
    }
}

#[test]
fn exact_and_numeric_determinants_agree() {
    let t = PeriodTable::new();
    let prec = 60;
    for (family, n) in [(Family::TwoParam, 3), (Family::TwoParamG, 3), (Family::TwoCopies, 2), (Family::FiveParam, 2)] {
        let g = build_gram(&t, family, n).unwrap();
        let exact = eval_xi(&det_exact(&g, 40).unwrap(), prec);
        let numeric = det_numeric_direct(&g, prec).unwrap();
        let rel = exact.sub(&numeric).abs().div(&numeric.abs());
        assert!(rel.is_zero() || rel.log10_abs() <= -(prec as f64) / 2.0, "{family} n={n}: 1e{}", rel.log10_abs());
    }
}

#[test]
fn integerization_is_integral_and_scales_determinant() {
    let t = PeriodTable::new();
    for (family, n) in [(Family::TwoParam, 2), (Family::TwoParam, 3), (Family::TwoCopies, 2), (Family::FiveParam, 1)] {
        let g = build_gram(&t, family, n).unwrap();
        let ig = integerize(&g);
        assert!(ig.is_integral(), "{family} n={n}");
        let det = det_exact(&g, 40).unwrap();
        let scaled = det.scale(&ig.delta);
        assert_eq!(det_exact(&ig.as_gram(), 40).unwrap(), scaled.clone().scale(&sign_of(&ig.d_left, &ig.d_right)));
        assert!(scaled.coeffs().iter().all(|c| c.is_integer()));
        assert!(ig.delta.numer().is_multiple_of(&det.denominator()), "{family} n={n}");
    }
}

fn sign_of(left: &[BigRational], right: &[BigRational]) -> BigRational {
    let p: BigRational = left.iter().chain(right).fold(BigRational::one(), |a, b| a * b);
    if p < BigRational::zero() {
        -BigRational::one()
    } else {
        BigRational::one()
    }
}

#[test]
fn two_param_image_lies_under_hyperbola() {
    let eta = eta_critical(10).eta;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100_000 {
        let z = Region::TwoParamImage.sample(&mut rng);
        assert!(z[0] * z[1] <= eta + 1e-12, "{z:?}");
    }
}

#[test]
fn fekete_ascends_and_stays_inside() {
    let cfg = FeketeConfig { restarts: 2, max_sweeps: 20, ..FeketeConfig::default() };
    for (basis, region) in [
        (homogeneous_basis(4, 2), "unit_triangle".parse::<Region>().unwrap()),
        (family_basis(Family::TwoParam, 3), Region::TwoParamImage),
    ] {
        let r = fekete_maximize(&basis, &region, &cfg).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]), "{:?}", r.history);
        assert!(r.points.points.iter().all(|p| region.contains(p)));
    }
}

#[test]
fn interval_witnesses_exceed_the_limit() {
    let cfg = FeketeConfig { restarts: 1, ..FeketeConfig::default() };
    let (a, b) = (-1.0, 2.0);
    let region = Region::Interval { a, b };
    let proxies: Vec<f64> =
        (8..=14).map(|r| fekete_maximize(&rectangular_basis(&[r]), &region, &cfg).unwrap().proxy).collect();
    assert!(proxies.windows(2).all(|w| w[1] < w[0]), "{proxies:?}");
    assert!(proxies.iter().all(|&p| p >= (b - a) / 4.0 - 1e-9));
}

#[test]
fn denominator_bounds_hold_in_exact_range() {
    let t = PeriodTable::new();
    for (family, n_max) in [(Family::TwoParam, 6), (Family::TwoCopies, 4), (Family::FiveParam, 3)] {
        for n in family.min_level().max(1)..=n_max {
            let c = periodgram::lattice::verify_denominator(&t, family, n).unwrap();
            assert!(c.holds(), "{family} n={n}: {:?}", c.violation);
        }
    }
}

#[test]
fn homogeneous_exponent_sums() {
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for r in 1..=4u64 {
        for n in 1..=6u64 {
            let b = homogeneous_basis(n as u32, r as u32);
            assert_eq!(b.e_n, r * binom(n + r - 1, r + 1), "n={n} r={r}");
        }
    }
}

#[test]
fn gram_determinant_below_squared_witness() {
    let t = PeriodTable::new();
    let cfg = FeketeConfig { restarts: 2, ..FeketeConfig::default() };
    for n in 2..=4 {
        let g = build_gram(&t, Family::TwoParam, n).unwrap();
        let rank = g.rank() as f64;
        let log_det = det_numeric_direct(&g, 40).unwrap().ln_abs();
        let w = periodgram::diameter::fekete_maximize_family(Family::TwoParam, n, &cfg).unwrap();
        let lhs = (log_det / rank).exp();
        let rhs = (2.0 * w.log_abs_det / rank).exp() * 1.05;
        assert!(lhs < rhs, "n={n}: {lhs} vs {rhs}");
    }
}
