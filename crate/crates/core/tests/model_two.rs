mod common;

use eqlab_core::model_two::*;
use eqlab_core::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rep(n: usize, m: f64, zeta: f64, hbar: f64) -> ReducibleRep<f64> {
    ReducibleRep::new(n, m, zeta, hbar).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn free_parts_at_displaced_values() {
    let (p, q) = ([0.3, -1.2], [0.7, 0.4]);
    let irreducible = rep(2, 1.5, 0.0, 1.0);
    let hp = displaced_expectation(&LadderPolynomial::h_p(2), &irreducible, &p, &q).unwrap();
    assert!(close(hp, 0.5 * (dot(&p, &p) + 2.25 * dot(&q, &q)), 1e-14));

    let r = rep(2, 1.5, 0.4, 1.0);
    // |⟨B⟩|² and |⟨B⟩|⁴ oracles
    let b2 = (1.5f64 * 0.4).powi(2) * dot(&q, &q);
    let hr = displaced_expectation(&LadderPolynomial::h_r(2), &r, &p, &q).unwrap();
    assert!(close(hr, 0.5 * b2, 1e-14));
    let quartic = displaced_expectation(&LadderPolynomial::h_r_squared_normal(2), &r, &p, &q).unwrap();
    assert!(close(quartic, b2 * b2, 1e-14));
}

#[test]
fn h1_worked_example() {
    let r = rep(2, 1.0, 0.5, 1.0);
    let v = h1_expectation(&r, 1.0, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!((v - 1.1875).abs() < 1e-14, "{v}");
}

#[test]
fn quartic_vanishes_without_correlation() {
    let r = rep(3, 0.8, 0.0, 1.0);
    let (p, q) = ([0.1, 0.2, -0.3], [1.0, -2.0, 0.5]);
    for nu in [0.0, 1.0, 50.0] {
        let v = h1_expectation(&r, nu, &p, &q).unwrap();
        assert!(close(v, 0.5 * (dot(&p, &p) + 0.64 * dot(&q, &q)), 1e-14));
    }
}

#[test]
fn h1_matches_closed_form_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let r = rep(n, rng.gen_range(0.2..2.0), rng.gen_range(0.0..0.95), rng.gen_range(0.3..2.0));
        let nu = rng.gen_range(0.0..2.0);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v = h1_expectation(&r, nu, &p, &q).unwrap();
        let (m, z) = (r.m(), r.zeta());
        let q2 = dot(&q, &q);
        let oracle = 0.5 * (dot(&p, &p) + (1.0 + z * z) * m * m * q2) + nu * z.powi(4) * m.powi(4) * q2 * q2;
        assert!(close(v, oracle, 1e-12), "{v} vs {oracle}");
        assert!(close(h1_closed_form(&r, nu, &p, &q).unwrap(), oracle, 1e-12));
    }
}

#[test]
fn target_matching_round_trip() {
    for (m0_sq, lambda0, zeta) in [(1.0, 0.1, 0.5), (4.0, 2.0, 0.2), (0.3, 7.0, 0.9)] {
        let (r, nu) = match_target(m0_sq, lambda0, zeta, 3, 1.0).unwrap();
        let (m2, l) = couplings(&r, nu);
        assert!(close(m2, m0_sq, 1e-12) && close(l, lambda0, 1e-12));
        let (p, q) = ([0.4, -0.1, 0.2], [0.3, 0.9, -1.1]);
        let q2 = dot(&q, &q);
        let target = 0.5 * (dot(&p, &p) + m0_sq * q2) + lambda0 * q2 * q2;
        assert!(close(h1_expectation(&r, nu, &p, &q).unwrap(), target, 1e-12));
    }
    assert!(matches!(match_target(1.0, 1.0, 0.0, 1, 1.0), Err(Error::Domain(_))));
    assert!(match_target(1.0, -1.0, 0.5, 1, 1.0).is_err());
}

#[test]
fn wick_engine_matches_plane_quadrature() {
    for (m, zeta, hbar) in [(1.0, 0.3, 1.0), (2.0, 0.6, 1.0), (1.0, 0.9, 0.5)] {
        let r = rep(1, m, zeta, hbar);
        for (p, q) in [(0.7, -0.4), (-0.3, 1.1)] {
            let (hp, hr, quartic) = common::n1_expectations(m, zeta, hbar, p, q);
            let e_hp = displaced_expectation(&LadderPolynomial::h_p(1), &r, &[p], &[q]).unwrap();
            let e_hr = displaced_expectation(&LadderPolynomial::h_r(1), &r, &[p], &[q]).unwrap();
            let e_q = displaced_expectation(&LadderPolynomial::h_r_squared_normal(1), &r, &[p], &[q]).unwrap();
            assert!(close(e_hp, hp, 1e-6), "H_p {e_hp} vs {hp} at {m} {zeta} {hbar}");
            assert!(close(e_hr, hr, 1e-6), "H_r {e_hr} vs {hr} at {m} {zeta} {hbar}");
            assert!(close(e_q, quartic, 1e-6), ":H_r²: {e_q} vs {quartic} at {m} {zeta} {hbar}");
        }
    }
}

#[test]
fn matrix_element_follows_printed_brace() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let r = rep(n, rng.gen_range(0.3..2.0), rng.gen_range(0.0..0.9), rng.gen_range(0.5..2.0));
        let nu = rng.gen_range(0.0..2.0);
        let mut v = || (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<f64>>();
        let (p1, q1, p, q) = (v(), v(), v(), v());
        let (m, z) = (r.m(), r.zeta());
        let i = Complex64::i();
        let mut cross = Complex64::new(0.0, 0.0);
        for k in 0..n {
            cross += (m * q1[k] - i * p1[k]) * (m * q[k] + i * p[k]);
        }
        let qq = dot(&q1, &q);
        let brace = 0.5 * (cross + m * m * z * z * qq) + nu * z.powi(4) * m.powi(4) * qq * qq;
        let oracle = brace * overlap_reducible(&r, (&p1, &q1), (&p, &q)).unwrap();
        let got = h1_matrix_element(&r, nu, (&p1, &q1), (&p, &q)).unwrap();
        assert!((got - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()), "{got} vs {oracle}");

        let back = h1_matrix_element(&r, nu, (&p, &q), (&p1, &q1)).unwrap();
        assert!((got - back.conj()).norm() <= 1e-12 * (1.0 + got.norm()));

        let diag = h1_matrix_element(&r, nu, (&p, &q), (&p, &q)).unwrap();
        let e = h1_expectation(&r, nu, &p, &q).unwrap();
        assert!((diag - e).norm() <= 1e-12 * (1.0 + e.abs()));
    }
}

#[test]
fn overlap_basic_properties() {
    let r = rep(2, 1.3, 0.6, 0.7);
    let (p, q) = ([0.2, -0.5], [1.0, 0.3]);
    let o = overlap_reducible(&r, (&p, &q), (&p, &q)).unwrap();
    assert!((o - 1.0).norm() < 1e-15);
    let o = overlap_reducible(&r, (&[0.3, -0.5], &q), (&p, &q)).unwrap();
    assert!(o.norm() < 1.0);
}

#[test]
fn overlap_tends_to_irreducible_form() {
    let (p1, q1, p, q) = ([0.4, -0.2], [0.1, 0.9], [-0.6, 0.5], [0.3, -0.2]);
    let irreducible = |m: f64, h: f64| {
        let (mut phase, mut dp, mut dq) = (0.0, 0.0, 0.0);
        for k in 0..2 {
            phase += (p1[k] + p[k]) * (q1[k] - q[k]);
            dp += (p1[k] - p[k]) * (p1[k] - p[k]);
            dq += (q1[k] - q[k]) * (q1[k] - q[k]);
        }
        Complex64::from_polar((-(dp / (4.0 * m * h) + m * dq / (4.0 * h))).exp(), phase / (2.0 * h))
    };
    let target = irreducible(1.2, 0.8);
    let at_zero = overlap_reducible(&rep(2, 1.2, 0.0, 0.8), (&p1, &q1), (&p, &q)).unwrap();
    assert!((at_zero - target).norm() < 1e-15);
    let mut last = f64::INFINITY;
    for zeta in [0.4, 0.2, 0.1, 0.05, 0.01] {
        let dev = (overlap_reducible(&rep(2, 1.2, zeta, 0.8), (&p1, &q1), (&p, &q)).unwrap() - target).norm();
        assert!(dev < last, "deviation {dev} at zeta {zeta}");
        last = dev;
    }
    assert!(last < 1e-4);
}

#[test]
fn overlap_matches_plane_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for zeta in [0.3, 0.6, 0.9] {
        let oracle = common::OverlapOracle::new(1.0, zeta, 1.0, 1.5);
        let r = rep(1, 1.0, zeta, 1.0);
        for _ in 0..5 {
            let mut v = || rng.gen_range(-1.5..1.5);
            let (p1, q1, p, q) = (v(), v(), v(), v());
            let want = oracle.overlap((p1, q1), (p, q));
            let got = overlap_reducible(&r, (&[p1], &[q1]), (&[p], &[q])).unwrap();
            assert!((got - want).norm() < 1e-8, "{got} vs {want} at zeta {zeta}");
        }
    }
}

/// Random orthogonal matrix by Gram–Schmidt on Gaussian-ish columns.
fn rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for c in &cols {
            let d = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-3 {
            cols.push(v.iter().map(|x| x / norm).collect());
        }
    }
    cols
}

#[test]
fn expectations_are_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 1..=5 {
        let r = rep(n, 0.9, 0.7, 1.1);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rot = rotation(n, &mut rng);
        let apply = |v: &[f64]| rot.iter().map(|row| dot(row, v)).collect::<Vec<f64>>();
        let (rp, rq) = (apply(&p), apply(&q));
        let a = h1_expectation(&r, 0.8, &p, &q).unwrap();
        let b = h1_expectation(&r, 0.8, &rp, &rq).unwrap();
        assert!(close(a, b, 1e-12), "N = {n}: {a} vs {b}");
        let o1 = overlap_reducible(&r, (&p, &q), (&q, &p)).unwrap();
        let o2 = overlap_reducible(&r, (&rp, &rq), (&rq, &rp)).unwrap();
        assert!((o1 - o2).norm() < 1e-12);
    }
}

#[test]
fn invalid_inputs() {
    assert!(matches!(ReducibleRep::new(1, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(ReducibleRep::new(1, 1.0, -0.1, 1.0), Err(Error::Domain(_))));
    assert!(ReducibleRep::new(0, 1.0, 0.5, 1.0).is_err());
    let r = rep(2, 1.0, 0.5, 1.0);
    assert!(matches!(h1_expectation(&r, 1.0, &[1.0], &[1.0, 2.0]), Err(Error::Argument(_))));
    let err = LadderPolynomial::<f64>::from_words(&[(1.0, vec![LadderOp::b(0), LadderOp::b_dag(0)])]).unwrap_err();
    assert!(matches!(err, Error::Structural(_)));
    let wide = LadderPolynomial::h_p(3);
    assert!(displaced_expectation(&wide, &r, &[0.0; 2], &[0.0; 2]).is_err());
}

#[test]
fn gaussian_characteristic_examples() {
    assert_eq!(characteristic_exact_gaussian(0.0, 1.3, 0.7).unwrap(), 1.0);
    let v = characteristic_exact_gaussian((4.0f64 * 1.3 * 0.7).sqrt(), 1.3, 0.7).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    let mut last = 1.0;
    for k in 1..20 {
        let v = characteristic_exact_gaussian(0.25 * k as f64, 1.0, 1.0).unwrap();
        assert!(v < last);
        last = v;
    }
}

#[test]
fn radial_quadrature_at_origin_is_one() {
    for n in [3, 4, 9] {
        let d = RadialDensity::<f64>::gaussian(n, 1.0, 1.0).unwrap();
        let c = characteristic_radial(&d, 0.0, 1.0).unwrap();
        assert!((c.exact.re - 1.0).abs() < 1e-8 && (c.approx - 1.0).abs() < 1e-8);
    }
}

#[test]
fn radial_quadrature_reproduces_gaussian_transform() {
    for n in [3, 4, 8, 16, 32, 64] {
        let d = RadialDensity::<f64>::gaussian(n, 1.0, 1.0).unwrap();
        for p in [0.5f64, 1.0, 2.0] {
            let c = characteristic_radial(&d, p, 1.0).unwrap();
            let want = characteristic_exact_gaussian(p, 1.0, 1.0).unwrap();
            assert!((c.exact.re - want).abs() < 1e-7, "N = {n}, p = {p}: {} vs {want}", c.exact.re);
            // the Gaussian approximation integral in closed form
            let approx = (1.0 + p * p / (2.0 * (n as f64 - 2.0))).powf(-(n as f64) / 2.0);
            assert!((c.approx - approx).abs() < 1e-8, "N = {n}, p = {p}: {} vs {approx}", c.approx);
        }
    }
}

#[test]
fn steepest_descent_error_falls_with_dimension() {
    for p in [0.5f64, 1.0, 2.0] {
        let errs: Vec<f64> = [4, 8, 16, 32, 64]
            .iter()
            .map(|&n| characteristic_radial(&RadialDensity::<f64>::gaussian(n, 1.0, 1.0).unwrap(), p, 1.0).unwrap().difference)
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "p = {p}: {errs:?}");
    }
}

#[test]
fn radial_preconditions() {
    let d = RadialDensity::gaussian(2, 1.0, 1.0).unwrap();
    assert!(matches!(characteristic_radial(&d, 1.0, 1.0), Err(Error::Argument(_))));
    let unnormalised = RadialDensity::from_fn(4, 12.0, |r: f64| (-r * r).exp()).unwrap();
    assert!(matches!(characteristic_radial(&unnormalised, 1.0, 1.0), Err(Error::Precondition(_))));
}

#[test]
fn measure_superposition_examples() {
    for p in [0.0f64, 0.3, 1.0, 2.5] {
        let single = measure_superposition(&[(0.25, 1.0)], p, 1.0).unwrap();
        assert!((single - (-0.25 * p * p).exp()).abs() < 1e-15);
        assert!((single - characteristic_exact_gaussian(p, 1.0, 1.0).unwrap()).abs() < 1e-12);
        let pair = measure_superposition(&[(0.1, 0.5), (0.7, 0.5)], p, 1.0).unwrap();
        assert!((pair - 0.5 * ((-0.1 * p * p).exp() + (-0.7 * p * p).exp())).abs() < 1e-15);
    }
    assert_eq!(measure_superposition(&[(0.1, 0.2), (0.3, 0.3), (2.0, 0.5)], 0.0, 1.0).unwrap(), 1.0);
    assert!(matches!(measure_superposition(&[(0.1, 0.4)], 1.0, 1.0), Err(Error::Precondition(_))));
}
