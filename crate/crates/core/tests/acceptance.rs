//! Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

mod common;

use std::time::Instant;

use eqlab_core::coherent::{
    canonical_coherent_on, coherent_state, measured_labels, verify_centering, Fiducial, PhaseDomain, PhasePoint,
};
use eqlab_core::dynamics::{integrate, model_one_closed_form, model_one_min_q};
use eqlab_core::geometry::{affine_metric, canonical_metric, sheet_curvature};
use eqlab_core::model_two::*;
use eqlab_core::schrodinger::{canonical_window, evolve_tracked, Boundary, EvolutionSetup};
use eqlab_core::symbols::{compute_c, hbar_limit_check, weak_symbol_canonical, OperatorExpr, SymbolFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

type Check = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    format!("error: {e}")
}

fn centering() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gaussian = Fiducial::<f64>::gaussian(1.0, 1.0).map_err(err)?;
    let affine = Fiducial::<f64>::affine_beta(2.0, 1.0).map_err(err)?;
    let mut worst = 0.0f64;
    for f in [&gaussian, &affine] {
        if !verify_centering(f).map_err(err)?.passed {
            return Err("fiducial not centred".into());
        }
        for _ in 0..20 {
            let p = rng.gen_range(-2.0..2.0);
            let pt = if f.is_affine() {
                PhasePoint::affine(p, rng.gen_range(0.5..3.0)).map_err(err)?
            } else {
                PhasePoint::canonical(p, rng.gen_range(-2.0..2.0))
            };
            let psi = coherent_state(f, &pt).map_err(err)?;
            let (pm, qm) = measured_labels(&psi, pt.domain == PhaseDomain::Affine).map_err(err)?;
            worst = worst.max((pm - pt.p).abs()).max((qm - pt.q).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-7 && secs < 5.0,
        format!("max label error {worst:.2e} (tol 1e-7) over 2x20 points, {secs:.2} s (limit 5 s)"),
    )
}

fn cartesian_metric() -> Check {
    let (mut diag, mut off) = (0.0f64, 0.0f64);
    for omega in [0.5, 1.0, 2.0] {
        let f = Fiducial::<f64>::gaussian(omega, 1.0).map_err(err)?;
        for p in [-1.0, 0.0, 1.0] {
            for q in [-1.0, 0.0, 1.0] {
                let g = canonical_metric(&f, &PhasePoint::canonical(p, q)).map_err(err)?;
                diag = diag.max((g.g_pp - 1.0 / omega).abs()).max((g.g_qq - omega).abs());
                off = off.max(g.g_pq.abs());
            }
        }
    }
    verdict(
        diag <= 1e-6 && off <= 1e-8,
        format!("max diagonal error {diag:.2e} (tol 1e-6), max off-diagonal {off:.2e} (tol 1e-8)"),
    )
}

fn poincare_geometry() -> Check {
    let (mut metric, mut curv) = (0.0f64, 0.0f64);
    for beta in [1.0, 4.0] {
        let f = Fiducial::<f64>::affine_beta(beta, 1.0).map_err(err)?;
        for q in [0.5, 1.0, 4.0] {
            let pt = PhasePoint::affine(0.3, q).map_err(err)?;
            let g = affine_metric(&f, &pt).map_err(err)?;
            metric = metric
                .max((g.g_pp - q * q / beta).abs())
                .max((g.g_qq - beta / (q * q)).abs())
                .max(g.g_pq.abs());
            let k = sheet_curvature(&f, &pt).map_err(err)?;
            curv = curv.max((k + 2.0 / beta).abs());
        }
    }
    verdict(
        metric <= 1e-5 && curv <= 1e-3,
        format!("max metric error {metric:.2e} (tol 1e-5), max curvature error {curv:.2e} (tol 1e-3)"),
    )
}

fn model_one_singularity() -> Check {
    // C = 0 collapses at t = -1/p0
    let (p0, q0) = (1.0, 1.0);
    let tr = integrate(&SymbolFn::<f64>::model_one(0.0, 1.0), &PhasePoint::affine(p0, q0).map_err(err)?, -2.0, 1e-3)
        .map_err(err)?;
    let flag = tr.singularity.as_ref().ok_or("C = 0 run raised no singularity flag")?;
    let min_q = tr.min_q().unwrap_or(f64::INFINITY);
    let reached = flag.t;
    let collapse_ok = min_q < 1e-3 && (reached + 1.0 / p0).abs() <= 0.01;

    // C > 0 bounces at C/E; RK4 against the closed form
    let f = Fiducial::<f64>::affine_beta(1.0, 1.0).map_err(err)?;
    let c = compute_c(&f).map_err(err)?.closed_form;
    let h = SymbolFn::<f64>::model_one(c, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut floor_err, mut rk_err) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let (p0, q0) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        let pt = PhasePoint::affine(p0, q0).map_err(err)?;
        let fwd = integrate(&h, &pt, 10.0, 1e-3).map_err(err)?;
        let bwd = integrate(&h, &pt, -10.0, 1e-3).map_err(err)?;
        let min_q = fwd.min_q().unwrap().min(bwd.min_q().unwrap());
        let floor = model_one_min_q(c, p0, q0);
        floor_err = floor_err.max(((min_q - floor) / floor).abs());
        for tr in [&fwd, &bwd] {
            for i in 0..tr.len() {
                let (pe, qe) = model_one_closed_form(c, p0, q0, tr.times[i]);
                rk_err = rk_err.max((tr.p[i] - pe).abs()).max((tr.q[i] - qe).abs() / (1.0 + qe.abs()));
            }
        }
    }
    verdict(
        collapse_ok && floor_err <= 1e-3 && rk_err <= 1e-6,
        format!(
            "C=0: min q {min_q:.1e}, flag at t = {reached:.4} (target -1/p0 = -1); C>0: max relative floor error {floor_err:.2e} (tol 1e-3); RK4 vs closed form {rk_err:.2e} (tol 1e-6)"
        ),
    )
}

/// `ħ²∫x|ξ′|²dx` from Gamma integrals: with `ξ = M x^{a−½}e^{−ax}`, the
/// integrand is `M²x^{2a−2}e^{−2ax}[(a−½)² − 2a(a−½)x + a²x²]`.
fn c_gamma_oracle(beta: f64, hbar: f64) -> f64 {
    let a = beta / hbar;
    let s = 2.0 * a;
    let m2 = s.powf(s) / gamma(s);
    let moment = |k: f64| gamma(k + 1.0) / s.powf(k + 1.0);
    let b = a - 0.5;
    hbar * hbar * m2 * (b * b * moment(s - 2.0) - 2.0 * a * b * moment(s - 1.0) + a * a * moment(s))
}

fn c_constant() -> Check {
    let (mut quad, mut oracle) = (0.0f64, 0.0f64);
    for (beta, hbar) in [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)] {
        let f = Fiducial::<f64>::affine_beta(beta, hbar).map_err(err)?;
        let c = compute_c(&f).map_err(err)?;
        let closed = hbar * beta / 2.0;
        quad = quad.max(((c.quadrature - closed) / closed).abs());
        oracle = oracle.max(((c_gamma_oracle(beta, hbar) - closed) / closed).abs());
    }
    verdict(
        quad <= 1e-8 && oracle <= 1e-12,
        format!("quadrature vs hbar*beta/2: {quad:.2e} (tol 1e-8); Gamma oracle vs closed form {oracle:.2e}"),
    )
}

fn hbar_limit() -> Check {
    let hbars = [1.0, 0.5, 0.25, 0.125];
    let harmonic = hbar_limit_check(
        &OperatorExpr::harmonic(1.0),
        |h| Fiducial::gaussian(1.0, h),
        |p, q| 0.5 * (p * p + q * q),
        &PhasePoint::canonical(0.7, -0.4),
        &hbars,
    )
    .map_err(err)?;
    let model_one = hbar_limit_check(
        &OperatorExpr::model_one(),
        |h| Fiducial::affine_beta(2.0, h),
        |p, q| q * p * p,
        &PhasePoint::affine(0.7, 1.3).map_err(err)?,
        &hbars,
    )
    .map_err(err)?;
    let ex = |r: &eqlab_core::symbols::LimitReport<f64>| r.exponent.unwrap_or(f64::NAN);
    let (a, b) = (ex(&harmonic), ex(&model_one));
    verdict(
        (a - 1.0).abs() <= 0.05 && (b - 1.0).abs() <= 0.05,
        format!("fitted exponents: harmonic {a:.4}, Model One {b:.4} (target 1 +- 0.05)"),
    )
}

fn restricted_vs_full() -> Check {
    let start = Instant::now();
    let (omega, p0, q0): (f64, f64, f64) = (2.0, 0.6, 0.8);
    let f = Fiducial::<f64>::gaussian(omega, 1.0).map_err(err)?;
    let pt = PhasePoint::canonical(p0, q0);
    let reach = (q0 * q0 + (p0 / omega).powi(2)).sqrt();
    let grid = canonical_window(&f, 0.0, reach, 4096).map_err(err)?;
    let psi0 = canonical_coherent_on(&f, &pt, grid.clone()).map_err(err)?;
    let period = 2.0 * std::f64::consts::PI / omega;
    let steps = (period / 1e-4).round() as usize;
    let dt = period / steps as f64;
    let setup = EvolutionSetup::new(OperatorExpr::harmonic(omega), grid, Boundary::DirichletBoth, dt, steps, 1.0)
        .map_err(err)?;
    let stride = 100;
    let quantum = evolve_tracked(&psi0, &setup, stride).map_err(err)?;
    let sym = weak_symbol_canonical(&OperatorExpr::harmonic(omega), &f).map_err(err)?;
    let classical = integrate(&sym, &pt, period, dt * (1.0 + 1e-9)).map_err(err)?;
    let mut worst = 0.0f64;
    for i in 0..quantum.len() {
        let k = ((quantum.times[i] / dt).round() as usize).min(classical.len() - 1);
        if (classical.times[k] - quantum.times[i]).abs() > 1e-9 {
            return Err(format!("no classical sample at t = {}", quantum.times[i]));
        }
        worst = worst.max((quantum.q[i] - classical.q[k]).abs()).max((quantum.p[i] - classical.p[k]).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-4 && secs < 60.0,
        format!("max |<x> - q|, |<p> - p| over one period {worst:.2e} (tol 1e-4), {secs:.1} s (limit 60 s)"),
    )
}

fn model_two_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let (m, zeta, hbar, nu) = (rng.gen_range(0.2..2.0), rng.gen_range(0.0..0.95), rng.gen_range(0.3..2.0), rng.gen_range(0.0..2.0));
        let rep = ReducibleRep::new(n, m, zeta, hbar).map_err(err)?;
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p2: f64 = p.iter().map(|x| x * x).sum();
        let q2: f64 = q.iter().map(|x| x * x).sum();
        let closed = 0.5 * (p2 + (1.0 + zeta * zeta) * m * m * q2) + nu * zeta.powi(4) * m.powi(4) * q2 * q2;
        let v = h1_expectation(&rep, nu, &p, &q).map_err(err)?;
        worst = worst.max((v - closed).abs() / closed.abs().max(1.0));
    }
    let mut wick = 0.0f64;
    for (m, zeta, hbar) in [(1.0, 0.3, 1.0), (2.0, 0.6, 1.0), (1.0, 0.9, 0.5)] {
        let rep = ReducibleRep::new(1, m, zeta, hbar).map_err(err)?;
        let (p, q) = (0.7, -0.4);
        let (hp, hr, quartic) = common::n1_expectations(m, zeta, hbar, p, q);
        let polys = [
            (LadderPolynomial::h_p(1), hp),
            (LadderPolynomial::h_r(1), hr),
            (LadderPolynomial::h_r_squared_normal(1), quartic),
        ];
        for (poly, oracle) in polys {
            let v = displaced_expectation(&poly, &rep, &[p], &[q]).map_err(err)?;
            wick = wick.max((v - oracle).abs() / oracle.abs().max(1.0));
        }
    }
    verdict(
        worst <= 1e-12 && wick <= 1e-6,
        format!("1000 draws: max deviation {worst:.2e} (tol 1e-12); N=1 ladder vs plane quadrature {wick:.2e} (tol 1e-6)"),
    )
}

fn reducible_overlap() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for zeta in [0.3, 0.6, 0.9] {
        let oracle = common::OverlapOracle::new(1.0, zeta, 1.0, 1.5);
        let rep = ReducibleRep::new(1, 1.0, zeta, 1.0).map_err(err)?;
        for _ in 0..20 {
            let mut v = || rng.gen_range(-1.5..1.5);
            let (p1, q1, p, q) = (v(), v(), v(), v());
            let want = oracle.overlap((p1, q1), (p, q));
            let got = overlap_reducible(&rep, (&[p1], &[q1]), (&[p], &[q])).map_err(err)?;
            worst = worst.max((got.norm() - want.norm()).abs()).max((got - want).norm());
        }
    }
    verdict(worst <= 1e-8, format!("max |closed form - double integral| over 3x20 tuples {worst:.2e} (tol 1e-8)"))
}

fn characteristic_function() -> Check {
    let mut trends = Vec::new();
    let mut all = true;
    for p in [0.5, 1.0, 2.0] {
        let mut errs = Vec::new();
        for n in [4, 8, 16, 32, 64] {
            let d = RadialDensity::<f64>::gaussian(n, 1.0, 1.0).map_err(err)?;
            errs.push(characteristic_radial(&d, p, 1.0).map_err(err)?.difference);
        }
        let falling = errs.windows(2).all(|w| w[1] < w[0]);
        all &= falling;
        trends.push(format!("p_r={p}: {:.1e}..{:.1e}", errs[0], errs[4]));
    }
    let mut atom = 0.0f64;
    for k in 0..=40 {
        let p = 0.1 * k as f64;
        let v = measure_superposition(&[(0.25, 1.0)], p, 1.0).map_err(err)?;
        atom = atom.max((v - (-p * p / 4.0f64).exp()).abs());
    }
    verdict(
        all && atom <= 1e-12,
        format!("error monotone in N: {all} ({}); single atom {atom:.1e} (tol 1e-12)", trends.join(", ")),
    )
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("centering", centering),
        ("cartesian metric", cartesian_metric),
        ("Poincare geometry", poincare_geometry),
        ("Model One singularity avoidance", model_one_singularity),
        ("C constant", c_constant),
        ("hbar limit", hbar_limit),
        ("restricted vs full dynamics", restricted_vs_full),
        ("Model Two exactness", model_two_exactness),
        ("reducible overlap", reducible_overlap),
        ("characteristic function", characteristic_function),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
