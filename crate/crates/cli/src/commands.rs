//! One function per subcommand: validated scenario in, report out.

use std::fmt::Write as _;
use std::sync::Arc;

use eqlab_core::coherent::{
    affine_coherent_on, canonical_coherent_on, coherent_state, measured_labels, verify_centering, Fiducial, PhasePoint,
    CENTERING_TOL,
};
use eqlab_core::dynamics::{integrate, integrate_with_floor, model_one_min_q, Hamiltonian, Trajectory};
use eqlab_core::geometry::CoherentSheet;
use eqlab_core::model_two::{
    characteristic_exact_gaussian, characteristic_radial, couplings, h1_closed_form, h1_expectation, match_target,
    measure_superposition, RadialDensity, ReducibleRep,
};
use eqlab_core::schrodinger::{canonical_window, evolve, model_one_window, track_expectations, Boundary, EvolutionSetup};
use eqlab_core::symbols::{
    compute_c, weak_symbol_affine, weak_symbol_affine_with, weak_symbol_canonical_with, OperatorExpr, SymbolFn,
    SymbolMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::Scenario;
use crate::error::{CliError, InModule};
use crate::output::{num, Format};
use crate::svg::{Plot, Series};

/// Output of one subcommand in the requested format.
#[derive(Debug, Clone)]
pub enum Body {
    Csv(String),
    Json(Value),
    Svg(Plot),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub body: Body,
    pub summary: String,
}

/// Format used when `--format` is absent.
pub fn default_format(subcommand: &str) -> Format {
    match subcommand {
        "evolve-classical" | "evolve-quantum" | "model-one" | "curvature" | "charfn" => Format::Csv,
        _ => Format::Json,
    }
}

pub fn run(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    match s.subcommand.as_str() {
        "centering" => centering(s, format),
        "symbol" => symbol(s, format),
        "metric" => metric(s, format),
        "curvature" => curvature(s, format),
        "evolve-classical" => evolve_classical(s, format),
        "evolve-quantum" => evolve_quantum(s, format),
        "model-one" => model_one(s, format),
        "model-two" => model_two(s, format),
        "charfn" => charfn(s, format),
        other => Err(CliError::Config(format!("unknown subcommand `{other}`"))),
    }
}

fn is_affine(s: &Scenario) -> bool {
    s.text("family") == "affine"
}

fn check_affine_ratio(beta: f64, hbar: f64) -> Result<(), CliError> {
    if beta / hbar < 1.0 {
        return Err(CliError::Config(format!(
            "the affine fiducial needs beta/hbar >= 1 (got beta = {beta}, hbar = {hbar})"
        )));
    }
    Ok(())
}

fn fiducial(s: &Scenario) -> Result<Fiducial<f64>, CliError> {
    if is_affine(s) {
        check_affine_ratio(s.float("beta"), s.float("hbar"))?;
        Fiducial::affine_beta(s.float("beta"), s.float("hbar")).in_module("coherent-states")
    } else {
        Fiducial::gaussian(s.float("omega"), s.float("hbar")).in_module("coherent-states")
    }
}

fn fiducial_json(s: &Scenario) -> Value {
    if is_affine(s) {
        json!({ "family": "affine", "beta": s.float("beta"), "hbar": s.float("hbar") })
    } else {
        json!({ "family": "gaussian", "omega": s.float("omega"), "hbar": s.float("hbar") })
    }
}

fn point(s: &Scenario, p: f64, q: f64) -> Result<PhasePoint<f64>, CliError> {
    if is_affine(s) {
        PhasePoint::affine(p, q).map_err(|e| CliError::Config(format!("affine labels need q > 0: {e}")))
    } else {
        Ok(PhasePoint::canonical(p, q))
    }
}

fn operator(s: &Scenario) -> Result<OperatorExpr<f64>, CliError> {
    match s.text("operator") {
        "auto" if is_affine(s) => Ok(OperatorExpr::model_one()),
        "auto" => Ok(OperatorExpr::harmonic(s.float("omega"))),
        text => text
            .parse()
            .map_err(|e| CliError::Config(format!("key `operator`: {e}"))),
    }
}

fn weak_symbol(s: &Scenario, op: &OperatorExpr<f64>, method: SymbolMethod) -> Result<SymbolFn<f64>, CliError> {
    let f = fiducial(s)?;
    if is_affine(s) {
        weak_symbol_affine_with(op, &f, method).in_module("operator-symbols")
    } else {
        weak_symbol_canonical_with(op, &f, method).in_module("operator-symbols")
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

fn trajectory_points(tr: &Trajectory<f64>, which: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
    (0..tr.len()).map(|i| (tr.times[i], which(i))).collect()
}

fn centering(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let f = fiducial(s)?;
    let affine = is_affine(s);
    let (q_lo, q_hi) = (s.float("q_min"), s.float("q_max"));
    if q_lo > q_hi || (affine && q_lo <= 0.0) {
        return Err(CliError::Config(format!(
            "need q_min <= q_max, and q_min > 0 for the affine family (got {q_lo}, {q_hi})"
        )));
    }
    let report = verify_centering(&f).in_module("coherent-states")?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let span = s.float("p_span");
    let mut rows = Vec::new();
    for _ in 0..s.count("points") {
        let p = rng.gen_range(-span..=span);
        let q = if q_hi > q_lo { rng.gen_range(q_lo..=q_hi) } else { q_lo };
        let psi = coherent_state(&f, &point(s, p, q)?).in_module("coherent-states")?;
        let (pm, qm) = measured_labels(&psi, affine).in_module("coherent-states")?;
        rows.push((p, q, pm, qm, (pm - p).abs().max((qm - q).abs())));
    }
    let worst = rows.iter().map(|r| r.4).fold(0.0, f64::max);
    let passed = report.passed && worst <= CENTERING_TOL;
    let summary = format!(
        "centering: fiducial {}, max label error {worst:.3e} over {} points",
        if report.passed { "centred" } else { "NOT centred" },
        rows.len()
    );
    let body = match format {
        Format::Csv => {
            let mut out = String::from("p,q,p_measured,q_measured,error\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{}", e(r.0), e(r.1), e(r.2), e(r.3), e(r.4));
            }
            Body::Csv(out)
        }
        Format::Json => Body::Json(json!({
            "fiducial": fiducial_json(s),
            "mean_position": num(report.mean_position),
            "mean_momentum": report.mean_momentum.map(num),
            "dilation_moment": report.dilation_moment.map(num),
            "fiducial_centred": report.passed,
            "points": rows.iter().map(|r| json!({
                "p": r.0, "q": r.1, "p_measured": num(r.2), "q_measured": num(r.3), "error": num(r.4)
            })).collect::<Vec<_>>(),
            "max_label_error": num(worst),
            "tolerance": CENTERING_TOL,
            "passed": passed,
        })),
        Format::Svg => Body::Svg(
            Plot::new("Requested and measured labels", "q", "p")
                .with(Series::points("requested", rows.iter().map(|r| (r.1, r.0)).collect()))
                .with(Series::points("measured", rows.iter().map(|r| (r.3, r.2)).collect())),
        ),
    };
    Ok(Outcome { body, summary })
}

fn symbol(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let op = operator(s)?;
    let method = match s.text("method") {
        "quadrature" => SymbolMethod::Quadrature,
        _ => SymbolMethod::Auto,
    };
    let sym = weak_symbol(s, &op, method)?;
    let (p, q) = (s.float("p"), s.float("q"));
    point(s, p, q)?;
    let value = sym.value(p, q);
    let (dp, dq) = sym.gradient(p, q);
    let summary = format!("symbol of {op}: H({p}, {q}) = {value:.12e}");
    let body = match format {
        Format::Csv => {
            let mut out = String::from("p_power,q_power,coefficient\n");
            for (a, b, c) in sym.poly().terms() {
                let _ = writeln!(out, "{a},{b},{}", e(c));
            }
            Body::Csv(out)
        }
        Format::Json => Body::Json(json!({
            "fiducial": fiducial_json(s),
            "operator": op.to_string(),
            "terms": sym.poly().terms().map(|(a, b, c)| json!({ "p_power": a, "q_power": b, "coefficient": num(c) })).collect::<Vec<_>>(),
            "p": p,
            "q": q,
            "value": num(value),
            "gradient": [num(dp), num(dq)],
            "closed_form": sym.is_closed_form(),
            "imag_residue": num(sym.imag_residue()),
            "hermitian": sym.source_is_hermitian(),
        })),
        Format::Svg => {
            let span = s.float("span");
            let pts = linspace(p - span, p + span, 201).into_iter().map(|x| (x, sym.value(x, q))).collect();
            Body::Svg(Plot::new(format!("Weak symbol of {op} at q = {q}"), "p", "H(p, q)").with(Series::line("H", pts)))
        }
    };
    Ok(Outcome { body, summary })
}

/// Closed-form sheet metric `(g_pp, g_qq)` and curvature.
fn expected_geometry(s: &Scenario, q: f64) -> ((f64, f64), f64) {
    if is_affine(s) {
        let b = s.float("beta");
        ((q * q / b, b / (q * q)), -2.0 / b)
    } else {
        let w = s.float("omega");
        ((1.0 / w, w), 0.0)
    }
}

fn metric(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let f = fiducial(s)?;
    let (p, q) = (s.float("p"), s.float("q"));
    let sheet = CoherentSheet::around(&f, &point(s, p, q)?).in_module("state-geometry")?;
    let g = sheet.metric(p, q).in_module("state-geometry")?;
    let k = sheet.curvature(p, q).in_module("state-geometry")?;
    let ((epp, eqq), ek) = expected_geometry(s, q);
    let summary = format!(
        "metric at ({p}, {q}): g_pp {:.10}, g_pq {:.2e}, g_qq {:.10}; curvature {k:.6}",
        g.g_pp, g.g_pq, g.g_qq
    );
    let sweep = |s: &Scenario| -> Result<Vec<(f64, f64, f64, f64)>, CliError> {
        let mut rows = Vec::new();
        for qs in linspace(s.float("q_lo"), s.float("q_hi"), s.count("samples")) {
            let pt = point(s, p, qs)?;
            let sh = CoherentSheet::around(&f, &pt).in_module("state-geometry")?;
            let m = sh.metric(p, qs).in_module("state-geometry")?;
            rows.push((qs, m.g_pp, m.g_pq, m.g_qq));
        }
        Ok(rows)
    };
    let body = match format {
        Format::Json => Body::Json(json!({
            "fiducial": fiducial_json(s),
            "p": p,
            "q": q,
            "g_pp": num(g.g_pp),
            "g_pq": num(g.g_pq),
            "g_qq": num(g.g_qq),
            "expected_g_pp": epp,
            "expected_g_qq": eqq,
            "max_metric_error": num((g.g_pp - epp).abs().max((g.g_qq - eqq).abs()).max(g.g_pq.abs())),
            "curvature": num(k),
            "expected_curvature": ek,
        })),
        Format::Csv => {
            let mut out = String::from("q,g_pp,g_pq,g_qq,expected_g_pp,expected_g_qq\n");
            for (qs, a, b, c) in sweep(s)? {
                let ((x, y), _) = expected_geometry(s, qs);
                let _ = writeln!(out, "{},{},{},{},{},{}", e(qs), e(a), e(b), e(c), e(x), e(y));
            }
            Body::Csv(out)
        }
        Format::Svg => {
            let rows = sweep(s)?;
            let exp: Vec<_> = rows.iter().map(|r| (r.0, expected_geometry(s, r.0).0)).collect();
            Body::Svg(
                Plot::new(format!("Fubini-Study metric at p = {p}"), "q", "metric component")
                    .with(Series::points("g_pp", rows.iter().map(|r| (r.0, r.1)).collect()))
                    .with(Series::points("g_qq", rows.iter().map(|r| (r.0, r.3)).collect()))
                    .with(Series::line("expected g_pp", exp.iter().map(|(q, (a, _))| (*q, *a)).collect()))
                    .with(Series::line("expected g_qq", exp.iter().map(|(q, (_, b))| (*q, *b)).collect())),
            )
        }
    };
    Ok(Outcome { body, summary })
}

fn curvature(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let f = fiducial(s)?;
    let p = s.float("p");
    let mut rows = Vec::new();
    for q in linspace(s.float("q_lo"), s.float("q_hi"), s.count("samples")) {
        let sheet = CoherentSheet::around(&f, &point(s, p, q)?).in_module("state-geometry")?;
        let k = sheet.curvature(p, q).in_module("state-geometry")?;
        rows.push((q, k, expected_geometry(s, q).1));
    }
    let worst = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max);
    let summary = format!("curvature: {} samples, max deviation from closed form {worst:.3e}", rows.len());
    let body = match format {
        Format::Csv => {
            let mut out = String::from("q,curvature,expected\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{}", e(r.0), e(r.1), e(r.2));
            }
            Body::Csv(out)
        }
        Format::Json => Body::Json(json!({
            "fiducial": fiducial_json(s),
            "p": p,
            "samples": rows.iter().map(|r| json!({ "q": r.0, "curvature": num(r.1), "expected": r.2 })).collect::<Vec<_>>(),
            "max_error": num(worst),
        })),
        Format::Svg => Body::Svg(
            Plot::new(format!("Scalar curvature along p = {p}"), "q", "R")
                .with(Series::points("numerical", rows.iter().map(|r| (r.0, r.1)).collect()))
                .with(Series::line("closed form", rows.iter().map(|r| (r.0, r.2)).collect())),
        ),
    };
    Ok(Outcome { body, summary })
}

fn singularity_json(tr: &Trajectory<f64>) -> Value {
    match &tr.singularity {
        Some(flag) => json!({ "t": num(flag.t), "p": num(flag.p), "q": num(flag.q) }),
        None => Value::Null,
    }
}

fn trajectory_plot(title: String, tr: &Trajectory<f64>) -> Plot {
    Plot::new(title, "t", "phase coordinate")
        .with(Series::line("q", trajectory_points(tr, |i| tr.q[i])))
        .with(Series::line("p", trajectory_points(tr, |i| tr.p[i])))
}

fn evolve_classical(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let op = operator(s)?;
    let sym = weak_symbol(s, &op, SymbolMethod::Auto)?;
    let pt = point(s, s.float("p0"), s.float("q0"))?;
    let tr = integrate_with_floor(&sym, &pt, s.float("t_end"), s.float("dt"), s.float("q_floor"))
        .in_module("enhanced-dynamics")?;
    let (t, p, q) = tr.last().expect("trajectory starts with the initial point");
    let summary = format!(
        "evolve-classical: {} samples to t = {t}, final (p, q) = ({p:.10}, {q:.10}){}",
        tr.len(),
        if tr.singularity.is_some() { ", singularity flagged" } else { "" }
    );
    let body = match format {
        Format::Csv => Body::Csv(tr.to_csv()),
        Format::Json => Body::Json(json!({
            "fiducial": fiducial_json(s),
            "operator": op.to_string(),
            "samples": tr.len(),
            "final": { "t": num(t), "p": num(p), "q": num(q) },
            "min_q": tr.min_q().map(num),
            "energy_drift": num(tr.max_relative_drift()),
            "singularity": singularity_json(&tr),
        })),
        Format::Svg => Body::Svg(trajectory_plot(format!("Enhanced classical flow of {op}"), &tr)),
    };
    Ok(Outcome { body, summary })
}

fn evolve_quantum(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let f = fiducial(s)?;
    let op = operator(s)?;
    let (p0, q0, hbar) = (s.float("p0"), s.float("q0"), s.float("hbar"));
    let pt = point(s, p0, q0)?;
    let affine = is_affine(s);
    let t_end = s.auto_or_float("t_end").unwrap_or(if affine {
        0.5
    } else {
        2.0 * std::f64::consts::PI / s.float("omega")
    });
    if t_end == 0.0 {
        return Err(CliError::Config("key `t_end` must be non-zero".into()));
    }
    let steps = (t_end.abs() / s.float("dt")).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let stride = (steps / s.count("samples")).max(1);
    let (grid, boundary) = if affine {
        let g = model_one_window(&f, (p0, q0), 1.0, t_end, s.float("step")).in_module("schrodinger-bench")?;
        (g, Boundary::DirichletAtZero)
    } else {
        let omega = s.float("omega");
        let reach = (q0 * q0 + (p0 / omega).powi(2)).sqrt();
        let g = canonical_window(&f, 0.0, reach, s.count("nodes")).in_module("schrodinger-bench")?;
        (g, Boundary::DirichletBoth)
    };
    let psi0 = if affine {
        affine_coherent_on(&f, &pt, Arc::clone(&grid))
    } else {
        canonical_coherent_on(&f, &pt, Arc::clone(&grid))
    }
    .in_module("coherent-states")?;
    let nodes = grid.len();
    let setup = EvolutionSetup::new(op.clone(), grid, boundary, dt, steps, hbar).in_module("schrodinger-bench")?;
    let evolution = evolve(&psi0, &setup, stride).in_module("schrodinger-bench")?;
    let mut quantum = track_expectations(&evolution, &setup).in_module("schrodinger-bench")?;
    if affine {
        // the affine momentum label is the dilation moment over <x>
        for (i, psi) in evolution.states.iter().enumerate() {
            quantum.p[i] = measured_labels(psi, true).in_module("coherent-states")?.0;
        }
    }

    // enhanced classical comparator on the same time lattice
    let sym = weak_symbol(s, &op, SymbolMethod::Auto)?;
    let classical = integrate(&sym, &pt, t_end, dt.abs() * (1.0 + 1e-9)).in_module("enhanced-dynamics")?;
    let at = |i: usize| (i * stride).min(classical.len() - 1);
    let (mut dq, mut dp) = (0.0f64, 0.0f64);
    for i in 0..quantum.len() {
        dq = dq.max((quantum.q[i] - classical.q[at(i)]).abs());
        dp = dp.max((quantum.p[i] - classical.p[at(i)]).abs());
    }
    let e0 = quantum.energy[0];
    let drift = quantum.energy.iter().map(|x| (x - e0).abs()).fold(0.0, f64::max);
    let summary = format!(
        "evolve-quantum: {steps} steps on {nodes} nodes, max |<x> - q| {dq:.3e}, max |<p> - p| {dp:.3e}"
    );
    let body = match format {
        Format::Csv => {
            let mut out = String::from("t,p,q,H,p_classical,q_classical\n");
            for i in 0..quantum.len() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    e(quantum.times[i]),
                    e(quantum.p[i]),
                    e(quantum.q[i]),
                    e(quantum.energy[i]),
                    e(classical.p[at(i)]),
                    e(classical.q[at(i)])
                );
            }
            Body::Csv(out)
        }
        Format::Json => Body::Json(json!({
            "fiducial": fiducial_json(s),
            "operator": op.to_string(),
            "nodes": nodes,
            "steps": steps,
            "dt": dt,
            "max_position_deviation": num(dq),
            "max_momentum_deviation": num(dp),
            "energy_drift": num(drift),
        })),
        Format::Svg => Body::Svg(
            Plot::new(format!("Full and restricted dynamics of {op}"), "t", "position")
                .with(Series::line("<x> full", trajectory_points(&quantum, |i| quantum.q[i])))
                .with(Series::line("q restricted", trajectory_points(&quantum, |i| classical.q[at(i)]))),
        ),
    };
    Ok(Outcome { body, summary })
}

fn model_one(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let (beta, hbar) = (s.float("beta"), s.float("hbar"));
    let (p0, q0) = (s.float("p0"), s.float("q0"));
    let (t_min, t_max, dt) = (s.float("t_min"), s.float("t_max"), s.float("dt"));
    if !(t_min <= 0.0 && t_max >= 0.0) {
        return Err(CliError::Config(format!("need t_min <= 0 <= t_max (got {t_min}, {t_max})")));
    }
    let (sym, c, c_report) = match s.auto_or_float("c") {
        None => {
            check_affine_ratio(beta, hbar)?;
            let f = Fiducial::affine_beta(beta, hbar).in_module("coherent-states")?;
            let cc = compute_c(&f).in_module("operator-symbols")?;
            let sym = weak_symbol_affine(&OperatorExpr::model_one(), &f).in_module("operator-symbols")?;
            (sym, cc.closed_form, json!({ "quadrature": num(cc.quadrature), "closed_form": num(cc.closed_form) }))
        }
        Some(c) => (SymbolFn::model_one(c, hbar), c, json!({ "given": c })),
    };
    let pt = PhasePoint::affine(p0, q0).in_module("coherent-states")?;
    let forward = integrate(&sym, &pt, t_max, dt).in_module("enhanced-dynamics")?;
    let backward = if t_min < 0.0 {
        Some(integrate(&sym, &pt, t_min, dt).in_module("enhanced-dynamics")?)
    } else {
        None
    };
    // merge into one time-ordered path
    let mut path = Trajectory::new();
    if let Some(b) = &backward {
        for i in (1..b.len()).rev() {
            path.push(b.times[i], b.p[i], b.q[i], b.energy[i]);
        }
    }
    for i in 0..forward.len() {
        path.push(forward.times[i], forward.p[i], forward.q[i], forward.energy[i]);
    }
    let energy = sym.energy(p0, q0);
    let min_q = path.min_q().unwrap_or(q0);
    let floor = if c > 0.0 { Some(model_one_min_q(c, p0, q0)) } else { None };
    let flags: Vec<Value> = [backward.as_ref(), Some(&forward)]
        .into_iter()
        .flatten()
        .filter(|t| t.singularity.is_some())
        .map(singularity_json)
        .collect();
    let summary = format!(
        "model-one: C = {c:.10}, E = {energy:.10}, min q = {min_q:.10}{}{}",
        floor.map(|f| format!(" (C/E = {f:.10})")).unwrap_or_default(),
        if flags.is_empty() { String::new() } else { format!(", {} singularity flag(s)", flags.len()) }
    );
    let stride = s.count("stride");
    let body = match format {
        Format::Csv => {
            let mut out = String::from("t,p,q,H\n");
            for i in (0..path.len()).filter(|i| i % stride == 0 || *i == path.len() - 1) {
                let _ = writeln!(out, "{},{},{},{}", e(path.times[i]), e(path.p[i]), e(path.q[i]), e(path.energy[i]));
            }
            Body::Csv(out)
        }
        Format::Json => Body::Json(json!({
            "beta": beta,
            "hbar": hbar,
            "c": c_report,
            "p0": p0,
            "q0": q0,
            "energy": num(energy),
            "min_q": num(min_q),
            "min_q_closed_form": floor.map(num),
            "t_range": [path.times.first().copied().map(num), path.times.last().copied().map(num)],
            "energy_drift": num(path.max_relative_drift()),
            "singularities": flags,
        })),
        Format::Svg => {
            let thin: Vec<usize> = (0..path.len()).filter(|i| i % stride == 0).collect();
            Body::Svg(
                Plot::new(format!("Model One with C = {c:.4}"), "t", "q")
                    .with(Series::line("q(t)", thin.iter().map(|&i| (path.times[i], path.q[i])).collect()))
                    .with(Series::line(
                        "C/E",
                        floor.map(|f| vec![(path.times[0], f), (*path.times.last().unwrap(), f)]).unwrap_or_default(),
                    )),
            )
        }
    };
    Ok(Outcome { body, summary })
}

fn labels(s: &Scenario, key: &str, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, CliError> {
    match s.text(key) {
        "random" => Ok((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()),
        text => {
            let v: Vec<f64> = text
                .split(',')
                .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<_>>()
                .ok_or_else(|| CliError::Config(format!("key `{key}` must be `random` or numbers (got `{text}`)")))?;
            if v.len() != n {
                return Err(CliError::Config(format!("key `{key}` needs {n} values (got {})", v.len())));
            }
            Ok(v)
        }
    }
}

fn model_two(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let n = s.count("N");
    let (zeta, hbar) = (s.float("zeta"), s.float("hbar"));
    let (rep, nu) = match (s.auto_or_float("m0_sq"), s.auto_or_float("lambda0")) {
        (None, None) => (
            ReducibleRep::new(n, s.float("m"), zeta, hbar).in_module("model-two-algebra")?,
            s.float("nu"),
        ),
        (Some(m0_sq), Some(lambda0)) => {
            if !(m0_sq > 0.0 && lambda0 > 0.0 && zeta > 0.0) {
                return Err(CliError::Config("target matching needs m0_sq > 0, lambda0 > 0 and zeta > 0".into()));
            }
            match_target(m0_sq, lambda0, zeta, n, hbar).in_module("model-two-algebra")?
        }
        _ => return Err(CliError::Config("keys `m0_sq` and `lambda0` must be given together".into())),
    };
    let (m0_sq, lambda0) = couplings(&rep, nu);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut records = Vec::new();
    let mut worst = 0.0f64;
    for d in 0..s.count("draws") {
        let (p, q) = if d == 0 {
            (labels(s, "p", n, &mut rng)?, labels(s, "q", n, &mut rng)?)
        } else {
            let mut r = |_| rng.gen_range(-1.0..=1.0);
            ((0..n).map(&mut r).collect(), (0..n).map(&mut r).collect())
        };
        let h1 = h1_expectation(&rep, nu, &p, &q).in_module("model-two-algebra")?;
        let closed = h1_closed_form(&rep, nu, &p, &q).in_module("model-two-algebra")?;
        worst = worst.max((h1 - closed).abs());
        records.push((p, q, h1, closed));
    }
    let summary = format!(
        "model-two: N = {n}, {} record(s), max |H1 - closed form| = {worst:.3e}",
        records.len()
    );
    let join = |v: &[f64]| v.iter().map(|x| e(*x)).collect::<Vec<_>>().join(";");
    let body = match format {
        Format::Json => Body::Json(json!({
            "records": records.iter().map(|(p, q, h1, closed)| json!({
                "N": n,
                "m": rep.m(),
                "zeta": rep.zeta(),
                "nu": nu,
                "p": p,
                "q": q,
                "H1": num(*h1),
                "H1_closed_form": num(*closed),
                "m0_sq": m0_sq,
                "lambda0": lambda0,
            })).collect::<Vec<_>>(),
            "max_abs_deviation": num(worst),
        })),
        Format::Csv => {
            let mut out = String::from("N,m,zeta,nu,m0_sq,lambda0,H1,H1_closed_form,p,q\n");
            for (p, q, h1, closed) in &records {
                let _ = writeln!(
                    out,
                    "{n},{},{},{},{},{},{},{},{},{}",
                    e(rep.m()),
                    e(rep.zeta()),
                    e(nu),
                    e(m0_sq),
                    e(lambda0),
                    e(*h1),
                    e(*closed),
                    join(p),
                    join(q)
                );
            }
            Body::Csv(out)
        }
        Format::Svg => {
            let (p, q, _, _) = &records[0];
            let mut ladder = Vec::new();
            let mut closed = Vec::new();
            for t in linspace(0.0, 2.0, 41) {
                let (ps, qs): (Vec<f64>, Vec<f64>) = (p.iter().map(|x| x * t).collect(), q.iter().map(|x| x * t).collect());
                ladder.push((t, h1_expectation(&rep, nu, &ps, &qs).in_module("model-two-algebra")?));
                closed.push((t, h1_closed_form(&rep, nu, &ps, &qs).in_module("model-two-algebra")?));
            }
            Body::Svg(
                Plot::new(format!("H1 along the ray s(p, q), N = {n}"), "s", "H1")
                    .with(Series::points("ladder expectation", ladder))
                    .with(Series::line("closed form", closed)),
            )
        }
    };
    Ok(Outcome { body, summary })
}

fn parse_atoms(s: &Scenario) -> Result<Vec<(f64, f64)>, CliError> {
    match s.text("atoms") {
        "auto" => Ok(vec![(0.25 / s.float("m_prime"), 1.0)]),
        text => text
            .split(',')
            .map(|atom| {
                let (b, w) = atom.split_once(':')?;
                Some((b.trim().parse().ok()?, w.trim().parse().ok()?))
            })
            .collect::<Option<Vec<(f64, f64)>>>()
            .ok_or_else(|| CliError::Config(format!("key `atoms` must look like `b:weight,b:weight` (got `{text}`)"))),
    }
}

fn charfn(s: &Scenario, format: Format) -> Result<Outcome, CliError> {
    let dims: Vec<usize> = s
        .floats("dims")
        .into_iter()
        .map(|d| if d.fract() == 0.0 && d >= 3.0 { Some(d as usize) } else { None })
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Config("key `dims` must hold integers >= 3".into()))?;
    let (m_prime, hbar) = (s.float("m_prime"), s.float("hbar"));
    let momenta = s.floats("p_r");
    let atoms = parse_atoms(s)?;
    let mut rows = Vec::new();
    let mut monotone = serde_json::Map::new();
    let mut measure = Vec::new();
    for &p in &momenta {
        let closed = characteristic_exact_gaussian(p, m_prime, hbar).in_module("model-two-algebra")?;
        let mut last = f64::INFINITY;
        let mut falling = true;
        for &n in &dims {
            let density = RadialDensity::gaussian(n, m_prime, hbar).in_module("model-two-algebra")?;
            let c = characteristic_radial(&density, p, hbar).in_module("model-two-algebra")?;
            falling &= c.difference < last;
            last = c.difference;
            rows.push((n, p, c.exact.re, c.approx, c.difference, closed));
        }
        monotone.insert(format!("{p}"), json!(falling));
        let value = measure_superposition(&atoms, p, hbar).in_module("model-two-algebra")?;
        measure.push((p, value, closed));
    }
    let all_falling = monotone.values().all(|v| v == &json!(true));
    let summary = format!(
        "charfn: {} (N, p_r) pairs, approximation error {} with N",
        rows.len(),
        if all_falling { "decreases" } else { "does NOT always decrease" }
    );
    let body = match format {
        Format::Csv => {
            let mut out = String::from("N,p_r,exact,approx,difference,closed_form\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{},{}", r.0, e(r.1), e(r.2), e(r.3), e(r.4), e(r.5));
            }
            Body::Csv(out)
        }
        Format::Json => Body::Json(json!({
            "m_prime": m_prime,
            "hbar": hbar,
            "records": rows.iter().map(|r| json!({
                "n": r.0, "p_r": r.1, "exact": num(r.2), "approx": num(r.3), "difference": num(r.4), "closed_form": num(r.5)
            })).collect::<Vec<_>>(),
            "monotone_in_n": monotone,
            "measure": measure.iter().map(|(p, v, c)| json!({ "p_r": p, "value": num(*v), "closed_form": num(*c) })).collect::<Vec<_>>(),
        })),
        Format::Svg => {
            let mut plot = Plot::new("Steepest-descent error against exact quadrature", "N", "log10 |exact - approx|");
            for &p in &momenta {
                let pts = rows
                    .iter()
                    .filter(|r| r.1 == p)
                    .map(|r| (r.0 as f64, r.4.max(1e-300).log10()))
                    .collect();
                plot = plot.with(Series::line(format!("p_r = {p}"), pts));
            }
            Body::Svg(plot)
        }
    };
    Ok(Outcome { body, summary })
}
