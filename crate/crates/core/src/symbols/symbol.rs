use std::collections::BTreeMap;

use crate::coherent::{Fiducial, FiducialKind, PhasePoint, SAMPLED_CENTERING_TOL};
use crate::error::{Error, Result};
use crate::numerics::Grid;
use crate::scalar::{lit, Cplx, Real};

use super::expr::OperatorExpr;
use super::moments::{expand, AnalyticSpace, GridSpace, Transport};

/// Highest `D` count and `X` power handled by the closed-form path.
pub const CLOSED_FORM_MAX_DEGREE: u32 = 4;
/// Largest imaginary residue tolerated in the symbol of a Hermitian operator.
pub const IMAG_TOL: f64 = 1e-10;
/// Two grid resolutions must agree to this (relative) level.
pub const QUADRATURE_CONVERGENCE_TOL: f64 = 1e-6;

/// Laurent polynomial `Σ c_{ij} p^i q^j` (`j` may be negative).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhasePoly<T> {
    coeffs: BTreeMap<(u32, i32), T>,
}

impl<T: Real> PhasePoly<T> {
    pub fn new() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn from_terms(terms: &[(T, u32, i32)]) -> Self {
        let mut poly = Self::new();
        for &(c, i, j) in terms {
            poly.add_term(c, i, j);
        }
        poly
    }

    pub fn add_term(&mut self, c: T, p_power: u32, q_power: i32) {
        *self.coeffs.entry((p_power, q_power)).or_insert(T::zero()) += c;
    }

    pub fn coefficient(&self, p_power: u32, q_power: i32) -> T {
        self.coeffs.get(&(p_power, q_power)).copied().unwrap_or(T::zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, i32, T)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn has_negative_q_power(&self) -> bool {
        self.coeffs.keys().any(|&(_, j)| j < 0)
    }

    /// Drops coefficients below `tol` in magnitude.
    pub fn pruned(&self, tol: T) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    pub fn eval(&self, p: T, q: T) -> T {
        self.coeffs
            .iter()
            .map(|(&(i, j), &c)| c * p.powi(i as i32) * q.powi(j))
            .sum()
    }

    /// `(∂/∂p, ∂/∂q)`.
    pub fn gradient(&self, p: T, q: T) -> (T, T) {
        let mut dp = T::zero();
        let mut dq = T::zero();
        for (&(i, j), &c) in &self.coeffs {
            if i > 0 {
                dp += c * T::from_u32(i).unwrap() * p.powi(i as i32 - 1) * q.powi(j);
            }
            if j != 0 {
                dq += c * T::from_i32(j).unwrap() * p.powi(i as i32) * q.powi(j - 1);
            }
        }
        (dp, dq)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.add_term(c, k.0, k.1);
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, *c * s)).collect(),
        }
    }
}

/// Which coherent-state family produced a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Canonical,
    Affine,
    /// Written down directly rather than derived from an operator.
    Classical,
}

/// Enhanced classical Hamiltonian `H(p, q)`.
#[derive(Debug, Clone)]
pub struct SymbolFn<T: Real> {
    poly: PhasePoly<T>,
    hbar: T,
    provenance: Provenance,
    closed_form: bool,
    imag_residue: T,
    hermitian: bool,
}

impl<T: Real> SymbolFn<T> {
    /// Symbol given directly as a Laurent polynomial (e.g. `qp² + C/q`).
    pub fn classical(poly: PhasePoly<T>, hbar: T) -> Self {
        Self {
            poly,
            hbar,
            provenance: Provenance::Classical,
            closed_form: true,
            imag_residue: T::zero(),
            hermitian: true,
        }
    }

    /// Model One family `q p² + C q⁻¹`.
    pub fn model_one(c: T, hbar: T) -> Self {
        Self::classical(PhasePoly::from_terms(&[(T::one(), 2, 1), (c, 0, -1)]), hbar)
    }

    /// Harmonic family `½(p² + ω² q²) + shift`.
    pub fn harmonic(omega: T, shift: T, hbar: T) -> Self {
        let half = T::lit(0.5);
        Self::classical(
            PhasePoly::from_terms(&[(half, 2, 0), (half * omega * omega, 0, 2), (shift, 0, 0)]),
            hbar,
        )
    }

    pub fn value(&self, p: T, q: T) -> T {
        self.poly.eval(p, q)
    }

    /// `(∂H/∂p, ∂H/∂q)`: analytic for closed-form symbols, central
    /// differences with step `(1 + |p| + |q|)·10⁻⁵` otherwise.
    pub fn gradient(&self, p: T, q: T) -> (T, T) {
        if self.closed_form {
            self.poly.gradient(p, q)
        } else {
            self.numeric_gradient(p, q)
        }
    }

    pub fn numeric_gradient(&self, p: T, q: T) -> (T, T) {
        let h = (T::one() + p.abs() + q.abs()) * T::lit(1e-5);
        let two_h = h + h;
        (
            (self.value(p + h, q) - self.value(p - h, q)) / two_h,
            (self.value(p, q + h) - self.value(p, q - h)) / two_h,
        )
    }

    pub fn poly(&self) -> &PhasePoly<T> {
        &self.poly
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }

    /// Largest discarded imaginary coefficient.
    pub fn imag_residue(&self) -> T {
        self.imag_residue
    }

    /// Whether the source operator equals its formal adjoint.
    pub fn source_is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Symbols with `q⁻¹` terms live on `q > 0`.
    pub fn requires_positive_q(&self) -> bool {
        self.provenance == Provenance::Affine || self.poly.has_negative_q_power()
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Self {
            poly: self.poly.scaled(a).add(&other.poly.scaled(b)),
            hbar: self.hbar,
            provenance: self.provenance,
            closed_form: self.closed_form && other.closed_form,
            imag_residue: self.imag_residue.max(other.imag_residue),
            hermitian: self.hermitian && other.hermitian,
        }
    }
}

/// How a weak symbol is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolMethod {
    /// Closed form when the fiducial is analytic and the operator is within
    /// the closed-form degree limit, quadrature otherwise.
    Auto,
    Quadrature,
}

/// `H(p,q) = ∫ η*(x) 𝓗(p − iħ∂, q + x) η(x) dx`.
pub fn weak_symbol_canonical<T: Real>(op: &OperatorExpr<T>, f: &Fiducial<T>) -> Result<SymbolFn<T>> {
    weak_symbol_canonical_with(op, f, SymbolMethod::Auto)
}

pub fn weak_symbol_canonical_with<T: Real>(
    op: &OperatorExpr<T>,
    f: &Fiducial<T>,
    method: SymbolMethod,
) -> Result<SymbolFn<T>> {
    match f.kind() {
        FiducialKind::GaussianCanonical { omega } => {
            if method == SymbolMethod::Auto && within_closed_form(op) {
                let space = AnalyticSpace::gaussian(*omega, f.hbar());
                finish(op, expand(&space, op.terms(), Transport::Canonical)?, f.hbar(), Provenance::Canonical, true)
            } else {
                // Repeated five-point derivatives need a finer mesh than the states do.
                let sigma = f.width();
                let l = lit::<T>(12.0) * sigma;
                let grid = Grid::full_line(-l, l, 9601)?;
                let samples: Vec<Cplx<T>> = grid
                    .nodes()
                    .iter()
                    .map(|x| Cplx::new(f.value(*x).unwrap(), T::zero()))
                    .collect();
                quadrature_symbol(op, &grid, &samples, f.hbar(), Transport::Canonical)
            }
        }
        FiducialKind::Sampled(w) => {
            if !w.is_normalized(T::lit(crate::coherent::NORM_TOL)) {
                return Err(Error::Precondition("sampled fiducial is not normalised".into()));
            }
            let tol = T::lit(SAMPLED_CENTERING_TOL);
            let mean = w.mean_position();
            let mom = w.mean_momentum()?;
            if mean.abs() > tol || mom.abs() > tol {
                return Err(Error::Precondition(format!(
                    "sampled fiducial is not physically centred (<x> = {mean}, <p> = {mom})"
                )));
            }
            quadrature_symbol(op, w.grid(), w.values(), f.hbar(), Transport::Canonical)
        }
        FiducialKind::AffineBeta { .. } => Err(Error::Argument(
            "canonical symbol requested for an affine fiducial; use weak_symbol_affine".into(),
        )),
    }
}

/// `H(p,q) = ∫₀^∞ ξ*(x) 𝓗(p − iq⁻¹ħ∂, qx) ξ(x) dx`, defined for `q > 0`.
pub fn weak_symbol_affine<T: Real>(op: &OperatorExpr<T>, f: &Fiducial<T>) -> Result<SymbolFn<T>> {
    weak_symbol_affine_with(op, f, SymbolMethod::Auto)
}

pub fn weak_symbol_affine_with<T: Real>(
    op: &OperatorExpr<T>,
    f: &Fiducial<T>,
    method: SymbolMethod,
) -> Result<SymbolFn<T>> {
    let beta = match f.kind() {
        FiducialKind::AffineBeta { beta } => *beta,
        _ => return Err(Error::Argument("affine symbol needs an AffineBeta fiducial".into())),
    };
    if method == SymbolMethod::Auto && within_closed_form(op) {
        let space = AnalyticSpace::affine(beta, f.hbar());
        finish(op, expand(&space, op.terms(), Transport::Affine)?, f.hbar(), Provenance::Affine, true)
    } else {
        let a = beta / f.hbar();
        let upper = T::one() + lit::<T>(24.0) / a;
        let n = (((upper / lit::<T>(1e-12)).ln() / lit::<T>(1e-3)).to_usize().unwrap_or(40_001)) | 1;
        let grid = Grid::half_line_graded(lit(1e-12), upper, n)?;
        let samples: Vec<Cplx<T>> = grid
            .nodes()
            .iter()
            .map(|x| Cplx::new(f.value(*x).unwrap(), T::zero()))
            .collect();
        quadrature_symbol(op, &grid, &samples, f.hbar(), Transport::Affine)
    }
}

fn within_closed_form<T: Real>(op: &OperatorExpr<T>) -> bool {
    let (d, x) = op.degrees();
    d <= CLOSED_FORM_MAX_DEGREE && x <= CLOSED_FORM_MAX_DEGREE
}

/// Quadrature route, checked against the same rule on every other node.
fn quadrature_symbol<T: Real>(
    op: &OperatorExpr<T>,
    grid: &Grid<T>,
    fiducial: &[Cplx<T>],
    hbar: T,
    transport: Transport,
) -> Result<SymbolFn<T>> {
    let fine = expand(&GridSpace { grid, fiducial, hbar }, op.terms(), transport)?;
    let coarse_grid = grid.coarsened()?;
    let coarse_samples: Vec<Cplx<T>> = fiducial.iter().step_by(2).copied().collect();
    let coarse = expand(
        &GridSpace {
            grid: &coarse_grid,
            fiducial: &coarse_samples,
            hbar,
        },
        op.terms(),
        transport,
    )?;
    let tol = T::lit(QUADRATURE_CONVERGENCE_TOL);
    for (k, v) in &fine {
        let w = coarse.get(k).copied().unwrap_or(Cplx::new(T::zero(), T::zero()));
        if (*v - w).norm() > tol * (T::one() + v.norm()) {
            return Err(Error::Accuracy(format!(
                "quadrature symbol not converged for p^{} q^{}: {} (fine) vs {} (coarse)",
                k.0, k.1, v, w
            )));
        }
    }
    let provenance = match transport {
        Transport::Canonical => Provenance::Canonical,
        Transport::Affine => Provenance::Affine,
    };
    finish(op, fine, hbar, provenance, false)
}

fn finish<T: Real>(
    op: &OperatorExpr<T>,
    coeffs: BTreeMap<(u32, i32), Cplx<T>>,
    hbar: T,
    provenance: Provenance,
    closed_form: bool,
) -> Result<SymbolFn<T>> {
    let hermitian = op.is_hermitian();
    let mut poly = PhasePoly::new();
    let mut imag = T::zero();
    let scale = coeffs.values().map(|c| c.norm()).fold(T::one(), T::max);
    for ((i, j), c) in coeffs {
        imag = imag.max(c.im.abs());
        poly.add_term(c.re, i, j);
    }
    if hermitian && imag > T::lit(IMAG_TOL) * scale {
        return Err(Error::Accuracy(format!(
            "symbol of a Hermitian operator has imaginary residue {imag}"
        )));
    }
    // Closed-form coefficients that cancel exactly leave rounding dust.
    let poly = poly.pruned(T::epsilon() * T::lit(64.0) * scale);
    Ok(SymbolFn {
        poly,
        hbar,
        provenance,
        closed_form,
        imag_residue: imag,
        hermitian,
    })
}

/// `C = ħ² ∫₀^∞ x |ξ'(x)|² dx` by quadrature together with `ħβ̃/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantC<T> {
    pub quadrature: T,
    pub closed_form: T,
}

/// Relative agreement demanded between the two routes to `C`.
pub const C_AGREEMENT_TOL: f64 = 1e-8;

pub fn compute_c<T: Real>(f: &Fiducial<T>) -> Result<ConstantC<T>> {
    let (beta, hbar) = match f.kind() {
        FiducialKind::AffineBeta { beta } => (*beta, f.hbar()),
        _ => return Err(Error::Argument("C is defined for affine fiducials".into())),
    };
    let grid = f.affine_grid(&PhasePoint::affine(T::zero(), T::one())?)?;
    let xi: Vec<Cplx<T>> = grid
        .nodes()
        .iter()
        .map(|x| Cplx::new(f.value(*x).unwrap(), T::zero()))
        .collect();
    let d = crate::numerics::derivative_values(&grid, &xi, 1)?;
    let integrand: Vec<T> = grid.nodes().iter().zip(&d).map(|(x, v)| *x * v.norm_sqr()).collect();
    let quadrature = hbar * hbar * grid.integrate(&integrand);
    let closed_form = hbar * beta * T::lit(0.5);
    if ((quadrature - closed_form) / closed_form).abs() > T::lit(C_AGREEMENT_TOL) {
        return Err(Error::Accuracy(format!(
            "C by quadrature ({quadrature}) disagrees with hbar*beta/2 ({closed_form})"
        )));
    }
    Ok(ConstantC { quadrature, closed_form })
}

/// Residuals `|H_ħ(p,q) − 𝓗(p,q)|` over a sequence of ħ values.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport<T> {
    pub hbars: Vec<T>,
    pub residuals: Vec<T>,
    /// Least-squares slope of `ln residual` against `ln ħ`; `None` when
    /// every residual vanishes.
    pub exponent: Option<T>,
    /// Residuals never grow as ħ decreases.
    pub monotone: bool,
    /// Monotone and at least linear decay (exponent ≥ 0.95).
    pub passed: bool,
}

/// Residual floor below which a symbol counts as exact.
const EXACT_RESIDUAL: f64 = 1e-13;

pub fn hbar_limit_check<T: Real>(
    op: &OperatorExpr<T>,
    family: impl Fn(T) -> Result<Fiducial<T>>,
    classical: impl Fn(T, T) -> T,
    pt: &PhasePoint<T>,
    hbars: &[T],
) -> Result<LimitReport<T>> {
    let mut residuals = Vec::with_capacity(hbars.len());
    for &h in hbars {
        let f = family(h)?;
        let sym = if f.is_affine() {
            weak_symbol_affine(op, &f)?
        } else {
            weak_symbol_canonical(op, &f)?
        };
        residuals.push((sym.value(pt.p, pt.q) - classical(pt.p, pt.q)).abs());
    }
    let mut order: Vec<usize> = (0..hbars.len()).collect();
    order.sort_by(|a, b| hbars[*b].partial_cmp(&hbars[*a]).unwrap());
    let floor = T::lit(EXACT_RESIDUAL);
    let monotone = order
        .windows(2)
        .all(|w| residuals[w[1]] <= residuals[w[0]] * (T::one() + T::lit(1e-9)) + floor);
    let pts: Vec<(T, T)> = hbars
        .iter()
        .zip(&residuals)
        .filter(|(_, r)| **r > floor)
        .map(|(h, r)| (h.ln(), r.ln()))
        .collect();
    let exponent = if pts.len() >= 2 {
        let n = T::from_usize_lossy(pts.len());
        let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
        let my = pts.iter().map(|p| p.1).sum::<T>() / n;
        let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let all_exact = residuals.iter().all(|r| *r <= floor);
    let passed = monotone && (all_exact || exponent.map(|e| e >= T::lit(0.95)).unwrap_or(false));
    Ok(LimitReport {
        hbars: hbars.to_vec(),
        residuals,
        exponent,
        monotone,
        passed,
    })
}
