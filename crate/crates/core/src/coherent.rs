//! Fiducial vectors and the canonical / affine coherent-state families
//! transported from them.

use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{DomainKind, Grid, Spacing, WaveFunction};
use crate::scalar::{lit, phase, Real};

/// Normalisation / centering tolerance for analytic fiducials.
pub const NORM_TOL: f64 = 1e-10;
/// Centering tolerance used by [`verify_centering`].
pub const CENTERING_TOL: f64 = 1e-7;
/// Centering tolerance required of sampled fiducials before they are used
/// to build symbols.
pub const SAMPLED_CENTERING_TOL: f64 = 1e-6;

/// Fiducial mass allowed below the first node of a half-line grid.
const AFFINE_TAIL_TOL: f64 = 1e-12;

/// Lower end of the half-line window relative to `q`.
const AFFINE_LOWER_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum FiducialKind<T: Real> {
    /// `η(x) = (ω/πħ)^{1/4} e^{−ωx²/2ħ}`.
    GaussianCanonical { omega: T },
    /// `ξ(x) = M x^{β̃/ħ−1/2} e^{−β̃x/ħ}` on `x > 0`.
    AffineBeta { beta: T },
    /// Grid samples supplied by the caller.
    Sampled(WaveFunction<T>),
}

/// Basic normalised wave function from which a coherent-state family is
/// generated.
#[derive(Debug, Clone)]
pub struct Fiducial<T: Real> {
    kind: FiducialKind<T>,
    hbar: T,
}

impl<T: Real> Fiducial<T> {
    pub fn gaussian(omega: T, hbar: T) -> Result<Self> {
        if !(omega > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::Argument(format!(
                "Gaussian fiducial needs omega > 0 and hbar > 0 (got {omega}, {hbar})"
            )));
        }
        Ok(Self {
            kind: FiducialKind::GaussianCanonical { omega },
            hbar,
        })
    }

    /// Affine fiducial; requires `β̃/ħ ≥ 1` so that `x^{β̃/ħ−1/2}` stays
    /// bounded with an integrable derivative at the origin.
    pub fn affine_beta(beta: T, hbar: T) -> Result<Self> {
        if !(beta > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::Argument(format!(
                "affine fiducial needs beta > 0 and hbar > 0 (got {beta}, {hbar})"
            )));
        }
        if beta / hbar < T::one() {
            return Err(Error::Domain(format!(
                "affine fiducial requires beta/hbar >= 1 (got {})",
                beta / hbar
            )));
        }
        Ok(Self {
            kind: FiducialKind::AffineBeta { beta },
            hbar,
        })
    }

    /// Wraps sampled values. The samples must be normalised; centering is
    /// reported by [`verify_centering`] but never corrected.
    pub fn sampled(wave: WaveFunction<T>) -> Result<Self> {
        if !wave.is_normalized(T::lit(NORM_TOL)) {
            return Err(Error::Precondition(format!(
                "sampled fiducial must be normalised (norm² = {})",
                wave.norm_sqr()
            )));
        }
        let hbar = wave.hbar();
        Ok(Self {
            kind: FiducialKind::Sampled(wave),
            hbar,
        })
    }

    pub fn kind(&self) -> &FiducialKind<T> {
        &self.kind
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, FiducialKind::AffineBeta { .. })
    }

    /// `β̃/ħ` for affine fiducials.
    pub fn affine_ratio(&self) -> Option<T> {
        match self.kind {
            FiducialKind::AffineBeta { beta } => Some(beta / self.hbar),
            _ => None,
        }
    }

    /// `ln M` of the affine normalisation, `M² = s^s / Γ(s)` with `s = 2β̃/ħ`.
    fn affine_ln_norm(&self) -> Option<T> {
        self.affine_ratio().map(|a| {
            let s = (a + a).to_f64_lossy();
            T::lit(0.5 * (s * s.ln() - ln_gamma(s)))
        })
    }

    /// Upper bound `M² y^{s}/s` on `∫₀^y ξ²`, dropping the exponential.
    fn affine_mass_below(&self, y: T) -> T {
        match (self.affine_ratio(), self.affine_ln_norm()) {
            (Some(a), Some(ln_m)) if y > T::zero() => {
                let s = a + a;
                (ln_m + ln_m + s * y.ln() - s.ln()).exp()
            }
            _ => T::zero(),
        }
    }

    /// Analytic value of the fiducial at `x`; `None` for sampled fiducials.
    pub fn value(&self, x: T) -> Option<T> {
        match &self.kind {
            FiducialKind::GaussianCanonical { omega } => {
                let w = *omega;
                let pi = T::PI();
                Some((w / (pi * self.hbar)).powf(lit(0.25)) * (-w * x * x / (lit::<T>(2.0) * self.hbar)).exp())
            }
            FiducialKind::AffineBeta { .. } => {
                if x <= T::zero() {
                    return Some(T::zero());
                }
                let a = self.affine_ratio().unwrap();
                let ln_m = self.affine_ln_norm().unwrap();
                Some((ln_m + (a - lit(0.5)) * x.ln() - a * x).exp())
            }
            FiducialKind::Sampled(_) => None,
        }
    }

    /// Amplitude width: `√(ħ/ω)` for the Gaussian, `√2·σ_x` for samples,
    /// `1/√(2β̃/ħ)` (the standard deviation of `x` under `|ξ|²`) for affine.
    pub fn width(&self) -> T {
        match &self.kind {
            FiducialKind::GaussianCanonical { omega } => (self.hbar / *omega).sqrt(),
            FiducialKind::AffineBeta { .. } => {
                let a = self.affine_ratio().unwrap();
                (a + a).sqrt().recip()
            }
            FiducialKind::Sampled(w) => w.position_spread() * lit::<T>(2.0).sqrt(),
        }
    }

    /// Default full-line grid for `η_{p,q}`: window `[−L, L]` with
    /// `L = max(10σ, |q| + 10σ)`, spacing resolving both the envelope and
    /// the `e^{ipx/ħ}` carrier.
    pub fn canonical_grid(&self, pt: &PhasePoint<T>) -> Result<Arc<Grid<T>>> {
        let sigma = self.width();
        let ten = lit::<T>(10.0);
        let l = (ten * sigma).max(pt.q.abs() + ten * sigma);
        let k = pt.p.abs() / self.hbar + sigma.recip();
        let h = (lit::<T>(50.0) * k).recip();
        let n = ((l + l) / h).ceil().to_usize().unwrap_or(usize::MAX);
        let n = (n | 1).clamp(201, 400_001);
        Ok(Arc::new(Grid::full_line(-l, l, n)?))
    }

    /// Default graded half-line grid for `ξ_{p,q}`: `[q·10⁻¹², q(1 + 20ħ/β̃)]`.
    pub fn affine_grid(&self, pt: &PhasePoint<T>) -> Result<Arc<Grid<T>>> {
        affine_grid_for(self, pt.q, pt.q, pt.p.abs())
    }
}

/// Graded half-line grid covering affine coherent states with dilation
/// labels in `[q_min, q_max]` and momenta up to `p_max`.
pub fn affine_grid_for<T: Real>(
    f: &Fiducial<T>,
    q_min: T,
    q_max: T,
    p_max: T,
) -> Result<Arc<Grid<T>>> {
    let a = f
        .affine_ratio()
        .ok_or_else(|| Error::Argument("affine grid requested for a non-affine fiducial".into()))?;
    if !(q_min > T::zero()) || q_max < q_min {
        return Err(Error::Domain(format!("affine grid needs 0 < q_min <= q_max (got {q_min}, {q_max})")));
    }
    let lower = q_min * lit(AFFINE_LOWER_FRACTION);
    let upper = q_max * (T::one() + lit::<T>(20.0) / a);
    let bulk = lit::<T>(5.0) * q_max;
    let step = lit::<T>(0.01) / (T::one() + a + p_max * bulk / f.hbar());
    let n = ((upper / lower).ln() / step).ceil().to_usize().unwrap_or(usize::MAX);
    let n = n.clamp(401, 1_000_001);
    Ok(Arc::new(Grid::half_line_graded(lower, upper, n)?))
}

/// Which family a phase point labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDomain {
    /// `q ∈ ℝ`.
    Canonical,
    /// `q > 0`.
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T: Real> {
    pub p: T,
    pub q: T,
    pub domain: PhaseDomain,
}

impl<T: Real> PhasePoint<T> {
    pub fn canonical(p: T, q: T) -> Self {
        Self {
            p,
            q,
            domain: PhaseDomain::Canonical,
        }
    }

    pub fn affine(p: T, q: T) -> Result<Self> {
        if !(q > T::zero()) {
            return Err(Error::Domain(format!("affine phase points need q > 0 (got {q})")));
        }
        Ok(Self {
            p,
            q,
            domain: PhaseDomain::Affine,
        })
    }
}

/// `η_{p,q}(x) = e^{ip(x−q)/ħ} η(x−q)` on the fiducial's default grid.
/// Sampled fiducials are transported onto their own grid shifted by `q`.
pub fn canonical_coherent<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<WaveFunction<T>> {
    match f.kind() {
        FiducialKind::Sampled(w) => {
            let g = w.grid();
            let shifted = match g.spacing() {
                Spacing::Uniform if g.kind() == DomainKind::FullLine => {
                    Grid::full_line(g.lower() + pt.q, g.upper() + pt.q, g.len())?
                }
                _ => Grid::from_parts(
                    DomainKind::FullLine,
                    g.nodes().iter().map(|x| *x + pt.q).collect(),
                    g.weights().to_vec(),
                )?,
            };
            let hbar = f.hbar();
            let values = g
                .nodes()
                .iter()
                .zip(w.values())
                .map(|(x, v)| *v * phase(pt.p * *x / hbar))
                .collect();
            WaveFunction::new(Arc::new(shifted), values, hbar)
        }
        FiducialKind::GaussianCanonical { .. } => {
            let grid = f.canonical_grid(pt)?;
            canonical_coherent_on(f, pt, grid)
        }
        FiducialKind::AffineBeta { .. } => Err(Error::Argument(
            "canonical coherent states need a canonical (Gaussian or sampled) fiducial".into(),
        )),
    }
}

/// `η_{p,q}` sampled on a caller-supplied grid, which must contain
/// `[q − 8σ, q + 8σ]`.
pub fn canonical_coherent_on<T: Real>(
    f: &Fiducial<T>,
    pt: &PhasePoint<T>,
    grid: Arc<Grid<T>>,
) -> Result<WaveFunction<T>> {
    if !matches!(f.kind(), FiducialKind::GaussianCanonical { .. }) {
        return Err(Error::Argument(
            "only analytic canonical fiducials can be sampled on an arbitrary grid".into(),
        ));
    }
    let span = lit::<T>(8.0) * f.width();
    if !grid.covers(pt.q - span, pt.q + span) {
        return Err(Error::Coverage(format!(
            "grid [{}, {}] does not contain [q - 8σ, q + 8σ] = [{}, {}]",
            grid.lower(),
            grid.upper(),
            pt.q - span,
            pt.q + span
        )));
    }
    let hbar = f.hbar();
    WaveFunction::from_fn(grid, hbar, |x| {
        let y = x - pt.q;
        phase(pt.p * y / hbar) * f.value(y).unwrap()
    })
}

/// `ξ_{p,q}(x) = q^{−1/2} e^{ip(x−q)/ħ} ξ(x/q)` on the default graded grid.
/// The phase `e^{−ipq/ħ}` is kept as part of the definition.
pub fn affine_coherent<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<WaveFunction<T>> {
    check_affine(f, pt)?;
    let grid = f.affine_grid(pt)?;
    affine_coherent_on(f, pt, grid)
}

pub fn affine_coherent_on<T: Real>(
    f: &Fiducial<T>,
    pt: &PhasePoint<T>,
    grid: Arc<Grid<T>>,
) -> Result<WaveFunction<T>> {
    check_affine(f, pt)?;
    let a = f.affine_ratio().unwrap();
    let need_hi = pt.q * (T::one() + lit::<T>(16.0) / a);
    let need_lo = pt.q * lit(1e-5);
    let low_ok = grid.lower() <= need_lo || f.affine_mass_below(grid.lower() / pt.q) <= lit(AFFINE_TAIL_TOL);
    if grid.kind() != DomainKind::HalfLine || !low_ok || grid.upper() < need_hi {
        return Err(Error::Coverage(format!(
            "half-line grid [{}, {}] does not contain [{}, {}]",
            grid.lower(),
            grid.upper(),
            need_lo,
            need_hi
        )));
    }
    let hbar = f.hbar();
    let scale = pt.q.sqrt().recip();
    WaveFunction::from_fn(grid, hbar, |x| {
        phase(pt.p * (x - pt.q) / hbar) * (scale * f.value(x / pt.q).unwrap())
    })
}

fn check_affine<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<()> {
    if !f.is_affine() {
        return Err(Error::Argument("affine coherent states need an AffineBeta fiducial".into()));
    }
    if !(pt.q > T::zero()) {
        return Err(Error::Domain(format!("affine coherent states need q > 0 (got {})", pt.q)));
    }
    Ok(())
}

/// Coherent state of the family that matches the fiducial.
pub fn coherent_state<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<WaveFunction<T>> {
    if f.is_affine() {
        affine_coherent(f, pt)
    } else {
        canonical_coherent(f, pt)
    }
}

/// Moments that give the labels `(p, q)` their physical meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringReport<T> {
    /// `⟨x⟩`; target 0 (canonical) or 1 (affine).
    pub mean_position: T,
    /// `⟨−iħ∂⟩` for canonical fiducials.
    pub mean_momentum: Option<T>,
    /// Dilation moment for affine fiducials.
    pub dilation_moment: Option<T>,
    pub tolerance: T,
    pub passed: bool,
}

/// Reports whether the fiducial is physically centred. Never fails for a
/// valid fiducial; failures are carried in the report.
pub fn verify_centering<T: Real>(f: &Fiducial<T>) -> Result<CenteringReport<T>> {
    let tol = T::lit(CENTERING_TOL);
    match f.kind() {
        FiducialKind::AffineBeta { .. } => {
            let pt = PhasePoint::affine(T::zero(), T::one())?;
            let xi = affine_coherent(f, &pt)?;
            let mean = xi.mean_position();
            let dil = xi.mean_dilation()?;
            Ok(CenteringReport {
                mean_position: mean,
                mean_momentum: None,
                dilation_moment: Some(dil),
                tolerance: tol,
                passed: (mean - T::one()).abs() <= tol && dil.abs() <= tol,
            })
        }
        _ => {
            let w = match f.kind() {
                FiducialKind::Sampled(w) => w.clone(),
                _ => canonical_coherent(f, &PhasePoint::canonical(T::zero(), T::zero()))?,
            };
            let mean = w.mean_position();
            let mom = w.mean_momentum()?;
            Ok(CenteringReport {
                mean_position: mean,
                mean_momentum: Some(mom),
                dilation_moment: None,
                tolerance: tol,
                passed: mean.abs() <= tol && mom.abs() <= tol,
            })
        }
    }
}

/// Measured labels of a transported state: `(⟨−iħ∂⟩, ⟨x⟩)` for canonical
/// states, `(dilation/⟨x⟩, ⟨x⟩)` for affine ones.
pub fn measured_labels<T: Real>(psi: &WaveFunction<T>, affine: bool) -> Result<(T, T)> {
    let q = psi.mean_position();
    if affine {
        Ok((psi.mean_dilation()? / q, q))
    } else {
        Ok((psi.mean_momentum()?, q))
    }
}
