//! Ray distance, Fubini–Study metric and scalar curvature of coherent-state
//! sheets.

use std::sync::Arc;

use crate::coherent::{
    affine_coherent_on, affine_grid_for, canonical_coherent_on, Fiducial, FiducialKind, PhaseDomain, PhasePoint,
};
use crate::error::{Error, Result};
use crate::numerics::{Grid, WaveFunction};
use crate::scalar::{lit, Cplx, Real};

/// Normalisation tolerance for [`ray_distance`] inputs.
pub const RAY_NORM_TOL: f64 = 1e-8;
/// Agreement required between successive Richardson estimates.
pub const METRIC_CONVERGENCE_TOL: f64 = 1e-5;
/// Curvature stencil step in units of the local metric length.
pub const CURVATURE_STEP: f64 = 1e-2;

/// Symmetric 2×2 metric at a phase point, coordinates ordered `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor<T> {
    pub g_pp: T,
    pub g_pq: T,
    pub g_qq: T,
}

impl<T: Real> MetricTensor<T> {
    pub fn new(g_pp: T, g_pq: T, g_qq: T) -> Self {
        Self { g_pp, g_pq, g_qq }
    }

    pub fn det(&self) -> T {
        self.g_pp * self.g_qq - self.g_pq * self.g_pq
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g_pp > T::zero() && self.det() > T::zero()
    }

    /// `g_pp dp² + 2 g_pq dp dq + g_qq dq²`.
    pub fn quadratic_form(&self, dp: T, dq: T) -> T {
        self.g_pp * dp * dp + lit::<T>(2.0) * self.g_pq * dp * dq + self.g_qq * dq * dq
    }

    fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Self::new(
            a * self.g_pp + b * other.g_pp,
            a * self.g_pq + b * other.g_pq,
            a * self.g_qq + b * other.g_qq,
        )
    }

    fn max_abs_diff(&self, other: &Self) -> T {
        (self.g_pp - other.g_pp)
            .abs()
            .max((self.g_pq - other.g_pq).abs())
            .max((self.g_qq - other.g_qq).abs())
    }

    fn scale(&self) -> T {
        self.g_pp.abs().max(self.g_pq.abs()).max(self.g_qq.abs())
    }
}

/// Squared ray distance together with the phase that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayDistance<T> {
    /// `4ħ(1 − |⟨ψ₁|ψ₂⟩|)`.
    pub d2: T,
    /// Minimiser of `∫|ψ₁ − e^{iα}ψ₂|²`, i.e. `−arg⟨ψ₁|ψ₂⟩`.
    pub alpha: T,
    pub overlap: Cplx<T>,
}

/// `d² = 2ħ min_α ∫|ψ₁ − e^{iα}ψ₂|² dx` in closed form.
pub fn ray_distance<T: Real>(psi1: &WaveFunction<T>, psi2: &WaveFunction<T>) -> Result<RayDistance<T>> {
    let tol = lit::<T>(RAY_NORM_TOL);
    for (name, w) in [("first", psi1), ("second", psi2)] {
        if !w.is_normalized(tol) {
            return Err(Error::Precondition(format!(
                "{name} state is not normalised (|psi|^2 = {})",
                w.norm_sqr()
            )));
        }
    }
    let overlap = psi1.inner_product(psi2)?;
    let hbar = psi1.hbar();
    // Dividing by the quadrature norms makes identical rays exactly zero.
    let fidelity = overlap.norm() / (psi1.norm_sqr() * psi2.norm_sqr()).sqrt();
    let d2 = (lit::<T>(4.0) * hbar * (T::one() - fidelity)).max(T::zero());
    Ok(RayDistance {
        d2,
        alpha: -overlap.arg(),
        overlap,
    })
}

fn metric_at_step<T: Real>(
    family: &impl Fn(T, T) -> Result<WaveFunction<T>>,
    p: T,
    q: T,
    h: T,
    hbar: T,
) -> Result<MetricTensor<T>> {
    let psi = family(p, q)?;
    let two_h = h + h;
    let tangent = |a: WaveFunction<T>, b: WaveFunction<T>| -> Result<WaveFunction<T>> {
        if !a.same_grid(&psi) || !b.same_grid(&psi) {
            return Err(Error::Structural("family must sample every state on one grid".into()));
        }
        let vals = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (*x - *y) / two_h)
            .collect();
        psi.with_values(vals)
    };
    let dp = tangent(family(p + h, q)?, family(p - h, q)?)?;
    let dq = tangent(family(p, q + h)?, family(p, q - h)?)?;
    let ap = psi.inner_unchecked(dp.values());
    let aq = psi.inner_unchecked(dq.values());
    let entry = |u: &WaveFunction<T>, v: &WaveFunction<T>, au: Cplx<T>, av: Cplx<T>| {
        let g = u.inner_unchecked(v.values()) - au.conj() * av;
        lit::<T>(2.0) * hbar * g.re
    };
    Ok(MetricTensor::new(
        entry(&dp, &dp, ap, ap),
        entry(&dp, &dq, ap, aq),
        entry(&dq, &dq, aq, aq),
    ))
}

/// Default differentiation step `10⁻⁴(1 + |p| + |q|)`.
pub fn default_metric_step<T: Real>(pt: &PhasePoint<T>) -> T {
    lit::<T>(1e-4) * (T::one() + pt.p.abs() + pt.q.abs())
}

/// `dσ² = 2ħ[⟨dψ|dψ⟩ − |⟨ψ|dψ⟩|²]` from central-difference tangents.
///
/// The metric is formed at steps `h`, `h/2`, `h/4`; the two Richardson
/// estimates must agree to [`METRIC_CONVERGENCE_TOL`] (relative).
pub fn fs_metric<T: Real>(
    family: impl Fn(T, T) -> Result<WaveFunction<T>>,
    pt: &PhasePoint<T>,
    step: T,
    hbar: T,
) -> Result<MetricTensor<T>> {
    if !(step > T::zero()) {
        return Err(Error::Argument(format!("metric step must be positive (got {step})")));
    }
    if pt.domain == PhaseDomain::Affine && pt.q - step <= T::zero() {
        return Err(Error::Domain(format!("metric stencil leaves q > 0 at q = {}", pt.q)));
    }
    let half = lit::<T>(0.5);
    let g1 = metric_at_step(&family, pt.p, pt.q, step, hbar)?;
    let g2 = metric_at_step(&family, pt.p, pt.q, step * half, hbar)?;
    let g4 = metric_at_step(&family, pt.p, pt.q, step * half * half, hbar)?;
    let third = lit::<T>(1.0 / 3.0);
    let r1 = g2.combine(lit::<T>(4.0) * third, &g1, -third);
    let r2 = g4.combine(lit::<T>(4.0) * third, &g2, -third);
    let diff = r1.max_abs_diff(&r2);
    if !(diff <= lit::<T>(METRIC_CONVERGENCE_TOL) * (T::one() + r2.scale())) {
        return Err(Error::Accuracy(format!(
            "metric extrapolation did not converge at ({}, {}): successive estimates differ by {diff}",
            pt.p, pt.q
        )));
    }
    Ok(r2)
}

/// Scalar curvature `R = 2K` of a 2-D metric field by the Brioschi formula,
/// with fourth-order differences on a 5×5 stencil.
pub fn scalar_curvature<T: Real>(
    metric: impl Fn(T, T) -> Result<MetricTensor<T>>,
    pt: &PhasePoint<T>,
) -> Result<T> {
    let g0 = metric(pt.p, pt.q)?;
    if !g0.is_positive_definite() {
        return Err(Error::Domain(format!("metric is not positive definite at ({}, {})", pt.p, pt.q)));
    }
    let c = lit::<T>(CURVATURE_STEP);
    let hu = c / g0.g_pp.sqrt();
    let hv = c / g0.g_qq.sqrt();
    let two = lit::<T>(2.0);
    if pt.domain == PhaseDomain::Affine && pt.q - two * hv <= T::zero() {
        return Err(Error::Domain(format!("curvature stencil leaves q > 0 at q = {}", pt.q)));
    }
    let mut grid = [[g0; 5]; 5];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let du = T::from_usize_lossy(i) - two;
            let dv = T::from_usize_lossy(j) - two;
            if i != 2 || j != 2 {
                *cell = metric(pt.p + du * hu, pt.q + dv * hv)?;
            }
        }
    }
    // First and second derivative weights for offsets −2..2.
    let w1 = [1.0, -8.0, 0.0, 8.0, -1.0].map(|w| lit::<T>(w / 12.0));
    let w2 = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|w| lit::<T>(w / 12.0));
    let comp = |g: &MetricTensor<T>, k: usize| match k {
        0 => g.g_pp,
        1 => g.g_pq,
        _ => g.g_qq,
    };
    let du = |k: usize, w: &[T; 5]| (0..5).fold(T::zero(), |a, i| a + w[i] * comp(&grid[i][2], k));
    let dv = |k: usize, w: &[T; 5]| (0..5).fold(T::zero(), |a, j| a + w[j] * comp(&grid[2][j], k));
    let duv = |k: usize| {
        let mut a = T::zero();
        for i in 0..5 {
            for j in 0..5 {
                a += w1[i] * w1[j] * comp(&grid[i][j], k);
            }
        }
        a / (hu * hv)
    };
    let (e, f, g) = (g0.g_pp, g0.g_pq, g0.g_qq);
    let (e_u, e_v) = (du(0, &w1) / hu, dv(0, &w1) / hv);
    let (f_u, f_v) = (du(1, &w1) / hu, dv(1, &w1) / hv);
    let (g_u, g_v) = (du(2, &w1) / hu, dv(2, &w1) / hv);
    let e_vv = dv(0, &w2) / (hv * hv);
    let g_uu = du(2, &w2) / (hu * hu);
    let f_uv = duv(1);
    let half = lit::<T>(0.5);

    let det3 = |m: [[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = det3([
        [-half * e_vv + f_uv - half * g_uu, half * e_u, f_u - half * e_v],
        [f_v - half * g_u, e, f],
        [half * g_v, f, g],
    ]);
    let b = det3([
        [T::zero(), half * e_v, half * g_u],
        [half * e_v, e, f],
        [half * g_u, f, g],
    ]);
    let det = e * g - f * f;
    let k = (a - b) / (det * det);
    if !k.is_finite() {
        return Err(Error::Numeric(format!("curvature is not finite at ({}, {})", pt.p, pt.q)));
    }
    Ok(two * k)
}

/// A coherent-state family sampled on one fixed grid, so that states at
/// neighbouring labels can be differenced.
#[derive(Debug, Clone)]
pub struct CoherentSheet<T: Real> {
    fiducial: Fiducial<T>,
    grid: Arc<Grid<T>>,
    domain: PhaseDomain,
}

impl<T: Real> CoherentSheet<T> {
    /// Sheet whose grid covers every state used by the metric and curvature
    /// stencils around `pt`.
    pub fn around(fiducial: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<Self> {
        let (grid, domain) = match fiducial.kind() {
            FiducialKind::GaussianCanonical { .. } => {
                let reach = PhasePoint::canonical(pt.p.abs() + T::one(), pt.q.abs() + T::one());
                (fiducial.canonical_grid(&reach)?, PhaseDomain::Canonical)
            }
            FiducialKind::AffineBeta { .. } => {
                if !(pt.q > T::zero()) {
                    return Err(Error::Domain(format!("affine sheet needs q > 0 (got {})", pt.q)));
                }
                let half = lit::<T>(0.5);
                let p_max = pt.p.abs() + lit::<T>(0.1) * (T::one() + pt.p.abs());
                let grid = affine_grid_for(fiducial, pt.q * half, pt.q * lit(1.5), p_max)?;
                (grid, PhaseDomain::Affine)
            }
            FiducialKind::Sampled(_) => {
                return Err(Error::Argument("coherent sheets need an analytic fiducial".into()));
            }
        };
        Ok(Self {
            fiducial: fiducial.clone(),
            grid,
            domain,
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn domain(&self) -> PhaseDomain {
        self.domain
    }

    pub fn point(&self, p: T, q: T) -> Result<PhasePoint<T>> {
        match self.domain {
            PhaseDomain::Canonical => Ok(PhasePoint::canonical(p, q)),
            PhaseDomain::Affine => PhasePoint::affine(p, q),
        }
    }

    pub fn state(&self, p: T, q: T) -> Result<WaveFunction<T>> {
        let pt = self.point(p, q)?;
        match self.domain {
            PhaseDomain::Canonical => canonical_coherent_on(&self.fiducial, &pt, self.grid.clone()),
            PhaseDomain::Affine => affine_coherent_on(&self.fiducial, &pt, self.grid.clone()),
        }
    }

    pub fn metric(&self, p: T, q: T) -> Result<MetricTensor<T>> {
        let pt = self.point(p, q)?;
        self.metric_with_step(&pt, default_metric_step(&pt))
    }

    pub fn metric_with_step(&self, pt: &PhasePoint<T>, step: T) -> Result<MetricTensor<T>> {
        fs_metric(|p, q| self.state(p, q), pt, step, self.fiducial.hbar())
    }

    pub fn curvature(&self, p: T, q: T) -> Result<T> {
        let pt = self.point(p, q)?;
        scalar_curvature(|p, q| self.metric(p, q), &pt)
    }
}

/// Metric of the canonical Gaussian sheet at `pt`.
pub fn canonical_metric<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<MetricTensor<T>> {
    CoherentSheet::around(f, pt)?.metric(pt.p, pt.q)
}

/// Metric of the affine sheet at `pt`.
pub fn affine_metric<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<MetricTensor<T>> {
    CoherentSheet::around(f, pt)?.metric(pt.p, pt.q)
}

/// Scalar curvature of the sheet generated by `f` at `pt`.
pub fn sheet_curvature<T: Real>(f: &Fiducial<T>, pt: &PhasePoint<T>) -> Result<T> {
    CoherentSheet::around(f, pt)?.curvature(pt.p, pt.q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brioschi_on_closed_form_fields() {
        let flat = |_: f64, _: f64| Ok(MetricTensor::new(0.5, 0.0, 2.0));
        let r = scalar_curvature(flat, &PhasePoint::canonical(0.3, -1.0)).unwrap();
        assert!(r.abs() < 1e-10);
        for beta in [1.0, 4.0] {
            let hyp = move |_: f64, q: f64| Ok(MetricTensor::new(q * q / beta, 0.0, beta / (q * q)));
            for q in [0.5, 1.0, 4.0] {
                let r = scalar_curvature(hyp, &PhasePoint::affine(0.2, q).unwrap()).unwrap();
                assert!((r + 2.0 / beta).abs() < 1e-6, "{beta} {q} {r}");
            }
        }
        // round sphere of radius 3 in (θ, φ) coordinates: R = 2/9
        let sphere = |_: f64, th: f64| Ok(MetricTensor::new(9.0 * th.sin().powi(2), 0.0, 9.0));
        let r = scalar_curvature(sphere, &PhasePoint::canonical(0.0, 1.0)).unwrap();
        assert!((r - 2.0 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn brioschi_handles_off_diagonal_terms() {
        // flat metric in sheared coordinates u' = u + v: still R = 0
        let sheared = |_: f64, _: f64| Ok(MetricTensor::new(1.0, 1.0, 2.0));
        assert!(scalar_curvature(sheared, &PhasePoint::canonical(0.0, 0.0)).unwrap().abs() < 1e-10);
        // hyperbolic metric pulled back through p = u + v, q = v (q > 0):
        // E = q², F = q², G = q² + 1/q²
        let skew = |_: f64, v: f64| Ok(MetricTensor::new(v * v, v * v, v * v + 1.0 / (v * v)));
        let r = scalar_curvature(skew, &PhasePoint::affine(0.0, 1.5).unwrap()).unwrap();
        assert!((r + 2.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn curvature_stencil_must_stay_in_domain() {
        let flat = |_: f64, _: f64| Ok(MetricTensor::new(1.0, 0.0, 1.0));
        let err = scalar_curvature(flat, &PhasePoint::affine(0.0, 1e-3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
