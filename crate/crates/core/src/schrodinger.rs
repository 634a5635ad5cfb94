//! Crank–Nicolson evolution of `iħ∂ψ/∂t = 𝓗ψ` on uniform grids, used to
//! benchmark the restricted dynamics against the full quantum motion.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::coherent::Fiducial;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::{DomainKind, Grid, Spacing, Tridiagonal, WaveFunction};
use crate::scalar::{cplx, lit, Cplx, Real};
use crate::symbols::{Factor, OperatorExpr};

/// Largest relative residual accepted from a tridiagonal solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// Where the wave function is pinned to zero. Both variants also vanish one
/// node past the upper end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// One node beyond each end of a full-line window.
    DirichletBoth,
    /// `ψ(0) = 0` on the half line.
    DirichletAtZero,
}

/// A negative `dt` runs the evolution backwards in time.
#[derive(Debug, Clone)]
pub struct EvolutionSetup<T: Real> {
    pub hamiltonian: OperatorExpr<T>,
    pub grid: Arc<Grid<T>>,
    pub boundary: Boundary,
    pub dt: T,
    pub steps: usize,
    pub hbar: T,
}

impl<T: Real> EvolutionSetup<T> {
    pub fn new(
        hamiltonian: OperatorExpr<T>,
        grid: Arc<Grid<T>>,
        boundary: Boundary,
        dt: T,
        steps: usize,
        hbar: T,
    ) -> Result<Self> {
        if grid.spacing() != Spacing::Uniform {
            return Err(Error::Argument("Crank–Nicolson needs a uniform grid".into()));
        }
        match (boundary, grid.kind()) {
            (Boundary::DirichletBoth, DomainKind::FullLine) | (Boundary::DirichletAtZero, DomainKind::HalfLine) => {}
            _ => {
                return Err(Error::Argument(format!(
                    "boundary {boundary:?} does not match a {:?} grid",
                    grid.kind()
                )))
            }
        }
        if dt == T::zero() || !dt.is_finite() || steps == 0 || !(hbar > T::zero()) {
            return Err(Error::Argument(format!(
                "evolution needs dt != 0, steps > 0 and hbar > 0 (got {dt}, {steps}, {hbar})"
            )));
        }
        Ok(Self {
            hamiltonian,
            grid,
            boundary,
            dt,
            steps,
            hbar,
        })
    }

    pub fn matrix(&self) -> Result<Tridiagonal<T>> {
        discretize(&self.hamiltonian, &self.grid, self.hbar)
    }
}

/// Full-line window `[q − r − 10σ, q + r + 10σ]` for a packet of width `σ`
/// that moves at most `r` away from `q`.
pub fn canonical_window<T: Real>(f: &Fiducial<T>, q: T, reach: T, nodes: usize) -> Result<Arc<Grid<T>>> {
    let margin = reach.abs() + lit::<T>(10.0) * f.width();
    Ok(Arc::new(Grid::full_line(q - margin, q + margin, nodes)?))
}

/// Half-line window `(0, q_max(1 + 20ħ/β̃)]` for affine states whose
/// dilation label stays below `q_max`.
pub fn half_line_window<T: Real>(f: &Fiducial<T>, q_max: T, nodes: usize) -> Result<Arc<Grid<T>>> {
    let a = f
        .affine_ratio()
        .ok_or_else(|| Error::Argument("half-line window needs an affine fiducial".into()))?;
    Ok(Arc::new(Grid::half_line(q_max * (T::one() + lit::<T>(20.0) / a), nodes)?))
}

/// Half-line window for `c·DXD` dynamics over `|t| ≤ t_max` with node
/// spacing `step`.
///
/// Under `c q p²` a momentum component `k` moves as `q(1 + c k t)²`, and the
/// affine state's momentum distribution has power-law tails, so the window
/// follows the component eight standard deviations out,
/// `Δp = ħ a / (q √(2a − 2))` with `a = β̃/ħ`.
pub fn model_one_window<T: Real>(f: &Fiducial<T>, pq: (T, T), coupling: T, t_max: T, step: T) -> Result<Arc<Grid<T>>> {
    let a = f
        .affine_ratio()
        .ok_or_else(|| Error::Argument("Model One window needs an affine fiducial".into()))?;
    let (p, q) = pq;
    if !(a > T::one()) || !(q > T::zero()) || !(step > T::zero()) {
        return Err(Error::Domain(format!(
            "Model One window needs beta/hbar > 1, q > 0 and step > 0 (got {a}, {q}, {step})"
        )));
    }
    let spread = f.hbar() * a / (q * (a + a - lit::<T>(2.0)).sqrt());
    let k_hi = p.abs() + lit::<T>(8.0) * spread;
    let reach = T::one() + coupling.abs() * k_hi * t_max.abs();
    let upper = lit::<T>(1.5) * q * (reach * reach).max(T::one() + lit::<T>(20.0) / a);
    let nodes = (upper / step).ceil().to_usize().unwrap_or(usize::MAX);
    Ok(Arc::new(Grid::half_line(upper, nodes)?))
}

/// Tridiagonal matrix of `𝓗` on a uniform grid with zero values outside.
///
/// Words may hold at most two `D` factors: `X^a D X^b` uses the central
/// first difference, `X^a D X^b D X^c` the symmetric form
/// `−ħ² x^a ∂(x^b ∂) x^c` with `x^b` at half nodes.
pub fn discretize<T: Real>(op: &OperatorExpr<T>, grid: &Grid<T>, hbar: T) -> Result<Tridiagonal<T>> {
    let h = grid
        .step()
        .ok_or_else(|| Error::Argument("discretisation needs a uniform grid".into()))?;
    let x = grid.nodes();
    let n = x.len();
    let half = lit::<T>(0.5);
    let pow = |v: T, k: u32| v.powi(k as i32);
    let mut m = Tridiagonal::zeros(n);
    for (word, c) in op.collected() {
        // split into X-power runs around the D factors
        let mut runs = vec![0u32];
        for f in &word {
            match f {
                Factor::X(k) => *runs.last_mut().unwrap() += k,
                Factor::D => runs.push(0),
            }
        }
        match runs.as_slice() {
            [a] => {
                for j in 0..n {
                    m.diag[j] += cplx(c * pow(x[j], *a), T::zero());
                }
            }
            [a, b] => {
                // −iħ c x^a (ψ_{j+1} − ψ_{j−1})/2h x^b
                let k = cplx(T::zero(), -hbar * c * half / h);
                for j in 0..n {
                    if j + 1 < n {
                        m.upper[j] += k * pow(x[j], *a) * pow(x[j + 1], *b);
                    }
                    if j > 0 {
                        m.lower[j] -= k * pow(x[j], *a) * pow(x[j - 1], *b);
                    }
                }
            }
            [a, b, e] => {
                let k = -hbar * hbar * c / (h * h);
                for j in 0..n {
                    let mid_up = pow(x[j] + half * h, *b);
                    let mid_dn = pow(x[j] - half * h, *b);
                    let left = pow(x[j], *a);
                    m.diag[j] += cplx(-k * left * (mid_up + mid_dn) * pow(x[j], *e), T::zero());
                    if j + 1 < n {
                        m.upper[j] += cplx(k * left * mid_up * pow(x[j + 1], *e), T::zero());
                    }
                    if j > 0 {
                        m.lower[j] += cplx(k * left * mid_dn * pow(x[j - 1], *e), T::zero());
                    }
                }
            }
            _ => {
                return Err(Error::Structural(format!(
                    "term with {} derivative factors is not tridiagonal on the grid",
                    runs.len() - 1
                )))
            }
        }
    }
    let scale = m
        .diag
        .iter()
        .chain(&m.upper)
        .map(|v| v.norm())
        .fold(T::one(), T::max);
    let tol = lit::<T>(1e-12) * scale;
    for j in 0..n {
        let off = if j + 1 < n { (m.upper[j] - m.lower[j + 1].conj()).norm() } else { T::zero() };
        if m.diag[j].im.abs() > tol || off > tol {
            return Err(Error::Structural(format!(
                "discretised Hamiltonian is not Hermitian near x = {}",
                x[j]
            )));
        }
    }
    Ok(m)
}

/// Crank–Nicolson stepper `(1 + iΔt H/2ħ) ψ' = (1 − iΔt H/2ħ) ψ`.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    hamiltonian: Tridiagonal<T>,
    implicit: Tridiagonal<T>,
    explicit: Tridiagonal<T>,
    dt: T,
}

impl<T: Real> Propagator<T> {
    pub fn new(setup: &EvolutionSetup<T>) -> Result<Self> {
        let hamiltonian = setup.matrix()?;
        let k = setup.dt * lit::<T>(0.5) / setup.hbar;
        let one = cplx(T::one(), T::zero());
        Ok(Self {
            implicit: hamiltonian.affine(one, cplx(T::zero(), k)),
            explicit: hamiltonian.affine(one, cplx(T::zero(), -k)),
            hamiltonian,
            dt: setup.dt,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn hamiltonian(&self) -> &Tridiagonal<T> {
        &self.hamiltonian
    }

    pub fn step(&self, values: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let rhs = self.explicit.apply(values);
        let next = self.implicit.solve(&rhs)?;
        let check = self.implicit.apply(&next);
        let (mut worst, mut size) = (T::zero(), T::zero());
        for (a, b) in check.iter().zip(&rhs) {
            worst = worst.max((*a - *b).norm());
            size = size.max(b.norm());
        }
        if worst > lit::<T>(SOLVE_RESIDUAL_TOL) * size {
            return Err(Error::Numeric(format!(
                "Crank–Nicolson solve residual {worst} exceeds {} relative; reduce dt",
                SOLVE_RESIDUAL_TOL
            )));
        }
        Ok(next)
    }

    /// `⟨ψ|H|ψ⟩` with the grid matrix, `h Σ ψ̄ (Hψ)`.
    pub fn energy(&self, psi: &WaveFunction<T>) -> T {
        let h = psi.grid().step().unwrap_or(T::one());
        let hv = self.hamiltonian.apply(psi.values());
        let s = psi
            .values()
            .iter()
            .zip(&hv)
            .fold(Cplx::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b);
        s.re * h
    }
}

/// States recorded during an evolution.
#[derive(Debug, Clone)]
pub struct Evolution<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<WaveFunction<T>>,
}

fn check_start<T: Real>(psi0: &WaveFunction<T>, setup: &EvolutionSetup<T>) -> Result<()> {
    if !Arc::ptr_eq(psi0.grid(), &setup.grid) && psi0.grid().nodes() != setup.grid.nodes() {
        return Err(Error::Structural("initial state lives on a different grid".into()));
    }
    if !psi0.is_normalized(lit(1e-8)) {
        return Err(Error::Precondition(format!(
            "initial state is not normalised (|psi|^2 = {})",
            psi0.norm_sqr()
        )));
    }
    Ok(())
}

/// Runs the evolution and hands every `stride`-th state (and the last one)
/// to `visit` together with its time; the initial state is visited first.
pub fn evolve_with<T: Real>(
    psi0: &WaveFunction<T>,
    setup: &EvolutionSetup<T>,
    stride: usize,
    mut visit: impl FnMut(usize, T, &WaveFunction<T>) -> Result<()>,
) -> Result<WaveFunction<T>> {
    check_start(psi0, setup)?;
    let stride = stride.max(1);
    let prop = Propagator::new(setup)?;
    let mut psi = psi0.clone();
    visit(0, T::zero(), &psi)?;
    for k in 1..=setup.steps {
        psi = psi.with_values(prop.step(psi.values())?)?;
        if k % stride == 0 || k == setup.steps {
            visit(k, setup.dt * T::from_usize_lossy(k), &psi)?;
        }
    }
    Ok(psi)
}

/// Evolution keeping every `stride`-th state.
pub fn evolve<T: Real>(psi0: &WaveFunction<T>, setup: &EvolutionSetup<T>, stride: usize) -> Result<Evolution<T>> {
    let mut out = Evolution {
        times: Vec::new(),
        states: Vec::new(),
    };
    evolve_with(psi0, setup, stride, |_, t, psi| {
        out.times.push(t);
        out.states.push(psi.clone());
        Ok(())
    })?;
    Ok(out)
}

/// `(t, ⟨−iħ∂⟩, ⟨x⟩, ⟨𝓗⟩)` for each recorded state.
pub fn track_expectations<T: Real>(evolution: &Evolution<T>, setup: &EvolutionSetup<T>) -> Result<Trajectory<T>> {
    let prop = Propagator::new(setup)?;
    let mut traj = Trajectory::new();
    for (t, psi) in evolution.times.iter().zip(&evolution.states) {
        traj.push(*t, psi.mean_momentum()?, psi.mean_position(), prop.energy(psi));
    }
    Ok(traj)
}

/// Expectation trajectory without keeping the states.
pub fn evolve_tracked<T: Real>(psi0: &WaveFunction<T>, setup: &EvolutionSetup<T>, stride: usize) -> Result<Trajectory<T>> {
    let prop = Propagator::new(setup)?;
    let mut traj = Trajectory::new();
    evolve_with(psi0, setup, stride, |_, t, psi| {
        traj.push(t, psi.mean_momentum()?, psi.mean_position(), prop.energy(psi));
        Ok(())
    })?;
    Ok(traj)
}

/// CSV with header `x,Re(psi),Im(psi)`.
pub fn snapshot_csv<T: Real>(psi: &WaveFunction<T>) -> String {
    let mut out = String::from("x,Re(psi),Im(psi)\n");
    for (x, v) in psi.grid().nodes().iter().zip(psi.values()) {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            x.to_f64_lossy(),
            v.re.to_f64_lossy(),
            v.im.to_f64_lossy()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_stencil() {
        let g = Grid::<f64>::full_line(-1.0, 1.0, 5).unwrap();
        let m = discretize(&"D D".parse().unwrap(), &g, 1.0).unwrap();
        // h = 0.5: −∂² → (−1, 2, −1)/h²
        assert!((m.diag[2].re - 8.0).abs() < 1e-14);
        assert!((m.upper[2].re + 4.0).abs() < 1e-14 && (m.lower[2].re + 4.0).abs() < 1e-14);
    }

    #[test]
    fn dxd_is_symmetric_with_half_node_weights() {
        let g = Grid::<f64>::half_line(2.0, 4).unwrap();
        let m = discretize(&OperatorExpr::model_one(), &g, 1.0).unwrap();
        // h = 0.5, node 1 at x = 0.5: neighbours weighted by x at 0.25 and 0.75
        assert!((m.diag[0].re - (0.25 + 0.75) / 0.25).abs() < 1e-14);
        assert!((m.upper[0].re + 0.75 / 0.25).abs() < 1e-14);
        for j in 0..3 {
            assert!((m.upper[j] - m.lower[j + 1]).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian_and_high_order() {
        let g = Grid::<f64>::full_line(-1.0, 1.0, 11).unwrap();
        assert!(matches!(discretize(&"X D".parse().unwrap(), &g, 1.0), Err(Error::Structural(_))));
        assert!(matches!(discretize(&"D D D D".parse().unwrap(), &g, 1.0), Err(Error::Structural(_))));
        assert!(discretize(&"0.5 * X D + 0.5 * D X".parse().unwrap(), &g, 1.0).is_ok());
    }
}
