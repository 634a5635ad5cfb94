use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, Cplx, Real};

use super::grid::Grid;
use super::stencil::STENCIL_WIDTH;

/// Complex samples of a wave function on a grid.
#[derive(Debug, Clone)]
pub struct WaveFunction<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<Cplx<T>>,
    hbar: T,
}

impl<T: Real> WaveFunction<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<Cplx<T>>, hbar: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structural(format!(
                "wave function has {} samples but grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !(hbar > T::zero()) {
            return Err(Error::Argument(format!("hbar must be positive (got {hbar})")));
        }
        Ok(Self { grid, values, hbar })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: Arc<Grid<T>>, hbar: T, f: impl Fn(T) -> Cplx<T>) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values, hbar)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Cplx<T>] {
        &self.values
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn into_values(self) -> Vec<Cplx<T>> {
        self.values
    }

    /// Same grid and ħ, new samples.
    pub fn with_values(&self, values: Vec<Cplx<T>>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.hbar)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// `∫ φ*(x) ψ(x) dx` with `φ = self`.
    pub fn inner_product(&self, other: &Self) -> Result<Cplx<T>> {
        if !self.same_grid(other) {
            return Err(Error::Structural("inner product of wave functions on different grids".into()));
        }
        Ok(self.inner_unchecked(&other.values))
    }

    pub(crate) fn inner_unchecked(&self, other: &[Cplx<T>]) -> Cplx<T> {
        let w = self.grid.weights();
        let mut acc = Cplx::new(T::zero(), T::zero());
        for i in 0..w.len() {
            acc += self.values[i].conj() * other[i] * w[i];
        }
        acc
    }

    pub fn norm_sqr(&self) -> T {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| *w * v.norm_sqr())
            .sum()
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        (self.norm_sqr() - T::one()).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Numeric("cannot normalise a zero or non-finite wave function".into()));
        }
        let s = n.sqrt().recip();
        self.with_values(self.values.iter().map(|v| *v * s).collect())
    }

    pub fn scaled(&self, c: Cplx<T>) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| *v * c).collect(),
            hbar: self.hbar,
        }
    }

    /// First or second spatial derivative by five-point finite differences
    /// (centred in the interior, one-sided at the edges).
    pub fn derivative(&self, order: usize) -> Result<Self> {
        let values = derivative_values(&self.grid, &self.values, order)?;
        self.with_values(values)
    }

    /// `⟨x⟩ = ∫ x |ψ|² dx`.
    pub fn mean_position(&self) -> T {
        self.grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.values)
            .map(|((x, w), v)| *x * *w * v.norm_sqr())
            .sum()
    }

    /// `⟨−iħ∂⟩`, real part.
    pub fn mean_momentum(&self) -> Result<T> {
        let d = derivative_values(&self.grid, &self.values, 1)?;
        let o = self.inner_unchecked(&d);
        Ok((o * cplx(T::zero(), -self.hbar)).re)
    }

    /// Dilation moment `−(iħ/2) ∫ ψ* [x∂ + ∂x] ψ dx = −iħ ∫ ψ* (xψ' + ψ/2) dx`.
    pub fn mean_dilation(&self) -> Result<T> {
        let d = derivative_values(&self.grid, &self.values, 1)?;
        let half = lit::<T>(0.5);
        let xd: Vec<Cplx<T>> = self
            .grid
            .nodes()
            .iter()
            .zip(d.iter().zip(&self.values))
            .map(|(x, (dv, v))| *dv * *x + *v * half)
            .collect();
        let o = self.inner_unchecked(&xd);
        Ok((o * cplx(T::zero(), -self.hbar)).re)
    }

    /// Variance of position under `|ψ|²`.
    pub fn position_spread(&self) -> T {
        let m = self.mean_position();
        let v: T = self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.values)
            .map(|((x, w), v)| (*x - m) * (*x - m) * *w * v.norm_sqr())
            .sum();
        v.sqrt()
    }
}

pub(crate) fn derivative_values<T: Real>(
    grid: &Grid<T>,
    values: &[Cplx<T>],
    order: usize,
) -> Result<Vec<Cplx<T>>> {
    if order != 1 && order != 2 {
        return Err(Error::Argument(format!("derivative order must be 1 or 2 (got {order})")));
    }
    let stencils = grid.stencils()?;
    Ok(stencils
        .iter()
        .map(|s| {
            let w = if order == 1 { &s.d1 } else { &s.d2 };
            let mut acc = Cplx::new(T::zero(), T::zero());
            for j in 0..STENCIL_WIDTH {
                acc += values[s.start + j] * w[j];
            }
            acc
        })
        .collect())
}
