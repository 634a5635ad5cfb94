//! Expectation values of ordered words in `x` and `D = −iħ∂` over a
//! fiducial, computed exactly (closed-form moments) or by grid quadrature.
//!
//! A symbol is assembled by pushing the fiducial through each factor of an
//! operator term, right to left, after the factor substitution
//! `D → p + D, X^k → (q + x)^k` (canonical) or
//! `D → p + q⁻¹D, X^k → q^k x^k` (affine). The bookkeeping keys every
//! intermediate function by its monomial `p^i q^j`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::{derivative_values, Grid};
use crate::scalar::{cplx, Cplx, Real};

use super::expr::{Factor, Term};

/// Vector space of functions the fiducial is pushed through.
pub(crate) trait MomentSpace<T: Real> {
    type F: Clone;

    /// The fiducial itself.
    fn unit(&self) -> Self::F;
    fn zero(&self) -> Self::F;
    /// `x^r f`.
    fn mul_x(&self, f: &Self::F, r: u32) -> Self::F;
    /// `−iħ f'`.
    fn apply_d(&self, f: &Self::F) -> Result<Self::F>;
    /// `acc += c f`.
    fn add_scaled(&self, acc: &mut Self::F, f: &Self::F, c: T);
    /// `⟨fiducial | f⟩`.
    fn pair(&self, f: &Self::F) -> Result<Cplx<T>>;
}

/// Which substitution turns operator factors into shifted words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Transport {
    Canonical,
    Affine,
}

/// Coefficients `h_{ij}` of `Σ h_{ij} p^i q^j` for one operator.
pub(crate) fn expand<T: Real, S: MomentSpace<T>>(
    space: &S,
    terms: &[Term<T>],
    transport: Transport,
) -> Result<BTreeMap<(u32, i32), Cplx<T>>> {
    let mut out: BTreeMap<(u32, i32), Cplx<T>> = BTreeMap::new();
    for term in terms {
        let mut state: BTreeMap<(u32, i32), S::F> = BTreeMap::new();
        state.insert((0, 0), space.unit());
        for factor in term.factors.iter().rev() {
            let mut next: BTreeMap<(u32, i32), S::F> = BTreeMap::new();
            let mut push = |key: (u32, i32), f: &S::F, c: T| {
                let slot = next.entry(key).or_insert_with(|| space.zero());
                space.add_scaled(slot, f, c);
            };
            for (&(i, j), f) in &state {
                match (factor, transport) {
                    (Factor::D, Transport::Canonical) => {
                        push((i + 1, j), f, T::one());
                        push((i, j), &space.apply_d(f)?, T::one());
                    }
                    (Factor::D, Transport::Affine) => {
                        push((i + 1, j), f, T::one());
                        push((i, j - 1), &space.apply_d(f)?, T::one());
                    }
                    (Factor::X(m), Transport::Canonical) => {
                        let mut binom = T::one();
                        for r in 0..=*m {
                            push((i, j + (*m - r) as i32), &space.mul_x(f, r), binom);
                            binom = binom * T::from_usize_lossy((*m - r) as usize)
                                / T::from_usize_lossy(r as usize + 1);
                        }
                    }
                    (Factor::X(m), Transport::Affine) => {
                        push((i, j + *m as i32), &space.mul_x(f, *m), T::one());
                    }
                }
            }
            state = next;
        }
        for (key, f) in &state {
            let v = space.pair(f)? * term.coefficient;
            let slot = out.entry(*key).or_insert(Cplx::new(T::zero(), T::zero()));
            *slot += v;
        }
    }
    Ok(out)
}

/// Functions `Σ_k c_k x^{α+k} g(x)` where the fiducial is `x^α g(x)` (up to
/// normalisation) and `g'/g = −κ x^{γ}` with `γ ∈ {0, 1}`.
pub(crate) struct AnalyticSpace<T: Real> {
    alpha: T,
    kappa: T,
    gamma: i32,
    hbar: T,
    /// `μ_k = ⟨fiducial | x^{α+k} g⟩`; `None` where the integral diverges.
    moment: Box<dyn Fn(i32) -> Option<T> + Send + Sync>,
}

impl<T: Real> AnalyticSpace<T> {
    /// Gaussian `η = (ω/πħ)^{1/4} e^{−ωx²/2ħ}`:
    /// `⟨x^{2n}⟩ = (2n−1)!! (ħ/2ω)^n`, odd moments vanish.
    pub fn gaussian(omega: T, hbar: T) -> Self {
        let var = hbar / (omega + omega);
        Self {
            alpha: T::zero(),
            kappa: omega / hbar,
            gamma: 1,
            hbar,
            moment: Box::new(move |k| {
                if k < 0 {
                    return None;
                }
                if k % 2 == 1 {
                    return Some(T::zero());
                }
                let n = k / 2;
                let mut m = T::one();
                for i in 0..n {
                    m = m * T::from_usize_lossy((2 * i + 1) as usize) * var;
                }
                Some(m)
            }),
        }
    }

    /// Affine `ξ = M x^{a−1/2} e^{−ax}`, `a = β̃/ħ`:
    /// `μ_k = Γ(2a+k) / (Γ(2a) (2a)^k)`, finite for `2a + k > 0`.
    pub fn affine(beta: T, hbar: T) -> Self {
        let a = beta / hbar;
        let s = a + a;
        Self {
            alpha: a - T::lit(0.5),
            kappa: a,
            gamma: 0,
            hbar,
            moment: Box::new(move |k| {
                if s + T::from_i32(k).unwrap() <= T::zero() {
                    return None;
                }
                // Γ(s+k)/Γ(s) via the rising / falling product.
                let mut m = T::one();
                if k >= 0 {
                    for j in 0..k {
                        m = m * (s + T::from_i32(j).unwrap()) / s;
                    }
                } else {
                    for j in 1..=(-k) {
                        m = m * s / (s - T::from_i32(j).unwrap());
                    }
                }
                Some(m)
            }),
        }
    }
}

impl<T: Real> MomentSpace<T> for AnalyticSpace<T> {
    type F = BTreeMap<i32, Cplx<T>>;

    fn unit(&self) -> Self::F {
        let mut m = BTreeMap::new();
        m.insert(0, Cplx::new(T::one(), T::zero()));
        m
    }

    fn zero(&self) -> Self::F {
        BTreeMap::new()
    }

    fn mul_x(&self, f: &Self::F, r: u32) -> Self::F {
        f.iter().map(|(k, c)| (k + r as i32, *c)).collect()
    }

    fn apply_d(&self, f: &Self::F) -> Result<Self::F> {
        // (x^{α+k} g)' = (α+k) x^{α+k−1} g − κ x^{α+k+γ} g
        let mi = cplx(T::zero(), -self.hbar);
        let mut out: BTreeMap<i32, Cplx<T>> = BTreeMap::new();
        for (&k, &c) in f {
            let e = self.alpha + T::from_i32(k).unwrap();
            if e != T::zero() {
                *out.entry(k - 1).or_insert(Cplx::new(T::zero(), T::zero())) += c * mi * e;
            }
            *out.entry(k + self.gamma).or_insert(Cplx::new(T::zero(), T::zero())) += c * mi * (-self.kappa);
        }
        Ok(out)
    }

    fn add_scaled(&self, acc: &mut Self::F, f: &Self::F, c: T) {
        for (k, v) in f {
            *acc.entry(*k).or_insert(Cplx::new(T::zero(), T::zero())) += *v * c;
        }
    }

    fn pair(&self, f: &Self::F) -> Result<Cplx<T>> {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (&k, &c) in f {
            if c == Cplx::new(T::zero(), T::zero()) {
                continue;
            }
            let mu = (self.moment)(k).ok_or_else(|| {
                Error::Domain(format!(
                    "fiducial moment of order {k} diverges; the operator has no finite symbol for this fiducial"
                ))
            })?;
            acc += c * mu;
        }
        Ok(acc)
    }
}

/// Grid samples pushed through the factors with finite differences.
pub(crate) struct GridSpace<'a, T: Real> {
    pub grid: &'a Grid<T>,
    pub fiducial: &'a [Cplx<T>],
    pub hbar: T,
}

impl<T: Real> MomentSpace<T> for GridSpace<'_, T> {
    type F = Vec<Cplx<T>>;

    fn unit(&self) -> Self::F {
        self.fiducial.to_vec()
    }

    fn zero(&self) -> Self::F {
        vec![Cplx::new(T::zero(), T::zero()); self.grid.len()]
    }

    fn mul_x(&self, f: &Self::F, r: u32) -> Self::F {
        f.iter()
            .zip(self.grid.nodes())
            .map(|(v, x)| *v * x.powi(r as i32))
            .collect()
    }

    fn apply_d(&self, f: &Self::F) -> Result<Self::F> {
        let mi = cplx(T::zero(), -self.hbar);
        Ok(derivative_values(self.grid, f, 1)?.into_iter().map(|v| v * mi).collect())
    }

    fn add_scaled(&self, acc: &mut Self::F, f: &Self::F, c: T) {
        for (a, v) in acc.iter_mut().zip(f) {
            *a += *v * c;
        }
    }

    fn pair(&self, f: &Self::F) -> Result<Cplx<T>> {
        let w = self.grid.weights();
        let mut acc = Cplx::new(T::zero(), T::zero());
        for i in 0..w.len() {
            acc += self.fiducial[i].conj() * f[i] * w[i];
        }
        Ok(acc)
    }
}
