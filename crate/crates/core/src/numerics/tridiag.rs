use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Complex tridiagonal matrix stored by diagonals. `lower[0]` and
/// `upper[n-1]` are unused.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T: Real> {
    pub lower: Vec<Cplx<T>>,
    pub diag: Vec<Cplx<T>>,
    pub upper: Vec<Cplx<T>>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        let z = Cplx::new(T::zero(), T::zero());
        Self {
            lower: vec![z; n],
            diag: vec![z; n],
            upper: vec![z; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `α I + β self`.
    pub fn affine(&self, alpha: Cplx<T>, beta: Cplx<T>) -> Self {
        Self {
            lower: self.lower.iter().map(|v| *v * beta).collect(),
            diag: self.diag.iter().map(|v| alpha + *v * beta).collect(),
            upper: self.upper.iter().map(|v| *v * beta).collect(),
        }
    }

    /// Thomas elimination. Fails on a vanishing pivot.
    pub fn solve(&self, rhs: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::Structural("rhs length does not match matrix".into()));
        }
        let tiny = T::epsilon() * T::epsilon();
        let mut c = vec![Cplx::new(T::zero(), T::zero()); n];
        let mut d = vec![Cplx::new(T::zero(), T::zero()); n];
        let mut piv = self.diag[0];
        if piv.norm() <= tiny {
            return Err(Error::Numeric("zero pivot in tridiagonal solve at row 0".into()));
        }
        c[0] = self.upper[0] / piv;
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i] * c[i - 1];
            if piv.norm() <= tiny {
                return Err(Error::Numeric(format!("zero pivot in tridiagonal solve at row {i}")));
            }
            if i + 1 < n {
                c[i] = self.upper[i] / piv;
            }
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            let next = d[i + 1];
            d[i] -= c[i] * next;
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_random_diagonally_dominant_system() {
        let n = 50;
        let mut m = Tridiagonal::<f64>::zeros(n);
        for i in 0..n {
            let s = i as f64;
            m.diag[i] = Cplx::new(4.0 + s.sin(), 0.3 * s.cos());
            m.lower[i] = Cplx::new(1.0, 0.02 * s);
            m.upper[i] = Cplx::new(-0.5, 0.1);
        }
        let x: Vec<Cplx<f64>> = (0..n).map(|i| Cplx::new(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let b = m.apply(&x);
        let y = m.solve(&b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
