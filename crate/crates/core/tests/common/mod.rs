//! Brute-force two-variable oracles for the N = 1 reducible representation.
#![allow(dead_code)]

use num_complex::Complex64;

/// Square grid `[-half, half]²` with `n` nodes per side.
pub struct Plane {
    pub x: Vec<f64>,
    pub h: f64,
}

impl Plane {
    pub fn new(half: f64, n: usize) -> Self {
        let h = 2.0 * half / (n - 1) as f64;
        Self {
            x: (0..n).map(|i| -half + h * i as f64).collect(),
            h,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Trapezoid rule for `∫∫ conj(f) g`; the integrands vanish at the edges.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.h * self.h
    }
}

/// Unnormalised fiducial `exp[−m(x² + 2ζxy + y²)/2ħ]` displaced to `(p, q)`
/// in the first pair: `e^{ip(x−q)/ħ} ψ₀(x − q, y)`.
pub fn displaced(plane: &Plane, m: f64, zeta: f64, hbar: f64, p: f64, q: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(plane.n() * plane.n());
    for &x in &plane.x {
        for &y in &plane.x {
            let u = x - q;
            let amp = (-m * (u * u + 2.0 * zeta * u * y + y * y) / (2.0 * hbar)).exp();
            out.push(Complex64::from_polar(amp, p * u / hbar));
        }
    }
    out
}

pub fn normalised(plane: &Plane, mut psi: Vec<Complex64>) -> Vec<Complex64> {
    let norm = plane.inner(&psi, &psi).re.sqrt();
    psi.iter_mut().for_each(|v| *v /= norm);
    psi
}

const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Eighth-order central difference along x (`axis = 0`) or y (`axis = 1`),
/// with zero values beyond the grid.
pub fn derivative(plane: &Plane, f: &[Complex64], axis: usize) -> Vec<Complex64> {
    let n = plane.n();
    let at = |i: isize, j: isize| -> Complex64 {
        if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
            Complex64::new(0.0, 0.0)
        } else {
            f[i as usize * n + j as usize]
        }
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n as isize {
        for j in 0..n as isize {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, c) in D1.iter().enumerate() {
                let k = k as isize + 1;
                let (fwd, bwd) = if axis == 0 { (at(i + k, j), at(i - k, j)) } else { (at(i, j + k), at(i, j - k)) };
                s += (fwd - bwd) * *c;
            }
            out[i as usize * n + j as usize] = s / plane.h;
        }
    }
    out
}

/// `A = −iħ∂_x − im(x + ζy)` (`axis = 0`) or `B = −iħ∂_y − im(y + ζx)`.
pub fn ladder(plane: &Plane, f: &[Complex64], m: f64, zeta: f64, hbar: f64, axis: usize) -> Vec<Complex64> {
    let n = plane.n();
    let d = derivative(plane, f, axis);
    let i = Complex64::i();
    let mut out = Vec::with_capacity(n * n);
    for (a, &x) in plane.x.iter().enumerate() {
        for (b, &y) in plane.x.iter().enumerate() {
            let k = a * n + b;
            let lin = if axis == 0 { x + zeta * y } else { y + zeta * x };
            out.push(-i * hbar * d[k] - i * m * lin * f[k]);
        }
    }
    out
}

/// Quadrature values of `⟨Ĥ_p⟩ = ½‖Aψ‖²`, `⟨Ĥ_r⟩ = ½‖Bψ‖²` and
/// `⟨B†B†BB⟩ = ‖B²ψ‖²` in the displaced state.
pub fn n1_expectations(m: f64, zeta: f64, hbar: f64, p: f64, q: f64) -> (f64, f64, f64) {
    let soft = (hbar / (2.0 * m * (1.0 - zeta))).sqrt();
    let plane = Plane::new(q.abs() + 12.0 * soft, 641);
    let psi = normalised(&plane, displaced(&plane, m, zeta, hbar, p, q));
    let a = ladder(&plane, &psi, m, zeta, hbar, 0);
    let b = ladder(&plane, &psi, m, zeta, hbar, 1);
    let bb = ladder(&plane, &b, m, zeta, hbar, 1);
    (
        0.5 * plane.inner(&a, &a).re,
        0.5 * plane.inner(&b, &b).re,
        plane.inner(&bb, &bb).re,
    )
}

/// `⟨p′, q′; ζ|p, q; ζ⟩` by double trapezoid quadrature.
pub struct OverlapOracle {
    plane: Plane,
    m: f64,
    zeta: f64,
    hbar: f64,
    norm: f64,
}

impl OverlapOracle {
    pub fn new(m: f64, zeta: f64, hbar: f64, reach: f64) -> Self {
        let soft = (hbar / (2.0 * m * (1.0 - zeta))).sqrt();
        let plane = Plane::new(reach + 12.0 * soft, 601);
        let psi = displaced(&plane, m, zeta, hbar, 0.0, 0.0);
        let norm = plane.inner(&psi, &psi).re;
        Self { plane, m, zeta, hbar, norm }
    }

    pub fn overlap(&self, bra: (f64, f64), ket: (f64, f64)) -> Complex64 {
        let f = displaced(&self.plane, self.m, self.zeta, self.hbar, bra.0, bra.1);
        let g = displaced(&self.plane, self.m, self.zeta, self.hbar, ket.0, ket.1);
        self.plane.inner(&f, &g) / self.norm
    }
}
