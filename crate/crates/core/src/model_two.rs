//! Ladder-operator calculus for the reducible-representation model:
//! coherent-state expectations of normal-ordered polynomials in
//! `A_n = P_n − im(Q_n + ζS_n)` and `B_n = R_n − im(S_n + ζQ_n)`,
//! overlaps, and the rotationally symmetric characteristic function.

use std::collections::BTreeMap;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, Cplx, Real};

/// Imaginary residue tolerated for Hermitian polynomials (relative).
pub const HERMITIAN_IMAG_TOL: f64 = 1e-12;
/// Normalisation tolerance for radial densities.
pub const RADIAL_NORM_TOL: f64 = 1e-8;
/// Normalisation tolerance for measure weights.
pub const MEASURE_NORM_TOL: f64 = 1e-12;

/// `N` pairs of coupled canonical variables with correlation `ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducibleRep<T> {
    n: usize,
    m: T,
    zeta: T,
    hbar: T,
}

impl<T: Real> ReducibleRep<T> {
    pub fn new(n: usize, m: T, zeta: T, hbar: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("N must be at least 1".into()));
        }
        if !(m > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::Argument(format!("m and hbar must be positive (got {m}, {hbar})")));
        }
        if !(zeta >= T::zero() && zeta < T::one()) {
            return Err(Error::Domain(format!("zeta must lie in [0, 1) (got {zeta})")));
        }
        Ok(Self { n, m, zeta, hbar })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn zeta(&self) -> T {
        self.zeta
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    /// `K = (1 − ζ²)⁻¹`.
    pub fn k(&self) -> T {
        (T::one() - self.zeta * self.zeta).recip()
    }

    fn check(&self, p: &[T], q: &[T]) -> Result<()> {
        if p.len() != self.n || q.len() != self.n {
            return Err(Error::Argument(format!(
                "phase vectors must have length N = {} (got {}, {})",
                self.n,
                p.len(),
                q.len()
            )));
        }
        Ok(())
    }

    /// `(⟨A_n⟩, ⟨B_n⟩) = (p_n − i m q_n, −i m ζ q_n)` in `|p, q; ζ⟩`.
    pub fn displaced(&self, p: &[T], q: &[T]) -> Result<(Vec<Cplx<T>>, Vec<Cplx<T>>)> {
        self.check(p, q)?;
        let a = p.iter().zip(q).map(|(p, q)| cplx(*p, -self.m * *q)).collect();
        let b = q.iter().map(|q| cplx(T::zero(), -self.m * self.zeta * *q)).collect();
        Ok((a, b))
    }
}

/// The two ladder families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ladder {
    A,
    B,
}

/// A single ladder factor `A_n`, `A_n†`, `B_n` or `B_n†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOp {
    pub family: Ladder,
    pub index: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn a(index: usize) -> Self {
        Self { family: Ladder::A, index, dagger: false }
    }

    pub fn a_dag(index: usize) -> Self {
        Self { family: Ladder::A, index, dagger: true }
    }

    pub fn b(index: usize) -> Self {
        Self { family: Ladder::B, index, dagger: false }
    }

    pub fn b_dag(index: usize) -> Self {
        Self { family: Ladder::B, index, dagger: true }
    }
}

/// Creation and annihilation multi-indices of one normal-ordered monomial.
/// All annihilators commute with each other, as do all creators, so each
/// side is a sorted multiset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub a_dag: Vec<usize>,
    pub b_dag: Vec<usize>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Monomial {
    fn adjoint(&self) -> Self {
        Self {
            a_dag: self.a.clone(),
            b_dag: self.b.clone(),
            a: self.a_dag.clone(),
            b: self.b_dag.clone(),
        }
    }

    fn max_index(&self) -> Option<usize> {
        self.a_dag.iter().chain(&self.b_dag).chain(&self.a).chain(&self.b).copied().max()
    }
}

/// Real linear combination of normal-ordered ladder monomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LadderPolynomial<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Real> LadderPolynomial<T> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    /// Adds `coefficient × word`; every daggered factor must stand left of
    /// every undaggered one.
    pub fn add_word(&mut self, coefficient: T, word: &[LadderOp]) -> Result<()> {
        let mut seen_annihilator = false;
        let mut mono = Monomial {
            a_dag: Vec::new(),
            b_dag: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        };
        for (pos, op) in word.iter().enumerate() {
            if op.dagger && seen_annihilator {
                return Err(Error::Structural(format!(
                    "word is not normal ordered: creator at position {pos} follows an annihilator"
                )));
            }
            seen_annihilator |= !op.dagger;
            let slot = match (op.family, op.dagger) {
                (Ladder::A, true) => &mut mono.a_dag,
                (Ladder::B, true) => &mut mono.b_dag,
                (Ladder::A, false) => &mut mono.a,
                (Ladder::B, false) => &mut mono.b,
            };
            slot.push(op.index);
        }
        for v in [&mut mono.a_dag, &mut mono.b_dag, &mut mono.a, &mut mono.b] {
            v.sort_unstable();
        }
        *self.terms.entry(mono).or_insert(T::zero()) += coefficient;
        Ok(())
    }

    pub fn from_words(words: &[(T, Vec<LadderOp>)]) -> Result<Self> {
        let mut poly = Self::new();
        for (c, w) in words {
            poly.add_word(*c, w)?;
        }
        Ok(poly)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, T)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            *out.terms.entry(k.clone()).or_insert(T::zero()) += *v;
        }
        out
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), *v * c)).collect(),
        }
    }

    /// Equal to its adjoint term by term.
    pub fn is_hermitian(&self) -> bool {
        let tol = T::epsilon() * lit(64.0);
        self.terms.iter().all(|(k, v)| {
            let w = self.terms.get(&k.adjoint()).copied().unwrap_or(T::zero());
            (*v - w).abs() <= tol * (T::one() + v.abs())
        })
    }

    /// `Ĥ_p = ½ Σ A_n† A_n`.
    pub fn h_p(n: usize) -> Self {
        Self::quadratic(n, Ladder::A)
    }

    /// `Ĥ_r = ½ Σ B_n† B_n`.
    pub fn h_r(n: usize) -> Self {
        Self::quadratic(n, Ladder::B)
    }

    fn quadratic(n: usize, family: Ladder) -> Self {
        let mut poly = Self::new();
        let half = lit::<T>(0.5);
        for i in 0..n {
            let word = match family {
                Ladder::A => [LadderOp::a_dag(i), LadderOp::a(i)],
                Ladder::B => [LadderOp::b_dag(i), LadderOp::b(i)],
            };
            poly.add_word(half, &word).expect("normal ordered by construction");
        }
        poly
    }

    /// `4:Ĥ_r²: = Σ_{m,n} B_m† B_n† B_m B_n`.
    pub fn h_r_squared_normal(n: usize) -> Self {
        let mut poly = Self::new();
        for i in 0..n {
            for j in 0..n {
                poly.add_word(T::one(), &[LadderOp::b_dag(i), LadderOp::b_dag(j), LadderOp::b(i), LadderOp::b(j)])
                    .expect("normal ordered by construction");
            }
        }
        poly
    }

    /// `Ĥ₁ = Ĥ_p + Ĥ_r + 4ν:Ĥ_r²:`.
    pub fn h1(n: usize, nu: T) -> Self {
        Self::h_p(n).plus(&Self::h_r(n)).plus(&Self::h_r_squared_normal(n).scaled(nu))
    }

    /// Evaluates every monomial with creators replaced by `left` values
    /// (already conjugated) and annihilators by `right` values.
    fn evaluate(&self, left: (&[Cplx<T>], &[Cplx<T>]), right: (&[Cplx<T>], &[Cplx<T>])) -> Cplx<T> {
        let mut acc = cplx(T::zero(), T::zero());
        for (mono, c) in &self.terms {
            let mut v = cplx(*c, T::zero());
            for i in &mono.a_dag {
                v *= left.0[*i];
            }
            for i in &mono.b_dag {
                v *= left.1[*i];
            }
            for i in &mono.a {
                v *= right.0[*i];
            }
            for i in &mono.b {
                v *= right.1[*i];
            }
            acc += v;
        }
        acc
    }

    fn check_indices(&self, n: usize) -> Result<()> {
        match self.terms.keys().filter_map(Monomial::max_index).max() {
            Some(k) if k >= n => Err(Error::Argument(format!(
                "polynomial uses mode {k} but the representation has N = {n}"
            ))),
            _ => Ok(()),
        }
    }
}

/// `⟨p, q; ζ| :poly: |p, q; ζ⟩`: the polynomial evaluated at the displaced
/// ladder values.
pub fn displaced_expectation<T: Real>(poly: &LadderPolynomial<T>, rep: &ReducibleRep<T>, p: &[T], q: &[T]) -> Result<T> {
    poly.check_indices(rep.n())?;
    let (a, b) = rep.displaced(p, q)?;
    let (ac, bc): (Vec<_>, Vec<_>) = (a.iter().map(|v| v.conj()).collect(), b.iter().map(|v| v.conj()).collect());
    let v = poly.evaluate((&ac, &bc), (&a, &b));
    if poly.is_hermitian() {
        let scale = poly
            .terms()
            .map(|(mono, c)| {
                let mut s = c.abs();
                for i in mono.a_dag.iter().chain(&mono.a) {
                    s *= a[*i].norm();
                }
                for i in mono.b_dag.iter().chain(&mono.b) {
                    s *= b[*i].norm();
                }
                s
            })
            .fold(T::zero(), |x, y| x + y);
        if v.im.abs() > lit::<T>(HERMITIAN_IMAG_TOL) * (T::one() + scale) {
            return Err(Error::Accuracy(format!(
                "expectation of a Hermitian polynomial has imaginary part {}",
                v.im
            )));
        }
    }
    Ok(v.re)
}

/// `⟨p′, q′; ζ| :poly: |p, q; ζ⟩`.
pub fn displaced_matrix_element<T: Real>(
    poly: &LadderPolynomial<T>,
    rep: &ReducibleRep<T>,
    bra: (&[T], &[T]),
    ket: (&[T], &[T]),
) -> Result<Cplx<T>> {
    poly.check_indices(rep.n())?;
    let (a1, b1) = rep.displaced(bra.0, bra.1)?;
    let (a, b) = rep.displaced(ket.0, ket.1)?;
    let (ac, bc): (Vec<_>, Vec<_>) = (a1.iter().map(|v| v.conj()).collect(), b1.iter().map(|v| v.conj()).collect());
    Ok(poly.evaluate((&ac, &bc), (&a, &b)) * overlap_reducible(rep, bra, ket)?)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

/// `½[p² + (1 + ζ²)m²q²] + νζ⁴m⁴(q²)²`.
pub fn h1_closed_form<T: Real>(rep: &ReducibleRep<T>, nu: T, p: &[T], q: &[T]) -> Result<T> {
    rep.check(p, q)?;
    let (m0_sq, lambda0) = couplings(rep, nu);
    let q2 = dot(q, q);
    Ok(lit::<T>(0.5) * (dot(p, p) + m0_sq * q2) + lambda0 * q2 * q2)
}

/// `(m₀², λ₀) = ((1 + ζ²)m², νζ⁴m⁴)`.
pub fn couplings<T: Real>(rep: &ReducibleRep<T>, nu: T) -> (T, T) {
    let m2 = rep.m * rep.m;
    let z2 = rep.zeta * rep.zeta;
    ((T::one() + z2) * m2, nu * z2 * z2 * m2 * m2)
}

/// Expectation of `Ĥ₁` built as a ladder polynomial.
pub fn h1_expectation<T: Real>(rep: &ReducibleRep<T>, nu: T, p: &[T], q: &[T]) -> Result<T> {
    if !(nu >= T::zero()) {
        return Err(Error::Argument(format!("nu must be non-negative (got {nu})")));
    }
    displaced_expectation(&LadderPolynomial::h1(rep.n(), nu), rep, p, q)
}

/// `⟨p′, q′; ζ| Ĥ₁ |p, q; ζ⟩`.
pub fn h1_matrix_element<T: Real>(
    rep: &ReducibleRep<T>,
    nu: T,
    bra: (&[T], &[T]),
    ket: (&[T], &[T]),
) -> Result<Cplx<T>> {
    displaced_matrix_element(&LadderPolynomial::h1(rep.n(), nu), rep, bra, ket)
}

/// `exp{i(p′+p)·(q′−q)/2ħ − [(p′−p)²/(4m(1−ζ²)ħ) + m(q′−q)²/4ħ]}`.
pub fn overlap_reducible<T: Real>(rep: &ReducibleRep<T>, bra: (&[T], &[T]), ket: (&[T], &[T])) -> Result<Cplx<T>> {
    rep.check(bra.0, bra.1)?;
    rep.check(ket.0, ket.1)?;
    let (mut phase, mut dp2, mut dq2) = (T::zero(), T::zero(), T::zero());
    for i in 0..rep.n() {
        let (p1, q1, p, q) = (bra.0[i], bra.1[i], ket.0[i], ket.1[i]);
        phase += (p1 + p) * (q1 - q);
        dp2 += (p1 - p) * (p1 - p);
        dq2 += (q1 - q) * (q1 - q);
    }
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let h = rep.hbar;
    let re = -(dp2 * rep.k() / (four * rep.m * h) + rep.m * dq2 / (four * h));
    Ok(Cplx::from_polar(re.exp(), phase / (two * h)))
}

/// Inverse of [`couplings`] for a chosen `ζ ∈ (0, 1)`:
/// `m² = m₀²/(1 + ζ²)`, `ν = λ₀/(ζ⁴m⁴)`.
pub fn match_target<T: Real>(m0_sq: T, lambda0: T, zeta: T, n: usize, hbar: T) -> Result<(ReducibleRep<T>, T)> {
    if !(m0_sq > T::zero()) || !(lambda0 > T::zero()) {
        return Err(Error::Argument(format!(
            "target needs m0^2 > 0 and lambda0 > 0 (got {m0_sq}, {lambda0})"
        )));
    }
    if !(zeta > T::zero() && zeta < T::one()) {
        return Err(Error::Domain(format!("target matching needs zeta in (0, 1) (got {zeta})")));
    }
    let z2 = zeta * zeta;
    let m2 = m0_sq / (T::one() + z2);
    let rep = ReducibleRep::new(n, m2.sqrt(), zeta, hbar)?;
    Ok((rep, lambda0 / (z2 * z2 * m2 * m2)))
}

/// `exp[−p_r²/(4m′ħ)]`.
pub fn characteristic_exact_gaussian<T: Real>(p_r: T, m_prime: T, hbar: T) -> Result<T> {
    if !(m_prime > T::zero()) || !(hbar > T::zero()) {
        return Err(Error::Argument(format!("m' and hbar must be positive (got {m_prime}, {hbar})")));
    }
    Ok((-p_r * p_r / (lit::<T>(4.0) * m_prime * hbar)).exp())
}

type LogDensity<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Rotationally symmetric density `ρ(|x|)` on `ℝ^N`, given through `ln ρ`
/// and supported (numerically) on `r ≤ r_max`.
#[derive(Clone)]
pub struct RadialDensity<T> {
    log_rho: LogDensity<T>,
    n: usize,
    r_max: T,
    nodes: usize,
}

impl<T: Real> std::fmt::Debug for RadialDensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialDensity")
            .field("n", &self.n)
            .field("r_max", &self.r_max)
            .field("nodes", &self.nodes)
            .finish()
    }
}

/// `ln S_{N−1} = ln(2π^{N/2}/Γ(N/2))`, the area of the unit sphere in `ℝ^N`.
fn ln_sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    std::f64::consts::LN_2 + h * std::f64::consts::PI.ln() - ln_gamma(h)
}

impl<T: Real> RadialDensity<T> {
    pub fn from_log_fn(n: usize, r_max: T, log_rho: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        if n == 0 || !(r_max > T::zero()) {
            return Err(Error::Argument(format!("radial density needs N >= 1 and r_max > 0 (got {n}, {r_max})")));
        }
        Ok(Self {
            log_rho: Arc::new(log_rho),
            n,
            r_max,
            nodes: 4001,
        })
    }

    pub fn from_fn(n: usize, r_max: T, rho: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        Self::from_log_fn(n, r_max, move |r| rho(r).ln())
    }

    /// Ground-state density of a free particle of mass `m′` in `N`
    /// dimensions, `ρ = (m′/πħ)^{N/2} e^{−m′r²/ħ}`.
    pub fn gaussian(n: usize, m_prime: T, hbar: T) -> Result<Self> {
        if !(m_prime > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::Argument(format!("m' and hbar must be positive (got {m_prime}, {hbar})")));
        }
        let scale = (hbar / m_prime).sqrt();
        let r_max = scale * (T::from_usize_lossy(n) * lit(0.5)).sqrt() + lit::<T>(12.0) * scale;
        let ln_norm = T::from_usize_lossy(n) * lit::<T>(0.5) * (m_prime / (T::PI() * hbar)).ln();
        Self::from_log_fn(n, r_max, move |r| ln_norm - m_prime * r * r / hbar)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes.max(3);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    /// Induced radial weight `w(r) = S_{N−1} ρ(r) r^{N−1}`.
    pub fn weight(&self, r: T) -> T {
        if r <= T::zero() {
            return if self.n == 1 { (self.log_rho)(T::zero()).exp() * lit(2.0) } else { T::zero() };
        }
        let ln_w = lit::<T>(ln_sphere_area(self.n)) + (self.log_rho)(r) + T::from_usize_lossy(self.n - 1) * r.ln();
        ln_w.exp()
    }

    /// Trapezoid nodes and weights on `[0, r_max]`.
    fn radial_rule(&self) -> (Vec<T>, Vec<T>) {
        let k = self.nodes - 1;
        let h = self.r_max / T::from_usize_lossy(k);
        let r: Vec<T> = (0..=k).map(|i| h * T::from_usize_lossy(i)).collect();
        let w = (0..=k)
            .map(|i| if i == 0 || i == k { h * lit(0.5) } else { h })
            .collect();
        (r, w)
    }

    /// `∫ w(r) dr`, which is 1 for a normalised density.
    pub fn total_mass(&self) -> T {
        let (r, w) = self.radial_rule();
        r.iter().zip(&w).fold(T::zero(), |s, (r, w)| s + *w * self.weight(*r))
    }
}

/// Exact and steepest-descent characteristic functions at one `p_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCharacteristic<T> {
    /// `∫ e^{i p_r r cos θ/ħ} ρ r^{N−1} sin^{N−2}θ dr dθ` with the angular
    /// volume normalised.
    pub exact: Cplx<T>,
    /// `∫ e^{−p_r² r²/(2(N−2)ħ²)} w(r) dr`.
    pub approx: T,
    /// `|exact − approx|`.
    pub difference: T,
}

/// Characteristic function of a radial density by `(r, θ)` quadrature and
/// by the steepest-descent evaluation of the `θ` integral.
///
/// Near `θ = π/2`, `sin^{N−2}θ ≈ e^{−(N−2)φ²/2}`, so the angular average of
/// `e^{i p r cos θ/ħ}` is approximately `e^{−p²r²/(2(N−2)ħ²)}`.
pub fn characteristic_radial<T: Real>(density: &RadialDensity<T>, p_r: T, hbar: T) -> Result<RadialCharacteristic<T>> {
    let n = density.n();
    if n < 3 {
        return Err(Error::Argument(format!("the angular form needs N >= 3 (got {n})")));
    }
    if !(hbar > T::zero()) {
        return Err(Error::Argument(format!("hbar must be positive (got {hbar})")));
    }
    let mass = density.total_mass();
    if (mass - T::one()).abs() > lit(RADIAL_NORM_TOL) {
        return Err(Error::Precondition(format!("radial density is not normalised (mass {mass})")));
    }
    let (r, wr) = density.radial_rule();
    let weights: Vec<T> = r.iter().zip(&wr).map(|(r, w)| *w * density.weight(*r)).collect();

    // θ rule: trapezoid in t with θ = π(t − sin(2πt)/2π). The map flattens
    // both ends so odd powers of sin θ (odd N) keep high-order accuracy.
    let k_max = p_r.abs() * density.r_max() / hbar;
    let m = ((k_max + T::from_usize_lossy(n)) * lit::<T>(8.0) + lit::<T>(256.0))
        .to_usize()
        .unwrap_or(4096);
    let dt = T::one() / T::from_usize_lossy(m);
    let two_pi = T::PI() + T::PI();
    let power = T::from_usize_lossy(n - 2);
    let mut cos = Vec::with_capacity(m + 1);
    let mut ang = Vec::with_capacity(m + 1);
    let mut norm = T::zero();
    for j in 1..m {
        let t = dt * T::from_usize_lossy(j);
        let th = T::PI() * (t - (two_pi * t).sin() / two_pi);
        let jac = T::one() - (two_pi * t).cos();
        let w = jac * th.sin().abs().powf(power);
        cos.push(th.cos());
        ang.push(w);
        norm += w;
    }
    let mut exact = cplx(T::zero(), T::zero());
    let mut approx = T::zero();
    let denom = lit::<T>(2.0) * power * hbar * hbar;
    for (ri, wi) in r.iter().zip(&weights) {
        if *wi == T::zero() {
            continue;
        }
        let kr = p_r * *ri / hbar;
        // cos θ ↦ −cos θ is a symmetry of the weight, so the average is real
        let mut s = T::zero();
        for (c, w) in cos.iter().zip(&ang) {
            s += *w * (kr * *c).cos();
        }
        exact += cplx(*wi * s / norm, T::zero());
        approx += *wi * (-(p_r * p_r * *ri * *ri) / denom).exp();
    }
    Ok(RadialCharacteristic {
        exact,
        approx,
        difference: (exact - cplx(approx, T::zero())).norm(),
    })
}

/// `C(p) = ∫ e^{−b p²/ħ} dμ(b)` for a discrete measure `{(b_k, μ_k)}`.
pub fn measure_superposition<T: Real>(weights: &[(T, T)], p_r: T, hbar: T) -> Result<T> {
    if weights.is_empty() {
        return Err(Error::Argument("measure needs at least one atom".into()));
    }
    let mut total = T::zero();
    for (b, mu) in weights {
        if !(*b > T::zero()) || !(*mu >= T::zero()) {
            return Err(Error::Argument(format!("atoms need b > 0 and weight >= 0 (got {b}, {mu})")));
        }
        total += *mu;
    }
    if (total - T::one()).abs() > lit(MEASURE_NORM_TOL) {
        return Err(Error::Precondition(format!("measure weights sum to {total}, not 1")));
    }
    Ok(weights
        .iter()
        .fold(T::zero(), |s, (b, mu)| s + *mu * (-*b * p_r * p_r / hbar).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_order_is_enforced() {
        let mut p = LadderPolynomial::<f64>::new();
        assert!(p.add_word(1.0, &[LadderOp::a_dag(0), LadderOp::b(0)]).is_ok());
        let err = p.add_word(1.0, &[LadderOp::a(0), LadderOp::a_dag(0)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn hermiticity_of_builders() {
        assert!(LadderPolynomial::<f64>::h1(3, 0.7).is_hermitian());
        let p = LadderPolynomial::from_words(&[(1.0, vec![LadderOp::a_dag(0), LadderOp::b(1)])]).unwrap();
        assert!(!p.is_hermitian());
    }

    #[test]
    fn sphere_area() {
        // S_1 = 2π, S_2 = 4π
        assert!((ln_sphere_area(2) - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
        assert!((ln_sphere_area(3) - (4.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }
}
