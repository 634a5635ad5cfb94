//! Hamilton's equations for enhanced symbols, the restricted action and
//! canonical-transformation bookkeeping.

use std::fmt::Write as _;

use crate::coherent::{PhaseDomain, PhasePoint};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::symbols::SymbolFn;

/// Affine runs stop with a flag once `q` drops below this.
pub const Q_FLOOR: f64 = 1e-6;
/// Minimum number of samples accepted by [`restricted_action`].
pub const MIN_ACTION_SAMPLES: usize = 100;
/// Relative tolerance of [`transform_invariance_check`].
pub const INVARIANCE_TOL: f64 = 1e-6;

/// Anything that can drive Hamilton's equations.
pub trait Hamiltonian<T: Real> {
    fn energy(&self, p: T, q: T) -> T;
    /// `(∂H/∂p, ∂H/∂q)`.
    fn gradient(&self, p: T, q: T) -> (T, T);
    fn requires_positive_q(&self) -> bool {
        false
    }
}

impl<T: Real> Hamiltonian<T> for SymbolFn<T> {
    fn energy(&self, p: T, q: T) -> T {
        self.value(p, q)
    }

    fn gradient(&self, p: T, q: T) -> (T, T) {
        SymbolFn::gradient(self, p, q)
    }

    fn requires_positive_q(&self) -> bool {
        SymbolFn::requires_positive_q(self)
    }
}

/// Why an integration stopped before the requested time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityFlag<T> {
    pub t: T,
    pub p: T,
    pub q: T,
}

/// Sampled phase-space path with the energy recorded at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub p: Vec<T>,
    pub q: Vec<T>,
    pub energy: Vec<T>,
    /// Set when an affine run crossed the `q` floor; the state it carries is
    /// the first one below the floor, which is not stored in the samples.
    pub singularity: Option<SingularityFlag<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            energy: Vec::new(),
            singularity: None,
        }
    }

    /// Path given by samples; energy is evaluated from `h`.
    pub fn from_samples(times: Vec<T>, p: Vec<T>, q: Vec<T>, h: &impl Hamiltonian<T>) -> Result<Self> {
        if times.len() != p.len() || p.len() != q.len() {
            return Err(Error::Structural("times, p and q must have equal lengths".into()));
        }
        let energy = p.iter().zip(&q).map(|(p, q)| h.energy(*p, *q)).collect();
        Ok(Self {
            times,
            p,
            q,
            energy,
            singularity: None,
        })
    }

    pub fn push(&mut self, t: T, p: T, q: T, energy: T) {
        self.times.push(t);
        self.p.push(p);
        self.q.push(q);
        self.energy.push(energy);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(T, T, T)> {
        let i = self.len().checked_sub(1)?;
        Some((self.times[i], self.p[i], self.q[i]))
    }

    pub fn min_q(&self) -> Option<T> {
        self.q.iter().copied().reduce(T::min)
    }

    /// `max_t |E(t) − E(0)| / (1 + |E(0)|)`.
    pub fn max_relative_drift(&self) -> T {
        let Some(e0) = self.energy.first().copied() else {
            return T::zero();
        };
        self.energy
            .iter()
            .map(|e| (*e - e0).abs())
            .fold(T::zero(), T::max)
            / (T::one() + e0.abs())
    }

    /// Samples in reverse order, with time running backwards.
    pub fn reversed(&self) -> Self {
        let rev = |v: &Vec<T>| v.iter().rev().copied().collect::<Vec<_>>();
        let t_end = self.times.last().copied().unwrap_or(T::zero());
        Self {
            times: self.times.iter().rev().map(|t| t_end - *t).collect(),
            p: rev(&self.p),
            q: rev(&self.q),
            energy: rev(&self.energy),
            singularity: None,
        }
    }

    /// CSV with header `t,p,q,H`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,q,H\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i].to_f64_lossy(),
                self.p[i].to_f64_lossy(),
                self.q[i].to_f64_lossy(),
                self.energy[i].to_f64_lossy()
            );
        }
        out
    }
}

impl<T: Real> Default for Trajectory<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// One RK4 step; also returns the smallest `q` seen by any stage.
fn rk4_step<T: Real>(h: &impl Hamiltonian<T>, p: T, q: T, dt: T) -> (T, T, T) {
    let f = |p: T, q: T| {
        let (hp, hq) = h.gradient(p, q);
        (-hq, hp)
    };
    let half = lit::<T>(0.5);
    let (k1p, k1q) = f(p, q);
    let (k2p, k2q) = f(p + half * dt * k1p, q + half * dt * k1q);
    let (k3p, k3q) = f(p + half * dt * k2p, q + half * dt * k2q);
    let (k4p, k4q) = f(p + dt * k3p, q + dt * k3q);
    let sixth = dt / lit::<T>(6.0);
    let stage_min = (q + half * dt * k1q).min(q + half * dt * k2q).min(q + dt * k3q);
    (
        p + sixth * (k1p + lit::<T>(2.0) * (k2p + k3p) + k4p),
        q + sixth * (k1q + lit::<T>(2.0) * (k2q + k3q) + k4q),
        stage_min,
    )
}

/// Fixed-step RK4 for `ṗ = −∂H/∂q`, `q̇ = ∂H/∂p` from `t = 0` to
/// `t = duration`; a negative duration integrates backwards.
///
/// The step is `dt` shrunk so that a whole number of steps fits.
pub fn integrate<T: Real>(h: &impl Hamiltonian<T>, start: &PhasePoint<T>, duration: T, dt: T) -> Result<Trajectory<T>> {
    integrate_with_floor(h, start, duration, dt, lit(Q_FLOOR))
}

pub fn integrate_with_floor<T: Real>(
    h: &impl Hamiltonian<T>,
    start: &PhasePoint<T>,
    duration: T,
    dt: T,
    q_floor: T,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::Argument(format!("time step must be positive (got {dt})")));
    }
    if !duration.is_finite() {
        return Err(Error::Argument("duration must be finite".into()));
    }
    let affine = start.domain == PhaseDomain::Affine || h.requires_positive_q();
    if affine && !(start.q > T::zero()) {
        return Err(Error::Domain(format!("affine integration needs q > 0 (got {})", start.q)));
    }
    let ratio = (duration.abs() / dt).ceil();
    let n = ratio.to_usize().unwrap_or(0).max(1);
    let step = duration / T::from_usize_lossy(n);
    let mut traj = Trajectory::new();
    let (mut p, mut q) = (start.p, start.q);
    traj.push(T::zero(), p, q, h.energy(p, q));
    for i in 1..=n {
        let (np, nq, stage_min) = rk4_step(h, p, q, step);
        let t = step * T::from_usize_lossy(i);
        let e = h.energy(np, nq);
        // A stage below the floor means the step straddled the collapse.
        if affine && (nq < q_floor || stage_min < q_floor) {
            traj.singularity = Some(SingularityFlag { t, p: np, q: nq.min(stage_min) });
            break;
        }
        if !(np.is_finite() && nq.is_finite() && e.is_finite()) {
            return Err(Error::Singularity {
                t: (t - step).to_f64_lossy(),
                p: p.to_f64_lossy(),
                q: q.to_f64_lossy(),
                reason: "state or energy became non-finite".into(),
            });
        }
        p = np;
        q = nq;
        traj.push(t, p, q, e);
    }
    Ok(traj)
}

/// Model One under `qp² + C/q`: `q(t) = E t² + 2q₀p₀ t + q₀`,
/// `p(t) = q̇/2q`, valid while `q(t) > 0`.
pub fn model_one_closed_form<T: Real>(c: T, p0: T, q0: T, t: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let e = q0 * p0 * p0 + c / q0;
    let q = e * t * t + two * q0 * p0 * t + q0;
    let qdot = two * e * t + two * q0 * p0;
    (qdot / (two * q), q)
}

/// Turning-point floor `C/E` of Model One.
pub fn model_one_min_q<T: Real>(c: T, p0: T, q0: T) -> T {
    c / (q0 * p0 * p0 + c / q0)
}

/// `∫ p dq` along the sampled path: piecewise quadratic interpolation of
/// `p` and `q` in the sample index, integrated exactly.
pub fn line_integral<T: Real>(p: &[T], q: &[T]) -> T {
    let n = p.len().min(q.len());
    if n < 2 {
        return T::zero();
    }
    if n == 2 {
        return lit::<T>(0.5) * (p[0] + p[1]) * (q[1] - q[0]);
    }
    let mut acc = T::zero();
    let mut i = 0;
    while i + 2 < n {
        acc += panel(&p[i..i + 3], &q[i..i + 3], T::zero(), lit(2.0));
        i += 2;
    }
    if i + 1 < n {
        // one interval left over: use the last three samples, upper half
        acc += panel(&p[n - 3..], &q[n - 3..], T::one(), lit(2.0));
    }
    acc
}

/// `∫_{s0}^{s1} P(s) Q'(s) ds` for quadratics through `s = 0, 1, 2`.
fn panel<T: Real>(p: &[T], q: &[T], s0: T, s1: T) -> T {
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let quad = |v: &[T]| {
        let c1 = (-lit::<T>(3.0) * v[0] + lit::<T>(4.0) * v[1] - v[2]) * half;
        let c2 = (v[0] - two * v[1] + v[2]) * half;
        (v[0], c1, c2)
    };
    let (a0, a1, a2) = quad(p);
    let (_, b1, b2) = quad(q);
    // P Q' = (a0 + a1 s + a2 s²)(b1 + 2 b2 s)
    let coeffs = [a0 * b1, a1 * b1 + two * a0 * b2, a2 * b1 + two * a1 * b2, two * a2 * b2];
    let antider = |s: T| {
        let mut acc = T::zero();
        let mut pow = s;
        for (k, c) in coeffs.iter().enumerate() {
            acc += *c * pow / T::from_usize_lossy(k + 1);
            pow *= s;
        }
        acc
    };
    antider(s1) - antider(s0)
}

/// Trapezoid `∫ f dt` over the trajectory times.
fn trapezoid<T: Real>(t: &[T], f: &[T]) -> T {
    let half = lit::<T>(0.5);
    t.windows(2)
        .zip(f.windows(2))
        .fold(T::zero(), |acc, (t, f)| acc + half * (t[1] - t[0]) * (f[0] + f[1]))
}

/// `A = ∫[p q̇ − H] dt` along `path`, with `H` re-evaluated from `h`.
pub fn restricted_action<T: Real>(path: &Trajectory<T>, h: &impl Hamiltonian<T>) -> Result<T> {
    if path.len() < MIN_ACTION_SAMPLES {
        return Err(Error::Precondition(format!(
            "restricted action needs at least {MIN_ACTION_SAMPLES} samples (got {})",
            path.len()
        )));
    }
    let energy: Vec<T> = path.p.iter().zip(&path.q).map(|(p, q)| h.energy(*p, *q)).collect();
    Ok(line_integral(&path.p, &path.q) - trapezoid(&path.times, &energy))
}

type PointMap<T> = Box<dyn Fn(T, T) -> (T, T) + Send + Sync>;
type PointFn<T> = Box<dyn Fn(T, T) -> T + Send + Sync>;
type PointCheck<T> = Box<dyn Fn(T, T) -> bool + Send + Sync>;

/// Change of phase-space coordinates with `p dq = p̃ dq̃ + dG̃`.
pub struct CanonicalTransform<T> {
    name: String,
    forward: PointMap<T>,
    inverse: PointMap<T>,
    generator: PointFn<T>,
    valid: PointCheck<T>,
}

impl<T: Real> std::fmt::Debug for CanonicalTransform<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CanonicalTransform").field("name", &self.name).finish()
    }
}

impl<T: Real> CanonicalTransform<T> {
    /// `forward`, `inverse` map `(p, q)`; `generator` is `G̃(p, q)` in the
    /// original coordinates; `valid` guards the domain.
    pub fn new(
        name: impl Into<String>,
        forward: impl Fn(T, T) -> (T, T) + Send + Sync + 'static,
        inverse: impl Fn(T, T) -> (T, T) + Send + Sync + 'static,
        generator: impl Fn(T, T) -> T + Send + Sync + 'static,
        valid: impl Fn(T, T) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            forward: Box::new(forward),
            inverse: Box::new(inverse),
            generator: Box::new(generator),
            valid: Box::new(valid),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |p, q| (p, q), |p, q| (p, q), |_, _| T::zero(), |_, _| true)
    }

    /// `q̃ = q + a`, `p̃ = p`.
    pub fn shift(a: T) -> Self {
        Self::new("shift", move |p, q| (p, q + a), move |p, q| (p, q - a), |_, _| T::zero(), |_, _| true)
    }

    /// `p̃ = pq`, `q̃ = ln q` on `q > 0`.
    pub fn affine_log() -> Self {
        Self::new(
            "affine-log",
            |p, q: T| (p * q, q.ln()),
            |pt, qt: T| {
                let q = qt.exp();
                (pt / q, q)
            },
            |_, _| T::zero(),
            |_, q| q > T::zero(),
        )
    }

    /// `p̃ = −q`, `q̃ = p`, with `G̃ = pq`.
    pub fn exchange() -> Self {
        Self::new("exchange", |p, q: T| (-q, p), |pt: T, qt| (qt, -pt), |p, q| p * q, |_, _| true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forward(&self, p: T, q: T) -> (T, T) {
        (self.forward)(p, q)
    }

    pub fn inverse(&self, p: T, q: T) -> (T, T) {
        (self.inverse)(p, q)
    }

    pub fn is_valid(&self, p: T, q: T) -> bool {
        (self.valid)(p, q)
    }

    /// `G̃(end) − G̃(start)` along a path.
    pub fn generator_increment(&self, path: &Trajectory<T>) -> T {
        match (path.p.first(), path.q.first(), path.p.last(), path.q.last()) {
            (Some(p0), Some(q0), Some(p1), Some(q1)) => (self.generator)(*p1, *q1) - (self.generator)(*p0, *q0),
            _ => T::zero(),
        }
    }

    /// Largest `|inverse(forward(x)) − x|` over the given points.
    pub fn roundtrip_error(&self, points: &[(T, T)]) -> T {
        points
            .iter()
            .map(|(p, q)| {
                let (a, b) = self.forward(*p, *q);
                let (p2, q2) = self.inverse(a, b);
                (p2 - *p).abs().max((q2 - *q).abs())
            })
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport<T> {
    /// `∫ p dq`.
    pub original: T,
    /// `∫ p̃ dq̃`.
    pub transformed: T,
    /// `ΔG̃`.
    pub generator: T,
    pub residual: T,
    pub tolerance: T,
    pub passed: bool,
}

/// Checks `∫p dq − ∫p̃ dq̃ − ΔG̃ = 0` along `traj`.
pub fn transform_invariance_check<T: Real>(
    traj: &Trajectory<T>,
    tf: &CanonicalTransform<T>,
) -> Result<InvarianceReport<T>> {
    let mut pt = Vec::with_capacity(traj.len());
    let mut qt = Vec::with_capacity(traj.len());
    for (p, q) in traj.p.iter().zip(&traj.q) {
        if !tf.is_valid(*p, *q) {
            return Err(Error::Domain(format!(
                "transform {} is not defined at (p, q) = ({p}, {q})",
                tf.name()
            )));
        }
        let (a, b) = tf.forward(*p, *q);
        pt.push(a);
        qt.push(b);
    }
    let original = line_integral(&traj.p, &traj.q);
    let transformed = line_integral(&pt, &qt);
    let generator = tf.generator_increment(traj);
    let residual = (original - transformed - generator).abs();
    let tolerance = lit::<T>(INVARIANCE_TOL) * (T::one() + original.abs());
    Ok(InvarianceReport {
        original,
        transformed,
        generator,
        residual,
        tolerance,
        passed: residual <= tolerance,
    })
}
