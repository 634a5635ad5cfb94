use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::stencil::{build_stencils, NodeStencil, STENCIL_WIDTH};

/// Which part of the real line a grid discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    FullLine,
    HalfLine,
}

/// How the nodes are laid out; decides the quadrature weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    /// Equispaced nodes with trapezoid weights.
    Uniform,
    /// Geometrically graded nodes with composite (non-uniform) Simpson
    /// weights. Used on the half line, where fiducials behave like powers
    /// of `x` near the origin.
    Geometric,
    /// Caller-supplied nodes and weights.
    Custom,
}

/// One-dimensional quadrature grid.
#[derive(Debug, Clone)]
pub struct Grid<T: Real> {
    kind: DomainKind,
    spacing: Spacing,
    lower: T,
    upper: T,
    nodes: Vec<T>,
    weights: Vec<T>,
    stencils: OnceLock<Vec<NodeStencil<T>>>,
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.lower == other.lower
            && self.upper == other.upper
            && self.nodes == other.nodes
            && self.weights == other.weights
    }
}

impl<T: Real> Grid<T> {
    /// Uniform trapezoid grid on `[lower, upper]` including both endpoints.
    pub fn full_line(lower: T, upper: T, node_count: usize) -> Result<Self> {
        if !(upper > lower) || node_count < 2 {
            return Err(Error::Argument(format!(
                "full-line grid needs lower < upper and >= 2 nodes (got [{lower}, {upper}], n = {node_count})"
            )));
        }
        let h = (upper - lower) / T::from_usize_lossy(node_count - 1);
        let nodes: Vec<T> = (0..node_count)
            .map(|i| lower + h * T::from_usize_lossy(i))
            .collect();
        let weights = trapezoid_weights(&nodes);
        Self::assemble(DomainKind::FullLine, Spacing::Uniform, lower, upper, nodes, weights)
    }

    /// Uniform half-line grid on `(0, upper]`: `node_count` nodes spaced by
    /// `Δx = upper / node_count`, starting at `ε = Δx`.
    pub fn half_line(upper: T, node_count: usize) -> Result<Self> {
        if !(upper > T::zero()) || node_count < 2 {
            return Err(Error::Argument(format!(
                "half-line grid needs upper > 0 and >= 2 nodes (got {upper}, n = {node_count})"
            )));
        }
        let h = upper / T::from_usize_lossy(node_count);
        let nodes: Vec<T> = (1..=node_count).map(|i| h * T::from_usize_lossy(i)).collect();
        let weights = trapezoid_weights(&nodes);
        Self::assemble(DomainKind::HalfLine, Spacing::Uniform, h, upper, nodes, weights)
    }

    /// Geometrically graded half-line grid on `[lower, upper]`, `lower > 0`.
    /// The node count is rounded up to the next odd number so that the
    /// composite Simpson rule closes.
    pub fn half_line_graded(lower: T, upper: T, node_count: usize) -> Result<Self> {
        if !(lower > T::zero()) || !(upper > lower) || node_count < 3 {
            return Err(Error::Argument(format!(
                "graded grid needs 0 < lower < upper and >= 3 nodes (got [{lower}, {upper}], n = {node_count})"
            )));
        }
        let n = if node_count.is_multiple_of(2) { node_count + 1 } else { node_count };
        let log_lo = lower.ln();
        let step = (upper.ln() - log_lo) / T::from_usize_lossy(n - 1);
        let mut nodes: Vec<T> = (0..n)
            .map(|i| (log_lo + step * T::from_usize_lossy(i)).exp())
            .collect();
        nodes[0] = lower;
        nodes[n - 1] = upper;
        let weights = simpson_weights(&nodes);
        Self::assemble(DomainKind::HalfLine, Spacing::Geometric, lower, upper, nodes, weights)
    }

    /// Grid from explicit nodes and weights; validates the invariants.
    pub fn from_parts(kind: DomainKind, nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != weights.len() {
            return Err(Error::Argument(
                "custom grid needs >= 2 nodes and one weight per node".into(),
            ));
        }
        let lower = nodes[0];
        let upper = nodes[nodes.len() - 1];
        Self::assemble(kind, Spacing::Custom, lower, upper, nodes, weights)
    }

    fn assemble(
        kind: DomainKind,
        spacing: Spacing,
        lower: T,
        upper: T,
        nodes: Vec<T>,
        weights: Vec<T>,
    ) -> Result<Self> {
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("grid nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::Argument("quadrature weights must be strictly positive".into()));
        }
        if kind == DomainKind::HalfLine && lower < T::zero() {
            return Err(Error::Argument("half-line grid must have lower bound >= 0".into()));
        }
        Ok(Self {
            kind,
            spacing,
            lower,
            upper,
            nodes,
            weights,
            stencils: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Node spacing for uniform grids.
    pub fn step(&self) -> Option<T> {
        match self.spacing {
            Spacing::Uniform => Some(self.nodes[1] - self.nodes[0]),
            _ => None,
        }
    }

    /// Quadrature of sampled real values.
    pub fn integrate(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| *w * *v).sum()
    }

    /// Quadrature of `f` evaluated at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| *w * f(*x)).sum()
    }

    /// Every other node (and the matching rule) of this grid. Used to check
    /// quadrature convergence against a coarser resolution.
    pub fn coarsened(&self) -> Result<Self> {
        let nodes: Vec<T> = self.nodes.iter().step_by(2).copied().collect();
        match self.spacing {
            Spacing::Uniform if self.kind == DomainKind::FullLine || self.nodes.len() % 2 == 1 => {
                let weights = trapezoid_weights(&nodes);
                let lower = nodes[0];
                let upper = nodes[nodes.len() - 1];
                Self::assemble(self.kind, Spacing::Uniform, lower, upper, nodes, weights)
            }
            Spacing::Geometric if self.nodes.len() % 4 == 1 => {
                let weights = simpson_weights(&nodes);
                Self::assemble(self.kind, Spacing::Geometric, self.lower, self.upper, nodes, weights)
            }
            _ => {
                let weights = trapezoid_weights(&nodes);
                let lower = nodes[0];
                let upper = nodes[nodes.len() - 1];
                Self::assemble(self.kind, Spacing::Custom, lower, upper, nodes, weights)
            }
        }
    }

    pub(crate) fn stencils(&self) -> Result<&[NodeStencil<T>]> {
        if self.nodes.len() < STENCIL_WIDTH {
            return Err(Error::Argument(format!(
                "derivatives need at least {STENCIL_WIDTH} nodes (grid has {})",
                self.nodes.len()
            )));
        }
        Ok(self.stencils.get_or_init(|| build_stencils(&self.nodes)))
    }

    /// Whether `[a, b]` lies inside the grid window.
    pub fn covers(&self, a: T, b: T) -> bool {
        a >= self.lower && b <= self.upper
    }
}

fn trapezoid_weights<T: Real>(nodes: &[T]) -> Vec<T> {
    let n = nodes.len();
    let half = lit::<T>(0.5);
    (0..n)
        .map(|i| {
            let left = if i > 0 { nodes[i] - nodes[i - 1] } else { T::zero() };
            let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

/// Composite Simpson weights on an odd number of (possibly non-uniform)
/// nodes: each pair of cells integrates the quadratic interpolant exactly.
fn simpson_weights<T: Real>(nodes: &[T]) -> Vec<T> {
    let n = nodes.len();
    debug_assert!(n % 2 == 1);
    let six = lit::<T>(6.0);
    let two = lit::<T>(2.0);
    let mut w = vec![T::zero(); n];
    for k in (0..n - 1).step_by(2) {
        let h1 = nodes[k + 1] - nodes[k];
        let h2 = nodes[k + 2] - nodes[k + 1];
        let s = h1 + h2;
        w[k] += s / six * (two - h2 / h1);
        w[k + 1] += s * s * s / (six * h1 * h2);
        w[k + 2] += s / six * (two - h1 / h2);
    }
    w
}
