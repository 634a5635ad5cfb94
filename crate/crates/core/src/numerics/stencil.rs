//! Finite-difference weights on arbitrary node sets.

use crate::scalar::Real;

/// Number of nodes in every derivative stencil.
pub const STENCIL_WIDTH: usize = 5;

/// Derivative weights for orders `0..=max_order` at `z` using nodes `xs`
/// (Fornberg's recursion). `out[j][k]` is the weight of node `j` for the
/// `k`-th derivative.
pub fn fornberg_weights<T: Real>(z: T, xs: &[T], max_order: usize) -> Vec<Vec<T>> {
    let n = xs.len();
    let mut c = vec![vec![T::zero(); max_order + 1]; n];
    let mut c1 = T::one();
    let mut c4 = xs[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = T::from_usize_lossy(k);
                    c[i][k] = c1 * (kk * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                let kk = T::from_usize_lossy(k);
                c[j][k] = (c4 * c[j][k] - kk * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Per-node stencil: first node index and the weights for that node's
/// first and second derivative.
#[derive(Debug, Clone)]
pub(crate) struct NodeStencil<T> {
    pub start: usize,
    pub d1: [T; STENCIL_WIDTH],
    pub d2: [T; STENCIL_WIDTH],
}

/// Centred five-point stencils in the interior, shifted (one-sided) within
/// two nodes of either edge.
pub(crate) fn build_stencils<T: Real>(nodes: &[T]) -> Vec<NodeStencil<T>> {
    let n = nodes.len();
    debug_assert!(n >= STENCIL_WIDTH);
    let half = STENCIL_WIDTH / 2;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - STENCIL_WIDTH);
            let w = fornberg_weights(nodes[i], &nodes[start..start + STENCIL_WIDTH], 2);
            let mut d1 = [T::zero(); STENCIL_WIDTH];
            let mut d2 = [T::zero(); STENCIL_WIDTH];
            for j in 0..STENCIL_WIDTH {
                d1[j] = w[j][1];
                d2[j] = w[j][2];
            }
            NodeStencil { start, d1, d2 }
        })
        .collect()
}
