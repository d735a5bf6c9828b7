//! Homogeneous trees `T(p, M)`: stratification, BFS vertex indexing and
//! the Hamiltonians built on them.
//!
//! Vertices are numbered breadth-first: the root is 0, each distance shell
//! `V_k` occupies a contiguous index range, and the children of a vertex are
//! contiguous. Site-level output anywhere in the crate refers to this order.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default limit on the number of vertices a Hamiltonian may be built for.
pub const DEFAULT_VERTEX_CAP: usize = 1 << 21;

/// Degree `p >= 2` and generation `M >= 1` of a homogeneous tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeParams {
    p: usize,
    m: usize,
}

impl TreeParams {
    pub fn new(p: usize, m: usize) -> Result<Self> {
        if p < 2 || m < 1 {
            return Err(Error::InvalidTree { p, m });
        }
        Ok(Self { p, m })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn generation(&self) -> usize {
        self.m
    }
}

/// Shell sizes `|V_0|, ..., |V_M|` and the BFS offset of each shell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl Stratification {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Number of shells, `M + 1`.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn total(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0) + self.sizes.last().copied().unwrap_or(0)
    }

    /// Index range of shell `k`.
    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.sizes[k]
    }

    /// Shell containing vertex `n`.
    pub fn stratum_of(&self, n: usize) -> Result<usize> {
        let total = self.total();
        if n >= total {
            return Err(Error::IndexOutOfRange {
                index: n,
                size: total,
            });
        }
        Ok(self.offsets.partition_point(|&o| o <= n) - 1)
    }
}

fn overflow(params: TreeParams) -> Error {
    Error::VertexCountOverflow {
        p: params.p,
        m: params.m,
    }
}

/// `|V_0| = 1`, `|V_k| = p (p-1)^{k-1}`.
pub fn stratum_sizes(params: TreeParams) -> Result<Stratification> {
    let mut sizes = Vec::with_capacity(params.m + 1);
    let mut offsets = Vec::with_capacity(params.m + 1);
    let mut size = 1usize;
    let mut offset = 0usize;
    for k in 0..=params.m {
        if k == 1 {
            size = params.p;
        } else if k > 1 {
            size = size.checked_mul(params.p - 1).ok_or(overflow(params))?;
        }
        sizes.push(size);
        offsets.push(offset);
        offset = offset.checked_add(size).ok_or(overflow(params))?;
    }
    Ok(Stratification { sizes, offsets })
}

/// Total number of vertices, `1 + p((p-1)^M - 1)/(p-2)` (or `2M + 1` for `p = 2`).
pub fn vertex_count(params: TreeParams) -> Result<usize> {
    Ok(stratum_sizes(params)?.total())
}

/// Shell index of vertex `n` under BFS numbering.
pub fn stratum_of(params: TreeParams, n: usize) -> Result<usize> {
    stratum_sizes(params)?.stratum_of(n)
}

/// Parent of every non-root vertex, in BFS order (`parents[v - 1]` is the
/// parent of `v`).
fn bfs_parents(params: TreeParams, strat: &Stratification) -> Vec<usize> {
    let mut parents = Vec::with_capacity(strat.total().saturating_sub(1));
    for k in 1..strat.len() {
        let fanout = if k == 1 { params.p } else { params.p - 1 };
        for parent in strat.range(k - 1) {
            parents.extend(std::iter::repeat_n(parent, fanout));
        }
    }
    parents
}

/// Undirected edges `(parent, child)` in BFS order.
pub fn edges(params: TreeParams) -> Result<Vec<(usize, usize)>> {
    let strat = stratum_sizes(params)?;
    Ok(bfs_parents(params, &strat)
        .into_iter()
        .enumerate()
        .map(|(i, parent)| (parent, i + 1))
        .collect())
}

/// Writes the edge list as `i j` lines, one edge per line.
pub fn write_edge_list<W: Write>(params: TreeParams, mut out: W) -> Result<()> {
    let edges = edges(params)?;
    let io_err = |e: io::Error| Error::InvalidArgument(format!("edge list write failed: {e}"));
    for (a, b) in edges {
        writeln!(out, "{a} {b}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Which generator the Hamiltonian represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// Plain adjacency matrix, zero diagonal.
    Adjacency,
    /// Adjacency with `-degree` on the diagonal.
    Mb,
}

/// Real symmetric Hamiltonian on a tree, `base + shift * I`.
///
/// Off-diagonal entries are stored in compressed rows; the diagonal is kept
/// separately. [`SymmetricHamiltonian::to_dense`] materializes the matrix.
#[derive(Debug, Clone)]
pub struct SymmetricHamiltonian<T> {
    kind: HamiltonianKind,
    shift: T,
    diagonal: Vec<T>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<T>,
    params: Option<TreeParams>,
}

impl<T: Real> SymmetricHamiltonian<T> {
    /// Builds from an explicit symmetric edge set. Used for trees and for
    /// small hand-made test graphs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], diagonal: Vec<T>) -> Result<Self> {
        if diagonal.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: diagonal.len(),
            });
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, size: n });
                }
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(2 * edges.len());
        row_ptr.push(0);
        for row in &mut adj {
            row.sort_unstable();
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let values = vec![T::one(); cols.len()];
        Ok(Self {
            kind: HamiltonianKind::Adjacency,
            shift: T::zero(),
            diagonal,
            row_ptr,
            cols,
            values,
            params: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    /// Scalar added on top of the base kind by [`diagonal_shift`].
    pub fn shift(&self) -> T {
        self.shift
    }

    pub fn tree_params(&self) -> Option<TreeParams> {
        self.params
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    /// Number of stored nonzero off-diagonal entries (twice the edge count).
    pub fn offdiag_nnz(&self) -> usize {
        self.cols.len()
    }

    /// Off-diagonal neighbours of row `i` with their values.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diagonal[i];
        }
        self.row(i)
            .find(|&(c, _)| c == j)
            .map_or(T::zero(), |(_, v)| v)
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diagonal[i] * x[i];
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *o = acc;
        }
    }

    /// Row-major dense copy; refuses dimensions above `cap`.
    pub fn to_dense(&self, cap: usize) -> Result<Vec<T>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::CapExceeded { vertices: n, cap });
        }
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = self.diagonal[i];
            for (j, v) in self.row(i) {
                a[i * n + j] = v;
            }
        }
        Ok(a)
    }

    /// Interval `[lo, hi]` containing the spectrum (Gershgorin discs).
    pub fn spectral_bounds(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..self.dim() {
            let radius: T = self.row(i).map(|(_, v)| v.abs()).sum();
            lo = lo.min(self.diagonal[i] - radius);
            hi = hi.max(self.diagonal[i] + radius);
        }
        (lo, hi)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }
}

fn build_tree<T: Real>(
    params: TreeParams,
    cap: usize,
    kind: HamiltonianKind,
) -> Result<SymmetricHamiltonian<T>> {
    let n = vertex_count(params)?;
    if n > cap {
        return Err(Error::CapExceeded { vertices: n, cap });
    }
    let mut h = SymmetricHamiltonian::from_edges(n, &edges(params)?, vec![T::zero(); n])?;
    if kind == HamiltonianKind::Mb {
        for i in 0..n {
            h.diagonal[i] = -T::from_count(h.degree(i));
        }
    }
    h.kind = kind;
    h.params = Some(params);
    Ok(h)
}

/// Adjacency matrix of `T(p, M)` under the default vertex cap.
pub fn build_adjacency<T: Real>(params: TreeParams) -> Result<SymmetricHamiltonian<T>> {
    build_adjacency_capped(params, DEFAULT_VERTEX_CAP)
}

pub fn build_adjacency_capped<T: Real>(
    params: TreeParams,
    cap: usize,
) -> Result<SymmetricHamiltonian<T>> {
    build_tree(params, cap, HamiltonianKind::Adjacency)
}

/// Adjacency with `-degree(v)` on the diagonal.
pub fn build_mb_hamiltonian<T: Real>(params: TreeParams) -> Result<SymmetricHamiltonian<T>> {
    build_mb_hamiltonian_capped(params, DEFAULT_VERTEX_CAP)
}

pub fn build_mb_hamiltonian_capped<T: Real>(
    params: TreeParams,
    cap: usize,
) -> Result<SymmetricHamiltonian<T>> {
    build_tree(params, cap, HamiltonianKind::Mb)
}

/// `H + c I`.
pub fn diagonal_shift<T: Real>(h: &SymmetricHamiltonian<T>, c: T) -> SymmetricHamiltonian<T> {
    let mut shifted = h.clone();
    shifted.diagonal.iter_mut().for_each(|d| *d += c);
    shifted.shift += c;
    shifted
}
