//! Cluster partitions, coupling matrices and the structural classes A1–A4.
//!
//! * A1: off-diagonal entries nonnegative, zero row sums, irreducible.
//! * A2: A1 and symmetric.
//! * A3: zero row sums only (rectangular allowed, entries of either sign).
//! * A4: symmetric, diagonal blocks in A2, off-diagonal blocks in A3, with
//!   blocks cut by a [`ClusterPartition`].
//!
//! Cluster indices are zero-based throughout the API.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, Range};

use crate::error::{bail, Result};
use crate::linalg::Matrix;
use crate::math::abs;

/// Default absolute tolerance for the class checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Contiguous clusters `{r_{k-1}, …, r_k - 1}` (zero-based node indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    boundaries: Vec<usize>,
}

impl ClusterPartition {
    /// `boundaries` must be strictly increasing, start at 0 and contain at
    /// least one cluster.
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 {
            bail!(Domain, "a partition needs at least one cluster");
        }
        if boundaries[0] != 0 {
            bail!(Domain, "partition boundaries must start at 0, got {}", boundaries[0]);
        }
        if let Some(w) = boundaries.windows(2).find(|w| w[1] <= w[0]) {
            bail!(
                Domain,
                "partition boundaries must be strictly increasing ({} then {})",
                w[0],
                w[1]
            );
        }
        Ok(ClusterPartition { boundaries })
    }

    /// Partition from cluster sizes, e.g. `[2, 3]` for `{0,1}|{2,3,4}`.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut boundaries = Vec::with_capacity(sizes.len() + 1);
        boundaries.push(0);
        let mut acc = 0;
        for &s in sizes {
            acc += s;
            boundaries.push(acc);
        }
        Self::new(boundaries)
    }

    /// All `n` nodes in one cluster.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![0, n])
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Number of clusters `m`.
    pub fn num_clusters(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Total node count `N`.
    pub fn num_nodes(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    /// Node indices of cluster `k`.
    pub fn range(&self, k: usize) -> Range<usize> {
        self.boundaries[k]..self.boundaries[k + 1]
    }

    pub fn size(&self, k: usize) -> usize {
        self.boundaries[k + 1] - self.boundaries[k]
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.num_clusters()).map(|k| self.size(k)).collect()
    }

    /// The controlled node of cluster `k` (its first node).
    pub fn pinned_node(&self, k: usize) -> usize {
        self.boundaries[k]
    }

    /// Cluster containing node `i`.
    pub fn cluster_of(&self, i: usize) -> Option<usize> {
        if i >= self.num_nodes() {
            return None;
        }
        Some(self.boundaries.partition_point(|&b| b <= i) - 1)
    }
}

/// Square coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix(Matrix);

impl CouplingMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            bail!(Dimension, "coupling matrix must be square, got {}x{}", m.rows(), m.cols());
        }
        Ok(CouplingMatrix(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl Deref for CouplingMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// One block `A_{kk'}` together with where it sits in the full matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockView {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub values: Matrix,
}

fn require_square(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        bail!(Dimension, "expected a square matrix, got {}x{}", a.rows(), a.cols());
    }
    Ok(())
}

fn rows_sum_to_zero(a: &Matrix, tol: f64) -> bool {
    (0..a.rows()).all(|i| abs(a.row(i).iter().sum::<f64>()) <= tol)
}

/// Strong connectivity of the digraph with an edge `j -> i` whenever
/// `|a_ij| > tol`, `i != j`. Reachability from node 0 in the graph and in its
/// reverse.
fn strongly_connected(a: &Matrix, tol: f64) -> bool {
    let n = a.rows();
    if n <= 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if v == u || seen[v] {
                    continue;
                }
                // forward: u -> v exists when |a_vu| > tol
                let w = if forward { a[(v, u)] } else { a[(u, v)] };
                if abs(w) > tol {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Class A1: off-diagonals `>= -tol`, zero row sums, irreducible.
/// A 1x1 zero matrix qualifies.
pub fn is_class_a1(a: &Matrix, tol: f64) -> Result<bool> {
    require_square(a)?;
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] < -tol {
                return Ok(false);
            }
        }
    }
    Ok(rows_sum_to_zero(a, tol) && strongly_connected(a, tol))
}

/// Class A2: A1 and symmetric within `tol`.
pub fn is_class_a2(a: &Matrix, tol: f64) -> Result<bool> {
    Ok(is_class_a1(a, tol)? && a.is_symmetric(tol))
}

/// Class A3: every row sums to zero within `tol`.
pub fn is_class_a3(a: &Matrix, tol: f64) -> bool {
    rows_sum_to_zero(a, tol)
}

/// Which class a block of an A4 matrix has to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRequirement {
    A2,
    A3,
}

/// Verdict on a single block `(k, k')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockVerdict {
    pub row_cluster: usize,
    pub col_cluster: usize,
    pub requirement: BlockRequirement,
    pub passed: bool,
}

/// Block-by-block breakdown of the A4 test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct A4Diagnosis {
    pub symmetric: bool,
    pub blocks: Vec<BlockVerdict>,
}

impl A4Diagnosis {
    pub fn passed(&self) -> bool {
        self.symmetric && self.blocks.iter().all(|b| b.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BlockVerdict> {
        self.blocks.iter().filter(|b| !b.passed)
    }
}

/// Runs every check that makes up class A4 and keeps the individual verdicts.
pub fn diagnose_a4(a: &Matrix, part: &ClusterPartition, tol: f64) -> Result<A4Diagnosis> {
    require_square(a)?;
    if a.rows() != part.num_nodes() {
        bail!(
            Dimension,
            "matrix is {}x{} but the partition covers {} nodes",
            a.rows(),
            a.cols(),
            part.num_nodes()
        );
    }
    let m = part.num_clusters();
    let mut blocks = Vec::with_capacity(m * m);
    for k in 0..m {
        for kp in 0..m {
            let values = a.submatrix(part.range(k), part.range(kp));
            let (requirement, passed) = if k == kp {
                (BlockRequirement::A2, is_class_a2(&values, tol)?)
            } else {
                (BlockRequirement::A3, is_class_a3(&values, tol))
            };
            blocks.push(BlockVerdict {
                row_cluster: k,
                col_cluster: kp,
                requirement,
                passed,
            });
        }
    }
    Ok(A4Diagnosis {
        symmetric: a.is_symmetric(tol),
        blocks,
    })
}

/// Class A4 under `part`.
pub fn is_class_a4(a: &Matrix, part: &ClusterPartition, tol: f64) -> Result<bool> {
    Ok(diagnose_a4(a, part, tol)?.passed())
}

/// Block `A_{k k'}` (zero-based cluster indices).
pub fn block(a: &Matrix, part: &ClusterPartition, k: usize, kp: usize) -> Result<BlockView> {
    let m = part.num_clusters();
    if k >= m || kp >= m {
        bail!(OutOfRange, "block ({k}, {kp}) requested from {m} clusters");
    }
    if a.rows() != part.num_nodes() || a.cols() != part.num_nodes() {
        bail!(
            Dimension,
            "matrix is {}x{} but the partition covers {} nodes",
            a.rows(),
            a.cols(),
            part.num_nodes()
        );
    }
    let rows = part.range(k);
    let cols = part.range(kp);
    Ok(BlockView {
        values: a.submatrix(rows.clone(), cols.clone()),
        rows,
        cols,
    })
}

/// Largest `|a_ij|` over pairs in different clusters (0 when `m = 1`).
pub fn max_inter_cluster_magnitude(a: &Matrix, part: &ClusterPartition) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..part.num_nodes() {
        let ci = part.cluster_of(i);
        for j in 0..part.num_nodes() {
            if part.cluster_of(j) != ci {
                best = best.max(abs(a[(i, j)]));
            }
        }
    }
    best
}
