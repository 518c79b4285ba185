//! Equitable partitions seeded by the marked vertex and the reduced
//! (quotient) Laplacian acting on the span of the cell superpositions.
//!
//! The Laplacian follows the sign convention of the search Hamiltonian
//! `H0 = -gamma L - |w><w|`: adjacency off the diagonal and the negative
//! vertex degree on it.

use std::collections::HashMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("partition is not equitable: vertices of cell {cell} disagree on their neighbor count into cell {other}")]
    NotEquitable { cell: usize, other: usize },
    #[error("partition covers {covered} vertices but the graph has {n}")]
    NotCovering { covered: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Ordered cells `m_0..m_{M-1}` with `m_0 = {w}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    marked: usize,
}

impl Partition {
    /// Builds a partition from explicit cells. Cells are sorted internally but
    /// kept in the given order; the first cell must be `{marked}`.
    pub fn from_cells(mut cells: Vec<Vec<usize>>, marked: usize) -> Self {
        for c in &mut cells {
            c.sort_unstable();
        }
        Self { cells, marked }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn marked(&self) -> usize {
        self.marked
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// Cell index of every vertex.
    pub fn cell_of(&self, n_vertices: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; n_vertices];
        for (i, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                of[v] = i;
            }
        }
        of
    }
}

/// Neighbor counts `b[i][j]` of cell-`i` vertices into cell `j`, or the first
/// pair of cells on which the counts are not constant.
fn cell_neighbor_counts(g: &Graph, p: &Partition) -> Result<Vec<Vec<usize>>, PartitionError> {
    let m = p.n_cells();
    let cell_of = p.cell_of(g.n_vertices());
    let mut b = vec![vec![0usize; m]; m];
    let mut row = vec![0usize; m];
    for (i, cell) in p.cells().iter().enumerate() {
        for (k, &v) in cell.iter().enumerate() {
            row.iter_mut().for_each(|x| *x = 0);
            for &u in g.neighbors(v) {
                row[cell_of[u as usize]] += 1;
            }
            if k == 0 {
                b[i].copy_from_slice(&row);
            } else if let Some(j) = (0..m).find(|&j| row[j] != b[i][j]) {
                return Err(PartitionError::NotEquitable { cell: i, other: j });
            }
        }
    }
    Ok(b)
}

/// True iff every vertex of each cell has the same number of neighbors in
/// every other cell.
pub fn is_equitable(g: &Graph, p: &Partition) -> bool {
    cell_neighbor_counts(g, p).is_ok()
}

/// Iterated color refinement of the seed `{{w}, V \ {w}}` until the number of
/// colors stops growing. Returns one color per vertex.
fn refine_colors(g: &Graph, mut color: Vec<usize>) -> Vec<usize> {
    let n = g.n_vertices();
    let mut n_colors = color.iter().copied().max().map_or(0, |c| c + 1);
    loop {
        let mut signatures: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            counts.clear();
            for &u in g.neighbors(v) {
                *counts.entry(color[u as usize]).or_insert(0) += 1;
            }
            let mut sig: Vec<(usize, usize)> = counts.iter().map(|(&c, &k)| (c, k)).collect();
            sig.sort_unstable();
            let fresh = signatures.len();
            next[v] = *signatures.entry((color[v], sig)).or_insert(fresh);
        }
        let next_count = signatures.len();
        color = next;
        if next_count == n_colors {
            return color;
        }
        n_colors = next_count;
    }
}

/// Coarsest equitable partition refining `{{w}, V \ {w}}`.
///
/// Cells are ordered by graph distance from `w`, ties broken by their smallest
/// vertex, so cell indices are reproducible.
pub fn equitable_partition(g: &Graph, w: usize) -> Result<Partition, PartitionError> {
    let n = g.n_vertices();
    if w >= n {
        return Err(PartitionError::VertexOutOfRange { vertex: w, n });
    }
    let seed = (0..n).map(|v| usize::from(v != w)).collect();
    let color = refine_colors(g, seed);

    let mut by_color: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &c) in color.iter().enumerate() {
        by_color.entry(c).or_default().push(v);
    }
    let dist = g.distances_from(w);
    let mut cells: Vec<Vec<usize>> = by_color.into_values().collect();
    // vertices are pushed in increasing order, so cell[0] is the minimum
    cells.sort_by_key(|c| (dist[c[0]], c[0]));
    Ok(Partition::from_cells(cells, w))
}

/// Cell sizes and the symmetric reduced Laplacian in the orthonormal basis of
/// cell superpositions `|m_i> = |m_i|^{-1/2} sum_{j in m_i} |j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    cell_sizes: Vec<usize>,
    laplacian: DMatrix<f64>,
    n_vertices: usize,
}

impl ReducedModel {
    /// Builds a model directly from a quotient-count matrix `b[i][j]` (the
    /// number of neighbors in cell `j` of each vertex in cell `i`).
    pub fn from_counts(cell_sizes: Vec<usize>, b: &[Vec<usize>]) -> Self {
        let m = cell_sizes.len();
        let n_vertices = cell_sizes.iter().sum();
        let laplacian = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                let degree: usize = b[i].iter().sum();
                b[i][i] as f64 - degree as f64
            } else {
                // E_ij / sqrt(|m_i||m_j|) with E_ij = |m_i| b_ij
                b[i][j] as f64 * (cell_sizes[i] as f64 / cell_sizes[j] as f64).sqrt()
            }
        });
        Self {
            cell_sizes,
            laplacian,
            n_vertices,
        }
    }

    pub fn cell_sizes(&self) -> &[usize] {
        &self.cell_sizes
    }

    pub fn n_cells(&self) -> usize {
        self.cell_sizes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// `L~`, adjacency-minus-degree convention.
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Degree of the marked vertex, read off the reduced diagonal.
    pub fn marked_degree(&self) -> f64 {
        -self.laplacian[(0, 0)]
    }
}

pub fn reduce_laplacian(g: &Graph, p: &Partition) -> Result<ReducedModel, PartitionError> {
    let covered: usize = p.cells().iter().map(Vec::len).sum();
    if covered != g.n_vertices() {
        return Err(PartitionError::NotCovering {
            covered,
            n: g.n_vertices(),
        });
    }
    let b = cell_neighbor_counts(g, p)?;
    Ok(ReducedModel::from_counts(p.cell_sizes(), &b))
}

/// Convenience: equitable partition plus reduced model for marked vertex `w`.
pub fn reduce(g: &Graph, w: usize) -> Result<(Partition, ReducedModel), PartitionError> {
    let p = equitable_partition(g, w)?;
    let m = reduce_laplacian(g, &p)?;
    Ok((p, m))
}

/// The uniform superposition `|s>` in the reduced basis: entries `sqrt(|m_i|/N)`.
pub fn project_uniform(m: &ReducedModel) -> Vec<f64> {
    let n = m.n_vertices() as f64;
    m.cell_sizes().iter().map(|&s| (s as f64 / n).sqrt()).collect()
}

/// Expands reduced amplitudes into the full vertex basis, placing
/// `c_i / sqrt(|m_i|)` on every vertex of cell `i`.
pub fn lift_state<T>(p: &Partition, c: &[T]) -> Result<Vec<T>, PartitionError>
where
    T: Copy + Default + std::ops::Div<f64, Output = T>,
{
    if c.len() != p.n_cells() {
        return Err(PartitionError::DimensionMismatch {
            expected: p.n_cells(),
            got: c.len(),
        });
    }
    let n: usize = p.cells().iter().map(Vec::len).sum();
    let mut full = vec![T::default(); n];
    for (cell, &amp) in p.cells().iter().zip(c) {
        let scaled = amp / (cell.len() as f64).sqrt();
        for &v in cell {
            full[v] = scaled;
        }
    }
    Ok(full)
}

/// Inverse of [`lift_state`] on the invariant subspace: `c_i = |m_i|^{-1/2} sum_{j in m_i} psi_j`.
pub fn project_state<T>(p: &Partition, full: &[T]) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>,
{
    p.cells()
        .iter()
        .map(|cell| {
            let sum = cell.iter().fold(T::default(), |acc, &v| acc + full[v]);
            sum / (cell.len() as f64).sqrt()
        })
        .collect()
}
