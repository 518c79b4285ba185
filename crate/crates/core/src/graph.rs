//! Graph families searched by the walk: complete graphs, prime-order Paley
//! graphs and hypercubes.
//!
//! Every graph keeps sorted neighbor lists. Graphs with at most
//! [`DENSE_LIMIT`] vertices additionally carry a dense symmetric bit matrix so
//! adjacency queries and common-neighbor counts are word-parallel.

use bitvec::prelude::*;
use thiserror::Error;

/// Largest vertex count for which the dense bit matrix is materialized.
pub const DENSE_LIMIT: usize = 1 << 13;

/// Largest supported hypercube dimension.
pub const MAX_HYPERCUBE_DIM: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid graph size {0}: a complete graph needs at least 2 vertices")]
    InvalidSize(usize),
    #[error("invalid Paley order {0}: must be a prime congruent to 1 mod 4")]
    InvalidPaleyOrder(u64),
    #[error("invalid hypercube dimension {0}: must lie in 1..={MAX_HYPERCUBE_DIM}")]
    InvalidHypercubeDim(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Complete,
    Paley,
    Hypercube,
}

/// Dense symmetric adjacency bit matrix, one row of `n` bits per vertex.
#[derive(Debug, Clone)]
struct BitMatrix {
    rows: Vec<BitVec<u64, Lsb0>>,
}

impl BitMatrix {
    fn from_neighbors(neighbors: &[Vec<u32>]) -> Self {
        let n = neighbors.len();
        let rows = neighbors
            .iter()
            .map(|nb| {
                let mut row = bitvec![u64, Lsb0; 0; n];
                for &v in nb {
                    row.set(v as usize, true);
                }
                row
            })
            .collect();
        Self { rows }
    }

    fn get(&self, u: usize, v: usize) -> bool {
        self.rows[u][v]
    }

    fn common(&self, u: usize, v: usize) -> usize {
        self.rows[u]
            .as_raw_slice()
            .iter()
            .zip(self.rows[v].as_raw_slice())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// An undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    family: Family,
    neighbors: Vec<Vec<u32>>,
    dense: Option<BitMatrix>,
}

impl Graph {
    fn from_neighbors(family: Family, mut neighbors: Vec<Vec<u32>>) -> Self {
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        let dense = (neighbors.len() <= DENSE_LIMIT).then(|| BitMatrix::from_neighbors(&neighbors));
        Self {
            family,
            neighbors,
            dense,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_vertices(&self) -> usize {
        self.neighbors.len()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        match &self.dense {
            Some(bits) => bits.get(u, v),
            None => self.neighbors[u].binary_search(&(v as u32)).is_ok(),
        }
    }

    /// Number of vertices adjacent to both `u` and `v`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        match &self.dense {
            Some(bits) => bits.common(u, v),
            None => {
                let (a, b) = (&self.neighbors[u], &self.neighbors[v]);
                let (mut i, mut j, mut count) = (0, 0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            count += 1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                count
            }
        }
    }

    /// Breadth-first distances from `source`; unreachable vertices get `usize::MAX`.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices()];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                let v = v as usize;
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

pub fn build_complete(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    let neighbors = (0..n)
        .map(|u| (0..n as u32).filter(|&v| v as usize != u).collect())
        .collect();
    Ok(Graph::from_neighbors(Family::Complete, neighbors))
}

/// Deterministic trial division.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_multiple_of(2) {
        return q == 2;
    }
    let mut d = 3u64;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Paley graph over the prime field of order `q`: `u ~ v` iff `u - v` is a
/// nonzero square mod `q`.
pub fn build_paley(q: u64) -> Result<Graph, GraphError> {
    if !is_prime(q) || q % 4 != 1 {
        return Err(GraphError::InvalidPaleyOrder(q));
    }
    let n = q as usize;
    let mut is_residue = vec![false; n];
    for x in 1..q {
        is_residue[((x * x) % q) as usize] = true;
    }
    let neighbors = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u && is_residue[(u + n - v) % n])
                .map(|v| v as u32)
                .collect()
        })
        .collect();
    Ok(Graph::from_neighbors(Family::Paley, neighbors))
}

/// The `dim`-dimensional hypercube; vertices are bit strings, adjacent when
/// they differ in exactly one bit.
pub fn build_hypercube(dim: u32) -> Result<Graph, GraphError> {
    if !(1..=MAX_HYPERCUBE_DIM).contains(&dim) {
        return Err(GraphError::InvalidHypercubeDim(dim));
    }
    let n = 1usize << dim;
    let neighbors = (0..n as u32)
        .map(|u| (0..dim).map(|b| u ^ (1 << b)).collect())
        .collect();
    Ok(Graph::from_neighbors(Family::Hypercube, neighbors))
}

/// Strongly regular graph parameters `(N, k, lambda, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SrgParams {
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu: usize,
}

impl SrgParams {
    pub fn new(n: usize, k: usize, lambda: usize, mu: usize) -> Self {
        Self { n, k, lambda, mu }
    }

    /// Parameters of the Paley graph of prime order `q`.
    pub fn paley(q: usize) -> Self {
        Self::new(q, (q - 1) / 2, (q - 5) / 4, (q - 1) / 4)
    }

    /// `k (k - lambda - 1) = (N - k - 1) mu`.
    pub fn is_feasible(&self) -> bool {
        let (n, k, lambda, mu) = (self.n as i64, self.k as i64, self.lambda as i64, self.mu as i64);
        k < n && k * (k - lambda - 1) == (n - k - 1) * mu
    }
}

/// True iff `g` has `p.n` vertices, is `p.k`-regular, and every adjacent
/// (non-adjacent) pair has exactly `p.lambda` (`p.mu`) common neighbors.
pub fn validate_srg(g: &Graph, p: &SrgParams) -> bool {
    let n = g.n_vertices();
    if n != p.n || !p.is_feasible() || (0..n).any(|v| g.degree(v) != p.k) {
        return false;
    }
    for u in 0..n {
        for v in (u + 1)..n {
            let expected = if g.is_adjacent(u, v) { p.lambda } else { p.mu };
            if g.common_neighbors(u, v) != expected {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_simple(g: &Graph) {
        for u in 0..g.n_vertices() {
            assert!(!g.is_adjacent(u, u));
            for &v in g.neighbors(u) {
                assert!(g.is_adjacent(v as usize, u));
            }
        }
    }

    #[test]
    fn complete_small() {
        let g = build_complete(2).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
        assert_eq!(build_complete(100).unwrap().n_edges(), 4950);
    }

    #[test]
    fn complete_rejects_tiny() {
        assert!(matches!(build_complete(0), Err(GraphError::InvalidSize(0))));
        assert!(matches!(build_complete(1), Err(GraphError::InvalidSize(1))));
    }

    #[test]
    fn paley_rejects_bad_orders() {
        for q in [0, 1, 3, 7, 9, 15, 21, 25, 49] {
            assert!(matches!(build_paley(q), Err(GraphError::InvalidPaleyOrder(_))), "q={q}");
        }
    }

    #[test]
    fn paley_13_pair_counts() {
        let g = build_paley(13).unwrap();
        assert_simple(&g);
        for u in 0..13 {
            assert_eq!(g.degree(u), 6);
            for v in (u + 1)..13 {
                let c = g.common_neighbors(u, v);
                if g.is_adjacent(u, v) {
                    assert_eq!(c, 2);
                } else {
                    assert_eq!(c, 3);
                }
            }
        }
    }

    #[test]
    fn paley_101_is_srg() {
        let g = build_paley(101).unwrap();
        assert!(validate_srg(&g, &SrgParams::new(101, 50, 24, 25)));
        assert_eq!(SrgParams::paley(101), SrgParams::new(101, 50, 24, 25));
    }

    #[test]
    fn paley_parameters_hold_for_primes_below_1000() {
        for q in (5..1000u64).filter(|&q| is_prime(q) && q % 4 == 1) {
            let g = build_paley(q).unwrap();
            let p = SrgParams::paley(q as usize);
            assert!(p.is_feasible());
            assert!(validate_srg(&g, &p), "q={q}");
        }
    }

    #[test]
    fn complete_is_degenerate_srg() {
        let g = build_complete(5).unwrap();
        assert!(validate_srg(&g, &SrgParams::new(5, 4, 3, 0)));
    }

    #[test]
    fn hypercube_is_not_srg() {
        let g = build_hypercube(3).unwrap();
        for k in 0..8 {
            for lambda in 0..8 {
                for mu in 0..8 {
                    assert!(!validate_srg(&g, &SrgParams::new(8, k, lambda, mu)));
                }
            }
        }
    }

    #[test]
    fn hypercube_counts() {
        let g = build_hypercube(1).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (2, 1));
        let g = build_hypercube(4).unwrap();
        assert_simple(&g);
        assert_eq!((g.n_vertices(), g.n_edges()), (16, 32));
        assert_eq!(*g.distances_from(0).iter().max().unwrap(), 4);
        let g = build_hypercube(10).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (1024, 5120));
        assert!((0..1024).all(|v| g.degree(v) == 10));
    }

    #[test]
    fn hypercube_rejects_out_of_range() {
        assert!(build_hypercube(0).is_err());
        assert!(build_hypercube(21).is_err());
    }

    #[test]
    fn sparse_path_matches_dense() {
        // 2^16 vertices exceeds the dense limit, so adjacency goes through neighbor lists
        let g = build_hypercube(16).unwrap();
        assert!(g.dense.is_none());
        assert!(g.is_adjacent(0, 1 << 7));
        assert!(!g.is_adjacent(0, 3));
        assert_eq!(g.common_neighbors(0, 3), 2);
        assert_eq!(g.common_neighbors(0, 1), 0);
    }

    #[test]
    fn trial_division() {
        let primes: Vec<u64> = (0..30).filter(|&q| is_prime(q)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(4001));
        assert!(!is_prime(4003 * 3));
    }
}
