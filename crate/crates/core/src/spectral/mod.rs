//! Reduced search Hamiltonians `H0 = -gamma L~ - e0 e0^T`, their
//! eigensystems, the critical hopping rate, and how far a graph's two lowest
//! eigenpairs sit from the complete-graph ideal.

mod jacobi;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::partition::{project_uniform, ReducedModel};

/// Models up to this many cells are diagonalized with Jacobi rotations;
/// larger ones go through Householder tridiagonalization and implicit QL.
pub const JACOBI_MAX_DIM: usize = 64;

pub const MAX_DIM: usize = 4096;

const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("hopping rate must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("model dimension {0} exceeds the eigensolver cap of {MAX_DIM}")]
    TooLarge(usize),
    #[error("eigensolver did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("no critical hopping rate found in [{lo:.6e}, {hi:.6e}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("ideality needs at least 2 cells, model has {0}")]
    TooFewCells(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchHamiltonian {
    pub gamma: f64,
    pub matrix: DMatrix<f64>,
}

/// `H0 = -gamma L~ - e0 e0^T`.
pub fn build_h0(m: &ReducedModel, gamma: f64) -> Result<SearchHamiltonian, SpectralError> {
    if !(gamma > 0.0) {
        return Err(SpectralError::NonPositiveGamma(gamma));
    }
    let mut matrix = m.laplacian() * (-gamma);
    matrix[(0, 0)] -= 1.0;
    Ok(SearchHamiltonian { gamma, matrix })
}

/// Eigenpairs in ascending order; `vectors` holds them as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// Largest `||H v - E v||` over all pairs.
    pub fn max_residual(&self, h: &DMatrix<f64>) -> f64 {
        (0..self.values.len())
            .map(|k| {
                let v = self.vectors.column(k);
                (h * v - v * self.values[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.values.len();
        let gram = self.vectors.transpose() * &self.vectors;
        (gram - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Diagonalizes a real symmetric matrix.
pub fn symmetric_eigen(h: &DMatrix<f64>) -> Result<EigenSystem, SpectralError> {
    let n = h.nrows();
    if n > MAX_DIM {
        return Err(SpectralError::TooLarge(n));
    }
    let (values, vectors) = if n <= JACOBI_MAX_DIM {
        jacobi::jacobi_eigen(h).ok_or(SpectralError::NoConvergence { residual: f64::NAN })?
    } else {
        let eig = SymmetricEigen::new(h.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut sorted = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        // deterministic sign: largest-magnitude component positive
        if col[col.iamax()] < 0.0 {
            col = -col;
        }
        sorted.set_column(dst, &col);
    }
    let es = EigenSystem {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: sorted,
    };

    let scale = h.amax().max(1.0);
    let residual = es.max_residual(h).max(es.orthonormality_error());
    if residual > RESIDUAL_TOL * scale {
        return Err(SpectralError::NoConvergence { residual });
    }
    Ok(es)
}

pub fn eigensystem(h: &SearchHamiltonian) -> Result<EigenSystem, SpectralError> {
    symmetric_eigen(&h.matrix)
}

/// `E_1 - E_0` of `H0` at hopping rate `gamma`.
pub fn gap(m: &ReducedModel, gamma: f64) -> Result<f64, SpectralError> {
    let es = eigensystem(&build_h0(m, gamma)?)?;
    Ok(es.values[1] - es.values[0])
}

/// `|<s|psi_0>| - |<w|psi_0>|` for the ground state of `H0`. Negative for
/// small `gamma` (ground state near `|w>`), positive for large `gamma`
/// (ground state near `|s>`), and zero where the ground state is the balanced
/// superposition of `|s>` and `|w>`.
pub fn balance(m: &ReducedModel, gamma: f64) -> Result<f64, SpectralError> {
    let es = eigensystem(&build_h0(m, gamma)?)?;
    let s = project_uniform(m);
    let ground = es.vectors.column(0);
    let overlap_s: f64 = s.iter().zip(ground.iter()).map(|(a, b)| a * b).sum();
    Ok(overlap_s.abs() - ground[0].abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalGamma {
    pub gamma: f64,
    /// `E_1 - E_0` at `gamma`.
    pub gap: f64,
}

const SCAN_POINTS_PER_DECADE: usize = 40;
const BRACKET_EXPANSIONS: usize = 3;
const GAMMA_REL_TOL: f64 = 1e-12;

/// Default search bracket `[1e-3/N, 1e3/N]`.
fn default_bracket(m: &ReducedModel) -> (f64, f64) {
    let n = m.n_vertices() as f64;
    (1e-3 / n, 1e3 / n)
}

fn log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let steps = ((decades * SCAN_POINTS_PER_DECADE as f64).ceil() as usize).max(2);
    (0..=steps)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / steps as f64).exp())
        .collect()
}

/// Critical hopping rate: the `gamma` at which the ground state of `H0` is
/// the balanced superposition of `|s>` and `|w>`.
///
/// A logarithmic scan brackets the sign change of [`balance`], which is then
/// bisected in `ln gamma` to relative tolerance `1e-12`. The bracket starts at
/// `[1e-3/N, 1e3/N]` and widens tenfold on each side up to three times.
pub fn find_critical_gamma(m: &ReducedModel) -> Result<CriticalGamma, SpectralError> {
    let (mut lo, mut hi) = default_bracket(m);
    for attempt in 0..=BRACKET_EXPANSIONS {
        if let Some((a, b)) = scan_sign_change(m, lo, hi)? {
            let gamma = bisect_balance(m, a, b)?;
            return Ok(CriticalGamma {
                gamma,
                gap: gap(m, gamma)?,
            });
        }
        if attempt < BRACKET_EXPANSIONS {
            lo /= 10.0;
            hi *= 10.0;
        }
    }
    Err(SpectralError::BracketFailure { lo, hi })
}

fn scan_sign_change(m: &ReducedModel, lo: f64, hi: f64) -> Result<Option<(f64, f64)>, SpectralError> {
    let grid = log_grid(lo, hi);
    let mut prev = (grid[0], balance(m, grid[0])?);
    for &g in &grid[1..] {
        let b = balance(m, g)?;
        if prev.1 < 0.0 && b >= 0.0 {
            return Ok(Some((prev.0, g)));
        }
        prev = (g, b);
    }
    Ok(None)
}

fn bisect_balance(m: &ReducedModel, mut lo: f64, mut hi: f64) -> Result<f64, SpectralError> {
    while hi / lo - 1.0 > GAMMA_REL_TOL {
        let mid = (lo * hi).sqrt();
        if balance(m, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Hopping rate minimizing the gap `E_1 - E_0`, by golden-section search in
/// `ln gamma` around the smallest gap on a logarithmic scan of the default
/// bracket. On the complete graph this is `(N - 2)/N^2`, not `1/N`.
pub fn minimum_gap_gamma(m: &ReducedModel) -> Result<CriticalGamma, SpectralError> {
    let (lo, hi) = default_bracket(m);
    let grid = log_grid(lo, hi);
    let gaps = grid
        .iter()
        .map(|&g| gap(m, g))
        .collect::<Result<Vec<_>, _>>()?;
    let best = (0..gaps.len())
        .min_by(|&a, &b| gaps[a].total_cmp(&gaps[b]))
        .unwrap_or(0);
    if best == 0 || best == grid.len() - 1 {
        return Err(SpectralError::BracketFailure { lo, hi });
    }
    let f = |x: f64| gap(m, x.exp());
    let (mut a, mut b) = (grid[best - 1].ln(), grid[best + 1].ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let gamma = (0.5 * (a + b)).exp();
    Ok(CriticalGamma {
        gamma,
        gap: gap(m, gamma)?,
    })
}

/// Distance of the two lowest eigenpairs from the complete-graph ideal
/// `psi_{0,1} ∝ |s> ± |w>`, `E_{0,1} = -1 ∓ 1/sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealityReport {
    /// Largest Euclidean distance between a (sign-aligned) eigenvector and
    /// its normalized ideal counterpart.
    pub eps_state: f64,
    /// Largest relative deviation of the shifted energies from the ideal.
    pub eps_energy: f64,
}

/// Measures how closely `H0` at `gamma` reproduces the ideal two-level
/// eigensystem.
///
/// Energies are compared after removing `gamma (deg(w) + 1)`, the constant
/// that turns `-gamma L` into `-gamma (A + I)`; on the complete graph at
/// `gamma = 1/N` this is exactly the Grover form `-|s><s| - |w><w|`.
pub fn ideality_report(m: &ReducedModel, gamma: f64) -> Result<IdealityReport, SpectralError> {
    if m.n_cells() < 2 {
        return Err(SpectralError::TooFewCells(m.n_cells()));
    }
    let es = eigensystem(&build_h0(m, gamma)?)?;
    let root_n = (m.n_vertices() as f64).sqrt();
    let s = project_uniform(m);
    let shift = gamma * (m.marked_degree() + 1.0);

    let mut eps_state: f64 = 0.0;
    let mut eps_energy: f64 = 0.0;
    for (k, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        let mut ideal: Vec<f64> = s.clone();
        ideal[0] += sign;
        let norm = ideal.iter().map(|x| x * x).sum::<f64>().sqrt();
        ideal.iter_mut().for_each(|x| *x /= norm);

        let v = es.vector(k);
        let dot: f64 = v.iter().zip(&ideal).map(|(a, b)| a * b).sum();
        let align = if dot < 0.0 { -1.0 } else { 1.0 };
        let dist = v
            .iter()
            .zip(&ideal)
            .map(|(a, b)| (align * a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        eps_state = eps_state.max(dist);

        let ideal_energy = -1.0 - sign / root_n;
        let rel = ((es.values[k] - shift) - ideal_energy).abs() / ideal_energy.abs();
        eps_energy = eps_energy.max(rel);
    }
    Ok(IdealityReport {
        eps_state,
        eps_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_complete, build_hypercube, build_paley};
    use crate::partition::reduce;

    fn model(g: &crate::graph::Graph) -> ReducedModel {
        reduce(g, 0).unwrap().1
    }

    #[test]
    fn complete_two_by_two_by_hand() {
        // Complete(2), gamma = 1/2: L~ = [[-1, 1], [1, -1]], so
        // H0 = [[1/2 - 1, -1/2], [-1/2, 1/2]].
        let m = model(&build_complete(2).unwrap());
        let h = build_h0(&m, 0.5).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[-0.5, -0.5, -0.5, 0.5]);
        assert!((h.matrix - expect).amax() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_gamma() {
        let m = model(&build_complete(4).unwrap());
        assert!(matches!(build_h0(&m, 0.0), Err(SpectralError::NonPositiveGamma(_))));
        assert!(matches!(build_h0(&m, -1.0), Err(SpectralError::NonPositiveGamma(_))));
        assert!(build_h0(&m, f64::NAN).is_err());
    }

    #[test]
    fn small_gamma_ground_state_is_marked() {
        let m = model(&build_paley(13).unwrap());
        let es = eigensystem(&build_h0(&m, 1e-9).unwrap()).unwrap();
        assert!((es.vectors[(0, 0)].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn one_by_one() {
        let m = ReducedModel::from_counts(vec![1], &[vec![0]]);
        let es = eigensystem(&build_h0(&m, 0.3).unwrap()).unwrap();
        assert_eq!(es.values, vec![-1.0]);
        assert_eq!(es.vectors[(0, 0)], 1.0);
    }

    #[test]
    fn complete_100_energies() {
        let m = model(&build_complete(100).unwrap());
        let es = eigensystem(&build_h0(&m, 0.01).unwrap()).unwrap();
        // -1 ∓ 0.1 after removing the constant gamma * N = 1
        assert!((es.values[0] - 1.0 - (-1.1)).abs() < 1e-12);
        assert!((es.values[1] - 1.0 - (-0.9)).abs() < 1e-12);
    }

    #[test]
    fn jacobi_and_tridiagonal_paths_agree() {
        let n = 70;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            ((i + 1.0) * (j + 2.0)).sin() / (1.0 + (i - j).abs())
        });
        let big = symmetric_eigen(&a).unwrap();
        let small = jacobi::jacobi_eigen(&a).unwrap();
        let mut sv = small.0;
        sv.sort_by(f64::total_cmp);
        for (x, y) in big.values.iter().zip(&sv) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn critical_gamma_complete() {
        for n in [10usize, 50, 500] {
            let m = model(&build_complete(n).unwrap());
            let c = find_critical_gamma(&m).unwrap();
            assert!((c.gamma * n as f64 - 1.0).abs() < 1e-9, "n={n}: {}", c.gamma);
            assert!((c.gap - 2.0 / (n as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn minimum_gap_on_complete_graph() {
        let n = 50usize;
        let m = model(&build_complete(n).unwrap());
        let c = minimum_gap_gamma(&m).unwrap();
        let exact = (n - 2) as f64 / (n * n) as f64;
        assert!((c.gamma / exact - 1.0).abs() < 1e-6, "{} vs {exact}", c.gamma);
    }

    #[test]
    fn hypercube_critical_gamma_matches_dense_scan() {
        let m = model(&build_hypercube(4).unwrap());
        let c = find_critical_gamma(&m).unwrap();
        // brute force: 10^4 log-spaced rates, locate the sign change of the balance
        let n = 16.0f64;
        let (lo, hi) = (1e-3 / n, 1e3 / n);
        let pts: Vec<f64> = (0..10_000)
            .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 9999.0).exp())
            .collect();
        let bal: Vec<f64> = pts.iter().map(|&g| balance(&m, g).unwrap()).collect();
        let k = (1..pts.len()).find(|&k| bal[k - 1] < 0.0 && bal[k] >= 0.0).unwrap();
        assert!(pts[k - 1] <= c.gamma && c.gamma <= pts[k]);

        let gm = minimum_gap_gamma(&m).unwrap();
        let gaps: Vec<f64> = pts.iter().map(|&g| gap(&m, g).unwrap()).collect();
        let kmin = (0..gaps.len()).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).unwrap();
        assert!(pts[kmin - 1] <= gm.gamma && gm.gamma <= pts[kmin + 1]);
    }

    #[test]
    fn critical_gamma_is_a_sign_change() {
        let m = model(&build_paley(29).unwrap());
        let c = find_critical_gamma(&m).unwrap();
        assert!(balance(&m, c.gamma * (1.0 - 1e-3)).unwrap() < 0.0);
        assert!(balance(&m, c.gamma * (1.0 + 1e-3)).unwrap() > 0.0);
    }

    #[test]
    fn complete_graph_is_ideal() {
        for n in [4usize, 100, 1000] {
            let m = model(&build_complete(n).unwrap());
            let r = ideality_report(&m, 1.0 / n as f64).unwrap();
            assert!(r.eps_state < 1e-9 && r.eps_energy < 1e-9, "n={n}: {r:?}");
        }
    }

    #[test]
    fn ideality_needs_two_cells() {
        let m = ReducedModel::from_counts(vec![1], &[vec![0]]);
        assert!(matches!(ideality_report(&m, 1.0), Err(SpectralError::TooFewCells(1))));
    }

    #[test]
    fn hypercube_eigenvalues_lie_in_full_spectrum() {
        let g = build_hypercube(4).unwrap();
        let m = model(&g);
        let gamma = 0.27;
        let red = eigensystem(&build_h0(&m, gamma).unwrap()).unwrap();
        let n = g.n_vertices();
        let full = DMatrix::from_fn(n, n, |i, j| {
            let l = if i == j {
                -(g.degree(i) as f64)
            } else if g.is_adjacent(i, j) {
                1.0
            } else {
                0.0
            };
            -gamma * l - if i == 0 && j == 0 { 1.0 } else { 0.0 }
        });
        let full_vals = SymmetricEigen::new(full).eigenvalues;
        for e in red.values {
            assert!(full_vals.iter().any(|f| (f - e).abs() < 1e-9), "{e}");
        }
    }
}
