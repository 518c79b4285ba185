use num_complex::Complex64;

/// Ideal amplitudes of linear search from `|s>` on a graph whose search
/// eigensystem matches the complete graph's:
/// `c_0 = e^{-it} (cos(t/sqrt N)/sqrt N + i sin(t/sqrt N))`,
/// `c_i = e^{-it} sqrt(|m_i|/N) cos(t/sqrt N)`.
///
/// The global phase is that of `H0` at `gamma = 1/N` plus the identity
/// (energies `1 ∓ 1/sqrt N`); probabilities do not depend on it.
pub fn analytic_linear_amplitudes(n_vertices: usize, cell_sizes: &[usize], t: f64) -> Vec<Complex64> {
    let n = n_vertices as f64;
    let root_n = n.sqrt();
    let (s, c) = (t / root_n).sin_cos();
    let phase = Complex64::from_polar(1.0, -t);
    cell_sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            if i == 0 {
                phase * Complex64::new(c / root_n, s)
            } else {
                phase * ((size as f64 / n).sqrt() * c)
            }
        })
        .collect()
}

/// `|c_0|^2 = sin^2(t/sqrt N) + cos^2(t/sqrt N)/N`, `|c_i|^2 = |m_i| cos^2(t/sqrt N)/N`.
pub fn analytic_linear_probabilities(n_vertices: usize, cell_sizes: &[usize], t: f64) -> Vec<f64> {
    let n = n_vertices as f64;
    let (s, c) = (t / n.sqrt()).sin_cos();
    cell_sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| if i == 0 { s * s + c * c / n } else { size as f64 * c * c / n })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn starts_uniform() {
        let sizes = [1, 10, 90];
        let c = analytic_linear_amplitudes(101, &sizes, 0.0);
        for (ci, &m) in c.iter().zip(&sizes) {
            assert!((ci - Complex64::new((m as f64 / 101.0).sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn reaches_marked_vertex() {
        let sizes = [1, 99];
        let p = analytic_linear_probabilities(100, &sizes, PI * 5.0);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(p[1] < 1e-15);
    }

    #[test]
    fn probabilities_match_amplitudes() {
        let sizes = [1, 5, 10, 10, 5, 1];
        for t in [0.3, 2.0, 7.7] {
            let c = analytic_linear_amplitudes(32, &sizes, t);
            let p = analytic_linear_probabilities(32, &sizes, t);
            let total: f64 = p.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            for (ci, pi) in c.iter().zip(&p) {
                assert!((ci.norm_sqr() - pi).abs() < 1e-15);
            }
        }
    }
}
