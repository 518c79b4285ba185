use num_complex::Complex64;

use super::DynamicsError;

/// Functional form of the self-potential `f(p)`, evaluated on per-vertex
/// probability densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearForm {
    Linear,
    /// `f(p) = p`
    Cubic,
    /// `f(p) = p - p^2`
    CubicQuintic,
    /// `f(p) = p^q`
    Power(f64),
    /// `f(p) = ln p`
    Loglinear,
}

impl NonlinearForm {
    /// Typical magnitude of `f` over the densities met during a search on
    /// `n_vertices` vertices; used to scale default step sizes.
    pub fn magnitude_scale(&self, n_vertices: usize) -> f64 {
        match self {
            Self::Linear => 0.0,
            Self::Cubic | Self::Power(_) => 1.0,
            Self::CubicQuintic => 0.25,
            Self::Loglinear => (n_vertices as f64).ln().max(1.0),
        }
    }
}

/// A nonlinearity `g f(p)`; the self-potential subtracted from `H0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub form: NonlinearForm,
    pub g: f64,
}

impl Nonlinearity {
    pub fn new(form: NonlinearForm, g: f64) -> Result<Self, DynamicsError> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(DynamicsError::InvalidStrength(g));
        }
        if let NonlinearForm::Power(q) = form {
            if !(q > 0.0) || !q.is_finite() {
                return Err(DynamicsError::InvalidExponent(q));
            }
        }
        Ok(Self { form, g })
    }

    pub fn linear() -> Self {
        Self {
            form: NonlinearForm::Linear,
            g: 0.0,
        }
    }

    /// True when the self-potential vanishes identically.
    pub fn is_linear(&self) -> bool {
        self.g == 0.0 || self.form == NonlinearForm::Linear
    }
}

/// `f(p)` for a per-vertex density `p`. `floor` clamps `p` from below for
/// the loglinear form only.
pub fn eval_f(form: NonlinearForm, p: f64, floor: f64) -> Result<f64, DynamicsError> {
    if !(p >= 0.0) {
        return Err(DynamicsError::NegativeDensity(p));
    }
    Ok(match form {
        NonlinearForm::Linear => 0.0,
        NonlinearForm::Cubic => p,
        NonlinearForm::CubicQuintic => p - p * p,
        NonlinearForm::Power(q) => p.powf(q),
        NonlinearForm::Loglinear => {
            let clamped = p.max(floor);
            if clamped <= 0.0 {
                return Err(DynamicsError::LogSingularity);
            }
            clamped.ln()
        }
    })
}

/// `f_i = f(|c_i|^2 / |m_i|)` for every cell.
pub fn cell_f_values(
    state: &[Complex64],
    cell_sizes: &[usize],
    form: NonlinearForm,
    floor: f64,
) -> Result<Vec<f64>, DynamicsError> {
    if state.len() != cell_sizes.len() {
        return Err(DynamicsError::DimensionMismatch {
            expected: cell_sizes.len(),
            got: state.len(),
        });
    }
    state
        .iter()
        .zip(cell_sizes)
        .map(|(c, &s)| eval_f(form, c.norm_sqr() / s as f64, floor))
        .collect()
}

/// Diagonal of the reduced self-potential, `g f(|c_i|^2 / |m_i|)`. The
/// off-diagonal elements vanish in the cell basis.
pub fn self_potential(
    state: &[Complex64],
    cell_sizes: &[usize],
    nl: &Nonlinearity,
    floor: f64,
) -> Result<Vec<f64>, DynamicsError> {
    if nl.is_linear() {
        if state.len() != cell_sizes.len() {
            return Err(DynamicsError::DimensionMismatch {
                expected: cell_sizes.len(),
                got: state.len(),
            });
        }
        return Ok(vec![0.0; state.len()]);
    }
    let mut v = cell_f_values(state, cell_sizes, nl.form, floor)?;
    v.iter_mut().for_each(|x| *x *= nl.g);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(eval_f(NonlinearForm::Cubic, 0.25, 0.0).unwrap(), 0.25);
        assert_eq!(eval_f(NonlinearForm::CubicQuintic, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(eval_f(NonlinearForm::Power(2.0), 0.5, 0.0).unwrap(), 0.25);
        let l = eval_f(NonlinearForm::Loglinear, 0.01, 0.0).unwrap();
        assert!((l - (-4.605_170_185_988_091)).abs() < 1e-12);
    }

    #[test]
    fn loglinear_floor() {
        assert!(matches!(
            eval_f(NonlinearForm::Loglinear, 0.0, 0.0),
            Err(DynamicsError::LogSingularity)
        ));
        assert_eq!(eval_f(NonlinearForm::Loglinear, 0.0, 1e-15).unwrap(), 1e-15f64.ln());
        // the floor never touches the other forms
        assert_eq!(eval_f(NonlinearForm::Cubic, 0.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn negative_density_is_rejected() {
        assert!(matches!(
            eval_f(NonlinearForm::Cubic, -1e-3, 0.0),
            Err(DynamicsError::NegativeDensity(_))
        ));
        assert!(eval_f(NonlinearForm::Cubic, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn potential_values() {
        let sizes = [1usize, 99];
        let marked = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let nl = Nonlinearity::new(NonlinearForm::Cubic, 99.0).unwrap();
        assert_eq!(self_potential(&marked, &sizes, &nl, 1e-15).unwrap(), vec![99.0, 0.0]);

        let uniform = [Complex64::new(0.1, 0.0), Complex64::new(0.99f64.sqrt(), 0.0)];
        let v = self_potential(&uniform, &sizes, &Nonlinearity::new(NonlinearForm::Cubic, 3.0).unwrap(), 0.0).unwrap();
        assert!(v.iter().all(|x| (x - 3.0 / 100.0).abs() < 1e-15));

        let zero = Nonlinearity::new(NonlinearForm::Loglinear, 0.0).unwrap();
        assert_eq!(self_potential(&marked, &sizes, &zero, 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn strength_validation() {
        assert!(Nonlinearity::new(NonlinearForm::Cubic, -1.0).is_err());
        assert!(Nonlinearity::new(NonlinearForm::Power(0.0), 1.0).is_err());
        assert!(Nonlinearity::new(NonlinearForm::Power(1.5), 1.0).is_ok());
    }
}
