use super::integrate::DEFAULT_FLOOR;
use super::nonlinearity::{cell_f_values, Nonlinearity};
use super::peaks::local_maxima;
use super::{DynamicsError, Trajectory};
use crate::partition::ReducedModel;

/// `r(t) = g max_{i>=2} |f_i - f_1| / |1 + g (f_0 - f_1)|` at every recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedTermSeries {
    pub times: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl DroppedTermSeries {
    /// Largest ratio over samples with `t <= t_end`.
    pub fn max_until(&self, t_end: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.ratio)
            .take_while(|(t, _)| **t <= t_end)
            .map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.ratio.iter().copied().fold(0.0, f64::max)
    }
}

/// Size of the cell-splitting terms that must be negligible for the nonlinear
/// walk to be a time-rescaled linear one. Identically zero with fewer than
/// three cells or a linear walk.
pub fn dropped_term_diagnostic(
    traj: &Trajectory,
    model: &ReducedModel,
    nl: &Nonlinearity,
) -> Result<DroppedTermSeries, DynamicsError> {
    let sizes = model.cell_sizes();
    if traj.n_cells() != sizes.len() {
        return Err(DynamicsError::DimensionMismatch {
            expected: sizes.len(),
            got: traj.n_cells(),
        });
    }
    let ratio = if sizes.len() < 3 || nl.is_linear() {
        vec![0.0; traj.len()]
    } else {
        traj.amplitudes
            .iter()
            .map(|c| {
                let f = cell_f_values(c, sizes, nl.form, DEFAULT_FLOOR)?;
                let dropped = f[2..].iter().map(|fi| (fi - f[1]).abs()).fold(0.0, f64::max);
                Ok(nl.g * dropped / (1.0 + nl.g * (f[0] - f[1])).abs())
            })
            .collect::<Result<Vec<_>, DynamicsError>>()?
    };
    Ok(DroppedTermSeries {
        times: traj.times.clone(),
        ratio,
    })
}

/// Health of a trajectory beyond its first peak.
#[derive(Debug, Clone, PartialEq)]
pub struct IrregularityReport {
    pub first_singular_time: Option<f64>,
    pub max_norm_drift: f64,
    /// Local maxima of the success probability that rise at least
    /// `prominence` above the preceding minimum.
    pub prominent_maxima: usize,
    pub irregular: bool,
}

/// Flags a trajectory as irregular when the singular flag was raised or the
/// norm drifted past `norm_tolerance`.
pub fn irregularity_report(traj: &Trajectory, norm_tolerance: f64, prominence: f64) -> IrregularityReport {
    let p = traj.success_probability();
    let mut floor = p.first().copied().unwrap_or(0.0);
    let mut last_max = 0usize;
    let mut prominent = 0;
    for k in local_maxima(&p) {
        floor = p[last_max..k].iter().copied().fold(floor, f64::min);
        if p[k] - floor >= prominence {
            prominent += 1;
            floor = p[k];
        }
        last_max = k;
    }
    let first_singular_time = traj.first_singular_time();
    let max_norm_drift = traj.max_norm_drift();
    IrregularityReport {
        first_singular_time,
        max_norm_drift,
        prominent_maxima: prominent,
        irregular: first_singular_time.is_some() || !(max_norm_drift <= norm_tolerance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, EvolveConfig, GammaPolicy, NonlinearForm};
    use crate::graph::{build_complete, build_paley};
    use crate::partition::reduce;

    #[test]
    fn complete_graph_ratio_vanishes() {
        let m = reduce(&build_complete(50).unwrap(), 0).unwrap().1;
        let nl = Nonlinearity::new(NonlinearForm::Cubic, 49.0).unwrap();
        let tr = evolve(&m, &nl, &GammaPolicy::Feedback { gamma_l: 0.02 }, &EvolveConfig::new(1.0, 1e-3)).unwrap();
        let d = dropped_term_diagnostic(&tr, &m, &nl).unwrap();
        assert!(d.ratio.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn uniform_state_ratio_is_zero() {
        let m = reduce(&build_paley(13).unwrap(), 0).unwrap().1;
        let nl = Nonlinearity::new(NonlinearForm::Cubic, 12.0).unwrap();
        let tr = evolve(&m, &nl, &GammaPolicy::Fixed(0.1), &EvolveConfig::new(0.5, 0.01)).unwrap();
        let d = dropped_term_diagnostic(&tr, &m, &nl).unwrap();
        assert!(d.ratio[0] < 1e-14);
        assert!(d.max() > 0.0);
        assert!(d.max_until(0.0) < 1e-14);
    }

    #[test]
    fn linear_run_is_regular() {
        let m = reduce(&build_paley(13).unwrap(), 0).unwrap().1;
        let tr = evolve(&m, &Nonlinearity::linear(), &GammaPolicy::Fixed(0.1), &EvolveConfig::new(20.0, 0.01)).unwrap();
        let r = irregularity_report(&tr, 1e-6, 0.05);
        assert!(!r.irregular);
        assert!(r.prominent_maxima >= 1);
    }
}
