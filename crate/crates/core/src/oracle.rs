//! Brute-force integration of the nonlinear search dynamics over every vertex,
//! independent of the partition code, used to check the reduced solver.

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{
    eval_f, evolve, DynamicsError, EvolveConfig, GammaPolicy, Nonlinearity, Rk4, Trajectory,
};
use crate::graph::Graph;
use crate::partition::{project_state, reduce, Partition, PartitionError};

/// Largest graph the oracle will integrate.
pub const MAX_VERTICES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("full-space oracle is limited to {MAX_VERTICES} vertices, graph has {0}")]
    TooLarge(usize),
    #[error("marked vertex {0} out of range")]
    MarkedOutOfRange(usize),
    #[error("marked vertex has no neighbors")]
    IsolatedMarked,
    #[error("full-space integration diverged at t = {time}: norm drift {drift:.3e}")]
    Diverged { time: f64, drift: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Per-vertex amplitudes `psi_v(t)` at the recorded times.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
    pub gammas: Vec<f64>,
    pub norm_drift: Vec<f64>,
}

impl FullTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn vertex_probability(&self, v: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a[v].norm_sqr()).collect()
    }
}

struct FullRhs<'a> {
    graph: &'a Graph,
    w: usize,
    probe: usize,
    nl: Nonlinearity,
    policy: GammaPolicy,
    floor: f64,
    shift: f64,
}

impl FullRhs<'_> {
    fn f(&self, a: Complex64) -> Result<f64, DynamicsError> {
        if self.nl.is_linear() {
            Ok(0.0)
        } else {
            eval_f(self.nl.form, a.norm_sqr(), self.floor)
        }
    }

    fn gamma(&self, psi: &[Complex64]) -> Result<f64, DynamicsError> {
        Ok(self.policy.gamma(self.nl.g, self.f(psi[self.w])?, self.f(psi[self.probe])?))
    }

    fn eval(&self, psi: &[Complex64], out: &mut [Complex64]) -> Result<(), DynamicsError> {
        let gamma = self.gamma(psi)?;
        for (v, o) in out.iter_mut().enumerate() {
            let nbrs = self.graph.neighbors(v);
            let hop = nbrs.iter().fold(Complex64::new(0.0, 0.0), |acc, &u| acc + psi[u as usize]);
            // L psi = A psi - D psi
            let lap = hop - psi[v] * nbrs.len() as f64;
            let mut diag = self.shift - self.nl.g * self.f(psi[v])?;
            if v == self.w {
                diag -= 1.0;
            }
            let h = lap * (-gamma) + psi[v] * diag;
            *o = Complex64::new(h.im, -h.re);
        }
        Ok(())
    }
}

/// RK4 on the full `N`-dimensional equation `i dpsi/dt = (-gamma L - |w><w| - g diag f(|psi_v|^2)) psi`
/// from the uniform superposition. Feedback reads `f_0` from `w` and `f_1` from
/// the smallest-index neighbor of `w`.
pub fn full_evolve(
    graph: &Graph,
    w: usize,
    nl: &Nonlinearity,
    policy: &GammaPolicy,
    cfg: &EvolveConfig,
) -> Result<FullTrajectory, OracleError> {
    let n = graph.n_vertices();
    if n > MAX_VERTICES {
        return Err(OracleError::TooLarge(n));
    }
    if w >= n {
        return Err(OracleError::MarkedOutOfRange(w));
    }
    if !(cfg.dt > 0.0) || !(cfg.t_max > 0.0) || !cfg.dt.is_finite() || !cfg.t_max.is_finite() {
        return Err(DynamicsError::InvalidStep {
            dt: cfg.dt,
            t_max: cfg.t_max,
        }
        .into());
    }
    let probe = *graph.neighbors(w).first().ok_or(OracleError::IsolatedMarked)? as usize;
    let rhs = FullRhs {
        graph,
        w,
        probe,
        nl: *nl,
        policy: *policy,
        floor: cfg.floor,
        shift: cfg.energy_shift,
    };

    let mut psi = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let drift = |psi: &[Complex64]| (psi.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs();
    let mut out = FullTrajectory {
        times: vec![0.0],
        amplitudes: vec![psi.clone()],
        gammas: vec![rhs.gamma(&psi)?],
        norm_drift: vec![drift(&psi)],
    };
    let mut rk4 = Rk4::new(n);
    let n_steps = cfg.n_steps();
    for step in 1..=n_steps {
        rk4.step(&mut psi, cfg.dt, |s, o| rhs.eval(s, o))?;
        let t = step as f64 * cfg.dt;
        let d = drift(&psi);
        if !(d <= cfg.norm_tolerance) {
            return Err(OracleError::Diverged { time: t, drift: d });
        }
        if step % cfg.record_stride == 0 || step == n_steps {
            out.times.push(t);
            out.gammas.push(rhs.gamma(&psi)?);
            out.amplitudes.push(psi.clone());
            out.norm_drift.push(d);
        }
    }
    Ok(out)
}

/// Largest disagreement between the reduced and full solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `max |project(psi)_i - c_i|` over all samples.
    pub max_amplitude_deviation: f64,
    /// `max | |project(psi)_i|^2 - |c_i|^2 |` over all samples.
    pub max_probability_deviation: f64,
    /// Largest spread `max - min` of `|psi_v|^2` within one cell.
    pub max_cell_spread: f64,
    /// Amplitude deviation restricted to samples before the reduced
    /// trajectory's singular flag.
    pub trusted_amplitude_deviation: f64,
    pub trusted_samples: usize,
    pub samples: usize,
}

/// Largest within-cell spread of per-vertex probabilities.
pub fn cell_spread(partition: &Partition, psi: &[Complex64]) -> f64 {
    partition
        .cells()
        .iter()
        .map(|cell| {
            let (lo, hi) = cell.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                let p = psi[v].norm_sqr();
                (lo.min(p), hi.max(p))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Runs both solvers with the same configuration and compares them sample by sample.
pub fn compare_reduced_full(
    graph: &Graph,
    w: usize,
    nl: &Nonlinearity,
    policy: &GammaPolicy,
    cfg: &EvolveConfig,
) -> Result<ComparisonReport, OracleError> {
    let full = full_evolve(graph, w, nl, policy, cfg)?;
    let (partition, model) = reduce(graph, w)?;
    let reduced = evolve(&model, nl, policy, cfg)?;
    Ok(compare_trajectories(&partition, &reduced, &full))
}

/// Sample-by-sample comparison of trajectories recorded on the same grid.
pub fn compare_trajectories(partition: &Partition, reduced: &Trajectory, full: &FullTrajectory) -> ComparisonReport {
    let samples = reduced.len().min(full.len());
    let mut report = ComparisonReport {
        max_amplitude_deviation: 0.0,
        max_probability_deviation: 0.0,
        max_cell_spread: 0.0,
        trusted_amplitude_deviation: 0.0,
        trusted_samples: 0,
        samples,
    };
    for k in 0..samples {
        let projected = project_state(partition, &full.amplitudes[k]);
        let mut amp: f64 = 0.0;
        for (a, c) in projected.iter().zip(&reduced.amplitudes[k]) {
            amp = amp.max((a - c).norm());
            report.max_probability_deviation =
                report.max_probability_deviation.max((a.norm_sqr() - c.norm_sqr()).abs());
        }
        report.max_amplitude_deviation = report.max_amplitude_deviation.max(amp);
        if !reduced.singular[k] {
            report.trusted_amplitude_deviation = report.trusted_amplitude_deviation.max(amp);
            report.trusted_samples += 1;
        }
        report.max_cell_spread = report.max_cell_spread.max(cell_spread(partition, &full.amplitudes[k]));
    }
    report
}
