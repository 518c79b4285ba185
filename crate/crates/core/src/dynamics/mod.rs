//! Reduced nonlinear Schrödinger dynamics
//! `i dc/dt = (-gamma L~ - e0 e0^T - diag(g f_i)) c`, the closed-form linear
//! reference, peak detection and the dropped-term diagnostic.

mod analytic;
mod diagnostics;
mod integrate;
mod nonlinearity;
mod peaks;

use thiserror::Error;

pub use analytic::{analytic_linear_amplitudes, analytic_linear_probabilities};
pub use diagnostics::{dropped_term_diagnostic, irregularity_report, DroppedTermSeries, IrregularityReport};
pub use integrate::{
    default_dt, evolve, evolve_from, step_rhs, EvolveConfig, GammaPolicy, Trajectory, DEFAULT_FLOOR,
    DEFAULT_NORM_TOLERANCE, DROPPED_TERM_LIMIT, STEP_DRIFT_LIMIT,
};
pub(crate) use integrate::Rk4;
pub use nonlinearity::{cell_f_values, eval_f, self_potential, NonlinearForm, Nonlinearity};
pub use peaks::{detect_first_peak, local_maxima, PeakReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("nonlinearity strength must be finite and non-negative, got {0}")]
    InvalidStrength(f64),
    #[error("power-law exponent must be positive, got {0}")]
    InvalidExponent(f64),
    #[error("density must be non-negative, got {0}")]
    NegativeDensity(f64),
    #[error("logarithm of zero density (set a positive floor)")]
    LogSingularity,
    #[error("state has {got} components, model has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need dt > 0 and t_max > 0, got dt = {dt}, t_max = {t_max}")]
    InvalidStep { dt: f64, t_max: f64 },
    #[error("integration diverged at t = {time}: norm drift {drift:.3e}; retry with a smaller dt")]
    Diverged {
        time: f64,
        drift: f64,
        partial: Box<Trajectory>,
    },
    #[error("no interior local maximum of the success probability")]
    NoPeak,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}
