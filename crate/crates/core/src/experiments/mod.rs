//! Scenario configuration, single runs, size sweeps and CSV output.

mod csvio;
mod scenario;
mod sweep;

use std::fs::File;
use std::io::BufWriter;

use thiserror::Error;

pub use csvio::{fmt_g17, read_trajectory_csv, trajectory_header, write_trajectory_csv, TrajectoryTable};
pub use scenario::{form_name, parse_form, GRule, GammaRule, GraphSpec, Scenario, TARGET_ROWS};
pub use sweep::{fit_exponent, run_sweep, write_sweep_csv, SweepResult, SweepRow, SweepSpec};

use crate::dynamics::{
    detect_first_peak, dropped_term_diagnostic, evolve, DynamicsError, EvolveConfig, GammaPolicy, PeakReport,
    Trajectory,
};
use crate::graph::GraphError;
use crate::oracle::{compare_trajectories, full_evolve, ComparisonReport, OracleError, MAX_VERTICES};
use crate::partition::{reduce, PartitionError};
use crate::spectral::{find_critical_gamma, SpectralError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    /// True for errors caused by the requested parameters rather than by the run.
    pub fn is_parameter_error(&self) -> bool {
        match self {
            Self::Parse(_) | Self::Graph(_) | Self::Partition(_) => true,
            Self::Dynamics(e) => matches!(
                e,
                DynamicsError::InvalidStrength(_) | DynamicsError::InvalidExponent(_) | DynamicsError::InvalidStep { .. }
            ),
            Self::Spectral(e) => matches!(e, SpectralError::NonPositiveGamma(_) | SpectralError::TooLarge(_)),
            _ => false,
        }
    }
}

/// Everything a scenario produced. `divergence` is set when the integration
/// was abandoned; `trajectory` then holds the samples up to that point.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub n_vertices: usize,
    pub n_cells: usize,
    pub g: f64,
    pub gamma_l: f64,
    pub dt: f64,
    pub t_max: f64,
    pub stride: usize,
    pub trajectory: Trajectory,
    pub peak: Option<PeakReport>,
    /// Largest dropped-term ratio up to the first peak (or the whole run without one).
    pub max_dropped_ratio: f64,
    pub divergence: Option<(f64, f64)>,
    pub oracle: Option<ComparisonReport>,
}

impl ScenarioRun {
    pub fn summary_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_g17).unwrap_or_else(|| "none".into());
        let mut s = format!(
            "graph={} N={} cells={} nl={} g={} gamma={} gamma_l={} dt={} t_max={} t_star={} p_star={} width={} max_dropped_ratio={} singular_from={}",
            self.scenario.graph,
            self.n_vertices,
            self.n_cells,
            form_name(self.scenario.form),
            fmt_g17(self.g),
            self.scenario.gamma,
            fmt_g17(self.gamma_l),
            fmt_g17(self.dt),
            fmt_g17(self.t_max),
            opt(self.peak.map(|p| p.t_star)),
            opt(self.peak.map(|p| p.p_star)),
            opt(self.peak.and_then(|p| p.width)),
            fmt_g17(self.max_dropped_ratio),
            opt(self.trajectory.first_singular_time()),
        );
        if let Some(o) = &self.oracle {
            s += &format!(
                " oracle_amp_dev={} oracle_cell_spread={}",
                fmt_g17(o.max_amplitude_deviation),
                fmt_g17(o.max_cell_spread)
            );
        }
        match self.divergence {
            Some((t, d)) => s += &format!(" status=diverged t_div={} drift={}", fmt_g17(t), fmt_g17(d)),
            None => s += " status=ok",
        }
        s
    }
}

/// Builds, reduces and integrates a scenario, writing the trajectory CSV to
/// `scenario.out` when set.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioRun, ExperimentError> {
    let nl = scenario.nonlinearity()?;
    let graph = scenario.graph.build()?;
    let (partition, model) = reduce(&graph, 0)?;
    let gamma_l = match scenario.gamma {
        GammaRule::Fixed(g) => g,
        GammaRule::Auto | GammaRule::Feedback => find_critical_gamma(&model)?.gamma,
    };
    let policy = match scenario.gamma {
        GammaRule::Feedback => GammaPolicy::Feedback { gamma_l },
        _ => GammaPolicy::Fixed(gamma_l),
    };
    let t_max = scenario.resolved_t_max(&nl);
    let dt = scenario.resolved_dt(&nl);
    let stride = scenario.resolved_stride(t_max, dt);
    let cfg = EvolveConfig::new(t_max, dt).stride(stride);

    let (trajectory, divergence) = match evolve(&model, &nl, &policy, &cfg) {
        Ok(tr) => (tr, None),
        Err(DynamicsError::Diverged { time, drift, partial }) => (*partial, Some((time, drift))),
        Err(e) => return Err(e.into()),
    };
    let peak = detect_first_peak(&trajectory).ok();
    let dropped = dropped_term_diagnostic(&trajectory, &model, &nl)?;
    let max_dropped_ratio = match peak {
        Some(p) => dropped.max_until(p.t_star),
        None => dropped.max(),
    };

    let full = if scenario.full_oracle && graph.n_vertices() <= MAX_VERTICES {
        let oracle_cfg = EvolveConfig {
            t_max: trajectory.times.last().copied().unwrap_or(t_max).max(dt),
            ..cfg
        };
        Some(full_evolve(&graph, 0, &nl, &policy, &oracle_cfg)?)
    } else {
        None
    };
    let oracle = full.as_ref().map(|f| compare_trajectories(&partition, &trajectory, f));

    if let Some(path) = &scenario.out {
        let file = BufWriter::new(File::create(path)?);
        write_trajectory_csv(file, &trajectory, full.as_ref().map(|f| (&partition, f)))?;
    }

    Ok(ScenarioRun {
        scenario: scenario.clone(),
        n_vertices: graph.n_vertices(),
        n_cells: model.n_cells(),
        g: nl.g,
        gamma_l,
        dt,
        t_max,
        stride,
        trajectory,
        peak,
        max_dropped_ratio,
        divergence,
        oracle,
    })
}
