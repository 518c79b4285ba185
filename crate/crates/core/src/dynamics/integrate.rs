use num_complex::Complex64;

use super::nonlinearity::{eval_f, NonlinearForm, Nonlinearity};
use super::DynamicsError;
use crate::partition::{project_uniform, ReducedModel};

/// Densities below this value are clamped before taking a logarithm.
pub const DEFAULT_FLOOR: f64 = 1e-15;

/// Largest tolerated `| ||c||^2 - 1 |` before an integration is abandoned.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-6;

/// A single step changing `||c||^2` by more than this is far outside RK4's
/// error on smooth stretches (a loglinear amplitude crossing zero, say), and
/// flags the trajectory.
pub const STEP_DRIFT_LIMIT: f64 = 1e-10;

/// Once the dropped cell-splitting terms `g max_{i>=2} |f_i - f_1|` reach
/// this multiple of the retained factor `|1 + g (f_0 - f_1)|`, the evolution
/// is no longer a time-rescaled linear walk and the trajectory is flagged.
pub const DROPPED_TERM_LIMIT: f64 = 1.0;

/// How the hopping rate is chosen at each evaluation of the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaPolicy {
    Fixed(f64),
    /// `gamma(t) = gamma_l (1 + g f_0(t) - g f_1(t))`, re-evaluated on every
    /// Runge–Kutta stage.
    Feedback { gamma_l: f64 },
}

impl GammaPolicy {
    pub fn gamma(&self, g: f64, f0: f64, f1: f64) -> f64 {
        match *self {
            Self::Fixed(gamma) => gamma,
            Self::Feedback { gamma_l } => gamma_l * (1.0 + g * f0 - g * f1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub t_max: f64,
    pub dt: f64,
    pub record_stride: usize,
    pub floor: f64,
    pub norm_tolerance: f64,
    /// Constant added to the diagonal of `H`; only changes the global phase.
    pub energy_shift: f64,
}

impl EvolveConfig {
    pub fn new(t_max: f64, dt: f64) -> Self {
        Self {
            t_max,
            dt,
            record_stride: 1,
            floor: DEFAULT_FLOOR,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
            energy_shift: 0.0,
        }
    }

    pub fn stride(mut self, record_stride: usize) -> Self {
        self.record_stride = record_stride.max(1);
        self
    }

    pub fn floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn energy_shift(mut self, shift: f64) -> Self {
        self.energy_shift = shift;
        self
    }

    pub fn norm_tolerance(mut self, tol: f64) -> Self {
        self.norm_tolerance = tol;
        self
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Default time step: `min(1e-2, sqrt(N)/1e4, 1e-2 / (1 + g F))`, where `F`
/// is the typical magnitude of `f` for the form. The last term keeps
/// `dt ||H||` small when the self-potential dominates the Hamiltonian.
pub fn default_dt(n_vertices: usize, nl: &Nonlinearity) -> f64 {
    let root_n = (n_vertices as f64).sqrt();
    let stiffness = 1.0 + nl.g * nl.form.magnitude_scale(n_vertices);
    1e-2f64.min(root_n / 1e4).min(1e-2 / stiffness)
}

/// Sampled reduced amplitudes `c_i(t)` together with the hopping rate in use
/// and integration health at each recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub cell_sizes: Vec<usize>,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
    pub gammas: Vec<f64>,
    pub norm_drift: Vec<f64>,
    /// Sticky: once set, every later sample is flagged too.
    pub singular: Vec<bool>,
}

impl Trajectory {
    fn with_cells(cell_sizes: Vec<usize>) -> Self {
        Self {
            cell_sizes,
            times: Vec::new(),
            amplitudes: Vec::new(),
            gammas: Vec::new(),
            norm_drift: Vec::new(),
            singular: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, c: &[Complex64], gamma: f64, drift: f64, singular: bool) {
        self.times.push(t);
        self.amplitudes.push(c.to_vec());
        self.gammas.push(gamma);
        self.norm_drift.push(drift);
        self.singular.push(singular);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_sizes.len()
    }

    /// `|c_i(t)|^2` for every cell at sample `k`.
    pub fn probabilities_at(&self, k: usize) -> Vec<f64> {
        self.amplitudes[k].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Time series of `|c_cell(t)|^2`.
    pub fn cell_probability(&self, cell: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c[cell].norm_sqr()).collect()
    }

    /// Success probability `|c_0(t)|^2`.
    pub fn success_probability(&self) -> Vec<f64> {
        self.cell_probability(0)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }

    /// Time of the first flagged sample.
    pub fn first_singular_time(&self) -> Option<f64> {
        self.singular.iter().position(|&s| s).map(|k| self.times[k])
    }
}

/// Evaluates `dc/dt = -i H c` with
/// `H = -gamma L~ - e0 e0^T - diag(g f_i) + shift I`, reusing scratch buffers.
pub(crate) struct Rhs {
    m: usize,
    laplacian: Vec<f64>,
    inv_sizes: Vec<f64>,
    nl: Nonlinearity,
    policy: GammaPolicy,
    floor: f64,
    shift: f64,
    f: Vec<f64>,
}

impl Rhs {
    pub(crate) fn new(model: &ReducedModel, nl: Nonlinearity, policy: GammaPolicy, floor: f64, shift: f64) -> Self {
        let m = model.n_cells();
        let l = model.laplacian();
        Self {
            m,
            laplacian: (0..m * m).map(|k| l[(k / m, k % m)]).collect(),
            inv_sizes: model.cell_sizes().iter().map(|&s| 1.0 / s as f64).collect(),
            nl,
            policy,
            floor,
            shift,
            f: vec![0.0; m],
        }
    }

    fn fill_f(&mut self, c: &[Complex64]) -> Result<(), DynamicsError> {
        if self.nl.is_linear() {
            self.f.iter_mut().for_each(|x| *x = 0.0);
            return Ok(());
        }
        for ((f, ci), inv) in self.f.iter_mut().zip(c).zip(&self.inv_sizes) {
            *f = eval_f(self.nl.form, ci.norm_sqr() * inv, self.floor)?;
        }
        Ok(())
    }

    fn gamma_from_f(&self) -> f64 {
        let f1 = if self.m > 1 { self.f[1] } else { 0.0 };
        self.policy.gamma(self.nl.g, self.f[0], f1)
    }

    /// Writes `dc/dt` into `out` and returns the hopping rate used.
    pub(crate) fn eval(&mut self, c: &[Complex64], out: &mut [Complex64]) -> Result<f64, DynamicsError> {
        self.fill_f(c)?;
        let gamma = self.gamma_from_f();
        let g = self.nl.g;
        for i in 0..self.m {
            let row = &self.laplacian[i * self.m..(i + 1) * self.m];
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, cj) in row.iter().zip(c) {
                acc += cj * *l;
            }
            let mut diag = self.shift - g * self.f[i];
            if i == 0 {
                diag -= 1.0;
            }
            let h_c = acc * (-gamma) + c[i] * diag;
            // -i (a + ib) = b - ia
            out[i] = Complex64::new(h_c.im, -h_c.re);
        }
        Ok(gamma)
    }

    /// Hopping rate the policy assigns to state `c`.
    pub(crate) fn gamma_at(&mut self, c: &[Complex64]) -> Result<f64, DynamicsError> {
        self.fill_f(c)?;
        Ok(self.gamma_from_f())
    }

    /// True when `c` lies in the flagged regime: a loglinear density below the
    /// floor, a nonpositive feedback factor, or dropped terms at least
    /// [`DROPPED_TERM_LIMIT`] times the retained factor.
    pub(crate) fn is_singular(&mut self, c: &[Complex64]) -> Result<bool, DynamicsError> {
        if self.nl.is_linear() {
            return Ok(false);
        }
        if self.nl.form == NonlinearForm::Loglinear
            && c.iter().zip(&self.inv_sizes).any(|(a, s)| a.norm_sqr() * s < self.floor)
        {
            return Ok(true);
        }
        if self.m < 2 {
            return Ok(false);
        }
        self.fill_f(c)?;
        let g = self.nl.g;
        let retained = 1.0 + g * (self.f[0] - self.f[1]);
        if retained <= 0.0 {
            return Ok(true);
        }
        let dropped = self.f[2..]
            .iter()
            .map(|fi| (fi - self.f[1]).abs())
            .fold(0.0, f64::max)
            * g;
        Ok(dropped >= DROPPED_TERM_LIMIT * retained)
    }
}

/// One evaluation of the reduced equations of motion: returns `dc/dt` and the
/// hopping rate the policy chose for `state`.
///
/// The `g f_1` identity component of the self-potential is kept; it only
/// contributes a global phase.
pub fn step_rhs(
    state: &[Complex64],
    model: &ReducedModel,
    nl: &Nonlinearity,
    policy: &GammaPolicy,
    floor: f64,
) -> Result<(Vec<Complex64>, f64), DynamicsError> {
    if state.len() != model.n_cells() {
        return Err(DynamicsError::DimensionMismatch {
            expected: model.n_cells(),
            got: state.len(),
        });
    }
    let mut rhs = Rhs::new(model, *nl, *policy, floor, 0.0);
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    let gamma = rhs.eval(state, &mut out)?;
    Ok((out, gamma))
}

fn validate(cfg: &EvolveConfig) -> Result<(), DynamicsError> {
    if !(cfg.dt > 0.0) || !(cfg.t_max > 0.0) || !cfg.dt.is_finite() || !cfg.t_max.is_finite() {
        return Err(DynamicsError::InvalidStep {
            dt: cfg.dt,
            t_max: cfg.t_max,
        });
    }
    Ok(())
}

/// Classical fixed-step RK4 on `M` complex amplitudes.
pub(crate) struct Rk4 {
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl Rk4 {
    pub(crate) fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z,
        }
    }

    /// Advances `c` by `dt`; `f` evaluates the derivative of a stage state.
    pub(crate) fn step<F>(&mut self, c: &mut [Complex64], dt: f64, mut f: F) -> Result<(), DynamicsError>
    where
        F: FnMut(&[Complex64], &mut [Complex64]) -> Result<(), DynamicsError>,
    {
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        f(c, k1)?;
        for i in 0..c.len() {
            stage[i] = c[i] + k1[i] * (0.5 * dt);
        }
        f(stage, k2)?;
        for i in 0..c.len() {
            stage[i] = c[i] + k2[i] * (0.5 * dt);
        }
        f(stage, k3)?;
        for i in 0..c.len() {
            stage[i] = c[i] + k3[i] * dt;
        }
        f(stage, k4)?;
        for i in 0..c.len() {
            c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        Ok(())
    }
}

/// Integrates from the uniform superposition `|s>`.
pub fn evolve(
    model: &ReducedModel,
    nl: &Nonlinearity,
    policy: &GammaPolicy,
    cfg: &EvolveConfig,
) -> Result<Trajectory, DynamicsError> {
    let initial: Vec<Complex64> = project_uniform(model)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    evolve_from(model, &initial, nl, policy, cfg)
}

/// Integrates the reduced nonlinear Schrödinger equation with classical RK4
/// at fixed step `cfg.dt`, recording every `cfg.record_stride` steps (and the
/// final step).
///
/// Fails with [`DynamicsError::Diverged`], carrying everything recorded so far,
/// as soon as the norm drifts by more than `cfg.norm_tolerance`.
pub fn evolve_from(
    model: &ReducedModel,
    initial: &[Complex64],
    nl: &Nonlinearity,
    policy: &GammaPolicy,
    cfg: &EvolveConfig,
) -> Result<Trajectory, DynamicsError> {
    validate(cfg)?;
    let m = model.n_cells();
    if initial.len() != m {
        return Err(DynamicsError::DimensionMismatch {
            expected: m,
            got: initial.len(),
        });
    }
    let mut rhs = Rhs::new(model, *nl, *policy, cfg.floor, cfg.energy_shift);
    let mut rk4 = Rk4::new(m);
    let mut traj = Trajectory::with_cells(model.cell_sizes().to_vec());
    let mut c = initial.to_vec();

    let norm = |c: &[Complex64]| c.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let mut singular = rhs.is_singular(&c)?;
    let gamma0 = rhs.gamma_at(&c)?;
    let mut prev_norm = norm(&c);
    traj.push(0.0, &c, gamma0, (prev_norm - 1.0).abs(), singular);

    let n_steps = cfg.n_steps();
    for step in 1..=n_steps {
        rk4.step(&mut c, cfg.dt, |s, out| rhs.eval(s, out).map(|_| ()))?;
        let t = step as f64 * cfg.dt;
        let current = norm(&c);
        let drift = (current - 1.0).abs();
        let diverged = !(drift <= cfg.norm_tolerance);
        if !singular {
            // a non-finite state is as untrusted as a flagged one
            singular = diverged
                || !((current - prev_norm).abs() <= STEP_DRIFT_LIMIT)
                || rhs.is_singular(&c).unwrap_or(true);
        }
        prev_norm = current;
        if diverged {
            traj.push(t, &c, rhs.gamma_at(&c).unwrap_or(f64::NAN), drift, true);
            return Err(DynamicsError::Diverged {
                time: t,
                drift,
                partial: Box::new(traj),
            });
        }
        if step % cfg.record_stride == 0 || step == n_steps {
            let gamma = rhs.gamma_at(&c)?;
            traj.push(t, &c, gamma, drift, singular);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_complete, build_paley};
    use crate::partition::reduce;
    use crate::spectral::{build_h0, eigensystem};

    fn paley_model(q: u64) -> ReducedModel {
        reduce(&build_paley(q).unwrap(), 0).unwrap().1
    }

    #[test]
    fn eigenvector_is_stationary() {
        let m = paley_model(13);
        let gamma = 0.13;
        let es = eigensystem(&build_h0(&m, gamma).unwrap()).unwrap();
        for k in 0..3 {
            let v: Vec<Complex64> = es.vector(k).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            let (d, used) = step_rhs(&v, &m, &Nonlinearity::linear(), &GammaPolicy::Fixed(gamma), 0.0).unwrap();
            assert_eq!(used, gamma);
            for (di, vi) in d.iter().zip(&v) {
                let expect = Complex64::new(0.0, -es.values[k]) * vi;
                assert!((di - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn feedback_without_nonlinearity_keeps_gamma() {
        let m = paley_model(13);
        let c = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)];
        let policy = GammaPolicy::Feedback { gamma_l: 0.07 };
        let (_, used) = step_rhs(&c, &m, &Nonlinearity::linear(), &policy, 0.0).unwrap();
        assert_eq!(used, 0.07);
    }

    #[test]
    fn feedback_on_uniform_state_is_critical() {
        let m = paley_model(101);
        let s: Vec<Complex64> = project_uniform(&m).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        let nl = Nonlinearity::new(NonlinearForm::Cubic, 100.0).unwrap();
        let (_, used) = step_rhs(&s, &m, &nl, &GammaPolicy::Feedback { gamma_l: 0.02 }, 0.0).unwrap();
        assert!((used - 0.02).abs() < 1e-15);
    }

    #[test]
    fn step_rhs_dimension_check() {
        let m = paley_model(13);
        let c = vec![Complex64::new(1.0, 0.0)];
        assert!(matches!(
            step_rhs(&c, &m, &Nonlinearity::linear(), &GammaPolicy::Fixed(0.1), 0.0),
            Err(DynamicsError::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn invalid_steps() {
        let m = paley_model(13);
        for (t_max, dt) in [(1.0, 0.0), (0.0, 0.1), (1.0, -0.1), (f64::NAN, 0.1)] {
            let r = evolve(&m, &Nonlinearity::linear(), &GammaPolicy::Fixed(0.1), &EvolveConfig::new(t_max, dt));
            assert!(matches!(r, Err(DynamicsError::InvalidStep { .. })));
        }
    }

    #[test]
    fn records_on_stride_and_final_step() {
        let m = paley_model(13);
        let cfg = EvolveConfig::new(1.0, 0.01).stride(30);
        let tr = evolve(&m, &Nonlinearity::linear(), &GammaPolicy::Fixed(0.1), &cfg).unwrap();
        assert_eq!(tr.len(), 5);
        assert_eq!(tr.times[1], 0.3);
        assert!((tr.times[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_finds_marked_vertex() {
        let m = reduce(&build_complete(100).unwrap(), 0).unwrap().1;
        let t_peak = std::f64::consts::PI * 10.0 / 2.0;
        let cfg = EvolveConfig::new(t_peak, t_peak / 2000.0);
        let tr = evolve(&m, &Nonlinearity::linear(), &GammaPolicy::Fixed(0.01), &cfg).unwrap();
        assert!(*tr.success_probability().last().unwrap() >= 0.99);
        assert!(tr.max_norm_drift() < 1e-9);
    }

    #[test]
    fn divergence_carries_partial_trajectory() {
        let m = paley_model(101);
        let nl = Nonlinearity::new(NonlinearForm::Cubic, 100.0).unwrap();
        let cfg = EvolveConfig::new(5.0, 0.05);
        match evolve(&m, &nl, &GammaPolicy::Feedback { gamma_l: 0.02 }, &cfg) {
            Err(DynamicsError::Diverged { partial, drift, time }) => {
                assert!(drift > 1e-6);
                assert!(time <= 5.0);
                assert!(*partial.singular.last().unwrap());
                assert_eq!(partial.times.last().copied(), Some(time));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn default_step_shrinks_with_strength() {
        let lin = default_dt(100, &Nonlinearity::linear());
        assert_eq!(lin, 1e-3);
        let cubic = default_dt(4001, &Nonlinearity::new(NonlinearForm::Cubic, 4000.0).unwrap());
        assert!((cubic - 1e-2 / 4001.0).abs() < 1e-18);
    }
}
