use std::io::Write;

use csv::{Terminator, WriterBuilder};
use rayon::prelude::*;

use super::{fmt_g17, run_scenario, ExperimentError, GRule, GammaRule, GraphSpec, Scenario};
use crate::dynamics::NonlinearForm;

/// One family, nonlinearity and rule set, simulated at several sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Family template; its size parameter is replaced by each entry of `sizes`.
    pub family: GraphSpec,
    /// Size parameters (`N`, `q` or `n` depending on the family).
    pub sizes: Vec<u64>,
    pub form: NonlinearForm,
    pub g: GRule,
    pub gamma: GammaRule,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub stride: Option<usize>,
}

impl SweepSpec {
    pub fn new(family: GraphSpec, sizes: Vec<u64>, form: NonlinearForm, g: GRule, gamma: GammaRule) -> Self {
        Self {
            family,
            sizes,
            form,
            g,
            gamma,
            t_max: None,
            dt: None,
            stride: None,
        }
    }

    pub fn scenario(&self, size: u64) -> Scenario {
        Scenario {
            t_max: self.t_max,
            dt: self.dt,
            stride: self.stride,
            ..Scenario::new(self.family.with_size(size), self.form, self.g, self.gamma)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub g: f64,
    pub t_star: Option<f64>,
    pub p_star: Option<f64>,
    pub width: Option<f64>,
    pub max_dropped_ratio: Option<f64>,
    /// Why the row has no peak: a failed run, a divergence, or no maximum in the window.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln t_star` against `ln N` over rows with a peak.
    pub exponent: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two points.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn run_row(spec: &SweepSpec, size: u64) -> SweepRow {
    let scenario = spec.scenario(size);
    let n = scenario.graph.n_vertices();
    let failed = |e: String| SweepRow {
        n,
        g: spec.g.eval(n),
        t_star: None,
        p_star: None,
        width: None,
        max_dropped_ratio: None,
        error: Some(e),
    };
    match run_scenario(&scenario) {
        Ok(run) => {
            let error = match (run.peak, run.divergence) {
                (None, Some((t, _))) => Some(format!("diverged at t={}", fmt_g17(t))),
                (None, None) => Some("no peak".into()),
                _ => None,
            };
            SweepRow {
                n: run.n_vertices,
                g: run.g,
                t_star: run.peak.map(|p| p.t_star),
                p_star: run.peak.map(|p| p.p_star),
                width: run.peak.and_then(|p| p.width),
                max_dropped_ratio: Some(run.max_dropped_ratio),
                error,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

/// Runs every size concurrently; rows come back ordered by `N` whatever the
/// scheduling. Failed rows carry their error and do not stop the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, ExperimentError> {
    if spec.sizes.len() < 2 {
        return Err(ExperimentError::Parse(format!(
            "a sweep needs at least 2 sizes, got {}",
            spec.sizes.len()
        )));
    }
    let mut sizes = spec.sizes.clone();
    sizes.sort_by_key(|&s| spec.family.with_size(s).n_vertices());
    let rows: Vec<SweepRow> = sizes.par_iter().map(|&s| run_row(spec, s)).collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.t_star.map(|t| (r.n as f64, t)))
        .collect();
    Ok(SweepResult {
        exponent: fit_exponent(&points),
        rows,
    })
}

/// `n,g,t_star,p_star,width,max_dropped_ratio,error`; missing values are empty.
pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<(), ExperimentError> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["n", "g", "t_star", "p_star", "width", "max_dropped_ratio", "error"])?;
    let opt = |x: Option<f64>| x.map(fmt_g17).unwrap_or_default();
    for r in &result.rows {
        w.write_record([
            r.n.to_string(),
            fmt_g17(r.g),
            opt(r.t_star),
            opt(r.p_star),
            opt(r.width),
            opt(r.max_dropped_ratio),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(0.5))).collect();
        assert!((fit_exponent(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fit_exponent(&pts[..1]), None);
    }

    #[test]
    fn complete_linear_sweep_orders_rows() {
        let spec = SweepSpec::new(
            GraphSpec::Complete(0),
            vec![256, 64],
            NonlinearForm::Linear,
            GRule::Value(0.0),
            GammaRule::Auto,
        );
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![64, 256]);
        assert!((r.exponent.unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn failed_rows_are_kept() {
        let spec = SweepSpec::new(
            GraphSpec::Paley(0),
            vec![13, 15],
            NonlinearForm::Linear,
            GRule::Value(0.0),
            GammaRule::Auto,
        );
        let r = run_sweep(&spec).unwrap();
        assert!(r.rows[0].t_star.is_some());
        assert!(r.rows[1].error.as_deref().unwrap().contains("Paley"));
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,g,t_star,p_star,width,max_dropped_ratio,error\n13,0,"));
    }

    #[test]
    fn single_size_is_rejected() {
        let spec = SweepSpec::new(GraphSpec::Complete(0), vec![4], NonlinearForm::Linear, GRule::Value(0.0), GammaRule::Auto);
        assert!(run_sweep(&spec).is_err());
    }
}
