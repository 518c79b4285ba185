use std::io::{Read, Write};

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use super::ExperimentError;
use crate::dynamics::Trajectory;
use crate::oracle::FullTrajectory;
use crate::partition::{project_state, Partition};

/// Formats like C's `%.17g`: 17 significant digits, fixed notation for
/// exponents in `[-4, 17)`, trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `t,gamma,p_success,p_cell_1..p_cell_{M-1},norm_drift,singular_flag`.
pub fn trajectory_header(n_cells: usize, oracle: bool) -> Vec<String> {
    let mut h = vec!["t".to_string(), "gamma".into(), "p_success".into()];
    h.extend((1..n_cells).map(|i| format!("p_cell_{i}")));
    h.push("norm_drift".into());
    h.push("singular_flag".into());
    if oracle {
        h.extend(["full_p_success", "full_amp_deviation", "full_cell_spread"].map(String::from));
    }
    h
}

/// Writes one row per recorded sample. When `oracle` is given, three columns
/// compare each sample against the full-space solution on the same grid.
pub fn write_trajectory_csv<W: Write>(
    out: W,
    traj: &Trajectory,
    oracle: Option<(&Partition, &FullTrajectory)>,
) -> Result<(), ExperimentError> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out);
    w.write_record(trajectory_header(traj.n_cells(), oracle.is_some()))?;
    for k in 0..traj.len() {
        let mut row: Vec<String> = Vec::with_capacity(traj.n_cells() + 6);
        row.push(fmt_g17(traj.times[k]));
        row.push(fmt_g17(traj.gammas[k]));
        row.extend(traj.amplitudes[k].iter().map(|c| fmt_g17(c.norm_sqr())));
        row.push(fmt_g17(traj.norm_drift[k]));
        row.push(if traj.singular[k] { "1" } else { "0" }.into());
        if let Some((partition, full)) = oracle {
            match full.amplitudes.get(k) {
                Some(psi) => {
                    let projected = project_state(partition, psi);
                    let dev = projected
                        .iter()
                        .zip(&traj.amplitudes[k])
                        .map(|(a, c)| (a - c).norm())
                        .fold(0.0, f64::max);
                    row.push(fmt_g17(psi[partition.marked()].norm_sqr()));
                    row.push(fmt_g17(dev));
                    row.push(fmt_g17(crate::oracle::cell_spread(partition, psi)));
                }
                None => row.extend(["nan", "nan", "nan"].map(String::from)),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Trajectory CSV read back into columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub header: Vec<String>,
    pub times: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `probabilities[k][i] = |c_i(t_k)|^2`.
    pub probabilities: Vec<Vec<f64>>,
    pub norm_drift: Vec<f64>,
    pub singular: Vec<bool>,
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<TrajectoryTable, ExperimentError> {
    let mut r = ReaderBuilder::new().from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let drift_col = header
        .iter()
        .position(|h| h == "norm_drift")
        .ok_or_else(|| ExperimentError::Parse("missing norm_drift column".into()))?;
    let mut table = TrajectoryTable {
        header,
        times: Vec::new(),
        gammas: Vec::new(),
        probabilities: Vec::new(),
        norm_drift: Vec::new(),
        singular: Vec::new(),
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| ExperimentError::Parse(format!("bad number `{s}` in trajectory CSV")))
    };
    for rec in r.records() {
        let rec = rec?;
        table.times.push(num(&rec[0])?);
        table.gammas.push(num(&rec[1])?);
        table
            .probabilities
            .push((2..drift_col).map(|i| num(&rec[i])).collect::<Result<_, _>>()?);
        table.norm_drift.push(num(&rec[drift_col])?);
        table.singular.push(&rec[drift_col + 1] == "1");
    }
    Ok(table)
}
