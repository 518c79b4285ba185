use super::{DynamicsError, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    pub t_star: f64,
    pub p_star: f64,
    /// Full width of the peak at 90% of `p_star`; `None` when the success
    /// probability never falls below that level on one side.
    pub width: Option<f64>,
}

/// Indices of interior samples with `y[k-1] < y[k] >= y[k+1]`.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&k| y[k - 1] < y[k] && y[k] >= y[k + 1])
        .collect()
}

/// Vertex of the parabola through three samples around `k`.
fn refine(t: &[f64], y: &[f64], k: usize) -> (f64, f64) {
    let (t0, t1, t2) = (t[k - 1], t[k], t[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    // divided differences
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let a = (d12 - d01) / (t2 - t0);
    if !(a < 0.0) {
        return (t1, y1);
    }
    let b = d01 - a * (t0 + t1);
    let tv = (-b / (2.0 * a)).clamp(t0, t2);
    let yv = y0 + d01 * (tv - t0) + a * (tv - t0) * (tv - t1);
    (tv, yv.max(y1).min(1.0))
}

/// Linear interpolation of the time at which `y` crosses `level` between samples `a` and `b`.
fn crossing(t: &[f64], y: &[f64], a: usize, b: usize, level: f64) -> f64 {
    let f = (level - y[a]) / (y[b] - y[a]);
    t[a] + f * (t[b] - t[a])
}

/// First interior local maximum of `|c_0|^2`, refined with a parabola through
/// the three bracketing samples.
pub fn detect_first_peak(traj: &Trajectory) -> Result<PeakReport, DynamicsError> {
    if traj.len() < 3 {
        return Err(DynamicsError::TooFewSamples {
            needed: 3,
            got: traj.len(),
        });
    }
    let y = traj.success_probability();
    let t = &traj.times;
    let k = *local_maxima(&y).first().ok_or(DynamicsError::NoPeak)?;
    let (t_star, p_star) = refine(t, &y, k);

    let level = 0.9 * p_star;
    let left = (0..k).rev().find(|&j| y[j] < level).map(|j| crossing(t, &y, j, j + 1, level));
    let right = (k + 1..y.len()).find(|&j| y[j] < level).map(|j| crossing(t, &y, j - 1, j, level));
    let width = match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };
    Ok(PeakReport { t_star, p_star, width })
}
