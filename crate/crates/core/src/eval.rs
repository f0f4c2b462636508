//! Error metrics over a filter run: asymptotic-phase RMSE, lever-arm error and filter energy.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eqf;
use crate::error::{Error, Result};
use crate::estimator::{energy_indices, sub_matrix, sub_vector, FilterKind};
use crate::mekf;
use crate::types::NavState;

/// One logged instant of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub t: f64,
    pub estimate: NavState,
    pub truth: Option<NavState>,
    /// Diagonal of the full error covariance.
    pub p_diag: DVector<f64>,
    /// Dimension-normalized NEES of the attitude, position and lever-arm blocks, computed
    /// from the full covariance when the row was logged.
    pub nees: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub kind: FilterKind,
    pub rows: Vec<RunRow>,
    /// GNSS updates dropped by the gate or the conditioning check.
    pub rejected_updates: usize,
}

impl RunRecord {
    pub fn sensor_count(&self) -> usize {
        self.rows.first().map_or(0, |r| r.estimate.sensor_count())
    }

    pub fn end_time(&self) -> Option<f64> {
        self.rows.last().map(|r| r.t)
    }

    /// Row nearest to `t`.
    pub fn row_at(&self, t: f64) -> Option<&RunRow> {
        let k = self.rows.partition_point(|r| r.t < t);
        let candidates = [k.checked_sub(1), Some(k)];
        candidates
            .into_iter()
            .flatten()
            .filter_map(|i| self.rows.get(i))
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    fn window(&self, t0: f64) -> Result<Vec<(&RunRow, &NavState)>> {
        let rows: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.t >= t0)
            .map(|r| r.truth.as_ref().map(|g| (r, g)).ok_or_else(|| Error::Data(format!("no ground truth at t = {}", r.t))))
            .collect::<Result<_>>()?;
        if rows.is_empty() {
            return Err(Error::EmptyWindow { t0 });
        }
        Ok(rows)
    }
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (sum / count as f64).sqrt()
}

/// RMS of ‖p̂ − p‖ over t ≥ t0, m.
pub fn rmse_position(run: &RunRecord, t0: f64) -> Result<f64> {
    Ok(rms(run.window(t0)?.into_iter().map(|(r, g)| (r.estimate.pos - g.pos).norm())))
}

/// RMS of the geodesic attitude error over t ≥ t0, degrees.
pub fn rmse_attitude(run: &RunRecord, t0: f64) -> Result<f64> {
    Ok(rms(run.window(t0)?.into_iter().map(|(r, g)| r.estimate.rot.angle_to(&g.rot).to_degrees())))
}

/// RMS lever-arm error per antenna over t ≥ t0, m.
pub fn rmse_calib(run: &RunRecord, t0: f64) -> Result<Vec<f64>> {
    let w = run.window(t0)?;
    Ok((0..run.sensor_count()).map(|i| rms(w.iter().map(|(r, g)| (r.estimate.calib[i] - g.calib[i]).norm()))).collect())
}

/// Geodesic attitude error of the row nearest `t`, degrees.
pub fn attitude_error_at(run: &RunRecord, t: f64) -> Result<f64> {
    let row = run.row_at(t).ok_or(Error::EmptyWindow { t0: t })?;
    let truth = row.truth.as_ref().ok_or_else(|| Error::Data(format!("no ground truth at t = {}", row.t)))?;
    Ok(row.estimate.rot.angle_to(&truth.rot).to_degrees())
}

/// The filter's own error of `estimate` against `truth`, restricted to the energy blocks.
pub fn energy_error(kind: FilterKind, estimate: &NavState, truth: &NavState) -> Result<DVector<f64>> {
    let e = match kind {
        FilterKind::Eqf => eqf::local_error(estimate, truth)?,
        FilterKind::Mekf => mekf::local_error(estimate, truth)?,
    };
    Ok(sub_vector(&e.0, &energy_indices(estimate.sensor_count())))
}

/// Dimension-normalized eᵀ P⁻¹ e.
pub fn nees(e: &DVector<f64>, p: &DMatrix<f64>) -> Result<f64> {
    if e.len() != p.nrows() {
        return Err(Error::Dimension { expected: p.nrows(), found: e.len() });
    }
    let chol = p.clone().cholesky().ok_or(Error::Singular("energy covariance"))?;
    Ok(e.dot(&chol.solve(e)) / e.len() as f64)
}

/// NEES of an estimate with full covariance `p` against the truth.
pub fn state_nees(kind: FilterKind, estimate: &NavState, truth: &NavState, p: &DMatrix<f64>) -> Result<f64> {
    let cov = sub_matrix(p, &energy_indices(estimate.sensor_count()));
    nees(&energy_error(kind, estimate, truth)?, &cov)
}

/// Per-sample NEES over t ≥ t0 and its mean.
pub fn filter_energy(run: &RunRecord, t0: f64) -> Result<(Vec<(f64, f64)>, f64)> {
    let series = run
        .window(t0)?
        .into_iter()
        .map(|(r, _)| r.nees.map(|v| (r.t, v)).ok_or_else(|| Error::Data(format!("no NEES logged at t = {}", r.t))))
        .collect::<Result<Vec<_>>>()?;
    let mean = series.iter().map(|s| s.1).sum::<f64>() / series.len() as f64;
    Ok((series, mean))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub filter: FilterKind,
    /// m
    pub rmse_pos: f64,
    /// degrees
    pub rmse_att: f64,
    /// m, per antenna
    pub rmse_calib: Vec<f64>,
    /// Dimension-normalized NEES over attitude, position and lever arms.
    pub nees_mean: f64,
    /// Start of the asymptotic phase, s.
    pub t0: f64,
    /// Lever-arm estimates at the end of the run, m.
    pub final_calib: Vec<[f64; 3]>,
    /// ‖t̂ᵢ − tᵢ‖ at the end of the run, m.
    pub final_calib_error: Vec<f64>,
    pub rejected_updates: usize,
}

pub fn summarize(run: &RunRecord, t0: f64) -> Result<Summary> {
    let last = run.rows.last().ok_or(Error::EmptyWindow { t0 })?;
    let truth = last.truth.as_ref().ok_or_else(|| Error::Data("run has no ground truth".into()))?;
    Ok(Summary {
        filter: run.kind,
        rmse_pos: rmse_position(run, t0)?,
        rmse_att: rmse_attitude(run, t0)?,
        rmse_calib: rmse_calib(run, t0)?,
        nees_mean: filter_energy(run, t0)?.1,
        t0,
        final_calib: last.estimate.calib.iter().map(|t| [t.x, t.y, t.z]).collect(),
        final_calib_error: last.estimate.calib.iter().zip(&truth.calib).map(|(a, b)| (a - b).norm()).collect(),
        rejected_updates: run.rejected_updates,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Best {
    First,
    Second,
    Tie,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub metric: String,
    pub values: [f64; 2],
    pub best: Best,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub t0: f64,
    pub summaries: [Summary; 2],
    pub verdicts: Vec<Verdict>,
}

fn verdict(metric: &str, a: f64, b: f64, closer_to: f64) -> Verdict {
    let (da, db) = ((a - closer_to).abs(), (b - closer_to).abs());
    let best = if (da - db).abs() <= 1e-12 * da.max(db).max(1e-300) {
        Best::Tie
    } else if da < db {
        Best::First
    } else {
        Best::Second
    };
    Verdict { metric: metric.into(), values: [a, b], best }
}

/// Side-by-side summaries of two runs over the same data with a verdict per metric.
///
/// Errors and NEES are compared by distance to 0 and to 1 respectively.
pub fn compare_runs(a: &RunRecord, b: &RunRecord, t0: f64) -> Result<Comparison> {
    let times = |r: &RunRecord| r.rows.iter().map(|x| x.t).collect::<Vec<_>>();
    if a.sensor_count() != b.sensor_count() || times(a) != times(b) {
        return Err(Error::Data("runs do not cover the same scenario".into()));
    }
    let same_truth = a.rows.iter().zip(&b.rows).all(|(x, y)| x.truth == y.truth);
    if !same_truth {
        return Err(Error::Data("runs disagree on ground truth".into()));
    }
    let (sa, sb) = (summarize(a, t0)?, summarize(b, t0)?);
    let mut verdicts =
        vec![verdict("rmse_pos", sa.rmse_pos, sb.rmse_pos, 0.0), verdict("rmse_att", sa.rmse_att, sb.rmse_att, 0.0)];
    for (i, (x, y)) in sa.rmse_calib.iter().zip(&sb.rmse_calib).enumerate() {
        verdicts.push(verdict(&format!("rmse_calib_{}", i + 1), *x, *y, 0.0));
    }
    verdicts.push(verdict("nees_mean", sa.nees_mean, sb.nees_mean, 1.0));
    Ok(Comparison { t0, summaries: [sa, sb], verdicts })
}
