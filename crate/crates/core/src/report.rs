//! Tables built from several runs: the side-by-side comparison and Monte-Carlo aggregates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::FilterKind;
use crate::eval::{self, RunRecord, Summary};
use crate::runner::SeedResult;

/// One metric across all compared runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub metric: String,
    pub unit: String,
    pub values: Vec<f64>,
    /// Labels of the best run(s); several on a tie.
    pub best: Vec<String>,
}

/// Errors per filter over the asymptotic phase, in the layout of an RMSE table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableIStyle {
    pub t0: f64,
    pub filters: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub t0: f64,
    pub labels: Vec<String>,
    pub summaries: Vec<Summary>,
    pub table_i_style: TableIStyle,
}

fn best_of(labels: &[String], values: &[f64], target: f64) -> Vec<String> {
    let dist: Vec<f64> = values.iter().map(|v| (v - target).abs()).collect();
    let min = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * min.max(1e-300);
    labels.iter().zip(&dist).filter(|(_, d)| (**d - min).abs() <= tol).map(|(l, _)| l.clone()).collect()
}

/// Summaries of two or more runs over the same scenario, best value per metric flagged.
///
/// RMSEs are best when smallest, NEES when closest to 1.
pub fn compare(labels: &[String], runs: &[RunRecord], t0: f64) -> Result<CompareReport> {
    if runs.len() < 2 || labels.len() != runs.len() {
        return Err(Error::Data("compare needs at least two labelled runs".into()));
    }
    for other in &runs[1..] {
        eval::compare_runs(&runs[0], other, t0)?;
    }
    let summaries = runs.iter().map(|r| eval::summarize(r, t0)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut push = |metric: String, unit: &str, values: Vec<f64>, target: f64| {
        let best = best_of(labels, &values, target);
        rows.push(TableRow { metric, unit: unit.into(), values, best });
    };
    push("rmse_pos".into(), "m", summaries.iter().map(|s| s.rmse_pos).collect(), 0.0);
    push("rmse_att".into(), "deg", summaries.iter().map(|s| s.rmse_att).collect(), 0.0);
    for i in 0..runs[0].sensor_count() {
        push(format!("rmse_calib_{}", i + 1), "m", summaries.iter().map(|s| s.rmse_calib[i]).collect(), 0.0);
    }
    push("nees_mean".into(), "-", summaries.iter().map(|s| s.nees_mean).collect(), 1.0);
    Ok(CompareReport {
        t0,
        labels: labels.to_vec(),
        summaries,
        table_i_style: TableIStyle { t0, filters: labels.to_vec(), rows },
    })
}

impl CompareReport {
    /// Plain-text table, best entries marked with `*`.
    pub fn to_text(&self) -> String {
        let t = &self.table_i_style;
        let mut s = format!("t0 = {} s\n{:<14}{:<6}", t.t0, "metric", "unit");
        for l in &t.filters {
            let _ = write!(s, "{l:>14}");
        }
        s.push('\n');
        for row in &t.rows {
            let _ = write!(s, "{:<14}{:<6}", row.metric, row.unit);
            for (l, v) in t.filters.iter().zip(&row.values) {
                let mark = if row.best.contains(l) { "*" } else { " " };
                let _ = write!(s, "{:>13.5}{mark}", v);
            }
            s.push('\n');
        }
        s
    }
}

/// Median and 10/90 percentiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
}

/// Linear-interpolation percentile, `q` in [0, 1].
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let x = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
    v[lo] + (x - lo as f64) * (v[hi] - v[lo])
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        Self { median: percentile(values, 0.5), p10: percentile(values, 0.1), p90: percentile(values, 0.9) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterAggregate {
    pub filter: FilterKind,
    pub rmse_pos: Stats,
    pub rmse_att: Stats,
    pub nees_mean: Stats,
    pub attitude_error_at_probe: Stats,
    /// Largest lever-arm error at the end of each run.
    pub final_calib_error: Stats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinRate {
    pub description: String,
    pub wins: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
    pub numerical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub filters: Vec<FilterKind>,
    pub attitude_error_deg: f64,
    pub probe_t: f64,
    pub seeds: Vec<u64>,
    pub aggregates: Vec<FilterAggregate>,
    /// First filter against the second; absent for a single filter.
    pub win_rate: Option<WinRate>,
    pub failures: Vec<SeedFailure>,
}

/// Aggregates per-seed results. Failed seeds are listed and left out of the statistics.
pub fn aggregate(
    kinds: &[FilterKind],
    attitude_error_deg: f64,
    probe_t: f64,
    results: &[(u64, Result<SeedResult>)],
) -> MonteCarloReport {
    let ok: Vec<&SeedResult> = results.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let failures = results
        .iter()
        .filter_map(|(s, r)| {
            r.as_ref().err().map(|e| SeedFailure { seed: *s, error: e.to_string(), numerical: e.is_numerical() })
        })
        .collect();
    let column = |k: usize, f: &dyn Fn(&Summary) -> f64| -> Stats {
        Stats::of(&ok.iter().map(|r| f(&r.summaries[k])).collect::<Vec<_>>())
    };
    let aggregates = kinds
        .iter()
        .enumerate()
        .map(|(k, &filter)| FilterAggregate {
            filter,
            rmse_pos: column(k, &|s| s.rmse_pos),
            rmse_att: column(k, &|s| s.rmse_att),
            nees_mean: column(k, &|s| s.nees_mean),
            attitude_error_at_probe: Stats::of(&ok.iter().map(|r| r.attitude_error_at_probe[k]).collect::<Vec<_>>()),
            final_calib_error: column(k, &|s| s.final_calib_error.iter().copied().fold(0.0, f64::max)),
        })
        .collect();
    let win_rate = (kinds.len() >= 2).then(|| {
        let wins = ok.iter().filter(|r| r.attitude_error_at_probe[0] < r.attitude_error_at_probe[1]).count();
        WinRate {
            description: format!(
                "{} attitude error at t={probe_t} s lower than {}",
                kinds[0].name().to_uppercase(),
                kinds[1].name().to_uppercase()
            ),
            wins,
            total: ok.len(),
            fraction: if ok.is_empty() { 0.0 } else { wins as f64 / ok.len() as f64 },
        }
    });
    MonteCarloReport {
        filters: kinds.to_vec(),
        attitude_error_deg,
        probe_t,
        seeds: results.iter().map(|(s, _)| *s).collect(),
        aggregates,
        win_rate,
        failures,
    }
}

impl MonteCarloReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} seed(s), {} failed, initial yaw error {} deg\n{:<8}{:>30}{:>30}{:>30}{:>30}\n",
            self.seeds.len(),
            self.failures.len(),
            self.attitude_error_deg,
            "filter",
            "rmse_pos m (p10/med/p90)",
            "rmse_att deg",
            "nees_mean",
            format!("att err @{} s deg", self.probe_t),
        );
        let cell = |x: &Stats| format!("{:.4}/{:.4}/{:.4}", x.p10, x.median, x.p90);
        for a in &self.aggregates {
            let _ = writeln!(
                s,
                "{:<8}{:>30}{:>30}{:>30}{:>30}",
                a.filter.name(),
                cell(&a.rmse_pos),
                cell(&a.rmse_att),
                cell(&a.nees_mean),
                cell(&a.attitude_error_at_probe)
            );
        }
        if let Some(w) = &self.win_rate {
            let _ = writeln!(s, "win-rate: {}: {}/{} = {:.2}", w.description, w.wins, w.total, w.fraction);
        }
        for f in &self.failures {
            let _ = writeln!(s, "seed {} failed: {}", f.seed, f.error);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(Stats::of(&[0.7; 5]).median, 0.7);
        assert!(percentile(&[], 0.5).is_nan());
    }

    #[test]
    fn best_handles_ties_and_targets() {
        let l = vec!["a".to_string(), "b".to_string()];
        assert_eq!(best_of(&l, &[0.2, 0.2], 0.0), l);
        assert_eq!(best_of(&l, &[0.2, 0.1], 0.0), vec!["b".to_string()]);
        assert_eq!(best_of(&l, &[0.9, 1.3], 1.0), vec!["a".to_string()]);
    }
}
