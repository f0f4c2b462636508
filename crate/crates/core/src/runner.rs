//! Drives a filter through a recorded or simulated dataset and logs every IMU instant.

use log::warn;
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::FilterConfig;
use crate::error::{Error, Result};
use crate::estimator::{Estimator, FilterKind};
use crate::eval::{self, RunRecord, RunRow, Summary};
use crate::lie::Rot3;
use crate::sim::{self, SimScenario};
use crate::types::{GnssSample, ImuSample, NavState};
use crate::{Eqf, Mekf};

/// Sensor streams plus optional ground truth sampled at IMU times.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub imu: Vec<ImuSample>,
    /// One stream per antenna.
    pub gnss: Vec<Vec<GnssSample>>,
    pub truth: Option<Vec<(f64, NavState)>>,
}

impl Dataset {
    pub fn sensor_count(&self) -> usize {
        self.gnss.len()
    }

    pub fn from_sim(data: &sim::SimData) -> Self {
        Self {
            imu: data.imu.clone(),
            gnss: data.gnss.clone(),
            truth: Some(data.truth.iter().map(|s| (s.t, s.state.clone())).collect()),
        }
    }

    /// Truth nearest to `t`, if it lies within half an IMU period.
    pub fn truth_near(&self, t: f64, half_period: f64) -> Option<&NavState> {
        let truth = self.truth.as_ref()?;
        let k = truth.partition_point(|(s, _)| *s < t);
        [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(|i| truth.get(i))
            .filter(|(s, _)| (s - t).abs() <= half_period)
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|(_, x)| x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.imu.len() < 2 {
            return Err(Error::Data("at least two IMU samples are required".into()));
        }
        if self.gnss.is_empty() {
            return Err(Error::Data("at least one GNSS stream is required".into()));
        }
        if let Some(k) = self.imu.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::Data(format!("IMU timestamps not strictly increasing at row {}", k + 2)));
        }
        Ok(())
    }
}

/// How the filters are started.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    /// Start from the true pose and velocity when ground truth is available, else the origin.
    pub from_truth: bool,
    /// Yaw rotation applied to the initial attitude, degrees.
    pub attitude_error_deg: f64,
    /// Initial lever arms; zeros when absent.
    pub calib: Option<Vec<Vector3<f64>>>,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self { from_truth: true, attitude_error_deg: 0.0, calib: None }
    }
}

/// Everything `run` needs besides the data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub filter: FilterConfig,
    pub init: InitConfig,
    /// Start of the asymptotic phase, s; the last 20 s of the run when absent.
    pub t0: Option<f64>,
}

impl RunConfig {
    pub fn t0_for(&self, end: f64) -> f64 {
        self.t0.unwrap_or((end - 20.0).max(0.0))
    }
}

pub fn initial_state(init: &InitConfig, truth: Option<&NavState>, n: usize) -> Result<NavState> {
    let mut x = NavState::origin(n);
    if let (true, Some(g)) = (init.from_truth, truth) {
        x.rot = g.rot;
        x.vel = g.vel;
        x.pos = g.pos;
    }
    x.rot = Rot3::rot_z(init.attitude_error_deg.to_radians()) * x.rot;
    if let Some(c) = &init.calib {
        if c.len() != n {
            return Err(Error::Dimension { expected: n, found: c.len() });
        }
        x.calib = c.clone();
    }
    Ok(x)
}

pub fn make_filter(kind: FilterKind, x0: &NavState, cfg: &FilterConfig) -> Result<Box<dyn Estimator>> {
    Ok(match kind {
        FilterKind::Eqf => Box::new(Eqf::with_initial_state(x0, cfg.clone())?),
        FilterKind::Mekf => Box::new(Mekf::with_initial_state(x0, cfg.clone())?),
    })
}

fn measurement_covariance(s: &GnssSample, sigma: f64) -> Matrix3<f64> {
    match s.var {
        Some(v) => Matrix3::from_diagonal(&v),
        None => Matrix3::identity() * (sigma * sigma),
    }
}

enum Event {
    Imu(usize),
    Gnss(usize, usize),
}

/// Time-ordered events; IMU samples come first on equal timestamps.
fn schedule(data: &Dataset) -> Vec<(f64, Event)> {
    let mut ev: Vec<(f64, Event)> = data.imu.iter().enumerate().map(|(k, u)| (u.t, Event::Imu(k))).collect();
    for (i, stream) in data.gnss.iter().enumerate() {
        ev.extend(stream.iter().enumerate().map(|(k, s)| (s.t, Event::Gnss(i, k))));
    }
    let rank = |e: &Event| matches!(e, Event::Gnss(..)) as u8;
    ev.sort_by(|a, b| a.0.total_cmp(&b.0).then(rank(&a.1).cmp(&rank(&b.1))));
    ev
}

fn record(f: &dyn Estimator, data: &Dataset, t: f64, half_period: f64) -> Result<RunRow> {
    let p = f.covariance();
    let estimate = f.state_estimate();
    let truth = data.truth_near(t, half_period).cloned();
    let nees = truth.as_ref().map(|g| eval::state_nees(f.kind(), &estimate, g, p)).transpose()?;
    Ok(RunRow { t, estimate, truth, p_diag: p.diagonal(), nees })
}

/// Runs one filter over the dataset, logging the state after all events at each IMU time.
///
/// A GNSS sample older than the filter time is dropped with a warning; gated or badly
/// conditioned updates are skipped and counted.
pub fn run_filter(filter: &mut dyn Estimator, data: &Dataset, cfg: &FilterConfig) -> Result<RunRecord> {
    data.validate()?;
    if data.sensor_count() != filter.sensor_count() {
        return Err(Error::Dimension { expected: filter.sensor_count(), found: data.sensor_count() });
    }
    let half_period = 0.5 * (data.imu[1].t - data.imu[0].t);
    let mut rows = Vec::with_capacity(data.imu.len());
    let mut rejected = 0;
    let mut held: Option<&ImuSample> = None;
    // IMU time whose row is written once every event at that time has been processed
    let mut pending: Option<f64> = None;
    filter.set_time(data.imu[0].t);

    for (t, event) in schedule(data) {
        if let Some(tp) = pending.filter(|tp| t > *tp) {
            rows.push(record(filter, data, tp, half_period)?);
            pending = None;
        }
        if let (Some(u), true) = (held, t > filter.time()) {
            filter.propagate(u, t - filter.time())?;
            filter.set_time(t);
        }
        match event {
            Event::Imu(k) => {
                held = Some(&data.imu[k]);
                pending = Some(t);
            }
            Event::Gnss(i, k) => {
                let s = &data.gnss[i][k];
                if t < filter.time() {
                    warn!("GNSS {} sample at t = {t} precedes filter time {}; dropped", i + 1, filter.time());
                    continue;
                }
                match filter.update(i, &s.pos, &measurement_covariance(s, cfg.gnss_sigma)) {
                    Ok(()) => {}
                    Err(Error::UpdateRejected(msg)) => {
                        warn!("GNSS {} update at t = {t} rejected: {msg}", i + 1);
                        rejected += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    if let Some(tp) = pending {
        rows.push(record(filter, data, tp, half_period)?);
    }
    Ok(RunRecord { kind: filter.kind(), rows, rejected_updates: rejected })
}

/// Builds the filter from the run configuration and runs it.
pub fn run(kind: FilterKind, data: &Dataset, cfg: &RunConfig) -> Result<RunRecord> {
    let t_start = data.imu.first().map_or(0.0, |u| u.t);
    let half_period = data.imu.get(1).map_or(0.0, |u| 0.5 * (u.t - t_start));
    let x0 = initial_state(&cfg.init, data.truth_near(t_start, half_period), data.sensor_count())?;
    let mut f = make_filter(kind, &x0, &cfg.filter)?;
    run_filter(f.as_mut(), data, &cfg.filter)
}

/// Per-seed result of a Monte-Carlo batch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub summaries: Vec<Summary>,
    /// Attitude error at the probe time per filter, degrees.
    pub attitude_error_at_probe: Vec<f64>,
}

/// Worker pool honoring `EQUINAV_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("EQUINAV_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Simulates and filters one seed.
pub fn run_seed(sc: &SimScenario, seed: u64, kinds: &[FilterKind], cfg: &RunConfig, probe_t: f64) -> Result<SeedResult> {
    let data = Dataset::from_sim(&sim::simulate(&SimScenario { seed, ..sc.clone() })?);
    let mut summaries = Vec::new();
    let mut probe = Vec::new();
    for &k in kinds {
        let rec = run(k, &data, cfg)?;
        let t0 = cfg.t0_for(rec.end_time().unwrap_or(0.0));
        summaries.push(eval::summarize(&rec, t0)?);
        probe.push(eval::attitude_error_at(&rec, probe_t)?);
    }
    Ok(SeedResult { seed, summaries, attitude_error_at_probe: probe })
}

/// Independent seeds in parallel; failures are returned per seed.
pub fn monte_carlo(
    sc: &SimScenario,
    seeds: &[u64],
    kinds: &[FilterKind],
    cfg: &RunConfig,
    probe_t: f64,
) -> Result<Vec<(u64, Result<SeedResult>)>> {
    let pool = thread_pool()?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| (s, run_seed(sc, s, kinds, cfg, probe_t))).collect()))
}
