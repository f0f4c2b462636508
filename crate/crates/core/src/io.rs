//! CSV and JSON formats for datasets, runs and reports.
//!
//! Every CSV has a mandatory header row, `.` decimals and time in seconds. Floats are written
//! in shortest round-trip form, so write → read → write reproduces a file byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use nalgebra::{DVector, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::FilterKind;
use crate::eval::{RunRecord, RunRow};
use crate::lie::Rot3;
use crate::runner::Dataset;
use crate::sim::{SimData, SimScenario};
use crate::types::{GnssSample, ImuSample, NavState};

pub const IMU_HEADER: [&str; 7] = ["t", "wx", "wy", "wz", "ax", "ay", "az"];
pub const GNSS_HEADER: [&str; 4] = ["t", "x", "y", "z"];
pub const GNSS_VAR_HEADER: [&str; 7] = ["t", "x", "y", "z", "sxx", "syy", "szz"];
pub const TRUTH_HEADER: [&str; 11] = ["t", "qw", "qx", "qy", "qz", "px", "py", "pz", "vx", "vy", "vz"];

/// `gnss_<i>.csv`, numbered from 1.
pub fn gnss_file_name(i: usize) -> String {
    format!("gnss_{}.csv", i + 1)
}

fn data_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}: {e}", path.display()))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Data(format!("{}: row {}: {e}", path.display(), p.line())),
        None => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            kind => Error::Data(format!("{}: {kind:?}", path.display())),
        },
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| data_error(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn check_header(path: &Path, r: &mut csv::Reader<File>, options: &[&[&str]]) -> Result<usize> {
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let found: Vec<&str> = header.iter().collect();
    options.iter().position(|h| *h == found.as_slice()).ok_or_else(|| {
        let expected: Vec<String> = options.iter().map(|h| h.join(",")).collect();
        data_error(path, format!("header '{}' does not match {}", found.join(","), expected.join(" or ")))
    })
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn finite_row(path: &Path, line: usize, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(data_error(path, format!("row {line}: non-finite value")))
    }
}

#[derive(Serialize, Deserialize)]
struct ImuRow {
    t: f64,
    wx: f64,
    wy: f64,
    wz: f64,
    ax: f64,
    ay: f64,
    az: f64,
}

pub fn write_imu(path: &Path, samples: &[ImuSample]) -> Result<()> {
    let mut w = writer(path)?;
    for s in samples {
        let (g, a) = (s.gyro, s.acc);
        w.serialize(ImuRow { t: s.t, wx: g.x, wy: g.y, wz: g.z, ax: a.x, ay: a.y, az: a.z })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `imu.csv`; timestamps must increase strictly.
pub fn read_imu(path: &Path) -> Result<Vec<ImuSample>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &[&IMU_HEADER])?;
    let mut out: Vec<ImuSample> = Vec::new();
    for (k, row) in r.deserialize::<ImuRow>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = k + 2;
        finite_row(path, line, &[row.t, row.wx, row.wy, row.wz, row.ax, row.ay, row.az])?;
        if out.last().is_some_and(|p| row.t <= p.t) {
            return Err(data_error(path, format!("row {line}: timestamp {} not after the previous one", row.t)));
        }
        out.push(ImuSample::new(row.t, Vector3::new(row.wx, row.wy, row.wz), Vector3::new(row.ax, row.ay, row.az)));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct GnssRow {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize, Deserialize)]
struct GnssVarRow {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    sxx: f64,
    syy: f64,
    szz: f64,
}

/// Writes the variance columns only when every sample carries them.
pub fn write_gnss(path: &Path, samples: &[GnssSample]) -> Result<()> {
    let mut w = writer(path)?;
    let with_var = !samples.is_empty() && samples.iter().all(|s| s.var.is_some());
    if samples.is_empty() {
        w.write_record(GNSS_HEADER)?;
    }
    for s in samples {
        let p = s.pos;
        match (with_var, s.var) {
            (true, Some(v)) => w.serialize(GnssVarRow { t: s.t, x: p.x, y: p.y, z: p.z, sxx: v.x, syy: v.y, szz: v.z })?,
            _ => w.serialize(GnssRow { t: s.t, x: p.x, y: p.y, z: p.z })?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `gnss_<i>.csv`. Samples not after their predecessor are dropped with a warning.
pub fn read_gnss(path: &Path) -> Result<Vec<GnssSample>> {
    let mut r = reader(path)?;
    let with_var = check_header(path, &mut r, &[&GNSS_HEADER, &GNSS_VAR_HEADER])? == 1;
    let mut out: Vec<GnssSample> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = k + 2;
        let s = if with_var {
            let row: GnssVarRow = rec.deserialize(None).map_err(|e| csv_error(path, e))?;
            finite_row(path, line, &[row.t, row.x, row.y, row.z, row.sxx, row.syy, row.szz])?;
            if row.sxx <= 0.0 || row.syy <= 0.0 || row.szz <= 0.0 {
                return Err(data_error(path, format!("row {line}: variances must be positive")));
            }
            GnssSample { t: row.t, pos: Vector3::new(row.x, row.y, row.z), var: Some(Vector3::new(row.sxx, row.syy, row.szz)) }
        } else {
            let row: GnssRow = rec.deserialize(None).map_err(|e| csv_error(path, e))?;
            finite_row(path, line, &[row.t, row.x, row.y, row.z])?;
            GnssSample::new(row.t, Vector3::new(row.x, row.y, row.z))
        };
        if let Some(prev) = out.last().filter(|p| s.t <= p.t) {
            warn!("{}: row {line}: timestamp {} not after {}; dropped", path.display(), s.t, prev.t);
            continue;
        }
        out.push(s);
    }
    Ok(out)
}

/// One `truth.csv` row; the quaternion is scalar-first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub t: f64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

/// Unit quaternion (w, x, y, z) with w ≥ 0.
pub fn rot_to_quat(r: &Rot3) -> [f64; 4] {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r.matrix()));
    let s = if q.w < 0.0 { -1.0 } else { 1.0 };
    [s * q.w, s * q.i, s * q.j, s * q.k]
}

pub fn quat_to_rot(q: [f64; 4]) -> Result<Rot3> {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let n = raw.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
        return Err(Error::Data(format!("quaternion norm {n} is not 1")));
    }
    Ok(Rot3::from_matrix_unchecked(UnitQuaternion::from_quaternion(raw).to_rotation_matrix().into_inner()))
}

impl TruthRow {
    pub fn from_state(t: f64, x: &NavState) -> Self {
        let [qw, qx, qy, qz] = rot_to_quat(&x.rot);
        let (p, v) = (x.pos, x.vel);
        Self { t, qw, qx, qy, qz, px: p.x, py: p.y, pz: p.z, vx: v.x, vy: v.y, vz: v.z }
    }

    /// The state this row describes, with the given lever arms and zero biases.
    pub fn to_state(&self, lever_arms: &[Vector3<f64>]) -> Result<NavState> {
        Ok(NavState {
            rot: quat_to_rot([self.qw, self.qx, self.qy, self.qz])?,
            vel: Vector3::new(self.vx, self.vy, self.vz),
            pos: Vector3::new(self.px, self.py, self.pz),
            b_gyro: Vector3::zeros(),
            b_acc: Vector3::zeros(),
            calib: lever_arms.to_vec(),
        })
    }
}

pub fn write_truth(path: &Path, rows: &[TruthRow]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthRow>> {
    let mut r = reader(path)?;
    check_header(path, &mut r, &[&TRUTH_HEADER])?;
    let mut out = Vec::new();
    for (k, row) in r.deserialize::<TruthRow>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = k + 2;
        let v = [row.t, row.qw, row.qx, row.qy, row.qz, row.px, row.py, row.pz, row.vx, row.vy, row.vz];
        finite_row(path, line, &v)?;
        quat_to_rot([row.qw, row.qx, row.qy, row.qz]).map_err(|e| data_error(path, format!("row {line}: {e}")))?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| data_error(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| data_error(path, e))
}

/// Writes `imu.csv`, `gnss_<i>.csv`, `truth.csv` and `scenario.json` into `dir`.
pub fn write_dataset(dir: &Path, data: &SimData) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_imu(&dir.join("imu.csv"), &data.imu)?;
    for (i, g) in data.gnss.iter().enumerate() {
        write_gnss(&dir.join(gnss_file_name(i)), g)?;
    }
    let truth: Vec<TruthRow> = data.truth.iter().map(|s| TruthRow::from_state(s.t, &s.state)).collect();
    write_truth(&dir.join("truth.csv"), &truth)?;
    write_json(&dir.join("scenario.json"), &data.scenario)
}

/// A dataset directory as found on disk.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub data: Dataset,
    pub scenario: Option<SimScenario>,
}

/// Loads a dataset directory. Ground truth is used only when `scenario.json` supplies the
/// lever arms it needs.
pub fn read_dataset(dir: &Path) -> Result<LoadedDataset> {
    let imu = read_imu(&dir.join("imu.csv"))?;
    let mut gnss = Vec::new();
    while dir.join(gnss_file_name(gnss.len())).exists() {
        gnss.push(read_gnss(&dir.join(gnss_file_name(gnss.len())))?);
    }
    if gnss.is_empty() {
        return Err(data_error(dir, "no gnss_1.csv"));
    }
    let scenario_path = dir.join("scenario.json");
    let scenario: Option<SimScenario> = scenario_path.exists().then(|| read_json(&scenario_path)).transpose()?;
    if let Some(sc) = &scenario {
        if sc.sensor_count() != gnss.len() {
            return Err(data_error(&scenario_path, format!("{} lever arms for {} GNSS files", sc.sensor_count(), gnss.len())));
        }
    }
    let truth_path = dir.join("truth.csv");
    let truth = match (&scenario, truth_path.exists()) {
        (Some(sc), true) => {
            Some(read_truth(&truth_path)?.iter().map(|r| Ok((r.t, r.to_state(&sc.lever_arms)?))).collect::<Result<Vec<_>>>()?)
        }
        (None, true) => {
            warn!("{}: truth.csv ignored without scenario.json lever arms", dir.display());
            None
        }
        _ => None,
    };
    let data = Dataset { imu, gnss, truth };
    data.validate().map_err(|e| data_error(dir, e))?;
    Ok(LoadedDataset { data, scenario })
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn state_header(prefix: &str, n: usize, with_bias: bool) -> Vec<String> {
    let mut h: Vec<String> =
        ["qw", "qx", "qy", "qz", "px", "py", "pz", "vx", "vy", "vz"].iter().map(|c| format!("{prefix}{c}")).collect();
    if with_bias {
        h.extend(["bgx", "bgy", "bgz", "bax", "bay", "baz"].iter().map(|c| format!("{prefix}{c}")));
    }
    for i in 1..=n {
        h.extend(["x", "y", "z"].iter().map(|c| format!("{prefix}t{i}{c}")));
    }
    h
}

fn state_fields(x: &NavState, with_bias: bool) -> Vec<f64> {
    let mut v = rot_to_quat(&x.rot).to_vec();
    v.extend(x.pos.iter().chain(x.vel.iter()));
    if with_bias {
        v.extend(x.b_gyro.iter().chain(x.b_acc.iter()));
    }
    for t in &x.calib {
        v.extend(t.iter());
    }
    v
}

fn parse_state(f: &[f64], n: usize, with_bias: bool) -> Result<NavState> {
    let v3 = |o: usize| Vector3::new(f[o], f[o + 1], f[o + 2]);
    let mut x = NavState::origin(n);
    x.rot = quat_to_rot([f[0], f[1], f[2], f[3]])?;
    x.pos = v3(4);
    x.vel = v3(7);
    let mut o = 10;
    if with_bias {
        x.b_gyro = v3(10);
        x.b_acc = v3(13);
        o = 16;
    }
    for i in 0..n {
        x.calib[i] = v3(o + 3 * i);
    }
    Ok(x)
}

/// Column names of `run.csv` for `n` antennas.
pub fn run_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(state_header("", n, true));
    h.extend(state_header("true_", n, false));
    h.extend((0..15 + 3 * n).map(|k| format!("p{k}")));
    h.push("nees".into());
    h
}

/// The cells of a `run.csv`, kept verbatim so that read → write reproduces the file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTable {
    pub sensor_count: usize,
    /// One entry per column of [`run_header`]; `None` for an empty cell.
    pub rows: Vec<Vec<Option<f64>>>,
}

impl RunTable {
    pub fn from_record(run: &RunRecord) -> Self {
        let n = run.sensor_count();
        let truth_width = 10 + 3 * n;
        let rows = run
            .rows
            .iter()
            .map(|r| {
                let mut rec = vec![Some(r.t)];
                rec.extend(state_fields(&r.estimate, true).into_iter().map(Some));
                match &r.truth {
                    Some(g) => rec.extend(state_fields(g, false).into_iter().map(Some)),
                    None => rec.extend(std::iter::repeat_n(None, truth_width)),
                }
                rec.extend(r.p_diag.iter().copied().map(Some));
                rec.push(r.nees);
                rec
            })
            .collect();
        Self { sensor_count: n, rows }
    }

    pub fn to_record(&self, kind: FilterKind) -> Result<RunRecord> {
        let n = self.sensor_count;
        let (est_w, truth_w, p_w) = (16 + 3 * n, 10 + 3 * n, 15 + 3 * n);
        let mut rows = Vec::with_capacity(self.rows.len());
        for (k, vals) in self.rows.iter().enumerate() {
            let line = k + 2;
            let required = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
                vals[range].iter().map(|v| v.ok_or_else(|| Error::Data(format!("row {line}: missing value")))).collect()
            };
            let t = required(0..1)?[0];
            let estimate = parse_state(&required(1..1 + est_w)?, n, true)?;
            let truth_range = 1 + est_w..1 + est_w + truth_w;
            let truth = if vals[truth_range.clone()].iter().all(Option::is_none) {
                None
            } else {
                Some(parse_state(&required(truth_range.clone())?, n, false)?)
            };
            let p_start = truth_range.end;
            let p_diag = DVector::from_vec(required(p_start..p_start + p_w)?);
            rows.push(RunRow { t, estimate, truth, p_diag, nees: vals[p_start + p_w] });
        }
        Ok(RunRecord { kind, rows, rejected_updates: 0 })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = writer(path)?;
        w.write_record(run_header(self.sensor_count))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(fmt).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = reader(path)?;
        let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
        // 1 + (16 + 3n) + (10 + 3n) + (15 + 3n) + 1 columns
        let n = header
            .len()
            .checked_sub(43)
            .filter(|c| c % 9 == 0)
            .map(|c| c / 9)
            .ok_or_else(|| data_error(path, format!("unexpected column count {}", header.len())))?;
        if header.iter().ne(run_header(n).iter().map(String::as_str)) {
            return Err(data_error(path, "header does not match the run.csv schema"));
        }
        let mut rows = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let line = k + 2;
            let parse = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse::<f64>().map(Some).map_err(|e| data_error(path, format!("row {line}: '{s}': {e}")))
            };
            rows.push(rec.iter().map(parse).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { sensor_count: n, rows })
    }
}

/// Per-instant estimate, truth when known, covariance diagonal and NEES.
pub fn write_run_csv(path: &Path, run: &RunRecord) -> Result<()> {
    RunTable::from_record(run).write(path)
}

/// Reads a `run.csv` back into a record of the given filter kind.
pub fn read_run_csv(path: &Path, kind: FilterKind) -> Result<RunRecord> {
    RunTable::read(path)?.to_record(kind).map_err(|e| data_error(path, e))
}

/// Output directory of one filter inside a run directory.
pub fn filter_dir(out: &Path, kind: FilterKind) -> PathBuf {
    out.join(kind.name())
}
