use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use equinav::error::{Error, Result};
use equinav::estimator::FilterKind;
use equinav::eval::{self, RunRecord, Summary};
use equinav::io;
use equinav::report;
use equinav::runner::{self, RunConfig};
use equinav::sim::{self, SimScenario};

#[derive(Parser)]
#[command(name = "equinav", version, about = "Equivariant IMU + multi-GNSS filter with lever-arm calibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterChoice {
    Eqf,
    Mekf,
    Both,
}

impl FilterChoice {
    fn kinds(self) -> Vec<FilterKind> {
        match self {
            FilterChoice::Eqf => vec![FilterKind::Eqf],
            FilterChoice::Mekf => vec![FilterKind::Mekf],
            FilterChoice::Both => vec![FilterKind::Eqf, FilterKind::Mekf],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trajectory and write imu.csv, gnss_<i>.csv, truth.csv and scenario.json.
    Simulate {
        /// Scenario JSON; defaults apply to missing keys.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Dataset directory to create.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one or both filters over a dataset directory.
    Run {
        #[arg(long, value_enum, default_value = "both")]
        filter: FilterChoice,
        /// Dataset directory (imu.csv, gnss_<i>.csv, optional truth.csv and scenario.json).
        #[arg(long)]
        data: PathBuf,
        /// Run configuration JSON (filter noise, initial state, t0).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; each filter writes into its own subdirectory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two or more runs (run.csv files or their directories).
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Start of the asymptotic phase, s; the last 20 s by default.
        #[arg(long)]
        t0: Option<f64>,
        /// Where to write the JSON report; printed to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate and filter many seeds in parallel and aggregate the results.
    Montecarlo {
        /// Scenario JSON; the default scenario otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Seed list: `a..b` (end excluded) or comma separated.
        #[arg(long, default_value = "0..20")]
        seeds: String,
        #[arg(long, value_enum, default_value = "both")]
        filter: FilterChoice,
        /// Initial yaw error, degrees.
        #[arg(long, default_value_t = 0.0)]
        attitude_error_deg: f64,
        /// Run configuration JSON; its initial yaw error is replaced by the flag above.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Time at which attitude errors are compared, s.
        #[arg(long, default_value_t = 20.0)]
        probe_t: f64,
        /// Directory for montecarlo.json and per-seed results.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_scenario(path: Option<&Path>) -> Result<SimScenario> {
    let sc = match path {
        Some(p) => io::read_json(p)?,
        None => SimScenario::default(),
    };
    sc.validate()?;
    Ok(sc)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let cfg: RunConfig = match path {
        Some(p) => io::read_json(p)?,
        None => RunConfig::default(),
    };
    cfg.filter.validate()?;
    Ok(cfg)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse seed list '{s}'"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?);
        (a..b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse::<u64>().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    Ok(seeds)
}

fn simulate(scenario: Option<&Path>, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut sc = load_scenario(scenario)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    let data = sim::simulate(&sc)?;
    io::write_dataset(out, &data)?;
    info!("wrote {} IMU samples and {} GNSS stream(s) to {}", data.imu.len(), data.gnss.len(), out.display());
    Ok(())
}

fn run(filter: FilterChoice, data_dir: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let loaded = io::read_dataset(data_dir)?;
    let mut records = Vec::new();
    for kind in filter.kinds() {
        let rec = runner::run(kind, &loaded.data, &cfg)?;
        let dir = io::filter_dir(out, kind);
        std::fs::create_dir_all(&dir)?;
        io::write_run_csv(&dir.join("run.csv"), &rec)?;
        if rec.rejected_updates > 0 {
            warn!("{kind}: {} GNSS update(s) rejected", rec.rejected_updates);
        }
        if loaded.data.truth.is_some() {
            let t0 = cfg.t0_for(rec.end_time().unwrap_or(0.0));
            let summary = eval::summarize(&rec, t0)?;
            io::write_json(&dir.join("summary.json"), &summary)?;
            println!(
                "{kind}: rmse_pos {:.4} m, rmse_att {:.4} deg, nees {:.3}, final calib {:?}",
                summary.rmse_pos, summary.rmse_att, summary.nees_mean, summary.final_calib
            );
        } else {
            warn!("{kind}: no ground truth, summary.json not written");
        }
        records.push(rec);
    }
    if let [a, b] = records.as_slice() {
        if loaded.data.truth.is_some() {
            let t0 = cfg.t0_for(a.end_time().unwrap_or(0.0));
            let labels: Vec<String> = [a.kind, b.kind].iter().map(|k| k.name().to_string()).collect();
            let rep = report::compare(&labels, &records, t0)?;
            io::write_json(&out.join("compare.json"), &rep)?;
        }
    }
    Ok(())
}

/// A run directory or file: the run itself, its label and the filter kind.
fn load_run(path: &Path) -> Result<(String, RunRecord)> {
    let csv = if path.is_dir() { path.join("run.csv") } else { path.to_path_buf() };
    let dir = csv.parent().unwrap_or(Path::new("."));
    let summary_path = dir.join("summary.json");
    let summary: Option<Summary> = summary_path.exists().then(|| io::read_json(&summary_path)).transpose()?;
    let dir_name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let kind = match &summary {
        Some(s) => s.filter,
        None => dir_name
            .parse::<FilterKind>()
            .map_err(|_| Error::Data(format!("{}: cannot tell the filter kind without summary.json", csv.display())))?,
    };
    let mut rec = io::read_run_csv(&csv, kind)?;
    rec.rejected_updates = summary.map_or(0, |s| s.rejected_updates);
    Ok((if dir_name.is_empty() { kind.name().to_string() } else { dir_name }, rec))
}

/// Expands a directory holding per-filter subdirectories into those subdirectories.
fn expand_runs(paths: &[PathBuf]) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() && !p.join("run.csv").exists() {
            let subs: Vec<PathBuf> = [FilterKind::Eqf, FilterKind::Mekf]
                .iter()
                .map(|k| io::filter_dir(p, *k))
                .filter(|d| d.join("run.csv").exists())
                .collect();
            if !subs.is_empty() {
                out.extend(subs);
                continue;
            }
        }
        out.push(p.clone());
    }
    out
}

fn compare(runs: &[PathBuf], t0: Option<f64>, out: Option<&Path>) -> Result<()> {
    let loaded = expand_runs(runs).iter().map(|p| load_run(p)).collect::<Result<Vec<_>>>()?;
    let (mut labels, records): (Vec<String>, Vec<RunRecord>) = loaded.into_iter().unzip();
    let unique = labels.iter().collect::<std::collections::BTreeSet<_>>().len() == labels.len();
    if !unique {
        labels = labels.iter().enumerate().map(|(i, l)| format!("{}#{}", l, i + 1)).collect();
    }
    let end = records.first().and_then(RunRecord::end_time).unwrap_or(0.0);
    let t0 = t0.unwrap_or((end - 20.0).max(0.0));
    let rep = report::compare(&labels, &records, t0)?;
    print!("{}", rep.to_text());
    match out {
        Some(p) => io::write_json(p, &rep)?,
        None => println!("{}", serde_json::to_string_pretty(&rep)?),
    }
    Ok(())
}

fn montecarlo(
    scenario: Option<&Path>,
    seeds: &str,
    filter: FilterChoice,
    attitude_error_deg: f64,
    config: Option<&Path>,
    probe_t: f64,
    out: Option<&Path>,
) -> Result<()> {
    let sc = load_scenario(scenario)?;
    let seeds = parse_seeds(seeds)?;
    let mut cfg = load_config(config)?;
    cfg.init.attitude_error_deg = attitude_error_deg;
    let kinds = filter.kinds();
    let results = runner::monte_carlo(&sc, &seeds, &kinds, &cfg, probe_t)?;
    let rep = report::aggregate(&kinds, attitude_error_deg, probe_t, &results);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for (s, r) in &results {
            if let Ok(r) = r {
                io::write_json(&dir.join(format!("seed_{s}.json")), r)?;
            }
        }
        io::write_json(&dir.join("montecarlo.json"), &rep)?;
    }
    print!("{}", rep.to_text());
    match rep.failures.iter().find(|f| f.numerical).or(rep.failures.first()) {
        Some(f) if f.numerical => Err(Error::Singular("one or more seeds")),
        Some(_) => Err(Error::Data(format!("{} seed(s) failed", rep.failures.len()))),
        None => Ok(()),
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { scenario, out, seed } => simulate(scenario.as_deref(), &out, seed),
        Command::Run { filter, data, config, out } => run(filter, &data, config.as_deref(), &out),
        Command::Compare { runs, t0, out } => compare(&runs, t0, out.as_deref()),
        Command::Montecarlo { scenario, seeds, filter, attitude_error_deg, config, probe_t, out } => {
            montecarlo(scenario.as_deref(), &seeds, filter, attitude_error_deg, config.as_deref(), probe_t, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
