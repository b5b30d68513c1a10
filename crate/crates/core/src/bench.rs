//! Batch runs over instance files and solver settings.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{MilpBackend, SolveStatus};
use crate::instance::load_instance;
use crate::solve::{solve, Solution, SolveConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad manifest {path}: {message}")]
    Manifest { path: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub instances: Vec<PathBuf>,
    /// Setting names such as `2i-CC+VI+I+All`.
    pub configs: Vec<String>,
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub workers: usize,
    /// Per-run limit in seconds.
    #[serde(default = "default_limit")]
    pub time_limit: f64,
}

fn one() -> usize {
    1
}

fn default_limit() -> f64 {
    600.0
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| BenchError::Manifest {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        m.parsed_configs().map_err(|message| BenchError::Manifest {
            path: path.display().to_string(),
            message,
        })?;
        if m.instances.is_empty() || m.configs.is_empty() {
            return Err(BenchError::Manifest {
                path: path.display().to_string(),
                message: "needs at least one instance and one config".into(),
            });
        }
        Ok(m)
    }

    pub fn parsed_configs(&self) -> Result<Vec<SolveConfig>, String> {
        self.configs
            .iter()
            .map(|c| {
                c.parse::<SolveConfig>()
                    .map(|cfg| cfg.with_time_limit(self.time_limit))
                    .map_err(|e| e.to_string())
            })
            .collect()
    }
}

/// One results row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub model: String,
    pub sep: String,
    pub cuts: String,
    pub vi: bool,
    pub status: String,
    pub time_s: f64,
    pub gap_pct: f64,
    pub n_buses: Option<u32>,
    pub n_charges: Option<u32>,
    pub deadhead_energy: Option<f64>,
    pub root_bound: Option<f64>,
    pub best_bound: Option<f64>,
    pub n_cuts: usize,
    pub t_cut_s: f64,
}

pub const COLUMNS: [&str; 15] = [
    "instance",
    "model",
    "sep",
    "cuts",
    "vi",
    "status",
    "time_s",
    "gap_pct",
    "n_buses",
    "n_charges",
    "deadhead_energy",
    "root_bound",
    "best_bound",
    "n_cuts",
    "t_cut_s",
];

fn config_columns(cfg: &SolveConfig) -> (String, String, String) {
    let sep = match cfg.sep {
        crate::solve::SepMode::I => "I",
        crate::solve::SepMode::IF => "IF",
    };
    let cuts = match cfg.add {
        crate::separation::AddMode::One => "One",
        crate::separation::AddMode::All => "All",
    };
    (cfg.formulation.cli_name().to_owned(), sep.to_owned(), cuts.to_owned())
}

impl ResultRow {
    pub fn from_solution(instance: &str, sol: &Solution) -> Self {
        let (model, sep, cuts) = config_columns(&sol.config);
        ResultRow {
            instance: instance.to_owned(),
            model,
            sep,
            cuts,
            vi: sol.config.vi,
            status: status_name(sol.status).to_owned(),
            time_s: sol.stats.solve_time,
            gap_pct: sol.gap_pct,
            n_buses: sol.objective.map(|t| t.n_vehicles),
            n_charges: sol.objective.map(|t| t.n_charges),
            deadhead_energy: sol.objective.map(|t| t.deadhead_energy),
            root_bound: sol.root_bound,
            best_bound: sol.bound,
            n_cuts: sol.stats.cuts_added,
            t_cut_s: sol.stats.cut_time,
        }
    }

    /// Row for a run that failed before producing a solution.
    pub fn failed(instance: &str, cfg: &SolveConfig, message: &str) -> Self {
        let (model, sep, cuts) = config_columns(cfg);
        ResultRow {
            instance: instance.to_owned(),
            model,
            sep,
            cuts,
            vi: cfg.vi,
            status: format!("error: {message}"),
            time_s: 0.0,
            gap_pct: 100.0,
            n_buses: None,
            n_charges: None,
            deadhead_energy: None,
            root_bound: None,
            best_bound: None,
            n_cuts: 0,
            t_cut_s: 0.0,
        }
    }
}

pub fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::TimeLimit => "time_limit",
    }
}

/// Aggregate per setting: run count, solved count, mean time, gap and cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub setting: String,
    pub n_runs: usize,
    pub n_opt: usize,
    pub avg_time_s: f64,
    pub avg_gap_pct: f64,
    pub avg_cuts: f64,
    pub avg_t_cut_s: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String, String, bool)> = Vec::new();
    for r in rows {
        let k = (r.model.clone(), r.sep.clone(), r.cuts.clone(), r.vi);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|k| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| (&r.model, &r.sep, &r.cuts, r.vi) == (&k.0, &k.1, &k.2, k.3))
                .collect();
            let n = group.len() as f64;
            let avg = |f: &dyn Fn(&ResultRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            let setting = format!(
                "{}{}{}",
                k.0,
                if k.3 { "+VI" } else { "" },
                if k.0 == "3i" { String::new() } else { format!("+{}+{}", k.1, k.2) }
            );
            let setting = setting.parse::<SolveConfig>().map_or(setting, |c| c.to_string());
            SummaryRow {
                setting,
                n_runs: group.len(),
                n_opt: group.iter().filter(|r| r.status == "optimal").count(),
                avg_time_s: avg(&|r| r.time_s),
                avg_gap_pct: avg(&|r| r.gap_pct),
                avg_cuts: avg(&|r| r.n_cuts as f64),
                avg_t_cut_s: avg(&|r| r.t_cut_s),
            }
        })
        .collect()
}

/// Solves every (instance, config) pair on `workers` threads. Rows come back
/// in manifest order regardless of completion order; failures become rows.
pub fn run_jobs(
    instances: &[PathBuf],
    configs: &[SolveConfig],
    workers: usize,
    backend: &dyn MilpBackend,
) -> Vec<ResultRow> {
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..configs.len()).map(move |c| (i, c)))
        .collect();
    let results: Mutex<Vec<Option<ResultRow>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(i, c)) = jobs.get(j) else { break };
                let path = &instances[i];
                let name = path
                    .file_stem()
                    .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                let cfg = &configs[c];
                let row = match load_instance(path) {
                    Err(e) => ResultRow::failed(&name, cfg, &e.to_string()),
                    Ok((inst, _)) => match solve(&inst, cfg, backend) {
                        Ok(sol) => ResultRow::from_solution(&name, &sol),
                        Err(e) => ResultRow::failed(&name, cfg, &e.to_string()),
                    },
                };
                log::info!("{name} {cfg}: {}", row.status);
                results.lock().expect("no worker panics while holding the lock")[j] = Some(row);
            });
        }
    });
    results
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Runs a manifest and writes `results.csv` and `summary.csv` into its output
/// directory.
pub fn run_benchmark(manifest: &RunManifest, backend: &dyn MilpBackend) -> Result<Vec<ResultRow>, BenchError> {
    let configs = manifest.parsed_configs().map_err(|message| BenchError::Manifest {
        path: "<manifest>".into(),
        message,
    })?;
    let dir = &manifest.output_dir;
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let rows = run_jobs(&manifest.instances, &configs, manifest.workers, backend);
    write_results(&dir.join("results.csv"), &rows)?;
    write_summary(&dir.join("summary.csv"), &summarize(&rows))?;
    Ok(rows)
}
