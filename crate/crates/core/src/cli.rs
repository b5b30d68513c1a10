//! The `mdevsp` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 infeasible instance or failed
//! validation, 3 time limit reached without an incumbent. Runtime failures
//! (unreadable files, solver errors) also exit with 1.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backend::{backend_by_name, backend_from_env, MilpBackend, SolveStatus};
use crate::bench::{run_benchmark, RunManifest};
use crate::generator::{
    apply_scenario, generate_benchmark, generate_realistic_base, scenario_applies, BenchmarkSpec,
    Scenario,
};
use crate::graph::{GraphOptions, SchedulingGraph};
use crate::instance::{load_instance, save_instance, Instance, Technology};
use crate::oracle::brute_force_optimum;
use crate::schedule::VehicleSchedule;
use crate::separation::AddMode;
use crate::solve::{solve, Formulation, SepMode, SolveConfig};
use crate::validator::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_TIME_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mdevsp", version, about = "Exact multi-depot electric vehicle scheduling")]
struct Cli {
    /// MILP backend (overrides MDEVSP_BACKEND): highs or microlp.
    #[arg(long, global = true)]
    backend: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate instances and a run manifest.
    Generate(GenerateArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Run every instance of a manifest under every listed setting.
    Bench(BenchArgs),
    /// Print the scheduling graph.
    Graph(GraphArgs),
    /// Exhaustive optimum of a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Benchmark,
    Realistic,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "benchmark")]
    family: Family,
    #[arg(long, default_value_t = 10)]
    trips: usize,
    #[arg(long, default_value_t = 1)]
    depots: usize,
    #[arg(long, default_value_t = 1)]
    stations: usize,
    /// DB, BEB or FCEB (realistic family only).
    #[arg(long)]
    tech: Option<Technology>,
    /// standard, cold or battery.
    #[arg(long, default_value = "standard")]
    scenario: Scenario,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Line index of realistic instances.
    #[arg(long, default_value_t = 0)]
    line: u32,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Settings written to the manifest.
    #[arg(long = "config", default_value = "2i-CC+VI+I+All")]
    configs: Vec<String>,
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    /// 3i, 2i-ip or 2i-cc.
    #[arg(long, default_value = "2i-cc")]
    model: Formulation,
    /// i or if.
    #[arg(long, default_value = "i")]
    sep: SepMode,
    /// one or all.
    #[arg(long, default_value = "all")]
    cuts: AddMode,
    #[arg(long)]
    vi: bool,
    /// Full setting name, e.g. 2i-CC+VI+I+All; overrides the flags above.
    #[arg(long)]
    setting: Option<SolveConfig>,
    /// Seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solution file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    instance: PathBuf,
    /// A solution written by `solve`, or a bare list of schedules.
    solution: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the manifest's worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Dot,
    Edges,
}

#[derive(Debug, Args)]
struct GraphArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "edges")]
    format: GraphFormat,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    no_dominance: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    instance: PathBuf,
}

/// Failure with its exit code.
struct Exit(i32, String);

impl<E: std::fmt::Display> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit(EXIT_USAGE, e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Exit> {
    let backend = || -> Result<Box<dyn MilpBackend>, Exit> {
        Ok(match &cli.backend {
            Some(name) => backend_by_name(name)?,
            None => backend_from_env()?,
        })
    };
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve_cmd(a, backend()?.as_ref()),
        Command::Validate(a) => validate_cmd(a),
        Command::Bench(a) => {
            let mut m = RunManifest::load(&a.manifest)?;
            if let Some(w) = a.workers {
                m.workers = w;
            }
            let rows = run_benchmark(&m, backend()?.as_ref())?;
            println!(
                "{} rows written to {}",
                rows.len(),
                m.output_dir.join("results.csv").display()
            );
            Ok(EXIT_OK)
        }
        Command::Graph(a) => {
            let inst = load(&a.instance)?;
            let g = SchedulingGraph::build_with(
                &inst,
                GraphOptions {
                    dominance: !a.no_dominance,
                    prune: !a.no_prune,
                },
            );
            match a.format {
                GraphFormat::Dot => print!("{}", g.to_dot(&inst)),
                GraphFormat::Edges => print!("{}", g.to_edge_list(&inst)),
            }
            Ok(EXIT_OK)
        }
        Command::Oracle(a) => {
            let inst = load(&a.instance)?;
            match brute_force_optimum(&inst)? {
                Some(t) => {
                    println!("{}", serde_json::to_string_pretty(&t)?);
                    Ok(EXIT_OK)
                }
                None => {
                    println!("infeasible");
                    Ok(EXIT_INFEASIBLE)
                }
            }
        }
    }
}

fn load(path: &Path) -> Result<Instance, Exit> {
    Ok(load_instance(path)?.0)
}

fn generate(a: &GenerateArgs) -> Result<i32, Exit> {
    let usage = |m: String| Err(Exit(EXIT_USAGE, m));
    match (a.family, a.tech) {
        (Family::Benchmark, Some(_)) => {
            return usage("--tech applies to the realistic family only".into());
        }
        (Family::Benchmark, None) if a.scenario != Scenario::Standard => {
            return usage("scenarios need a technology (use --family realistic --tech ...)".into());
        }
        (Family::Realistic, Some(t)) if !scenario_applies(a.scenario, t) => {
            return usage(format!("scenario {} cannot be combined with --tech {t}", a.scenario));
        }
        _ => {}
    }
    if a.count == 0 || a.trips == 0 || a.depots == 0 {
        return usage("--count, --trips and --depots must be positive".into());
    }
    let configs: Vec<SolveConfig> = a
        .configs
        .iter()
        .map(|c| c.parse::<SolveConfig>())
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(&a.out)?;

    let mut paths = Vec::new();
    for i in 0..a.count {
        let seed = a.seed + i as u64;
        let (inst, name) = match a.family {
            Family::Benchmark => (
                generate_benchmark(&BenchmarkSpec::new(a.trips, a.depots, a.stations, seed))?,
                format!("benchmark-n{}-k{}-c{}-s{seed}.json", a.trips, a.depots, a.stations),
            ),
            Family::Realistic => {
                let tech = a.tech.unwrap_or(Technology::Beb);
                let base = generate_realistic_base(a.line, a.trips, tech, seed)?;
                (
                    apply_scenario(&base, a.scenario)?,
                    format!("realistic-{tech}-{}-l{}-n{}-s{seed}.json", a.scenario, a.line, a.trips),
                )
            }
        };
        let path = a.out.join(name);
        save_instance(&inst, &path)?;
        paths.push(path);
    }
    let manifest = RunManifest {
        instances: paths.clone(),
        configs: configs.iter().map(|c| c.to_string()).collect(),
        output_dir: a.out.join("results"),
        workers: 1,
        time_limit: a.time_limit,
    };
    fs::write(a.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    for p in &paths {
        println!("{}", p.display());
    }
    Ok(EXIT_OK)
}

fn solve_cmd(a: &SolveArgs, backend: &dyn MilpBackend) -> Result<i32, Exit> {
    let inst = load(&a.instance)?;
    let mut cfg = a.setting.unwrap_or(SolveConfig {
        formulation: a.model,
        sep: a.sep,
        add: a.cuts,
        vi: a.vi,
        time_limit: a.time_limit,
        seed: a.seed,
    });
    cfg.time_limit = a.time_limit;
    cfg.seed = a.seed;
    let sol = solve(&inst, &cfg, backend)?;
    let text = serde_json::to_string_pretty(&sol)?;
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    eprintln!(
        "{}: {:?}{}",
        sol.setting,
        sol.status,
        sol.objective.map_or(String::new(), |t| format!(" {t}"))
    );
    Ok(match sol.status {
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::TimeLimit => EXIT_TIME_LIMIT,
        SolveStatus::Optimal | SolveStatus::Feasible => {
            let report = validate(&inst, &sol.schedules);
            if report.pass {
                EXIT_OK
            } else {
                eprintln!("solution failed validation: {:?}", report.codes());
                EXIT_INFEASIBLE
            }
        }
    })
}

fn read_schedules(path: &Path) -> Result<Vec<VehicleSchedule>, Exit> {
    let text = fs::read_to_string(path).map_err(|e| Exit(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let list = match value {
        serde_json::Value::Object(mut m) => m
            .remove("schedules")
            .ok_or_else(|| Exit(EXIT_USAGE, "solution object has no `schedules`".into()))?,
        other => other,
    };
    Ok(serde_json::from_value(list)?)
}

fn validate_cmd(a: &ValidateArgs) -> Result<i32, Exit> {
    let inst = load(&a.instance)?;
    let schedules = read_schedules(&a.solution)?;
    let report = validate(&inst, &schedules);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.pass { EXIT_OK } else { EXIT_INFEASIBLE })
}
