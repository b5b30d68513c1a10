//! Solve orchestration: model construction, the cut loop and schedule
//! extraction.
//!
//! The 2-index models run a re-solve loop. Each integral optimum of the
//! current model is traced; depot-mismatched vehicle paths are cut off and the
//! model is solved again until the optimum is depot-correct.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, LinearModel, MilpBackend, SolveParams, SolveStatus};
use crate::formulation::{build_three_index, build_two_index_base, triple_of, FormulationHandle};
use crate::graph::{NodeKind, SchedulingGraph};
use crate::instance::Instance;
use crate::objective::{check_tiers, ObjectiveTriple};
use crate::schedule::{Stop, VehicleSchedule};
use crate::separation::{
    separate_fractional, separate_integral, trace_paths, AddMode, CandidatePoint, Cut, CutFamily,
    SeparationError, VIOLATION_TOL,
};

/// Cap on LP cutting rounds before branching when fractional points are
/// separated.
pub const MAX_FRACTIONAL_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    ThreeIndex,
    TwoIndexIp,
    TwoIndexCc,
}

impl Formulation {
    pub fn cut_family(&self) -> Option<CutFamily> {
        match self {
            Formulation::ThreeIndex => None,
            Formulation::TwoIndexIp => Some(CutFamily::Ip),
            Formulation::TwoIndexCc => Some(CutFamily::Cc),
        }
    }

    /// Short command-line name.
    pub fn cli_name(&self) -> &'static str {
        match self {
            Formulation::ThreeIndex => "3i",
            Formulation::TwoIndexIp => "2i-ip",
            Formulation::TwoIndexCc => "2i-cc",
        }
    }
}

impl FromStr for Formulation {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "3i" => Ok(Formulation::ThreeIndex),
            "2i-ip" => Ok(Formulation::TwoIndexIp),
            "2i-cc" => Ok(Formulation::TwoIndexCc),
            _ => Err(ConfigError::Model(s.to_owned())),
        }
    }
}

/// Which candidate points are separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SepMode {
    /// Integral points only.
    I,
    /// Fractional LP points at the root, then integral points.
    IF,
}

impl FromStr for SepMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "i" => Ok(SepMode::I),
            "if" => Ok(SepMode::IF),
            _ => Err(ConfigError::Sep(s.to_owned())),
        }
    }
}

impl FromStr for AddMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "one" => Ok(AddMode::One),
            "all" => Ok(AddMode::All),
            _ => Err(ConfigError::Cuts(s.to_owned())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown model `{0}`; valid settings: {VALID_SETTINGS}")]
    Model(String),
    #[error("unknown separation mode `{0}` (expected i or if)")]
    Sep(String),
    #[error("unknown cut mode `{0}` (expected one or all)")]
    Cuts(String),
    #[error("malformed setting `{0}`; valid settings: {VALID_SETTINGS}")]
    Setting(String),
}

pub const VALID_SETTINGS: &str =
    "3i, 3i+VI, 2i-IP[+VI]+{I,IF}+{One,All}, 2i-CC[+VI]+{I,IF}+{One,All}";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub formulation: Formulation,
    pub sep: SepMode,
    pub add: AddMode,
    pub vi: bool,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            formulation: Formulation::TwoIndexCc,
            sep: SepMode::I,
            add: AddMode::All,
            vi: true,
            time_limit: 600.0,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn new(formulation: Formulation, vi: bool) -> Self {
        SolveConfig {
            formulation,
            vi,
            ..SolveConfig::default()
        }
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = seconds;
        self
    }
}

/// Setting names such as `2i-CC+VI+I+All` or `3i+VI`.
impl fmt::Display for SolveConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let model = match self.formulation {
            Formulation::ThreeIndex => "3i",
            Formulation::TwoIndexIp => "2i-IP",
            Formulation::TwoIndexCc => "2i-CC",
        };
        f.write_str(model)?;
        if self.vi {
            f.write_str("+VI")?;
        }
        if self.formulation != Formulation::ThreeIndex {
            let sep = match self.sep {
                SepMode::I => "I",
                SepMode::IF => "IF",
            };
            let add = match self.add {
                AddMode::One => "One",
                AddMode::All => "All",
            };
            write!(f, "+{sep}+{add}")?;
        }
        Ok(())
    }
}

impl FromStr for SolveConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Setting(s.to_owned());
        let mut parts = s.split('+');
        let formulation: Formulation = parts.next().ok_or_else(bad)?.parse()?;
        let mut cfg = SolveConfig {
            formulation,
            vi: false,
            ..SolveConfig::default()
        };
        let mut rest: Vec<&str> = parts.collect();
        if rest.first().is_some_and(|p| p.eq_ignore_ascii_case("vi")) {
            cfg.vi = true;
            rest.remove(0);
        }
        match (formulation, rest.as_slice()) {
            (Formulation::ThreeIndex, []) => {}
            (Formulation::ThreeIndex, _) => return Err(bad()),
            (_, [sep, add]) => {
                cfg.sep = sep.parse().map_err(|_| bad())?;
                cfg.add = add.parse().map_err(|_| bad())?;
            }
            (_, []) => {}
            _ => return Err(bad()),
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutLogEntry {
    pub round: usize,
    /// `path` or `connectivity`.
    pub kind: String,
    /// Origin depot, and for path cuts the destination depot.
    pub depots: Vec<usize>,
    pub size: usize,
    pub violation: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub cuts_added: usize,
    /// Seconds spent in separation.
    pub cut_time: f64,
    pub solve_time: f64,
    /// Backend solves of the MILP (one for the 3-index model).
    pub rounds: usize,
    /// LP cutting rounds run before branching.
    pub lp_rounds: usize,
    /// Scalar objective of every MILP re-solve.
    pub round_objectives: Vec<f64>,
    pub cut_log: Vec<CutLogEntry>,
    /// The added inequalities, in the order of `cut_log`.
    #[serde(skip)]
    pub cuts: Vec<Cut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub setting: String,
    pub config: SolveConfig,
    pub backend: String,
    pub status: SolveStatus,
    pub schedules: Vec<VehicleSchedule>,
    pub objective: Option<ObjectiveTriple>,
    /// Scalarized objective of the incumbent.
    pub objective_value: Option<f64>,
    pub bound: Option<f64>,
    pub root_bound: Option<f64>,
    pub gap_pct: f64,
    pub stats: SolveStats,
}

impl Solution {
    pub fn has_incumbent(&self) -> bool {
        self.objective.is_some()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error("time limit must be positive, got {0}")]
    TimeLimit(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ExtractionError {
    #[error(transparent)]
    Trace(#[from] SeparationError),
    #[error("vehicle path leaves depot {origin} and ends at depot {destination}")]
    Mismatched { origin: usize, destination: usize },
}

/// `(incumbent - bound) / incumbent` in percent; 100 without incumbent.
pub fn gap_pct(incumbent: Option<f64>, bound: Option<f64>) -> f64 {
    match (incumbent, bound) {
        (Some(inc), Some(b)) if inc.abs() > 1e-12 => ((inc - b) / inc * 100.0).max(0.0),
        (Some(_), Some(_)) => 0.0,
        _ => 100.0,
    }
}

/// Splits an integral, depot-correct arc vector into vehicle schedules.
/// Charge amounts are `ε_c - (ε_pred - p)` clamped to `[0, h_c]`; dwell is the
/// node window.
pub fn extract_schedules(
    instance: &Instance,
    graph: &SchedulingGraph,
    arc_values: &[f64],
    eps: &[f64],
) -> Result<Vec<VehicleSchedule>, ExtractionError> {
    let paths = trace_paths(graph, &CandidatePoint::new(arc_values.to_vec()))?;
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        if path.is_mismatched() {
            return Err(ExtractionError::Mismatched {
                origin: path.origin,
                destination: path.destination,
            });
        }
        let nodes = path.nodes(graph);
        let mut stops = Vec::with_capacity(nodes.len());
        let mut soc = Vec::with_capacity(nodes.len());
        for (pos, &n) in nodes.iter().enumerate() {
            let node = graph.node(n);
            let stop = match node.kind {
                NodeKind::Origin(k) => Stop::Origin { depot: k },
                NodeKind::Destination(k) => Stop::Destination { depot: k },
                NodeKind::Trip(i) => Stop::Trip {
                    id: instance.trips[i].id,
                },
                NodeKind::FullCharge { station, .. } | NodeKind::PartialCharge { station, .. } => {
                    let pred = nodes[pos - 1];
                    let arc = graph.arc_between(pred, n).expect("traced arc exists");
                    let arrival = eps[pred] - graph.arc(arc).energy;
                    Stop::Charge {
                        station: instance.stations[station].id,
                        amount: (eps[n] - arrival).clamp(0.0, node.capacity),
                        dwell: node.window,
                    }
                }
            };
            stops.push(stop);
            soc.push(if pos == 0 { instance.params.s_max } else { eps[n] });
        }
        out.push(VehicleSchedule {
            stops,
            start_soc: instance.params.s_max,
            soc,
        });
    }
    Ok(out)
}

fn remaining(deadline: Instant) -> Duration {
    deadline.saturating_duration_since(Instant::now())
}

fn log_cuts(stats: &mut SolveStats, round: usize, cuts: &[Cut], graph: &SchedulingGraph, values: &[f64]) {
    for c in cuts {
        let (kind, depots) = match c {
            Cut::Path(p) => ("path", vec![p.origin, p.destination]),
            Cut::Connectivity(cc) => ("connectivity", vec![cc.depot]),
        };
        stats.cut_log.push(CutLogEntry {
            round,
            kind: kind.into(),
            depots,
            size: c.size(),
            violation: c.violation(graph, values),
        });
        stats.cuts.push(c.clone());
    }
}

fn add_cuts(handle: &mut FormulationHandle, graph: &SchedulingGraph, cuts: &[Cut], tag: &str) {
    for (i, c) in cuts.iter().enumerate() {
        match c {
            Cut::Path(p) => {
                handle.add_path_cut(&format!("ip_{tag}_{i}"), &p.arcs);
            }
            Cut::Connectivity(cc) => {
                handle.add_connectivity_cut(&format!("cc_{tag}_{i}"), graph, &cc.in_set, cc.depot);
            }
        }
    }
}

fn is_integral(values: &[f64]) -> bool {
    values.iter().all(|v| (v - v.round()).abs() <= 1e-6)
}

/// Solves `instance` with the model and cut policy of `config`.
pub fn solve(
    instance: &Instance,
    config: &SolveConfig,
    backend: &dyn MilpBackend,
) -> Result<Solution, SolveError> {
    let graph = SchedulingGraph::build(instance);
    solve_on(instance, &graph, config, backend)
}

pub fn solve_on(
    instance: &Instance,
    graph: &SchedulingGraph,
    config: &SolveConfig,
    backend: &dyn MilpBackend,
) -> Result<Solution, SolveError> {
    if config.time_limit.is_nan() || config.time_limit <= 0.0 {
        return Err(SolveError::TimeLimit(config.time_limit));
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(config.time_limit.min(1e9));
    for w in check_tiers(instance, graph).warnings {
        log::warn!("{w}");
    }

    let mut handle = match config.formulation {
        Formulation::ThreeIndex => build_three_index(graph, instance, config.vi),
        _ => build_two_index_base(graph, instance, config.vi),
    };
    let family = config.formulation.cut_family();
    let mut stats = SolveStats::default();
    let params = |relax: bool| SolveParams {
        time_limit: Some(remaining(deadline)),
        relax_integrality: relax,
        seed: config.seed,
    };

    let root = backend.solve(&handle.model, &params(true))?;
    let root_bound = match root.status {
        SolveStatus::Optimal => root.objective,
        _ => None,
    };
    let finish = |status, schedules, objective: Option<ObjectiveTriple>, bound: Option<f64>, mut stats: SolveStats| {
        stats.solve_time = start.elapsed().as_secs_f64();
        let objective_value = objective.map(|t| t.scalarize(&instance.weights));
        let bound = match (bound, root_bound) {
            (Some(b), Some(r)) => Some(b.max(r)),
            (b, r) => b.or(r),
        };
        let bound = match (status, objective_value) {
            (SolveStatus::Optimal, Some(v)) => Some(v),
            _ => bound,
        };
        Solution {
            setting: config.to_string(),
            config: *config,
            backend: backend.name().to_owned(),
            status,
            schedules,
            objective,
            objective_value,
            bound,
            root_bound,
            gap_pct: if status == SolveStatus::Optimal { 0.0 } else { gap_pct(objective_value, bound) },
            stats,
        }
    };
    if root.status == SolveStatus::Infeasible {
        return Ok(finish(SolveStatus::Infeasible, Vec::new(), None, None, stats));
    }

    if let (Some(family), SepMode::IF) = (family, config.sep) {
        lp_rounds(&mut handle, graph, family, config.add, deadline, backend, config.seed, &mut stats)?;
    }

    let mut best_bound: Option<f64> = None;
    loop {
        if remaining(deadline).is_zero() {
            return Ok(finish(SolveStatus::TimeLimit, Vec::new(), None, best_bound, stats));
        }
        let sol = backend.solve(&handle.model, &params(false))?;
        stats.rounds += 1;
        if let Some(b) = sol.bound {
            best_bound = Some(best_bound.map_or(b, |x: f64| x.max(b)));
        }
        let values = match (sol.status, &sol.values) {
            (SolveStatus::Infeasible, _) => {
                return Ok(finish(SolveStatus::Infeasible, Vec::new(), None, None, stats));
            }
            (_, Some(v)) => v,
            (_, None) => {
                return Ok(finish(SolveStatus::TimeLimit, Vec::new(), None, best_bound, stats));
            }
        };
        let x = handle.arc_values(values);
        stats.round_objectives.push(handle.model.objective_value(values));

        let cuts = match family {
            None => Vec::new(),
            Some(family) => {
                let out = separate_integral(graph, &CandidatePoint::new(x.clone()), family, config.add)?;
                stats.cut_time += out.seconds;
                out.cuts
            }
        };
        if cuts.is_empty() {
            let schedules = extract_schedules(instance, graph, &x, &handle.eps_values(values))?;
            let status = if sol.status == SolveStatus::Optimal {
                SolveStatus::Optimal
            } else {
                SolveStatus::Feasible
            };
            return Ok(finish(status, schedules, Some(triple_of(graph, &x)), best_bound, stats));
        }
        let round = stats.rounds;
        log::info!("round {round}: objective {:.4}, {} cuts", stats.round_objectives[round - 1], cuts.len());
        log_cuts(&mut stats, round, &cuts, graph, &x);
        stats.cuts_added += cuts.len();
        add_cuts(&mut handle, graph, &cuts, &format!("r{}", stats.rounds));
        if sol.status != SolveStatus::Optimal {
            // the incumbent was cut off and the backend had no time left
            return Ok(finish(SolveStatus::TimeLimit, Vec::new(), None, best_bound, stats));
        }
    }
}

/// LP cutting rounds with fractional separation before the first MILP solve.
#[allow(clippy::too_many_arguments)]
fn lp_rounds(
    handle: &mut FormulationHandle,
    graph: &SchedulingGraph,
    family: CutFamily,
    add: AddMode,
    deadline: Instant,
    backend: &dyn MilpBackend,
    seed: u64,
    stats: &mut SolveStats,
) -> Result<(), SolveError> {
    for round in 0..MAX_FRACTIONAL_ROUNDS {
        if remaining(deadline).is_zero() {
            break;
        }
        let lp = backend.solve(
            &handle.model,
            &SolveParams {
                time_limit: Some(remaining(deadline)),
                relax_integrality: true,
                seed,
            },
        )?;
        let Some(values) = lp.values.filter(|_| lp.status == SolveStatus::Optimal) else {
            break;
        };
        let x = handle.arc_values(&values);
        let point = CandidatePoint::new(x.clone());
        let out = if is_integral(&x) {
            separate_integral(graph, &point, family, add)?
        } else {
            separate_fractional(graph, &point, family, add)
        };
        stats.cut_time += out.seconds;
        let cuts: Vec<Cut> = out
            .cuts
            .into_iter()
            .filter(|c| c.violation(graph, &x) > VIOLATION_TOL)
            .collect();
        if cuts.is_empty() {
            break;
        }
        log_cuts(stats, 0, &cuts, graph, &x);
        stats.cuts_added += cuts.len();
        stats.lp_rounds += 1;
        add_cuts(handle, graph, &cuts, &format!("lp{round}"));
    }
    Ok(())
}

/// The model a configuration starts from, for export.
pub fn initial_model(instance: &Instance, graph: &SchedulingGraph, config: &SolveConfig) -> LinearModel {
    match config.formulation {
        Formulation::ThreeIndex => build_three_index(graph, instance, config.vi).model,
        _ => build_two_index_base(graph, instance, config.vi).model,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::HighsBackend;
    use crate::fixtures::{crossing_instance, three_trip_instance};
    use crate::validator::validate;

    fn all_configs() -> Vec<SolveConfig> {
        let mut v = Vec::new();
        for f in [Formulation::ThreeIndex, Formulation::TwoIndexIp, Formulation::TwoIndexCc] {
            for vi in [false, true] {
                v.push(SolveConfig::new(f, vi).with_time_limit(60.0));
            }
        }
        v
    }

    #[test]
    fn setting_names_round_trip() {
        for s in ["3i", "3i+VI", "2i-IP+VI+I+All", "2i-CC+I+One", "2i-CC+VI+IF+All"] {
            let c: SolveConfig = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!(matches!("4i".parse::<SolveConfig>(), Err(ConfigError::Model(_))));
        assert!("3i+VI+I+All".parse::<SolveConfig>().is_err());
        assert!("2i-IP+VI+X+All".parse::<SolveConfig>().is_err());
    }

    #[test]
    fn gap_convention() {
        assert_eq!(gap_pct(None, Some(3.0)), 100.0);
        assert_eq!(gap_pct(Some(200.0), Some(150.0)), 25.0);
        assert_eq!(gap_pct(Some(200.0), Some(200.0)), 0.0);
    }

    #[test]
    fn single_depot_runs_without_cuts() {
        let inst = three_trip_instance(1);
        let mut triples = Vec::new();
        for cfg in all_configs() {
            let sol = solve(&inst, &cfg, &HighsBackend::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal, "{cfg}");
            assert_eq!(sol.stats.cuts_added, 0, "{cfg}");
            let r = validate(&inst, &sol.schedules);
            assert!(r.pass, "{cfg}: {:?}", r.violations);
            assert!(r.objective.approx_eq(sol.objective.as_ref().unwrap(), 1e-9));
            triples.push(sol.objective.unwrap());
        }
        assert!(triples.windows(2).all(|w| w[0].approx_eq(&w[1], 1e-6)));
    }

    #[test]
    fn crossing_instance_needs_cuts() {
        let inst = crossing_instance();
        let three = solve(&inst, &SolveConfig::new(Formulation::ThreeIndex, true), &HighsBackend::default()).unwrap();
        for f in [Formulation::TwoIndexIp, Formulation::TwoIndexCc] {
            for add in [AddMode::One, AddMode::All] {
                let cfg = SolveConfig {
                    add,
                    ..SolveConfig::new(f, false)
                };
                let sol = solve(&inst, &cfg, &HighsBackend::default()).unwrap();
                assert_eq!(sol.status, SolveStatus::Optimal);
                assert!(sol.stats.cuts_added >= 1, "{cfg}");
                assert!(validate(&inst, &sol.schedules).pass);
                assert!(sol.objective.unwrap().approx_eq(three.objective.as_ref().unwrap(), 1e-6));
                let objs = &sol.stats.round_objectives;
                assert!(objs.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{objs:?}");
                assert_eq!(sol.stats.cut_log.len(), sol.stats.cuts_added);
            }
        }
    }

    #[test]
    fn fractional_mode_reaches_same_optimum() {
        let inst = crossing_instance();
        for f in [Formulation::TwoIndexIp, Formulation::TwoIndexCc] {
            let base = solve(&inst, &SolveConfig::new(f, true), &HighsBackend::default()).unwrap();
            let cfg = SolveConfig {
                sep: SepMode::IF,
                ..SolveConfig::new(f, true)
            };
            let sol = solve(&inst, &cfg, &HighsBackend::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert!(sol.objective.unwrap().approx_eq(base.objective.as_ref().unwrap(), 1e-6));
            assert!(validate(&inst, &sol.schedules).pass);
        }
    }

    #[test]
    fn hand_built_path_extracts_one_charge() {
        let inst = three_trip_instance(1);
        let graph = SchedulingGraph::build_with(
            &inst,
            crate::graph::GraphOptions {
                dominance: true,
                prune: false,
            },
        );
        use NodeKind::*;
        let seq = [
            Origin(0),
            Trip(0),
            PartialCharge { from: 0, to: 1, station: 1 },
            Trip(1),
            Destination(0),
        ];
        let mut x = vec![0.0; graph.n_arcs()];
        let ids: Vec<_> = seq.iter().map(|k| graph.node_id(*k).unwrap()).collect();
        for w in ids.windows(2) {
            x[graph.arc_between(w[0], w[1]).unwrap()] = 1.0;
        }
        for w in [[Origin(0), Trip(2)], [Trip(2), Destination(0)]] {
            let (a, b) = (graph.node_id(w[0]).unwrap(), graph.node_id(w[1]).unwrap());
            x[graph.arc_between(a, b).unwrap()] = 1.0;
        }
        // departure energies consistent with 30 units recharged at a2
        let mut eps = vec![inst.params.s_min; graph.n_nodes()];
        eps[ids[0]] = 1000.0;
        eps[ids[1]] = 1000.0 - 1.3 * (40.0 + 45.0);
        eps[ids[2]] = eps[ids[1]] - 1.3 * 19.0 + 30.0;
        let sched = extract_schedules(&inst, &graph, &x, &eps).unwrap();
        assert_eq!(sched.len(), 2);
        assert_eq!(sched[0].n_charges(), 1);
        let Stop::Charge { station, amount, dwell } = sched[0].stops[2] else { panic!() };
        assert_eq!(station, 2);
        assert!((amount - 30.0).abs() < 1e-9);
        assert_eq!(dwell, 116.0);
        assert!(validate(&inst, &sched).pass);
    }

    #[test]
    fn mismatched_arcs_refuse_extraction() {
        let inst = three_trip_instance(2);
        let graph = SchedulingGraph::build(&inst);
        let mut x = vec![0.0; graph.n_arcs()];
        let path = [NodeKind::Origin(0), NodeKind::Trip(0), NodeKind::Destination(1)];
        let ids: Vec<_> = path.iter().map(|k| graph.node_id(*k).unwrap()).collect();
        for w in ids.windows(2) {
            x[graph.arc_between(w[0], w[1]).unwrap()] = 1.0;
        }
        let eps = vec![500.0; graph.n_nodes()];
        assert_eq!(
            extract_schedules(&inst, &graph, &x, &eps),
            Err(ExtractionError::Mismatched { origin: 0, destination: 1 })
        );
    }

    #[test]
    fn rejects_nonpositive_time_limit() {
        let inst = three_trip_instance(1);
        let cfg = SolveConfig::default().with_time_limit(0.0);
        assert!(matches!(solve(&inst, &cfg, &HighsBackend::default()), Err(SolveError::TimeLimit(_))));
    }
}
