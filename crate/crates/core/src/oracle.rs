//! Exhaustive optimum for tiny instances, used to cross-check the models.
//!
//! Every depot-correct origin-to-destination path of the scheduling graph is
//! enumerated and kept when [`feasible_exists`] accepts it. A dynamic program
//! over covered-trip masks and per-depot vehicle counts then picks the
//! lexicographically smallest partition.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{ArcId, NodeId, NodeKind, SchedulingGraph};
use crate::instance::Instance;
use crate::objective::ObjectiveTriple;
use crate::schedule::{Stop, VehicleSchedule};
use crate::validator::{feasible_exists, StructureError};

pub const MAX_TRIPS: usize = 6;
pub const MAX_DEPOTS: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle handles at most {MAX_TRIPS} trips and {MAX_DEPOTS} depots, got {trips} and {depots}")]
    TooLarge { trips: usize, depots: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A single-vehicle route that some charging policy makes feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePath {
    pub depot: usize,
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<ArcId>,
    pub mask: u32,
    pub n_charges: u32,
    pub deadhead: f64,
}

impl FeasiblePath {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.n_charges
            .cmp(&other.n_charges)
            .then(self.deadhead.total_cmp(&other.deadhead))
    }
}

/// Stops of a graph path, charge amounts left at zero and dwell set to the
/// node window.
pub fn path_stops(instance: &Instance, graph: &SchedulingGraph, nodes: &[NodeId]) -> Vec<Stop> {
    nodes
        .iter()
        .map(|&n| {
            let node = graph.node(n);
            match node.kind {
                NodeKind::Origin(k) => Stop::Origin { depot: k },
                NodeKind::Destination(k) => Stop::Destination { depot: k },
                NodeKind::Trip(i) => Stop::Trip {
                    id: instance.trips[i].id,
                },
                NodeKind::FullCharge { station, .. } | NodeKind::PartialCharge { station, .. } => {
                    Stop::Charge {
                        station: instance.stations[station].id,
                        amount: 0.0,
                        dwell: node.window,
                    }
                }
            }
        })
        .collect()
}

fn guard(instance: &Instance) -> Result<(), OracleError> {
    if instance.n_trips() > MAX_TRIPS || instance.n_depots() > MAX_DEPOTS {
        return Err(OracleError::TooLarge {
            trips: instance.n_trips(),
            depots: instance.n_depots(),
        });
    }
    Ok(())
}

/// All feasible depot-correct paths of `graph`.
pub fn feasible_paths(
    instance: &Instance,
    graph: &SchedulingGraph,
) -> Result<Vec<FeasiblePath>, OracleError> {
    guard(instance)?;
    let mut out = Vec::new();
    for k in 0..graph.n_depots() {
        let mut nodes = vec![graph.origin(k)];
        let mut arcs = Vec::new();
        walk(instance, graph, k, &mut nodes, &mut arcs, &mut out)?;
    }
    Ok(out)
}

fn walk(
    instance: &Instance,
    graph: &SchedulingGraph,
    k: usize,
    nodes: &mut Vec<NodeId>,
    arcs: &mut Vec<ArcId>,
    out: &mut Vec<FeasiblePath>,
) -> Result<(), OracleError> {
    let last = *nodes.last().expect("path starts at an origin");
    match graph.node(last).kind {
        NodeKind::Destination(d) => {
            if d == k && feasible_exists(instance, &path_stops(instance, graph, nodes))? {
                let mut mask = 0u32;
                let mut n_charges = 0;
                for &n in nodes.iter() {
                    match graph.node(n).kind {
                        NodeKind::Trip(i) => mask |= 1 << i,
                        kind if kind.is_charging() => n_charges += 1,
                        _ => {}
                    }
                }
                out.push(FeasiblePath {
                    depot: k,
                    nodes: nodes.clone(),
                    arcs: arcs.clone(),
                    mask,
                    n_charges,
                    deadhead: arcs.iter().map(|&a| graph.arc(a).energy).sum(),
                });
            }
            return Ok(());
        }
        NodeKind::Origin(_) if nodes.len() > 1 => return Ok(()),
        _ => {}
    }
    for &a in graph.out_arcs(last) {
        nodes.push(graph.arc(a).head);
        arcs.push(a);
        walk(instance, graph, k, nodes, arcs, out)?;
        nodes.pop();
        arcs.pop();
    }
    Ok(())
}

/// Lexicographic optimum over the default graph; `None` when no feasible
/// schedule exists.
pub fn brute_force_optimum(instance: &Instance) -> Result<Option<ObjectiveTriple>, OracleError> {
    guard(instance)?;
    brute_force_optimum_on(instance, &SchedulingGraph::build(instance))
}

type Usage = Vec<u32>;

pub fn brute_force_optimum_on(
    instance: &Instance,
    graph: &SchedulingGraph,
) -> Result<Option<ObjectiveTriple>, OracleError> {
    let n = instance.n_trips();
    let n_k = instance.n_depots();
    let paths = feasible_paths(instance, graph)?;

    // best route per (trip set, depot)
    let mut best: HashMap<(u32, usize), &FeasiblePath> = HashMap::new();
    for p in &paths {
        best.entry((p.mask, p.depot))
            .and_modify(|b| {
                if p.key_cmp(b) == Ordering::Less {
                    *b = p;
                }
            })
            .or_insert(p);
    }
    let mut options: Vec<(u32, usize, u32, f64)> = best
        .iter()
        .map(|(&(m, k), p)| (m, k, p.n_charges, p.deadhead))
        .collect();
    options.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let caps: Vec<u32> = instance.depots.iter().map(|d| d.capacity.min(n as u32)).collect();
    // states[mask] maps per-depot usage to the best (charges, deadhead)
    let mut states: Vec<HashMap<Usage, (u32, f64)>> = vec![HashMap::new(); (full + 1) as usize];
    states[0].insert(vec![0; n_k], (0, 0.0));
    for mask in 0..full {
        if states[mask as usize].is_empty() {
            continue;
        }
        let first = (!mask).trailing_zeros();
        let current: Vec<_> = states[mask as usize].iter().map(|(u, v)| (u.clone(), *v)).collect();
        for &(m, k, c, e) in &options {
            if m & mask != 0 || m & (1 << first) == 0 {
                continue;
            }
            for (usage, (c0, e0)) in &current {
                if usage[k] >= caps[k] {
                    continue;
                }
                let mut u = usage.clone();
                u[k] += 1;
                let cand = (c0 + c, e0 + e);
                let slot = states[(mask | m) as usize].entry(u).or_insert((u32::MAX, f64::INFINITY));
                if cand.0 < slot.0 || (cand.0 == slot.0 && cand.1 < slot.1) {
                    *slot = cand;
                }
            }
        }
    }
    Ok(states[full as usize]
        .iter()
        .map(|(u, &(c, e))| ObjectiveTriple::new(u.iter().sum(), c, e))
        .min_by(|a, b| a.lex_cmp(b)))
}

/// Calls `f` with every feasible depot-correct solution (as a list of paths)
/// until `limit` solutions have been visited. Returns the number visited.
pub fn for_each_solution(
    instance: &Instance,
    graph: &SchedulingGraph,
    limit: usize,
    mut f: impl FnMut(&[&FeasiblePath]),
) -> Result<usize, OracleError> {
    let paths = feasible_paths(instance, graph)?;
    let full = if instance.n_trips() == 0 { 0 } else { (1u32 << instance.n_trips()) - 1 };
    let caps: Vec<u32> = instance.depots.iter().map(|d| d.capacity).collect();
    let mut chosen = Vec::new();
    let mut usage = vec![0u32; instance.n_depots()];
    let mut count = 0;
    extend(&paths, full, 0, &caps, &mut usage, &mut chosen, &mut count, limit, &mut f);
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn extend<'a>(
    paths: &'a [FeasiblePath],
    full: u32,
    mask: u32,
    caps: &[u32],
    usage: &mut Vec<u32>,
    chosen: &mut Vec<&'a FeasiblePath>,
    count: &mut usize,
    limit: usize,
    f: &mut impl FnMut(&[&FeasiblePath]),
) {
    if *count >= limit {
        return;
    }
    if mask == full {
        *count += 1;
        f(chosen);
        return;
    }
    let first = (!mask).trailing_zeros();
    for p in paths {
        if p.mask & mask != 0 || p.mask & (1 << first) == 0 || usage[p.depot] >= caps[p.depot] {
            continue;
        }
        usage[p.depot] += 1;
        chosen.push(p);
        extend(paths, full, mask | p.mask, caps, usage, chosen, count, limit, f);
        chosen.pop();
        usage[p.depot] -= 1;
    }
}

/// 0/1 arc vector of a set of paths.
pub fn arc_vector(graph: &SchedulingGraph, paths: &[&FeasiblePath]) -> Vec<f64> {
    let mut v = vec![0.0; graph.n_arcs()];
    for p in paths {
        for &a in &p.arcs {
            v[a] = 1.0;
        }
    }
    v
}

/// Schedules with greedy charge amounts for a set of feasible paths.
pub fn schedules_of(
    instance: &Instance,
    graph: &SchedulingGraph,
    paths: &[&FeasiblePath],
) -> Vec<VehicleSchedule> {
    paths
        .iter()
        .map(|p| VehicleSchedule {
            stops: path_stops(instance, graph, &p.nodes),
            start_soc: instance.params.s_max,
            soc: Vec::new(),
        })
        .map(|mut s| {
            fill_greedy_amounts(instance, &mut s);
            s
        })
        .collect()
}

/// Sets every charge amount to what greedy full charging would add.
fn fill_greedy_amounts(instance: &Instance, schedule: &mut VehicleSchedule) {
    let p = &instance.params;
    let mut soc = p.s_max;
    let mut prev = None;
    for stop in schedule.stops.iter_mut() {
        let here = match *stop {
            Stop::Origin { depot } => crate::instance::Point::Origin(depot),
            Stop::Destination { depot } => crate::instance::Point::Destination(depot),
            Stop::Trip { id } => crate::instance::Point::Trip(instance.trip_index(id).expect("known trip")),
            Stop::Charge { station, .. } => {
                crate::instance::Point::Station(instance.station_index(station).expect("known station"))
            }
        };
        if let Some(from) = prev {
            soc -= instance.energy(from, here);
        }
        match stop {
            Stop::Trip { .. } => {
                if let crate::instance::Point::Trip(i) = here {
                    soc -= instance.trips[i].energy;
                }
            }
            Stop::Charge { amount, dwell, .. } => {
                let add = (p.charge_rate * dwell.min(p.t_max)).min(p.s_max - soc).max(0.0);
                *amount = add;
                soc += add;
            }
            _ => {}
        }
        prev = Some(here);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_trip_instance;
    use crate::instance::{
        ChargingStation, Depot, InstanceMeta, Location, ServiceTrip, VehicleParams, Weights,
    };
    use crate::validator::validate;

    fn one_trip() -> Instance {
        let params = VehicleParams {
            consumption_rate: 1.0,
            s_max: 1000.0,
            s_min: 10.0,
            s_min_dep: 700.0,
            t_min: 10.0,
            charge_rate: 50.0 / 6.0,
            t_max: 118.8,
        };
        Instance::euclidean(
            vec![ServiceTrip::new(
                7,
                Location::new("a", 3.0, 4.0),
                Location::new("b", 6.0, 8.0),
                500,
                530,
                30.0,
            )],
            vec![Depot {
                location: Location::new("dep", 0.0, 0.0),
                capacity: 1,
            }],
            Vec::<ChargingStation>::new(),
            params,
            Weights::default(),
            InstanceMeta::default(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn single_trip_unique_schedule() {
        let inst = one_trip();
        let t = brute_force_optimum(&inst).unwrap().unwrap();
        assert_eq!((t.n_vehicles, t.n_charges), (1, 0));
        assert!((t.deadhead_energy - (5.0 + 10.0)).abs() < 1e-9);
    }

    #[test]
    fn three_trip_needs_two_vehicles() {
        let inst = three_trip_instance(1);
        let t = brute_force_optimum(&inst).unwrap().unwrap();
        assert!(t.n_vehicles >= inst.fleet_lower_bound() as u32);
        assert_eq!(t.n_vehicles, 2);
    }

    #[test]
    fn guard_refuses_large_instances() {
        let mut inst = three_trip_instance(1);
        let base = inst.trips[0].clone();
        for id in 10..14 {
            let mut t = base.clone();
            t.id = id;
            inst.trips.push(t);
        }
        assert!(matches!(brute_force_optimum(&inst), Err(OracleError::TooLarge { trips: 7, .. })));
    }

    #[test]
    fn enumerated_solutions_validate() {
        let inst = three_trip_instance(2);
        let graph = SchedulingGraph::build(&inst);
        let opt = brute_force_optimum_on(&inst, &graph).unwrap().unwrap();
        let mut seen_opt = false;
        let n = for_each_solution(&inst, &graph, 5000, |paths| {
            let r = validate(&inst, &schedules_of(&inst, &graph, paths));
            assert!(r.pass, "{:?}", r.violations);
            assert_ne!(r.objective.lex_cmp(&opt), Ordering::Less);
            seen_opt |= r.objective.approx_eq(&opt, 1e-9);
        })
        .unwrap();
        assert!(n > 0);
        assert!(seen_opt);
    }
}
