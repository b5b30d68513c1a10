//! Separation of infeasible-path and connectivity inequalities for the
//! 2-index model.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ArcId, NodeId, NodeKind, SchedulingGraph};
use crate::maxflow::FlowNetwork;

/// Arcs at or below this value are ignored by the fractional path search.
pub const FRACTIONAL_THRESHOLD: f64 = 1e-5;
/// Minimum violation for a cut to be reported.
pub const VIOLATION_TOL: f64 = 1e-6;
/// Node expansions allowed per origin in the fractional path search.
pub const DFS_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePoint {
    /// Value per arc id.
    pub values: Vec<f64>,
    pub integral: bool,
}

impl CandidatePoint {
    pub fn new(values: Vec<f64>) -> Self {
        let integral = values
            .iter()
            .all(|v| (v - v.round()).abs() <= 1e-6);
        CandidatePoint { values, integral }
    }
}

/// A walk from an origin to a destination following used arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepotPath {
    pub origin: usize,
    pub destination: usize,
    pub arcs: Vec<ArcId>,
}

impl DepotPath {
    pub fn nodes(&self, graph: &SchedulingGraph) -> Vec<NodeId> {
        let mut out = vec![graph.arc(self.arcs[0]).tail];
        out.extend(self.arcs.iter().map(|&a| graph.arc(a).head));
        out
    }

    pub fn is_mismatched(&self) -> bool {
        self.origin != self.destination
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfeasiblePathCut {
    pub arcs: Vec<ArcId>,
    pub origin: usize,
    pub destination: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityCut {
    pub depot: usize,
    /// Membership of each node in `U`.
    pub in_set: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cut {
    Path(InfeasiblePathCut),
    Connectivity(ConnectivityCut),
}

impl Cut {
    /// Positive when `values` violates the inequality.
    pub fn violation(&self, graph: &SchedulingGraph, values: &[f64]) -> f64 {
        match self {
            Cut::Path(p) => {
                let lhs: f64 = p.arcs.iter().map(|&a| values[a]).sum();
                lhs - (p.arcs.len() as f64 - 1.0)
            }
            Cut::Connectivity(c) => {
                let crossing = crossing_value(graph, &c.in_set, values);
                origin_outflow(graph, c.depot, values) - crossing
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Cut::Path(p) => p.arcs.len(),
            Cut::Connectivity(c) => c.in_set.iter().filter(|&&b| b).count(),
        }
    }

    pub fn depot(&self) -> usize {
        match self {
            Cut::Path(p) => p.origin,
            Cut::Connectivity(c) => c.depot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum CutFamily {
    /// Infeasible-path inequalities.
    Ip,
    /// Connectivity inequalities.
    Cc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum AddMode {
    One,
    All,
}

#[derive(Debug, Error, PartialEq)]
pub enum SeparationError {
    #[error("node {node} has {count} used outgoing arcs")]
    BrokenFlow { node: NodeId, count: usize },
    #[error("walk from origin {origin} stopped at non-destination node {node}")]
    DeadEnd { origin: usize, node: NodeId },
}

pub fn origin_outflow(graph: &SchedulingGraph, k: usize, values: &[f64]) -> f64 {
    graph
        .out_arcs(graph.origin(k))
        .iter()
        .map(|&a| values[a])
        .sum()
}

fn crossing_value(graph: &SchedulingGraph, in_set: &[bool], values: &[f64]) -> f64 {
    graph
        .arcs()
        .iter()
        .enumerate()
        .filter(|(_, arc)| in_set[arc.tail] && !in_set[arc.head])
        .map(|(a, _)| values[a])
        .sum()
}

/// Follows used arcs from every origin; returns all origin-destination walks.
pub fn trace_paths(
    graph: &SchedulingGraph,
    point: &CandidatePoint,
) -> Result<Vec<DepotPath>, SeparationError> {
    let used = |a: ArcId| point.values[a] > 0.5;
    let mut paths = Vec::new();
    for k in 0..graph.n_depots() {
        for &first in graph.out_arcs(graph.origin(k)) {
            if !used(first) {
                continue;
            }
            let mut arcs = vec![first];
            let mut node = graph.arc(first).head;
            loop {
                if let NodeKind::Destination(kk) = graph.node(node).kind {
                    paths.push(DepotPath {
                        origin: k,
                        destination: kk,
                        arcs,
                    });
                    break;
                }
                let next: Vec<ArcId> = graph
                    .out_arcs(node)
                    .iter()
                    .copied()
                    .filter(|&a| used(a))
                    .collect();
                match next.len() {
                    1 => {
                        arcs.push(next[0]);
                        node = graph.arc(next[0]).head;
                    }
                    0 => return Err(SeparationError::DeadEnd { origin: k, node }),
                    count => return Err(SeparationError::BrokenFlow { node, count }),
                }
            }
        }
    }
    Ok(paths)
}

/// Depot-mismatched walks of an integral point.
pub fn trace_integer_paths(
    graph: &SchedulingGraph,
    point: &CandidatePoint,
) -> Result<Vec<DepotPath>, SeparationError> {
    Ok(trace_paths(graph, point)?
        .into_iter()
        .filter(DepotPath::is_mismatched)
        .collect())
}

/// Depth-first search for paths `o_k … d_k'` (k ≠ k') whose arcs carry
/// total value above `|P| - 1`. Stops at the first such path per pair.
pub fn separate_infeasible_paths_fractional(
    graph: &SchedulingGraph,
    point: &CandidatePoint,
    threshold: f64,
) -> Vec<InfeasiblePathCut> {
    let n_k = graph.n_depots();
    let mut cuts = Vec::new();
    for k in 0..n_k {
        let mut found = vec![false; n_k];
        found[k] = true;
        let mut budget = DFS_BUDGET;
        // stack of (node, next out-arc position, deficit so far)
        let mut stack: Vec<(NodeId, usize, f64)> = vec![(graph.origin(k), 0, 0.0)];
        let mut path: Vec<ArcId> = Vec::new();
        while let Some(top) = stack.last_mut() {
            if found.iter().all(|&f| f) || budget == 0 {
                break;
            }
            let (node, pos, deficit) = *top;
            let outs = graph.out_arcs(node);
            if pos >= outs.len() {
                stack.pop();
                path.pop();
                continue;
            }
            top.1 += 1;
            let a = outs[pos];
            let x = point.values[a];
            if x <= threshold {
                continue;
            }
            let d = deficit + (1.0 - x);
            if d >= 1.0 - VIOLATION_TOL {
                continue;
            }
            let head = graph.arc(a).head;
            budget -= 1;
            if let NodeKind::Destination(kk) = graph.node(head).kind {
                if !found[kk] {
                    found[kk] = true;
                    let mut arcs = path.clone();
                    arcs.push(a);
                    cuts.push(InfeasiblePathCut {
                        arcs,
                        origin: k,
                        destination: kk,
                    });
                }
                continue;
            }
            path.push(a);
            stack.push((head, 0, d));
        }
    }
    cuts
}

/// Minimum `o_k`–`d_k` cut with the other depots forced to their sides.
pub fn separate_connectivity(
    graph: &SchedulingGraph,
    point: &CandidatePoint,
    k: usize,
) -> Option<ConnectivityCut> {
    let outflow = origin_outflow(graph, k, &point.values);
    if outflow <= VIOLATION_TOL {
        return None;
    }
    let total: f64 = point.values.iter().filter(|v| **v > 0.0).sum();
    let inf = total + 1.0;
    let mut net = FlowNetwork::new(graph.n_nodes());
    for (a, arc) in graph.arcs().iter().enumerate() {
        let x = point.values[a];
        if x > 1e-9 {
            net.add_edge(arc.tail, arc.head, x);
        }
    }
    let (o, d) = (graph.origin(k), graph.destination(k));
    for kk in (0..graph.n_depots()).filter(|&kk| kk != k) {
        net.add_edge(o, graph.destination(kk), inf);
        net.add_edge(graph.origin(kk), d, inf);
    }
    let cut = net.min_cut(o, d);
    if cut.value >= outflow - VIOLATION_TOL {
        return None;
    }
    let c = ConnectivityCut {
        depot: k,
        in_set: cut.source_side,
    };
    debug_assert!(in_family(graph, &c));
    Some(c)
}

/// Membership conditions of the cut family for depot `c.depot`.
pub fn in_family(graph: &SchedulingGraph, c: &ConnectivityCut) -> bool {
    let k = c.depot;
    c.in_set[graph.origin(k)]
        && !c.in_set[graph.destination(k)]
        && (0..graph.n_depots())
            .filter(|&kk| kk != k)
            .all(|kk| !c.in_set[graph.origin(kk)] && c.in_set[graph.destination(kk)])
}

pub fn select_cuts(mut cuts: Vec<Cut>, mode: AddMode) -> Vec<Cut> {
    if mode == AddMode::One {
        cuts.truncate(1);
    }
    cuts
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeparationOutcome {
    pub cuts: Vec<Cut>,
    pub mismatched_paths: usize,
    pub seconds: f64,
}

/// Separation at an integral point: every mismatched walk yields a path cut,
/// or a connectivity cut for each depot rooting one. Path cuts back up a
/// connectivity search that comes back empty so the loop always progresses.
pub fn separate_integral(
    graph: &SchedulingGraph,
    point: &CandidatePoint,
    family: CutFamily,
    mode: AddMode,
) -> Result<SeparationOutcome, SeparationError> {
    let start = Instant::now();
    let bad = trace_integer_paths(graph, point)?;
    let mut cuts = Vec::new();
    match family {
        CutFamily::Ip => {
            cuts.extend(bad.iter().map(|p| {
                Cut::Path(InfeasiblePathCut {
                    arcs: p.arcs.clone(),
                    origin: p.origin,
                    destination: p.destination,
                })
            }));
        }
        CutFamily::Cc => {
            let mut roots: Vec<usize> = bad.iter().map(|p| p.origin).collect();
            roots.dedup();
            for k in roots {
                match separate_connectivity(graph, point, k) {
                    Some(c) => cuts.push(Cut::Connectivity(c)),
                    None => cuts.extend(bad.iter().filter(|p| p.origin == k).map(|p| {
                        Cut::Path(InfeasiblePathCut {
                            arcs: p.arcs.clone(),
                            origin: p.origin,
                            destination: p.destination,
                        })
                    })),
                }
                if mode == AddMode::One && !cuts.is_empty() {
                    break;
                }
            }
        }
    }
    cuts.retain(|c| c.violation(graph, &point.values) > VIOLATION_TOL);
    Ok(SeparationOutcome {
        cuts: select_cuts(cuts, mode),
        mismatched_paths: bad.len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Separation at a fractional point: path search, or a min-cut attempt for
/// every depot.
pub fn separate_fractional(
    graph: &SchedulingGraph,
    point: &CandidatePoint,
    family: CutFamily,
    mode: AddMode,
) -> SeparationOutcome {
    let start = Instant::now();
    let mut cuts: Vec<Cut> = match family {
        CutFamily::Ip => separate_infeasible_paths_fractional(graph, point, FRACTIONAL_THRESHOLD)
            .into_iter()
            .map(Cut::Path)
            .collect(),
        CutFamily::Cc => (0..graph.n_depots())
            .filter_map(|k| separate_connectivity(graph, point, k))
            .map(Cut::Connectivity)
            .collect(),
    };
    cuts.retain(|c| c.violation(graph, &point.values) > VIOLATION_TOL);
    SeparationOutcome {
        cuts: select_cuts(cuts, mode),
        mismatched_paths: 0,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_trip_instance;
    use crate::graph::GraphOptions;

    fn values_for(graph: &SchedulingGraph, chain: &[&[NodeKind]], v: f64) -> Vec<f64> {
        let mut x = vec![0.0; graph.n_arcs()];
        for c in chain {
            for w in c.windows(2) {
                let a = graph
                    .arc_between(graph.node_id(w[0]).unwrap(), graph.node_id(w[1]).unwrap())
                    .unwrap_or_else(|| panic!("missing arc {:?}->{:?}", w[0], w[1]));
                x[a] = v;
            }
        }
        x
    }

    use NodeKind::*;

    fn i2() -> SchedulingGraph {
        SchedulingGraph::build_with(&three_trip_instance(2), GraphOptions { dominance: true, prune: false })
    }

    #[test]
    fn matched_path_traces_clean() {
        let g = i2();
        let x = values_for(&g, &[&[Origin(0), Trip(0), Destination(0)]], 1.0);
        let p = CandidatePoint::new(x);
        assert!(trace_integer_paths(&g, &p).unwrap().is_empty());
        assert_eq!(trace_paths(&g, &p).unwrap().len(), 1);
    }

    #[test]
    fn crossed_pairing_reports_both_paths() {
        let g = i2();
        let x = values_for(
            &g,
            &[
                &[Origin(0), Trip(0), Destination(1)],
                &[Origin(1), Trip(1), Destination(0)],
            ],
            1.0,
        );
        let bad = trace_integer_paths(&g, &CandidatePoint::new(x)).unwrap();
        assert_eq!(bad.len(), 2);
    }

    #[test]
    fn crossing_path_through_partial_charge() {
        let g = i2();
        let part = PartialCharge { from: 0, to: 1, station: 1 };
        // ST2 -> ST3 is not time feasible, so the walk ends after ST2
        assert!(g
            .arc_between(g.node_id(Trip(1)).unwrap(), g.node_id(Trip(2)).unwrap())
            .is_none());
        let x = values_for(&g, &[&[Origin(0), Trip(0), part, Trip(1), Destination(1)]], 1.0);
        let bad = trace_integer_paths(&g, &CandidatePoint::new(x)).unwrap();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].arcs.len(), 4);
    }

    #[test]
    fn broken_flow_is_structural() {
        let g = i2();
        let x = values_for(&g, &[&[Origin(0), Trip(0)]], 1.0);
        assert!(matches!(
            trace_integer_paths(&g, &CandidatePoint::new(x)),
            Err(SeparationError::DeadEnd { .. })
        ));
    }

    #[test]
    fn fractional_violation_threshold() {
        let g = i2();
        assert!(separate_infeasible_paths_fractional(
            &g,
            &CandidatePoint::new(vec![0.0; g.n_arcs()]),
            FRACTIONAL_THRESHOLD
        )
        .is_empty());
        let low = values_for(&g, &[&[Origin(0), Trip(0), Destination(1)]], 0.4);
        assert!(separate_infeasible_paths_fractional(&g, &CandidatePoint::new(low), 1e-5).is_empty());
        let high = values_for(&g, &[&[Origin(0), Trip(0), Destination(1)]], 0.9999);
        let cuts = separate_infeasible_paths_fractional(&g, &CandidatePoint::new(high), 1e-5);
        assert_eq!(cuts.len(), 1);
        assert_eq!((cuts[0].origin, cuts[0].destination), (0, 1));
    }

    #[test]
    fn connectivity_cut_on_crossing() {
        let g = i2();
        let x = values_for(&g, &[&[Origin(0), Trip(0), Destination(1)]], 1.0);
        let p = CandidatePoint::new(x);
        let c = separate_connectivity(&g, &p, 0).expect("violated");
        assert!(in_family(&g, &c));
        assert!((Cut::Connectivity(c).violation(&g, &p.values) - 1.0).abs() < 1e-9);
        let ok = values_for(&g, &[&[Origin(0), Trip(0), Destination(0)]], 1.0);
        assert!(separate_connectivity(&g, &CandidatePoint::new(ok), 0).is_none());
    }

    #[test]
    fn fractional_min_cut_half() {
        let g = i2();
        let mut x = values_for(&g, &[&[Origin(0), Trip(0), Destination(0)]], 0.5);
        let other = values_for(&g, &[&[Origin(0), Trip(1), Destination(1)]], 0.5);
        for (a, b) in x.iter_mut().zip(other) {
            *a += b;
        }
        let p = CandidatePoint::new(x);
        assert!(!p.integral);
        let c = separate_connectivity(&g, &p, 0).expect("min cut 0.5 < outflow 1");
        assert!((Cut::Connectivity(c).violation(&g, &p.values) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn selection_modes() {
        let cut = |k| {
            Cut::Path(InfeasiblePathCut {
                arcs: vec![0],
                origin: k,
                destination: 1 - k,
            })
        };
        assert_eq!(select_cuts(vec![cut(0), cut(1)], AddMode::One).len(), 1);
        assert_eq!(select_cuts(vec![cut(0), cut(1)], AddMode::All).len(), 2);
        assert!(select_cuts(vec![], AddMode::One).is_empty());
        assert!(select_cuts(vec![], AddMode::All).is_empty());
    }

    #[test]
    fn integral_separation_families() {
        let g = i2();
        let x = values_for(
            &g,
            &[
                &[Origin(0), Trip(0), Destination(1)],
                &[Origin(1), Trip(1), Destination(0)],
            ],
            1.0,
        );
        let p = CandidatePoint::new(x);
        let ip = separate_integral(&g, &p, CutFamily::Ip, AddMode::All).unwrap();
        assert_eq!(ip.cuts.len(), 2);
        let cc = separate_integral(&g, &p, CutFamily::Cc, AddMode::All).unwrap();
        assert_eq!(cc.cuts.len(), 2);
        assert!(cc.cuts.iter().all(|c| matches!(c, Cut::Connectivity(_))));
        let one = separate_integral(&g, &p, CutFamily::Cc, AddMode::One).unwrap();
        assert_eq!(one.cuts.len(), 1);
    }
}
