//! Acyclic scheduling graph with embedded time feasibility and charging
//! windows.
//!
//! Construction follows five steps: depot/trip arcs, arcs between
//! time-compatible trips, one full-charge node per trip and station, charging
//! between compatible trips (through the full-charge node when a complete
//! recharge fits, through a dedicated partial-charge node otherwise) and
//! full-charge arcs back to every destination depot. Stations that are
//! dominated on both legs of a move are skipped.
//!
//! Node ids are assigned after construction by sorting on [`NodeKind`], so a
//! graph does not depend on iteration order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Point, ServiceTrip};

pub type NodeId = usize;
pub type ArcId = usize;

/// Slack on time comparisons in minutes; travel times may be fractional.
pub const TIME_TOL: f64 = 1e-9;

/// Structural identity of a node. Indices are positions in the instance's
/// `trips`, `depots` and `stations` vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Trip(usize),
    Origin(usize),
    Destination(usize),
    FullCharge { trip: usize, station: usize },
    PartialCharge { from: usize, to: usize, station: usize },
}

impl NodeKind {
    /// The matrix point a vehicle occupies at this node.
    pub fn point(&self) -> Point {
        match *self {
            NodeKind::Trip(i) => Point::Trip(i),
            NodeKind::Origin(k) => Point::Origin(k),
            NodeKind::Destination(k) => Point::Destination(k),
            NodeKind::FullCharge { station, .. } | NodeKind::PartialCharge { station, .. } => {
                Point::Station(station)
            }
        }
    }

    pub fn is_charging(&self) -> bool {
        matches!(self, NodeKind::FullCharge { .. } | NodeKind::PartialCharge { .. })
    }

    pub fn is_depot(&self) -> bool {
        matches!(self, NodeKind::Origin(_) | NodeKind::Destination(_))
    }

    pub fn station(&self) -> Option<usize> {
        match *self {
            NodeKind::FullCharge { station, .. } | NodeKind::PartialCharge { station, .. } => {
                Some(station)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Available charging time `t_c` (zero for non-charging nodes).
    pub window: f64,
    /// Maximum rechargeable energy `h_c = r·t_c`.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    /// Deadhead energy of the move.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    /// Skip dominated charging stations.
    pub dominance: bool,
    /// Drop full-charge nodes that end up without successors.
    pub prune: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            dominance: true,
            prune: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchedulingGraph {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    lookup: HashMap<NodeKind, NodeId>,
    arc_lookup: HashMap<(NodeId, NodeId), ArcId>,
    feasible_pairs: Vec<(usize, usize)>,
    n_depots: usize,
}

/// `s_i + u_i + t_ij <= s_j`.
pub fn time_feasible(i: &ServiceTrip, j: &ServiceTrip, travel_time: f64) -> bool {
    (i.start_time + i.duration) as f64 + travel_time <= j.start_time as f64 + TIME_TOL
}

/// Whether station `a_prime` is strictly closer than `a` on both the leg
/// from `from` and the leg to `to`.
pub fn dominates(instance: &Instance, a_prime: usize, a: usize, from: Point, to: Point) -> bool {
    let (sp, s) = (Point::Station(a_prime), Point::Station(a));
    instance.distance(from, sp) < instance.distance(from, s)
        && instance.distance(sp, to) < instance.distance(s, to)
}

/// Stations not dominated by any other station for the move `from → to`.
pub fn reasonable_stations(instance: &Instance, from: Point, to: Point, dominance: bool) -> Vec<usize> {
    let n = instance.n_stations();
    (0..n)
        .filter(|&a| !dominance || !(0..n).any(|b| b != a && dominates(instance, b, a, from, to)))
        .collect()
}

/// Maximum charging time and energy at station `a` between trips `i` and `j`.
/// A non-positive time means no charging is possible.
pub fn partial_charge_window(instance: &Instance, i: usize, j: usize, a: usize) -> (f64, f64) {
    let (ti, tj) = (&instance.trips[i], &instance.trips[j]);
    let st = Point::Station(a);
    let slack = tj.start_time as f64
        - ((ti.start_time + ti.duration) as f64
            + instance.travel_time(Point::Trip(i), st)
            + instance.travel_time(st, Point::Trip(j)));
    let window = slack.min(instance.params.t_max);
    (window, instance.params.charge_rate * window)
}

struct Builder {
    nodes: BTreeMap<NodeKind, Node>,
    arcs: BTreeMap<(NodeKind, NodeKind), f64>,
}

impl Builder {
    fn node(&mut self, kind: NodeKind, window: f64, capacity: f64) {
        self.nodes.entry(kind).or_insert(Node {
            kind,
            window,
            capacity,
        });
    }

    fn arc(&mut self, tail: NodeKind, head: NodeKind, energy: f64) {
        debug_assert!(self.nodes.contains_key(&tail) && self.nodes.contains_key(&head));
        self.arcs.insert((tail, head), energy);
    }
}

impl SchedulingGraph {
    pub fn build(instance: &Instance) -> Self {
        Self::build_with(instance, GraphOptions::default())
    }

    pub fn build_with(instance: &Instance, options: GraphOptions) -> Self {
        let n = instance.n_trips();
        let n_depots = instance.n_depots();
        let n_stations = instance.n_stations();
        let params = &instance.params;
        let mut b = Builder {
            nodes: BTreeMap::new(),
            arcs: BTreeMap::new(),
        };
        for i in 0..n {
            b.node(NodeKind::Trip(i), 0.0, 0.0);
        }
        for k in 0..n_depots {
            b.node(NodeKind::Origin(k), 0.0, 0.0);
            b.node(NodeKind::Destination(k), 0.0, 0.0);
        }

        // 1. depot <-> trip
        for k in 0..n_depots {
            for i in 0..n {
                let (o, d, t) = (Point::Origin(k), Point::Destination(k), Point::Trip(i));
                b.arc(NodeKind::Origin(k), NodeKind::Trip(i), instance.energy(o, t));
                b.arc(NodeKind::Trip(i), NodeKind::Destination(k), instance.energy(t, d));
            }
        }

        // 2. time-feasible trip pairs
        let mut feasible_pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let tij = instance.travel_time(Point::Trip(i), Point::Trip(j));
                if time_feasible(&instance.trips[i], &instance.trips[j], tij) {
                    feasible_pairs.push((i, j));
                    b.arc(
                        NodeKind::Trip(i),
                        NodeKind::Trip(j),
                        instance.energy(Point::Trip(i), Point::Trip(j)),
                    );
                }
            }
        }

        // 3. full-charge node after every trip at every station
        let full_capacity = params.charge_rate * params.t_max;
        for i in 0..n {
            for a in 0..n_stations {
                let c = NodeKind::FullCharge { trip: i, station: a };
                b.node(c, params.t_max, full_capacity);
                b.arc(
                    NodeKind::Trip(i),
                    c,
                    instance.energy(Point::Trip(i), Point::Station(a)),
                );
            }
        }

        // 4. charging between compatible trips
        for &(i, j) in &feasible_pairs {
            let (ti, tj) = (Point::Trip(i), Point::Trip(j));
            for a in reasonable_stations(instance, ti, tj, options.dominance) {
                let sa = Point::Station(a);
                let (window, capacity) = partial_charge_window(instance, i, j, a);
                let (p_in, p_out) = (instance.energy(ti, sa), instance.energy(sa, tj));
                if p_in + p_out >= capacity {
                    continue;
                }
                if (window - params.t_max).abs() <= TIME_TOL {
                    b.arc(NodeKind::FullCharge { trip: i, station: a }, NodeKind::Trip(j), p_out);
                } else if window < params.t_max && window >= params.t_min - TIME_TOL {
                    let c = NodeKind::PartialCharge {
                        from: i,
                        to: j,
                        station: a,
                    };
                    b.node(c, window, capacity);
                    b.arc(NodeKind::Trip(i), c, p_in);
                    b.arc(c, NodeKind::Trip(j), p_out);
                }
            }
        }

        // 5. full charge before returning to a depot
        for i in 0..n {
            for k in 0..n_depots {
                let dk = Point::Destination(k);
                for a in reasonable_stations(instance, Point::Trip(i), dk, options.dominance) {
                    b.arc(
                        NodeKind::FullCharge { trip: i, station: a },
                        NodeKind::Destination(k),
                        instance.energy(Point::Station(a), dk),
                    );
                }
            }
        }

        if options.prune {
            let dead: Vec<NodeKind> = b
                .nodes
                .keys()
                .filter(|kind| matches!(kind, NodeKind::FullCharge { .. }))
                .filter(|&&kind| !b.arcs.keys().any(|&(tail, _)| tail == kind))
                .copied()
                .collect();
            for kind in dead {
                b.nodes.remove(&kind);
                b.arcs.retain(|&(tail, head), _| tail != kind && head != kind);
            }
        }

        Self::assemble(b, feasible_pairs, n_depots)
    }

    fn assemble(b: Builder, feasible_pairs: Vec<(usize, usize)>, n_depots: usize) -> Self {
        let nodes: Vec<Node> = b.nodes.into_values().collect();
        let lookup: HashMap<NodeKind, NodeId> =
            nodes.iter().enumerate().map(|(id, n)| (n.kind, id)).collect();
        let mut arcs: Vec<Arc> = b
            .arcs
            .into_iter()
            .map(|((tail, head), energy)| Arc {
                tail: lookup[&tail],
                head: lookup[&head],
                energy,
            })
            .collect();
        arcs.sort_by_key(|a| (a.tail, a.head));
        let mut out_arcs = vec![Vec::new(); nodes.len()];
        let mut in_arcs = vec![Vec::new(); nodes.len()];
        let mut arc_lookup = HashMap::with_capacity(arcs.len());
        for (id, arc) in arcs.iter().enumerate() {
            out_arcs[arc.tail].push(id);
            in_arcs[arc.head].push(id);
            arc_lookup.insert((arc.tail, arc.head), id);
        }
        SchedulingGraph {
            nodes,
            arcs,
            out_arcs,
            in_arcs,
            lookup,
            arc_lookup,
            feasible_pairs,
            n_depots,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn n_depots(&self) -> usize {
        self.n_depots
    }

    pub fn node_id(&self, kind: NodeKind) -> Option<NodeId> {
        self.lookup.get(&kind).copied()
    }

    pub fn origin(&self, k: usize) -> NodeId {
        self.lookup[&NodeKind::Origin(k)]
    }

    pub fn destination(&self, k: usize) -> NodeId {
        self.lookup[&NodeKind::Destination(k)]
    }

    pub fn arc_between(&self, tail: NodeId, head: NodeId) -> Option<ArcId> {
        self.arc_lookup.get(&(tail, head)).copied()
    }

    /// Outgoing arcs, `A^+`.
    pub fn out_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.out_arcs[node]
    }

    /// Incoming arcs, `A^-`.
    pub fn in_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.in_arcs[node]
    }

    /// Time-compatible trip pairs `F`.
    pub fn feasible_pairs(&self) -> &[(usize, usize)] {
        &self.feasible_pairs
    }

    pub fn charging_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&id| self.nodes[id].kind.is_charging())
    }

    pub fn count_kind(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: Vec<usize> = self.in_arcs.iter().map(Vec::len).collect();
        let mut stack: Vec<NodeId> = (0..self.nodes.len()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(v) = stack.pop() {
            order.push(v);
            for &a in &self.out_arcs[v] {
                let h = self.arcs[a].head;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    stack.push(h);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Identifier-safe label, e.g. `ST3`, `o0`, `cfull_3_1`, `cpart_1_2_2`
    /// (trip and station ids, depot indices).
    pub fn label(&self, instance: &Instance, node: NodeId) -> String {
        node_label(instance, &self.nodes[node].kind)
    }

    /// Plain-text export: one `node` line per node, one `arc` line per arc.
    pub fn to_edge_list(&self, instance: &Instance) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# nodes {} arcs {}", self.n_nodes(), self.n_arcs());
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "node {} window={} capacity={}",
                self.label(instance, id),
                node.window,
                node.capacity
            );
        }
        for arc in &self.arcs {
            let _ = writeln!(
                out,
                "arc {} {} p={}",
                self.label(instance, arc.tail),
                self.label(instance, arc.head),
                arc.energy
            );
        }
        out
    }

    pub fn to_dot(&self, instance: &Instance) -> String {
        let mut out = String::from("digraph scheduling {\n  rankdir=LR;\n");
        for (id, node) in self.nodes.iter().enumerate() {
            let shape = match node.kind {
                NodeKind::Trip(_) => "box",
                NodeKind::Origin(_) | NodeKind::Destination(_) => "doublecircle",
                _ => "ellipse",
            };
            let _ = writeln!(out, "  {} [shape={shape}];", self.label(instance, id));
        }
        for arc in &self.arcs {
            let style = if self.nodes[arc.tail].kind.is_charging()
                || self.nodes[arc.head].kind.is_charging()
            {
                ", style=dashed"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{:.2}\"{style}];",
                self.label(instance, arc.tail),
                self.label(instance, arc.head),
                arc.energy
            );
        }
        out.push_str("}\n");
        out
    }
}

pub fn node_label(instance: &Instance, kind: &NodeKind) -> String {
    let trip = |i: usize| instance.trips[i].id;
    let station = |a: usize| instance.stations[a].id;
    match *kind {
        NodeKind::Trip(i) => format!("ST{}", trip(i)),
        NodeKind::Origin(k) => format!("o{k}"),
        NodeKind::Destination(k) => format!("d{k}"),
        NodeKind::FullCharge { trip: i, station: a } => format!("cfull_{}_{}", trip(i), station(a)),
        NodeKind::PartialCharge { from, to, station: a } => {
            format!("cpart_{}_{}_{}", trip(from), trip(to), station(a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_trip_instance;

    #[test]
    fn time_feasibility_examples() {
        let inst = three_trip_instance(1);
        let t = |i, j| inst.travel_time(Point::Trip(i), Point::Trip(j));
        // ST2 -> ST3: 990 + 45 + 5 > 1025
        assert!(!time_feasible(&inst.trips[1], &inst.trips[2], t(1, 2)));
        // ST1 -> ST2: 795 + 45 + 28 <= 990
        assert!(time_feasible(&inst.trips[0], &inst.trips[1], t(0, 1)));
        assert!(!time_feasible(&inst.trips[0], &inst.trips[0], 0.0));
    }

    #[test]
    fn dominance_examples() {
        let inst = three_trip_instance(1);
        // a2 (19, 15) dominates a1 (28, 50) between ST1 and ST2.
        assert!(dominates(&inst, 1, 0, Point::Trip(0), Point::Trip(1)));
        assert!(!dominates(&inst, 0, 1, Point::Trip(0), Point::Trip(1)));
        // Between ST3 and d1 neither dominates.
        assert!(!dominates(&inst, 0, 1, Point::Trip(2), Point::Destination(0)));
        assert!(!dominates(&inst, 1, 0, Point::Trip(2), Point::Destination(0)));
        // A station never dominates itself.
        assert!(!dominates(&inst, 1, 1, Point::Trip(0), Point::Trip(1)));
    }

    #[test]
    fn partial_windows() {
        let inst = three_trip_instance(1);
        assert_eq!(partial_charge_window(&inst, 0, 1, 0).0, 72.0);
        assert_eq!(partial_charge_window(&inst, 0, 1, 1).0, 116.0);
        assert_eq!(partial_charge_window(&inst, 0, 2, 1).0, 120.0);
        let (t, h) = partial_charge_window(&inst, 0, 1, 1);
        assert_eq!(h, inst.params.charge_rate * t);
    }

    #[test]
    fn three_trip_structure() {
        let inst = three_trip_instance(1);
        let g = SchedulingGraph::build_with(
            &inst,
            GraphOptions {
                dominance: true,
                prune: false,
            },
        );
        assert_eq!(g.n_nodes(), 12);
        assert_eq!(g.n_arcs(), 23);
        assert!(g.topological_order().is_some());
    }

    #[test]
    fn no_stations_means_no_charging_nodes() {
        let mut inst = three_trip_instance(1);
        inst = crate::fixtures::without_stations(&inst);
        let g = SchedulingGraph::build(&inst);
        assert_eq!(g.charging_nodes().count(), 0);
        // 3 + 3 depot arcs, 2 trip arcs
        assert_eq!(g.n_arcs(), 8);
    }
}
