//! MILP formulations over the scheduling graph.
//!
//! The 3-index model carries one arc variable per depot and arc; the 2-index
//! model keeps one variable per arc and relies on cuts (see
//! [`crate::separation`]) to pair origins with destinations. Variables are
//! named `x_k_tail_head`, `x_tail_head` and `eps_node` after the node labels
//! of [`crate::graph::node_label`].
//!
//! Energy-propagation rows are stored as `eps_j - eps_i + (p + q + M)·x <= M`.

use serde::{Deserialize, Serialize};

use crate::backend::{LinearModel, RowId, Sense, VarId};
use crate::graph::{ArcId, NodeId, NodeKind, SchedulingGraph};
use crate::instance::Instance;
use crate::objective::ObjectiveTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulationKind {
    ThreeIndex,
    TwoIndex,
}

#[derive(Debug, Clone)]
pub struct FormulationHandle {
    pub kind: FormulationKind,
    pub model: LinearModel,
    /// `x[k][arc]` for the 3-index model, `x[0][arc]` for the 2-index model.
    pub x: Vec<Vec<VarId>>,
    pub eps: Vec<VarId>,
    pub vi: bool,
    pub big_m: f64,
    pub fleet_lb: Option<usize>,
}

impl FormulationHandle {
    /// Aggregated arc values `Σ_k x^k` from a backend solution vector.
    pub fn arc_values(&self, values: &[f64]) -> Vec<f64> {
        let n_arcs = self.x[0].len();
        (0..n_arcs)
            .map(|a| self.x.iter().map(|xs| values[xs[a].0]).sum())
            .collect()
    }

    /// Per-depot arc values of the 3-index model.
    pub fn commodity_values(&self, values: &[f64], k: usize) -> Vec<f64> {
        self.x[k].iter().map(|v| values[v.0]).collect()
    }

    pub fn eps_values(&self, values: &[f64]) -> Vec<f64> {
        self.eps.iter().map(|v| values[v.0]).collect()
    }

    /// Variable vector realizing aggregated arc values `x` and energies `eps`
    /// in the 2-index model.
    pub fn point(&self, arc_values: &[f64], eps: &[f64]) -> Vec<f64> {
        assert_eq!(self.kind, FormulationKind::TwoIndex);
        let mut v = vec![0.0; self.model.n_vars()];
        for (a, var) in self.x[0].iter().enumerate() {
            v[var.0] = arc_values[a];
        }
        for (n, var) in self.eps.iter().enumerate() {
            v[var.0] = eps[n];
        }
        v
    }

    /// `Σ_{a∈P} x_a <= |P| - 1`.
    pub fn add_path_cut(&mut self, name: &str, arcs: &[ArcId]) -> RowId {
        let xs = &self.x[0];
        self.model.add_row(
            name,
            arcs.iter().map(|&a| (xs[a], 1.0)),
            Sense::Le,
            arcs.len() as f64 - 1.0,
        )
    }

    /// `Σ_{i∈U, j∉U} x_ij >= Σ_j x_{o_k j}`.
    pub fn add_connectivity_cut(
        &mut self,
        name: &str,
        graph: &SchedulingGraph,
        in_set: &[bool],
        k: usize,
    ) -> RowId {
        let xs = &self.x[0];
        let crossing = graph
            .arcs()
            .iter()
            .enumerate()
            .filter(|(_, arc)| in_set[arc.tail] && !in_set[arc.head])
            .map(|(a, _)| (xs[a], 1.0));
        let leaving = graph
            .out_arcs(graph.origin(k))
            .iter()
            .map(|&a| (xs[a], -1.0));
        self.model
            .add_row(name, crossing.chain(leaving).collect::<Vec<_>>(), Sense::Ge, 0.0)
    }
}

/// Objective triple of an integral arc vector.
pub fn triple_of(graph: &SchedulingGraph, arc_values: &[f64]) -> ObjectiveTriple {
    let mut t = ObjectiveTriple::default();
    for (a, arc) in graph.arcs().iter().enumerate() {
        if arc_values[a] < 0.5 {
            continue;
        }
        if matches!(graph.node(arc.tail).kind, NodeKind::Origin(_)) {
            t.n_vehicles += 1;
        }
        if graph.node(arc.head).kind.is_charging() {
            t.n_charges += 1;
        }
        t.deadhead_energy += arc.energy;
    }
    t
}

fn eps_bounds(instance: &Instance, kind: &NodeKind) -> (f64, f64) {
    let p = &instance.params;
    match kind {
        NodeKind::Origin(_) => (p.s_max, p.s_max),
        NodeKind::Destination(_) => (p.s_min_dep, p.s_max),
        _ => (p.s_min, p.s_max),
    }
}

struct Common {
    model: LinearModel,
    eps: Vec<VarId>,
    big_m: f64,
}

fn common(instance: &Instance, graph: &SchedulingGraph, vi: bool) -> Common {
    let mut model = LinearModel::new();
    let eps = graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| {
            let (lb, ub) = eps_bounds(instance, &n.kind);
            model.add_continuous(format!("eps_{}", graph.label(instance, id)), lb, ub)
        })
        .collect();
    let p = &instance.params;
    let big_m = if vi { p.s_max - p.s_min } else { p.s_max };
    Common { model, eps, big_m }
}

fn trip_energy(instance: &Instance, graph: &SchedulingGraph, n: NodeId) -> f64 {
    match graph.node(n).kind {
        NodeKind::Trip(i) => instance.trips[i].energy,
        _ => 0.0,
    }
}

/// Rows shared by both models for one arc-variable family `xs`. `tag` is the
/// depot suffix used in row names (empty for the 2-index model).
#[allow(clippy::too_many_arguments)]
fn energy_rows(
    instance: &Instance,
    graph: &SchedulingGraph,
    model: &mut LinearModel,
    eps: &[VarId],
    xs: &[VarId],
    big_m: f64,
    tag: &str,
    dest_filter: impl Fn(usize) -> bool,
) {
    let label = |n: NodeId| graph.label(instance, n);
    for (a, arc) in graph.arcs().iter().enumerate() {
        let (i, j) = (arc.tail, arc.head);
        let head = graph.node(j);
        let coef = match head.kind {
            NodeKind::Trip(_) => arc.energy + trip_energy(instance, graph, j),
            NodeKind::FullCharge { .. } | NodeKind::PartialCharge { .. } => {
                arc.energy - head.capacity
            }
            NodeKind::Destination(k) if dest_filter(k) => arc.energy,
            _ => continue,
        };
        let family = match head.kind {
            NodeKind::Trip(_) => "trip",
            NodeKind::Destination(_) => "dest",
            _ => "charge",
        };
        model.add_row(
            format!("{family}{tag}_{}_{}", label(i), label(j)),
            [(eps[j], 1.0), (eps[i], -1.0), (xs[a], coef + big_m)],
            Sense::Le,
            big_m,
        );
    }
    // eps_i - Σ_j p_ij x_ij >= s_min for trips
    for (n, node) in graph.nodes().iter().enumerate() {
        if let NodeKind::Trip(_) = node.kind {
            let mut terms = vec![(eps[n], 1.0)];
            terms.extend(
                graph
                    .out_arcs(n)
                    .iter()
                    .map(|&a| (xs[a], -graph.arc(a).energy)),
            );
            model.add_row(
                format!("mindt{tag}_{}", label(n)),
                terms,
                Sense::Ge,
                instance.params.s_min,
            );
        }
    }
}

fn objective_terms(
    graph: &SchedulingGraph,
    instance: &Instance,
    xs: &[VarId],
) -> Vec<(VarId, f64)> {
    let w = instance.weights;
    graph
        .arcs()
        .iter()
        .enumerate()
        .map(|(a, arc)| {
            let mut c = w.w3 * arc.energy;
            if matches!(graph.node(arc.tail).kind, NodeKind::Origin(_)) {
                c += w.w1;
            }
            if graph.node(arc.head).kind.is_charging() {
                c += w.w2;
            }
            (xs[a], c)
        })
        .collect()
}

fn origin_out(graph: &SchedulingGraph, xs: &[VarId], k: usize) -> Vec<(VarId, f64)> {
    graph
        .out_arcs(graph.origin(k))
        .iter()
        .map(|&a| (xs[a], 1.0))
        .collect()
}

fn dest_in(graph: &SchedulingGraph, xs: &[VarId], k: usize) -> Vec<(VarId, f64)> {
    graph
        .in_arcs(graph.destination(k))
        .iter()
        .map(|&a| (xs[a], 1.0))
        .collect()
}

/// Multi-commodity model with one arc-variable family per depot.
pub fn build_three_index(
    graph: &SchedulingGraph,
    instance: &Instance,
    vi: bool,
) -> FormulationHandle {
    let Common {
        mut model,
        eps,
        big_m,
    } = common(instance, graph, vi);
    let n_k = instance.n_depots();
    let label = |n: NodeId| graph.label(instance, n);
    let x: Vec<Vec<VarId>> = (0..n_k)
        .map(|k| {
            graph
                .arcs()
                .iter()
                .map(|arc| {
                    model.add_binary(format!("x_{}_{}_{}", k + 1, label(arc.tail), label(arc.head)))
                })
                .collect()
        })
        .collect();

    let mut obj = Vec::new();
    for xs in &x {
        obj.extend(objective_terms(graph, instance, xs));
    }
    model.set_objective(obj);

    for (n, node) in graph.nodes().iter().enumerate() {
        if let NodeKind::Trip(_) = node.kind {
            let terms: Vec<_> = x
                .iter()
                .flat_map(|xs| graph.in_arcs(n).iter().map(move |&a| (xs[a], 1.0)))
                .collect();
            model.add_row(format!("visit_{}", label(n)), terms, Sense::Eq, 1.0);
        }
    }
    for (k, xs) in x.iter().enumerate() {
        let tag = format!("_{}", k + 1);
        model.add_row(
            format!("buslimit{tag}"),
            origin_out(graph, xs, k),
            Sense::Le,
            instance.depots[k].capacity as f64,
        );
        for (n, node) in graph.nodes().iter().enumerate() {
            if node.kind.is_depot() {
                continue;
            }
            let terms = graph
                .in_arcs(n)
                .iter()
                .map(|&a| (xs[a], 1.0))
                .chain(graph.out_arcs(n).iter().map(|&a| (xs[a], -1.0)));
            model.add_row(format!("flow{tag}_{}", label(n)), terms.collect::<Vec<_>>(), Sense::Eq, 0.0);
        }
        let mut balance = origin_out(graph, xs, k);
        balance.extend(dest_in(graph, xs, k).into_iter().map(|(v, c)| (v, -c)));
        model.add_row(format!("balance{tag}"), balance, Sense::Eq, 0.0);
        if n_k > 1 {
            let others = || (0..n_k).filter(move |&kk| kk != k);
            let lock_out: Vec<_> = others().flat_map(|kk| origin_out(graph, xs, kk)).collect();
            let lock_in: Vec<_> = others().flat_map(|kk| dest_in(graph, xs, kk)).collect();
            model.add_row(format!("lockout{tag}"), lock_out, Sense::Eq, 0.0);
            model.add_row(format!("lockin{tag}"), lock_in, Sense::Eq, 0.0);
        }
        energy_rows(instance, graph, &mut model, &eps, xs, big_m, &tag, |d| d == k);
    }
    let fleet_lb = vi.then(|| instance.fleet_lower_bound());
    if let Some(lb) = fleet_lb {
        let terms: Vec<_> = (0..n_k).flat_map(|k| origin_out(graph, &x[k], k)).collect();
        model.add_row("fleet_lb", terms, Sense::Ge, lb as f64);
    }
    FormulationHandle {
        kind: FormulationKind::ThreeIndex,
        model,
        x,
        eps,
        vi,
        big_m,
        fleet_lb,
    }
}

/// Single-commodity model without the exponential path/connectivity
/// families; those are separated on demand.
pub fn build_two_index_base(
    graph: &SchedulingGraph,
    instance: &Instance,
    vi: bool,
) -> FormulationHandle {
    let Common {
        mut model,
        eps,
        big_m,
    } = common(instance, graph, vi);
    let n_k = instance.n_depots();
    let label = |n: NodeId| graph.label(instance, n);
    let xs: Vec<VarId> = graph
        .arcs()
        .iter()
        .map(|arc| model.add_binary(format!("x_{}_{}", label(arc.tail), label(arc.head))))
        .collect();
    model.set_objective(objective_terms(graph, instance, &xs));

    for (n, node) in graph.nodes().iter().enumerate() {
        if let NodeKind::Trip(_) = node.kind {
            let terms: Vec<_> = graph.in_arcs(n).iter().map(|&a| (xs[a], 1.0)).collect();
            model.add_row(format!("visit_{}", label(n)), terms, Sense::Eq, 1.0);
        }
    }
    for k in 0..n_k {
        model.add_row(
            format!("buslimit_{}", k + 1),
            origin_out(graph, &xs, k),
            Sense::Le,
            instance.depots[k].capacity as f64,
        );
    }
    for (n, node) in graph.nodes().iter().enumerate() {
        if node.kind.is_depot() {
            continue;
        }
        let terms = graph
            .in_arcs(n)
            .iter()
            .map(|&a| (xs[a], 1.0))
            .chain(graph.out_arcs(n).iter().map(|&a| (xs[a], -1.0)));
        model.add_row(format!("flow_{}", label(n)), terms.collect::<Vec<_>>(), Sense::Eq, 0.0);
    }
    for k in 0..n_k {
        let mut balance = origin_out(graph, &xs, k);
        balance.extend(dest_in(graph, &xs, k).into_iter().map(|(v, c)| (v, -c)));
        model.add_row(format!("balance_{}", k + 1), balance, Sense::Eq, 0.0);
    }
    energy_rows(instance, graph, &mut model, &eps, &xs, big_m, "", |_| true);
    let fleet_lb = vi.then(|| instance.fleet_lower_bound());
    if let Some(lb) = fleet_lb {
        let terms: Vec<_> = (0..n_k).flat_map(|k| origin_out(graph, &xs, k)).collect();
        model.add_row("fleet_lb", terms, Sense::Ge, lb as f64);
    }
    FormulationHandle {
        kind: FormulationKind::TwoIndex,
        model,
        x: vec![xs],
        eps,
        vi,
        big_m,
        fleet_lb,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{HighsBackend, MilpBackend, SolveParams, SolveStatus, VarType};
    use crate::fixtures::three_trip_instance;

    fn solve(h: &FormulationHandle) -> (f64, Vec<f64>) {
        let sol = HighsBackend::default()
            .solve(&h.model, &SolveParams::default())
            .unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        (sol.objective.unwrap(), sol.values.unwrap())
    }

    #[test]
    fn variable_counts() {
        let inst = three_trip_instance(2);
        let g = SchedulingGraph::build(&inst);
        let three = build_three_index(&g, &inst, false);
        assert_eq!(three.model.n_binaries(), 2 * g.n_arcs());
        assert_eq!(three.model.n_continuous(), g.n_nodes());
        let two = build_two_index_base(&g, &inst, false);
        assert_eq!(two.model.n_binaries(), g.n_arcs());
        assert_eq!(two.model.n_continuous(), g.n_nodes());
    }

    #[test]
    fn vi_adds_fleet_bound_of_two() {
        let inst = three_trip_instance(2);
        let g = SchedulingGraph::build(&inst);
        for h in [build_three_index(&g, &inst, true), build_two_index_base(&g, &inst, true)] {
            let rows: Vec<_> = h.model.rows_named("fleet_lb").collect();
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].rhs, 2.0);
            assert_eq!(h.big_m, 990.0);
        }
        assert!(build_two_index_base(&g, &inst, false).model.rows_named("fleet_lb").next().is_none());
    }

    #[test]
    fn eps_bounds_follow_depot_roles() {
        let inst = three_trip_instance(2);
        let g = SchedulingGraph::build(&inst);
        let h = build_two_index_base(&g, &inst, false);
        let o = h.model.var(h.eps[g.origin(0)]);
        assert_eq!((o.lb, o.ub), (1000.0, 1000.0));
        let d = h.model.var(h.eps[g.destination(1)]);
        assert_eq!((d.lb, d.ub), (700.0, 1000.0));
        assert!(h.x[0].iter().all(|&v| h.model.var(v).kind == VarType::Binary));
    }

    #[test]
    fn single_depot_models_coincide() {
        let inst = three_trip_instance(1);
        let g = SchedulingGraph::build(&inst);
        for vi in [false, true] {
            let (z3, _) = solve(&build_three_index(&g, &inst, vi));
            let (z2, v2) = solve(&build_two_index_base(&g, &inst, vi));
            assert!((z3 - z2).abs() < 1e-6, "{z3} vs {z2}");
            let h = build_two_index_base(&g, &inst, vi);
            let t = triple_of(&g, &h.arc_values(&v2));
            assert_eq!(t.n_vehicles, 2);
        }
    }

    #[test]
    fn base_optimum_covers_trips_and_conserves_flow() {
        let inst = three_trip_instance(1);
        let g = SchedulingGraph::build(&inst);
        let h = build_two_index_base(&g, &inst, false);
        let (_, v) = solve(&h);
        let x = h.arc_values(&v);
        for (n, node) in g.nodes().iter().enumerate() {
            let inflow: f64 = g.in_arcs(n).iter().map(|&a| x[a]).sum();
            let outflow: f64 = g.out_arcs(n).iter().map(|&a| x[a]).sum();
            if let NodeKind::Trip(_) = node.kind {
                assert!((inflow - 1.0).abs() < 1e-6);
            }
            if !node.kind.is_depot() {
                assert!((inflow - outflow).abs() < 1e-6);
            }
        }
        assert!(h.model.max_violation(&v) < 1e-6);
    }

    #[test]
    fn energy_row_uses_stored_arrangement() {
        let inst = three_trip_instance(1);
        let g = SchedulingGraph::build(&inst);
        let h = build_two_index_base(&g, &inst, false);
        let row = h.model.rows_named("trip_ST1_ST2").next().expect("row exists");
        assert_eq!(row.rhs, 1000.0);
        let arc = g
            .arc_between(g.node_id(NodeKind::Trip(0)).unwrap(), g.node_id(NodeKind::Trip(1)).unwrap())
            .unwrap();
        let coef = row.terms.iter().find(|(v, _)| *v == h.x[0][arc]).unwrap().1;
        let expected = g.arc(arc).energy + inst.trips[1].energy + 1000.0;
        assert!((coef - expected).abs() < 1e-9);
    }
}
