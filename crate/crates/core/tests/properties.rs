//! Invariants checked on randomly generated instances.

use std::collections::BTreeSet;

use mdevsp::backend::{backend_by_name, MilpBackend, SolveParams, SolveStatus};
use mdevsp::formulation::{build_three_index, build_two_index_base};
use mdevsp::generator::{generate_benchmark, BenchmarkSpec};
use mdevsp::graph::{GraphOptions, NodeKind, SchedulingGraph};
use mdevsp::instance::{fleet_lower_bound, Instance, Point};
use mdevsp::objective::ENERGY_REL_TOL;
use mdevsp::oracle::{arc_vector, brute_force_optimum_on, for_each_solution, FeasiblePath};
use mdevsp::separation::{
    in_family, separate_fractional, separate_integral, trace_integer_paths, AddMode, CandidatePoint, Cut,
    CutFamily, VIOLATION_TOL,
};
use mdevsp::solve::{initial_model, solve, solve_on, Formulation, SolveConfig};
use mdevsp::validator::validate;
use proptest::prelude::*;

fn highs() -> Box<dyn MilpBackend> {
    backend_by_name("highs").unwrap()
}

fn bench(n: usize, k: usize, c: usize, seed: u64) -> Instance {
    generate_benchmark(&BenchmarkSpec::new(n, k, c, seed)).unwrap()
}

fn options(dominance: bool, prune: bool) -> GraphOptions {
    GraphOptions { dominance, prune }
}

fn kinds(g: &SchedulingGraph) -> (BTreeSet<NodeKind>, BTreeSet<(NodeKind, NodeKind)>) {
    let nodes = g.nodes().iter().map(|n| n.kind).collect();
    let arcs = g
        .arcs()
        .iter()
        .map(|a| (g.node(a.tail).kind, g.node(a.head).kind))
        .collect();
    (nodes, arcs)
}

fn with_stations(inst: &Instance, m: usize) -> Instance {
    Instance::euclidean(
        inst.trips.clone(),
        inst.depots.clone(),
        inst.stations[..m].to_vec(),
        inst.params.clone(),
        inst.weights,
        inst.meta.clone(),
        1.0,
    )
    .unwrap()
}

/// Every depot-correct solution of a tiny instance as an arc vector, plus
/// one solution with a path rerouted to another depot's destination.
fn solutions_and_crossing(inst: &Instance, g: &SchedulingGraph) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
    let mut all = Vec::new();
    let mut crossing = None;
    for_each_solution(inst, g, 5_000, |paths: &[&FeasiblePath]| {
        all.push(arc_vector(g, paths));
        if crossing.is_none() {
            let p = paths[0];
            let last = *p.arcs.last().unwrap();
            let tail = g.arc(last).tail;
            let other = (p.depot + 1) % inst.n_depots();
            if let Some(a) = g.arc_between(tail, g.destination(other)) {
                let mut x = arc_vector(g, paths);
                x[last] = 0.0;
                x[a] = 1.0;
                crossing = Some(x);
            }
        }
    })
    .unwrap();
    (all, crossing)
}

fn excludes_none(g: &SchedulingGraph, cut: &Cut, solutions: &[Vec<f64>]) -> bool {
    solutions.iter().all(|x| cut.violation(g, x) <= VIOLATION_TOL)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn instances_round_trip_and_keep_energy_proportional(
        n in 1usize..25, k in 1usize..4, c in 0usize..3, seed in any::<u64>()
    ) {
        let inst = bench(n, k, c, seed);
        let (back, _) = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let theta = inst.params.consumption_rate;
        for (p, d) in inst.matrices.p.iter().zip(&inst.matrices.d) {
            prop_assert!(*p >= 0.0 && *d >= 0.0);
            prop_assert!((p - theta * d).abs() <= 1e-9 * p.abs().max(1.0));
        }
    }

    #[test]
    fn fleet_bound_ignores_trip_order(
        n in 1usize..30, seed in any::<u64>(), rot in 0usize..30
    ) {
        let inst = bench(n, 1, 0, seed);
        let lb = fleet_lower_bound(&inst.trips);
        prop_assert!(lb >= 1 && lb <= n);
        let mut trips = inst.trips.clone();
        trips.reverse();
        prop_assert_eq!(fleet_lower_bound(&trips), lb);
        trips.rotate_left(rot % n);
        prop_assert_eq!(fleet_lower_bound(&trips), lb);
    }

    #[test]
    fn graph_structure(
        n in 1usize..20, k in 1usize..4, c in 0usize..4, seed in any::<u64>(),
        dominance in any::<bool>(), prune in any::<bool>()
    ) {
        let inst = bench(n, k, c, seed);
        let g = SchedulingGraph::build_with(&inst, options(dominance, prune));
        prop_assert!(g.topological_order().is_some());
        let p = &inst.params;
        for a in g.arcs() {
            let (t, h) = (g.node(a.tail).kind, g.node(a.head).kind);
            prop_assert!(a.energy >= 0.0);
            prop_assert!(!matches!(t, NodeKind::Destination(_)));
            prop_assert!(!matches!(h, NodeKind::Origin(_)));
            prop_assert!(!(t.is_charging() && h.is_charging()));
            if matches!(t, NodeKind::Origin(_)) {
                prop_assert!(matches!(h, NodeKind::Trip(_)));
            }
            if matches!(h, NodeKind::Destination(_)) {
                prop_assert!(matches!(t, NodeKind::Trip(_) | NodeKind::FullCharge { .. }), "{:?} -> {:?}", t, h);
            }
            if h.is_charging() {
                prop_assert!(matches!(t, NodeKind::Trip(_)));
            }
        }
        for (id, node) in g.nodes().iter().enumerate() {
            match node.kind {
                NodeKind::PartialCharge { from, to, station } => {
                    prop_assert_eq!(g.in_arcs(id).len(), 1);
                    prop_assert_eq!(g.out_arcs(id).len(), 1);
                    let (ti, tj) = (&inst.trips[from], &inst.trips[to]);
                    let s = Point::Station(station);
                    let budget = ti.start_time as f64
                        + ti.duration as f64
                        + inst.travel_time(Point::Trip(from), s)
                        + node.window
                        + inst.travel_time(s, Point::Trip(to));
                    prop_assert!(budget <= tj.start_time as f64 + 1e-9);
                    prop_assert!(node.window >= p.t_min - 1e-9 && node.window < p.t_max);
                    prop_assert!((node.capacity - p.charge_rate * node.window).abs() <= 1e-9 * node.capacity.max(1.0));
                }
                NodeKind::FullCharge { .. } => {
                    prop_assert!((node.window - p.t_max).abs() <= 1e-9);
                    prop_assert!((node.capacity - p.charge_rate * node.window).abs() <= 1e-9 * node.capacity.max(1.0));
                }
                _ => {}
            }
        }
    }

    #[test]
    fn more_stations_never_remove_nodes_or_arcs(
        n in 1usize..15, k in 1usize..3, c in 1usize..4, seed in any::<u64>()
    ) {
        let inst = bench(n, k, c, seed);
        let full = kinds(&SchedulingGraph::build_with(&inst, options(false, true)));
        for m in 0..c {
            let fewer = kinds(&SchedulingGraph::build_with(&with_stations(&inst, m), options(false, true)));
            prop_assert!(fewer.0.is_subset(&full.0));
            prop_assert!(fewer.1.is_subset(&full.1));
        }
        let filtered = kinds(&SchedulingGraph::build_with(&inst, options(true, true)));
        prop_assert!(filtered.0.is_subset(&full.0));
        prop_assert!(filtered.1.is_subset(&full.1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dominance_filter_keeps_the_optimum(
        n in 1usize..6, k in 1usize..3, c in 1usize..4, seed in any::<u64>()
    ) {
        let inst = bench(n, k, c, seed);
        let filtered = SchedulingGraph::build(&inst);
        let unfiltered = SchedulingGraph::build_with(&inst, options(false, true));
        let a = brute_force_optimum_on(&inst, &filtered).unwrap();
        let b = brute_force_optimum_on(&inst, &unfiltered).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!(a.approx_eq(&b, ENERGY_REL_TOL), "{:?} vs {:?}", a, b),
            (a, b) => prop_assert_eq!(a, b),
        }
        let backend = highs();
        let sol = solve_on(&inst, &unfiltered, &SolveConfig::default(), backend.as_ref()).unwrap();
        match (a, sol.objective) {
            (Some(a), Some(s)) => prop_assert!(a.approx_eq(&s, ENERGY_REL_TOL)),
            (None, None) => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
            (a, s) => prop_assert!(false, "oracle {:?}, solver {:?}", a, s),
        }
    }

    #[test]
    fn integral_cuts_are_sound_valid_and_complete(
        n in 2usize..6, c in 0usize..3, seed in any::<u64>(), one in any::<bool>()
    ) {
        let inst = bench(n, 2, c, seed);
        let g = SchedulingGraph::build(&inst);
        let (solutions, crossing) = solutions_and_crossing(&inst, &g);
        prop_assume!(crossing.is_some());
        let x = crossing.unwrap();
        let point = CandidatePoint::new(x.clone());
        prop_assert!(!trace_integer_paths(&g, &point).unwrap().is_empty());
        let mode = if one { AddMode::One } else { AddMode::All };
        for family in [CutFamily::Ip, CutFamily::Cc] {
            let out = separate_integral(&g, &point, family, mode).unwrap();
            prop_assert!(!out.cuts.is_empty(), "{:?} found nothing", family);
            if one {
                prop_assert_eq!(out.cuts.len(), 1);
            }
            for cut in &out.cuts {
                prop_assert!(cut.violation(&g, &x) > VIOLATION_TOL);
                prop_assert!(excludes_none(&g, cut, &solutions), "{:?} excludes a feasible solution", cut);
                if let Cut::Connectivity(cc) = cut {
                    prop_assert!(in_family(&g, cc));
                }
            }
        }
        // depot-correct points yield no cuts
        for s in solutions.iter().take(20) {
            for family in [CutFamily::Ip, CutFamily::Cc] {
                let out = separate_integral(&g, &CandidatePoint::new(s.clone()), family, AddMode::All).unwrap();
                prop_assert!(out.cuts.is_empty());
            }
        }
    }

    #[test]
    fn fractional_cuts_are_sound_and_valid(
        n in 2usize..6, c in 0usize..3, seed in any::<u64>(), pick in any::<prop::sample::Index>(),
        w in 0.05f64..0.95
    ) {
        let inst = bench(n, 2, c, seed);
        let g = SchedulingGraph::build(&inst);
        let (solutions, crossing) = solutions_and_crossing(&inst, &g);
        prop_assume!(crossing.is_some());
        let other = &solutions[pick.index(solutions.len())];
        let x: Vec<f64> = crossing.unwrap().iter().zip(other).map(|(a, b)| w * a + (1.0 - w) * b).collect();
        let point = CandidatePoint::new(x.clone());
        for family in [CutFamily::Ip, CutFamily::Cc] {
            let out = separate_fractional(&g, &point, family, AddMode::All);
            for cut in &out.cuts {
                prop_assert!(cut.violation(&g, &x) > VIOLATION_TOL);
                prop_assert!(excludes_none(&g, cut, &solutions));
                if let Cut::Connectivity(cc) = cut {
                    prop_assert!(in_family(&g, cc));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn three_index_solutions_aggregate_into_the_two_index_model(
        n in 2usize..9, k in 1usize..4, c in 0usize..3, seed in any::<u64>()
    ) {
        let inst = bench(n, k, c, seed);
        let g = SchedulingGraph::build(&inst);
        let backend = highs();
        let three = build_three_index(&g, &inst, false);
        let sol = backend.solve(&three.model, &SolveParams::default()).unwrap();
        prop_assume!(sol.status == SolveStatus::Optimal);
        let values = sol.values.unwrap();
        let x = three.arc_values(&values);
        let eps = three.eps_values(&values);

        let p = &inst.params;
        for (node, e) in g.nodes().iter().zip(&eps) {
            match node.kind {
                NodeKind::Origin(_) => prop_assert!((e - p.s_max).abs() <= 1e-6),
                NodeKind::Destination(_) => prop_assert!(*e >= p.s_min_dep - 1e-6 && *e <= p.s_max + 1e-6),
                _ => prop_assert!(*e >= p.s_min - 1e-6 && *e <= p.s_max + 1e-6),
            }
        }

        let out = separate_integral(&g, &CandidatePoint::new(x.clone()), CutFamily::Ip, AddMode::All).unwrap();
        prop_assert_eq!(out.mismatched_paths, 0);
        let two = build_two_index_base(&g, &inst, false);
        let point = two.point(&x, &eps);
        prop_assert!(two.model.max_violation(&point) <= 1e-6, "{}", two.model.max_violation(&point));
        let (a, b) = (three.model.objective_value(&values), two.model.objective_value(&point));
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn valid_inequalities_tighten_and_never_change_the_optimum(
        n in 2usize..10, k in 1usize..4, c in 1usize..3, seed in any::<u64>()
    ) {
        let inst = bench(n, k, c, seed);
        let g = SchedulingGraph::build(&inst);
        let backend = highs();
        let relax = SolveParams { relax_integrality: true, ..SolveParams::default() };
        for f in [Formulation::ThreeIndex, Formulation::TwoIndexCc] {
            let lp = |vi| {
                let m = initial_model(&inst, &g, &SolveConfig::new(f, vi));
                backend.solve(&m, &relax).unwrap()
            };
            let (off, on) = (lp(false), lp(true));
            if let (Some(a), Some(b)) = (off.objective, on.objective) {
                prop_assert!(b >= a - 1e-6 * a.abs().max(1.0), "{:?}: {} < {}", f, b, a);
            }
            let with = solve_on(&inst, &g, &SolveConfig::new(f, true), backend.as_ref()).unwrap();
            let without = solve_on(&inst, &g, &SolveConfig::new(f, false), backend.as_ref()).unwrap();
            match (with.objective, without.objective) {
                (Some(a), Some(b)) => prop_assert!(a.approx_eq(&b, ENERGY_REL_TOL)),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn solve_is_deterministic_validated_and_monotone(
        n in 2usize..10, k in 1usize..4, c in 0usize..3, seed in any::<u64>(),
        f in prop::sample::select(vec![Formulation::ThreeIndex, Formulation::TwoIndexIp, Formulation::TwoIndexCc])
    ) {
        let inst = bench(n, k, c, seed);
        let backend = highs();
        let cfg = SolveConfig::new(f, true);
        let a = solve(&inst, &cfg, backend.as_ref()).unwrap();
        let b = solve(&inst, &cfg, backend.as_ref()).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.objective, b.objective);
        if a.status == SolveStatus::Optimal {
            let report = validate(&inst, &a.schedules);
            prop_assert!(report.pass, "{:?}", report.codes());
            prop_assert!(report.objective.approx_eq(&a.objective.unwrap(), ENERGY_REL_TOL));
        }
        for w in a.stats.round_objectives.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-6 * w[0].abs().max(1.0), "{:?}", a.stats.round_objectives);
        }
    }
}
