//! The lexicographic objective and its weighted scalarization.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeKind, SchedulingGraph};
use crate::instance::{Instance, Weights};

/// Relative tolerance used when comparing deadhead energies.
pub const ENERGY_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveTriple {
    pub n_vehicles: u32,
    pub n_charges: u32,
    pub deadhead_energy: f64,
}

impl ObjectiveTriple {
    pub fn new(n_vehicles: u32, n_charges: u32, deadhead_energy: f64) -> Self {
        ObjectiveTriple {
            n_vehicles,
            n_charges,
            deadhead_energy,
        }
    }

    pub fn scalarize(&self, w: &Weights) -> f64 {
        w.w1 * self.n_vehicles as f64 + w.w2 * self.n_charges as f64 + w.w3 * self.deadhead_energy
    }

    /// Splits a scalar objective back into tiers by integer division.
    /// Only meaningful when [`check_tiers`] reports no bleed.
    pub fn descalarize(value: f64, w: &Weights) -> Self {
        let snap = |x: f64| {
            let r = x.round();
            if (x - r).abs() < 1e-6 { r } else { x.floor() }
        };
        let n_vehicles = snap(value / w.w1).max(0.0);
        let rest = (value - n_vehicles * w.w1).max(0.0);
        let n_charges = snap(rest / w.w2).max(0.0);
        let rest = (rest - n_charges * w.w2).max(0.0);
        ObjectiveTriple::new(n_vehicles as u32, n_charges as u32, rest / w.w3)
    }

    /// Exact on the counts, relative tolerance on the energy.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        self.n_vehicles == other.n_vehicles
            && self.n_charges == other.n_charges
            && energy_eq(self.deadhead_energy, other.deadhead_energy, rel_tol)
    }

    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.n_vehicles
            .cmp(&other.n_vehicles)
            .then(self.n_charges.cmp(&other.n_charges))
            .then(self.deadhead_energy.total_cmp(&other.deadhead_energy))
    }
}

impl fmt::Display for ObjectiveTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} vehicles, {} charges, {:.4} deadhead)",
            self.n_vehicles, self.n_charges, self.deadhead_energy
        )
    }
}

pub fn energy_eq(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0)
}

/// Upper bounds on the lower tiers over all schedules of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TierBounds {
    pub max_charges: u32,
    pub max_deadhead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierCheck {
    pub bounds: TierBounds,
    pub warnings: Vec<String>,
}

impl TierCheck {
    pub fn ok(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Every trip has one successor, so a schedule set charges at most once per
/// trip and pays at most the costliest outgoing move (through a charging node
/// if need be) per trip plus one origin move per vehicle.
pub fn tier_bounds(instance: &Instance, graph: &SchedulingGraph) -> TierBounds {
    let max_out = |node: usize| {
        graph
            .out_arcs(node)
            .iter()
            .map(|&a| graph.arc(a).energy)
            .fold(0.0, f64::max)
    };
    let mut deadhead = 0.0;
    let mut charges = 0u32;
    let mut origin_max: f64 = 0.0;
    for (id, node) in graph.nodes().iter().enumerate() {
        match node.kind {
            NodeKind::Trip(_) => {
                let mut best: f64 = 0.0;
                let mut can_charge = false;
                for &a in graph.out_arcs(id) {
                    let arc = graph.arc(a);
                    let mut e = arc.energy;
                    if graph.node(arc.head).kind.is_charging() {
                        e += max_out(arc.head);
                        can_charge = true;
                    }
                    best = best.max(e);
                }
                deadhead += best;
                charges += can_charge as u32;
            }
            NodeKind::Origin(_) => origin_max = origin_max.max(max_out(id)),
            _ => {}
        }
    }
    deadhead += origin_max * instance.n_trips() as f64;
    TierBounds {
        max_charges: charges,
        max_deadhead: deadhead,
    }
}

/// Warns when the weights cannot keep the tiers apart on this graph.
pub fn check_tiers(instance: &Instance, graph: &SchedulingGraph) -> TierCheck {
    let w = instance.weights;
    let bounds = tier_bounds(instance, graph);
    let mut warnings = Vec::new();
    if w.w3 * bounds.max_deadhead >= w.w2 {
        warnings.push(format!(
            "deadhead energy up to {:.1} may outweigh one charge (w2/w3 = {})",
            bounds.max_deadhead,
            w.w2 / w.w3
        ));
    }
    if w.w2 * bounds.max_charges as f64 + w.w3 * bounds.max_deadhead >= w.w1 {
        warnings.push(format!(
            "{} charges and {:.1} deadhead may outweigh one vehicle (w1 = {})",
            bounds.max_charges, bounds.max_deadhead, w.w1
        ));
    }
    TierCheck { bounds, warnings }
}
