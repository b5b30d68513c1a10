//! Vehicle schedules in instance terms (depot indices, trip and station ids).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Stop {
    Origin { depot: usize },
    Trip { id: u32 },
    /// `dwell` is the scheduled stay at the station in minutes.
    Charge { station: u32, amount: f64, dwell: f64 },
    Destination { depot: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSchedule {
    pub stops: Vec<Stop>,
    pub start_soc: f64,
    /// Departure energy per stop as reported by the solver; informational.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub soc: Vec<f64>,
}

impl VehicleSchedule {
    pub fn origin(&self) -> Option<usize> {
        match self.stops.first() {
            Some(Stop::Origin { depot }) => Some(*depot),
            _ => None,
        }
    }

    pub fn destination(&self) -> Option<usize> {
        match self.stops.last() {
            Some(Stop::Destination { depot }) => Some(*depot),
            _ => None,
        }
    }

    pub fn trip_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.stops.iter().filter_map(|s| match s {
            Stop::Trip { id } => Some(*id),
            _ => None,
        })
    }

    pub fn n_charges(&self) -> usize {
        self.stops
            .iter()
            .filter(|s| matches!(s, Stop::Charge { .. }))
            .count()
    }
}
