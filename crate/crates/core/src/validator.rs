//! Independent feasibility checker for vehicle schedules.
//!
//! Works only from instance data: times, matrices and vehicle parameters. The
//! scheduling graph is never consulted, so a bug in graph construction or in
//! the models shows up here as a violation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Point};
use crate::objective::ObjectiveTriple;
use crate::schedule::{Stop, VehicleSchedule};

/// Slack on all energy comparisons.
pub const SOC_TOL: f64 = 1e-6;
/// Slack on all time comparisons, in minutes.
pub const TIME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    Structure,
    TripUncovered,
    TripDuplicated,
    DepotMismatch,
    DwellBelowMin,
    ChargeExceedsWindow,
    NegativeCharge,
    StartSoc,
    ReturnSocLow,
    SocBelowMin,
    DepotCapacity,
    TimeInfeasible,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::Structure => "STRUCTURE",
            ViolationCode::TripUncovered => "TRIP_UNCOVERED",
            ViolationCode::TripDuplicated => "TRIP_DUPLICATED",
            ViolationCode::DepotMismatch => "DEPOT_MISMATCH",
            ViolationCode::DwellBelowMin => "DWELL_BELOW_MIN",
            ViolationCode::ChargeExceedsWindow => "CHARGE_EXCEEDS_WINDOW",
            ViolationCode::NegativeCharge => "NEGATIVE_CHARGE",
            ViolationCode::StartSoc => "START_SOC",
            ViolationCode::ReturnSocLow => "RETURN_SOC_LOW",
            ViolationCode::SocBelowMin => "SOC_BELOW_MIN",
            ViolationCode::DepotCapacity => "DEPOT_CAPACITY",
            ViolationCode::TimeInfeasible => "TIME_INFEASIBLE",
        }
    }
}

impl std::fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub schedule: Option<usize>,
    pub stop: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub objective: ObjectiveTriple,
    pub pass: bool,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        let mut c: Vec<_> = self.violations.iter().map(|v| v.code).collect();
        c.sort();
        c.dedup();
        c
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("malformed schedule: {0}")]
pub struct StructureError(pub String);

/// A stop resolved to instance indices.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Resolved {
    Origin(usize),
    Trip(usize),
    Charge { station: usize, amount: f64, dwell: f64 },
    Destination(usize),
}

impl Resolved {
    fn point(&self) -> Point {
        match *self {
            Resolved::Origin(k) => Point::Origin(k),
            Resolved::Trip(i) => Point::Trip(i),
            Resolved::Charge { station, .. } => Point::Station(station),
            Resolved::Destination(k) => Point::Destination(k),
        }
    }
}

fn resolve(instance: &Instance, stops: &[Stop]) -> Result<Vec<Resolved>, StructureError> {
    let n_k = instance.n_depots();
    let res: Vec<Resolved> = stops
        .iter()
        .enumerate()
        .map(|(pos, s)| match *s {
            Stop::Origin { depot } if depot < n_k => Ok(Resolved::Origin(depot)),
            Stop::Destination { depot } if depot < n_k => Ok(Resolved::Destination(depot)),
            Stop::Origin { depot } | Stop::Destination { depot } => {
                Err(StructureError(format!("stop {pos}: unknown depot {depot}")))
            }
            Stop::Trip { id } => instance
                .trip_index(id)
                .map(Resolved::Trip)
                .ok_or_else(|| StructureError(format!("stop {pos}: unknown trip {id}"))),
            Stop::Charge {
                station,
                amount,
                dwell,
            } => instance
                .station_index(station)
                .map(|a| Resolved::Charge {
                    station: a,
                    amount,
                    dwell,
                })
                .ok_or_else(|| StructureError(format!("stop {pos}: unknown station {station}"))),
        })
        .collect::<Result<_, _>>()?;

    let last = res.len().saturating_sub(1);
    if res.len() < 3 {
        return Err(StructureError("a schedule needs an origin, a trip and a destination".into()));
    }
    for (pos, r) in res.iter().enumerate() {
        let ok = match r {
            Resolved::Origin(_) => pos == 0,
            Resolved::Destination(_) => pos == last,
            Resolved::Trip(_) => pos != 0 && pos != last,
            Resolved::Charge { .. } => {
                matches!(res[pos - 1], Resolved::Trip(_))
                    && matches!(res[pos + 1], Resolved::Trip(_) | Resolved::Destination(_))
            }
        };
        if !ok {
            return Err(StructureError(format!("stop {pos} is out of place")));
        }
    }
    Ok(res)
}

/// Longest admissible stay at `station` between trip `i` and the next stop
/// (a trip index, or `None` for the depot): `min(slack, t_max)`.
fn charge_window(instance: &Instance, i: usize, station: usize, next: Option<usize>) -> f64 {
    let t_max = instance.params.t_max;
    match next {
        None => t_max,
        Some(j) => {
            let st = Point::Station(station);
            let slack = instance.trips[j].start_time as f64
                - instance.trips[i].end_time as f64
                - instance.travel_time(Point::Trip(i), st)
                - instance.travel_time(st, Point::Trip(j));
            slack.min(t_max)
        }
    }
}

fn next_trip(res: &[Resolved], pos: usize) -> Option<usize> {
    match res[pos + 1] {
        Resolved::Trip(j) => Some(j),
        _ => None,
    }
}

/// Deadhead energy of a resolved sequence.
fn deadhead(instance: &Instance, res: &[Resolved]) -> f64 {
    res.windows(2)
        .map(|w| instance.energy(w[0].point(), w[1].point()))
        .sum()
}

pub fn validate(instance: &Instance, schedules: &[VehicleSchedule]) -> ValidationReport {
    let p = &instance.params;
    let mut out = Vec::new();
    let mut push = |code, schedule: Option<usize>, stop: Option<usize>, detail: String| {
        out.push(Violation {
            code,
            schedule,
            stop,
            detail,
        })
    };
    let mut cover: BTreeMap<u32, usize> = instance.trips.iter().map(|t| (t.id, 0)).collect();
    let mut per_depot = vec![0u32; instance.n_depots()];
    let mut objective = ObjectiveTriple::new(schedules.len() as u32, 0, 0.0);

    for (v, sched) in schedules.iter().enumerate() {
        objective.n_charges += sched.n_charges() as u32;
        for id in sched.trip_ids() {
            if let Some(c) = cover.get_mut(&id) {
                *c += 1;
            }
        }
        if let Some(k) = sched.origin() {
            if k < per_depot.len() {
                per_depot[k] += 1;
            }
        }
        if let (Some(a), Some(b)) = (sched.origin(), sched.destination()) {
            if a != b {
                push(
                    ViolationCode::DepotMismatch,
                    Some(v),
                    None,
                    format!("starts at depot {a}, ends at depot {b}"),
                );
            }
        }
        let res = match resolve(instance, &sched.stops) {
            Ok(r) => r,
            Err(e) => {
                push(ViolationCode::Structure, Some(v), None, e.0);
                continue;
            }
        };
        objective.deadhead_energy += deadhead(instance, &res);

        // time
        let mut ready: Option<f64> = None;
        for pos in 1..res.len() {
            let prev = res[pos - 1].point();
            match res[pos] {
                Resolved::Trip(j) => {
                    let arrive = ready.map(|t| t + instance.travel_time(prev, Point::Trip(j)));
                    if let Some(t) = arrive {
                        let s = instance.trips[j].start_time as f64;
                        if t > s + TIME_TOL {
                            push(
                                ViolationCode::TimeInfeasible,
                                Some(v),
                                Some(pos),
                                format!("reaches trip {} at {t:.2}, it starts at {s}", instance.trips[j].id),
                            );
                        }
                    }
                    ready = Some(instance.trips[j].end_time as f64);
                }
                Resolved::Charge {
                    station,
                    amount,
                    dwell,
                } => {
                    let Resolved::Trip(i) = res[pos - 1] else { unreachable!() };
                    let window = charge_window(instance, i, station, next_trip(&res, pos));
                    if dwell < p.t_min - TIME_TOL {
                        push(
                            ViolationCode::DwellBelowMin,
                            Some(v),
                            Some(pos),
                            format!("dwell {dwell:.2} < t_min {}", p.t_min),
                        );
                    }
                    if window < p.t_min - TIME_TOL {
                        push(
                            ViolationCode::DwellBelowMin,
                            Some(v),
                            Some(pos),
                            format!("only {window:.2} min available, t_min is {}", p.t_min),
                        );
                    }
                    let cap = p.charge_rate * dwell.min(p.t_max).max(0.0);
                    if amount > cap + SOC_TOL {
                        push(
                            ViolationCode::ChargeExceedsWindow,
                            Some(v),
                            Some(pos),
                            format!("charges {amount:.4}, window allows {cap:.4}"),
                        );
                    }
                    if amount < -SOC_TOL {
                        push(
                            ViolationCode::NegativeCharge,
                            Some(v),
                            Some(pos),
                            format!("charge amount {amount}"),
                        );
                    }
                    let st = Point::Station(station);
                    ready = ready.map(|t| t + instance.travel_time(prev, st) + dwell);
                }
                Resolved::Destination(_) | Resolved::Origin(_) => {}
            }
        }

        // energy
        if (sched.start_soc - p.s_max).abs() > SOC_TOL {
            push(
                ViolationCode::StartSoc,
                Some(v),
                Some(0),
                format!("starts with {} instead of {}", sched.start_soc, p.s_max),
            );
        }
        let mut soc = sched.start_soc;
        for pos in 1..res.len() {
            soc -= instance.energy(res[pos - 1].point(), res[pos].point());
            let low = |soc: f64, what: &str| {
                (soc < p.s_min - SOC_TOL).then(|| format!("{what} {soc:.4} < s_min {}", p.s_min))
            };
            match res[pos] {
                Resolved::Trip(i) => {
                    if let Some(d) = low(soc, "arrives with") {
                        push(ViolationCode::SocBelowMin, Some(v), Some(pos), d);
                    }
                    soc -= instance.trips[i].energy;
                    if let Some(d) = low(soc, "finishes trip with") {
                        push(ViolationCode::SocBelowMin, Some(v), Some(pos), d);
                    }
                }
                Resolved::Charge { amount, dwell, .. } => {
                    if let Some(d) = low(soc, "reaches the station with") {
                        push(ViolationCode::SocBelowMin, Some(v), Some(pos), d);
                    }
                    let cap = p.charge_rate * dwell.min(p.t_max).max(0.0);
                    soc = (soc + amount.clamp(0.0, cap)).min(p.s_max);
                }
                Resolved::Destination(_) => {
                    if soc < p.s_min_dep - SOC_TOL {
                        push(
                            ViolationCode::ReturnSocLow,
                            Some(v),
                            Some(pos),
                            format!("returns with {soc:.4} < {}", p.s_min_dep),
                        );
                    }
                }
                Resolved::Origin(_) => {}
            }
        }
    }

    for (id, count) in &cover {
        match count {
            0 => push(ViolationCode::TripUncovered, None, None, format!("trip {id} is not served")),
            1 => {}
            n => push(ViolationCode::TripDuplicated, None, None, format!("trip {id} is served {n} times")),
        }
    }
    for (k, &n) in per_depot.iter().enumerate() {
        let b = instance.depots[k].capacity;
        if n > b {
            push(
                ViolationCode::DepotCapacity,
                None,
                None,
                format!("depot {k} dispatches {n} vehicles, capacity {b}"),
            );
        }
    }
    ValidationReport {
        pass: out.is_empty(),
        violations: out,
        objective,
    }
}

/// Whether some charge amounts make the stop sequence energy-feasible. Charge
/// amounts and dwells in `stops` are ignored; every station is used to the
/// full window, which is never worse since only lower bounds constrain the
/// rest of the route.
pub fn feasible_exists(instance: &Instance, stops: &[Stop]) -> Result<bool, StructureError> {
    let res = resolve(instance, stops)?;
    let p = &instance.params;
    let mut soc = p.s_max;
    let mut ready: Option<f64> = None;
    for pos in 1..res.len() {
        let prev = res[pos - 1].point();
        soc -= instance.energy(prev, res[pos].point());
        match res[pos] {
            Resolved::Trip(j) => {
                let trip = &instance.trips[j];
                if let Some(t) = ready {
                    if t + instance.travel_time(prev, Point::Trip(j)) > trip.start_time as f64 + TIME_TOL {
                        return Ok(false);
                    }
                }
                if soc < p.s_min - SOC_TOL {
                    return Ok(false);
                }
                soc -= trip.energy;
                ready = Some(trip.end_time as f64);
            }
            Resolved::Charge { station, .. } => {
                let Resolved::Trip(i) = res[pos - 1] else { unreachable!() };
                let window = charge_window(instance, i, station, next_trip(&res, pos));
                if window < p.t_min - TIME_TOL || soc < p.s_min - SOC_TOL {
                    return Ok(false);
                }
                soc = (soc + p.charge_rate * window).min(p.s_max);
                ready = ready.map(|t| t + instance.travel_time(prev, Point::Station(station)) + window);
            }
            Resolved::Destination(_) => return Ok(soc >= p.s_min_dep - SOC_TOL),
            Resolved::Origin(_) => {}
        }
        if soc < p.s_min - SOC_TOL {
            return Ok(false);
        }
    }
    Ok(false)
}

/// Deadhead energy of a structurally valid stop sequence.
pub fn sequence_deadhead(instance: &Instance, stops: &[Stop]) -> Result<f64, StructureError> {
    Ok(deadhead(instance, &resolve(instance, stops)?))
}

/// Single-field corruptions used to exercise the validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    DepotSwap,
    TripDrop,
    TripDuplication,
    SocOverdraw,
    DwellBelowMin,
    CapacityBreach,
}

impl Corruption {
    pub const ALL: [Corruption; 6] = [
        Corruption::DepotSwap,
        Corruption::TripDrop,
        Corruption::TripDuplication,
        Corruption::SocOverdraw,
        Corruption::DwellBelowMin,
        Corruption::CapacityBreach,
    ];

    pub fn expected_code(&self) -> ViolationCode {
        match self {
            Corruption::DepotSwap => ViolationCode::DepotMismatch,
            Corruption::TripDrop => ViolationCode::TripUncovered,
            Corruption::TripDuplication => ViolationCode::TripDuplicated,
            Corruption::SocOverdraw => ViolationCode::SocBelowMin,
            Corruption::DwellBelowMin => ViolationCode::DwellBelowMin,
            Corruption::CapacityBreach => ViolationCode::DepotCapacity,
        }
    }

    /// Corrupts `schedules[target % len]`. Returns `None` when the corruption
    /// does not apply (a depot swap needs two depots).
    pub fn apply(
        &self,
        instance: &Instance,
        schedules: &[VehicleSchedule],
        target: usize,
    ) -> Option<Vec<VehicleSchedule>> {
        if schedules.is_empty() {
            return None;
        }
        let mut out = schedules.to_vec();
        let v = target % out.len();
        match self {
            Corruption::DepotSwap => {
                let n_k = instance.n_depots();
                if n_k < 2 {
                    return None;
                }
                let k = out[v].destination()?;
                *out[v].stops.last_mut()? = Stop::Destination { depot: (k + 1) % n_k };
            }
            Corruption::TripDrop => {
                let pos = out[v].stops.iter().position(|s| matches!(s, Stop::Trip { .. }))?;
                out[v].stops.remove(pos);
            }
            Corruption::TripDuplication => {
                let id = out[v].trip_ids().next()?;
                let k = out[v].origin()?;
                out.push(VehicleSchedule {
                    stops: vec![
                        Stop::Origin { depot: k },
                        Stop::Trip { id },
                        Stop::Destination { depot: k },
                    ],
                    start_soc: instance.params.s_max,
                    soc: Vec::new(),
                });
            }
            Corruption::SocOverdraw => {
                // leave the depot nearly empty
                out[v].start_soc = instance.params.s_min;
            }
            Corruption::DwellBelowMin => {
                let t_min = instance.params.t_min;
                let short = t_min / 2.0;
                match out[v].stops.iter().position(|s| matches!(s, Stop::Charge { .. })) {
                    Some(pos) => {
                        if let Stop::Charge { dwell, amount, .. } = &mut out[v].stops[pos] {
                            *dwell = short;
                            *amount = amount.min(instance.params.charge_rate * short);
                        }
                    }
                    None => {
                        let station = instance.stations.first()?.id;
                        let pos = out[v].stops.iter().position(|s| matches!(s, Stop::Trip { .. }))?;
                        out[v].stops.insert(
                            pos + 1,
                            Stop::Charge {
                                station,
                                amount: 0.0,
                                dwell: short,
                            },
                        );
                    }
                }
            }
            Corruption::CapacityBreach => {
                // one vehicle per trip, all from depot 0, padded past b_0
                let b0 = instance.depots[0].capacity as usize;
                let ids: Vec<u32> = out.iter().flat_map(|s| s.trip_ids().collect::<Vec<_>>()).collect();
                let mut fresh: Vec<VehicleSchedule> = ids
                    .iter()
                    .map(|&id| VehicleSchedule {
                        stops: vec![
                            Stop::Origin { depot: 0 },
                            Stop::Trip { id },
                            Stop::Destination { depot: 0 },
                        ],
                        start_soc: instance.params.s_max,
                        soc: Vec::new(),
                    })
                    .collect();
                let mut i = 0;
                while fresh.len() <= b0 {
                    fresh.push(fresh[i % ids.len()].clone());
                    i += 1;
                }
                out = fresh;
            }
        }
        Some(out)
    }
}
