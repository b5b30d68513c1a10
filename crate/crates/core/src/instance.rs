//! Problem data: service trips, depots, charging stations, vehicle parameters
//! and the travel/distance/energy matrices, plus JSON persistence.
//!
//! All matrices are indexed by a canonical ordering of [`Point`]s: service
//! trips (by ascending id), then origin depots, then destination depots, then
//! charging stations (by ascending id). Entry `(i, j)` always refers to the
//! move from the *end* location of `i` to the *start* location of `j`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minutes since midnight.
pub type Minutes = i64;

/// Relative tolerance used when checking `p = θ·d`.
const ENERGY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid instance: `{field}` {reason}")]
    Invalid { field: String, reason: String },
}

impl InstanceError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        InstanceError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// A point in the Euclidean plane, coordinates in kilometers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Location { id: id.into(), x, y }
    }

    pub fn distance_to(&self, other: &Location) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceTrip {
    pub id: u32,
    pub start_loc: Location,
    pub end_loc: Location,
    pub start_time: Minutes,
    pub end_time: Minutes,
    pub duration: Minutes,
    /// Energy consumed while serving the trip.
    pub energy: f64,
}

impl ServiceTrip {
    pub fn new(
        id: u32,
        start_loc: Location,
        end_loc: Location,
        start_time: Minutes,
        end_time: Minutes,
        energy: f64,
    ) -> Self {
        ServiceTrip {
            id,
            start_loc,
            end_loc,
            start_time,
            end_time,
            duration: end_time - start_time,
            energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Depot {
    pub location: Location,
    /// Number of vehicles housed at the depot.
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingStation {
    pub id: u32,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Energy per kilometer.
    pub consumption_rate: f64,
    pub s_max: f64,
    pub s_min: f64,
    /// Floor on the state of charge when returning to the depot.
    pub s_min_dep: f64,
    /// Minimum charging dwell in minutes.
    pub t_min: f64,
    /// Energy recharged per minute.
    pub charge_rate: f64,
    /// Time for a full recharge in minutes.
    pub t_max: f64,
}

impl VehicleParams {
    /// Builds parameters with `t_max = (s_max - s_min) / r`.
    pub fn with_derived_t_max(
        consumption_rate: f64,
        s_max: f64,
        s_min: f64,
        s_min_dep: f64,
        t_min: f64,
        charge_rate: f64,
    ) -> Self {
        VehicleParams {
            consumption_rate,
            s_max,
            s_min,
            s_min_dep,
            t_min,
            charge_rate,
            t_max: (s_max - s_min) / charge_rate,
        }
    }

    pub fn derived_t_max(&self) -> f64 {
        (self.s_max - self.s_min) / self.charge_rate
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let fields = [
            ("params.consumption_rate", self.consumption_rate),
            ("params.s_max", self.s_max),
            ("params.s_min", self.s_min),
            ("params.s_min_dep", self.s_min_dep),
            ("params.t_min", self.t_min),
            ("params.charge_rate", self.charge_rate),
            ("params.t_max", self.t_max),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(InstanceError::invalid(name, "must be finite"));
            }
        }
        if !(0.0 <= self.s_min && self.s_min <= self.s_min_dep && self.s_min_dep <= self.s_max) {
            return Err(InstanceError::invalid(
                "params",
                "requires 0 <= s_min <= s_min_dep <= s_max",
            ));
        }
        if self.consumption_rate <= 0.0 {
            return Err(InstanceError::invalid("params.consumption_rate", "must be > 0"));
        }
        if self.charge_rate <= 0.0 {
            return Err(InstanceError::invalid("params.charge_rate", "must be > 0"));
        }
        if self.t_min < 0.0 || self.t_min > self.t_max {
            return Err(InstanceError::invalid("params.t_min", "requires 0 <= t_min <= t_max"));
        }
        Ok(())
    }
}

/// Scalarization weights of the lexicographic objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            w1: 100_000.0,
            w2: 4_000.0,
            w3: 1.0,
        }
    }
}

/// Square matrices stored row-major in canonical point order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrices {
    pub size: usize,
    /// Travel time in minutes.
    pub t: Vec<f64>,
    /// Distance in kilometers.
    pub d: Vec<f64>,
    /// Deadhead energy.
    pub p: Vec<f64>,
}

impl Matrices {
    pub fn zeros(size: usize) -> Self {
        Matrices {
            size,
            t: vec![0.0; size * size],
            d: vec![0.0; size * size],
            p: vec![0.0; size * size],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.size + j
    }

    /// Sets distance and travel time for a pair and derives the energy entry.
    pub fn set(&mut self, i: usize, j: usize, travel_time: f64, distance: f64, theta: f64) {
        let idx = self.at(i, j);
        self.t[idx] = travel_time;
        self.d[idx] = distance;
        self.p[idx] = theta * distance;
    }

    /// Recomputes the energy matrix for a new consumption rate.
    pub fn rescale_energy(&mut self, theta: f64) {
        for (p, d) in self.p.iter_mut().zip(&self.d) {
            *p = theta * d;
        }
    }
}

/// Technology a generated instance was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Technology {
    /// Diesel bus, no refuelling during the day.
    Db,
    /// Battery-electric bus.
    Beb,
    /// Fuel cell-electric bus.
    Fceb,
}

impl std::fmt::Display for Technology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Technology::Db => "DB",
            Technology::Beb => "BEB",
            Technology::Fceb => "FCEB",
        })
    }
}

impl std::str::FromStr for Technology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DB" => Ok(Technology::Db),
            "BEB" => Ok(Technology::Beb),
            "FCEB" => Ok(Technology::Fceb),
            other => Err(format!("unknown technology `{other}` (expected DB, BEB or FCEB)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub generator: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub scenario: String,
    #[serde(default)]
    pub technology: Option<Technology>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// A location in matrix space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Trip(usize),
    Origin(usize),
    Destination(usize),
    Station(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub trips: Vec<ServiceTrip>,
    pub depots: Vec<Depot>,
    pub stations: Vec<ChargingStation>,
    pub params: VehicleParams,
    pub weights: Weights,
    pub matrices: Matrices,
    pub meta: InstanceMeta,
}

/// What `load_instance` had to fill in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub weights_defaulted: bool,
}

#[derive(Deserialize)]
struct RawInstance {
    trips: Vec<ServiceTrip>,
    depots: Vec<Depot>,
    stations: Vec<ChargingStation>,
    params: VehicleParams,
    #[serde(default)]
    weights: Option<Weights>,
    matrices: Matrices,
    #[serde(default)]
    meta: InstanceMeta,
}

impl Instance {
    /// Assembles and validates an instance with explicit matrices.
    pub fn new(
        trips: Vec<ServiceTrip>,
        depots: Vec<Depot>,
        stations: Vec<ChargingStation>,
        params: VehicleParams,
        weights: Weights,
        matrices: Matrices,
        meta: InstanceMeta,
    ) -> Result<Self, InstanceError> {
        let inst = Instance {
            trips,
            depots,
            stations,
            params,
            weights,
            matrices,
            meta,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Assembles an instance whose matrices are derived from Euclidean
    /// geometry at the given speed (km per minute).
    pub fn euclidean(
        trips: Vec<ServiceTrip>,
        depots: Vec<Depot>,
        stations: Vec<ChargingStation>,
        params: VehicleParams,
        weights: Weights,
        meta: InstanceMeta,
        speed_km_per_min: f64,
    ) -> Result<Self, InstanceError> {
        let endpoints = canonical_endpoints(&trips, &depots, &stations);
        let matrices = derive_matrices(&endpoints, params.consumption_rate, speed_km_per_min)?;
        Instance::new(trips, depots, stations, params, weights, matrices, meta)
    }

    pub fn n_trips(&self) -> usize {
        self.trips.len()
    }

    pub fn n_depots(&self) -> usize {
        self.depots.len()
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    /// Number of points in the canonical ordering.
    pub fn n_points(&self) -> usize {
        self.trips.len() + 2 * self.depots.len() + self.stations.len()
    }

    pub fn index(&self, point: Point) -> usize {
        let n = self.trips.len();
        let k = self.depots.len();
        match point {
            Point::Trip(i) => i,
            Point::Origin(d) => n + d,
            Point::Destination(d) => n + k + d,
            Point::Station(a) => n + 2 * k + a,
        }
    }

    fn pair(&self, from: Point, to: Point) -> usize {
        self.index(from) * self.matrices.size + self.index(to)
    }

    pub fn travel_time(&self, from: Point, to: Point) -> f64 {
        self.matrices.t[self.pair(from, to)]
    }

    pub fn distance(&self, from: Point, to: Point) -> f64 {
        self.matrices.d[self.pair(from, to)]
    }

    pub fn energy(&self, from: Point, to: Point) -> f64 {
        self.matrices.p[self.pair(from, to)]
    }

    /// Position of a trip id in `trips`.
    pub fn trip_index(&self, id: u32) -> Option<usize> {
        self.trips.binary_search_by_key(&id, |t| t.id).ok()
    }

    pub fn station_index(&self, id: u32) -> Option<usize> {
        self.stations.binary_search_by_key(&id, |s| s.id).ok()
    }

    pub fn fleet_lower_bound(&self) -> usize {
        fleet_lower_bound(&self.trips)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.trips.is_empty() {
            return Err(InstanceError::invalid("trips", "must not be empty"));
        }
        if self.depots.is_empty() {
            return Err(InstanceError::invalid("depots", "must not be empty"));
        }
        for (pos, trip) in self.trips.iter().enumerate() {
            let field = |f: &str| format!("trips[{pos}].{f}");
            if pos > 0 && self.trips[pos - 1].id >= trip.id {
                return Err(InstanceError::invalid(
                    field("id"),
                    "trip ids must be unique and strictly ascending",
                ));
            }
            if trip.start_time >= trip.end_time {
                return Err(InstanceError::invalid(field("start_time"), "must be < end_time"));
            }
            if trip.duration != trip.end_time - trip.start_time {
                return Err(InstanceError::invalid(
                    field("duration"),
                    "must equal end_time - start_time",
                ));
            }
            if !(trip.energy.is_finite() && trip.energy >= 0.0) {
                return Err(InstanceError::invalid(field("energy"), "must be finite and >= 0"));
            }
            check_location(&trip.start_loc, &field("start_loc"))?;
            check_location(&trip.end_loc, &field("end_loc"))?;
        }
        for (k, depot) in self.depots.iter().enumerate() {
            if depot.capacity < 1 {
                return Err(InstanceError::invalid(format!("depots[{k}].capacity"), "must be >= 1"));
            }
            check_location(&depot.location, &format!("depots[{k}].location"))?;
        }
        for (a, station) in self.stations.iter().enumerate() {
            if a > 0 && self.stations[a - 1].id >= station.id {
                return Err(InstanceError::invalid(
                    format!("stations[{a}].id"),
                    "station ids must be unique and strictly ascending",
                ));
            }
            check_location(&station.location, &format!("stations[{a}].location"))?;
        }
        self.params.validate()?;
        let w = self.weights;
        if !(w.w1 > w.w2 && w.w2 > w.w3 && w.w3 > 0.0) {
            return Err(InstanceError::invalid("weights", "requires w1 > w2 > w3 > 0"));
        }
        self.validate_matrices()
    }

    fn validate_matrices(&self) -> Result<(), InstanceError> {
        let m = &self.matrices;
        let n = self.n_points();
        if m.size != n {
            return Err(InstanceError::invalid(
                "matrices.size",
                format!("is {} but the instance has {n} points", m.size),
            ));
        }
        for (name, data) in [("t", &m.t), ("d", &m.d), ("p", &m.p)] {
            if data.len() != n * n {
                return Err(InstanceError::invalid(
                    format!("matrices.{name}"),
                    format!("has {} entries, expected {}", data.len(), n * n),
                ));
            }
            if let Some(pos) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(InstanceError::invalid(
                    format!("matrices.{name}[{pos}]"),
                    "must be finite and >= 0",
                ));
            }
        }
        let theta = self.params.consumption_rate;
        for (pos, (p, d)) in m.p.iter().zip(&m.d).enumerate() {
            let expected = theta * d;
            if (p - expected).abs() > ENERGY_REL_TOL * expected.abs().max(1.0) {
                return Err(InstanceError::invalid(
                    format!("matrices.p[{pos}]"),
                    format!("is {p} but consumption_rate * d = {expected}"),
                ));
            }
        }
        Ok(())
    }

    /// Recomputes the energy matrix and trip energies after a change of the
    /// consumption rate (`q` scales with θ).
    pub fn rescale_consumption(&mut self, new_theta: f64) {
        let old = self.params.consumption_rate;
        for trip in &mut self.trips {
            trip.energy *= new_theta / old;
        }
        self.params.consumption_rate = new_theta;
        self.matrices.rescale_energy(new_theta);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }

    pub fn from_json(text: &str) -> Result<(Self, LoadReport), InstanceError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawInstance = serde_path_to_error::deserialize(de).map_err(|e| {
            InstanceError::Parse {
                field: e.path().to_string(),
                message: e.inner().to_string(),
            }
        })?;
        let report = LoadReport {
            weights_defaulted: raw.weights.is_none(),
        };
        if report.weights_defaulted {
            log::warn!("instance has no `weights` block, using defaults (100000, 4000, 1)");
        }
        let inst = Instance::new(
            raw.trips,
            raw.depots,
            raw.stations,
            raw.params,
            raw.weights.unwrap_or_default(),
            raw.matrices,
            raw.meta,
        )?;
        Ok((inst, report))
    }
}

fn check_location(loc: &Location, field: &str) -> Result<(), InstanceError> {
    if loc.x.is_finite() && loc.y.is_finite() {
        Ok(())
    } else {
        Err(InstanceError::invalid(field, "coordinates must be finite"))
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<(Instance, LoadReport), InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Instance::from_json(&text)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance.to_json()).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// (start, end) location of every point in canonical order.
pub fn canonical_endpoints<'a>(
    trips: &'a [ServiceTrip],
    depots: &'a [Depot],
    stations: &'a [ChargingStation],
) -> Vec<(&'a Location, &'a Location)> {
    let mut out = Vec::with_capacity(trips.len() + 2 * depots.len() + stations.len());
    out.extend(trips.iter().map(|t| (&t.start_loc, &t.end_loc)));
    out.extend(depots.iter().map(|d| (&d.location, &d.location)));
    out.extend(depots.iter().map(|d| (&d.location, &d.location)));
    out.extend(stations.iter().map(|s| (&s.location, &s.location)));
    out
}

/// Euclidean distance from the end of `i` to the start of `j`, travel time at
/// constant speed and deadhead energy `θ·d`.
pub fn derive_matrices(
    endpoints: &[(&Location, &Location)],
    theta: f64,
    speed_km_per_min: f64,
) -> Result<Matrices, InstanceError> {
    if !(speed_km_per_min.is_finite() && speed_km_per_min > 0.0) {
        return Err(InstanceError::invalid("speed", "must be finite and > 0"));
    }
    for (pos, (s, e)) in endpoints.iter().enumerate() {
        check_location(s, &format!("endpoints[{pos}].start"))?;
        check_location(e, &format!("endpoints[{pos}].end"))?;
    }
    let n = endpoints.len();
    let mut m = Matrices::zeros(n);
    for (i, (_, end_i)) in endpoints.iter().enumerate() {
        for (j, (start_j, _)) in endpoints.iter().enumerate() {
            let d = end_i.distance_to(start_j);
            m.set(i, j, d / speed_km_per_min, d, theta);
        }
    }
    Ok(m)
}

/// Maximum number of trips running simultaneously, with half-open intervals
/// `[s_i, e_i)`.
pub fn fleet_lower_bound(trips: &[ServiceTrip]) -> usize {
    // (time, delta); ends sort before starts at equal times.
    let mut events: Vec<(Minutes, i32)> = trips
        .iter()
        .flat_map(|t| [(t.start_time, 1), (t.end_time, -1)])
        .collect();
    events.sort_unstable();
    let mut live = 0i32;
    let mut best = 0i32;
    for (_, delta) in events {
        live += delta;
        best = best.max(live);
    }
    best as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trip(id: u32, s: Minutes, e: Minutes) -> ServiceTrip {
        let l = Location::new(format!("l{id}"), 0.0, 0.0);
        ServiceTrip::new(id, l.clone(), l, s, e, 1.0)
    }

    #[test]
    fn coincident_points_have_zero_entries() {
        let a = Location::new("a", 1.5, 2.5);
        let m = derive_matrices(&[(&a, &a), (&a, &a)], 1.3, 1.0).unwrap();
        assert_eq!(m.d, vec![0.0; 4]);
        assert_eq!(m.t, vec![0.0; 4]);
        assert_eq!(m.p, vec![0.0; 4]);
    }

    #[test]
    fn three_four_five_triangle() {
        let a = Location::new("a", 0.0, 0.0);
        let b = Location::new("b", 3.0, 4.0);
        let m = derive_matrices(&[(&a, &a), (&b, &b)], 1.3, 1.0).unwrap();
        assert_eq!(m.d[1], 5.0);
        assert_eq!(m.t[1], 5.0);
        assert!((m.p[1] - 6.5).abs() < 1e-12);
    }

    #[test]
    fn speed_must_be_positive() {
        let a = Location::new("a", 0.0, 0.0);
        assert!(derive_matrices(&[(&a, &a)], 1.0, 0.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(fleet_lower_bound(&[trip(1, 10, 20)]), 1);
        // Trips 2 and 3 of the illustrative timetable overlap on [1025, 1035).
        let table = [trip(1, 795, 840), trip(2, 990, 1035), trip(3, 1025, 1110)];
        assert_eq!(fleet_lower_bound(&table), 2);
        // Touching intervals do not overlap.
        assert_eq!(fleet_lower_bound(&[trip(1, 10, 20), trip(2, 20, 30)]), 1);
        assert_eq!(fleet_lower_bound(&[]), 0);
    }

    #[test]
    fn technology_parses_case_insensitively() {
        assert_eq!("fceb".parse::<Technology>().unwrap(), Technology::Fceb);
        assert!("steam".parse::<Technology>().is_err());
    }
}
