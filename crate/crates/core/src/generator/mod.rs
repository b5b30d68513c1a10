//! Seeded instance generators: the random benchmark family, single-line
//! realistic instances, technology presets, scenarios and instance merging.
//!
//! Randomness comes from ChaCha8 seeded with the instance seed. Each category
//! of draws (counts, locations, trip kinds, times, capacities, ...) reads its
//! own stream (`set_stream(category)`), so adding draws to one category never
//! shifts another.

mod benchmark;
mod realistic;

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{
    ChargingStation, Depot, Instance, InstanceError, InstanceMeta, Point, Technology,
};

pub use benchmark::{benchmark_params, generate_benchmark, BenchmarkSpec};
pub use realistic::{generate_realistic_base, technology_params, Region, REGION_SEED};

/// Deadhead speed of both families: 60 km/h.
pub const SPEED_KM_PER_MIN: f64 = 1.0;

pub const COLD_FACTOR_BEB: f64 = 1.14;
pub const COLD_FACTOR_FCEB: f64 = 1.084 * 1.062;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("invalid generator spec: {0}")]
    Spec(String),
    #[error("scenario {scenario} does not apply to technology {technology}")]
    Scenario { scenario: Scenario, technology: String },
    #[error("cannot combine instances of different technologies ({0} and {1})")]
    MixedTechnology(String, String),
    #[error("cannot combine instances with different vehicle parameters")]
    MixedParams,
    #[error("trip id {0} appears in more than one instance")]
    DuplicateTrip(u32),
    #[error("nothing to combine")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Standard,
    Cold,
    BatteryPreservation,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Standard => "standard",
            Scenario::Cold => "cold",
            Scenario::BatteryPreservation => "battery",
        })
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Scenario::Standard),
            "cold" => Ok(Scenario::Cold),
            "battery" | "battery_preservation" | "batterypreservation" => {
                Ok(Scenario::BatteryPreservation)
            }
            other => Err(format!("unknown scenario `{other}` (expected standard, cold or battery)")),
        }
    }
}

/// Whether `scenario` can be applied to vehicles of `tech`.
pub fn scenario_applies(scenario: Scenario, tech: Technology) -> bool {
    match scenario {
        Scenario::Standard => true,
        Scenario::Cold => tech != Technology::Db,
        Scenario::BatteryPreservation => tech == Technology::Beb,
    }
}

/// Random stream categories.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    Counts = 1,
    Locations = 2,
    Kinds = 3,
    Times = 4,
    Capacities = 5,
    Lines = 6,
    Modifications = 7,
    Region = 8,
}

pub(crate) fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// Uniform integer in the real interval `[lo, hi]`, i.e. in
/// `[ceil(lo), floor(hi)]`. Falls back to `ceil(lo)` when that range is empty.
pub(crate) fn int_in(rng: &mut impl Rng, lo: f64, hi: f64) -> i64 {
    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
    if b < a {
        a
    } else {
        rng.gen_range(a..=b)
    }
}

/// Vehicle limit per depot: uniform integer in
/// `[3 + n/(3|K|), 3 + n/(2|K|)]`.
pub fn depot_capacities(n_trips: usize, n_depots: usize, seed: u64) -> Vec<u32> {
    let mut r = rng(seed, Stream::Capacities);
    let (n, k) = (n_trips as f64, n_depots as f64);
    (0..n_depots)
        .map(|_| int_in(&mut r, 3.0 + n / (3.0 * k), 3.0 + n / (2.0 * k)) as u32)
        .collect()
}

/// `floor(s_max - max_{a,k} p_{a,d_k})`, the return threshold of fuel-cell
/// buses that refuel off-site.
pub fn fceb_return_threshold(instance: &Instance) -> f64 {
    let worst = (0..instance.n_stations())
        .flat_map(|a| {
            (0..instance.n_depots())
                .map(move |k| (Point::Station(a), Point::Destination(k)))
        })
        .map(|(a, d)| instance.energy(a, d))
        .fold(0.0, f64::max);
    (instance.params.s_max - worst).floor()
}

fn set_fceb_threshold(instance: &mut Instance) {
    let t = fceb_return_threshold(instance).max(instance.params.s_min);
    instance.params.s_min_dep = t;
}

/// Transformed copy of `instance` under `scenario`; `p` and `q` follow the
/// new consumption rate.
pub fn apply_scenario(instance: &Instance, scenario: Scenario) -> Result<Instance, GeneratorError> {
    let tech = instance.meta.technology;
    let err = || GeneratorError::Scenario {
        scenario,
        technology: tech.map_or("unspecified".into(), |t| t.to_string()),
    };
    let mut out = instance.clone();
    match (scenario, tech) {
        (Scenario::Standard, _) => {}
        (Scenario::Cold, Some(Technology::Beb)) => {
            out.rescale_consumption(instance.params.consumption_rate * COLD_FACTOR_BEB);
        }
        (Scenario::Cold, Some(Technology::Fceb)) => {
            out.rescale_consumption(instance.params.consumption_rate * COLD_FACTOR_FCEB);
            set_fceb_threshold(&mut out);
        }
        (Scenario::BatteryPreservation, Some(Technology::Beb)) => {
            let original = instance.params.s_max;
            let p = &mut out.params;
            p.s_min = 0.3 * original;
            p.s_max = 0.9 * original;
            p.s_min_dep = p.s_min;
            p.t_max = ((p.s_max - p.s_min) / p.charge_rate).floor();
        }
        _ => return Err(err()),
    }
    out.meta.scenario = scenario.to_string();
    out.validate()?;
    Ok(out)
}

/// Union of several instances of one technology. Depots and stations at the
/// same location id are merged, depot capacities are redrawn for the combined
/// size from `seed`.
pub fn combine_instances(parts: &[Instance], seed: u64) -> Result<Instance, GeneratorError> {
    let first = parts.first().ok_or(GeneratorError::Empty)?;
    let tech = first.meta.technology;
    let name = |t: Option<Technology>| t.map_or("unspecified".into(), |t| t.to_string());
    for p in &parts[1..] {
        if p.meta.technology != tech {
            return Err(GeneratorError::MixedTechnology(name(tech), name(p.meta.technology)));
        }
        let (a, b) = (&p.params, &first.params);
        let same = a.consumption_rate == b.consumption_rate
            && a.s_max == b.s_max
            && a.s_min == b.s_min
            && a.t_min == b.t_min
            && a.t_max == b.t_max
            && a.charge_rate == b.charge_rate;
        if !same {
            return Err(GeneratorError::MixedParams);
        }
    }

    let mut seen = HashSet::new();
    let mut trips = Vec::new();
    let mut depots: Vec<Depot> = Vec::new();
    let mut stations: BTreeMap<String, ChargingStation> = BTreeMap::new();
    for p in parts {
        for t in &p.trips {
            if !seen.insert(t.id) {
                return Err(GeneratorError::DuplicateTrip(t.id));
            }
            trips.push(t.clone());
        }
        for d in &p.depots {
            if !depots.iter().any(|e| e.location.id == d.location.id) {
                depots.push(d.clone());
            }
        }
        for s in &p.stations {
            stations.entry(s.location.id.clone()).or_insert_with(|| s.clone());
        }
    }
    trips.sort_by_key(|t| t.id);
    depots.sort_by(|a, b| a.location.id.cmp(&b.location.id));
    let caps = depot_capacities(trips.len(), depots.len(), seed);
    for (d, b) in depots.iter_mut().zip(caps) {
        d.capacity = b;
    }
    let stations: Vec<ChargingStation> = stations
        .into_values()
        .enumerate()
        .map(|(i, mut s)| {
            s.id = i as u32 + 1;
            s
        })
        .collect();

    let mut meta = InstanceMeta {
        generator: "combined".into(),
        seed: Some(seed),
        scenario: first.meta.scenario.clone(),
        technology: tech,
        ..InstanceMeta::default()
    };
    meta.notes.push("depot capacities regenerated for the combined instance".into());
    let sources: Vec<serde_json::Value> = parts
        .iter()
        .map(|p| serde_json::json!({ "generator": p.meta.generator, "seed": p.meta.seed }))
        .collect();
    meta.extra.insert("sources".into(), serde_json::Value::Array(sources));

    let mut out = Instance::euclidean(
        trips,
        depots,
        stations,
        first.params.clone(),
        first.weights,
        meta,
        SPEED_KM_PER_MIN,
    )?;
    if tech == Some(Technology::Fceb) {
        set_fceb_threshold(&mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn beb(line: u32, seed: u64) -> Instance {
        generate_realistic_base(line, 10, Technology::Beb, seed).unwrap()
    }

    #[test]
    fn cold_and_battery_transforms() {
        let b = beb(0, 1);
        let cold = apply_scenario(&b, Scenario::Cold).unwrap();
        assert!((cold.params.consumption_rate - 1.6644).abs() < 1e-9);
        let ratio = cold.trips[0].energy / b.trips[0].energy;
        assert!((ratio - 1.14).abs() < 1e-9);
        assert!((cold.energy(Point::Origin(0), Point::Trip(0)) - 1.14 * b.energy(Point::Origin(0), Point::Trip(0))).abs() < 1e-9);

        let bp = apply_scenario(&b, Scenario::BatteryPreservation).unwrap();
        assert!((bp.params.s_min - 133.5).abs() < 1e-9);
        assert!((bp.params.s_max - 400.5).abs() < 1e-9);
        assert_eq!(bp.params.t_max, 123.0);

        let f = generate_realistic_base(0, 10, Technology::Fceb, 1).unwrap();
        let fc = apply_scenario(&f, Scenario::Cold).unwrap();
        assert!((fc.params.consumption_rate - 0.08 * 1.084 * 1.062).abs() < 1e-12);
        assert!((fc.params.consumption_rate - 0.09209).abs() < 1e-5);
        assert_eq!(fc.params.s_min_dep, fceb_return_threshold(&fc).max(fc.params.s_min));
    }

    #[test]
    fn scenario_guards() {
        let d = generate_realistic_base(0, 10, Technology::Db, 1).unwrap();
        assert!(matches!(apply_scenario(&d, Scenario::BatteryPreservation), Err(GeneratorError::Scenario { .. })));
        assert!(apply_scenario(&d, Scenario::Cold).is_err());
        let f = generate_realistic_base(0, 10, Technology::Fceb, 1).unwrap();
        assert!(apply_scenario(&f, Scenario::BatteryPreservation).is_err());
        let bench = generate_benchmark(&BenchmarkSpec::new(10, 1, 1, 3)).unwrap();
        assert!(apply_scenario(&bench, Scenario::Cold).is_err());
        assert_eq!(apply_scenario(&bench, Scenario::Standard).unwrap().trips, bench.trips);
    }

    #[test]
    fn combine_rules() {
        let a = beb(0, 1);
        assert!(matches!(combine_instances(&[a.clone(), a.clone()], 0), Err(GeneratorError::DuplicateTrip(_))));
        // lines 0 and 3 share a depot site, lines 0 and 1 do not
        let shared = combine_instances(&[beb(0, 1), beb(3, 2)], 9).unwrap();
        assert_eq!(shared.n_depots(), 1);
        assert_eq!(shared.n_stations(), 1);
        assert_eq!(shared.n_trips(), 20);
        let split = combine_instances(&[beb(0, 1), beb(1, 2)], 9).unwrap();
        assert_eq!(split.n_depots(), 2);
        assert_eq!(split.n_stations(), 2);
        for &b in &split.depots.iter().map(|d| d.capacity).collect::<Vec<_>>() {
            assert!((3 + 20 / 6..=3 + 20 / 4).contains(&(b as usize)));
        }
        let f = generate_realistic_base(1, 10, Technology::Fceb, 1).unwrap();
        assert!(matches!(combine_instances(&[beb(0, 1), f], 0), Err(GeneratorError::MixedTechnology(..))));
        let f0 = generate_realistic_base(0, 10, Technology::Fceb, 1).unwrap();
        let f1 = generate_realistic_base(1, 10, Technology::Fceb, 2).unwrap();
        let ff = combine_instances(&[f0, f1], 3).unwrap();
        assert_eq!(ff.n_stations(), 1);
        assert_eq!(ff.params.s_min_dep, fceb_return_threshold(&ff));
        assert!(combine_instances(&[], 0).is_err());
    }

    #[test]
    fn capacity_interval() {
        for seed in 0..50 {
            for b in depot_capacities(10, 1, seed) {
                assert!((7..=8).contains(&b), "{b}");
            }
            for b in depot_capacities(80, 8, seed) {
                assert!((7..=8).contains(&b), "{b}");
            }
        }
        // empty real interval falls back to its lower end
        let mut r = rng(0, Stream::Counts);
        assert_eq!(int_in(&mut r, 3.2, 3.5), 4);
    }

    proptest! {
        #[test]
        fn int_in_stays_inside(lo in -50.0f64..50.0, w in 1.0f64..30.0, seed in any::<u64>()) {
            let mut r = rng(seed, Stream::Counts);
            let v = int_in(&mut r, lo, lo + w) as f64;
            prop_assert!(v >= lo && v <= lo + w);
        }
    }
}
