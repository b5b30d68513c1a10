//! Random benchmark family in the style of MDVSP class A instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{depot_capacities, int_in, rng, GeneratorError, Stream, SPEED_KM_PER_MIN};
use crate::instance::{
    ChargingStation, Depot, Instance, InstanceMeta, Location, Minutes, ServiceTrip, VehicleParams,
    Weights,
};

/// Side of the square holding all locations, in km.
pub const SQUARE_KM: f64 = 60.0;
pub const SHORT_TRIP_PROB: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub n_trips: usize,
    pub n_depots: usize,
    pub n_stations: usize,
    pub seed: u64,
}

impl BenchmarkSpec {
    pub fn new(n_trips: usize, n_depots: usize, n_stations: usize, seed: u64) -> Self {
        BenchmarkSpec {
            n_trips,
            n_depots,
            n_stations,
            seed,
        }
    }
}

/// θ = 1.3, s_max = 1000, s_min = 10, r = 50/6, s_min_dep = 0.7·s_max,
/// t_min = s_max/100 and the derived t_max.
pub fn benchmark_params() -> VehicleParams {
    let s_max = 1000.0;
    VehicleParams::with_derived_t_max(1.3, s_max, 10.0, 0.7 * s_max, s_max / 100.0, 50.0 / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TripKind {
    Short,
    Long,
}

pub(crate) fn sample_kind(rng: &mut impl Rng) -> TripKind {
    if rng.gen_bool(SHORT_TRIP_PROB) {
        TripKind::Short
    } else {
        TripKind::Long
    }
}

/// Start of a short trip: [420,480] 15 %, [480,1020] 70 %, [1020,1080] 15 %.
pub(crate) fn sample_short_start(rng: &mut impl Rng) -> Minutes {
    let u: f64 = rng.gen();
    if u < 0.15 {
        rng.gen_range(420..=480)
    } else if u < 0.85 {
        rng.gen_range(480..=1020)
    } else {
        rng.gen_range(1020..=1080)
    }
}

fn point(rng: &mut impl Rng, id: String) -> Location {
    Location::new(id, rng.gen_range(0.0..=SQUARE_KM), rng.gen_range(0.0..=SQUARE_KM))
}

pub fn generate_benchmark(spec: &BenchmarkSpec) -> Result<Instance, GeneratorError> {
    if spec.n_trips == 0 || spec.n_depots == 0 {
        return Err(GeneratorError::Spec("need at least one trip and one depot".into()));
    }
    let n = spec.n_trips as f64;
    let params = benchmark_params();
    let theta = params.consumption_rate;

    let nu = int_in(&mut rng(spec.seed, Stream::Counts), n / 3.0, n / 2.0).max(1) as usize;
    let mut loc_rng = rng(spec.seed, Stream::Locations);
    let relief: Vec<Location> = (0..nu).map(|i| point(&mut loc_rng, format!("relief{}", i + 1))).collect();
    let depot_locs: Vec<Location> = (0..spec.n_depots)
        .map(|k| point(&mut loc_rng, format!("depot{}", k + 1)))
        .collect();
    let stations: Vec<ChargingStation> = (0..spec.n_stations)
        .map(|a| ChargingStation {
            id: a as u32 + 1,
            location: point(&mut loc_rng, format!("station{}", a + 1)),
        })
        .collect();

    let mut kind_rng = rng(spec.seed, Stream::Kinds);
    let mut time_rng = rng(spec.seed, Stream::Times);
    let trips: Vec<ServiceTrip> = (0..spec.n_trips)
        .map(|i| {
            let kind = sample_kind(&mut kind_rng);
            let start = relief[kind_rng.gen_range(0..nu)].clone();
            let end = match kind {
                TripKind::Short => relief[kind_rng.gen_range(0..nu)].clone(),
                TripKind::Long => start.clone(),
            };
            let (s, e) = match kind {
                TripKind::Short => {
                    let d = start.distance_to(&end);
                    let s = sample_short_start(&mut time_rng);
                    let e = int_in(&mut time_rng, s as f64 + d + 5.0, s as f64 + d + 40.0);
                    (s, e)
                }
                TripKind::Long => {
                    let s = time_rng.gen_range(300..=1200);
                    (s, time_rng.gen_range(s + 180..=s + 300))
                }
            };
            ServiceTrip::new(i as u32 + 1, start, end, s, e, theta * (e - s) as f64)
        })
        .collect();

    let depots = depot_locs
        .into_iter()
        .zip(depot_capacities(spec.n_trips, spec.n_depots, spec.seed))
        .map(|(location, capacity)| Depot { location, capacity })
        .collect();
    let mut meta = InstanceMeta {
        generator: "benchmark".into(),
        seed: Some(spec.seed),
        scenario: "standard".into(),
        ..InstanceMeta::default()
    };
    meta.extra.insert("relief_locations".into(), nu.into());
    Ok(Instance::euclidean(
        trips,
        depots,
        stations,
        params,
        Weights::default(),
        meta,
        SPEED_KM_PER_MIN,
    )?)
}
