//! Single-line instances with forward/backward trip pairs and the
//! technology presets.
//!
//! All lines live in one region: three depot sites and one off-site hydrogen
//! station drawn once from [`REGION_SEED`]. Line `l` is housed at depot site
//! `l % 3`, so lines whose indices agree modulo three share a depot.

use std::f64::consts::TAU;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{
    depot_capacities, int_in, rng, set_fceb_threshold, GeneratorError, Stream, SPEED_KM_PER_MIN,
};
use crate::instance::{
    ChargingStation, Depot, Instance, InstanceMeta, Location, Minutes, ServiceTrip, Technology,
    VehicleParams, Weights,
};

pub const SQUARE_KM: f64 = 50.0;
pub const REGION_SEED: u64 = 0x5EED_2024;
pub const N_DEPOT_SITES: usize = 3;
const CANDIDATES: usize = 200;
const MIN_LINE_KM: f64 = 15.0;
/// Idle time between a forward trip and its backward trip.
const TURNAROUND: Minutes = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub depot_sites: Vec<Location>,
    pub hydrogen_station: Location,
}

impl Region {
    pub fn from_seed(seed: u64) -> Self {
        let mut r = rng(seed, Stream::Region);
        let depot_sites = (0..N_DEPOT_SITES)
            .map(|j| point(&mut r, format!("depot-site{}", j + 1)))
            .collect();
        Region {
            depot_sites,
            hydrogen_station: point(&mut r, "hydrogen-station".into()),
        }
    }
}

fn point(rng: &mut impl Rng, id: String) -> Location {
    Location::new(id, rng.gen_range(0.0..=SQUARE_KM), rng.gen_range(0.0..=SQUARE_KM))
}

/// Standard-setting vehicle parameters of a technology. For FCEB the return
/// threshold depends on the station layout and is set after the matrices
/// exist; here it holds `s_min`.
pub fn technology_params(tech: Technology) -> VehicleParams {
    match tech {
        Technology::Beb => {
            let (s_max, r) = (445.0, 130.0 / 60.0);
            let s_min = 0.2 * s_max;
            VehicleParams {
                consumption_rate: 1.46,
                s_max,
                s_min,
                s_min_dep: s_min,
                t_min: 15.0,
                charge_rate: r,
                t_max: ((s_max - s_min) / r).floor(),
            }
        }
        Technology::Fceb => {
            let s_max = 37.0;
            VehicleParams {
                consumption_rate: 0.08,
                s_max,
                s_min: 0.2 * s_max,
                s_min_dep: 0.2 * s_max,
                t_min: 12.0,
                charge_rate: s_max / 12.0,
                t_max: 12.0,
            }
        }
        Technology::Db => VehicleParams {
            consumption_rate: 0.47,
            s_max: 350.0,
            s_min: 0.0,
            s_min_dep: 0.0,
            t_min: 0.0,
            charge_rate: 1.0,
            t_max: 350.0,
        },
    }
}

/// Forward start: [420,480] and [1020,1080] with 15 % each, otherwise uniform
/// over [300,420] ∪ [480,1020] ∪ [1080,1410].
pub(crate) fn sample_forward_start(rng: &mut impl Rng) -> Minutes {
    let u: f64 = rng.gen();
    if u < 0.15 {
        rng.gen_range(420..=480)
    } else if u < 0.30 {
        rng.gen_range(1020..=1080)
    } else {
        // 121 + 541 + 331 integers
        let k = rng.gen_range(0..993);
        match k {
            0..=120 => 300 + k,
            121..=661 => 480 + (k - 121),
            _ => 1080 + (k - 662),
        }
    }
}

/// Line length: Normal(15, 15) redrawn until at least 15 km.
pub(crate) fn sample_line_length(rng: &mut impl Rng) -> f64 {
    let normal = Normal::new(15.0, 15.0).expect("valid normal");
    loop {
        let d = normal.sample(rng);
        if d >= MIN_LINE_KM {
            return d;
        }
    }
}

fn within(rng: &mut impl Rng, center: &Location, radius: f64, id: String) -> Location {
    let r = radius * rng.gen::<f64>().sqrt();
    let phi = rng.gen_range(0.0..TAU);
    Location::new(
        id,
        (center.x + r * phi.cos()).clamp(0.0, SQUARE_KM),
        (center.y + r * phi.sin()).clamp(0.0, SQUARE_KM),
    )
}

/// One bus line with `n_trips` trips (forward/backward pairs), housed at
/// depot site `line % 3`.
pub fn generate_realistic_base(
    line: u32,
    n_trips: usize,
    tech: Technology,
    seed: u64,
) -> Result<Instance, GeneratorError> {
    if n_trips == 0 {
        return Err(GeneratorError::Spec("need at least one trip".into()));
    }
    if n_trips >= 1000 {
        return Err(GeneratorError::Spec("at most 999 trips per line".into()));
    }
    let region = Region::from_seed(REGION_SEED);
    let params = technology_params(tech);
    let theta = params.consumption_rate;
    let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(line);

    let mut lr = rng(s, Stream::Lines);
    let start = point(&mut lr, format!("line{line}-a"));
    let target = sample_line_length(&mut lr);
    let end = (0..CANDIDATES)
        .map(|_| point(&mut lr, format!("line{line}-b")))
        .min_by(|a, b| {
            let da = (a.distance_to(&start) - target).abs();
            let db = (b.distance_to(&start) - target).abs();
            da.total_cmp(&db)
        })
        .expect("candidates");
    let d = start.distance_to(&end);
    let coef = lr.gen_range(1.7..=3.0);

    let n = n_trips as f64;
    let mut mr = rng(s, Stream::Modifications);
    let n_mod = int_in(&mut mr, 0.03 * n, 0.17 * n).clamp(0, n_trips as i64) as usize;
    let mut modified = vec![false; n_trips];
    for i in sample(&mut mr, n_trips, n_mod).iter() {
        modified[i] = true;
    }

    let mut tr = rng(s, Stream::Times);
    let mut trips = Vec::with_capacity(n_trips);
    let mut prev_end: Minutes = 0;
    for (idx, &is_modified) in modified.iter().enumerate() {
        let forward = idx % 2 == 0;
        let (mut a, mut b) = if forward {
            (start.clone(), end.clone())
        } else {
            (end.clone(), start.clone())
        };
        if is_modified {
            // 0: start, 1: end, 2: both
            let which = mr.gen_range(0..3);
            if which != 1 {
                a = within(&mut mr, &a, d / 2.0, format!("line{line}-t{idx}-s"));
            }
            if which != 0 {
                b = within(&mut mr, &b, d / 2.0, format!("line{line}-t{idx}-e"));
            }
        }
        let u = coef * a.distance_to(&b);
        let duration = int_in(&mut tr, 0.9 * u, 1.1 * u).max(1);
        let s_i = if forward {
            sample_forward_start(&mut tr)
        } else {
            prev_end + TURNAROUND
        };
        let e_i = s_i + duration;
        prev_end = e_i;
        let id = line * 1000 + idx as u32 + 1;
        trips.push(ServiceTrip::new(id, a, b, s_i, e_i, theta * duration as f64));
    }

    let site = region.depot_sites[line as usize % N_DEPOT_SITES].clone();
    let stations = match tech {
        Technology::Beb => vec![ChargingStation {
            id: 1,
            location: site.clone(),
        }],
        Technology::Fceb => vec![ChargingStation {
            id: 1,
            location: region.hydrogen_station.clone(),
        }],
        Technology::Db => Vec::new(),
    };
    let depots = vec![Depot {
        location: site,
        capacity: depot_capacities(n_trips, 1, s)[0],
    }];
    let mut meta = InstanceMeta {
        generator: "realistic".into(),
        seed: Some(seed),
        scenario: "standard".into(),
        technology: Some(tech),
        ..InstanceMeta::default()
    };
    meta.extra.insert("line".into(), line.into());
    meta.extra.insert("line_km".into(), d.into());
    meta.extra.insert("modified_trips".into(), n_mod.into());
    meta.extra.insert("region_seed".into(), REGION_SEED.into());
    let mut inst = Instance::euclidean(
        trips,
        depots,
        stations,
        params,
        Weights::default(),
        meta,
        SPEED_KM_PER_MIN,
    )?;
    if tech == Technology::Fceb {
        set_fceb_threshold(&mut inst);
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::fceb_return_threshold;
    use proptest::prelude::*;

    #[test]
    fn presets() {
        let beb = technology_params(Technology::Beb);
        assert_eq!(beb.t_max, 164.0);
        assert!((beb.derived_t_max() - 164.3).abs() < 0.05);
        assert_eq!((beb.s_min, beb.s_min_dep), (89.0, 89.0));
        let f = technology_params(Technology::Fceb);
        assert!((f.charge_rate - 3.083).abs() < 1e-3);
        assert!((f.s_min - 7.4).abs() < 1e-12);
        assert_eq!((f.t_min, f.t_max), (12.0, 12.0));
        let db = technology_params(Technology::Db);
        assert_eq!((db.consumption_rate, db.s_max), (0.47, 350.0));
    }

    #[test]
    fn technology_layouts() {
        let b = generate_realistic_base(2, 20, Technology::Beb, 5).unwrap();
        assert_eq!(b.n_depots(), 1);
        assert_eq!(b.stations[0].location, b.depots[0].location);
        let f = generate_realistic_base(2, 20, Technology::Fceb, 5).unwrap();
        assert_eq!(f.stations[0].location, Region::from_seed(REGION_SEED).hydrogen_station);
        assert_eq!(f.params.s_min_dep, fceb_return_threshold(&f));
        assert!(f.params.s_min_dep > f.params.s_min);
        let d = generate_realistic_base(2, 20, Technology::Db, 5).unwrap();
        assert_eq!(d.n_stations(), 0);
        assert_eq!(generate_realistic_base(2, 20, Technology::Beb, 5).unwrap().to_json(), b.to_json());
    }

    #[test]
    fn pairs_and_turnaround() {
        let inst = generate_realistic_base(4, 30, Technology::Beb, 9).unwrap();
        assert_eq!(inst.n_trips(), 30);
        for pair in inst.trips.chunks(2) {
            assert_eq!(pair[1].start_time, pair[0].end_time + 10);
            assert_eq!(pair[0].id / 1000, 4);
        }
        let d = inst.meta.extra["line_km"].as_f64().unwrap();
        assert!(d >= 14.0);
    }

    #[test]
    fn start_time_and_length_distributions() {
        const N: usize = 10_000;
        let mut r = rng(3, Stream::Times);
        let mut b = [0usize; 3];
        for _ in 0..N {
            let s = sample_forward_start(&mut r);
            assert!((300..=1410).contains(&s));
            // shared endpoints count toward the outer bucket
            if (420..=480).contains(&s) {
                b[0] += 1;
            } else if (1020..=1080).contains(&s) {
                b[1] += 1;
            } else {
                b[2] += 1;
            }
        }
        // the 70 % bucket touches 420, 480, 1020 and 1080 with weight 0.7/993 each
        let edge = 2.0 * 0.7 / 993.0;
        for (got, want) in b.iter().zip([0.15 + edge, 0.15 + edge, 0.70 - 2.0 * edge]) {
            assert!((*got as f64 / N as f64 - want).abs() <= 0.02, "{b:?}");
        }
        let mut r = rng(3, Stream::Lines);
        assert!((0..N).all(|_| sample_line_length(&mut r) >= 15.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn modified_share_and_validity(line in 0u32..10, k in 1usize..5, seed in any::<u64>(), tech in 0usize..3) {
            let n = 10 * k;
            let tech = [Technology::Beb, Technology::Fceb, Technology::Db][tech];
            let inst = generate_realistic_base(line, n, tech, seed).unwrap();
            prop_assert!(inst.validate().is_ok());
            let m = inst.meta.extra["modified_trips"].as_u64().unwrap() as f64;
            prop_assert!(m >= (0.03 * n as f64).ceil() && m <= (0.17 * n as f64).floor());
            prop_assert!(m / n as f64 >= 0.03 && m / n as f64 <= 0.17);
            for t in &inst.trips {
                prop_assert!((t.energy - inst.params.consumption_rate * t.duration as f64).abs() < 1e-9);
            }
        }
    }
}
