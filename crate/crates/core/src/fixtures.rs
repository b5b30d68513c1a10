//! Small hand-built instances used by tests, examples and the CLI smoke
//! commands.

use crate::instance::{
    ChargingStation, Depot, Instance, InstanceMeta, Location, Matrices, ServiceTrip, VehicleParams,
    Weights,
};

/// Rows/columns: ST1, ST2, ST3, depot 1, depot 2, a1, a2. Entry `[r][c]` is
/// the travel time in minutes from `r` to `c`; pairs that are never travelled
/// are stored as zero.
const TRAVEL_TIMES: [[f64; 7]; 7] = [
    [0.0, 28.0, 5.0, 34.0, 15.0, 28.0, 19.0],
    [28.0, 0.0, 5.0, 34.0, 15.0, 28.0, 19.0],
    [35.0, 35.0, 0.0, 7.0, 49.0, 32.0, 23.0],
    [40.0, 40.0, 29.0, 0.0, 47.0, 26.0, 26.0],
    [39.0, 39.0, 19.0, 47.0, 0.0, 33.0, 34.0],
    [50.0, 50.0, 24.0, 20.0, 30.0, 0.0, 36.0],
    [15.0, 15.0, 16.0, 26.0, 34.0, 35.0, 0.0],
];

/// Benchmark vehicle parameters with the full-charge time fixed at 120 min.
pub fn three_trip_params() -> VehicleParams {
    VehicleParams {
        consumption_rate: 1.3,
        s_max: 1000.0,
        s_min: 10.0,
        s_min_dep: 700.0,
        t_min: 10.0,
        charge_rate: 50.0 / 6.0,
        t_max: 120.0,
    }
}

/// The three-trip illustrative instance with one (`I_1`) or two (`I_2`)
/// depots and two charging stations. Distances equal travel times (1 km/min)
/// and trip energy is `θ·u`.
pub fn three_trip_instance(n_depots: usize) -> Instance {
    three_trip_with_params(n_depots, three_trip_params())
}

pub fn three_trip_with_params(n_depots: usize, params: VehicleParams) -> Instance {
    assert!((1..=2).contains(&n_depots), "the fixture defines two depots");
    let theta = params.consumption_rate;
    let times = [(795, 840), (990, 1035), (1025, 1110)];
    let trips: Vec<ServiceTrip> = times
        .iter()
        .enumerate()
        .map(|(i, &(s, e))| {
            let id = i as u32 + 1;
            ServiceTrip::new(
                id,
                Location::new(format!("ST{id}-start"), 0.0, 0.0),
                Location::new(format!("ST{id}-end"), 0.0, 0.0),
                s,
                e,
                theta * (e - s) as f64,
            )
        })
        .collect();
    let depots: Vec<Depot> = (0..n_depots)
        .map(|k| Depot {
            location: Location::new(format!("depot{}", k + 1), 0.0, 0.0),
            capacity: 3,
        })
        .collect();
    let stations: Vec<ChargingStation> = (1..=2)
        .map(|a| ChargingStation {
            id: a,
            location: Location::new(format!("a{a}"), 0.0, 0.0),
        })
        .collect();

    // matrix row/column for each canonical point
    let mut rows: Vec<usize> = vec![0, 1, 2];
    rows.extend((0..n_depots).map(|k| 3 + k));
    rows.extend((0..n_depots).map(|k| 3 + k));
    rows.extend([5, 6]);
    let n = rows.len();
    let mut m = Matrices::zeros(n);
    for (i, &ri) in rows.iter().enumerate() {
        for (j, &cj) in rows.iter().enumerate() {
            let t = TRAVEL_TIMES[ri][cj];
            m.set(i, j, t, t, theta);
        }
    }
    let meta = InstanceMeta {
        generator: "three-trip".into(),
        scenario: "standard".into(),
        ..InstanceMeta::default()
    };
    Instance::new(trips, depots, stations, params, Weights::default(), m, meta)
        .expect("three-trip instance is valid")
}

/// Copy of `instance` with all charging stations removed.
pub fn without_stations(instance: &Instance) -> Instance {
    let keep = instance.n_trips() + 2 * instance.n_depots();
    let mut m = Matrices::zeros(keep);
    let old = &instance.matrices;
    for i in 0..keep {
        for j in 0..keep {
            let src = i * old.size + j;
            let dst = i * keep + j;
            m.t[dst] = old.t[src];
            m.d[dst] = old.d[src];
            m.p[dst] = old.p[src];
        }
    }
    Instance::new(
        instance.trips.clone(),
        instance.depots.clone(),
        Vec::new(),
        instance.params.clone(),
        instance.weights,
        m,
        instance.meta.clone(),
    )
    .expect("removing stations keeps the instance valid")
}

/// Two depots 50 km apart and two overlapping trips that both run from the
/// first depot to the second. Ignoring depot pairing, each vehicle would
/// leave depot 1 and park at depot 2 for free; every depot-correct schedule
/// pays a 50 km return leg per vehicle.
pub fn crossing_instance() -> Instance {
    let params = VehicleParams::with_derived_t_max(1.3, 1000.0, 10.0, 700.0, 10.0, 50.0 / 6.0);
    let theta = params.consumption_rate;
    let trip = |id: u32, y: f64, s: i64, e: i64| {
        let (a, b) = (Location::new(format!("T{id}-start"), 0.0, y), Location::new(format!("T{id}-end"), 50.0, y));
        let km = a.distance_to(&b);
        ServiceTrip::new(id, a, b, s, e, theta * km)
    };
    let depots = vec![
        Depot {
            location: Location::new("west", 0.0, 0.0),
            capacity: 2,
        },
        Depot {
            location: Location::new("east", 50.0, 0.0),
            capacity: 2,
        },
    ];
    let stations = vec![ChargingStation {
        id: 1,
        location: Location::new("far", 25.0, 60.0),
    }];
    let meta = InstanceMeta {
        generator: "crossing".into(),
        scenario: "standard".into(),
        ..InstanceMeta::default()
    };
    Instance::euclidean(
        vec![trip(1, 0.0, 480, 560), trip(2, 1.0, 490, 570)],
        depots,
        stations,
        params,
        Weights::default(),
        meta,
        1.0,
    )
    .expect("crossing instance is valid")
}
