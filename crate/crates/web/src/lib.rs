//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes and returns plain numbers, strings or numeric arrays,
//! so the same functions are exercised by native tests.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use phcsim::metrics::{run_replication, summarize, Protocol};
use phcsim::model::{FacilitySnapshot, NetworkOptions, StationSnapshot};
use phcsim::predictor::{predict_total_los, remaining_time_approx, remaining_time_exact, ServiceProfile};
use phcsim::{ArrivalTerm, NetworkParams, Policy, ServiceDistribution, Station, StationMap};

/// Residual service time against elapsed time for a distribution written as
/// `uniform 2 5`, `truncnormal 3.451 0.873` or `exponential 0.5`.
///
/// Returns `points` triples `x, approximate, exact` flattened into one array,
/// with `x` spanning `[0, upper limit]`.
#[wasm_bindgen]
pub fn residual_curve(distribution: &str, points: usize) -> Result<Vec<f64>, String> {
    let dist: ServiceDistribution = distribution.parse().map_err(|e| format!("{e}"))?;
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let profile = ServiceProfile::from_distribution(&dist);
    let mut out = Vec::with_capacity(points * 3);
    for i in 0..points {
        let x = profile.upper * i as f64 / (points - 1) as f64;
        out.push(x);
        out.push(remaining_time_approx(&profile, x));
        out.push(remaining_time_exact(&dist, x));
    }
    Ok(out)
}

/// Predicted LOS at a facility with the field service times, for travel
/// times `0..=max_travel` in `points` steps.
///
/// `queues` and `elapsed` hold one value per station in visit order
/// (ncd, doc, lab, pharmacy); a negative elapsed time marks an idle server.
/// `term` is `count` or `rate`. Returns pairs `travel, total` flattened.
#[wasm_bindgen]
pub fn los_vs_travel(
    queues: Vec<u32>,
    elapsed: Vec<f64>,
    arrival_rate: f64,
    term: &str,
    max_travel: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if queues.len() != 4 || elapsed.len() != 4 {
        return Err("queues and elapsed need one value per station (4)".into());
    }
    if points < 2 || !(max_travel > 0.0) || !(arrival_rate >= 0.0) {
        return Err("need points >= 2, max_travel > 0 and arrival_rate >= 0".into());
    }
    let term: ArrivalTerm = term.parse()?;
    let services = phcsim::model::default_services();
    let stations = StationMap::from_fn(|s| {
        let i = s.index();
        StationSnapshot {
            queue_len: queues[i],
            elapsed: (elapsed[i] >= 0.0).then_some(elapsed[i]),
            profile: ServiceProfile::from_distribution(&services[s]),
        }
    });
    let snap = FacilitySnapshot {
        facility: 0,
        time: 0.0,
        arrival_rate,
        stations,
    };
    let mut out = Vec::with_capacity(points * 2);
    for i in 0..points {
        let travel = max_travel * i as f64 / (points - 1) as f64;
        out.push(travel);
        out.push(predict_total_los(&snap, travel, term).total);
    }
    Ok(out)
}

/// One replication of a two-facility network (10 minutes to the home
/// facility, 20 to the other). The first half of `days` is warm-up.
///
/// Returns `name,value` lines: utilizations, waits, LOS and MAPE per
/// facility, then disparities and the share diverted.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    interarrival_1: f64,
    interarrival_2: f64,
    p_ncd: f64,
    policy: &str,
    term: &str,
    days: u32,
    seed: u64,
) -> Result<String, String> {
    let policy: Policy = policy.parse()?;
    let term: ArrivalTerm = term.parse()?;
    if !(interarrival_1 > 0.0 && interarrival_2 > 0.0) {
        return Err("interarrival times must be positive".into());
    }
    if !(0.0..=1.0).contains(&p_ncd) {
        return Err("p_ncd must lie in [0, 1]".into());
    }
    if !(2..=400).contains(&days) {
        return Err("days must be between 2 and 400".into());
    }
    let mut params = NetworkParams::two_facility(interarrival_1, interarrival_2);
    params.arrival_term = term;
    for f in &mut params.facilities {
        f.p_ncd = p_ncd;
    }
    let params = Arc::new(params);
    let protocol = Protocol {
        replications: 1,
        horizon_days: days,
        warmup_days: days / 2,
        master_seed: seed,
    };
    let (stats, _) = run_replication(&params, policy, seed, &protocol, NetworkOptions::default())
        .map_err(|e| e.to_string())?;
    let names: Vec<String> = params.facilities.iter().map(|f| f.name.clone()).collect();
    let rows = summarize(&[stats], &names);
    let mut out = String::new();
    for r in rows {
        if r.mean.is_finite() {
            out.push_str(&format!("{},{:.3}\n", r.name, r.mean));
        }
    }
    Ok(out)
}

/// Station keys in the order the array arguments use.
#[wasm_bindgen]
pub fn station_order() -> String {
    Station::ORDER.map(|s| s.key()).join(" ")
}
