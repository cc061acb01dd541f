//! Outcome measures, the replication protocol and scenario aggregation.
//!
//! Per replication, statistics pool every post-warm-up session: utilization
//! is total busy time over total session minutes, waits are queue waits only
//! (service excluded), LOS is arrival to pharmacy exit. Disparities (Δ) are
//! computed per replication and then averaged, so the reported SD is the SD of
//! the per-replication disparity.

use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;

use crate::des::StatAccumulator;
use crate::dist::RngStream;
use crate::diversion::Policy;
use crate::error::SimError;
use crate::model::{DayRecord, Network, NetworkOptions, NetworkParams, TraceEvent};
use crate::station::{Station, StationMap};

/// Busy minutes over session minutes. Exceeds 1 when servers work overtime.
pub fn utilization(busy_minutes: f64, session_minutes: f64) -> f64 {
    if session_minutes <= 0.0 {
        0.0
    } else {
        busy_minutes / session_minutes
    }
}

/// Percentage difference `|a − b| / max(a, b) × 100`; 0 when both are zero.
pub fn disparity(a: f64, b: f64) -> f64 {
    disparity_all(&[a, b])
}

/// Spread of an outcome across facilities: `(max − min) / max × 100`.
pub fn disparity_all(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) {
        0.0
    } else {
        (max - min) / max * 100.0
    }
}

/// Mean absolute percentage error, accumulated pair by pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MapeAccumulator {
    sum: f64,
    count: u64,
    excluded: u64,
}

impl MapeAccumulator {
    /// Adds one (actual, predicted) pair. Non-finite predictions are ignored;
    /// pairs with a non-positive actual are excluded and counted.
    pub fn add(&mut self, actual: f64, predicted: f64) {
        if !predicted.is_finite() {
            return;
        }
        if !(actual > 0.0) {
            self.excluded += 1;
            return;
        }
        self.sum += ((actual - predicted) / actual).abs();
        self.count += 1;
    }

    pub fn merge(&mut self, other: &MapeAccumulator) {
        self.sum += other.sum;
        self.count += other.count;
        self.excluded += other.excluded;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    /// MAPE in percent, `None` with no usable pairs.
    pub fn percent(&self) -> Option<f64> {
        (self.count > 0).then(|| 100.0 * self.sum / self.count as f64)
    }
}

/// MAPE in percent over `(actual, predicted)` pairs.
pub fn mape(pairs: &[(f64, f64)]) -> MapeAccumulator {
    let mut acc = MapeAccumulator::default();
    for &(a, p) in pairs {
        acc.add(a, p);
    }
    acc
}

/// Outcomes of one facility over the kept days of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityOutcome {
    pub utilization: StationMap<f64>,
    /// Mean queue wait per station (minutes).
    pub wait: StationMap<f64>,
    pub los: f64,
    /// Predictor MAPE against realized LOS, prediction along the patient's pathway.
    pub mape: Option<f64>,
    /// Same, with the all-station prediction used for diversion decisions.
    pub mape_all_stations: Option<f64>,
    pub patients: u64,
    /// Time-average number waiting per station.
    pub mean_queue: StationMap<f64>,
    /// Station entries per observed minute.
    pub entry_rate: StationMap<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub seed: u64,
    pub facilities: Vec<FacilityOutcome>,
    /// Percentage of patients treated away from their assigned facility.
    pub beta: f64,
    pub patients: u64,
    pub days_kept: u32,
    pub clamped_residuals: u64,
}

#[derive(Debug, Clone, Default)]
struct FacilityTotals {
    busy: StationMap<f64>,
    waits: StationMap<StatAccumulator>,
    queue_integral: StationMap<f64>,
    entered: StationMap<u64>,
    los: StatAccumulator,
    mape: MapeAccumulator,
    mape_path: MapeAccumulator,
}

/// Pools day records, skipping days before the warm-up boundary.
#[derive(Debug, Clone)]
pub struct ReplicationAccumulator {
    warmup_days: u32,
    session_minutes: f64,
    days_kept: u32,
    observed_minutes: f64,
    facilities: Vec<FacilityTotals>,
    patients: u64,
    diverted: u64,
    clamped: u64,
}

impl ReplicationAccumulator {
    pub fn new(facilities: usize, warmup_days: u32, session_minutes: f64) -> Self {
        Self {
            warmup_days,
            session_minutes,
            days_kept: 0,
            observed_minutes: 0.0,
            facilities: vec![FacilityTotals::default(); facilities],
            patients: 0,
            diverted: 0,
            clamped: 0,
        }
    }

    /// Returns whether the day was kept.
    pub fn add_day(&mut self, day: &DayRecord) -> bool {
        if day.day < self.warmup_days {
            return false;
        }
        self.days_kept += 1;
        self.observed_minutes += day.end_time;
        self.patients += day.patients;
        self.diverted += day.diverted;
        self.clamped += day.clamped_residuals;
        for (tot, fd) in self.facilities.iter_mut().zip(&day.facilities) {
            for s in Station::ORDER {
                tot.busy[s] += fd.busy[s];
                tot.waits[s].merge(&fd.waits[s]);
                tot.queue_integral[s] += fd.queue_integral[s];
                tot.entered[s] += fd.entered[s];
            }
            tot.los.merge(&fd.los);
            tot.mape.merge(&fd.mape);
            tot.mape_path.merge(&fd.mape_path);
        }
        true
    }

    pub fn days_kept(&self) -> u32 {
        self.days_kept
    }

    pub fn finish(&self, seed: u64) -> ReplicationStats {
        let session_total = self.session_minutes * f64::from(self.days_kept);
        let observed = self.observed_minutes;
        let per_minute = |x: f64| if observed > 0.0 { x / observed } else { 0.0 };
        let facilities = self
            .facilities
            .iter()
            .map(|t| FacilityOutcome {
                utilization: t.busy.map(|_, &b| utilization(b, session_total)),
                wait: t.waits.map(|_, w| w.mean()),
                los: t.los.mean(),
                mape: t.mape_path.percent(),
                mape_all_stations: t.mape.percent(),
                patients: t.los.count(),
                mean_queue: t.queue_integral.map(|_, &q| per_minute(q)),
                entry_rate: t.entered.map(|_, &n| per_minute(n as f64)),
            })
            .collect();
        let beta = if self.patients == 0 {
            0.0
        } else {
            100.0 * self.diverted as f64 / self.patients as f64
        };
        ReplicationStats {
            seed,
            facilities,
            beta,
            patients: self.patients,
            days_kept: self.days_kept,
            clamped_residuals: self.clamped,
        }
    }
}

/// Outcome rows in table order: utilizations, waits, LOS.
const STATION_ROWS: [(Station, &str); 4] = [
    (Station::Doc, "doc"),
    (Station::Ncd, "ncd"),
    (Station::Pharmacy, "phar"),
    (Station::Lab, "lab"),
];
const WAIT_ROWS: [(Station, &str); 4] = [
    (Station::Doc, "opd"),
    (Station::Pharmacy, "phar"),
    (Station::Lab, "lab"),
    (Station::Ncd, "ncd"),
];

impl ReplicationStats {
    /// Named outcomes of this replication. Facility rows are prefixed with
    /// the facility name; cross-facility rows with `delta.`.
    pub fn outcomes(&self, names: &[String]) -> Vec<(String, f64)> {
        let mut rows = Vec::new();
        for (name, f) in names.iter().zip(&self.facilities) {
            for (s, label) in STATION_ROWS {
                rows.push((format!("{name}.rho_{label}"), f.utilization[s]));
            }
            for (s, label) in WAIT_ROWS {
                rows.push((format!("{name}.w_{label}"), f.wait[s]));
            }
            rows.push((format!("{name}.los"), f.los));
            rows.push((format!("{name}.mape"), f.mape.unwrap_or(f64::NAN)));
            rows.push((
                format!("{name}.mape_all_stations"),
                f.mape_all_stations.unwrap_or(f64::NAN),
            ));
        }
        let across = |get: &dyn Fn(&FacilityOutcome) -> f64| {
            disparity_all(&self.facilities.iter().map(get).collect::<Vec<_>>())
        };
        for (s, label) in STATION_ROWS {
            rows.push((format!("delta.rho_{label}"), across(&|f| f.utilization[s])));
        }
        for (s, label) in WAIT_ROWS {
            rows.push((format!("delta.w_{label}"), across(&|f| f.wait[s])));
        }
        rows.push(("delta.los".to_string(), across(&|f| f.los)));
        rows.push(("beta".to_string(), self.beta));
        rows
    }
}

/// Mean and sample SD of one outcome over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and SD per outcome, ignoring non-finite values (e.g. MAPE without predictions).
pub fn summarize(reps: &[ReplicationStats], names: &[String]) -> Vec<OutcomeSummary> {
    let per_rep: Vec<Vec<(String, f64)>> = reps.iter().map(|r| r.outcomes(names)).collect();
    let Some(first) = per_rep.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let mut acc = StatAccumulator::new();
            for row in &per_rep {
                if row[i].1.is_finite() {
                    acc.record(row[i].1);
                }
            }
            let (mean, sd) = if acc.count() == 0 {
                (f64::NAN, f64::NAN)
            } else {
                (acc.mean(), acc.variance().sqrt())
            };
            OutcomeSummary {
                name: name.clone(),
                mean,
                sd,
            }
        })
        .collect()
}

/// Replication protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protocol {
    pub replications: u32,
    pub horizon_days: u32,
    pub warmup_days: u32,
    pub master_seed: u64,
}

/// Aggregated results of one policy over all replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub policy: Policy,
    pub protocol: Protocol,
    pub facility_names: Vec<String>,
    pub replications: Vec<ReplicationStats>,
    pub rows: Vec<OutcomeSummary>,
}

impl ScenarioReport {
    pub fn row(&self, name: &str) -> Option<&OutcomeSummary> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn mean(&self, name: &str) -> f64 {
        self.row(name).map_or(f64::NAN, |r| r.mean)
    }
}

/// Seed of replication `index`, derived from the master seed.
pub fn replication_seed(master: u64, index: u32) -> u64 {
    RngStream::new(master, &format!("replication.{index}")).next_u64()
}

/// Runs one replication; returns its statistics and, if requested, the trace.
pub fn run_replication(
    params: &Arc<NetworkParams>,
    policy: Policy,
    seed: u64,
    protocol: &Protocol,
    options: NetworkOptions,
) -> Result<(ReplicationStats, Vec<TraceEvent>), SimError> {
    let mut net = Network::new(Arc::clone(params), policy, seed, options);
    let mut acc = ReplicationAccumulator::new(
        params.facilities.len(),
        protocol.warmup_days,
        params.session_minutes,
    );
    for _ in 0..protocol.horizon_days {
        let day = net.run_day()?;
        acc.add_day(&day);
    }
    Ok((acc.finish(seed), net.take_trace()))
}

/// Output of [`run_scenario`]: the report and the trace of replication 0 when requested.
pub struct ScenarioRun {
    pub report: ScenarioReport,
    pub trace: Vec<TraceEvent>,
}

/// Runs every replication of one policy. Replications run on the current rayon
/// pool and are collected in seed order, so results do not depend on scheduling.
pub fn run_scenario(
    params: &Arc<NetworkParams>,
    policy: Policy,
    protocol: Protocol,
    trace_first: bool,
) -> Result<ScenarioRun, SimError> {
    let seeds: Vec<u64> = (0..protocol.replications)
        .map(|r| replication_seed(protocol.master_seed, r))
        .collect();
    let results = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let options = NetworkOptions {
                trace: trace_first && i == 0,
                ..NetworkOptions::default()
            };
            run_replication(params, policy, seed, &protocol, options)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut trace = Vec::new();
    let mut replications = Vec::with_capacity(results.len());
    for (stats, t) in results {
        if trace.is_empty() {
            trace = t;
        }
        replications.push(stats);
    }
    let facility_names: Vec<String> = params.facilities.iter().map(|f| f.name.clone()).collect();
    let rows = summarize(&replications, &facility_names);
    Ok(ScenarioRun {
        report: ScenarioReport {
            policy,
            protocol,
            facility_names,
            replications,
            rows,
        },
        trace,
    })
}
