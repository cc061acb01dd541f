//! Real-time length-of-stay prediction from a frozen facility snapshot.
//!
//! The remaining service time of the patient in service is approximated from
//! the median and upper quartile of the service distribution, instead of the
//! conditional expectation (kept here as [`remaining_time_exact`] for
//! comparison). Queue state is extrapolated across the patient's travel time
//! and the per-station estimates are chained in visit order.

use std::fmt;
use std::str::FromStr;

use crate::dist::ServiceDistribution;
use crate::model::{FacilitySnapshot, StationSnapshot};
use crate::quad::adaptive_simpson;
use crate::station::{Station, StationMap};

/// Quantities of a service distribution the predictor needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceProfile {
    pub mean: f64,
    pub median: f64,
    pub upper_quartile: f64,
    /// `b`: support bound or the 0.99 quantile.
    pub upper: f64,
}

impl ServiceProfile {
    pub fn from_distribution(dist: &ServiceDistribution) -> Self {
        Self {
            mean: dist.mean(),
            median: dist.quantile(0.5).expect("valid probability"),
            upper_quartile: dist.quantile(0.75).expect("valid probability"),
            upper: dist.residual_upper_limit(),
        }
    }
}

impl From<&ServiceDistribution> for ServiceProfile {
    fn from(d: &ServiceDistribution) -> Self {
        Self::from_distribution(d)
    }
}

/// Approximate remaining service time with a flag for elapsed times past `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    /// `x > b`; the value was clamped to zero.
    pub clamped: bool,
}

/// Piecewise quantile approximation of the remaining service time given
/// elapsed service `elapsed`.
pub fn residual_approx(profile: &ServiceProfile, elapsed: f64) -> Residual {
    let x = elapsed.max(0.0);
    if x > profile.upper {
        return Residual {
            value: 0.0,
            clamped: true,
        };
    }
    let value = if x < profile.median {
        profile.median - x
    } else if x < profile.upper_quartile {
        profile.upper_quartile - x
    } else {
        0.5 * (profile.upper - x)
    };
    Residual {
        value: value.max(0.0),
        clamped: false,
    }
}

pub fn remaining_time_approx(profile: &ServiceProfile, elapsed: f64) -> f64 {
    residual_approx(profile, elapsed).value
}

/// E[T − x | T > x] by numerical integration of the conditional survival
/// function. Returns 0 once the distribution is exhausted at `x`.
pub fn remaining_time_exact(dist: &ServiceDistribution, elapsed: f64) -> f64 {
    let x = elapsed.max(0.0);
    let survival_x = 1.0 - dist.cdf(x);
    if survival_x <= 1e-12 {
        return 0.0;
    }
    let (lo, hi) = dist.support();
    // Below the support the residual is deterministic up to the lower bound.
    let start = x.max(lo);
    let head = start - x;
    let end = if hi.is_finite() {
        hi
    } else {
        // Survival beyond 60 means is below 1e-26 for every kind in use.
        start + 60.0 * dist.mean()
    };
    let tail = adaptive_simpson(&|t| 1.0 - dist.cdf(t), start, end, 1e-11);
    head + tail / survival_x
}

/// Delay at the current instant: queued work plus the residual in service.
pub fn delay_now(entry: &StationSnapshot) -> f64 {
    let residual = entry
        .elapsed
        .map_or(0.0, |x| remaining_time_approx(&entry.profile, x));
    entry.queue_len as f64 * entry.profile.mean + residual
}

/// Residual in service at the snapshot instant, zero when idle.
fn residual_now(entry: &StationSnapshot) -> Residual {
    match entry.elapsed {
        Some(x) => residual_approx(&entry.profile, x),
        None => Residual {
            value: 0.0,
            clamped: false,
        },
    }
}

/// How the observed arrival rate enters the queue extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ArrivalTerm {
    /// Expected arrivals during the trip, `rate * travel`.
    #[default]
    Count,
    /// The per-minute rate itself.
    Rate,
}

impl ArrivalTerm {
    pub fn key(self) -> &'static str {
        match self {
            ArrivalTerm::Count => "count",
            ArrivalTerm::Rate => "rate",
        }
    }

    pub fn arrivals(self, rate: f64, travel: f64) -> f64 {
        match self {
            ArrivalTerm::Count => rate * travel,
            ArrivalTerm::Rate => rate,
        }
    }
}

impl fmt::Display for ArrivalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ArrivalTerm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(ArrivalTerm::Count),
            "rate" => Ok(ArrivalTerm::Rate),
            other => Err(format!("unknown arrival term `{other}` (expected count or rate)")),
        }
    }
}

/// Queue length extrapolated `travel` minutes ahead at arrival rate `rate`
/// (patients per minute). Kept real-valued, floored at zero.
pub fn queue_length_at(entry: &StationSnapshot, travel: f64, rate: f64, term: ArrivalTerm) -> f64 {
    let residual = residual_now(entry).value;
    let expected_arrivals = term.arrivals(rate, travel);
    let served = ((travel - residual) / entry.profile.mean).max(0.0).floor();
    (entry.queue_len as f64 + (expected_arrivals - 1.0) - served).max(0.0)
}

/// Remaining service of whoever is in service `travel` minutes ahead.
pub fn residual_at(entry: &StationSnapshot, travel: f64) -> f64 {
    if entry.elapsed.is_none() {
        return 0.0;
    }
    let residual = residual_now(entry).value;
    if travel < residual {
        return residual - travel;
    }
    let elapsed_ahead = (travel - residual).rem_euclid(entry.profile.mean);
    remaining_time_approx(&entry.profile, elapsed_ahead)
}

/// Predicted LOS at one station for a patient reaching it `travel` minutes
/// after the snapshot.
pub fn los_subsystem_at(entry: &StationSnapshot, travel: f64, rate: f64, term: ArrivalTerm) -> f64 {
    let mean = entry.profile.mean;
    queue_length_at(entry, travel, rate, term) * mean + residual_at(entry, travel) + mean
}

/// Predicted LOS at one facility for a patient arriving after `travel` minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosPrediction {
    pub facility: usize,
    pub decision_time: f64,
    pub travel: f64,
    pub per_station: StationMap<f64>,
    pub total: f64,
    /// Stations whose snapshot elapsed time exceeded `b`.
    pub clamped: u32,
}

/// Chains the station estimates in visit order, each evaluated when the
/// previous one is predicted to end. Every station is included.
pub fn predict_total_los(snap: &FacilitySnapshot, travel: f64, term: ArrivalTerm) -> LosPrediction {
    predict_along(snap, travel, &Station::ORDER, term)
}

/// Same chain restricted to the given stations, in the order given.
pub fn predict_along(snap: &FacilitySnapshot, travel: f64, path: &[Station], term: ArrivalTerm) -> LosPrediction {
    let mut per_station = StationMap([0.0; 4]);
    let mut offset = travel;
    let mut total = 0.0;
    let mut clamped = 0;
    for &station in path {
        let entry = &snap.stations[station];
        if residual_now(entry).clamped {
            clamped += 1;
        }
        let los = los_subsystem_at(entry, offset, snap.arrival_rate, term);
        per_station[station] = los;
        total += los;
        offset += los;
    }
    LosPrediction {
        facility: snap.facility,
        decision_time: snap.time,
        travel,
        per_station,
        total,
        clamped,
    }
}
