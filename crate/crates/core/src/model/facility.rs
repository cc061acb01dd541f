use std::collections::VecDeque;

use crate::des::Subsystem;
use crate::dist::{RngStream, ServiceDistribution};
use crate::model::snapshot::{FacilitySnapshot, StationSnapshot};
use crate::predictor::{ArrivalTerm, ServiceProfile};
use crate::station::{Station, StationMap};

/// Static description of one facility.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityParams {
    pub name: String,
    /// Mean outpatient interarrival time in the catchment (minutes).
    pub interarrival_mean: f64,
    pub services: StationMap<ServiceDistribution>,
    /// Share of patients who see the NCD nurse first.
    pub p_ncd: f64,
    /// Share of patients sent to the lab after the doctor.
    pub p_lab: f64,
}

impl FacilityParams {
    /// Facility with the field-estimated service times: NCD U(2,5), doctor
    /// N(0.87, 0.21²), lab N(3.451, 0.873²), pharmacy N(2.084, 0.723²), the
    /// normals truncated to `[0, mu + 6 sigma]`.
    pub fn with_default_services(name: &str, interarrival_mean: f64) -> Self {
        Self {
            name: name.to_string(),
            interarrival_mean,
            services: default_services(),
            p_ncd: 0.5,
            p_lab: 0.5,
        }
    }
}

pub fn default_services() -> StationMap<ServiceDistribution> {
    StationMap([
        ServiceDistribution::uniform(2.0, 5.0).expect("valid"),
        ServiceDistribution::truncated_normal_default(0.87, 0.21).expect("valid"),
        ServiceDistribution::truncated_normal_default(3.451, 0.873).expect("valid"),
        ServiceDistribution::truncated_normal_default(2.084, 0.723).expect("valid"),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub facilities: Vec<FacilityParams>,
    /// `travel[i][j]`: minutes for a patient of catchment `i` to reach facility `j`.
    pub travel: Vec<Vec<f64>>,
    /// Length of the daily arrival window (minutes); also the utilization denominator.
    pub session_minutes: f64,
    /// Window for the observed arrival-rate estimate (minutes).
    pub rate_window: f64,
    pub arrival_term: ArrivalTerm,
}

impl NetworkParams {
    /// Two facilities with default services, 10 minutes to the home facility
    /// and 20 to the other.
    pub fn two_facility(interarrival_1: f64, interarrival_2: f64) -> Self {
        Self {
            facilities: vec![
                FacilityParams::with_default_services("PHC1", interarrival_1),
                FacilityParams::with_default_services("PHC2", interarrival_2),
            ],
            travel: vec![vec![10.0, 20.0], vec![20.0, 10.0]],
            session_minutes: 360.0,
            rate_window: 60.0,
            arrival_term: ArrivalTerm::Count,
        }
    }

    /// One facility reached with the given travel time.
    pub fn single(facility: FacilityParams, travel: f64) -> Self {
        Self {
            facilities: vec![facility],
            travel: vec![vec![travel]],
            session_minutes: 360.0,
            rate_window: 60.0,
            arrival_term: ArrivalTerm::Count,
        }
    }
}

/// Live state of one facility and its catchment's arrival process.
#[derive(Debug, Clone)]
pub struct Facility {
    index: usize,
    pub(crate) subsystems: StationMap<Subsystem>,
    pub(crate) arrivals_rng: RngStream,
    pub(crate) attributes_rng: RngStream,
    profiles: StationMap<ServiceProfile>,
    recent_arrivals: VecDeque<f64>,
    arrivals_today: u64,
    rate_window: f64,
}

impl Facility {
    pub fn new(index: usize, params: &FacilityParams, seed: u64, rate_window: f64) -> Self {
        let tag = format!("phc{}", index + 1);
        let subsystems = StationMap::from_fn(|s| {
            Subsystem::new(
                s,
                params.services[s],
                RngStream::new(seed, &format!("{tag}.{}.service", s.key())),
            )
        });
        Self {
            index,
            subsystems,
            arrivals_rng: RngStream::new(seed, &format!("{tag}.arrivals")),
            attributes_rng: RngStream::new(seed, &format!("{tag}.attributes")),
            profiles: params.services.map(|_, d| ServiceProfile::from_distribution(d)),
            recent_arrivals: VecDeque::new(),
            arrivals_today: 0,
            rate_window,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn subsystem(&self, station: Station) -> &Subsystem {
        &self.subsystems[station]
    }

    pub fn profiles(&self) -> &StationMap<ServiceProfile> {
        &self.profiles
    }

    pub fn arrivals_today(&self) -> u64 {
        self.arrivals_today
    }

    /// Patients inside the facility.
    pub fn present(&self) -> u64 {
        self.subsystems.0.iter().map(Subsystem::present).sum()
    }

    pub(crate) fn reset_day(&mut self) {
        for s in self.subsystems.0.iter_mut() {
            s.reset();
        }
        self.recent_arrivals.clear();
        self.arrivals_today = 0;
    }

    pub(crate) fn record_arrival(&mut self, now: f64) {
        self.arrivals_today += 1;
        self.recent_arrivals.push_back(now);
        let cutoff = now - self.rate_window;
        while self.recent_arrivals.front().is_some_and(|&t| t < cutoff) {
            self.recent_arrivals.pop_front();
        }
    }

    /// Arrivals per minute over the last `rate_window` minutes of the session,
    /// or arrivals so far over elapsed time early in the session.
    pub fn arrival_rate(&self, now: f64) -> f64 {
        if now <= 0.0 {
            return 0.0;
        }
        let span = self.rate_window.min(now);
        let cutoff = now - span;
        let first = self.recent_arrivals.partition_point(|&t| t < cutoff);
        let recent = self.recent_arrivals.len() - first;
        recent as f64 / span
    }

    pub fn snapshot(&self, now: f64) -> FacilitySnapshot {
        FacilitySnapshot {
            facility: self.index,
            time: now,
            arrival_rate: self.arrival_rate(now),
            stations: StationMap::from_fn(|s| {
                let sub = &self.subsystems[s];
                StationSnapshot {
                    queue_len: sub.queue_len() as u32,
                    elapsed: sub.elapsed_service(now),
                    profile: self.profiles[s],
                }
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn facility() -> Facility {
        Facility::new(0, &FacilityParams::with_default_services("PHC1", 9.0), 5, 60.0)
    }

    #[test]
    fn empty_snapshot() {
        let f = facility();
        let snap = f.snapshot(100.0);
        assert_eq!(snap.arrival_rate, 0.0);
        for (_, s) in snap.stations.iter() {
            assert_eq!(s.queue_len, 0);
            assert_eq!(s.elapsed, None);
        }
        assert_eq!(snap, FacilitySnapshot::empty(0, 100.0, f.profiles()));
    }

    #[test]
    fn snapshot_reads_queue_and_elapsed() {
        let mut f = facility();
        f.subsystems[Station::Doc].enter(1, 10.0).unwrap();
        let snap = f.snapshot(10.5);
        assert_eq!(snap.stations[Station::Doc].queue_len, 0);
        assert_eq!(snap.stations[Station::Doc].elapsed, Some(0.5));

        let ph = &mut f.subsystems[Station::Pharmacy];
        ph.enter(2, 9.0).unwrap();
        for id in 3..6 {
            ph.enter(id, 9.5).unwrap();
        }
        let snap = f.snapshot(10.0);
        assert_eq!(snap.stations[Station::Pharmacy].queue_len, 3);
        assert_eq!(snap.stations[Station::Pharmacy].elapsed, Some(1.0));
    }

    #[test]
    fn arrival_rate_window() {
        let mut f = facility();
        // Before the window fills: arrivals so far over elapsed time.
        f.record_arrival(5.0);
        f.record_arrival(10.0);
        assert_eq!(f.arrival_rate(20.0), 0.1);
        for t in [70.0, 80.0, 90.0] {
            f.record_arrival(t);
        }
        // Window [40, 100]: three arrivals.
        assert_eq!(f.arrival_rate(100.0), 3.0 / 60.0);
        assert_eq!(f.arrivals_today(), 5);
        assert_eq!(f.arrival_rate(0.0), 0.0);
    }
}
