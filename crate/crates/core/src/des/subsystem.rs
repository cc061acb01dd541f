use std::collections::VecDeque;

use crate::des::stats::{StatAccumulator, TimeWeighted};
use crate::dist::{RngStream, ServiceDistribution};
use crate::error::SimError;
use crate::station::Station;

pub type PatientId = u64;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Waiting {
    patient: PatientId,
    since: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct InService {
    patient: PatientId,
    started: f64,
    duration: f64,
}

/// A service that has just begun.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceStart {
    pub patient: PatientId,
    pub started: f64,
    pub completes_at: f64,
    /// Time spent in the queue before this start.
    pub wait: f64,
}

/// A service that has just ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub patient: PatientId,
    pub started: f64,
    pub duration: f64,
}

/// Single-server FIFO queue. Service times are drawn when service starts.
#[derive(Debug, Clone)]
pub struct Subsystem {
    station: Station,
    dist: ServiceDistribution,
    rng: RngStream,
    queue: VecDeque<Waiting>,
    in_service: Option<InService>,
    busy_time: f64,
    waits: StatAccumulator,
    queue_len: TimeWeighted,
    entered: u64,
    exited: u64,
}

impl Subsystem {
    pub fn new(station: Station, dist: ServiceDistribution, rng: RngStream) -> Self {
        Self {
            station,
            dist,
            rng,
            queue: VecDeque::new(),
            in_service: None,
            busy_time: 0.0,
            waits: StatAccumulator::new(),
            queue_len: TimeWeighted::starting_at(0.0),
            entered: 0,
            exited: 0,
        }
    }

    pub fn station(&self) -> Station {
        self.station
    }

    pub fn distribution(&self) -> &ServiceDistribution {
        &self.dist
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_busy(&self) -> bool {
        self.in_service.is_some()
    }

    /// Elapsed service time of the patient in service at `now`.
    pub fn elapsed_service(&self, now: f64) -> Option<f64> {
        self.in_service.map(|s| (now - s.started).max(0.0))
    }

    pub fn busy_time(&self) -> f64 {
        self.busy_time
    }

    pub fn waits(&self) -> &StatAccumulator {
        &self.waits
    }

    pub fn queue_len_integral(&self, now: f64) -> f64 {
        self.queue_len.integral_until(now)
    }

    pub fn entered(&self) -> u64 {
        self.entered
    }

    pub fn exited(&self) -> u64 {
        self.exited
    }

    /// Patients currently queued or in service.
    pub fn present(&self) -> u64 {
        self.queue.len() as u64 + u64::from(self.in_service.is_some())
    }

    /// Clears live state and statistics for a new session; the random stream continues.
    pub fn reset(&mut self) {
        self.queue.clear();
        self.in_service = None;
        self.busy_time = 0.0;
        self.waits = StatAccumulator::new();
        self.queue_len = TimeWeighted::starting_at(0.0);
        self.entered = 0;
        self.exited = 0;
    }

    /// Admits a patient. Returns the service start when the server was idle.
    pub fn enter(&mut self, patient: PatientId, now: f64) -> Result<Option<ServiceStart>, SimError> {
        let present = self.in_service.is_some_and(|s| s.patient == patient)
            || self.queue.iter().any(|w| w.patient == patient);
        if present {
            return Err(SimError::DuplicateEntry {
                patient,
                station: self.station.to_string(),
            });
        }
        self.entered += 1;
        if self.in_service.is_none() {
            return Ok(Some(self.start(patient, now, now)));
        }
        self.queue.push_back(Waiting { patient, since: now });
        self.queue_len.update(now, self.queue.len() as f64);
        Ok(None)
    }

    /// Ends the current service and starts the next queued patient, if any.
    pub fn complete(&mut self, now: f64) -> Result<(Completion, Option<ServiceStart>), SimError> {
        let done = self.in_service.take().ok_or_else(|| SimError::IdleCompletion {
            station: self.station.to_string(),
        })?;
        self.busy_time += done.duration;
        self.exited += 1;
        let next = self.queue.pop_front().map(|w| {
            self.queue_len.update(now, self.queue.len() as f64);
            self.start(w.patient, w.since, now)
        });
        let completion = Completion {
            patient: done.patient,
            started: done.started,
            duration: done.duration,
        };
        Ok((completion, next))
    }

    fn start(&mut self, patient: PatientId, queued_at: f64, now: f64) -> ServiceStart {
        let duration = self.dist.sample(&mut self.rng);
        let wait = now - queued_at;
        self.waits.record(wait);
        self.in_service = Some(InService {
            patient,
            started: now,
            duration,
        });
        ServiceStart {
            patient,
            started: now,
            completes_at: now + duration,
            wait,
        }
    }
}
