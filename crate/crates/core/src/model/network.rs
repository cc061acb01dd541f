use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::des::{EventCalendar, PatientId, ServiceStart, StatAccumulator};
use crate::diversion::{self, DiversionDecision, Policy};
use crate::error::SimError;
use crate::metrics::MapeAccumulator;
use crate::model::facility::{Facility, NetworkParams};
use crate::model::patient::{Patient, Visit};
use crate::predictor::{predict_along, predict_total_los};
use crate::station::{Station, StationMap};

/// Oracle lookaheads give up this many minutes after the decision.
pub const LOOKAHEAD_HORIZON: f64 = 1e4;

/// Sessions must drain within this multiple of the arrival window.
const DRAIN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Generate { origin: usize },
    Arrive { patient: PatientId, facility: usize },
    Complete { facility: usize, station: Station },
}

enum Step {
    Continue,
    Generated(PatientId),
    Exited(Patient),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Generate,
    Dispatch,
    Arrive,
    Queue,
    Start,
    Complete,
    Exit,
}

impl TraceKind {
    fn key(self) -> &'static str {
        match self {
            TraceKind::Generate => "generate",
            TraceKind::Dispatch => "dispatch",
            TraceKind::Arrive => "arrive",
            TraceKind::Queue => "queue",
            TraceKind::Start => "start",
            TraceKind::Complete => "complete",
            TraceKind::Exit => "exit",
        }
    }
}

/// One line of the event trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub day: u32,
    pub time: f64,
    pub facility: usize,
    pub station: Option<Station>,
    pub kind: TraceKind,
    pub patient: PatientId,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{:.6}\t{}\t{}\t{}\t{}",
            self.day,
            self.time,
            self.facility,
            self.station.map_or("-", Station::key),
            self.kind.key(),
            self.patient
        )
    }
}

type Trace = Option<Vec<TraceEvent>>;

/// Everything an oracle lookahead must copy.
#[derive(Clone)]
struct EngineState {
    calendar: EventCalendar<Event>,
    facilities: Vec<Facility>,
    active: HashMap<PatientId, Patient>,
    next_id: PatientId,
    day: u32,
}

impl EngineState {
    fn emit(&self, trace: &mut Trace, time: f64, facility: usize, station: Option<Station>, kind: TraceKind, patient: PatientId) {
        if let Some(t) = trace {
            t.push(TraceEvent {
                day: self.day,
                time,
                facility,
                station,
                kind,
                patient,
            });
        }
    }

    fn patient_mut(&mut self, id: PatientId) -> Result<&mut Patient, SimError> {
        self.active.get_mut(&id).ok_or(SimError::UnknownPatient(id))
    }

    fn begin_day(&mut self, params: &NetworkParams, day: u32) -> Result<(), SimError> {
        self.day = day;
        self.calendar.reset();
        self.active.clear();
        for (i, f) in self.facilities.iter_mut().enumerate() {
            f.reset_day();
            let first = f.arrivals_rng.exponential(params.facilities[i].interarrival_mean);
            if first < params.session_minutes {
                self.calendar.schedule(first, Event::Generate { origin: i })?;
            }
        }
        Ok(())
    }

    fn handle(&mut self, params: &NetworkParams, now: f64, event: Event, trace: &mut Trace) -> Result<Step, SimError> {
        match event {
            Event::Generate { origin } => self.generate(params, origin, now, trace).map(Step::Generated),
            Event::Arrive { patient, facility } => {
                let p = self.patient_mut(patient)?;
                p.arrived = now;
                let first = p.first_station();
                self.facilities[facility].record_arrival(now);
                self.emit(trace, now, facility, None, TraceKind::Arrive, patient);
                self.enter(facility, first, patient, now, trace)?;
                Ok(Step::Continue)
            }
            Event::Complete { facility, station } => self.complete(facility, station, now, trace),
        }
    }

    fn generate(&mut self, params: &NetworkParams, origin: usize, now: f64, trace: &mut Trace) -> Result<PatientId, SimError> {
        let fp = &params.facilities[origin];
        let f = &mut self.facilities[origin];
        let needs_ncd = f.attributes_rng.bernoulli(fp.p_ncd);
        let needs_lab = f.attributes_rng.bernoulli(fp.p_lab);
        let next = now + f.arrivals_rng.exponential(fp.interarrival_mean);
        if next < params.session_minutes {
            self.calendar.schedule(next, Event::Generate { origin })?;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.active
            .insert(id, Patient::new(id, self.day, origin, now, needs_ncd, needs_lab));
        self.emit(trace, now, origin, None, TraceKind::Generate, id);
        Ok(id)
    }

    fn dispatch(&mut self, params: &NetworkParams, id: PatientId, facility: usize, now: f64, trace: &mut Trace) -> Result<(), SimError> {
        let p = self.patient_mut(id)?;
        p.chosen = facility;
        let travel = params.travel[p.origin][facility];
        self.calendar.schedule(now + travel, Event::Arrive { patient: id, facility })?;
        self.emit(trace, now, facility, None, TraceKind::Dispatch, id);
        Ok(())
    }

    fn enter(&mut self, facility: usize, station: Station, id: PatientId, now: f64, trace: &mut Trace) -> Result<(), SimError> {
        self.patient_mut(id)?.visits[station] = Some(Visit {
            enqueued: now,
            started: f64::NAN,
            ended: f64::NAN,
        });
        match self.facilities[facility].subsystems[station].enter(id, now)? {
            Some(start) => self.started(facility, station, start, trace),
            None => {
                self.emit(trace, now, facility, Some(station), TraceKind::Queue, id);
                Ok(())
            }
        }
    }

    fn started(&mut self, facility: usize, station: Station, start: ServiceStart, trace: &mut Trace) -> Result<(), SimError> {
        if let Some(v) = self.patient_mut(start.patient)?.visits[station].as_mut() {
            v.started = start.started;
        }
        self.calendar
            .schedule(start.completes_at, Event::Complete { facility, station })?;
        self.emit(trace, start.started, facility, Some(station), TraceKind::Start, start.patient);
        Ok(())
    }

    fn complete(&mut self, facility: usize, station: Station, now: f64, trace: &mut Trace) -> Result<Step, SimError> {
        let (done, next) = self.facilities[facility].subsystems[station].complete(now)?;
        let id = done.patient;
        let p = self.patient_mut(id)?;
        if let Some(v) = p.visits[station].as_mut() {
            v.ended = now;
        }
        let after = p.next_after(station);
        self.emit(trace, now, facility, Some(station), TraceKind::Complete, id);
        if let Some(n) = next {
            self.started(facility, station, n, trace)?;
        }
        match after {
            Some(s) => {
                self.enter(facility, s, id, now, trace)?;
                Ok(Step::Continue)
            }
            None => {
                let mut p = self.active.remove(&id).ok_or(SimError::UnknownPatient(id))?;
                p.exited = Some(now);
                self.emit(trace, now, facility, None, TraceKind::Exit, id);
                Ok(Step::Exited(p))
            }
        }
    }
}

/// Per-facility outcome of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityDay {
    pub busy: StationMap<f64>,
    /// Queue waits (service excluded) of patients who started service.
    pub waits: StationMap<StatAccumulator>,
    /// Integral of the number waiting over the session.
    pub queue_integral: StationMap<f64>,
    pub entered: StationMap<u64>,
    pub los: StatAccumulator,
    /// Predicted (all stations) versus realized LOS.
    pub mape: MapeAccumulator,
    /// Predicted (own pathway) versus realized LOS.
    pub mape_path: MapeAccumulator,
}

/// Outcome of one simulated session.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub day: u32,
    /// Time the last patient left, or the end of the arrival window if later.
    pub end_time: f64,
    pub facilities: Vec<FacilityDay>,
    pub patients: u64,
    pub diverted: u64,
    /// Snapshot residuals clamped because elapsed service exceeded `b`.
    pub clamped_residuals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkOptions {
    /// Predict LOS for every patient even when the policy does not need it.
    pub record_predictions: bool,
    /// Run oracle lookaheads for every patient without acting on them.
    pub probe_oracle: bool,
    pub trace: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            record_predictions: true,
            probe_oracle: false,
            trace: false,
        }
    }
}

/// Lookahead LOS per candidate for one patient, recorded by `probe_oracle`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleProbe {
    pub patient: PatientId,
    pub los: Vec<f64>,
}

/// A network of facilities simulated one independent session at a time.
pub struct Network {
    params: Arc<NetworkParams>,
    policy: Policy,
    options: NetworkOptions,
    state: EngineState,
    trace: Trace,
    finished: Vec<Patient>,
    decisions: Vec<DiversionDecision>,
    probes: Vec<OracleProbe>,
    clamped: u64,
    next_day: u32,
}

impl Network {
    pub fn new(params: Arc<NetworkParams>, policy: Policy, seed: u64, options: NetworkOptions) -> Self {
        let facilities = params
            .facilities
            .iter()
            .enumerate()
            .map(|(i, fp)| Facility::new(i, fp, seed, params.rate_window))
            .collect();
        Self {
            params,
            policy,
            options,
            state: EngineState {
                calendar: EventCalendar::new(),
                facilities,
                active: HashMap::new(),
                next_id: 0,
                day: 0,
            },
            trace: options.trace.then(Vec::new),
            finished: Vec::new(),
            decisions: Vec::new(),
            probes: Vec::new(),
            clamped: 0,
            next_day: 0,
        }
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn facility(&self, index: usize) -> Option<&Facility> {
        self.state.facilities.get(index)
    }

    /// Patients who left during the last session, in exit order.
    pub fn finished(&self) -> &[Patient] {
        &self.finished
    }

    /// Facility choices made during the last session.
    pub fn decisions(&self) -> &[DiversionDecision] {
        &self.decisions
    }

    pub fn oracle_probes(&self) -> &[OracleProbe] {
        &self.probes
    }

    /// Accumulated trace lines; empty unless tracing was enabled.
    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Runs one session: arrivals during the window, then service until every
    /// facility is empty.
    pub fn run_day(&mut self) -> Result<DayRecord, SimError> {
        let day = self.next_day;
        self.next_day += 1;
        self.finished.clear();
        self.decisions.clear();
        self.probes.clear();
        self.clamped = 0;
        let params = Arc::clone(&self.params);
        self.state.begin_day(&params, day)?;
        let limit = params.session_minutes * DRAIN_FACTOR;
        while let Some((now, event)) = self.state.calendar.pop() {
            if now > limit {
                let facility = match event {
                    Event::Generate { origin } => origin,
                    Event::Arrive { facility, .. } | Event::Complete { facility, .. } => facility,
                };
                return Err(SimError::DrainTimeout { facility, limit });
            }
            match self.state.handle(&params, now, event, &mut self.trace)? {
                Step::Continue => {}
                Step::Generated(id) => self.decide(&params, id, now)?,
                Step::Exited(p) => self.finished.push(p),
            }
        }
        let end_time = self.state.calendar.now().max(params.session_minutes);
        Ok(self.day_record(day, end_time))
    }

    fn decide(&mut self, params: &NetworkParams, id: PatientId, now: f64) -> Result<(), SimError> {
        let patient = self.state.active[&id];
        let origin = patient.origin;
        let travel = &params.travel[origin];
        let n = self.state.facilities.len();

        let want_predictions = self.policy == Policy::Predicted || self.options.record_predictions;
        let snapshots: Vec<_> = if want_predictions {
            self.state.facilities.iter().map(|f| f.snapshot(now)).collect()
        } else {
            Vec::new()
        };
        let predictions: Vec<_> = snapshots
            .iter()
            .map(|s| predict_total_los(s, travel[s.facility], params.arrival_term))
            .collect();

        let decision = match self.policy {
            Policy::None => diversion::decide_none(id, now, origin, travel),
            Policy::Predicted => diversion::decide_predicted(id, now, origin, &predictions),
            Policy::Oracle => {
                let realized = (0..n)
                    .map(|j| self.lookahead(params, id, j, now))
                    .collect::<Result<Vec<_>, _>>()?;
                diversion::decide_from_realized(id, now, origin, travel, &realized)
            }
        };
        if self.options.probe_oracle && self.policy != Policy::Oracle {
            let los = (0..n)
                .map(|j| self.lookahead(params, id, j, now))
                .collect::<Result<Vec<_>, _>>()?;
            self.probes.push(OracleProbe { patient: id, los });
        }

        let chosen = decision.chosen;
        if let Some(pred) = predictions.get(chosen) {
            self.clamped += u64::from(pred.clamped);
            let path_los = predict_along(&snapshots[chosen], travel[chosen], &patient.pathway(), params.arrival_term).total;
            let p = self.state.patient_mut(id)?;
            p.predicted_los = pred.total;
            p.predicted_path_los = path_los;
        }
        self.decisions.push(decision);
        self.state.dispatch(params, id, chosen, now, &mut self.trace)
    }

    /// Realized LOS of patient `id` if sent to `facility` now, from a cloned
    /// engine run until the patient leaves. Patients generated during the
    /// lookahead go to their own facility. The mainline state is untouched.
    fn lookahead(&self, params: &NetworkParams, id: PatientId, facility: usize, now: f64) -> Result<f64, SimError> {
        let mut clone = self.state.clone();
        let mut no_trace: Trace = None;
        clone.dispatch(params, id, facility, now, &mut no_trace)?;
        let horizon = now + LOOKAHEAD_HORIZON;
        while let Some((t, event)) = clone.calendar.pop() {
            if t > horizon {
                return Err(SimError::LookaheadHorizon {
                    patient: id,
                    horizon: LOOKAHEAD_HORIZON,
                });
            }
            match clone.handle(params, t, event, &mut no_trace)? {
                Step::Generated(g) => {
                    let origin = clone.active[&g].origin;
                    clone.dispatch(params, g, origin, t, &mut no_trace)?;
                }
                Step::Exited(p) if p.id == id => {
                    return p.realized_los().ok_or(SimError::UnknownPatient(id));
                }
                _ => {}
            }
        }
        Err(SimError::UnknownPatient(id))
    }

    fn day_record(&self, day: u32, end_time: f64) -> DayRecord {
        let mut facilities: Vec<FacilityDay> = self
            .state
            .facilities
            .iter()
            .map(|f| FacilityDay {
                busy: StationMap::from_fn(|s| f.subsystem(s).busy_time()),
                waits: StationMap::from_fn(|s| *f.subsystem(s).waits()),
                queue_integral: StationMap::from_fn(|s| f.subsystem(s).queue_len_integral(end_time)),
                entered: StationMap::from_fn(|s| f.subsystem(s).entered()),
                los: StatAccumulator::new(),
                mape: MapeAccumulator::default(),
                mape_path: MapeAccumulator::default(),
            })
            .collect();
        let mut diverted = 0;
        for p in &self.finished {
            let fd = &mut facilities[p.chosen];
            let los = p.realized_los().unwrap_or(0.0);
            fd.los.record(los);
            fd.mape.add(los, p.predicted_los);
            fd.mape_path.add(los, p.predicted_path_los);
            diverted += u64::from(p.diverted());
        }
        DayRecord {
            day,
            end_time,
            facilities,
            patients: self.finished.len() as u64,
            diverted,
            clamped_residuals: self.clamped,
        }
    }
}
