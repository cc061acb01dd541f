use crate::predictor::ServiceProfile;
use crate::station::StationMap;

/// Frozen state of one station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationSnapshot {
    /// Patients waiting, excluding the one in service.
    pub queue_len: u32,
    /// Elapsed service time of the patient in service; `None` when idle.
    pub elapsed: Option<f64>,
    pub profile: ServiceProfile,
}

/// Frozen state of a facility at `time`, as seen by the predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacilitySnapshot {
    pub facility: usize,
    pub time: f64,
    /// Observed arrivals per minute over the recent window.
    pub arrival_rate: f64,
    pub stations: StationMap<StationSnapshot>,
}

impl FacilitySnapshot {
    /// Snapshot of an empty facility.
    pub fn empty(facility: usize, time: f64, profiles: &StationMap<ServiceProfile>) -> Self {
        Self {
            facility,
            time,
            arrival_rate: 0.0,
            stations: profiles.map(|_, p| StationSnapshot {
                queue_len: 0,
                elapsed: None,
                profile: *p,
            }),
        }
    }
}
