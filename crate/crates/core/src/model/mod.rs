//! Facility model: four single-server stations in series, daily outpatient
//! sessions, patient routing and state snapshots.
//!
//! Routing is fixed: an optional NCD nurse visit, the doctor, an optional lab
//! visit, then the pharmacy. Every patient leaves through the pharmacy.

mod facility;
mod network;
mod patient;
mod snapshot;

pub use facility::{default_services, Facility, FacilityParams, NetworkParams};
pub use network::{DayRecord, FacilityDay, Network, NetworkOptions, TraceEvent, TraceKind};
pub use patient::{Patient, Visit};
pub use snapshot::{FacilitySnapshot, StationSnapshot};
