//! Minimal single-threaded discrete-event machinery.

mod calendar;
mod stats;
mod subsystem;

pub use calendar::EventCalendar;
pub use stats::{StatAccumulator, TimeWeighted};
pub use subsystem::{Completion, PatientId, ServiceStart, Subsystem};
