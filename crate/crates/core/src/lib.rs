//! Discrete-event simulation of outpatient facilities built from single-server
//! queues in series, with a queueing-based real-time length-of-stay (LOS)
//! predictor and patient diversion policies.
//!
//! Module map:
//!
//! * [`dist`]: service and interarrival distributions, seeded random streams.
//! * [`des`]: event calendar, single-server FIFO subsystems, statistics.
//! * [`model`]: facility composition, patient routing, daily sessions, snapshots.
//! * [`predictor`]: residual service time and LOS prediction.
//! * [`diversion`]: facility choice policies (none, predicted, oracle lookahead).
//! * [`metrics`]: replication protocol and outcome aggregation.
//! * [`config`]: scenario file format.
//! * [`validate`]: analytic self-checks (Pollaczek-Khinchine, Little's law, quantiles).

pub mod config;
pub mod des;
pub mod dist;
pub mod diversion;
pub mod error;
pub mod metrics;
pub mod model;
pub mod predictor;
pub mod report;
mod quad;
pub mod station;
pub mod validate;

pub use config::ScenarioConfig;
pub use dist::{RngStream, ServiceDistribution};
pub use diversion::Policy;
pub use error::{ConfigError, DistError, SimError};
pub use model::{FacilitySnapshot, Network, NetworkParams, Patient};
pub use predictor::{ArrivalTerm, LosPrediction, ServiceProfile};
pub use station::{Station, StationMap};
