//! Facility choice at the moment a patient decides to seek care.
//!
//! Every policy picks the candidate with the smallest LOS estimate, preferring
//! the assigned facility on ties. They differ in where the estimate comes from:
//! nowhere ([`Policy::None`]), the queueing predictor ([`Policy::Predicted`]),
//! or a lookahead run of a cloned simulation ([`Policy::Oracle`]). The oracle
//! lookahead lives in [`crate::model::Network`] because it needs the full
//! engine state.

use std::fmt;
use std::str::FromStr;

use crate::des::PatientId;
use crate::predictor::LosPrediction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    None,
    Predicted,
    Oracle,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::None, Policy::Predicted, Policy::Oracle];

    pub fn key(self) -> &'static str {
        match self {
            Policy::None => "none",
            Policy::Predicted => "predicted",
            Policy::Oracle => "oracle",
        }
    }

    /// Column heading used in summaries.
    pub fn heading(self) -> &'static str {
        match self {
            Policy::None => "No diversion",
            Policy::Predicted => "With predicted LOS",
            Policy::Oracle => "With actual LOS",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" => Ok(Policy::None),
            "predicted" => Ok(Policy::Predicted),
            "oracle" => Ok(Policy::Oracle),
            other => Err(format!(
                "unknown policy `{other}` (expected none, predicted or oracle)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub facility: usize,
    pub travel: f64,
    /// Predicted or lookahead LOS; NaN when the policy does not estimate it.
    pub los: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversionDecision {
    pub patient: PatientId,
    pub decision_time: f64,
    pub assigned: usize,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    pub diverted: bool,
}

/// Index of the minimum-LOS candidate. Ties go to `assigned`, then to the
/// lowest facility index.
pub fn argmin_facility(assigned: usize, candidates: &[Candidate]) -> usize {
    let best = candidates
        .iter()
        .map(|c| c.los)
        .fold(f64::INFINITY, f64::min);
    if candidates.iter().any(|c| c.facility == assigned && c.los == best) {
        return assigned;
    }
    candidates
        .iter()
        .find(|c| c.los == best)
        .map_or(assigned, |c| c.facility)
}

fn decision(patient: PatientId, t: f64, assigned: usize, candidates: Vec<Candidate>, chosen: usize) -> DiversionDecision {
    DiversionDecision {
        patient,
        decision_time: t,
        assigned,
        candidates,
        chosen,
        diverted: chosen != assigned,
    }
}

/// No diversion: the assigned facility.
pub fn decide_none(patient: PatientId, t: f64, assigned: usize, travel: &[f64]) -> DiversionDecision {
    let candidates = travel
        .iter()
        .enumerate()
        .map(|(facility, &travel)| Candidate {
            facility,
            travel,
            los: f64::NAN,
        })
        .collect();
    decision(patient, t, assigned, candidates, assigned)
}

/// Diversion on predicted LOS, one prediction per candidate facility.
pub fn decide_predicted(patient: PatientId, t: f64, assigned: usize, predictions: &[LosPrediction]) -> DiversionDecision {
    let candidates: Vec<Candidate> = predictions
        .iter()
        .map(|p| Candidate {
            facility: p.facility,
            travel: p.travel,
            los: p.total,
        })
        .collect();
    let chosen = argmin_facility(assigned, &candidates);
    decision(patient, t, assigned, candidates, chosen)
}

/// Diversion on lookahead LOS values (`realized[j]` for facility `j`).
pub fn decide_from_realized(patient: PatientId, t: f64, assigned: usize, travel: &[f64], realized: &[f64]) -> DiversionDecision {
    let candidates: Vec<Candidate> = travel
        .iter()
        .zip(realized)
        .enumerate()
        .map(|(facility, (&travel, &los))| Candidate { facility, travel, los })
        .collect();
    let chosen = argmin_facility(assigned, &candidates);
    decision(patient, t, assigned, candidates, chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::station::StationMap;

    fn prediction(facility: usize, total: f64) -> LosPrediction {
        LosPrediction {
            facility,
            decision_time: 0.0,
            travel: 10.0,
            per_station: StationMap([0.0; 4]),
            total,
            clamped: 0,
        }
    }

    #[test]
    fn none_keeps_assignment() {
        let d = decide_none(3, 1.0, 0, &[10.0, 20.0]);
        assert_eq!(d.chosen, 0);
        assert!(!d.diverted);
        let d = decide_none(4, 1.0, 1, &[20.0, 10.0]);
        assert_eq!(d.chosen, 1);
    }

    #[test]
    fn predicted_takes_minimum() {
        let d = decide_predicted(1, 0.0, 1, &[prediction(0, 12.0), prediction(1, 30.0)]);
        assert_eq!(d.chosen, 0);
        assert!(d.diverted);
        let d = decide_predicted(1, 0.0, 0, &[prediction(0, 12.0), prediction(1, 30.0)]);
        assert_eq!(d.chosen, 0);
        assert!(!d.diverted);
    }

    #[test]
    fn ties_prefer_assigned() {
        for assigned in 0..2 {
            let d = decide_predicted(1, 0.0, assigned, &[prediction(0, 9.905), prediction(1, 9.905)]);
            assert_eq!(d.chosen, assigned);
        }
        // Ties among non-assigned candidates go to the lowest index.
        let c = [
            Candidate { facility: 0, travel: 1.0, los: 8.0 },
            Candidate { facility: 1, travel: 1.0, los: 5.0 },
            Candidate { facility: 2, travel: 1.0, los: 5.0 },
        ];
        assert_eq!(argmin_facility(0, &c), 1);
    }

    #[test]
    fn realized_argmin() {
        let d = decide_from_realized(9, 2.0, 0, &[10.0, 20.0], &[40.0, 15.0]);
        assert_eq!(d.chosen, 1);
        assert!(d.diverted);
        assert_eq!(d.candidates[1].los, 15.0);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.key().parse::<Policy>().unwrap(), p);
        }
        assert!("random".parse::<Policy>().is_err());
    }
}
