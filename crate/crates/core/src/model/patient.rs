use crate::des::PatientId;
use crate::station::{Station, StationMap};

/// Timestamps of one station visit. Unset fields are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub enqueued: f64,
    pub started: f64,
    pub ended: f64,
}

impl Visit {
    pub fn wait(&self) -> f64 {
        self.started - self.enqueued
    }

    pub fn service(&self) -> f64 {
        self.ended - self.started
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patient {
    pub id: PatientId,
    pub day: u32,
    /// Facility whose catchment the patient belongs to.
    pub origin: usize,
    pub chosen: usize,
    pub decision_time: f64,
    pub needs_ncd: bool,
    pub needs_lab: bool,
    /// Arrival at the chosen facility; NaN while travelling.
    pub arrived: f64,
    pub exited: Option<f64>,
    pub visits: StationMap<Option<Visit>>,
    /// Predicted LOS at the chosen facility over all four stations; NaN if not computed.
    pub predicted_los: f64,
    /// Predicted LOS at the chosen facility along this patient's own pathway.
    pub predicted_path_los: f64,
}

impl Patient {
    pub(crate) fn new(id: PatientId, day: u32, origin: usize, t: f64, needs_ncd: bool, needs_lab: bool) -> Self {
        Self {
            id,
            day,
            origin,
            chosen: origin,
            decision_time: t,
            needs_ncd,
            needs_lab,
            arrived: f64::NAN,
            exited: None,
            visits: StationMap([None; 4]),
            predicted_los: f64::NAN,
            predicted_path_los: f64::NAN,
        }
    }

    pub fn diverted(&self) -> bool {
        self.chosen != self.origin
    }

    pub fn realized_los(&self) -> Option<f64> {
        self.exited.map(|t| t - self.arrived)
    }

    /// Stations this patient will visit, in order.
    pub fn pathway(&self) -> Vec<Station> {
        let mut path = Vec::with_capacity(4);
        if self.needs_ncd {
            path.push(Station::Ncd);
        }
        path.push(Station::Doc);
        if self.needs_lab {
            path.push(Station::Lab);
        }
        path.push(Station::Pharmacy);
        path
    }

    /// Stations actually visited, in visit order.
    pub fn visited(&self) -> Vec<Station> {
        let mut v: Vec<(f64, Station)> = self
            .visits
            .iter()
            .filter_map(|(s, v)| v.map(|v| (v.enqueued, s)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v.into_iter().map(|(_, s)| s).collect()
    }

    /// Station that follows `station` on this patient's pathway; `None` means exit.
    pub fn next_after(&self, station: Station) -> Option<Station> {
        match station {
            Station::Ncd => Some(Station::Doc),
            Station::Doc if self.needs_lab => Some(Station::Lab),
            Station::Doc | Station::Lab => Some(Station::Pharmacy),
            Station::Pharmacy => None,
        }
    }

    pub fn first_station(&self) -> Station {
        if self.needs_ncd {
            Station::Ncd
        } else {
            Station::Doc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pathways_follow_flow() {
        let full = Patient::new(1, 0, 0, 0.0, true, true);
        assert_eq!(
            full.pathway(),
            [Station::Ncd, Station::Doc, Station::Lab, Station::Pharmacy]
        );
        let short = Patient::new(2, 0, 0, 0.0, false, false);
        assert_eq!(short.pathway(), [Station::Doc, Station::Pharmacy]);
        assert_eq!(short.first_station(), Station::Doc);
        assert_eq!(short.next_after(Station::Doc), Some(Station::Pharmacy));
        assert_eq!(full.next_after(Station::Doc), Some(Station::Lab));
        assert_eq!(full.next_after(Station::Ncd), Some(Station::Doc));
        assert_eq!(full.next_after(Station::Pharmacy), None);
    }
}
