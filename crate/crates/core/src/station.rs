use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

/// A queueing subsystem inside a facility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Station {
    Ncd,
    Doc,
    Lab,
    Pharmacy,
}

impl Station {
    /// Visit order used by the predictor and by routing.
    pub const ORDER: [Station; 4] = [Station::Ncd, Station::Doc, Station::Lab, Station::Pharmacy];

    pub fn index(self) -> usize {
        match self {
            Station::Ncd => 0,
            Station::Doc => 1,
            Station::Lab => 2,
            Station::Pharmacy => 3,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Station::Ncd => "ncd",
            Station::Doc => "doc",
            Station::Lab => "lab",
            Station::Pharmacy => "pharmacy",
        }
    }

    /// Short label used in report outcome names (`rho_phar`, `w_opd`, ...).
    pub fn short(self) -> &'static str {
        match self {
            Station::Ncd => "ncd",
            Station::Doc => "doc",
            Station::Lab => "lab",
            Station::Pharmacy => "phar",
        }
    }
}

impl fmt::Display for Station {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Station {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ncd" => Ok(Station::Ncd),
            "doc" => Ok(Station::Doc),
            "lab" => Ok(Station::Lab),
            "pharmacy" => Ok(Station::Pharmacy),
            other => Err(format!("unknown station `{other}`")),
        }
    }
}

/// Fixed-size map keyed by [`Station`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StationMap<T>(pub [T; 4]);

impl<T> StationMap<T> {
    pub fn from_fn(mut f: impl FnMut(Station) -> T) -> Self {
        StationMap(Station::ORDER.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Station, &T)> {
        Station::ORDER.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(Station, &T) -> U) -> StationMap<U> {
        StationMap::from_fn(|s| f(s, &self.0[s.index()]))
    }
}

impl<T> Index<Station> for StationMap<T> {
    type Output = T;

    fn index(&self, s: Station) -> &T {
        &self.0[s.index()]
    }
}

impl<T> IndexMut<Station> for StationMap<T> {
    fn index_mut(&mut self, s: Station) -> &mut T {
        &mut self.0[s.index()]
    }
}
