//! Scenario files.
//!
//! A scenario is a line-oriented text file of `[section]` headers and
//! `key = value` lines; `#` starts a comment. See the README for the full
//! grammar. Parsing collects every violation before failing.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::diversion::Policy;
use crate::dist::ServiceDistribution;
use crate::error::{ConfigError, Violation};
use crate::metrics::Protocol;
use crate::model::{FacilityParams, NetworkParams};
use crate::predictor::ArrivalTerm;
use crate::station::Station;

const SCENARIO_KEYS: &[&str] = &[
    "policies",
    "replications",
    "horizon_days",
    "warmup_days",
    "seed",
    "rate_window",
    "session_minutes",
    "arrival_term",
    "out_dir",
];
const FACILITY_KEYS: &[&str] = &[
    "interarrival",
    "p_ncd",
    "p_lab",
    "ncd",
    "doc",
    "lab",
    "pharmacy",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub policies: Vec<Policy>,
    pub replications: u32,
    pub horizon_days: u32,
    pub warmup_days: u32,
    pub seed: u64,
    pub rate_window: f64,
    pub session_minutes: f64,
    pub arrival_term: ArrivalTerm,
    pub out_dir: Option<PathBuf>,
    pub facilities: Vec<FacilityParams>,
    /// `travel[i][j]`: minutes from catchment `i` to facility `j`.
    pub travel: Vec<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;
        raw.build()
    }

    /// Returns a copy with `key = value` assignments applied. Keys are
    /// scenario keys (`seed`), facility keys (`PHC1.p_ncd`) or travel rows
    /// (`travel.PHC1`).
    pub fn with_overrides<K, V>(&self, overrides: &[(K, V)]) -> Result<Self, ConfigError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut raw = RawConfig::parse(&self.to_string()).expect("serialized config parses");
        let mut errors = Vec::new();
        for (key, value) in overrides {
            if let Err(v) = raw.set(key.as_ref(), value.as_ref()) {
                errors.push(v);
            }
        }
        if !errors.is_empty() {
            return Err(ConfigError { violations: errors });
        }
        raw.build()
    }

    pub fn network_params(&self) -> NetworkParams {
        NetworkParams {
            facilities: self.facilities.clone(),
            travel: self.travel.clone(),
            session_minutes: self.session_minutes,
            rate_window: self.rate_window,
            arrival_term: self.arrival_term,
        }
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            replications: self.replications,
            horizon_days: self.horizon_days,
            warmup_days: self.warmup_days,
            master_seed: self.seed,
        }
    }

    pub fn facility_names(&self) -> Vec<String> {
        self.facilities.iter().map(|f| f.name.clone()).collect()
    }

    /// Hex SHA-256 of the serialized form, truncated to 16 digits.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_string().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Violated invariants; empty for a usable scenario.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |field: &str, message: String| {
            out.push(Violation {
                field: field.to_string(),
                message,
                line: None,
            })
        };
        if self.policies.is_empty() {
            bad("policies", "at least one policy is required".into());
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(p) {
                bad("policies", format!("`{p}` listed twice"));
            }
        }
        if self.replications == 0 {
            bad("replications", "must be at least 1".into());
        }
        if self.horizon_days == 0 {
            bad("horizon_days", "must be at least 1".into());
        }
        if self.warmup_days == 0 {
            bad("warmup_days", "must be at least 1".into());
        }
        if self.warmup_days >= self.horizon_days {
            bad(
                "warmup_days",
                format!(
                    "warm-up ({}) must be shorter than the horizon ({})",
                    self.warmup_days, self.horizon_days
                ),
            );
        }
        if !(self.rate_window > 0.0 && self.rate_window.is_finite()) {
            bad("rate_window", format!("must be positive, got {}", self.rate_window));
        }
        if !(self.session_minutes > 0.0 && self.session_minutes.is_finite()) {
            bad("session_minutes", format!("must be positive, got {}", self.session_minutes));
        }
        if self.facilities.is_empty() {
            bad("facility", "at least one [facility NAME] section is required".into());
        }
        for f in &self.facilities {
            let field = |k: &str| format!("{}.{k}", f.name);
            if !(f.interarrival_mean > 0.0 && f.interarrival_mean.is_finite()) {
                bad(&field("interarrival"), format!("must be positive, got {}", f.interarrival_mean));
            }
            for (key, p) in [("p_ncd", f.p_ncd), ("p_lab", f.p_lab)] {
                if !(0.0..=1.0).contains(&p) {
                    bad(&field(key), format!("must lie in [0, 1], got {p}"));
                }
            }
        }
        let n = self.facilities.len();
        if self.travel.len() == n && self.travel.iter().all(|row| row.len() == n) {
            for (i, row) in self.travel.iter().enumerate() {
                let field = format!("travel.{}", self.facilities[i].name);
                for &t in row {
                    if !(t > 0.0 && t.is_finite()) {
                        bad(&field, format!("travel times must be positive, got {t}"));
                    }
                }
                if row.iter().any(|&t| t < row[i]) {
                    bad(&field, "the home facility must be the nearest".into());
                }
            }
        } else {
            bad("travel", format!("needs a {n} x {n} matrix"));
        }
        out
    }
}

/// Canonical serialized form; `parse` reads it back to an equal value.
impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[scenario]")?;
        let policies: Vec<&str> = self.policies.iter().map(|p| p.key()).collect();
        writeln!(f, "policies = {}", policies.join(" "))?;
        writeln!(f, "replications = {}", self.replications)?;
        writeln!(f, "horizon_days = {}", self.horizon_days)?;
        writeln!(f, "warmup_days = {}", self.warmup_days)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "rate_window = {}", self.rate_window)?;
        writeln!(f, "session_minutes = {}", self.session_minutes)?;
        writeln!(f, "arrival_term = {}", self.arrival_term)?;
        if let Some(dir) = &self.out_dir {
            writeln!(f, "out_dir = {}", dir.display())?;
        }
        for fac in &self.facilities {
            writeln!(f)?;
            writeln!(f, "[facility {}]", fac.name)?;
            writeln!(f, "interarrival = {}", fac.interarrival_mean)?;
            writeln!(f, "p_ncd = {}", fac.p_ncd)?;
            writeln!(f, "p_lab = {}", fac.p_lab)?;
            for s in Station::ORDER {
                writeln!(f, "{} = {}", s.key(), fac.services[s])?;
            }
        }
        writeln!(f)?;
        writeln!(f, "[travel]")?;
        for (fac, row) in self.facilities.iter().zip(&self.travel) {
            let cells: Vec<String> = row.iter().map(|t| t.to_string()).collect();
            writeln!(f, "{} = {}", fac.name, cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SectionKind {
    Scenario,
    Facility(String),
    Travel,
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: Option<usize>,
}

#[derive(Debug, Clone)]
struct Section {
    kind: SectionKind,
    entries: Vec<Entry>,
}

impl Section {
    fn new(kind: SectionKind) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value.to_string();
                e.line = None;
            }
            None => self.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: None,
            }),
        }
    }
}

/// Syntax-level view: sections and their entries, before typing.
#[derive(Debug, Clone)]
struct RawConfig {
    sections: Vec<Section>,
}

fn violation(field: impl Into<String>, message: impl Into<String>, line: Option<usize>) -> Violation {
    Violation {
        field: field.into(),
        message: message.into(),
        line,
    }
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: Vec<Section> = Vec::new();
        let mut errors = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = Some(idx + 1);
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let Some(header) = header.strip_suffix(']') else {
                    errors.push(violation("section", format!("unterminated header `{line}`"), line_no));
                    continue;
                };
                let words: Vec<&str> = header.split_whitespace().collect();
                let kind = match words.as_slice() {
                    ["scenario"] => SectionKind::Scenario,
                    ["travel"] => SectionKind::Travel,
                    ["facility", name] if !name.contains('.') => SectionKind::Facility(name.to_string()),
                    _ => {
                        errors.push(violation("section", format!("unknown section `[{header}]`"), line_no));
                        continue;
                    }
                };
                if sections.iter().any(|s| s.kind == kind) {
                    errors.push(violation("section", format!("duplicate section `[{header}]`"), line_no));
                    continue;
                }
                sections.push(Section::new(kind));
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(violation("syntax", format!("expected `key = value`, got `{line}`"), line_no));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(section) = sections.last_mut() else {
                errors.push(violation(key, "assignment before any section header", line_no));
                continue;
            };
            let field = match &section.kind {
                SectionKind::Scenario => key.to_string(),
                SectionKind::Facility(name) => format!("{name}.{key}"),
                SectionKind::Travel => format!("travel.{key}"),
            };
            let known = match &section.kind {
                SectionKind::Scenario => SCENARIO_KEYS.contains(&key),
                SectionKind::Facility(_) => FACILITY_KEYS.contains(&key),
                SectionKind::Travel => true,
            };
            if !known {
                errors.push(violation(field, "unknown key", line_no));
            } else if section.get(key).is_some() {
                errors.push(violation(field, "duplicate key", line_no));
            } else {
                section.entries.push(Entry {
                    key: key.to_string(),
                    value: value.to_string(),
                    line: line_no,
                });
            }
        }
        if errors.is_empty() {
            Ok(Self { sections })
        } else {
            Err(ConfigError { violations: errors })
        }
    }

    fn section_mut(&mut self, kind: SectionKind) -> &mut Section {
        if let Some(i) = self.sections.iter().position(|s| s.kind == kind) {
            return &mut self.sections[i];
        }
        self.sections.push(Section::new(kind));
        self.sections.last_mut().expect("just pushed")
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), Violation> {
        let unknown = || violation(key, "unknown key", None);
        match key.split_once('.') {
            None if SCENARIO_KEYS.contains(&key) => {
                self.section_mut(SectionKind::Scenario).set(key, value);
            }
            None => return Err(unknown()),
            Some(("travel", name)) => {
                if !self.has_facility(name) {
                    return Err(violation(key, format!("no facility named `{name}`"), None));
                }
                self.section_mut(SectionKind::Travel).set(name, value);
            }
            Some((name, sub)) => {
                if !FACILITY_KEYS.contains(&sub) {
                    return Err(unknown());
                }
                if !self.has_facility(name) {
                    return Err(violation(key, format!("no facility named `{name}`"), None));
                }
                self.section_mut(SectionKind::Facility(name.to_string())).set(sub, value);
            }
        }
        Ok(())
    }

    fn has_facility(&self, name: &str) -> bool {
        self.sections
            .iter()
            .any(|s| matches!(&s.kind, SectionKind::Facility(n) if n == name))
    }

    fn build(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut errors = Vec::new();
        let empty = Section::new(SectionKind::Scenario);
        let scenario = self
            .sections
            .iter()
            .find(|s| s.kind == SectionKind::Scenario)
            .unwrap_or(&empty);

        let mut read = Reader {
            errors: &mut errors,
            prefix: String::new(),
        };
        let policies = read
            .field(scenario, "policies", |v| {
                v.split_whitespace()
                    .map(|w| w.parse::<Policy>())
                    .collect::<Result<Vec<_>, _>>()
            })
            .unwrap_or_else(|| Policy::ALL.to_vec());
        let replications = read.number(scenario, "replications").unwrap_or(40);
        let horizon_days = read.number(scenario, "horizon_days").unwrap_or(365);
        let warmup_days = read.number(scenario, "warmup_days").unwrap_or(180);
        let seed = read.number(scenario, "seed").unwrap_or(1);
        let rate_window = read.number(scenario, "rate_window").unwrap_or(60.0);
        let session_minutes = read.number(scenario, "session_minutes").unwrap_or(360.0);
        let arrival_term = read
            .field(scenario, "arrival_term", |v| v.parse::<ArrivalTerm>())
            .unwrap_or_default();
        let out_dir = scenario.get("out_dir").map(|e| PathBuf::from(&e.value));

        let mut facilities = Vec::new();
        for section in &self.sections {
            let SectionKind::Facility(name) = &section.kind else {
                continue;
            };
            let mut read = Reader {
                errors: &mut errors,
                prefix: format!("{name}."),
            };
            let interarrival = read.required(section, "interarrival");
            let p_ncd = read.number(section, "p_ncd").unwrap_or(0.5);
            let p_lab = read.number(section, "p_lab").unwrap_or(0.5);
            let mut services = FacilityParams::with_default_services(name, 1.0).services;
            for s in Station::ORDER {
                if let Some(d) = read.field(section, s.key(), |v| v.parse::<ServiceDistribution>()) {
                    services[s] = d;
                }
            }
            facilities.push(FacilityParams {
                name: name.clone(),
                interarrival_mean: interarrival.unwrap_or(f64::NAN),
                services,
                p_ncd,
                p_lab,
            });
        }

        let mut travel = Vec::new();
        match self.sections.iter().find(|s| s.kind == SectionKind::Travel) {
            None => errors.push(violation("travel", "missing [travel] section", None)),
            Some(section) => {
                let names: HashMap<&str, usize> = facilities
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (f.name.as_str(), i))
                    .collect();
                for e in &section.entries {
                    if !names.contains_key(e.key.as_str()) {
                        errors.push(violation(
                            format!("travel.{}", e.key),
                            "no facility with this name",
                            e.line,
                        ));
                    }
                }
                let mut read = Reader {
                    errors: &mut errors,
                    prefix: "travel.".into(),
                };
                for f in &facilities {
                    let row = read.field(section, &f.name, |v| {
                        v.split_whitespace().map(|w| w.parse::<f64>()).collect::<Result<Vec<_>, _>>()
                    });
                    match row {
                        Some(r) => travel.push(r),
                        None if section.get(&f.name).is_none() => {
                            read.errors.push(violation(format!("travel.{}", f.name), "missing field", None));
                        }
                        None => {}
                    }
                }
            }
        }

        if !errors.is_empty() {
            return Err(ConfigError { violations: errors });
        }
        let config = ScenarioConfig {
            policies,
            replications,
            horizon_days,
            warmup_days,
            seed,
            rate_window,
            session_minutes,
            arrival_term,
            out_dir,
            facilities,
            travel,
        };
        let mut violations = config.check();
        for v in &mut violations {
            v.line = self.line_of(&v.field);
        }
        if violations.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError { violations })
        }
    }

    fn line_of(&self, field: &str) -> Option<usize> {
        let (kind, key) = match field.split_once('.') {
            None => (SectionKind::Scenario, field),
            Some(("travel", name)) => (SectionKind::Travel, name),
            Some((name, key)) => (SectionKind::Facility(name.to_string()), key),
        };
        self.sections
            .iter()
            .find(|s| s.kind == kind)
            .and_then(|s| s.get(key))
            .and_then(|e| e.line)
    }
}

struct Reader<'a> {
    errors: &'a mut Vec<Violation>,
    prefix: String,
}

impl Reader<'_> {
    fn field<T, E: fmt::Display>(
        &mut self,
        section: &Section,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, E>,
    ) -> Option<T> {
        let entry = section.get(key)?;
        match parse(&entry.value) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(violation(
                    format!("{}{key}", self.prefix),
                    format!("cannot read `{}`: {e}", entry.value),
                    entry.line,
                ));
                None
            }
        }
    }

    fn number<T>(&mut self, section: &Section, key: &str) -> Option<T>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        self.field(section, key, |v| v.parse::<T>())
    }

    fn required(&mut self, section: &Section, key: &str) -> Option<f64> {
        if section.get(key).is_none() {
            self.errors
                .push(violation(format!("{}{key}", self.prefix), "missing field", None));
            return None;
        }
        self.number(section, key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "\
[scenario]
policies = none predicted
replications = 3
horizon_days = 20
warmup_days = 5
seed = 42

[facility A]
interarrival = 9   # minutes
[facility B]
interarrival = 2
p_ncd = 0.8
lab = truncnormal 3.451 0.873

[travel]
A = 10 20
B = 20 10
";

    #[test]
    fn parses_and_defaults() {
        let c = ScenarioConfig::parse(TWO).unwrap();
        assert_eq!(c.policies, vec![Policy::None, Policy::Predicted]);
        assert_eq!((c.replications, c.horizon_days, c.warmup_days, c.seed), (3, 20, 5, 42));
        assert_eq!(c.rate_window, 60.0);
        assert_eq!(c.arrival_term, ArrivalTerm::Count);
        assert_eq!(c.facilities[0].interarrival_mean, 9.0);
        assert_eq!(c.facilities[1].p_ncd, 0.8);
        assert_eq!(c.facilities[1].p_lab, 0.5);
        assert_eq!(c.travel, vec![vec![10.0, 20.0], vec![20.0, 10.0]]);
        assert_eq!(c.network_params().facilities[1].services, crate::model::default_services());
    }

    #[test]
    fn serialization_round_trips() {
        let c = ScenarioConfig::parse(TWO).unwrap();
        let again = ScenarioConfig::parse(&c.to_string()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_string(), c.to_string());
    }

    #[test]
    fn collects_every_violation() {
        let text = TWO
            .replace("warmup_days = 5", "warmup_days = 20")
            .replace("interarrival = 2", "interarrival = -1")
            .replace("p_ncd = 0.8", "p_ncd = 1.8\nbogus = 1");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        assert!(err.mentions("B.bogus"), "{err}");
        let err = ScenarioConfig::parse(&text.replace("bogus = 1\n", "")).unwrap_err();
        assert!(err.mentions("warmup_days"), "{err}");
        assert!(err.mentions("B.interarrival"), "{err}");
        assert!(err.mentions("B.p_ncd"), "{err}");
        assert_eq!(err.violations.len(), 3);
        assert_eq!(err.violations[0].line, Some(5));
    }

    #[test]
    fn missing_fields_are_named() {
        let err = ScenarioConfig::parse("[scenario]\n[facility A]\n").unwrap_err();
        assert!(err.mentions("A.interarrival"));
        assert!(err.mentions("travel"));
        let err = ScenarioConfig::parse(&TWO.replace("B = 20 10\n", "")).unwrap_err();
        assert!(err.mentions("travel.B"));
    }

    #[test]
    fn travel_must_favour_home() {
        let err = ScenarioConfig::parse(&TWO.replace("B = 20 10", "B = 5 10")).unwrap_err();
        assert!(err.mentions("travel.B"));
        let err = ScenarioConfig::parse(&TWO.replace("A = 10 20", "A = 10")).unwrap_err();
        assert!(err.mentions("travel"));
    }

    #[test]
    fn syntax_errors() {
        for bad in ["seed = 1\n", "[scenario\n", "[nope]\n", "[scenario]\njunk\n", "[scenario]\n[scenario]\n"] {
            assert!(ScenarioConfig::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn overrides_touch_only_named_keys() {
        let c = ScenarioConfig::parse(TWO).unwrap();
        let o = c
            .with_overrides(&[("seed", "7"), ("B.interarrival", "3"), ("travel.A", "11 20")])
            .unwrap();
        assert_eq!(o.seed, 7);
        assert_eq!(o.facilities[1].interarrival_mean, 3.0);
        assert_eq!(o.travel[0], vec![11.0, 20.0]);
        assert_eq!(o.facilities[0], c.facilities[0]);
        assert!(c.with_overrides(&[("C.p_lab", "0.1")]).unwrap_err().mentions("C.p_lab"));
        assert!(c.with_overrides(&[("colour", "red")]).is_err());
        assert!(c.with_overrides(&[("warmup_days", "30")]).unwrap_err().mentions("warmup_days"));
    }

    #[test]
    fn digest_tracks_content() {
        let c = ScenarioConfig::parse(TWO).unwrap();
        assert_eq!(c.digest().len(), 16);
        assert_eq!(c.digest(), c.clone().digest());
        assert_ne!(c.digest(), c.with_overrides(&[("seed", "8")]).unwrap().digest());
    }
}
