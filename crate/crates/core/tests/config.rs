use std::path::PathBuf;

use proptest::prelude::*;

use phcsim::config::ScenarioConfig;
use phcsim::model::FacilityParams;
use phcsim::{ArrivalTerm, Policy, ServiceDistribution, Station};

fn bundled(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ScenarioConfig::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bundled_table1() {
    let c = bundled("table1.cfg");
    assert_eq!(c.facility_names(), ["PHC1", "PHC2"]);
    assert_eq!(c.facilities[0].interarrival_mean, 9.0);
    assert_eq!(c.facilities[1].interarrival_mean, 2.0);
    assert_eq!(c.travel, vec![vec![10.0, 20.0], vec![20.0, 10.0]]);
    assert_eq!((c.replications, c.horizon_days, c.warmup_days), (40, 365, 180));
    assert_eq!(c.policies, Policy::ALL.to_vec());
    let lab = &c.facilities[0].services[Station::Lab];
    assert_eq!(*lab, ServiceDistribution::truncated_normal_default(3.451, 0.873).unwrap());
}

#[test]
fn bundled_table3() {
    let c = bundled("table3.cfg");
    assert_eq!(c.facilities[0].interarrival_mean, 2.0);
    assert_eq!(c.facilities[1].interarrival_mean, 4.0);
}

#[test]
fn warmup_equal_to_horizon_is_rejected() {
    let c = bundled("table1.cfg");
    let err = c.with_overrides(&[("warmup_days", "365")]).unwrap_err();
    assert!(err.mentions("warmup_days"));
    let text = c.to_string().replace("warmup_days = 180", "warmup_days = 365");
    let err = ScenarioConfig::parse(&text).unwrap_err();
    assert!(err.mentions("warmup_days"));
    assert!(err.violations[0].line.is_some());
}

#[test]
fn non_positive_durations_are_named() {
    let c = bundled("table1.cfg");
    let text = c
        .to_string()
        .replace("rate_window = 60", "rate_window = 0")
        .replace("interarrival = 9", "interarrival = 0")
        .replace("PHC2 = 20 10", "PHC2 = 20 -1");
    let err = ScenarioConfig::parse(&text).unwrap_err();
    for field in ["rate_window", "PHC1.interarrival", "travel.PHC2"] {
        assert!(err.mentions(field), "{field}: {err}");
    }
}

fn changed_lines(a: &str, b: &str) -> Vec<String> {
    a.lines().zip(b.lines()).filter(|(x, y)| x != y).map(|(_, y)| y.to_string()).collect()
}

#[test]
fn overrides_change_exactly_the_named_lines() {
    let c = bundled("table1.cfg");
    let before = c.to_string();
    let cases: [(&str, &str, &str); 6] = [
        ("seed", "99", "seed = 99"),
        ("replications", "5", "replications = 5"),
        ("PHC2.p_ncd", "0.3", "p_ncd = 0.3"),
        ("PHC1.lab", "exponential 0.25", "lab = exponential 0.25"),
        ("travel.PHC2", "15 12", "PHC2 = 15 12"),
        ("arrival_term", "count", "arrival_term = count"),
    ];
    for (key, value, line) in cases {
        let after = c.with_overrides(&[(key, value)]).unwrap().to_string();
        assert_eq!(before.lines().count(), after.lines().count());
        assert_eq!(changed_lines(&before, &after), vec![line.to_string()], "{key}");
    }
}

fn facility(i: usize) -> impl Strategy<Value = FacilityParams> {
    (0.5f64..20.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.1f64..3.0, 0.5f64..5.0).prop_map(move |(ia, pn, pl, sd, mu)| {
        let mut f = FacilityParams::with_default_services(&format!("F{i}"), ia);
        f.p_ncd = pn;
        f.p_lab = pl;
        f.services[Station::Lab] = ServiceDistribution::truncated_normal_default(mu, sd).unwrap();
        f.services[Station::Ncd] = ServiceDistribution::exponential(1.0 / mu).unwrap();
        f
    })
}

fn config() -> impl Strategy<Value = ScenarioConfig> {
    let facilities = (facility(0), facility(1), facility(2));
    let policies = proptest::sample::subsequence(Policy::ALL.to_vec(), 1..=3);
    (
        facilities,
        policies,
        1u32..50,
        2u32..400,
        any::<u64>(),
        1.0f64..200.0,
        any::<bool>(),
        proptest::collection::vec(1.0f64..60.0, 9),
    )
        .prop_map(|((a, b, c), policies, reps, horizon, seed, window, rate, extra)| {
            let n = 3;
            let travel = (0..n)
                .map(|i| (0..n).map(|j| if i == j { extra[i * n + j] } else { extra[i * n + i] + extra[i * n + j] }).collect())
                .collect();
            ScenarioConfig {
                policies,
                replications: reps,
                horizon_days: horizon,
                warmup_days: horizon / 2,
                seed,
                rate_window: window,
                session_minutes: 360.0,
                arrival_term: if rate { ArrivalTerm::Rate } else { ArrivalTerm::Count },
                out_dir: None,
                facilities: vec![a, b, c],
                travel,
            }
        })
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(c in config()) {
        prop_assert!(c.check().is_empty(), "{:?}", c.check());
        let text = c.to_string();
        let back = ScenarioConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_string(), text);
    }
}
