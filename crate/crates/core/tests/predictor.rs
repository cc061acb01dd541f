use proptest::prelude::*;

use phcsim::model::{default_services, FacilitySnapshot, StationSnapshot};
use phcsim::predictor::{
    los_subsystem_at, predict_total_los, remaining_time_approx, remaining_time_exact, residual_approx, ServiceProfile,
};
use phcsim::{ArrivalTerm, RngStream, ServiceDistribution, Station, StationMap};

fn profiles() -> StationMap<ServiceProfile> {
    default_services().map(|_, d| ServiceProfile::from_distribution(d))
}

/// A snapshot the engine could produce: an idle server has an empty queue.
fn random_snapshot(rng: &mut RngStream, profiles: &StationMap<ServiceProfile>) -> FacilitySnapshot {
    let stations = StationMap::from_fn(|s| {
        let busy = rng.uniform() < 0.7;
        StationSnapshot {
            queue_len: if busy { (rng.uniform() * 8.0) as u32 } else { 0 },
            elapsed: busy.then(|| rng.uniform() * profiles[s].upper * 1.1),
            profile: profiles[s],
        }
    });
    FacilitySnapshot {
        facility: 0,
        time: 120.0,
        arrival_rate: rng.uniform() * 0.6,
        stations,
    }
}

#[test]
fn empty_facility_predicts_the_sum_of_means() {
    let p = profiles();
    let snap = FacilitySnapshot::empty(0, 0.0, &p);
    for term in [ArrivalTerm::Count, ArrivalTerm::Rate] {
        let pred = predict_total_los(&snap, 0.0, term);
        assert!((pred.total - 9.905).abs() / 9.905 < 1e-3, "{}", pred.total);
        for s in Station::ORDER {
            assert_eq!(pred.per_station[s], p[s].mean);
        }
    }
}

#[test]
fn total_is_sequential_evaluation_of_each_station() {
    let p = profiles();
    let mut rng = RngStream::new(3, "composition");
    for _ in 0..500 {
        let snap = random_snapshot(&mut rng, &p);
        let travel = 5.0 + rng.uniform() * 20.0;
        for term in [ArrivalTerm::Count, ArrivalTerm::Rate] {
            let pred = predict_total_los(&snap, travel, term);
            let mut offset = travel;
            let mut total = 0.0;
            for s in [Station::Ncd, Station::Doc, Station::Lab, Station::Pharmacy] {
                let los = los_subsystem_at(&snap.stations[s], offset, snap.arrival_rate, term);
                assert_eq!(pred.per_station[s], los);
                assert!(los >= snap.stations[s].profile.mean);
                total += los;
                offset += los;
            }
            assert_eq!(pred.total, total);
        }
    }
}

#[test]
fn extra_doctor_queue_lengthens_the_doctor_estimate() {
    let p = profiles();
    let mut rng = RngStream::new(4, "monotone");
    for _ in 0..20_000 {
        let snap = random_snapshot(&mut rng, &p);
        let travel = rng.uniform() * 30.0;
        let mut more = snap;
        more.stations[Station::Doc].queue_len += 1;
        for term in [ArrivalTerm::Count, ArrivalTerm::Rate] {
            let a = predict_total_los(&snap, travel, term);
            let b = predict_total_los(&more, travel, term);
            assert!(b.per_station[Station::Doc] >= a.per_station[Station::Doc]);
            assert_eq!(b.per_station[Station::Ncd], a.per_station[Station::Ncd]);
        }
    }
}

/// The total is not monotone everywhere: a later arrival at lab or pharmacy
/// can cross a step of the served-count floor or the residual sawtooth and
/// lower that station's estimate by more than the doctor time added.
#[test]
fn extra_doctor_queue_rarely_shortens_the_total() {
    let p = profiles();
    let mut rng = RngStream::new(4, "monotone");
    let n = 20_000;
    let mut drops = [0u32; 2];
    for _ in 0..n {
        let snap = random_snapshot(&mut rng, &p);
        let travel = rng.uniform() * 30.0;
        let mut more = snap;
        more.stations[Station::Doc].queue_len += 1;
        for (k, term) in [ArrivalTerm::Count, ArrivalTerm::Rate].into_iter().enumerate() {
            let a = predict_total_los(&snap, travel, term);
            let b = predict_total_los(&more, travel, term);
            if b.total < a.total {
                drops[k] += 1;
                let downstream = |x: &phcsim::LosPrediction| x.per_station[Station::Lab] + x.per_station[Station::Pharmacy];
                assert!(downstream(&b) < downstream(&a));
            }
        }
    }
    for d in drops {
        assert!(d > 0 && (d as f64) < 0.01 * n as f64, "{drops:?}");
    }
}

#[test]
fn exact_residual_of_exponential_is_memoryless() {
    let d = ServiceDistribution::exponential(0.5).unwrap();
    for x in [0.0, 0.3, 1.0, 4.0, 10.0, 25.0] {
        assert!((remaining_time_exact(&d, x) - 2.0).abs() < 1e-6);
    }
}

#[test]
fn exact_residual_of_uniform() {
    let d = ServiceDistribution::uniform(2.0, 5.0).unwrap();
    assert!((remaining_time_exact(&d, 0.0) - 3.5).abs() < 1e-6);
    for x in [2.0, 3.0, 4.5] {
        assert!((remaining_time_exact(&d, x) - (5.0 - x) / 2.0).abs() < 1e-6);
    }
}

#[test]
fn elapsed_beyond_upper_limit_clamps() {
    let d = ServiceDistribution::truncated_normal_default(3.451, 0.873).unwrap();
    let p = ServiceProfile::from_distribution(&d);
    let r = residual_approx(&p, p.upper + 0.5);
    assert_eq!(r.value, 0.0);
    assert!(r.clamped);
    assert!(!residual_approx(&p, p.upper).clamped);
}

fn distribution() -> impl Strategy<Value = ServiceDistribution> {
    prop_oneof![
        (0.0f64..5.0, 0.1f64..10.0).prop_map(|(a, w)| ServiceDistribution::uniform(a, a + w).unwrap()),
        (0.5f64..6.0, 0.05f64..2.0)
            .prop_map(|(mu, sigma)| ServiceDistribution::truncated_normal_default(mu, sigma).unwrap()),
        (0.05f64..3.0).prop_map(|rate| ServiceDistribution::exponential(rate).unwrap()),
    ]
}

proptest! {
    #[test]
    fn approximation_stays_within_the_support(d in distribution(), u in 0.0f64..=1.0) {
        let p = ServiceProfile::from_distribution(&d);
        let x = u * p.upper;
        let r = remaining_time_approx(&p, x);
        prop_assert!(r >= 0.0);
        prop_assert!(r <= p.upper - x + 1e-12);
    }

    #[test]
    fn exact_residual_is_non_negative_and_bounded(d in distribution(), u in 0.0f64..0.9) {
        let x = d.quantile(u.max(1e-6)).unwrap();
        let r = remaining_time_exact(&d, x);
        let (_, hi) = d.support();
        prop_assert!(r >= 0.0);
        prop_assert!(r <= hi - x + 1e-9);
    }
}
