use phcsim_web::{los_vs_travel, residual_curve, simulate, station_order};

#[test]
fn residual_curve_of_uniform_matches_closed_form() {
    let v = residual_curve("uniform 2 5", 31).unwrap();
    assert_eq!(v.len(), 93);
    for t in v.chunks(3) {
        let (x, approx, exact) = (t[0], t[1], t[2]);
        assert!((0.0..=5.0 + 1e-12).contains(&x));
        assert!(approx >= 0.0);
        let want = if x <= 2.0 { 3.5 - x } else { (5.0 - x) / 2.0 };
        assert!((exact - want).abs() < 1e-6, "x {x}: {exact} vs {want}");
    }
    assert!(residual_curve("lognormal 1 2", 10).is_err());
    assert!(residual_curve("uniform 2 5", 1).is_err());
}

#[test]
fn empty_facility_los_is_flat_in_travel() {
    let v = los_vs_travel(vec![0; 4], vec![-1.0; 4], 0.0, "count", 30.0, 7).unwrap();
    let first = v[1];
    assert!((first - 9.905).abs() < 0.01, "{first}");
    for p in v.chunks(2) {
        assert_eq!(p[1], first);
    }
}

#[test]
fn queued_facility_clears_with_travel() {
    let v = los_vs_travel(vec![0, 6, 0, 0], vec![-1.0, 0.2, -1.0, -1.0], 0.0, "rate", 10.0, 11).unwrap();
    assert!(v[1] > v[v.len() - 1]);
    assert!(los_vs_travel(vec![0; 3], vec![0.0; 3], 0.1, "count", 10.0, 5).is_err());
    assert!(los_vs_travel(vec![0; 4], vec![0.0; 4], 0.1, "sometimes", 10.0, 5).is_err());
}

#[test]
fn simulate_is_deterministic_and_reports_beta() {
    let a = simulate(9.0, 2.0, 0.84, "predicted", "rate", 10, 3).unwrap();
    assert_eq!(a, simulate(9.0, 2.0, 0.84, "predicted", "rate", 10, 3).unwrap());
    assert!(a.lines().any(|l| l.starts_with("PHC1.los,")));
    let beta: f64 = a.lines().find_map(|l| l.strip_prefix("beta,")).unwrap().parse().unwrap();
    assert!(beta > 0.0);
    let none = simulate(9.0, 2.0, 0.84, "none", "count", 10, 3).unwrap();
    assert!(none.lines().any(|l| l == "beta,0.000"));
    assert!(simulate(9.0, 2.0, 1.5, "none", "count", 10, 3).is_err());
    assert!(simulate(9.0, 2.0, 0.5, "always", "count", 10, 3).is_err());
}

#[test]
fn station_order_names_the_array_slots() {
    assert_eq!(station_order(), "ncd doc lab pharmacy");
}
