//! Self-checks against analytic results, run by `phcsim validate`.

use std::fmt;
use std::sync::Arc;

use crate::des::{EventCalendar, Subsystem};
use crate::dist::{RngStream, ServiceDistribution};
use crate::diversion::Policy;
use crate::error::SimError;
use crate::model::{default_services, FacilityParams, Network, NetworkOptions, NetworkParams};
use crate::predictor::{remaining_time_approx, remaining_time_exact, ServiceProfile};
use crate::station::{Station, StationMap};

/// Tolerances and sample sizes. Relative tolerances are fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    pub pk_customers: u64,
    pub pk_arrival_rate: f64,
    pub pk_tolerance: f64,
    pub little_days: u32,
    pub little_interarrival: f64,
    pub little_tolerance: f64,
    pub quantile_tolerance: f64,
    pub gap_points: usize,
    /// The mean absolute residual gap must stay below this multiple of the
    /// distribution mean.
    pub gap_ratio: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            pk_customers: 1_000_000,
            pk_arrival_rate: 0.2,
            pk_tolerance: 0.03,
            little_days: 200,
            little_interarrival: 9.0,
            little_tolerance: 0.02,
            quantile_tolerance: 1e-9,
            gap_points: 200,
            gap_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Approximate versus exact residual time over one distribution's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub station: Station,
    pub distribution: String,
    pub mean: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub gaps: Vec<GapRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "residual approximation vs exact conditional residual")?;
        writeln!(
            f,
            "{:<9} {:<42} {:>8} {:>10} {:>10}",
            "station", "distribution", "mean", "mean|gap|", "max|gap|"
        )?;
        for g in &self.gaps {
            writeln!(
                f,
                "{:<9} {:<42} {:>8.4} {:>10.4} {:>10.4}",
                g.station.key(),
                g.distribution,
                g.mean,
                g.mean_gap,
                g.max_gap
            )?;
        }
        writeln!(f)?;
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

pub fn run_all(opts: &ValidateOptions) -> Result<ValidationReport, SimError> {
    let services = default_services();
    let gaps: Vec<GapRow> = Station::ORDER
        .iter()
        .map(|&s| residual_gap(s, &services[s], opts.gap_points))
        .collect();
    let mut checks = vec![pk_check(opts)?, little_check(opts)?, quantile_check(opts)];
    for g in &gaps {
        checks.push(CheckResult {
            name: format!("residual gap {}", g.station.key()),
            passed: g.mean_gap < opts.gap_ratio * g.mean,
            detail: format!(
                "mean |gap| {:.4} vs limit {:.4}",
                g.mean_gap,
                opts.gap_ratio * g.mean
            ),
        });
    }
    Ok(ValidationReport { checks, gaps })
}

/// Pollaczek-Khinchine mean queue wait `lambda E[S^2] / (2 (1 - rho))`.
pub fn pk_wait(arrival_rate: f64, dist: &ServiceDistribution) -> f64 {
    let rho = arrival_rate * dist.mean();
    arrival_rate * dist.second_moment() / (2.0 * (1.0 - rho))
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Arrival,
    Completion,
}

/// Mean queue wait of one M/G/1 station fed `customers` Poisson arrivals,
/// simulated on the same calendar and subsystem types as the network.
pub fn simulate_mg1(
    arrival_rate: f64,
    dist: &ServiceDistribution,
    customers: u64,
    seed: u64,
) -> Result<f64, SimError> {
    let mut arrivals = RngStream::new(seed, "mg1.arrivals");
    let mut station = Subsystem::new(Station::Lab, *dist, RngStream::new(seed, "mg1.service"));
    let mut calendar = EventCalendar::new();
    let mean_gap = 1.0 / arrival_rate;
    calendar.schedule(arrivals.exponential(mean_gap), Event::Arrival)?;
    let mut generated = 0;
    while let Some((now, event)) = calendar.pop() {
        match event {
            Event::Arrival => {
                generated += 1;
                if let Some(start) = station.enter(generated, now)? {
                    calendar.schedule(start.completes_at, Event::Completion)?;
                }
                if generated < customers {
                    calendar.schedule(now + arrivals.exponential(mean_gap), Event::Arrival)?;
                }
            }
            Event::Completion => {
                if let (_, Some(next)) = station.complete(now)? {
                    calendar.schedule(next.completes_at, Event::Completion)?;
                }
            }
        }
    }
    Ok(station.waits().mean())
}

fn pk_check(opts: &ValidateOptions) -> Result<CheckResult, SimError> {
    let lab = &default_services()[Station::Lab];
    let analytic = pk_wait(opts.pk_arrival_rate, lab);
    let simulated = simulate_mg1(opts.pk_arrival_rate, lab, opts.pk_customers, opts.seed)?;
    let rel = (simulated - analytic).abs() / analytic;
    Ok(CheckResult {
        name: "M/G/1 mean wait".into(),
        passed: rel <= opts.pk_tolerance,
        detail: format!(
            "simulated {simulated:.4} vs analytic {analytic:.4} over {} customers, off by {:.2}% (limit {:.2}%)",
            opts.pk_customers,
            rel * 100.0,
            opts.pk_tolerance * 100.0
        ),
    })
}

/// Per station: time-average number waiting, arrival rate, and mean wait,
/// pooled over all simulated sessions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LittleSample {
    pub queue_len: f64,
    pub arrival_rate: f64,
    pub wait: f64,
}

impl LittleSample {
    /// `|L - lambda W| / (lambda W)`; zero for a station nobody visited.
    pub fn relative_error(&self) -> f64 {
        let rhs = self.arrival_rate * self.wait;
        if rhs == 0.0 {
            return self.queue_len.abs();
        }
        (self.queue_len - rhs).abs() / rhs
    }
}

pub fn little_samples(
    interarrival: f64,
    days: u32,
    seed: u64,
) -> Result<StationMap<LittleSample>, SimError> {
    let params = Arc::new(NetworkParams::single(
        FacilityParams::with_default_services("PHC", interarrival),
        10.0,
    ));
    let options = NetworkOptions {
        record_predictions: false,
        ..NetworkOptions::default()
    };
    let mut net = Network::new(params, Policy::None, seed, options);
    let mut elapsed = 0.0;
    let mut integral = StationMap([0.0; 4]);
    let mut entered = StationMap([0u64; 4]);
    let mut waits = StationMap::from_fn(|_| crate::des::StatAccumulator::new());
    for _ in 0..days {
        let day = net.run_day()?;
        elapsed += day.end_time;
        let f = &day.facilities[0];
        for s in Station::ORDER {
            integral[s] += f.queue_integral[s];
            entered[s] += f.entered[s];
            waits[s].merge(&f.waits[s]);
        }
    }
    Ok(StationMap::from_fn(|s| LittleSample {
        queue_len: integral[s] / elapsed,
        arrival_rate: entered[s] as f64 / elapsed,
        wait: waits[s].mean(),
    }))
}

fn little_check(opts: &ValidateOptions) -> Result<CheckResult, SimError> {
    let samples = little_samples(opts.little_interarrival, opts.little_days, opts.seed)?;
    let worst = Station::ORDER
        .iter()
        .map(|&s| (s, samples[s].relative_error()))
        .fold((Station::Ncd, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let parts: Vec<String> = Station::ORDER
        .iter()
        .map(|&s| {
            let x = &samples[s];
            format!("{} L={:.4} lW={:.4}", s.key(), x.queue_len, x.arrival_rate * x.wait)
        })
        .collect();
    Ok(CheckResult {
        name: "Little's law per station".into(),
        passed: worst.1 <= opts.little_tolerance,
        detail: format!(
            "{}; worst {} off by {:.3}% (limit {:.2}%)",
            parts.join(", "),
            worst.0.key(),
            worst.1 * 100.0,
            opts.little_tolerance * 100.0
        ),
    })
}

fn quantile_check(opts: &ValidateOptions) -> CheckResult {
    let mut dists: Vec<ServiceDistribution> = default_services().0.to_vec();
    dists.push(ServiceDistribution::exponential(1.0 / 9.0).expect("valid"));
    let mut worst = 0.0f64;
    for d in &dists {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let q = d.quantile(p).expect("p inside (0, 1)");
            worst = worst.max((d.cdf(q) - p).abs());
        }
    }
    CheckResult {
        name: "quantile round trip".into(),
        passed: worst <= opts.quantile_tolerance,
        detail: format!(
            "max |cdf(quantile(p)) - p| = {worst:.2e} over {} distributions (limit {:.0e})",
            dists.len(),
            opts.quantile_tolerance
        ),
    }
}

/// Compares the quantile-based residual with the conditional expectation on
/// an evenly spaced grid over `[0, q95]`.
pub fn residual_gap(station: Station, dist: &ServiceDistribution, points: usize) -> GapRow {
    let profile = ServiceProfile::from_distribution(dist);
    let top = dist.quantile(0.95).expect("valid probability");
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for i in 0..points {
        let x = top * i as f64 / (points - 1).max(1) as f64;
        let gap = (remaining_time_approx(&profile, x) - remaining_time_exact(dist, x)).abs();
        sum += gap;
        max = max.max(gap);
    }
    GapRow {
        station,
        distribution: dist.to_string(),
        mean: dist.mean(),
        mean_gap: sum / points as f64,
        max_gap: max,
    }
}
