//! Service-time and interarrival distributions, and named random streams.
//!
//! All durations are minutes. A [`ServiceDistribution`] is validated when it
//! is built, so sampling and moment queries never fail.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::DistError;

/// A reproducible random stream identified by `(seed, label)`.
///
/// The ChaCha key is the SHA-256 digest of the seed and label, so streams with
/// different labels under one master seed are independent and a given pair
/// always replays the same sequence.
#[derive(Clone)]
pub struct RngStream {
    label: Arc<str>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Self {
            label: Arc::from(label),
            seed,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Exponential draw with the given mean.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        let e: f64 = self.rng.sample(Exp1);
        e * mean
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Parameters of a service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionKind {
    Uniform { low: f64, high: f64 },
    /// Normal(`mu`, `sigma`²) restricted to `[lower, upper]`.
    TruncatedNormal { mu: f64, sigma: f64, lower: f64, upper: f64 },
    Exponential { rate: f64 },
}

/// A validated service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDistribution {
    kind: DistributionKind,
    // Truncated normal only: parent cdf at the bounds and their difference.
    cdf_lower: f64,
    mass: f64,
}

impl ServiceDistribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self, DistError> {
        if !(low.is_finite() && high.is_finite()) || low < 0.0 || low >= high {
            return Err(DistError::InvalidParameter(format!(
                "uniform needs 0 <= a < b, got a={low}, b={high}"
            )));
        }
        Ok(Self::wrap(DistributionKind::Uniform { low, high }))
    }

    /// Truncated normal with explicit bounds.
    pub fn truncated_normal(mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self, DistError> {
        let finite = mu.is_finite() && sigma.is_finite() && lower.is_finite() && upper.is_finite();
        if !finite || sigma <= 0.0 || lower < 0.0 || lower >= upper {
            return Err(DistError::InvalidParameter(format!(
                "truncated normal needs sigma > 0 and 0 <= lower < upper, got mu={mu}, sigma={sigma}, lower={lower}, upper={upper}"
            )));
        }
        let cdf_lower = std_normal_cdf((lower - mu) / sigma);
        let mass = std_normal_cdf((upper - mu) / sigma) - cdf_lower;
        if mass < 1e-12 {
            return Err(DistError::InvalidParameter(format!(
                "truncation window [{lower}, {upper}] holds no probability mass for N({mu}, {sigma}^2)"
            )));
        }
        Ok(Self {
            kind: DistributionKind::TruncatedNormal { mu, sigma, lower, upper },
            cdf_lower,
            mass,
        })
    }

    /// Truncated normal on `[0, mu + 6 sigma]`.
    pub fn truncated_normal_default(mu: f64, sigma: f64) -> Result<Self, DistError> {
        Self::truncated_normal(mu, sigma, 0.0, mu + 6.0 * sigma)
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(DistError::InvalidParameter(format!(
                "exponential needs rate > 0, got {rate}"
            )));
        }
        Ok(Self::wrap(DistributionKind::Exponential { rate }))
    }

    fn wrap(kind: DistributionKind) -> Self {
        Self {
            kind,
            cdf_lower: 0.0,
            mass: 1.0,
        }
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Support as `(lower, upper)`; `upper` is infinite for the exponential.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            DistributionKind::Uniform { low, high } => (low, high),
            DistributionKind::TruncatedNormal { lower, upper, .. } => (lower, upper),
            DistributionKind::Exponential { .. } => (0.0, f64::INFINITY),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self.kind {
            DistributionKind::Uniform { low, high } => low + (high - low) * rng.uniform(),
            DistributionKind::TruncatedNormal { mu, sigma, lower, upper } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let x = mu + sigma * z;
                if (lower..=upper).contains(&x) {
                    break x;
                }
            },
            DistributionKind::Exponential { rate } => rng.exponential(1.0 / rate),
        }
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            DistributionKind::Uniform { low, high } => 0.5 * (low + high),
            DistributionKind::TruncatedNormal { mu, sigma, lower, upper } => {
                let (a, b) = ((lower - mu) / sigma, (upper - mu) / sigma);
                mu + sigma * (std_normal_pdf(a) - std_normal_pdf(b)) / self.mass
            }
            DistributionKind::Exponential { rate } => 1.0 / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match self.kind {
            DistributionKind::Uniform { low, high } => (high - low).powi(2) / 12.0,
            DistributionKind::TruncatedNormal { mu, sigma, lower, upper } => {
                let (a, b) = ((lower - mu) / sigma, (upper - mu) / sigma);
                let (pa, pb) = (std_normal_pdf(a), std_normal_pdf(b));
                let shift = (pa - pb) / self.mass;
                sigma * sigma * (1.0 + (a * pa - b * pb) / self.mass - shift * shift)
            }
            DistributionKind::Exponential { rate } => 1.0 / (rate * rate),
        }
    }

    /// E[S²].
    pub fn second_moment(&self) -> f64 {
        let m = self.mean();
        self.variance() + m * m
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self.kind {
            DistributionKind::Uniform { low, high } => ((t - low) / (high - low)).clamp(0.0, 1.0),
            DistributionKind::TruncatedNormal { mu, sigma, lower, upper } => {
                if t <= lower {
                    0.0
                } else if t >= upper {
                    1.0
                } else {
                    ((std_normal_cdf((t - mu) / sigma) - self.cdf_lower) / self.mass).clamp(0.0, 1.0)
                }
            }
            DistributionKind::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self.kind {
            DistributionKind::Uniform { low, high } => {
                if (low..=high).contains(&t) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            DistributionKind::TruncatedNormal { mu, sigma, lower, upper } => {
                if (lower..=upper).contains(&t) {
                    std_normal_pdf((t - mu) / sigma) / (sigma * self.mass)
                } else {
                    0.0
                }
            }
            DistributionKind::Exponential { rate } => {
                if t >= 0.0 {
                    rate * (-rate * t).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse cdf. The truncated normal is inverted by bisection on [`cdf`](Self::cdf).
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::ProbabilityOutOfRange(p));
        }
        Ok(match self.kind {
            DistributionKind::Uniform { low, high } => low + p * (high - low),
            DistributionKind::Exponential { rate } => -(-p).ln_1p() / rate,
            DistributionKind::TruncatedNormal { lower, upper, .. } => {
                let (mut lo, mut hi) = (lower, upper);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        })
    }

    /// Upper limit `b` of the residual-time approximation: the support bound
    /// for the uniform, the 0.99 quantile otherwise.
    pub fn residual_upper_limit(&self) -> f64 {
        match self.kind {
            DistributionKind::Uniform { high, .. } => high,
            _ => self.quantile(0.99).expect("0.99 is a valid probability"),
        }
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DistributionKind::Uniform { low, high } => write!(f, "uniform {low} {high}"),
            DistributionKind::TruncatedNormal { mu, sigma, lower, upper } => {
                write!(f, "truncnormal {mu} {sigma} {lower} {upper}")
            }
            DistributionKind::Exponential { rate } => write!(f, "exponential {rate}"),
        }
    }
}

/// Parses the form written by `Display`: `uniform a b`, `exponential rate`,
/// `truncnormal mu sigma` (bounds `[0, mu + 6 sigma]`) or
/// `truncnormal mu sigma lower upper`.
impl FromStr for ServiceDistribution {
    type Err = DistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let family = words.next().unwrap_or("");
        let nums = words
            .map(|w| {
                w.parse::<f64>()
                    .map_err(|_| DistError::InvalidParameter(format!("`{w}` is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |n: &[usize]| {
            if n.contains(&nums.len()) {
                Ok(())
            } else {
                Err(DistError::InvalidParameter(format!(
                    "{family} takes {} parameter(s), got {}",
                    n.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" or "),
                    nums.len()
                )))
            }
        };
        match family {
            "uniform" => {
                arity(&[2])?;
                Self::uniform(nums[0], nums[1])
            }
            "exponential" => {
                arity(&[1])?;
                Self::exponential(nums[0])
            }
            "truncnormal" => {
                arity(&[2, 4])?;
                if nums.len() == 2 {
                    Self::truncated_normal_default(nums[0], nums[1])
                } else {
                    Self::truncated_normal(nums[0], nums[1], nums[2], nums[3])
                }
            }
            other => Err(DistError::InvalidParameter(format!(
                "unknown distribution `{other}` (expected uniform, truncnormal or exponential)"
            ))),
        }
    }
}

pub fn std_normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_dists() -> Vec<ServiceDistribution> {
        vec![
            ServiceDistribution::uniform(2.0, 5.0).unwrap(),
            ServiceDistribution::truncated_normal_default(0.87, 0.21).unwrap(),
            ServiceDistribution::truncated_normal_default(3.451, 0.873).unwrap(),
            ServiceDistribution::truncated_normal_default(2.084, 0.723).unwrap(),
            ServiceDistribution::exponential(1.0 / 9.0).unwrap(),
        ]
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ServiceDistribution::uniform(5.0, 2.0).is_err());
        assert!(ServiceDistribution::uniform(3.0, 3.0).is_err());
        assert!(ServiceDistribution::truncated_normal(1.0, 0.0, 0.0, 2.0).is_err());
        assert!(ServiceDistribution::truncated_normal(1.0, 1.0, -1.0, 2.0).is_err());
        assert!(ServiceDistribution::truncated_normal(1.0, 1.0, 2.0, 2.0).is_err());
        assert!(ServiceDistribution::exponential(0.0).is_err());
        assert!(ServiceDistribution::exponential(f64::NAN).is_err());
    }

    #[test]
    fn closed_form_means() {
        assert_eq!(ServiceDistribution::uniform(2.0, 5.0).unwrap().mean(), 3.5);
        assert_eq!(ServiceDistribution::exponential(0.5).unwrap().mean(), 2.0);
    }

    #[test]
    fn uniform_cdf_and_quantiles() {
        let u = ServiceDistribution::uniform(2.0, 5.0).unwrap();
        assert_eq!(u.cdf(2.0), 0.0);
        assert_eq!(u.cdf(3.5), 0.5);
        assert_eq!(u.quantile(0.5).unwrap(), 3.5);
        assert_eq!(u.quantile(0.75).unwrap(), 4.25);
        assert_eq!(u.residual_upper_limit(), 5.0);
    }

    #[test]
    fn quantile_domain() {
        let u = ServiceDistribution::uniform(2.0, 5.0).unwrap();
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(u.quantile(p), Err(DistError::ProbabilityOutOfRange(_))));
        }
    }

    #[test]
    fn quantile_round_trip_grid() {
        for d in table_dists() {
            for i in 1..=99 {
                let p = i as f64 / 100.0;
                let q = d.quantile(p).unwrap();
                assert!((d.cdf(q) - p).abs() < 1e-9, "{d} p={p}");
            }
            let q = d.quantile(0.3).unwrap();
            assert!((d.cdf(q) - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_on_grid() {
        for d in table_dists() {
            let (lo, hi) = d.support();
            let hi = if hi.is_finite() { hi } else { 100.0 };
            let mut prev = -1.0;
            for i in 0..=500 {
                let t = lo - 1.0 + (hi - lo + 2.0) * i as f64 / 500.0;
                let c = d.cdf(t);
                assert!((0.0..=1.0).contains(&c));
                assert!(c >= prev);
                prev = c;
            }
            let mut prev_q = f64::NEG_INFINITY;
            for i in 1..1000 {
                let q = d.quantile(i as f64 / 1000.0).unwrap();
                assert!(q >= prev_q);
                prev_q = q;
            }
        }
    }

    #[test]
    fn samples_stay_in_support() {
        let mut rng = RngStream::new(11, "support");
        let tn = ServiceDistribution::truncated_normal_default(0.87, 0.21).unwrap();
        let (_, b) = tn.support();
        for _ in 0..100_000 {
            let x = tn.sample(&mut rng);
            assert!((0.0..=b).contains(&x));
        }
        let u = ServiceDistribution::uniform(2.0, 5.0).unwrap();
        for _ in 0..100_000 {
            assert!((2.0..=5.0).contains(&u.sample(&mut rng)));
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let d = ServiceDistribution::exponential(1.0 / 9.0).unwrap();
        let mut rng = RngStream::new(3, "exp-mean");
        let n = 1_000_000;
        let m = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m - 9.0).abs() < 0.05, "mean {m}");
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let mut a = RngStream::new(42, "phc1.arrivals");
        let mut b = RngStream::new(42, "phc1.arrivals");
        let mut c = RngStream::new(42, "phc2.arrivals");
        let xa: Vec<u64> = (0..10_000).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..10_000).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..10_000).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_eq!(a.label(), "phc1.arrivals");
    }

    #[test]
    fn truncation_keeps_quoted_moments_close() {
        // Pharmacy sits nearest to zero (2.9 sd); its mean shifts by about 0.2%.
        let d = ServiceDistribution::truncated_normal_default(2.084, 0.723).unwrap();
        assert!((d.mean() / 2.084 - 1.0).abs() < 0.003);
        assert!((d.variance().sqrt() / 0.723 - 1.0).abs() < 0.01);
        let doc = ServiceDistribution::truncated_normal_default(0.87, 0.21).unwrap();
        assert!((doc.mean() / 0.87 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn parse_round_trips_display() {
        for d in [
            ServiceDistribution::uniform(2.0, 5.0).unwrap(),
            ServiceDistribution::truncated_normal_default(0.87, 0.21).unwrap(),
            ServiceDistribution::truncated_normal(1.5, 0.3, 0.2, 4.0).unwrap(),
            ServiceDistribution::exponential(1.0 / 9.0).unwrap(),
        ] {
            assert_eq!(d.to_string().parse::<ServiceDistribution>().unwrap(), d);
        }
        let short: ServiceDistribution = "truncnormal 3.451 0.873".parse().unwrap();
        assert_eq!(short, ServiceDistribution::truncated_normal_default(3.451, 0.873).unwrap());
        assert!("gamma 1 2".parse::<ServiceDistribution>().is_err());
        assert!("uniform 1".parse::<ServiceDistribution>().is_err());
        assert!("uniform 5 2".parse::<ServiceDistribution>().is_err());
        assert!("exponential x".parse::<ServiceDistribution>().is_err());
    }
}
