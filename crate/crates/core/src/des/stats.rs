/// Running count, sum and sum of squares of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StatAccumulator {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl StatAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &StatAccumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// Mean, or 0 with no observations.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance, clamped at zero against rounding.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }
}

/// Integral of a piecewise-constant signal over time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimeWeighted {
    integral: f64,
    value: f64,
    last: f64,
    start: f64,
}

impl TimeWeighted {
    pub fn starting_at(t0: f64) -> Self {
        Self {
            integral: 0.0,
            value: 0.0,
            last: t0,
            start: t0,
        }
    }

    /// Sets the signal to `value` from time `now` onward.
    pub fn update(&mut self, now: f64, value: f64) {
        self.integral += self.value * (now - self.last);
        self.last = now;
        self.value = value;
    }

    pub fn integral_until(&self, now: f64) -> f64 {
        self.integral + self.value * (now - self.last)
    }

    pub fn mean_until(&self, now: f64) -> f64 {
        let span = now - self.start;
        if span <= 0.0 {
            0.0
        } else {
            self.integral_until(now) / span
        }
    }
}
