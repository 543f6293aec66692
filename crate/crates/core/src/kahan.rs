//! Compensated (Kahan-Neumaier) summation.
//!
//! Spectral constants and ensemble reductions sum up to ~1e7 terms spanning
//! many orders of magnitude; plain accumulation loses the low-order digits
//! the acceptance tolerances require. Reductions built on this accumulator
//! are also order-fixed, so results do not depend on worker count.

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Kahan::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Single-pass log-sum-exp for streams too large to hold in memory.
///
/// Keeps the running maximum and the sum of exponentials shifted by it,
/// rescaling the partial sum whenever a new maximum appears.
#[derive(Debug, Clone, Copy)]
pub struct StreamingLogSumExp {
    max: f64,
    sum: f64,
    count: usize,
}

impl Default for StreamingLogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            count: 0,
        }
    }
}

impl StreamingLogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        self.count += 1;
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// `ln(sum_i exp(x_i))`; negative infinity when nothing was added.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Log-sum-exp over a slice, returning `ln(sum_i exp(t_i))`.
///
/// Two-pass: max first, then a compensated sum of the shifted exponentials.
/// Returns negative infinity on an empty slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s = kahan_sum(terms.iter().map(|&t| (t - m).exp()));
    m + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_lost_digits() {
        // 1 + 1e16 * eps-scale terms: naive summation drops them entirely.
        let mut naive = 1.0f64;
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..1000 {
            naive += 1e-17;
            k.add(1e-17);
        }
        assert_eq!(naive, 1.0);
        assert!((k.value() - (1.0 + 1e-14)).abs() < 1e-16);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1f64, -2.0, 3.5, 1.0];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_no_overflow() {
        let xs = [1000.0, 1001.0];
        let got = log_sum_exp(&xs);
        assert!((got - (1001.0 + (1.0 + (-1.0f64).exp()).ln())).abs() < 1e-12);
    }

    #[test]
    fn streaming_matches_two_pass() {
        let xs = [0.5, -700.0, 3.0, 800.0, 799.0, -2.0];
        let mut s = StreamingLogSumExp::new();
        for &x in &xs {
            s.add(x);
        }
        assert!((s.value() - log_sum_exp(&xs)).abs() < 1e-12);
        assert_eq!(s.count(), xs.len());
        assert_eq!(StreamingLogSumExp::new().value(), f64::NEG_INFINITY);
    }
}
