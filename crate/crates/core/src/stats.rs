//! Monte Carlo summaries.

/// 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959_964;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn new(value: f64, std_error: f64, n_outer: usize, n_inner: usize, seed: u64) -> Self {
        let half = Z_975 * std_error;
        Self {
            value,
            std_error,
            ci_low: value - half,
            ci_high: value + half,
            n_outer,
            n_inner,
            seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn covers(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    /// Interval widened by `factor` around the point estimate.
    pub fn widened(&self, factor: f64) -> Self {
        Self::new(
            self.value,
            self.std_error * factor,
            self.n_outer,
            self.n_inner,
            self.seed,
        )
    }

    /// Same estimate divided by a positive constant.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.value * factor,
            self.std_error * factor.abs(),
            self.n_outer,
            self.n_inner,
            self.seed,
        )
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Running first and second moments; merged in a fixed order by callers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Combines per-block moments in block order (pairwise over the sums).
pub fn combine_blocks(blocks: &[Moments]) -> Moments {
    let sums: Vec<f64> = blocks.iter().map(|b| b.sum).collect();
    let sqs: Vec<f64> = blocks.iter().map(|b| b.sum_sq).collect();
    Moments {
        n: blocks.iter().map(|b| b.n).sum(),
        sum: pairwise_sum(&sums),
        sum_sq: pairwise_sum(&sqs),
    }
}

/// Mean and standard error of the mean of batch means.
pub fn batch_mean_stats(batch_means: &[f64]) -> (f64, f64) {
    let mut m = Moments::default();
    for &b in batch_means {
        m.push(b);
    }
    (m.mean(), m.std_error())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_is_symmetric() {
        let e = McEstimate::new(1.0, 0.1, 10, 1, 0);
        assert!((e.half_width() - 0.195_996_4).abs() < 1e-12);
        assert!(e.ci_low <= e.value && e.value <= e.ci_high);
        assert!(e.covers(1.1) && !e.covers(1.3));
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(pairwise_sum(&vec![0.1; 1000]), pairwise_sum(&vec![0.1; 1000]));
    }
}
