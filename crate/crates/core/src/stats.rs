//! Running means and Monte Carlo estimates.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub reps: u64,
    #[serde(default)]
    pub degenerate_redraws: u64,
    #[serde(default)]
    pub seed: u64,
}

impl MCEstimate {
    /// `(mean - exact) / std_err`, with `0` when both the error and the gap vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        let gap = self.mean - exact;
        if self.std_err > 0.0 {
            gap / self.std_err
        } else if gap.abs() <= 1e-12 * exact.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(gap)
        }
    }

    pub fn scaled(&self, s: f64) -> MCEstimate {
        MCEstimate {
            mean: self.mean * s,
            std_err: self.std_err * s.abs(),
            ..*self
        }
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> MCEstimate {
        MCEstimate {
            mean: self.mean,
            std_err: (self.variance() / self.n.max(1) as f64).sqrt(),
            reps: self.n,
            degenerate_redraws: 0,
            seed: 0,
        }
    }
}

impl FromIterator<f64> for Running {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut r = Running::default();
        iter.into_iter().for_each(|x| r.push(x));
        r
    }
}
