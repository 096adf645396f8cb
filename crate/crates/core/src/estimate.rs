//! Monte Carlo return type and streaming reductions.

use serde::{Deserialize, Serialize};

/// How an [`Estimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    ExactEnumeration,
    QMonteCarlo,
    /// Self-normalized importance sampling under Q with the base law as proposal.
    QWeighted,
    DirectMonteCarlo,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::ExactEnumeration => "exact-enumeration",
            EstimatorKind::QMonteCarlo => "q-monte-carlo",
            EstimatorKind::QWeighted => "q-weighted",
            EstimatorKind::DirectMonteCarlo => "direct-monte-carlo",
        }
    }
}

/// Point value with standard error and sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub kind: EstimatorKind,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples: 0,
            kind: EstimatorKind::ExactEnumeration,
        }
    }

    /// Number of standard errors separating `self` from `target`.
    ///
    /// Zero standard error gives `0` on exact agreement and `inf` otherwise.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// True when `|value - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }

    /// Combined z-score between two independent estimates.
    pub fn z_between(&self, other: &Estimate) -> f64 {
        let se = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        let d = (self.value - other.value).abs();
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Welford accumulator; merges in Chan et al. form so block reductions are exact
/// functions of the block order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * other.count as f64 / nf;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / nf;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn estimate(&self, kind: EstimatorKind) -> Estimate {
        Estimate {
            value: self.mean,
            stderr: self.stderr(),
            samples: self.count,
            kind,
        }
    }
}

/// Self-normalized weighted mean `sum w h / sum w` with delta-method standard error.
#[derive(Debug, Clone, Default)]
pub struct WeightedStats {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl WeightedStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, weight: f64, value: f64) {
        self.weights.push(weight);
        self.values.push(value);
    }

    pub fn extend(&mut self, other: WeightedStats) {
        self.weights.extend(other.weights);
        self.values.extend(other.values);
    }

    pub fn count(&self) -> u64 {
        self.weights.len() as u64
    }

    /// Kish effective sample size.
    pub fn effective_size(&self) -> f64 {
        let s: f64 = self.weights.iter().sum();
        let s2: f64 = self.weights.iter().map(|w| w * w).sum();
        if s2 > 0.0 {
            s * s / s2
        } else {
            0.0
        }
    }

    pub fn estimate(&self) -> Estimate {
        let sw: f64 = self.weights.iter().sum();
        if self.weights.is_empty() || sw <= 0.0 {
            return Estimate {
                value: f64::NAN,
                stderr: f64::INFINITY,
                samples: self.count(),
                kind: EstimatorKind::QWeighted,
            };
        }
        let swh: f64 = self
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, h)| w * h)
            .sum();
        let mean = swh / sw;
        let var: f64 = self
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, h)| (w * (h - mean)).powi(2))
            .sum::<f64>()
            / (sw * sw);
        Estimate {
            value: mean,
            stderr: var.sqrt(),
            samples: self.count(),
            kind: EstimatorKind::QWeighted,
        }
    }
}

/// Median of a slice (midpoint of the two central values for even lengths).
pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation quantile (type 7).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * frac
}

/// Ordinary least squares fit `y = intercept + slope * x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = RunningStats::new();
        xs.iter().for_each(|&x| all.push(x));
        let mut merged = RunningStats::new();
        for chunk in xs.chunks(77) {
            let mut part = RunningStats::new();
            chunk.iter().for_each(|&x| part.push(x));
            merged.merge(&part);
        }
        assert_eq!(merged.count(), all.count());
        assert!((merged.mean() - all.mean()).abs() < 1e-12);
        assert!((merged.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn weighted_constant_has_zero_error() {
        let mut w = WeightedStats::new();
        for i in 0..10 {
            w.push(1.0 + i as f64, 1.0);
        }
        let e = w.estimate();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn median_and_ols() {
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(median(&[1.0, 3.0]), 2.0);
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 7.0).collect();
        let (slope, icpt) = ols(&xs, &ys).unwrap();
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((icpt + 7.0).abs() < 1e-12);
    }
}
