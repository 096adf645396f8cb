//! Maxima of i.i.d. variables with exponential tails.

use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::estimate::{median, quantile};
use crate::rng::{self, purpose};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremesCheck {
    pub alpha: f64,
    pub n: u64,
    /// `max_{k<=n} xi_k / ln n` per replica.
    pub ratios: Vec<f64>,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Draw `n` exponential variables of rate `alpha` per replica and report the
/// ratio of their maximum to `ln n`, which tends to `1 / alpha`.
pub fn extremes_check(alpha: f64, n: u64, replicas: u64, seed: u64) -> Result<ExtremesCheck> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Usage(format!("alpha must be positive, got {alpha}")));
    }
    if n < 10 || replicas == 0 {
        return Err(Error::Usage(format!(
            "need n >= 10 and replicas >= 1, got ({n}, {replicas})"
        )));
    }
    let exp = Exp::new(alpha).map_err(|e| Error::Usage(e.to_string()))?;
    let log_n = (n as f64).ln();
    let ratios: Vec<f64> = (0..replicas)
        .map(|r| {
            let mut rg = rng::stream(&[seed, purpose::EXTREMES, r]);
            let max = (0..n).map(|_| exp.sample(&mut rg)).fold(0.0, f64::max);
            max / log_n
        })
        .collect();
    Ok(ExtremesCheck {
        alpha,
        n,
        median: median(&ratios),
        q25: quantile(&ratios, 0.25),
        q75: quantile(&ratios, 0.75),
        ratios,
    })
}
