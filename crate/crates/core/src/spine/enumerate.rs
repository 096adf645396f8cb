//! Exact oracles for the two-point law by enumeration.

use std::collections::BTreeMap;

use rand::Rng;

use crate::environment::EnvironmentLaw;
use crate::{Error, Result};

use super::sampler::{two_point_families, SpineSample};

fn two_point(law: &EnvironmentLaw) -> Result<(f64, f64)> {
    match *law {
        EnvironmentLaw::TwoPoint { jump, p_up } => Ok((jump, p_up)),
        _ => Err(Error::Usage(
            "enumeration oracles need the two-point law".into(),
        )),
    }
}

/// Size-biased law of one spine step as `(spine increment, sibling displacement, probability)`.
pub fn two_point_step_law(law: &EnvironmentLaw) -> Result<Vec<(f64, f64, f64)>> {
    let (jump, p_up) = two_point(law)?;
    let mut mass: BTreeMap<(bool, bool), f64> = BTreeMap::new();
    for (dvs, p) in two_point_families(jump, p_up) {
        for j in 0..2 {
            let key = (dvs[j] > 0.0, dvs[1 - j] > 0.0);
            *mass.entry(key).or_default() += p * (-dvs[j]).exp();
        }
    }
    let sign = |up: bool| if up { jump } else { -jump };
    Ok(mass
        .into_iter()
        .map(|((s, t), q)| (sign(s), sign(t), q))
        .collect())
}

/// Exact `E[sum_{|x|=n} g(x)]` for the two-point law.
///
/// By linearity the sum splits over child-index sequences. Each generation
/// contributes a factor 2 for the index of the path child, and the path child
/// and its sibling are independent two-point displacements. All `4^n`
/// (path sign, sibling sign) sequences are enumerated, so `g` may look at the
/// siblings through `lambdas` and `sibling_sums`.
pub fn enumerate_generation<F>(law: &EnvironmentLaw, n: usize, ln_g: F) -> Result<f64>
where
    F: Fn(&SpineSample) -> f64,
{
    let (jump, p_up) = two_point(law)?;
    if n == 0 || n > 10 {
        return Err(Error::Usage(format!(
            "enumeration supports 1 <= n <= 10, got {n}"
        )));
    }
    let mut total = 0.0;
    let mut path = SpineSample::default();
    for code in 0u64..(1 << (2 * n)) {
        path.clear();
        let mut weight = 1.0;
        let mut s = 0.0;
        for i in 0..n {
            let up = code >> (2 * i) & 1 == 1;
            let sib_up = code >> (2 * i + 1) & 1 == 1;
            let ds = if up { jump } else { -jump };
            let sib = if sib_up { jump } else { -jump };
            weight *= 2.0
                * (if up { p_up } else { 1.0 - p_up })
                * (if sib_up { p_up } else { 1.0 - p_up });
            s += ds;
            path.positions.push(s);
            path.lambdas.push((-ds).exp() + (-sib).exp());
            path.sibling_sums.push((-sib).exp());
        }
        let lg = ln_g(&path);
        if lg != f64::NEG_INFINITY {
            total += weight * lg.exp();
        }
    }
    Ok(total)
}

/// Expected number of first-passage vertices at level `r` with depth at most
/// `depth`, for the two-point law. Exact dynamic programming on the lattice of
/// positions `k * jump`; it increases to `E[#H_r]` as `depth` grows.
pub fn two_point_line_mass(law: &EnvironmentLaw, r: f64, depth: usize) -> Result<f64> {
    let (jump, p_up) = two_point(law)?;
    if !(r > 0.0) {
        return Err(Error::Usage(format!("level must be positive, got {r}")));
    }
    // positions below the level: k * jump < r with k >= -depth
    // first lattice index at or above r, settled in floating point
    let mut top = (r / jump).ceil() as i64;
    while (top - 1) as f64 * jump >= r {
        top -= 1;
    }
    while (top as f64) * jump < r {
        top += 1;
    }
    let lo = -(depth as i64);
    let width = (top - lo) as usize;
    let mut mass = vec![0.0f64; width];
    mass[(0 - lo) as usize] = 1.0;
    let up = 2.0 * p_up;
    let down = 2.0 * (1.0 - p_up);
    let mut absorbed = 0.0;
    for _ in 0..depth {
        let mut next = vec![0.0f64; width];
        for (i, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            if i + 1 == width {
                absorbed += m * up;
            } else {
                next[i + 1] += m * up;
            }
            if i > 0 {
                next[i - 1] += m * down;
            }
        }
        mass = next;
    }
    Ok(absorbed)
}

/// A function of the spine signs over `n` generations, stored as a table with
/// one entry per sign pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SignTable {
    pub n: usize,
    pub values: Vec<f64>,
}

impl SignTable {
    /// Uniform table entries in `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        Self {
            n,
            values: (0..1usize << n).map(|_| rng.random()).collect(),
        }
    }

    /// Index of the sign pattern of the first `n` increments (bit i set for an up step).
    pub fn index(&self, path: &SpineSample) -> usize {
        (1..=self.n)
            .filter(|&i| path.increment(i) > 0.0)
            .fold(0, |acc, i| acc | 1 << (i - 1))
    }

    pub fn ln_eval(&self, path: &SpineSample) -> f64 {
        self.values[self.index(path)].ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn step_law_is_a_distribution_with_zero_mean() {
        let law = EnvironmentLaw::two_point();
        let q = two_point_step_law(&law).unwrap();
        assert_eq!(q.len(), 4);
        let total: f64 = q.iter().map(|t| t.2).sum();
        let mean: f64 = q.iter().map(|t| t.0 * t.2).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn generation_sizes_and_martingale() {
        let law = EnvironmentLaw::two_point();
        for n in 1..=6 {
            let size = enumerate_generation(&law, n, |_| 0.0).unwrap();
            assert!((size - 2f64.powi(n as i32)).abs() < 1e-9 * size);
            let w = enumerate_generation(&law, n, |p| -p.end()).unwrap();
            assert!((w - 1.0).abs() < 1e-12, "n={n} w={w}");
        }
        let below = enumerate_generation(&law, 1, |p| {
            if p.end() <= 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
        .unwrap();
        assert!((below - (2.0 - 3f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lambdas_see_the_sibling() {
        // E[sum_{|x|=1} Lambda(root)] = E[N W_1] = 2 E[W_1] = 2
        let law = EnvironmentLaw::two_point();
        let v = enumerate_generation(&law, 1, |p| p.lambdas[0].ln()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn line_mass_increases_to_the_closed_form() {
        let law = EnvironmentLaw::two_point();
        let a = (2.0 + 3f64.sqrt()).ln();
        let target = (2.0 + 3f64.sqrt()).powi(3);
        let mut prev = 0.0;
        for depth in [3, 10, 40, 400, 4000] {
            let m = two_point_line_mass(&law, 2.5 * a, depth).unwrap();
            assert!(m >= prev && m <= target * (1.0 + 1e-12));
            prev = m;
        }
        // the first-passage time has an inverse square-root tail
        assert!((target - prev) / target < 0.05, "{prev}");
        assert!(two_point_line_mass(&law, 2.5 * a, 3).unwrap() > 0.0);
        // r just above zero: first-generation up children plus climbs back from -a
        let small = two_point_line_mass(&law, 1e-9, 4001).unwrap();
        assert!(small <= 2.0 + 3f64.sqrt() && small > 0.95 * (2.0 + 3f64.sqrt()));
        assert!(
            (two_point_line_mass(&law, 1e-9, 1).unwrap() - 2.0 * 0.25 * (2.0 + 3f64.sqrt())).abs()
                < 1e-12
        );
    }

    #[test]
    fn sign_table_indexes_increments() {
        let mut rg = rng::stream(&[1]);
        let t = SignTable::random(&mut rg, 3);
        let p = SpineSample {
            positions: vec![1.0, 0.0, 1.0],
            ..Default::default()
        };
        assert_eq!(t.index(&p), 0b101);
    }
}
