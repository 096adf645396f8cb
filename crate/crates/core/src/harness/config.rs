//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::environment::EnvironmentLaw;
use crate::{Error, Result};

/// Parse a law written as `two-point`, `fixed-gaussian:B` or `poisson-gaussian:LAMBDA`.
pub fn parse_law(spec: &str) -> Result<EnvironmentLaw> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec, None),
    };
    let bad = |what: &str| Error::Config(format!("law `{spec}`: {what}"));
    match name.to_ascii_lowercase().replace('_', "-").as_str() {
        "two-point" | "twopoint" => {
            if arg.is_some() {
                return Err(bad("two-point takes no parameter"));
            }
            Ok(EnvironmentLaw::two_point())
        }
        "fixed-gaussian" | "gaussian" => {
            let b = arg
                .ok_or_else(|| bad("missing branching number"))?
                .parse::<u32>()
                .map_err(|_| bad("branching number must be an integer"))?;
            EnvironmentLaw::fixed_gaussian(b).map_err(|e| bad(&e.to_string()))
        }
        "poisson-gaussian" => {
            let l = arg
                .ok_or_else(|| bad("missing offspring mean"))?
                .parse::<f64>()
                .map_err(|_| bad("offspring mean must be a number"))?;
            EnvironmentLaw::poisson_gaussian(l).map_err(|e| bad(&e.to_string()))
        }
        _ => Err(bad("unknown family")),
    }
}

/// Inverse of [`parse_law`].
pub fn law_label(law: &EnvironmentLaw) -> String {
    match *law {
        EnvironmentLaw::TwoPoint { .. } => "two-point".into(),
        EnvironmentLaw::FixedGaussian { branching, .. } => format!("fixed-gaussian:{branching}"),
        EnvironmentLaw::PoissonGaussian { offspring_mean, .. } => {
            format!("poisson-gaussian:{offspring_mean}")
        }
    }
}

/// Every experiment parameter. Fields left unset in the file keep the
/// defaults below; `Option` fields default per experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    /// `law`: one law, or a comma list for `verify-law`.
    pub laws: Vec<EnvironmentLaw>,
    pub seed: u64,
    pub replicas: Option<u64>,
    /// Sample count for Monte Carlo estimators.
    pub samples: Option<u64>,

    // walk
    pub n_steps: Vec<u64>,
    pub excursions: u64,
    pub step_cap: u64,

    // quenched
    pub r_list: Vec<f64>,
    pub r: f64,
    pub depth_cap: u32,
    pub max_vertices: usize,
    pub min_log_hit: f64,
    pub refine_rounds: u32,
    pub refine_step: f64,
    pub climb_weight: f64,
    pub chi: f64,
    pub theta: f64,
    pub beta: f64,
    pub eps: f64,
    pub eps1: f64,

    // spine
    pub tables: usize,
    pub max_generation: usize,
    pub alpha: f64,
    pub c4: f64,
    pub l_list: Vec<usize>,
    pub census_l: usize,
    pub census_alpha: f64,
    pub census_n: usize,
    pub census_max_vertices: u64,
    /// Overshoot levels and exponent for the spine overshoot moments.
    pub b_grid: Vec<f64>,
    pub c: f64,

    // rw1d and extremes
    pub exit_max: u64,
    pub corridor_cells: Vec<(f64, f64)>,
    pub fixture_samples: u64,
    pub xi_alphas: Vec<f64>,
    pub extremes_n: u64,

    pub out: PathBuf,
    /// Normalized `key = value` pairs as given, for the digest.
    #[serde(skip)]
    raw: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            laws: vec![EnvironmentLaw::two_point()],
            seed: 1,
            replicas: None,
            samples: None,
            n_steps: vec![10_000, 100_000, 1_000_000],
            excursions: 20_000,
            step_cap: 100_000_000,
            r_list: vec![6.0, 10.0, 14.0, 18.0, 22.0],
            r: 3.0,
            depth_cap: 100_000,
            max_vertices: 50_000_000,
            min_log_hit: -10.0,
            refine_rounds: 80,
            refine_step: 0.5,
            climb_weight: 0.0,
            chi: 0.6,
            theta: 0.55,
            beta: 1.0,
            eps: 1.2,
            eps1: 1.5,
            tables: 20,
            max_generation: 6,
            alpha: 0.45,
            c4: 1.5,
            l_list: vec![20, 40, 80],
            census_l: 4,
            census_alpha: 0.25,
            census_n: 3,
            census_max_vertices: 20_000_000,
            b_grid: vec![2.0, 5.0, 10.0, 20.0],
            c: 1.0,
            exit_max: 20,
            corridor_cells: vec![(100.0, 5.0), (200.0, 7.0), (400.0, 10.0)],
            fixture_samples: 1_000_000,
            xi_alphas: vec![1.0, 2.0],
            extremes_n: 1_000_000,
            out: PathBuf::from("out"),
            raw: BTreeMap::new(),
        }
    }
}

fn list<T, F>(key: &str, v: &str, f: F) -> Result<Vec<T>>
where
    F: Fn(&str) -> Option<T>,
{
    let items: Option<Vec<T>> = v.split(',').map(|s| f(s.trim())).collect();
    match items {
        Some(x) if !x.is_empty() => Ok(x),
        _ => Err(Error::Config(format!(
            "key `{key}`: cannot parse list `{v}`"
        ))),
    }
}

fn one<T, F>(key: &str, v: &str, f: F) -> Result<T>
where
    F: Fn(&str) -> Option<T>,
{
    f(v.trim()).ok_or_else(|| Error::Config(format!("key `{key}`: cannot parse `{v}`")))
}

fn float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| !x.is_nan())
}

/// Integers may be written as `1e6` or `1_000_000`.
fn uint(s: &str) -> Option<u64> {
    let s = s.replace('_', "");
    s.parse::<u64>().ok().or_else(|| {
        let x = s.parse::<f64>().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < 1.8e19).then_some(x as u64)
    })
}

impl ExperimentConfig {
    /// Parse config text. Unknown keys and malformed values are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Set one key, as if it appeared in the file.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let u = |f: &dyn Fn(&str) -> Option<u64>| one(key, v, f);
        match key {
            "experiment" => self.experiment = Some(v.to_string()),
            "law" => {
                self.laws = v.split(',').map(parse_law).collect::<Result<_>>()?;
            }
            "seed" => self.seed = u(&uint)?,
            "replicas" => self.replicas = Some(u(&uint)?),
            "samples" => self.samples = Some(u(&uint)?),
            "n_steps" => self.n_steps = list(key, v, uint)?,
            "excursions" => self.excursions = u(&uint)?,
            "step_cap" => self.step_cap = u(&uint)?,
            "r_list" => self.r_list = list(key, v, float)?,
            "r" => self.r = one(key, v, float)?,
            "depth_cap" => {
                self.depth_cap = one(key, v, |s| uint(s).and_then(|x| u32::try_from(x).ok()))?
            }
            "max_vertices" => self.max_vertices = u(&uint)? as usize,
            "min_log_hit" => self.min_log_hit = one(key, v, float)?,
            "refine_rounds" => {
                self.refine_rounds = one(key, v, |s| uint(s).and_then(|x| u32::try_from(x).ok()))?
            }
            "refine_step" => self.refine_step = one(key, v, float)?,
            "climb_weight" => self.climb_weight = one(key, v, float)?,
            "chi" => self.chi = one(key, v, float)?,
            "theta" => self.theta = one(key, v, float)?,
            "beta" => self.beta = one(key, v, float)?,
            "eps" => self.eps = one(key, v, float)?,
            "eps1" => self.eps1 = one(key, v, float)?,
            "tables" => self.tables = u(&uint)? as usize,
            "max_generation" => self.max_generation = u(&uint)? as usize,
            "alpha" => self.alpha = one(key, v, float)?,
            "c4" => self.c4 = one(key, v, float)?,
            "L" | "l_list" => self.l_list = list(key, v, |s| uint(s).map(|x| x as usize))?,
            "census_L" | "census_l" => self.census_l = u(&uint)? as usize,
            "census_alpha" => self.census_alpha = one(key, v, float)?,
            "census_n" => self.census_n = u(&uint)? as usize,
            "census_max_vertices" => self.census_max_vertices = u(&uint)?,
            "b_grid" => self.b_grid = list(key, v, float)?,
            "c" => self.c = one(key, v, float)?,
            "exit_max" => self.exit_max = u(&uint)?,
            "corridor_cells" => {
                self.corridor_cells = list(key, v, |s| {
                    let (r, l) = s.split_once(':')?;
                    Some((float(r.trim())?, float(l.trim())?))
                })?
            }
            "fixture_samples" => self.fixture_samples = u(&uint)?,
            "xi_alpha" | "xi_alphas" => self.xi_alphas = list(key, v, float)?,
            "extremes_n" => self.extremes_n = u(&uint)?,
            "out" => self.out = PathBuf::from(v),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        self.raw.insert(
            key.to_string(),
            v.split_whitespace().collect::<Vec<_>>().join(" "),
        );
        Ok(())
    }

    pub fn law(&self) -> EnvironmentLaw {
        self.laws[0]
    }

    /// SHA-256 over the sorted `key=value` pairs that were set; `out` is
    /// excluded because it does not affect results.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.raw.iter().filter(|(k, _)| k.as_str() != "out") {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_lists_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# gamma run\nlaw = two-point\nseed = 7\nr_list = 6, 10,14\nmax_vertices = 5e7\n\
             corridor_cells = 100:5, 200:7 # two cells\nL = 20,40\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.r_list, vec![6.0, 10.0, 14.0]);
        assert_eq!(cfg.max_vertices, 50_000_000);
        assert_eq!(cfg.corridor_cells, vec![(100.0, 5.0), (200.0, 7.0)]);
        assert_eq!(cfg.l_list, vec![20, 40]);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(
            ExperimentConfig::parse("colour = red"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("seed = -1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("seed"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("law = fixed-gaussian"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("r_list = 1,,2"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn law_specs_round_trip() {
        for s in ["two-point", "fixed-gaussian:3", "poisson-gaussian:1.7"] {
            assert_eq!(law_label(&parse_law(s).unwrap()), s);
        }
        let cfg = ExperimentConfig::parse("law = two-point, fixed-gaussian:2").unwrap();
        assert_eq!(cfg.laws.len(), 2);
    }

    #[test]
    fn digest_ignores_layout_and_output_dir() {
        let a = ExperimentConfig::parse("seed = 3\nr = 4\nout = a").unwrap();
        let b = ExperimentConfig::parse("# c\nr=4\n\n  seed   =   3\nout = b").unwrap();
        let c = ExperimentConfig::parse("seed = 4\nr = 4").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }
}
