//! Run configuration: defaults, then an optional TOML file, then flags.
//!
//! ```toml
//! system = "tent_square"        # catalog name or path to a system file
//! depths = "2..5"
//! samples = 1000000
//! seed = 7
//! out = "results"
//! trials = 20
//! delta = 0.05
//! symbol_support = [[0.1, 0.4], [0.1, 0.4]]
//! assume_separation = true
//! parallel = false
//!
//! [tolerances]
//! identity = 1e-12
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::catalog::{self, ExpectedFacts};
use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::ifs_core::{load_system, IfsSystem};

/// Thresholds used by the verification suites.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub inverse_branch: f64,
    pub branch_sets: f64,
    pub measure_tv: f64,
    pub self_similarity: f64,
    /// Operator-norm identities `C*C = I`, `(CC*)² = CC*`.
    pub identity: f64,
    /// Entrywise `C* = L`.
    pub entry: f64,
    pub covariant: f64,
    /// Cell-level reconstruction defects.
    pub cell_defect: f64,
    /// Covariance ratios must lie in `[c2 (1 - b), c2 (1 + b)]`.
    pub covariance_band: f64,
    /// Reconstruction ratios must lie in `[c2 (1 - b), c2 (1 + b)]`.
    pub reconstruction_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            inverse_branch: 1e-12,
            branch_sets: 1e-12,
            measure_tv: 1e-10,
            self_similarity: 1e-12,
            identity: 1e-12,
            entry: 1e-14,
            covariant: 1e-12,
            cell_defect: 1e-12,
            covariance_band: 0.5,
            reconstruction_band: 0.4,
        }
    }
}

impl Tolerances {
    /// Sets one tolerance from a `key=value` override.
    pub fn set(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("tolerance override `{spec}` is not key=value")))?;
        let v: f64 = value.trim().parse().map_err(|_| {
            Error::Parse(format!("tolerance `{key}` has non-numeric value `{value}`"))
        })?;
        if !(v >= 0.0) {
            return Err(Error::Parse(format!(
                "tolerance `{key}` must be non-negative"
            )));
        }
        let slot = match key.trim().replace('-', "_").as_str() {
            "inverse_branch" => &mut self.inverse_branch,
            "branch_sets" => &mut self.branch_sets,
            "measure_tv" => &mut self.measure_tv,
            "self_similarity" => &mut self.self_similarity,
            "identity" => &mut self.identity,
            "entry" => &mut self.entry,
            "covariant" => &mut self.covariant,
            "cell_defect" => &mut self.cell_defect,
            "covariance_band" => &mut self.covariance_band,
            "reconstruction_band" => &mut self.reconstruction_band,
            other => return Err(Error::Parse(format!("unknown tolerance `{other}`"))),
        };
        *slot = v;
        Ok(())
    }
}

/// Settings read from a TOML file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub system: Option<String>,
    pub depths: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub delta: Option<f64>,
    pub symbol_support: Option<Vec<[f64; 2]>>,
    pub assume_separation: Option<bool>,
    pub parallel: Option<bool>,
    pub tolerances: Option<Tolerances>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Flag values; `None` leaves the file or default value in place.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub system: Option<String>,
    pub depths: Option<String>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub delta: Option<f64>,
    pub symbol_support: Option<String>,
    pub no_separation: bool,
    pub parallel: bool,
    pub tolerances: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Catalog name or path to a system file.
    pub system: String,
    pub depths: (usize, usize),
    pub samples: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub trials: usize,
    pub delta: f64,
    pub symbol_support: Option<AxisBox>,
    pub assume_separation: bool,
    pub parallel: bool,
    pub tolerances: Tolerances,
}

pub const DEFAULT_DEPTHS: (usize, usize) = (2, 4);
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_OUT: &str = "ifs-lab-out";

/// `"a..b"`, `"a..=b"` or a single depth `"a"`.
pub fn parse_depths(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("depth range `{s}` is not of the form a..b"));
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(Error::Parse(format!("depth range `{s}` is empty")));
    }
    Ok((a, b))
}

/// `"lo:hi,lo:hi"`, one interval per axis.
pub fn parse_support(s: &str) -> Result<AxisBox> {
    let rows = s
        .split(',')
        .map(|iv| {
            let (lo, hi) = iv
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("support interval `{iv}` is not lo:hi")))?;
            let p = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("support bound `{t}` is not a number")))
            };
            Ok([p(lo)?, p(hi)?])
        })
        .collect::<Result<Vec<_>>>()?;
    AxisBox::from_intervals(&rows)
}

impl RunConfig {
    pub fn resolve(file: Option<FileConfig>, flags: &Overrides) -> Result<Self> {
        let file = file.unwrap_or_default();
        let system = flags.system.clone().or(file.system).ok_or_else(|| {
            Error::Parse("no system given (use --system or `system` in the config)".into())
        })?;
        let depths = match flags.depths.as_deref().or(file.depths.as_deref()) {
            Some(s) => parse_depths(s)?,
            None => DEFAULT_DEPTHS,
        };
        let samples = flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(Error::Parse("sample count must be at least 1".into()));
        }
        let trials = flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(Error::Parse("trial count must be at least 1".into()));
        }
        let delta = flags
            .delta
            .or(file.delta)
            .unwrap_or(crate::bimodule::DEFAULT_DELTA);
        if !(delta > 0.0) {
            return Err(Error::Parse("delta must be positive".into()));
        }
        let symbol_support = match (&flags.symbol_support, file.symbol_support) {
            (Some(s), _) => Some(parse_support(s)?),
            (None, Some(rows)) => Some(AxisBox::from_intervals(&rows)?),
            (None, None) => None,
        };
        let mut tolerances = file.tolerances.unwrap_or_default();
        for t in &flags.tolerances {
            tolerances.set(t)?;
        }
        Ok(Self {
            system,
            depths,
            samples,
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: flags
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            trials,
            delta,
            symbol_support,
            assume_separation: !flags.no_separation && file.assume_separation.unwrap_or(true),
            parallel: flags.parallel || file.parallel.unwrap_or(false),
            tolerances,
        })
    }
}

/// A system together with what the catalog knows about it.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub name: String,
    pub ifs: IfsSystem,
    pub facts: Option<ExpectedFacts>,
}

impl LoadedSystem {
    /// Looks `source` up in the catalog, then as a file path.
    pub fn load(source: &str) -> Result<Self> {
        if let Ok(e) = catalog::lookup(source) {
            return Ok(Self {
                name: e.name.to_string(),
                ifs: e.system,
                facts: Some(e.facts),
            });
        }
        let path = Path::new(source);
        if !path.exists() {
            return Err(Error::Parse(format!(
                "`{source}` is neither a catalog system ({}) nor an existing file",
                catalog::names().join(", ")
            )));
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| source.to_string());
        Ok(Self {
            name,
            ifs: load_system(path)?,
            facts: None,
        })
    }

    /// Support for the reconstruction symbol: the configured one, else the
    /// catalog default.
    pub fn symbol_support(&self, cfg: &RunConfig) -> Option<AxisBox> {
        cfg.symbol_support
            .clone()
            .or_else(|| self.facts.as_ref().and_then(|f| f.symbol_support.clone()))
    }

    pub fn is_catalog(&self) -> bool {
        self.facts.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_file_overrides_defaults() {
        let file = FileConfig::parse(
            "system = \"tent_1d\"\nseed = 3\ndepths = \"1..3\"\n[tolerances]\nidentity = 1e-9\n",
        )
        .unwrap();
        let flags = Overrides {
            seed: Some(11),
            tolerances: vec!["entry=1e-13".into()],
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(file), &flags).unwrap();
        assert_eq!(cfg.system, "tent_1d");
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.depths, (1, 3));
        assert_eq!(cfg.samples, DEFAULT_SAMPLES);
        assert_eq!(cfg.tolerances.identity, 1e-9);
        assert_eq!(cfg.tolerances.entry, 1e-13);
        assert_eq!(cfg.tolerances.measure_tv, 1e-10);
    }

    #[test]
    fn depth_and_support_syntax() {
        assert_eq!(parse_depths("2..5").unwrap(), (2, 5));
        assert_eq!(parse_depths("3").unwrap(), (3, 3));
        assert_eq!(parse_depths("2..=4").unwrap(), (2, 4));
        assert!(parse_depths("5..2").is_err());
        let b = parse_support("0.1:0.4,0.4:0.6").unwrap();
        assert_eq!(b.lo(), &[0.1, 0.4]);
        assert!(FileConfig::parse("bogus = 1").is_err());
    }
}
