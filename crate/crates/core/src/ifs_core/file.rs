//! TOML definition files for systems.
//!
//! ```toml
//! dimension = 1
//! box = [[0.0, 1.0]]
//! weights = [0.5, 0.5]      # optional, uniform by default
//! phi = "piecewise"         # or a catalog map name such as "tent_1d"
//!
//! [[branch]]
//! linear = [[0.5]]
//! translation = [0.0]
//! domain = [[0.0, 0.5]]     # used by phi = "piecewise"
//!
//! [[branch]]
//! linear = [[-0.5]]
//! translation = [1.0]
//! domain = [[0.5, 1.0]]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AxisBox;

use super::affine::AffineContraction;
use super::system::{ExpandingMap, IfsSystem, PiecewisePiece};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchDef {
    linear: Vec<Vec<f64>>,
    translation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDef {
    dimension: usize,
    #[serde(rename = "box")]
    ambient: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    phi: String,
    branch: Vec<BranchDef>,
}

/// Parses a system from TOML text.
pub fn parse_system(text: &str) -> Result<IfsSystem> {
    let def: SystemDef = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if def.ambient.len() != def.dimension {
        return Err(Error::DimensionMismatch {
            expected: def.dimension,
            found: def.ambient.len(),
        });
    }
    let ambient = AxisBox::from_intervals(&def.ambient)?;
    let mut branches = Vec::with_capacity(def.branch.len());
    for b in &def.branch {
        if b.linear.len() != def.dimension || b.translation.len() != def.dimension {
            return Err(Error::DimensionMismatch {
                expected: def.dimension,
                found: b.translation.len(),
            });
        }
        branches.push(AffineContraction::from_rows(&b.linear, &b.translation)?);
    }
    let phi = if def.phi == "piecewise" {
        let mut pieces = Vec::new();
        for (i, b) in def.branch.iter().enumerate() {
            if let Some(dom) = &b.domain {
                pieces.push(PiecewisePiece {
                    domain: AxisBox::from_intervals(dom)?,
                    branch: i,
                });
            }
        }
        ExpandingMap::Piecewise(pieces)
    } else {
        ExpandingMap::Named(def.phi.parse()?)
    };
    IfsSystem::new(ambient, branches, def.weights, phi)
}

pub fn load_system(path: &Path) -> Result<IfsSystem> {
    parse_system(&std::fs::read_to_string(path)?)
}

/// Serialises a system; weights are always written. A piecewise map with
/// several domains for one branch keeps only the first.
pub fn export_system(ifs: &IfsSystem) -> Result<String> {
    let (phi, domains): (String, Vec<Option<Vec<[f64; 2]>>>) = match ifs.expanding_map() {
        ExpandingMap::Named(m) => (m.name().to_string(), vec![None; ifs.n()]),
        ExpandingMap::Piecewise(pieces) => {
            let mut d = vec![None; ifs.n()];
            for p in pieces {
                if d[p.branch].is_none() {
                    d[p.branch] = Some(p.domain.intervals());
                }
            }
            ("piecewise".to_string(), d)
        }
    };
    let def = SystemDef {
        dimension: ifs.dim(),
        ambient: ifs.ambient().intervals(),
        weights: Some(ifs.weights().to_vec()),
        phi,
        branch: ifs
            .branches()
            .iter()
            .zip(domains)
            .map(|(g, domain)| BranchDef {
                linear: g.linear_rows(),
                translation: g.translation().iter().copied().collect(),
                domain,
            })
            .collect(),
    };
    toml::to_string(&def).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TENT: &str = r#"
dimension = 1
box = [[0.0, 1.0]]
phi = "piecewise"

[[branch]]
linear = [[0.5]]
translation = [0.0]
domain = [[0.0, 0.5]]

[[branch]]
linear = [[-0.5]]
translation = [1.0]
domain = [[0.5, 1.0]]
"#;

    #[test]
    fn parses_and_round_trips() {
        let s = parse_system(TENT).unwrap();
        assert_eq!(s.n(), 2);
        assert!(s.is_hutchinson());
        assert_eq!(s.phi(&[0.75]), vec![0.5]);
        let again = parse_system(&export_system(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_weights_and_shapes() {
        let bad = TENT.replace("phi =", "weights = [0.5, 0.6]\nphi =");
        assert!(matches!(parse_system(&bad), Err(Error::InvalidWeights(_))));
        let off = TENT
            .replace("weights", "")
            .replace("dimension = 1", "dimension = 2");
        assert!(parse_system(&off).is_err());
        assert!(matches!(
            parse_system(&TENT.replace("\"piecewise\"", "\"nope\"")),
            Err(Error::Parse(_))
        ));
    }
}
