//! Mapping files: tiling, schedule vectors, latencies, energy table and
//! declared parameter assumptions, in TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{EnergyError, EnergyTable};
use crate::linear::ParamConstraint;
use crate::pra::{parse_param_constraint, parse_poly, ParseError};
use crate::schedule::ScheduleSpec;
use crate::tiling::{TileSize, TilingSpec};

/// Environment variable naming the energy table used when a mapping names
/// none.
pub const ENERGY_TABLE_ENV: &str = "PRA_ENERGY_TABLE";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("cannot read mapping {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("mapping: {0}")]
    Toml(String),
    #[error("mapping field `{field}`: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Raw file contents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingFile {
    pub tile_sizes: Vec<TileSize>,
    pub tile_counts: Vec<i64>,
    #[serde(default)]
    pub lambda_j: Option<Vec<String>>,
    #[serde(default)]
    pub lambda_k: Option<Vec<String>>,
    #[serde(default = "default_pi")]
    pub pi: i64,
    #[serde(default)]
    pub latency: BTreeMap<String, i64>,
    #[serde(default)]
    pub energy_table: Option<PathBuf>,
    #[serde(default)]
    pub assume: Vec<String>,
}

fn default_pi() -> i64 {
    1
}

/// A resolved mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingConfig {
    pub tiling: TilingSpec,
    pub schedule: Option<ScheduleSpec>,
    pub table: EnergyTable,
    pub assume: Vec<ParamConstraint>,
}

impl MappingConfig {
    /// Parses mapping text; relative table paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, MappingError> {
        let raw: MappingFile = toml::from_str(text).map_err(|e| MappingError::Toml(e.to_string()))?;
        Self::from_file(raw, base)
    }

    pub fn load(path: &Path) -> Result<Self, MappingError> {
        let text = std::fs::read_to_string(path).map_err(|e| MappingError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::parse(&text, path.parent())
    }

    pub fn from_file(raw: MappingFile, base: Option<&Path>) -> Result<Self, MappingError> {
        let n = raw.tile_sizes.len();
        if raw.tile_counts.len() != n {
            return Err(MappingError::DimensionMismatch(format!(
                "{} tile sizes but {} tile counts",
                n,
                raw.tile_counts.len()
            )));
        }
        let polys = |field: &str, v: &[String]| {
            if v.len() != n {
                return Err(MappingError::DimensionMismatch(format!("{field} has length {}, expected {n}", v.len())));
            }
            v.iter()
                .map(|s| {
                    parse_poly(s).map_err(|source| MappingError::Expr {
                        field: field.to_string(),
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let schedule = match (&raw.lambda_j, &raw.lambda_k) {
            (Some(j), Some(k)) => Some(ScheduleSpec {
                lambda_j: polys("lambda_j", j)?,
                lambda_k: polys("lambda_k", k)?,
                pi: raw.pi,
                w: raw.latency.clone(),
            }),
            (None, None) => None,
            _ => return Err(MappingError::Toml("lambda_j and lambda_k must be given together".into())),
        };
        let table = match &raw.energy_table {
            Some(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                EnergyTable::load(&path)?
            }
            None => match std::env::var_os(ENERGY_TABLE_ENV) {
                Some(p) => EnergyTable::load(Path::new(&p))?,
                None => EnergyTable::default(),
            },
        };
        let assume = raw
            .assume
            .iter()
            .map(|s| {
                parse_param_constraint(s).map_err(|source| MappingError::Expr {
                    field: "assume".into(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect();
        Ok(MappingConfig {
            tiling: TilingSpec::new(raw.tile_sizes, raw.tile_counts),
            schedule,
            table,
            assume,
        })
    }
}
