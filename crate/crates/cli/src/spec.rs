//! JSON spec files describing a system.
//!
//! Rationals are written as strings (`"3/4"`, `"2"`); floating-point numbers
//! are rejected so that every loaded system is exact.
//!
//! ```json
//! {
//!   "space": { "labels": ["a", "b"], "metric": [["0", "1"], ["1", "0"]] },
//!   "action": { "kind": "deterministic", "generators": [[1, 0]] },
//!   "semigroup": [[0, 1], [1, 0]],
//!   "simplex": { "vertices": [["1", "0"], ["1", "1"]] }
//! }
//! ```
//!
//! `metric` may be omitted for the discrete metric. Stochastic generators
//! are square matrices of rational strings.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use proxilift::actions::{ActionSystem, Generators, SemigroupTable, StochasticMatrix, Transformation};
use proxilift::affine::SimplexModel;
use proxilift::spaces::FiniteSpace;
use proxilift::Q;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub space: SpaceSpec,
    pub action: ActionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplex: Option<SimplexSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub kind: KindSpec,
    pub generators: Vec<GeneratorSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Deterministic,
    Stochastic,
}

/// A map as a vector of point indices, or a matrix as rows of rational
/// strings. Parsed by hand so that errors point at the offending value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Map(Vec<usize>),
    Matrix(Vec<Vec<String>>),
}

enum Cell {
    Index(usize),
    Row(Vec<String>),
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Cell;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a point index or a row of rational strings")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Cell, E> {
                usize::try_from(v).map(Cell::Index).map_err(|_| E::custom("point index too large"))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Cell, A::Error> {
                let mut row = Vec::new();
                while let Some(x) = seq.next_element::<String>()? {
                    row.push(x);
                }
                Ok(Cell::Row(row))
            }
        }
        d.deserialize_any(V)
    }
}

impl<'de> Deserialize<'de> for GeneratorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = GeneratorSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of point indices or of matrix rows")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<GeneratorSpec, A::Error> {
                let mut map = Vec::new();
                let mut rows = Vec::new();
                while let Some(cell) = seq.next_element::<Cell>()? {
                    match cell {
                        Cell::Index(i) => map.push(i),
                        Cell::Row(r) => rows.push(r),
                    }
                    if !map.is_empty() && !rows.is_empty() {
                        return Err(de::Error::custom("generator mixes point indices and matrix rows"));
                    }
                }
                Ok(if rows.is_empty() { GeneratorSpec::Map(map) } else { GeneratorSpec::Matrix(rows) })
            }
        }
        d.deserialize_seq(V)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexSpec {
    pub vertices: Vec<Vec<String>>,
}

/// A validated spec file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSpec {
    pub system: ActionSystem,
    pub semigroup: Option<SemigroupTable>,
    pub simplex: Option<SimplexModel>,
}

pub fn parse_rational(text: &str, at: &str) -> Result<Q> {
    let trimmed = text.trim();
    let valid = !trimmed.is_empty()
        && trimmed
            .chars()
            .all(|c| c.is_ascii_digit() || c == '/' || c == '-' || c == '+');
    if !valid {
        bail!("{at}: {text:?} is not an exact rational (expected \"p\" or \"p/q\")");
    }
    Q::from_str(trimmed).map_err(|e| anyhow!("{at}: cannot parse {text:?} as a rational: {e}"))
}

fn parse_matrix(rows: &[Vec<String>], at: &str) -> Result<Vec<Vec<Q>>> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| parse_rational(v, &format!("{at}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

fn format_matrix(rows: &[Vec<Q>]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|row| row.iter().map(ToString::to_string).collect())
        .collect()
}

impl SystemSpec {
    /// Parses JSON text; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m);
            anyhow!("line {} column {}: {message}", e.line(), e.column())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn load(&self) -> Result<LoadedSpec> {
        let space = match &self.space.metric {
            Some(rows) => {
                let metric = parse_matrix(rows, "space.metric")?;
                FiniteSpace::new(self.space.labels.clone(), metric).context("space.metric")?
            }
            None => FiniteSpace::discrete(self.space.labels.len())
                .with_labels(self.space.labels.clone())
                .context("space.labels")?,
        };
        let generators = match self.action.kind {
            KindSpec::Deterministic => Generators::Deterministic(
                self.action
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let at = format!("action.generators[{i}]");
                        match g {
                            GeneratorSpec::Map(image) => Transformation::new(image.clone()).with_context(|| at.clone()),
                            GeneratorSpec::Matrix(_) => bail!("{at}: deterministic generators are point-index vectors"),
                        }
                    })
                    .collect::<Result<_>>()?,
            ),
            KindSpec::Stochastic => Generators::Stochastic(
                self.action
                    .generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let at = format!("action.generators[{i}]");
                        match g {
                            GeneratorSpec::Matrix(rows) => {
                                StochasticMatrix::new(parse_matrix(rows, &at)?).with_context(|| at.clone())
                            }
                            GeneratorSpec::Map(image) if image.is_empty() => {
                                StochasticMatrix::new(Vec::new()).with_context(|| at.clone())
                            }
                            GeneratorSpec::Map(_) => bail!("{at}: stochastic generators are matrices of rational strings"),
                        }
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        let system = ActionSystem::new(space, generators).context("action.generators")?;
        let semigroup = self
            .semigroup
            .as_ref()
            .map(|t| SemigroupTable::new(t.clone()).context("semigroup"))
            .transpose()?;
        if let Some(t) = &semigroup {
            if t.len() != system.points() {
                bail!("semigroup: table has {} elements but the space has {} points", t.len(), system.points());
            }
        }
        let simplex = self
            .simplex
            .as_ref()
            .map(|s| {
                SimplexModel::new(parse_matrix(&s.vertices, "simplex.vertices")?)
                    .context("simplex.vertices")
            })
            .transpose()?;
        if let Some(s) = &simplex {
            if s.vertex_count() != system.points() {
                bail!(
                    "simplex.vertices: {} vertices but the space has {} points",
                    s.vertex_count(),
                    system.points()
                );
            }
        }
        Ok(LoadedSpec { system, semigroup, simplex })
    }

    /// The spec file describing an in-memory system.
    pub fn from_loaded(loaded: &LoadedSpec) -> Self {
        let space = loaded.system.space();
        let action = match loaded.system.generators() {
            Generators::Deterministic(maps) => ActionSpec {
                kind: KindSpec::Deterministic,
                generators: maps.iter().map(|t| GeneratorSpec::Map(t.image().to_vec())).collect(),
            },
            Generators::Stochastic(ms) => ActionSpec {
                kind: KindSpec::Stochastic,
                generators: ms.iter().map(|s| GeneratorSpec::Matrix(format_matrix(s.rows()))).collect(),
            },
        };
        SystemSpec {
            space: SpaceSpec {
                labels: space.labels().to_vec(),
                metric: Some(format_matrix(space.metric())),
            },
            action,
            semigroup: loaded.semigroup.as_ref().map(|t| t.rows().to_vec()),
            simplex: loaded
                .simplex
                .as_ref()
                .map(|s| SimplexSpec { vertices: format_matrix(s.vertices()) }),
        }
    }
}

pub fn load_str(text: &str) -> Result<LoadedSpec> {
    SystemSpec::from_json(text)?.load()
}
