//! Descriptors for the initial profile `ψ` (the data is `λψ`).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    Constant { value: f64 },
    /// `value` on the listed vertex ids, 0 elsewhere.
    Indicator { ids: Vec<String>, value: f64 },
    /// `value` where the first lattice coordinate is `≥ 0`, 0 elsewhere.
    HalfLine { value: f64 },
    /// Independent uniform values in `[lo, hi]`.
    Uniform { lo: f64, hi: f64, seed: u64 },
    /// Explicit values by vertex id; missing ids get 0.
    Values { values: BTreeMap<String, f64> },
    /// `values[d]` at hop distance `d` from the truncation centre, `tail` beyond.
    /// `tail` is also the limit of `ψ` at infinity.
    ShellProfile { values: Vec<f64>, tail: f64 },
}

impl PsiSpec {
    /// Parse the compact CLI form: `const:1.5`, `indicator:0:2.0` (ids joined
    /// by `;`), `halfline:1`, `uniform:0.5:1.5:7`, `file:psi.json`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized ψ descriptor `{s}`"));
        let num = |a: &str| a.parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["const", v] => Ok(PsiSpec::Constant { value: num(v)? }),
            ["indicator", ids, v] => Ok(PsiSpec::Indicator {
                ids: ids.split(';').map(str::to_string).collect(),
                value: num(v)?,
            }),
            ["halfline", v] => Ok(PsiSpec::HalfLine { value: num(v)? }),
            ["uniform", lo, hi, seed] => Ok(PsiSpec::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            ["file", _, ..] => {
                let path = &s["file:".len()..];
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {path}: {e}")))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidArgument(format!("malformed ψ file {path}: {e}")))
            }
            _ => Err(bad()),
        }
    }

    /// Evaluate on every vertex of `g`.
    pub fn evaluate(&self, g: &WeightedGraph) -> Result<Vec<f64>> {
        let n = g.len();
        let values = match self {
            PsiSpec::Constant { value } => vec![*value; n],
            PsiSpec::Indicator { ids, value } => {
                let mut v = vec![0.0; n];
                for id in ids {
                    v[g.index_of(id)?] = *value;
                }
                v
            }
            PsiSpec::HalfLine { value } => {
                let coords = g.coords().ok_or_else(|| {
                    Error::InvalidArgument("half-line data needs a lattice graph".into())
                })?;
                coords
                    .iter()
                    .map(|c| if c[0] >= 0 { *value } else { 0.0 })
                    .collect()
            }
            PsiSpec::Uniform { lo, hi, seed } => {
                if !(lo <= hi) {
                    return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
            }
            PsiSpec::Values { values } => {
                let mut v = vec![0.0; n];
                for (id, val) in values {
                    v[g.index_of(id)?] = *val;
                }
                v
            }
            PsiSpec::ShellProfile { values, tail } => {
                let center = g.truncation().map(|t| t.center).unwrap_or(0);
                g.distances_from(center)
                    .into_iter()
                    .map(|d| values.get(d.unwrap()).copied().unwrap_or(*tail))
                    .collect()
            }
        };
        if let Some(x) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "ψ must be nonnegative and finite; vertex `{}` has {}",
                g.id(x),
                values[x]
            )));
        }
        Ok(values)
    }

    /// `lim ψ` at infinity when the descriptor determines one.
    pub fn tail_limit(&self) -> Option<f64> {
        match self {
            PsiSpec::Constant { value } => Some(*value),
            PsiSpec::ShellProfile { tail, .. } => Some(*tail),
            PsiSpec::Indicator { .. } | PsiSpec::Values { .. } => Some(0.0),
            PsiSpec::HalfLine { .. } | PsiSpec::Uniform { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};

    #[test]
    fn halfline_on_z1() {
        let g = build_graph(&GraphSpec::Lattice { dim: 1, radius: 3 }).unwrap();
        let psi = PsiSpec::HalfLine { value: 1.0 }.evaluate(&g).unwrap();
        for (v, id) in g.ids().iter().enumerate() {
            let x: i64 = id.parse().unwrap();
            assert_eq!(psi[v], if x >= 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(PsiSpec::parse("const:2").unwrap(), PsiSpec::Constant { value: 2.0 });
        assert_eq!(
            PsiSpec::parse("indicator:0;1:3").unwrap(),
            PsiSpec::Indicator {
                ids: vec!["0".into(), "1".into()],
                value: 3.0
            }
        );
        assert!(PsiSpec::parse("bogus").is_err());
    }

    #[test]
    fn negative_values_rejected() {
        let g = build_graph(&GraphSpec::Path { n: 3 }).unwrap();
        assert!(PsiSpec::Constant { value: -1.0 }.evaluate(&g).is_err());
    }
}
