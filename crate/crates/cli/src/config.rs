//! Experiment configuration files.
//!
//! The schema is the set of serde types below with unknown fields rejected;
//! `schema/experiment.schema.json` documents the same shape.

use std::path::Path;

use anyhow::{bail, Context, Result};
use graphblow_core::bounds::{BoundsRequest, Direction};
use graphblow_core::evolution::{Boundary, IntegrateOptions, LifespanOptions, LifespanTarget};
use graphblow_core::initial_data::PsiSpec;
use graphblow_core::GraphSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "defaults::t_max")]
    pub t_max: f64,
    #[serde(default = "defaults::rtol")]
    pub rtol: f64,
    #[serde(default = "defaults::atol")]
    pub atol: f64,
    #[serde(default = "defaults::u_big")]
    pub u_big: f64,
    /// Agreement between successive truncation radii.
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::initial_radius")]
    pub initial_radius: usize,
    #[serde(default = "defaults::max_radii")]
    pub max_radii: usize,
    #[serde(default = "defaults::step_budget")]
    pub step_budget: usize,
}

mod defaults {
    pub fn t_max() -> f64 {
        10.0
    }
    pub fn rtol() -> f64 {
        1e-10
    }
    pub fn atol() -> f64 {
        1e-12
    }
    pub fn u_big() -> f64 {
        graphblow_core::evolution::DEFAULT_U_BIG
    }
    pub fn tol() -> f64 {
        1e-6
    }
    pub fn initial_radius() -> usize {
        8
    }
    pub fn max_radii() -> usize {
        5
    }
    pub fn step_budget() -> usize {
        5_000_000
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            t_max: defaults::t_max(),
            rtol: defaults::rtol(),
            atol: defaults::atol(),
            u_big: defaults::u_big(),
            tol: defaults::tol(),
            initial_radius: defaults::initial_radius(),
            max_radii: defaults::max_radii(),
            step_budget: defaults::step_budget(),
        }
    }
}

impl SolverConfig {
    pub fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions {
            t_max: self.t_max,
            rtol: self.rtol,
            atol: self.atol,
            u_big: self.u_big,
            boundary: Boundary::None,
            output_times: Vec::new(),
            keep_dense: false,
        }
    }

    pub fn lifespan_options(&self) -> LifespanOptions {
        LifespanOptions {
            tol: self.tol,
            initial_radius: self.initial_radius,
            max_radii: self.max_radii,
            integrate: self.integrate_options(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub psi: PsiSpec,
    pub p: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub bounds: BoundsRequest,
    /// Directory for artifacts; the `--out-dir` flag takes precedence.
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("config {} does not match the schema", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            bail!("p must be > 1, got {}", self.p);
        }
        match (&self.lambda, &self.lambda_grid) {
            (Some(_), Some(_)) => bail!("give either lambda or lambda_grid, not both"),
            (Some(l), None) if !(*l > 0.0 && l.is_finite()) => bail!("lambda must be > 0"),
            (None, Some(grid)) if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) => {
                bail!("lambda_grid must be nonempty with positive entries")
            }
            _ => {}
        }
        let s = &self.solver;
        if !(s.t_max > 0.0 && s.rtol > 0.0 && s.atol > 0.0 && s.tol > 0.0 && s.u_big > 1.0) {
            bail!("solver t_max, rtol, atol, tol must be > 0 and u_big > 1");
        }
        if s.initial_radius == 0 || s.max_radii < 2 {
            bail!("solver needs initial_radius ≥ 1 and max_radii ≥ 2");
        }
        Ok(())
    }

    /// Lifespan target: generators are studied through truncations.
    pub fn target(&self) -> Result<LifespanTarget> {
        Ok(if self.graph.is_generator() {
            LifespanTarget::Generator(self.graph.clone())
        } else {
            LifespanTarget::Finite(self.graph.build()?)
        })
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

/// SHA-256 of the canonical JSON encoding.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash_stable() {
        let text = r#"{"graph":{"kind":"cycle","n":8},"psi":{"kind":"constant","value":1.0},"p":2.0,"lambda":1.5}"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.solver, SolverConfig::default());
        let again: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"graph":{"kind":"cycle","n":8},"psi":{"kind":"constant","value":1.0},"p":2.0,"lamda":1.5}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let text = r#"{"graph":{"kind":"cycle","n":8},"psi":{"kind":"constant","value":1.0},"p":1.0,"lambda":1.5}"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn published_schema_lists_every_field() {
        let schema: serde_json::Value =
            serde_json::from_str(include_str!("../../../schema/experiment.schema.json")).unwrap();
        let keys = |v: &serde_json::Value| -> Vec<String> {
            let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
            k.sort();
            k
        };
        let cfg = ExperimentConfig {
            graph: GraphSpec::Cycle { n: 3 },
            psi: PsiSpec::Constant { value: 1.0 },
            p: 2.0,
            lambda: None,
            lambda_grid: None,
            direction: None,
            solver: SolverConfig::default(),
            bounds: BoundsRequest::default(),
            out_dir: None,
        };
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(keys(&schema["properties"]), keys(&json));
        assert_eq!(keys(&schema["$defs"]["solver"]["properties"]), keys(&json["solver"]));
        assert_eq!(keys(&schema["$defs"]["bounds"]["properties"]), keys(&json["bounds"]));
        assert_eq!(schema["$defs"]["solver"]["properties"]["u_big"]["default"], json["solver"]["u_big"]);
    }
}
