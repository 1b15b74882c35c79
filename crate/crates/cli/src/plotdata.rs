//! Tidy CSV series from run artifacts.

use std::path::Path;

use anyhow::{bail, Context, Result};
use graphblow_core::bounds::{DensityProfile, SweepTable};
use graphblow_core::evolution::LifespanEstimate;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::output::{num, opt_num, render_csv};

fn field<T: DeserializeOwned>(env: &Value, path: &Path) -> Result<T> {
    serde_json::from_value(env["result"].clone())
        .with_context(|| format!("artifact {} has an unexpected result shape", path.display()))
}

/// Convert a JSON artifact (sweep, lifespan, density, or bounds with a
/// density profile) to CSV text.
pub fn emit_plotdata(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("missing artifact {}", path.display()))?;
    let env: Value = serde_json::from_str(&text)
        .with_context(|| format!("artifact {} is not JSON", path.display()))?;
    let hash = env["config_hash"].as_str().unwrap_or("unknown").to_string();
    match env["kind"].as_str() {
        Some("sweep") => {
            let t: SweepTable = field(&env, path)?;
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| {
                    let upper = r.upper_scaled.iter().map(|u| u.1).reduce(f64::min);
                    vec![num(r.lambda), opt_num(r.scaled), num(r.lower_scaled), opt_num(upper)]
                })
                .collect();
            render_csv(&hash, &["lambda", "scaled_lifespan", "lower_bound", "upper_bound"], &rows)
        }
        Some("lifespan") => {
            let e: LifespanEstimate = field(&env, path)?;
            let rows: Vec<Vec<String>> = e
                .sequence
                .iter()
                .map(|&(r, t)| vec![r.to_string(), opt_num(t)])
                .collect();
            render_csv(&hash, &["radius", "T_estimate"], &rows)
        }
        Some("density") => density_csv(&hash, &field(&env, path)?),
        Some("bounds") => match env["result"].get("density_profile") {
            Some(v) if !v.is_null() => {
                let d: DensityProfile = serde_json::from_value(v.clone())
                    .with_context(|| format!("artifact {} has an unexpected density profile", path.display()))?;
                density_csv(&hash, &d)
            }
            _ => bail!("bounds artifact {} has no density profile", path.display()),
        },
        Some(other) => bail!("no plot series for artifact kind `{other}`"),
        None => bail!("artifact {} has no kind", path.display()),
    }
}

fn density_csv(hash: &str, d: &DensityProfile) -> Result<String> {
    let rows: Vec<Vec<String>> = d
        .per_radius
        .iter()
        .map(|&(r, v)| vec![r.to_string(), num(v)])
        .collect();
    render_csv(hash, &["r", "density"], &rows)
}
