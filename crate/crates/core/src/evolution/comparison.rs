//! Numerical check of the comparison principle: ordered data stay ordered.

use serde::{Deserialize, Serialize};

use super::{integrate, IntegrateOptions, Status};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

pub const ORDERING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `max_t max_x (u − v)`; nonpositive when ordering holds exactly.
    pub max_violation: f64,
    pub samples: usize,
}

/// Integrate from `u0 ≤ v0` over `[0, t_window]` and confirm `u ≤ v + tol` at every sample.
pub fn comparison_check(
    g: &WeightedGraph,
    u0: &[f64],
    v0: &[f64],
    p: f64,
    t_window: f64,
    sample_count: usize,
    base: &IntegrateOptions,
) -> Result<ComparisonReport> {
    if u0.len() != g.len() || v0.len() != g.len() {
        return Err(Error::InvalidArgument("data length differs from graph size".into()));
    }
    if let Some(x) = (0..g.len()).find(|&x| u0[x] > v0[x]) {
        return Err(Error::InvalidArgument(format!(
            "data not ordered at vertex `{}`: {} > {}",
            g.id(x),
            u0[x],
            v0[x]
        )));
    }
    let times: Vec<f64> = (1..=sample_count.max(1))
        .map(|k| t_window * k as f64 / sample_count.max(1) as f64)
        .collect();
    let opts = IntegrateOptions {
        t_max: t_window,
        output_times: times,
        keep_dense: false,
        ..base.clone()
    };
    let ru = integrate(g, u0, p, &opts)?;
    let rv = integrate(g, v0, p, &opts)?;
    for r in [&ru, &rv] {
        if !matches!(r.status, Status::Completed { .. }) {
            return Err(Error::InvalidArgument(
                "window reaches a blow-up; choose a shorter window".into(),
            ));
        }
    }
    let mut max_violation = f64::NEG_INFINITY;
    for (su, sv) in ru.samples.iter().zip(&rv.samples) {
        debug_assert_eq!(su.t, sv.t);
        for x in 0..g.len() {
            max_violation = max_violation.max(su.u[x] - sv.u[x]);
        }
    }
    if max_violation > ORDERING_TOL {
        return Err(Error::Ordering(format!(
            "comparison principle violated by {max_violation:e}; solver defect"
        )));
    }
    Ok(ComparisonReport {
        max_violation,
        samples: ru.samples.len(),
    })
}
