//! Lifespan `T_λ` of the solution with data `λψ`, on finite graphs directly
//! and on infinite generators through Dirichlet truncations of growing radius.

use serde::{Deserialize, Serialize};

use super::{integrate, Boundary, Bracket, IntegrateOptions, Status};
use crate::error::{Error, Result};
use crate::graph::{GraphSpec, WeightedGraph};
use crate::initial_data::PsiSpec;

#[derive(Debug, Clone)]
pub enum LifespanTarget {
    /// The graph is the whole space; one integration.
    Finite(WeightedGraph),
    /// Truncations of an infinite lattice or tree.
    Generator(GraphSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanOptions {
    /// Agreement required between successive truncation radii.
    pub tol: f64,
    /// First radius; later radii double.
    pub initial_radius: usize,
    /// Number of radii tried at most.
    pub max_radii: usize,
    pub integrate: IntegrateOptions,
}

impl Default for LifespanOptions {
    fn default() -> Self {
        LifespanOptions {
            tol: 1e-6,
            initial_radius: 8,
            max_radii: 5,
            integrate: IntegrateOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LifespanOutcome {
    BlowUp { t_est: f64, bracket: Bracket },
    /// No blow-up was observed up to `t_max`; global existence is not claimed.
    NoBlowUpBefore { t_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanEstimate {
    pub outcome: LifespanOutcome,
    pub p: f64,
    pub lambda: f64,
    /// `(radius, T(radius))`; empty for finite graphs. `None` means no blow-up before `t_max`.
    pub sequence: Vec<(usize, Option<f64>)>,
    pub truncation_radii: Vec<usize>,
    /// For generators: the last two radii agree to `tol`. Always true for finite graphs.
    pub converged: bool,
    /// Truncation limits approximate the infinite-graph lifespan from above.
    pub note: String,
    pub total_steps: usize,
}

impl LifespanEstimate {
    pub fn t_est(&self) -> Option<f64> {
        match self.outcome {
            LifespanOutcome::BlowUp { t_est, .. } => Some(t_est),
            LifespanOutcome::NoBlowUpBefore { .. } => None,
        }
    }

    pub fn bracket(&self) -> Option<Bracket> {
        match self.outcome {
            LifespanOutcome::BlowUp { bracket, .. } => Some(bracket),
            LifespanOutcome::NoBlowUpBefore { .. } => None,
        }
    }
}

fn outcome_of(status: &Status) -> LifespanOutcome {
    match *status {
        Status::BlowUp { bracket, .. } => LifespanOutcome::BlowUp {
            t_est: bracket.lo,
            bracket,
        },
        Status::Completed { t_max } => LifespanOutcome::NoBlowUpBefore { t_max },
    }
}

/// Estimate `T_λ` for data `λψ`.
pub fn estimate_lifespan(
    target: &LifespanTarget,
    psi: &PsiSpec,
    lambda: f64,
    p: f64,
    opts: &LifespanOptions,
) -> Result<LifespanEstimate> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("need λ > 0, got {lambda}")));
    }
    let run = |g: &WeightedGraph, boundary: Boundary| -> Result<(Status, usize)> {
        let data: Vec<f64> = psi.evaluate(g)?.into_iter().map(|v| lambda * v).collect();
        if data.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument("ψ vanishes identically".into()));
        }
        let mut o = opts.integrate.clone();
        o.boundary = boundary;
        o.keep_dense = false;
        let r = integrate(g, &data, p, &o)?;
        Ok((r.status, r.stats.accepted + r.stats.rejected))
    };
    match target {
        LifespanTarget::Finite(g) => {
            let (status, steps) = run(g, opts.integrate.boundary.clone())?;
            Ok(LifespanEstimate {
                outcome: outcome_of(&status),
                p,
                lambda,
                sequence: Vec::new(),
                truncation_radii: Vec::new(),
                converged: true,
                note: "finite graph: single integration".into(),
                total_steps: steps,
            })
        }
        LifespanTarget::Generator(spec) => {
            if opts.initial_radius == 0 || opts.max_radii < 2 {
                return Err(Error::InvalidArgument(
                    "need a positive initial radius and at least two radii".into(),
                ));
            }
            let mut sequence: Vec<(usize, Option<f64>)> = Vec::new();
            let mut last_status = None;
            let mut total_steps = 0;
            let mut radius = opts.initial_radius;
            for _ in 0..opts.max_radii {
                let g = spec.with_radius(radius)?.build()?;
                let (status, steps) = run(&g, Boundary::Shell)?;
                total_steps += steps;
                let t = match status {
                    Status::BlowUp { bracket, .. } => Some(bracket.lo),
                    Status::Completed { .. } => None,
                };
                sequence.push((radius, t));
                last_status = Some(status);
                if let [.., (_, Some(a)), (_, Some(b))] = sequence.as_slice() {
                    if (a - b).abs() <= opts.tol {
                        break;
                    }
                }
                radius *= 2;
            }
            let converged = matches!(
                sequence.as_slice(),
                [.., (_, Some(a)), (_, Some(b))] if (a - b).abs() <= opts.tol
            );
            let status = last_status.expect("at least one radius");
            if !converged && matches!(status, Status::BlowUp { .. }) {
                return Err(Error::LifespanNonConvergence {
                    sequence: sequence
                        .iter()
                        .map(|&(r, t)| (r, t.unwrap_or(f64::INFINITY)))
                        .collect(),
                });
            }
            Ok(LifespanEstimate {
                outcome: outcome_of(&status),
                p,
                lambda,
                truncation_radii: sequence.iter().map(|s| s.0).collect(),
                sequence,
                converged,
                note: "Dirichlet truncations are subsolutions: T(R) is nonincreasing in R \
                       and approximates the infinite-graph lifespan from above"
                    .into(),
                total_steps,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn finite_cycle_constant() {
        let g = build_graph(&GraphSpec::Cycle { n: 8 }).unwrap();
        let est = estimate_lifespan(
            &LifespanTarget::Finite(g),
            &PsiSpec::Constant { value: 1.0 },
            2.0,
            2.0,
            &LifespanOptions::default(),
        )
        .unwrap();
        assert!((est.t_est().unwrap() - 0.5).abs() < 1e-6);
        assert!(est.converged);
    }

    #[test]
    fn z1_generator_converges_from_above() {
        let est = estimate_lifespan(
            &LifespanTarget::Generator(GraphSpec::Lattice { dim: 1, radius: 0 }),
            &PsiSpec::Constant { value: 1.0 },
            1.0,
            2.0,
            &LifespanOptions::default(),
        )
        .unwrap();
        assert!(est.converged);
        let ts: Vec<f64> = est.sequence.iter().map(|s| s.1.unwrap()).collect();
        for w in ts.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{ts:?}");
        }
        assert!(est.t_est().unwrap() >= 1.0 - 1e-8);
    }
}
