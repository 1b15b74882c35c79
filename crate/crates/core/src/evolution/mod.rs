//! Time integration of `u_t = Δu + u^p`, blow-up detection, lifespan
//! estimation over truncations, and independent cross-checks.

pub mod comparison;
pub mod duhamel;
pub mod lifespan;
pub mod monotone;
pub mod rk;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{graph_constants, WeightedGraph};

pub use comparison::{comparison_check, ComparisonReport};
pub use duhamel::{duhamel_residual, DuhamelReport};
pub use lifespan::{estimate_lifespan, LifespanEstimate, LifespanOptions, LifespanOutcome, LifespanTarget};
pub use monotone::{monotone_iterate, BoundingSolution, ConstantBlowup, MonotoneResult, ZeroSolution};

pub const DEFAULT_U_BIG: f64 = 1e8;

/// Which vertices, if any, are held at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// The graph is the whole (finite) space.
    None,
    /// Hold the outer shell of a truncation at zero.
    Shell,
    /// Hold the listed vertex indices at zero.
    Pinned { vertices: Vec<usize> },
}

impl Boundary {
    pub fn mask(&self, g: &WeightedGraph) -> Result<Vec<bool>> {
        match self {
            Boundary::None => Ok(vec![false; g.len()]),
            Boundary::Shell => {
                if g.truncation().is_none() {
                    return Err(Error::InvalidArgument(
                        "shell boundary needs a truncated generator graph".into(),
                    ));
                }
                Ok(g.shell_mask())
            }
            Boundary::Pinned { vertices } => {
                let mut m = vec![false; g.len()];
                for &v in vertices {
                    g.check_vertex(v)?;
                    m[v] = true;
                }
                Ok(m)
            }
        }
    }

    /// Shell for truncations, none for finite graphs.
    pub fn natural(g: &WeightedGraph) -> Self {
        if g.truncation().is_some() {
            Boundary::Shell
        } else {
            Boundary::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Blow-up is declared once `‖u‖_∞ ≥ u_big` (or earlier, see [`TIME_RESOLUTION`]).
    pub u_big: f64,
    pub boundary: Boundary,
    /// Extra sample times in `(0, t_max]`; `t = 0` and the final time are always sampled.
    pub output_times: Vec<f64>,
    /// Keep the continuous extension of every step (needed by Duhamel checks).
    pub keep_dense: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            t_max: 10.0,
            rtol: 1e-10,
            atol: 1e-12,
            u_big: DEFAULT_U_BIG,
            boundary: Boundary::None,
            output_times: Vec::new(),
            keep_dense: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Completed {
        t_max: f64,
    },
    BlowUp {
        t_stop: f64,
        max_at_stop: f64,
        /// Certified interval for the blow-up time.
        bracket: Bracket,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_dt: f64,
}

/// Piecewise continuous extension of a computed trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory {
    steps: Vec<rk::DenseStep>,
}

impl DenseTrajectory {
    pub fn t_end(&self) -> f64 {
        self.steps.last().map(|s| s.t1()).unwrap_or(0.0)
    }

    /// State at time `t ∈ [0, t_end]`.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let i = self
            .steps
            .partition_point(|s| s.t1() < t)
            .min(self.steps.len() - 1);
        self.steps[i].eval(t, out);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub samples: Vec<Sample>,
    pub status: Status,
    pub stats: StepStats,
    pub p: f64,
    /// `true` at vertices held at zero.
    pub pinned: Vec<bool>,
    #[serde(skip)]
    pub dense: Option<DenseTrajectory>,
}

impl EvolutionResult {
    pub fn blow_up_bracket(&self) -> Option<Bracket> {
        match self.status {
            Status::BlowUp { bracket, .. } => Some(bracket),
            Status::Completed { .. } => None,
        }
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self.status, Status::BlowUp { .. })
    }
}

/// `Δu + |u|^{p−1}u` with pinned vertices frozen.
pub(crate) fn reaction_diffusion_rhs(
    g: &WeightedGraph,
    p: f64,
    pinned: &[bool],
    u: &[f64],
    du: &mut [f64],
) {
    for x in 0..g.len() {
        if pinned[x] {
            du[x] = 0.0;
            continue;
        }
        let ux = u[x];
        let lap: f64 = g
            .neighbors(x)
            .iter()
            .map(|&(y, w)| w * (u[y] - ux))
            .sum::<f64>()
            / g.mu(x);
        du[x] = lap + ux.abs().powf(p - 1.0) * ux;
    }
}

/// Blow-up is also declared once the remaining time to blow-up of the
/// constant supersolution drops below this fraction of `t`, since steps near
/// blow-up would otherwise fall below floating-point time resolution.
pub const TIME_RESOLUTION: f64 = 1e-11;

/// Blow-up window after `‖u(t_stop)‖_∞ = big`.
///
/// The spatially constant solution of `v' = v^p` started from `big` lies
/// above `u`, giving the lower end. At a maximizing vertex `Δu ≥ −D_μ u`, so
/// `‖u‖_∞` grows at least like `w' = w^p − D_μ w`, giving the upper end.
pub fn blow_up_bracket(t_stop: f64, big: f64, p: f64, d_mu: f64, u_big: f64) -> Result<Bracket> {
    let tail = big.powf(1.0 - p) / (p - 1.0);
    let a = d_mu * big.powf(1.0 - p);
    if a >= 0.5 {
        return Err(Error::InvalidArgument(format!(
            "blow-up threshold {u_big:e} is too small for D_μ = {d_mu}"
        )));
    }
    let eps = (10.0 * 2.0 * d_mu * big.powf(1.0 - p)).max(a / (1.0 - a));
    Ok(Bracket {
        lo: t_stop + tail,
        hi: t_stop + (1.0 + eps) * tail,
    })
}

/// Integrate from `u0 ≥ 0` until `t_max` or blow-up.
pub fn integrate(
    g: &WeightedGraph,
    u0: &[f64],
    p: f64,
    opts: &IntegrateOptions,
) -> Result<EvolutionResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("need p > 1, got {p}")));
    }
    if u0.len() != g.len() {
        return Err(Error::InvalidArgument("initial data length differs from graph size".into()));
    }
    if let Some(x) = u0.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "initial data must be nonnegative and finite; vertex `{}` has {}",
            g.id(x),
            u0[x]
        )));
    }
    if !(opts.t_max > 0.0 && opts.t_max.is_finite()) || !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(Error::InvalidArgument("need t_max, rtol, atol > 0".into()));
    }
    let pinned = opts.boundary.mask(g)?;
    let d_mu = graph_constants(g).d_mu;
    // Check the threshold is usable before spending any work.
    blow_up_bracket(0.0, opts.u_big, p, d_mu, opts.u_big)?;
    let mut start: Vec<f64> = u0.to_vec();
    for x in 0..g.len() {
        if pinned[x] {
            start[x] = 0.0;
        }
    }
    let mut out_times: Vec<f64> = opts
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t <= opts.t_max)
        .collect();
    out_times.sort_by(f64::total_cmp);
    out_times.dedup();

    let ctl = rk::StepControl {
        rtol: opts.rtol,
        atol: opts.atol,
        h_max: if d_mu > 0.0 { 1.0 / (2.0 * d_mu) } else { opts.t_max },
        h_min: 1e-14,
    };
    let mut samples = vec![Sample { t: 0.0, u: start.clone() }];
    let mut next_out = 0;
    let mut dense_steps = Vec::new();
    let mut blow: Option<(f64, f64)> = None;
    let mut negative: Option<(usize, f64, f64)> = None;
    let mut buf = vec![0.0; g.len()];
    let (outcome, y_end, stats) = rk::integrate(
        |_, u, du| reaction_diffusion_rhs(g, p, &pinned, u, du),
        0.0,
        &start,
        opts.t_max,
        ctl,
        |step, y| {
            let t1 = step.t1();
            while next_out < out_times.len() && out_times[next_out] <= t1 {
                let t = out_times[next_out];
                step.eval(t, &mut buf);
                samples.push(Sample { t, u: buf.clone() });
                next_out += 1;
            }
            if opts.keep_dense {
                dense_steps.push(step.clone());
            }
            if let Some(x) = y.iter().position(|&v| v < -opts.atol) {
                negative = Some((x, t1, y[x]));
                return ControlFlow::Break(());
            }
            let big = y.iter().copied().fold(0.0, f64::max);
            let remaining = big.powf(1.0 - p) / (p - 1.0);
            if big >= opts.u_big || remaining <= TIME_RESOLUTION * t1.max(1.0) {
                blow = Some((t1, big));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        },
    );
    if let Some((x, t, value)) = negative {
        return Err(Error::Negative {
            vertex: g.id(x).to_string(),
            t,
            value,
        });
    }
    let stats = StepStats {
        accepted: stats.accepted,
        rejected: stats.rejected,
        min_dt: stats.min_dt,
    };
    let status = match outcome {
        rk::Outcome::Underflow { t, h } => {
            return Err(Error::StepUnderflow {
                t,
                h,
                max_u: y_end.iter().copied().fold(0.0, f64::max),
            })
        }
        rk::Outcome::Finished => Status::Completed { t_max: opts.t_max },
        rk::Outcome::Stopped(t) => {
            let (t_stop, big) = blow.expect("observer stops only on blow-up");
            debug_assert_eq!(t, t_stop);
            Status::BlowUp {
                t_stop,
                max_at_stop: big,
                bracket: blow_up_bracket(t_stop, big, p, d_mu, opts.u_big)?,
            }
        }
    };
    let t_final = match status {
        Status::Completed { t_max } => t_max,
        Status::BlowUp { t_stop, .. } => t_stop,
    };
    if samples.last().map(|s| s.t) != Some(t_final) {
        samples.push(Sample {
            t: t_final,
            u: y_end,
        });
    }
    Ok(EvolutionResult {
        samples,
        status,
        stats,
        p,
        pinned,
        dense: opts.keep_dense.then_some(DenseTrajectory { steps: dense_steps }),
    })
}
