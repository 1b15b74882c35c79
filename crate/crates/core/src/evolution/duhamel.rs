//! Residual of the variation-of-constants identity
//! `u(t) = e^{tΔ}u0 + ∫_0^t e^{(t−s)Δ} u(s)^p ds` along a computed trajectory.

use serde::{Deserialize, Serialize};

use super::{EvolutionResult, Status};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::heat_kernel::heat_apply;

pub const SIMPSON_TOL: f64 = 1e-9;
const MAX_DEPTH: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    /// `max_t max_x |u(x,t) − rhs(x,t)|` over the checked sample times.
    pub residual: f64,
    pub times_checked: Vec<f64>,
    pub integrand_evaluations: usize,
}

struct Integrand<'a> {
    g: &'a WeightedGraph,
    traj: &'a EvolutionResult,
    p: f64,
    t: f64,
    pinned: Option<&'a [bool]>,
    evaluations: usize,
}

impl Integrand<'_> {
    fn eval(&mut self, s: f64) -> Result<Vec<f64>> {
        self.evaluations += 1;
        let mut u = vec![0.0; self.g.len()];
        self.traj
            .dense
            .as_ref()
            .expect("checked by caller")
            .eval(s, &mut u);
        for v in &mut u {
            *v *= v.abs().powf(self.p - 1.0);
        }
        heat_apply(self.g, self.t - s, &u, self.pinned)
    }

    #[allow(clippy::too_many_arguments)]
    fn simpson(
        &mut self,
        a: f64,
        b: f64,
        fa: &[f64],
        fm: &[f64],
        fb: &[f64],
        whole: &[f64],
        tol: f64,
        depth: usize,
    ) -> Result<Vec<f64>> {
        let m = 0.5 * (a + b);
        let flm = self.eval(0.5 * (a + m))?;
        let frm = self.eval(0.5 * (m + b))?;
        let left = simpson_rule(a, m, fa, &flm, fm);
        let right = simpson_rule(m, b, fm, &frm, fb);
        let err = left
            .iter()
            .zip(&right)
            .zip(whole)
            .map(|((l, r), w)| (l + r - w).abs())
            .fold(0.0, f64::max);
        if err <= 15.0 * tol {
            return Ok(left
                .iter()
                .zip(&right)
                .zip(whole)
                .map(|((l, r), w)| l + r + (l + r - w) / 15.0)
                .collect());
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "adaptive Simpson did not reach {tol:e} on [{a}, {b}]"
            )));
        }
        let l = self.simpson(a, m, fa, &flm, fm, &left, 0.5 * tol, depth + 1)?;
        let r = self.simpson(m, b, fm, &frm, fb, &right, 0.5 * tol, depth + 1)?;
        Ok(l.iter().zip(&r).map(|(x, y)| x + y).collect())
    }
}

fn simpson_rule(a: f64, b: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    let w = (b - a) / 6.0;
    (0..fa.len())
        .map(|i| w * (fa[i] + 4.0 * fm[i] + fb[i]))
        .collect()
}

/// Check the Duhamel identity at the trajectory's sample times up to `t_window`.
///
/// The trajectory must have completed and carry its continuous extension.
pub fn duhamel_residual(
    g: &WeightedGraph,
    traj: &EvolutionResult,
    data: &[f64],
    t_window: Option<f64>,
) -> Result<DuhamelReport> {
    if !matches!(traj.status, Status::Completed { .. }) {
        return Err(Error::InvalidArgument(
            "Duhamel check needs a trajectory without blow-up".into(),
        ));
    }
    let Some(dense) = traj.dense.as_ref() else {
        return Err(Error::Quadrature(
            "trajectory has no continuous extension; integrate with keep_dense".into(),
        ));
    };
    let window = t_window.unwrap_or(dense.t_end()).min(dense.t_end());
    let pinned = traj.pinned.iter().any(|&b| b).then_some(traj.pinned.as_slice());
    let mut residual: f64 = 0.0;
    let mut times_checked = Vec::new();
    let mut evaluations = 0;
    for sample in traj.samples.iter().filter(|s| s.t > 0.0 && s.t <= window) {
        let t = sample.t;
        let free = heat_apply(g, t, data, pinned)?;
        let mut integrand = Integrand {
            g,
            traj,
            p: traj.p,
            t,
            pinned,
            evaluations: 0,
        };
        let fa = integrand.eval(0.0)?;
        let fm = integrand.eval(0.5 * t)?;
        let fb = integrand.eval(t)?;
        let whole = simpson_rule(0.0, t, &fa, &fm, &fb);
        let integral = integrand.simpson(0.0, t, &fa, &fm, &fb, &whole, SIMPSON_TOL, 0)?;
        evaluations += integrand.evaluations;
        for x in 0..g.len() {
            residual = residual.max((sample.u[x] - free[x] - integral[x]).abs());
        }
        times_checked.push(t);
    }
    Ok(DuhamelReport {
        residual,
        times_checked,
        integrand_evaluations: evaluations,
    })
}
