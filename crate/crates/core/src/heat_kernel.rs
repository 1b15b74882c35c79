//! Heat kernel `P(t, x, y) = [e^{tΔ}]_{xy} / μ(y)` on finite graphs, its
//! vector action, an identity audit, and the smoothed infimum
//! `σ₀(τ) = min_x Σ_y P(τ, x, y) ψ(y) μ(y)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::graph::{graph_constants, WeightedGraph};

/// Series terms stop once the a priori remainder `(2D_μ τ)^N / N!` drops below this.
pub const SERIES_TOL: f64 = 1e-16;
pub const SERIES_TERM_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// Padé scaling and squaring of the symmetrized generator.
    Expm,
    /// Truncated power series `Σ τⁿ/n! Δⁿ` on substeps with `2D_μ τ ≤ 1`.
    Series,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub t: f64,
    pub method: KernelMethod,
    /// Entry `(x, y)` is `P(t, x, y)`.
    pub p: DMatrix<f64>,
}

impl KernelMatrix {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[(x, y)]
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be finite and ≥ 0, got {t}")))
    }
}

/// `Δ` as a dense (nonsymmetric) matrix.
pub fn laplacian_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.len();
    let mut a = DMatrix::zeros(n, n);
    for x in 0..n {
        let mu = g.mu(x);
        a[(x, x)] = -g.weighted_degree(x) / mu;
        for &(y, w) in g.neighbors(x) {
            a[(x, y)] = w / mu;
        }
    }
    a
}

/// `M^{1/2} Δ M^{−1/2}`, symmetric.
pub fn symmetric_generator(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.len();
    let mut a = DMatrix::zeros(n, n);
    for x in 0..n {
        a[(x, x)] = -g.weighted_degree(x) / g.mu(x);
        for &(y, w) in g.neighbors(x) {
            a[(x, y)] = w / (g.mu(x) * g.mu(y)).sqrt();
        }
    }
    a
}

/// Number of equal substeps so that each has `2D_μ τ ≤ 1`.
fn substeps(d_mu: f64, t: f64) -> usize {
    ((2.0 * d_mu * t).ceil() as usize).max(1)
}

/// Terms needed for `(rate)^N / N! < SERIES_TOL` with `rate ≤ 1`.
fn series_terms(rate: f64) -> Result<usize> {
    let mut bound = 1.0;
    for n in 1..=SERIES_TERM_CAP {
        bound *= rate / n as f64;
        if bound < SERIES_TOL {
            return Ok(n);
        }
    }
    Err(Error::SeriesTermCap {
        cap: SERIES_TERM_CAP,
    })
}

fn series_propagator(g: &WeightedGraph, t: f64) -> Result<DMatrix<f64>> {
    let n = g.len();
    let d_mu = graph_constants(g).d_mu;
    let k = substeps(d_mu, t);
    let tau = t / k as f64;
    let lap = laplacian_matrix(g);
    let terms = series_terms(2.0 * d_mu * tau)?;
    let mut step = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for j in 1..=terms {
        term = &lap * term * (tau / j as f64);
        step += &term;
    }
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut base = step;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    Ok(result)
}

/// `P(t, ·, ·)` on a finite graph.
pub fn heat_kernel(g: &WeightedGraph, t: f64, method: KernelMethod) -> Result<KernelMatrix> {
    check_time(t)?;
    let n = g.len();
    let p = match method {
        KernelMethod::Expm => {
            let e = expm(&(symmetric_generator(g) * t));
            DMatrix::from_fn(n, n, |x, y| e[(x, y)] / (g.mu(x) * g.mu(y)).sqrt())
        }
        KernelMethod::Series => {
            let e = series_propagator(g, t)?;
            DMatrix::from_fn(n, n, |x, y| e[(x, y)] / g.mu(y))
        }
    };
    Ok(KernelMatrix { t, method, p })
}

/// `e^{tΔ}` as a matrix acting on vertex vectors (entry `(x, y)` is `P(t,x,y) μ(y)`).
pub fn propagator(g: &WeightedGraph, t: f64) -> Result<DMatrix<f64>> {
    check_time(t)?;
    let n = g.len();
    let e = expm(&(symmetric_generator(g) * t));
    Ok(DMatrix::from_fn(n, n, |x, y| {
        e[(x, y)] * (g.mu(y) / g.mu(x)).sqrt()
    }))
}

/// `e^{tΔ} v`, optionally with Dirichlet vertices held at zero, by the power
/// series on substeps. Works on graphs too large for dense matrices.
pub fn heat_apply(g: &WeightedGraph, t: f64, v: &[f64], pinned: Option<&[bool]>) -> Result<Vec<f64>> {
    check_time(t)?;
    if v.len() != g.len() {
        return Err(Error::InvalidArgument("vector length differs from graph size".into()));
    }
    let d_mu = graph_constants(g).d_mu;
    let k = substeps(d_mu, t);
    let tau = t / k as f64;
    let terms = series_terms(2.0 * d_mu * tau)?;
    let free = |x: usize| pinned.is_none_or(|p| !p[x]);
    let mut u: Vec<f64> = (0..g.len()).map(|x| if free(x) { v[x] } else { 0.0 }).collect();
    let mut term = vec![0.0; g.len()];
    let mut next = vec![0.0; g.len()];
    for _ in 0..k {
        term.copy_from_slice(&u);
        for j in 1..=terms {
            let scale = tau / j as f64;
            for x in 0..g.len() {
                if !free(x) {
                    next[x] = 0.0;
                    continue;
                }
                let tx = term[x];
                let s: f64 = g
                    .neighbors(x)
                    .iter()
                    .map(|&(y, w)| w * (term[y] - tx))
                    .sum();
                next[x] = scale * s / g.mu(x);
            }
            std::mem::swap(&mut term, &mut next);
            for x in 0..g.len() {
                u[x] += term[x];
            }
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub method: KernelMethod,
    pub t: f64,
    /// `max(0, −min P)`.
    pub positivity: f64,
    pub symmetry: f64,
    /// `max_x |Σ_y P(t,x,y) μ(y) − 1|`.
    pub mass: f64,
    /// `max_s max_{x,y} |Σ_z P(t,x,z)P(s,z,y)μ(z) − P(t+s,x,y)|` over grid times `s`.
    pub semigroup: f64,
    /// Relative mismatch of a central difference of `P` in `t` against `ΔP`.
    /// Carries `O(h²)` discretization error; reported, not gated.
    pub time_derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelAudit {
    pub rows: Vec<AuditRow>,
    /// `max_t max_{x,y} |P_expm − P_series|`.
    pub expm_vs_series: f64,
}

impl KernelAudit {
    /// Largest violation among positivity, symmetry, mass and semigroup.
    pub fn max_identity_violation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.positivity.max(r.symmetry).max(r.mass).max(r.semigroup))
            .fold(0.0, f64::max)
    }
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Check kernel identities for both methods on a time grid.
pub fn kernel_audit(g: &WeightedGraph, t_grid: &[f64]) -> Result<KernelAudit> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("audit times must be positive".into()));
    }
    let n = g.len();
    let mu_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(g.measures()));
    let lap = laplacian_matrix(g);
    let mut rows = Vec::new();
    let mut expm_vs_series: f64 = 0.0;
    let mut by_method = Vec::new();
    for method in [KernelMethod::Expm, KernelMethod::Series] {
        let kernels: Vec<KernelMatrix> = t_grid
            .iter()
            .map(|&t| heat_kernel(g, t, method))
            .collect::<Result<_>>()?;
        for (i, k) in kernels.iter().enumerate() {
            let t = t_grid[i];
            let positivity = (-k.p.min()).max(0.0);
            let symmetry = max_abs_diff(&k.p, &k.p.transpose());
            let mass = (0..n)
                .map(|x| ((0..n).map(|y| k.get(x, y) * g.mu(y)).sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max);
            let mut semigroup: f64 = 0.0;
            for (j, other) in kernels.iter().enumerate() {
                let sum = heat_kernel(g, t + t_grid[j], method)?;
                let composed = &k.p * &mu_diag * &other.p;
                semigroup = semigroup.max(max_abs_diff(&composed, &sum.p));
            }
            let h = 1e-4 * t.max(1e-2);
            let plus = heat_kernel(g, t + h, method)?;
            let minus = heat_kernel(g, (t - h).max(0.0), method)?;
            let dt = (&plus.p - &minus.p) / (t + h - (t - h).max(0.0));
            let lp = &lap * &k.p;
            let scale = lp.abs().max().max(1e-300);
            let time_derivative = max_abs_diff(&dt, &lp) / scale;
            rows.push(AuditRow {
                method,
                t,
                positivity,
                symmetry,
                mass,
                semigroup,
                time_derivative,
            });
        }
        by_method.push(kernels);
    }
    for (a, b) in by_method[0].iter().zip(&by_method[1]) {
        expm_vs_series = expm_vs_series.max(max_abs_diff(&a.p, &b.p));
    }
    Ok(KernelAudit {
        rows,
        expm_vs_series,
    })
}

/// Evaluator of `F(t, x) = Σ_y P(t, x, y) ψ(y) μ(y)`.
///
/// On truncations of infinite graphs the outer shell is held at zero, so
/// the computed `F` is the Dirichlet version, which never exceeds the
/// infinite-graph value.
#[derive(Debug, Clone)]
pub struct Smoother<'a> {
    g: &'a WeightedGraph,
    psi: Vec<f64>,
    pinned: Option<Vec<bool>>,
}

impl<'a> Smoother<'a> {
    pub fn new(g: &'a WeightedGraph, psi: &[f64]) -> Result<Self> {
        if psi.len() != g.len() {
            return Err(Error::InvalidArgument("ψ length differs from graph size".into()));
        }
        if psi.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("ψ must be nonnegative and finite".into()));
        }
        let pinned = g.truncation().map(|_| g.shell_mask());
        Ok(Smoother {
            g,
            psi: psi.to_vec(),
            pinned,
        })
    }

    /// `F(t, ·)` at every vertex.
    pub fn apply(&self, t: f64) -> Result<Vec<f64>> {
        if self.pinned.is_none() && self.g.len() <= 256 {
            let e = propagator(self.g, t)?;
            let v = nalgebra::DVector::from_column_slice(&self.psi);
            return Ok((e * v).iter().copied().collect());
        }
        heat_apply(self.g, t, &self.psi, self.pinned.as_deref())
    }

    pub fn at(&self, t: f64, x: usize) -> Result<f64> {
        self.g.check_vertex(x)?;
        Ok(self.apply(t)?[x])
    }

    /// Hop margin keeping the probe away from the truncation shell at time `t`.
    pub fn margin(&self, t: f64) -> usize {
        let d_mu = graph_constants(self.g).d_mu;
        (2.0 + 2.0 * (d_mu * t).sqrt()).ceil() as usize
    }

    /// Default probe set: all vertices for finite graphs, otherwise vertices
    /// at least `margin(t)` hops inside the truncation.
    pub fn default_probe(&self, t: f64) -> Vec<usize> {
        match self.g.truncation() {
            None => (0..self.g.len()).collect(),
            Some(tr) => {
                let m = self.margin(t);
                let d = self.g.distances_from(tr.center);
                (0..self.g.len())
                    .filter(|&v| d[v].unwrap() + m <= tr.radius)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedInfimum {
    pub tau: f64,
    pub sigma0: f64,
    pub argmin: String,
    pub probe_size: usize,
}

/// `σ₀(τ)` over `probe` (or the default probe).
pub fn smoothed_infimum<'a>(
    g: &'a WeightedGraph,
    tau: f64,
    psi: &[f64],
    probe: Option<&[usize]>,
) -> Result<(SmoothedInfimum, Smoother<'a>)> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("τ must be positive, got {tau}")));
    }
    let smoother = Smoother::new(g, psi)?;
    let probe: Vec<usize> = match probe {
        Some(p) => p.to_vec(),
        None => smoother.default_probe(tau),
    };
    if probe.is_empty() {
        return Err(Error::InvalidArgument(
            "probe set is empty; the truncation is too small for this τ".into(),
        ));
    }
    let f = smoother.apply(tau)?;
    let mut best = probe[0];
    for &x in &probe {
        g.check_vertex(x)?;
        if f[x] < f[best] {
            best = x;
        }
    }
    Ok((
        SmoothedInfimum {
            tau,
            sigma0: f[best],
            argmin: g.id(best).to_string(),
            probe_size: probe.len(),
        },
        smoother,
    ))
}
