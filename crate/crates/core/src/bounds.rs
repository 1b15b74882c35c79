//! Analytic lifespan bounds and the λ-sweep that confronts simulated
//! lifespans with them.
//!
//! Upper bounds `T_up` certify `T_λ ≤ T_up`; the basic lower bound certifies
//! `T_λ ≥ (λ‖ψ‖_∞)^{1−p}/(p−1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{estimate_lifespan, Bracket, LifespanOptions, LifespanTarget};
use crate::graph::{DomainSubset, GraphError, WeightedGraph};
use crate::heat_kernel::Smoother;
use crate::initial_data::PsiSpec;
use crate::spectral::{dirichlet_ground_state, ghost_vertex_ground_state, GroundState};

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("need p > 1, got {p}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("need {name} > 0, got {v}")))
    }
}

/// Existence time of the spatially constant solution with data `λ sup ψ`,
/// which lies above the true solution: `(λ ψ_sup)^{1−p}/(p−1)`.
pub fn lower_bound_basic(lambda: f64, psi_sup: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_positive("λ", lambda)?;
    check_positive("sup ψ", psi_sup)?;
    Ok((lambda * psi_sup).powf(1.0 - p) / (p - 1.0))
}

/// `−ln(1 − λ₁/η^{p−1}) / (λ₁(p−1))` when `η^{p−1} > λ₁`.
fn eigen_ode_bound(lambda1: f64, eta0: f64, p: f64) -> Option<f64> {
    let power = eta0.powf(p - 1.0);
    (power > lambda1).then(|| -(-lambda1 / power).ln_1p() / (lambda1 * (p - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanBound {
    /// Interior of the domain used, by vertex id.
    pub omega_interior: Vec<String>,
    pub lambda1: f64,
    /// `η(0) = λ Σ_Ω ψ φ μ`.
    pub eta0: f64,
    /// `η(0)^{p−1} > λ₁`.
    pub threshold_met: bool,
    pub t_up: Option<f64>,
}

fn projection(g: &WeightedGraph, gs: &GroundState, psi: &[f64]) -> f64 {
    gs.phi
        .domain()
        .into_iter()
        .map(|x| psi[x] * gs.phi.get(x).unwrap() * g.mu(x))
        .sum()
}

/// Eigenfunction projection bound on the domain `om`.
pub fn kaplan_bound(
    g: &WeightedGraph,
    om: &DomainSubset,
    lambda: f64,
    psi: &[f64],
    p: f64,
) -> Result<KaplanBound> {
    check_p(p)?;
    check_positive("λ", lambda)?;
    if psi.len() != g.len() {
        return Err(Error::InvalidArgument("ψ length differs from graph size".into()));
    }
    if om.interior().iter().all(|&x| psi[x] == 0.0) {
        return Err(Error::InvalidArgument("ψ vanishes on the domain interior".into()));
    }
    let gs = dirichlet_ground_state(g, om)?;
    let eta0 = lambda * projection(g, &gs, psi);
    let t_up = eigen_ode_bound(gs.lambda1, eta0, p);
    Ok(KaplanBound {
        omega_interior: om.interior().iter().map(|&x| g.id(x).to_string()).collect(),
        lambda1: gs.lambda1,
        eta0,
        threshold_met: t_up.is_some(),
        t_up,
    })
}

/// Best eigenfunction bound over singletons in `supp ψ` and balls of radius
/// `1..=r_cap` around a maximizer of `ψ`.
pub fn kaplan_bound_auto(
    g: &WeightedGraph,
    lambda: f64,
    psi: &[f64],
    p: f64,
    r_cap: usize,
) -> Result<Option<KaplanBound>> {
    check_p(p)?;
    check_positive("λ", lambda)?;
    if psi.len() != g.len() {
        return Err(Error::InvalidArgument("ψ length differs from graph size".into()));
    }
    let shell = g.shell_mask();
    let mut candidates: Vec<Vec<usize>> = (0..g.len())
        .filter(|&x| psi[x] > 0.0 && !shell[x])
        .map(|x| vec![x])
        .collect();
    let Some(top) = (0..g.len())
        .filter(|&x| !shell[x])
        .max_by(|&a, &b| psi[a].total_cmp(&psi[b]))
    else {
        return Ok(None);
    };
    for r in 1..=r_cap {
        let ball: Vec<usize> = g.ball(top, r)?.into_iter().filter(|&x| !shell[x]).collect();
        if candidates.last().is_some_and(|c| c.len() == ball.len() && r > 1) {
            break;
        }
        candidates.push(ball);
    }
    let mut best: Option<KaplanBound> = None;
    for interior in candidates {
        let om = match DomainSubset::from_interior(g, &interior) {
            Ok(om) => om,
            Err(GraphError::InvalidDomain(_)) | Err(GraphError::Truncation { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let kb = match kaplan_bound(g, &om, lambda, psi, p) {
            Ok(kb) => kb,
            // Whole finite graph as interior: no boundary, no Dirichlet problem.
            Err(Error::Graph(GraphError::InvalidDomain(_))) => continue,
            Err(e) => return Err(e),
        };
        if let Some(t) = kb.t_up {
            if best.as_ref().and_then(|b| b.t_up).is_none_or(|bt| t < bt) {
                best = Some(kb);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelBound {
    pub x_bar: String,
    pub t_up: f64,
}

/// Grid points scanned for the first sign change before bisection.
pub const HK_SCAN_POINTS: usize = 256;
pub const HK_REL_TOL: f64 = 1e-12;

/// First root of `(p−1)t − (λF(t))^{1−p}` on `(0, t_max]`, where
/// `F(t) = Σ_y P(t, x̄, y) ψ(y) μ(y)`. `None` when the function stays negative.
pub fn heat_kernel_upper_bound(
    g: &WeightedGraph,
    x_bar: usize,
    lambda: f64,
    psi: &[f64],
    p: f64,
    t_max: f64,
) -> Result<Option<HeatKernelBound>> {
    check_p(p)?;
    check_positive("λ", lambda)?;
    check_positive("t_max", t_max)?;
    g.check_vertex(x_bar)?;
    if psi.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("ψ vanishes identically".into()));
    }
    let smoother = Smoother::new(g, psi)?;
    if let Some(tr) = g.truncation() {
        let d = g.distance(tr.center, x_bar)?;
        let margin = smoother.margin(t_max);
        if d + margin > tr.radius {
            return Err(GraphError::Truncation {
                vertex: g.id(x_bar).to_string(),
                requested: margin,
                available: tr.radius.saturating_sub(d),
            }
            .into());
        }
    }
    let gfun = |t: f64| -> Result<f64> {
        let f = smoother.at(t, x_bar)?;
        Ok(if f > 0.0 {
            (p - 1.0) * t - (lambda * f).powf(1.0 - p)
        } else {
            f64::NEG_INFINITY
        })
    };
    let mut prev = 0.0;
    for k in 1..=HK_SCAN_POINTS {
        let t = t_max * k as f64 / HK_SCAN_POINTS as f64;
        if gfun(t)? >= 0.0 {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > HK_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                if gfun(mid)? >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(HeatKernelBound {
                x_bar: g.id(x_bar).to_string(),
                t_up: hi,
            }));
        }
        prev = t;
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub beta: f64,
    /// `(r, D(β; r))`.
    pub per_radius: Vec<(usize, f64)>,
    pub d_bar_estimate: f64,
    pub estimator_note: String,
}

/// `D(β; r) = sup_x V(B_x^r ∩ {ψ ≥ β}) / V(B_x^r)` over centres whose
/// `r`-ball lies inside the truncation.
pub fn density_profile(
    g: &WeightedGraph,
    psi: &[f64],
    beta: f64,
    r_grid: &[usize],
) -> Result<DensityProfile> {
    check_positive("β", beta)?;
    let tr = g.truncation().ok_or_else(|| {
        Error::InvalidArgument("density profile needs a truncated lattice".into())
    })?;
    if g.coords().is_none() {
        return Err(Error::InvalidArgument("density profile needs a lattice graph".into()));
    }
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty radius grid".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let from_center = g.distances_from(tr.center);
    let mut per_radius = Vec::with_capacity(grid.len());
    for &r in &grid {
        let centers: Vec<usize> = (0..g.len())
            .filter(|&x| from_center[x].unwrap() + r <= tr.radius)
            .collect();
        if centers.is_empty() {
            return Err(GraphError::Truncation {
                vertex: g.id(tr.center).to_string(),
                requested: r,
                available: tr.radius,
            }
            .into());
        }
        let mut best: f64 = 0.0;
        for x in centers {
            let ball = g.ball(x, r)?;
            let total = g.volume(&ball)?;
            let dense: f64 = ball.iter().filter(|&&y| psi[y] >= beta).map(|&y| g.mu(y)).sum();
            best = best.max(dense / total);
        }
        per_radius.push((r, best));
    }
    let tail = &per_radius[per_radius.len() / 2..];
    let d_bar_estimate = tail.iter().map(|t| t.1).fold(0.0, f64::max);
    let nonincreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1);
    let nondecreasing = tail.windows(2).all(|w| w[1].1 >= w[0].1);
    let trend = match (nonincreasing, nondecreasing) {
        (true, true) => "flat",
        (true, false) => "nonincreasing",
        (false, true) => "nondecreasing",
        _ => "non-monotone",
    };
    Ok(DensityProfile {
        beta,
        per_radius,
        d_bar_estimate,
        estimator_note: format!(
            "limsup estimated as the max over the tail half of the observed radii \
             (tail trend: {trend}); no extrapolation beyond r = {}",
            grid.last().unwrap()
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityBound {
    pub beta: f64,
    pub d_bar: f64,
    pub t_up: f64,
}

/// `(β D̄)^{1−p}/(p−1)` for data `ψ` (λ = 1); `None` when `D̄ = 0`.
pub fn density_bound(profile: &DensityProfile, p: f64) -> Result<Option<DensityBound>> {
    check_p(p)?;
    if profile.d_bar_estimate <= 0.0 {
        return Ok(None);
    }
    Ok(Some(DensityBound {
        beta: profile.beta,
        d_bar: profile.d_bar_estimate,
        t_up: (profile.beta * profile.d_bar_estimate).powf(1.0 - p) / (p - 1.0),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteThreshold {
    pub x_tilde: String,
    /// Principal eigenvalue of the ghost-vertex problem.
    pub lambda1: f64,
    /// `Σ_V ψ φ μ`.
    pub projection: f64,
    /// `Λ₁ = λ₁^{1/(p−1)} / Σ_V ψ φ μ`; blow-up is guaranteed for `λ > Λ₁`.
    pub threshold: f64,
}

impl FiniteThreshold {
    /// Eigenfunction bound for a given `λ`, available when `λ > Λ₁`.
    pub fn t_up(&self, lambda: f64, p: f64) -> Option<f64> {
        eigen_ode_bound(self.lambda1, lambda * self.projection, p)
    }
}

pub fn finite_graph_threshold(
    g: &WeightedGraph,
    x_tilde: usize,
    psi: &[f64],
    p: f64,
) -> Result<FiniteThreshold> {
    check_p(p)?;
    if psi.len() != g.len() {
        return Err(Error::InvalidArgument("ψ length differs from graph size".into()));
    }
    if psi.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("ψ vanishes identically".into()));
    }
    let gs = ghost_vertex_ground_state(g, x_tilde)?;
    let proj = projection(g, &gs, psi);
    Ok(FiniteThreshold {
        x_tilde: g.id(x_tilde).to_string(),
        lambda1: gs.lambda1,
        projection: proj,
        threshold: gs.lambda1.powf(1.0 / (p - 1.0)) / proj,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// Lifespan of the constant solution with data `λ max ψ`.
    pub t1: f64,
    /// Lifespan of the constant solution with data `λ min ψ`.
    pub t2: f64,
}

/// `t₁ ≤ T_λ ≤ t₂` on a finite graph with `min ψ > 0`.
pub fn sandwich_finite(psi: &[f64], lambda: f64, p: f64) -> Result<Sandwich> {
    check_p(p)?;
    check_positive("λ", lambda)?;
    let min = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let max = psi.iter().copied().fold(0.0, f64::max);
    if !(min > 0.0) {
        return Err(Error::InvalidArgument(format!("need min ψ > 0, got {min}")));
    }
    let t = |c: f64| 1.0 / ((p - 1.0) * (lambda * c).powf(p - 1.0));
    Ok(Sandwich { t1: t(max), t2: t(min) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub psi_inf: f64,
    /// `ψ_∞` was estimated from the truncation shell rather than known.
    pub estimated: bool,
    pub t_up: f64,
}

/// Where `ψ_∞ = lim ψ` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailSource {
    Known(f64),
    /// Mean of `ψ` on the truncation shell.
    ShellEstimate(f64),
    /// `ψ` has no limit at infinity; no bound is emitted.
    NoLimit,
}

pub fn tail_source(g: &WeightedGraph, spec: &PsiSpec, psi: &[f64], user: Option<f64>) -> TailSource {
    if let Some(v) = user {
        return TailSource::Known(v);
    }
    match spec {
        PsiSpec::HalfLine { .. } | PsiSpec::Uniform { .. } => TailSource::NoLimit,
        PsiSpec::Values { .. } => {
            let shell = g.shell();
            if shell.is_empty() {
                TailSource::NoLimit
            } else {
                TailSource::ShellEstimate(
                    shell.iter().map(|&x| psi[x]).sum::<f64>() / shell.len() as f64,
                )
            }
        }
        _ => spec.tail_limit().map_or(TailSource::NoLimit, TailSource::Known),
    }
}

/// `1/((p−1) λ^{p−1} ψ_∞^{p−1})`, valid on graphs with far-away domains of
/// arbitrarily small principal eigenvalue.
pub fn tail_bound(lambda: f64, source: TailSource, p: f64) -> Result<Option<TailBound>> {
    check_p(p)?;
    check_positive("λ", lambda)?;
    let (psi_inf, estimated) = match source {
        TailSource::Known(v) => (v, false),
        TailSource::ShellEstimate(v) => (v, true),
        TailSource::NoLimit => return Ok(None),
    };
    if !(psi_inf > 0.0) {
        return Ok(None);
    }
    Ok(Some(TailBound {
        psi_inf,
        estimated,
        t_up: 1.0 / ((p - 1.0) * (lambda * psi_inf).powf(p - 1.0)),
    }))
}

/// Which bounds to compute in a [`BoundsReport`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsRequest {
    pub kaplan_r_cap: Option<usize>,
    /// `(x̄ id, t_max)`.
    pub heat_kernel: Option<(String, f64)>,
    /// `(β, radius grid)`.
    pub density: Option<(f64, Vec<usize>)>,
    /// Ghost-vertex anchor id.
    pub finite_threshold: Option<String>,
    pub sandwich: bool,
    pub tail: bool,
    pub psi_inf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lambda: f64,
    pub p: f64,
    pub psi_sup: f64,
    pub lower_basic: f64,
    pub kaplan: Option<KaplanBound>,
    pub heat_kernel: Option<HeatKernelBound>,
    pub density: Option<DensityBound>,
    pub density_profile: Option<DensityProfile>,
    pub finite_threshold: Option<FiniteThreshold>,
    pub finite_t_up: Option<f64>,
    pub sandwich: Option<Sandwich>,
    pub tail: Option<TailBound>,
    pub notes: Vec<String>,
}

impl BoundsReport {
    /// Every certified upper bound present, labelled.
    pub fn upper_bounds(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(t) = self.kaplan.as_ref().and_then(|k| k.t_up) {
            out.push(("kaplan", t));
        }
        if let Some(h) = &self.heat_kernel {
            out.push(("heat_kernel", h.t_up));
        }
        if let Some(d) = &self.density {
            if self.lambda == 1.0 {
                out.push(("density", d.t_up));
            }
        }
        if let Some(t) = self.finite_t_up {
            out.push(("finite_threshold", t));
        }
        if let Some(s) = &self.sandwich {
            out.push(("sandwich", s.t2));
        }
        if let Some(t) = &self.tail {
            out.push(("tail", t.t_up));
        }
        out
    }

    pub fn tightest_upper(&self) -> Option<f64> {
        self.upper_bounds().into_iter().map(|b| b.1).reduce(f64::min)
    }
}

pub fn compute_bounds(
    g: &WeightedGraph,
    spec: &PsiSpec,
    lambda: f64,
    p: f64,
    req: &BoundsRequest,
) -> Result<BoundsReport> {
    let psi = spec.evaluate(g)?;
    let psi_sup = psi.iter().copied().fold(0.0, f64::max);
    let lower_basic = lower_bound_basic(lambda, psi_sup, p)?;
    let mut notes = Vec::new();
    let kaplan = match req.kaplan_r_cap {
        Some(r) => kaplan_bound_auto(g, lambda, &psi, p, r)?,
        None => None,
    };
    let heat_kernel = match &req.heat_kernel {
        Some((id, t_max)) => heat_kernel_upper_bound(g, g.index_of(id)?, lambda, &psi, p, *t_max)?,
        None => None,
    };
    let (density, density_profile) = match &req.density {
        Some((beta, grid)) => {
            let prof = density_profile(g, &psi, *beta, grid)?;
            notes.push(format!(
                "density bound applies to λ = 1 and uses the finite-radius estimate D̄ = {}",
                prof.d_bar_estimate
            ));
            (density_bound(&prof, p)?, Some(prof))
        }
        None => (None, None),
    };
    let (finite_threshold, finite_t_up) = match &req.finite_threshold {
        Some(id) => {
            let ft = finite_graph_threshold(g, g.index_of(id)?, &psi, p)?;
            let t = ft.t_up(lambda, p);
            (Some(ft), t)
        }
        None => (None, None),
    };
    let sandwich = if req.sandwich {
        Some(sandwich_finite(&psi, lambda, p)?)
    } else {
        None
    };
    let tail = if req.tail {
        let src = tail_source(g, spec, &psi, req.psi_inf);
        match src {
            TailSource::NoLimit => notes.push("ψ has no limit at infinity; tail bound not emitted".into()),
            TailSource::ShellEstimate(v) => notes.push(format!("ψ_∞ estimated as the shell mean {v}")),
            TailSource::Known(_) => {}
        }
        notes.push("tail bound presumes far-away domains of arbitrarily small principal eigenvalue".into());
        tail_bound(lambda, src, p)?
    } else {
        None
    };
    Ok(BoundsReport {
        lambda,
        p,
        psi_sup,
        lower_basic,
        kaplan,
        heat_kernel,
        density,
        density_profile,
        finite_threshold,
        finite_t_up,
        sandwich,
        tail,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Large,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub t_est: Option<f64>,
    pub bracket: Option<Bracket>,
    /// `λ^{p−1} T_est`.
    pub scaled: Option<f64>,
    /// `λ^{p−1}` times the basic lower bound.
    pub lower_scaled: f64,
    /// `λ^{p−1}` times each applicable upper bound.
    pub upper_scaled: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub p: f64,
    pub direction: Direction,
    pub rows: Vec<SweepRow>,
    pub limit: Option<f64>,
    /// `|scaled − limit|` is nonincreasing along the grid.
    pub monotone_approach: Option<bool>,
    /// The step budget ran out before the grid was finished.
    pub partial: bool,
    pub steps_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub lifespan: LifespanOptions,
    /// Total integrator steps allowed across the sweep.
    pub step_budget: usize,
    pub kaplan_r_cap: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            lifespan: LifespanOptions::default(),
            step_budget: 5_000_000,
            kaplan_r_cap: Some(3),
        }
    }
}

/// Tabulate `λ^{p−1} T_λ` over `lambda_grid` (in the given order) with the
/// applicable bounds.
pub fn asymptotic_sweep(
    target: &LifespanTarget,
    spec: &PsiSpec,
    p: f64,
    lambda_grid: &[f64],
    direction: Direction,
    opts: &SweepOptions,
) -> Result<SweepTable> {
    check_p(p)?;
    let probe = match target {
        LifespanTarget::Finite(g) => g.clone(),
        LifespanTarget::Generator(s) => s.with_radius(opts.lifespan.initial_radius)?.build()?,
    };
    let psi = spec.evaluate(&probe)?;
    let psi_sup = psi.iter().copied().fold(0.0, f64::max);
    let psi_min = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let finite = matches!(target, LifespanTarget::Finite(_));
    let tail_src = tail_source(&probe, spec, &psi, None);
    let limit = match direction {
        Direction::Large => Some(1.0 / ((p - 1.0) * psi_sup.powf(p - 1.0))),
        Direction::Small => match tail_src {
            TailSource::Known(inf) if !finite && inf > 0.0 && psi_sup <= inf => {
                Some(1.0 / ((p - 1.0) * inf.powf(p - 1.0)))
            }
            _ => None,
        },
    };
    let mut rows = Vec::new();
    let mut steps_used = 0;
    let mut partial = false;
    for &lambda in lambda_grid {
        if steps_used >= opts.step_budget {
            partial = true;
            break;
        }
        let est = estimate_lifespan(target, spec, lambda, p, &opts.lifespan)?;
        steps_used += est.total_steps;
        let scale = lambda.powf(p - 1.0);
        let mut upper_scaled = Vec::new();
        if let Some(r) = opts.kaplan_r_cap {
            if let Some(t) = kaplan_bound_auto(&probe, lambda, &psi, p, r)?.and_then(|k| k.t_up) {
                upper_scaled.push(("kaplan".to_string(), scale * t));
            }
        }
        if finite && psi_min > 0.0 {
            upper_scaled.push(("sandwich".to_string(), scale * sandwich_finite(&psi, lambda, p)?.t2));
        }
        if !finite {
            if let Some(t) = tail_bound(lambda, tail_src, p)? {
                upper_scaled.push(("tail".to_string(), scale * t.t_up));
            }
        }
        rows.push(SweepRow {
            lambda,
            t_est: est.t_est(),
            bracket: est.bracket(),
            scaled: est.t_est().map(|t| scale * t),
            lower_scaled: scale * lower_bound_basic(lambda, psi_sup, p)?,
            upper_scaled,
        });
    }
    let monotone_approach = limit.map(|l| {
        let dists: Vec<f64> = rows.iter().filter_map(|r| r.scaled).map(|s| (s - l).abs()).collect();
        dists.windows(2).all(|w| w[1] <= w[0])
    });
    Ok(SweepTable {
        p,
        direction,
        rows,
        limit,
        monotone_approach,
        partial,
        steps_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};

    #[test]
    fn lower_basic_examples() {
        assert_eq!(lower_bound_basic(2.0, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(lower_bound_basic(1.0, 1.0, 2.0).unwrap(), 1.0);
        assert!((lower_bound_basic(1.0, 3.0, 3.0).unwrap() - 1.0 / 18.0).abs() < 1e-16);
        assert!(lower_bound_basic(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kaplan_singleton_closed_form() {
        let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 4 }).unwrap();
        let x = z.index_of("0").unwrap();
        let om = DomainSubset::from_interior(&z, &[x]).unwrap();
        let mut psi = vec![0.0; z.len()];
        psi[x] = 1.0;
        let kb = kaplan_bound(&z, &om, 4.0, &psi, 2.0).unwrap();
        assert!((kb.t_up.unwrap() - 0.5 * 2f64.ln()).abs() < 1e-14);

        let kb = kaplan_bound(&z, &om, 2.0, &psi, 2.0).unwrap();
        assert!(!kb.threshold_met);
        assert_eq!(kb.t_up, None);

        let zero = vec![0.0; z.len()];
        assert!(kaplan_bound(&z, &om, 2.0, &zero, 2.0).is_err());
    }

    #[test]
    fn sandwich_arithmetic() {
        let s = sandwich_finite(&[1.0, 2.0, 1.5], 1.0, 2.0).unwrap();
        assert_eq!((s.t1, s.t2), (0.5, 1.0));
        assert!(sandwich_finite(&[0.0, 1.0], 1.0, 2.0).is_err());
    }

    #[test]
    fn heat_kernel_bound_constant_psi() {
        let g = build_graph(&GraphSpec::Path { n: 2 }).unwrap();
        let b = heat_kernel_upper_bound(&g, 0, 1.0, &[1.0, 1.0], 2.0, 3.0).unwrap().unwrap();
        assert!((b.t_up - 1.0).abs() < 1e-10);
    }
}
