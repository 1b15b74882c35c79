//! Monotone Picard iteration between an ordered lower/upper solution pair.
//!
//! Each sweep solves the shifted linear problem
//! `v_t − Δv + Mv = f(u_prev) + M u_prev`, `v(0) = u0`, exactly in the
//! eigenbasis of the Laplacian, with the Duhamel time integral done by
//! 16-point Gauss–Legendre quadrature on each subinterval.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{graph_constants, WeightedGraph};
use crate::heat_kernel::symmetric_generator;

const NODES: usize = 16;

/// Space-time function used as a lower or upper solution.
pub trait BoundingSolution {
    fn value(&self, t: f64, x: usize) -> f64;
    fn time_derivative(&self, t: f64, x: usize) -> f64;
}

/// `u ≡ 0`, a lower solution for nonnegative data.
#[derive(Debug, Clone, Copy)]
pub struct ZeroSolution;

impl BoundingSolution for ZeroSolution {
    fn value(&self, _t: f64, _x: usize) -> f64 {
        0.0
    }
    fn time_derivative(&self, _t: f64, _x: usize) -> f64 {
        0.0
    }
}

/// Spatially constant solution of `v' = v^p`, `v(0) = start`; an upper
/// solution whenever `start ≥ sup u0`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantBlowup {
    pub start: f64,
    pub p: f64,
}

impl ConstantBlowup {
    pub fn blow_up_time(&self) -> f64 {
        self.start.powf(1.0 - self.p) / (self.p - 1.0)
    }

    fn at(&self, t: f64) -> f64 {
        (self.start.powf(1.0 - self.p) - (self.p - 1.0) * t).powf(-1.0 / (self.p - 1.0))
    }
}

impl BoundingSolution for ConstantBlowup {
    fn value(&self, t: f64, _x: usize) -> f64 {
        self.at(t)
    }
    fn time_derivative(&self, t: f64, _x: usize) -> f64 {
        self.at(t).powf(self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneResult {
    /// Node times: 0, then per subinterval its Gauss nodes and right end.
    pub times: Vec<f64>,
    /// Midpoint of the final lower and upper iterates at each node time.
    pub solution: Vec<Vec<f64>>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    /// `sup(ū_k − u̲_k)` after each sweep.
    pub gaps: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub subintervals: usize,
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn lagrange_basis(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| (x - xk) / (nodes[j] - xk))
                .product()
        })
        .collect()
}

struct Quadrature {
    /// Fraction `θ` of the subinterval reached by each target (16 nodes then 1).
    thetas: Vec<f64>,
    /// `interp[target][r]`: Lagrange weights giving the integrand at `θ ξ_r`.
    interp: Vec<Vec<Vec<f64>>>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre(NODES);
        let mut thetas = nodes.clone();
        thetas.push(1.0);
        let interp = thetas
            .iter()
            .map(|&th| nodes.iter().map(|&xi| lagrange_basis(&nodes, th * xi)).collect())
            .collect();
        Quadrature {
            thetas,
            interp,
            nodes,
            weights,
        }
    }
}

/// Values of an iterate: `at[i][j]` is the state at target `j` of subinterval `i`
/// (16 Gauss nodes then the right end), in modal coordinates.
type Iterate = Vec<Vec<DVector<f64>>>;

struct Solver {
    n: usize,
    to_modal: DMatrix<f64>,
    from_modal: DMatrix<f64>,
    shift: f64,
    p: f64,
    h: f64,
    quad: Quadrature,
    /// `decay[j][r]`: per-mode factors `e^{(λ−M) θ_j h (1−ξ_r)}`.
    decay: Vec<Vec<DVector<f64>>>,
    /// `jump[j]`: `e^{(λ−M) θ_j h}`.
    jump: Vec<DVector<f64>>,
}

impl Solver {
    fn to_physical(&self, v: &DVector<f64>) -> Vec<f64> {
        (&self.from_modal * v).iter().copied().collect()
    }

    fn to_modal(&self, u: &[f64]) -> DVector<f64> {
        &self.to_modal * DVector::from_column_slice(u)
    }

    /// Right side `f(u) + Mu` in modal coordinates.
    fn forcing(&self, v: &DVector<f64>) -> DVector<f64> {
        let u = self.to_physical(v);
        let h: Vec<f64> = u
            .iter()
            .map(|&x| x.abs().powf(self.p - 1.0) * x + self.shift * x)
            .collect();
        self.to_modal(&h)
    }

    fn sweep(&self, u0: &DVector<f64>, prev: &Iterate) -> Iterate {
        let mut out = Vec::with_capacity(prev.len());
        let mut start = u0.clone();
        for interval in prev {
            let forcing: Vec<DVector<f64>> = interval[..NODES].iter().map(|v| self.forcing(v)).collect();
            let mut targets = Vec::with_capacity(NODES + 1);
            for (j, &theta) in self.quad.thetas.iter().enumerate() {
                let mut v = start.component_mul(&self.jump[j]);
                for r in 0..NODES {
                    let mut hr = DVector::zeros(self.n);
                    for (q, fq) in forcing.iter().enumerate() {
                        hr.axpy(self.quad.interp[j][r][q], fq, 1.0);
                    }
                    let w = theta * self.h * self.quad.weights[r];
                    v += hr.component_mul(&self.decay[j][r]) * w;
                }
                targets.push(v);
            }
            start = targets[NODES].clone();
            out.push(targets);
        }
        out
    }
}

fn defect_scale(terms: &[f64]) -> f64 {
    1e-9 * (1.0 + terms.iter().map(|t| t.abs()).sum::<f64>())
}

/// Monotone iteration on `[0, t_end]` from `lower ≤ upper` with shift `shift`.
#[allow(clippy::too_many_arguments)]
pub fn monotone_iterate(
    g: &WeightedGraph,
    u0: &[f64],
    p: f64,
    t_end: f64,
    lower: &dyn BoundingSolution,
    upper: &dyn BoundingSolution,
    shift: f64,
    iters: usize,
) -> Result<MonotoneResult> {
    let n = g.len();
    if u0.len() != n {
        return Err(Error::InvalidArgument("data length differs from graph size".into()));
    }
    if !(p > 1.0) || !(t_end > 0.0 && t_end.is_finite()) || iters == 0 {
        return Err(Error::InvalidArgument("need p > 1, T > 0 and at least one sweep".into()));
    }
    let sup = u0.iter().copied().fold(0.0, f64::max);
    if sup > 0.0 {
        let lower_basic = sup.powf(1.0 - p) / (p - 1.0);
        if t_end >= lower_basic {
            return Err(Error::InvalidArgument(format!(
                "T = {t_end} is not below the guaranteed existence time {lower_basic}"
            )));
        }
    }
    let d_mu = graph_constants(g).d_mu;
    let subintervals = ((t_end * (shift + 2.0 * d_mu)).ceil() as usize).clamp(8, 512);
    let h = t_end / subintervals as f64;
    let quad = Quadrature::new();

    let mut times = vec![0.0];
    for i in 0..subintervals {
        for &th in &quad.thetas {
            times.push(i as f64 * h + th * h);
        }
    }

    // Hypotheses of the iteration, checked on the node grid.
    let mut sup_upper: f64 = 0.0;
    for &t in &times {
        let lo: Vec<f64> = (0..n).map(|x| lower.value(t, x)).collect();
        let up: Vec<f64> = (0..n).map(|x| upper.value(t, x)).collect();
        for x in 0..n {
            if lo[x] > up[x] + defect_scale(&[lo[x], up[x]]) {
                return Err(Error::Ordering(format!(
                    "lower exceeds upper at vertex `{}`, t = {t}",
                    g.id(x)
                )));
            }
            sup_upper = sup_upper.max(up[x]);
            for (bound, vals, sign) in [(lower, &lo, 1.0), (upper, &up, -1.0)] {
                let lap: f64 = g
                    .neighbors(x)
                    .iter()
                    .map(|&(y, w)| w * (vals[y] - vals[x]))
                    .sum::<f64>()
                    / g.mu(x);
                let dt = bound.time_derivative(t, x);
                let react = vals[x].abs().powf(p - 1.0) * vals[x];
                let defect = dt - lap - react;
                if sign * defect > defect_scale(&[dt, lap, react]) {
                    let which = if sign > 0.0 { "lower" } else { "upper" };
                    return Err(Error::Ordering(format!(
                        "{which} solution has the wrong defect sign at vertex `{}`, t = {t}: {defect:e}",
                        g.id(x)
                    )));
                }
            }
        }
        if t == 0.0 {
            for x in 0..n {
                if lo[x] > u0[x] + defect_scale(&[u0[x]]) || up[x] < u0[x] - defect_scale(&[u0[x]]) {
                    return Err(Error::Ordering(format!(
                        "initial data not between the bounds at vertex `{}`",
                        g.id(x)
                    )));
                }
            }
        }
    }
    let needed = p * sup_upper.powf(p - 1.0);
    if shift < needed {
        return Err(Error::InvalidArgument(format!(
            "shift {shift} is below the Lipschitz bound {needed}"
        )));
    }

    let eig = SymmetricEigen::new(symmetric_generator(g));
    let sqrt_mu = DVector::from_iterator(n, g.measures().iter().map(|m| m.sqrt()));
    let q = eig.eigenvectors;
    let to_modal = q.transpose() * DMatrix::from_diagonal(&sqrt_mu);
    let from_modal = DMatrix::from_diagonal(&sqrt_mu.map(|s| 1.0 / s)) * &q;
    let rates = eig.eigenvalues.map(|l| l - shift);
    let decay = quad
        .thetas
        .iter()
        .map(|&th| {
            quad.nodes
                .iter()
                .map(|&xi| rates.map(|r| (r * th * h * (1.0 - xi)).exp()))
                .collect()
        })
        .collect();
    let jump = quad
        .thetas
        .iter()
        .map(|&th| rates.map(|r| (r * th * h).exp()))
        .collect();
    let solver = Solver {
        n,
        to_modal,
        from_modal,
        shift,
        p,
        h,
        quad,
        decay,
        jump,
    };

    let init = |b: &dyn BoundingSolution| -> Iterate {
        (0..subintervals)
            .map(|i| {
                solver
                    .quad
                    .thetas
                    .iter()
                    .map(|&th| {
                        let t = i as f64 * h + th * h;
                        let u: Vec<f64> = (0..n).map(|x| b.value(t, x)).collect();
                        solver.to_modal(&u)
                    })
                    .collect()
            })
            .collect()
    };
    let flatten = |it: &Iterate| -> Vec<Vec<f64>> {
        let mut rows = vec![u0.to_vec()];
        for interval in it {
            for v in interval {
                rows.push(solver.to_physical(v));
            }
        }
        rows
    };

    let u0_modal = solver.to_modal(u0);
    let mut lo_it = init(lower);
    let mut up_it = init(upper);
    let mut lo_rows = flatten(&lo_it);
    let mut up_rows = flatten(&up_it);
    // Bounding functions need not match u0 at t = 0; the iterates do.
    lo_rows[0] = (0..n).map(|x| lower.value(0.0, x)).collect();
    up_rows[0] = (0..n).map(|x| upper.value(0.0, x)).collect();
    let mut gaps = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let scale = sup_upper.max(1.0);
    for _ in 0..iters {
        iterations += 1;
        let lo_next = solver.sweep(&u0_modal, &lo_it);
        let up_next = solver.sweep(&u0_modal, &up_it);
        let lo_new = flatten(&lo_next);
        let up_new = flatten(&up_next);
        let tol = 1e-10 * scale;
        let mut gap: f64 = 0.0;
        for (k, t) in times.iter().enumerate() {
            for x in 0..n {
                let (l, u) = (lo_new[k][x], up_new[k][x]);
                if l > u + tol || l < lo_rows[k][x] - tol || u > up_rows[k][x] + tol {
                    return Err(Error::Ordering(format!(
                        "iterates lost their ordering at vertex `{}`, t = {t} \
                         (lower {l}, upper {u}, previous [{}, {}])",
                        g.id(x),
                        lo_rows[k][x],
                        up_rows[k][x]
                    )));
                }
                gap = gap.max(u - l);
            }
        }
        gaps.push(gap);
        lo_it = lo_next;
        up_it = up_next;
        lo_rows = lo_new;
        up_rows = up_new;
        if gap <= 1e-13 * scale {
            converged = true;
            break;
        }
    }
    let solution = lo_rows
        .iter()
        .zip(&up_rows)
        .map(|(l, u)| l.iter().zip(u).map(|(a, b)| 0.5 * (a + b)).collect())
        .collect();
    Ok(MonotoneResult {
        times,
        solution,
        lower: lo_rows,
        upper: up_rows,
        gaps,
        iterations,
        converged,
        subintervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(NODES);
        for k in 0..(2 * NODES) {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn zero_data_zero_bounds() {
        let g = build_graph(&GraphSpec::Cycle { n: 5 }).unwrap();
        let r = monotone_iterate(&g, &[0.0; 5], 2.0, 1.0, &ZeroSolution, &ZeroSolution, 0.0, 10)
            .unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert!(r.solution.iter().flatten().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn cycle_constant_solution() {
        let g = build_graph(&GraphSpec::Cycle { n: 6 }).unwrap();
        let upper = ConstantBlowup { start: 1.0, p: 2.0 };
        let t_end = 0.5 * upper.blow_up_time();
        let shift = 2.0 * upper.value(t_end, 0);
        let r = monotone_iterate(&g, &[1.0; 6], 2.0, t_end, &ZeroSolution, &upper, shift, 200)
            .unwrap();
        assert!(r.converged, "gaps {:?}", r.gaps);
        for w in r.gaps.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
        }
        for (t, u) in r.times.iter().zip(&r.solution) {
            let exact = 1.0 / (1.0 - t);
            for &v in u {
                assert!((v - exact).abs() < 1e-9, "t = {t}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn rejects_window_past_existence_bound() {
        let g = build_graph(&GraphSpec::Cycle { n: 4 }).unwrap();
        let upper = ConstantBlowup { start: 1.0, p: 2.0 };
        assert!(monotone_iterate(&g, &[1.0; 4], 2.0, 1.0, &ZeroSolution, &upper, 100.0, 5).is_err());
    }
}
