//! Graph Laplacian, Dirichlet Laplacian, the forms Γ and Γ₂, and a
//! per-vertex checker for the exponential curvature-dimension inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DomainSubset, GraphError, WeightedGraph};

/// Real function on a subset of the vertices of a fixed host graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexFunction {
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl VertexFunction {
    /// Function defined on every vertex.
    pub fn total(values: Vec<f64>) -> Self {
        let defined = vec![true; values.len()];
        VertexFunction { values, defined }
    }

    pub fn zeros(n: usize) -> Self {
        Self::total(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::total(vec![c; n])
    }

    /// Function on `domain` only; `values` is indexed by vertex.
    pub fn on(n: usize, domain: &[usize], values: impl Fn(usize) -> f64) -> Self {
        let mut f = VertexFunction {
            values: vec![0.0; n],
            defined: vec![false; n],
        };
        for &v in domain {
            f.values[v] = values(v);
            f.defined[v] = true;
        }
        f
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<f64> {
        if self.defined.get(v).copied().unwrap_or(false) {
            Some(self.values[v])
        } else {
            None
        }
    }

    pub fn set(&mut self, v: usize, value: f64) {
        self.values[v] = value;
        self.defined[v] = true;
    }

    pub fn is_defined(&self, v: usize) -> bool {
        self.defined.get(v).copied().unwrap_or(false)
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.defined[v]).collect()
    }

    /// Raw value array; entries outside the domain hold 0.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    /// Total function equal to `self` on its domain and 0 elsewhere.
    pub fn zero_extension(&self) -> Self {
        let values = (0..self.len())
            .map(|v| if self.defined[v] { self.values[v] } else { 0.0 })
            .collect();
        Self::total(values)
    }

    /// `sup |f|` over the domain.
    pub fn sup_norm(&self) -> f64 {
        self.domain()
            .into_iter()
            .map(|v| self.values[v].abs())
            .fold(0.0, f64::max)
    }
}

fn value(g: &WeightedGraph, f: &VertexFunction, v: usize) -> Result<f64> {
    f.get(v).ok_or_else(|| Error::Undefined {
        vertex: g.id(v).to_string(),
    })
}

fn check_len(g: &WeightedGraph, f: &VertexFunction) -> Result<()> {
    if f.len() == g.len() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "function has {} slots, graph has {} vertices",
            f.len(),
            g.len()
        )))
    }
}

/// `Δf(x) = (1/μ(x)) Σ_y ω_xy (f(y) − f(x))`.
pub fn laplacian_at(g: &WeightedGraph, f: &VertexFunction, x: usize) -> Result<f64> {
    let fx = value(g, f, x)?;
    let mut acc = 0.0;
    for &(y, w) in g.neighbors(x) {
        acc += w * (value(g, f, y)? - fx);
    }
    Ok(acc / g.mu(x))
}

pub fn laplacian_apply(g: &WeightedGraph, f: &VertexFunction, at: &[usize]) -> Result<VertexFunction> {
    check_len(g, f)?;
    let mut out = VertexFunction::on(g.len(), &[], |_| 0.0);
    for &x in at {
        g.check_vertex(x)?;
        out.set(x, laplacian_at(g, f, x)?);
    }
    Ok(out)
}

/// Laplacian applied to every vertex of a total function, as a plain vector.
pub fn laplacian_dense(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    (0..g.len())
        .map(|x| {
            let fx = f[x];
            g.neighbors(x)
                .iter()
                .map(|&(y, w)| w * (f[y] - fx))
                .sum::<f64>()
                / g.mu(x)
        })
        .collect()
}

/// `Δ_Ω f` on `Ω°`: the Laplacian of the zero extension of `f` off `Ω°`.
pub fn dirichlet_laplacian_apply(
    g: &WeightedGraph,
    om: &DomainSubset,
    f: &VertexFunction,
) -> Result<VertexFunction> {
    check_len(g, f)?;
    if om.interior().is_empty() {
        return Err(GraphError::InvalidDomain("interior is empty".into()).into());
    }
    let mut ext = VertexFunction::zeros(g.len());
    for &x in om.interior() {
        ext.set(x, value(g, f, x)?);
    }
    laplacian_apply(g, &ext, om.interior())
}

/// `Γ(f, h)(x) = (1/(2μ(x))) Σ_y ω_xy (f(y) − f(x))(h(y) − h(x))`.
pub fn gamma_at(g: &WeightedGraph, f: &VertexFunction, h: &VertexFunction, x: usize) -> Result<f64> {
    let fx = value(g, f, x)?;
    let hx = value(g, h, x)?;
    let mut acc = 0.0;
    for &(y, w) in g.neighbors(x) {
        acc += w * ((value(g, f, y)? - fx) * (value(g, h, y)? - hx));
    }
    Ok(acc / (2.0 * g.mu(x)))
}

pub fn gamma(
    g: &WeightedGraph,
    f: &VertexFunction,
    h: &VertexFunction,
    at: &[usize],
) -> Result<VertexFunction> {
    check_len(g, f)?;
    check_len(g, h)?;
    let mut out = VertexFunction::on(g.len(), &[], |_| 0.0);
    for &x in at {
        g.check_vertex(x)?;
        out.set(x, gamma_at(g, f, h, x)?);
    }
    Ok(out)
}

fn closed_neighborhood(g: &WeightedGraph, x: usize) -> Vec<usize> {
    let mut s: Vec<usize> = g.neighbors(x).iter().map(|&(y, _)| y).collect();
    s.push(x);
    s
}

/// `Γ₂(f)(x) = ½(ΔΓ(f)(x) − 2Γ(f, Δf)(x))`; needs `f` on the 2-ball of `x`.
pub fn gamma2_at(g: &WeightedGraph, f: &VertexFunction, x: usize) -> Result<f64> {
    let near = closed_neighborhood(g, x);
    let gf = gamma(g, f, f, &near)?;
    let lf = laplacian_apply(g, f, &near)?;
    Ok(0.5 * (laplacian_at(g, &gf, x)? - 2.0 * gamma_at(g, f, &lf, x)?))
}

pub fn gamma2(g: &WeightedGraph, f: &VertexFunction, at: &[usize]) -> Result<VertexFunction> {
    check_len(g, f)?;
    let mut out = VertexFunction::on(g.len(), &[], |_| 0.0);
    for &x in at {
        g.check_vertex(x)?;
        out.set(x, gamma2_at(g, f, x)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdeVariant {
    /// Right side `(Δf)(x)²/n + KΓ(f)(x)`, required only where `Δf(x) < 0`.
    Cde,
    /// Right side `[f(x)(Δ log f)(x)]²/n + KΓ(f)(x)`.
    CdePrime,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CdeMode {
    Verify(VertexFunction),
    /// Randomized search over positive `f` on the 2-ball: `budget` margin
    /// evaluations, 80% Gaussian `log f` samples then 20% coordinate descent.
    Falsify { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdeCheckResult {
    pub vertex: String,
    pub n: f64,
    pub k: f64,
    pub variant: CdeVariant,
    /// `Γ₂(f)(x) − Γ(f, Γ(f)/f)(x)`.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    /// CDE with `Δf(x) ≥ 0`: the inequality imposes nothing.
    pub vacuous: bool,
    pub witness_f: VertexFunction,
    /// Margin evaluations spent (1 in verify mode).
    pub evaluations: usize,
}

/// Floating-point slack for the comparison `lhs ≥ rhs`.
pub fn cde_slack(lhs: f64, rhs: f64) -> f64 {
    1e-9 * (1.0 + lhs.abs() + rhs.abs())
}

struct CdeTerms {
    lhs: f64,
    rhs: f64,
    vacuous: bool,
}

fn cde_terms(
    g: &WeightedGraph,
    f: &VertexFunction,
    x: usize,
    n: f64,
    k: f64,
    variant: CdeVariant,
) -> Result<CdeTerms> {
    let near = closed_neighborhood(g, x);
    let gf = gamma(g, f, f, &near)?;
    let mut ratio = VertexFunction::on(g.len(), &[], |_| 0.0);
    for &y in &near {
        ratio.set(y, gf.get(y).unwrap() / value(g, f, y)?);
    }
    let lhs = gamma2_at(g, f, x)? - gamma_at(g, f, &ratio, x)?;
    let gamma_x = gf.get(x).unwrap();
    let lap_x = laplacian_at(g, f, x)?;
    let (lead, vacuous) = match variant {
        CdeVariant::Cde => (lap_x, lap_x >= 0.0),
        CdeVariant::CdePrime => {
            let mut logf = VertexFunction::on(g.len(), &[], |_| 0.0);
            for &y in &near {
                logf.set(y, value(g, f, y)?.ln());
            }
            (value(g, f, x)? * laplacian_at(g, &logf, x)?, false)
        }
    };
    Ok(CdeTerms {
        lhs,
        rhs: lead * lead / n + k * gamma_x,
        vacuous,
    })
}

fn margin_of(t: &CdeTerms) -> f64 {
    if t.vacuous {
        f64::INFINITY
    } else {
        t.lhs - t.rhs
    }
}

/// Evaluate or search for violations of CDE(x, n, K) / CDE′(x, n, K).
///
/// Falsification only ever finds counterexamples; a run without one proves nothing.
pub fn cde_check(
    g: &WeightedGraph,
    x: usize,
    n: f64,
    k: f64,
    variant: CdeVariant,
    mode: &CdeMode,
) -> Result<CdeCheckResult> {
    g.check_vertex(x)?;
    if !(n > 0.0 && n.is_finite()) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need n > 0 and finite K, got n = {n}, K = {k}"
        )));
    }
    if let Some(t) = g.truncation() {
        let d = g.distance(t.center, x)?;
        if d + 2 > t.radius {
            return Err(GraphError::Truncation {
                vertex: g.id(x).to_string(),
                requested: 2,
                available: t.radius.saturating_sub(d),
            }
            .into());
        }
    }
    let ball = g.ball(x, 2)?;
    let finish = |f: VertexFunction, terms: CdeTerms, evaluations: usize| {
        let satisfied = terms.vacuous || terms.lhs >= terms.rhs - cde_slack(terms.lhs, terms.rhs);
        CdeCheckResult {
            vertex: g.id(x).to_string(),
            n,
            k,
            variant,
            lhs: terms.lhs,
            rhs: terms.rhs,
            margin: terms.lhs - terms.rhs,
            satisfied,
            vacuous: terms.vacuous,
            witness_f: f,
            evaluations,
        }
    };
    match mode {
        CdeMode::Verify(f) => {
            check_len(g, f)?;
            for &y in &ball {
                let fy = value(g, f, y)?;
                if !(fy > 0.0) {
                    return Err(Error::NonPositive {
                        vertex: g.id(y).to_string(),
                        value: fy,
                    });
                }
            }
            let terms = cde_terms(g, f, x, n, k, variant)?;
            Ok(finish(f.clone(), terms, 1))
        }
        CdeMode::Falsify { budget, seed } => {
            if *budget == 0 {
                return Err(Error::InvalidArgument("falsify budget must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let eval = |logs: &[f64]| -> Result<(VertexFunction, CdeTerms)> {
                let f = VertexFunction::on(g.len(), &ball, |v| {
                    logs[ball.binary_search(&v).unwrap()].exp()
                });
                let t = cde_terms(g, &f, x, n, k, variant)?;
                Ok((f, t))
            };
            let sample_budget = (*budget * 4).div_ceil(5);
            let mut best_logs = vec![0.0; ball.len()];
            let (mut best_f, mut best_terms) = eval(&best_logs)?;
            let mut used = 1;
            while used < sample_budget {
                let logs: Vec<f64> = (0..ball.len()).map(|_| rng.sample(StandardNormal)).collect();
                let (f, t) = eval(&logs)?;
                used += 1;
                if margin_of(&t) < margin_of(&best_terms) {
                    best_logs = logs;
                    best_f = f;
                    best_terms = t;
                }
            }
            let mut step = 0.5;
            'descent: while used < *budget && step > 1e-8 {
                let mut improved = false;
                for i in 0..ball.len() {
                    for dir in [1.0, -1.0] {
                        if used >= *budget {
                            break 'descent;
                        }
                        let mut logs = best_logs.clone();
                        logs[i] += dir * step;
                        let (f, t) = eval(&logs)?;
                        used += 1;
                        if margin_of(&t) < margin_of(&best_terms) {
                            best_logs = logs;
                            best_f = f;
                            best_terms = t;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            Ok(finish(best_f, best_terms, used))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};

    fn path3() -> WeightedGraph {
        build_graph(&GraphSpec::Path { n: 3 }).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let g = path3();
        let f = VertexFunction::total(vec![0.0, 1.0, 0.0]);
        let l = laplacian_apply(&g, &f, &[0, 1, 2]).unwrap();
        assert_eq!(l.get(1), Some(-2.0));
        assert_eq!(l.get(0), Some(1.0));

        let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 6 }).unwrap();
        let sq = VertexFunction::total(
            z.ids().iter().map(|s| s.parse::<f64>().unwrap().powi(2)).collect(),
        );
        for id in ["-3", "0", "4"] {
            let x = z.index_of(id).unwrap();
            assert_eq!(laplacian_at(&z, &sq, x).unwrap(), 2.0);
        }
    }

    #[test]
    fn laplacian_missing_neighbor_names_vertex() {
        let g = path3();
        let f = VertexFunction::on(3, &[0, 1], |_| 1.0);
        match laplacian_apply(&g, &f, &[1]) {
            Err(Error::Undefined { vertex }) => assert_eq!(vertex, "2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dirichlet_examples() {
        let g = path3();
        let om = DomainSubset::from_interior(&g, &[1]).unwrap();
        let f = VertexFunction::on(3, &[1], |_| 1.0);
        assert_eq!(dirichlet_laplacian_apply(&g, &om, &f).unwrap().get(1), Some(-2.0));

        let g4 = build_graph(&GraphSpec::Path { n: 4 }).unwrap();
        let om = DomainSubset::from_interior(&g4, &[1, 2]).unwrap();
        let f = VertexFunction::on(4, &[1, 2], |_| 1.0);
        let out = dirichlet_laplacian_apply(&g4, &om, &f).unwrap();
        assert_eq!((out.get(1), out.get(2)), (Some(-1.0), Some(-1.0)));
        assert_eq!(out.get(0), None);
    }

    #[test]
    fn gamma_examples() {
        let g = path3();
        let f = VertexFunction::total(vec![0.0, 1.0, 0.0]);
        assert_eq!(gamma_at(&g, &f, &f, 1).unwrap(), 1.0);
        let c = VertexFunction::constant(3, 4.0);
        assert_eq!(gamma_at(&g, &c, &c, 1).unwrap(), 0.0);
        let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 4 }).unwrap();
        let c = VertexFunction::constant(z.len(), 2.5);
        assert_eq!(gamma2_at(&z, &c, z.index_of("0").unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn cde_constant_is_vacuous_with_zero_sides() {
        let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 5 }).unwrap();
        let x = z.index_of("0").unwrap();
        let f = VertexFunction::constant(z.len(), 3.0);
        for variant in [CdeVariant::Cde, CdeVariant::CdePrime] {
            let r = cde_check(&z, x, 2.0, -1.0, variant, &CdeMode::Verify(f.clone())).unwrap();
            assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
            assert!(r.satisfied);
        }
        let r = cde_check(&z, x, 2.0, 0.0, CdeVariant::Cde, &CdeMode::Verify(f)).unwrap();
        assert!(r.vacuous);
    }

    #[test]
    fn cde_rejects_nonpositive_and_edge_vertices() {
        let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 5 }).unwrap();
        let x = z.index_of("0").unwrap();
        let mut f = VertexFunction::constant(z.len(), 1.0);
        f.set(z.index_of("2").unwrap(), 0.0);
        assert!(matches!(
            cde_check(&z, x, 2.0, 0.0, CdeVariant::CdePrime, &CdeMode::Verify(f)),
            Err(Error::NonPositive { .. })
        ));
        let edge = z.index_of("4").unwrap();
        let f = VertexFunction::constant(z.len(), 1.0);
        assert!(cde_check(&z, edge, 2.0, 0.0, CdeVariant::CdePrime, &CdeMode::Verify(f)).is_err());
    }

    #[test]
    fn falsify_small_dimension() {
        let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 6 }).unwrap();
        let x = z.index_of("0").unwrap();
        let r = cde_check(
            &z,
            x,
            0.01,
            0.0,
            CdeVariant::CdePrime,
            &CdeMode::Falsify {
                budget: 10_000,
                seed: 1,
            },
        )
        .unwrap();
        assert!(r.margin < 0.0);
        assert!(!r.satisfied);
        assert_eq!(r.evaluations, 10_000);
        let again = cde_check(
            &z,
            x,
            0.01,
            0.0,
            CdeVariant::CdePrime,
            &CdeMode::Verify(r.witness_f.clone()),
        )
        .unwrap();
        assert_eq!(again.lhs.to_bits(), r.lhs.to_bits());
        assert_eq!(again.rhs.to_bits(), r.rhs.to_bits());
    }
}
