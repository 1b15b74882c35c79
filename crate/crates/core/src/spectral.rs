//! Principal Dirichlet eigenpair of `−Δ_Ω`, search for far-away domains with
//! small principal eigenvalue, and the ghost-vertex problem on finite graphs.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DomainSubset, GraphError, WeightedGraph};
use crate::operators::VertexFunction;

/// Interiors up to this size are solved by full dense decomposition.
pub const DENSE_LIMIT: usize = 64;
pub const INVERSE_ITERATION_TOL: f64 = 1e-10;
pub const INVERSE_ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Dense,
    InverseIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub lambda1: f64,
    /// Positive on the interior, zero on the boundary, `Σ φ μ = 1`.
    pub phi: VertexFunction,
    /// `‖−Δ_Ω φ − λ₁ φ‖_∞` over the interior.
    pub residual: f64,
    pub method: EigenMethod,
    pub iterations: usize,
}

/// Symmetrized operator `M^{1/2} (−Δ_Ω) M^{−1/2}` restricted to the interior.
struct Operator<'a> {
    g: &'a WeightedGraph,
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
    diag: Vec<f64>,
    sqrt_mu: Vec<f64>,
}

impl<'a> Operator<'a> {
    fn new(g: &'a WeightedGraph, interior: &[usize], extra: &[(usize, f64)]) -> Result<Self> {
        let mut slot = vec![None; g.len()];
        for (i, &x) in interior.iter().enumerate() {
            slot[x] = Some(i);
        }
        let mut diag: Vec<f64> = interior
            .iter()
            .map(|&x| g.weighted_degree(x) / g.mu(x))
            .collect();
        for &(x, w) in extra {
            let i = slot[x].ok_or_else(|| Error::InvalidArgument("ghost vertex outside interior".into()))?;
            diag[i] += w / g.mu(x);
        }
        let leaks = !extra.is_empty()
            || interior
                .iter()
                .any(|&x| g.neighbors(x).iter().any(|&(y, _)| slot[y].is_none()));
        if !leaks {
            return Err(GraphError::InvalidDomain(
                "boundary is empty: no interior vertex has a neighbour outside the interior".into(),
            )
            .into());
        }
        if !g.is_connected_subset(interior) {
            return Err(GraphError::InvalidDomain("interior is not connected".into()).into());
        }
        let sqrt_mu = interior.iter().map(|&x| g.mu(x).sqrt()).collect();
        Ok(Operator {
            g,
            interior: interior.to_vec(),
            slot,
            diag,
            sqrt_mu,
        })
    }

    fn dim(&self) -> usize {
        self.interior.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, &x) in self.interior.iter().enumerate() {
            let mut acc = self.diag[i] * v[i];
            for &(y, w) in self.g.neighbors(x) {
                if let Some(j) = self.slot[y] {
                    acc -= w / (self.sqrt_mu[i] * self.sqrt_mu[j]) * v[j];
                }
            }
            out[i] = acc;
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut a = DMatrix::zeros(k, k);
        let mut e = vec![0.0; k];
        let mut col = vec![0.0; k];
        for j in 0..k {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for i in 0..k {
                a[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        a
    }

    /// Convert a unit eigenvector of the symmetric form into the normalized ground state.
    fn finish(
        &self,
        lambda: f64,
        v: &[f64],
        method: EigenMethod,
        iterations: usize,
    ) -> Result<GroundState> {
        let g = self.g;
        let raw: Vec<f64> = v.iter().zip(&self.sqrt_mu).map(|(a, s)| a / s).collect();
        let mass: f64 = raw
            .iter()
            .zip(&self.interior)
            .map(|(p, &x)| p * g.mu(x))
            .sum();
        let mut phi = VertexFunction::zeros(g.len());
        for (i, &x) in self.interior.iter().enumerate() {
            phi.set(x, raw[i] / mass);
        }
        for &x in &self.interior {
            let value = phi.get(x).unwrap();
            if !(value > 0.0) {
                return Err(Error::NotPositive {
                    vertex: g.id(x).to_string(),
                    value,
                });
            }
        }
        let phi_int: Vec<f64> = self.interior.iter().map(|&x| phi.get(x).unwrap()).collect();
        let scaled: Vec<f64> = phi_int.iter().zip(&self.sqrt_mu).map(|(p, s)| p * s).collect();
        let mut out = vec![0.0; self.dim()];
        self.apply(&scaled, &mut out);
        let residual = out
            .iter()
            .zip(&self.sqrt_mu)
            .zip(&phi_int)
            .map(|((o, s), p)| (o / s - lambda * p).abs())
            .fold(0.0, f64::max);
        Ok(GroundState {
            lambda1: lambda,
            phi,
            residual,
            method,
            iterations,
        })
    }

    fn solve_dense(&self) -> Result<GroundState> {
        let eig = SymmetricEigen::new(self.dense());
        let (imin, &lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty interior");
        let v: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        self.finish(lambda, &v, EigenMethod::Dense, 1)
    }

    fn solve_inverse_iteration(&self) -> Result<GroundState> {
        let k = self.dim();
        let mut v = vec![1.0 / (k as f64).sqrt(); k];
        let mut av = vec![0.0; k];
        let mut residual = f64::INFINITY;
        for it in 1..=INVERSE_ITERATION_CAP {
            let mut w = conjugate_gradient(self, &v)?;
            let norm = dot(&w, &w).sqrt();
            w.iter_mut().for_each(|a| *a /= norm);
            v = w;
            self.apply(&v, &mut av);
            let lambda = dot(&v, &av);
            residual = av
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= INVERSE_ITERATION_TOL {
                return self.finish(lambda, &v, EigenMethod::InverseIteration, it);
            }
        }
        Err(Error::NonConvergence {
            what: "inverse iteration",
            iterations: INVERSE_ITERATION_CAP,
            residual,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conjugate_gradient(op: &Operator, b: &[f64]) -> Result<Vec<f64>> {
    let k = op.dim();
    let mut x = vec![0.0; k];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; k];
    let b_norm = dot(b, b).sqrt();
    let mut rr = dot(&r, &r);
    let cap = 20 * k + 100;
    for _ in 0..cap {
        if rr.sqrt() <= 1e-14 * b_norm {
            return Ok(x);
        }
        op.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..k {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..k {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr.sqrt() <= 1e-10 * b_norm {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            what: "conjugate gradient",
            iterations: cap,
            residual: rr.sqrt() / b_norm,
        })
    }
}

/// Smallest eigenpair of `−Δ_Ω φ = λ φ`, dense for small interiors.
pub fn dirichlet_ground_state(g: &WeightedGraph, om: &DomainSubset) -> Result<GroundState> {
    let op = Operator::new(g, om.interior(), &[])?;
    if op.dim() <= DENSE_LIMIT {
        op.solve_dense()
    } else {
        op.solve_inverse_iteration()
    }
}

/// Dense decomposition regardless of size.
pub fn dirichlet_ground_state_dense(g: &WeightedGraph, om: &DomainSubset) -> Result<GroundState> {
    Operator::new(g, om.interior(), &[])?.solve_dense()
}

/// Inverse power iteration with zero shift and conjugate-gradient solves.
pub fn dirichlet_ground_state_iterative(
    g: &WeightedGraph,
    om: &DomainSubset,
) -> Result<GroundState> {
    Operator::new(g, om.interior(), &[])?.solve_inverse_iteration()
}

/// Ground state on all of `V` with an extra vertex `z` attached to `x_tilde`
/// by a unit-weight edge and held at zero.
pub fn ghost_vertex_ground_state(g: &WeightedGraph, x_tilde: usize) -> Result<GroundState> {
    g.check_vertex(x_tilde)?;
    let all: Vec<usize> = (0..g.len()).collect();
    let op = Operator::new(g, &all, &[(x_tilde, 1.0)])?;
    if op.dim() <= DENSE_LIMIT {
        op.solve_dense()
    } else {
        op.solve_inverse_iteration()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessShape {
    Path,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcWitness {
    pub domain: DomainSubset,
    pub lambda1: f64,
    pub shape: WitnessShape,
    /// `min_{x∈Ω} d(x, x̃)`.
    pub min_distance: usize,
}

/// Look for a connected `Ω` with every vertex at distance `> delta` from
/// `x_tilde` and `λ₁(Ω) < eps`.
///
/// Candidates are geodesic path segments of 1, 2, … interior vertices
/// leading away from `x_tilde`, then balls centred on that ray, until the
/// interior would exceed `size_cap`. `Ok(None)` means no candidate qualified.
pub fn ec_witness_search(
    g: &WeightedGraph,
    x_tilde: usize,
    eps: f64,
    delta: f64,
    size_cap: usize,
) -> Result<Option<EcWitness>> {
    g.check_vertex(x_tilde)?;
    if !(eps > 0.0) || !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need eps > 0 and delta ≥ 0, got eps = {eps}, delta = {delta}"
        )));
    }
    let dist = g.distances_from(x_tilde);
    let shell = g.shell_mask();
    // Interior starts two hops beyond delta so the boundary stays beyond it too.
    let start = delta.floor() as usize + 2;
    let too_small = |requested: usize| -> Error {
        let available = dist.iter().flatten().copied().max().unwrap_or(0);
        GraphError::Truncation {
            vertex: g.id(x_tilde).to_string(),
            requested,
            available,
        }
        .into()
    };
    let anchor = (0..g.len()).find(|&v| dist[v] == Some(start) && !shell[v]);
    let Some(anchor) = anchor else {
        return if g.truncation().is_some() {
            Err(too_small(start + 1))
        } else {
            Ok(None)
        };
    };
    let mut ray = vec![anchor];
    let qualify = |interior: &[usize], shape: WitnessShape| -> Result<Option<EcWitness>> {
        let domain = DomainSubset::from_interior(g, interior)?;
        let gs = dirichlet_ground_state(g, &domain)?;
        if gs.lambda1 < eps {
            let min_distance = domain
                .all()
                .iter()
                .map(|&v| dist[v].unwrap())
                .min()
                .unwrap();
            Ok(Some(EcWitness {
                domain,
                lambda1: gs.lambda1,
                shape,
                min_distance,
            }))
        } else {
            Ok(None)
        }
    };
    for len in 1..=size_cap {
        while ray.len() < len {
            let last = *ray.last().unwrap();
            let next = g
                .neighbors(last)
                .iter()
                .map(|&(y, _)| y)
                .find(|&y| dist[y] == dist[last].map(|d| d + 1) && !shell[y]);
            match next {
                Some(y) => ray.push(y),
                None if g.truncation().is_some() => return Err(too_small(start + len)),
                None => break,
            }
        }
        if ray.len() < len {
            break;
        }
        if let Some(w) = qualify(&ray[..len], WitnessShape::Path)? {
            return Ok(Some(w));
        }
    }
    for r in 1.. {
        let Some(&center) = ray.get(r) else { break };
        let ball: Vec<usize> = g
            .ball(center, r)?
            .into_iter()
            .filter(|&v| !shell[v])
            .collect();
        if ball.len() > size_cap {
            break;
        }
        if ball.iter().any(|&v| dist[v].unwrap() < start) {
            break;
        }
        if let Some(w) = qualify(&ball, WitnessShape::Ball)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
