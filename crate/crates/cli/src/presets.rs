//! Scenario presets: desk-scale checks with embedded assertions.

use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{anyhow, Result};
use graphblow_core::bounds::{
    asymptotic_sweep, density_bound, density_profile, lower_bound_basic, sandwich_finite,
    tail_bound, Direction, SweepOptions, SweepTable, TailSource,
};
use graphblow_core::evolution::{estimate_lifespan, LifespanOptions, LifespanTarget};
use graphblow_core::graph::volume_growth_fit;
use graphblow_core::heat_kernel::kernel_audit;
use graphblow_core::initial_data::PsiSpec;
use graphblow_core::operators::{cde_check, CdeMode, CdeVariant};
use graphblow_core::spectral::{ec_witness_search, WitnessShape};
use graphblow_core::{build_graph, graph_constants, GraphSpec, WeightedGraph};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::config_hash;
use crate::output::{num, opt_num, render_csv, Envelope, OutDir};

pub const PRESETS: &[(&str, &str)] = &[
    ("single-vertex-exact", "scalar ODE lifespans against closed forms"),
    ("symmetric-cycle", "constant data on a cycle against the ODE lifespan"),
    ("large-lambda-limit", "λ^{p−1}T_λ approaching 1/((p−1)‖ψ‖^{p−1}) on a cycle"),
    ("curvature-hypotheses", "volume growth fit, graph constants and CDE′ falsification"),
    ("small-eigenvalue-witness", "far-away domains with small principal eigenvalue on Z"),
    ("finite-sandwich", "t₁ ≤ T_λ ≤ t₂ on a random finite graph"),
    ("density-bound", "density lifespan bound for half-line data on Z"),
    ("kernel-audit", "heat kernel identities on random graphs, two methods"),
];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub seconds: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("unknown preset `{0}`")]
pub struct UnknownPreset(pub String);

struct Ctx<'a> {
    out: &'a OutDir,
    name: &'static str,
    seed: u64,
    hash: String,
    checks: Vec<Check>,
    artifacts: Vec<String>,
}

impl Ctx<'_> {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let file = format!("{}-{suffix}.csv", self.name);
        self.out.write(&file, &render_csv(&self.hash, header, rows)?)?;
        self.artifacts.push(file);
        Ok(())
    }

    fn json<R: Serialize>(&mut self, suffix: &str, kind: &str, result: R) -> Result<()> {
        let file = format!("{}-{suffix}.json", self.name);
        let env = Envelope::new(kind, json!({"preset": self.name, "seed": self.seed}), result);
        self.out.write(&file, &env.to_json())?;
        self.artifacts.push(file);
        Ok(())
    }
}

pub fn run_scenario(name: &str, seed: u64, out: &OutDir) -> Result<ScenarioReport> {
    let Some(&(name, _)) = PRESETS.iter().find(|p| p.0 == name) else {
        return Err(UnknownPreset(name.to_string()).into());
    };
    let start = Instant::now();
    let mut ctx = Ctx {
        out,
        name,
        seed,
        hash: config_hash(&json!({"preset": name, "seed": seed})),
        checks: Vec::new(),
        artifacts: Vec::new(),
    };
    match name {
        "single-vertex-exact" => single_vertex_exact(&mut ctx)?,
        "symmetric-cycle" => symmetric_cycle(&mut ctx)?,
        "large-lambda-limit" => large_lambda_limit(&mut ctx)?,
        "curvature-hypotheses" => curvature_hypotheses(&mut ctx)?,
        "small-eigenvalue-witness" => small_eigenvalue_witness(&mut ctx)?,
        "finite-sandwich" => finite_sandwich(&mut ctx)?,
        "density-bound" => density_preset(&mut ctx)?,
        "kernel-audit" => kernel_audit_preset(&mut ctx)?,
        _ => unreachable!("preset table and dispatch agree"),
    }
    let passed = ctx.checks.iter().all(|c| c.passed);
    let report = ScenarioReport {
        name: name.to_string(),
        seed,
        passed,
        checks: ctx.checks,
        artifacts: ctx.artifacts,
        seconds: start.elapsed().as_secs_f64(),
    };
    out.write(&format!("{name}-report.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

fn ode_lifespan(c: f64, p: f64) -> f64 {
    c.powf(1.0 - p) / (p - 1.0)
}

fn lifespan_on(g: &WeightedGraph, psi: &PsiSpec, lambda: f64, p: f64) -> Result<Option<f64>> {
    let est = estimate_lifespan(
        &LifespanTarget::Finite(g.clone()),
        psi,
        lambda,
        p,
        &LifespanOptions::default(),
    )?;
    Ok(est.t_est())
}

fn single_vertex_exact(ctx: &mut Ctx) -> Result<()> {
    let g = WeightedGraph::new(vec!["x".into()], vec![1.0], &[])?;
    let mut rows = Vec::new();
    for (p, u0) in [(2.0, 1.0), (3.0, 2.0)] {
        let exact = ode_lifespan(u0, p);
        let t = lifespan_on(&g, &PsiSpec::Constant { value: u0 }, 1.0, p)?;
        let err = t.map_or(f64::INFINITY, |t| (t - exact).abs());
        ctx.check(
            format!("p = {p}, u0 = {u0}"),
            err <= 1e-6,
            format!("T_est = {}, exact = {exact}, error = {err:e}", opt_num(t)),
        );
        rows.push(vec![num(p), num(u0), opt_num(t), num(exact)]);
    }
    ctx.csv("lifespans", &["p", "u0", "t_est", "exact"], &rows)
}

fn symmetric_cycle(ctx: &mut Ctx) -> Result<()> {
    let g = build_graph(&GraphSpec::Cycle { n: 8 })?;
    let c = 0.8;
    let cases = [
        (2.0, 1.0),
        (2.0, 3.0),
        (3.0, 1.0),
        (3.0, 0.5),
        (1.5, 2.0),
        (1.5, 4.0),
        (4.0, 1.0),
        (2.5, 0.7),
        (2.5, 2.0),
        (5.0, 1.5),
    ];
    let results: Vec<(f64, f64, Result<Option<f64>>)> = cases
        .par_iter()
        .map(|&(p, lambda)| (p, lambda, lifespan_on(&g, &PsiSpec::Constant { value: c }, lambda, p)))
        .collect();
    let mut rows = Vec::new();
    for (p, lambda, t) in results {
        let t = t?;
        let exact = ode_lifespan(lambda * c, p);
        let err = t.map_or(f64::INFINITY, |t| (t - exact).abs());
        ctx.check(
            format!("p = {p}, λ = {lambda}"),
            err <= 1e-6,
            format!("T_est = {}, exact = {exact}", opt_num(t)),
        );
        rows.push(vec![num(p), num(lambda), opt_num(t), num(exact)]);
    }
    ctx.csv("lifespans", &["p", "lambda", "t_est", "exact"], &rows)
}

fn sweep_rows(table: &SweepTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            let upper = r.upper_scaled.iter().map(|u| u.1).reduce(f64::min);
            vec![num(r.lambda), opt_num(r.scaled), num(r.lower_scaled), opt_num(upper)]
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 4] = ["lambda", "scaled_lifespan", "lower_bound", "upper_bound"];

fn large_lambda_limit(ctx: &mut Ctx) -> Result<()> {
    let n = 8;
    let g = build_graph(&GraphSpec::Cycle { n })?;
    let values = (0..n)
        .map(|k| (k.to_string(), 0.5 * (1.0 + (2.0 * PI * k as f64 / n as f64).cos())))
        .collect();
    let psi = PsiSpec::Values { values };
    let table = asymptotic_sweep(
        &LifespanTarget::Finite(g),
        &psi,
        2.0,
        &[10.0, 30.0, 100.0, 300.0],
        Direction::Large,
        &SweepOptions::default(),
    )?;
    let scaled: Vec<f64> = table.rows.iter().filter_map(|r| r.scaled).collect();
    ctx.check(
        "all four lifespans found",
        scaled.len() == 4 && !table.partial,
        format!("{scaled:?}"),
    );
    ctx.check(
        "λT_λ strictly decreasing",
        scaled.windows(2).all(|w| w[1] < w[0]),
        format!("{scaled:?}"),
    );
    ctx.check(
        "λT_λ ≥ 1",
        scaled.iter().all(|&s| s >= 1.0 - 1e-8),
        format!("min = {}", scaled.iter().copied().fold(f64::INFINITY, f64::min)),
    );
    ctx.check(
        "final λT_λ ≤ 1.15",
        scaled.last().is_some_and(|&s| s <= 1.15),
        format!("final = {:?}", scaled.last()),
    );
    ctx.csv("sweep", &SWEEP_HEADER, &sweep_rows(&table))?;
    ctx.json("sweep", "sweep", &table)
}

fn curvature_hypotheses(ctx: &mut Ctx) -> Result<()> {
    let z2 = build_graph(&GraphSpec::Lattice { dim: 2, radius: 20 })?;
    let origin = z2.index_of("0,0")?;
    let fit = volume_growth_fit(&z2, origin, 20)?;
    ctx.check(
        "polynomial volume growth plausible on Z²",
        fit.polynomial_flag,
        format!("m̂ = {}, R² = {}", fit.m_hat, fit.r_squared),
    );
    let consts = graph_constants(&z2);
    ctx.check(
        "D_μ and D_ω finite",
        consts.d_mu.is_finite() && consts.d_omega.is_some_and(f64::is_finite),
        format!("D_μ = {}, D_ω = {:?}", consts.d_mu, consts.d_omega),
    );
    let z1 = build_graph(&GraphSpec::Lattice { dim: 1, radius: 6 })?;
    let zero = z1.index_of("0")?;
    let small_n = cde_check(
        &z1,
        zero,
        0.01,
        0.0,
        CdeVariant::CdePrime,
        &CdeMode::Falsify { budget: 10_000, seed: ctx.seed },
    )?;
    ctx.check(
        "falsifier finds a CDE′(0.01, 0) violation on Z",
        !small_n.satisfied,
        format!("margin = {}", small_n.margin),
    );
    let mut rows = vec![vec!["Z2".into(), "vg_fit".into(), num(fit.m_hat), num(fit.r_squared)]];
    for n in [1.0, 2.0, 4.0] {
        let r = cde_check(
            &z2,
            origin,
            n,
            0.0,
            CdeVariant::CdePrime,
            &CdeMode::Falsify { budget: 4_000, seed: ctx.seed },
        )?;
        rows.push(vec![
            "Z2".into(),
            format!("cde_prime_n{n}"),
            num(r.margin),
            if r.satisfied { "no counterexample found".into() } else { "violated".into() },
        ]);
    }
    ctx.csv("hypotheses", &["graph", "quantity", "value", "note"], &rows)?;
    ctx.json("vgfit", "vgfit", &fit)
}

fn small_eigenvalue_witness(ctx: &mut Ctx) -> Result<()> {
    let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 30 })?;
    let x = z.index_of("0")?;
    let w = ec_witness_search(&z, x, 0.1, 5.0, 12)?;
    match &w {
        Some(w) => {
            ctx.check(
                "witness is a path with λ₁ < 0.1",
                w.shape == WitnessShape::Path && w.lambda1 < 0.1,
                format!("λ₁ = {}, interior size = {}", w.lambda1, w.domain.interior().len()),
            );
            ctx.check("witness lies beyond δ = 5", w.min_distance > 5, format!("min distance = {}", w.min_distance));
        }
        None => ctx.check("witness found", false, "no witness within size cap"),
    }
    let psi = PsiSpec::Constant { value: 1.0 };
    let (lambda, p) = (0.5, 2.0);
    let est = estimate_lifespan(
        &LifespanTarget::Generator(GraphSpec::Lattice { dim: 1, radius: 0 }),
        &psi,
        lambda,
        p,
        &LifespanOptions::default(),
    )?;
    let tail = tail_bound(lambda, TailSource::Known(1.0), p)?.map(|t| t.t_up);
    let lower = lower_bound_basic(lambda, 1.0, p)?;
    let t = est.t_est();
    ctx.check(
        "tail bound holds on Z",
        matches!((t, tail), (Some(t), Some(u)) if t >= lower - 1e-8 && t <= u + 1e-6),
        format!("T_est = {}, lower = {lower}, tail bound = {}", opt_num(t), opt_num(tail)),
    );
    ctx.json("witness", "witness", &w)?;
    ctx.json("lifespan", "lifespan", &est)
}

fn finite_sandwich(ctx: &mut Ctx) -> Result<()> {
    let g = build_graph(&GraphSpec::Random {
        n: 12,
        extra_edge_prob: 0.25,
        seed: ctx.seed,
    })?;
    let psi_spec = PsiSpec::Uniform {
        lo: 0.5,
        hi: 1.5,
        seed: ctx.seed.wrapping_add(1),
    };
    let psi = psi_spec.evaluate(&g)?;
    let p = 2.0;
    let lambdas = [3.0, 1.0, 0.3, 0.1];
    let results: Vec<Result<(f64, Option<f64>)>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let mut opts = LifespanOptions::default();
            opts.integrate.t_max = 100.0;
            let est = estimate_lifespan(&LifespanTarget::Finite(g.clone()), &psi_spec, lambda, p, &opts)?;
            Ok((lambda, est.t_est()))
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        let (lambda, t) = r?;
        let s = sandwich_finite(&psi, lambda, p)?;
        let ok = t.is_some_and(|t| s.t1 <= t + 1e-8 && t <= s.t2 + 1e-6);
        ctx.check(
            format!("λ = {lambda}"),
            ok,
            format!("t₁ = {}, T = {}, t₂ = {}", s.t1, opt_num(t), s.t2),
        );
        rows.push(vec![num(lambda), num(s.t1), opt_num(t), num(s.t2)]);
    }
    ctx.csv("sandwich", &["lambda", "t1", "t_est", "t2"], &rows)
}

fn density_preset(ctx: &mut Ctx) -> Result<()> {
    let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 40 })?;
    let spec = PsiSpec::HalfLine { value: 1.0 };
    let psi = spec.evaluate(&z)?;
    let grid: Vec<usize> = (1..=20).collect();
    let prof = density_profile(&z, &psi, 1.0, &grid)?;
    ctx.check(
        "D̄(1) estimate = 1",
        prof.d_bar_estimate == 1.0,
        format!("D̄ = {}", prof.d_bar_estimate),
    );
    let bound = density_bound(&prof, 2.0)?.map(|b| b.t_up);
    ctx.check("density bound T ≤ 1", bound == Some(1.0), format!("bound = {}", opt_num(bound)));
    let est = estimate_lifespan(
        &LifespanTarget::Generator(GraphSpec::Lattice { dim: 1, radius: 0 }),
        &spec,
        1.0,
        2.0,
        &LifespanOptions::default(),
    )?;
    let t = est.t_est();
    ctx.check(
        "simulated lifespan satisfies the bound",
        matches!((t, bound), (Some(t), Some(b)) if t <= b + 1e-6),
        format!("T_est = {}, converged = {}", opt_num(t), est.converged),
    );
    let rows: Vec<Vec<String>> = prof
        .per_radius
        .iter()
        .map(|&(r, d)| vec![r.to_string(), num(d)])
        .collect();
    ctx.csv("density", &["r", "density"], &rows)?;
    ctx.json("density", "density", &prof)?;
    ctx.json("lifespan", "lifespan", &est)
}

fn kernel_audit_preset(ctx: &mut Ctx) -> Result<()> {
    let seeds: Vec<u64> = (0..20).map(|i| ctx.seed.wrapping_add(i)).collect();
    let audits: Vec<Result<(usize, f64, f64)>> = seeds
        .par_iter()
        .map(|&s| {
            let n = 5 + (s % 46) as usize;
            let g = build_graph(&GraphSpec::Random {
                n,
                extra_edge_prob: 0.15,
                seed: s,
            })?;
            let a = kernel_audit(&g, &[0.1, 1.0, 5.0])?;
            Ok((n, a.max_identity_violation(), a.expm_vs_series))
        })
        .collect();
    let mut rows = Vec::new();
    for (s, a) in seeds.iter().zip(audits) {
        let (n, ident, cross) = a.map_err(|e| anyhow!("audit for seed {s}: {e}"))?;
        ctx.check(
            format!("seed {s}, {n} vertices"),
            ident <= 1e-10 && cross <= 1e-9,
            format!("identities {ident:e}, expm vs series {cross:e}"),
        );
        rows.push(vec![s.to_string(), n.to_string(), num(ident), num(cross)]);
    }
    ctx.csv("audit", &["seed", "vertices", "identity_violation", "expm_vs_series"], &rows)
}
