//! End-to-end acceptance run: one pass/fail line per criterion.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use graphblow_core::bounds::{
    asymptotic_sweep, density_bound, density_profile, heat_kernel_upper_bound, kaplan_bound_auto,
    lower_bound_basic, sandwich_finite, Direction, SweepOptions,
};
use graphblow_core::evolution::{
    comparison_check, duhamel_residual, estimate_lifespan, integrate, monotone_iterate,
    BoundingSolution, Bracket, ConstantBlowup, EvolutionResult, IntegrateOptions, LifespanOptions,
    LifespanTarget, ZeroSolution,
};
use graphblow_core::heat_kernel::kernel_audit;
use graphblow_core::initial_data::PsiSpec;
use graphblow_core::spectral::{
    dirichlet_ground_state, dirichlet_ground_state_dense, dirichlet_ground_state_iterative,
    ec_witness_search, WitnessShape,
};
use graphblow_core::{build_graph, DomainSubset, GraphSpec, WeightedGraph};

/// Every blow-up seen in this run: `(bracket, λ‖ψ‖_∞, p)`.
struct BlowUps(RefCell<Vec<(Bracket, f64, f64)>>);

impl BlowUps {
    fn record(&self, b: Bracket, sup_data: f64, p: f64) {
        self.0.borrow_mut().push((b, sup_data, p));
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    build_graph(&GraphSpec::Random {
        n,
        extra_edge_prob: 0.2,
        seed,
    })
    .unwrap()
}

fn finite_lifespan(
    log: &BlowUps,
    g: &WeightedGraph,
    psi: &PsiSpec,
    lambda: f64,
    p: f64,
    t_max: f64,
) -> Option<Bracket> {
    let mut opts = LifespanOptions::default();
    opts.integrate.t_max = t_max;
    let est = estimate_lifespan(&LifespanTarget::Finite(g.clone()), psi, lambda, p, &opts).unwrap();
    let b = est.bracket()?;
    log.record(b, lambda * sup(&psi.evaluate(g).unwrap()), p);
    Some(b)
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn c1_single_vertex(log: &BlowUps) -> Outcome {
    let g = WeightedGraph::new(vec!["x".into()], vec![1.0], &[]).unwrap();
    let mut worst: f64 = 0.0;
    for (p, u0, exact) in [(2.0, 1.0, 1.0), (3.0, 2.0, 0.125)] {
        let b = finite_lifespan(log, &g, &PsiSpec::Constant { value: u0 }, 1.0, p, 10.0).unwrap();
        worst = worst.max((b.lo - exact).abs());
    }
    outcome(worst <= 1e-6, format!("max |T − exact| = {worst:e}"))
}

fn c2_symmetric_cycle(log: &BlowUps) -> Outcome {
    let g = build_graph(&GraphSpec::Cycle { n: 7 }).unwrap();
    let c: f64 = 0.9;
    let cases = [
        (2.0, 1.0),
        (2.0, 5.0),
        (3.0, 1.0),
        (3.0, 0.4),
        (1.5, 2.0),
        (1.5, 6.0),
        (4.0, 1.2),
        (2.5, 0.8),
        (2.5, 3.0),
        (6.0, 1.1),
    ];
    let mut worst: f64 = 0.0;
    for (p, lambda) in cases {
        let exact = (lambda * c).powf(1.0 - p) / (p - 1.0);
        let b = finite_lifespan(log, &g, &PsiSpec::Constant { value: c }, lambda, p, 10.0 * exact).unwrap();
        worst = worst.max((b.lo - exact).abs());
    }
    outcome(worst <= 1e-6, format!("10 cases, max |T − exact| = {worst:e}"))
}

fn c3_kernel_audit() -> Outcome {
    let mut ident: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for seed in 0..20u64 {
        let g = random_graph(5 + (seed as usize * 7) % 46, 1000 + seed);
        let a = kernel_audit(&g, &[0.1, 1.0, 5.0]).unwrap();
        ident = ident.max(a.max_identity_violation());
        cross = cross.max(a.expm_vs_series);
    }
    outcome(
        ident <= 1e-10 && cross <= 1e-9,
        format!("max identity violation {ident:e}, expm vs series {cross:e}"),
    )
}

fn c4_path_eigen() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=30usize {
        let g = build_graph(&GraphSpec::Path { n: n + 2 }).unwrap();
        let interior: Vec<usize> = (1..=n).collect();
        let om = DomainSubset::from_interior(&g, &interior).unwrap();
        let exact = 2.0 * (1.0 - (PI / (n as f64 + 1.0)).cos());
        let dense = dirichlet_ground_state_dense(&g, &om).unwrap().lambda1;
        let iter = dirichlet_ground_state_iterative(&g, &om).unwrap().lambda1;
        worst = worst
            .max((dense - exact).abs() / exact)
            .max((iter - exact).abs() / exact);
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:e} (dense and iterative)"))
}

fn c6_kaplan(log: &BlowUps) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 0..20u64 {
        let g = random_graph(6 + (seed as usize % 10), 2000 + seed);
        let spec = PsiSpec::Uniform { lo: 0.0, hi: 1.0, seed: 3000 + seed };
        let psi = spec.evaluate(&g).unwrap();
        let p = 2.0 + 0.1 * (seed % 5) as f64;
        let mut lambda = 1.0;
        let kb = loop {
            if let Some(k) = kaplan_bound_auto(&g, lambda, &psi, p, 2).unwrap() {
                break k;
            }
            lambda *= 1.5;
        };
        let t_up = kb.t_up.unwrap();
        let b = finite_lifespan(log, &g, &spec, lambda, p, 2.0 * t_up).unwrap();
        checked += 1;
        if b.lo > t_up + b.width() {
            failures.push((seed, b.lo, t_up));
        }
    }
    outcome(failures.is_empty(), format!("{checked} instances, violations {failures:?}"))
}

fn c7_heat_kernel_tightness(log: &BlowUps) -> Outcome {
    let g = build_graph(&GraphSpec::Path { n: 2 }).unwrap();
    let mut worst: f64 = 0.0;
    for (p, lambda) in [(2.0, 1.0), (3.0, 0.5), (1.5, 2.0f64)] {
        let closed = lambda.powf(1.0 - p) / (p - 1.0);
        let root = heat_kernel_upper_bound(&g, 0, lambda, &[1.0, 1.0], p, 2.0 * closed)
            .unwrap()
            .unwrap()
            .t_up;
        let b = finite_lifespan(log, &g, &PsiSpec::Constant { value: 1.0 }, lambda, p, 2.0 * closed).unwrap();
        worst = worst.max((root - b.lo).abs()).max((root - closed).abs());
    }
    outcome(worst <= 1e-6, format!("max |root − T| = {worst:e}"))
}

fn c8_sandwich(log: &BlowUps) -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..10u64 {
        let g = random_graph(10, 4000 + seed);
        let spec = PsiSpec::Uniform { lo: 0.5, hi: 1.5, seed: 5000 + seed };
        let psi = spec.evaluate(&g).unwrap();
        for lambda in [3.0, 1.0, 0.3, 0.1] {
            let s = sandwich_finite(&psi, lambda, 2.0).unwrap();
            let b = finite_lifespan(log, &g, &spec, lambda, 2.0, 2.0 * s.t2).unwrap();
            if !(s.t1 <= b.lo + 1e-8 && b.lo <= s.t2 + 1e-8) {
                failures.push((seed, lambda));
            }
        }
    }
    outcome(failures.is_empty(), format!("40 cases, violations {failures:?}"))
}

fn c9_large_lambda(log: &BlowUps) -> Outcome {
    let n = 8;
    let g = build_graph(&GraphSpec::Cycle { n }).unwrap();
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
    )
    .unwrap();
    for r in &table.rows {
        if let Some(b) = r.bracket {
            log.record(b, r.lambda, 2.0);
        }
    }
    let scaled: Vec<f64> = table.rows.iter().filter_map(|r| r.scaled).collect();
    let ok = scaled.len() == 4
        && scaled.windows(2).all(|w| w[1] < w[0])
        && scaled.iter().all(|&s| s >= 1.0)
        && scaled[3] <= 1.15;
    outcome(ok, format!("λT_λ = {scaled:?}"))
}

fn c10_comparison() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100u64 {
        let g = random_graph(3 + (k as usize % 12), 6000 + k);
        let v0 = PsiSpec::Uniform { lo: 0.0, hi: 1.5, seed: 7000 + k }.evaluate(&g).unwrap();
        let frac = PsiSpec::Uniform { lo: 0.0, hi: 1.0, seed: 8000 + k }.evaluate(&g).unwrap();
        let u0: Vec<f64> = v0.iter().zip(&frac).map(|(v, f)| v * f).collect();
        let p = 1.5 + (k % 4) as f64 * 0.5;
        let window = 0.5 * lower_bound_basic(1.0, sup(&v0), p).unwrap();
        let rep = comparison_check(&g, &u0, &v0, p, window, 25, &IntegrateOptions::default()).unwrap();
        worst = worst.max(rep.max_violation);
    }
    outcome(worst <= 1e-8, format!("100 pairs, max (u − v) = {worst:e}"))
}

struct MonotoneCase {
    g: WeightedGraph,
    u0: Vec<f64>,
    rk: EvolutionResult,
}

fn c11_monotone(cases: &mut Vec<MonotoneCase>) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut gaps_ok = true;
    let mut all_converged = true;
    for k in 0..10u64 {
        let g = random_graph(4 + k as usize % 6, 9000 + k);
        let u0 = PsiSpec::Uniform { lo: 0.1, hi: 1.0, seed: 9500 + k }.evaluate(&g).unwrap();
        let p = 2.0 + 0.25 * (k % 3) as f64;
        let t_end = 0.8 * lower_bound_basic(1.0, sup(&u0), p).unwrap();
        let upper = ConstantBlowup { start: sup(&u0), p };
        let shift = p * upper.value(t_end, 0).powf(p - 1.0) * (1.0 + 1e-9);
        let m = monotone_iterate(&g, &u0, p, t_end, &ZeroSolution, &upper, shift, 400).unwrap();
        all_converged &= m.converged;
        gaps_ok &= m.gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-14);
        let opts = IntegrateOptions {
            t_max: t_end,
            output_times: m.times.clone(),
            keep_dense: true,
            ..Default::default()
        };
        let rk = integrate(&g, &u0, p, &opts).unwrap();
        for (t, sol) in m.times.iter().zip(&m.solution) {
            let s = rk.samples.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs())).unwrap();
            assert!((s.t - t).abs() <= 1e-12 * t.max(1.0), "no sample at {t}");
            for (a, b) in s.u.iter().zip(sol) {
                worst = worst.max((a - b).abs());
            }
        }
        cases.push(MonotoneCase { g, u0, rk });
    }
    outcome(
        worst <= 1e-5 && gaps_ok && all_converged,
        format!("sup-norm gap to RK {worst:e}, gaps nonincreasing: {gaps_ok}, converged: {all_converged}"),
    )
}

fn c12_duhamel(cases: &[MonotoneCase]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut windows = 0;
    for c in cases {
        let rep = duhamel_residual(&c.g, &c.rk, &c.u0, None).unwrap();
        worst = worst.max(rep.residual);
        windows += 1;
    }
    for k in 0..5u64 {
        let g = random_graph(8, 9900 + k);
        let u0 = PsiSpec::Uniform { lo: 0.0, hi: 0.6, seed: 9950 + k }.evaluate(&g).unwrap();
        let t_max = 0.9 * lower_bound_basic(1.0, sup(&u0), 3.0).unwrap();
        let opts = IntegrateOptions {
            t_max,
            output_times: (1..=8).map(|i| t_max * i as f64 / 8.0).collect(),
            keep_dense: true,
            ..Default::default()
        };
        let r = integrate(&g, &u0, 3.0, &opts).unwrap();
        worst = worst.max(duhamel_residual(&g, &r, &u0, None).unwrap().residual);
        windows += 1;
    }
    outcome(worst <= 1e-6, format!("{windows} windows, max residual {worst:e}"))
}

fn c13_ec_witness() -> Outcome {
    let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 30 }).unwrap();
    let x = z.index_of("0").unwrap();
    let w = ec_witness_search(&z, x, 0.1, 5.0, 12).unwrap().unwrap();
    let k = w.domain.interior().len();
    let closed = |k: usize| 2.0 * (1.0 - (PI / (k as f64 + 1.0)).cos());
    let is_path = w.shape == WitnessShape::Path;
    let matches_closed = (w.lambda1 - closed(k)).abs() <= 1e-10;
    // The ten-vertex path also qualifies; nine is the smallest that does.
    let ten = DomainSubset::from_interior(&z, &(0..10).map(|i| z.index_of(&(7 + i).to_string()).unwrap()).collect::<Vec<_>>()).unwrap();
    let ten_l = dirichlet_ground_state(&z, &ten).unwrap().lambda1;
    let ok = is_path
        && matches_closed
        && w.lambda1 < 0.1
        && w.min_distance > 5
        && closed(k - 1) >= 0.1
        && ten_l < 0.1
        && (ten_l - closed(10)).abs() <= 1e-10;
    outcome(
        ok,
        format!(
            "path witness with {k} interior vertices (minimal), λ₁ = {:.6}; 10-vertex path λ₁ = {ten_l:.6}",
            w.lambda1
        ),
    )
}

fn c14_density(log: &BlowUps) -> Outcome {
    let z = build_graph(&GraphSpec::Lattice { dim: 1, radius: 40 }).unwrap();
    let spec = PsiSpec::HalfLine { value: 1.0 };
    let psi = spec.evaluate(&z).unwrap();
    let grid: Vec<usize> = (1..=20).collect();
    let prof = density_profile(&z, &psi, 1.0, &grid).unwrap();
    let bound = density_bound(&prof, 2.0).unwrap().unwrap().t_up;
    let est = estimate_lifespan(
        &LifespanTarget::Generator(GraphSpec::Lattice { dim: 1, radius: 0 }),
        &spec,
        1.0,
        2.0,
        &LifespanOptions::default(),
    )
    .unwrap();
    let b = est.bracket().unwrap();
    log.record(b, 1.0, 2.0);
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_graphblow"))
        .current_dir(dir.path())
        .args(["scenario", "density-bound"])
        .output()
        .unwrap()
        .status;
    let ok = prof.d_bar_estimate == 1.0 && bound <= 1.0 && b.lo <= bound + 1e-6 && status.code() == Some(0);
    outcome(
        ok,
        format!(
            "D̄(1) = {}, bound = {bound}, T_est = {}, preset exit {:?}",
            prof.d_bar_estimate,
            b.lo,
            status.code()
        ),
    )
}

fn c5_lower_bound(log: &BlowUps) -> Outcome {
    let all = log.0.borrow();
    let bad: Vec<_> = all
        .iter()
        .filter(|(b, s, p)| b.lo < s.powf(1.0 - p) / (p - 1.0) - 1e-8)
        .collect();
    outcome(bad.is_empty(), format!("{} blow-ups checked, {} exceptions", all.len(), bad.len()))
}

#[test]
fn acceptance() {
    let log = BlowUps(RefCell::new(Vec::new()));
    let mut monotone_cases = Vec::new();
    let mut lines: Vec<(usize, &str, Outcome, f64, Option<f64>)> = Vec::new();
    let mut run = |n: usize, name: &'static str, limit: Option<f64>, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        lines.push((n, name, o, start.elapsed().as_secs_f64(), limit));
    };
    run(1, "exact ODE oracle", Some(1.0), &mut || c1_single_vertex(&log));
    run(2, "symmetric exactness", Some(5.0), &mut || c2_symmetric_cycle(&log));
    run(3, "kernel audit", Some(30.0), &mut c3_kernel_audit);
    run(4, "eigen closed form", None, &mut c4_path_eigen);
    run(6, "eigenfunction bound certification", Some(60.0), &mut || c6_kaplan(&log));
    run(7, "heat-kernel bound tightness", None, &mut || c7_heat_kernel_tightness(&log));
    run(8, "finite sandwich", None, &mut || c8_sandwich(&log));
    run(9, "large-λ trend", Some(120.0), &mut || c9_large_lambda(&log));
    run(10, "comparison principle fuzz", None, &mut c10_comparison);
    run(11, "monotone iteration cross-solver", None, &mut || c11_monotone(&mut monotone_cases));
    run(12, "Duhamel residual", None, &mut || c12_duhamel(&monotone_cases));
    run(13, "EC witness on Z", None, &mut c13_ec_witness);
    run(14, "density bound on Z", None, &mut || c14_density(&log));
    run(5, "lower-bound compliance", None, &mut || c5_lower_bound(&log));
    lines.sort_by_key(|l| l.0);

    let mut failed = Vec::new();
    for (n, name, o, secs, limit) in &lines {
        let in_time = limit.is_none_or(|l| *secs < l);
        let passed = o.passed && in_time;
        let timing = match limit {
            Some(l) => format!("{secs:.2} s, limit {l} s"),
            None => format!("{secs:.2} s"),
        };
        println!(
            "criterion {n:2} [{}] {name}: {} ({timing})",
            if passed { "PASS" } else { "FAIL" },
            o.detail
        );
        if !passed {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
