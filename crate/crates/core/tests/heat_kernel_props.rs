use graphblow_core::heat_kernel::{heat_kernel, kernel_audit, smoothed_infimum, KernelMethod, Smoother};
use graphblow_core::{build_graph, graph_constants, GraphSpec, WeightedGraph};
use proptest::prelude::*;

fn random_graph(hi: usize) -> impl Strategy<Value = WeightedGraph> {
    (2usize..hi, 0.0f64..0.3, any::<u64>()).prop_map(|(n, prob, seed)| {
        build_graph(&GraphSpec::Random {
            n,
            extra_edge_prob: prob,
            seed,
        })
        .unwrap()
    })
}

fn graph_with_two_psi() -> impl Strategy<Value = (WeightedGraph, Vec<f64>, Vec<f64>)> {
    random_graph(20).prop_flat_map(|g| {
        let n = g.len();
        (
            Just(g),
            prop::collection::vec(0.0f64..2.0, n),
            prop::collection::vec(0.0f64..1.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expm_and_series_agree(g in random_graph(50), t in 0.01f64..5.0) {
        let a = heat_kernel(&g, t, KernelMethod::Expm).unwrap();
        let b = heat_kernel(&g, t, KernelMethod::Series).unwrap();
        let diff = (&a.p - &b.p).abs().max();
        prop_assert!(diff <= 1e-9, "{diff}");
    }

    #[test]
    fn entries_bounded(g in random_graph(30), t in 0.05f64..3.0) {
        let k = heat_kernel(&g, t, KernelMethod::Expm).unwrap();
        let cap = 1.0 / graph_constants(&g).mu_min;
        for v in k.p.iter() {
            prop_assert!(*v > 0.0 && *v <= cap * (1.0 + 1e-12), "{v}");
        }
    }

    #[test]
    fn smoothing_monotone_in_psi((g, hi, gap) in graph_with_two_psi(), t in 0.01f64..3.0) {
        let lo: Vec<f64> = hi.iter().zip(&gap).map(|(h, d)| (h - d).max(0.0)).collect();
        let f_lo = Smoother::new(&g, &lo).unwrap().apply(t).unwrap();
        let f_hi = Smoother::new(&g, &hi).unwrap().apply(t).unwrap();
        for (a, b) in f_lo.iter().zip(&f_hi) {
            prop_assert!(*a <= *b + 1e-12);
        }
    }

    #[test]
    fn infimum_persists((g, psi, _) in graph_with_two_psi(), tau in 0.05f64..1.0) {
        let (inf, smoother) = smoothed_infimum(&g, tau, &psi, None).unwrap();
        for k in 1..=5 {
            let t = tau * (1.0 + k as f64);
            let f = smoother.apply(t).unwrap();
            let m = f.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(m >= inf.sigma0 - 1e-9, "{m} < {}", inf.sigma0);
        }
    }
}

#[test]
fn audit_identities_on_small_graphs() {
    for seed in 0..5 {
        let g = build_graph(&GraphSpec::Random {
            n: 12,
            extra_edge_prob: 0.2,
            seed,
        })
        .unwrap();
        let audit = kernel_audit(&g, &[0.1, 1.0, 5.0]).unwrap();
        assert!(audit.max_identity_violation() <= 1e-10, "{audit:?}");
        assert!(audit.expm_vs_series <= 1e-9);
    }
}

#[test]
fn truncated_smoother_pins_shell() {
    let g = build_graph(&GraphSpec::Lattice { dim: 1, radius: 10 }).unwrap();
    let ones = vec![1.0; g.len()];
    let s = Smoother::new(&g, &ones).unwrap();
    let f = s.apply(1.0).unwrap();
    for x in g.shell() {
        assert_eq!(f[x], 0.0);
    }
    let center = g.index_of("0").unwrap();
    assert!(f[center] < 1.0 && f[center] > 1.0 - 1e-6);
}
