use graphblow_core::bounds::{
    density_profile, heat_kernel_upper_bound, kaplan_bound, kaplan_bound_auto, lower_bound_basic,
    sandwich_finite,
};
use graphblow_core::evolution::{integrate, IntegrateOptions};
use graphblow_core::initial_data::PsiSpec;
use graphblow_core::{build_graph, DomainSubset, GraphSpec, WeightedGraph};
use proptest::prelude::*;

fn graph_and_psi() -> impl Strategy<Value = (WeightedGraph, Vec<f64>)> {
    (3usize..12, 0.0f64..0.4, any::<u64>()).prop_flat_map(|(n, prob, seed)| {
        let g = build_graph(&GraphSpec::Random {
            n,
            extra_edge_prob: prob,
            seed,
        })
        .unwrap();
        (Just(g), prop::collection::vec(0.5f64..1.5, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_ordered(psi in prop::collection::vec(0.1f64..3.0, 1..20), lambda in 0.1f64..5.0, p in 1.2f64..4.0) {
        let s = sandwich_finite(&psi, lambda, p).unwrap();
        prop_assert!(s.t1 <= s.t2);
        let constant = psi.iter().all(|&v| v == psi[0]);
        prop_assert_eq!(s.t1 == s.t2, constant);
    }

    #[test]
    fn kaplan_decreasing_in_lambda((g, psi) in graph_and_psi(), p in 1.5f64..3.0) {
        let x = 0;
        let set = g.ball(x, 1).unwrap();
        prop_assume!(set.len() < g.len());
        let Ok(om) = DomainSubset::from_interior(&g, &set) else { return Ok(()); };
        let mut prev: Option<f64> = None;
        for k in 0..12 {
            let lambda = 0.5 * 1.5f64.powi(k);
            let kb = kaplan_bound(&g, &om, lambda, &psi, p).unwrap();
            if let Some(t) = kb.t_up {
                if let Some(pt) = prev {
                    prop_assert!(t < pt);
                }
                prev = Some(t);
            } else {
                prop_assert!(prev.is_none());
            }
        }
    }

    #[test]
    fn simulated_lifespans_respect_bounds((g, psi) in graph_and_psi(), lambda in 1.0f64..6.0, p in 1.5f64..3.0) {
        let data: Vec<f64> = psi.iter().map(|v| lambda * v).collect();
        let r = integrate(&g, &data, p, &IntegrateOptions { t_max: 50.0, ..Default::default() }).unwrap();
        let b = r.blow_up_bracket().unwrap();
        let sup = psi.iter().copied().fold(0.0, f64::max);
        prop_assert!(lower_bound_basic(lambda, sup, p).unwrap() <= b.lo + 1e-8);
        let s = sandwich_finite(&psi, lambda, p).unwrap();
        prop_assert!(s.t2 >= b.lo - 1e-8);
        if let Some(k) = kaplan_bound_auto(&g, lambda, &psi, p, 2).unwrap() {
            prop_assert!(k.t_up.unwrap() >= b.lo - 1e-8);
        }
    }

    #[test]
    fn density_nonincreasing_in_beta(seed in any::<u64>()) {
        let g = build_graph(&GraphSpec::Lattice { dim: 1, radius: 20 }).unwrap();
        let psi = PsiSpec::Uniform { lo: 0.0, hi: 2.0, seed }.evaluate(&g).unwrap();
        let grid = [1usize, 2, 4, 8];
        let mut prev: Option<Vec<f64>> = None;
        for beta in [0.25, 0.5, 1.0, 1.5] {
            let prof = density_profile(&g, &psi, beta, &grid).unwrap();
            let d: Vec<f64> = prof.per_radius.iter().map(|r| r.1).collect();
            for v in &d {
                prop_assert!((0.0..=1.0).contains(v));
            }
            if let Some(pd) = &prev {
                for (a, b) in d.iter().zip(pd) {
                    prop_assert!(a <= b);
                }
            }
            prev = Some(d);
        }
    }
}

#[test]
fn heat_kernel_bound_reduces_to_ode() {
    for (n, p, lambda) in [(2, 2.0, 1.0), (5, 3.0, 0.7), (8, 1.5, 2.0)] {
        let g = build_graph(&GraphSpec::Cycle { n: n.max(3) }).unwrap();
        let psi = vec![1.0; g.len()];
        let lb = lower_bound_basic(lambda, 1.0, p).unwrap();
        let hk = heat_kernel_upper_bound(&g, 0, lambda, &psi, p, 2.0 * lb).unwrap().unwrap();
        assert!((hk.t_up - lb).abs() <= 1e-8, "{} vs {lb}", hk.t_up);
    }
}
