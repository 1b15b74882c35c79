use graphblow_core::{build_graph, DomainSubset, GraphSpec, WeightedGraph};
use proptest::prelude::*;

fn random_graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..24, 0.0f64..0.4, any::<u64>()).prop_map(|(n, prob, seed)| {
        build_graph(&GraphSpec::Random {
            n,
            extra_edge_prob: prob,
            seed,
        })
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_symmetric(g in random_graph()) {
        for (x, y, w) in g.edges() {
            prop_assert_eq!(g.weight(x, y), Some(w));
            prop_assert_eq!(g.weight(y, x), Some(w));
        }
    }

    #[test]
    fn distance_is_a_metric(g in random_graph(), a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
        let n = g.len();
        let (x, y, z) = (a % n, b % n, c % n);
        let dxy = g.distance(x, y).unwrap();
        prop_assert_eq!(dxy, g.distance(y, x).unwrap());
        prop_assert_eq!(g.distance(x, x).unwrap(), 0);
        prop_assert!(g.distance(x, z).unwrap() <= dxy + g.distance(y, z).unwrap());
    }

    #[test]
    fn ball_volume_nondecreasing(g in random_graph(), a in any::<usize>()) {
        let x = a % g.len();
        let mut prev = 0.0;
        for r in 0..6 {
            let v = g.volume(&g.ball(x, r).unwrap()).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn boundary_matches_adjacency(g in random_graph(), a in any::<usize>(), r in 1usize..3) {
        let x = a % g.len();
        let set = g.ball(x, r).unwrap();
        prop_assume!(set.len() < g.len());
        let Ok(om) = DomainSubset::from_set(&g, &set) else { return Ok(()); };
        let inside = |v: usize| set.contains(&v);
        let mut expected: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&v| g.neighbors(v).iter().any(|&(y, _)| !inside(y)))
            .collect();
        expected.sort_unstable();
        prop_assert_eq!(om.boundary(), expected.as_slice());
        let mut all = om.all();
        all.sort_unstable();
        let mut sorted = set.clone();
        sorted.sort_unstable();
        prop_assert_eq!(all, sorted);
    }
}

#[test]
fn lattice_truncation_boundary_is_shell() {
    let g = build_graph(&GraphSpec::Lattice { dim: 2, radius: 5 }).unwrap();
    let all: Vec<usize> = (0..g.len()).collect();
    let om = DomainSubset::from_set(&g, &all).unwrap();
    let mut shell = g.shell();
    shell.sort_unstable();
    assert_eq!(om.boundary(), shell.as_slice());
    assert_eq!(shell.len(), 20);
}
