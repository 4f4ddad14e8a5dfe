mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use pcrpp::generate::{gen_random, GenParams};
use pcrpp::{euler_tour, objective, odd_vertices, parse_instance, Error, Multigraph, ParseError};

fn instance_params() -> impl Strategy<Value = (u64, GenParams)> {
    (any::<u64>(), 2usize..=8, 0.0f64..=1.0).prop_flat_map(|(seed, n, density)| {
        (n - 1..=n * (n - 1) / 2).prop_map(move |m| (seed, GenParams { n, m, wmax: 10, pmax: 10, positive_density: density }))
    })
}

/// Random connected multigraph with every degree even: a spanning tree
/// doubled, plus random closed walks.
fn eulerian() -> impl Strategy<Value = (usize, Multigraph)> {
    (2usize..=7).prop_flat_map(|n| {
        (Just(n), prop::collection::vec(any::<prop::sample::Index>(), n - 1), prop::collection::vec(prop::collection::vec(0..n, 2..6), 0..4))
    })
    .prop_map(|(n, parents, cycles)| {
        let mut m = Multigraph::new();
        for (v, p) in (1..n).zip(parents) {
            m.add(p.index(v), v, 2);
        }
        for c in cycles {
            for k in 0..c.len() {
                let (a, b) = (c[k], c[(k + 1) % c.len()]);
                if a != b {
                    m.add(a, b, 1);
                }
            }
        }
        (n, m)
    })
    .prop_filter("closed walks keep parity", |(_, m)| odd_vertices(m).is_empty())
}

proptest! {
    #[test]
    fn text_round_trip((seed, p) in instance_params(), opt in prop::option::of(0.0f64..100.0)) {
        let inst = gen_random(seed, &p).unwrap().with_opt_max(opt);
        let back = parse_instance(&inst.to_text()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn euler_tour_uses_every_copy((n, m) in eulerian(), root in 0usize..7) {
        let root = root % n;
        let walk = euler_tour(&m, root).unwrap();
        prop_assert_eq!(walk.vertices.first(), Some(&root));
        prop_assert_eq!(walk.vertices.last(), Some(&root));
        let mut used: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for s in walk.vertices.windows(2) {
            *used.entry((s[0].min(s[1]), s[0].max(s[1]))).or_insert(0) += 1;
        }
        let want: BTreeMap<(usize, usize), usize> = m.iter().collect();
        prop_assert_eq!(used, want);
    }

    #[test]
    fn odd_sets_are_even(edges in prop::collection::vec((0usize..8, 0usize..8, 1usize..4), 0..20)) {
        let mut m = Multigraph::new();
        for (a, b, c) in edges {
            if a != b {
                m.add(a, b, c);
            }
        }
        prop_assert_eq!(odd_vertices(&m).len() % 2, 0);
    }

    #[test]
    fn objective_matches_recount(seed in 0u64..10_000) {
        let inst = common::small(seed);
        let sol = pcrpp::solvers::exact_oracle(&inst, 12).unwrap();
        prop_assert!((objective(&inst, &sol.walk).unwrap() - common::walk_value(&inst, &sol.walk)).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_input() {
    let cases: [(&str, fn(&ParseError) -> bool); 7] = [
        ("", |e| matches!(e, ParseError::Empty)),
        ("2 1 3\n1 2 1 1\n", |e| matches!(e, ParseError::RootOutOfRange { .. })),
        ("2 1 1\n1 2 -1 1\n", |e| matches!(e, ParseError::NegativeLength { .. })),
        ("2 1 1\n1 2 1 -1\n", |e| matches!(e, ParseError::NegativeProfit { .. })),
        ("2 2 1\n1 2 1 1\n2 1 1 1\n", |e| matches!(e, ParseError::DuplicateEdge { .. })),
        ("2 1 1\n1 1 1 1\n", |e| matches!(e, ParseError::LoopEdge { .. })),
        ("2 2 1\n1 2 1 1\n", |e| matches!(e, ParseError::EdgeCount { expected: 2, found: 1 })),
    ];
    for (text, ok) in cases {
        let e = parse_instance(text).unwrap_err();
        assert!(ok(&e), "{text:?} gave {e:?}");
    }
    assert!(matches!(parse_instance("2 1 1\n1 3 1 1\n"), Err(ParseError::VertexOutOfRange { v: 3, .. })));
    assert!(matches!(parse_instance("2 1 1\nOPTMAX x\n1 2 1 1\n"), Err(ParseError::OptMax { .. })));
}

#[test]
fn walks_must_be_closed_and_valid() {
    let inst = parse_instance(common::BARRIER).unwrap();
    let walk = |v: Vec<usize>| pcrpp::Walk { vertices: v };
    assert!((objective(&inst, &walk(vec![0, 1, 2, 0])).unwrap() - 2.1).abs() < 1e-12);
    assert!(objective(&inst, &walk(vec![0, 1])).is_err());
    assert!(objective(&inst, &walk(vec![1, 2, 1])).is_err());
    let mut m = Multigraph::new();
    m.add(0, 1, 1);
    assert!(matches!(euler_tour(&m, 0), Err(Error::OddDegree(_))));
    let mut split = Multigraph::new();
    split.add(1, 2, 2);
    assert!(matches!(euler_tour(&split, 0), Err(Error::Disconnected(0))));
}
