use proptest::prelude::*;

use polyspan::algebra::{
    distribute, fold_list, join_bag, join_list, map_bag, map_list, reduce_bag, unit_bag, unit_list,
    Bag, Boolean, MinPlus, Real, Semiring, Tropical,
};
use polyspan::algorithms::{
    bellman_ford, bellman_ford_in, bellman_ford_span, bellman_ford_step, bellman_ford_step_on,
    floyd_warshall, floyd_warshall_span, oracle_bellman_ford, oracle_floyd_warshall,
    BellmanFordState, DistanceMatrix,
};
use polyspan::carrier::{build_arrow, parse_carrier, Edge, GraphContext};
use polyspan::gnn::{mpnn_forward, Aggregator, LayerConfig};
use polyspan::span::{DataMap, FoldStrategy, PolynomialSpan, SpanSpec};

fn graph(max_n: usize, max_m: usize) -> impl Strategy<Value = GraphContext> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n, 0u64..=20), 0..=max_m).prop_map(move |es| {
            let edges = es.into_iter().map(|(u, v, w)| Edge::new(u, v, w)).collect();
            GraphContext::new(n, edges).unwrap()
        })
    })
}

fn graph_and_perm(max_n: usize, max_m: usize) -> impl Strategy<Value = (GraphContext, Vec<usize>)> {
    graph(max_n, max_m).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn tropical() -> impl Strategy<Value = Tropical> {
    prop_oneof![1 => Just(Tropical::Infinity), 4 => (0u64..50).prop_map(Tropical::Finite)]
}

fn matrix(max_n: usize) -> impl Strategy<Value = DistanceMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(tropical(), n * n).prop_map(move |mut e| {
            for i in 0..n {
                e[i * n + i] = Tropical::ZERO;
            }
            DistanceMatrix::new(n, e).unwrap()
        })
    })
}

const CARRIERS: &[&str] = &[
    "1",
    "V",
    "E",
    "V + E",
    "1 + V + E",
    "V^2",
    "V^3",
    "V * E + E * V",
    "(V + E) * (1 + V)",
    "E + (E + E) + E",
    "V^2 + V^3",
];

/// Arrows with their domain and codomain, all well typed on any graph.
const ARROWS: &[(&str, &str, &str)] = &[
    ("src", "E", "V"),
    ("tgt", "E", "V"),
    ("bang", "V + E", "1"),
    ("[id; src]", "V + E", "V"),
    (
        "[inj[1]; inj[1].src; inj[2]; inj[3]]",
        "(V + E) + (V + E)",
        "V + (V + E)",
    ),
    (
        "[inj[1]; inj[2]; inj[1]; inj[2]]",
        "(V + E) + (V + E)",
        "V + E",
    ),
    ("[id; tgt]", "V + E", "V"),
    ("[bang; src; tgt; id]", "E + (E + E) + E", "1 + V + E"),
    ("proj[1,3]", "V^3", "V^2"),
    ("proj[2]", "V^3", "V"),
    ("[proj[1,2]; proj[2,3]]", "V^3 + V^3", "V^2"),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_and_element_at_are_inverse(g in graph(8, 12), k in 0..CARRIERS.len()) {
        let c = parse_carrier(CARRIERS[k]).unwrap();
        let size = c.size(&g);
        prop_assume!(size <= 10_000);
        for (r, e) in c.elements(&g).enumerate() {
            prop_assert_eq!(c.rank(&e, &g).unwrap(), r);
            prop_assert_eq!(c.element_at(r, &g).unwrap(), e);
        }
        prop_assert!(c.element_at(size, &g).is_err());
    }

    #[test]
    fn preimages_partition_the_domain(g in graph(6, 10), k in 0..ARROWS.len()) {
        let (expr, dom, cod) = ARROWS[k];
        let (dom, cod) = (parse_carrier(dom).unwrap(), parse_carrier(cod).unwrap());
        let a = build_arrow(expr, &dom, &cod, &g).unwrap();
        let mut seen = vec![0usize; dom.size(&g)];
        for e in cod.elements(&g) {
            let pre = a.preimage(&e, &g);
            let ranks: Vec<usize> = pre.iter().map(|x| dom.rank(x, &g).unwrap()).collect();
            prop_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
            for (x, r) in pre.iter().zip(&ranks) {
                prop_assert_eq!(&a.eval(x, &g).unwrap(), &e);
                seen[*r] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn bag_monad_laws(nested in prop::collection::vec(prop::collection::vec(prop::collection::vec(0u8..6, 0..=6), 0..=6), 0..=6)) {
        let bags: Bag<Bag<Bag<u8>>> = nested
            .iter()
            .map(|m| m.iter().map(|l| l.iter().copied().collect()).collect())
            .collect();
        prop_assert_eq!(join_bag(&join_bag(&bags)), join_bag(&map_bag(join_bag, &bags)));
        let inner = join_bag(&bags);
        prop_assert_eq!(join_bag(&unit_bag(inner.clone())), inner.clone());
        prop_assert_eq!(join_bag(&map_bag(|x| unit_bag(x.clone()), &inner)), inner);
        prop_assert_eq!(join_list(&join_list(&nested)), join_list(&map_list(|m| join_list(m), &nested)));
        let flat = join_list(&join_list(&nested));
        prop_assert_eq!(join_list(&unit_list(flat.clone())), flat.clone());
        prop_assert_eq!(join_list(&map_list(|x| unit_list(*x), &flat)), flat);
    }

    #[test]
    fn aggregation_respects_nesting(nested in prop::collection::vec(prop::collection::vec(tropical(), 0..=5), 0..=5)) {
        let bags: Bag<Bag<Tropical>> = nested.iter().map(|l| l.iter().copied().collect()).collect();
        let lhs = reduce_bag(&MinPlus, &join_bag(&bags));
        let rhs = reduce_bag(&MinPlus, &map_bag(|b| reduce_bag(&MinPlus, b), &bags));
        prop_assert_eq!(lhs, rhs);
        let folded = fold_list(&MinPlus, &join_list(&nested));
        let inner: Vec<Tropical> = nested.iter().map(|l| fold_list(&MinPlus, l)).collect();
        prop_assert_eq!(folded, fold_list(&MinPlus, &inner));
    }

    #[test]
    fn reduce_ignores_presentation_order(mut xs in prop::collection::vec(-100i32..100, 0..12), seed in any::<u64>()) {
        let vals: Vec<f64> = xs.iter().map(|&x| f64::from(x) / 4.0).collect();
        let a: Bag<f64> = vals.iter().copied().collect();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(xs.as_mut_slice(), &mut rng);
        let b: Bag<f64> = xs.iter().map(|&x| f64::from(x) / 4.0).collect();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(reduce_bag(&Real, &a), reduce_bag(&Real, &b));
    }

    /// `⊕` over all selections of `⊗`-products equals the product of sums.
    #[test]
    fn distribute_expands_products(factors in prop::collection::vec(prop::collection::vec(0u64..20, 0..=3), 0..=3)) {
        let bags: Vec<Bag<Tropical>> =
            factors.iter().map(|f| f.iter().map(|&x| Tropical::Finite(x)).collect()).collect();
        let selections = distribute(&bags);
        let expected: usize = factors.iter().map(Vec::len).product();
        prop_assert_eq!(selections.cardinality(), expected);
        let lhs = reduce_bag(&MinPlus, &map_bag(|l| fold_list(&MinPlus, l), &selections));
        let rhs = bags.iter().fold(MinPlus.one(), |acc, b| MinPlus.times(&acc, &reduce_bag(&MinPlus, b)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn stages_compose_to_the_transform(g in graph(7, 14), d in prop::collection::vec(tropical(), 7)) {
        let span = bellman_ford_span(&g);
        let st = BellmanFordState::from_graph(&g, d[..g.node_count()].to_vec()).unwrap();
        let f = DataMap::from_terms(
            span.w().clone(),
            &g,
            1,
            vec![st.distances.values().to_vec(), st.bias.values().to_vec(), st.weights.values().to_vec()],
        )
        .unwrap();
        let pulled = span.pullback(&f).unwrap();
        let msgs = span.argument_pushforward(&MinPlus, &FoldStrategy::Semiring, &pulled).unwrap();
        let staged = span.message_pushforward(&MinPlus, &msgs, None).unwrap();
        prop_assert_eq!(&staged, &span.integral_transform(&MinPlus, &FoldStrategy::Semiring, &f, None).unwrap());
        // Each stage against the list and bag machinery directly.
        for (y, channels) in span.argument_lists(&pulled).unwrap().iter().enumerate() {
            prop_assert_eq!(msgs.get(y, 0), &fold_list(&MinPlus, &channels[0]));
        }
        for (z, channels) in span.message_bags(&msgs).unwrap().iter().enumerate() {
            prop_assert_eq!(staged.get(z, 0), &reduce_bag(&MinPlus, &channels[0]));
        }
    }

    #[test]
    fn transform_is_equivariant((g, perm) in graph_and_perm(8, 16), d in prop::collection::vec(tropical(), 8)) {
        let n = g.node_count();
        let pg = g.permuted(&perm).unwrap();
        let st = BellmanFordState::from_graph(&g, d[..n].to_vec()).unwrap();
        let mut pd = vec![Tropical::Infinity; n];
        for v in 0..n {
            pd[perm[v]] = d[v];
        }
        let pst = BellmanFordState::from_graph(&pg, pd).unwrap();
        let out = bellman_ford_step(&g, &st).unwrap();
        let pout = bellman_ford_step(&pg, &pst).unwrap();
        prop_assert_eq!(out.permuted(&g, &perm).unwrap(), pout);

        let reach = |h: &GraphContext, src: usize| {
            bellman_ford_in(&Boolean, h, src, vec![true; h.edge_count()]).unwrap()
        };
        prop_assert_eq!(reach(&g, 0).permuted(&g, &perm).unwrap(), reach(&pg, perm[0]));

        let real = |h: &GraphContext, x: Vec<f64>| {
            let span = bellman_ford_span(h);
            let w = h.weights().map(|t| t.to_f64() / 7.0).collect();
            let st = BellmanFordState::new(&Real, h, x, w).unwrap();
            bellman_ford_step_on(&Real, &span, &st).unwrap()
        };
        let x: Vec<f64> = d[..n].iter().map(|t| t.finite().map_or(0.5, |v| v as f64 / 3.0)).collect();
        let mut px = vec![0.0; n];
        for v in 0..n {
            px[perm[v]] = x[v];
        }
        let a = real(&g, x).permuted(&g, &perm).unwrap();
        let b = real(&pg, px);
        for (p, q) in a.values().iter().zip(b.values()) {
            prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-12));
        }
    }

    #[test]
    fn full_mode_transform_is_equivariant(d in matrix(5), seed in any::<u64>()) {
        let n = d.size();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let g = GraphContext::complete(n);
        let span = floyd_warshall_span(n);
        let v2 = parse_carrier("V^2").unwrap();
        let f = DataMap::from_column(v2.clone(), &g, d.entries().to_vec()).unwrap();
        let run = |m: &DataMap<Tropical>| span.integral_transform(&MinPlus, &FoldStrategy::Semiring, m, None).unwrap();
        let lhs = run(&f.permuted(&g, &perm).unwrap());
        let rhs = run(&f).permuted(&g, &perm).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bellman_ford_iterates_downward(g in graph(8, 20), src in 0usize..8) {
        let src = src % g.node_count();
        let mut d = vec![Tropical::Infinity; g.node_count()];
        d[src] = Tropical::ZERO;
        let mut st = BellmanFordState::from_graph(&g, d).unwrap();
        for _ in 0..g.node_count() {
            let next = bellman_ford_step(&g, &st).unwrap();
            prop_assert!(next.values().iter().zip(st.distances.values()).all(|(a, b)| a <= b));
            st.distances = next;
        }
    }

    /// A `⊗`-identity bias acts like a zero-weight self-loop.
    #[test]
    fn unit_bias_is_a_zero_self_loop(g in graph(7, 14), d in prop::collection::vec(tropical(), 7)) {
        let n = g.node_count();
        let d = d[..n].to_vec();
        let with_bias = bellman_ford_step(&g, &BellmanFordState::from_graph(&g, d.clone()).unwrap()).unwrap();
        let mut edges = g.edges().to_vec();
        edges.extend((0..n).map(|v| Edge::new(v, v, 0)));
        let looped = GraphContext::new(n, edges).unwrap();
        let mut st = BellmanFordState::from_graph(&looped, d).unwrap();
        st.bias = DataMap::filled(parse_carrier("V").unwrap(), &looped, 1, Tropical::Infinity).unwrap();
        prop_assert_eq!(with_bias, bellman_ford_step(&looped, &st).unwrap());
    }

    #[test]
    fn boolean_bellman_ford_is_reachability(g in graph(9, 20), src in 0usize..9) {
        let n = g.node_count();
        let src = src % n;
        let got = bellman_ford_in(&Boolean, &g, src, vec![true; g.edge_count()]).unwrap();
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([src]);
        seen[src] = true;
        while let Some(u) = queue.pop_front() {
            for e in g.edges().iter().filter(|e| e.source == u) {
                if !seen[e.target] {
                    seen[e.target] = true;
                    queue.push_back(e.target);
                }
            }
        }
        prop_assert_eq!(got.values(), seen.as_slice());
    }

    #[test]
    fn algorithms_match_textbook(g in graph(12, 40), d in matrix(10), src in 0usize..12) {
        let src = src % g.node_count();
        prop_assert_eq!(bellman_ford(&g, src).unwrap().into_values(), oracle_bellman_ford(&g, src));
        prop_assert_eq!(floyd_warshall(&d).unwrap(), oracle_floyd_warshall(&d));
    }

    #[test]
    fn max_aggregation_ignores_duplicate_edges(g in graph(6, 10), extra in 0usize..10, seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        let k = extra % g.edge_count();
        let cfg = LayerConfig::new(Aggregator::Max, 2, 1, 1, seed);
        let nodes = DataMap::new(
            parse_carrier("V").unwrap(),
            &g,
            2,
            (0..2 * g.node_count()).map(|i| (i as f64).sin()).collect(),
        )
        .unwrap();
        let ev: Vec<f64> = (0..g.edge_count()).map(|i| (i as f64).cos()).collect();
        let edges = DataMap::from_column(parse_carrier("E").unwrap(), &g, ev.clone()).unwrap();
        let mut es = g.edges().to_vec();
        es.push(es[k]);
        let dup = GraphContext::new(g.node_count(), es).unwrap();
        let mut dv = ev;
        dv.push(dv[k]);
        let dup_edges = DataMap::from_column(parse_carrier("E").unwrap(), &dup, dv).unwrap();
        let a = mpnn_forward(&g, &nodes, &edges, &[0.5], &cfg).unwrap();
        let b = mpnn_forward(&dup, &nodes, &dup_edges, &[0.5], &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn span_spec_round_trips_through_json() {
    let spec = SpanSpec::new("V", "E", "E", "V", "src", "id", "tgt");
    let back = SpanSpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(spec, back);
    let g = GraphContext::new(2, vec![Edge::new(0, 1, 1)]).unwrap();
    assert!(PolynomialSpan::from_spec(&back, &g).is_ok());
}
