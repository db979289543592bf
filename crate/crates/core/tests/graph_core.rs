mod common;

use dcg::{cartesian_product, enumerate_geodesics, Error, GeodesicTable, Graph};
use num_bigint::BigUint;
use proptest::prelude::*;

fn count(t: &GeodesicTable, x: usize, y: usize) -> u64 {
    t.count(x, y).try_into().unwrap()
}

#[test]
fn spec_sizes() {
    let g = Graph::from_spec("two_point").unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
    let g = Graph::from_spec("hypercube:3").unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (8, 12));
}

#[test]
fn product_of_paths_is_the_square() {
    let a = Graph::from_spec("product:path:2,path:2").unwrap();
    let b = Graph::from_spec("hypercube:2").unwrap();
    assert!(common::isomorphic(&a, &b));
    let direct = cartesian_product(&Graph::path(2).unwrap(), &Graph::path(2).unwrap());
    assert!(common::isomorphic(&direct, &b));
}

#[test]
fn input_errors() {
    assert!(matches!(Graph::from_edges(3, &[(0, 1)], "x"), Err(Error::InvalidGraph(_))));
    assert!(Graph::from_edges(2, &[(0, 0), (0, 1)], "x").is_err());
    assert!(Graph::from_edges(2, &[(0, 1), (1, 0)], "x").is_err());
    assert!(Graph::from_edges(0, &[], "x").is_err());
    assert!(Graph::from_spec("complete:0").is_err());
    assert!(Graph::from_spec("wheel:5").is_err());
}

#[test]
fn hypercube_antipodes() {
    let g = Graph::hypercube(3).unwrap();
    let t = GeodesicTable::new(&g);
    assert_eq!(t.dist(0b000, 0b111), 3);
    assert_eq!(count(&t, 0b000, 0b111), 6);
    assert_eq!(enumerate_geodesics(&g, 0, 7, 100).unwrap().len(), 6);
}

#[test]
fn cycle_antipodes() {
    let g = Graph::cycle(4).unwrap();
    let t = GeodesicTable::new(&g);
    assert_eq!(t.dist(0, 2), 2);
    assert_eq!(count(&t, 0, 2), 2);
    assert_eq!(enumerate_geodesics(&g, 0, 2, 10).unwrap().len(), 2);
}

#[test]
fn through_counts() {
    let g = Graph::hypercube(2).unwrap();
    let t = GeodesicTable::new(&g);
    // 00 -> 01 -> 11 with bit 0 first is vertex 1.
    assert_eq!(t.count_through(0, 1, 3), BigUint::from(1u8));
    let p = Graph::path(3).unwrap();
    let t = GeodesicTable::new(&p);
    assert_eq!(t.count_through(0, 1, 2), BigUint::from(1u8));
    assert_eq!(enumerate_geodesics(&p, 0, 2, 10).unwrap(), vec![vec![0, 1, 2]]);
    let c = Graph::cycle(6).unwrap();
    let t = GeodesicTable::new(&c);
    for x in 0..6 {
        for y in 0..6 {
            assert_eq!(t.count_through(x, x, y), t.count(x, y));
            assert_eq!(count(&t, x, x), 1);
        }
    }
}

#[test]
fn product_count_is_multinomial() {
    let g = cartesian_product(&Graph::hypercube(3).unwrap(), &Graph::path(2).unwrap());
    let t = GeodesicTable::new(&g);
    // (000, 0) is vertex 0, (111, 1) is 7 * 2 + 1.
    assert_eq!(count(&t, 0, 15), 24);
}

#[test]
fn counts_match_enumeration_on_small_builtins() {
    for spec in ["two_point", "complete:5", "path:6", "cycle:7", "cycle:8", "hypercube:3", "product:complete:3,path:3", "product:cycle:5,path:2"] {
        let g = Graph::from_spec(spec).unwrap();
        let t = GeodesicTable::new(&g);
        let d = common::floyd(&g);
        for x in 0..g.vertex_count() {
            for y in 0..g.vertex_count() {
                assert_eq!(t.dist(x, y), d[x][y], "{spec}");
                let listed = enumerate_geodesics(&g, x, y, 1000).unwrap();
                assert_eq!(listed.len() as u64, count(&t, x, y), "{spec} {x} {y}");
                assert_eq!(common::walk_count(&g, x, y, d[x][y]), count(&t, x, y) as u128);
            }
        }
    }
}

#[test]
fn diamond_chain_exceeds_u64() {
    // m diamonds in series: 2^m geodesics end to end.
    let m = 70;
    let mut edges = Vec::new();
    for i in 0..m {
        let (a, b, c, d) = (3 * i, 3 * i + 1, 3 * i + 2, 3 * i + 3);
        edges.extend([(a, b), (a, c), (b, d), (c, d)]);
    }
    let g = Graph::from_edges(3 * m + 1, &edges, "diamonds").unwrap();
    let t = GeodesicTable::new(&g);
    assert_eq!(t.count(0, 3 * m), BigUint::from(1u8) << m);
    assert_eq!(t.dist(0, 3 * m), 2 * m);
    let mid = 3 * (m / 2);
    assert_eq!(t.count_through(0, mid, 3 * m), BigUint::from(1u8) << m);
    assert_eq!(t.through_fraction(0, mid, 3 * m), 1.0);
    assert_eq!(t.through_fraction(0, 1, 3 * m), 0.5);
    assert!(matches!(enumerate_geodesics(&g, 0, 3 * m, 1000), Err(Error::EnumerationCap { .. })));
}

#[test]
fn json_roundtrip_preserves_adjacency() {
    let g = Graph::from_spec("cycle:5").unwrap();
    let back = Graph::from_json_str(&g.to_json_string()).unwrap();
    assert_eq!(common::sorted_edges(&g), common::sorted_edges(&back));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graph_counts(seed in any::<u64>(), n in 2usize..9, extra in 0.0f64..0.6) {
        let g = common::random_connected_graph(&mut common::rng(seed), n, extra);
        let t = GeodesicTable::new(&g);
        let d = common::floyd(&g);
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(t.dist(x, y), d[x][y]);
                prop_assert_eq!(t.dist(x, y), t.dist(y, x));
                prop_assert_eq!(t.count(x, y), t.count(y, x));
                prop_assert_eq!(common::geodesics(&g, x, y).len() as u64, count(&t, x, y));
                // Every geodesic crosses each distance level exactly once.
                for k in 0..=d[x][y] {
                    let through: BigUint = (0..n).filter(|&z| d[x][z] == k).map(|z| t.count_through(x, z, y)).sum();
                    prop_assert_eq!(through, t.count(x, y));
                }
            }
        }
    }

    #[test]
    fn hypercube_counts_are_factorials(n in 1usize..7, x in any::<u32>(), y in any::<u32>()) {
        let g = Graph::hypercube(n).unwrap();
        let t = GeodesicTable::new(&g);
        let (x, y) = ((x as usize) % (1 << n), (y as usize) % (1 << n));
        let d = (x ^ y).count_ones() as u64;
        prop_assert_eq!(count(&t, x, y), (1..=d).product::<u64>());
    }
}
