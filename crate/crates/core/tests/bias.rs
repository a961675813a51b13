mod common;

use proptest::prelude::*;
use spbp::bias::{compute_bias, edge_weights, BiasScheme};
use spbp::topology::{assign_link_rates, ConnectivityGraph, Point};
use spbp::Error;

use common::{floyd_warshall, network};

#[test]
fn unit_triangle() {
    let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.8)];
    let pairs = [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)];
    let g = ConnectivityGraph::from_links(pos, &pairs, 1.0);
    let b = compute_bias(&g, &[1.0; 6], &[2]).unwrap();
    assert_eq!((b.get(0, 0), b.get(1, 0), b.get(2, 0)), (1.0, 1.0, 0.0));
}

#[test]
fn detour_beats_expensive_direct_link() {
    // 0 -> 2 directly costs 5, via 1 costs 2 + 2.
    let pos = vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0)];
    let g = ConnectivityGraph::from_links(pos, &[(0, 2), (0, 1), (1, 2)], 1.0);
    let b = compute_bias(&g, &[5.0, 2.0, 2.0], &[2]).unwrap();
    assert_eq!(b.get(0, 0), 4.0);
}

#[test]
fn unreachable_destination_is_an_error() {
    let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
    let g = ConnectivityGraph::from_links(pos, &[(0, 1)], 1.0);
    let err = compute_bias(&g, &[1.0], &[0]).unwrap_err();
    assert!(matches!(err, Error::UnreachableDestination { node: 1, destination: 0 }));
}

#[test]
fn csv_export_has_one_row_per_node() {
    let g = network(12, 3);
    let w = edge_weights(&assign_link_rates(&g, 3), BiasScheme::SpRbar);
    let b = compute_bias(&g, &w, &[0, 5]).unwrap();
    let mut out = Vec::new();
    b.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bias_is_shortest_path_distance(n in 2usize..30, seed in any::<u64>(), rmax in any::<bool>()) {
        let g = network(n, seed);
        let scheme = if rmax { BiasScheme::SpRbarRmaxOverR } else { BiasScheme::SpRbar };
        let w = edge_weights(&assign_link_rates(&g, seed), scheme);
        let commodities: Vec<usize> = (0..n).collect();
        let b = compute_bias(&g, &w, &commodities).unwrap();
        let fw = floyd_warshall(&g, &w);
        for i in 0..n {
            for d in 0..n {
                let want = fw[i][d];
                prop_assert!((b.get(i, d) - want).abs() <= 1e-9 * want.max(1.0));
            }
            // Zero at the destination, and consistent along every link.
            prop_assert_eq!(b.get(i, i), 0.0);
        }
        for l in g.links() {
            for d in 0..n {
                prop_assert!(b.get(l.src, d) <= w[l.id] + b.get(l.dst, d) + 1e-9);
            }
        }
    }
}
