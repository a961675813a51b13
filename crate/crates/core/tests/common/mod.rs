//! Independent oracles and helpers shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use spbp::topology::{generate_network, ConnectivityGraph, GenerationParams};

/// All-pairs shortest path lengths over directed links with the given
/// weights, by Floyd–Warshall. `f64::INFINITY` marks unreachable pairs.
pub fn floyd_warshall(graph: &ConnectivityGraph, weights: &[f64]) -> Vec<Vec<f64>> {
    let n = graph.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for link in graph.links() {
        let w = weights[link.id];
        if w < d[link.src][link.dst] {
            d[link.src][link.dst] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Weight of a maximum weighted independent set by enumerating all subsets.
pub fn brute_force_mwis(weights: &[f64], edges: &[(usize, usize)]) -> f64 {
    let n = weights.len();
    assert!(n <= 20);
    let mut adjacent = vec![0u32; n];
    for &(a, b) in edges {
        adjacent[a] |= 1 << b;
        adjacent[b] |= 1 << a;
    }
    let mut best = 0.0f64;
    for set in 0u32..(1 << n) {
        let independent = (0..n).all(|v| set & (1 << v) == 0 || adjacent[v] & set == 0);
        if independent {
            let w: f64 = (0..n).filter(|&v| set & (1 << v) != 0).map(|v| weights[v]).sum();
            best = best.max(w);
        }
    }
    best
}

/// A random connected undirected graph on `n` vertices: a random spanning
/// tree plus each remaining pair with probability `p`.
pub fn random_connected_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn network(n: usize, seed: u64) -> ConnectivityGraph {
    let params = GenerationParams::with_target_degree(n, 1.0, 6.0);
    generate_network(n, seed, &params).expect("network generation")
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `wins + losses` fair coin flips.
pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in wins..=n {
        p += binomial(n, k) * 0.5f64.powi(n as i32);
    }
    p
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[test]
fn oracles_agree_on_small_cases() {
    // Path 0-1-2 with weights 2, 3, 2: {0, 2} beats {1}.
    assert_eq!(brute_force_mwis(&[2.0, 3.0, 2.0], &[(0, 1), (1, 2)]), 4.0);
    assert!((sign_test_p(10, 0) - 0.5f64.powi(10)).abs() < 1e-15);
    assert!((sign_test_p(1, 1) - 0.75).abs() < 1e-15);
}
