#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinnet::graph::Graph;

/// Global maxima of `|F(1→N)|` on uniform paths over `t ∈ [0, 50]`, from an
/// independent dense scan refined with a bounded scalar optimiser.
pub const PATH_SCAN_MAXIMA: [(usize, f64, f64); 9] = [
    (4, 0.9961710408648268, 28.09926),
    (5, 0.9998478117284204, 47.14134),
    (6, 0.9547709459196108, 3.94224),
    (7, 0.9391577418179851, 4.49448),
    (8, 0.9242057750707724, 5.04087),
    (9, 0.9100080450038666, 5.58276),
    (10, 0.8965714780759434, 6.12106),
    (11, 0.883866429108642, 6.65642),
    (12, 0.8718484008270513, 7.18933),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus each remaining edge with probability `p`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((parent.min(order[i]), parent.max(order[i])));
    }
    for u in 1..=n {
        for v in u + 1..=n {
            if !edges.contains(&(u, v)) && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Any simple graph on `n` vertices, edges kept with probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn sorted_eigenvalues(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}
