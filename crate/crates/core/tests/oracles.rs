//! Values computed independently (dense `expm`, full-graph solves, hand
//! derivations) and frozen here.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use common::PATH_SCAN_MAXIMA;
use num_complex::Complex64;
use spinnet::dynamics::{fidelity_scan, transfer_amplitude};
use spinnet::graph::{hypercube, path_graph, Graph};
use spinnet::pst::{find_pst_times, rationality_check, relevant_eigenvalues, Verdict};
use spinnet::spin::{
    chain_hamiltonian, engineered_couplings, full_hamiltonian, heisenberg_fields,
    xx_subspace_hamiltonian, CouplingChain, Model,
};
use spinnet::walk::{hitting_growth_profile_with, mean_hitting_time_with, RateConvention};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn path_scan_maxima() {
    for (n, max, at) in PATH_SCAN_MAXIMA {
        let h = xx_subspace_hamiltonian(&path_graph(n).unwrap());
        let s = fidelity_scan(&h, 50.0, 20_001, 1, n).unwrap();
        assert!(
            (s.peak_magnitude - max).abs() < 1e-9,
            "N={n}: {} vs {max}",
            s.peak_magnitude
        );
        assert!((s.peak_time - at).abs() < 1e-4, "N={n}: at {}", s.peak_time);
    }
}

#[test]
fn star_amplitude() {
    // Leaves 2 and 3 of the star with centre 1.
    let star = Graph::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap();
    let f = transfer_amplitude(&xx_subspace_hamiltonian(&star), 1.3, 2, 3);
    assert!((f - Complex64::new(-0.5431563530101247, 0.0)).norm() < 1e-14);
}

#[test]
fn slow_engineered_chain() {
    let h = chain_hamiltonian(&engineered_couplings(5, 1.0).unwrap());
    let f = transfer_amplitude(&h, 0.7, 1, 5);
    assert!((f - Complex64::new(0.013824799220285889, 0.0)).norm() < 1e-14);
    assert!((transfer_amplitude(&h, PI, 1, 5) - 1.0).norm() < 1e-13);
}

#[test]
fn engineered_couplings_of_six_sites() {
    let c = engineered_couplings(6, 2.0).unwrap();
    let want = [5f64.sqrt(), 2.0 * SQRT_2, 3.0, 2.0 * SQRT_2, 5f64.sqrt()];
    for (j, w) in c.couplings().iter().zip(want) {
        assert!((j - w).abs() < 1e-15);
    }
    let fields = heisenberg_fields(&c).unwrap();
    let want = [
        -0.5230897868116,
        0.8911237755614949,
        1.2730897868116,
        1.2730897868116,
        0.8911237755614949,
        -0.5230897868116,
    ];
    for (b, w) in fields.fields().iter().zip(want) {
        assert!((b - w).abs() < 1e-14);
    }
}

#[test]
fn heisenberg_four_site_full_space() {
    let chain = CouplingChain::uniform(4, 1.0).unwrap();
    let fields = heisenberg_fields(&chain).unwrap();
    let full = full_hamiltonian(&(&chain).into(), Model::Heisenberg, Some(&fields)).unwrap();
    let vacuum = full.dimension() - 1;
    assert!((full.matrix().get(vacuum, vacuum).re - 1.5).abs() < 1e-14);
    let block = full.single_excitation_block();
    for k in 0..4 {
        assert!(block[(k, k)].norm() < 1e-14);
    }
}

#[test]
fn cycle_of_six_is_rational_but_imperfect() {
    let mut edges: Vec<(usize, usize)> = (1..6).map(|v| (v, v + 1)).collect();
    edges.push((1, 6));
    let c6 = Graph::new(6, edges).unwrap().with_terminals(1, 4).unwrap();
    let h = xx_subspace_hamiltonian(&c6);
    let spec = spinnet::dynamics::spectral_decompose(&h);
    let report = rationality_check(&relevant_eigenvalues(&spec, 1, 4), 1_000_000, 1e-9).unwrap();
    assert_eq!(report.verdict, Verdict::AllRationalWithinBound);
    let scan = fidelity_scan(&h, 30.0, 3001, 1, 4).unwrap();
    assert!((scan.peak_magnitude - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!((scan.peak_time - 2.0 * PI / 3.0).abs() < 1e-9);
    assert!(find_pst_times(&h, 1, 4, 30.0, 1e-6).unwrap().is_empty());
}

#[test]
fn hitting_times_from_full_graph_solves() {
    let two_link_vertex = [
        4.0,
        18.0,
        55.28571428571437,
        155.6571428571427,
        434.6593406593358,
    ];
    let one_link_edge = [
        1.0,
        2.0,
        3.3333333333333335,
        5.33333333333333,
        8.533333333333328,
        13.866666666666637,
    ];
    let two_link_edge = [
        3.0,
        6.75,
        13.821428571428568,
        29.185714285714212,
        65.1989010989011,
    ];

    let cases = [
        (2, RateConvention::PerVertex, &two_link_vertex[..]),
        (1, RateConvention::PerEdge, &one_link_edge[..]),
        (2, RateConvention::PerEdge, &two_link_edge[..]),
    ];
    for (links, conv, want) in cases {
        let profile = hitting_growth_profile_with(want.len(), links, conv).unwrap();
        for (row, &w) in profile.rows.iter().zip(want) {
            assert!(
                close(row.hitting, w, 1e-11),
                "links={links} {conv:?} d={}: {}",
                row.d,
                row.hitting
            );
        }
        let d = 3;
        let g = hypercube(d, links).unwrap();
        let full = mean_hitting_time_with(&g, 1, g.vertex_count(), conv).unwrap();
        assert!(close(full, want[d - 1], 1e-11));
    }
}

#[test]
fn two_site_pst_window() {
    let h = xx_subspace_hamiltonian(&path_graph(2).unwrap());
    let times = find_pst_times(&h, 1, 2, 10.0, 1e-9).unwrap();
    assert_eq!(times.len(), 3);
    assert!((times[0] - FRAC_PI_2).abs() < 1e-12);
}
