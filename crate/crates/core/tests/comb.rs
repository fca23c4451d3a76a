use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qgraph_core::comb::{self, FloquetMatrix};
use qgraph_core::lattice::PeriodicGraph;
use qgraph_core::linalg;
use qgraph_core::{Error, TopologicalGraph};

#[test]
fn kagome_patch_spectrum_below_flat_band() {
    let p = PeriodicGraph::kagome_patch(4, 4);
    let ev = comb::normalized_eigenvalues(p.graph(), p.lattice_degrees()).unwrap();
    assert!(ev[0] >= -1e-12, "{}", ev[0]);
    assert!(*ev.last().unwrap() <= 1.5 + 1e-12, "{}", ev.last().unwrap());
    // With the patch's own degrees the boundary rows are renormalized and
    // the top of the spectrum leaves [0, 3/2].
    let own = comb::comb_eigenvalues(p.graph()).unwrap();
    assert!(*own.last().unwrap() > 1.5);
    assert!(own.iter().all(|&x| (-1e-12..=2.0 + 1e-12).contains(&x)));
}

#[test]
fn interior_hexagon_is_an_eigenfunction() {
    let p = PeriodicGraph::kagome_patch(4, 4);
    let (h, residual) = comb::hexagon_eigenfunction(&p, [1, 1]).unwrap();
    assert!(residual <= 1e-14, "{residual}");
    assert_eq!(h.values.iter().filter(|v| **v != 0.0).count(), 6);
    assert!(h.values.windows(2).all(|w| w[0] == -w[1]));
    assert_eq!(comb::hexagon_eigenfunction(&p, [0, 0]).unwrap_err(), Error::HexagonNotInterior(0, 0));
    assert_eq!(comb::hexagon_eigenfunction(&p, [3, 3]).unwrap_err(), Error::HexagonNotInterior(3, 3));
}

#[test]
fn hexagon_family_is_independent() {
    let p = PeriodicGraph::kagome_patch(6, 6);
    let cells: Vec<_> = p.hexagons_avoiding(&p.boundary()).into_iter().map(|(c, _)| c).collect();
    assert!(cells.len() >= 9);
    assert_eq!(comb::hexagon_family_rank(&p, &cells).unwrap(), cells.len());
}

/// `dim{f : supp f ⊂ Λ \ ∂₁Λ, Δf = (3/2)f on the lattice}` by a dense
/// nullity computation.
fn kernel_oracle(n: usize) -> usize {
    let p = PeriodicGraph::kagome_patch(n, n);
    let thick = p.thickened_boundary(1);
    let inside: Vec<usize> = (0..p.len()).filter(|v| !thick.contains(v)).collect();
    if inside.is_empty() {
        return 0;
    }
    let lap = comb::comb_laplacian_with_degrees(p.graph(), p.lattice_degrees()).unwrap();
    let m = DMatrix::from_fn(p.len(), inside.len(), |r, c| {
        lap[(r, inside[c])] - if r == inside[c] { 1.5 } else { 0.0 }
    });
    let gram = m.transpose() * &m;
    linalg::symmetric_eigenvalues(&gram).iter().filter(|&&x| x.abs() < 1e-9).count()
}

#[test]
fn hexagon_count_matches_numerical_kernel() {
    for n in 1..=7 {
        let r = comb::interior_kernel_dimension(n, 1.5).unwrap();
        assert_eq!(r.dimension, kernel_oracle(n), "n = {n}");
    }
}

#[test]
fn sandwich_tightens_toward_one_third() {
    let reports: Vec<_> = [4, 8, 16, 32].iter().map(|&n| comb::interior_kernel_dimension(n, 1.5).unwrap()).collect();
    for r in &reports {
        assert!(r.contains(1.0 / 3.0), "{r:?}");
    }
    assert!(reports.windows(2).all(|w| w[1].width() < w[0].width() && w[1].d_n >= w[0].d_n));
    let last = reports.last().unwrap();
    assert!((last.d_n - 1.0 / 3.0).abs() <= last.width());
    assert!(last.width() <= 0.15);
}

#[test]
fn floquet_grid_matches_closed_form() {
    let b = comb::floquet_bands(64).unwrap();
    assert!(b.max_closed_form_deviation <= 1e-12);
    assert!(b.flat_band_deviation <= 1e-12);
    let expect = [[0.0, 0.75], [0.75, 1.5], [1.5, 1.5]];
    for (got, want) in b.bands.iter().zip(expect) {
        assert!((got[0] - want[0]).abs() <= 1e-10 && (got[1] - want[1]).abs() <= 1e-10, "{got:?}");
    }
    assert!(matches!(comb::floquet_bands(2), Err(Error::InvalidArgument(_))));
}

#[test]
fn band_edges_converge_with_grid() {
    // Grids that miss the Dirac point approach 3/4 from either side.
    let gap = |g: usize| {
        let b = comb::floquet_bands(g).unwrap();
        (b.bands[1][0] - b.bands[0][1]).abs()
    };
    let (g1, g2) = (gap(17), gap(35));
    assert!(g2 < g1, "{g1} {g2}");
}

#[test]
fn singular_graphs_rejected() {
    let g = TopologicalGraph::new(2, vec![]).unwrap();
    assert_eq!(comb::comb_laplacian(&g).unwrap_err(), Error::IsolatedVertex(0));
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #[test]
    fn floquet_closed_form(t1 in 0.0..2.0 * PI, t2 in 0.0..2.0 * PI) {
        let f = FloquetMatrix::kagome([t1, t2]);
        let num = f.eigenvalues();
        let closed = f.closed_form();
        let check = [0.75 - 0.25 * (3.0 + 2.0 * f.kappa()).max(0.0).sqrt(), 0.75 + 0.25 * (3.0 + 2.0 * f.kappa()).max(0.0).sqrt()];
        for i in 0..3 {
            prop_assert!((num[i] - closed[i]).abs() <= 1e-12);
        }
        prop_assert!((closed[0] - check[0]).abs() <= 1e-7 && (closed[1] - check[1]).abs() <= 1e-7);
        let lattice = linalg::hermitian_eigenvalues(&comb::bloch_matrix(&PeriodicGraph::kagome(), [t1, t2]));
        for (a, b) in sorted(lattice).iter().zip(num) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn correspondence_round_trip(mu in 0.0..=2.0f64, k in 0usize..=5) {
        let l = comb::correspondence_lambda(mu, k).unwrap();
        prop_assert!((comb::correspondence_mu(l).unwrap() - mu).abs() <= 1e-12);
        if k > 0 {
            prop_assert!(comb::correspondence_lambda(mu, k - 1).unwrap() <= l);
        }
    }

    #[test]
    fn comb_spectrum_in_unit_band(extra in proptest::collection::vec((0usize..7, 0usize..7), 0..10)) {
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, i + 1)).collect();
        edges.extend(extra.into_iter().filter(|(a, b)| a != b));
        let g = TopologicalGraph::new(7, edges).unwrap();
        let lap = comb::comb_laplacian(&g).unwrap();
        let ones = nalgebra::DVector::from_element(7, 1.0);
        prop_assert!((&lap * ones).amax() <= 1e-12);
        for x in comb::comb_eigenvalues(&g).unwrap() {
            prop_assert!((-1e-12..=2.0 + 1e-12).contains(&x));
        }
    }
}
