use std::f64::consts::PI;

use qgraph_core::graph::{MetricGraph, Subgraph, TopologicalGraph};
use qgraph_core::ids;
use qgraph_core::lattice::{EdgeKey, PeriodicGraph};
use qgraph_core::random::{
    act, ks_critical_1pct, ks_distance, log_transform, make_density, sample, DensityFamily, LengthDistribution,
    RandomLengthModel,
};
use qgraph_core::spectra::{decouple, fd, SolverOptions};
use qgraph_core::{Error, OperatorSpec, Sequential};

fn bump(lo: f64, hi: f64) -> LengthDistribution {
    LengthDistribution::Density(make_density(lo, hi, DensityFamily::CosineSquared).unwrap())
}

fn kagome(law: LengthDistribution) -> RandomLengthModel {
    RandomLengthModel::periodic(PeriodicGraph::kagome(), law)
}

fn periodic() -> RandomLengthModel {
    kagome(LengthDistribution::Fixed(1.0))
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn chain(n: usize) -> OperatorSpec {
    let top = TopologicalGraph::new(n + 1, (0..n).map(|i| (i, i + 1)).collect()).unwrap();
    OperatorSpec::dirichlet_box(MetricGraph::equilateral(top), &[0, n]).unwrap()
}

#[test]
fn single_edge_draws() {
    let m = RandomLengthModel::per_edge(vec![bump(0.5, 1.5)]);
    let keys: Vec<EdgeKey> = (0..10_000).map(|i| EdgeKey::new(0, [i, 0])).collect();
    let s = sample(&m, &keys, 42);
    assert_eq!(s, sample(&m, &keys, 42));
    assert!(s.lengths.iter().all(|l| (0.5..=1.5).contains(l)));
    let d = make_density(0.5, 1.5, DensityFamily::CosineSquared).unwrap();
    let n = s.lengths.len() as f64;
    let mean = s.lengths.iter().sum::<f64>() / n;
    let se = (d.variance() / n).sqrt();
    assert!((d.mean() - 1.0).abs() < 1e-12);
    assert!((mean - d.mean()).abs() <= 3.0 * se, "{mean} ± {se}");
    let ks = ks_distance(&s.lengths, |x| d.cdf(x));
    assert!(ks < ks_critical_1pct(s.lengths.len()), "{ks}");
}

#[test]
fn polynomial_bump_goodness_of_fit() {
    let d = make_density(0.8, 1.25, DensityFamily::PolynomialBump { power: 2 }).unwrap();
    let m = RandomLengthModel::per_edge(vec![LengthDistribution::Density(d.clone())]);
    let keys: Vec<EdgeKey> = (0..10_000).map(|i| EdgeKey::new(0, [0, i])).collect();
    let s = sample(&m, &keys, 9);
    assert!(ks_distance(&s.lengths, |x| d.cdf(x)) < ks_critical_1pct(10_000));
}

#[test]
fn log_density_bound() {
    let d = make_density(0.5, 1.5, DensityFamily::CosineSquared).unwrap();
    let lc = log_transform(&d);
    assert!((lc.omega_minus - 0.5f64.ln()).abs() < 1e-15 && (lc.omega_plus - 1.5f64.ln()).abs() < 1e-15);
    assert!(lc.attained_sup_dg <= (1.5 + 2.25) * d.c_h());
    assert!((lc.integral - 1.0).abs() <= 1e-10);
}

#[test]
fn lattice_action() {
    let m = kagome(bump(0.8, 1.25));
    let w = PeriodicGraph::kagome().folner_box(4);
    let s = sample(&m, w.edge_keys(), 5);
    assert_eq!(act(&m, [0, 0], &s).unwrap(), s);
    let t = act(&m, [1, 0], &s).unwrap();
    for &k in w.edge_keys() {
        if let Some(old) = s.get(k.translated([1, 0])) {
            assert_eq!(t.get(k).unwrap().to_bits(), old.to_bits());
        }
    }
    let composed = act(&m, [0, 2], &act(&m, [1, -1], &s).unwrap()).unwrap();
    assert_eq!(composed, act(&m, [1, 1], &s).unwrap());
    let plain = RandomLengthModel::per_edge(vec![bump(0.8, 1.25)]);
    assert_eq!(act(&plain, [1, 0], &s).unwrap_err(), Error::NotPeriodic);
}

#[test]
fn chain_ids_approaches_line() {
    let n = 200;
    let spec = chain(n);
    let whole = Subgraph::whole(spec.graph().topology());
    let grid: Vec<f64> = (0..=400).map(|i| 1.0 + 29.0 * i as f64 / 400.0).collect();
    let c = ids::finite_volume_ids(&spec, &whole, &grid, &opts()).unwrap();
    assert!(c.is_monotone());
    let worst = grid.iter().zip(&c.values).map(|(l, v)| (v - l.sqrt() / PI).abs()).fold(0.0, f64::max);
    assert!(worst <= 2.0 / n as f64, "{worst}");
    for n in [10, 40] {
        let s = chain(n);
        let v = ids::finite_volume_ids(&s, &Subgraph::whole(s.graph().topology()), &[10.0], &opts()).unwrap();
        assert!((v.values[0] - 10f64.sqrt() / PI).abs() <= 2.0 / n as f64);
    }
}

#[test]
fn ids_vanishes_below_zero() {
    let c = ids::box_ids(&kagome(bump(0.8, 1.25)), 3, 1, &[-5.0, -0.1, 0.0, 2.0, 8.0], &opts()).unwrap();
    assert_eq!(&c.values[..3], &[0.0, 0.0, 0.0]);
    assert!(c.is_monotone());
}

#[test]
fn decoupled_union_is_volume_average() {
    let spec = chain(4);
    let top = spec.graph().topology();
    let left = Subgraph::from_edges(top, &[0, 1]).unwrap();
    let d = decouple(&spec, &left).unwrap();
    let grid: Vec<f64> = (0..60).map(|i| 0.5 * i as f64).collect();
    let union = ids::finite_volume_ids(&d.dirichlet, &Subgraph::whole(d.dirichlet.graph().topology()), &grid, &opts())
        .unwrap();
    let piece = chain(2);
    let p = ids::finite_volume_ids(&piece, &Subgraph::whole(piece.graph().topology()), &grid, &opts()).unwrap();
    for (u, v) in union.values.iter().zip(&p.values) {
        assert!((u - (2.0 * v + 2.0 * v) / 4.0).abs() < 1e-15);
    }
}

#[test]
fn boundary_conditions_move_counts_by_bounded_amount() {
    let w = PeriodicGraph::kagome().folner_box(3);
    let dir = ids::box_operator(&w, w.equilateral()).unwrap();
    let kir = OperatorSpec::kirchhoff(w.equilateral()).unwrap();
    let grid: Vec<f64> = (0..80).map(|i| 0.25 * i as f64).collect();
    let a = ids::finite_volume_ids(&dir, w.subgraph(), &grid, &opts()).unwrap();
    let b = ids::finite_volume_ids(&kir, w.subgraph(), &grid, &opts()).unwrap();
    let bound = 2.0 * w.boundary_degree_sum() as f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!(((x - y) * a.volume).abs() <= bound);
    }
}

#[test]
fn exhaustion_on_periodic_kagome() {
    let grid: Vec<f64> = (0..10).map(|i| 0.5 + 0.35 * i as f64).collect();
    let t = ids::exhaustion_experiment(&periodic(), &[2, 4, 8], 0, &grid, &opts(), &Sequential).unwrap();
    assert!(t.decays && t.within_bounds, "{:?} {:?}", t.distances, t.bounds);
    assert!(t.distances[0] > t.distances[1]);
}

#[test]
fn random_curves_self_average() {
    let m = kagome(bump(0.8, 1.25));
    let grid: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
    let spread = |n: usize| {
        let a = ids::box_ids(&m, n, 11, &grid, &opts()).unwrap();
        let b = ids::box_ids(&m, n, 12, &grid, &opts()).unwrap();
        assert_ne!(a.values, b.values);
        a.mean_distance(&b)
    };
    let (small, large) = (spread(2), spread(8));
    assert!(large < small, "{small} {large}");
}

#[test]
fn localized_trace_single_sample() {
    let m = kagome(bump(0.8, 1.25));
    let grid: Vec<f64> = (0..25).map(|i| 0.5 * i as f64).collect();
    let a = ids::abstract_ids_mc(&m, &grid, 1, 4, 8, 77, &Sequential).unwrap();
    assert_eq!(a.samples, 1);
    assert!(a.std_error.iter().all(|&s| s == 0.0));
    // Direct evaluation of the same estimator for seed 77.
    let (window, spec) = ids::sampled_box(&m, 4, 77).unwrap();
    let domain = window.cell_edges(a.centre, 6);
    let vol: f64 = domain.iter().map(|&e| spec.graph().length(e)).sum();
    let disc = fd::discretize(&spec, 8).unwrap();
    let sol = disc.solve();
    for (j, &l) in grid.iter().enumerate() {
        let mut t = 0.0;
        for (k, &v) in sol.values.iter().enumerate() {
            if v <= l {
                t += domain.iter().map(|&e| disc.edge_mass(e, |r| sol.vectors[(r, k)])).sum::<f64>();
            }
        }
        assert!((t / vol - a.curve.values[j]).abs() < 1e-12);
    }
}

#[test]
fn localized_trace_matches_finite_volume_plateau() {
    let grid = [1.0, 3.0, 4.0, 6.0, 8.0, 12.0];
    let a = ids::abstract_ids_mc(&periodic(), &grid, 1, 4, 16, 0, &Sequential).unwrap();
    let w = PeriodicGraph::kagome().folner_box(4);
    let spec = ids::box_operator(&w, w.equilateral()).unwrap();
    let f = ids::finite_volume_ids(&spec, w.subgraph(), &grid, &opts()).unwrap();
    let ssf = 2.0 * w.boundary_degree_sum() as f64;
    for j in 0..grid.len() {
        assert!((a.curve.values[j] - f.values[j]).abs() <= 2.0 / f.volume * ssf);
    }
    assert!(a.curve.is_monotone());
}

#[test]
fn wegner_deterministic_model_is_exact() {
    let r = ids::wegner_experiment(&periodic(), 3, 10.0, &[4.386], &[0.4, 0.05], 5, 0, &opts(), &Sequential).unwrap();
    for e in &r.intervals {
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.mean.fract(), 0.0);
    }
    assert!(r.unbounded);
}

#[test]
fn random_increments_scale_with_eps() {
    let m = kagome(bump(0.8, 1.25));
    let l = (2.0 * PI / 3.0).powi(2);
    let s = ids::box_jump_scan(&m, 4, l, &[0.4, 0.2, 0.1, 0.05], 40, 3, &opts(), &Sequential).unwrap();
    assert!(s.increments.windows(2).all(|w| w[1] <= w[0]));
    assert!(s.slope > 0.0 && s.intercept.abs() < 0.02, "{s:?}");
    let p = ids::box_jump_scan(&periodic(), 8, l, &[0.4, 0.2, 0.1, 0.05], 1, 0, &opts(), &Sequential).unwrap();
    assert!(*p.increments.last().unwrap() > 0.1);
    assert!(p.estimate[0] <= 1.0 / 6.0 && 1.0 / 6.0 <= p.estimate[1]);
}
