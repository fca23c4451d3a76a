use num_complex::Complex64;
use proptest::prelude::*;
use qgraph_core::conditions::{self, ConditionAssignment, VertexCondition};
use qgraph_core::graph::{MetricGraph, Subgraph, TopologicalGraph};
use qgraph_core::lattice::PeriodicGraph;
use qgraph_core::random::{act, make_density, sample, DensityFamily, LengthDistribution, RandomLengthModel};
use qgraph_core::spectra::{eigenvalues_in, rescale_lengths, spectral_shift, Counter, OperatorSpec, SolverOptions};
use qgraph_core::ids;

/// A connected graph on `n` vertices: a path plus extra edges.
fn graph_strategy() -> impl Strategy<Value = MetricGraph> {
    (3usize..7)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..5)))
        .prop_flat_map(|(n, extra)| {
            let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            edges.extend(extra);
            let m = edges.len();
            (Just(n), Just(edges), proptest::collection::vec(0.5..2.0f64, m))
        })
        .prop_map(|(n, edges, lengths)| MetricGraph::new(TopologicalGraph::new(n, edges).unwrap(), lengths).unwrap())
}

fn cheap() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn volume_is_additive(g in graph_strategy(), mask in any::<u32>()) {
        let top = g.topology();
        let (a, b): (Vec<usize>, Vec<usize>) = (0..top.num_edges()).partition(|e| mask >> e & 1 == 1);
        let va = if a.is_empty() { 0.0 } else { g.volume(&Subgraph::from_edges(top, &a).unwrap()) };
        let vb = if b.is_empty() { 0.0 } else { g.volume(&Subgraph::from_edges(top, &b).unwrap()) };
        prop_assert!((va + vb - g.total_volume()).abs() <= 1e-12 * g.total_volume());
    }

    #[test]
    fn robin_and_delta_are_valid(deg in 1usize..6, alpha in -5.0..5.0f64, f in -2.0..2.0f64) {
        let robin = VertexCondition::robin(deg, alpha).unwrap();
        let delta = VertexCondition::delta(deg, alpha).unwrap();
        let a = ConditionAssignment::new(vec![robin.clone(), delta.clone()]);
        let report = conditions::validate(&a);
        prop_assert!(report.is_valid(), "{:?}", report.violations);
        prop_assert!((report.c_r - alpha.abs()).abs() <= 1e-12 * (1.0 + alpha.abs()));
        let x = vec![real(f); deg];
        prop_assert!(robin.satisfied_by(&x, &vec![real(alpha * f); deg], 1e-12));
        // Continuous value, derivatives summing to α·deg·f.
        let mut dx = vec![real(0.0); deg];
        dx[0] = real(alpha * deg as f64 * f);
        prop_assert!(delta.satisfied_by(&x, &dx, 1e-12));
    }

    #[test]
    fn counting_is_monotone(g in graph_strategy(), alpha in -1.0..1.0f64) {
        let mut c = ConditionAssignment::kirchhoff(g.topology()).unwrap();
        c.set(0, VertexCondition::delta(g.topology().degree(0), alpha).unwrap());
        let spec = OperatorSpec::new(g, c).unwrap();
        let counter = Counter::new(&spec, SolverOptions::default().svd_threshold);
        let mut last = 0;
        for i in 0..60 {
            let l = -4.0 + 0.5 * i as f64;
            let (below, at_most) = (counter.count_below(l), counter.count_at_most(l));
            prop_assert!(below <= at_most && last <= below);
            last = at_most;
        }
    }

    #[test]
    fn scaling_lengths_scales_eigenvalues(g in graph_strategy(), s in -0.7..0.7f64) {
        let spec = OperatorSpec::dirichlet_box(g, &[0]).unwrap();
        let opts = SolverOptions::default();
        let r = rescale_lengths(&spec, s).unwrap();
        prop_assert!(r.warning.is_none());
        let base = eigenvalues_in(&spec, 0.0, 40.0, &opts).unwrap().values();
        let scaled = eigenvalues_in(&r.spec, 0.0, 40.0 * (-2.0 * s).exp(), &opts).unwrap().values();
        prop_assert_eq!(base.len(), scaled.len());
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((a * (-2.0 * s).exp() - b).abs() <= 1e-7 * a.max(1.0), "{} {}", a, b);
        }
    }

    #[test]
    fn shift_bounded_by_changed_degrees(g in graph_strategy(), flips in any::<u8>()) {
        let top = g.topology().clone();
        let h1 = OperatorSpec::kirchhoff(g.clone()).unwrap();
        let boundary: Vec<usize> = (0..top.num_vertices()).filter(|v| flips >> v & 1 == 1).collect();
        let h2 = OperatorSpec::dirichlet_box(g, &boundary).unwrap();
        let grid: Vec<f64> = (0..80).map(|i| 0.5 * i as f64).collect();
        let s = spectral_shift(&h1, &h2, &grid, &SolverOptions::default()).unwrap();
        prop_assert_eq!(&s.v_diff, &boundary);
        prop_assert!(s.xi.iter().all(|&x| x <= 0));
        prop_assert!(s.max_abs() <= s.bound);
    }

    #[test]
    fn draws_respect_bounds_and_translations(seed in any::<u64>(), g in (-3i64..3, -3i64..3), h in (-3i64..3, -3i64..3)) {
        let law = LengthDistribution::Density(make_density(0.8, 1.25, DensityFamily::CosineSquared).unwrap());
        let m = RandomLengthModel::periodic(PeriodicGraph::kagome(), law);
        let w = PeriodicGraph::kagome().folner_box(2);
        let s = sample(&m, w.edge_keys(), seed);
        prop_assert!(s.lengths.iter().all(|l| (0.8..=1.25).contains(l)));
        let gh = [g.0 + h.0, g.1 + h.1];
        let lhs = act(&m, [g.0, g.1], &act(&m, [h.0, h.1], &s).unwrap()).unwrap();
        prop_assert_eq!(lhs, act(&m, gh, &s).unwrap());
    }

    #[test]
    fn ids_monotone_and_vanishing_below_zero(seed in any::<u64>()) {
        let law = LengthDistribution::Density(make_density(0.8, 1.25, DensityFamily::CosineSquared).unwrap());
        let m = RandomLengthModel::periodic(PeriodicGraph::kagome(), law);
        let grid: Vec<f64> = (0..30).map(|i| -3.0 + 0.5 * i as f64).collect();
        let c = ids::box_ids(&m, 2, seed, &grid, &SolverOptions::default()).unwrap();
        prop_assert!(c.is_monotone());
        prop_assert!(c.values.iter().zip(&grid).all(|(v, &l)| l >= 0.0 || *v == 0.0));
        prop_assert!(c.values.iter().all(|v| (0.0..=1e6).contains(v)));
    }
}
