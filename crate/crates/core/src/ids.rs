//! Integrated density of states: finite-volume counting curves, exhaustion
//! runs, a localized-trace estimator, Wegner-type interval counts and jump
//! detection.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{MetricGraph, Subgraph};
use crate::lattice::{Cell, LatticeWindow, PeriodicGraph};
use crate::random::{sample_window, RandomLengthModel};
use crate::spectra::{fd, secular, Counter, OperatorSpec, SolverOptions, SolverTag};

/// `N(λ) = #{λ_i ≤ λ} / vol` on an energy grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdsCurve {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub volume: f64,
    pub seed: Option<u64>,
    pub box_size: Option<usize>,
    pub solver: SolverTag,
}

impl IdsCurve {
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// `sup_i |N(λ_i) − M(λ_i)|` over a shared grid.
    pub fn sup_distance(&self, other: &IdsCurve) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Grid average of `|N − M|`.
    pub fn mean_distance(&self, other: &IdsCurve) -> f64 {
        let n = self.values.len().max(1) as f64;
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>() / n
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(alloc::string::String::from("energy grid must be sorted and finite")));
    }
    Ok(())
}

/// Counting curve of `spec` normalized by the volume of `region`.
pub fn finite_volume_ids(
    spec: &OperatorSpec,
    region: &Subgraph,
    grid: &[f64],
    options: &SolverOptions,
) -> Result<IdsCurve> {
    check_grid(grid)?;
    let volume = region.volume(spec.graph());
    let counter = Counter::new(spec, options.svd_threshold);
    let values = grid.iter().map(|&l| counter.count_at_most(l) as f64 / volume).collect();
    Ok(IdsCurve {
        energies: grid.to_vec(),
        values,
        volume,
        seed: None,
        box_size: None,
        solver: SolverTag::Inertia,
    })
}

/// `points` uniform energies on `[0, u]` merged with the equilateral Kagome
/// band edges and flat-band energies `λ ≤ u`.
pub fn default_energy_grid(u: f64, points: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..points).map(|i| u * i as f64 / (points.max(2) - 1) as f64).collect();
    for mu in [0.0, 0.75, 1.5, 2.0] {
        for k in 0.. {
            let l = crate::comb::correspondence_lambda(mu, k).expect("μ in range");
            if l > u {
                break;
            }
            grid.push(l);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Kirchhoff inside the window, Dirichlet on its lattice boundary.
pub fn box_operator(window: &LatticeWindow, graph: MetricGraph) -> Result<OperatorSpec> {
    OperatorSpec::dirichlet_box(graph, window.boundary())
}

/// Seed of the `i`-th Monte-Carlo sample of a run seeded with `base`.
pub fn sample_seed(base: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(i as u64);
    rng.next_u64()
}

fn lattice(model: &RandomLengthModel) -> Result<&PeriodicGraph> {
    model.lattice().ok_or(Error::NotPeriodic)
}

/// Dirichlet box `Λ(I_n)` with lengths drawn under `seed`.
pub fn sampled_box(model: &RandomLengthModel, n: usize, seed: u64) -> Result<(LatticeWindow, OperatorSpec)> {
    let window = lattice(model)?.folner_box(n);
    let graph = sample_window(model, &window, seed)?;
    let spec = box_operator(&window, graph)?;
    Ok((window, spec))
}

/// `N_ω^n` on the box of size `n`.
pub fn box_ids(
    model: &RandomLengthModel,
    n: usize,
    seed: u64,
    grid: &[f64],
    options: &SolverOptions,
) -> Result<IdsCurve> {
    let (window, spec) = sampled_box(model, n, seed)?;
    let mut curve = finite_volume_ids(&spec, window.subgraph(), grid, options)?;
    curve.seed = Some(seed);
    curve.box_size = Some(n);
    Ok(curve)
}

/// Curves for growing boxes under one `ω`, compared with the largest.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExhaustionTable {
    pub sizes: Vec<usize>,
    pub curves: Vec<IdsCurve>,
    /// `sup_λ |N^{n_j} − N^{n_m}|`.
    pub distances: Vec<f64>,
    /// `2·d_max·|∂Λ_n| / vol(Λ_n)`.
    pub bounds: Vec<f64>,
    pub decays: bool,
    pub within_bounds: bool,
}

pub fn exhaustion_experiment<E: Executor>(
    model: &RandomLengthModel,
    sizes: &[usize],
    seed: u64,
    grid: &[f64],
    options: &SolverOptions,
    exec: &E,
) -> Result<ExhaustionTable> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(alloc::string::String::from("box sizes must increase")));
    }
    let d_max = lattice(model)?.max_degree() as f64;
    let runs = exec.map(sizes.len(), |i| -> Result<(IdsCurve, f64)> {
        let (window, spec) = sampled_box(model, sizes[i], seed)?;
        let bound = 2.0 * d_max * window.boundary().len() as f64 / window.subgraph().volume(spec.graph());
        let mut c = finite_volume_ids(&spec, window.subgraph(), grid, options)?;
        c.seed = Some(seed);
        c.box_size = Some(sizes[i]);
        Ok((c, bound))
    });
    let (curves, bounds): (Vec<_>, Vec<_>) = runs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let reference = curves.last().expect("non-empty");
    let distances: Vec<f64> = curves.iter().map(|c| c.sup_distance(reference)).collect();
    let decays = distances.windows(2).all(|w| w[1] <= w[0]);
    let within_bounds = distances.iter().zip(&bounds).all(|(d, b)| d <= b);
    Ok(ExhaustionTable { sizes: sizes.to_vec(), curves, distances, bounds, decays, within_bounds })
}

/// Localized-trace estimate of the abstract IDS with sample standard errors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AbstractIds {
    pub curve: IdsCurve,
    pub std_error: Vec<f64>,
    pub samples: usize,
    /// Sample mean of `vol(𝓕, ℓ_ω)`.
    pub domain_volume: f64,
    pub centre: Cell,
    pub buffer: usize,
    pub mesh: usize,
}

/// Buffer in cells between the fundamental domain and `∂Λ_n`.
pub fn trace_buffer(n: usize) -> usize {
    n.div_ceil(4).max(1)
}

/// `E[Σ_{λ_i ≤ λ} ∫_𝓕 |ψ_i|²] / E[vol 𝓕]` from discretized Dirichlet boxes.
/// The fundamental domain is the centre cell of the box.
pub fn abstract_ids_mc<E: Executor>(
    model: &RandomLengthModel,
    grid: &[f64],
    samples: usize,
    n: usize,
    mesh: usize,
    seed: u64,
    exec: &E,
) -> Result<AbstractIds> {
    check_grid(grid)?;
    let lat = lattice(model)?;
    let buffer = trace_buffer(n);
    let c = (n / 2) as i64;
    if (c as usize) < buffer || n - 1 - (c as usize) < buffer {
        return Err(Error::BoxTooSmall { n, buffer });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument(alloc::string::String::from("no samples")));
    }
    let centre = if lat.rank() == 1 { [c, 0] } else { [c, c] };
    let orbits = lat.edge_orbits().len();
    let per_sample = exec.map(samples, |i| -> Result<(Vec<f64>, f64)> {
        let s = if samples == 1 { seed } else { sample_seed(seed, i) };
        let (window, spec) = sampled_box(model, n, s)?;
        let domain = window.cell_edges(centre, orbits);
        let vol: f64 = domain.iter().map(|&e| spec.graph().length(e)).sum();
        let sol = fd::discretize(&spec, mesh)?;
        let eig = sol.solve();
        let top = grid.last().copied().unwrap_or(0.0);
        let weights: Vec<(f64, f64)> = eig
            .values
            .iter()
            .enumerate()
            .take_while(|(_, &v)| v <= top)
            .map(|(k, &v)| {
                let w = domain.iter().map(|&e| sol.edge_mass(e, |r| eig.vectors[(r, k)])).sum();
                (v, w)
            })
            .collect();
        let trace = grid
            .iter()
            .map(|&l| weights.iter().take_while(|(v, _)| *v <= l).map(|(_, w)| w).sum())
            .collect();
        Ok((trace, vol))
    });
    let per_sample = per_sample.into_iter().collect::<Result<Vec<_>>>()?;
    let s = samples as f64;
    let domain_volume = per_sample.iter().map(|(_, v)| v).sum::<f64>() / s;
    let mut values = Vec::with_capacity(grid.len());
    let mut std_error = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let mean = per_sample.iter().map(|(t, _)| t[j]).sum::<f64>() / s;
        let var = if samples > 1 {
            per_sample.iter().map(|(t, _)| (t[j] - mean).powi(2)).sum::<f64>() / (s - 1.0)
        } else {
            0.0
        };
        values.push(mean / domain_volume);
        std_error.push((var / s).sqrt() / domain_volume);
    }
    Ok(AbstractIds {
        curve: IdsCurve {
            energies: grid.to_vec(),
            values,
            volume: domain_volume,
            seed: Some(seed),
            box_size: Some(n),
            solver: SolverTag::FiniteDifference { mesh },
        },
        std_error,
        samples,
        domain_volume,
        centre,
        buffer,
        mesh,
    })
}

/// Monte-Carlo estimate for one interval `I = [lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WegnerEstimate {
    pub center: f64,
    pub width: f64,
    pub lo: f64,
    pub hi: f64,
    /// `Ê[tr P(I)]`.
    pub mean: f64,
    pub std_error: f64,
    /// `Ê / (|I|·|E(Λ)|)`.
    pub c_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WegnerReport {
    pub u: f64,
    pub box_size: usize,
    pub edges: usize,
    pub samples: usize,
    pub seed: u64,
    pub intervals: Vec<WegnerEstimate>,
    /// Per centre: `max Ĉ / min Ĉ` over the widths.
    pub spread: Vec<(f64, f64)>,
    /// Per centre: `Ĉ(w_min) / Ĉ(w_max)`.
    pub growth: Vec<(f64, f64)>,
    /// Set when some centre's `Ĉ` grows by more than `GROWTH_FLAG` as `w`
    /// shrinks.
    pub unbounded: bool,
}

pub const GROWTH_FLAG: f64 = 3.0;

/// Expected eigenvalue counts in intervals `[c − w/2, c + w/2] ⊂ [1/u, u]`
/// on the Dirichlet box of size `n`.
#[allow(clippy::too_many_arguments)]
pub fn wegner_experiment<E: Executor>(
    model: &RandomLengthModel,
    n: usize,
    u: f64,
    centers: &[f64],
    widths: &[f64],
    samples: usize,
    seed: u64,
    options: &SolverOptions,
    exec: &E,
) -> Result<WegnerReport> {
    if !(u > 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("u = {u} must exceed 1")));
    }
    if samples == 0 || widths.is_empty() || centers.is_empty() {
        return Err(Error::InvalidArgument(alloc::string::String::from("empty experiment")));
    }
    let mut intervals = Vec::new();
    for &c in centers {
        for &w in widths {
            let (lo, hi) = (c - 0.5 * w, c + 0.5 * w);
            if !(w > 0.0) || lo < 1.0 / u || hi > u {
                return Err(Error::IntervalOutsideWindow { lo, hi, wlo: 1.0 / u, whi: u });
            }
            intervals.push((c, w, lo, hi));
        }
    }
    let edges = lattice(model)?.folner_box(n).edge_keys().len();
    let counts = exec.map(samples, |i| -> Result<Vec<f64>> {
        let s = if model.is_deterministic() { seed } else { sample_seed(seed, i) };
        let (_, spec) = sampled_box(model, n, s)?;
        let counter = Counter::new(&spec, options.svd_threshold);
        Ok(intervals
            .iter()
            .map(|&(_, _, lo, hi)| (counter.count_at_most(hi) - counter.count_below(lo)) as f64)
            .collect())
    });
    let counts = counts.into_iter().collect::<Result<Vec<_>>>()?;
    let s = samples as f64;
    let estimates: Vec<WegnerEstimate> = intervals
        .iter()
        .enumerate()
        .map(|(j, &(center, width, lo, hi))| {
            let mean = counts.iter().map(|c| c[j]).sum::<f64>() / s;
            let var = if samples > 1 {
                counts.iter().map(|c| (c[j] - mean).powi(2)).sum::<f64>() / (s - 1.0)
            } else {
                0.0
            };
            WegnerEstimate {
                center,
                width,
                lo,
                hi,
                mean,
                std_error: (var / s).sqrt(),
                c_hat: mean / (width * edges as f64),
            }
        })
        .collect();
    let mut spread = Vec::new();
    let mut growth = Vec::new();
    for (ci, &c) in centers.iter().enumerate() {
        let row = &estimates[ci * widths.len()..(ci + 1) * widths.len()];
        let max = row.iter().map(|e| e.c_hat).fold(0.0, f64::max);
        let min = row.iter().map(|e| e.c_hat).fold(f64::INFINITY, f64::min);
        spread.push((c, max / min));
        let narrow = row.iter().min_by(|a, b| a.width.total_cmp(&b.width)).expect("non-empty");
        let wide = row.iter().max_by(|a, b| a.width.total_cmp(&b.width)).expect("non-empty");
        growth.push((c, narrow.c_hat / wide.c_hat));
    }
    let unbounded = growth.iter().any(|&(_, g)| !(g <= GROWTH_FLAG));
    Ok(WegnerReport {
        u,
        box_size: n,
        edges,
        samples,
        seed,
        intervals: estimates,
        spread,
        growth,
        unbounded,
    })
}

/// Increments `N(λ* + ε) − N(λ* − ε)` on a shrinking ladder.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JumpScan {
    pub lambda: f64,
    pub eps: Vec<f64>,
    pub increments: Vec<f64>,
    /// Least-squares line `a + b·ε` through the increments.
    pub intercept: f64,
    pub slope: f64,
    /// `[intercept − boundary_term, intercept + boundary_term] ∩ [0, ∞)`.
    pub estimate: [f64; 2],
}

impl JumpScan {
    /// Value of the fitted line through all but the smallest `ε`, evaluated
    /// at the smallest `ε`.
    pub fn lipschitz_prediction(&self) -> f64 {
        let k = self.eps.len() - 1;
        let (a, b) = fit(&self.eps[..k], &self.increments[..k]);
        a + b * self.eps[k]
    }
}

fn fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Scans `ids` around `λ*`. `resolution` is the smallest meaningful `ε`
/// and `boundary_term` the half-width added around the fitted limit.
pub fn jump_scan(
    ids: impl Fn(f64) -> Result<f64>,
    lambda: f64,
    eps: &[f64],
    resolution: f64,
    boundary_term: f64,
) -> Result<JumpScan> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("λ* = {lambda} must be positive")));
    }
    if eps.len() < 2 || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(alloc::string::String::from(
            "ε ladder needs at least two strictly decreasing values",
        )));
    }
    if let Some(&e) = eps.iter().find(|&&e| e < resolution) {
        return Err(Error::BelowResolution { eps: e, resolution });
    }
    let increments = eps
        .iter()
        .map(|&e| Ok(ids(lambda + e)? - ids(lambda - e)?))
        .collect::<Result<Vec<_>>>()?;
    let (intercept, slope) = fit(eps, &increments);
    Ok(JumpScan {
        lambda,
        eps: eps.to_vec(),
        increments,
        intercept,
        slope,
        estimate: [(intercept - boundary_term).max(0.0), intercept + boundary_term],
    })
}

/// Averages box curves over `samples` draws and scans them around `λ*`.
#[allow(clippy::too_many_arguments)]
pub fn box_jump_scan<E: Executor>(
    model: &RandomLengthModel,
    n: usize,
    lambda: f64,
    eps: &[f64],
    samples: usize,
    seed: u64,
    options: &SolverOptions,
    exec: &E,
) -> Result<JumpScan> {
    let mut grid: Vec<f64> = eps.iter().flat_map(|&e| [lambda - e, lambda + e]).collect();
    grid.sort_by(f64::total_cmp);
    let samples = if model.is_deterministic() { 1 } else { samples.max(1) };
    let curves = exec.map(samples, |i| {
        let s = if samples == 1 { seed } else { sample_seed(seed, i) };
        box_ids(model, n, s, &grid, options)
    });
    let curves = curves.into_iter().collect::<Result<Vec<_>>>()?;
    let mean: Vec<f64> = (0..grid.len())
        .map(|j| curves.iter().map(|c| c.values[j]).sum::<f64>() / samples as f64)
        .collect();
    let window = lattice(model)?.folner_box(n);
    let vol = curves.iter().map(|c| c.volume).sum::<f64>() / samples as f64;
    let boundary_term = window
        .boundary()
        .iter()
        .map(|&v| 1 + window.graph().degree(v))
        .sum::<usize>() as f64
        / vol;
    let resolution = options.energy_tol * lambda.max(1.0);
    jump_scan(
        |l| {
            let j = grid.iter().position(|&g| g == l).expect("grid point");
            Ok(mean[j])
        },
        lambda,
        eps,
        resolution,
        boundary_term,
    )
}

/// Eigenvalue multiplicities at a candidate jump energy on a Dirichlet box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MetricJumpReport {
    pub lambda: f64,
    pub volume: f64,
    /// `dim ker(H_Λ − λ*)`.
    pub kernel: usize,
    /// Eigenfunctions whose Cauchy data vanish on `∂Λ`, i.e. those that
    /// extend by zero to the whole lattice.
    pub compact: usize,
    /// `Σ_{v∈∂Λ} deg_Λ v`.
    pub boundary_degree: usize,
    /// `|E(Λ)| − |V(Λ) \ ∂Λ|`.
    pub edges_minus_interior_vertices: i64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl MetricJumpReport {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Jump interval `[max(W, K − Σ deg)/vol, (W + Σ(1 + deg))/vol]` from the
/// full kernel `K` and the compactly supported part `W`.
pub fn metric_jump(window: &LatticeWindow, spec: &OperatorSpec, lambda: f64, threshold: f64) -> MetricJumpReport {
    let volume = window.subgraph().volume(spec.graph());
    let kernel = secular::kernel_dimension(spec, lambda, threshold);
    let compact = secular::compact_kernel_dimension(spec, lambda, window.boundary(), threshold);
    let boundary_degree = window.boundary_degree_sum();
    let lower = compact.max(kernel.saturating_sub(boundary_degree)) as f64 / volume;
    let upper = (compact + boundary_degree + window.boundary().len()) as f64 / volume;
    MetricJumpReport {
        lambda,
        volume,
        kernel,
        compact,
        boundary_degree,
        edges_minus_interior_vertices: window.edge_keys().len() as i64 - window.interior_vertices().len() as i64,
        estimate: kernel as f64 / volume,
        lower,
        upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::random::LengthDistribution;
    use core::f64::consts::PI;

    #[test]
    fn single_edge_curve() {
        let top = crate::graph::TopologicalGraph::new(2, alloc::vec![(0, 1)]).unwrap();
        let spec = OperatorSpec::dirichlet_box(MetricGraph::equilateral(top.clone()), &[0, 1]).unwrap();
        let c = finite_volume_ids(&spec, &Subgraph::whole(&top), &[-1.0, 5.0, 50.0], &SolverOptions::default())
            .unwrap();
        assert_eq!(c.values, alloc::vec![0.0, 0.0, 2.0]);
        assert!(c.is_monotone());
    }

    #[test]
    fn seeds_are_distinct() {
        assert_ne!(sample_seed(7, 0), sample_seed(7, 1));
        assert_eq!(sample_seed(7, 3), sample_seed(7, 3));
    }

    #[test]
    fn jump_scan_rejects_fine_eps() {
        let err = jump_scan(|_| Ok(0.0), 1.0, &[0.1, 1e-14], 1e-11, 0.0).unwrap_err();
        assert!(matches!(err, Error::BelowResolution { .. }));
    }

    #[test]
    fn wegner_interval_outside_window() {
        let m = RandomLengthModel::periodic(PeriodicGraph::kagome(), LengthDistribution::Fixed(1.0));
        let err = wegner_experiment(&m, 2, 5.0, &[4.9], &[0.4], 1, 0, &SolverOptions::default(), &Sequential)
            .unwrap_err();
        assert!(matches!(err, Error::IntervalOutsideWindow { .. }));
    }

    #[test]
    fn small_box_rejected_by_trace() {
        let m = RandomLengthModel::periodic(PeriodicGraph::kagome(), LengthDistribution::Fixed(1.0));
        let err = abstract_ids_mc(&m, &[1.0], 1, 2, 8, 0, &Sequential).unwrap_err();
        assert!(matches!(err, Error::BoxTooSmall { .. }));
    }

    #[test]
    fn flat_band_jump_interval() {
        let w = PeriodicGraph::kagome().folner_box(4);
        let spec = box_operator(&w, w.equilateral()).unwrap();
        let r = metric_jump(&w, &spec, (2.0 * PI / 3.0).powi(2), 1e-7);
        assert_eq!(r.kernel, 9);
        assert!(r.contains(1.0 / 6.0));
    }
}
