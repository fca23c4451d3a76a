//! Command dispatch.

use std::fs;
use std::path::Path;

use qgraph_core::comb;
use qgraph_core::ids::{self, MetricJumpReport};
use qgraph_core::lattice::PeriodicGraph;
use qgraph_core::random::{make_density, sample_graph, LengthDistribution, RandomLengthModel};
use qgraph_core::spectra::{self, Level};
use qgraph_core::{Executor, OperatorSpec, Subgraph};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, LatticeName};
use crate::error::CliError;
use crate::graph_file;
use crate::output::{Manifest, OutputDir};

fn command_name(c: Command) -> String {
    serde_json::to_value(c).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn lattice(name: LatticeName) -> PeriodicGraph {
    match name {
        LatticeName::Kagome => PeriodicGraph::kagome(),
        LatticeName::Chain => PeriodicGraph::chain(),
        LatticeName::Square => PeriodicGraph::square(),
    }
}

fn law(config: &ExperimentConfig) -> Result<LengthDistribution, CliError> {
    match &config.model {
        None => Ok(LengthDistribution::Fixed(1.0)),
        Some(m) if m.l_min == m.l_max && m.l_min > 0.0 => Ok(LengthDistribution::Fixed(m.l_min)),
        Some(m) => make_density(m.l_min, m.l_max, m.family)
            .map(LengthDistribution::Density)
            .map_err(|e| CliError::Schema(format!("model: {e}"))),
    }
}

fn lattice_model(config: &ExperimentConfig) -> Result<(RandomLengthModel, usize), CliError> {
    let g = config.graph()?;
    let name = g.lattice.ok_or_else(|| CliError::Schema("missing field `graph.lattice`".into()))?;
    let n = g.box_size.ok_or_else(|| CliError::Schema("missing field `graph.box`".into()))?;
    Ok((RandomLengthModel::periodic(lattice(name), law(config)?), n))
}

/// The operator described by a graph file, with lengths resampled when a
/// model block is present.
fn file_operator(config: &ExperimentConfig, base: &Path) -> Result<OperatorSpec, CliError> {
    let rel = config.graph()?.file.as_ref().expect("validated");
    let path = base.join(rel);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let spec = graph_file::parse(&text)?;
    if config.model.is_none() {
        return Ok(spec);
    }
    let laws = vec![law(config)?; spec.graph().num_edges()];
    let graph = sample_graph(&RandomLengthModel::per_edge(laws), spec.graph(), config.seed)?;
    let conditions = spec.conditions().clone();
    let potential = spec.potential().to_vec();
    Ok(OperatorSpec::new(graph, conditions)?.with_potential(potential)?)
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    window: (f64, f64),
    solver: spectra::SolverTag,
    total: usize,
    volume: f64,
    levels: &'a [Level],
    flagged: &'a [spectra::Cluster],
}

fn run_spectrum<E: Executor>(config: &ExperimentConfig, base: &Path, out: &mut OutputDir, _exec: &E) -> Result<(), CliError> {
    let s = config.spectrum.as_ref().expect("validated");
    let spec = if config.graph()?.file.is_some() {
        file_operator(config, base)?
    } else {
        let (model, n) = lattice_model(config)?;
        ids::sampled_box(&model, n, config.seed)?.1
    };
    let sp = spectra::eigenvalues_in(&spec, s.lo, s.hi, &config.solver)?;
    out.csv(
        "spectrum.csv",
        &["index", "value", "multiplicity"],
        sp.levels().iter().enumerate().map(|(i, l)| [i.to_string(), l.value.to_string(), l.multiplicity.to_string()]),
    )?;
    out.json(
        "spectrum.json",
        &SpectrumReport {
            window: sp.window(),
            solver: sp.solver(),
            total: sp.total(),
            volume: spec.graph().total_volume(),
            levels: sp.levels(),
            flagged: sp.flagged(),
        },
    )
}

#[derive(Serialize)]
struct FloquetReport {
    grid_size: usize,
    band_edges: [[f64; 2]; 3],
    max_closed_form_deviation: f64,
    flat_band_deviation: f64,
}

fn run_floquet(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = config.floquet.as_ref().map_or(64, |f| f.grid);
    let bands = comb::floquet_bands(g).map_err(|e| CliError::Schema(format!("floquet: {e}")))?;
    out.csv(
        "bands.csv",
        &["theta1", "theta2", "mu1", "mu_minus", "mu_plus"],
        bands.points.iter().map(|p| [p.theta[0], p.theta[1], p.numeric[2], p.numeric[0], p.numeric[1]]),
    )?;
    let names = ["mu_minus", "mu_plus", "mu1"];
    out.csv(
        "band_edges.csv",
        &["band", "min", "max"],
        bands.bands.iter().zip(names).map(|(b, n)| [n.to_string(), b[0].to_string(), b[1].to_string()]),
    )?;
    out.json(
        "floquet.json",
        &FloquetReport {
            grid_size: g,
            band_edges: bands.bands,
            max_closed_form_deviation: bands.max_closed_form_deviation,
            flat_band_deviation: bands.flat_band_deviation,
        },
    )
}

fn run_comb_ids(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let c = config.comb_ids.as_ref().expect("validated");
    let reports = c
        .sizes
        .iter()
        .map(|&n| comb::interior_kernel_dimension(n, c.mu).map_err(|e| CliError::Schema(format!("comb_ids: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    out.csv(
        "comb_ids.csv",
        &["n", "dimension", "patch_size", "thick_boundary", "d_n", "lower", "upper"],
        reports.iter().map(|r| {
            [
                r.n.to_string(),
                r.dimension.to_string(),
                r.patch_size.to_string(),
                r.thick_boundary.to_string(),
                r.d_n.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
            ]
        }),
    )?;
    #[derive(Serialize)]
    struct Report<'a> {
        mu: f64,
        boxes: &'a [comb::KernelReport],
    }
    out.json("comb_ids.json", &Report { mu: c.mu, boxes: &reports })
}

fn run_ids<E: Executor>(config: &ExperimentConfig, base: &Path, out: &mut OutputDir, exec: &E) -> Result<(), CliError> {
    let grid = config.energy_grid()?;
    let settings = config.ids.clone().unwrap_or(crate::config::IdsConfig { samples: 1, trace_mesh: None });
    #[derive(Serialize)]
    struct Report {
        samples: usize,
        volume: f64,
        solver: spectra::SolverTag,
        monotone: bool,
    }
    let (values, errors, volume, solver) = if config.graph()?.file.is_some() {
        let spec = file_operator(config, base)?;
        let whole = Subgraph::whole(spec.graph().topology());
        let c = ids::finite_volume_ids(&spec, &whole, &grid, &config.solver)?;
        (c.values, vec![0.0; grid.len()], c.volume, c.solver)
    } else {
        let (model, n) = lattice_model(config)?;
        if let Some(mesh) = settings.trace_mesh {
            let a = ids::abstract_ids_mc(&model, &grid, settings.samples, n, mesh, config.seed, exec)?;
            (a.curve.values, a.std_error, a.domain_volume, a.curve.solver)
        } else {
            let s = if model.is_deterministic() { 1 } else { settings.samples.max(1) };
            let curves = exec.map(s, |i| {
                let seed = if s == 1 { config.seed } else { ids::sample_seed(config.seed, i) };
                ids::box_ids(&model, n, seed, &grid, &config.solver)
            });
            let curves = curves.into_iter().collect::<Result<Vec<_>, _>>()?;
            let k = s as f64;
            let mean: Vec<f64> = (0..grid.len()).map(|j| curves.iter().map(|c| c.values[j]).sum::<f64>() / k).collect();
            let se = (0..grid.len())
                .map(|j| {
                    if s < 2 {
                        return 0.0;
                    }
                    let v = curves.iter().map(|c| (c.values[j] - mean[j]).powi(2)).sum::<f64>() / (k - 1.0);
                    (v / k).sqrt()
                })
                .collect();
            let vol = curves.iter().map(|c| c.volume).sum::<f64>() / k;
            (mean, se, vol, spectra::SolverTag::Inertia)
        }
    };
    let monotone = values.windows(2).all(|w| w[0] <= w[1]);
    out.csv(
        "ids.csv",
        &["energy", "ids", "std_error"],
        grid.iter().zip(&values).zip(&errors).map(|((e, v), s)| [*e, *v, *s]),
    )?;
    out.json("ids.json", &Report { samples: settings.samples, volume, solver, monotone })
}

fn run_exhaustion<E: Executor>(config: &ExperimentConfig, out: &mut OutputDir, exec: &E) -> Result<(), CliError> {
    let grid = config.energy_grid()?;
    let (model, _) = lattice_model(config)?;
    let sizes = &config.exhaustion.as_ref().expect("validated").sizes;
    let t = ids::exhaustion_experiment(&model, sizes, config.seed, &grid, &config.solver, exec)?;
    let mut header = vec!["energy".to_string()];
    header.extend(t.sizes.iter().map(|n| format!("n{n}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "exhaustion.csv",
        &header,
        grid.iter().enumerate().map(|(j, e)| {
            let mut row = vec![*e];
            row.extend(t.curves.iter().map(|c| c.values[j]));
            row
        }),
    )?;
    #[derive(Serialize)]
    struct Report<'a> {
        sizes: &'a [usize],
        volumes: Vec<f64>,
        distances: &'a [f64],
        bounds: &'a [f64],
        decays: bool,
        within_bounds: bool,
    }
    out.json(
        "exhaustion.json",
        &Report {
            sizes: &t.sizes,
            volumes: t.curves.iter().map(|c| c.volume).collect(),
            distances: &t.distances,
            bounds: &t.bounds,
            decays: t.decays,
            within_bounds: t.within_bounds,
        },
    )
}

fn run_wegner<E: Executor>(config: &ExperimentConfig, out: &mut OutputDir, exec: &E) -> Result<(), CliError> {
    let w = config.wegner.as_ref().expect("validated");
    let (model, n) = lattice_model(config)?;
    let r = ids::wegner_experiment(&model, n, w.u, &w.centers, &w.widths, w.samples, config.seed, &config.solver, exec)?;
    out.csv(
        "wegner.csv",
        &["center", "width", "lo", "hi", "mean", "std_error", "c_hat"],
        r.intervals.iter().map(|e| [e.center, e.width, e.lo, e.hi, e.mean, e.std_error, e.c_hat]),
    )?;
    out.json("wegner.json", &r)
}

fn run_jump<E: Executor>(config: &ExperimentConfig, out: &mut OutputDir, exec: &E) -> Result<(), CliError> {
    let j = config.jump.as_ref().expect("validated");
    let (model, n) = lattice_model(config)?;
    let scan = ids::box_jump_scan(&model, n, j.lambda, &j.eps, j.samples, config.seed, &config.solver, exec)?;
    let metric: Option<MetricJumpReport> = if model.is_deterministic() {
        let (window, spec) = ids::sampled_box(&model, n, config.seed)?;
        Some(ids::metric_jump(&window, &spec, j.lambda, config.solver.svd_threshold))
    } else {
        None
    };
    let interval = metric.as_ref().map_or(scan.estimate, |m| [m.lower, m.upper]);
    out.csv(
        "jump.csv",
        &["eps", "increment"],
        scan.eps.iter().zip(&scan.increments).map(|(e, i)| [*e, *i]),
    )?;
    #[derive(Serialize)]
    struct Report<'a> {
        lambda: f64,
        interval: [f64; 2],
        scan: &'a ids::JumpScan,
        kernel: Option<&'a MetricJumpReport>,
    }
    out.json("jump.json", &Report { lambda: j.lambda, interval, scan: &scan, kernel: metric.as_ref() })
}

/// Runs `config`, writing into `out_dir`. Graph files resolve against `base`.
pub fn run<E: Executor>(config: &ExperimentConfig, base: &Path, out_dir: &Path, exec: &E) -> Result<Manifest, CliError> {
    config.validate()?;
    let mut out = OutputDir::create(out_dir, config.hash(), command_name(config.command))?;
    out.json("config.json", config)?;
    match config.command {
        Command::Spectrum => run_spectrum(config, base, &mut out, exec)?,
        Command::Floquet => run_floquet(config, &mut out)?,
        Command::CombIds => run_comb_ids(config, &mut out)?,
        Command::Ids => run_ids(config, base, &mut out, exec)?,
        Command::Exhaustion => run_exhaustion(config, &mut out, exec)?,
        Command::Wegner => run_wegner(config, &mut out, exec)?,
        Command::Jump => run_jump(config, &mut out, exec)?,
    }
    out.finish()
}
