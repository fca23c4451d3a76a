//! Experiment configuration files (TOML).

use std::path::PathBuf;

use qgraph_core::random::DensityFamily;
use qgraph_core::spectra::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Floquet,
    CombIds,
    Ids,
    Exhaustion,
    Wegner,
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeName {
    Kagome,
    Chain,
    Square,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    pub lattice: Option<LatticeName>,
    /// Følner box size `n` for lattices.
    #[serde(rename = "box")]
    pub box_size: Option<usize>,
    /// Path to a graph file, relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub l_min: f64,
    pub l_max: f64,
    #[serde(default = "default_family")]
    pub family: DensityFamily,
}

fn default_family() -> DensityFamily {
    DensityFamily::CosineSquared
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    /// Explicit energies; overrides the uniform grid.
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub min: f64,
    pub max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Add the equilateral Kagome band edges and flat-band energies.
    #[serde(default)]
    pub refine: bool,
}

fn default_points() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetConfig {
    #[serde(default = "default_floquet_grid")]
    pub grid: usize,
}

fn default_floquet_grid() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombIdsConfig {
    pub sizes: Vec<usize>,
    #[serde(default = "default_mu")]
    pub mu: f64,
}

fn default_mu() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsConfig {
    /// Samples averaged; `1` gives a single `N_ω^n`.
    #[serde(default = "one")]
    pub samples: usize,
    /// Use the localized-trace estimator with this mesh density.
    pub trace_mesh: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustionConfig {
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WegnerConfig {
    pub u: f64,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub lambda: f64,
    pub eps: Vec<f64>,
    #[serde(default = "one")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    pub graph: Option<GraphSource>,
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub solver: SolverOptions,
    pub energies: Option<EnergyGrid>,
    pub spectrum: Option<SpectrumConfig>,
    pub floquet: Option<FloquetConfig>,
    pub comb_ids: Option<CombIdsConfig>,
    pub ids: Option<IdsConfig>,
    pub exhaustion: Option<ExhaustionConfig>,
    pub wegner: Option<WegnerConfig>,
    pub jump: Option<JumpConfig>,
}

fn missing(field: &str) -> CliError {
    CliError::Schema(format!("missing field `{field}`"))
}

fn require<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| missing(field))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Schema(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn graph(&self) -> Result<&GraphSource, CliError> {
        require(&self.graph, "graph")
    }

    /// Structural checks that need no computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let needs_graph = !matches!(self.command, Command::Floquet | Command::CombIds);
        if needs_graph {
            let g = self.graph()?;
            match (g.lattice, &g.file) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Schema("graph: give either `lattice` or `file`, not both".into()))
                }
                (None, None) => return Err(missing("graph.lattice")),
                (Some(_), None) if g.box_size.is_none() => return Err(missing("graph.box")),
                _ => {}
            }
            if g.box_size == Some(0) {
                return Err(CliError::Schema("graph.box must be positive".into()));
            }
        }
        let lattice_only = matches!(self.command, Command::Exhaustion | Command::Wegner | Command::Jump);
        if lattice_only && self.graph()?.lattice.is_none() {
            return Err(CliError::Schema(format!("{:?} needs `graph.lattice`", self.command)));
        }
        match self.command {
            Command::Spectrum => {
                let s = require(&self.spectrum, "spectrum")?;
                if !(s.lo < s.hi) {
                    return Err(CliError::Schema("spectrum: need lo < hi".into()));
                }
            }
            Command::Floquet => {}
            Command::CombIds => {
                if require(&self.comb_ids, "comb_ids")?.sizes.is_empty() {
                    return Err(CliError::Schema("comb_ids.sizes is empty".into()));
                }
            }
            Command::Ids => {
                require(&self.energies, "energies")?;
            }
            Command::Exhaustion => {
                require(&self.exhaustion, "exhaustion")?;
                require(&self.energies, "energies")?;
            }
            Command::Wegner => {
                let w = require(&self.wegner, "wegner")?;
                for &c in &w.centers {
                    for &h in &w.widths {
                        let (lo, hi) = (c - h / 2.0, c + h / 2.0);
                        if !(h > 0.0) || lo < 1.0 / w.u || hi > w.u {
                            return Err(CliError::Schema(format!(
                                "wegner: interval [{lo}, {hi}] leaves [1/u, u] = [{}, {}]",
                                1.0 / w.u,
                                w.u
                            )));
                        }
                    }
                }
            }
            Command::Jump => {
                require(&self.jump, "jump")?;
            }
        }
        if let Some(e) = &self.energies {
            if e.values.is_none() && e.max.is_none() {
                return Err(missing("energies.max"));
            }
        }
        Ok(())
    }

    /// Sorted energy grid.
    pub fn energy_grid(&self) -> Result<Vec<f64>, CliError> {
        let e = require(&self.energies, "energies")?;
        let mut grid = match &e.values {
            Some(v) => v.clone(),
            None => {
                let max = e.max.ok_or_else(|| missing("energies.max"))?;
                let n = e.points.max(2);
                (0..n).map(|i| e.min + (max - e.min) * i as f64 / (n - 1) as f64).collect()
            }
        };
        if e.refine {
            let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            grid.extend(qgraph_core::ids::default_energy_grid(hi, 0));
        }
        grid.retain(|x| x.is_finite());
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(grid)
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        crate::output::sha256_hex(self.canonical().as_bytes())
    }
}
