//! Spectra of compact metric graphs.
//!
//! Two independent solvers are provided. The default one counts eigenvalues
//! below `λ` exactly through the negative index of the vertex
//! Dirichlet-to-Neumann form and isolates eigenvalues by bisection on the
//! count; multiplicities are cross-checked against the kernel of the secular
//! matrix. The second one scans the smallest singular value of the secular
//! matrix. A finite-difference discretization serves as an oracle.

mod counting;
pub mod fd;
mod ops;
pub mod secular;

use alloc::vec::Vec;


use crate::conditions::{validate, ConditionAssignment};
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, VertexId};

pub use counting::{lowest_eigenvalues, Counter};
pub use ops::{decouple, rescale_lengths, spectral_shift, Decoupled, Rescaled, SpectralShift};

/// Schrödinger operator `-f'' + q_e f` on a metric graph with vertex
/// conditions and an edge-wise constant potential.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    graph: MetricGraph,
    conditions: ConditionAssignment,
    potential: Vec<f64>,
}

impl OperatorSpec {
    pub fn new(graph: MetricGraph, conditions: ConditionAssignment) -> Result<Self> {
        conditions.check_against(graph.topology())?;
        let potential = alloc::vec![0.0; graph.num_edges()];
        Ok(OperatorSpec { graph, conditions, potential })
    }

    /// Kirchhoff conditions everywhere.
    pub fn kirchhoff(graph: MetricGraph) -> Result<Self> {
        let c = ConditionAssignment::kirchhoff(graph.topology())?;
        Self::new(graph, c)
    }

    /// Kirchhoff inside, Dirichlet on `boundary`.
    pub fn dirichlet_box(graph: MetricGraph, boundary: &[VertexId]) -> Result<Self> {
        let c = ConditionAssignment::kirchhoff_dirichlet(graph.topology(), boundary)?;
        Self::new(graph, c)
    }

    pub fn with_potential(mut self, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != self.graph.num_edges() || potential.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidArgument(alloc::string::String::from(
                "potential needs one finite value per edge",
            )));
        }
        self.potential = potential;
        Ok(self)
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn conditions(&self) -> &ConditionAssignment {
        &self.conditions
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `‖q‖∞`.
    pub fn c_pot(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, q| m.max(q.abs()))
    }

    /// Attained `sup_v ‖R(v)‖`.
    pub fn c_r(&self) -> f64 {
        validate(&self.conditions).c_r
    }

    /// A lower bound for the spectrum from the trace estimate
    /// `|f(0)|² ≤ a‖f'‖² + (2/a)‖f‖²`, `a ≤ ℓ_min`.
    pub fn lower_bound(&self) -> f64 {
        let q_min = self.potential.iter().copied().fold(0.0, f64::min);
        let c_r = self.c_r();
        if c_r == 0.0 {
            return q_min;
        }
        let a = self.graph.l_min().min(0.5 / c_r);
        q_min - 4.0 * c_r / a
    }

    pub(crate) fn replace_graph(&self, graph: MetricGraph) -> Self {
        OperatorSpec { graph, conditions: self.conditions.clone(), potential: self.potential.clone() }
    }
}

/// Which solver produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SolverTag {
    Inertia,
    SingularValueScan,
    FiniteDifference { mesh: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    Inertia,
    SingularValueScan,
}

/// Solver tolerances. Energies are relative to `max(1, |λ|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverOptions {
    pub method: Method,
    /// Width at which bisection stops.
    pub energy_tol: f64,
    /// Singular-value cutoff for kernel dimensions of the row-scaled
    /// secular matrix.
    pub svd_threshold: f64,
    /// Upper bound on the `k`-grid step of the scan.
    pub max_scan_step: f64,
    /// Golden-section target width in `k`.
    pub refine_width: f64,
    /// Cross-check multiplicities above one against the secular kernel.
    pub verify_multiplicity: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::Inertia,
            energy_tol: 1e-11,
            svd_threshold: 1e-7,
            max_scan_step: 1e-2,
            refine_width: 1e-10,
            verify_multiplicity: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
}

/// An interval whose eigenvalue count disagrees with the kernel dimension
/// at its centre: roots closer than the tolerance that could not be
/// separated.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Cluster {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub kernel_dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Spectrum {
    levels: Vec<Level>,
    window: (f64, f64),
    solver: SolverTag,
    options: SolverOptions,
    flagged: Vec<Cluster>,
}

impl Spectrum {
    pub fn new(
        levels: Vec<Level>,
        window: (f64, f64),
        solver: SolverTag,
        options: SolverOptions,
        flagged: Vec<Cluster>,
    ) -> Self {
        Spectrum { levels, window, solver, options, flagged }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn solver(&self) -> SolverTag {
        self.solver
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn flagged(&self) -> &[Cluster] {
        &self.flagged
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn values(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| core::iter::repeat_n(l.value, l.multiplicity))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    /// `n(H, λ)`: eigenvalues `≤ λ` counted with multiplicity.
    pub fn counting(&self, lambda: f64) -> Result<usize> {
        counting_function(self, lambda)
    }
}

/// `n(H, λ) = #{i : λ_i ≤ λ}` for `λ` inside the spectrum's window.
pub fn counting_function(spectrum: &Spectrum, lambda: f64) -> Result<usize> {
    let (lo, hi) = spectrum.window;
    if !(lambda >= lo && lambda <= hi) {
        return Err(Error::OutsideWindow { value: lambda, lo, hi });
    }
    Ok(spectrum
        .levels
        .iter()
        .take_while(|l| l.value <= lambda)
        .map(|l| l.multiplicity)
        .sum())
}

/// Eigenvalues in `[lo, hi]`.
pub fn eigenvalues_in(spec: &OperatorSpec, lo: f64, hi: f64, options: &SolverOptions) -> Result<Spectrum> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(alloc::format!("window [{lo}, {hi}]")));
    }
    match options.method {
        Method::Inertia => counting::bisect(spec, lo, hi, options),
        Method::SingularValueScan => secular::scan(spec, lo, hi, options),
    }
}

/// Groups a sorted list of eigenvalues into levels, merging values closer
/// than `rel_gap · max(1, |λ|)`.
pub fn group_levels(values: &[f64], rel_gap: f64) -> Vec<Level> {
    let mut levels: Vec<(f64, usize, f64)> = Vec::new();
    for &v in values {
        match levels.last_mut() {
            Some((sum, m, last)) if (v - *last).abs() <= rel_gap * last.abs().max(1.0) => {
                *sum += v;
                *m += 1;
                *last = v;
            }
            _ => levels.push((v, 1, v)),
        }
    }
    levels
        .into_iter()
        .map(|(sum, m, _)| Level { value: sum / m as f64, multiplicity: m })
        .collect()
}
