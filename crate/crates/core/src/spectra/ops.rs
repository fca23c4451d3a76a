//! Spectral shift, length rescaling and decoupling at a subgraph boundary.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{Counter, OperatorSpec, SolverOptions};
use crate::conditions::{ConditionAssignment, ConditionKind, VertexCondition};
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Subgraph, TopologicalGraph, VertexId};

/// `ξ(λ) = n(H₂, λ) − n(H₁, λ)` on a set of energies.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectralShift {
    pub lambdas: Vec<f64>,
    pub xi: Vec<i64>,
    /// Vertices whose conditions differ.
    pub v_diff: Vec<VertexId>,
    /// `2 Σ_{v∈V_diff} deg v`.
    pub bound: usize,
}

impl SpectralShift {
    pub fn max_abs(&self) -> usize {
        self.xi.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn within_bound(&self) -> bool {
        self.max_abs() <= self.bound
    }
}

pub fn spectral_shift(
    h1: &OperatorSpec,
    h2: &OperatorSpec,
    lambdas: &[f64],
    options: &SolverOptions,
) -> Result<SpectralShift> {
    if h1.graph() != h2.graph() || h1.potential() != h2.potential() {
        return Err(Error::GraphMismatch);
    }
    let top = h1.graph().topology();
    let v_diff: Vec<VertexId> = (0..top.num_vertices())
        .filter(|&v| {
            let (a, b) = (h1.conditions().get(v), h2.conditions().get(v));
            a.q() != b.q() || a.r() != b.r()
        })
        .collect();
    let bound = 2 * v_diff.iter().map(|&v| top.degree(v)).sum::<usize>();
    let (c1, c2) = (Counter::new(h1, options.svd_threshold), Counter::new(h2, options.svd_threshold));
    let xi = lambdas
        .iter()
        .map(|&l| c2.count_at_most(l) as i64 - c1.count_at_most(l) as i64)
        .collect();
    Ok(SpectralShift { lambdas: lambdas.to_vec(), xi, v_diff, bound })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub spec: OperatorSpec,
    /// Set when the hypotheses of `λ_i ↦ e^{−2s} λ_i` do not hold.
    pub warning: Option<&'static str>,
}

/// Multiplies every edge length by `e^s`.
pub fn rescale_lengths(spec: &OperatorSpec, s: f64) -> Result<Rescaled> {
    let graph = spec.graph().scaled(s.exp())?;
    let warning = if spec.potential().iter().any(|&q| q != 0.0) {
        Some("nonzero potential: eigenvalues do not scale by e^{-2s}")
    } else if spec
        .conditions()
        .conditions()
        .iter()
        .any(|c| !matches!(c.kind(), ConditionKind::Kirchhoff | ConditionKind::Dirichlet))
    {
        Some("conditions other than Kirchhoff/Dirichlet: eigenvalues do not scale by e^{-2s}")
    } else {
        None
    };
    Ok(Rescaled { spec: spec.replace_graph(graph), warning })
}

/// `H` cut along `∂Λ ∩ ∂Λ'` with Dirichlet conditions (an upper bound in
/// the form sense) and with Neumann-type conditions `f' = −C_R f` on every
/// end (a lower bound).
#[derive(Debug, Clone, PartialEq)]
pub struct Decoupled {
    pub dirichlet: OperatorSpec,
    pub neumann: OperatorSpec,
    /// Vertices of the original graph that were split.
    pub split: Vec<VertexId>,
    pub c_r: f64,
}

pub fn decouple(spec: &OperatorSpec, lambda: &Subgraph) -> Result<Decoupled> {
    let top = spec.graph().topology();
    let sub = Subgraph::from_parts(top, lambda.vertices(), lambda.edges())?;
    let in_sub = |e: usize| sub.contains_edge(e);
    let split: Vec<VertexId> = (0..top.num_vertices())
        .filter(|&v| {
            let inc = top.incidence(v);
            inc.iter().any(|h| in_sub(h.edge)) && inc.iter().any(|h| !in_sub(h.edge))
        })
        .collect();
    let n = top.num_vertices();
    let copy_of = |v: VertexId| split.binary_search(&v).ok().map(|i| n + i);
    let edges: Vec<(VertexId, VertexId)> = top
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(t, h))| {
            if in_sub(e) {
                (t, h)
            } else {
                (copy_of(t).unwrap_or(t), copy_of(h).unwrap_or(h))
            }
        })
        .collect();
    let new_top = TopologicalGraph::new(n + split.len(), edges)?;
    let graph = MetricGraph::new(new_top.clone(), spec.graph().lengths().to_vec())?;
    let c_r = spec.c_r();
    let build = |make: &dyn Fn(usize) -> Result<VertexCondition>| -> Result<ConditionAssignment> {
        let mut conds = Vec::with_capacity(new_top.num_vertices());
        for v in 0..new_top.num_vertices() {
            let keep = v < n && split.binary_search(&v).is_err();
            conds.push(if keep { spec.conditions().get(v).clone() } else { make(new_top.degree(v))? });
        }
        Ok(ConditionAssignment::new(conds))
    };
    let kept: Vec<VertexId> = spec
        .conditions()
        .dirichlet_boundary()
        .iter()
        .copied()
        .filter(|v| split.binary_search(v).is_err())
        .collect();
    let mut boundary = kept.clone();
    boundary.extend(split.iter().copied());
    boundary.extend(n..n + split.len());
    let dir_conds = build(&VertexCondition::dirichlet)?.with_dirichlet_boundary(&boundary)?;
    let neu_conds = build(&|d| VertexCondition::robin(d, -c_r))?.with_dirichlet_boundary(&kept)?;
    let dirichlet = OperatorSpec::new(graph.clone(), dir_conds)?.with_potential(spec.potential().to_vec())?;
    let neumann = OperatorSpec::new(graph, neu_conds)?.with_potential(spec.potential().to_vec())?;
    Ok(Decoupled { dirichlet, neumann, split, c_r })
}
