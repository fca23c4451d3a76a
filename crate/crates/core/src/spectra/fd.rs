//! Finite-difference oracle: piecewise-linear elements with lumped mass on
//! subdivided edges. Eigenvalue errors are `O(h²)`; pairs of meshes give a
//! Richardson-extrapolated value with an error estimate.
//!
//! Kirchhoff and delta vertices carry one shared node, Robin and Neumann
//! vertices one node per edge end, Dirichlet vertices none.

use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::{group_levels, OperatorSpec, SolverOptions, SolverTag, Spectrum};
use crate::conditions::ConditionKind;
use crate::error::{Error, Result};
use crate::graph::End;

/// Node layout of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeNodes {
    pub segments: usize,
    pub h: f64,
    pub tail: Option<usize>,
    pub head: Option<usize>,
    pub interior: Range<usize>,
}

/// Assembled generalized eigenproblem `K u = λ M u` with diagonal `M`.
#[derive(Debug, Clone)]
pub struct Discretization {
    stiffness: DMatrix<f64>,
    mass: Vec<f64>,
    edges: Vec<EdgeNodes>,
    mesh: usize,
}

/// Eigenpairs with `M`-orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Builds the discretization with at least `mesh` segments per unit length
/// and at least two per edge.
pub fn discretize(spec: &OperatorSpec, mesh: usize) -> Result<Discretization> {
    if mesh < 4 {
        return Err(Error::InvalidArgument(alloc::format!("mesh density {mesh} < 4")));
    }
    let g = spec.graph();
    let top = g.topology();
    let mut next = 0;
    // Node of each half-edge end (None for Dirichlet), plus Robin terms.
    let mut end_node = alloc::vec![None; 2 * g.num_edges()];
    let mut diag_extra: Vec<(usize, f64)> = Vec::new();
    for v in 0..top.num_vertices() {
        let cond = spec.conditions().get(v);
        let inc = top.incidence(v);
        match cond.kind() {
            ConditionKind::Dirichlet => {}
            ConditionKind::Kirchhoff | ConditionKind::Delta(_) => {
                for h in inc {
                    end_node[h.index()] = Some(next);
                }
                if let ConditionKind::Delta(a) = cond.kind() {
                    diag_extra.push((next, a * inc.len() as f64));
                }
                next += 1;
            }
            ConditionKind::Robin(a) => {
                for h in inc {
                    end_node[h.index()] = Some(next);
                    diag_extra.push((next, a));
                    next += 1;
                }
            }
            ConditionKind::General => return Err(Error::UnsupportedCondition(v)),
        }
    }
    let mut edges = Vec::with_capacity(g.num_edges());
    for e in 0..g.num_edges() {
        let l = g.length(e);
        let segments = ((mesh as f64 * l).ceil() as usize).max(2);
        let interior = next..next + segments - 1;
        next += segments - 1;
        let idx = |end| end_node[crate::graph::HalfEdge { edge: e, end }.index()];
        edges.push(EdgeNodes {
            segments,
            h: l / segments as f64,
            tail: idx(End::Tail),
            head: idx(End::Head),
            interior,
        });
    }
    let n = next;
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut mass = alloc::vec![0.0; n];
    for (e, en) in edges.iter().enumerate() {
        let q = spec.potential()[e];
        let nodes: Vec<Option<usize>> = core::iter::once(en.tail)
            .chain(en.interior.clone().map(Some))
            .chain(core::iter::once(en.head))
            .collect();
        for w in nodes.windows(2) {
            let inv = 1.0 / en.h;
            let half = 0.5 * en.h;
            for &i in w.iter().flatten() {
                k[(i, i)] += inv + q * half;
                mass[i] += half;
            }
            if let [Some(i), Some(j)] = *w {
                k[(i, j)] -= inv;
                k[(j, i)] -= inv;
            }
        }
    }
    for (i, a) in diag_extra {
        k[(i, i)] += a;
    }
    Ok(Discretization { stiffness: k, mass, edges, mesh })
}

impl Discretization {
    pub fn num_nodes(&self) -> usize {
        self.mass.len()
    }

    pub fn edges(&self) -> &[EdgeNodes] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mesh(&self) -> usize {
        self.mesh
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::symmetric_eigenvalues(&self.symmetrized())
    }

    fn symmetrized(&self) -> DMatrix<f64> {
        let s: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        DMatrix::from_fn(self.num_nodes(), self.num_nodes(), |i, j| self.stiffness[(i, j)] * s[i] * s[j])
    }

    /// Eigenpairs, ascending.
    pub fn solve(&self) -> FdSolution {
        let n = self.num_nodes();
        if n == 0 {
            return FdSolution { values: Vec::new(), vectors: DMatrix::zeros(0, 0) };
        }
        let eig = self.symmetrized().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])] / self.mass[r].sqrt());
        FdSolution { values, vectors }
    }

    /// Lumped `∫_e |u|²` of a nodal vector.
    pub fn edge_mass(&self, e: usize, u: impl Fn(usize) -> f64) -> f64 {
        let en = &self.edges[e];
        let ends: f64 = [en.tail, en.head].iter().flatten().map(|&i| u(i).powi(2)).sum();
        let inner: f64 = en.interior.clone().map(|i| u(i).powi(2)).sum();
        en.h * (inner + 0.5 * ends)
    }
}

/// All discrete eigenvalues grouped into levels.
pub fn discretize_and_solve(spec: &OperatorSpec, mesh: usize) -> Result<Spectrum> {
    let values = discretize(spec, mesh)?.eigenvalues();
    let window = (
        values.first().copied().unwrap_or(0.0),
        values.last().copied().unwrap_or(0.0),
    );
    Ok(Spectrum::new(
        group_levels(&values, 1e-9),
        window,
        SolverTag::FiniteDifference { mesh },
        SolverOptions::default(),
        Vec::new(),
    ))
}

/// Richardson extrapolation of the lowest `count` eigenvalues from meshes
/// `m`, `2m` and `4m`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Richardson {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
    /// `|extrapolated − fine|` per eigenvalue.
    pub error_estimate: Vec<f64>,
    /// `log₂((λ_m − λ_2m)/(λ_2m − λ_4m))` per eigenvalue.
    pub observed_order: Vec<f64>,
}

pub fn richardson(spec: &OperatorSpec, mesh: usize, count: usize) -> Result<Richardson> {
    let take = |m: usize| -> Result<Vec<f64>> {
        let mut v = discretize(spec, m)?.eigenvalues();
        v.truncate(count);
        Ok(v)
    };
    let (a, b, c) = (take(mesh)?, take(2 * mesh)?, take(4 * mesh)?);
    let n = a.len().min(b.len()).min(c.len());
    let extrapolated: Vec<f64> = (0..n).map(|i| (4.0 * b[i] - a[i]) / 3.0).collect();
    let error_estimate = (0..n).map(|i| (extrapolated[i] - b[i]).abs()).collect();
    let observed_order = (0..n).map(|i| ((a[i] - b[i]) / (b[i] - c[i])).abs().log2()).collect();
    Ok(Richardson {
        coarse: a[..n].to_vec(),
        fine: b[..n].to_vec(),
        extrapolated,
        error_estimate,
        observed_order,
    })
}
