//! Self-adjoint vertex conditions in `(Q, R)` form:
//! `(I − Q) x = 0` and `Q x' = R x`, where `x` collects the values and `x'`
//! the derivatives into the edges at a vertex, ordered as in
//! [`TopologicalGraph::incidence`](crate::graph::TopologicalGraph::incidence).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{TopologicalGraph, VertexId};
use crate::linalg::{self, real, CMatrix};

/// Tolerance for the matrix identities of a condition.
pub const TOLERANCE: f64 = 1e-12;

/// Builder family a condition came from. Solvers use it for fast paths and
/// the discretization uses it to decide support.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConditionKind {
    Kirchhoff,
    Dirichlet,
    /// `Q = I`, `R = αI`: each edge end independently has `f' = α f`.
    Robin(f64),
    /// Kirchhoff `Q` with `R = α Q`.
    Delta(f64),
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCondition {
    q: CMatrix,
    r: CMatrix,
    kind: ConditionKind,
    range: CMatrix,
    kernel: CMatrix,
}

impl VertexCondition {
    pub fn kirchhoff(deg: usize) -> Result<Self> {
        Self::delta(deg, 0.0).map(|mut c| {
            c.kind = ConditionKind::Kirchhoff;
            c
        })
    }

    /// `f` continuous and `Σ f'(e) = α·deg·f(v)`.
    pub fn delta(deg: usize, strength: f64) -> Result<Self> {
        if deg == 0 {
            return Err(Error::ZeroDegree);
        }
        let d = deg as f64;
        let q = CMatrix::from_element(deg, deg, real(1.0 / d));
        let r = &q * real(strength);
        let range = CMatrix::from_element(deg, 1, real(1.0 / d.sqrt()));
        let (_, kernel) = linalg::projection_bases(&q);
        Ok(VertexCondition { q, r, kind: ConditionKind::Delta(strength), range, kernel })
    }

    pub fn dirichlet(deg: usize) -> Result<Self> {
        if deg == 0 {
            return Err(Error::ZeroDegree);
        }
        Ok(VertexCondition {
            q: CMatrix::zeros(deg, deg),
            r: CMatrix::zeros(deg, deg),
            kind: ConditionKind::Dirichlet,
            range: CMatrix::zeros(deg, 0),
            kernel: CMatrix::identity(deg, deg),
        })
    }

    pub fn neumann(deg: usize) -> Result<Self> {
        Self::robin(deg, 0.0)
    }

    /// Decoupled ends with `f' = α f` on each; `α = −C_R` gives the
    /// Neumann-type boundary condition `(ℂ^{E_v}, −C_R)`.
    pub fn robin(deg: usize, alpha: f64) -> Result<Self> {
        if deg == 0 {
            return Err(Error::ZeroDegree);
        }
        Ok(VertexCondition {
            q: CMatrix::identity(deg, deg),
            r: CMatrix::identity(deg, deg) * real(alpha),
            kind: ConditionKind::Robin(alpha),
            range: CMatrix::identity(deg, deg),
            kernel: CMatrix::zeros(deg, 0),
        })
    }

    /// Arbitrary matrices. Only shapes are checked here; [`validate`] reports
    /// projector and symmetry violations.
    pub fn general(q: CMatrix, r: CMatrix) -> Result<Self> {
        let d = q.nrows();
        if d == 0 {
            return Err(Error::ZeroDegree);
        }
        if q.ncols() != d || r.nrows() != d || r.ncols() != d {
            return Err(Error::InvalidCondition {
                vertex: 0,
                reason: format!("Q is {}x{}, R is {}x{}", d, q.ncols(), r.nrows(), r.ncols()),
            });
        }
        let (range, kernel) = linalg::projection_bases(&q);
        Ok(VertexCondition { q, r, kind: ConditionKind::General, range, kernel })
    }

    pub fn degree(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn kind(&self) -> ConditionKind {
        self.kind
    }

    /// Orthonormal basis of `ran Q` as columns.
    pub fn range_basis(&self) -> &CMatrix {
        &self.range
    }

    /// Orthonormal basis of `ker Q` as columns.
    pub fn kernel_basis(&self) -> &CMatrix {
        &self.kernel
    }

    pub fn is_dirichlet(&self) -> bool {
        self.range.ncols() == 0
    }

    /// `‖R‖`.
    pub fn r_norm(&self) -> f64 {
        match self.kind {
            ConditionKind::Kirchhoff | ConditionKind::Dirichlet => 0.0,
            ConditionKind::Robin(a) | ConditionKind::Delta(a) => a.abs(),
            ConditionKind::General => linalg::operator_norm(&self.r),
        }
    }

    /// Stacked constraints `[[I − Q, 0], [−R, Q]]` acting on `(x, x')`.
    pub fn constraint_matrix(&self) -> CMatrix {
        let d = self.degree();
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        let id = CMatrix::identity(d, d);
        m.view_mut((0, 0), (d, d)).copy_from(&(id - &self.q));
        m.view_mut((d, 0), (d, d)).copy_from(&(-&self.r));
        m.view_mut((d, d), (d, d)).copy_from(&self.q);
        m
    }

    /// Dimension of `{(x, x') : (I−Q)x = 0, Qx' = Rx}`; equals `deg` for a
    /// Lagrangian condition.
    pub fn solution_dimension(&self) -> usize {
        linalg::nullity(&self.constraint_matrix(), 1e-10)
    }

    /// Whether boundary data `(x, x')` satisfies the condition.
    pub fn satisfied_by(&self, x: &[Complex64], dx: &[Complex64], tol: f64) -> bool {
        let d = self.degree();
        if x.len() != d || dx.len() != d {
            return false;
        }
        let xv = CMatrix::from_column_slice(d, 1, x);
        let dv = CMatrix::from_column_slice(d, 1, dx);
        let id = CMatrix::identity(d, d);
        let first = (id - &self.q) * &xv;
        let second = &self.q * dv - &self.r * xv;
        linalg::max_abs(&first) <= tol && linalg::max_abs(&second) <= tol
    }

    fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let q = &self.q;
        if linalg::max_abs(&(q * q - q)) > tol {
            out.push(String::from("Q is not idempotent"));
        }
        if linalg::max_abs(&(q.adjoint() - q)) > tol {
            out.push(String::from("Q is not Hermitian"));
        }
        if linalg::max_abs(&(self.r.adjoint() - &self.r)) > tol {
            out.push(String::from("R is not Hermitian"));
        }
        if linalg::max_abs(&(q * &self.r * q - &self.r)) > tol {
            out.push(String::from("R does not act on ran Q"));
        }
        out
    }
}

/// One condition per vertex, plus an optional declared bound `C_R` and the
/// set of vertices marked as Dirichlet-decoupled boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionAssignment {
    conditions: Vec<VertexCondition>,
    declared_bound: Option<f64>,
    dirichlet_boundary: BTreeSet<VertexId>,
}

impl ConditionAssignment {
    pub fn new(conditions: Vec<VertexCondition>) -> Self {
        ConditionAssignment { conditions, declared_bound: None, dirichlet_boundary: BTreeSet::new() }
    }

    /// Kirchhoff at every vertex.
    pub fn kirchhoff(graph: &TopologicalGraph) -> Result<Self> {
        Self::kirchhoff_dirichlet(graph, &[])
    }

    /// Kirchhoff inside, Dirichlet on `boundary` (marked as such).
    pub fn kirchhoff_dirichlet(graph: &TopologicalGraph, boundary: &[VertexId]) -> Result<Self> {
        let boundary: BTreeSet<VertexId> = boundary.iter().copied().collect();
        let conditions = (0..graph.num_vertices())
            .map(|v| {
                let d = graph.degree(v);
                if d == 0 {
                    return Err(Error::IsolatedVertex(v));
                }
                if boundary.contains(&v) {
                    VertexCondition::dirichlet(d)
                } else {
                    VertexCondition::kirchhoff(d)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConditionAssignment { conditions, declared_bound: None, dirichlet_boundary: boundary })
    }

    pub fn with_declared_bound(mut self, bound: f64) -> Self {
        self.declared_bound = Some(bound);
        self
    }

    /// Marks vertices as Dirichlet boundary. Their conditions must already
    /// be Dirichlet.
    pub fn with_dirichlet_boundary(mut self, boundary: &[VertexId]) -> Result<Self> {
        for &v in boundary {
            match self.conditions.get(v) {
                Some(c) if c.is_dirichlet() => {
                    self.dirichlet_boundary.insert(v);
                }
                _ => {
                    return Err(Error::InvalidCondition {
                        vertex: v,
                        reason: String::from("marked boundary vertex is not Dirichlet"),
                    })
                }
            }
        }
        Ok(self)
    }

    pub fn set(&mut self, v: VertexId, condition: VertexCondition) {
        if !condition.is_dirichlet() {
            self.dirichlet_boundary.remove(&v);
        }
        self.conditions[v] = condition;
    }

    pub fn conditions(&self) -> &[VertexCondition] {
        &self.conditions
    }

    pub fn get(&self, v: VertexId) -> &VertexCondition {
        &self.conditions[v]
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn declared_bound(&self) -> Option<f64> {
        self.declared_bound
    }

    pub fn dirichlet_boundary(&self) -> &BTreeSet<VertexId> {
        &self.dirichlet_boundary
    }

    /// Checks the assignment against a graph: one entry per vertex with
    /// matching degree, and no condition violations.
    pub fn check_against(&self, graph: &TopologicalGraph) -> Result<()> {
        if self.conditions.len() != graph.num_vertices() {
            return Err(Error::AssignmentSize {
                expected: graph.num_vertices(),
                got: self.conditions.len(),
            });
        }
        for (v, c) in self.conditions.iter().enumerate() {
            if c.degree() != graph.degree(v) {
                return Err(Error::InvalidCondition {
                    vertex: v,
                    reason: format!("condition has size {}, vertex degree is {}", c.degree(), graph.degree(v)),
                });
            }
        }
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            let msg = report
                .violations
                .iter()
                .map(|x| format!("vertex {}: {}", x.vertex, x.reason))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::ConditionViolations(msg))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub vertex: VertexId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    /// `sup_v ‖R(v)‖`.
    pub c_r: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Projector and symmetry checks at tolerance [`TOLERANCE`], the attained
/// `C_R`, and a violation if a declared bound is exceeded.
pub fn validate(assignment: &ConditionAssignment) -> ValidationReport {
    let mut violations = Vec::new();
    let mut c_r: f64 = 0.0;
    for (v, c) in assignment.conditions.iter().enumerate() {
        for reason in c.violations(TOLERANCE) {
            violations.push(Violation { vertex: v, reason });
        }
        c_r = c_r.max(c.r_norm());
    }
    if let Some(bound) = assignment.declared_bound {
        for (v, c) in assignment.conditions.iter().enumerate() {
            if c.r_norm() > bound * (1.0 + TOLERANCE) {
                violations.push(Violation {
                    vertex: v,
                    reason: format!("|R| = {} exceeds declared bound {}", c.r_norm(), bound),
                });
            }
        }
    }
    ValidationReport { c_r, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use alloc::vec;

    fn c(x: f64) -> Complex64 {
        real(x)
    }

    #[test]
    fn kirchhoff_entries() {
        let k = VertexCondition::kirchhoff(4).unwrap();
        assert!(k.q().iter().all(|z| (z.re - 0.25).abs() < 1e-15 && z.im == 0.0));
        let tr: f64 = (0..4).map(|i| k.q()[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-15);
        let one = VertexCondition::kirchhoff(1).unwrap();
        assert_eq!(one.q()[(0, 0)], ONE);
        assert_eq!(one.q(), VertexCondition::neumann(1).unwrap().q());
    }

    #[test]
    fn kirchhoff_accepts_balanced_flux() {
        let k = VertexCondition::kirchhoff(3).unwrap();
        assert!(k.satisfied_by(&[c(1.0), c(1.0), c(1.0)], &[c(1.0), c(-2.0), c(1.0)], 1e-12));
        assert!(!k.satisfied_by(&[c(1.0), c(1.0), c(1.0)], &[c(1.0), c(1.0), c(1.0)], 1e-12));
    }

    #[test]
    fn zero_degree_rejected() {
        assert_eq!(VertexCondition::kirchhoff(0).unwrap_err(), Error::ZeroDegree);
    }

    #[test]
    fn dirichlet_and_neumann() {
        let d = VertexCondition::dirichlet(2).unwrap();
        assert!(d.q().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(!d.satisfied_by(&[c(1.0), c(0.0)], &[c(0.0), c(0.0)], 1e-12));
        let n = VertexCondition::neumann(3).unwrap();
        assert!(n.satisfied_by(&[c(1.0), c(2.0), c(3.0)], &[c(0.0); 3], 1e-12));
        assert!(!n.satisfied_by(&[c(1.0), c(2.0), c(3.0)], &[c(1.0), c(0.0), c(0.0)], 1e-12));
    }

    #[test]
    fn delta_zero_is_kirchhoff() {
        let a = VertexCondition::delta(2, 0.0).unwrap();
        let b = VertexCondition::kirchhoff(2).unwrap();
        assert_eq!(a.q(), b.q());
        assert_eq!(a.r(), b.r());
    }

    #[test]
    fn attained_bound() {
        let g = TopologicalGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let mut a = ConditionAssignment::kirchhoff(&g).unwrap();
        assert_eq!(validate(&a).c_r, 0.0);
        a.set(1, VertexCondition::delta(2, -3.0).unwrap());
        let rep = validate(&a);
        assert!((rep.c_r - 3.0).abs() < 1e-12);
        assert!(rep.is_valid());
        assert!(!validate(&a.clone().with_declared_bound(1.0)).is_valid());
    }

    #[test]
    fn perturbed_projector_flagged() {
        let mut q = VertexCondition::kirchhoff(3).unwrap().q().clone();
        q[(0, 1)] += c(1e-6);
        q[(1, 0)] += c(1e-6);
        let bad = VertexCondition::general(q, CMatrix::zeros(3, 3)).unwrap();
        let a = ConditionAssignment::new(vec![bad]);
        let rep = validate(&a);
        assert!(rep.violations.iter().any(|v| v.reason.contains("idempotent")));
        assert_eq!(validate(&a), rep);
    }

    #[test]
    fn builders_are_lagrangian() {
        for d in 1..6 {
            for cond in [
                VertexCondition::kirchhoff(d).unwrap(),
                VertexCondition::dirichlet(d).unwrap(),
                VertexCondition::neumann(d).unwrap(),
                VertexCondition::delta(d, 2.5).unwrap(),
                VertexCondition::robin(d, -1.0).unwrap(),
            ] {
                assert_eq!(cond.solution_dimension(), d);
            }
        }
    }
}
