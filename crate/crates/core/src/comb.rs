//! Combinatorial Laplacians, Kagome hexagon eigenfunctions, Floquet bands
//! and the metric–combinatorial correspondence `μ = 1 − cos √λ`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{TopologicalGraph, VertexId};
use crate::lattice::{kagome_hexagon, Cell, LatticePatch, PeriodicGraph};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// The flat-band eigenvalue of the Kagome Laplacian.
pub const FLAT_BAND: f64 = 1.5;

/// `(Δf)(v) = (1/deg v) Σ_{w∼v} (f(v) − f(w))` with the graph's own degrees.
pub fn comb_laplacian(graph: &TopologicalGraph) -> Result<DMatrix<f64>> {
    comb_laplacian_with_degrees(graph, &graph.degrees())
}

/// The same action normalized by prescribed degrees, e.g. lattice degrees
/// for a patch with zero values outside:
/// `(Δf)(v) = f(v) − (1/deg_X v) Σ_{w∼v, w∈patch} f(w)`.
pub fn comb_laplacian_with_degrees(graph: &TopologicalGraph, degrees: &[usize]) -> Result<DMatrix<f64>> {
    let n = graph.num_vertices();
    if let Some(v) = (0..n).find(|&v| degrees[v] == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let mut m = DMatrix::identity(n, n);
    for v in 0..n {
        let d = degrees[v] as f64;
        for w in graph.neighbors(v) {
            m[(v, w)] -= 1.0 / d;
        }
    }
    Ok(m)
}

/// Ascending spectrum of the degree-normalized Laplacian, computed from the
/// symmetric form `I − D^{-1/2} A D^{-1/2}`.
pub fn normalized_eigenvalues(graph: &TopologicalGraph, degrees: &[usize]) -> Result<Vec<f64>> {
    let n = graph.num_vertices();
    if let Some(v) = (0..n).find(|&v| degrees[v] == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let mut m = DMatrix::identity(n, n);
    for v in 0..n {
        for w in graph.neighbors(v) {
            m[(v, w)] -= 1.0 / ((degrees[v] * degrees[w]) as f64).sqrt();
        }
    }
    Ok(linalg::symmetric_eigenvalues(&m))
}

/// Ascending spectrum of [`comb_laplacian`].
pub fn comb_eigenvalues(graph: &TopologicalGraph) -> Result<Vec<f64>> {
    normalized_eigenvalues(graph, &graph.degrees())
}

/// `F_H = Σ_k (−1)^k δ_{v_k}` on the hexagon `H_γ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HexagonFunction {
    pub cell: Cell,
    pub vertices: [VertexId; 6],
    pub values: [f64; 6],
}

impl HexagonFunction {
    pub fn to_vector(&self, n: usize) -> Vec<f64> {
        let mut f = alloc::vec![0.0; n];
        for (v, x) in self.vertices.iter().zip(self.values) {
            f[*v] = x;
        }
        f
    }
}

/// The hexagon function of `H_γ` and `‖ΔF − (3/2)F‖∞`. All six vertices
/// must have their full lattice degree inside the patch.
pub fn hexagon_eigenfunction(patch: &LatticePatch, cell: Cell) -> Result<(HexagonFunction, f64)> {
    let mut vertices = [0; 6];
    for (slot, key) in vertices.iter_mut().zip(kagome_hexagon(cell)) {
        match patch.vertex_index(key) {
            Some(v) if patch.graph().degree(v) == patch.lattice_degrees()[v] => *slot = v,
            _ => return Err(Error::HexagonNotInterior(cell[0], cell[1])),
        }
    }
    let values = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    let h = HexagonFunction { cell, vertices, values };
    let lap = comb_laplacian(patch.graph())?;
    let f = nalgebra::DVector::from_vec(h.to_vector(patch.len()));
    let r = &lap * &f - &f * FLAT_BAND;
    Ok((h, r.amax()))
}

/// Rank of the stacked hexagon functions of the given cells.
pub fn hexagon_family_rank(patch: &LatticePatch, cells: &[Cell]) -> Result<usize> {
    let rows = cells
        .iter()
        .map(|&c| hexagon_eigenfunction(patch, c).map(|(h, _)| h.to_vector(patch.len())))
        .collect::<Result<Vec<_>>>()?;
    let m = CMatrix::from_fn(rows.len(), patch.len(), |i, j| Complex64::new(rows[i][j], 0.0));
    Ok(linalg::rank(&m.transpose(), 1e-10))
}

/// The θ-equivariant Kagome Laplacian on `ℂ^Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    pub theta: [f64; 2],
    pub matrix: CMatrix,
}

fn cis(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

impl FloquetMatrix {
    /// `(1/4)[[4, −1−e^{−iθ₂}, −e^{−iθ₁}−e^{−iθ₂}], [·, 4, −1−e^{−iθ₁}], [·, ·, 4]]`,
    /// completed Hermitian.
    pub fn kagome(theta: [f64; 2]) -> Self {
        let (e1, e2) = (cis(-theta[0]), cis(-theta[1]));
        let q = Complex64::new(0.25, 0.0);
        let m12 = -(ONE + e2) * q;
        let m13 = -(e1 + e2) * q;
        let m23 = -(ONE + e1) * q;
        let d = ONE;
        let matrix = CMatrix::from_row_slice(
            3,
            3,
            &[d, m12, m13, m12.conj(), d, m23, m13.conj(), m23.conj(), d],
        );
        FloquetMatrix { theta, matrix }
    }

    /// `κ = cos θ₁ + cos θ₂ + cos(θ₁ − θ₂)`.
    pub fn kappa(&self) -> f64 {
        kappa(self.theta)
    }

    /// Ascending numerical eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let ev = linalg::hermitian_eigenvalues(&self.matrix);
        [ev[0], ev[1], ev[2]]
    }

    /// `[μ₋, μ₊, μ₁]` from the closed form, ascending.
    pub fn closed_form(&self) -> [f64; 3] {
        closed_form(self.theta)
    }
}

pub fn kappa(theta: [f64; 2]) -> f64 {
    theta[0].cos() + theta[1].cos() + (theta[0] - theta[1]).cos()
}

/// `μ± = 3/4 ± (1/4)√(3 + 2κ)` and `μ₁ = 3/2`. The root is evaluated as
/// `|1 + e^{iθ₁} + e^{iθ₂}|`, which equals `√(3 + 2κ)` without cancellation
/// near `κ = −3/2`.
pub fn closed_form(theta: [f64; 2]) -> [f64; 3] {
    let r = (ONE + cis(theta[0]) + cis(theta[1])).norm();
    [0.75 - 0.25 * r, 0.75 + 0.25 * r, FLAT_BAND]
}

/// `D^{-1/2}(D − A_θ)D^{-1/2}` for a periodic graph, with
/// `(A_θ f)_i = Σ_{(j,δ)∼(i,0)} e^{i⟨θ,δ⟩} f_j`.
pub fn bloch_matrix(graph: &PeriodicGraph, theta: [f64; 2]) -> CMatrix {
    let n = graph.num_vertex_orbits();
    let mut a = CMatrix::zeros(n, n);
    for o in graph.edge_orbits() {
        let d = [o.head_shift[0] - o.tail_shift[0], o.head_shift[1] - o.tail_shift[1]];
        let phase = cis(theta[0] * d[0] as f64 + theta[1] * d[1] as f64);
        a[(o.tail, o.head)] += phase;
        a[(o.head, o.tail)] += phase.conj();
    }
    let deg: Vec<f64> = (0..n).map(|i| graph.lattice_degree(i) as f64).collect();
    CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { ONE } else { ZERO };
        id - a[(i, j)] / (deg[i] * deg[j]).sqrt()
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BandPoint {
    pub theta: [f64; 2],
    /// Ascending numerical eigenvalues `[μ₋, μ₊, μ₁]`.
    pub numeric: [f64; 3],
    pub closed: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BandGrid {
    pub grid_size: usize,
    pub points: Vec<BandPoint>,
    /// `[min, max]` of each band over the grid.
    pub bands: [[f64; 2]; 3],
    pub max_closed_form_deviation: f64,
    /// `max_θ |μ₁(θ) − 3/2|`.
    pub flat_band_deviation: f64,
}

/// Points `θ_i = 2πi/(g−1)`, `i = 0..g`, so both `0` and `2π` are included.
pub fn theta_grid(g: usize) -> Vec<f64> {
    (0..g).map(|i| 2.0 * PI * i as f64 / (g - 1) as f64).collect()
}

/// Diagonalizes the Kagome Floquet matrix on a `g × g` grid.
pub fn floquet_bands(g: usize) -> Result<BandGrid> {
    if g < 3 {
        return Err(Error::InvalidArgument(alloc::format!("grid size {g} < 3")));
    }
    let axis = theta_grid(g);
    let mut points = Vec::with_capacity(g * g);
    let mut bands = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
    let (mut dev, mut flat) = (0.0f64, 0.0f64);
    for &t1 in &axis {
        for &t2 in &axis {
            let f = FloquetMatrix::kagome([t1, t2]);
            let numeric = f.eigenvalues();
            let closed = f.closed_form();
            for b in 0..3 {
                bands[b][0] = bands[b][0].min(numeric[b]);
                bands[b][1] = bands[b][1].max(numeric[b]);
                dev = dev.max((numeric[b] - closed[b]).abs());
            }
            flat = flat.max((numeric[2] - FLAT_BAND).abs());
            points.push(BandPoint { theta: [t1, t2], numeric, closed });
        }
    }
    Ok(BandGrid { grid_size: g, points, bands, max_closed_form_deviation: dev, flat_band_deviation: flat })
}

/// `μ(λ) = 1 − cos √λ`.
pub fn correspondence_mu(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("λ = {lambda} < 0")));
    }
    Ok(1.0 - lambda.sqrt().cos())
}

/// The `k`-th preimage of `μ` under [`correspondence_mu`], ascending in `k`:
/// `√λ = kπ + s₀` for even `k` and `(k+1)π − s₀` for odd `k`, where
/// `s₀ = arccos(1 − μ) ∈ [0, π]`.
pub fn correspondence_lambda(mu: f64, k: usize) -> Result<f64> {
    if !(0.0..=2.0).contains(&mu) {
        return Err(Error::MuOutOfRange(mu));
    }
    let s0 = (1.0 - mu).acos();
    let kf = k as f64;
    let s = if k % 2 == 0 { kf * PI + s0 } else { (kf + 1.0) * PI - s0 };
    Ok(s * s)
}

/// `D_n(μ) = dim E_n(μ) / |Λ_n|` with its sandwich `[D_n, D_n + |∂₁Λ_n|/|Λ_n|]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KernelReport {
    pub n: usize,
    pub mu: f64,
    /// `|Λ_n| = 3n²`.
    pub patch_size: usize,
    /// `|∂₁Λ_n|`, thickened boundary measured inside the patch.
    pub thick_boundary: usize,
    /// Hexagons with all vertices in `Λ_n \ ∂₁Λ_n`.
    pub dimension: usize,
    pub d_n: f64,
    pub lower: f64,
    pub upper: f64,
    pub note: Option<&'static str>,
}

impl KernelReport {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Counts finitely supported eigenfunctions of the Kagome Laplacian inside
/// `Λ_n \ ∂₁Λ_n`. Only `μ = 3/2` carries such eigenfunctions.
pub fn interior_kernel_dimension(n: usize, mu: f64) -> Result<KernelReport> {
    if n == 0 {
        return Err(Error::InvalidArgument(alloc::string::String::from("n = 0")));
    }
    let patch = PeriodicGraph::kagome_patch(n, n);
    let thick = patch.thickened_boundary(1);
    let size = patch.len();
    let width = thick.len() as f64 / size as f64;
    let (dimension, note) = if (mu - FLAT_BAND).abs() <= 1e-12 {
        (patch.hexagons_avoiding(&thick).len(), None)
    } else {
        (0, Some("finitely supported eigenfunctions only exist at mu = 3/2"))
    };
    let d_n = dimension as f64 / size as f64;
    Ok(KernelReport {
        n,
        mu,
        patch_size: size,
        thick_boundary: thick.len(),
        dimension,
        d_n,
        lower: d_n,
        upper: d_n + width,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_edge_and_triangle() {
        let e = TopologicalGraph::new(2, vec![(0, 1)]).unwrap();
        let ev = comb_eigenvalues(&e).unwrap();
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
        let t = TopologicalGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let ev = comb_eigenvalues(&t).unwrap();
        assert!(ev[0].abs() < 1e-14);
        assert!(ev[1..].iter().all(|x| (x - 1.5).abs() < 1e-14));
    }

    #[test]
    fn isolated_vertex_rejected() {
        let g = TopologicalGraph::new(3, vec![(0, 1)]).unwrap();
        assert_eq!(comb_laplacian(&g).unwrap_err(), Error::IsolatedVertex(2));
    }

    #[test]
    fn special_quasimomenta() {
        let f = FloquetMatrix::kagome([0.0, 0.0]);
        assert!((f.kappa() - 3.0).abs() < 1e-15);
        let ev = f.eigenvalues();
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 1.5).abs() < 1e-14 && (ev[2] - 1.5).abs() < 1e-14);
        let f = FloquetMatrix::kagome([2.0 * PI / 3.0, 4.0 * PI / 3.0]);
        assert!((f.kappa() + 1.5).abs() < 1e-14);
        let ev = f.eigenvalues();
        assert!((ev[0] - 0.75).abs() < 1e-14 && (ev[1] - 0.75).abs() < 1e-14 && (ev[2] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn correspondence_examples() {
        let l = (2.0 * PI / 3.0).powi(2);
        assert!((correspondence_mu(l).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(correspondence_mu(0.0).unwrap(), 0.0);
        let l = correspondence_lambda(0.75, 0).unwrap();
        assert!((l - 0.25f64.acos().powi(2)).abs() < 1e-14);
        assert!((l - 1.73744).abs() < 1e-4);
        assert!((correspondence_mu(l).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(correspondence_lambda(2.5, 0).unwrap_err(), Error::MuOutOfRange(2.5));
    }

    #[test]
    fn kernel_report_small_boxes() {
        let r1 = interior_kernel_dimension(1, 1.5).unwrap();
        assert_eq!((r1.dimension, r1.patch_size), (0, 3));
        let r4 = interior_kernel_dimension(4, 1.5).unwrap();
        assert_eq!(r4.patch_size, 48);
        assert!(r4.contains(1.0 / 3.0));
        let off = interior_kernel_dimension(4, 0.75).unwrap();
        assert_eq!(off.dimension, 0);
        assert!(off.note.is_some());
    }
}
