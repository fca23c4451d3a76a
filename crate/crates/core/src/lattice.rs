//! Periodic graphs with a `ℤ¹` or `ℤ²` translation action, finite windows
//! `Λ(I) = ⋃_{γ∈I} γ𝓕` and combinatorial vertex patches `⋃_{γ∈I} Q_γ`.
//!
//! Labels are keyed by `(orbit, cell)`, so translations act as index shifts.
//!
//! # Kagome convention
//!
//! Vertex orbits `a = 0`, `b = 1`, `c = 2` sit at `0`, `w₁`, `w₂` inside the
//! cell with offset `2γ₁w₁ + 2γ₂w₂`, where `w₁ = (1, 0)` and
//! `w₂ = (1/2, √3/2)`. The topological fundamental domain is a bowtie of six
//! edges: the up-triangle `a_γ b_γ c_γ` and the down-triangle
//! `a_γ b_{γ-e₁} c_{γ-e₂}`. Every vertex has degree four.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph, Subgraph, TopologicalGraph, VertexId};

pub type Cell = [i64; 2];

/// Vertex label `(orbit, γ)`. Ordered by cell first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VertexKey {
    pub cell: Cell,
    pub orbit: usize,
}

/// Edge label `(orbit, γ)`: the translate by `γ` of edge orbit `orbit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeKey {
    pub cell: Cell,
    pub orbit: usize,
}

impl VertexKey {
    pub fn new(orbit: usize, cell: Cell) -> Self {
        VertexKey { cell, orbit }
    }
}

impl EdgeKey {
    pub fn new(orbit: usize, cell: Cell) -> Self {
        EdgeKey { cell, orbit }
    }

    pub fn translated(self, gamma: Cell) -> Self {
        EdgeKey::new(self.orbit, add(self.cell, gamma))
    }
}

/// Representative of an edge orbit: the edge in cell `0` runs from
/// `(tail, tail_shift)` to `(head, head_shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeOrbit {
    pub tail: usize,
    pub tail_shift: Cell,
    pub head: usize,
    pub head_shift: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Kagome,
    Chain,
    Square,
    Custom,
}

/// Periodic graph given by orbit data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicGraph {
    kind: LatticeKind,
    rank: usize,
    vertex_orbits: usize,
    edge_orbits: Vec<EdgeOrbit>,
}

pub(crate) fn add(a: Cell, b: Cell) -> Cell {
    [a[0] + b[0], a[1] + b[1]]
}

fn orbit(tail: usize, tail_shift: Cell, head: usize, head_shift: Cell) -> EdgeOrbit {
    EdgeOrbit { tail, tail_shift, head, head_shift }
}

impl PeriodicGraph {
    pub fn new(rank: usize, vertex_orbits: usize, edge_orbits: Vec<EdgeOrbit>) -> Result<Self> {
        if !(1..=2).contains(&rank) {
            return Err(Error::InvalidArgument(alloc::format!("lattice rank {rank}")));
        }
        for (j, o) in edge_orbits.iter().enumerate() {
            let shifts_ok = rank == 2 || (o.tail_shift[1] == 0 && o.head_shift[1] == 0);
            if o.tail >= vertex_orbits || o.head >= vertex_orbits || !shifts_ok {
                return Err(Error::DanglingEndpoint { edge: j });
            }
        }
        Ok(PeriodicGraph { kind: LatticeKind::Custom, rank, vertex_orbits, edge_orbits })
    }

    pub fn kagome() -> Self {
        let (a, b, c) = (0, 1, 2);
        let z = [0, 0];
        PeriodicGraph {
            kind: LatticeKind::Kagome,
            rank: 2,
            vertex_orbits: 3,
            edge_orbits: vec![
                orbit(a, z, b, z),
                orbit(a, z, c, z),
                orbit(b, z, c, z),
                orbit(a, z, b, [-1, 0]),
                orbit(a, z, c, [0, -1]),
                orbit(b, [-1, 0], c, [0, -1]),
            ],
        }
    }

    /// The path `ℤ`, one vertex and one edge per cell.
    pub fn chain() -> Self {
        PeriodicGraph {
            kind: LatticeKind::Chain,
            rank: 1,
            vertex_orbits: 1,
            edge_orbits: vec![orbit(0, [0, 0], 0, [1, 0])],
        }
    }

    /// The square grid `ℤ²`.
    pub fn square() -> Self {
        PeriodicGraph {
            kind: LatticeKind::Square,
            rank: 2,
            vertex_orbits: 1,
            edge_orbits: vec![orbit(0, [0, 0], 0, [1, 0]), orbit(0, [0, 0], 0, [0, 1])],
        }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_vertex_orbits(&self) -> usize {
        self.vertex_orbits
    }

    pub fn edge_orbits(&self) -> &[EdgeOrbit] {
        &self.edge_orbits
    }

    pub fn endpoints(&self, key: EdgeKey) -> (VertexKey, VertexKey) {
        let o = self.edge_orbits[key.orbit];
        (
            VertexKey::new(o.tail, add(key.cell, o.tail_shift)),
            VertexKey::new(o.head, add(key.cell, o.head_shift)),
        )
    }

    pub fn translate_vertex(&self, v: VertexKey, gamma: Cell) -> VertexKey {
        VertexKey::new(v.orbit, add(v.cell, gamma))
    }

    pub fn translate_edge(&self, e: EdgeKey, gamma: Cell) -> EdgeKey {
        e.translated(gamma)
    }

    /// Degree of a vertex of the given orbit in the infinite graph.
    pub fn lattice_degree(&self, orbit: usize) -> usize {
        self.edge_orbits
            .iter()
            .map(|o| usize::from(o.tail == orbit) + usize::from(o.head == orbit))
            .sum()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_orbits).map(|o| self.lattice_degree(o)).max().unwrap_or(0)
    }

    /// Edges of the infinite graph at `v`, with the opposite endpoint.
    pub fn incident_edges(&self, v: VertexKey) -> Vec<(EdgeKey, VertexKey)> {
        let mut out = Vec::new();
        for (j, o) in self.edge_orbits.iter().enumerate() {
            if o.tail == v.orbit {
                let cell = [v.cell[0] - o.tail_shift[0], v.cell[1] - o.tail_shift[1]];
                let e = EdgeKey::new(j, cell);
                out.push((e, self.endpoints(e).1));
            }
            if o.head == v.orbit {
                let cell = [v.cell[0] - o.head_shift[0], v.cell[1] - o.head_shift[1]];
                let e = EdgeKey::new(j, cell);
                out.push((e, self.endpoints(e).0));
            }
        }
        out
    }

    /// `I_n = {0..n-1}^d` in lexicographic order.
    pub fn box_cells(&self, n: usize) -> Vec<Cell> {
        let n = n as i64;
        if self.rank == 1 {
            (0..n).map(|i| [i, 0]).collect()
        } else {
            (0..n).flat_map(|i| (0..n).map(move |j| [i, j])).collect()
        }
    }

    /// `Λ(I) = ⋃_{γ∈I} γ𝓕` with boundary computed against the infinite graph.
    pub fn window(&self, cells: &[Cell]) -> LatticeWindow {
        let mut cells = cells.to_vec();
        cells.sort_unstable();
        cells.dedup();
        let mut edge_keys: Vec<EdgeKey> = cells
            .iter()
            .flat_map(|&c| (0..self.edge_orbits.len()).map(move |j| EdgeKey::new(j, c)))
            .collect();
        edge_keys.sort_unstable();
        let vertex_keys: Vec<VertexKey> = edge_keys
            .iter()
            .flat_map(|&e| {
                let (t, h) = self.endpoints(e);
                [t, h]
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |k: &VertexKey| vertex_keys.binary_search(k).expect("endpoint collected");
        let edges = edge_keys
            .iter()
            .map(|&e| {
                let (t, h) = self.endpoints(e);
                (index(&t), index(&h))
            })
            .collect();
        let graph = TopologicalGraph::new(vertex_keys.len(), edges).expect("indices in range");
        let lattice_degrees: Vec<usize> =
            vertex_keys.iter().map(|k| self.lattice_degree(k.orbit)).collect();
        let boundary = (0..vertex_keys.len())
            .filter(|&v| graph.degree(v) < lattice_degrees[v])
            .collect();
        let all: Vec<EdgeId> = (0..edge_keys.len()).collect();
        let subgraph = Subgraph::with_boundary(&graph, &all, boundary).expect("boundary inside window");
        LatticeWindow { graph, vertex_keys, edge_keys, subgraph, cells, lattice_degrees }
    }

    /// The Følner box `Λ(I_n)`.
    pub fn folner_box(&self, n: usize) -> LatticeWindow {
        self.window(&self.box_cells(n))
    }

    /// Combinatorial patch: the graph induced on `⋃_{γ∈I} Q_γ`.
    pub fn patch(&self, cells: &[Cell]) -> LatticePatch {
        let mut cells = cells.to_vec();
        cells.sort_unstable();
        cells.dedup();
        let vertex_keys: Vec<VertexKey> = cells
            .iter()
            .flat_map(|&c| (0..self.vertex_orbits).map(move |o| VertexKey::new(o, c)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut edge_set = BTreeSet::new();
        for v in &vertex_keys {
            for (e, w) in self.incident_edges(*v) {
                if vertex_keys.binary_search(&w).is_ok() {
                    edge_set.insert(e);
                }
            }
        }
        let edge_keys: Vec<EdgeKey> = edge_set.into_iter().collect();
        let index = |k: &VertexKey| vertex_keys.binary_search(k).expect("inside patch");
        let edges = edge_keys
            .iter()
            .map(|&e| {
                let (t, h) = self.endpoints(e);
                (index(&t), index(&h))
            })
            .collect();
        let graph = TopologicalGraph::new(vertex_keys.len(), edges).expect("indices in range");
        let domain_slots = cells.len() * self.edge_orbits.len();
        let crossing_slots = cells
            .iter()
            .flat_map(|&c| (0..self.edge_orbits.len()).map(move |j| EdgeKey::new(j, c)))
            .filter(|e| edge_keys.binary_search(e).is_err())
            .count();
        let lattice_degrees = vertex_keys.iter().map(|k| self.lattice_degree(k.orbit)).collect();
        LatticePatch {
            kind: self.kind,
            graph,
            vertex_keys,
            edge_keys,
            cells,
            lattice_degrees,
            domain_slots,
            crossing_slots,
        }
    }

    /// Kagome patch on the box `{0..n₁-1} × {0..n₂-1}`.
    pub fn kagome_patch(n1: usize, n2: usize) -> LatticePatch {
        let cells: Vec<Cell> = (0..n1 as i64)
            .flat_map(|i| (0..n2 as i64).map(move |j| [i, j]))
            .collect();
        Self::kagome().patch(&cells)
    }
}

/// Vertices of the Kagome hexagon `H_γ` in counter-clockwise order
/// `w₀ + e^{ikπ/3}`, `k = 0..5`, centred at `w₀ = w₁ + w₂ + 2γ₁w₁ + 2γ₂w₂`.
pub fn kagome_hexagon(gamma: Cell) -> [VertexKey; 6] {
    let (a, b, c) = (0, 1, 2);
    let at = |o: usize, d: Cell| VertexKey::new(o, add(gamma, d));
    [
        at(c, [1, 0]),
        at(b, [0, 1]),
        at(a, [0, 1]),
        at(c, [0, 0]),
        at(b, [0, 0]),
        at(a, [1, 0]),
    ]
}

/// A finite window `Λ(I)` of a periodic graph, materialized as a graph on
/// its own.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeWindow {
    graph: TopologicalGraph,
    vertex_keys: Vec<VertexKey>,
    edge_keys: Vec<EdgeKey>,
    subgraph: Subgraph,
    cells: Vec<Cell>,
    lattice_degrees: Vec<usize>,
}

impl LatticeWindow {
    pub fn graph(&self) -> &TopologicalGraph {
        &self.graph
    }

    /// `Λ` as a subgraph of the window graph; its boundary is computed
    /// against the infinite lattice.
    pub fn subgraph(&self) -> &Subgraph {
        &self.subgraph
    }

    pub fn vertex_keys(&self) -> &[VertexKey] {
        &self.vertex_keys
    }

    pub fn edge_keys(&self) -> &[EdgeKey] {
        &self.edge_keys
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn vertex_index(&self, key: VertexKey) -> Option<VertexId> {
        self.vertex_keys.binary_search(&key).ok()
    }

    pub fn edge_index(&self, key: EdgeKey) -> Option<EdgeId> {
        self.edge_keys.binary_search(&key).ok()
    }

    pub fn boundary(&self) -> &[VertexId] {
        self.subgraph.boundary()
    }

    pub fn interior_vertices(&self) -> Vec<VertexId> {
        (0..self.graph.num_vertices()).filter(|&v| !self.subgraph.is_boundary(v)).collect()
    }

    /// Degree of a vertex in the infinite lattice.
    pub fn lattice_degree(&self, v: VertexId) -> usize {
        self.lattice_degrees[v]
    }

    /// `Σ_{v∈∂Λ} deg_Λ v`.
    pub fn boundary_degree_sum(&self) -> usize {
        self.boundary().iter().map(|&v| self.graph.degree(v)).sum()
    }

    /// `|∂Λ| / vol(Λ, ℓ₀)`.
    pub fn van_hove_ratio(&self) -> f64 {
        self.boundary().len() as f64 / self.edge_keys.len() as f64
    }

    /// Edge ids of the translate `γ𝓕`, if inside the window.
    pub fn cell_edges(&self, gamma: Cell, edge_orbits: usize) -> Vec<EdgeId> {
        (0..edge_orbits)
            .filter_map(|j| self.edge_index(EdgeKey::new(j, gamma)))
            .collect()
    }

    pub fn equilateral(&self) -> MetricGraph {
        MetricGraph::equilateral(self.graph.clone())
    }

    pub fn metric(&self, lengths: Vec<f64>) -> Result<MetricGraph> {
        MetricGraph::new(self.graph.clone(), lengths)
    }
}

/// Graph induced on a union of combinatorial fundamental domains.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePatch {
    kind: LatticeKind,
    graph: TopologicalGraph,
    vertex_keys: Vec<VertexKey>,
    edge_keys: Vec<EdgeKey>,
    cells: Vec<Cell>,
    lattice_degrees: Vec<usize>,
    domain_slots: usize,
    crossing_slots: usize,
}

impl LatticePatch {
    pub fn graph(&self) -> &TopologicalGraph {
        &self.graph
    }

    pub fn vertex_keys(&self) -> &[VertexKey] {
        &self.vertex_keys
    }

    pub fn edge_keys(&self) -> &[EdgeKey] {
        &self.edge_keys
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.vertex_keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_keys.is_empty()
    }

    pub fn vertex_index(&self, key: VertexKey) -> Option<VertexId> {
        self.vertex_keys.binary_search(&key).ok()
    }

    pub fn lattice_degrees(&self) -> &[usize] {
        &self.lattice_degrees
    }

    /// Edge slots `|I|·|𝓕|` of the fundamental-domain translates.
    pub fn domain_slots(&self) -> usize {
        self.domain_slots
    }

    /// Fundamental-domain slots with an endpoint outside the patch.
    pub fn crossing_slots(&self) -> usize {
        self.crossing_slots
    }

    /// Vertices with a lattice neighbour outside the patch.
    pub fn boundary(&self) -> Vec<VertexId> {
        (0..self.len())
            .filter(|&v| self.graph.degree(v) < self.lattice_degrees[v])
            .collect()
    }

    /// `∂_rΛ`: patch vertices within distance `r` of the boundary, measured
    /// inside the patch.
    pub fn thickened_boundary(&self, r: usize) -> Vec<VertexId> {
        let dist = self.graph.distances_from(&self.boundary());
        (0..self.len()).filter(|&v| dist[v].is_some_and(|d| d <= r)).collect()
    }

    /// Hexagons `H_γ`, `γ ∈ I`, whose six vertices avoid `avoid` and lie in
    /// the patch. Empty for non-Kagome lattices.
    pub fn hexagons_avoiding(&self, avoid: &[VertexId]) -> Vec<(Cell, [VertexId; 6])> {
        if self.kind != LatticeKind::Kagome {
            return Vec::new();
        }
        self.cells
            .iter()
            .filter_map(|&g| {
                let keys = kagome_hexagon(g);
                let mut ids = [0; 6];
                for (slot, k) in ids.iter_mut().zip(keys.iter()) {
                    *slot = self.vertex_index(*k)?;
                    if avoid.contains(slot) {
                        return None;
                    }
                }
                Some((g, ids))
            })
            .collect()
    }

    /// Hexagons with all six vertices in the patch.
    pub fn hexagons(&self) -> Vec<(Cell, [VertexId; 6])> {
        self.hexagons_avoiding(&[])
    }
}
