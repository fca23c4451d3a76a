//! Topological and metric graphs, edge-aligned subgraphs.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Which end of an oriented edge a half-edge sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum End {
    /// Initial vertex, coordinate `x = 0`.
    Tail,
    /// Terminal vertex, coordinate `x = ℓ(e)`.
    Head,
}

/// An edge end. A loop contributes two distinct half-edges to its vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub edge: EdgeId,
    pub end: End,
}

impl HalfEdge {
    /// Dense index `2e` for the tail and `2e + 1` for the head.
    pub fn index(self) -> usize {
        2 * self.edge + usize::from(self.end == End::Head)
    }

    pub fn from_index(i: usize) -> Self {
        let end = if i % 2 == 0 { End::Tail } else { End::Head };
        HalfEdge { edge: i / 2, end }
    }
}

/// Finite directed multigraph with loops. Directions only fix edge
/// coordinates; adjacency is undirected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologicalGraph {
    num_vertices: usize,
    edges: Vec<(VertexId, VertexId)>,
    incidence: Vec<Vec<HalfEdge>>,
}

impl TopologicalGraph {
    /// Builds a graph on vertices `0..num_vertices` from `(tail, head)` pairs.
    pub fn new(num_vertices: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        let mut incidence = vec![Vec::new(); num_vertices];
        for (e, &(t, h)) in edges.iter().enumerate() {
            if t >= num_vertices || h >= num_vertices {
                return Err(Error::DanglingEndpoint { edge: e });
            }
            incidence[t].push(HalfEdge { edge: e, end: End::Tail });
            incidence[h].push(HalfEdge { edge: e, end: End::Head });
        }
        for list in &mut incidence {
            list.sort();
        }
        Ok(TopologicalGraph { num_vertices, edges, incidence })
    }

    /// Builds a graph from opaque labels. Vertex `i` of the result is
    /// `vertices[i]`; edge `e` is `directed_edges[e]`.
    pub fn from_labels<L: Ord + Clone>(vertices: &[L], directed_edges: &[(L, L)]) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(i));
            }
        }
        let edges = directed_edges
            .iter()
            .enumerate()
            .map(|(e, (t, h))| match (index.get(t), index.get(h)) {
                (Some(&t), Some(&h)) => Ok((t, h)),
                _ => Err(Error::DanglingEndpoint { edge: e }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vertices.len(), edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// `(∂₋e, ∂₊e)`.
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn vertex_of(&self, h: HalfEdge) -> VertexId {
        let (t, hd) = self.edges[h.edge];
        match h.end {
            End::Tail => t,
            End::Head => hd,
        }
    }

    /// `E_v`, ordered by half-edge index. Vertex-condition matrices use this
    /// order for their rows and columns.
    pub fn incidence(&self, v: VertexId) -> &[HalfEdge] {
        &self.incidence[v]
    }

    /// Edges starting at `v`.
    pub fn outgoing(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.incidence[v].iter().filter(|h| h.end == End::Tail).map(|h| h.edge)
    }

    /// Edges ending at `v`.
    pub fn incoming(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.incidence[v].iter().filter(|h| h.end == End::Head).map(|h| h.edge)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incidence.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Opposite endpoints, one per half-edge at `v` (a loop yields `v` twice).
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.incidence[v].iter().map(move |h| {
            let (t, hd) = self.edges[h.edge];
            match h.end {
                End::Tail => hd,
                End::Head => t,
            }
        })
    }

    /// Breadth-first combinatorial distances from a set of sources.
    pub fn distances_from(&self, sources: &[VertexId]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_vertices];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for w in self.neighbors(v) {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices == 0 || self.distances_from(&[0]).iter().all(Option::is_some)
    }
}

/// A topological graph with positive edge lengths. Edge `e` is the interval
/// `[0, ℓ(e)]` running from `∂₋e` to `∂₊e`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    topology: TopologicalGraph,
    lengths: Vec<f64>,
    l_min: f64,
    l_max: f64,
}

impl MetricGraph {
    pub fn new(topology: TopologicalGraph, lengths: Vec<f64>) -> Result<Self> {
        if lengths.len() != topology.num_edges() {
            return Err(Error::InvalidArgument(format!(
                "{} lengths for {} edges",
                lengths.len(),
                topology.num_edges()
            )));
        }
        for (e, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidLength { edge: e, length: l });
            }
        }
        let l_min = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        let l_max = lengths.iter().copied().fold(0.0, f64::max);
        Ok(MetricGraph { topology, lengths, l_min, l_max })
    }

    /// Every edge has length one.
    pub fn equilateral(topology: TopologicalGraph) -> Self {
        let lengths = vec![1.0; topology.num_edges()];
        Self::new(topology, lengths).expect("unit lengths are valid")
    }

    pub fn topology(&self) -> &TopologicalGraph {
        &self.topology
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn length(&self, e: EdgeId) -> f64 {
        self.lengths[e]
    }

    /// Minimal edge length (`+∞` on an edgeless graph).
    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn num_vertices(&self) -> usize {
        self.topology.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.topology.num_edges()
    }

    pub fn total_volume(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn volume(&self, subgraph: &Subgraph) -> f64 {
        subgraph.edges().iter().map(|&e| self.lengths[e]).sum()
    }

    /// Same topology, new lengths.
    pub fn with_lengths(&self, lengths: Vec<f64>) -> Result<Self> {
        Self::new(self.topology.clone(), lengths)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_lengths(self.lengths.iter().map(|l| l * factor).collect())
    }
}

/// Edge-aligned subgraph `Λ` of a parent graph, with boundary
/// `∂Λ = {v ∈ V(Λ) : v touches a parent edge outside E(Λ)}`.
///
/// Vertex and edge ids refer to the parent, which is passed explicitly to
/// methods that need adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    boundary: Vec<VertexId>,
}

impl Subgraph {
    /// The subgraph spanned by `edges`.
    pub fn from_edges(parent: &TopologicalGraph, edges: &[EdgeId]) -> Result<Self> {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        if let Some(&e) = edges.iter().find(|&&e| e >= parent.num_edges()) {
            return Err(Error::NotEdgeAligned(format!("edge {e} is not in the parent graph")));
        }
        let mut vertices: Vec<VertexId> = edges
            .iter()
            .flat_map(|&e| {
                let (t, h) = parent.endpoints(e);
                [t, h]
            })
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        let boundary = vertices
            .iter()
            .copied()
            .filter(|&v| {
                parent
                    .incidence(v)
                    .iter()
                    .any(|h| edges.binary_search(&h.edge).is_err())
            })
            .collect();
        Ok(Subgraph { vertices, edges, boundary })
    }

    /// Checks that `vertices` is exactly the endpoint set of `edges`.
    pub fn from_parts(
        parent: &TopologicalGraph,
        vertices: &[VertexId],
        edges: &[EdgeId],
    ) -> Result<Self> {
        let sub = Self::from_edges(parent, edges)?;
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if let Some(&v) = vs.iter().find(|v| sub.vertices.binary_search(v).is_err()) {
            return Err(Error::NotEdgeAligned(format!("vertex {v} has no edge in the subgraph")));
        }
        if let Some(&v) = sub.vertices.iter().find(|v| vs.binary_search(v).is_err()) {
            return Err(Error::NotEdgeAligned(format!(
                "vertex {v} is an endpoint of a subgraph edge but was not listed"
            )));
        }
        Ok(sub)
    }

    /// A subgraph with an externally known boundary, used for finite windows
    /// of infinite lattices where the parent is not materialized.
    pub fn with_boundary(
        parent: &TopologicalGraph,
        edges: &[EdgeId],
        boundary: Vec<VertexId>,
    ) -> Result<Self> {
        let mut sub = Self::from_edges(parent, edges)?;
        let mut boundary = boundary;
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(&v) = boundary.iter().find(|v| sub.vertices.binary_search(v).is_err()) {
            return Err(Error::NotEdgeAligned(format!("boundary vertex {v} is not in the subgraph")));
        }
        sub.boundary = boundary;
        Ok(sub)
    }

    pub fn whole(parent: &TopologicalGraph) -> Self {
        let edges: Vec<EdgeId> = (0..parent.num_edges()).collect();
        Self::from_edges(parent, &edges).expect("all edges belong to the parent")
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary.binary_search(&v).is_ok()
    }

    /// Degree of `v` counting only edges of the subgraph.
    pub fn degree_in(&self, parent: &TopologicalGraph, v: VertexId) -> usize {
        parent.incidence(v).iter().filter(|h| self.contains_edge(h.edge)).count()
    }

    /// Combinatorial distance to `∂Λ`, measured along edges of `Λ`, indexed
    /// by parent vertex id (`None` outside `Λ` or when unreachable).
    pub fn distance_to_boundary(&self, parent: &TopologicalGraph) -> Vec<Option<usize>> {
        let mut dist = vec![None; parent.num_vertices()];
        let mut queue = VecDeque::new();
        for &b in &self.boundary {
            dist[b] = Some(0);
            queue.push_back(b);
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for h in parent.incidence(v) {
                if !self.contains_edge(h.edge) {
                    continue;
                }
                let (t, hd) = parent.endpoints(h.edge);
                let w = if h.end == End::Tail { hd } else { t };
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// `∂_rΛ = {v ∈ V(Λ) : d(v, ∂Λ) ≤ r}`.
    pub fn thickened_boundary(&self, parent: &TopologicalGraph, r: usize) -> Vec<VertexId> {
        let dist = self.distance_to_boundary(parent);
        self.vertices
            .iter()
            .copied()
            .filter(|&v| dist[v].is_some_and(|d| d <= r))
            .collect()
    }

    pub fn volume(&self, graph: &MetricGraph) -> f64 {
        graph.volume(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_degrees() {
        let g = TopologicalGraph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 1]);
    }

    #[test]
    fn loop_has_two_half_edges() {
        let g = TopologicalGraph::new(1, vec![(0, 0)]).unwrap();
        assert_eq!(g.degree(0), 2);
        let inc = g.incidence(0);
        assert_eq!(inc[0], HalfEdge { edge: 0, end: End::Tail });
        assert_eq!(inc[1], HalfEdge { edge: 0, end: End::Head });
        assert_eq!(g.outgoing(0).count(), 1);
        assert_eq!(g.incoming(0).count(), 1);
    }

    #[test]
    fn dangling_label_names_edge() {
        let err = TopologicalGraph::from_labels(&["a", "b"], &[("a", "b"), ("b", "c")]).unwrap_err();
        assert_eq!(err, Error::DanglingEndpoint { edge: 1 });
    }

    #[test]
    fn single_edge_volume() {
        let g = MetricGraph::new(TopologicalGraph::new(2, vec![(0, 1)]).unwrap(), vec![2.0]).unwrap();
        assert_eq!(g.volume(&Subgraph::whole(g.topology())), 2.0);
        assert_eq!((g.l_min(), g.l_max()), (2.0, 2.0));
    }

    #[test]
    fn rejects_nonpositive_length() {
        let t = TopologicalGraph::new(2, vec![(0, 1)]).unwrap();
        assert!(MetricGraph::new(t, vec![0.0]).is_err());
    }

    #[test]
    fn path_boundary_and_thickening() {
        // path 0-1-2-3-4-5, subgraph = edges 1..=3 (vertices 1..=4)
        let g = TopologicalGraph::new(6, (0..5).map(|i| (i, i + 1)).collect()).unwrap();
        let s = Subgraph::from_edges(&g, &[1, 2, 3]).unwrap();
        assert_eq!(s.boundary(), &[1, 4]);
        assert_eq!(s.thickened_boundary(&g, 0), vec![1, 4]);
        assert_eq!(s.thickened_boundary(&g, 1), vec![1, 2, 3, 4]);
    }

    #[test]
    fn misaligned_parts_rejected() {
        let g = TopologicalGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(Subgraph::from_parts(&g, &[0, 1, 2], &[0]).is_err());
        assert!(Subgraph::from_parts(&g, &[0], &[0]).is_err());
        assert!(Subgraph::from_parts(&g, &[0, 1], &[0]).is_ok());
    }
}
