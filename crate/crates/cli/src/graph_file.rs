//! Plain-text graph files.
//!
//! ```text
//! # comment
//! vertices 3
//! edge 0 1 1.0          # tail head length
//! edge 1 2 0.5
//! dirichlet 0 2         # any number of vertices
//! neumann 1
//! robin 1 0.25          # vertex alpha
//! delta 1 -0.3
//! potential 0 2.0       # edge constant
//! ```
//! Unlisted vertices get Kirchhoff conditions.

use qgraph_core::{ConditionAssignment, MetricGraph, OperatorSpec, TopologicalGraph, VertexCondition};

use crate::error::CliError;

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("graph file line {line}: {msg}"))
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, CliError> {
    let t = tok.ok_or_else(|| bad(line, format!("missing {what}")))?;
    t.parse().map_err(|_| bad(line, format!("cannot parse {what} `{t}`")))
}

enum Cond {
    Dirichlet,
    Robin(f64),
    Delta(f64),
}

pub fn parse(text: &str) -> Result<OperatorSpec, CliError> {
    let mut vertices = None;
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    let mut conds = Vec::new();
    let mut potential = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tok = content.split_whitespace();
        let Some(word) = tok.next() else { continue };
        match word {
            "vertices" => vertices = Some(field::<usize>(tok.next(), line, "vertex count")?),
            "edge" => {
                edges.push((field(tok.next(), line, "tail")?, field(tok.next(), line, "head")?));
                lengths.push(field::<f64>(tok.next(), line, "length")?);
            }
            "dirichlet" => {
                for t in tok.by_ref() {
                    conds.push((field(Some(t), line, "vertex")?, Cond::Dirichlet));
                }
            }
            "neumann" => conds.push((field(tok.next(), line, "vertex")?, Cond::Robin(0.0))),
            "robin" => conds.push((field(tok.next(), line, "vertex")?, Cond::Robin(field(tok.next(), line, "alpha")?))),
            "delta" => conds.push((field(tok.next(), line, "vertex")?, Cond::Delta(field(tok.next(), line, "alpha")?))),
            "potential" => potential.push((field::<usize>(tok.next(), line, "edge")?, field::<f64>(tok.next(), line, "value")?)),
            other => return Err(bad(line, format!("unknown directive `{other}`"))),
        }
        if let Some(extra) = tok.next() {
            return Err(bad(line, format!("unexpected `{extra}`")));
        }
    }
    let n = vertices.ok_or_else(|| CliError::Schema("graph file: missing field `vertices`".into()))?;
    if edges.is_empty() {
        return Err(CliError::Schema("graph file: missing field `edge`".into()));
    }
    let top = TopologicalGraph::new(n, edges).map_err(|e| CliError::Schema(format!("graph file: {e}")))?;
    let graph = MetricGraph::new(top, lengths).map_err(|e| CliError::Schema(format!("graph file: {e}")))?;
    let mut assignment = ConditionAssignment::kirchhoff(graph.topology())
        .map_err(|e| CliError::Schema(format!("graph file: {e}")))?;
    let mut dirichlet = Vec::new();
    for (v, c) in conds {
        if v >= n {
            return Err(CliError::Schema(format!("graph file: vertex {v} out of range")));
        }
        let d = graph.topology().degree(v);
        let vc = match c {
            Cond::Dirichlet => {
                dirichlet.push(v);
                VertexCondition::dirichlet(d)
            }
            Cond::Robin(a) => VertexCondition::robin(d, a),
            Cond::Delta(a) => VertexCondition::delta(d, a),
        };
        assignment.set(v, vc.map_err(|e| CliError::Schema(format!("graph file: {e}")))?);
    }
    let mut q = vec![0.0; graph.num_edges()];
    for (e, value) in potential {
        *q.get_mut(e).ok_or_else(|| CliError::Schema(format!("graph file: edge {e} out of range")))? = value;
    }
    let spec = OperatorSpec::new(graph, assignment).map_err(|e| CliError::Schema(format!("graph file: {e}")))?;
    spec.with_potential(q).map_err(|e| CliError::Schema(format!("graph file: {e}")))
}
