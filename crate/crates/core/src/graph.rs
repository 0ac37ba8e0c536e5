//! Finite directed multigraphs with identified vertices and edges.
//!
//! Vertex and edge ids are opaque strings. A graph stores its vertices and
//! edges in lexicographic id order, so adjacency matrices and every
//! enumeration derived from a graph are reproducible. Values are immutable
//! after construction.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::NonNegMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Edge {
    id: String,
    src: u32,
    dst: u32,
}

/// A finite directed multigraph. Sinks and sources are representable;
/// operations that require a sink-free graph check for themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
    vidx: HashMap<String, u32>,
    eidx: HashMap<String, u32>,
}

impl Graph {
    /// Build a graph from vertex ids and `(edge id, src, dst)` triples.
    /// Vertices and edges are reordered lexicographically by id.
    pub fn new<V, E>(vertices: Vec<V>, edges: Vec<(E, E, E)>) -> Result<Graph>
    where
        V: Into<String>,
        E: Into<String>,
    {
        let mut vs: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if vs.is_empty() {
            return Err(Error::MalformedGraph("graph needs at least one vertex".into()));
        }
        vs.sort();
        if vs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedGraph("duplicate vertex id".into()));
        }
        let vidx: HashMap<String, u32> = vs
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        let mut es: Vec<(String, String, String)> = edges
            .into_iter()
            .map(|(id, s, d)| (id.into(), s.into(), d.into()))
            .collect();
        es.sort_by(|a, b| a.0.cmp(&b.0));
        if es.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::MalformedGraph("duplicate edge id".into()));
        }
        let mut resolved = Vec::with_capacity(es.len());
        for (id, s, d) in es {
            let src = *vidx.get(&s).ok_or_else(|| {
                Error::MalformedGraph(format!("edge `{}` has unknown source `{}`", id, s))
            })?;
            let dst = *vidx.get(&d).ok_or_else(|| {
                Error::MalformedGraph(format!("edge `{}` has unknown target `{}`", id, d))
            })?;
            resolved.push(Edge { id, src, dst });
        }
        let eidx: HashMap<String, u32> = resolved
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i as u32))
            .collect();
        let mut out = vec![Vec::new(); vs.len()];
        let mut inc = vec![Vec::new(); vs.len()];
        for (i, e) in resolved.iter().enumerate() {
            out[e.src as usize].push(i as u32);
            inc[e.dst as usize].push(i as u32);
        }
        Ok(Graph {
            vertices: vs,
            edges: resolved,
            out,
            inc,
            vidx,
            eidx,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &str> {
        self.vertices.iter().map(|s| s.as_str())
    }

    pub fn vertex_id(&self, v: u32) -> &str {
        &self.vertices[v as usize]
    }

    pub fn vertex_index(&self, id: &str) -> Result<u32> {
        self.vidx
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edge_id(&self, e: u32) -> &str {
        &self.edges[e as usize].id
    }

    pub fn edge_index(&self, id: &str) -> Result<u32> {
        self.eidx
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    /// Source vertex of an edge.
    pub fn src(&self, e: u32) -> u32 {
        self.edges[e as usize].src
    }

    /// Range (target) vertex of an edge.
    pub fn dst(&self, e: u32) -> u32 {
        self.edges[e as usize].dst
    }

    /// Outgoing edges of `v`, in id order.
    pub fn out_edges(&self, v: u32) -> &[u32] {
        &self.out[v as usize]
    }

    /// Incoming edges of `v`, in id order.
    pub fn in_edges(&self, v: u32) -> &[u32] {
        &self.inc[v as usize]
    }

    /// Vertices with no outgoing edge.
    pub fn sinks(&self) -> Vec<u32> {
        (0..self.vertices.len() as u32)
            .filter(|&v| self.out[v as usize].is_empty())
            .collect()
    }

    /// Vertices with no incoming edge.
    pub fn sources(&self) -> Vec<u32> {
        (0..self.vertices.len() as u32)
            .filter(|&v| self.inc[v as usize].is_empty())
            .collect()
    }

    pub fn has_sinks(&self) -> bool {
        !self.sinks().is_empty()
    }

    pub fn require_no_sinks(&self) -> Result<()> {
        let sinks = self.sinks();
        if sinks.is_empty() {
            Ok(())
        } else {
            let ids: Vec<&str> = sinks.iter().map(|&v| self.vertex_id(v)).collect();
            Err(Error::HasSinks(ids.join(", ")))
        }
    }

    /// Edge ids and endpoints, in canonical order.
    pub fn edge_list(&self) -> Vec<(String, String, String)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    self.vertices[e.src as usize].clone(),
                    self.vertices[e.dst as usize].clone(),
                )
            })
            .collect()
    }

    /// True when the two graphs have identical vertex/edge ids and
    /// identical incidence (not just isomorphic).
    pub fn same_labeled(&self, other: &Graph) -> bool {
        self.vertices == other.vertices
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.id == b.id && a.src == b.src && a.dst == b.dst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Graph> {
        Ok(serde_json::from_str(s)?)
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"vertices":[...],"edges":[{"id":..,"src":..,"dst":..},...]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: String,
    src: String,
    dst: String,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: Vec<String>,
    edges: Vec<EdgeDoc>,
}

impl From<Graph> for GraphDoc {
    fn from(g: Graph) -> GraphDoc {
        GraphDoc {
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    src: g.vertices[e.src as usize].clone(),
                    dst: g.vertices[e.dst as usize].clone(),
                })
                .collect(),
            vertices: g.vertices,
        }
    }
}

impl TryFrom<GraphDoc> for Graph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Graph> {
        Graph::new(
            doc.vertices,
            doc.edges.into_iter().map(|e| (e.id, e.src, e.dst)).collect(),
        )
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GraphDoc::from(self.clone()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = GraphDoc::deserialize(deserializer)?;
        Graph::try_from(doc).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub sinks: Vec<String>,
    pub sources: Vec<String>,
}

impl ValidationReport {
    pub fn has_sinks(&self) -> bool {
        !self.sinks.is_empty()
    }

    pub fn has_sources(&self) -> bool {
        !self.sources.is_empty()
    }
}

/// Report every sink and source of a structurally well-formed graph.
pub fn validate_graph(g: &Graph) -> ValidationReport {
    ValidationReport {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        sinks: g.sinks().iter().map(|&v| g.vertex_id(v).to_string()).collect(),
        sources: g.sources().iter().map(|&v| g.vertex_id(v).to_string()).collect(),
    }
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// A nonempty edge string with consecutive compatibility, referring to a
/// particular graph by edge index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    edges: Vec<u32>,
}

impl Path {
    pub(crate) fn new_unchecked(edges: Vec<u32>) -> Path {
        Path { edges }
    }

    /// Build a path from edge ids, checking consecutive compatibility.
    pub fn from_edge_ids(g: &Graph, ids: &[&str]) -> Result<Path> {
        if ids.is_empty() {
            return Err(Error::InvalidArgument("a path needs at least one edge".into()));
        }
        let mut edges = Vec::with_capacity(ids.len());
        for id in ids {
            edges.push(g.edge_index(id)?);
        }
        for w in edges.windows(2) {
            if g.dst(w[0]) != g.src(w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "edges `{}` and `{}` are not consecutive",
                    g.edge_id(w[0]),
                    g.edge_id(w[1])
                )));
            }
        }
        Ok(Path { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[u32] {
        &self.edges
    }

    pub fn to_ids(&self, g: &Graph) -> Vec<String> {
        self.edges.iter().map(|&e| g.edge_id(e).to_string()).collect()
    }

    /// Source vertex of the path.
    pub fn src(&self, g: &Graph) -> u32 {
        g.src(self.edges[0])
    }

    /// Range vertex of the path.
    pub fn dst(&self, g: &Graph) -> u32 {
        g.dst(*self.edges.last().expect("paths are nonempty"))
    }

    /// The window `edges[from..to]` (half-open) as a path.
    pub fn window(&self, from: usize, to: usize) -> Path {
        Path {
            edges: self.edges[from..to].to_vec(),
        }
    }
}

/// All paths of length `n >= 1`, in lexicographic order of their edge id
/// sequences.
pub fn paths_of_length(g: &Graph, n: usize) -> Result<Vec<Path>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "paths of length 0 are the vertices; ask for n >= 1".into(),
        ));
    }
    let mut acc: Vec<Vec<u32>> = (0..g.edge_count() as u32).map(|e| vec![e]).collect();
    for _ in 1..n {
        let mut next = Vec::new();
        for p in &acc {
            let last = *p.last().unwrap();
            for &e in g.out_edges(g.dst(last)) {
                let mut q = p.clone();
                q.push(e);
                next.push(q);
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().map(Path::new_unchecked).collect())
}

// ---------------------------------------------------------------------------
// Higher block graphs
// ---------------------------------------------------------------------------

fn join_ids(g: &Graph, edges: &[u32]) -> String {
    edges
        .iter()
        .map(|&e| g.edge_id(e))
        .collect::<Vec<_>>()
        .join(",")
}

/// The `n`'th higher block graph: vertices are the `(n-1)`-paths, edges the
/// `n`-paths, with source/range by window overlap. `n = 1` returns the graph
/// itself. Requires a sink-free graph.
pub fn higher_block_graph(g: &Graph, n: usize) -> Result<Graph> {
    higher_block_graph_with_paths(g, n).map(|(h, _)| h)
}

/// As [`higher_block_graph`], also returning for each edge of the block
/// graph (in its canonical order) the underlying `n`-path.
pub fn higher_block_graph_with_paths(g: &Graph, n: usize) -> Result<(Graph, Vec<Path>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("higher block order must be >= 1".into()));
    }
    g.require_no_sinks()?;
    if n == 1 {
        let paths = (0..g.edge_count() as u32)
            .map(|e| Path::new_unchecked(vec![e]))
            .collect();
        return Ok((g.clone(), paths));
    }
    let vertices: Vec<String> = paths_of_length(g, n - 1)?
        .iter()
        .map(|p| join_ids(g, p.edges()))
        .collect();
    let edge_paths = paths_of_length(g, n)?;
    let edges: Vec<(String, String, String)> = edge_paths
        .iter()
        .map(|p| {
            let id = join_ids(g, p.edges());
            let src = join_ids(g, &p.edges()[..n - 1]);
            let dst = join_ids(g, &p.edges()[1..]);
            (id, src, dst)
        })
        .collect();
    let h = Graph::new(vertices, edges)?;
    // re-align the path list with the canonical (sorted) edge order of `h`
    let mut by_id: HashMap<String, Path> = edge_paths
        .into_iter()
        .map(|p| (join_ids(g, p.edges()), p))
        .collect();
    let aligned: Vec<Path> = (0..h.edge_count() as u32)
        .map(|e| by_id.remove(h.edge_id(e)).expect("edge ids come from paths"))
        .collect();
    Ok((h, aligned))
}

// ---------------------------------------------------------------------------
// Adjacency matrices
// ---------------------------------------------------------------------------

/// Adjacency matrix under the graph's canonical vertex order.
pub fn adjacency_matrix(g: &Graph) -> Result<NonNegMatrix> {
    let order: Vec<String> = g.vertex_ids().map(String::from).collect();
    adjacency_matrix_ordered(g, &order)
}

/// Adjacency matrix under an explicit vertex ordering, which must be a
/// permutation of the vertex ids.
pub fn adjacency_matrix_ordered(g: &Graph, order: &[String]) -> Result<NonNegMatrix> {
    if order.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(
            "ordering must list every vertex exactly once".into(),
        ));
    }
    let mut pos = vec![usize::MAX; g.vertex_count()];
    for (i, id) in order.iter().enumerate() {
        let v = g.vertex_index(id)? as usize;
        if pos[v] != usize::MAX {
            return Err(Error::InvalidArgument(format!("vertex `{}` listed twice", id)));
        }
        pos[v] = i;
    }
    let mut a = NonNegMatrix::zero(g.vertex_count(), g.vertex_count())?;
    for e in 0..g.edge_count() as u32 {
        let i = pos[g.src(e) as usize];
        let j = pos[g.dst(e) as usize];
        let cur = a.get(i, j) + 1u32;
        a.set(i, j, cur);
    }
    Ok(a)
}

/// Realize a square nonnegative integer matrix as a graph with synthesized
/// deterministic ids: vertex `i` becomes `v<i>` (zero-padded so that the
/// canonical order matches the matrix order) and the `t`-th edge from `i`
/// to `j` becomes `e<i>_<j>_<t>`.
pub fn graph_from_matrix(a: &NonNegMatrix) -> Result<Graph> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "graph of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let width = (n.max(2) - 1).to_string().len();
    let vid = |i: usize| format!("v{:0width$}", i, width = width);
    let vertices: Vec<String> = (0..n).map(vid).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let count: u64 = a.get(i, j).try_into().map_err(|_| {
                Error::InvalidArgument(format!("entry ({}, {}) too large to realize as edges", i, j))
            })?;
            for t in 0..count {
                edges.push((format!("e{}_{}_{}", vid(i), vid(j), t), vid(i), vid(j)));
            }
        }
    }
    Graph::new(vertices, edges)
}

/// Number of length-`n` paths, computed from the adjacency matrix as the
/// entry sum of `A^n`.
pub fn path_count_by_matrix(g: &Graph, n: usize) -> Result<BigUint> {
    let a = adjacency_matrix(g)?;
    Ok(a.pow(n)?.entry_sum())
}

// ---------------------------------------------------------------------------
// Isomorphism
// ---------------------------------------------------------------------------

/// A vertex bijection certifying edge-multiplicity-preserving isomorphism.
#[derive(Clone, Debug, Serialize)]
pub struct VertexBijection {
    pub forward: Vec<(String, String)>,
}

impl VertexBijection {
    pub fn apply(&self, id: &str) -> Option<&str> {
        self.forward
            .iter()
            .find(|(a, _)| a == id)
            .map(|(_, b)| b.as_str())
    }

    pub fn inverted(&self) -> VertexBijection {
        let mut forward: Vec<(String, String)> = self
            .forward
            .iter()
            .map(|(a, b)| (b.clone(), a.clone()))
            .collect();
        forward.sort();
        VertexBijection { forward }
    }
}

pub const DEFAULT_ISO_CAP: usize = 12;

/// Exhaustive isomorphism search with degree-signature pruning, capped at
/// [`DEFAULT_ISO_CAP`] vertices.
pub fn are_isomorphic(g1: &Graph, g2: &Graph) -> Result<Option<VertexBijection>> {
    are_isomorphic_with_cap(g1, g2, DEFAULT_ISO_CAP)
}

/// Exhaustive isomorphism search with an explicit vertex cap. The cap keeps
/// the documented exponential worst case at desk scale; exceeding it is an
/// explicit error, never a silent "not isomorphic".
pub fn are_isomorphic_with_cap(g1: &Graph, g2: &Graph, cap: usize) -> Result<Option<VertexBijection>> {
    if g1.vertex_count() > cap || g2.vertex_count() > cap {
        return Err(Error::IsoBoundExceeded {
            vertices: g1.vertex_count().max(g2.vertex_count()),
            cap,
        });
    }
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(None);
    }
    let n = g1.vertex_count();
    let mult = |g: &Graph| -> HashMap<(u32, u32), usize> {
        let mut m = HashMap::new();
        for e in 0..g.edge_count() as u32 {
            *m.entry((g.src(e), g.dst(e))).or_insert(0) += 1;
        }
        m
    };
    let m1 = mult(g1);
    let m2 = mult(g2);

    // degree signature with in/out multiplicity multisets
    let signature = |g: &Graph, m: &HashMap<(u32, u32), usize>, v: u32| {
        let mut outs: Vec<usize> = (0..n as u32)
            .filter_map(|w| m.get(&(v, w)).copied())
            .collect();
        outs.sort_unstable();
        let mut ins: Vec<usize> = (0..n as u32)
            .filter_map(|w| m.get(&(w, v)).copied())
            .collect();
        ins.sort_unstable();
        let loops = m.get(&(v, v)).copied().unwrap_or(0);
        let _ = g;
        (outs, ins, loops)
    };
    let sig1: Vec<_> = (0..n as u32).map(|v| signature(g1, &m1, v)).collect();
    let sig2: Vec<_> = (0..n as u32).map(|v| signature(g2, &m2, v)).collect();
    {
        let mut s1 = sig1.clone();
        let mut s2 = sig2.clone();
        s1.sort();
        s2.sort();
        if s1 != s2 {
            return Ok(None);
        }
    }

    let mut assignment: Vec<Option<u32>> = vec![None; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        n: usize,
        v: usize,
        sig1: &[(Vec<usize>, Vec<usize>, usize)],
        sig2: &[(Vec<usize>, Vec<usize>, usize)],
        m1: &HashMap<(u32, u32), usize>,
        m2: &HashMap<(u32, u32), usize>,
        assignment: &mut Vec<Option<u32>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if v == n {
            return true;
        }
        for w in 0..n as u32 {
            if used[w as usize] || sig1[v] != sig2[w as usize] {
                continue;
            }
            let ok = (0..v as u32).all(|u| {
                let wu = assignment[u as usize].unwrap();
                m1.get(&(v as u32, u)).copied().unwrap_or(0) == m2.get(&(w, wu)).copied().unwrap_or(0)
                    && m1.get(&(u, v as u32)).copied().unwrap_or(0)
                        == m2.get(&(wu, w)).copied().unwrap_or(0)
            }) && m1.get(&(v as u32, v as u32)).copied().unwrap_or(0)
                == m2.get(&(w, w)).copied().unwrap_or(0);
            if !ok {
                continue;
            }
            assignment[v] = Some(w);
            used[w as usize] = true;
            if backtrack(n, v + 1, sig1, sig2, m1, m2, assignment, used) {
                return true;
            }
            assignment[v] = None;
            used[w as usize] = false;
        }
        false
    }

    if backtrack(n, 0, &sig1, &sig2, &m1, &m2, &mut assignment, &mut used) {
        let forward = (0..n)
            .map(|v| {
                (
                    g1.vertex_id(v as u32).to_string(),
                    g2.vertex_id(assignment[v].unwrap()).to_string(),
                )
            })
            .collect();
        Ok(Some(VertexBijection { forward }))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT text: one node per vertex, one arrow per edge labeled by its id;
/// sinks are drawn as boxes and sources as diamonds.
pub fn to_dot(g: &Graph) -> String {
    let sinks = g.sinks();
    let sources = g.sources();
    let mut s = String::from("digraph G {\n");
    for v in 0..g.vertex_count() as u32 {
        let id = dot_escape(g.vertex_id(v));
        if sinks.contains(&v) {
            s.push_str(&format!("  \"{}\" [shape=box];\n", id));
        } else if sources.contains(&v) {
            s.push_str(&format!("  \"{}\" [shape=diamond];\n", id));
        } else {
            s.push_str(&format!("  \"{}\";\n", id));
        }
    }
    for e in 0..g.edge_count() as u32 {
        s.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            dot_escape(g.vertex_id(g.src(e))),
            dot_escape(g.vertex_id(g.dst(e))),
            dot_escape(g.edge_id(e)),
        ));
    }
    s.push_str("}\n");
    s
}

// ---------------------------------------------------------------------------


#[cfg(test)]
mod tests {
    use super::fixtures::{golden_mean, tail_loop};
    use super::*;

    #[test]
    fn validate_golden_mean() {
        let g = golden_mean();
        let rep = validate_graph(&g);
        assert!(!rep.has_sinks());
        assert!(!rep.has_sources());
        assert_eq!(rep.vertex_count, 2);
        assert_eq!(rep.edge_count, 3);
    }

    #[test]
    fn validate_isolated_vertex() {
        let g = Graph::new(vec!["v"], Vec::<(String, String, String)>::new()).unwrap();
        let rep = validate_graph(&g);
        assert_eq!(rep.sinks, vec!["v"]);
        assert_eq!(rep.sources, vec!["v"]);
    }

    #[test]
    fn malformed_edge_is_named() {
        let err = Graph::new(vec!["v"], vec![("e", "v", "nope")]).unwrap_err();
        assert!(err.to_string().contains("`e`"));
    }

    #[test]
    fn paths_golden_mean() {
        let g = golden_mean();
        let p2: Vec<Vec<String>> = paths_of_length(&g, 2)
            .unwrap()
            .iter()
            .map(|p| p.to_ids(&g))
            .collect();
        assert_eq!(
            p2,
            vec![
                vec!["e", "e"],
                vec!["e", "f"],
                vec!["f", "g"],
                vec!["g", "e"],
                vec!["g", "f"]
            ]
        );
        let p1 = paths_of_length(&g, 1).unwrap();
        assert_eq!(p1.len(), g.edge_count());
        assert!(paths_of_length(&g, 0).is_err());
    }

    #[test]
    fn paths_tail_loop() {
        let g = tail_loop();
        let p3: Vec<Vec<String>> = paths_of_length(&g, 3)
            .unwrap()
            .iter()
            .map(|p| p.to_ids(&g))
            .collect();
        assert_eq!(p3, vec![vec!["e", "e", "e"], vec!["f", "e", "e"]]);
    }

    #[test]
    fn higher_block_identity_and_two() {
        let g = golden_mean();
        let h1 = higher_block_graph(&g, 1).unwrap();
        assert!(h1.same_labeled(&g));
        let h2 = higher_block_graph(&g, 2).unwrap();
        assert_eq!(h2.vertex_count(), 3);
        assert_eq!(h2.edge_count(), 5);
        assert!(!h2.has_sinks());
        // adjacency of the block graph equals the edge-overlap matrix
        let ids: Vec<&str> = h2.vertex_ids().collect();
        assert_eq!(ids, vec!["e", "f", "g"]);
        let a = adjacency_matrix(&h2).unwrap();
        let expect = NonNegMatrix::from_rows(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(a, expect);
    }

    #[test]
    fn adjacency_and_roundtrip() {
        let g = golden_mean();
        let a = adjacency_matrix_ordered(&g, &["v".into(), "w".into()]).unwrap();
        assert_eq!(a, NonNegMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap());
        let back = graph_from_matrix(&a).unwrap();
        assert!(are_isomorphic(&g, &back).unwrap().is_some());

        let zero = NonNegMatrix::from_rows(&[vec![0]]).unwrap();
        let h = graph_from_matrix(&zero).unwrap();
        assert_eq!(h.vertex_count(), 1);
        assert!(validate_graph(&h).has_sinks());
    }

    #[test]
    fn path_count_matches_matrix_power() {
        let g = golden_mean();
        for n in 1..=6 {
            let by_enum = paths_of_length(&g, n).unwrap().len();
            let by_matrix = path_count_by_matrix(&g, n).unwrap();
            assert_eq!(BigUint::from(by_enum), by_matrix, "n = {}", n);
        }
    }

    #[test]
    fn iso_self_and_relabel() {
        let g = golden_mean();
        let id = are_isomorphic(&g, &g).unwrap().unwrap();
        assert_eq!(id.apply("v"), Some("v"));
        let relabeled = Graph::new(
            vec!["a", "b"],
            vec![("x", "a", "a"), ("y", "a", "b"), ("z", "b", "a")],
        )
        .unwrap();
        let bij = are_isomorphic(&g, &relabeled).unwrap().unwrap();
        assert_eq!(bij.apply("v"), Some("a"));
        assert_eq!(bij.apply("w"), Some("b"));
        // symmetry: the inverse certifies the other direction
        let inv = bij.inverted();
        assert_eq!(inv.apply("a"), Some("v"));
    }

    #[test]
    fn iso_distinguishes_eventual_pair() {
        let e = Graph::new(
            vec!["v1", "v2", "u1"],
            vec![("e1", "v1", "v1"), ("e2", "v2", "v1"), ("f1", "u1", "v1")],
        )
        .unwrap();
        let f = Graph::new(
            vec!["v1", "v2", "u1"],
            vec![("e1", "v1", "v2"), ("e2", "v2", "v2"), ("f1", "u1", "v1")],
        )
        .unwrap();
        assert!(are_isomorphic(&e, &f).unwrap().is_none());
    }

    #[test]
    fn iso_cap_is_explicit() {
        let g = golden_mean();
        let err = are_isomorphic_with_cap(&g, &g, 1).unwrap_err();
        assert!(matches!(err, Error::IsoBoundExceeded { .. }));
    }

    #[test]
    fn json_fixed_field_order() {
        let g = golden_mean();
        let s = g.to_json().unwrap();
        assert!(s.find("\"vertices\"").unwrap() < s.find("\"edges\"").unwrap());
        let back = Graph::from_json(&s).unwrap();
        assert!(back.same_labeled(&g));
    }

    #[test]
    fn dot_marks_sources_and_sinks() {
        let g = Graph::new(vec!["a", "b"], vec![("e", "a", "b")]).unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains("\"a\" [shape=diamond];"));
        assert!(dot.contains("\"b\" [shape=box];"));
        assert!(dot.contains("\"a\" -> \"b\" [label=\"e\"];"));
    }
}
