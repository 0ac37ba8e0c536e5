//! Graph rewriting moves: out-splits, in-splits with possibly empty cells,
//! elementary and iterated balanced in-splits, their matrix factorizations,
//! and the source-attachment chain that connects an iterated balanced
//! in-split by elementary ones.
//!
//! Split vertices `v` become `v#1 .. v#n`; every other vertex `w` keeps its
//! id with the suffix `#1`, and edge copies are suffixed the same way. Cell
//! order is significant in records (it indexes the rows/columns of the
//! division matrix), but equality of splits is only ever up to cell
//! reordering.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    adjacency_matrix, adjacency_matrix_ordered, are_isomorphic_with_cap, Graph, VertexBijection,
};
use crate::matrix::{
    verify_balanced_elementary, verify_certificate, BeeTriple, BsseCertificate, DivisionMatrix,
    NonNegMatrix,
};

// ---------------------------------------------------------------------------
// Partitions
// ---------------------------------------------------------------------------

/// A partition of the outgoing edges of a vertex into nonempty cells.
#[derive(Clone, Debug)]
pub struct OutPartition {
    vertex: u32,
    cells: Vec<Vec<u32>>,
}

/// A partition of the incoming edges of a vertex; cells may be empty.
#[derive(Clone, Debug)]
pub struct InPartition {
    vertex: u32,
    cells: Vec<Vec<u32>>,
}

fn check_partition(
    g: &Graph,
    ground: &[u32],
    cells: &[Vec<String>],
    allow_empty: bool,
    what: &str,
) -> Result<Vec<Vec<u32>>> {
    if cells.is_empty() {
        return Err(Error::InvalidPartition(format!(
            "{} needs at least one cell",
            what
        )));
    }
    let mut seen = vec![false; g.edge_count()];
    let mut resolved = Vec::with_capacity(cells.len());
    for cell in cells {
        if cell.is_empty() && !allow_empty {
            return Err(Error::InvalidPartition(format!(
                "{} cells must be nonempty",
                what
            )));
        }
        let mut c = Vec::with_capacity(cell.len());
        for id in cell {
            let e = g.edge_index(id)?;
            if !ground.contains(&e) {
                return Err(Error::InvalidPartition(format!(
                    "edge `{}` does not belong to the partitioned set",
                    id
                )));
            }
            if seen[e as usize] {
                return Err(Error::InvalidPartition(format!(
                    "edge `{}` appears in two cells",
                    id
                )));
            }
            seen[e as usize] = true;
            c.push(e);
        }
        c.sort_unstable();
        resolved.push(c);
    }
    if let Some(&missing) = ground.iter().find(|&&e| !seen[e as usize]) {
        return Err(Error::InvalidPartition(format!(
            "edge `{}` is not covered by the partition",
            g.edge_id(missing)
        )));
    }
    Ok(resolved)
}

impl OutPartition {
    pub fn new(g: &Graph, vertex: &str, cells: &[Vec<String>]) -> Result<OutPartition> {
        let v = g.vertex_index(vertex)?;
        let resolved = check_partition(g, g.out_edges(v), cells, false, "out-split partition")?;
        Ok(OutPartition {
            vertex: v,
            cells: resolved,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

impl InPartition {
    pub fn new(g: &Graph, vertex: &str, cells: &[Vec<String>]) -> Result<InPartition> {
        let v = g.vertex_index(vertex)?;
        let resolved = check_partition(g, g.in_edges(v), cells, true, "in-split partition")?;
        Ok(InPartition {
            vertex: v,
            cells: resolved,
        })
    }

    /// The partition that places every incoming edge in the first of `n`
    /// cells, leaving `n - 1` cells empty.
    pub fn all_in_first_cell(g: &Graph, vertex: &str, n: usize) -> Result<InPartition> {
        let v = g.vertex_index(vertex)?;
        if n == 0 {
            return Err(Error::InvalidPartition("need at least one cell".into()));
        }
        let mut cells = vec![Vec::new(); n];
        cells[0] = g.in_edges(v).to_vec();
        Ok(InPartition { vertex: v, cells })
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_ids(&self, g: &Graph) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| c.iter().map(|&e| g.edge_id(e).to_string()).collect())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Split records
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Out,
    In,
}

/// A replayable record of a single split: the graphs, the partition, the
/// division matrix `D`, the edge matrix of the split, and the labeling of
/// copies. The factorization identities (`A_base = D Em`, `A_result = Em D`
/// for out-splits; `A_base = Em D^t`, `A_result = D^t Em` for in-splits)
/// hold exactly for the stored matrices under canonical vertex order.
#[derive(Clone, Debug, Serialize)]
pub struct SplitRecord {
    pub kind: SplitKind,
    pub vertex: String,
    pub cells: Vec<Vec<String>>,
    pub base: Graph,
    pub result: Graph,
    pub division: NonNegMatrix,
    pub edge_matrix: NonNegMatrix,
    /// base vertex id -> ids of its copies, cell order for the split vertex
    pub vertex_map: Vec<(String, Vec<String>)>,
    /// base edge id -> ids of its copies
    pub edge_map: Vec<(String, Vec<String>)>,
}

impl SplitRecord {
    /// The base vertex a result vertex is a copy of.
    pub fn base_of_vertex(&self, result_id: &str) -> Option<&str> {
        self.vertex_map
            .iter()
            .find(|(_, copies)| copies.iter().any(|c| c == result_id))
            .map(|(b, _)| b.as_str())
    }

    /// The base edge a result edge is a copy of.
    pub fn base_of_edge(&self, result_id: &str) -> Option<&str> {
        self.edge_map
            .iter()
            .find(|(_, copies)| copies.iter().any(|c| c == result_id))
            .map(|(b, _)| b.as_str())
    }

    /// Recompute `(D, Em)` under explicit vertex orderings of the base and
    /// result graphs.
    pub fn matrices_under(
        &self,
        base_order: &[String],
        result_order: &[String],
    ) -> Result<(NonNegMatrix, NonNegMatrix)> {
        split_matrices(
            self.kind,
            &self.base,
            &self.result,
            &self.vertex,
            &self.cells,
            base_order,
            result_order,
            &self.vertex_map,
        )
    }
}

fn copy_id(base: &str, i: usize) -> String {
    format!("{}#{}", base, i)
}

#[allow(clippy::too_many_arguments)]
fn split_matrices(
    kind: SplitKind,
    base: &Graph,
    result: &Graph,
    vertex: &str,
    cells: &[Vec<String>],
    base_order: &[String],
    result_order: &[String],
    vertex_map: &[(String, Vec<String>)],
) -> Result<(NonNegMatrix, NonNegMatrix)> {
    let nb = base.vertex_count();
    let nr = result.vertex_count();
    if base_order.len() != nb || result_order.len() != nr {
        return Err(Error::InvalidArgument(
            "orderings must list every vertex exactly once".into(),
        ));
    }
    let bpos = |id: &str| -> Result<usize> {
        base_order
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    };
    let rpos = |id: &str| -> Result<usize> {
        result_order
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    };

    let mut division = NonNegMatrix::zero(nb, nr)?;
    for (b, copies) in vertex_map {
        let i = bpos(b)?;
        for c in copies {
            division.set(i, rpos(c)?, 1u32.into());
        }
    }

    // per result vertex, the cell of base edges it stands for
    let v = base.vertex_index(vertex)?;
    let cell_of_result = |rid: &str| -> Result<Vec<u32>> {
        let (b, copies) = vertex_map
            .iter()
            .find(|(_, copies)| copies.iter().any(|c| c == rid))
            .ok_or_else(|| Error::UnknownVertex(rid.to_string()))?;
        let bi = base.vertex_index(b)?;
        if bi == v {
            let j = copies.iter().position(|c| c == rid).unwrap();
            cells[j]
                .iter()
                .map(|id| base.edge_index(id))
                .collect::<Result<Vec<u32>>>()
        } else {
            Ok(match kind {
                SplitKind::Out => base.out_edges(bi).to_vec(),
                SplitKind::In => base.in_edges(bi).to_vec(),
            })
        }
    };

    let em = match kind {
        SplitKind::Out => {
            // Em(x, u) = edges in cell(x) with range u
            let mut em = NonNegMatrix::zero(nr, nb)?;
            for rid in result_order {
                let x = rpos(rid)?;
                for e in cell_of_result(rid)? {
                    let u = bpos(base.vertex_id(base.dst(e)))?;
                    let cur = em.get(x, u) + 1u32;
                    em.set(x, u, cur);
                }
            }
            em
        }
        SplitKind::In => {
            // Em(u, x) = edges from u in cell(x)
            let mut em = NonNegMatrix::zero(nb, nr)?;
            for rid in result_order {
                let x = rpos(rid)?;
                for e in cell_of_result(rid)? {
                    let u = bpos(base.vertex_id(base.src(e)))?;
                    let cur = em.get(u, x) + 1u32;
                    em.set(u, x, cur);
                }
            }
            em
        }
    };
    Ok((division, em))
}

fn build_split(g: &Graph, vertex: u32, cells: &[Vec<u32>], kind: SplitKind) -> Result<SplitRecord> {
    g.require_no_sinks()?;
    let n = cells.len();
    let vid = g.vertex_id(vertex);

    let mut cell_of = vec![usize::MAX; g.edge_count()];
    for (j, cell) in cells.iter().enumerate() {
        for &e in cell {
            cell_of[e as usize] = j;
        }
    }

    let mut vertex_map: Vec<(String, Vec<String>)> = Vec::with_capacity(g.vertex_count());
    let mut vertices = Vec::new();
    for u in 0..g.vertex_count() as u32 {
        let uid = g.vertex_id(u);
        let copies: Vec<String> = if u == vertex {
            (1..=n).map(|i| copy_id(uid, i)).collect()
        } else {
            vec![copy_id(uid, 1)]
        };
        vertices.extend(copies.iter().cloned());
        vertex_map.push((uid.to_string(), copies));
    }

    let mut edge_map: Vec<(String, Vec<String>)> = Vec::with_capacity(g.edge_count());
    let mut edges: Vec<(String, String, String)> = Vec::new();
    for e in 0..g.edge_count() as u32 {
        let eid = g.edge_id(e);
        let (src, dst) = (g.src(e), g.dst(e));
        let copies = match kind {
            // out-split: edges into v are replicated to every copy of v
            SplitKind::Out => {
                if dst == vertex {
                    n
                } else {
                    1
                }
            }
            // in-split: edges out of v are replicated to every copy of v
            SplitKind::In => {
                if src == vertex {
                    n
                } else {
                    1
                }
            }
        };
        let mut ids = Vec::with_capacity(copies);
        for i in 1..=copies {
            let id = copy_id(eid, i);
            let (s, d) = match kind {
                SplitKind::Out => {
                    let s = if src == vertex {
                        copy_id(vid, cell_of[e as usize] + 1)
                    } else {
                        copy_id(g.vertex_id(src), 1)
                    };
                    let d = if dst == vertex {
                        copy_id(vid, i)
                    } else {
                        copy_id(g.vertex_id(dst), 1)
                    };
                    (s, d)
                }
                SplitKind::In => {
                    let s = if src == vertex {
                        copy_id(vid, i)
                    } else {
                        copy_id(g.vertex_id(src), 1)
                    };
                    let d = if dst == vertex {
                        copy_id(vid, cell_of[e as usize] + 1)
                    } else {
                        copy_id(g.vertex_id(dst), 1)
                    };
                    (s, d)
                }
            };
            edges.push((id.clone(), s, d));
            ids.push(id);
        }
        edge_map.push((eid.to_string(), ids));
    }

    let result = Graph::new(vertices, edges)?;
    let cells_ids: Vec<Vec<String>> = cells
        .iter()
        .map(|c| c.iter().map(|&e| g.edge_id(e).to_string()).collect())
        .collect();
    let base_order: Vec<String> = g.vertex_ids().map(String::from).collect();
    let result_order: Vec<String> = result.vertex_ids().map(String::from).collect();
    let (division, edge_matrix) = split_matrices(
        kind,
        g,
        &result,
        vid,
        &cells_ids,
        &base_order,
        &result_order,
        &vertex_map,
    )?;

    // the split factorization identities, checked exactly
    let a_base = adjacency_matrix(g)?;
    let a_result = adjacency_matrix(&result)?;
    let (lhs_base, lhs_result) = match kind {
        SplitKind::Out => (division.mul(&edge_matrix)?, edge_matrix.mul(&division)?),
        SplitKind::In => {
            let dt = division.transpose();
            (edge_matrix.mul(&dt)?, dt.mul(&edge_matrix)?)
        }
    };
    if lhs_base != a_base || lhs_result != a_result {
        return Err(Error::InternalConsistency(
            "split factorization identities failed".into(),
        ));
    }

    Ok(SplitRecord {
        kind,
        vertex: vid.to_string(),
        cells: cells_ids,
        base: g.clone(),
        result,
        division,
        edge_matrix,
        vertex_map,
        edge_map,
    })
}

/// Move (O): out-split `g` at the partitioned vertex.
pub fn out_split(g: &Graph, p: &OutPartition) -> Result<SplitRecord> {
    build_split(g, p.vertex, &p.cells, SplitKind::Out)
}

/// Move (I-): in-split `g` at the partitioned vertex; empty cells produce
/// sources, one per empty cell.
pub fn in_split(g: &Graph, p: &InPartition) -> Result<SplitRecord> {
    build_split(g, p.vertex, &p.cells, SplitKind::In)
}

// ---------------------------------------------------------------------------
// Balanced in-splits
// ---------------------------------------------------------------------------

/// An elementary balanced in-split: two in-splits of the same graph at the
/// same vertex with the same number of cells. The two records share the
/// division matrix, and `triple = (Em_E, D^t, Em_F)` verifies the balanced
/// elementary equivalence of the two result adjacency matrices.
#[derive(Clone, Debug, Serialize)]
pub struct BalancedSplit {
    pub e: SplitRecord,
    pub f: SplitRecord,
    pub triple: BeeTriple,
    /// vertex order used for the triple's base-side indices
    pub base_order: Vec<String>,
    /// common vertex order of the two (identified) result graphs
    pub result_order: Vec<String>,
}

pub fn balanced_in_split(
    g: &Graph,
    vertex: &str,
    p_e: &InPartition,
    p_f: &InPartition,
) -> Result<BalancedSplit> {
    let v = g.vertex_index(vertex)?;
    if p_e.vertex != v || p_f.vertex != v {
        return Err(Error::InvalidArgument(
            "both partitions must be at the named vertex".into(),
        ));
    }
    if p_e.cell_count() != p_f.cell_count() {
        return Err(Error::InvalidArgument(format!(
            "balanced in-split needs equal cell counts, got {} and {}",
            p_e.cell_count(),
            p_f.cell_count()
        )));
    }
    let e = in_split(g, p_e)?;
    let f = in_split(g, p_f)?;
    if e.division != f.division {
        return Err(Error::InternalConsistency(
            "balanced splits must share the division matrix".into(),
        ));
    }
    let s = e.division.transpose();
    let triple = BeeTriple::new(e.edge_matrix.clone(), s, f.edge_matrix.clone())?;
    let a_e = adjacency_matrix(&e.result)?;
    let a_f = adjacency_matrix(&f.result)?;
    if !verify_balanced_elementary(&a_e, &a_f, &triple)? {
        return Err(Error::InternalConsistency(
            "balanced split triple failed verification".into(),
        ));
    }
    Ok(BalancedSplit {
        base_order: g.vertex_ids().map(String::from).collect(),
        result_order: e.result.vertex_ids().map(String::from).collect(),
        e,
        f,
        triple,
    })
}

// ---------------------------------------------------------------------------
// Scripts and iterated balanced in-splits
// ---------------------------------------------------------------------------

/// One step of a balanced splitting history: the identified vertex and the
/// two partitions (E branch and F branch) with equal cell counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScriptStep {
    pub vertex: String,
    #[serde(rename = "cells_E")]
    pub cells_e: Vec<Vec<String>>,
    #[serde(rename = "cells_F")]
    pub cells_f: Vec<Vec<String>>,
}

/// A replayable description of an iterated balanced in-split.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitScript {
    pub base: Graph,
    pub steps: Vec<ScriptStep>,
}

impl SplitScript {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<SplitScript> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }
}

/// One executed step of an iterated balanced in-split.
#[derive(Clone, Debug, Serialize)]
pub struct BalancedStep {
    pub vertex: String,
    pub e_record: SplitRecord,
    pub f_record: SplitRecord,
    /// the division matrix shared by the two records
    pub division: NonNegMatrix,
}

/// The full history of an iterated balanced in-split.
#[derive(Clone, Debug, Serialize)]
pub struct SplitHistory {
    pub base: Graph,
    pub steps: Vec<BalancedStep>,
}

impl SplitHistory {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Graph of the E branch after `level` steps.
    pub fn e_level(&self, level: usize) -> &Graph {
        if level == 0 {
            &self.base
        } else {
            &self.steps[level - 1].e_record.result
        }
    }

    pub fn f_level(&self, level: usize) -> &Graph {
        if level == 0 {
            &self.base
        } else {
            &self.steps[level - 1].f_record.result
        }
    }

    /// The history with the two branches exchanged.
    pub fn swapped(&self) -> SplitHistory {
        SplitHistory {
            base: self.base.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| BalancedStep {
                    vertex: s.vertex.clone(),
                    e_record: s.f_record.clone(),
                    f_record: s.e_record.clone(),
                    division: s.division.clone(),
                })
                .collect(),
        }
    }
}

/// Replay a script: each step in-splits both branches at the identified
/// vertex with equal cell counts. A zero-step script returns `(G, G)`.
pub fn iterated_balanced_in_split(script: &SplitScript) -> Result<(Graph, Graph, SplitHistory)> {
    script.base.require_no_sinks()?;
    let mut cur_e = script.base.clone();
    let mut cur_f = script.base.clone();
    let mut steps = Vec::with_capacity(script.steps.len());
    for (i, step) in script.steps.iter().enumerate() {
        let step_err = |e: Error| Error::InvalidArgument(format!("script step {}: {}", i, e));
        if step.cells_e.len() != step.cells_f.len() {
            return Err(Error::InvalidArgument(format!(
                "script step {}: cell counts differ ({} vs {})",
                i,
                step.cells_e.len(),
                step.cells_f.len()
            )));
        }
        cur_e.vertex_index(&step.vertex).map_err(step_err)?;
        cur_f.vertex_index(&step.vertex).map_err(step_err)?;
        let p_e = InPartition::new(&cur_e, &step.vertex, &step.cells_e).map_err(step_err)?;
        let p_f = InPartition::new(&cur_f, &step.vertex, &step.cells_f).map_err(step_err)?;
        let e_record = in_split(&cur_e, &p_e).map_err(step_err)?;
        let f_record = in_split(&cur_f, &p_f).map_err(step_err)?;
        if e_record.division != f_record.division {
            return Err(Error::InternalConsistency(format!(
                "script step {}: division matrices differ",
                i
            )));
        }
        cur_e = e_record.result.clone();
        cur_f = f_record.result.clone();
        steps.push(BalancedStep {
            vertex: step.vertex.clone(),
            division: e_record.division.clone(),
            e_record,
            f_record,
        });
    }
    Ok((
        cur_e,
        cur_f,
        SplitHistory {
            base: script.base.clone(),
            steps,
        },
    ))
}

// ---------------------------------------------------------------------------
// Reconstruction from matrices
// ---------------------------------------------------------------------------

fn signed_diff(a: &NonNegMatrix, b: &NonNegMatrix) -> String {
    use num_bigint::BigInt;
    let mut rows = Vec::new();
    for i in 0..a.rows() {
        let row: Vec<String> = (0..a.cols())
            .map(|j| {
                (BigInt::from(a.get(i, j).clone()) - BigInt::from(b.get(i, j).clone())).to_string()
            })
            .collect();
        rows.push(format!("[{}]", row.join(" ")));
    }
    rows.join(" ")
}

/// Reconstruct a split of `g` realizing the factorization `(D, Em)`:
/// `A_g = D Em` for out-splits, `A_g = Em D^t` for in-splits. The
/// reconstructed partition reproduces `(D, Em)` up to cell ordering.
pub fn matrices_to_split(
    g: &Graph,
    d: &NonNegMatrix,
    em: &NonNegMatrix,
    kind: SplitKind,
) -> Result<SplitRecord> {
    let d = DivisionMatrix::new(d.clone())?;
    let d = d.matrix();
    let n = g.vertex_count();
    if d.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "D has {} rows, graph has {} vertices",
            d.rows(),
            n
        )));
    }
    let p = d.cols();
    let a = adjacency_matrix(g)?;
    match kind {
        SplitKind::Out => {
            if em.rows() != p || em.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "edge matrix must be {}x{}, got {}x{}",
                    p,
                    n,
                    em.rows(),
                    em.cols()
                )));
            }
            let prod = d.mul(em)?;
            if prod != a {
                return Err(Error::FactorizationFailed(format!(
                    "A_g != D*Em, residual {}",
                    signed_diff(&a, &prod)
                )));
            }
        }
        SplitKind::In => {
            if em.rows() != n || em.cols() != p {
                return Err(Error::DimensionMismatch(format!(
                    "edge matrix must be {}x{}, got {}x{}",
                    n,
                    p,
                    em.rows(),
                    em.cols()
                )));
            }
            let prod = em.mul(&d.transpose())?;
            if prod != a {
                return Err(Error::FactorizationFailed(format!(
                    "A_g != Em*D^t, residual {}",
                    signed_diff(&a, &prod)
                )));
            }
        }
    }

    // the split vertex is the unique base vertex with several copies
    let base_of_col: Vec<usize> = (0..p)
        .map(|x| {
            (0..n)
                .find(|&u| d.get(u, x).is_one())
                .expect("division matrix column has one nonzero entry")
        })
        .collect();
    let mut multi: Vec<usize> = (0..n)
        .filter(|&u| base_of_col.iter().filter(|&&b| b == u).count() > 1)
        .collect();
    let v = match multi.len() {
        0 => {
            let identity = p == n && (0..n).all(|i| d.get(i, i).is_one());
            if !identity {
                return Err(Error::InvalidArgument(
                    "D does not describe a single-vertex split".into(),
                ));
            }
            // identity division: a trivial single-cell split at the first vertex
            0
        }
        1 => multi.pop().unwrap(),
        _ => {
            return Err(Error::InvalidArgument(
                "D splits more than one vertex".into(),
            ))
        }
    };
    let v = v as u32;
    let v_cols: Vec<usize> = (0..p).filter(|&x| base_of_col[x] == v as usize).collect();

    // rebuild the partition cells from the per-cell edge counts in Em
    let ground: Vec<u32> = match kind {
        SplitKind::Out => g.out_edges(v).to_vec(),
        SplitKind::In => g.in_edges(v).to_vec(),
    };
    let mut remaining: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &e in ground.iter().rev() {
        let other = match kind {
            SplitKind::Out => g.dst(e),
            SplitKind::In => g.src(e),
        };
        remaining[other as usize].push(e);
    }
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(v_cols.len());
    for &x in &v_cols {
        let mut cell = Vec::new();
        for (u, pool) in remaining.iter_mut().enumerate() {
            let want: u64 = match kind {
                SplitKind::Out => em.get(x, u),
                SplitKind::In => em.get(u, x),
            }
            .try_into()
            .map_err(|_| Error::InvalidArgument("edge matrix entry too large".into()))?;
            for _ in 0..want {
                let e = pool.pop().ok_or_else(|| {
                    Error::FactorizationFailed(format!(
                        "cell counts exceed the edges available toward vertex index {}",
                        u
                    ))
                })?;
                cell.push(g.edge_id(e).to_string());
            }
        }
        cell.sort();
        cells.push(cell);
    }
    if remaining.iter().any(|r| !r.is_empty()) {
        return Err(Error::FactorizationFailed(
            "cell counts do not exhaust the partitioned edges".into(),
        ));
    }

    let vid = g.vertex_id(v).to_string();
    match kind {
        SplitKind::Out => {
            let p = OutPartition::new(g, &vid, &cells)?;
            out_split(g, &p)
        }
        SplitKind::In => {
            let p = InPartition::new(g, &vid, &cells)?;
            in_split(g, &p)
        }
    }
}

// ---------------------------------------------------------------------------
// Connecting iterated balanced in-splits by elementary ones
// ---------------------------------------------------------------------------

/// One elementary balanced in-split relation in the chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainLink {
    pub middle: Graph,
    pub vertex: String,
    pub left: SplitRecord,
    pub right: SplitRecord,
    /// verifies between the left and right adjacency matrices taken under
    /// `result_order`
    pub triple: BeeTriple,
    pub result_order: Vec<String>,
}

/// The chain of `2l - 1` elementary balanced in-splits connecting the two
/// branches of an `l`-step script, together with the source-attached base
/// graph `G'` and an aligned matrix certificate.
#[derive(Clone, Debug, Serialize)]
pub struct ElementaryChain {
    pub links: Vec<ChainLink>,
    pub g_prime: Graph,
    pub attached_source_ids: Vec<String>,
    pub certificate: BsseCertificate,
    /// isomorphisms identifying the right graph of link `i` with the left
    /// graph of link `i + 1`
    pub joints: Vec<VertexBijection>,
}

struct Attachment {
    vertices: Vec<String>,
    /// (edge id, source vertex id, target id at the attachment level)
    edges: Vec<(String, String, String)>,
    /// attached edges landing at a copy of the level-j split vertex, with
    /// the cell index they passed through at level j+1
    cell_hint: Vec<(String, String, usize)>,
}

/// Graph at branch level `j` with the sources of steps `j+1 .. l-1`
/// attached: for each later step `i` and each copy index `k >= 2`, a source
/// vertex emitting copies of the out-edges of the step-`i` split vertex,
/// retargeted down to level `j` through the forgetful vertex maps.
fn attach_sources(
    history: &SplitHistory,
    records: &[&SplitRecord],
    level_graph: &Graph,
    j: usize,
    cell_counts: &[usize],
) -> Result<(Graph, Attachment)> {
    let l = history.step_count();
    let mut vertices: Vec<String> = level_graph.vertex_ids().map(String::from).collect();
    let mut edges = level_graph.edge_list();
    let mut att = Attachment {
        vertices: Vec::new(),
        edges: Vec::new(),
        cell_hint: Vec::new(),
    };
    for i in (j + 1)..l {
        let level_i = if i == 0 {
            &history.base
        } else {
            &records[i - 1].result
        };
        let v_i = &history.steps[i].vertex;
        let vi_idx = level_i.vertex_index(v_i)?;
        for k in 2..=cell_counts[i] {
            let src_id = format!("{}~{}", v_i, k);
            att.vertices.push(src_id.clone());
            vertices.push(src_id.clone());
            for &e in level_i.out_edges(vi_idx) {
                let eid = format!("{}~{}", level_i.edge_id(e), k);
                // project the range of `e` from level i down to level j
                let mut target = level_i.vertex_id(level_i.dst(e)).to_string();
                let mut hint: Option<usize> = None;
                for down in (j..i).rev() {
                    let rec = records[down];
                    if down == j {
                        // remember which copy of the level-j split vertex we
                        // pass through; it fixes the cell when re-splitting
                        if let Some((b, copies)) = rec
                            .vertex_map
                            .iter()
                            .find(|(_, copies)| copies.contains(&target))
                        {
                            if *b == history.steps[j].vertex {
                                hint = copies.iter().position(|c| *c == target);
                            }
                        }
                    }
                    target = rec
                        .base_of_vertex(&target)
                        .ok_or_else(|| {
                            Error::InternalConsistency(format!(
                                "no base vertex for `{}` at level {}",
                                target, down
                            ))
                        })?
                        .to_string();
                }
                if let Some(c) = hint {
                    att.cell_hint.push((eid.clone(), target.clone(), c));
                }
                att.edges.push((eid.clone(), src_id.clone(), target.clone()));
                edges.push((eid, src_id.clone(), target));
            }
        }
    }
    let g = Graph::new(vertices, edges)?;
    Ok((g, att))
}

/// Extend a level-`j` partition of the in-edges of `v` to the attached
/// edges that land at `v`, using the cell recorded while projecting each
/// attached edge through the level-`(j+1)` split.
fn extend_partition(
    base_cells: &[Vec<String>],
    vertex: &str,
    att: &Attachment,
) -> Vec<Vec<String>> {
    let mut cells: Vec<Vec<String>> = base_cells.to_vec();
    for (eid, _, target) in &att.edges {
        if target != vertex {
            continue;
        }
        let cell = att
            .cell_hint
            .iter()
            .find(|(e, t, _)| e == eid && t == target)
            .map(|(_, _, c)| *c)
            .unwrap_or(0);
        cells[cell].push(eid.clone());
    }
    cells
}

/// Build the chain of `2l - 1` verified elementary balanced in-split
/// relations connecting the two branches of an `l >= 2` step script, per
/// the source-attachment construction.
pub fn connect_by_elementary(script: &SplitScript) -> Result<ElementaryChain> {
    let l = script.step_count();
    if l < 2 {
        return Err(Error::InvalidArgument(
            "the chain construction needs at least 2 steps; a 1-step script is already elementary"
                .into(),
        ));
    }
    let (_, _, history) = iterated_balanced_in_split(script)?;
    let cell_counts: Vec<usize> = script.steps.iter().map(|s| s.cells_e.len()).collect();

    let e_recs: Vec<&SplitRecord> = history.steps.iter().map(|s| &s.e_record).collect();
    let f_recs: Vec<&SplitRecord> = history.steps.iter().map(|s| &s.f_record).collect();

    // middles with sources attached, per side
    let mut e_primes: Vec<(Graph, Attachment)> = Vec::with_capacity(l);
    let mut f_primes: Vec<(Graph, Attachment)> = Vec::with_capacity(l);
    for j in 0..l {
        e_primes.push(attach_sources(
            &history,
            &e_recs,
            history.e_level(j),
            j,
            &cell_counts,
        )?);
        f_primes.push(attach_sources(
            &history,
            &f_recs,
            history.f_level(j),
            j,
            &cell_counts,
        )?);
    }

    type LinkSpec = (Graph, String, Vec<Vec<String>>, Vec<Vec<String>>);
    let mut specs: Vec<LinkSpec> = Vec::new();
    let all_in_edges = |g: &Graph, v: &str| -> Result<Vec<String>> {
        let vi = g.vertex_index(v)?;
        Ok(g.in_edges(vi)
            .iter()
            .map(|&e| g.edge_id(e).to_string())
            .collect())
    };
    // E side, from the top split down to level 1
    for j in (1..l).rev() {
        let (middle, att) = &e_primes[j];
        let v = &script.steps[j].vertex;
        let left = extend_partition(&script.steps[j].cells_e, v, att);
        let mut right: Vec<Vec<String>> = vec![Vec::new(); cell_counts[j]];
        right[0] = all_in_edges(middle, v)?;
        specs.push((middle.clone(), v.clone(), left, right));
    }
    // middle link over G'
    {
        let (g_prime, att_e) = &e_primes[0];
        let (g_prime_f, att_f) = &f_primes[0];
        if !g_prime.same_labeled(g_prime_f) {
            return Err(Error::InternalConsistency(
                "the two source-attached base graphs differ".into(),
            ));
        }
        let v = &script.steps[0].vertex;
        let left = extend_partition(&script.steps[0].cells_e, v, att_e);
        let right = extend_partition(&script.steps[0].cells_f, v, att_f);
        specs.push((g_prime.clone(), v.clone(), left, right));
    }
    // F side, from level 1 back up to the top split
    for j in 1..l {
        let (middle, att) = &f_primes[j];
        let v = &script.steps[j].vertex;
        let mut left: Vec<Vec<String>> = vec![Vec::new(); cell_counts[j]];
        left[0] = all_in_edges(middle, v)?;
        let right = extend_partition(&script.steps[j].cells_f, v, att);
        specs.push((middle.clone(), v.clone(), left, right));
    }

    // run the splits, align vertex orderings link to link, emit triples
    let mut links: Vec<ChainLink> = Vec::new();
    let mut joints: Vec<VertexBijection> = Vec::new();
    let mut matrices: Vec<NonNegMatrix> = Vec::new();
    let mut triples: Vec<BeeTriple> = Vec::new();
    let mut order: Vec<String> = Vec::new();

    for (idx, (middle, v, left_cells, right_cells)) in specs.iter().enumerate() {
        let p_left = InPartition::new(middle, v, left_cells)?;
        let p_right = InPartition::new(middle, v, right_cells)?;
        let left = in_split(middle, &p_left)?;
        let right = in_split(middle, &p_right)?;

        if idx == 0 {
            order = left.result.vertex_ids().map(String::from).collect();
        } else {
            // identify this link's left graph with the previous right graph
            let prev = &links[idx - 1].right.result;
            let cap = prev.vertex_count().max(left.result.vertex_count());
            let iso = are_isomorphic_with_cap(prev, &left.result, cap)?.ok_or_else(|| {
                Error::InternalConsistency(format!(
                    "chain link {}: left graph is not isomorphic to the previous right graph",
                    idx
                ))
            })?;
            order = order
                .iter()
                .map(|id| iso.apply(id).expect("total bijection").to_string())
                .collect();
            joints.push(iso);
        }

        let base_order: Vec<String> = middle.vertex_ids().map(String::from).collect();
        let (d_l, em_l) = left.matrices_under(&base_order, &order)?;
        let (d_r, em_r) = right.matrices_under(&base_order, &order)?;
        if d_l != d_r {
            return Err(Error::InternalConsistency(format!(
                "chain link {}: division matrices differ",
                idx
            )));
        }
        let triple = BeeTriple::new(em_l, d_l.transpose(), em_r)?;
        let a_l = adjacency_matrix_ordered(&left.result, &order)?;
        let a_r = adjacency_matrix_ordered(&right.result, &order)?;
        if !verify_balanced_elementary(&a_l, &a_r, &triple)? {
            return Err(Error::InternalConsistency(format!(
                "chain link {}: triple failed verification",
                idx
            )));
        }
        if idx == 0 {
            matrices.push(a_l);
        }
        matrices.push(a_r);
        triples.push(triple.clone());
        links.push(ChainLink {
            middle: middle.clone(),
            vertex: v.clone(),
            left,
            right,
            triple,
            result_order: order.clone(),
        });
    }

    let certificate = BsseCertificate::new(matrices, triples)?;
    if !verify_certificate(&certificate)? {
        return Err(Error::InternalConsistency(
            "chain certificate failed verification".into(),
        ));
    }

    Ok(ElementaryChain {
        links,
        g_prime: e_primes[0].0.clone(),
        attached_source_ids: e_primes[0].1.vertices.clone(),
        certificate,
        joints,
    })
}


#[cfg(test)]
mod tests {
    use super::test_scripts::two_step_script;
    use super::*;
    use crate::graph::fixtures::{golden_mean, tail_loop};
    use crate::graph::{are_isomorphic, validate_graph};

    fn cells(spec: &[&[&str]]) -> Vec<Vec<String>> {
        spec.iter()
            .map(|c| c.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn golden_mean_out_split() {
        let g = golden_mean();
        let p = OutPartition::new(&g, "v", &cells(&[&["e"], &["f"]])).unwrap();
        let rec = out_split(&g, &p).unwrap();
        // the 3-vertex graph of the worked example
        let expect = Graph::new(
            vec!["v#1", "v#2", "w#1"],
            vec![
                ("e#1", "v#1", "v#1"),
                ("e#2", "v#1", "v#2"),
                ("f#1", "v#2", "w#1"),
                ("g#1", "w#1", "v#1"),
                ("g#2", "w#1", "v#2"),
            ],
        )
        .unwrap();
        assert!(rec.result.same_labeled(&expect));
        assert_eq!(
            rec.division,
            NonNegMatrix::from_rows(&[vec![1, 1, 0], vec![0, 0, 1]]).unwrap()
        );
        assert_eq!(
            rec.edge_matrix,
            NonNegMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 0]]).unwrap()
        );
        let rep = validate_graph(&rec.result);
        assert!(!rep.has_sinks());
        assert!(!rep.has_sources());
    }

    #[test]
    fn out_split_single_cell_is_isomorphism() {
        let g = golden_mean();
        let p = OutPartition::new(&g, "v", &cells(&[&["e", "f"]])).unwrap();
        let rec = out_split(&g, &p).unwrap();
        assert!(are_isomorphic(&g, &rec.result).unwrap().is_some());
    }

    #[test]
    fn out_split_rejects_empty_cell_and_sinks() {
        let g = golden_mean();
        assert!(OutPartition::new(&g, "v", &cells(&[&["e", "f"], &[]])).is_err());
        let sink = Graph::new(vec!["a", "b"], vec![("e", "a", "b")]).unwrap();
        let p = OutPartition::new(&sink, "a", &cells(&[&["e"]])).unwrap();
        assert!(matches!(out_split(&sink, &p), Err(Error::HasSinks(_))));
    }

    #[test]
    fn golden_mean_in_splits() {
        let g = golden_mean();
        // {e} | {g}
        let p1 = InPartition::new(&g, "v", &cells(&[&["e"], &["g"]])).unwrap();
        let rec1 = in_split(&g, &p1).unwrap();
        let left = Graph::new(
            vec!["v#1", "v#2", "w#1"],
            vec![
                ("e#1", "v#1", "v#1"),
                ("e#2", "v#2", "v#1"),
                ("f#1", "v#1", "w#1"),
                ("f#2", "v#2", "w#1"),
                ("g#1", "w#1", "v#2"),
            ],
        )
        .unwrap();
        assert!(rec1.result.same_labeled(&left));
        assert!(!validate_graph(&rec1.result).has_sources());

        // {e,g} | {} produces exactly one source
        let p2 = InPartition::new(&g, "v", &cells(&[&["e", "g"], &[]])).unwrap();
        let rec2 = in_split(&g, &p2).unwrap();
        let right = Graph::new(
            vec!["v#1", "v#2", "w#1"],
            vec![
                ("e#1", "v#1", "v#1"),
                ("e#2", "v#2", "v#1"),
                ("f#1", "v#1", "w#1"),
                ("f#2", "v#2", "w#1"),
                ("g#1", "w#1", "v#1"),
            ],
        )
        .unwrap();
        assert!(rec2.result.same_labeled(&right));
        let rep = validate_graph(&rec2.result);
        assert_eq!(rep.sources, vec!["v#2"]);

        // single cell is an isomorphism
        let p3 = InPartition::new(&g, "v", &cells(&[&["e", "g"]])).unwrap();
        let rec3 = in_split(&g, &p3).unwrap();
        assert!(are_isomorphic(&g, &rec3.result).unwrap().is_some());
    }

    #[test]
    fn balanced_split_of_tail_loop() {
        let g = tail_loop();
        let p_e = InPartition::new(&g, "v", &cells(&[&["e", "f"], &[]])).unwrap();
        let p_f = InPartition::new(&g, "v", &cells(&[&["f"], &["e"]])).unwrap();
        let bs = balanced_in_split(&g, "v", &p_e, &p_f).unwrap();
        let a_e = adjacency_matrix(&bs.e.result).unwrap();
        let a_f = adjacency_matrix(&bs.f.result).unwrap();
        // canonical vertex order of the splits is u#1, v#1, v#2
        assert_eq!(
            a_e,
            NonNegMatrix::from_rows(&[vec![0, 1, 0], vec![0, 1, 0], vec![0, 1, 0]]).unwrap()
        );
        assert_eq!(
            a_f,
            NonNegMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 1]]).unwrap()
        );
        assert!(verify_balanced_elementary(&a_e, &a_f, &bs.triple).unwrap());
        assert!(are_isomorphic(&bs.e.result, &bs.f.result)
            .unwrap()
            .is_none());
    }

    #[test]
    fn balanced_split_equal_partitions_isomorphic() {
        let g = golden_mean();
        let p = InPartition::new(&g, "v", &cells(&[&["e"], &["g"]])).unwrap();
        let bs = balanced_in_split(&g, "v", &p, &p).unwrap();
        assert!(are_isomorphic(&bs.e.result, &bs.f.result)
            .unwrap()
            .is_some());
    }

    #[test]
    fn iterated_zero_steps() {
        let g = golden_mean();
        let script = SplitScript {
            base: g.clone(),
            steps: vec![],
        };
        let (e, f, h) = iterated_balanced_in_split(&script).unwrap();
        assert!(e.same_labeled(&g));
        assert!(f.same_labeled(&g));
        assert_eq!(h.step_count(), 0);
    }

    #[test]
    fn iterated_two_steps_matches_figures() {
        let script = two_step_script();
        let (e2, f2, h) = iterated_balanced_in_split(&script).unwrap();
        assert_eq!(e2.vertex_count(), 5);
        assert_eq!(f2.vertex_count(), 5);
        assert_eq!(h.step_count(), 2);
        let expect_e2 = Graph::new(
            vec!["w#1#1", "w#1#2", "m#1#1", "v#1#1", "v#2#1"],
            vec![
                ("a#1#1", "w#1#1", "m#1#1"),
                ("a#1#2", "w#1#2", "m#1#1"),
                ("b1#1#1", "m#1#1", "v#1#1"),
                ("b2#1#1", "m#1#1", "v#1#1"),
                ("b3#1#1", "m#1#1", "v#2#1"),
                ("b4#1#1", "m#1#1", "v#2#1"),
                ("e#1#1", "v#1#1", "w#1#1"),
                ("e#2#1", "v#2#1", "w#1#2"),
            ],
        )
        .unwrap();
        assert!(e2.same_labeled(&expect_e2));
        // F branch differs only in the step-1 distribution of the b edges
        let expect_f2 = Graph::new(
            vec!["w#1#1", "w#1#2", "m#1#1", "v#1#1", "v#2#1"],
            vec![
                ("a#1#1", "w#1#1", "m#1#1"),
                ("a#1#2", "w#1#2", "m#1#1"),
                ("b1#1#1", "m#1#1", "v#1#1"),
                ("b2#1#1", "m#1#1", "v#1#1"),
                ("b3#1#1", "m#1#1", "v#1#1"),
                ("b4#1#1", "m#1#1", "v#2#1"),
                ("e#1#1", "v#1#1", "w#1#1"),
                ("e#2#1", "v#2#1", "w#1#2"),
            ],
        )
        .unwrap();
        assert!(f2.same_labeled(&expect_f2));
    }

    #[test]
    fn matrices_to_split_roundtrips() {
        let g = golden_mean();
        let p = OutPartition::new(&g, "v", &cells(&[&["e"], &["f"]])).unwrap();
        let rec = out_split(&g, &p).unwrap();
        let back = matrices_to_split(&g, &rec.division, &rec.edge_matrix, SplitKind::Out).unwrap();
        assert_eq!(back.cells, rec.cells);
        assert_eq!(back.division, rec.division);
        assert_eq!(back.edge_matrix, rec.edge_matrix);

        // trivial split from the identity division
        let id = NonNegMatrix::identity(2).unwrap();
        let a = adjacency_matrix(&g).unwrap();
        let triv = matrices_to_split(&g, &id, &a, SplitKind::Out).unwrap();
        assert!(are_isomorphic(&g, &triv.result).unwrap().is_some());

        // in-split with an empty cell: zero column in Em comes back as an
        // empty cell
        let p2 = InPartition::new(&g, "v", &cells(&[&["e", "g"], &[]])).unwrap();
        let rec2 = in_split(&g, &p2).unwrap();
        let back2 =
            matrices_to_split(&g, &rec2.division, &rec2.edge_matrix, SplitKind::In).unwrap();
        assert_eq!(back2.cells, rec2.cells);
        assert!(back2.cells[1].is_empty());

        // corrupted factorization reports the residual
        let mut bad = rec.edge_matrix.clone();
        bad.set(0, 0, 2u32.into());
        let err = matrices_to_split(&g, &rec.division, &bad, SplitKind::Out).unwrap_err();
        assert!(matches!(err, Error::FactorizationFailed(_)));
    }

    #[test]
    fn chain_for_two_step_script() {
        let script = two_step_script();
        let chain = connect_by_elementary(&script).unwrap();
        assert_eq!(chain.links.len(), 3);
        // G' is G with exactly one attached source feeding the middle vertex
        assert_eq!(chain.attached_source_ids.len(), 1);
        assert_eq!(chain.g_prime.vertex_count(), script.base.vertex_count() + 1);
        let src = chain
            .g_prime
            .vertex_index(&chain.attached_source_ids[0])
            .unwrap();
        assert!(chain.g_prime.in_edges(src).is_empty());
        let out: Vec<_> = chain.g_prime.out_edges(src).to_vec();
        assert_eq!(out.len(), 1);
        assert_eq!(chain.g_prime.vertex_id(chain.g_prime.dst(out[0])), "m");
        // every link verifies and the aligned certificate checks out
        assert!(verify_certificate(&chain.certificate).unwrap());
        assert_eq!(chain.certificate.len(), 3);
        // ends of the chain are the two branch graphs
        let (e2, f2, _) = iterated_balanced_in_split(&script).unwrap();
        assert!(chain.links[0].left.result.same_labeled(&e2));
        assert!(chain.links[2].right.result.same_labeled(&f2));
        // the interior chain graphs each carry exactly one source; the two
        // endpoint graphs carry none
        assert!(validate_graph(&chain.links[0].left.result).sources.is_empty());
        assert_eq!(validate_graph(&chain.links[0].right.result).sources.len(), 1);
        assert_eq!(validate_graph(&chain.links[1].left.result).sources.len(), 1);
        assert_eq!(validate_graph(&chain.links[1].right.result).sources.len(), 1);
        assert_eq!(validate_graph(&chain.links[2].left.result).sources.len(), 1);
        assert!(validate_graph(&chain.links[2].right.result).sources.is_empty());
    }

    #[test]
    fn chain_rejects_short_scripts() {
        let g = golden_mean();
        let script = SplitScript {
            base: g,
            steps: vec![ScriptStep {
                vertex: "v".into(),
                cells_e: cells(&[&["e"], &["g"]]),
                cells_f: cells(&[&["g"], &["e"]]),
            }],
        };
        assert!(connect_by_elementary(&script).is_err());
    }

    #[test]
    fn in_split_source_count_matches_empty_cells() {
        let g = golden_mean();
        let p = InPartition::new(&g, "v", &cells(&[&[], &["e", "g"], &[]])).unwrap();
        let rec = in_split(&g, &p).unwrap();
        assert!(!rec.result.has_sinks());
        assert_eq!(validate_graph(&rec.result).sources.len(), 2);
    }

    #[test]
    fn script_json_roundtrip() {
        let script = two_step_script();
        let s = script.to_json().unwrap();
        assert!(s.contains("\"cells_E\""));
        assert!(s.contains("\"cells_F\""));
        let back = SplitScript::from_json(&s).unwrap();
        assert_eq!(back.step_count(), 2);
        let (e2, _, _) = iterated_balanced_in_split(&back).unwrap();
        assert_eq!(e2.vertex_count(), 5);
    }
}
