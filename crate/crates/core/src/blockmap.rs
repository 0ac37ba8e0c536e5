//! Block maps with memory and anticipation between the finite paths of two
//! sink-free graphs.
//!
//! An `(l, c)`-block map sends paths of length `1 + l + c` of the source
//! graph to paths of length `1 + l` of the target, compatibly: consecutive
//! windows produce composable final edges. Infinite paths are represented
//! by finite prefixes throughout; every "for all infinite paths" statement
//! becomes an exhaustive check at an explicit depth which is recorded in
//! the reports.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    adjacency_matrix_ordered, are_isomorphic_with_cap, higher_block_graph,
    higher_block_graph_with_paths, paths_of_length, Graph, Path,
};
use crate::matrix::{verify_balanced_elementary, BeeTriple, NonNegMatrix};
use crate::moves::SplitHistory;

/// An `(l, c)`-block map: a total, compatible table from source paths of
/// length `1 + l + c` to target paths of length `1 + l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    source: Graph,
    target: Graph,
    memory: usize,
    anticipation: usize,
    table: BTreeMap<Path, Path>,
}

/// Outcome of an exhaustive sliding check at a fixed depth.
#[derive(Clone, Debug, Serialize)]
pub struct SlidingCheck {
    pub depth: usize,
    pub passed: bool,
    pub counterexample: Option<Vec<String>>,
}

/// Per-`k` outcome of the surjectivity and injectivity condition checks.
#[derive(Clone, Debug, Serialize)]
pub struct KReport {
    pub k: usize,
    pub surjective: bool,
    /// a target path with no preimage, when not surjective
    pub missing: Option<Vec<String>>,
    /// smallest `K <= K_max` validating the injectivity implication
    pub minimal_big_k: Option<usize>,
}

/// Results of the bijectivity-condition checks for `k = l ..= k_max`.
/// Verdicts only claim the tested range; exhausting the `K` bound is a
/// report state, not an error.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub memory: usize,
    pub anticipation: usize,
    pub k_max: usize,
    pub big_k_max: usize,
    pub per_k: Vec<KReport>,
}

impl ConditionReport {
    pub fn surjectivity_passes(&self) -> bool {
        self.per_k.iter().all(|r| r.surjective)
    }

    pub fn injectivity_passes(&self) -> bool {
        self.per_k.iter().all(|r| r.minimal_big_k.is_some())
    }

    pub fn bijectivity_passes(&self) -> bool {
        self.surjectivity_passes() && self.injectivity_passes()
    }
}

impl BlockMap {
    /// Build and validate a block map: the table must be total on the
    /// source paths of length `1 + l + c`, every image must be a target
    /// path of length `1 + l`, and compatibility is verified exhaustively
    /// over source paths of length `2 + l + c`.
    pub fn new(
        source: Graph,
        target: Graph,
        memory: usize,
        anticipation: usize,
        table: BTreeMap<Path, Path>,
    ) -> Result<BlockMap> {
        source.require_no_sinks()?;
        target.require_no_sinks()?;
        let w = 1 + memory + anticipation;
        let domain = paths_of_length(&source, w)?;
        for p in &domain {
            match table.get(p) {
                None => {
                    return Err(Error::BlockMapTable(format!(
                        "missing entry for path [{}]",
                        p.to_ids(&source).join(",")
                    )))
                }
                Some(q) => {
                    if q.len() != 1 + memory {
                        return Err(Error::BlockMapTable(format!(
                            "image of [{}] has length {}, expected {}",
                            p.to_ids(&source).join(","),
                            q.len(),
                            1 + memory
                        )));
                    }
                    // image must be a real target path
                    for win in q.edges().windows(2) {
                        if target.dst(win[0]) != target.src(win[1]) {
                            return Err(Error::BlockMapTable(format!(
                                "image of [{}] is not a path of the target",
                                p.to_ids(&source).join(",")
                            )));
                        }
                    }
                }
            }
        }
        if table.len() != domain.len() {
            return Err(Error::BlockMapTable(format!(
                "table has {} entries for {} source paths",
                table.len(),
                domain.len()
            )));
        }
        let bm = BlockMap {
            source,
            target,
            memory,
            anticipation,
            table,
        };
        // compatibility over windows of length 2 + l + c
        for p in paths_of_length(&bm.source, w + 1)? {
            let first = &bm.table[&p.window(0, w)];
            let second = &bm.table[&p.window(1, w + 1)];
            let a = first.edges()[memory];
            let b = second.edges()[memory];
            if bm.target.dst(a) != bm.target.src(b) {
                return Err(Error::BlockMapTable(format!(
                    "incompatible at path [{}]",
                    p.to_ids(&bm.source).join(",")
                )));
            }
        }
        Ok(bm)
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(
        source: Graph,
        target: Graph,
        memory: usize,
        anticipation: usize,
        table: BTreeMap<Path, Path>,
    ) -> BlockMap {
        BlockMap {
            source,
            target,
            memory,
            anticipation,
            table,
        }
    }

    /// The identity `(0, 0)`-block map on a sink-free graph.
    pub fn identity(g: &Graph) -> Result<BlockMap> {
        let table = (0..g.edge_count() as u32)
            .map(|e| (Path::new_unchecked(vec![e]), Path::new_unchecked(vec![e])))
            .collect();
        BlockMap::new(g.clone(), g.clone(), 0, 0, table)
    }

    pub fn source(&self) -> &Graph {
        &self.source
    }

    pub fn target(&self) -> &Graph {
        &self.target
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn anticipation(&self) -> usize {
        self.anticipation
    }

    /// Window length `1 + l + c` of the table.
    pub fn window_len(&self) -> usize {
        1 + self.memory + self.anticipation
    }

    pub fn table(&self) -> &BTreeMap<Path, Path> {
        &self.table
    }

    /// The extension to source paths of length `1 + l + c + i`: the image
    /// of the first window followed by the `l`-th symbol of each shifted
    /// window.
    pub fn extend(&self, i: usize) -> Result<BTreeMap<Path, Path>> {
        let w = self.window_len();
        let mut out = BTreeMap::new();
        for p in paths_of_length(&self.source, w + i)? {
            let img = self.apply_prefix(&p)?;
            out.insert(p, img);
        }
        Ok(out)
    }

    /// Apply the induced map to a prefix: a source path of length
    /// `>= 1 + l + c` maps to the target prefix of length `|x| - c`.
    pub fn apply_prefix(&self, x: &Path) -> Result<Path> {
        let w = self.window_len();
        if x.len() < w {
            return Err(Error::InvalidArgument(format!(
                "prefix of length {} is shorter than the window {}",
                x.len(),
                w
            )));
        }
        let lookup = |win: Path| -> Result<&Path> {
            self.table.get(&win).ok_or_else(|| {
                Error::BlockMapTable(format!(
                    "prefix [{}] does not run through the source graph",
                    win.to_ids(&self.source).join(",")
                ))
            })
        };
        let mut edges = lookup(x.window(0, w))?.edges().to_vec();
        for t in 1..=x.len() - w {
            let img = lookup(x.window(t, t + w))?;
            edges.push(img.edges()[self.memory]);
        }
        Ok(Path::new_unchecked(edges))
    }

    /// Exhaustively verify the `l`-sliding identity on every source path
    /// of the given depth: dropping `l + 1` leading edges of the image
    /// equals dropping `l` leading edges of the image of the shifted path.
    pub fn check_sliding(&self, depth: usize) -> Result<SlidingCheck> {
        let w = self.window_len();
        if depth < w + 1 {
            return Err(Error::InvalidArgument(format!(
                "sliding check needs depth >= {}",
                w + 1
            )));
        }
        let l = self.memory;
        for x in paths_of_length(&self.source, depth)? {
            let full = self.apply_prefix(&x)?;
            // the image must be a genuine target path before the shift
            // identity means anything
            let broken = full
                .edges()
                .windows(2)
                .any(|w| self.target.dst(w[0]) != self.target.src(w[1]));
            let shifted = self.apply_prefix(&x.window(1, x.len()))?;
            if broken || full.edges()[l + 1..] != shifted.edges()[l..shifted.len()] {
                return Ok(SlidingCheck {
                    depth,
                    passed: false,
                    counterexample: Some(x.to_ids(&self.source)),
                });
            }
        }
        Ok(SlidingCheck {
            depth,
            passed: true,
            counterexample: None,
        })
    }

    /// Check the surjectivity and injectivity conditions for every
    /// `k = l ..= k_max`, searching for the minimal witness `K <= K_max`
    /// for injectivity.
    pub fn check_conditions(&self, k_max: usize, big_k_max: usize) -> Result<ConditionReport> {
        if k_max < self.memory {
            return Err(Error::InvalidArgument(
                "k_max must be at least the memory".into(),
            ));
        }
        let l = self.memory;
        let c = self.anticipation;
        let mut per_k = Vec::new();
        for k in l..=k_max {
            // surjectivity: every target path of length 1 + k has a
            // preimage of length 1 + k + c
            let images: BTreeSet<Path> = self.extend(k - l)?.into_values().collect();
            let mut missing = None;
            for q in paths_of_length(&self.target, 1 + k)? {
                if !images.contains(&q) {
                    missing = Some(q.to_ids(&self.target));
                    break;
                }
            }

            // injectivity: smallest K with psi(x[0..=k+K]) = psi(x'[0..=k+K])
            // implying x[0..=k] = x'[0..=k]
            let mut minimal = None;
            let k_lo = (l + c).saturating_sub(k);
            for big_k in k_lo..=big_k_max {
                let mut groups: HashMap<Path, Path> = HashMap::new();
                let mut ok = true;
                for x in paths_of_length(&self.source, 1 + k + big_k)? {
                    let img = self.apply_prefix(&x)?;
                    let prefix = x.window(0, k + 1);
                    match groups.get(&img) {
                        None => {
                            groups.insert(img, prefix);
                        }
                        Some(p) if *p == prefix => {}
                        Some(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    minimal = Some(big_k);
                    break;
                }
            }

            per_k.push(KReport {
                k,
                surjective: missing.is_none(),
                missing,
                minimal_big_k: minimal,
            });
        }
        Ok(ConditionReport {
            memory: l,
            anticipation: c,
            k_max,
            big_k_max,
            per_k,
        })
    }

    /// True when the table itself is a bijection onto the target paths of
    /// length `1 + l` (only meaningful for `c = 0`).
    pub fn table_is_bijective(&self) -> Result<bool> {
        let values: BTreeSet<&Path> = self.table.values().collect();
        if values.len() != self.table.len() {
            return Ok(false);
        }
        let codomain = paths_of_length(&self.target, 1 + self.memory)?;
        Ok(codomain.len() == values.len() && codomain.iter().all(|q| values.contains(q)))
    }

    /// Invert a bijective `(l, 0)`-block map.
    pub fn inverse(&self) -> Result<BlockMap> {
        if self.anticipation != 0 {
            return Err(Error::InvalidArgument(
                "only (l, 0)-block maps invert by table transposition".into(),
            ));
        }
        if !self.table_is_bijective()? {
            return Err(Error::InvalidArgument("table is not bijective".into()));
        }
        let table = self
            .table
            .iter()
            .map(|(k, v)| (v.clone(), k.clone()))
            .collect();
        BlockMap::new(
            self.target.clone(),
            self.source.clone(),
            self.memory,
            0,
            table,
        )
    }

    /// Compose with a following block map (`self` first, then `next`);
    /// memory and anticipation add.
    pub fn compose(&self, next: &BlockMap) -> Result<BlockMap> {
        if !self.target.same_labeled(&next.source) {
            return Err(Error::InvalidArgument(
                "composition needs matching middle graphs".into(),
            ));
        }
        let l = self.memory + next.memory;
        let c = self.anticipation + next.anticipation;
        let mut table = BTreeMap::new();
        for x in paths_of_length(&self.source, 1 + l + c)? {
            let mid = self.apply_prefix(&x)?;
            let img = next.apply_prefix(&mid)?;
            table.insert(x, img);
        }
        BlockMap::new(self.source.clone(), next.target.clone(), l, c, table)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = BlockMapDoc {
            l: self.memory,
            c: self.anticipation,
            entries: self
                .table
                .iter()
                .map(|(k, v)| EntryDoc {
                    input: k.to_ids(&self.source),
                    out: v.to_ids(&self.target),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Load a block map table against explicit source and target graphs,
    /// re-running full validation.
    pub fn from_json(s: &str, source: &Graph, target: &Graph) -> Result<BlockMap> {
        let doc: BlockMapDoc = serde_json::from_str(s)?;
        let mut table = BTreeMap::new();
        for e in &doc.entries {
            let input: Vec<&str> = e.input.iter().map(String::as_str).collect();
            let out: Vec<&str> = e.out.iter().map(String::as_str).collect();
            table.insert(
                Path::from_edge_ids(source, &input)?,
                Path::from_edge_ids(target, &out)?,
            );
        }
        BlockMap::new(source.clone(), target.clone(), doc.l, doc.c, table)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    #[serde(rename = "in")]
    input: Vec<String>,
    out: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct BlockMapDoc {
    l: usize,
    c: usize,
    entries: Vec<EntryDoc>,
}

// ---------------------------------------------------------------------------
// Canonical higher-block map
// ---------------------------------------------------------------------------

/// The canonical `(0, n-1)`-block map from a graph to its `n`'th higher
/// block graph: a window of length `n` maps to the block-graph edge it
/// spells.
pub fn canonical_higher_block_map(g: &Graph, n: usize) -> Result<(Graph, BlockMap)> {
    let (h, edge_paths) = higher_block_graph_with_paths(g, n)?;
    let mut by_path: BTreeMap<Path, u32> = BTreeMap::new();
    for (e, p) in edge_paths.iter().enumerate() {
        by_path.insert(p.clone(), e as u32);
    }
    let table = paths_of_length(g, n)?
        .into_iter()
        .map(|p| {
            let e = by_path[&p];
            (p, Path::new_unchecked(vec![e]))
        })
        .collect();
    let bm = BlockMap::new(g.clone(), h.clone(), 0, n - 1, table)?;
    Ok((h, bm))
}

// ---------------------------------------------------------------------------
// The split-history witness
// ---------------------------------------------------------------------------

/// Base edge (in the script's base graph) of every edge of the final
/// branch graph, composed through the per-step copy maps.
fn base_edges_through(history: &SplitHistory, use_f: bool) -> Result<HashMap<String, String>> {
    let l = history.step_count();
    let top = if use_f {
        history.f_level(l)
    } else {
        history.e_level(l)
    };
    let mut out = HashMap::new();
    for e in 0..top.edge_count() as u32 {
        let mut id = top.edge_id(e).to_string();
        for step in history.steps.iter().rev() {
            let rec = if use_f { &step.f_record } else { &step.e_record };
            id = rec
                .base_of_edge(&id)
                .ok_or_else(|| Error::InternalConsistency(format!("no base edge for `{}`", id)))?
                .to_string();
        }
        out.insert(top.edge_id(e).to_string(), id);
    }
    Ok(out)
}

/// The constructive `(l, 0)`-block map from the E branch to the F branch
/// of an `l`-step balanced in-split history. The first edge of a window is
/// kept (the two branches share edge labels) and each later edge is the
/// unique F-branch edge with the same base edge attached at the required
/// vertex.
pub fn psi_from_history(history: &SplitHistory) -> Result<BlockMap> {
    let l = history.step_count();
    let e_top = history.e_level(l).clone();
    let f_top = history.f_level(l).clone();
    if l == 0 {
        return BlockMap::identity(&history.base);
    }

    let e_base = base_edges_through(history, false)?;
    let f_base = base_edges_through(history, true)?;

    // (base edge, source vertex) identifies an F-branch edge uniquely
    let mut f_lookup: HashMap<(String, u32), u32> = HashMap::new();
    for e in 0..f_top.edge_count() as u32 {
        let key = (f_base[f_top.edge_id(e)].clone(), f_top.src(e));
        if f_lookup.insert(key, e).is_some() {
            return Err(Error::InternalConsistency(
                "two F-branch edges share base edge and source".into(),
            ));
        }
    }

    let mut table: BTreeMap<Path, Path> = BTreeMap::new();
    for p in paths_of_length(&e_top, l + 1)? {
        let mut edges: Vec<u32> = Vec::with_capacity(l + 1);
        // identical first edge label
        let first = f_top
            .edge_index(e_top.edge_id(p.edges()[0]))
            .map_err(|_| Error::InternalConsistency("branch edge labels are not identified".into()))?;
        edges.push(first);
        for t in 1..=l {
            let prev = *edges.last().unwrap();
            let want_src = f_top.dst(prev);
            let base = &e_base[e_top.edge_id(p.edges()[t])];
            let next = *f_lookup.get(&(base.clone(), want_src)).ok_or_else(|| {
                Error::InternalConsistency(format!(
                    "no fiber partner for base edge `{}` at vertex `{}`",
                    base,
                    f_top.vertex_id(want_src)
                ))
            })?;
            edges.push(next);
        }
        table.insert(p, Path::new_unchecked(edges));
    }

    let bm = BlockMap::new(e_top, f_top, l, 0, table)?;
    if !bm.table_is_bijective()? {
        return Err(Error::InternalConsistency(
            "history witness table is not bijective".into(),
        ));
    }
    Ok(bm)
}

/// Check the intertwining of the history witness with the forgetful
/// projections: forgetting the last split of an image window equals
/// applying the previous-level witness to the forgotten window.
pub fn psi_intertwines(history: &SplitHistory) -> Result<bool> {
    let l = history.step_count();
    if l == 0 {
        return Ok(true);
    }
    let prev = SplitHistory {
        base: history.base.clone(),
        steps: history.steps[..l - 1].to_vec(),
    };
    let psi_l = psi_from_history(history)?;
    let psi_prev = psi_from_history(&prev)?;
    let e_top = history.e_level(l);
    let f_top = history.f_level(l);
    let e_prev = history.e_level(l - 1);
    let f_prev = history.f_level(l - 1);
    let last = history.steps.last().unwrap();

    let project = |g_top: &Graph, g_prev: &Graph, rec: &crate::moves::SplitRecord, p: &Path| {
        let ids: Vec<u32> = p
            .edges()
            .iter()
            .map(|&e| {
                let base = rec
                    .base_of_edge(g_top.edge_id(e))
                    .expect("copy map is total");
                g_prev.edge_index(base).expect("base edge exists")
            })
            .collect();
        Path::new_unchecked(ids)
    };

    for (x, y) in psi_l.table() {
        let qx = project(e_top, e_prev, &last.e_record, x);
        let qy = project(f_top, f_prev, &last.f_record, y);
        // the previous-level witness extends to windows of length l + 1
        let img = psi_prev.apply_prefix(&qx)?;
        if img != qy {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The (1,1)-block map of a verified triple
// ---------------------------------------------------------------------------

/// The fixed bijections of the triple construction, chosen canonically:
/// fibers are enumerated lexicographically and matched in order.
///
/// Edges of the two graphs decompose through an auxiliary layer graph
/// whose vertices index the inner dimension of the triple: an E-edge
/// `i -> i'` matches an (S, R_E)-path `i -> k -> i'`, an F-edge an
/// (S, R_F)-path, and an edge of the inner graph (the common product
/// `R_E S = R_F S`) matches both an (R_E, S)- and an (R_F, S)-path.
#[derive(Clone, Debug)]
pub struct TriplePairing {
    /// per E-edge: (inner vertex k, S-copy, R_E-copy)
    e_decomp: Vec<(usize, u64, u64)>,
    /// inner edge (k, k', t) -> (F-vertex j, R_F-copy, S-copy)
    g_rf: HashMap<(usize, usize, u64), (usize, u64, u64)>,
    /// (R_E-copy k -> i, S-copy i -> k') -> inner edge index t over (k, k')
    g_from_re: HashMap<(usize, usize, usize, u64, u64), u64>,
    /// (S-copy j -> k, R_F-copy k -> j') -> F-edge
    f_from_path: HashMap<(usize, usize, usize, u64, u64), u32>,
}

fn as_u64(m: &NonNegMatrix, i: usize, j: usize) -> Result<u64> {
    m.get(i, j)
        .try_into()
        .map_err(|_| Error::InvalidArgument("matrix entry too large for pairing".into()))
}

impl TriplePairing {
    /// Build the canonical pairing for a verified triple between `e` and
    /// `f` (vertex orders aligned with the triple's indices).
    pub fn canonical(e: &Graph, f: &Graph, t: &BeeTriple) -> Result<TriplePairing> {
        let n = e.vertex_count();
        if f.vertex_count() != n || t.s.rows() != n {
            return Err(Error::DimensionMismatch(
                "pairing needs identified vertex sets matching the triple".into(),
            ));
        }
        let m = t.s.cols();
        let inner = t.r_a.mul(&t.s)?;

        // decompose the edges of a graph through (S, R)-paths
        let decomp = |g: &Graph, r: &NonNegMatrix| -> Result<Vec<(usize, u64, u64)>> {
            let mut out = vec![(0usize, 0u64, 0u64); g.edge_count()];
            // fibers in id order per vertex pair
            let mut fibers: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
            for edge in 0..g.edge_count() as u32 {
                fibers
                    .entry((g.src(edge), g.dst(edge)))
                    .or_default()
                    .push(edge);
            }
            for ((i, ip), edges) in fibers {
                let mut elems = Vec::new();
                for k in 0..m {
                    let s_count = as_u64(&t.s, i as usize, k)?;
                    let r_count = as_u64(r, k, ip as usize)?;
                    for s_idx in 0..s_count {
                        for r_idx in 0..r_count {
                            elems.push((k, s_idx, r_idx));
                        }
                    }
                }
                if elems.len() != edges.len() {
                    return Err(Error::InternalConsistency(format!(
                        "fiber ({}, {}) has {} edges but {} factor paths",
                        i,
                        ip,
                        edges.len(),
                        elems.len()
                    )));
                }
                for (edge, elem) in edges.into_iter().zip(elems) {
                    out[edge as usize] = elem;
                }
            }
            Ok(out)
        };
        let e_decomp = decomp(e, &t.r_a)?;
        let f_decomp = decomp(f, &t.r_b)?;

        // inner edges against (R, S)-paths, for both R sides
        let mut g_rf = HashMap::new();
        let mut g_from_re = HashMap::new();
        for k in 0..m {
            for kp in 0..m {
                let count = as_u64(&inner, k, kp)?;
                let mut re_elems = Vec::new();
                let mut rf_elems = Vec::new();
                for v in 0..n {
                    let ra_count = as_u64(&t.r_a, k, v)?;
                    let s_count = as_u64(&t.s, v, kp)?;
                    for r_idx in 0..ra_count {
                        for s_idx in 0..s_count {
                            re_elems.push((v, r_idx, s_idx));
                        }
                    }
                    let rb_count = as_u64(&t.r_b, k, v)?;
                    for r_idx in 0..rb_count {
                        for s_idx in 0..s_count {
                            rf_elems.push((v, r_idx, s_idx));
                        }
                    }
                }
                if re_elems.len() != count as usize || rf_elems.len() != count as usize {
                    return Err(Error::InternalConsistency(
                        "inner fiber sizes disagree with the common product".into(),
                    ));
                }
                for (tdx, elem) in re_elems.into_iter().enumerate() {
                    g_from_re.insert((k, kp, elem.0, elem.1, elem.2), tdx as u64);
                }
                for (tdx, elem) in rf_elems.into_iter().enumerate() {
                    g_rf.insert((k, kp, tdx as u64), elem);
                }
            }
        }

        // invert the F decomposition: (j, j', k, s_idx, r_idx) -> edge
        let mut f_from_path = HashMap::new();
        for edge in 0..f.edge_count() as u32 {
            let (k, s_idx, r_idx) = f_decomp[edge as usize];
            let j = f.src(edge) as usize;
            let jp = f.dst(edge) as usize;
            f_from_path.insert((j, jp, k, s_idx, r_idx), edge);
        }

        Ok(TriplePairing {
            e_decomp,
            g_rf,
            g_from_re,
            f_from_path,
        })
    }
}

/// The `(1, 1)`-block map `E^3 -> F^2` of a verified balanced elementary
/// equivalence between the adjacency matrices of `e` and `f`: each window
/// factors through the auxiliary layer graph and is reassembled on the
/// other side with the paired copies.
pub fn block_map_from_triple(
    e: &Graph,
    f: &Graph,
    t: &BeeTriple,
    pairing: &TriplePairing,
) -> Result<BlockMap> {
    let order_e: Vec<String> = e.vertex_ids().map(String::from).collect();
    let order_f: Vec<String> = f.vertex_ids().map(String::from).collect();
    let a_e = adjacency_matrix_ordered(e, &order_e)?;
    let a_f = adjacency_matrix_ordered(f, &order_f)?;
    if !verify_balanced_elementary(&a_e, &a_f, t)? {
        return Err(Error::InvalidArgument(
            "the triple does not verify between the two adjacency matrices".into(),
        ));
    }

    let mut table: BTreeMap<Path, Path> = BTreeMap::new();
    for x in paths_of_length(e, 3)? {
        let (x0, x1, x2) = (x.edges()[0], x.edges()[1], x.edges()[2]);
        let (k0, s0, r0) = pairing.e_decomp[x0 as usize];
        let (k1, s1, r1) = pairing.e_decomp[x1 as usize];
        let (k2, s2, _r2) = pairing.e_decomp[x2 as usize];
        let i0 = e.src(x0) as usize;
        let i1 = e.src(x1) as usize;
        let i2 = e.src(x2) as usize;

        // middle pairs are (R_E, S)-paths, hence inner edges
        let g0 = *pairing
            .g_from_re
            .get(&(k0, k1, i1, r0, s1))
            .ok_or_else(|| Error::InternalConsistency("unpaired inner path".into()))?;
        let g1 = *pairing
            .g_from_re
            .get(&(k1, k2, i2, r1, s2))
            .ok_or_else(|| Error::InternalConsistency("unpaired inner path".into()))?;

        // read the same inner edges as (R_F, S)-paths
        let (j1, rho0, tau0) = pairing.g_rf[&(k0, k1, g0)];
        let (j2, rho1, _tau1) = pairing.g_rf[&(k1, k2, g1)];

        // reassemble the F-side window
        let y = *pairing
            .f_from_path
            .get(&(j1, j2, k1, tau0, rho1))
            .ok_or_else(|| Error::InternalConsistency("unpaired F path".into()))?;
        let y0 = *pairing
            .f_from_path
            .get(&(i0, j1, k0, s0, rho0))
            .ok_or_else(|| Error::InternalConsistency("unpaired F path".into()))?;
        table.insert(x, Path::new_unchecked(vec![y0, y]));
    }

    BlockMap::new(e.clone(), f.clone(), 1, 1, table)
}

// ---------------------------------------------------------------------------
// Continuity reduction
// ---------------------------------------------------------------------------

/// Trade anticipation for a higher block presentation: an `(l, c)`-block
/// map with `c >= 1` becomes an `(l, 0)`-block map out of the
/// `(c + 1)`-block graph of the source. For `c = 0` the map is returned
/// unchanged.
pub fn reduce_continuity(bm: &BlockMap) -> Result<(Graph, BlockMap)> {
    let c = bm.anticipation();
    if c == 0 {
        return Ok((bm.source().clone(), bm.clone()));
    }
    let l = bm.memory();
    let (ebar, edge_paths) = higher_block_graph_with_paths(bm.source(), c + 1)?;
    let mut table = BTreeMap::new();
    for q in paths_of_length(&ebar, 1 + l)? {
        // decode the block-graph path back to a source path of length
        // 1 + l + c via window overlap
        let mut edges: Vec<u32> = edge_paths[q.edges()[0] as usize].edges().to_vec();
        for t in 1..q.len() {
            let w = &edge_paths[q.edges()[t] as usize];
            edges.push(*w.edges().last().unwrap());
        }
        let x = Path::new_unchecked(edges);
        let img = bm.table()[&x].clone();
        table.insert(q, img);
    }
    let reduced = BlockMap::new(ebar.clone(), bm.target().clone(), l, 0, table)?;
    Ok((ebar, reduced))
}

// ---------------------------------------------------------------------------
// Decomposing an eventual conjugacy into splits
// ---------------------------------------------------------------------------

/// One in-split rung of the recovered ladder.
#[derive(Clone, Debug, Serialize)]
pub struct LadderRung {
    pub division: NonNegMatrix,
    pub e_edge_matrix: NonNegMatrix,
    pub f_edge_matrix: NonNegMatrix,
    /// `(Em_E, D^t, Em_F)`; conditions (i) and (ii) hold at every rung,
    /// and (iii) exactly when the rung sits over a common base
    pub triple: BeeTriple,
    pub full_triple: bool,
}

/// One out-split rung of the ladder connecting a graph to its higher block
/// presentation.
#[derive(Clone, Debug, Serialize)]
pub struct OutRung {
    pub division: NonNegMatrix,
    pub edge_matrix: NonNegMatrix,
}

/// The ladders recovered from a mutually inverse pair of block maps.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub base: Graph,
    pub e_ladder: Vec<Graph>,
    pub f_ladder: Vec<Graph>,
    pub rungs: Vec<LadderRung>,
    pub e_out_ladder: Vec<Graph>,
    pub f_out_ladder: Vec<Graph>,
    pub e_out_rungs: Vec<OutRung>,
    pub f_out_rungs: Vec<OutRung>,
    pub e_top_matches_higher_block: bool,
    pub f_top_matches_higher_block: bool,
    pub roundtrip_depth: usize,
}

/// A realizable window pair, already rendered as ids: an empty window is
/// the vertex marker `@v`, a nonempty one the joined edge ids.
type Window = (String, String);

fn window_id(w: &Window) -> String {
    format!("{}|{}", w.0, w.1)
}

/// Build a graph from realizable window pairs: vertices from the short
/// windows, edges from the long ones with overlap incidence.
fn window_graph(
    verts: &BTreeSet<Window>,
    edges: &BTreeSet<(Window, Window, Window)>,
) -> Result<Graph> {
    let vertex_ids: Vec<String> = verts.iter().map(window_id).collect();
    let mut edge_docs = Vec::new();
    for (eid, src, dst) in edges {
        edge_docs.push((window_id(eid), window_id(src), window_id(dst)));
    }
    Graph::new(vertex_ids, edge_docs)
}

/// Verify `split` as a (composite) in-split of `base` under the vertex
/// projection `q`, with explicit orderings; rows of copies must agree and
/// form the edge matrix.
fn verify_in_rung_ordered(
    base: &Graph,
    split: &Graph,
    q: &HashMap<String, String>,
    base_order: &[String],
    split_order: &[String],
) -> Result<(NonNegMatrix, NonNegMatrix)> {
    let nb = base.vertex_count();
    let ns = split.vertex_count();
    let a_base = adjacency_matrix_ordered(base, base_order)?;
    let a_split = adjacency_matrix_ordered(split, split_order)?;

    let mut division = NonNegMatrix::zero(nb, ns)?;
    for (col, sid) in split_order.iter().enumerate() {
        let bid = q
            .get(sid)
            .ok_or_else(|| Error::InternalConsistency(format!("no projection for `{}`", sid)))?;
        let row = base_order
            .iter()
            .position(|x| x == bid)
            .ok_or_else(|| Error::UnknownVertex(bid.clone()))?;
        division.set(row, col, 1u32.into());
    }

    let mut em = NonNegMatrix::zero(nb, ns)?;
    let mut seen = vec![false; nb];
    for (row_s, sid) in split_order.iter().enumerate() {
        let bid = &q[sid];
        let row_b = base_order.iter().position(|x| x == bid).unwrap();
        if seen[row_b] {
            for col in 0..ns {
                if em.get(row_b, col) != a_split.get(row_s, col) {
                    return Err(Error::InternalConsistency(format!(
                        "copies of `{}` have different out-rows; not an in-split",
                        bid
                    )));
                }
            }
        } else {
            for col in 0..ns {
                em.set(row_b, col, a_split.get(row_s, col).clone());
            }
            seen[row_b] = true;
        }
    }

    let dt = division.transpose();
    if em.mul(&dt)? != a_base || dt.mul(&em)? != a_split {
        return Err(Error::InternalConsistency(
            "in-split rung factorization failed".into(),
        ));
    }
    Ok((division, em))
}

/// Out-split analog of [`verify_in_rung_ordered`]: copies of the same base
/// vertex must receive identical in-columns.
fn verify_out_rung(
    base: &Graph,
    split: &Graph,
    q: &HashMap<String, String>,
) -> Result<(NonNegMatrix, NonNegMatrix)> {
    let nb = base.vertex_count();
    let ns = split.vertex_count();
    let base_order: Vec<String> = base.vertex_ids().map(String::from).collect();
    let split_order: Vec<String> = split.vertex_ids().map(String::from).collect();
    let a_base = adjacency_matrix_ordered(base, &base_order)?;
    let a_split = adjacency_matrix_ordered(split, &split_order)?;

    let mut division = NonNegMatrix::zero(nb, ns)?;
    for (col, sid) in split_order.iter().enumerate() {
        let bid = q
            .get(sid)
            .ok_or_else(|| Error::InternalConsistency(format!("no projection for `{}`", sid)))?;
        let row = base_order
            .iter()
            .position(|x| x == bid)
            .ok_or_else(|| Error::UnknownVertex(bid.clone()))?;
        division.set(row, col, 1u32.into());
    }

    let mut em = NonNegMatrix::zero(ns, nb)?;
    let mut seen = vec![false; nb];
    for (col_s, sid) in split_order.iter().enumerate() {
        let bid = &q[sid];
        let col_b = base_order.iter().position(|x| x == bid).unwrap();
        if seen[col_b] {
            for row in 0..ns {
                if em.get(row, col_b) != a_split.get(row, col_s) {
                    return Err(Error::InternalConsistency(format!(
                        "copies of `{}` have different in-columns; not an out-split",
                        bid
                    )));
                }
            }
        } else {
            for row in 0..ns {
                em.set(row, col_b, a_split.get(row, col_s).clone());
            }
            seen[col_b] = true;
        }
    }

    if division.mul(&em)? != a_base || em.mul(&division)? != a_split {
        return Err(Error::InternalConsistency(
            "out-split rung factorization failed".into(),
        ));
    }
    Ok((division, em))
}

/// Pairing of two ladder levels over the base: vertices are matched fiber
/// by fiber down the projections, ordering fibers consistently.
fn rung_pairing(
    ge: &Graph,
    gf: &Graph,
    e_proj: &[HashMap<String, String>],
    f_proj: &[HashMap<String, String>],
    base: &Graph,
) -> Result<Vec<(String, String)>> {
    let project = |projs: &[HashMap<String, String>], vid: &str| -> String {
        let mut id = vid.to_string();
        for p in projs.iter().rev() {
            id = p[&id].clone();
        }
        id
    };
    let mut fibers_e: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for vid in ge.vertex_ids() {
        fibers_e
            .entry(project(e_proj, vid))
            .or_default()
            .push(vid.to_string());
    }
    let mut fibers_f: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for vid in gf.vertex_ids() {
        fibers_f
            .entry(project(f_proj, vid))
            .or_default()
            .push(vid.to_string());
    }
    let mut out = Vec::new();
    for b in base.vertex_ids() {
        let fe = fibers_e.get(b).cloned().unwrap_or_default();
        let ff = fibers_f.get(b).cloned().unwrap_or_default();
        if fe.len() != ff.len() {
            return Err(Error::InternalConsistency(format!(
                "ladder fibers over `{}` have different sizes",
                b
            )));
        }
        out.extend(fe.into_iter().zip(ff));
    }
    Ok(out)
}

/// Recover, from a mutually inverse pair of `(l, c)`-block maps, the base
/// graph of realizable window pairs, the balanced in-split ladders
/// climbing back to the two graphs, and the out-split ladders connecting
/// each graph's higher block presentation to its ladder top.
///
/// Ladder vertices are pairs of windows of length `j + 2c` (a length-zero
/// window is a vertex) and ladder edges pairs of windows one longer, with
/// overlap incidence. The top of the out-split ladder is isomorphic to the
/// `(l + 2c + 1)`'th higher block graph.
pub fn decompose_eventual_conjugacy(h: &BlockMap, h_inv: &BlockMap) -> Result<Decomposition> {
    if !h.source().same_labeled(h_inv.target()) || !h.target().same_labeled(h_inv.source()) {
        return Err(Error::InvalidArgument(
            "the two maps must connect the same pair of graphs".into(),
        ));
    }
    if h.memory() != h_inv.memory() || h.anticipation() != h_inv.anticipation() {
        return Err(Error::InvalidArgument(
            "normalize both maps to common memory and continuity first".into(),
        ));
    }
    let l = h.memory();
    let c = h.anticipation();
    let e = h.source().clone();
    let f = h.target().clone();

    // mutual inverse check on prefixes
    let depth = l + 2 * c + 3;
    for x in paths_of_length(&e, depth)? {
        let y = h.apply_prefix(&x)?;
        let back = h_inv.apply_prefix(&y)?;
        if back.edges() != &x.edges()[..back.len()] {
            return Err(Error::InvalidArgument(format!(
                "maps are not mutually inverse at [{}]",
                x.to_ids(&e).join(",")
            )));
        }
    }
    for y in paths_of_length(&f, depth)? {
        let x = h_inv.apply_prefix(&y)?;
        let back = h.apply_prefix(&x)?;
        if back.edges() != &y.edges()[..back.len()] {
            return Err(Error::InvalidArgument(format!(
                "maps are not mutually inverse at [{}]",
                y.to_ids(&f).join(",")
            )));
        }
    }
    if !h.check_sliding(depth)?.passed || !h_inv.check_sliding(depth)?.passed {
        return Err(Error::InvalidArgument(
            "sliding identity fails at the verification depth".into(),
        ));
    }

    // realizable windows come from prefixes long enough to determine the
    // image up to position l + 2c + 1
    let edge_depth = l + 3 * c + 2;
    // id of the window [a, b) along a path; empty windows collapse to the
    // vertex they sit at
    let win = |g: &Graph, p: &Path, a: usize, b: usize| -> String {
        if a == b {
            let v = if a < p.len() {
                g.src(p.edges()[a])
            } else {
                g.dst(p.edges()[a - 1])
            };
            format!("@{}", g.vertex_id(v))
        } else {
            p.window(a, b).to_ids(g).join(",")
        }
    };

    // in-split ladders of window graphs; level j extends one side's past
    let mut e_ladder: Vec<Graph> = Vec::new();
    let mut f_ladder: Vec<Graph> = Vec::new();
    let mut e_proj: Vec<HashMap<String, String>> = Vec::new(); // level j -> j-1
    let mut f_proj: Vec<HashMap<String, String>> = Vec::new();

    for j in 0..=l {
        let mut verts: BTreeSet<Window> = BTreeSet::new();
        let mut edges: BTreeSet<(Window, Window, Window)> = BTreeSet::new();
        let mut verts_f: BTreeSet<Window> = BTreeSet::new();
        let mut edges_f: BTreeSet<(Window, Window, Window)> = BTreeSet::new();
        let mut pe: HashMap<String, String> = HashMap::new();
        let mut pf: HashMap<String, String> = HashMap::new();
        for x in paths_of_length(&e, edge_depth)? {
            let y = h.apply_prefix(&x)?; // length edge_depth - c >= l + 2c + 2

            // E side: x-window extended j steps into the past
            let src = (win(&e, &x, l - j, l + 2 * c), win(&f, &y, l, l + 2 * c));
            let dst = (
                win(&e, &x, l - j + 1, l + 2 * c + 1),
                win(&f, &y, l + 1, l + 2 * c + 1),
            );
            let eid = (
                win(&e, &x, l - j, l + 2 * c + 1),
                win(&f, &y, l, l + 2 * c + 1),
            );
            if j > 0 {
                pe.insert(
                    window_id(&src),
                    window_id(&(win(&e, &x, l - j + 1, l + 2 * c), src.1.clone())),
                );
                pe.insert(
                    window_id(&dst),
                    window_id(&(win(&e, &x, l - j + 2, l + 2 * c + 1), dst.1.clone())),
                );
            }
            verts.insert(src.clone());
            verts.insert(dst.clone());
            edges.insert((eid, src, dst));

            // F side: y-window extended instead
            let src = (win(&e, &x, l, l + 2 * c), win(&f, &y, l - j, l + 2 * c));
            let dst = (
                win(&e, &x, l + 1, l + 2 * c + 1),
                win(&f, &y, l - j + 1, l + 2 * c + 1),
            );
            let eid = (
                win(&e, &x, l, l + 2 * c + 1),
                win(&f, &y, l - j, l + 2 * c + 1),
            );
            if j > 0 {
                pf.insert(
                    window_id(&src),
                    window_id(&(src.0.clone(), win(&f, &y, l - j + 1, l + 2 * c))),
                );
                pf.insert(
                    window_id(&dst),
                    window_id(&(dst.0.clone(), win(&f, &y, l - j + 2, l + 2 * c + 1))),
                );
            }
            verts_f.insert(src.clone());
            verts_f.insert(dst.clone());
            edges_f.insert((eid, src, dst));
        }
        e_ladder.push(window_graph(&verts, &edges)?);
        f_ladder.push(window_graph(&verts_f, &edges_f)?);
        if j > 0 {
            e_proj.push(pe);
            f_proj.push(pf);
        }
    }

    let base = e_ladder[0].clone();
    if !base.same_labeled(&f_ladder[0]) {
        return Err(Error::InternalConsistency(
            "the two ladders disagree at level zero".into(),
        ));
    }

    // verify each rung as a balanced (composite) in-split
    let mut rungs = Vec::new();
    for j in 1..=l {
        let pe = &e_proj[j - 1];
        let pf = &f_proj[j - 1];
        let mut fibers_e: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for vid in e_ladder[j].vertex_ids() {
            fibers_e
                .entry(pe[vid].clone())
                .or_default()
                .push(vid.to_string());
        }
        let mut fibers_f: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for vid in f_ladder[j].vertex_ids() {
            fibers_f
                .entry(pf[vid].clone())
                .or_default()
                .push(vid.to_string());
        }

        // level-(j-1) pairing: at j = 1 both levels are the base graph
        let pairing_prev: Vec<(String, String)> = if j == 1 {
            base.vertex_ids()
                .map(|v| (v.to_string(), v.to_string()))
                .collect()
        } else {
            rung_pairing(
                &e_ladder[j - 1],
                &f_ladder[j - 1],
                &e_proj[..j - 1],
                &f_proj[..j - 1],
                &base,
            )?
        };
        let mut split_order_e = Vec::new();
        let mut split_order_f = Vec::new();
        for (ue, uf) in &pairing_prev {
            let fe = fibers_e.get(ue).cloned().unwrap_or_default();
            let ff = fibers_f.get(uf).cloned().unwrap_or_default();
            if fe.len() != ff.len() {
                return Err(Error::InternalConsistency(format!(
                    "fiber sizes over `{}` and `{}` differ; the ladder is not balanced",
                    ue, uf
                )));
            }
            split_order_e.extend(fe);
            split_order_f.extend(ff);
        }

        let order_prev_e: Vec<String> = pairing_prev.iter().map(|(a, _)| a.clone()).collect();
        let order_prev_f: Vec<String> = pairing_prev.iter().map(|(_, b)| b.clone()).collect();
        let (d_e, em_e) = verify_in_rung_ordered(
            &e_ladder[j - 1],
            &e_ladder[j],
            pe,
            &order_prev_e,
            &split_order_e,
        )?;
        let (d_f, em_f) = verify_in_rung_ordered(
            &f_ladder[j - 1],
            &f_ladder[j],
            pf,
            &order_prev_f,
            &split_order_f,
        )?;
        if d_e != d_f {
            return Err(Error::InternalConsistency(format!(
                "rung {} division matrices differ under the pairing",
                j
            )));
        }
        let triple = BeeTriple::new(em_e.clone(), d_e.transpose(), em_f.clone())?;
        let full_triple = {
            let lhs = triple.r_a.mul(&triple.s)?;
            let rhs = triple.r_b.mul(&triple.s)?;
            lhs == rhs
        };
        rungs.push(LadderRung {
            division: d_e,
            e_edge_matrix: em_e,
            f_edge_matrix: em_f,
            triple,
            full_triple,
        });
    }

    // out-split ladders connecting the graphs to the ladder tops
    let mut e_out_ladder = Vec::new();
    let mut f_out_ladder = Vec::new();
    let mut e_out_proj: Vec<HashMap<String, String>> = Vec::new();
    let mut f_out_proj: Vec<HashMap<String, String>> = Vec::new();
    for i in 0..=2 * c {
        let mut verts: BTreeSet<Window> = BTreeSet::new();
        let mut edges: BTreeSet<(Window, Window, Window)> = BTreeSet::new();
        let mut verts_f: BTreeSet<Window> = BTreeSet::new();
        let mut edges_f: BTreeSet<(Window, Window, Window)> = BTreeSet::new();
        let mut pe: HashMap<String, String> = HashMap::new();
        let mut pf: HashMap<String, String> = HashMap::new();
        for x in paths_of_length(&e, edge_depth)? {
            let y = h.apply_prefix(&x)?;
            let src = (win(&e, &x, 0, l + 2 * c), win(&f, &y, l, l + i));
            let dst = (
                win(&e, &x, 1, l + 2 * c + 1),
                win(&f, &y, l + 1, l + i + 1),
            );
            let eid = (win(&e, &x, 0, l + 2 * c + 1), win(&f, &y, l, l + i + 1));
            if i > 0 {
                pe.insert(
                    window_id(&src),
                    window_id(&(src.0.clone(), win(&f, &y, l, l + i - 1))),
                );
                pe.insert(
                    window_id(&dst),
                    window_id(&(dst.0.clone(), win(&f, &y, l + 1, l + i))),
                );
            }
            verts.insert(src.clone());
            verts.insert(dst.clone());
            edges.insert((eid, src, dst));
        }
        for y in paths_of_length(&f, edge_depth)? {
            let x = h_inv.apply_prefix(&y)?;
            let src = (win(&f, &y, 0, l + 2 * c), win(&e, &x, l, l + i));
            let dst = (
                win(&f, &y, 1, l + 2 * c + 1),
                win(&e, &x, l + 1, l + i + 1),
            );
            let eid = (win(&f, &y, 0, l + 2 * c + 1), win(&e, &x, l, l + i + 1));
            if i > 0 {
                pf.insert(
                    window_id(&src),
                    window_id(&(src.0.clone(), win(&e, &x, l, l + i - 1))),
                );
                pf.insert(
                    window_id(&dst),
                    window_id(&(dst.0.clone(), win(&e, &x, l + 1, l + i))),
                );
            }
            verts_f.insert(src.clone());
            verts_f.insert(dst.clone());
            edges_f.insert((eid, src, dst));
        }
        e_out_ladder.push(window_graph(&verts, &edges)?);
        f_out_ladder.push(window_graph(&verts_f, &edges_f)?);
        if i > 0 {
            e_out_proj.push(pe);
            f_out_proj.push(pf);
        }
    }

    let mut e_out_rungs = Vec::new();
    let mut f_out_rungs = Vec::new();
    for i in 1..=2 * c {
        let (d, em) = verify_out_rung(&e_out_ladder[i - 1], &e_out_ladder[i], &e_out_proj[i - 1])?;
        e_out_rungs.push(OutRung {
            division: d,
            edge_matrix: em,
        });
        let (d, em) = verify_out_rung(&f_out_ladder[i - 1], &f_out_ladder[i], &f_out_proj[i - 1])?;
        f_out_rungs.push(OutRung {
            division: d,
            edge_matrix: em,
        });
    }

    // the first out-ladder graph is the higher block presentation
    let hb_order = l + 2 * c + 1;
    let e_hb = higher_block_graph(&e, hb_order)?;
    let f_hb = higher_block_graph(&f, hb_order)?;
    let cap_e = e_hb.vertex_count().max(e_out_ladder[0].vertex_count());
    let cap_f = f_hb.vertex_count().max(f_out_ladder[0].vertex_count());
    let e_top_matches_higher_block =
        are_isomorphic_with_cap(&e_out_ladder[0], &e_hb, cap_e)?.is_some();
    let f_top_matches_higher_block =
        are_isomorphic_with_cap(&f_out_ladder[0], &f_hb, cap_f)?.is_some();

    Ok(Decomposition {
        base,
        e_ladder,
        f_ladder,
        rungs,
        e_out_ladder,
        f_out_ladder,
        e_out_rungs,
        f_out_rungs,
        e_top_matches_higher_block,
        f_top_matches_higher_block,
        roundtrip_depth: depth,
    })
}
