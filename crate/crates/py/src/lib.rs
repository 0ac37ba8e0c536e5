//! Python bindings: the graph model, exact matrices, moves, block maps and
//! witness pipelines, exposed as an in-process extension module.
//!
//! Complex reports cross the boundary as JSON strings; graphs, matrices,
//! triples, certificates, scripts, block maps and witnesses are first-class
//! classes.

use num_bigint::{BigInt, BigUint};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use evconj_core::blockmap as bm;
use evconj_core::equivalence as eq;
use evconj_core::graph as gr;
use evconj_core::matrix as mx;
use evconj_core::moves as mv;

fn err(e: evconj_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// A finite directed multigraph with string vertex and edge ids.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: gr::Graph,
}

#[pymethods]
impl Graph {
    /// Build from vertex ids and (edge id, src, dst) triples.
    #[new]
    fn new(vertices: Vec<String>, edges: Vec<(String, String, String)>) -> PyResult<Self> {
        Ok(Graph {
            inner: gr::Graph::new(vertices, edges).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Graph {
            inner: gr::Graph::from_json(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn dot(&self) -> String {
        gr::to_dot(&self.inner)
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn vertex_ids(&self) -> Vec<String> {
        self.inner.vertex_ids().map(String::from).collect()
    }

    fn edges(&self) -> Vec<(String, String, String)> {
        self.inner.edge_list()
    }

    fn sinks(&self) -> Vec<String> {
        self.inner
            .sinks()
            .iter()
            .map(|&v| self.inner.vertex_id(v).to_string())
            .collect()
    }

    fn sources(&self) -> Vec<String> {
        self.inner
            .sources()
            .iter()
            .map(|&v| self.inner.vertex_id(v).to_string())
            .collect()
    }

    /// Validation report as a JSON string.
    fn validate_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&gr::validate_graph(&self.inner)).map_err(json_err)
    }

    fn paths_of_length(&self, n: usize) -> PyResult<Vec<Vec<String>>> {
        Ok(gr::paths_of_length(&self.inner, n)
            .map_err(err)?
            .iter()
            .map(|p| p.to_ids(&self.inner))
            .collect())
    }

    fn higher_block(&self, n: usize) -> PyResult<Graph> {
        Ok(Graph {
            inner: gr::higher_block_graph(&self.inner, n).map_err(err)?,
        })
    }

    #[pyo3(signature = (order=None))]
    fn adjacency(&self, order: Option<Vec<String>>) -> PyResult<Matrix> {
        let a = match order {
            Some(o) => gr::adjacency_matrix_ordered(&self.inner, &o).map_err(err)?,
            None => gr::adjacency_matrix(&self.inner).map_err(err)?,
        };
        Ok(Matrix { inner: a })
    }

    /// A vertex bijection preserving edge multiplicities, or None.
    fn isomorphism_to(&self, other: &Graph) -> PyResult<Option<Vec<(String, String)>>> {
        Ok(gr::are_isomorphic(&self.inner, &other.inner)
            .map_err(err)?
            .map(|b| b.forward))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({} vertices, {} edges)",
            self.inner.vertex_count(),
            self.inner.edge_count()
        )
    }
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// An exact nonnegative integer matrix.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Matrix {
    inner: mx::NonNegMatrix,
}

#[pymethods]
impl Matrix {
    #[new]
    fn new(rows: Vec<Vec<BigUint>>) -> PyResult<Self> {
        Ok(Matrix {
            inner: mx::NonNegMatrix::from_biguint_rows(rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> PyResult<Self> {
        Ok(Matrix {
            inner: mx::NonNegMatrix::identity(n).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Matrix {
            inner: serde_json::from_str(s).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(json_err)
    }

    fn rows(&self) -> usize {
        self.inner.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<BigUint> {
        if i >= self.inner.rows() || j >= self.inner.cols() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(i, j).clone())
    }

    fn entries(&self) -> Vec<Vec<BigUint>> {
        (0..self.inner.rows())
            .map(|i| (0..self.inner.cols()).map(|j| self.inner.get(i, j).clone()).collect())
            .collect()
    }

    fn transpose(&self) -> Matrix {
        Matrix {
            inner: self.inner.transpose(),
        }
    }

    fn mul(&self, other: &Matrix) -> PyResult<Matrix> {
        Ok(Matrix {
            inner: self.inner.mul(&other.inner).map_err(err)?,
        })
    }

    fn pow(&self, e: usize) -> PyResult<Matrix> {
        Ok(Matrix {
            inner: self.inner.pow(e).map_err(err)?,
        })
    }

    fn determinant(&self) -> PyResult<BigInt> {
        self.inner.determinant().map_err(err)
    }

    fn is_division(&self) -> bool {
        mx::is_division_matrix(&self.inner)
    }

    fn is_amalgamation(&self) -> bool {
        mx::is_amalgamation_matrix(&self.inner)
    }

    fn to_graph(&self) -> PyResult<Graph> {
        Ok(Graph {
            inner: gr::graph_from_matrix(&self.inner).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &Matrix) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{}: {})", self.inner.rows(), self.inner.cols(), self.inner)
    }
}

// ---------------------------------------------------------------------------
// Triples and certificates
// ---------------------------------------------------------------------------

/// A balanced elementary equivalence candidate (R_A, S, R_B).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Triple {
    inner: mx::BeeTriple,
}

#[pymethods]
impl Triple {
    #[new]
    fn new(r_a: &Matrix, s: &Matrix, r_b: &Matrix) -> PyResult<Self> {
        Ok(Triple {
            inner: mx::BeeTriple::new(r_a.inner.clone(), s.inner.clone(), r_b.inner.clone())
                .map_err(err)?,
        })
    }

    #[getter]
    fn r_a(&self) -> Matrix {
        Matrix {
            inner: self.inner.r_a.clone(),
        }
    }

    #[getter]
    fn s(&self) -> Matrix {
        Matrix {
            inner: self.inner.s.clone(),
        }
    }

    #[getter]
    fn r_b(&self) -> Matrix {
        Matrix {
            inner: self.inner.r_b.clone(),
        }
    }

    fn swapped(&self) -> Triple {
        Triple {
            inner: self.inner.swapped(),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(json_err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Triple {
            inner: serde_json::from_str(s).map_err(json_err)?,
        })
    }
}

/// A chain of matrices with verifying triples between neighbors.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Certificate {
    inner: mx::BsseCertificate,
}

#[pymethods]
impl Certificate {
    fn matrices(&self) -> Vec<Matrix> {
        self.inner
            .matrices
            .iter()
            .map(|m| Matrix { inner: m.clone() })
            .collect()
    }

    fn links(&self) -> Vec<Triple> {
        self.inner
            .links
            .iter()
            .map(|t| Triple { inner: t.clone() })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn verify(&self) -> PyResult<bool> {
        mx::verify_certificate(&self.inner).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(json_err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Certificate {
            inner: serde_json::from_str(s).map_err(json_err)?,
        })
    }
}

fn bounds(m: Option<usize>, cap: Option<u64>, budget: Option<u64>) -> mx::SearchBounds {
    let mut b = mx::SearchBounds {
        m_max: m,
        cap,
        ..Default::default()
    };
    if let Some(x) = budget {
        b.budget = x;
    }
    b
}

/// Verify A = S R_A, B = S R_B and R_A S = R_B S exactly.
#[pyfunction]
fn verify_balanced_elementary(a: &Matrix, b: &Matrix, t: &Triple) -> PyResult<bool> {
    mx::verify_balanced_elementary(&a.inner, &b.inner, &t.inner).map_err(err)
}

/// Exhaustive bounded decision; returns a verifying triple or None.
#[pyfunction]
#[pyo3(signature = (a, b, m=None, cap=None, budget=None))]
fn decide_balanced_elementary(
    a: &Matrix,
    b: &Matrix,
    m: Option<usize>,
    cap: Option<u64>,
    budget: Option<u64>,
) -> PyResult<Option<Triple>> {
    match mx::decide_balanced_elementary(&a.inner, &b.inner, &bounds(m, cap, budget)).map_err(err)? {
        mx::DecideOutcome::Found(t) => Ok(Some(Triple { inner: t })),
        mx::DecideOutcome::NotFound(_) => Ok(None),
    }
}

/// Determinant and power-relation screens, as a JSON report.
#[pyfunction]
fn necessary_invariants(a: &Matrix, b: &Matrix, n_max: usize) -> PyResult<String> {
    let rep = mx::necessary_invariants(&a.inner, &b.inner, n_max).map_err(err)?;
    serde_json::to_string_pretty(&rep).map_err(json_err)
}

/// Breadth-first certificate search up to a link-count bound.
#[pyfunction]
#[pyo3(signature = (a, b, depth, m=None, cap=None, budget=None))]
fn bsse_search(
    a: &Matrix,
    b: &Matrix,
    depth: usize,
    m: Option<usize>,
    cap: Option<u64>,
    budget: Option<u64>,
) -> PyResult<Option<Certificate>> {
    match mx::bsse_search(&a.inner, &b.inner, depth, &bounds(m, cap, budget)).map_err(err)? {
        mx::BsseOutcome::Found(c) => Ok(Some(Certificate { inner: c })),
        mx::BsseOutcome::NotFound(_) => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// Moves
// ---------------------------------------------------------------------------

/// The record of a single split.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct SplitRecord {
    inner: mv::SplitRecord,
}

#[pymethods]
impl SplitRecord {
    #[getter]
    fn result(&self) -> Graph {
        Graph {
            inner: self.inner.result.clone(),
        }
    }

    #[getter]
    fn division(&self) -> Matrix {
        Matrix {
            inner: self.inner.division.clone(),
        }
    }

    #[getter]
    fn edge_matrix(&self) -> Matrix {
        Matrix {
            inner: self.inner.edge_matrix.clone(),
        }
    }

    #[getter]
    fn cells(&self) -> Vec<Vec<String>> {
        self.inner.cells.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(json_err)
    }
}

/// Move (O): out-split at a vertex; every cell must be nonempty.
#[pyfunction]
fn out_split(g: &Graph, vertex: &str, cells: Vec<Vec<String>>) -> PyResult<SplitRecord> {
    let p = mv::OutPartition::new(&g.inner, vertex, &cells).map_err(err)?;
    Ok(SplitRecord {
        inner: mv::out_split(&g.inner, &p).map_err(err)?,
    })
}

/// Move (I-): in-split at a vertex; empty cells produce sources.
#[pyfunction]
fn in_split(g: &Graph, vertex: &str, cells: Vec<Vec<String>>) -> PyResult<SplitRecord> {
    let p = mv::InPartition::new(&g.inner, vertex, &cells).map_err(err)?;
    Ok(SplitRecord {
        inner: mv::in_split(&g.inner, &p).map_err(err)?,
    })
}

/// Move (I+): two in-splits at the same vertex with equally many cells;
/// returns the two records and the verifying triple.
#[pyfunction]
fn balanced_in_split(
    g: &Graph,
    vertex: &str,
    cells_e: Vec<Vec<String>>,
    cells_f: Vec<Vec<String>>,
) -> PyResult<(SplitRecord, SplitRecord, Triple)> {
    let pe = mv::InPartition::new(&g.inner, vertex, &cells_e).map_err(err)?;
    let pf = mv::InPartition::new(&g.inner, vertex, &cells_f).map_err(err)?;
    let bs = mv::balanced_in_split(&g.inner, vertex, &pe, &pf).map_err(err)?;
    Ok((
        SplitRecord { inner: bs.e },
        SplitRecord { inner: bs.f },
        Triple { inner: bs.triple },
    ))
}

/// Reconstruct a split from a division matrix and an edge matrix.
#[pyfunction]
fn matrices_to_split(g: &Graph, d: &Matrix, em: &Matrix, kind: &str) -> PyResult<SplitRecord> {
    let kind = match kind {
        "out" => mv::SplitKind::Out,
        "in" => mv::SplitKind::In,
        other => {
            return Err(PyValueError::new_err(format!(
                "kind must be \"out\" or \"in\", got {:?}",
                other
            )))
        }
    };
    Ok(SplitRecord {
        inner: mv::matrices_to_split(&g.inner, &d.inner, &em.inner, kind).map_err(err)?,
    })
}

/// A replayable iterated balanced in-split description.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Script {
    inner: mv::SplitScript,
}

#[pymethods]
impl Script {
    #[new]
    fn new(base: &Graph) -> Script {
        Script {
            inner: mv::SplitScript {
                base: base.inner.clone(),
                steps: vec![],
            },
        }
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Script {
            inner: mv::SplitScript::from_json(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn add_step(
        &mut self,
        vertex: &str,
        cells_e: Vec<Vec<String>>,
        cells_f: Vec<Vec<String>>,
    ) {
        self.inner.steps.push(mv::ScriptStep {
            vertex: vertex.to_string(),
            cells_e,
            cells_f,
        });
    }

    fn step_count(&self) -> usize {
        self.inner.step_count()
    }

    /// Replay the script; returns the two branch graphs.
    fn run(&self) -> PyResult<(Graph, Graph)> {
        let (e, f, _) = mv::iterated_balanced_in_split(&self.inner).map_err(err)?;
        Ok((Graph { inner: e }, Graph { inner: f }))
    }

    /// The constructive block map between the branches (E to F, or F to E).
    #[pyo3(signature = (reverse=false))]
    fn psi(&self, reverse: bool) -> PyResult<BlockMap> {
        let (_, _, history) = mv::iterated_balanced_in_split(&self.inner).map_err(err)?;
        let history = if reverse { history.swapped() } else { history };
        Ok(BlockMap {
            inner: bm::psi_from_history(&history).map_err(err)?,
        })
    }

    /// Connect the two branches by elementary balanced in-splits; returns
    /// the certificate and the number of attached sources as
    /// (certificate, source_count).
    fn connect_chain(&self) -> PyResult<(Certificate, usize)> {
        let chain = mv::connect_by_elementary(&self.inner).map_err(err)?;
        Ok((
            Certificate {
                inner: chain.certificate,
            },
            chain.attached_source_ids.len(),
        ))
    }

    /// Build and verify the full witness of the script.
    fn witness(&self) -> PyResult<Witness> {
        Ok(Witness {
            inner: eq::witness_from_script(&self.inner).map_err(err)?,
        })
    }
}

// ---------------------------------------------------------------------------
// Block maps
// ---------------------------------------------------------------------------

/// An (l, c)-block map between the finite paths of two graphs.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct BlockMap {
    inner: bm::BlockMap,
}

#[pymethods]
impl BlockMap {
    #[staticmethod]
    fn identity(g: &Graph) -> PyResult<BlockMap> {
        Ok(BlockMap {
            inner: bm::BlockMap::identity(&g.inner).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(s: &str, source: &Graph, target: &Graph) -> PyResult<BlockMap> {
        Ok(BlockMap {
            inner: bm::BlockMap::from_json(s, &source.inner, &target.inner).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn memory(&self) -> usize {
        self.inner.memory()
    }

    #[getter]
    fn anticipation(&self) -> usize {
        self.inner.anticipation()
    }

    #[getter]
    fn source(&self) -> Graph {
        Graph {
            inner: self.inner.source().clone(),
        }
    }

    #[getter]
    fn target(&self) -> Graph {
        Graph {
            inner: self.inner.target().clone(),
        }
    }

    /// Apply the induced map to an edge-id prefix.
    fn apply(&self, prefix: Vec<String>) -> PyResult<Vec<String>> {
        let ids: Vec<&str> = prefix.iter().map(String::as_str).collect();
        let p = gr::Path::from_edge_ids(self.inner.source(), &ids).map_err(err)?;
        Ok(self.inner.apply_prefix(&p).map_err(err)?.to_ids(self.inner.target()))
    }

    fn check_sliding(&self, depth: usize) -> PyResult<bool> {
        Ok(self.inner.check_sliding(depth).map_err(err)?.passed)
    }

    /// Surjectivity/injectivity condition report as a JSON string.
    fn check_conditions(&self, k_max: usize, big_k_max: usize) -> PyResult<String> {
        let rep = self.inner.check_conditions(k_max, big_k_max).map_err(err)?;
        serde_json::to_string_pretty(&rep).map_err(json_err)
    }

    fn conditions_pass(&self, k_max: usize, big_k_max: usize) -> PyResult<bool> {
        Ok(self
            .inner
            .check_conditions(k_max, big_k_max)
            .map_err(err)?
            .bijectivity_passes())
    }

    fn table_is_bijective(&self) -> PyResult<bool> {
        self.inner.table_is_bijective().map_err(err)
    }

    fn compose(&self, next: &BlockMap) -> PyResult<BlockMap> {
        Ok(BlockMap {
            inner: self.inner.compose(&next.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "BlockMap(l={}, c={}, {} entries)",
            self.inner.memory(),
            self.inner.anticipation(),
            self.inner.table().len()
        )
    }
}

/// The (0, n-1)-block map onto the n'th higher block graph.
#[pyfunction]
fn canonical_higher_block_map(g: &Graph, n: usize) -> PyResult<(Graph, BlockMap)> {
    let (h, map) = bm::canonical_higher_block_map(&g.inner, n).map_err(err)?;
    Ok((Graph { inner: h }, BlockMap { inner: map }))
}

/// The (1,1)-block map of a verified triple, with the canonical pairing.
#[pyfunction]
fn block_map_from_triple(e: &Graph, f: &Graph, t: &Triple) -> PyResult<BlockMap> {
    let pairing = bm::TriplePairing::canonical(&e.inner, &f.inner, &t.inner).map_err(err)?;
    Ok(BlockMap {
        inner: bm::block_map_from_triple(&e.inner, &f.inner, &t.inner, &pairing).map_err(err)?,
    })
}

/// Trade anticipation for a higher block presentation of the source.
#[pyfunction]
fn reduce_continuity(map: &BlockMap) -> PyResult<(Graph, BlockMap)> {
    let (g, reduced) = bm::reduce_continuity(&map.inner).map_err(err)?;
    Ok((Graph { inner: g }, BlockMap { inner: reduced }))
}

/// Recover the split ladders of a mutually inverse pair of block maps;
/// returns (base graph, summary JSON).
#[pyfunction]
fn decompose_eventual_conjugacy(h: &BlockMap, h_inv: &BlockMap) -> PyResult<(Graph, String)> {
    let dec = bm::decompose_eventual_conjugacy(&h.inner, &h_inv.inner).map_err(err)?;
    let summary = serde_json::json!({
        "rungs": dec.rungs,
        "e_ladder_sizes": dec.e_ladder.iter().map(|g| g.vertex_count()).collect::<Vec<_>>(),
        "f_ladder_sizes": dec.f_ladder.iter().map(|g| g.vertex_count()).collect::<Vec<_>>(),
        "e_top_matches_higher_block": dec.e_top_matches_higher_block,
        "f_top_matches_higher_block": dec.f_top_matches_higher_block,
        "roundtrip_depth": dec.roundtrip_depth,
    });
    Ok((
        Graph { inner: dec.base },
        serde_json::to_string_pretty(&summary).map_err(json_err)?,
    ))
}

// ---------------------------------------------------------------------------
// Witnesses
// ---------------------------------------------------------------------------

/// A verified eventual-conjugacy witness.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Witness {
    inner: eq::EventualConjugacyWitness,
}

#[pymethods]
impl Witness {
    #[getter]
    fn memory(&self) -> usize {
        self.inner.memory
    }

    #[getter]
    fn anticipation(&self) -> usize {
        self.inner.anticipation
    }

    #[getter]
    fn forward(&self) -> BlockMap {
        BlockMap {
            inner: self.inner.forward.clone(),
        }
    }

    #[getter]
    fn backward(&self) -> BlockMap {
        BlockMap {
            inner: self.inner.backward.clone(),
        }
    }

    #[getter]
    fn certificate(&self) -> Option<Certificate> {
        self.inner
            .certificate
            .clone()
            .map(|c| Certificate { inner: c })
    }

    fn verify(&self, depth: usize) -> PyResult<bool> {
        Ok(eq::verify_witness(&self.inner, depth).map_err(err)?.accepted)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }
}

/// Search for a witness between two graphs through their adjacency
/// matrices; None when the bounded search is exhausted.
#[pyfunction]
#[pyo3(signature = (e, f, depth, m=None, cap=None, budget=None))]
fn witness_from_matrices(
    e: &Graph,
    f: &Graph,
    depth: usize,
    m: Option<usize>,
    cap: Option<u64>,
    budget: Option<u64>,
) -> PyResult<Option<Witness>> {
    match eq::witness_from_matrices(&e.inner, &f.inner, depth, &bounds(m, cap, budget))
        .map_err(err)?
    {
        eq::MatrixWitnessOutcome::Found(w) => Ok(Some(Witness { inner: *w })),
        eq::MatrixWitnessOutcome::NotFound(_) => Ok(None),
    }
}

#[pymodule]
fn evconj(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Matrix>()?;
    m.add_class::<Triple>()?;
    m.add_class::<Certificate>()?;
    m.add_class::<SplitRecord>()?;
    m.add_class::<Script>()?;
    m.add_class::<BlockMap>()?;
    m.add_class::<Witness>()?;
    m.add_function(wrap_pyfunction!(verify_balanced_elementary, m)?)?;
    m.add_function(wrap_pyfunction!(decide_balanced_elementary, m)?)?;
    m.add_function(wrap_pyfunction!(necessary_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(bsse_search, m)?)?;
    m.add_function(wrap_pyfunction!(out_split, m)?)?;
    m.add_function(wrap_pyfunction!(in_split, m)?)?;
    m.add_function(wrap_pyfunction!(balanced_in_split, m)?)?;
    m.add_function(wrap_pyfunction!(matrices_to_split, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_higher_block_map, m)?)?;
    m.add_function(wrap_pyfunction!(block_map_from_triple, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_continuity, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_eventual_conjugacy, m)?)?;
    m.add_function(wrap_pyfunction!(witness_from_matrices, m)?)?;
    Ok(())
}
