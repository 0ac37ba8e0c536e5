//! Command line front end: load and save graphs, apply moves and scripts,
//! run checks and searches, emit DOT and JSON reports.
//!
//! Exit codes: 0 when the verdict is positive or the construction
//! succeeded, 1 when a check or search comes back negative (with a report
//! on stdout), 2 for usage and input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evconj_core::blockmap::{
    block_map_from_triple, canonical_higher_block_map, decompose_eventual_conjugacy,
    psi_from_history, reduce_continuity, BlockMap, TriplePairing,
};
use evconj_core::equivalence::{
    verify_witness, witness_from_matrices, witness_from_script, MatrixWitnessOutcome,
};
use evconj_core::graph::{
    adjacency_matrix, adjacency_matrix_ordered, are_isomorphic, graph_from_matrix,
    paths_of_length, to_dot, validate_graph, Graph,
};
use evconj_core::matrix::{
    bsse_search, decide_balanced_elementary, necessary_invariants, verify_balanced_elementary,
    verify_certificate, BeeTriple, BsseCertificate, BsseOutcome, DecideOutcome, NonNegMatrix,
    SearchBounds,
};
use evconj_core::moves::{
    balanced_in_split, connect_by_elementary, in_split, iterated_balanced_in_split, out_split,
    InPartition, OutPartition, SplitScript,
};

#[derive(Parser)]
#[command(
    name = "evconj",
    about = "Graph moves, block maps and balanced shift equivalence for one-sided edge shifts",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report sinks, sources and counts; exit 0 only for sink-free graphs
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate all paths of a given length
    Paths {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The N'th higher block graph, optionally with its canonical block map
    HigherBlock {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// also write the canonical (0, N-1)-block map here
        #[arg(long)]
        emit_map: Option<PathBuf>,
    },
    /// Adjacency matrix of a graph, or the graph of a square matrix
    Adj {
        #[arg(long, conflicts_with = "matrix")]
        graph: Option<PathBuf>,
        /// realize this matrix as a graph instead
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// comma-separated vertex ordering (defaults to lexicographic)
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a vertex bijection preserving edge multiplicities
    Iso {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Move (O): out-split at a vertex; cells like "e|f" (no empty cells)
    OutSplit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        cells: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// also write the split graph as DOT
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Move (I-): in-split at a vertex; cells like "e,g|" (empty cells allowed)
    InSplit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        cells: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Move (I+): a pair of in-splits at the same vertex with equally many cells
    BalancedSplit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        cells_e: String,
        #[arg(long)]
        cells_f: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay an iterated balanced in-split script
    ScriptRun {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// write per-stage DOT files into this directory
        #[arg(long)]
        dot_dir: Option<PathBuf>,
    },
    /// Connect the two branches of a script by elementary balanced in-splits
    ConnectChain {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a balanced elementary equivalence triple
    BeeVerify {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        triple: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively decide balanced elementary equivalence within bounds
    BeeDecide {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// largest inner dimension to try (default: matrix dimension)
        #[arg(long)]
        m: Option<usize>,
        /// entry cap for the factors (default: largest entry of A and B)
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Breadth-first search for a balanced strong shift equivalence
    BsseSearch {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify every link of a certificate
    CertVerify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a block map and run the sliding and bijectivity checks
    BlockmapCheck {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        graph_e: PathBuf,
        #[arg(long)]
        graph_f: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[arg(long = "K-max", default_value_t = 4)]
        big_k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The constructive block map of a script (E branch to F branch)
    Psi {
        #[arg(long)]
        script: PathBuf,
        /// build the F-to-E direction instead
        #[arg(long)]
        reverse: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The (1,1)-block map of a verified triple between two graphs
    TripleMap {
        #[arg(long)]
        graph_e: PathBuf,
        #[arg(long)]
        graph_f: PathBuf,
        #[arg(long)]
        triple: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trade anticipation for a higher block presentation of the source
    ReduceC {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        graph_e: PathBuf,
        #[arg(long)]
        graph_f: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the split ladders of a mutually inverse pair of block maps
    Decompose {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        inv: PathBuf,
        #[arg(long)]
        graph_e: PathBuf,
        #[arg(long)]
        graph_f: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and verify an eventual-conjugacy witness
    Witness {
        /// from a splitting script...
        #[arg(long, conflicts_with_all = ["graph_e", "graph_f"])]
        script: Option<PathBuf>,
        /// ...or by matrix search between two graphs
        #[arg(long, requires = "graph_f")]
        graph_e: Option<PathBuf>,
        #[arg(long)]
        graph_f: Option<PathBuf>,
        /// maximum certificate length for the matrix search
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a graph as DOT
    Dot {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {}", path.display(), e))
}

fn load_graph(path: &Path) -> Result<Graph, String> {
    Graph::from_json(&read(path)?).map_err(|e| format!("{}: {}", path.display(), e))
}

fn load_matrix(path: &Path) -> Result<NonNegMatrix, String> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {}", path.display(), e))
}

fn load_triple(path: &Path) -> Result<BeeTriple, String> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {}", path.display(), e))
}

fn load_script(path: &Path) -> Result<SplitScript, String> {
    SplitScript::from_json(&read(path)?).map_err(|e| format!("{}: {}", path.display(), e))
}

fn load_map(path: &Path, e: &Graph, f: &Graph) -> Result<BlockMap, String> {
    BlockMap::from_json(&read(path)?, e, f).map_err(|e| format!("{}: {}", path.display(), e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    let text = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{}\n", text)
    };
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {}", p.display(), e)),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn emit_json<T: serde::Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), String> {
    let s = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    emit(out, &s)
}

/// Parse cell syntax: cells separated by `|`, edge ids by `,`; a trailing
/// `|` (or any empty segment) is an empty cell.
fn parse_cells(s: &str) -> Vec<Vec<String>> {
    s.split('|')
        .map(|cell| {
            if cell.is_empty() {
                Vec::new()
            } else {
                cell.split(',').map(|e| e.trim().to_string()).collect()
            }
        })
        .collect()
}

fn bounds_from(m: Option<usize>, cap: Option<u64>, budget: Option<u64>) -> SearchBounds {
    let mut b = SearchBounds {
        m_max: m,
        cap,
        ..Default::default()
    };
    if let Some(x) = budget {
        b.budget = x;
    }
    b
}

fn core_err(e: evconj_core::Error) -> String {
    e.to_string()
}

/// Ok(true) = positive verdict, Ok(false) = negative verdict with report
/// already emitted, Err = usage/input error.
fn run(cmd: Cmd) -> Result<bool, String> {
    match cmd {
        Cmd::Validate { graph, out } => {
            let g = load_graph(&graph)?;
            let rep = validate_graph(&g);
            let ok = !rep.has_sinks();
            emit_json(&out, &rep)?;
            Ok(ok)
        }
        Cmd::Paths { graph, n, out } => {
            let g = load_graph(&graph)?;
            let paths = paths_of_length(&g, n).map_err(core_err)?;
            let ids: Vec<Vec<String>> = paths.iter().map(|p| p.to_ids(&g)).collect();
            emit_json(&out, &ids)?;
            Ok(true)
        }
        Cmd::HigherBlock {
            graph,
            n,
            out,
            emit_map,
        } => {
            let g = load_graph(&graph)?;
            let (h, bm) = canonical_higher_block_map(&g, n).map_err(core_err)?;
            if let Some(p) = emit_map {
                emit(&Some(p), &bm.to_json().map_err(core_err)?)?;
            }
            emit(&out, &h.to_json().map_err(core_err)?)?;
            Ok(true)
        }
        Cmd::Adj {
            graph,
            matrix,
            order,
            out,
        } => match (graph, matrix) {
            (Some(gp), None) => {
                let g = load_graph(&gp)?;
                let a = match order {
                    Some(o) => {
                        let ord: Vec<String> = o.split(',').map(|s| s.trim().to_string()).collect();
                        adjacency_matrix_ordered(&g, &ord).map_err(core_err)?
                    }
                    None => adjacency_matrix(&g).map_err(core_err)?,
                };
                emit_json(&out, &a)?;
                Ok(true)
            }
            (None, Some(mp)) => {
                let a = load_matrix(&mp)?;
                let g = graph_from_matrix(&a).map_err(core_err)?;
                emit(&out, &g.to_json().map_err(core_err)?)?;
                Ok(true)
            }
            _ => Err("pass exactly one of --graph or --matrix".into()),
        },
        Cmd::Iso { g1, g2, out } => {
            let a = load_graph(&g1)?;
            let b = load_graph(&g2)?;
            match are_isomorphic(&a, &b).map_err(core_err)? {
                Some(bij) => {
                    emit_json(&out, &bij)?;
                    Ok(true)
                }
                None => {
                    emit_json(&out, &serde_json::json!({ "isomorphic": false }))?;
                    Ok(false)
                }
            }
        }
        Cmd::OutSplit {
            graph,
            vertex,
            cells,
            out,
            dot,
        } => {
            let g = load_graph(&graph)?;
            let p = OutPartition::new(&g, &vertex, &parse_cells(&cells)).map_err(core_err)?;
            let rec = out_split(&g, &p).map_err(core_err)?;
            if let Some(d) = dot {
                emit(&Some(d), &to_dot(&rec.result))?;
            }
            emit_json(&out, &rec)?;
            Ok(true)
        }
        Cmd::InSplit {
            graph,
            vertex,
            cells,
            out,
            dot,
        } => {
            let g = load_graph(&graph)?;
            let p = InPartition::new(&g, &vertex, &parse_cells(&cells)).map_err(core_err)?;
            let rec = in_split(&g, &p).map_err(core_err)?;
            if let Some(d) = dot {
                emit(&Some(d), &to_dot(&rec.result))?;
            }
            emit_json(&out, &rec)?;
            Ok(true)
        }
        Cmd::BalancedSplit {
            graph,
            vertex,
            cells_e,
            cells_f,
            out,
        } => {
            let g = load_graph(&graph)?;
            let pe = InPartition::new(&g, &vertex, &parse_cells(&cells_e)).map_err(core_err)?;
            let pf = InPartition::new(&g, &vertex, &parse_cells(&cells_f)).map_err(core_err)?;
            let bs = balanced_in_split(&g, &vertex, &pe, &pf).map_err(core_err)?;
            emit_json(&out, &bs)?;
            Ok(true)
        }
        Cmd::ScriptRun {
            script,
            out,
            dot_dir,
        } => {
            let sc = load_script(&script)?;
            let (e, f, history) = iterated_balanced_in_split(&sc).map_err(core_err)?;
            if let Some(dir) = dot_dir {
                fs::create_dir_all(&dir)
                    .map_err(|er| format!("cannot create {}: {}", dir.display(), er))?;
                emit(&Some(dir.join("stage0.dot")), &to_dot(&history.base))?;
                for (i, step) in history.steps.iter().enumerate() {
                    emit(
                        &Some(dir.join(format!("stage{}_e.dot", i + 1))),
                        &to_dot(&step.e_record.result),
                    )?;
                    emit(
                        &Some(dir.join(format!("stage{}_f.dot", i + 1))),
                        &to_dot(&step.f_record.result),
                    )?;
                }
            }
            emit_json(
                &out,
                &serde_json::json!({
                    "e_graph": e,
                    "f_graph": f,
                    "steps": history.steps.len(),
                }),
            )?;
            Ok(true)
        }
        Cmd::ConnectChain { script, out } => {
            let sc = load_script(&script)?;
            let chain = connect_by_elementary(&sc).map_err(core_err)?;
            emit_json(
                &out,
                &serde_json::json!({
                    "links": chain.links,
                    "g_prime": chain.g_prime,
                    "attached_sources": chain.attached_source_ids,
                    "certificate": chain.certificate,
                }),
            )?;
            Ok(true)
        }
        Cmd::BeeVerify { a, b, triple, out } => {
            let a = load_matrix(&a)?;
            let b = load_matrix(&b)?;
            let t = load_triple(&triple)?;
            let ok = verify_balanced_elementary(&a, &b, &t).map_err(core_err)?;
            emit_json(&out, &serde_json::json!({ "verified": ok }))?;
            Ok(ok)
        }
        Cmd::BeeDecide {
            a,
            b,
            m,
            cap,
            budget,
            out,
        } => {
            let a = load_matrix(&a)?;
            let b = load_matrix(&b)?;
            let bounds = bounds_from(m, cap, budget);
            match decide_balanced_elementary(&a, &b, &bounds).map_err(core_err)? {
                DecideOutcome::Found(t) => {
                    emit_json(&out, &t)?;
                    Ok(true)
                }
                DecideOutcome::NotFound(rep) => {
                    let screens = necessary_invariants(&a, &b, 3).map_err(core_err)?;
                    emit_json(
                        &out,
                        &serde_json::json!({
                            "found": false,
                            "report": rep,
                            "screens": screens,
                        }),
                    )?;
                    Ok(false)
                }
            }
        }
        Cmd::BsseSearch {
            a,
            b,
            depth,
            m,
            cap,
            budget,
            out,
        } => {
            let a = load_matrix(&a)?;
            let b = load_matrix(&b)?;
            let bounds = bounds_from(m, cap, budget);
            match bsse_search(&a, &b, depth, &bounds).map_err(core_err)? {
                BsseOutcome::Found(cert) => {
                    emit_json(&out, &cert)?;
                    Ok(true)
                }
                BsseOutcome::NotFound(rep) => {
                    emit_json(&out, &serde_json::json!({ "found": false, "report": rep }))?;
                    Ok(false)
                }
            }
        }
        Cmd::CertVerify { cert, out } => {
            let c: BsseCertificate =
                serde_json::from_str(&read(&cert)?).map_err(|e| e.to_string())?;
            let ok = verify_certificate(&c).map_err(core_err)?;
            emit_json(&out, &serde_json::json!({ "verified": ok, "links": c.len() }))?;
            Ok(ok)
        }
        Cmd::BlockmapCheck {
            map,
            graph_e,
            graph_f,
            depth,
            k_max,
            big_k_max,
            out,
        } => {
            let e = load_graph(&graph_e)?;
            let f = load_graph(&graph_f)?;
            let bm = load_map(&map, &e, &f)?;
            let sliding = bm.check_sliding(depth).map_err(core_err)?;
            let conditions = bm.check_conditions(k_max, big_k_max).map_err(core_err)?;
            let ok = sliding.passed && conditions.bijectivity_passes();
            emit_json(
                &out,
                &serde_json::json!({ "sliding": sliding, "conditions": conditions }),
            )?;
            Ok(ok)
        }
        Cmd::Psi {
            script,
            reverse,
            out,
        } => {
            let sc = load_script(&script)?;
            let (_, _, history) = iterated_balanced_in_split(&sc).map_err(core_err)?;
            let history = if reverse { history.swapped() } else { history };
            let psi = psi_from_history(&history).map_err(core_err)?;
            emit(&out, &psi.to_json().map_err(core_err)?)?;
            Ok(true)
        }
        Cmd::TripleMap {
            graph_e,
            graph_f,
            triple,
            out,
        } => {
            let e = load_graph(&graph_e)?;
            let f = load_graph(&graph_f)?;
            let t = load_triple(&triple)?;
            let pairing = TriplePairing::canonical(&e, &f, &t).map_err(core_err)?;
            let bm = block_map_from_triple(&e, &f, &t, &pairing).map_err(core_err)?;
            let map_json: serde_json::Value =
                serde_json::from_str(&bm.to_json().map_err(core_err)?)
                    .map_err(|er| er.to_string())?;
            // the canonical pairing is recorded alongside the table
            emit_json(
                &out,
                &serde_json::json!({
                    "map": map_json,
                    "pairing": "canonical: fibers enumerated lexicographically, matched in order",
                }),
            )?;
            Ok(true)
        }
        Cmd::ReduceC {
            map,
            graph_e,
            graph_f,
            out,
        } => {
            let e = load_graph(&graph_e)?;
            let f = load_graph(&graph_f)?;
            let bm = load_map(&map, &e, &f)?;
            let (ebar, reduced) = reduce_continuity(&bm).map_err(core_err)?;
            let map_json: serde_json::Value =
                serde_json::from_str(&reduced.to_json().map_err(core_err)?)
                    .map_err(|er| er.to_string())?;
            emit_json(
                &out,
                &serde_json::json!({ "graph": ebar, "map": map_json }),
            )?;
            Ok(true)
        }
        Cmd::Decompose {
            map,
            inv,
            graph_e,
            graph_f,
            out,
        } => {
            let e = load_graph(&graph_e)?;
            let f = load_graph(&graph_f)?;
            let h = load_map(&map, &e, &f)?;
            let h_inv = load_map(&inv, &f, &e)?;
            let dec = decompose_eventual_conjugacy(&h, &h_inv).map_err(core_err)?;
            let ok = dec.e_top_matches_higher_block && dec.f_top_matches_higher_block;
            emit_json(
                &out,
                &serde_json::json!({
                    "base": dec.base,
                    "e_ladder_sizes": dec.e_ladder.iter().map(|g| g.vertex_count()).collect::<Vec<_>>(),
                    "f_ladder_sizes": dec.f_ladder.iter().map(|g| g.vertex_count()).collect::<Vec<_>>(),
                    "rungs": dec.rungs,
                    "e_out_rungs": dec.e_out_rungs.len(),
                    "f_out_rungs": dec.f_out_rungs.len(),
                    "e_top_matches_higher_block": dec.e_top_matches_higher_block,
                    "f_top_matches_higher_block": dec.f_top_matches_higher_block,
                    "roundtrip_depth": dec.roundtrip_depth,
                }),
            )?;
            Ok(ok)
        }
        Cmd::Witness {
            script,
            graph_e,
            graph_f,
            depth,
            m,
            cap,
            budget,
            out,
        } => match (script, graph_e, graph_f) {
            (Some(sp), None, None) => {
                let sc = load_script(&sp)?;
                let w = witness_from_script(&sc).map_err(core_err)?;
                let check = verify_witness(&w, w.reports.roundtrip_depth).map_err(core_err)?;
                emit(&out, &w.to_json().map_err(core_err)?)?;
                Ok(check.accepted)
            }
            (None, Some(ep), Some(fp)) => {
                let e = load_graph(&ep)?;
                let f = load_graph(&fp)?;
                let bounds = bounds_from(m, cap, budget);
                match witness_from_matrices(&e, &f, depth, &bounds).map_err(core_err)? {
                    MatrixWitnessOutcome::Found(w) => {
                        let check =
                            verify_witness(&w, w.reports.roundtrip_depth).map_err(core_err)?;
                        emit(&out, &w.to_json().map_err(core_err)?)?;
                        Ok(check.accepted)
                    }
                    MatrixWitnessOutcome::NotFound(rep) => {
                        emit_json(&out, &serde_json::json!({ "found": false, "report": rep }))?;
                        Ok(false)
                    }
                }
            }
            _ => Err("pass either --script or both --graph-e and --graph-f".into()),
        },
        Cmd::Dot { graph, out } => {
            let g = load_graph(&graph)?;
            emit(&out, &to_dot(&g))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
