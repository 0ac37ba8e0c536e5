//! Shared test machinery: an independent naive oracle for the bounded
//! triple decision, and seeded random generators for graphs and scripts.
//!
//! The oracle works on plain `u64` matrices with full nested enumeration
//! and shares no code with the search under test.

// compiled once per test target; not every target uses every helper
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use evconj_core::graph::Graph;
use evconj_core::matrix::NonNegMatrix;
use evconj_core::moves::{ScriptStep, SplitScript};
use rand::Rng;

// ---------------------------------------------------------------------------
// Naive oracle
// ---------------------------------------------------------------------------

pub type U64Mat = Vec<Vec<u64>>;

pub fn mat_mul(a: &U64Mat, b: &U64Mat) -> U64Mat {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![0u64; m]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn enumerate_all(rows: usize, cols: usize, cap: u64) -> Vec<U64Mat> {
    let cells = rows * cols;
    let mut out = Vec::new();
    let total = (cap + 1).pow(cells as u32);
    for code in 0..total {
        let mut m = vec![vec![0u64; cols]; rows];
        let mut c = code;
        for i in 0..rows {
            for j in 0..cols {
                m[i][j] = c % (cap + 1);
                c /= cap + 1;
            }
        }
        out.push(m);
    }
    out
}

/// Full-enumeration decision of balanced elementary equivalence within
/// `m_max` and `cap`: every S (zero columns included), every R_A, every
/// R_B, checked by plain multiplication.
pub fn naive_decide(a: &U64Mat, b: &U64Mat, m_max: usize, cap: u64) -> Option<(U64Mat, U64Mat, U64Mat)> {
    let n = a.len();
    for m in 1..=m_max {
        let ss = enumerate_all(n, m, cap);
        let rs = enumerate_all(m, n, cap);
        for s in &ss {
            for r_a in &rs {
                if &mat_mul(s, r_a) != a {
                    continue;
                }
                let ras = mat_mul(r_a, s);
                for r_b in &rs {
                    if &mat_mul(s, r_b) == b && mat_mul(r_b, s) == ras {
                        return Some((r_a.clone(), s.clone(), r_b.clone()));
                    }
                }
            }
        }
    }
    None
}

/// Column-organized full enumeration for larger dimensions: per candidate
/// `S`, the columns of `R_A` and `R_B` are found by scanning every vector,
/// and the third identity is checked through a product table. Candidate `S`
/// with a zero column are skipped (a triple with one reduces to a smaller
/// inner dimension without it); `steps` caps the work, `None` meaning the
/// budget ran out before a definitive answer.
#[allow(clippy::type_complexity)]
pub fn naive_decide_by_columns(
    a: &U64Mat,
    b: &U64Mat,
    m_max: usize,
    cap: u64,
) -> Option<Option<(U64Mat, U64Mat, U64Mat)>> {
    use std::collections::HashMap;
    let n = a.len();
    let mut steps: u64 = 0;
    let budget: u64 = 20_000_000;
    for m in 1..=m_max {
        let vectors = enumerate_all(1, m, cap); // row vectors of length m
        'next_s: for s in enumerate_all(n, m, cap) {
            steps += 1;
            if steps > budget {
                return None;
            }
            for k in 0..m {
                if (0..n).all(|i| s[i][k] == 0) {
                    continue 'next_s;
                }
            }
            // candidate columns: v with S v = column of the target
            let col_cands = |target: &U64Mat| -> Option<Vec<Vec<&U64Mat>>> {
                let mut all = Vec::with_capacity(n);
                for j in 0..n {
                    let mut cands = Vec::new();
                    for v in &vectors {
                        let ok = (0..n).all(|i| {
                            (0..m).map(|k| s[i][k] * v[0][k]).sum::<u64>() == target[i][j]
                        });
                        if ok {
                            cands.push(v);
                        }
                    }
                    if cands.is_empty() {
                        return None;
                    }
                    all.push(cands);
                }
                Some(all)
            };
            let Some(a_cands) = col_cands(a) else { continue };
            let Some(b_cands) = col_cands(b) else { continue };

            let assemble = |choice: &[usize], cands: &[Vec<&U64Mat>]| -> U64Mat {
                let mut r = vec![vec![0u64; n]; m];
                for (j, &ci) in choice.iter().enumerate() {
                    for k in 0..m {
                        r[k][j] = cands[j][ci][0][k];
                    }
                }
                r
            };
            let walk = |cands: &[Vec<&U64Mat>]| -> Vec<Vec<usize>> {
                let mut out = vec![vec![0usize; n]];
                loop {
                    let last = out.last().unwrap().clone();
                    let mut next = last;
                    let mut j = n;
                    loop {
                        if j == 0 {
                            return out;
                        }
                        j -= 1;
                        next[j] += 1;
                        if next[j] < cands[j].len() {
                            break;
                        }
                        next[j] = 0;
                    }
                    out.push(next);
                }
            };

            // product table for the B side
            let mut by_product: HashMap<Vec<u64>, U64Mat> = HashMap::new();
            for choice in walk(&b_cands) {
                steps += 1;
                if steps > budget {
                    return None;
                }
                let r_b = assemble(&choice, &b_cands);
                let key: Vec<u64> = mat_mul(&r_b, &s).into_iter().flatten().collect();
                by_product.entry(key).or_insert(r_b);
            }
            for choice in walk(&a_cands) {
                steps += 1;
                if steps > budget {
                    return None;
                }
                let r_a = assemble(&choice, &a_cands);
                let key: Vec<u64> = mat_mul(&r_a, &s).into_iter().flatten().collect();
                if let Some(r_b) = by_product.get(&key) {
                    return Some(Some((r_a, s.clone(), r_b.clone())));
                }
            }
        }
    }
    Some(None)
}

pub fn to_matrix(m: &U64Mat) -> NonNegMatrix {
    NonNegMatrix::from_rows(m).unwrap()
}

pub fn all_small_matrices(n: usize, cap: u64) -> Vec<U64Mat> {
    enumerate_all(n, n, cap)
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

/// A random sink-free graph with at most `max_v` vertices and small
/// out-degrees.
pub fn random_no_sink_graph<R: Rng>(rng: &mut R, max_v: usize, max_out: usize) -> Graph {
    let n = rng.gen_range(1..=max_v);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{}", i)).collect();
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        let deg = rng.gen_range(1..=max_out);
        for _ in 0..deg {
            let j = rng.gen_range(0..n);
            edges.push((format!("e{}", k), vertices[i].clone(), vertices[j].clone()));
            k += 1;
        }
    }
    Graph::new(vertices, edges).unwrap()
}

/// Partition `items` into `cells` possibly empty random cells.
fn random_partition<R: Rng>(rng: &mut R, items: &[String], cells: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new(); cells];
    for it in items {
        out[rng.gen_range(0..cells)].push(it.clone());
    }
    out
}

/// A random iterated balanced in-split script over `base` with up to
/// `max_steps` steps and up to `max_cells` cells per step.
pub fn random_script<R: Rng>(
    rng: &mut R,
    base: &Graph,
    max_steps: usize,
    max_cells: usize,
) -> SplitScript {
    use evconj_core::moves::{in_split, InPartition};

    let steps_wanted = rng.gen_range(0..=max_steps);
    let mut script = SplitScript {
        base: base.clone(),
        steps: vec![],
    };
    let mut cur_e = base.clone();
    let mut cur_f = base.clone();
    for _ in 0..steps_wanted {
        let vid = {
            let ids: Vec<String> = cur_e.vertex_ids().map(String::from).collect();
            ids[rng.gen_range(0..ids.len())].clone()
        };
        let n_cells = rng.gen_range(1..=max_cells);
        let in_e: Vec<String> = {
            let v = cur_e.vertex_index(&vid).unwrap();
            cur_e
                .in_edges(v)
                .iter()
                .map(|&e| cur_e.edge_id(e).to_string())
                .collect()
        };
        let in_f: Vec<String> = {
            let v = cur_f.vertex_index(&vid).unwrap();
            cur_f
                .in_edges(v)
                .iter()
                .map(|&e| cur_f.edge_id(e).to_string())
                .collect()
        };
        let cells_e = random_partition(rng, &in_e, n_cells);
        let cells_f = random_partition(rng, &in_f, n_cells);
        let pe = InPartition::new(&cur_e, &vid, &cells_e).unwrap();
        let pf = InPartition::new(&cur_f, &vid, &cells_f).unwrap();
        cur_e = in_split(&cur_e, &pe).unwrap().result;
        cur_f = in_split(&cur_f, &pf).unwrap().result;
        script.steps.push(ScriptStep {
            vertex: vid,
            cells_e,
            cells_f,
        });
    }
    script
}
