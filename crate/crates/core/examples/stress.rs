//! Seeded stress driver: random splitting scripts through the witness and
//! chain constructions, with every link re-verified.
//!
//!     cargo run --release -p evconj-core --example stress -- <seed> <cases>
use evconj_core::blockmap::{psi_from_history, psi_intertwines};
use evconj_core::graph::{adjacency_matrix_ordered, Graph};
use evconj_core::matrix::{verify_balanced_elementary, verify_certificate};
use evconj_core::moves::{
    connect_by_elementary, in_split, iterated_balanced_in_split, InPartition, ScriptStep,
    SplitScript,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, max_v: usize, max_out: usize) -> Graph {
    let n = rng.gen_range(1..=max_v);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{}", i)).collect();
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for _ in 0..rng.gen_range(1..=max_out) {
            let j = rng.gen_range(0..n);
            edges.push((format!("e{}", k), vertices[i].clone(), vertices[j].clone()));
            k += 1;
        }
    }
    Graph::new(vertices, edges).unwrap()
}

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(99);
    let cases: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chains = 0usize;
    let mut sourceful = 0usize;
    for case in 0..cases {
        let base = random_graph(&mut rng, 8, 3);
        if !base.sources().is_empty() {
            sourceful += 1;
        }
        let steps_wanted = rng.gen_range(0..=3);
        let mut script = SplitScript { base: base.clone(), steps: vec![] };
        let mut cur_e = base.clone();
        let mut cur_f = base.clone();
        for _ in 0..steps_wanted {
            let ids: Vec<String> = cur_e.vertex_ids().map(String::from).collect();
            let vid = ids[rng.gen_range(0..ids.len())].clone();
            let n_cells = rng.gen_range(1..=3);
            let part = |rng: &mut ChaCha8Rng, g: &Graph| -> Vec<Vec<String>> {
                let v = g.vertex_index(&vid).unwrap();
                let mut cells = vec![Vec::new(); n_cells];
                for &e in g.in_edges(v) {
                    cells[rng.gen_range(0..n_cells)].push(g.edge_id(e).to_string());
                }
                cells
            };
            let ce = part(&mut rng, &cur_e);
            let cf = part(&mut rng, &cur_f);
            let pe = InPartition::new(&cur_e, &vid, &ce).unwrap();
            let pf = InPartition::new(&cur_f, &vid, &cf).unwrap();
            cur_e = in_split(&cur_e, &pe).unwrap().result;
            cur_f = in_split(&cur_f, &pf).unwrap().result;
            script.steps.push(ScriptStep { vertex: vid, cells_e: ce, cells_f: cf });
        }
        let l = script.step_count();
        let (_, _, history) = iterated_balanced_in_split(&script).unwrap();
        let psi = psi_from_history(&history).unwrap();
        assert!(psi.table_is_bijective().unwrap(), "case {}", case);
        assert!(psi.check_sliding(l + 4).unwrap().passed, "case {}", case);
        assert!(psi_intertwines(&history).unwrap(), "case {}", case);
        if l >= 2 {
            let chain = connect_by_elementary(&script).unwrap();
            assert_eq!(chain.links.len(), 2 * l - 1, "case {}", case);
            assert!(verify_certificate(&chain.certificate).unwrap(), "case {}", case);
            for link in &chain.links {
                let a_l = adjacency_matrix_ordered(&link.left.result, &link.result_order).unwrap();
                let a_r = adjacency_matrix_ordered(&link.right.result, &link.result_order).unwrap();
                assert!(verify_balanced_elementary(&a_l, &a_r, &link.triple).unwrap());
            }
            chains += 1;
        }
    }
    println!(
        "stress: {} cases ok ({} chains, {} source-carrying bases)",
        cases, chains, sourceful
    );
}
