//! Eventual-conjugacy witnesses: pairs of mutually inverse block maps with
//! exhaustive finite-depth verification reports, optionally backed by a
//! matrix certificate and the splitting script that produced them.
//!
//! A witness is only ever accepted "at depth d": no unbounded claim is made
//! from finite checks, and the depth travels with the reports.

use serde::Serialize;

use crate::blockmap::{
    block_map_from_triple, psi_from_history, BlockMap, ConditionReport, SlidingCheck,
    TriplePairing,
};
use crate::error::{Error, Result};
use crate::graph::{adjacency_matrix, graph_from_matrix, paths_of_length, Graph};
use crate::matrix::{
    bsse_search, verify_certificate, BsseCertificate, BsseOutcome, BsseReport, NonNegMatrix,
    SearchBounds,
};
use crate::moves::{connect_by_elementary, iterated_balanced_in_split, SplitScript};

/// Verification data for a witness, all at explicit depths.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessReports {
    pub forward_sliding: SlidingCheck,
    pub backward_sliding: SlidingCheck,
    pub forward_conditions: ConditionReport,
    pub backward_conditions: ConditionReport,
    /// prefix depth at which the mutual-inverse roundtrip was checked
    pub roundtrip_depth: usize,
    pub roundtrip_ok: bool,
}

impl WitnessReports {
    pub fn all_pass(&self) -> bool {
        self.forward_sliding.passed
            && self.backward_sliding.passed
            && self.forward_conditions.bijectivity_passes()
            && self.backward_conditions.bijectivity_passes()
            && self.roundtrip_ok
    }
}

/// A mutually inverse pair of block maps between two graphs, with reports,
/// and optionally a balanced strong shift equivalence certificate and the
/// splitting script behind it.
#[derive(Clone, Debug)]
pub struct EventualConjugacyWitness {
    pub forward: BlockMap,
    pub backward: BlockMap,
    pub memory: usize,
    pub anticipation: usize,
    pub reports: WitnessReports,
    pub certificate: Option<BsseCertificate>,
    pub script: Option<SplitScript>,
}

/// Check that `backward(forward(x))` is a prefix of `x` and symmetrically,
/// exhaustively at the given depth. Each application trims the map's
/// anticipation off the prefix.
fn roundtrip_ok(forward: &BlockMap, backward: &BlockMap, depth: usize) -> Result<bool> {
    for x in paths_of_length(forward.source(), depth)? {
        let y = forward.apply_prefix(&x)?;
        if y.len() < backward.window_len() {
            return Err(Error::InvalidArgument(
                "roundtrip depth too small for the window".into(),
            ));
        }
        let z = backward.apply_prefix(&y)?;
        if z.edges() != &x.edges()[..z.len()] {
            return Ok(false);
        }
    }
    for y in paths_of_length(backward.source(), depth)? {
        let x = backward.apply_prefix(&y)?;
        let z = forward.apply_prefix(&x)?;
        if z.edges() != &y.edges()[..z.len()] {
            return Ok(false);
        }
    }
    Ok(true)
}

fn build_reports(
    forward: &BlockMap,
    backward: &BlockMap,
    depth: usize,
    k_max: usize,
    big_k_max: usize,
) -> Result<WitnessReports> {
    Ok(WitnessReports {
        forward_sliding: forward.check_sliding(depth)?,
        backward_sliding: backward.check_sliding(depth)?,
        forward_conditions: forward.check_conditions(k_max, big_k_max)?,
        backward_conditions: backward.check_conditions(k_max, big_k_max)?,
        roundtrip_depth: depth,
        roundtrip_ok: roundtrip_ok(forward, backward, depth)?,
    })
}

/// Build the witness of an iterated balanced in-split script: the
/// constructive block map in both directions, condition reports, and a
/// certificate (the single balanced triple for one step, the elementary
/// chain certificate for two or more, a reflexive link for zero steps).
pub fn witness_from_script(script: &SplitScript) -> Result<EventualConjugacyWitness> {
    let l = script.step_count();
    let (_, _, history) = iterated_balanced_in_split(script)?;
    let forward = psi_from_history(&history)?;
    let backward = psi_from_history(&history.swapped())?;

    let certificate = match l {
        0 => {
            let a = adjacency_matrix(&script.base)?;
            let t = crate::matrix::BeeTriple::new(
                a.clone(),
                NonNegMatrix::identity(a.rows())?,
                a.clone(),
            )?;
            Some(BsseCertificate::new(vec![a.clone(), a], vec![t])?)
        }
        1 => {
            let step = &history.steps[0];
            let a_e = adjacency_matrix(&step.e_record.result)?;
            let a_f = adjacency_matrix(&step.f_record.result)?;
            let t = crate::matrix::BeeTriple::new(
                step.e_record.edge_matrix.clone(),
                step.division.transpose(),
                step.f_record.edge_matrix.clone(),
            )?;
            Some(BsseCertificate::new(vec![a_e, a_f], vec![t])?)
        }
        _ => Some(connect_by_elementary(script)?.certificate),
    };
    if let Some(c) = &certificate {
        if !verify_certificate(c)? {
            return Err(Error::InternalConsistency(
                "script witness certificate failed verification".into(),
            ));
        }
    }

    let depth = l + forward.anticipation() + 5;
    let k_max = l + 3;
    let reports = build_reports(&forward, &backward, depth, k_max, k_max)?;
    if !reports.all_pass() {
        return Err(Error::InternalConsistency(
            "script witness failed its own verification".into(),
        ));
    }
    Ok(EventualConjugacyWitness {
        memory: forward.memory(),
        anticipation: forward.anticipation(),
        forward,
        backward,
        reports,
        certificate,
        script: Some(script.clone()),
    })
}

/// Outcome of the matrix-driven witness search.
#[derive(Clone, Debug)]
pub enum MatrixWitnessOutcome {
    Found(Box<EventualConjugacyWitness>),
    NotFound(BsseReport),
}

impl MatrixWitnessOutcome {
    pub fn found(&self) -> Option<&EventualConjugacyWitness> {
        match self {
            MatrixWitnessOutcome::Found(w) => Some(w),
            MatrixWitnessOutcome::NotFound(_) => None,
        }
    }
}

/// Search for a balanced strong shift equivalence between the adjacency
/// matrices of `e` and `f` and, when found, chain the per-link block maps
/// into a composite witness (every link contributes memory and
/// anticipation one each). The caller supplies the graph representatives;
/// the search does not range over out-split conjugates.
pub fn witness_from_matrices(
    e: &Graph,
    f: &Graph,
    depth_max: usize,
    bounds: &SearchBounds,
) -> Result<MatrixWitnessOutcome> {
    e.require_no_sinks()?;
    f.require_no_sinks()?;
    let a_e = adjacency_matrix(e)?;
    let a_f = adjacency_matrix(f)?;
    let cert = match bsse_search(&a_e, &a_f, depth_max, bounds)? {
        BsseOutcome::Found(c) => c,
        BsseOutcome::NotFound(rep) => return Ok(MatrixWitnessOutcome::NotFound(rep)),
    };

    // realize the chain matrices as graphs; the ends are the inputs
    let k = cert.len();
    let mut graphs: Vec<Graph> = Vec::with_capacity(k + 1);
    graphs.push(e.clone());
    for m in &cert.matrices[1..k] {
        graphs.push(graph_from_matrix(m)?);
    }
    graphs.push(f.clone());

    // forward composite
    let mut forward: Option<BlockMap> = None;
    for i in 0..k {
        let t = &cert.links[i];
        let pairing = TriplePairing::canonical(&graphs[i], &graphs[i + 1], t)?;
        let bm = block_map_from_triple(&graphs[i], &graphs[i + 1], t, &pairing)?;
        forward = Some(match forward {
            None => bm,
            Some(acc) => acc.compose(&bm)?,
        });
    }
    let forward = forward.expect("certificates have at least one link");

    // backward composite, reversing the chain with swapped triples
    let mut backward: Option<BlockMap> = None;
    for i in (0..k).rev() {
        let t = cert.links[i].swapped();
        let pairing = TriplePairing::canonical(&graphs[i + 1], &graphs[i], &t)?;
        let bm = block_map_from_triple(&graphs[i + 1], &graphs[i], &t, &pairing)?;
        backward = Some(match backward {
            None => bm,
            Some(acc) => acc.compose(&bm)?,
        });
    }
    let backward = backward.expect("certificates have at least one link");

    let depth = forward.window_len() + backward.anticipation() + 2;
    let k_max = forward.memory() + 2;
    let reports = build_reports(&forward, &backward, depth, k_max, k_max + 2)?;
    if !reports.all_pass() {
        return Err(Error::InternalConsistency(
            "matrix witness failed its own verification".into(),
        ));
    }
    Ok(MatrixWitnessOutcome::Found(Box::new(
        EventualConjugacyWitness {
            memory: forward.memory(),
            anticipation: forward.anticipation(),
            forward,
            backward,
            reports,
            certificate: Some(cert),
            script: None,
        },
    )))
}

/// Re-run of every constituent check of a witness at a given depth.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessVerification {
    pub accepted: bool,
    pub reports: WitnessReports,
    pub certificate_ok: Option<bool>,
}

pub fn verify_witness(w: &EventualConjugacyWitness, depth: usize) -> Result<WitnessVerification> {
    let min_depth = w.forward.window_len().max(w.backward.window_len()) + 1;
    let depth = depth.max(min_depth);
    let k_max = w.memory + 2;
    let reports = build_reports(&w.forward, &w.backward, depth, k_max, k_max + 2)?;
    let certificate_ok = match &w.certificate {
        Some(c) => Some(verify_certificate(c)?),
        None => None,
    };
    let accepted = reports.all_pass() && certificate_ok.unwrap_or(true);
    Ok(WitnessVerification {
        accepted,
        reports,
        certificate_ok,
    })
}

impl EventualConjugacyWitness {
    /// Witness JSON: graphs, both block map tables, the depth manifest and
    /// verdicts, and the certificate when present.
    pub fn to_json(&self) -> Result<String> {
        let doc = serde_json::json!({
            "l": self.memory,
            "c": self.anticipation,
            "source": self.forward.source(),
            "target": self.forward.target(),
            "forward": serde_json::from_str::<serde_json::Value>(&self.forward.to_json()?)?,
            "backward": serde_json::from_str::<serde_json::Value>(&self.backward.to_json()?)?,
            "reports": self.reports,
            "certificate": self.certificate,
            "script": self.script,
        });
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}
