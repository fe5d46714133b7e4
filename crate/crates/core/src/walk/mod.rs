//! Walk-based entanglement swapping and merging protocols.
//!
//! A walk step applies a coin unitary to the coin site and then the
//! conditional shift `|k>|j> -> |k>|j-k>` to (coin, position). Each protocol
//! builds a product of Bell/GHZ resources, runs its walks, measures the
//! coins and positions, and recovers a canonical GHZ state on the remaining
//! sites with local `X^a Z^b` gates.
//!
//! Site layouts:
//!
//! | kind | sites |
//! |------|-------|
//! | `BellSwap2D`, `BellSwapD` | particles 1..4 |
//! | `GhzSwap2D`, `GhzSwapD` | particles 1..6 |
//! | methods, `GhzParallelD`, `GhzMultiCoinD` | `a1..am, b1..bn` |
//! | `GhzFromBellsD` | particles 1..2M+2, Bells on (2j-1, 2j) |
//! | triangle merges | `a, q1, q6, q2, b, q3, q4, q5, c` |

mod correction;
mod frame;
mod spec;
pub mod tables;

pub use correction::{correction_for, CorrectionOp, LocalGate};
pub use frame::{bell_swap_labels, residual_frame, Frame};
pub use spec::{ProtocolKind, ProtocolParams, ProtocolSpec};
pub use tables::{verify_table, RowCheck, TableReport};

use rand::Rng;
use serde::Serialize;

use crate::qudit::{
    canonical_bell, canonical_ghz, fidelity, fourier_op, measure_all_branches, sample_branch,
    shift_op, tensor, OperatorMatrix, QuditState,
};
use crate::{Error, Result};
use spec::{Coin, Input, Step};

/// Fidelity threshold used for every recovery check.
pub const FIDELITY_TOL: f64 = 1e-9;

/// Apply `coin_op` to `coin_site`, then the conditional shift to
/// `(coin_site, pos_site)`.
pub fn walk_step(
    state: &QuditState,
    coin_site: usize,
    pos_site: usize,
    coin_op: &OperatorMatrix,
) -> Result<QuditState> {
    if coin_site == pos_site {
        return Err(Error::InvalidSites(format!("coin and position share site {coin_site}")));
    }
    if coin_op.arity() != 1 {
        return Err(Error::InvalidSites(format!("coin arity {} != 1", coin_op.arity())));
    }
    let d = state.local_dim();
    state.apply(coin_op, &[coin_site])?.apply(&shift_op(d)?, &[coin_site, pos_site])
}

/// One measurement outcome of a protocol run.
#[derive(Clone, Debug, Serialize)]
pub struct BranchRecord {
    /// Measured values in the protocol's measurement order.
    pub outcome: Vec<usize>,
    pub probability: f64,
    /// Pre-correction state of the output sites.
    #[serde(skip)]
    pub state: QuditState,
    pub correction: CorrectionOp,
    /// Correction in operator notation using the output labels.
    pub correction_text: String,
    /// Overlap of the pre-correction state with the closed-form residual.
    pub residual_fidelity: f64,
    /// Overlap of the corrected state with the canonical GHZ state.
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolResult {
    pub protocol: ProtocolKind,
    pub d: usize,
    pub params: ProtocolParams,
    /// Site labels of the measured sites, in outcome order.
    pub measured_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub branches: Vec<BranchRecord>,
}

impl ProtocolResult {
    pub fn output_parties(&self) -> usize {
        self.output_labels.len()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.branches.iter().map(|b| b.fidelity).fold(1.0, f64::min)
    }

    /// Every branch recovers the canonical state and probabilities sum to 1.
    pub fn all_recovered(&self) -> bool {
        (self.total_probability() - 1.0).abs() <= FIDELITY_TOL
            && self
                .branches
                .iter()
                .all(|b| b.fidelity >= 1.0 - FIDELITY_TOL && b.residual_fidelity >= 1.0 - FIDELITY_TOL)
    }
}

fn coin_matrix(coin: Coin, d: usize) -> Result<OperatorMatrix> {
    match coin {
        Coin::Identity => OperatorMatrix::identity(d, 1),
        Coin::X => OperatorMatrix::x(d),
        Coin::Hadamard | Coin::Fourier => fourier_op(d),
    }
}

/// The protocol's initial product of Bell / GHZ resources.
pub fn initial_state(spec: &ProtocolSpec) -> Result<QuditState> {
    spec.validate()?;
    let d = spec.local_dim;
    let mut state: Option<QuditState> = None;
    for input in &spec.plan()?.inputs {
        let part = match *input {
            Input::Ghz(k) => canonical_ghz(d, k)?,
            Input::Bell(m, n) => canonical_bell(d, m, n)?,
        };
        state = Some(match state {
            None => part,
            Some(s) => tensor(&s, &part)?,
        });
    }
    Ok(state.expect("every plan has inputs"))
}

/// Build the post-walk state of a protocol, before any measurement.
pub fn prepare_walk_state(spec: &ProtocolSpec) -> Result<QuditState> {
    apply_walks(spec, &initial_state(spec)?)
}

/// Run the protocol's coin/shift sequence on a caller-supplied input state
/// laid out like [`initial_state`].
pub fn apply_walks(spec: &ProtocolSpec, input: &QuditState) -> Result<QuditState> {
    spec.validate()?;
    let plan = spec.plan()?;
    let d = spec.local_dim;
    if input.local_dim() != d || input.site_count() != plan.site_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} expects {} sites of dimension {d}, got {}^{}",
            spec.kind,
            plan.site_count(),
            input.local_dim(),
            input.site_count()
        )));
    }
    let mut state = input.clone();
    for step in &plan.steps {
        state = match *step {
            Step::Walk { coin, pos, op } => walk_step(&state, coin, pos, &coin_matrix(op, d)?)?,
            Step::InverseFourier(site) => state.apply(&fourier_op(d)?.adjoint(), &[site])?,
        };
    }
    Ok(state)
}

/// Run a protocol exhaustively over all measurement outcomes.
pub fn run_protocol(spec: &ProtocolSpec) -> Result<ProtocolResult> {
    let state = prepare_walk_state(spec)?;
    let plan = spec.plan()?;
    let d = spec.local_dim;
    let outputs = plan.outputs();
    let output_labels: Vec<String> = outputs.iter().map(|&s| plan.labels[s].clone()).collect();
    let target = canonical_ghz(d, outputs.len())?;

    let mut branches = Vec::new();
    for branch in measure_all_branches(&state, &plan.measured)? {
        let outcome = branch.values();
        let post = branch.post_state.expect("protocols keep output sites");
        let frame = residual_frame(spec, &outcome)?;
        let residual_fidelity = fidelity(&frame.state(d)?, &post)?;
        let correction = correction_for(spec, &outcome)?;
        let fid = fidelity(&correction.apply(&post)?, &target)?;
        branches.push(BranchRecord {
            correction_text: correction.notation(&output_labels),
            outcome,
            probability: branch.probability,
            state: post,
            correction,
            residual_fidelity,
            fidelity: fid,
        });
    }
    Ok(ProtocolResult {
        protocol: spec.kind,
        d,
        params: spec.params.clone(),
        measured_labels: plan.measured.iter().map(|m| plan.labels[m.0].clone()).collect(),
        output_labels,
        branches,
    })
}

/// A single sampled execution of a protocol.
#[derive(Clone, Debug)]
pub struct SampledRun {
    pub outcome: Vec<usize>,
    pub probability: f64,
    pub correction: CorrectionOp,
    /// Corrected output state.
    pub state: QuditState,
    /// Overlap of the corrected state with the canonical GHZ state.
    pub fidelity: f64,
}

/// Walk, measure one Born-sampled branch and correct it.
pub fn sample_protocol<R: Rng + ?Sized>(
    spec: &ProtocolSpec,
    input: &QuditState,
    rng: &mut R,
) -> Result<SampledRun> {
    let state = apply_walks(spec, input)?;
    let plan = spec.plan()?;
    let branch = sample_branch(&state, &plan.measured, rng)?;
    let outcome = branch.values();
    let post = branch.post_state.expect("protocols keep output sites");
    let correction = correction_for(spec, &outcome)?;
    let corrected = correction.apply(&post)?;
    let fid = fidelity(&corrected, &canonical_ghz(spec.local_dim, corrected.site_count())?)?;
    Ok(SampledRun {
        outcome,
        probability: branch.probability,
        correction,
        state: corrected,
        fidelity: fid,
    })
}
