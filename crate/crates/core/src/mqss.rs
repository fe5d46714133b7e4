//! Multiparty secret sharing over a walk-generated GHZ state.
//!
//! Site layout of the shared-state generation: Bell pair `k` holds Bob `k`
//! at site `2k` and Alice's half at `2k+1`; Alice's local Bell sits at
//! `2M` (walk position) and `2M+1` (her kept qudit).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::network::{execute_schedule, plan_distribution, steiner_tree, ExecutionMode, Node, Resource, ResourceNetwork};
use crate::qudit::{
    basis_state, canonical_bell, checked_size, fidelity, fourier_op, sample_branch, shift_op, tensor, BasisTag,
    QuditState,
};
use crate::walk::{residual_frame, ProtocolSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Eavesdropper {
    #[default]
    None,
    /// Measure the transiting detecting qudit of participant `channel`
    /// (1-based) in a random basis and resend the eigenstate.
    InterceptResend { channel: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MqssConfig {
    pub local_dim: usize,
    pub participants: usize,
    pub secret: i64,
    pub detecting_pairs: usize,
    pub threshold: f64,
    pub eavesdropper: Eavesdropper,
    pub seed: u64,
}

impl MqssConfig {
    pub fn new(local_dim: usize, participants: usize, secret: i64) -> Self {
        Self {
            local_dim,
            participants,
            secret,
            detecting_pairs: 100,
            threshold: 0.05,
            eavesdropper: Eavesdropper::None,
            seed: crate::DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.local_dim < 2 {
            return Err(Error::InvalidDimension(self.local_dim));
        }
        if self.participants < 2 {
            return bad(format!("need at least 2 participants, got {}", self.participants));
        }
        if self.detecting_pairs < 1 {
            return bad("need at least one detecting pair".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} outside (0, 1)", self.threshold));
        }
        if let Eavesdropper::InterceptResend { channel } = self.eavesdropper {
            if !(1..=self.participants).contains(&channel) {
                return bad(format!("eavesdropped channel {channel} outside 1..={}", self.participants));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelCheck {
    pub pairs: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub aborted: bool,
}

/// Whether two detecting outcomes agree with the `|psi_00>` correlations:
/// equal in the computational basis, opposite in the Fourier basis.
pub fn outcomes_agree(d: usize, basis: BasisTag, alice: usize, bob: usize) -> bool {
    match basis {
        BasisTag::Computational => alice == bob,
        BasisTag::Fourier => (alice + bob).is_multiple_of(d),
    }
}

fn random_basis<R: Rng + ?Sized>(rng: &mut R) -> BasisTag {
    if rng.random::<bool>() {
        BasisTag::Fourier
    } else {
        BasisTag::Computational
    }
}

/// Eigenstate of `basis` with eigenvalue index `value`.
fn eigenstate(d: usize, basis: BasisTag, value: usize) -> Result<QuditState> {
    let s = basis_state(d, &[value])?;
    match basis {
        BasisTag::Computational => Ok(s),
        BasisTag::Fourier => s.apply(&fourier_op(d)?, &[0]),
    }
}

fn detecting_round<R: Rng + ?Sized>(d: usize, intercept: bool, rng: &mut R) -> Result<bool> {
    // Sites: Alice 0, Bob 1.
    let mut state = canonical_bell(d, 0, 0)?;
    if intercept {
        let basis = random_basis(rng);
        let b = sample_branch(&state, &[(1, basis)], rng)?;
        let alice = b.post_state.expect("Alice's qudit remains");
        state = tensor(&alice, &eigenstate(d, basis, b.outcome[0].value)?)?;
    }
    let f = fourier_op(d)?;
    state = state.apply(&f, &[0])?.apply(&f.adjoint(), &[1])?;
    let basis = random_basis(rng);
    let v = sample_branch(&state, &[(0, basis), (1, basis)], rng)?.values();
    Ok(!outcomes_agree(d, basis, v[0], v[1]))
}

pub fn channel_check_with<R: Rng + ?Sized>(
    d: usize,
    pairs: usize,
    intercept: bool,
    threshold: f64,
    rng: &mut R,
) -> Result<ChannelCheck> {
    let mut errors = 0;
    for _ in 0..pairs {
        errors += detecting_round(d, intercept, rng)? as usize;
    }
    let error_rate = if pairs == 0 { 0.0 } else { errors as f64 / pairs as f64 };
    Ok(ChannelCheck { pairs, errors, error_rate, aborted: error_rate > threshold })
}

pub fn channel_check(d: usize, pairs: usize, intercept: bool, threshold: f64, seed: u64) -> Result<ChannelCheck> {
    channel_check_with(d, pairs, intercept, threshold, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Working Bell pair between Alice (node 0) and a participant (node 2),
/// swapped through a repeater at node 1. Sites are ordered (Bob, Alice).
pub fn repeater_bell_pair(d: usize, seed: u64) -> Result<(QuditState, f64)> {
    let nodes = ["alice", "repeater", "bob"]
        .iter()
        .enumerate()
        .map(|(i, l)| Node { id: i as u32, label: l.to_string() })
        .collect();
    let net = ResourceNetwork::new(d, nodes, vec![Resource::bell(0, 1), Resource::bell(1, 2)])?;
    let tree = steiner_tree(&net, &[0, 2], false)?;
    let schedule = plan_distribution(&tree, &net)?;
    let run = execute_schedule(&schedule, ExecutionMode::Simulated, d, seed)?;
    let state = run.final_state.ok_or_else(|| Error::Network("repeater produced no state".into()))?;
    Ok((state.permute_sites(&[1, 0])?, run.fidelity.unwrap_or(0.0)))
}

#[derive(Clone, Debug, Serialize)]
pub struct SharedGhz {
    /// Sites: participants `1..=M`, then Alice.
    #[serde(skip)]
    pub state: QuditState,
    pub q_tilde: Vec<usize>,
    pub u0: usize,
    /// Overlap with the closed-form residual for the sampled outcomes.
    pub fidelity: f64,
}

/// Fuse `M` (Bob, Alice) Bell pairs and Alice's local Bell into an
/// `(M+1)`-party GHZ state.
///
/// Each coin is measured right after its walk step. Later steps never touch
/// a measured coin, so the outcome statistics equal those of the full walk
/// while only `M + 3` qudits are ever live.
pub fn generate_from_pairs<R: Rng + ?Sized>(pairs: &[QuditState], rng: &mut R) -> Result<SharedGhz> {
    let m = pairs.len();
    if m == 0 {
        return Err(Error::InvalidParameters("need at least one Bell pair".into()));
    }
    let d = pairs[0].local_dim();
    checked_size(d, m + 3)?;
    let f = fourier_op(d)?;
    let shift = shift_op(d)?;
    // Live sites: bobs[0..j], position, Alice's kept qudit.
    let mut state = canonical_bell(d, 0, 0)?;
    let mut q_tilde = Vec::with_capacity(m);
    for (j, pair) in pairs.iter().enumerate() {
        if pair.site_count() != 2 || pair.local_dim() != d {
            return Err(Error::ShapeMismatch(format!("pair {j} is not a 2-site dimension-{d} state")));
        }
        let (pos, coin) = (j, j + 3);
        state = tensor(&state, pair)?.apply(&f, &[coin])?.apply(&shift, &[coin, pos])?;
        let b = sample_branch(&state, &[(coin, BasisTag::Fourier)], rng)?;
        q_tilde.push(b.outcome[0].value);
        // [bobs.., pos, kept, bob_j] -> [bobs.., bob_j, pos, kept]
        let post = b.post_state.expect("sites remain");
        let mut order: Vec<usize> = (0..j).collect();
        order.extend([j + 2, j, j + 1]);
        state = post.permute_sites(&order)?;
    }
    let kept = m + 1;
    state = state.apply(&f.adjoint(), &[kept])?;
    let b = sample_branch(&state, &[(m, BasisTag::Computational)], rng)?;
    let u0 = b.outcome[0].value;
    let state = b.post_state.expect("sites remain");

    let mut outcome = q_tilde.clone();
    outcome.push(u0);
    let frame = residual_frame(&ProtocolSpec::ghz_from_bells_d(d, m), &outcome)?;
    let fid = fidelity(&state, &frame.state(d)?)?;
    Ok(SharedGhz { state, q_tilde, u0, fidelity: fid })
}

pub fn generate_shared_ghz(d: usize, m: usize, seed: u64) -> Result<SharedGhz> {
    let pairs = vec![canonical_bell(d, 0, 0)?; m];
    generate_from_pairs(&pairs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `p = (S - sum q~ - M r0) / M`.
pub fn encode_public(secret: i64, q_tilde: &[usize], r0: usize, m: usize) -> BigRational {
    let q: i64 = q_tilde.iter().map(|&q| q as i64).sum();
    let numer = BigInt::from(secret) - BigInt::from(q) - BigInt::from(m as i64 * r0 as i64);
    BigRational::new(numer, BigInt::from(m as i64))
}

/// `S = M p + sum q~ + M r0`.
pub fn reconstruct(p: &BigRational, q_tilde: &[usize], r0: usize, m: usize) -> BigRational {
    let q: i64 = q_tilde.iter().map(|&q| q as i64).sum();
    p * BigRational::from_integer(BigInt::from(m as i64))
        + BigRational::from_integer(BigInt::from(q + m as i64 * r0 as i64))
}

fn ratio_string<S: Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

fn ratio_strings<S: Serializer>(r: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(|x| x.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelRecord {
    pub participant: usize,
    pub eavesdropped: bool,
    pub working_pair_fidelity: f64,
    #[serde(flatten)]
    pub check: ChannelCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct MqssTranscript {
    pub config: MqssConfig,
    pub channels: Vec<ChannelRecord>,
    pub aborted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghz: Option<SharedGhz>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<usize>,
    /// Computational-basis results of the participants.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub participant_results: Vec<usize>,
    #[serde(serialize_with = "ratio_string", skip_serializing_if = "Option::is_none")]
    pub public: Option<BigRational>,
    /// `p + r0 + q~_k` per participant.
    #[serde(serialize_with = "ratio_strings", skip_serializing_if = "Vec::is_empty")]
    pub shares: Vec<BigRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstructed: Option<i64>,
}

impl MqssTranscript {
    /// Completed and the reconstruction equals the secret.
    pub fn recovered(&self) -> bool {
        !self.aborted && self.reconstructed == Some(self.config.secret)
    }
}

pub fn run_mqss(config: &MqssConfig) -> Result<MqssTranscript> {
    config.validate()?;
    let d = config.local_dim;
    let m = config.participants;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut channels = Vec::with_capacity(m);
    let mut working = Vec::with_capacity(m);
    for k in 1..=m {
        let (pair, fid) = repeater_bell_pair(d, rng.random())?;
        let eavesdropped = config.eavesdropper == Eavesdropper::InterceptResend { channel: k };
        let check = channel_check_with(d, config.detecting_pairs, eavesdropped, config.threshold, &mut rng)?;
        working.push(pair);
        channels.push(ChannelRecord { participant: k, eavesdropped, working_pair_fidelity: fid, check });
    }
    let mut transcript = MqssTranscript {
        config: config.clone(),
        aborted: channels.iter().any(|c| c.check.aborted),
        channels,
        ghz: None,
        r0: None,
        participant_results: Vec::new(),
        public: None,
        shares: Vec::new(),
        reconstructed: None,
    };
    if transcript.aborted {
        return Ok(transcript);
    }

    let ghz = generate_from_pairs(&working, &mut rng)?;
    let targets: Vec<(usize, BasisTag)> = (0..=m).map(|s| (s, BasisTag::Computational)).collect();
    let results = sample_branch(&ghz.state, &targets, &mut rng)?.values();
    let r0 = results[m];
    for (k, (&b, &q)) in results.iter().zip(&ghz.q_tilde).enumerate() {
        if b != (r0 + q) % d {
            return Err(Error::InvalidParameters(format!(
                "participant {} measured {b}, expected r0 + q~ = {}",
                k + 1,
                (r0 + q) % d
            )));
        }
    }

    let p = encode_public(config.secret, &ghz.q_tilde, r0, m);
    let shares = ghz
        .q_tilde
        .iter()
        .map(|&q| &p + BigRational::from_integer(BigInt::from((r0 + q) as i64)))
        .collect();
    let s = reconstruct(&p, &ghz.q_tilde, r0, m);
    transcript.reconstructed = if s.is_integer() { s.to_integer().to_i64() } else { None };
    transcript.participant_results = results[..m].to_vec();
    transcript.r0 = Some(r0);
    transcript.public = Some(p);
    transcript.shares = shares;
    transcript.ghz = Some(ghz);
    Ok(transcript)
}
