//! Readout-error mitigation with per-qubit transfer matrices.
//!
//! Bitstrings are indexed with qubit 0 as the most significant bit.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::qudit::{canonical_ghz, QuditState};
use crate::walk::ProtocolResult;
use crate::{Error, Result};

/// Determinants below this are reported as near-singular.
pub const NEAR_SINGULAR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixMode {
    /// `[[F0, 1-F1], [1-F1, F1]]`.
    #[default]
    Symmetric,
    /// `[[F0, 1-F1], [1-F0, F1]]`.
    ColumnStochastic,
}

impl std::str::FromStr for MatrixMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Self::Symmetric),
            "stochastic" | "column-stochastic" => Ok(Self::ColumnStochastic),
            _ => Err(Error::Readout(format!("unknown matrix mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub f0: f64,
    pub f1: f64,
    pub mode: MatrixMode,
    pub entries: [[f64; 2]; 2],
}

pub fn transfer_matrix(f0: f64, f1: f64, mode: MatrixMode) -> Result<TransferMatrix> {
    if !(0.0..=1.0).contains(&f0) || !(0.0..=1.0).contains(&f1) {
        return Err(Error::Readout(format!("readout fidelities ({f0}, {f1}) outside [0, 1]")));
    }
    let lower = match mode {
        MatrixMode::Symmetric => 1.0 - f1,
        MatrixMode::ColumnStochastic => 1.0 - f0,
    };
    let m = TransferMatrix { f0, f1, mode, entries: [[f0, 1.0 - f1], [lower, f1]] };
    let det = m.determinant();
    if det.abs() < 1e-12 {
        return Err(Error::SingularMatrix { f0, f1 });
    }
    if det.abs() < NEAR_SINGULAR {
        warn!("transfer matrix for F0={f0}, F1={f1} is near-singular (det {det:.2e})");
    }
    Ok(m)
}

impl TransferMatrix {
    pub fn identity() -> Self {
        transfer_matrix(1.0, 1.0, MatrixMode::ColumnStochastic).expect("identity is regular")
    }

    pub fn determinant(&self) -> f64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn inverse(&self) -> [[f64; 2]; 2] {
        let e = &self.entries;
        let det = self.determinant();
        [[e[1][1] / det, -e[0][1] / det], [-e[1][0] / det, e[0][0] / det]]
    }
}

/// Apply `factors[0] ⊗ factors[1] ⊗ ...` to `v` without forming the product.
pub fn apply_factorwise(v: &[f64], factors: &[[[f64; 2]; 2]]) -> Result<Vec<f64>> {
    let n = factors.len();
    if v.len() != 1 << n {
        return Err(Error::Readout(format!("vector of length {} does not match {n} qubits", v.len())));
    }
    let mut out = v.to_vec();
    for (q, m) in factors.iter().enumerate() {
        let stride = 1 << (n - 1 - q);
        for base in 0..out.len() {
            if base & stride != 0 {
                continue;
            }
            let (a, b) = (out[base], out[base | stride]);
            out[base] = m[0][0] * a + m[0][1] * b;
            out[base | stride] = m[1][0] * a + m[1][1] * b;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    pub qubits: usize,
    pub counts: Vec<u64>,
}

impl CountVector {
    pub fn new(qubits: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != 1 << qubits {
            return Err(Error::Readout(format!("{} counts for {qubits} qubits", counts.len())));
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::Readout("count vector has no shots".into()));
        }
        Ok(Self { qubits, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let t = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Parse a `{"0101": 12, ...}` map; all keys must share one length.
    pub fn from_bitstring_map(map: &BTreeMap<String, u64>) -> Result<Self> {
        let qubits = map.keys().next().map(|k| k.len()).unwrap_or(0);
        let mut counts = vec![0; 1 << qubits];
        for (key, &c) in map {
            if key.len() != qubits || !key.chars().all(|ch| ch == '0' || ch == '1') {
                return Err(Error::Readout(format!("bad bitstring `{key}`")));
            }
            counts[usize::from_str_radix(key, 2).expect("checked digits")] += c;
        }
        Self::new(qubits, counts)
    }

    pub fn to_bitstring_map(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (format!("{i:0w$b}", w = self.qubits), c))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Corrected {
    pub probabilities: Vec<f64>,
    /// Sum of the negative entries' magnitudes before clipping.
    pub clipped_mass: f64,
}

pub fn correct_counts(counts: &CountVector, matrices: &[TransferMatrix]) -> Result<Corrected> {
    if matrices.len() != counts.qubits {
        return Err(Error::Readout(format!(
            "{} matrices for {} qubits",
            matrices.len(),
            counts.qubits
        )));
    }
    let inverses: Vec<_> = matrices.iter().map(|m| m.inverse()).collect();
    let raw = apply_factorwise(&counts.frequencies(), &inverses)?;
    let clipped_mass = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let clipped: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::Readout("corrected distribution has no positive mass".into()));
    }
    Ok(Corrected { probabilities: clipped.iter().map(|x| x / total).collect(), clipped_mass })
}

/// Multinomial sample of `shots` readouts from `M P`, normalized first
/// since the symmetric form does not preserve total probability.
pub fn synthesize_counts(
    true_probs: &[f64],
    matrices: &[TransferMatrix],
    shots: u64,
    seed: u64,
) -> Result<CountVector> {
    let total: f64 = true_probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 || true_probs.iter().any(|&p| p < 0.0) {
        return Err(Error::Readout(format!("probabilities sum to {total}, expected 1")));
    }
    if shots == 0 {
        return Err(Error::Readout("shots must be at least 1".into()));
    }
    let factors: Vec<_> = matrices.iter().map(|m| m.entries).collect();
    let noisy = apply_factorwise(true_probs, &factors)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = shots;
    let mut mass: f64 = noisy.iter().sum();
    let mut counts = Vec::with_capacity(noisy.len());
    for &p in &noisy {
        let c = if left == 0 || mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).map_err(|e| Error::Readout(e.to_string()))?.sample(&mut rng)
        };
        counts.push(c);
        left -= c;
        mass -= p;
    }
    CountVector::new(matrices.len(), counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceRecord {
    pub qubit: String,
    #[serde(default)]
    pub max_freq_ghz: Option<f64>,
    #[serde(default)]
    pub idle_freq_ghz: Option<f64>,
    #[serde(default)]
    pub readout_freq_ghz: Option<f64>,
    #[serde(default)]
    pub anharmonicity_ghz: Option<f64>,
    #[serde(default)]
    pub coupling_mhz: Option<f64>,
    #[serde(default)]
    pub t1_us: Option<f64>,
    #[serde(default)]
    pub t2_star_us: Option<f64>,
    pub f0: f64,
    pub f1: f64,
}

impl DeviceRecord {
    pub fn matrix(&self, mode: MatrixMode) -> Result<TransferMatrix> {
        transfer_matrix(self.f0, self.f1, mode)
    }
}

pub fn read_device_csv<R: Read>(reader: R) -> Result<Vec<DeviceRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let records = rdr.deserialize().collect::<std::result::Result<Vec<DeviceRecord>, _>>()?;
    Ok(records)
}

/// Device records from a `.csv` file or a JSON array.
pub fn load_device(path: impl AsRef<Path>) -> Result<Vec<DeviceRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_reader(file)?)
    } else {
        read_device_csv(file)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoisyFidelity {
    pub depolarizing: f64,
    pub shots: u64,
    /// Outcome-probability-weighted mean over branches.
    pub fidelity: f64,
    pub per_branch: Vec<f64>,
    pub max_clipped_mass: f64,
}

/// Fidelity of `(1-p)|psi><psi| + p I/2^n` with `target`: the diagonal part
/// comes from corrected synthetic counts, the coherences are exact.
pub fn noisy_state_fidelity(
    state: &QuditState,
    target: &QuditState,
    matrices: &[TransferMatrix],
    p: f64,
    shots: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if state.local_dim() != 2 || target.local_dim() != 2 {
        return Err(Error::Readout("readout model covers qubits only".into()));
    }
    if state.site_count() != target.site_count() {
        return Err(Error::ShapeMismatch("state and target sizes differ".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Readout(format!("depolarizing probability {p} outside [0, 1]")));
    }
    let psi = state.amplitudes();
    let g = target.amplitudes();
    let dim = psi.len() as f64;
    let diag: Vec<f64> = psi.iter().map(|a| (1.0 - p) * a.norm_sqr() + p / dim).collect();
    let counts = synthesize_counts(&diag, matrices, shots, seed)?;
    let corrected = correct_counts(&counts, matrices)?;
    let diagonal: f64 = corrected.probabilities.iter().zip(g).map(|(q, a)| q * a.norm_sqr()).sum();
    let overlap = g.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<num_complex::Complex64>();
    let exact_diag: f64 = g.iter().zip(psi).map(|(a, b)| a.norm_sqr() * b.norm_sqr()).sum();
    let coherence = (1.0 - p) * (overlap.norm_sqr() - exact_diag);
    Ok((diagonal + coherence, corrected.clipped_mass))
}

/// Corrected output of every branch of `result`, scored against the
/// canonical GHZ state over the output qubits.
pub fn protocol_fidelity_under_noise(
    result: &ProtocolResult,
    matrices: &[TransferMatrix],
    p: f64,
    shots: u64,
    seed: u64,
) -> Result<NoisyFidelity> {
    if result.d != 2 {
        return Err(Error::Readout("readout model covers qubits only".into()));
    }
    let target = canonical_ghz(2, result.output_parties())?;
    let mut per_branch = Vec::with_capacity(result.branches.len());
    let mut mean = 0.0;
    let mut max_clipped = 0.0f64;
    for (i, b) in result.branches.iter().enumerate() {
        let state = b.correction.apply(&b.state)?;
        let (f, clipped) = noisy_state_fidelity(&state, &target, matrices, p, shots, seed.wrapping_add(i as u64))?;
        mean += b.probability * f;
        max_clipped = max_clipped.max(clipped);
        per_branch.push(f);
    }
    Ok(NoisyFidelity {
        depolarizing: p,
        shots,
        fidelity: mean / result.total_probability(),
        per_branch,
        max_clipped_mass: max_clipped,
    })
}
