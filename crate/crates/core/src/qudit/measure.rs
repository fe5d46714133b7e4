use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::check_sites;
use super::{fourier_op, QuditState};
use crate::{Error, Result};

/// Branches below this probability are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Measurement basis for one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    Computational,
    /// `|k~> = (1/sqrt d) sum_l w^(kl) |l>`; result `k`.
    Fourier,
}

/// One measured site of a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measured {
    pub site: usize,
    pub basis: BasisTag,
    pub value: usize,
}

/// One measurement outcome with its probability and renormalized remainder.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: Vec<Measured>,
    pub probability: f64,
    /// State of the unmeasured sites in ascending site order; `None` when
    /// every site was measured.
    pub post_state: Option<QuditState>,
}

impl Branch {
    pub fn values(&self) -> Vec<usize> {
        self.outcome.iter().map(|m| m.value).collect()
    }
}

/// Enumerate every outcome of measuring `targets` (in the listed order).
pub fn measure_all_branches(
    state: &QuditState,
    targets: &[(usize, BasisTag)],
) -> Result<Vec<Branch>> {
    if targets.is_empty() {
        return Err(Error::InvalidSites("empty measurement target list".into()));
    }
    let sites: Vec<usize> = targets.iter().map(|t| t.0).collect();
    check_sites(&sites, state.site_count())?;

    let d = state.local_dim();
    let n = state.site_count();
    let mut rotated = state.clone();
    let finv = fourier_op(d)?.adjoint();
    for &(site, basis) in targets {
        if basis == BasisTag::Fourier {
            rotated = rotated.apply(&finv, &[site])?;
        }
    }

    let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let k = sites.len();
    let outcomes = d.pow(k as u32);
    let rest_size = d.pow(rest.len() as u32);
    let mut buckets = vec![Complex64::new(0.0, 0.0); outcomes * rest_size];
    for (idx, amp) in rotated.amplitudes().iter().enumerate() {
        let digits = rotated.digits(idx);
        let o = sites.iter().fold(0, |acc, &s| acc * d + digits[s]);
        let r = rest.iter().fold(0, |acc, &s| acc * d + digits[s]);
        buckets[o * rest_size + r] = *amp;
    }

    let mut branches = Vec::new();
    for o in 0..outcomes {
        let chunk = &buckets[o * rest_size..(o + 1) * rest_size];
        let p: f64 = chunk.iter().map(|a| a.norm_sqr()).sum();
        if p < PRUNE_THRESHOLD {
            continue;
        }
        let mut rem = o;
        let mut values = vec![0; k];
        for v in values.iter_mut().rev() {
            *v = rem % d;
            rem /= d;
        }
        let outcome = targets
            .iter()
            .zip(values)
            .map(|(&(site, basis), value)| Measured { site, basis, value })
            .collect();
        let post_state = if rest.is_empty() {
            None
        } else {
            let s = p.sqrt();
            let amps = chunk.iter().map(|a| a / s).collect();
            Some(QuditState::from_raw(d, rest.len(), amps))
        };
        branches.push(Branch { outcome, probability: p, post_state });
    }
    Ok(branches)
}

/// Draw one branch according to the Born rule.
pub fn sample_branch<R: Rng + ?Sized>(
    state: &QuditState,
    targets: &[(usize, BasisTag)],
    rng: &mut R,
) -> Result<Branch> {
    let mut branches = measure_all_branches(state, targets)?;
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    let mut u = rng.random::<f64>() * total;
    let last = branches.len() - 1;
    for (i, b) in branches.iter().enumerate() {
        if u < b.probability || i == last {
            return Ok(branches.swap_remove(i));
        }
        u -= b.probability;
    }
    unreachable!("branch list is never empty")
}
