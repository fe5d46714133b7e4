use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{checked_size, modd, omega_pow, OperatorMatrix};
use crate::{Error, Result};

/// Hard cap on the number of amplitudes in a dense state.
pub const MAX_AMPLITUDES: usize = 1 << 22;

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state of `site_count` qudits of dimension `local_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    dim: usize,
    sites: usize,
    amps: Vec<Complex64>,
}

impl QuditState {
    /// Build a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(dim: usize, sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidSites("a state needs at least one site".into()));
        }
        let size = checked_size(dim, sites)?;
        if amps.len() != size {
            return Err(Error::ShapeMismatch(format!(
                "expected {size} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { dim, sites, amps })
    }

    /// Normalize arbitrary (nonzero) amplitudes into a state.
    pub fn normalized(dim: usize, sites: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(dim, sites, amps)
    }

    pub(crate) fn from_raw(dim: usize, sites: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), dim.pow(sites as u32));
        Self { dim, sites, amps }
    }

    pub fn local_dim(&self) -> usize {
        self.dim
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, values: &[usize]) -> Complex64 {
        self.amps[self.index_of(values)]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Flat index of a basis state given per-site values.
    pub fn index_of(&self, values: &[usize]) -> usize {
        values.iter().fold(0, |acc, &v| acc * self.dim + v)
    }

    /// Per-site values of a flat index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sites];
        for slot in out.iter_mut().rev() {
            *slot = index % self.dim;
            index /= self.dim;
        }
        out
    }

    pub(crate) fn stride(&self, site: usize) -> usize {
        self.dim.pow((self.sites - 1 - site) as u32)
    }

    /// Apply `op` to the listed sites (first listed site is the most
    /// significant digit of the operator's index).
    pub fn apply(&self, op: &OperatorMatrix, sites: &[usize]) -> Result<QuditState> {
        if op.local_dim() != self.dim {
            return Err(Error::DimensionMismatch(op.local_dim(), self.dim));
        }
        if op.arity() != sites.len() {
            return Err(Error::InvalidSites(format!(
                "operator arity {} but {} sites given",
                op.arity(),
                sites.len()
            )));
        }
        check_sites(sites, self.sites)?;

        let d = self.dim;
        let strides: Vec<usize> = sites.iter().map(|&s| self.stride(s)).collect();
        let sub = op.size();
        let offsets: Vec<usize> = (0..sub)
            .map(|j| {
                let mut rem = j;
                let mut off = 0;
                for st in strides.iter().rev() {
                    off += (rem % d) * st;
                    rem /= d;
                }
                off
            })
            .collect();

        let entries = op.entries();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); sub];
        for base in 0..self.amps.len() {
            if strides.iter().any(|&st| (base / st) % d != 0) {
                continue;
            }
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &entries[r * sub..(r + 1) * sub];
                out[base + off] = row.iter().zip(&buf).map(|(m, v)| m * v).sum();
            }
        }
        Ok(Self::from_raw(d, self.sites, out))
    }

    /// Reorder sites: site `i` of the result is site `order[i]` of `self`.
    pub fn permute_sites(&self, order: &[usize]) -> Result<QuditState> {
        if order.len() != self.sites {
            return Err(Error::InvalidSites(format!(
                "permutation of length {} for {} sites",
                order.len(),
                self.sites
            )));
        }
        check_sites(order, self.sites)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            let old = self.digits(idx);
            let new: Vec<usize> = order.iter().map(|&o| old[o]).collect();
            out[self.index_of(&new)] = *amp;
        }
        Ok(Self::from_raw(self.dim, self.sites, out))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuditState) -> Result<Complex64> {
        if self.dim != other.dim || self.sites != other.sites {
            return Err(Error::ShapeMismatch(format!(
                "{}^{} vs {}^{}",
                self.dim, self.sites, other.dim, other.sites
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

pub(crate) fn check_sites(sites: &[usize], n: usize) -> Result<()> {
    for (i, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::InvalidSites(format!("site {s} out of range for {n} sites")));
        }
        if sites[..i].contains(&s) {
            return Err(Error::InvalidSites(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Product basis state `|v0 v1 ..>`.
pub fn basis_state(d: usize, values: &[usize]) -> Result<QuditState> {
    if values.is_empty() {
        return Err(Error::InvalidSites("no site values given".into()));
    }
    let size = checked_size(d, values.len())?;
    if let Some(&v) = values.iter().find(|&&v| v >= d) {
        return Err(Error::ValueOutOfRange { value: v, dim: d });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    let idx = values.iter().fold(0, |acc, &v| acc * d + v);
    amps[idx] = Complex64::new(1.0, 0.0);
    Ok(QuditState::from_raw(d, values.len(), amps))
}

/// Generalized Bell state `(1/sqrt d) sum_i w^(m i) |i, i-n>`.
pub fn canonical_bell(d: usize, m: usize, n: usize) -> Result<QuditState> {
    checked_size(d, 2)?;
    for v in [m, n] {
        if v >= d {
            return Err(Error::ValueOutOfRange { value: v, dim: d });
        }
    }
    ghz_frame(d, &[0, modd(-(n as i64), d)], m)
}

/// `(1/sqrt d) sum_i |i, i, .., i>` on `n_sites` parties.
pub fn canonical_ghz(d: usize, n_sites: usize) -> Result<QuditState> {
    if n_sites < 2 {
        return Err(Error::InvalidSites(format!("GHZ needs at least 2 sites, got {n_sites}")));
    }
    ghz_frame(d, &vec![0; n_sites], 0)
}

/// GHZ-type state `(1/sqrt d) sum_i w^(slope i) |i+o_0, i+o_1, ..>`.
///
/// Every residual state produced by the walk protocols has this shape.
pub fn ghz_frame(d: usize, offsets: &[usize], slope: usize) -> Result<QuditState> {
    if offsets.is_empty() {
        return Err(Error::InvalidSites("empty frame".into()));
    }
    let size = checked_size(d, offsets.len())?;
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    for i in 0..d {
        let idx = offsets.iter().fold(0, |acc, &o| acc * d + (i + o) % d);
        amps[idx] += omega_pow(d, (slope * i) as i64) * scale;
    }
    Ok(QuditState::from_raw(d, offsets.len(), amps))
}

/// `a (x) b`, sites of `a` first.
pub fn tensor(a: &QuditState, b: &QuditState) -> Result<QuditState> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(a.dim, b.dim));
    }
    checked_size(a.dim, a.sites + b.sites)?;
    let mut amps = Vec::with_capacity(a.amps.len() * b.amps.len());
    for x in &a.amps {
        amps.extend(b.amps.iter().map(|y| x * y));
    }
    Ok(QuditState::from_raw(a.dim, a.sites + b.sites, amps))
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &QuditState, b: &QuditState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    local_dim: usize,
    site_count: usize,
    amplitudes: Vec<(f64, f64)>,
}

impl Serialize for QuditState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            local_dim: self.dim,
            site_count: self.sites,
            amplitudes: self.amps.iter().map(|a| (a.re, a.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuditState {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = StateRepr::deserialize(de)?;
        let amps = r.amplitudes.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        QuditState::from_amplitudes(r.local_dim, r.site_count, amps)
            .map_err(serde::de::Error::custom)
    }
}
