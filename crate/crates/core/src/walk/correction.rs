use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frame::{bell_swap_labels, residual_frame, Frame};
use super::tables;
use super::{ProtocolKind, ProtocolSpec};
use crate::qudit::{modd, OperatorMatrix, QuditState};
use crate::Result;

/// `X^shift Z^phase` on one output site (the `Z` power acts first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalGate {
    pub site: usize,
    pub shift: usize,
    pub phase: usize,
}

impl LocalGate {
    pub fn x(site: usize) -> Self {
        Self { site, shift: 1, phase: 0 }
    }

    pub fn z(site: usize) -> Self {
        Self { site, shift: 0, phase: 1 }
    }

    pub fn operator(&self, d: usize) -> Result<OperatorMatrix> {
        OperatorMatrix::weyl(d, self.shift % d, self.phase % d)
    }
}

/// Local recovery applied to the output sites, gates in application order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOp {
    pub local_dim: usize,
    pub gates: Vec<LocalGate>,
    /// Optional global phase as `(re, im)`; irrelevant to fidelity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_phase: Option<(f64, f64)>,
}

impl CorrectionOp {
    pub fn identity(local_dim: usize) -> Self {
        Self { local_dim, gates: Vec::new(), global_phase: None }
    }

    pub fn new(local_dim: usize, gates: Vec<LocalGate>) -> Self {
        Self { local_dim, gates, global_phase: None }
    }

    pub fn negated(mut self) -> Self {
        self.global_phase = Some((-1.0, 0.0));
        self
    }

    /// Correction that takes a frame state to the canonical GHZ state.
    pub fn from_frame(d: usize, frame: &Frame) -> Self {
        let gates = frame
            .offsets
            .iter()
            .enumerate()
            .map(|(site, &o)| LocalGate {
                site,
                shift: modd(-(o as i64), d),
                phase: if site == 0 { modd(-(frame.slope as i64), d) } else { 0 },
            })
            .filter(|g| g.shift != 0 || g.phase != 0)
            .collect();
        Self::new(d, gates)
    }

    /// `(site, operator)` pairs in application order.
    pub fn operators(&self) -> Result<Vec<(usize, OperatorMatrix)>> {
        self.gates.iter().map(|g| Ok((g.site, g.operator(self.local_dim)?))).collect()
    }

    pub fn apply(&self, state: &QuditState) -> Result<QuditState> {
        let mut out = state.clone();
        for (site, op) in self.operators()? {
            out = out.apply(&op, &[site])?;
        }
        if let Some((re, im)) = self.global_phase {
            let amps = out.amplitudes().iter().map(|a| a * Complex64::new(re, im)).collect();
            out = QuditState::normalized(out.local_dim(), out.site_count(), amps)?;
        }
        Ok(out)
    }

    /// Operator-product notation, e.g. `-Z_1 X_1` (rightmost acts first).
    pub fn notation(&self, labels: &[String]) -> String {
        let mut parts: Vec<String> = Vec::new();
        for g in self.gates.iter().rev() {
            let label = labels.get(g.site).cloned().unwrap_or_else(|| g.site.to_string());
            for (name, power) in [("X", g.shift), ("Z", g.phase)] {
                match power {
                    0 => {}
                    1 => parts.push(format!("{name}_{label}")),
                    p => parts.push(format!("{name}^{p}_{label}")),
                }
            }
        }
        let body = if parts.is_empty() { "I".to_string() } else { parts.join(" ") };
        match self.global_phase {
            Some((re, im)) if (re + 1.0).abs() < 1e-12 && im.abs() < 1e-12 => format!("-{body}"),
            _ => body,
        }
    }
}

impl fmt::Display for CorrectionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation(&[]))
    }
}

/// Recovery operation for one outcome of a protocol.
///
/// Bell and GHZ swaps of two qubit states and Method 1 use the published
/// tables; everything else is derived from the closed-form residual.
pub fn correction_for(spec: &ProtocolSpec, outcome: &[usize]) -> Result<CorrectionOp> {
    use ProtocolKind::*;
    let d = spec.local_dim;
    match spec.kind {
        GhzSwapD if outcome.len() == 2 => {
            return correction_for(spec, &[outcome[0], outcome[0], outcome[1]]);
        }
        BellSwap2D | GhzSwap2D | MergeMethod1 if !spec.params.retain => {
            // Validate the outcome before consulting the table.
            residual_frame(spec, outcome)?;
            let (m, _, k) = spec.mnk();
            return Ok(match spec.kind {
                BellSwap2D => tables::table1_correction(outcome),
                GhzSwap2D => tables::table2_correction(outcome),
                _ => tables::table3_correction(m, k, outcome),
            });
        }
        BellSwapD => {
            residual_frame(spec, outcome)?;
            let labels = spec.params.labels.unwrap_or([0; 4]);
            let (m2, n2) = bell_swap_labels(d, labels, outcome[0], outcome[1]);
            let gate = LocalGate { site: 0, shift: modd(-(n2 as i64), d), phase: modd(-(m2 as i64), d) };
            return Ok(if m2 == 0 && n2 == 0 {
                CorrectionOp::identity(d)
            } else {
                CorrectionOp::new(d, vec![gate])
            });
        }
        _ => {}
    }
    Ok(CorrectionOp::from_frame(d, &residual_frame(spec, outcome)?))
}
