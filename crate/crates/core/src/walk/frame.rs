//! Closed-form residual states of every protocol, as GHZ frames.

use super::ProtocolKind;
use super::ProtocolSpec;
use crate::qudit::{ghz_frame, modd, QuditState};
use crate::{Error, Result};

/// `(1/sqrt d) sum_i w^(slope i) |i+o_0, i+o_1, ..>` over the output sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub offsets: Vec<usize>,
    pub slope: usize,
}

impl Frame {
    pub fn state(&self, d: usize) -> Result<QuditState> {
        ghz_frame(d, &self.offsets, self.slope)
    }
}

fn unknown(spec: &ProtocolSpec, outcome: &[usize]) -> Error {
    Error::UnknownOutcome { protocol: spec.kind.to_string(), outcome: outcome.to_vec() }
}

fn all_equal(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

fn repeat(v: usize, n: usize) -> impl Iterator<Item = usize> {
    std::iter::repeat_n(v, n)
}

/// Residual state predicted for `outcome` (values in measurement order).
pub fn residual_frame(spec: &ProtocolSpec, outcome: &[usize]) -> Result<Frame> {
    use ProtocolKind::*;
    let d = spec.local_dim;
    let plan = spec.plan()?;
    if outcome.len() != plan.measured.len() || outcome.iter().any(|&v| v >= d) {
        return Err(unknown(spec, outcome));
    }
    let o = outcome;
    let di = d as i64;
    let m_ = |x: i64| modd(x, d);
    let sum = |v: &[usize]| v.iter().sum::<usize>() % d;
    let retain = spec.params.retain;
    let (m, n, k) = spec.mnk();

    let frame = match spec.kind {
        BellSwap2D => Frame { offsets: vec![0, (o[1] + 1) % 2], slope: o[0] },
        GhzSwap2D => return residual_frame(&ProtocolSpec::method1(3, 3, 2), o),
        MergeMethod1 => {
            let (x1, xs, u) = if retain {
                (0, &o[..k - 1], o[k - 1])
            } else {
                (o[0], &o[1..k], o[k])
            };
            let y = sum(xs);
            let c = (u + 1 + y) % 2;
            let lead = if retain { vec![1] } else { vec![] };
            Frame {
                offsets: lead.into_iter().chain(repeat(0, m - k)).chain(repeat(c, n - 1)).collect(),
                slope: (y + x1) % 2,
            }
        }
        MergeMethod2 | GhzParallelD => {
            let (xs, us) = if retain { (&o[..0], o) } else { o.split_at(k) };
            if !all_equal(us) {
                return Err(unknown(spec, o));
            }
            let (coin_offset, b_offset, slope) = if spec.kind == MergeMethod2 {
                (1, (us[0] + 1) % 2, sum(xs))
            } else {
                (0, us[0], m_(-(sum(xs) as i64)))
            };
            let lead = if retain { k } else { 0 };
            Frame {
                offsets: repeat(coin_offset, lead)
                    .chain(repeat(0, m - k))
                    .chain(repeat(b_offset, n - k))
                    .collect(),
                slope,
            }
        }
        MergeCombined => {
            let l = spec.params.l.unwrap_or(0);
            let n_prime = sum(&o[..l]);
            let y = sum(&o[l..k]);
            let us = &o[k..];
            let ul = us[l - 1];
            if us[..l - 1].iter().any(|&u| u != (ul + y) % 2) {
                return Err(unknown(spec, o));
            }
            let c = (ul + 1 + y) % 2;
            Frame {
                offsets: repeat(0, m - k).chain(repeat(c, n - l)).collect(),
                slope: (y + n_prime) % 2,
            }
        }
        BellSwapD => {
            let [lm, ln, lp, lq] = spec.params.labels.unwrap_or([0; 4]);
            let (m2, n2) = bell_swap_labels(d, [lm, ln, lp, lq], o[0], o[1]);
            Frame { offsets: vec![0, m_(-(n2 as i64))], slope: m2 }
        }
        GhzSwapD => {
            if o[0] != o[1] {
                return Err(unknown(spec, o));
            }
            Frame { offsets: vec![0, o[2], o[2]], slope: m_(-(o[0] as i64)) }
        }
        GhzMultiCoinD => {
            let (ps, u) = o.split_at(o.len() - 1);
            if !all_equal(ps) {
                return Err(unknown(spec, o));
            }
            Frame {
                offsets: std::iter::once(0).chain(repeat(u[0], n - 1)).collect(),
                slope: m_(-(ps[0] as i64)),
            }
        }
        GhzFromBellsD => {
            let (qs, u) = o.split_at(o.len() - 1);
            Frame {
                offsets: qs.iter().copied().chain(std::iter::once(0)).collect(),
                slope: m_(-(u[0] as i64)),
            }
        }
        TriangleMerge2D => {
            let (u2, u4, u6) = (o[3], o[4], o[5]);
            if (u2 + u4 + u6) % 2 != 1 {
                return Err(unknown(spec, o));
            }
            Frame { offsets: vec![0, (u2 + 1) % 2, (u2 + u4) % 2], slope: (o[0] + o[1] + o[2]) % 2 }
        }
        TriangleMergeD => {
            let (p1, u1, p2, p3, u2, u3) = (o[0], o[1], o[2], o[3], o[4], o[5]);
            if (u1 + u2) % d != u3 {
                return Err(unknown(spec, o));
            }
            Frame {
                offsets: vec![0, u1, m_(-(u2 as i64))],
                slope: m_(-((p1 + p2 + p3) as i64 % di)),
            }
        }
    };
    Ok(frame)
}

/// Output Bell labels `(m+p-k0, n+q-u0) mod d` of a d-dimensional Bell swap.
pub fn bell_swap_labels(d: usize, labels: [usize; 4], k0: usize, u0: usize) -> (usize, usize) {
    let [m, n, p, q] = labels.map(|v| v as i64);
    (modd(m + p - k0 as i64, d), modd(n + q - u0 as i64, d))
}
