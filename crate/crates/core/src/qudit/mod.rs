//! Dense qudit states, unitary operators and exhaustive measurement.
//!
//! Amplitude index encoding is big-endian over sites: for `n` sites of local
//! dimension `d`, basis state `|v0 v1 .. v(n-1)>` lives at index
//! `v0*d^(n-1) + v1*d^(n-2) + .. + v(n-1)`.

mod measure;
mod operator;
mod state;

pub use measure::{measure_all_branches, sample_branch, BasisTag, Branch, Measured};
pub use operator::{fourier_op, pauli_ops, shift_op, OperatorMatrix, PauliOps};
pub use state::{
    basis_state, canonical_bell, canonical_ghz, fidelity, ghz_frame, tensor, QuditState,
    MAX_AMPLITUDES,
};

use num_complex::Complex64;

/// `omega^k` with `omega = exp(2 pi i / d)`; `k` is reduced mod `d` first.
pub fn omega_pow(d: usize, k: i64) -> Complex64 {
    let r = k.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r / d as f64)
}

/// Reduce a signed label into `[0, d)`.
pub fn modd(x: i64, d: usize) -> usize {
    x.rem_euclid(d as i64) as usize
}

/// `d^n` if it fits under the amplitude cap.
pub fn checked_size(d: usize, n: usize) -> crate::Result<usize> {
    if d < 2 {
        return Err(crate::Error::InvalidDimension(d));
    }
    let mut size: usize = 1;
    for _ in 0..n {
        size = size.saturating_mul(d);
        if size > MAX_AMPLITUDES {
            return Err(crate::Error::SizeCap { dim: d, sites: n, max: MAX_AMPLITUDES });
        }
    }
    Ok(size)
}
