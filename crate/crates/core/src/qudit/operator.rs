use num_complex::Complex64;

use super::{checked_size, modd, omega_pow};
use crate::{Error, Result};

const UNITARY_TOL: f64 = 1e-10;

/// A unitary on `arity` sites of dimension `local_dim`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    arity: usize,
    size: usize,
    entries: Vec<Complex64>,
}

impl OperatorMatrix {
    /// Build from row-major entries; fails unless unitary within 1e-10.
    pub fn from_entries(dim: usize, arity: usize, entries: Vec<Complex64>) -> Result<Self> {
        let op = Self::unchecked(dim, arity, entries)?;
        let dev = op.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(op)
    }

    fn unchecked(dim: usize, arity: usize, entries: Vec<Complex64>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidSites("operator arity must be at least 1".into()));
        }
        let size = checked_size(dim, arity)?;
        if entries.len() != size * size {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} entries, got {}",
                size,
                size,
                entries.len()
            )));
        }
        Ok(Self { dim, arity, size, entries })
    }

    fn from_fn(dim: usize, arity: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let size = checked_size(dim, arity)?;
        let entries = (0..size * size).map(|i| f(i / size, i % size)).collect();
        Self::unchecked(dim, arity, entries)
    }

    /// Permutation operator `|j> -> |map(j)>` on one site.
    fn permutation(dim: usize, map: impl Fn(usize) -> usize) -> Result<Self> {
        Self::from_fn(dim, 1, |r, c| if map(c) == r { one() } else { zero() })
    }

    pub fn identity(dim: usize, arity: usize) -> Result<Self> {
        Self::from_fn(dim, arity, |r, c| if r == c { one() } else { zero() })
    }

    /// Single-qubit Hadamard.
    pub fn hadamard() -> Self {
        fourier_op(2).expect("d=2 is valid")
    }

    /// Generalized shift `X|i> = |i+1>`.
    pub fn x(dim: usize) -> Result<Self> {
        Self::permutation(dim, |j| (j + 1) % dim)
    }

    /// Generalized clock `Z|i> = w^i |i>`.
    pub fn z(dim: usize) -> Result<Self> {
        Self::from_fn(dim, 1, |r, c| if r == c { omega_pow(dim, r as i64) } else { zero() })
    }

    /// `X^shift Z^phase` (the `Z` power acts first).
    pub fn weyl(dim: usize, shift: usize, phase: usize) -> Result<Self> {
        Self::from_fn(dim, 1, |r, c| {
            if r == (c + shift) % dim {
                omega_pow(dim, (phase * c) as i64)
            } else {
                zero()
            }
        })
    }

    pub fn local_dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Matrix side length `d^arity`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.size + col]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.size;
        let entries = (0..n * n).map(|i| self.entries[(i % n) * n + i / n].conj()).collect();
        Self { entries, ..*self }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.arity != other.arity {
            return Err(Error::ShapeMismatch("operator product of unequal shapes".into()));
        }
        let n = self.size;
        let mut entries = vec![zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == zero() {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        Ok(Self { entries, ..*self })
    }

    /// Kronecker product, `self` on the leading sites.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let (a, b) = (self.size, other.size);
        Self::from_fn(self.dim, self.arity + other.arity, |r, c| {
            self.entries[(r / b) * a + c / b] * other.entries[(r % b) * b + c % b]
        })
    }

    /// Multiply every entry by a scalar phase.
    pub fn scaled(&self, phase: Complex64) -> Self {
        Self { entries: self.entries.iter().map(|e| e * phase).collect(), ..*self }
    }

    /// Largest entrywise deviation of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.size;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let v: Complex64 =
                    (0..n).map(|k| self.entries[k * n + r].conj() * self.entries[k * n + c]).sum();
                let target = if r == c { one() } else { zero() };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Quantum Fourier transform `F[k][l] = w^(kl) / sqrt d`.
pub fn fourier_op(d: usize) -> Result<OperatorMatrix> {
    let s = 1.0 / (d as f64).sqrt();
    OperatorMatrix::from_fn(d, 1, |k, l| omega_pow(d, (k * l) as i64) * s)
}

/// Conditional shift `|k>|j> -> |k>|j-k>`, coin site first.
pub fn shift_op(d: usize) -> Result<OperatorMatrix> {
    OperatorMatrix::from_fn(d, 2, |r, c| {
        let (k, j) = (c / d, c % d);
        if r == k * d + modd(j as i64 - k as i64, d) {
            one()
        } else {
            zero()
        }
    })
}

/// Generalized Pauli family for one dimension.
#[derive(Clone, Debug)]
pub struct PauliOps {
    pub dim: usize,
    pub x: OperatorMatrix,
    pub z: OperatorMatrix,
}

impl PauliOps {
    /// `U_{m,n} = sum_i w^(-m i) |i-n><i|`, which maps `psi_{m,n}` to
    /// `psi_{0,0}` when applied to the first site.
    pub fn u(&self, m: usize, n: usize) -> Result<OperatorMatrix> {
        let d = self.dim;
        for v in [m, n] {
            if v >= d {
                return Err(Error::ValueOutOfRange { value: v, dim: d });
            }
        }
        OperatorMatrix::weyl(d, modd(-(n as i64), d), modd(-(m as i64), d))
    }
}

pub fn pauli_ops(d: usize) -> Result<PauliOps> {
    Ok(PauliOps { dim: d, x: OperatorMatrix::x(d)?, z: OperatorMatrix::z(d)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hadamard_values() {
        let h = fourier_op(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (i, want) in [s, s, s, -s].into_iter().enumerate() {
            assert_abs_diff_eq!(h.entries()[i].re, want, epsilon = 1e-15);
            assert_abs_diff_eq!(h.entries()[i].im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn shift_is_cnot_for_qubits() {
        let cnot = [
            [1., 0., 0., 0.],
            [0., 1., 0., 0.],
            [0., 0., 0., 1.],
            [0., 0., 1., 0.],
        ];
        let s = shift_op(2).unwrap();
        for (row, vals) in cnot.iter().enumerate() {
            for (col, v) in vals.iter().enumerate() {
                assert_eq!(s.entry(row, col), r(*v));
            }
        }
    }

    #[test]
    fn qubit_paulis_are_standard() {
        let p = pauli_ops(2).unwrap();
        assert_eq!(p.x.entries(), &[r(0.), r(1.), r(1.), r(0.)]);
        assert_abs_diff_eq!(p.z.entry(1, 1).re, -1.0, epsilon = 1e-15);
        assert_eq!(p.u(0, 0).unwrap(), OperatorMatrix::identity(2, 1).unwrap());
    }

    #[test]
    fn non_unitary_rejected() {
        let e = vec![r(1.), r(1.), r(0.), r(1.)];
        assert!(matches!(OperatorMatrix::from_entries(2, 1, e), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn kron_matches_sequential_application() {
        let f = fourier_op(3).unwrap();
        let x = OperatorMatrix::x(3).unwrap();
        let k = f.kron(&x).unwrap();
        assert_eq!(k.size(), 9);
        assert!(k.is_unitary(1e-12));
        assert_abs_diff_eq!((k.entry(4, 3) - f.entry(1, 1) * x.entry(1, 0)).norm(), 0.0);
    }
}
