//! Unitary gates on single subsystems and (control, target) pairs.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (unitarity, normalization).
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// A dim x dim unitary acting on one subsystem. Stored row-major:
/// `matrix[r * dim + c]` = <r|G|c>, so column `c` is the image of basis
/// state |c>.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    dim: usize,
    matrix: Vec<Complex64>,
}

impl Gate {
    /// Builds a gate, verifying unitarity: max-norm of (G\u{2020}G - I) must be
    /// below 1e-10.
    pub fn new(dim: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "gate matrix has {} entries, expected {}",
                matrix.len(),
                dim * dim
            )));
        }
        let mut deviation: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                // (G†G)[r][c] = sum_k conj(G[k][r]) G[k][c]
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += matrix[k * dim + r].conj() * matrix[k * dim + c];
                }
                let expected = if r == c { 1.0 } else { 0.0 };
                deviation = deviation.max((acc - expected).norm());
            }
        }
        if deviation >= ALGEBRAIC_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Gate { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    /// Identity gate.
    pub fn identity(dim: usize) -> Gate {
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Gate { dim, matrix: m }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Gate {
        let d = self.dim;
        let mut m = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                m[r * d + c] = self.matrix[c * d + r].conj();
            }
        }
        Gate { dim: d, matrix: m }
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Gate) -> Result<Gate> {
        if self.dim != rhs.dim {
            return Err(Error::Dimension(format!(
                "cannot compose gates of dimension {} and {}",
                self.dim, rhs.dim
            )));
        }
        let d = self.dim;
        let mut m = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.matrix[r * d + k] * rhs.matrix[k * d + c];
                }
                m[r * d + c] = acc;
            }
        }
        Ok(Gate { dim: d, matrix: m })
    }

    /// `self` raised to a non-negative integer power.
    pub fn power(&self, n: usize) -> Gate {
        let mut out = Gate::identity(self.dim);
        for _ in 0..n {
            out = out.compose(self).expect("equal dims");
        }
        out
    }
}

/// Real rotation by `theta`: [[cos, sin], [-sin, cos]].
pub fn rotation_gate(theta: f64) -> Gate {
    let (s, c) = theta.sin_cos();
    Gate::new(
        2,
        vec![
            Complex64::new(c, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
    .expect("rotation is unitary")
}

/// Generalized discrete Fourier gate H = (1/sqrt d) sum e^{2*pi*i*k*l/d}
/// |l><k|, or its entrywise complex conjugate when `conjugated` is set.
pub fn hadamard_gate(d: usize, conjugated: bool) -> Gate {
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    let norm = 1.0 / (d as f64).sqrt();
    let sign = if conjugated { -1.0 } else { 1.0 };
    for l in 0..d {
        for k in 0..d {
            let phase = sign * std::f64::consts::TAU * (k as f64) * (l as f64) / d as f64;
            m[l * d + k] = Complex64::from_polar(norm, phase);
        }
    }
    Gate::new(d, m).expect("fourier gate is unitary")
}

/// Cyclic shift |j> -> |j+1 mod d> (the qubit case is the bit flip).
pub fn shift_gate(d: usize) -> Gate {
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        m[((j + 1) % d) * d + j] = Complex64::new(1.0, 0.0);
    }
    Gate::new(d, m).expect("shift is unitary")
}

/// Bit flip on a qubit.
pub fn pauli_x() -> Gate {
    shift_gate(2)
}

/// A controlled two-subsystem operation. The control subsystem is never
/// altered; its basis value conditions what happens to the target.
#[derive(Debug, Clone)]
pub enum ControlledGateSpec {
    /// |i, j> -> |i, j + i mod d>. Control and target dimensions must match.
    RightShift,
    /// |i, j> -> |i, j - i mod d>. Control and target dimensions must match.
    LeftShift,
    /// |i> (x) |j> -> |i> (x) U^i |j>. Target dimension must equal the base
    /// gate dimension; the control dimension is arbitrary.
    PowerOfU(Gate),
}

impl ControlledGateSpec {
    pub fn validate(&self, control_dim: usize, target_dim: usize) -> Result<()> {
        match self {
            ControlledGateSpec::RightShift | ControlledGateSpec::LeftShift => {
                if control_dim != target_dim {
                    return Err(Error::Dimension(format!(
                        "shift gates require equal control/target dimensions, got {control_dim} and {target_dim}"
                    )));
                }
            }
            ControlledGateSpec::PowerOfU(base) => {
                if base.dim() != target_dim {
                    return Err(Error::Dimension(format!(
                        "power-of-U target dimension {} does not match base gate dimension {}",
                        target_dim,
                        base.dim()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn max_entry_dev(g: &Gate, expected: &[(usize, usize, Complex64)]) -> f64 {
        expected
            .iter()
            .map(|&(r, c, v)| (g.entry(r, c) - v).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        let g = rotation_gate(0.0);
        let i = Gate::identity(2);
        for r in 0..2 {
            for c in 0..2 {
                assert!((g.entry(r, c) - i.entry(r, c)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rotation_quarter_pi_entries() {
        let g = rotation_gate(FRAC_PI_4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let dev = max_entry_dev(
            &g,
            &[
                (0, 0, Complex64::new(h, 0.0)),
                (0, 1, Complex64::new(h, 0.0)),
                (1, 0, Complex64::new(-h, 0.0)),
                (1, 1, Complex64::new(h, 0.0)),
            ],
        );
        assert!(dev < 1e-15);
    }

    #[test]
    fn hadamard_d2_is_real_hadamard() {
        let g = hadamard_gate(2, false);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let dev = max_entry_dev(
            &g,
            &[
                (0, 0, Complex64::new(h, 0.0)),
                (0, 1, Complex64::new(h, 0.0)),
                (1, 0, Complex64::new(h, 0.0)),
                (1, 1, Complex64::new(-h, 0.0)),
            ],
        );
        assert!(dev < 1e-12);
    }

    #[test]
    fn hadamard_d3_entries_are_third_roots() {
        let g = hadamard_gate(3, false);
        let norm = 1.0 / 3f64.sqrt();
        for l in 0..3 {
            for k in 0..3 {
                let expected =
                    Complex64::from_polar(norm, 2.0 * PI * (k * l) as f64 / 3.0);
                assert!((g.entry(l, k) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let err = Gate::new(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(err, Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn shift_power_cycles() {
        let x = shift_gate(5);
        let id = x.power(5);
        let i = Gate::identity(5);
        for r in 0..5 {
            for c in 0..5 {
                assert!((id.entry(r, c) - i.entry(r, c)).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn rotation_inverse(theta in -6.3f64..6.3) {
            let g = rotation_gate(theta).compose(&rotation_gate(-theta)).unwrap();
            let i = Gate::identity(2);
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((g.entry(r, c) - i.entry(r, c)).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn constructed_gates_pass_unitarity(theta in -10.0f64..10.0, d in 2usize..9) {
            // Gate::new re-verifies; compose of unitaries stays unitary.
            let h = hadamard_gate(d, false);
            let hd = h.dagger();
            let prod = h.compose(&hd).unwrap();
            let i = Gate::identity(d);
            for r in 0..d {
                for c in 0..d {
                    prop_assert!((prod.entry(r, c) - i.entry(r, c)).norm() < 1e-10);
                }
            }
            let r2 = rotation_gate(theta);
            prop_assert!(Gate::new(2, (0..4).map(|k| r2.entry(k / 2, k % 2)).collect()).is_ok());
        }
    }
}
