//! Named gates used by the hierarchy enumerations, the CLI and the tests.
//!
//! Qubit gates follow the usual conventions; the qudit shift, clock,
//! Fourier and phase gates are defined for any prime `d`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::galois::{Prime, Register};
use crate::matcore::{omega_pow, DenseOperator, UnitaryHandle};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit_gate(entries: [Complex64; 4]) -> UnitaryHandle {
    let op = DenseOperator::from_rows(Register::qubits(1), entries.to_vec()).expect("2x2");
    UnitaryHandle::new(op).expect("named gate is unitary")
}

pub fn identity(reg: Register) -> UnitaryHandle {
    UnitaryHandle::identity(reg)
}

pub fn x() -> UnitaryHandle {
    qubit_gate([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn y() -> UnitaryHandle {
    qubit_gate([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn z() -> UnitaryHandle {
    qubit_gate([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn h() -> UnitaryHandle {
    let s = FRAC_1_SQRT_2;
    qubit_gate([c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])
}

pub fn s() -> UnitaryHandle {
    qubit_gate([c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])
}

pub fn t() -> UnitaryHandle {
    diag_pi_over_4(1)
}

/// `diag(1, e^{iπm/4})`.
pub fn diag_pi_over_4(m: i64) -> UnitaryHandle {
    let phase = Complex64::from_polar(1.0, FRAC_PI_4 * m as f64);
    qubit_gate([c(1., 0.), c(0., 0.), c(0., 0.), phase])
}

pub fn cz() -> UnitaryHandle {
    let reg = Register::qubits(2);
    let op = DenseOperator::diagonal(reg, &[c(1., 0.), c(1., 0.), c(1., 0.), c(-1., 0.)]).expect("4x4");
    UnitaryHandle::new(op).expect("unitary")
}

/// Controlled-NOT with qudit 0 as control.
pub fn cnot() -> UnitaryHandle {
    let reg = Register::qubits(2);
    let perm = [0usize, 1, 3, 2];
    let op = DenseOperator::from_fn(reg, |i, j| if perm[j] == i { c(1., 0.) } else { c(0., 0.) });
    UnitaryHandle::new(op).expect("unitary")
}

/// Shift `|j⟩ ↦ |j+1⟩` on one qudit.
pub fn qudit_x(d: Prime) -> UnitaryHandle {
    let reg = Register { n: 1, d };
    let m = reg.dim();
    let op = DenseOperator::from_fn(reg, |i, j| if i == (j + 1) % m { c(1., 0.) } else { c(0., 0.) });
    UnitaryHandle::new(op).expect("unitary")
}

/// Clock `|j⟩ ↦ ω^j |j⟩` on one qudit.
pub fn qudit_z(d: Prime) -> UnitaryHandle {
    let reg = Register { n: 1, d };
    let diag: Vec<Complex64> = (0..d.get()).map(|j| omega_pow(d, i64::from(j))).collect();
    UnitaryHandle::new(DenseOperator::diagonal(reg, &diag).expect("dxd")).expect("unitary")
}

/// Discrete Fourier transform `(1/√d) Σ ω^{jk} |j⟩⟨k|`; Hadamard for `d = 2`.
pub fn qudit_fourier(d: Prime) -> UnitaryHandle {
    let reg = Register { n: 1, d };
    let norm = 1.0 / libm::sqrt(f64::from(d.get()));
    let op = DenseOperator::from_fn(reg, |j, k| omega_pow(d, (j * k) as i64) * norm);
    UnitaryHandle::new(op).expect("unitary")
}

/// Qudit phase gate: `S` for `d = 2`, `Σ ω^{j(j−1)/2} |j⟩⟨j|` for odd `d`.
pub fn qudit_phase(d: Prime) -> UnitaryHandle {
    if d.get() == 2 {
        return s();
    }
    let reg = Register { n: 1, d };
    let diag: Vec<Complex64> = (0..i64::from(d.get())).map(|j| omega_pow(d, j * (j - 1) / 2)).collect();
    UnitaryHandle::new(DenseOperator::diagonal(reg, &diag).expect("dxd")).expect("unitary")
}
