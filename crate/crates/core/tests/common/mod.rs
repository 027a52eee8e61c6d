#![allow(dead_code)]

use punif_core::galois::Register;
use punif_core::hierarchy::enumerate_level;
use punif_core::pauligroup::weyl_unitary;
use punif_core::{gates, UnitaryHandle};

pub struct Gate {
    pub name: String,
    pub u: UnitaryHandle,
    /// Lowest hierarchy level containing the gate.
    pub level: u32,
}

fn gate(name: impl Into<String>, u: UnitaryHandle, level: u32) -> Gate {
    Gate { name: name.into(), u, level }
}

/// Weyl operators, the single-qubit Cliffords, T, CZ and CNOT.
pub fn battery() -> Vec<Gate> {
    let mut out = Vec::new();
    for (n, d) in [(1usize, 2u32), (1, 3)] {
        let reg = Register::new(n, d).unwrap();
        for a in reg.labels() {
            let level = if a.is_zero() { 0 } else { 1 };
            out.push(gate(format!("W{a} d={d}"), weyl_unitary(&a), level));
        }
    }
    let paulis = [gates::x(), gates::y(), gates::z()];
    let cliffords = enumerate_level(1, 2, 2).unwrap();
    for (i, c) in cliffords.representatives.iter().enumerate() {
        let phase_id = c.operator().as_slice()[1].norm() < 1e-12
            && c.operator().as_slice()[2].norm() < 1e-12
            && (c.operator().as_slice()[0] - c.operator().as_slice()[3]).norm() < 1e-12;
        let pauli = paulis.iter().any(|p| {
            let ip = punif_core::matcore::hs_inner(p, c).unwrap().norm();
            (ip - 1.0).abs() < 1e-12
        });
        let level = if phase_id {
            0
        } else if pauli {
            1
        } else {
            2
        };
        out.push(gate(format!("clifford[{i}]"), c.clone(), level));
    }
    out.push(gate("T", gates::t(), 3));
    out.push(gate("CZ", gates::cz(), 2));
    out.push(gate("CNOT", gates::cnot(), 2));
    out
}
