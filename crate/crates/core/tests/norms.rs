mod common;

use num_complex::Complex64;
use punif_core::galois::Register;
use punif_core::hierarchy::{enumerate_level, fidelity, in_level, separation_check, Completeness, DEFAULT_TOL_BASE};
use punif_core::matcore::{haar_random_unitary, haar_random_unitary_with, phase_min_distance};
use punif_core::pauligroup::weyl_unitary;
use punif_core::uniformity::{fourier_coeffs, p2_via_fourier, pauli_derivative, pnorm_exact, pnorm_sampled, NormMode};
use punif_core::{gates, Error, UnitaryHandle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn registers() -> Vec<Register> {
    vec![Register::qubits(1), Register::qubits(2), Register::new(1, 3).unwrap()]
}

#[test]
fn t_gate_norm_values() {
    let t = gates::t();
    assert!((pnorm_exact(&t, 2).unwrap().raw - 0.75).abs() <= TOL);
    assert!((pnorm_exact(&t, 3).unwrap().raw - 0.75).abs() <= TOL);
    let p4 = pnorm_exact(&t, 4).unwrap();
    assert!((p4.value - 1.0).abs() <= TOL);
    assert_eq!(p4.mode, NormMode::Exact { term_count: 64 });
    assert!((pnorm_exact(&t, 3).unwrap().value - 0.75f64.powf(0.125)).abs() <= TOL);
}

#[test]
fn p1_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for reg in registers() {
        for _ in 0..10 {
            let u = haar_random_unitary_with(reg, &mut rng);
            let dim = reg.dim() as f64;
            let expected = u.trace().norm_sqr() / (dim * dim);
            let got = pnorm_exact(&u, 1).unwrap();
            assert!((got.value * got.value - expected).abs() <= TOL);
        }
    }
}

#[test]
fn nesting_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (reg, ks) in [(Register::qubits(1), 2..=4), (Register::new(1, 3).unwrap(), 2..=3), (Register::qubits(2), 2..=3)]
    {
        let u = haar_random_unitary_with(reg, &mut rng);
        for k in ks {
            let lhs = pnorm_exact(&u, k).unwrap().raw;
            let rhs: f64 =
                reg.labels().map(|h| pnorm_exact(&pauli_derivative(&u, &h).unwrap(), k - 1).unwrap().raw).sum::<f64>()
                    / reg.num_labels() as f64;
            assert!((lhs - rhs).abs() <= TOL, "k={k} {lhs} vs {rhs}");
        }
    }
}

#[test]
fn norms_are_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for reg in registers() {
        for _ in 0..5 {
            let u = haar_random_unitary_with(reg, &mut rng);
            for k in 1..=3 {
                let r = pnorm_exact(&u, k).unwrap();
                assert!((0.0..=1.0 + TOL).contains(&r.raw_unclamped.max(0.0)));
                assert!((0.0..=1.0).contains(&r.value));
            }
        }
    }
}

#[test]
fn fourier_identity_on_haar_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for reg in [Register::qubits(1), Register::qubits(2), Register::new(1, 3).unwrap(), Register::new(2, 3).unwrap()] {
        for _ in 0..25 {
            let u = haar_random_unitary_with(reg, &mut rng);
            let table = fourier_coeffs(&u);
            assert!((table.parseval() - 1.0).abs() < 1e-10);
            assert!(table.reconstruct().max_abs_diff(&u) < 1e-10);
            let exact = pnorm_exact(&u, 2).unwrap().raw;
            assert!((p2_via_fourier(&u) - exact).abs() <= TOL);
        }
    }
}

#[test]
fn t_gate_fourier_coefficients() {
    let t = gates::t();
    let table = fourier_coeffs(&t);
    let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let reg = Register::qubits(1);
    for a in reg.labels() {
        let expected = match (a.u()[0], a.v()[0]) {
            (0, 0) => (1.0 + w) / 2.0,
            (1, 0) => (1.0 - w) / 2.0,
            _ => Complex64::new(0.0, 0.0),
        };
        assert!((table.get(&a) - expected).norm() < 1e-12, "{a}");
    }
}

#[test]
fn norm_invariance_under_weyl_multiplication_and_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for reg in registers() {
        for _ in 0..5 {
            let u = haar_random_unitary_with(reg, &mut rng);
            let wa = weyl_unitary(&reg.label(rng.random_range(0..reg.num_labels())));
            let wb = weyl_unitary(&reg.label(rng.random_range(0..reg.num_labels())));
            let shifted = wa.matmul(&u).unwrap().matmul(&wb).unwrap();
            // P¹ sees |tr U| and is only conjugation invariant.
            for k in 1..=3 {
                let base = pnorm_exact(&u, k).unwrap().value;
                let conj = wa.matmul(&u).unwrap().matmul(&wa.adjoint()).unwrap();
                assert!((pnorm_exact(&conj, k).unwrap().value - base).abs() <= TOL);
                if k >= 2 {
                    assert!((pnorm_exact(&shifted, k).unwrap().value - base).abs() <= TOL);
                }
                assert!((pnorm_exact(&u.adjoint(), k).unwrap().value - base).abs() <= TOL);
            }
        }
    }
}

#[test]
fn extremal_characterization_on_battery() {
    for g in common::battery() {
        for k in 1..=4u32 {
            if g.u.register().n == 2 && k == 4 {
                continue;
            }
            let norm = pnorm_exact(&g.u, k).unwrap().value;
            let member = in_level(&g.u, k - 1, DEFAULT_TOL_BASE);
            assert!(!member.outcome.eq(&punif_core::hierarchy::Outcome::Undecided));
            assert_eq!((norm - 1.0).abs() <= TOL, member.accepted(), "{} k={k} norm={norm}", g.name);
            assert_eq!(member.accepted(), g.level < k, "{} level", g.name);
        }
    }
}

#[test]
fn extremal_characterization_two_qubit_gates_at_k4() {
    for u in [gates::cz(), gates::cnot()] {
        assert!((pnorm_exact(&u, 4).unwrap().value - 1.0).abs() <= TOL);
        assert!(in_level(&u, 3, DEFAULT_TOL_BASE).accepted());
    }
    let u = haar_random_unitary(Register::qubits(2), 5);
    assert!(pnorm_exact(&u, 4).unwrap().value < 1.0 - 1e-3);
    assert!(in_level(&u, 3, DEFAULT_TOL_BASE).rejected());
}

#[test]
fn membership_is_monotone_and_closed_on_battery() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for g in common::battery() {
        let reg = g.u.register();
        let top = if reg.n == 2 { 3 } else { 4 };
        for k in 0..top {
            if in_level(&g.u, k, DEFAULT_TOL_BASE).accepted() {
                assert!(in_level(&g.u, k + 1, DEFAULT_TOL_BASE).accepted(), "{} k={k}", g.name);
                let wa = weyl_unitary(&reg.label(rng.random_range(0..reg.num_labels())));
                let wb = weyl_unitary(&reg.label(rng.random_range(0..reg.num_labels())));
                let shifted = wa.matmul(&g.u).unwrap().matmul(&wb).unwrap();
                if k >= 1 {
                    assert!(in_level(&shifted, k, DEFAULT_TOL_BASE).accepted(), "{} shifted", g.name);
                }
                assert!(in_level(&g.u.adjoint(), k, DEFAULT_TOL_BASE).accepted(), "{} adjoint", g.name);
            }
        }
    }
}

#[test]
fn clifford_products_stay_in_the_clifford_group() {
    let set = enumerate_level(1, 2, 2).unwrap();
    assert_eq!(set.len(), 24);
    for a in &set.representatives {
        for b in &set.representatives {
            let p = a.matmul(b).unwrap();
            let found =
                set.representatives.iter().filter(|c| phase_min_distance(&p, c).unwrap().distance() <= 1e-8).count();
            assert_eq!(found, 1);
        }
    }
    for a in set.representatives.iter().step_by(5) {
        for b in set.representatives.iter().step_by(7) {
            assert!(in_level(&a.matmul(b).unwrap(), 2, DEFAULT_TOL_BASE).accepted());
        }
    }
}

#[test]
fn non_closure_at_level_three() {
    let ht = gates::h().matmul(&gates::t()).unwrap();
    assert!(in_level(&ht, 3, DEFAULT_TOL_BASE).accepted());
    let sq = ht.matmul(&ht).unwrap();
    for k in 0..=5 {
        assert!(in_level(&sq, k, DEFAULT_TOL_BASE).rejected(), "k={k}");
    }
}

#[test]
fn enumerated_representatives_are_extremal() {
    for (d, k) in [(2u32, 0u32), (2, 1), (2, 2), (3, 1), (3, 2), (2, 3)] {
        let set = enumerate_level(1, d, k).unwrap();
        set.validate().unwrap();
        for v in &set.representatives {
            assert!((pnorm_exact(v, k + 1).unwrap().value - 1.0).abs() <= TOL);
        }
    }
    let c3 = enumerate_level(1, 2, 3).unwrap();
    assert_eq!(c3.completeness, Completeness::CandidateFamily);
    assert!(c3.len() > 24);
    let t = gates::t();
    assert!(fidelity(&t, 3, &c3).unwrap().value > 1.0 - 1e-12);
    assert!(matches!(enumerate_level(2, 2, 2), Err(Error::OutOfScope(_))));
}

#[test]
fn fidelity_is_phase_invariant_and_matches_examples() {
    let paulis = enumerate_level(1, 2, 1).unwrap();
    let t = gates::t();
    let f = fidelity(&t, 1, &paulis).unwrap();
    assert!((f.value - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
    assert_eq!(f.argmax_index, 0);
    let cliffords = enumerate_level(1, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let u = haar_random_unitary_with(Register::qubits(1), &mut rng);
        let theta = rng.random_range(-3.0..3.0);
        for (k, set) in [(1, &paulis), (2, &cliffords)] {
            let a = fidelity(&u, k, set).unwrap();
            let b = fidelity(&u.with_phase(theta), k, set).unwrap();
            assert!((a.value - b.value).abs() < 1e-12);
            assert_eq!(a.argmax_index, b.argmax_index);
        }
    }
}

#[test]
fn separation_holds_on_enumerated_levels() {
    for k in 1..=2 {
        let report = separation_check(&enumerate_level(1, 2, k).unwrap());
        assert!(report.consistent(), "{report:?}");
        assert_eq!(report.violations, 0);
        assert_eq!(report.phase_identities, 1);
    }
}

#[test]
fn sampled_norms() {
    let id = UnitaryHandle::identity(Register::qubits(1));
    let r = pnorm_sampled(&id, 4, 100, 1).unwrap();
    assert!((r.raw - 1.0).abs() < 1e-12);
    assert_eq!(r.mode, NormMode::Sampled { samples: 100, stderr: 0.0 });

    let t = pnorm_sampled(&gates::t(), 4, 10_000, 2).unwrap();
    let NormMode::Sampled { stderr, .. } = t.mode else { panic!() };
    assert!((t.raw_unclamped - 1.0).abs() <= 3.0 * stderr + 1e-12);

    for seed in [1u64, 2, 3] {
        let u = haar_random_unitary(Register::qubits(2), seed);
        let exact = pnorm_exact(&u, 4).unwrap().raw;
        let s = pnorm_sampled(&u, 4, 4_000, seed + 1000).unwrap();
        let NormMode::Sampled { stderr, .. } = s.mode else { panic!() };
        assert!(stderr > 0.0);
        assert!((s.raw_unclamped - exact).abs() <= 3.0 * stderr, "seed {seed}: {} vs {exact} ± {stderr}", s.raw);
        assert_eq!(s, pnorm_sampled(&u, 4, 4_000, seed + 1000).unwrap());
    }
}

#[test]
fn exact_mode_budget() {
    let u = haar_random_unitary(Register::qubits(3), 1);
    assert!(matches!(pnorm_exact(&u, 6), Err(Error::BudgetExceeded { .. })));
}
