//! The invariant suite run by `punif verify`.
//!
//! Each property is a small self-checking experiment returning a one-line
//! detail on success or the first counterexample on failure. Properties
//! derive their randomness from the suite seed and their own index, so a
//! property's outcome does not depend on which other properties ran.

use std::time::Instant;

use num_complex::Complex64;
use punif_core::galois::{symplectic_form, vec_add, PhaseExponent, Register, SympVector};
use punif_core::hierarchy::{
    enumerate_level, fidelity, in_level, inverse_epsilon, separation_check, verify_inverse_bounds, BoundSlack,
    LevelSet, DEFAULT_TOL_BASE,
};
use punif_core::matcore::{
    exp_i_hermitian, frob_norm, haar_random_unitary_with, hs_inner, omega_pow, phase_min_distance, random_hermitian,
    tau_pow,
};
use punif_core::pauligroup::{beta, beta_from_matrices, pauli_mul, weil_rep, weyl_matrix, weyl_unitary, PauliElement};
use punif_core::testersim::{
    c3_tester, derivative_oracle, estimate_bias, prepare_max_entangled, queries_per_bias_run, swap_test_probability,
    OracleHandle, TesterConfig,
};
use punif_core::uniformity::{fourier_coeffs, p2_via_fourier, pauli_derivative, pnorm_exact, pnorm_sampled, NormMode};
use punif_core::{gates, UnitaryHandle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cache::{level_set, LevelCache};
use crate::error::{CliError, Result};

pub const SUITES: [&str; 4] = ["algebra", "norms", "hierarchy", "tester"];

const NORM_TOL: f64 = 1e-9;

type Check = fn(&mut Ctx) -> std::result::Result<String, String>;

pub struct Ctx<'a> {
    rng: ChaCha8Rng,
    cache: Option<&'a LevelCache>,
}

impl Ctx<'_> {
    fn level(&self, n: usize, d: u32, k: u32) -> std::result::Result<LevelSet, String> {
        level_set(self.cache, n, d, k).map(|(s, _)| s).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub status: &'static str,
    pub detail: String,
    pub runtime_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOut {
    pub suite: String,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub properties: Vec<PropertyResult>,
    pub runtime_ms: u128,
}

impl VerifyOut {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn checks() -> Vec<(&'static str, &'static str, Check)> {
    vec![
        ("algebra", "form-bilinear-antisymmetric", form_bilinear),
        ("algebra", "form-non-degenerate", form_non_degenerate),
        ("algebra", "weyl-product-and-commutation", weyl_products),
        ("algebra", "beta-cocycle-and-defect", beta_cocycle),
        ("algebra", "beta-closed-form-vs-matrix", beta_vs_matrix),
        ("algebra", "heisenberg-homomorphism", heisenberg_hom),
        ("algebra", "weyl-character-orthonormal", weyl_character),
        ("algebra", "hs-norm-unitary-invariance", hs_invariance),
        ("norms", "t-gate-values", t_gate_values),
        ("norms", "p1-closed-form", p1_closed_form),
        ("norms", "nesting-identity", nesting_identity),
        ("norms", "boundedness", boundedness),
        ("norms", "fourier-identity", fourier_identity),
        ("norms", "weyl-and-adjoint-invariance", norm_invariance),
        ("norms", "extremal-characterization", extremal_characterization),
        ("norms", "sampled-vs-exact", sampled_vs_exact),
        ("hierarchy", "clifford-enumeration", clifford_enumeration),
        ("hierarchy", "clifford-group-closure", clifford_closure),
        ("hierarchy", "membership-monotone-and-closed", membership_monotone),
        ("hierarchy", "non-closure-of-level-3", non_closure),
        ("hierarchy", "separation", separation),
        ("hierarchy", "direct-inequality", direct_inequality),
        ("hierarchy", "inverse-p2", inverse_p2),
        ("hierarchy", "near-extremal-inverse", near_extremal_inverse),
        ("hierarchy", "fidelity-phase-invariance", fidelity_phase_invariance),
        ("tester", "swap-test-probabilities", swap_probabilities),
        ("tester", "derivative-oracle", derivative_oracles),
        ("tester", "estimator-calibration", calibration),
        ("tester", "determinism", determinism),
        ("tester", "tester-decisions", tester_decisions),
    ]
}

/// Runs `suite` (`all` or one of [`SUITES`]).
pub fn run_suite(suite: &str, seed: u64, cache: Option<&LevelCache>) -> Result<VerifyOut> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(CliError::Parse(format!("unknown suite {suite:?}; expected all, {}", SUITES.join(", "))));
    }
    let start = Instant::now();
    let mut properties = Vec::new();
    for (i, (group, name, check)) in checks().into_iter().enumerate() {
        if suite != "all" && suite != group {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut ctx = Ctx { rng, cache };
        let t = Instant::now();
        let outcome = check(&mut ctx);
        let (status, detail) = match outcome {
            Ok(d) => ("pass", d),
            Err(d) => ("fail", d),
        };
        properties.push(PropertyResult { suite: group, name, status, detail, runtime_ms: t.elapsed().as_millis() });
    }
    let failed = properties.iter().filter(|p| p.status == "fail").count();
    Ok(VerifyOut {
        suite: suite.to_string(),
        seed,
        passed: properties.len() - failed,
        failed,
        properties,
        runtime_ms: start.elapsed().as_millis(),
    })
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn core<T>(r: punif_core::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_label(reg: Register, rng: &mut impl Rng) -> SympVector {
    reg.label(rng.random_range(0..reg.num_labels()))
}

fn diff(a: &punif_core::DenseOperator, b: &punif_core::DenseOperator) -> f64 {
    frob_norm(&a.sub(b).expect("same shape"))
}

/// A named gate with the lowest hierarchy level containing it.
pub struct BatteryGate {
    pub name: String,
    pub u: UnitaryHandle,
    pub level: u32,
}

/// Weyl operators for one qubit and one qutrit, the 24 single-qubit
/// Cliffords, T, CZ and CNOT.
pub fn battery() -> Vec<BatteryGate> {
    let mut out = Vec::new();
    for d in [2u32, 3] {
        let reg = Register::new(1, d).expect("small register");
        for a in reg.labels() {
            let level = u32::from(!a.is_zero());
            out.push(BatteryGate { name: format!("W{a} (d={d})"), u: weyl_unitary(&a), level });
        }
    }
    let cliffords = enumerate_level(1, 2, 2).expect("single-qubit Cliffords");
    for (i, c) in cliffords.representatives.into_iter().enumerate() {
        let level = if in_level(&c, 0, DEFAULT_TOL_BASE).accepted() {
            0
        } else if in_level(&c, 1, DEFAULT_TOL_BASE).accepted() {
            1
        } else {
            2
        };
        out.push(BatteryGate { name: format!("clifford[{i}]"), u: c, level });
    }
    out.push(BatteryGate { name: "T".into(), u: gates::t(), level: 3 });
    out.push(BatteryGate { name: "CZ".into(), u: gates::cz(), level: 2 });
    out.push(BatteryGate { name: "CNOT".into(), u: gates::cnot(), level: 2 });
    out
}

/// `e^{iδH} V` with `δ` halved until `1 − ‖U‖_{P^k}^{2^k} ≤ ε_k`.
pub fn perturbed_extremizer(v: &UnitaryHandle, k: u32, rng: &mut impl Rng) -> punif_core::Result<(UnitaryHandle, f64)> {
    let h = random_hermitian(v.register(), rng);
    let target = inverse_epsilon(k);
    let mut delta = 0.25;
    loop {
        let u = exp_i_hermitian(&h, delta)?.matmul(v)?;
        let eps = 1.0 - pnorm_exact(&u, k)?.raw;
        if eps <= target {
            return Ok((u, delta));
        }
        delta /= 2.0;
    }
}

fn form_bilinear(ctx: &mut Ctx) -> std::result::Result<String, String> {
    for _ in 0..1000 {
        let n = ctx.rng.random_range(1..=3);
        let d = [2u32, 3, 5][ctx.rng.random_range(0..3)];
        let reg = core(Register::new(n, d))?;
        let (a, b, c) =
            (random_label(reg, &mut ctx.rng), random_label(reg, &mut ctx.rng), random_label(reg, &mut ctx.rng));
        let lhs = core(symplectic_form(&core(vec_add(&a, &b))?, &c))?;
        let rhs = core(symplectic_form(&a, &c))? + core(symplectic_form(&b, &c))?;
        ensure!(lhs == rhs, "[a+b,c] != [a,c]+[b,c] at {a} {b} {c}");
        ensure!(core(symplectic_form(&a, &b))? == -core(symplectic_form(&b, &a))?, "antisymmetry at {a} {b}");
    }
    Ok("1000 random triples".into())
}

fn form_non_degenerate(_: &mut Ctx) -> std::result::Result<String, String> {
    let mut count = 0;
    for (n, d) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
        let reg = core(Register::new(n, d))?;
        for a in reg.labels().filter(|a| !a.is_zero()) {
            ensure!(reg.labels().any(|b| !symplectic_form(&a, &b).expect("same register").is_zero()), "{a} is radical");
            count += 1;
        }
    }
    Ok(format!("{count} nonzero vectors"))
}

fn weyl_products(_: &mut Ctx) -> std::result::Result<String, String> {
    let mut worst = 0.0f64;
    for d in [2u32, 3] {
        let reg = core(Register::new(1, d))?;
        for a in reg.labels() {
            for b in reg.labels() {
                let (wa, wb) = (weyl_matrix(&a), weyl_matrix(&b));
                let ab = core(wa.matmul(&wb))?;
                let phase = tau_pow(reg.d, i64::from(core(beta(&a, &b))?.value()));
                let sum = weyl_matrix(&core(vec_add(&a, &b))?).scalar_mul(phase);
                let comm = omega_pow(reg.d, i64::from(core(symplectic_form(&a, &b))?.lift()));
                let ba = core(wb.matmul(&wa))?.scalar_mul(comm);
                worst = worst.max(diff(&ab, &sum)).max(diff(&ab, &ba));
            }
        }
    }
    ensure!(worst <= 1e-12, "max residual {worst:e}");
    Ok(format!("max residual {worst:.1e}"))
}

fn beta_identities(a: &SympVector, b: &SympVector, c: &SympVector) -> std::result::Result<(), String> {
    let add = |p: PhaseExponent, q: PhaseExponent| p.checked_add(q).expect("same ring");
    let bc = core(vec_add(b, c))?;
    let ab = core(vec_add(a, b))?;
    let lhs = add(core(beta(a, &bc))?, core(beta(b, c))?);
    let rhs = add(core(beta(a, b))?, core(beta(&ab, c))?);
    ensure!(lhs == rhs, "cocycle fails at {a} {b} {c}");
    let defect = add(core(beta(a, b))?, -core(beta(b, a))?);
    let form = core(symplectic_form(a, b))?.lift();
    ensure!(defect == PhaseExponent::new(2 * i64::from(form), a.prime()), "defect fails at {a} {b}");
    Ok(())
}

fn beta_cocycle(ctx: &mut Ctx) -> std::result::Result<String, String> {
    for d in [2u32, 3] {
        let reg = core(Register::new(1, d))?;
        for a in reg.labels() {
            for b in reg.labels() {
                for c in reg.labels() {
                    beta_identities(&a, &b, &c)?;
                }
            }
        }
        let reg2 = core(Register::new(2, d))?;
        for _ in 0..10_000 {
            let (a, b, c) =
                (random_label(reg2, &mut ctx.rng), random_label(reg2, &mut ctx.rng), random_label(reg2, &mut ctx.rng));
            beta_identities(&a, &b, &c)?;
        }
    }
    Ok("exhaustive n=1, 10^4 random triples n=2, d in {2,3}".into())
}

fn beta_vs_matrix(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut count = 0;
    for d in [2u32, 3, 5] {
        let reg = core(Register::new(1, d))?;
        for a in reg.labels() {
            for b in reg.labels() {
                ensure!(core(beta(&a, &b))? == core(beta_from_matrices(&a, &b))?, "mismatch at {a} {b}");
                count += 1;
            }
        }
    }
    for d in [2u32, 3] {
        let reg = core(Register::new(2, d))?;
        for _ in 0..500 {
            let (a, b) = (random_label(reg, &mut ctx.rng), random_label(reg, &mut ctx.rng));
            ensure!(core(beta(&a, &b))? == core(beta_from_matrices(&a, &b))?, "mismatch at {a} {b}");
            count += 1;
        }
    }
    Ok(format!("{count} pairs"))
}

fn heisenberg_hom(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut worst = 0.0f64;
    for (n, d) in [(1, 2), (1, 3), (2, 2)] {
        let reg = core(Register::new(n, d))?;
        let order = i64::from(reg.d.phase_order());
        for _ in 0..500 {
            let g = PauliElement::new(ctx.rng.random_range(0..order), random_label(reg, &mut ctx.rng));
            let h = PauliElement::new(ctx.rng.random_range(0..order), random_label(reg, &mut ctx.rng));
            let prod = core(weil_rep(&g).matmul(&weil_rep(&h)))?;
            worst = worst.max(prod.max_abs_diff(&weil_rep(&core(pauli_mul(&g, &h))?)));
        }
    }
    ensure!(worst < 1e-12, "max residual {worst:e}");
    Ok(format!("500 pairs per register, max residual {worst:.1e}"))
}

fn weyl_character(_: &mut Ctx) -> std::result::Result<String, String> {
    for (n, d) in [(1, 2), (2, 2), (1, 3), (1, 5)] {
        let reg = core(Register::new(n, d))?;
        let mats: Vec<_> = reg.labels().map(|a| weyl_matrix(&a)).collect();
        for (i, w) in mats.iter().enumerate() {
            let want = if i == 0 { reg.dim() as f64 } else { 0.0 };
            ensure!((w.trace() - want).norm() < 1e-12, "trace of W{} (n={n}, d={d})", reg.label(i));
            ensure!(w.unitarity_defect() < 1e-12, "W{} not unitary", reg.label(i));
            for (j, v) in mats.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                ensure!((core(hs_inner(w, v))? - want).norm() < 1e-12, "<W_{i}, W_{j}> (n={n}, d={d})");
            }
        }
    }
    Ok("n<=2, d in {2,3,5}".into())
}

fn hs_invariance(ctx: &mut Ctx) -> std::result::Result<String, String> {
    for reg in [Register::qubits(1), Register::qubits(2), core(Register::new(1, 3))?] {
        for _ in 0..20 {
            let v = haar_random_unitary_with(reg, &mut ctx.rng);
            let w = haar_random_unitary_with(reg, &mut ctx.rng);
            let m = punif_core::DenseOperator::from_fn(reg, |_, _| {
                Complex64::new(ctx.rng.random::<f64>() - 0.5, ctx.rng.random::<f64>() - 0.5)
            });
            let vmw = core(core(v.operator().matmul(&m))?.matmul(w.operator()))?;
            ensure!((frob_norm(&vmw) - frob_norm(&m)).abs() < 1e-12, "norm changed");
            let ip = core(hs_inner(&v, &w))?.norm();
            ensure!(ip <= 1.0 + 1e-12, "|<V,W>| = {ip}");
            ensure!(core(hs_inner(&m, &v))?.norm() <= frob_norm(&m) * frob_norm(&v) + 1e-12, "Cauchy-Schwarz");
        }
    }
    Ok("60 random pairs".into())
}

fn t_gate_values(_: &mut Ctx) -> std::result::Result<String, String> {
    let t = gates::t();
    let (p2, p3, p4) = (core(pnorm_exact(&t, 2))?, core(pnorm_exact(&t, 3))?, core(pnorm_exact(&t, 4))?);
    ensure!((p2.raw - 0.75).abs() <= NORM_TOL, "P2^4 = {}", p2.raw);
    ensure!((p3.raw - 0.75).abs() <= NORM_TOL, "P3^8 = {}", p3.raw);
    ensure!((p4.value - 1.0).abs() <= NORM_TOL, "P4 = {}", p4.value);
    ensure!((p2_via_fourier(&t) - 0.75).abs() <= NORM_TOL, "Fourier L4");
    Ok(format!("P2^4 = {:.12}, P3^8 = {:.12}, P4 = {:.12}", p2.raw, p3.raw, p4.value))
}

fn p1_closed_form(ctx: &mut Ctx) -> std::result::Result<String, String> {
    for reg in [Register::qubits(1), Register::qubits(2), core(Register::new(1, 3))?] {
        for _ in 0..10 {
            let u = haar_random_unitary_with(reg, &mut ctx.rng);
            let dim = reg.dim() as f64;
            let want = u.trace().norm_sqr() / (dim * dim);
            let got = core(pnorm_exact(&u, 1))?.value;
            ensure!((got * got - want).abs() <= NORM_TOL, "{} vs {want}", got * got);
        }
    }
    Ok("30 Haar unitaries".into())
}

fn nesting_identity(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut worst = 0.0f64;
    for (reg, top) in [(Register::qubits(1), 4), (core(Register::new(1, 3))?, 3), (Register::qubits(2), 3)] {
        let u = haar_random_unitary_with(reg, &mut ctx.rng);
        for k in 2..=top {
            let lhs = core(pnorm_exact(&u, k))?.raw;
            let mut rhs = 0.0;
            for h in reg.labels() {
                rhs += core(pnorm_exact(&core(pauli_derivative(&u, &h))?, k - 1))?.raw;
            }
            rhs /= reg.num_labels() as f64;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    ensure!(worst <= NORM_TOL, "max gap {worst:e}");
    Ok(format!("max gap {worst:.1e}"))
}

fn boundedness(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut top = 0.0f64;
    for reg in [Register::qubits(1), Register::qubits(2), core(Register::new(1, 3))?] {
        for _ in 0..5 {
            let u = haar_random_unitary_with(reg, &mut ctx.rng);
            for k in 1..=3 {
                let r = core(pnorm_exact(&u, k))?;
                ensure!(r.raw_unclamped >= -NORM_TOL && r.raw_unclamped <= 1.0 + NORM_TOL, "raw {}", r.raw_unclamped);
                top = top.max(r.raw_unclamped);
            }
        }
    }
    Ok(format!("max raw {top:.6}"))
}

fn fourier_identity(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut worst = 0.0f64;
    let regs = [Register::qubits(1), Register::qubits(2), core(Register::new(1, 3))?, core(Register::new(2, 3))?];
    for i in 0..100 {
        let u = haar_random_unitary_with(regs[i % regs.len()], &mut ctx.rng);
        let table = fourier_coeffs(&u);
        ensure!((table.parseval() - 1.0).abs() < 1e-10, "Parseval {}", table.parseval());
        ensure!(table.reconstruct().max_abs_diff(&u) < 1e-10, "reconstruction");
        worst = worst.max((p2_via_fourier(&u) - core(pnorm_exact(&u, 2))?.raw).abs());
    }
    ensure!(worst <= NORM_TOL, "max gap {worst:e}");
    Ok(format!("100 Haar unitaries, max gap {worst:.1e}"))
}

fn norm_invariance(ctx: &mut Ctx) -> std::result::Result<String, String> {
    for reg in [Register::qubits(1), Register::qubits(2), core(Register::new(1, 3))?] {
        for _ in 0..4 {
            let u = haar_random_unitary_with(reg, &mut ctx.rng);
            let wa = weyl_unitary(&random_label(reg, &mut ctx.rng));
            let wb = weyl_unitary(&random_label(reg, &mut ctx.rng));
            let shifted = core(core(wa.matmul(&u))?.matmul(&wb))?;
            for k in 2..=3 {
                let base = core(pnorm_exact(&u, k))?.value;
                ensure!((core(pnorm_exact(&shifted, k))?.value - base).abs() <= NORM_TOL, "W_a U W_b at k={k}");
                ensure!((core(pnorm_exact(&u.adjoint(), k))?.value - base).abs() <= NORM_TOL, "U* at k={k}");
            }
        }
    }
    Ok("k in {2,3}, 12 Haar unitaries".into())
}

fn extremal_characterization(_: &mut Ctx) -> std::result::Result<String, String> {
    let mut checked = 0;
    for g in battery() {
        let top = if g.u.register().n == 2 { 3 } else { 4 };
        for k in 1..=top {
            let one = (core(pnorm_exact(&g.u, k))?.value - 1.0).abs() <= NORM_TOL;
            let member = in_level(&g.u, k - 1, DEFAULT_TOL_BASE).accepted();
            ensure!(one == member, "{} at k={k}: norm one {one}, member {member}", g.name);
            ensure!(member == (g.level < k), "{} at k={k}: expected level {}", g.name, g.level);
            checked += 1;
        }
    }
    Ok(format!("{checked} (gate, k) pairs"))
}

fn sampled_vs_exact(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let t = core(pnorm_sampled(&gates::t(), 4, 10_000, ctx.rng.random()))?;
    let NormMode::Sampled { stderr, .. } = t.mode else { unreachable!() };
    ensure!((t.raw_unclamped - 1.0).abs() <= 3.0 * stderr + 1e-12, "T: {} ± {stderr}", t.raw_unclamped);
    let u = haar_random_unitary_with(Register::qubits(2), &mut ctx.rng);
    let exact = core(pnorm_exact(&u, 4))?.raw;
    let s = core(pnorm_sampled(&u, 4, 4_000, ctx.rng.random()))?;
    let NormMode::Sampled { stderr, .. } = s.mode else { unreachable!() };
    let z = (s.raw_unclamped - exact) / stderr;
    ensure!(z.abs() <= 3.0, "Haar n=2: z = {z:.2}");
    Ok(format!("Haar n=2: z = {z:.2}"))
}

fn clifford_enumeration(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let q = ctx.level(1, 2, 2)?;
    let r = ctx.level(1, 3, 2)?;
    ensure!(q.len() == 24 && r.len() == 216, "sizes {} and {}", q.len(), r.len());
    core(q.validate())?;
    Ok("24 qubit and 216 qutrit Cliffords up to phase".into())
}

fn clifford_closure(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let set = ctx.level(1, 2, 2)?;
    for a in &set.representatives {
        for b in &set.representatives {
            let p = core(a.matmul(b))?;
            let hits = set
                .representatives
                .iter()
                .filter(|c| phase_min_distance(&p, c).map(|x| x.distance() <= 1e-8).unwrap_or(false))
                .count();
            ensure!(hits == 1, "product matched {hits} representatives");
        }
    }
    Ok("576 products".into())
}

fn membership_monotone(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut checked = 0;
    for g in battery() {
        let reg = g.u.register();
        let top = if reg.n == 2 { 3 } else { 4 };
        for k in g.level..top {
            ensure!(in_level(&g.u, k + 1, DEFAULT_TOL_BASE).accepted(), "{} not in level {}", g.name, k + 1);
            let wa = weyl_unitary(&random_label(reg, &mut ctx.rng));
            let wb = weyl_unitary(&random_label(reg, &mut ctx.rng));
            let shifted = core(core(wa.matmul(&g.u))?.matmul(&wb))?;
            if k >= 1 {
                ensure!(in_level(&shifted, k, DEFAULT_TOL_BASE).accepted(), "W_a {} W_b not in level {k}", g.name);
            }
            ensure!(in_level(&g.u.adjoint(), k, DEFAULT_TOL_BASE).accepted(), "{}* not in level {k}", g.name);
            checked += 1;
        }
    }
    Ok(format!("{checked} (gate, level) pairs"))
}

fn non_closure(_: &mut Ctx) -> std::result::Result<String, String> {
    let ht = core(gates::h().matmul(&gates::t()))?;
    ensure!(in_level(&ht, 3, DEFAULT_TOL_BASE).accepted(), "HT rejected at level 3");
    let sq = core(ht.matmul(&ht))?;
    for k in 0..=5 {
        ensure!(in_level(&sq, k, DEFAULT_TOL_BASE).rejected(), "(HT)^2 not rejected at level {k}");
    }
    Ok("HT in level 3, (HT)^2 rejected at levels 0..=5".into())
}

fn separation(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut parts = Vec::new();
    for k in 1..=2 {
        let r = separation_check(&ctx.level(1, 2, k)?);
        ensure!(r.consistent() && r.violations == 0, "level {k}: {r:?}");
        parts.push(format!("level {k}: min distance {:.4}", r.min_non_phase_distance.unwrap_or(f64::NAN)));
    }
    Ok(parts.join("; "))
}

fn haar_battery(ctx: &mut Ctx, count: usize) -> Vec<UnitaryHandle> {
    (0..count).map(|_| haar_random_unitary_with(Register::qubits(1), &mut ctx.rng)).collect()
}

fn direct_inequality(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let (c1, c2) = (ctx.level(1, 2, 1)?, ctx.level(1, 2, 2)?);
    let mut slack = f64::INFINITY;
    for u in haar_battery(ctx, 100) {
        for (k, set) in [(2, &c1), (3, &c2)] {
            let r = core(verify_inverse_bounds(&u, k, set, BoundSlack::default()))?;
            ensure!(
                r.direct == Some(true) && r.direct_improved == Some(true),
                "k={k}: F = {}, norm {}",
                r.fidelity.value,
                r.norm.value
            );
            slack = slack.min(r.norm.value * r.norm.value - r.fidelity.value);
        }
    }
    Ok(format!("100 Haar unitaries, smallest margin {slack:.2e}"))
}

fn inverse_p2(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let c1 = ctx.level(1, 2, 1)?;
    for u in haar_battery(ctx, 100) {
        let r = core(verify_inverse_bounds(&u, 2, &c1, BoundSlack::default()))?;
        ensure!(r.inverse_p2 == Some(true), "F = {} < P2^4 = {}", r.fidelity.value, r.norm.raw);
    }
    Ok("100 Haar unitaries".into())
}

fn near_extremal_inverse(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let mut parts = Vec::new();
    for k in 2..=4u32 {
        let lower = ctx.level(1, 2, k - 1)?;
        let mut worst = f64::INFINITY;
        for _ in 0..10 {
            let v = lower.representatives[ctx.rng.random_range(0..lower.len())].clone();
            let (u, _) = core(perturbed_extremizer(&v, k, &mut ctx.rng))?;
            let r = core(verify_inverse_bounds(&u, k, &lower, BoundSlack::default()))?;
            ensure!(r.inverse_near_extremal == Some(true), "k={k}: F = {}, eps = {:e}", r.fidelity.value, r.epsilon);
            worst = worst.min(r.fidelity.value - (1.0 - r.constant_k * r.epsilon));
        }
        parts.push(format!("k={k}: margin {worst:.2e}"));
    }
    Ok(parts.join("; "))
}

fn fidelity_phase_invariance(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let sets = [ctx.level(1, 2, 1)?, ctx.level(1, 2, 2)?];
    for u in haar_battery(ctx, 20) {
        let theta = ctx.rng.random_range(-3.0..3.0);
        for set in &sets {
            let a = core(fidelity(&u, set.level, set))?.value;
            let b = core(fidelity(&u.with_phase(theta), set.level, set))?.value;
            ensure!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
    Ok("20 Haar unitaries, levels 1 and 2".into())
}

fn swap_probabilities(_: &mut Ctx) -> std::result::Result<String, String> {
    let reg = Register::qubits(1);
    let phi = prepare_max_entangled(reg);
    let apply = |u: UnitaryHandle| OracleHandle::new(u).apply(&phi);
    let same = core(swap_test_probability(&phi, &phi))?;
    let orth = core(swap_test_probability(&phi, &core(apply(gates::x()))?))?;
    let t = core(swap_test_probability(&phi, &core(apply(gates::t()))?))?;
    let want = 0.5 * (1.0 + (2.0 + 2f64.sqrt()) / 4.0);
    ensure!((same - 1.0).abs() < 1e-14 && (orth - 0.5).abs() < 1e-14, "{same}, {orth}");
    ensure!((t - want).abs() < 1e-14, "T: {t} vs {want}");
    Ok(format!("Pr[1] for T = {t:.12}"))
}

fn derivative_oracles(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let reg = Register::qubits(2);
    let u = haar_random_unitary_with(reg, &mut ctx.rng);
    let o = OracleHandle::new(u.clone());
    let mut cur = o.clone();
    let mut expected = u;
    for _ in 0..3 {
        let h = random_label(reg, &mut ctx.rng);
        cur = core(derivative_oracle(&cur, &h))?;
        expected = core(pauli_derivative(&expected, &h))?;
        ensure!(cur.matrix().max_abs_diff(&expected) < 1e-12, "materialized matrix differs");
    }
    core(cur.apply(&prepare_max_entangled(reg)))?;
    ensure!(o.counter().total() == 8, "depth-3 application used {} queries", o.counter().total());
    ensure!(queries_per_bias_run(4) == (4, 4), "per-run count");
    Ok("depth 3: 8 queries per application".into())
}

fn calibration(ctx: &mut Ctx) -> std::result::Result<String, String> {
    const N: u64 = 100_000;
    let ones = core(estimate_bias(&OracleHandle::new(gates::t()), 3, N, ctx.rng.random()))?;
    let rate = ones as f64 / N as f64;
    let sigma = (0.875f64 * 0.125 / N as f64).sqrt();
    ensure!((rate - 0.875).abs() <= 4.0 * sigma, "rate {rate} vs 0.875 ± 4·{sigma:.5}");
    Ok(format!("T, k=3: rate {rate:.5}, z = {:.2}", (rate - 0.875) / sigma))
}

fn determinism(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let u = haar_random_unitary_with(Register::qubits(1), &mut ctx.rng);
    let o = OracleHandle::new(u.clone());
    let seed = ctx.rng.random();
    let a = core(estimate_bias(&o, 3, 5000, seed))?;
    let b = core(estimate_bias(&o, 3, 5000, seed))?;
    ensure!(a == b, "{a} vs {b}");
    let s1 = core(pnorm_sampled(&u, 3, 200, seed))?;
    ensure!(s1 == core(pnorm_sampled(&u, 3, 200, seed))?, "sampled norm not reproducible");
    Ok("bias estimates and sampled norms reproduce".into())
}

fn tester_decisions(ctx: &mut Ctx) -> std::result::Result<String, String> {
    let eps = 0.02;
    let cfg = core(TesterConfig::with_default_confidence(eps, ctx.rng.random()))?;
    let t = core(c3_tester(&OracleHandle::new(gates::t()), &cfg))?;
    ensure!(t.accept, "T rejected with E = {}", t.estimate);
    let far = (0..50)
        .map(|_| haar_random_unitary_with(Register::qubits(2), &mut ctx.rng))
        .find(|u| pnorm_exact(u, 4).map(|r| r.raw <= 1.0 - 18.0 * eps).unwrap_or(false))
        .ok_or("no far Haar unitary found")?;
    let r = core(c3_tester(&OracleHandle::new(far), &cfg))?;
    ensure!(!r.accept, "far unitary accepted with E = {}", r.estimate);
    Ok(format!("T: E = {:.4}; far: E = {:.4}; {} repetitions", t.estimate, r.estimate, cfg.repetitions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_parse_error() {
        assert_eq!(run_suite("nope", 1, None).unwrap_err().exit_code(), crate::error::exit::PARSE);
    }

    #[test]
    fn battery_levels() {
        let b = battery();
        assert_eq!(b.len(), 4 + 9 + 24 + 3);
        assert_eq!(b.iter().filter(|g| g.level == 0).count(), 3);
        assert_eq!(b.iter().filter(|g| g.level == 1).count(), 3 + 8 + 3);
    }
}
