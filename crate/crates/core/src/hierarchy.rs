//! Clifford-hierarchy membership, level enumeration at small sizes, Clifford
//! fidelity, and checks of the separation and inverse inequalities.
//!
//! Membership follows the derivative recursion: `U` is in level `k ≥ 1` iff
//! `∂_h U` is in level `k − 1` for every `h ∈ F_d^{2n}`, and level 0 is the
//! phases `e^{iθ} I`. Every direction is checked; no generator shortcut is
//! assumed.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::galois::{Prime, Register, SympVector};
use crate::gates;
use crate::matcore::{align_phase, hs_inner_unchecked, DenseOperator, UnitaryHandle};
use crate::pauligroup::{weyl_unitary, WeylMonomial};
use crate::uniformity::{derivative_op, fourier_coeffs, monomials, pnorm_exact, NormReport};

/// Acceptance tolerance at the top of a membership recursion.
pub const DEFAULT_TOL_BASE: f64 = 1e-8;
/// Cap on leaves (`d^{2nk}`) visited by [`in_level`].
pub const DEFAULT_MAX_LEAVES: u128 = 10_000_000;
/// Two representatives are the same element when their phase-minimized
/// distance is at most this.
pub const DEDUP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    Rejected,
    /// The recursion would exceed the leaf budget.
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Phase `θ` with `U ≈ e^{iθ} I`.
    Phase(f64),
    /// Weyl label `a` with `U ≈ e^{iθ} W_a`.
    Weyl(SympVector),
    /// Derivative directions `h_1, …, h_m` leading to a failing leaf.
    Directions(Vec<SympVector>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub level: u32,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    /// Largest residual seen while deciding.
    pub defect: f64,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.outcome == Outcome::Accepted
    }

    pub fn rejected(&self) -> bool {
        self.outcome == Outcome::Rejected
    }
}

/// Accepts iff `min_θ ‖U − e^{iθ} I‖₂ ≤ tol`.
pub fn is_phase_identity(u: &UnitaryHandle, tol: f64) -> Verdict {
    let id = DenseOperator::identity(u.register());
    let al = align_phase(u.operator(), &id);
    let defect = al.distance();
    Verdict {
        outcome: if defect <= tol { Outcome::Accepted } else { Outcome::Rejected },
        level: 0,
        tolerance: tol,
        witness: Some(Witness::Phase(al.theta)),
        defect,
    }
}

/// Accepts iff exactly one Fourier coefficient has modulus at least `1 − tol`.
pub fn is_pauli(u: &UnitaryHandle, tol: f64) -> Verdict {
    let table = fourier_coeffs(u.operator());
    let big: Vec<_> = table.support(1.0 - tol - f64::EPSILON);
    let (arg, c) = table.argmax();
    let defect = 1.0 - c.norm();
    Verdict {
        outcome: if big.len() == 1 { Outcome::Accepted } else { Outcome::Rejected },
        level: 1,
        tolerance: tol,
        witness: Some(Witness::Weyl(arg)),
        defect: defect.max(0.0),
    }
}

/// Membership in level `k` with the default leaf budget.
pub fn in_level(u: &UnitaryHandle, k: u32, tol: f64) -> Verdict {
    in_level_with_budget(u, k, tol, DEFAULT_MAX_LEAVES)
}

pub fn in_level_with_budget(u: &UnitaryHandle, k: u32, tol: f64, max_leaves: u128) -> Verdict {
    if k == 0 {
        return is_phase_identity(u, tol);
    }
    let reg = u.register();
    let labels = reg.num_labels() as u128;
    let leaves = (0..k).fold(1u128, |acc, _| acc.saturating_mul(labels));
    if leaves > max_leaves {
        return Verdict { outcome: Outcome::Undecided, level: k, tolerance: tol, witness: None, defect: 0.0 };
    }
    let monos = monomials(reg);
    let mut path = Vec::with_capacity(k as usize);
    let mut worst = 0.0f64;
    let ok = membership_rec(u.operator(), k, tol, &monos, &mut path, &mut worst);
    let witness = if !ok {
        Some(Witness::Directions(path.iter().map(|&i| reg.label(i)).collect()))
    } else if k == 1 {
        Some(Witness::Weyl(fourier_coeffs(u.operator()).argmax().0))
    } else {
        None
    };
    Verdict {
        outcome: if ok { Outcome::Accepted } else { Outcome::Rejected },
        level: k,
        tolerance: tol,
        witness,
        defect: worst,
    }
}

// Leaves the failing direction path in `path` when returning false.
fn membership_rec(
    v: &DenseOperator,
    k: u32,
    tol: f64,
    monos: &[WeylMonomial],
    path: &mut Vec<usize>,
    worst: &mut f64,
) -> bool {
    if k == 0 {
        let id = DenseOperator::identity(v.register());
        let dist = align_phase(v, &id).distance();
        *worst = worst.max(dist);
        return dist <= tol;
    }
    for (i, m) in monos.iter().enumerate() {
        path.push(i);
        if !membership_rec(&derivative_op(v, m), k - 1, 2.0 * tol, monos, path, worst) {
            return false;
        }
        path.pop();
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    /// Every element of the level is represented.
    Exact,
    /// A verified subfamily; fidelities over it are lower bounds.
    CandidateFamily,
}

/// Representatives, up to global phase, of one hierarchy level.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub level: u32,
    pub reg: Register,
    pub representatives: Vec<UnitaryHandle>,
    pub completeness: Completeness,
    /// Identifies how the set was built; part of the cache key.
    pub construction: &'static str,
}

pub const CONSTRUCTION_PHASE: &str = "phase-identity/v1";
pub const CONSTRUCTION_WEYL: &str = "weyl-labels/v1";
pub const CONSTRUCTION_CLIFFORD_BFS: &str = "bfs-closure[fourier,phase]/v1";
pub const CONSTRUCTION_SEMI_CLIFFORD: &str = "clifford*diag(1,e^{i*pi*m/4})*clifford/v1";

impl LevelSet {
    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Exact
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Re-checks membership of every representative and pairwise
    /// distinctness up to phase.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.representatives.iter().enumerate() {
            if r.register() != self.reg {
                return Err(Error::InvalidArgument(format!("representative {i} has the wrong register")));
            }
            if !in_level(r, self.level, DEFAULT_TOL_BASE).accepted() {
                return Err(Error::InvalidArgument(format!("representative {i} is not in level {}", self.level)));
            }
            for (j, s) in self.representatives[..i].iter().enumerate() {
                if align_phase(r.operator(), s.operator()).distance() <= DEDUP_TOL {
                    return Err(Error::InvalidArgument(format!("representatives {j} and {i} coincide")));
                }
            }
        }
        Ok(())
    }
}

fn push_unique(set: &mut Vec<UnitaryHandle>, cand: UnitaryHandle) -> bool {
    // quick reject on |⟨U,V⟩| before the entrywise residual
    let dup = set.iter().any(|s| {
        hs_inner_unchecked(s.operator(), cand.operator()).norm() > 0.5
            && align_phase(s.operator(), cand.operator()).distance() <= DEDUP_TOL
    });
    if !dup {
        set.push(cand);
    }
    !dup
}

/// `|C^{(2)}_1 / U(1)| = d · |SL(2, d)| · d = d³(d² − 1)`.
pub fn single_qudit_clifford_count(d: Prime) -> usize {
    let d = d.get() as usize;
    d * d * d * (d * d - 1)
}

/// Representatives of level `k` for the parameter ranges that can be
/// enumerated on a desk: level 0 and 1 for any register with
/// `d^{2n} ≤ 4096`, level 2 for one qubit or qutrit, and a candidate
/// family for level 3 on one qubit.
pub fn enumerate_level(n: usize, d: u32, k: u32) -> Result<LevelSet> {
    let reg = Register::new(n, d)?;
    match k {
        0 => Ok(LevelSet {
            level: 0,
            reg,
            representatives: alloc::vec![UnitaryHandle::identity(reg)],
            completeness: Completeness::Exact,
            construction: CONSTRUCTION_PHASE,
        }),
        1 if reg.num_labels() <= 4096 => Ok(LevelSet {
            level: 1,
            reg,
            representatives: reg.labels().map(|a| weyl_unitary(&a)).collect(),
            completeness: Completeness::Exact,
            construction: CONSTRUCTION_WEYL,
        }),
        2 if n == 1 && (d == 2 || d == 3) => clifford_closure(reg),
        3 if n == 1 && d == 2 => semi_clifford_family(),
        _ => Err(Error::OutOfScope(format!("enumeration of level {k} for n={n}, d={d}"))),
    }
}

fn clifford_closure(reg: Register) -> Result<LevelSet> {
    let gens = [gates::qudit_fourier(reg.d), gates::qudit_phase(reg.d)];
    let mut set = alloc::vec![UnitaryHandle::identity(reg)];
    let mut frontier = 0..1;
    while !frontier.is_empty() {
        let start = set.len();
        for i in frontier.clone() {
            for g in &gens {
                let cand = g.matmul(&set[i])?;
                push_unique(&mut set, cand);
            }
        }
        frontier = start..set.len();
    }
    let expected = single_qudit_clifford_count(reg.d);
    if set.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "Clifford closure reached {} elements, expected {expected}",
            set.len()
        )));
    }
    Ok(LevelSet {
        level: 2,
        reg,
        representatives: set,
        completeness: Completeness::Exact,
        construction: CONSTRUCTION_CLIFFORD_BFS,
    })
}

fn semi_clifford_family() -> Result<LevelSet> {
    let cliffords = clifford_closure(Register::qubits(1))?.representatives;
    let diags: Vec<UnitaryHandle> = (0..8).map(gates::diag_pi_over_4).collect();
    let mut set: Vec<UnitaryHandle> = Vec::new();
    for c1 in &cliffords {
        for dm in &diags {
            let left = c1.matmul(dm)?;
            for c2 in &cliffords {
                push_unique(&mut set, left.matmul(c2)?);
            }
        }
    }
    set.retain(|u| in_level(u, 3, DEFAULT_TOL_BASE).accepted());
    Ok(LevelSet {
        level: 3,
        reg: Register::qubits(1),
        representatives: set,
        completeness: Completeness::CandidateFamily,
        construction: CONSTRUCTION_SEMI_CLIFFORD,
    })
}

#[derive(Clone, Debug)]
pub struct FidelityResult {
    /// `max_V |⟨V, U⟩|²` over the level set.
    pub value: f64,
    pub argmax_index: usize,
    pub argmax: UnitaryHandle,
    pub level: u32,
    pub completeness: Completeness,
}

impl FidelityResult {
    /// True when `value` is the exact fidelity rather than a lower bound.
    pub fn is_exact(&self) -> bool {
        self.completeness == Completeness::Exact
    }
}

/// Clifford fidelity `F_{C^{(k)}}(U) = max_{V ∈ C^{(k)}} |⟨V,U⟩|²`.
pub fn fidelity(u: &UnitaryHandle, k: u32, set: &LevelSet) -> Result<FidelityResult> {
    if set.level != k {
        return Err(Error::LevelMismatch { expected: k, found: set.level });
    }
    if set.is_empty() {
        return Err(Error::EmptyLevelSet);
    }
    if set.reg != u.register() {
        return Err(Error::DimensionMismatch { left: set.reg.dim(), right: u.dim() });
    }
    let (idx, value) = set
        .representatives
        .iter()
        .map(|v| hs_inner_unchecked(v.operator(), u.operator()).norm_sqr())
        .enumerate()
        .fold((0, -1.0), |best, (i, f)| if f > best.1 { (i, f) } else { best });
    Ok(FidelityResult {
        value,
        argmax_index: idx,
        argmax: set.representatives[idx].clone(),
        level: k,
        completeness: set.completeness,
    })
}

/// `2^{−k+3/2}`.
pub fn separation_radius(k: u32) -> f64 {
    libm::pow(2.0, 1.5 - f64::from(k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub level: u32,
    pub radius: f64,
    pub checked: usize,
    pub phase_identities: usize,
    /// Smallest `min_θ ‖e^{iθ}V − I‖₂` over non-phase representatives.
    pub min_non_phase_distance: Option<f64>,
    /// Phases `θ` sampled on phase-identity representatives.
    pub theta_checks: usize,
    pub violations: usize,
}

impl SeparationReport {
    pub fn consistent(&self) -> bool {
        self.violations == 0
    }
}

const THETA_GRID: usize = 720;

/// Checks the separation property of a level set: no representative other
/// than a phase lies within `2^{−k+3/2}` of `I` under any global phase, and
/// phase identities `e^{iθ} I` within that radius have `|θ| ≤ 2‖e^{iθ}I − I‖₂`.
pub fn separation_check(set: &LevelSet) -> SeparationReport {
    let radius = separation_radius(set.level);
    let id = DenseOperator::identity(set.reg);
    let mut report = SeparationReport {
        level: set.level,
        radius,
        checked: set.len(),
        phase_identities: 0,
        min_non_phase_distance: None,
        theta_checks: 0,
        violations: 0,
    };
    for v in &set.representatives {
        let al = align_phase(&id, v.operator());
        let dist = al.distance();
        if dist <= DEDUP_TOL {
            report.phase_identities += 1;
            for s in 0..THETA_GRID {
                let phi = -core::f64::consts::PI + 2.0 * core::f64::consts::PI * (s as f64 + 0.5) / THETA_GRID as f64;
                let u = v.with_phase(phi);
                let delta = crate::matcore::frob_norm(&u.operator().sub(&id).expect("same shape"));
                let theta = hs_inner_unchecked(&id, u.operator()).arg();
                report.theta_checks += 1;
                if delta < radius && libm::fabs(theta) > 2.0 * delta + 1e-12 {
                    report.violations += 1;
                }
            }
        } else {
            report.min_non_phase_distance = Some(report.min_non_phase_distance.map_or(dist, |m: f64| m.min(dist)));
            if dist < radius - 1e-12 {
                report.violations += 1;
            }
        }
    }
    report
}

/// `ε_k = 24^{−k}`.
pub fn inverse_epsilon(k: u32) -> f64 {
    libm::pow(24.0, -f64::from(k))
}

/// `C_k = 24^{k−1}`.
pub fn inverse_constant(k: u32) -> f64 {
    libm::pow(24.0, f64::from(k) - 1.0)
}

#[derive(Clone, Copy, Debug)]
pub struct BoundSlack {
    /// Slack on the direct and `P²` inverse inequalities.
    pub exact: f64,
    /// Slack on the near-extremal inverse inequality.
    pub near_extremal: f64,
}

impl Default for BoundSlack {
    fn default() -> Self {
        BoundSlack { exact: 1e-9, near_extremal: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct InverseBoundsReport {
    pub k: u32,
    pub norm: NormReport,
    pub fidelity: FidelityResult,
    /// `F ≤ ‖U‖_{P^k}`; only decided with a complete level set.
    pub direct: Option<bool>,
    /// `F ≤ ‖U‖_{P^k}²`; only decided with a complete level set.
    pub direct_improved: Option<bool>,
    /// `F ≥ ‖U‖_{P²}⁴`, for `k = 2`.
    pub inverse_p2: Option<bool>,
    /// `1 − ‖U‖_{P^k}^{2^k}`.
    pub epsilon: f64,
    pub epsilon_k: f64,
    pub constant_k: f64,
    /// `F ≥ 1 − C_k ε` whenever `ε ≤ ε_k`.
    pub inverse_near_extremal: Option<bool>,
}

impl InverseBoundsReport {
    pub fn all_hold(&self) -> bool {
        [self.direct, self.direct_improved, self.inverse_p2, self.inverse_near_extremal]
            .iter()
            .all(|c| c.unwrap_or(true))
    }
}

/// Evaluates the direct and inverse inequalities relating `‖U‖_{P^k}` and
/// `F_{C^{(k−1)}}(U)` for `k ∈ {2, 3, 4}`; `lower` must represent level `k − 1`.
pub fn verify_inverse_bounds(
    u: &UnitaryHandle,
    k: u32,
    lower: &LevelSet,
    slack: BoundSlack,
) -> Result<InverseBoundsReport> {
    if !(2..=4).contains(&k) {
        return Err(Error::OutOfScope(format!("inverse bounds are checked for k in 2..=4, got {k}")));
    }
    let norm = pnorm_exact(u, k)?;
    let fid = fidelity(u, k - 1, lower)?;
    let f = fid.value;
    let complete = lower.is_complete();
    let epsilon = (1.0 - norm.raw).max(0.0);
    let epsilon_k = inverse_epsilon(k);
    let constant_k = inverse_constant(k);
    Ok(InverseBoundsReport {
        k,
        direct: complete.then_some(f <= norm.value + slack.exact),
        direct_improved: complete.then_some(f <= norm.value * norm.value + slack.exact),
        inverse_p2: (k == 2).then_some(f >= norm.raw - slack.exact),
        inverse_near_extremal: (epsilon <= epsilon_k).then_some(f >= 1.0 - constant_k * epsilon - slack.near_extremal),
        norm,
        fidelity: fid,
        epsilon,
        epsilon_k,
        constant_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::tau_pow;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{PI, SQRT_2};

    #[test]
    fn phase_identity_examples() {
        let reg = Register::qubits(1);
        let v = is_phase_identity(&UnitaryHandle::identity(reg), DEFAULT_TOL_BASE);
        assert!(v.accepted());
        assert_eq!(v.witness, Some(Witness::Phase(0.0)));

        let u = UnitaryHandle::identity(reg).with_phase(PI / 7.0);
        let v = is_phase_identity(&u, DEFAULT_TOL_BASE);
        assert!(v.accepted());
        match v.witness {
            Some(Witness::Phase(th)) => assert_abs_diff_eq!(th, PI / 7.0, epsilon = 1e-14),
            _ => panic!(),
        }

        let v = is_phase_identity(&gates::x(), DEFAULT_TOL_BASE);
        assert!(v.rejected());
        assert_abs_diff_eq!(v.defect, SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn pauli_detection() {
        let a = SympVector::new(2, &[1], &[1]).unwrap();
        let p = Prime::new(2).unwrap();
        let u = UnitaryHandle::new(weyl_unitary(&a).scalar_mul(tau_pow(p, 3))).unwrap();
        let v = is_pauli(&u, 1e-8);
        assert!(v.accepted());
        assert_eq!(v.witness, Some(Witness::Weyl(a)));
        assert!(is_pauli(&gates::t(), 1e-8).rejected());
        assert!(is_pauli(&gates::h(), 1e-8).rejected());
    }

    #[test]
    fn t_gate_levels() {
        let t = gates::t();
        assert!(in_level(&t, 3, DEFAULT_TOL_BASE).accepted());
        let v = in_level(&t, 2, DEFAULT_TOL_BASE);
        assert!(v.rejected());
        assert!(matches!(v.witness, Some(Witness::Directions(ref p)) if p.len() == 2));
        let w = SympVector::new(3, &[1], &[2]).unwrap();
        assert!(in_level(&weyl_unitary(&w), 1, DEFAULT_TOL_BASE).accepted());
    }

    #[test]
    fn budget_gives_undecided() {
        let v = in_level_with_budget(&gates::cnot(), 3, DEFAULT_TOL_BASE, 100);
        assert_eq!(v.outcome, Outcome::Undecided);
    }

    #[test]
    fn ht_squared_in_no_level() {
        let ht = gates::h().matmul(&gates::t()).unwrap();
        assert!(in_level(&ht, 3, DEFAULT_TOL_BASE).accepted());
        let ht2 = ht.matmul(&ht).unwrap();
        for k in 0..=5 {
            assert!(in_level(&ht2, k, DEFAULT_TOL_BASE).rejected(), "k={k}");
        }
    }

    #[test]
    fn enumerations() {
        let paulis = enumerate_level(1, 2, 1).unwrap();
        assert_eq!(paulis.len(), 4);
        assert!(paulis.is_complete());
        let cl = enumerate_level(1, 2, 2).unwrap();
        assert_eq!(cl.len(), 24);
        cl.validate().unwrap();
        let cl3 = enumerate_level(1, 3, 2).unwrap();
        assert_eq!(cl3.len(), 216);
        assert!(enumerate_level(2, 2, 2).is_err());
        assert!(enumerate_level(1, 3, 3).is_err());
        assert!(enumerate_level(1, 4, 1).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let paulis = enumerate_level(1, 2, 1).unwrap();
        let r = fidelity(&gates::t(), 1, &paulis).unwrap();
        assert_abs_diff_eq!(r.value, (2.0 + SQRT_2) / 4.0, epsilon = 1e-14);
        assert_eq!(r.argmax_index, 0);
        assert!(fidelity(&gates::t(), 2, &paulis).is_err());
        let z = fidelity(&gates::z(), 1, &paulis).unwrap();
        assert_abs_diff_eq!(z.value, 1.0, epsilon = 1e-14);
        let empty = LevelSet { representatives: Vec::new(), ..paulis.clone() };
        assert_eq!(fidelity(&gates::t(), 1, &empty).unwrap_err(), Error::EmptyLevelSet);
    }

    #[test]
    fn separation_on_small_levels() {
        let p = separation_check(&enumerate_level(1, 2, 1).unwrap());
        assert!(p.consistent());
        assert_eq!(p.phase_identities, 1);
        assert_abs_diff_eq!(p.min_non_phase_distance.unwrap(), SQRT_2, epsilon = 1e-12);
        let c = separation_check(&enumerate_level(1, 2, 2).unwrap());
        assert!(c.consistent());
        assert!(c.min_non_phase_distance.unwrap() >= libm::sqrt(0.5));
    }

    #[test]
    fn inverse_constants() {
        assert_abs_diff_eq!(inverse_epsilon(2), 1.0 / 576.0, epsilon = 1e-18);
        assert_abs_diff_eq!(inverse_constant(3), 576.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inverse_constant(4), 13824.0, epsilon = 1e-9);
    }

    #[test]
    fn inverse_bounds_examples() {
        let paulis = enumerate_level(1, 2, 1).unwrap();
        let z = verify_inverse_bounds(&gates::z(), 2, &paulis, BoundSlack::default()).unwrap();
        assert!(z.all_hold());
        assert_abs_diff_eq!(z.fidelity.value, 1.0, epsilon = 1e-12);
        assert_eq!(z.inverse_near_extremal, Some(true));

        let t = verify_inverse_bounds(&gates::t(), 2, &paulis, BoundSlack::default()).unwrap();
        assert!(t.all_hold());
        assert_abs_diff_eq!(t.norm.raw, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(t.norm.value, libm::pow(0.75, 0.25), epsilon = 1e-12);
        assert_eq!(t.inverse_near_extremal, None);
        assert!(verify_inverse_bounds(&gates::t(), 5, &paulis, BoundSlack::default()).is_err());
    }
}
