//! Measurement-statistics simulation of the uniformity-norm bias estimator
//! and the level-3 tester built on it.
//!
//! Oracles are applied to explicit state vectors; swap tests sample their
//! Bernoulli outcome from exactly computed overlaps. Every application of an
//! oracle charges the underlying `U`/`U*` query counters.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::galois::{Register, SympVector};
use crate::matcore::{DenseOperator, UnitaryHandle};
use crate::par::map_indices;
use crate::pauligroup::WeylMonomial;
use crate::uniformity::derivative_op;

/// Shared query counters for one black-box unitary.
#[derive(Debug, Default)]
pub struct QueryCounter {
    u: AtomicU64,
    u_adj: AtomicU64,
}

impl QueryCounter {
    pub fn queries_u(&self) -> u64 {
        self.u.load(Ordering::Relaxed)
    }

    pub fn queries_u_adj(&self) -> u64 {
        self.u_adj.load(Ordering::Relaxed)
    }

    pub fn total(&self) -> u64 {
        self.queries_u() + self.queries_u_adj()
    }
}

/// Query access to `∂_{h_m}…∂_{h_1} U` (or its adjoint) for a black-box `U`.
#[derive(Debug, Clone)]
pub struct OracleHandle {
    base: Arc<UnitaryHandle>,
    stack: Vec<SympVector>,
    adjoint: bool,
    counter: Arc<QueryCounter>,
    materialized: OnceCell<DenseOperator>,
}

impl OracleHandle {
    pub fn new(u: UnitaryHandle) -> Self {
        Self::with_counter(Arc::new(u), Arc::new(QueryCounter::default()))
    }

    pub fn with_counter(u: Arc<UnitaryHandle>, counter: Arc<QueryCounter>) -> Self {
        OracleHandle { base: u, stack: Vec::new(), adjoint: false, counter, materialized: OnceCell::new() }
    }

    pub fn register(&self) -> Register {
        self.base.register()
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn directions(&self) -> &[SympVector] {
        &self.stack
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    pub fn counter(&self) -> &Arc<QueryCounter> {
        &self.counter
    }

    /// The same oracle with `U` and `U*` roles swapped.
    pub fn adjoint(&self) -> Self {
        OracleHandle {
            base: self.base.clone(),
            stack: self.stack.clone(),
            adjoint: !self.adjoint,
            counter: self.counter.clone(),
            materialized: OnceCell::new(),
        }
    }

    /// The matrix this oracle applies, built from the direction stack.
    pub fn matrix(&self) -> &DenseOperator {
        self.materialized.get_or_init(|| {
            let mut v = self.base.operator().clone();
            for h in &self.stack {
                v = derivative_op(&v, &WeylMonomial::new(h));
            }
            if self.adjoint {
                v.adjoint()
            } else {
                v
            }
        })
    }

    fn charge(&self) {
        charge(&self.counter, self.stack.len(), self.adjoint);
    }

    /// Applies the oracle to the first register of a two-register state.
    pub fn apply(&self, state: &EntangledState) -> Result<EntangledState> {
        if state.reg != self.register() {
            return Err(Error::DimensionMismatch { left: state.reg.dim(), right: self.register().dim() });
        }
        self.charge();
        let m = self.matrix();
        let dim = state.reg.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        // amplitude index is i * dim + j with i on the first register
        for i in 0..dim {
            for k in 0..dim {
                let a = m[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    out[i * dim + j] += a * state.amps[k * dim + j];
                }
            }
        }
        Ok(EntangledState { reg: state.reg, amps: out })
    }
}

// ∂V and (∂V)* each use V once and V* once.
fn charge(counter: &QueryCounter, depth: usize, adjoint: bool) {
    if depth == 0 {
        let slot = if adjoint { &counter.u_adj } else { &counter.u };
        slot.fetch_add(1, Ordering::Relaxed);
    } else {
        charge(counter, depth - 1, false);
        charge(counter, depth - 1, true);
    }
}

/// Oracle access to `∂_h O`; each application of it applies `O` and `O*` once.
pub fn derivative_oracle(o: &OracleHandle, h: &SympVector) -> Result<OracleHandle> {
    if h.register() != o.register() {
        return Err(Error::DimensionMismatch { left: o.register().n, right: h.n() });
    }
    if o.adjoint {
        return Err(Error::InvalidArgument("derivative of an adjoint oracle handle".into()));
    }
    let mut stack = o.stack.clone();
    stack.push(h.clone());
    let next = OracleHandle {
        base: o.base.clone(),
        stack,
        adjoint: false,
        counter: o.counter.clone(),
        materialized: OnceCell::new(),
    };
    if let Some(parent) = o.materialized.get() {
        let _ = next.materialized.set(derivative_op(parent, &WeylMonomial::new(h)));
    }
    Ok(next)
}

/// A pure state on two `n`-qudit registers.
#[derive(Clone, Debug, PartialEq)]
pub struct EntangledState {
    reg: Register,
    amps: Vec<Complex64>,
}

impl EntangledState {
    pub fn register(&self) -> Register {
        self.reg
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum())
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if self.reg != other.reg {
            return Err(Error::DimensionMismatch { left: self.amps.len(), right: other.amps.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Reduced density matrix of the first register.
    pub fn reduced_first(&self) -> DenseOperator {
        let dim = self.reg.dim();
        DenseOperator::from_fn(self.reg, |i, k| {
            (0..dim).map(|j| self.amps[i * dim + j] * self.amps[k * dim + j].conj()).sum()
        })
    }
}

/// `|Φ⟩ = d^{−n/2} Σ_i |i,i⟩`.
pub fn prepare_max_entangled(reg: Register) -> EntangledState {
    let dim = reg.dim();
    let a = 1.0 / libm::sqrt(dim as f64);
    let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        amps[i * dim + i] = Complex64::new(a, 0.0);
    }
    EntangledState { reg, amps }
}

/// `Pr[swap test outputs 1] = (1 + |⟨ψ|φ⟩|²) / 2`.
pub fn swap_test_probability(psi: &EntangledState, phi: &EntangledState) -> Result<f64> {
    let ov = psi.overlap(phi)?;
    Ok((0.5 * (1.0 + ov.norm_sqr())).clamp(0.0, 1.0))
}

/// One swap test; `true` is the outcome "1" (ancilla measured in `|0⟩`).
pub fn swap_test<R: Rng + ?Sized>(psi: &EntangledState, phi: &EntangledState, rng: &mut R) -> Result<bool> {
    let p = swap_test_probability(psi, phi)?;
    Ok(rng.random_bool(p))
}

/// Swap-test acceptance probability from the full circuit
/// `H_anc · CSWAP · H_anc` on `|0⟩|ψ⟩|φ⟩`, state dimension `2 · d^{4n}`.
pub fn swap_test_probability_circuit(psi: &EntangledState, phi: &EntangledState) -> Result<f64> {
    if psi.reg != phi.reg {
        return Err(Error::DimensionMismatch { left: psi.amps.len(), right: phi.amps.len() });
    }
    let m = psi.amps.len();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    // after the first Hadamard: (|0⟩ + |1⟩)/√2 ⊗ |ψ⟩|φ⟩
    let mut branch0 = vec![Complex64::new(0.0, 0.0); m * m];
    for a in 0..m {
        for b in 0..m {
            branch0[a * m + b] = psi.amps[a] * phi.amps[b] * s;
        }
    }
    let mut branch1 = branch0.clone();
    // controlled swap on the |1⟩ branch
    let mut swapped = vec![Complex64::new(0.0, 0.0); m * m];
    for a in 0..m {
        for b in 0..m {
            swapped[b * m + a] = branch1[a * m + b];
        }
    }
    branch1 = swapped;
    // second Hadamard, ancilla |0⟩ amplitude = (branch0 + branch1)/√2
    let p0: f64 = branch0.iter().zip(&branch1).map(|(x, y)| ((x + y) * s).norm_sqr()).sum();
    Ok(p0)
}

/// How the swap-test acceptance probability is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SwapMode {
    /// From the overlap of the two states.
    #[default]
    Exact,
    /// From the full controlled-swap circuit state.
    Circuit,
}

/// Level-`k` bias estimator: returns `true` with probability
/// `(1 + ‖U‖_{P^k}^{2^k}) / 2`.
pub fn pnorm_bias<R: Rng + ?Sized>(oracle: &OracleHandle, k: u32, rng: &mut R) -> Result<bool> {
    pnorm_bias_with(oracle, k, SwapMode::Exact, rng)
}

pub fn pnorm_bias_with<R: Rng + ?Sized>(oracle: &OracleHandle, k: u32, mode: SwapMode, rng: &mut R) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("bias estimator needs k >= 1".into()));
    }
    if k == 1 {
        let phi = prepare_max_entangled(oracle.register());
        let u_phi = oracle.apply(&phi)?;
        let p = match mode {
            SwapMode::Exact => swap_test_probability(&phi, &u_phi)?,
            SwapMode::Circuit => swap_test_probability_circuit(&phi, &u_phi)?.clamp(0.0, 1.0),
        };
        return Ok(rng.random_bool(p));
    }
    let reg = oracle.register();
    let h = reg.label(rng.random_range(0..reg.num_labels()));
    let next = derivative_oracle(oracle, &h)?;
    pnorm_bias_with(&next, k - 1, mode, rng)
}

/// Exact queries to `(U, U*)` consumed by one bias-estimator run at level `k`.
pub fn queries_per_bias_run(k: u32) -> (u64, u64) {
    match k {
        0 => (0, 0),
        1 => (1, 0),
        _ => {
            let half = 1u64 << (k - 2);
            (half, half)
        }
    }
}

/// Default confidence target of the tester.
pub const DEFAULT_CONFIDENCE: f64 = 0.9;
/// Largest `ε` accepted by the tester.
pub const MAX_EPSILON: f64 = 0.04;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TesterConfig {
    pub epsilon: f64,
    pub repetitions: u64,
    pub confidence: f64,
    pub seed: u64,
    pub swap: SwapMode,
}

impl TesterConfig {
    /// Chooses the repetition count so that, by Hoeffding, the estimate
    /// `E = 2·(fraction of ones) − 1` is within `ε` of its mean except with
    /// probability `(1 − confidence)/2` on each side:
    /// `N = ⌈2 ln(2/(1 − confidence)) / ε²⌉`.
    pub fn new(epsilon: f64, confidence: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
            return Err(Error::InvalidArgument(alloc::format!(
                "epsilon must lie in (0, {MAX_EPSILON}], got {epsilon}"
            )));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::InvalidArgument(alloc::format!("confidence must lie in (0, 1), got {confidence}")));
        }
        let per_side = (1.0 - confidence) / 2.0;
        let reps = libm::ceil(2.0 * libm::log(1.0 / per_side) / (epsilon * epsilon));
        Ok(TesterConfig { epsilon, repetitions: reps as u64, confidence, seed, swap: SwapMode::Exact })
    }

    pub fn with_default_confidence(epsilon: f64, seed: u64) -> Result<Self> {
        Self::new(epsilon, DEFAULT_CONFIDENCE, seed)
    }

    pub fn with_swap(self, swap: SwapMode) -> Self {
        TesterConfig { swap, ..self }
    }

    /// `E ≤ 1 − 17ε` is a rejection.
    pub fn threshold(&self) -> f64 {
        1.0 - 17.0 * self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TesterReport {
    pub n: usize,
    pub d: u32,
    pub k: u32,
    pub epsilon: f64,
    pub repetitions: u64,
    pub ones: u64,
    /// `2·(ones / repetitions) − 1`.
    pub estimate: f64,
    pub threshold: f64,
    pub accept: bool,
    pub queries_u: u64,
    pub queries_u_adj: u64,
    pub seed: u64,
}

/// Runs the bias estimator `repetitions` times at order `k`; run `i` uses
/// ChaCha stream `i` of the seed.
pub fn estimate_bias(oracle: &OracleHandle, k: u32, repetitions: u64, seed: u64) -> Result<u64> {
    estimate_bias_with(oracle, k, repetitions, seed, SwapMode::Exact)
}

pub fn estimate_bias_with(oracle: &OracleHandle, k: u32, repetitions: u64, seed: u64, mode: SwapMode) -> Result<u64> {
    let (base, stack, adjoint, counter) = (&oracle.base, &oracle.stack, oracle.adjoint, &oracle.counter);
    let outcomes = map_indices(repetitions as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let local = OracleHandle {
            base: base.clone(),
            stack: stack.clone(),
            adjoint,
            counter: counter.clone(),
            materialized: OnceCell::new(),
        };
        pnorm_bias_with(&local, k, mode, &mut rng)
    });
    let mut ones = 0;
    for o in outcomes {
        ones += u64::from(o?);
    }
    Ok(ones)
}

/// The level-3 tester: estimate `‖U‖_{P⁴}^{16}` from bias-estimator runs and
/// reject iff the estimate is at most `1 − 17ε`.
pub fn c3_tester(oracle: &OracleHandle, cfg: &TesterConfig) -> Result<TesterReport> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= MAX_EPSILON) {
        return Err(Error::InvalidArgument(alloc::format!("epsilon must lie in (0, {MAX_EPSILON}]")));
    }
    if cfg.repetitions == 0 {
        return Err(Error::InvalidArgument("tester needs at least one repetition".into()));
    }
    let before_u = oracle.counter.queries_u();
    let before_adj = oracle.counter.queries_u_adj();
    let ones = estimate_bias_with(oracle, 4, cfg.repetitions, cfg.seed, cfg.swap)?;
    let estimate = 2.0 * ones as f64 / cfg.repetitions as f64 - 1.0;
    let reg = oracle.register();
    Ok(TesterReport {
        n: reg.n,
        d: reg.d.get(),
        k: 4,
        epsilon: cfg.epsilon,
        repetitions: cfg.repetitions,
        ones,
        estimate,
        threshold: cfg.threshold(),
        accept: estimate > cfg.threshold(),
        queries_u: oracle.counter.queries_u() - before_u,
        queries_u_adj: oracle.counter.queries_u_adj() - before_adj,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::matcore::haar_random_unitary;
    use crate::uniformity::pauli_derivative;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::SQRT_2;

    #[test]
    fn max_entangled_state() {
        let reg = Register::qubits(1);
        let phi = prepare_max_entangled(reg);
        let s = 1.0 / SQRT_2;
        let expected = [s, 0.0, 0.0, s];
        for (a, e) in phi.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
        assert_abs_diff_eq!(phi.norm(), 1.0, epsilon = 1e-15);
        let reg3 = Register::new(2, 3).unwrap();
        let rho = prepare_max_entangled(reg3).reduced_first();
        let mixed = DenseOperator::identity(reg3).scalar_mul(Complex64::new(1.0 / 9.0, 0.0));
        assert!(rho.max_abs_diff(&mixed) < 1e-15);
    }

    #[test]
    fn overlap_is_normalized_trace() {
        for (n, d, seed) in [(1, 2, 1), (2, 2, 2), (1, 3, 3)] {
            let reg = Register::new(n, d).unwrap();
            let u = haar_random_unitary(reg, seed);
            let phi = prepare_max_entangled(reg);
            let o = OracleHandle::new(u.clone());
            let ov = phi.overlap(&o.apply(&phi).unwrap()).unwrap();
            let expected = u.trace() / reg.dim() as f64;
            assert_abs_diff_eq!((ov - expected).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn swap_test_probabilities() {
        let reg = Register::qubits(1);
        let phi = prepare_max_entangled(reg);
        assert_abs_diff_eq!(swap_test_probability(&phi, &phi).unwrap(), 1.0, epsilon = 1e-15);
        let x_phi = OracleHandle::new(gates::x()).apply(&phi).unwrap();
        assert_abs_diff_eq!(swap_test_probability(&phi, &x_phi).unwrap(), 0.5, epsilon = 1e-15);
        let t_phi = OracleHandle::new(gates::t()).apply(&phi).unwrap();
        let expected = 0.5 * (1.0 + (2.0 + SQRT_2) / 4.0);
        assert_abs_diff_eq!(swap_test_probability(&phi, &t_phi).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(swap_test_probability_circuit(&phi, &t_phi).unwrap(), expected, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| swap_test(&phi, &phi, &mut rng).unwrap()));
    }

    #[test]
    fn circuit_mode_matches_overlap_formula() {
        let reg = Register::qubits(1);
        let phi = prepare_max_entangled(reg);
        for seed in 0..5 {
            let u = haar_random_unitary(reg, seed);
            let u_phi = OracleHandle::new(u).apply(&phi).unwrap();
            let a = swap_test_probability(&phi, &u_phi).unwrap();
            let b = swap_test_probability_circuit(&phi, &u_phi).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_oracle_matrix_and_queries() {
        let reg = Register::qubits(2);
        let u = haar_random_unitary(reg, 4);
        let o = OracleHandle::new(u.clone());
        let zero = SympVector::zero(reg);
        let d0 = derivative_oracle(&o, &zero).unwrap();
        assert!(d0.matrix().max_abs_diff(&DenseOperator::identity(reg)) < 1e-14);
        let phi = prepare_max_entangled(reg);
        d0.apply(&phi).unwrap();
        assert_eq!((o.counter().queries_u(), o.counter().queries_u_adj()), (1, 1));

        let h = reg.label(7);
        let dh = derivative_oracle(&o, &h).unwrap();
        let expected = pauli_derivative(&u, &h).unwrap();
        assert!(dh.matrix().max_abs_diff(&expected) < 1e-12);

        let counter = Arc::new(QueryCounter::default());
        let base = OracleHandle::with_counter(Arc::new(u), counter.clone());
        let mut cur = base;
        for i in [3, 5, 11] {
            cur = derivative_oracle(&cur, &reg.label(i)).unwrap();
        }
        cur.apply(&phi).unwrap();
        assert_eq!(counter.total(), 8);
        assert_eq!((counter.queries_u(), counter.queries_u_adj()), (4, 4));
        cur.adjoint().apply(&phi).unwrap();
        assert_eq!(counter.total(), 16);
    }

    #[test]
    fn bias_on_identity_and_query_accounting() {
        let reg = Register::qubits(1);
        let o = OracleHandle::new(UnitaryHandle::identity(reg));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=4 {
            let before = (o.counter().queries_u(), o.counter().queries_u_adj());
            assert!(pnorm_bias(&o, k, &mut rng).unwrap());
            let after = (o.counter().queries_u(), o.counter().queries_u_adj());
            assert_eq!((after.0 - before.0, after.1 - before.1), queries_per_bias_run(k));
        }
    }

    #[test]
    fn tester_config() {
        let cfg = TesterConfig::with_default_confidence(0.02, 1).unwrap();
        assert_eq!(cfg.repetitions, 14979);
        assert_abs_diff_eq!(cfg.threshold(), 0.66, epsilon = 1e-15);
        assert!(TesterConfig::with_default_confidence(0.05, 1).is_err());
        assert!(TesterConfig::with_default_confidence(0.0, 1).is_err());
        assert!(TesterConfig::new(0.02, 1.0, 1).is_err());
    }

    #[test]
    fn tester_accepts_identity_and_is_deterministic() {
        let reg = Register::qubits(1);
        let cfg = TesterConfig { epsilon: 0.02, repetitions: 200, confidence: 0.9, seed: 3, swap: SwapMode::Exact };
        let o = OracleHandle::new(UnitaryHandle::identity(reg));
        let r = c3_tester(&o, &cfg).unwrap();
        assert!(r.accept);
        assert_eq!(r.estimate, 1.0);
        assert_eq!((r.queries_u, r.queries_u_adj), (800, 800));

        let u = haar_random_unitary(Register::qubits(2), 9);
        let a = c3_tester(&OracleHandle::new(u.clone()), &cfg).unwrap();
        let b = c3_tester(&OracleHandle::new(u.clone()), &cfg).unwrap();
        assert_eq!(a, b);
        let c = c3_tester(&OracleHandle::new(u), &cfg.with_swap(SwapMode::Circuit)).unwrap();
        assert!((c.estimate - a.estimate).abs() <= 0.05);
    }
}
