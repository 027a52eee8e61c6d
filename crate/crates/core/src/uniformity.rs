//! Pauli derivatives, Pauli uniformity norms, and Weyl-basis Fourier analysis.
//!
//! `‖U‖_{P^k}^{2^k}` is the average over `h_1..h_k` of
//! `tr(∂_{h_k}…∂_{h_1} U) / d^n`. Exact mode unrolls the nesting identity
//! `‖U‖_{P^k}^{2^k} = E_h ‖∂_h U‖_{P^{k−1}}^{2^{k−1}}` down to the `P²` base
//! case `E_h |tr ∂_h V|² / d^{2n}`, so it costs `d^{2n(k−1)}` trace
//! evaluations instead of `d^{2nk}`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::galois::{Register, SympVector};
use crate::matcore::{DenseOperator, UnitaryHandle};
use crate::par::map_indices;
use crate::pauligroup::WeylMonomial;

/// Default cap on `P²` base-case evaluations in exact mode.
pub const DEFAULT_MAX_BASE_EVALUATIONS: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormMode {
    /// `term_count` trace evaluations were summed.
    Exact {
        term_count: u128,
    },
    Sampled {
        samples: u64,
        stderr: f64,
    },
}

/// Value of a Pauli uniformity norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport {
    pub order: u32,
    /// `‖U‖_{P^k}`.
    pub value: f64,
    /// `‖U‖_{P^k}^{2^k}`, clamped to `[0, 1]`.
    pub raw: f64,
    /// The expectation before clamping.
    pub raw_unclamped: f64,
    pub mode: NormMode,
}

impl NormReport {
    fn from_raw(order: u32, raw_unclamped: f64, mode: NormMode) -> Self {
        let raw = raw_unclamped.clamp(0.0, 1.0);
        let value = libm::pow(raw, 1.0 / libm::ldexp(1.0, order as i32));
        NormReport { order, value, raw, raw_unclamped, mode }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExactConfig {
    pub max_base_evaluations: u128,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig { max_base_evaluations: DEFAULT_MAX_BASE_EVALUATIONS }
    }
}

/// All Weyl monomials of a register, in label order.
pub(crate) fn monomials(reg: Register) -> Vec<WeylMonomial> {
    reg.labels().map(|a| WeylMonomial::new(&a)).collect()
}

/// `∂_h U = W_h U W_h* U*`.
pub fn pauli_derivative(u: &UnitaryHandle, h: &SympVector) -> Result<UnitaryHandle> {
    if h.register() != u.register() {
        return Err(Error::DimensionMismatch { left: u.register().n, right: h.n() });
    }
    let m = WeylMonomial::new(h);
    Ok(derivative_with(u, &m))
}

pub(crate) fn derivative_with(u: &UnitaryHandle, m: &WeylMonomial) -> UnitaryHandle {
    let op = derivative_op(u.operator(), m);
    UnitaryHandle::trusted(op, 2.0 * u.defect() + 1e-15)
}

#[inline]
pub(crate) fn derivative_op(u: &DenseOperator, m: &WeylMonomial) -> DenseOperator {
    m.conjugate(u).mul_adjoint_unchecked(u)
}

/// `tr(∂_h V) = Σ_ij (W V W*)_ij · conj(V_ij)` without forming the product.
fn derivative_trace(v: &DenseOperator, m: &WeylMonomial) -> Complex64 {
    let c = m.conjugate(v);
    c.as_slice().iter().zip(v.as_slice()).map(|(a, b)| a * b.conj()).sum()
}

/// `‖V‖_{P²}⁴ = E_h |tr ∂_h V|² / d^{2n}`.
fn p2_base(v: &DenseOperator, monos: &[WeylMonomial]) -> f64 {
    let n2 = (v.dim() * v.dim()) as f64;
    let s: f64 = monos.iter().map(|m| derivative_trace(v, m).norm_sqr()).sum();
    s / (monos.len() as f64 * n2)
}

fn p1_raw(v: &DenseOperator) -> f64 {
    let n = v.dim() as f64;
    v.trace().norm_sqr() / (n * n)
}

fn exact_rec(v: &DenseOperator, depth: u32, monos: &[WeylMonomial]) -> f64 {
    if depth == 0 {
        return p2_base(v, monos);
    }
    let s: f64 = monos.iter().map(|m| exact_rec(&derivative_op(v, m), depth - 1, monos)).sum();
    s / monos.len() as f64
}

fn pow_u128(base: u128, exp: u32) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Exact `P^k` norm with the default budget.
pub fn pnorm_exact(u: &UnitaryHandle, k: u32) -> Result<NormReport> {
    pnorm_exact_with(u, k, &ExactConfig::default())
}

pub fn pnorm_exact_with(u: &UnitaryHandle, k: u32, cfg: &ExactConfig) -> Result<NormReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("uniformity norm order must be at least 1".into()));
    }
    let op = u.operator();
    if k == 1 {
        return Ok(NormReport::from_raw(1, p1_raw(op), NormMode::Exact { term_count: 1 }));
    }
    let labels = op.register().num_labels() as u128;
    let required = pow_u128(labels, k - 2);
    if required > cfg.max_base_evaluations {
        return Err(Error::BudgetExceeded { required, budget: cfg.max_base_evaluations });
    }
    let monos = monomials(op.register());
    let raw = if k == 2 {
        p2_base(op, &monos)
    } else {
        let parts = map_indices(monos.len(), |i| exact_rec(&derivative_op(op, &monos[i]), k - 3, &monos));
        parts.iter().sum::<f64>() / monos.len() as f64
    };
    let term_count = required.saturating_mul(labels);
    Ok(NormReport::from_raw(k, raw, NormMode::Exact { term_count }))
}

/// Monte-Carlo `P^k` norm: the outer `k−2` directions are sampled, the
/// `P²` base case is evaluated exactly. Sample `i` draws from ChaCha stream
/// `i` of `seed`, so the estimate does not depend on thread scheduling.
pub fn pnorm_sampled(u: &UnitaryHandle, k: u32, num_samples: u64, seed: u64) -> Result<NormReport> {
    if k < 2 {
        return Err(Error::InvalidArgument("sampled mode needs order k >= 2".into()));
    }
    if num_samples == 0 {
        return Err(Error::InvalidArgument("sampled mode needs at least one sample".into()));
    }
    let op = u.operator();
    let reg = op.register();
    let monos = monomials(reg);
    let values = map_indices(num_samples as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut v = op.clone();
        for _ in 0..k - 2 {
            let h = rng.random_range(0..monos.len());
            v = derivative_op(&v, &monos[h]);
        }
        p2_base(&v, &monos)
    });
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        libm::sqrt(var / n)
    } else {
        0.0
    };
    Ok(NormReport::from_raw(k, mean, NormMode::Sampled { samples: num_samples, stderr }))
}

/// Coefficients `Û(a) = ⟨W_a, U⟩`, indexed by label.
#[derive(Clone, Debug)]
pub struct FourierTable {
    reg: Register,
    coeffs: Vec<Complex64>,
}

impl FourierTable {
    pub fn register(&self) -> Register {
        self.reg
    }

    pub fn get(&self, a: &SympVector) -> Complex64 {
        self.coeffs[a.index()]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (SympVector, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (self.reg.label(i), c))
    }

    /// Entries with `|Û(a)| > tol`.
    pub fn support(&self, tol: f64) -> Vec<(SympVector, Complex64)> {
        self.iter().filter(|(_, c)| c.norm() > tol).collect()
    }

    /// `Σ_a |Û(a)|²`.
    pub fn parseval(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_a |Û(a)|⁴`.
    pub fn l4_fourth(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr() * c.norm_sqr()).sum()
    }

    /// Label with the largest `|Û(a)|`; ties go to the smallest label.
    pub fn argmax(&self) -> (SympVector, Complex64) {
        let (i, c) = self.coeffs.iter().enumerate().fold((0, Complex64::new(-1.0, 0.0)), |best, (i, &c)| {
            if best.1.re < 0.0 || c.norm() > best.1.norm() + 1e-15 {
                (i, c)
            } else {
                best
            }
        });
        (self.reg.label(i), c)
    }

    /// `Σ_a Û(a) W_a`.
    pub fn reconstruct(&self) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.reg);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = WeylMonomial::new(&self.reg.label(i)).to_dense().scalar_mul(c);
            out = out.add(&w).expect("same register");
        }
        out
    }
}

pub fn fourier_coeffs(u: &DenseOperator) -> FourierTable {
    let reg = u.register();
    let coeffs = reg.labels().map(|a| WeylMonomial::new(&a).inner(u)).collect();
    FourierTable { reg, coeffs }
}

/// `‖U‖_{P²}⁴` as the fourth power of the Fourier `L⁴` norm.
pub fn p2_via_fourier(u: &UnitaryHandle) -> f64 {
    fourier_coeffs(u.operator()).l4_fourth()
}
