//! Dense complex operators on `(C^d)^{⊗n}` with the normalized
//! Hilbert–Schmidt geometry.
//!
//! Storage is row-major; dimensions stay at or below a few dozen, so all
//! kernels are the naive cubic loops.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::galois::{Prime, Register};

/// Default bound on `‖U*U − I‖₂` for an operator to count as unitary.
pub const DEFAULT_UNITARITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `ω^e` with `ω = e^{2πi/d}`.
pub fn omega_pow(d: Prime, e: i64) -> Complex64 {
    let m = i64::from(d.get());
    let r = e.rem_euclid(m) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / m as f64)
}

/// `τ^t` with `τ = (−1)^d e^{iπ/d}`.
///
/// For `d = 2` this is `i^t`; for odd `d`, `τ = ω^{(d+1)/2}`. Either way
/// `τ² = ω` and `τ` has order `D`.
pub fn tau_pow(d: Prime, t: i64) -> Complex64 {
    let order = i64::from(d.phase_order());
    let gen = if d.get() == 2 { 1 } else { (i64::from(d.get()) + 1) / 2 };
    let r = (t.rem_euclid(order) * gen).rem_euclid(order) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / order as f64)
}

/// `τ` evaluated from its defining formula `(−1)^d e^{iπ/d}`.
pub fn tau(d: Prime) -> Complex64 {
    let sign = if d.get().is_multiple_of(2) { 1.0 } else { -1.0 };
    Complex64::from_polar(sign, PI / f64::from(d.get()))
}

/// A `d^n × d^n` complex matrix acting on `n` qudits.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    reg: Register,
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseOperator(n={}, d={}) [", self.reg.n, self.reg.d)?;
        for i in 0..self.dim {
            f.write_str("  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

impl core::ops::Index<(usize, usize)> for DenseOperator {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseOperator {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl DenseOperator {
    pub fn from_rows(reg: Register, data: Vec<Complex64>) -> Result<Self> {
        let dim = reg.dim();
        if data.len() != dim * dim {
            return Err(Error::BadShape { expected: dim * dim, found: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DenseOperator { reg, dim, data })
    }

    pub fn from_fn(reg: Register, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let dim = reg.dim();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        DenseOperator { reg, dim, data }
    }

    pub fn zeros(reg: Register) -> Self {
        let dim = reg.dim();
        DenseOperator { reg, dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(reg: Register) -> Self {
        let mut out = Self::zeros(reg);
        for i in 0..out.dim {
            out[(i, i)] = ONE;
        }
        out
    }

    pub fn diagonal(reg: Register, diag: &[Complex64]) -> Result<Self> {
        let mut out = Self::zeros(reg);
        if diag.len() != out.dim {
            return Err(Error::DimensionMismatch { left: out.dim, right: diag.len() });
        }
        for (i, &z) in diag.iter().enumerate() {
            out[(i, i)] = z;
        }
        Ok(out)
    }

    #[inline]
    pub fn register(&self) -> Register {
        self.reg
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.reg.d != other.reg.d {
            return Err(Error::ModulusMismatch { left: self.reg.d.get(), right: other.reg.d.get() });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let acc = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in acc.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        DenseOperator { reg: self.reg, dim: n, data: out }
    }

    /// `self · other*` without materializing the adjoint.
    pub(crate) fn mul_adjoint_unchecked(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            for j in 0..n {
                let orow = &other.data[j * n..(j + 1) * n];
                out[i * n + j] = row.iter().zip(orow).map(|(&a, &b)| a * b.conj()).sum();
            }
        }
        DenseOperator { reg: self.reg, dim: n, data: out }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(self.reg, |i, j| self.data[j * n + i].conj())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.reg.d != other.reg.d {
            return Err(Error::ModulusMismatch { left: self.reg.d.get(), right: other.reg.d.get() });
        }
        let reg = Register::new(self.reg.n + other.reg.n, self.reg.d.get())?;
        let m = other.dim;
        Ok(Self::from_fn(reg, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)]))
    }

    pub fn scalar_mul(&self, c: Complex64) -> Self {
        DenseOperator { reg: self.reg, dim: self.dim, data: self.data.iter().map(|&z| c * z).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(DenseOperator { reg: self.reg, dim: self.dim, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(DenseOperator { reg: self.reg, dim: self.dim, data })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `‖U*U − I‖₂` in the normalized Frobenius norm.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut z: Complex64 = (0..n).map(|k| self.data[k * n + i].conj() * self.data[k * n + j]).sum();
                if i == j {
                    z -= ONE;
                }
                acc += z.norm_sqr();
            }
        }
        libm::sqrt(acc / n as f64)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Normalized Hilbert–Schmidt inner product `tr(U*V) / d^n`.
pub fn hs_inner(u: &DenseOperator, v: &DenseOperator) -> Result<Complex64> {
    u.check_same_shape(v)?;
    Ok(hs_inner_unchecked(u, v))
}

#[inline]
pub(crate) fn hs_inner_unchecked(u: &DenseOperator, v: &DenseOperator) -> Complex64 {
    let s: Complex64 = u.data.iter().zip(&v.data).map(|(a, b)| a.conj() * b).sum();
    s / u.dim as f64
}

/// `‖U‖₂ = √⟨U,U⟩`.
pub fn frob_norm(u: &DenseOperator) -> f64 {
    let s: f64 = u.data.iter().map(|z| z.norm_sqr()).sum();
    libm::sqrt(s / u.dim as f64)
}

/// A dense operator known to be unitary up to `defect`.
#[derive(Clone, Debug)]
pub struct UnitaryHandle {
    op: DenseOperator,
    defect: f64,
}

impl UnitaryHandle {
    pub fn new(op: DenseOperator) -> Result<Self> {
        Self::with_tolerance(op, DEFAULT_UNITARITY_TOL)
    }

    pub fn with_tolerance(op: DenseOperator, tolerance: f64) -> Result<Self> {
        let defect = op.unitarity_defect();
        if defect.is_nan() || defect > tolerance {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        Ok(UnitaryHandle { op, defect })
    }

    /// Wraps an operator built from unitaries by unitary-preserving steps.
    /// `defect` is an upper estimate propagated from the inputs.
    pub(crate) fn trusted(op: DenseOperator, defect: f64) -> Self {
        UnitaryHandle { op, defect }
    }

    pub fn identity(reg: Register) -> Self {
        UnitaryHandle { op: DenseOperator::identity(reg), defect: 0.0 }
    }

    #[inline]
    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    pub fn into_operator(self) -> DenseOperator {
        self.op
    }

    #[inline]
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn adjoint(&self) -> Self {
        UnitaryHandle { op: self.op.adjoint(), defect: self.defect }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let op = self.op.matmul(&other.op)?;
        Ok(UnitaryHandle { op, defect: self.defect + other.defect + 1e-15 })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let op = self.op.tensor(&other.op)?;
        Ok(UnitaryHandle { op, defect: self.defect + other.defect + 1e-15 })
    }

    /// Multiplies by `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        UnitaryHandle { op: self.op.scalar_mul(Complex64::from_polar(1.0, theta)), defect: self.defect }
    }
}

impl core::ops::Deref for UnitaryHandle {
    type Target = DenseOperator;
    fn deref(&self) -> &DenseOperator {
        &self.op
    }
}

/// Result of `min_θ ‖U − e^{iθ}V‖₂²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseAlignment {
    pub dist_sq: f64,
    /// Minimizing phase in `(−π, π]`.
    pub theta: f64,
}

impl PhaseAlignment {
    pub fn distance(&self) -> f64 {
        libm::sqrt(self.dist_sq)
    }
}

/// Phase-minimized squared distance between two unitaries.
///
/// Equals `2 − 2|⟨U,V⟩|`; the residual is evaluated entrywise at the
/// optimal phase so that near-coincident operators keep full precision.
pub fn phase_min_distance(u: &UnitaryHandle, v: &UnitaryHandle) -> Result<PhaseAlignment> {
    u.op.check_same_shape(&v.op)?;
    Ok(align_phase(&u.op, &v.op))
}

pub(crate) fn align_phase(u: &DenseOperator, v: &DenseOperator) -> PhaseAlignment {
    let ip = hs_inner_unchecked(u, v);
    let theta = if ip.norm() == 0.0 { 0.0 } else { -ip.arg() };
    let phase = Complex64::from_polar(1.0, theta);
    let s: f64 = u.data.iter().zip(&v.data).map(|(&a, &b)| (a - phase * b).norm_sqr()).sum();
    PhaseAlignment { dist_sq: s / u.dim as f64, theta }
}

/// Haar-distributed unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn haar_random_unitary(reg: Register, seed: u64) -> UnitaryHandle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_unitary_with(reg, &mut rng)
}

pub fn haar_random_unitary_with<R: Rng + ?Sized>(reg: Register, rng: &mut R) -> UnitaryHandle {
    let n = reg.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    // Modified Gram–Schmidt, two passes. R has a positive real diagonal so
    // no extra phase correction is needed for Haar measure.
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let qi = &head[i];
                let cj = &mut tail[0];
                let proj: Complex64 = qi.iter().zip(cj.iter()).map(|(q, c)| q.conj() * c).sum();
                for (c, q) in cj.iter_mut().zip(qi) {
                    *c -= proj * q;
                }
            }
        }
        let norm = libm::sqrt(cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>());
        for c in cols[j].iter_mut() {
            *c /= norm;
        }
    }
    let op = DenseOperator::from_fn(reg, |i, j| cols[j][i]);
    let defect = op.unitarity_defect();
    UnitaryHandle { op, defect }
}

/// Random Hermitian matrix with i.i.d. Gaussian entries, scaled to unit
/// normalized Frobenius norm.
pub fn random_hermitian<R: Rng + ?Sized>(reg: Register, rng: &mut R) -> DenseOperator {
    let n = reg.dim();
    let mut h = DenseOperator::zeros(reg);
    for i in 0..n {
        let re: f64 = StandardNormal.sample(rng);
        h[(i, i)] = Complex64::new(re, 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            h[(i, j)] = Complex64::new(re, im);
            h[(j, i)] = Complex64::new(re, -im);
        }
    }
    let norm = frob_norm(&h);
    h.scalar_mul(Complex64::new(1.0 / norm, 0.0))
}

/// `exp(i·t·H)` for Hermitian `H`, by scaling and squaring a Taylor series.
pub fn exp_i_hermitian(h: &DenseOperator, t: f64) -> Result<UnitaryHandle> {
    let herm_defect = h.max_abs_diff(&h.adjoint());
    if herm_defect > 1e-12 * (1.0 + frob_norm(h)) {
        return Err(Error::InvalidArgument("generator is not Hermitian".into()));
    }
    let reg = h.register();
    let scale_norm = libm::fabs(t) * frob_norm(h) * libm::sqrt(h.dim() as f64);
    let mut squarings = 0u32;
    let mut s = scale_norm;
    while s > 0.25 {
        s /= 2.0;
        squarings += 1;
    }
    let a = h.scalar_mul(Complex64::new(0.0, t / f64::from(1u32 << squarings)));
    let mut term = DenseOperator::identity(reg);
    let mut sum = DenseOperator::identity(reg);
    for k in 1..=24 {
        term = term.mul_unchecked(&a).scalar_mul(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term)?;
    }
    for _ in 0..squarings {
        sum = sum.mul_unchecked(&sum);
    }
    UnitaryHandle::new(sum)
}
