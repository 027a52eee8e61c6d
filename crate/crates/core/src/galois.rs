//! Arithmetic over the prime field `F_d`, the phase ring `Z_D`, and the
//! symplectic space `F_d^{2n}` that labels Weyl operators.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Trial-division primality check.
pub fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let d = u64::from(d);
    let mut p = 2u64;
    while p * p <= d {
        if d % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// A validated prime local dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(d: u32) -> Result<Self> {
        if is_prime(d) {
            Ok(Prime(d))
        } else {
            Err(Error::NotPrime(d))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Order of the phase ring: `2d` when `d = 2`, otherwise `d`.
    #[inline]
    pub fn phase_order(self) -> u32 {
        if self.0 == 2 {
            4
        } else {
            self.0
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `n` qudits of prime dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Register {
    pub n: usize,
    pub d: Prime,
}

impl Register {
    pub fn new(n: usize, d: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("register needs at least one qudit".into()));
        }
        let d = Prime::new(d)?;
        let reg = Register { n, d };
        // keep d^{2n} within usize so labels can be indexed
        let mut acc: u128 = 1;
        for _ in 0..2 * n {
            acc *= u128::from(d.get());
            if acc > (1u128 << 40) {
                return Err(Error::OutOfScope(format!("register of {n} qudits of dimension {d} is too large")));
            }
        }
        Ok(reg)
    }

    pub fn qubits(n: usize) -> Self {
        Register { n, d: Prime(2) }
    }

    /// Hilbert-space dimension `d^n`.
    #[inline]
    pub fn dim(&self) -> usize {
        (self.d.get() as usize).pow(self.n as u32)
    }

    /// Number of Weyl labels, `d^{2n}`.
    #[inline]
    pub fn num_labels(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn label(&self, index: usize) -> SympVector {
        SympVector::from_index(*self, index)
    }

    /// Every label of `F_d^{2n}` in lexicographic order.
    pub fn labels(&self) -> impl Iterator<Item = SympVector> + '_ {
        (0..self.num_labels()).map(move |i| self.label(i))
    }

    /// Decompose a computational-basis index into qudit digits (qudit 0 is
    /// the most significant).
    pub fn digits(&self, mut index: usize) -> Vec<u32> {
        let d = self.d.get() as usize;
        let mut out = alloc::vec![0u32; self.n];
        for slot in out.iter_mut().rev() {
            *slot = (index % d) as u32;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[u32]) -> usize {
        let d = self.d.get() as usize;
        digits.iter().fold(0usize, |acc, &x| acc * d + x as usize)
    }
}

/// An element of `F_d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldScalar {
    value: u32,
    modulus: u32,
}

impl FieldScalar {
    pub fn new(value: i64, d: u32) -> Result<Self> {
        let p = Prime::new(d)?;
        Ok(Self::in_field(value, p))
    }

    pub fn in_field(value: i64, d: Prime) -> Self {
        let m = i64::from(d.get());
        FieldScalar { value: value.rem_euclid(m) as u32, modulus: d.get() }
    }

    pub fn zero(d: Prime) -> Self {
        FieldScalar { value: 0, modulus: d.get() }
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.modulus
    }

    /// Canonical representative in `{0, …, d-1}`.
    #[inline]
    pub fn lift(self) -> u32 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: Self) {
        assert_eq!(self.modulus, other.modulus, "field scalars over different primes");
    }
}

/// Free-function form of [`FieldScalar::lift`].
#[inline]
pub fn lift(x: FieldScalar) -> u32 {
    x.lift()
}

impl Add for FieldScalar {
    type Output = FieldScalar;
    fn add(self, rhs: Self) -> Self {
        self.check(rhs);
        FieldScalar { value: (self.value + rhs.value) % self.modulus, modulus: self.modulus }
    }
}

impl Sub for FieldScalar {
    type Output = FieldScalar;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for FieldScalar {
    type Output = FieldScalar;
    fn neg(self) -> Self {
        FieldScalar { value: (self.modulus - self.value) % self.modulus, modulus: self.modulus }
    }
}

impl Mul for FieldScalar {
    type Output = FieldScalar;
    fn mul(self, rhs: Self) -> Self {
        self.check(rhs);
        let v = (u64::from(self.value) * u64::from(rhs.value)) % u64::from(self.modulus);
        FieldScalar { value: v as u32, modulus: self.modulus }
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A residue in `Z_D`, used as an exponent of `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseExponent {
    value: u32,
    order: u32,
}

impl PhaseExponent {
    pub fn new(value: i64, d: Prime) -> Self {
        let order = d.phase_order();
        PhaseExponent { value: value.rem_euclid(i64::from(order)) as u32, order }
    }

    pub fn zero(d: Prime) -> Self {
        Self::new(0, d)
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn order(self) -> u32 {
        self.order
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::ModulusMismatch { left: self.order, right: other.order });
        }
        Ok(PhaseExponent { value: (self.value + other.value) % self.order, order: self.order })
    }
}

impl Neg for PhaseExponent {
    type Output = PhaseExponent;

    fn neg(self) -> Self {
        PhaseExponent { value: (self.order - self.value) % self.order, order: self.order }
    }
}

/// `p + q` in `Z_D`.
pub fn phase_add(p: PhaseExponent, q: PhaseExponent) -> Result<PhaseExponent> {
    p.checked_add(q)
}

/// A vector `a = (u, v)` of `F_d^{2n}`; `u` is the Z-type half and `v` the
/// X-type half.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SympVector {
    d: Prime,
    u: Vec<u32>,
    v: Vec<u32>,
}

impl SympVector {
    /// Builds a vector from integer components, reducing them mod `d`.
    pub fn new(d: u32, u: &[i64], v: &[i64]) -> Result<Self> {
        let d = Prime::new(d)?;
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { left: u.len(), right: v.len() });
        }
        if u.is_empty() {
            return Err(Error::InvalidArgument("symplectic vector needs n >= 1".into()));
        }
        let m = i64::from(d.get());
        let red = |xs: &[i64]| xs.iter().map(|x| x.rem_euclid(m) as u32).collect::<Vec<_>>();
        Ok(SympVector { d, u: red(u), v: red(v) })
    }

    pub fn zero(reg: Register) -> Self {
        SympVector { d: reg.d, u: alloc::vec![0; reg.n], v: alloc::vec![0; reg.n] }
    }

    /// Label with lexicographic index `index` over `(u_1, …, u_n, v_1, …, v_n)`,
    /// `u_1` most significant.
    pub fn from_index(reg: Register, index: usize) -> Self {
        let d = reg.d.get() as usize;
        let n = reg.n;
        let mut u = alloc::vec![0u32; n];
        let mut v = alloc::vec![0u32; n];
        let mut rest = index;
        for slot in v.iter_mut().rev() {
            *slot = (rest % d) as u32;
            rest /= d;
        }
        for slot in u.iter_mut().rev() {
            *slot = (rest % d) as u32;
            rest /= d;
        }
        SympVector { d: reg.d, u, v }
    }

    pub fn index(&self) -> usize {
        let d = self.d.get() as usize;
        self.u.iter().chain(self.v.iter()).fold(0usize, |acc, &x| acc * d + x as usize)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.u.len()
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.d
    }

    pub fn register(&self) -> Register {
        Register { n: self.n(), d: self.d }
    }

    #[inline]
    pub fn u(&self) -> &[u32] {
        &self.u
    }

    #[inline]
    pub fn v(&self) -> &[u32] {
        &self.v
    }

    pub fn u_scalar(&self, i: usize) -> FieldScalar {
        FieldScalar { value: self.u[i], modulus: self.d.get() }
    }

    pub fn v_scalar(&self, i: usize) -> FieldScalar {
        FieldScalar { value: self.v[i], modulus: self.d.get() }
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|&x| x == 0)
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::ModulusMismatch { left: self.d.get(), right: other.d.get() });
        }
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { left: self.n(), right: other.n() });
        }
        Ok(())
    }

    /// `Σ_i |u_i v_i|`, the exponent in the Weyl normalization.
    pub fn weight_uv(&self) -> u64 {
        let d = u64::from(self.d.get());
        self.u.iter().zip(&self.v).map(|(&a, &b)| (u64::from(a) * u64::from(b)) % d).sum()
    }

    // Unchecked componentwise helpers; callers have verified compatibility.
    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let d = self.d.get();
        let zip = |a: &[u32], b: &[u32]| a.iter().zip(b).map(|(&x, &y)| (x + y) % d).collect();
        SympVector { d: self.d, u: zip(&self.u, &other.u), v: zip(&self.v, &other.v) }
    }

    pub(crate) fn form_unchecked(&self, other: &Self) -> u32 {
        let d = u64::from(self.d.get());
        let dot =
            |a: &[u32], b: &[u32]| a.iter().zip(b).fold(0u64, |acc, (&x, &y)| (acc + u64::from(x) * u64::from(y)) % d);
        let lhs = dot(&self.u, &other.v);
        let rhs = dot(&other.u, &self.v);
        ((lhs + d - rhs) % d) as u32
    }
}

impl fmt::Display for SympVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.u.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("|")?;
        for (i, x) in self.v.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// The standard symplectic form `[(u,v),(u',v')] = u·v' − u'·v`.
pub fn symplectic_form(a: &SympVector, b: &SympVector) -> Result<FieldScalar> {
    a.check_compatible(b)?;
    Ok(FieldScalar { value: a.form_unchecked(b), modulus: a.d.get() })
}

pub fn vec_add(a: &SympVector, b: &SympVector) -> Result<SympVector> {
    a.check_compatible(b)?;
    Ok(a.add_unchecked(b))
}

pub fn vec_neg(a: &SympVector) -> SympVector {
    let d = a.d.get();
    let neg = |xs: &[u32]| xs.iter().map(|&x| (d - x) % d).collect();
    SympVector { d: a.d, u: neg(&a.u), v: neg(&a.v) }
}

pub fn vec_sub(a: &SympVector, b: &SympVector) -> Result<SympVector> {
    vec_add(a, &vec_neg(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(d: u32, u: &[i64], v: &[i64]) -> SympVector {
        SympVector::new(d, u, v).unwrap()
    }

    #[test]
    fn lift_examples() {
        let p3 = Prime::new(3).unwrap();
        assert_eq!(lift(FieldScalar::in_field(0, p3)), 0);
        assert_eq!(lift(FieldScalar::in_field(2, p3)), 2);
        let p2 = Prime::new(2).unwrap();
        let one = FieldScalar::in_field(1, p2);
        assert_eq!(lift(one + one), 0);
    }

    #[test]
    fn primes_are_validated() {
        assert!(Prime::new(4).is_err());
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(0).is_err());
        assert_eq!(Prime::new(7).unwrap().phase_order(), 7);
        assert_eq!(Prime::new(2).unwrap().phase_order(), 4);
        assert_eq!(FieldScalar::new(5, 9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn symplectic_form_examples() {
        let a = sv(2, &[1], &[0]);
        let b = sv(2, &[0], &[1]);
        assert_eq!(symplectic_form(&a, &b).unwrap().lift(), 1);
        assert_eq!(symplectic_form(&a, &a).unwrap().lift(), 0);

        // d=3: u·v' − u'·v = (1,2)·(1,1) − (2,0)·(0,1) = 3 − 0 = 0 mod 3
        let a = sv(3, &[1, 2], &[0, 1]);
        let b = sv(3, &[2, 0], &[1, 1]);
        assert_eq!(symplectic_form(&a, &b).unwrap().lift(), 0);
        // and the reverse order
        assert_eq!(symplectic_form(&b, &a).unwrap().lift(), 0);

        let a = sv(3, &[1, 0], &[0, 2]);
        let b = sv(3, &[0, 1], &[1, 0]);
        // (1,0)·(1,0) − (0,1)·(0,2) = 1 − 2 = −1 = 2
        assert_eq!(symplectic_form(&a, &b).unwrap().lift(), 2);
    }

    #[test]
    fn vector_and_phase_plumbing() {
        let a = sv(3, &[1, 2], &[0, 1]);
        assert!(vec_add(&a, &vec_neg(&a)).unwrap().is_zero());
        assert_eq!(vec_add(&sv(2, &[1], &[1]), &sv(2, &[1], &[0])).unwrap(), sv(2, &[0], &[1]));
        let p2 = Prime::new(2).unwrap();
        let s = phase_add(PhaseExponent::new(3, p2), PhaseExponent::new(2, p2)).unwrap();
        assert_eq!(s.value(), 1);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = sv(2, &[1], &[0]);
        let b = sv(3, &[1], &[0]);
        let c = sv(2, &[1, 0], &[0, 1]);
        assert!(symplectic_form(&a, &b).is_err());
        assert!(symplectic_form(&a, &c).is_err());
        assert!(vec_add(&a, &c).is_err());
        let p2 = Prime::new(2).unwrap();
        let p3 = Prime::new(3).unwrap();
        assert!(phase_add(PhaseExponent::zero(p2), PhaseExponent::zero(p3)).is_err());
    }

    #[test]
    fn index_round_trip() {
        let reg = Register::new(2, 3).unwrap();
        for i in 0..reg.num_labels() {
            assert_eq!(reg.label(i).index(), i);
        }
        assert_eq!(reg.digits(5), alloc::vec![1, 2]);
        assert_eq!(reg.index_of(&[1, 2]), 5);
    }

    #[test]
    fn non_degenerate_exhaustive() {
        for d in [2u32, 3, 5] {
            for n in 1..=2 {
                let reg = Register::new(n, d).unwrap();
                for a in reg.labels().filter(|a| !a.is_zero()) {
                    assert!(reg.labels().any(|b| a.form_unchecked(&b) != 0), "{a} is radical");
                }
            }
        }
    }
}
