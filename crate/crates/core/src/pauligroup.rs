//! The Heisenberg group over `F_d^{2n}` and its Weyl (Pauli) representation.
//!
//! `W_a = τ^{−Σ|u_i v_i|} Z^u X^v` for `a = (u, v)`. Every Weyl operator is a
//! monomial matrix, which [`WeylMonomial`] exploits for conjugation and
//! Fourier coefficients without dense multiplication.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::galois::{symplectic_form, FieldScalar, PhaseExponent, Prime, Register, SympVector};
use crate::matcore::{tau_pow, DenseOperator, UnitaryHandle};

/// Entry ratios within this distance of a power of `τ` are snapped to it.
pub const PHASE_SNAP_TOL: f64 = 1e-9;

/// Sparse form of `W_a`: column `x` has the single entry `coeff[x]` in row
/// `target[x]`.
#[derive(Clone, Debug)]
pub struct WeylMonomial {
    reg: Register,
    target: Vec<usize>,
    coeff: Vec<Complex64>,
}

impl WeylMonomial {
    pub fn new(a: &SympVector) -> Self {
        let reg = a.register();
        let d = reg.d.get();
        let dim = reg.dim();
        let s = a.weight_uv() as i64;
        let mut target = Vec::with_capacity(dim);
        let mut coeff = Vec::with_capacity(dim);
        for x in 0..dim {
            let mut digits = reg.digits(x);
            for (y, &vi) in digits.iter_mut().zip(a.v()) {
                *y = (*y + vi) % d;
            }
            let dot: i64 =
                a.u().iter().zip(&digits).map(|(&ui, &yi)| i64::from(ui) * i64::from(yi)).sum::<i64>() % i64::from(d);
            target.push(reg.index_of(&digits));
            // ω = τ², so ω^{u·y} τ^{−s} = τ^{2u·y − s}
            coeff.push(tau_pow(reg.d, 2 * dot - s));
        }
        WeylMonomial { reg, target, coeff }
    }

    pub fn to_dense(&self) -> DenseOperator {
        let mut m = DenseOperator::zeros(self.reg);
        for (x, (&t, &c)) in self.target.iter().zip(&self.coeff).enumerate() {
            m[(t, x)] = c;
        }
        m
    }

    /// `W U W*`.
    pub fn conjugate(&self, u: &DenseOperator) -> DenseOperator {
        let dim = self.reg.dim();
        let mut out = DenseOperator::zeros(self.reg);
        for i in 0..dim {
            let ci = self.coeff[i];
            let ti = self.target[i];
            for j in 0..dim {
                out[(ti, self.target[j])] = ci * u[(i, j)] * self.coeff[j].conj();
            }
        }
        out
    }

    /// `⟨W, U⟩ = tr(W* U) / d^n`.
    pub fn inner(&self, u: &DenseOperator) -> Complex64 {
        let s: Complex64 =
            self.target.iter().zip(&self.coeff).enumerate().map(|(x, (&t, c))| c.conj() * u[(t, x)]).sum();
        s / self.reg.dim() as f64
    }
}

/// Dense matrix of the Weyl operator `W_a`.
pub fn weyl_matrix(a: &SympVector) -> DenseOperator {
    WeylMonomial::new(a).to_dense()
}

pub fn weyl_unitary(a: &SympVector) -> UnitaryHandle {
    UnitaryHandle::trusted(weyl_matrix(a), 0.0)
}

/// Closed form of the cocycle in `W_a W_b = τ^{β(a,b)} W_{a+b}`.
///
/// Moving `X^v` past `Z^{u'}` costs `ω^{−v·u'} = τ^{−2 v·u'}`, and the
/// normalizations contribute `s(a+b) − s(a) − s(b)` with `s(u,v) = Σ|u_i v_i|`.
pub fn beta(a: &SympVector, b: &SympVector) -> Result<PhaseExponent> {
    a.check_compatible(b)?;
    Ok(beta_unchecked(a, b))
}

pub(crate) fn beta_unchecked(a: &SympVector, b: &SympVector) -> PhaseExponent {
    let d = a.prime();
    let dm = i64::from(d.get());
    let sum = a.add_unchecked(b);
    let cross: i64 = a.v().iter().zip(b.u()).map(|(&v, &u)| i64::from(v) * i64::from(u)).sum::<i64>() % dm;
    let val = sum.weight_uv() as i64 - a.weight_uv() as i64 - b.weight_uv() as i64 - 2 * cross;
    PhaseExponent::new(val, d)
}

/// Reads `β(a,b)` off the matrices: the ratio of a dominant entry of
/// `W_a W_b` to the same entry of `W_{a+b}`, snapped to a power of `τ`.
/// Independent of [`beta`]; used as its oracle.
pub fn beta_from_matrices(a: &SympVector, b: &SympVector) -> Result<PhaseExponent> {
    a.check_compatible(b)?;
    let prod = weyl_matrix(a).matmul(&weyl_matrix(b))?;
    let target = weyl_matrix(&a.add_unchecked(b));
    let (idx, _) =
        target
            .as_slice()
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let ratio = prod.as_slice()[idx] / target.as_slice()[idx];
    snap_to_tau_power(a.prime(), ratio)
}

/// Finds `t` with `τ^t` closest to `z`; errors if no root is within
/// [`PHASE_SNAP_TOL`].
pub fn snap_to_tau_power(d: Prime, z: Complex64) -> Result<PhaseExponent> {
    let order = i64::from(d.phase_order());
    let (t, dev) = (0..order).map(|t| (t, (z - tau_pow(d, t)).norm())).fold((0, f64::INFINITY), |best, cur| {
        if cur.1 < best.1 {
            cur
        } else {
            best
        }
    });
    if dev > PHASE_SNAP_TOL {
        return Err(Error::PhaseExtraction { deviation: dev });
    }
    Ok(PhaseExponent::new(t, d))
}

/// Evaluator for `β`, optionally backed by a precomputed table.
#[derive(Clone, Debug)]
pub struct BetaTable {
    reg: Register,
    table: Option<Vec<u8>>,
}

impl BetaTable {
    const MAX_CACHED: usize = 1 << 20;

    pub fn new(reg: Register) -> Self {
        BetaTable { reg, table: None }
    }

    /// Precomputes every value when `d^{4n}` is small enough.
    pub fn cached(reg: Register) -> Self {
        let l = reg.num_labels();
        if l.saturating_mul(l) > Self::MAX_CACHED {
            return Self::new(reg);
        }
        let labels: Vec<SympVector> = reg.labels().collect();
        let mut table = Vec::with_capacity(l * l);
        for a in &labels {
            for b in &labels {
                table.push(beta_unchecked(a, b).value() as u8);
            }
        }
        BetaTable { reg, table: Some(table) }
    }

    pub fn register(&self) -> Register {
        self.reg
    }

    pub fn is_cached(&self) -> bool {
        self.table.is_some()
    }

    pub fn eval(&self, a: &SympVector, b: &SympVector) -> Result<PhaseExponent> {
        if a.register() != self.reg {
            return Err(Error::DimensionMismatch { left: self.reg.n, right: a.n() });
        }
        a.check_compatible(b)?;
        Ok(match &self.table {
            Some(t) => {
                let l = self.reg.num_labels();
                PhaseExponent::new(i64::from(t[a.index() * l + b.index()]), self.reg.d)
            }
            None => beta_unchecked(a, b),
        })
    }
}

/// Heisenberg-group element `(t, a) ∈ Z_D × F_d^{2n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliElement {
    pub t: PhaseExponent,
    pub a: SympVector,
}

impl PauliElement {
    pub fn new(t: i64, a: SympVector) -> Self {
        PauliElement { t: PhaseExponent::new(t, a.prime()), a }
    }

    pub fn identity(reg: Register) -> Self {
        PauliElement { t: PhaseExponent::zero(reg.d), a: SympVector::zero(reg) }
    }

    pub fn is_identity(&self) -> bool {
        self.t.value() == 0 && self.a.is_zero()
    }
}

/// `(t,a)•(t',a') = (t + t' + β(a,a'), a + a')`.
pub fn pauli_mul(g: &PauliElement, h: &PauliElement) -> Result<PauliElement> {
    g.a.check_compatible(&h.a)?;
    let t = g.t.checked_add(h.t)?.checked_add(beta_unchecked(&g.a, &h.a))?;
    Ok(PauliElement { t, a: g.a.add_unchecked(&h.a) })
}

/// `(t,a)^{-1} = (−t − β(a,−a), −a)`.
pub fn pauli_inv(g: &PauliElement) -> PauliElement {
    let neg_a = crate::galois::vec_neg(&g.a);
    let b = beta_unchecked(&g.a, &neg_a);
    let t = (-g.t).checked_add(-b).expect("same phase ring");
    PauliElement { t, a: neg_a }
}

/// `[a,b]`, the exponent in `W_a W_b = ω^{[a,b]} W_b W_a`.
pub fn commutator_phase(a: &SympVector, b: &SympVector) -> Result<FieldScalar> {
    symplectic_form(a, b)
}

/// The Weil representation `ρ(t,a) = τ^t W_a`.
pub fn weil_rep(g: &PauliElement) -> DenseOperator {
    weyl_matrix(&g.a).scalar_mul(tau_pow(g.a.prime(), i64::from(g.t.value())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::Prime;
    use crate::matcore::{frob_norm, hs_inner, omega_pow};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_label<R: Rng>(reg: Register, rng: &mut R) -> SympVector {
        reg.label(rng.random_range(0..reg.num_labels()))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weyl_examples() {
        let reg = Register::qubits(1);
        let zero = SympVector::zero(reg);
        assert_eq!(weyl_matrix(&zero), DenseOperator::identity(reg));

        let x = weyl_matrix(&SympVector::new(2, &[0], &[1]).unwrap());
        let expected = DenseOperator::from_rows(reg, alloc::vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        assert!(x.max_abs_diff(&expected) < 1e-15);

        // a = (1,1): τ^{-1} Z X evaluated directly from the definition.
        let z = DenseOperator::diagonal(reg, &[c(1., 0.), c(-1., 0.)]).unwrap();
        let zx = z.matmul(&expected).unwrap();
        let tau = crate::matcore::tau(Prime::new(2).unwrap());
        let direct = zx.scalar_mul(tau.inv());
        let y = weyl_matrix(&SympVector::new(2, &[1], &[1]).unwrap());
        assert!(y.max_abs_diff(&direct) < 1e-15);
        // which is the usual Pauli Y
        let pauli_y = DenseOperator::from_rows(reg, alloc::vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        assert!(y.max_abs_diff(&pauli_y) < 1e-15);
    }

    #[test]
    fn beta_matches_matrix_oracle_exhaustively() {
        for (n, d) in [(1, 2), (1, 3), (1, 5), (2, 2)] {
            let reg = Register::new(n, d).unwrap();
            for a in reg.labels() {
                for b in reg.labels() {
                    assert_eq!(beta(&a, &b).unwrap(), beta_from_matrices(&a, &b).unwrap(), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn beta_zero_left() {
        let reg = Register::new(1, 3).unwrap();
        let zero = SympVector::zero(reg);
        for b in reg.labels() {
            assert_eq!(beta(&zero, &b).unwrap().value(), 0);
        }
    }

    #[test]
    fn beta_table_agrees_with_closed_form() {
        let reg = Register::new(1, 3).unwrap();
        let table = BetaTable::cached(reg);
        assert!(table.is_cached());
        for a in reg.labels() {
            for b in reg.labels() {
                assert_eq!(table.eval(&a, &b).unwrap(), beta(&a, &b).unwrap());
            }
        }
        assert!(!BetaTable::cached(Register::new(3, 5).unwrap()).is_cached());
    }

    #[test]
    fn group_law_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, d) in [(1, 2), (2, 3), (2, 2)] {
            let reg = Register::new(n, d).unwrap();
            let id = PauliElement::identity(reg);
            assert_eq!(pauli_inv(&id), id);
            for _ in 0..100 {
                let g = PauliElement::new(rng.random_range(0..8), random_label(reg, &mut rng));
                let h = PauliElement::new(rng.random_range(0..8), random_label(reg, &mut rng));
                assert_eq!(pauli_mul(&g, &id).unwrap(), g);
                assert!(pauli_mul(&g, &pauli_inv(&g)).unwrap().is_identity());
                assert!(pauli_mul(&pauli_inv(&g), &g).unwrap().is_identity());
                let lhs = weil_rep(&pauli_mul(&g, &h).unwrap());
                let rhs = weil_rep(&g).matmul(&weil_rep(&h)).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
        let z = PauliElement::new(0, SympVector::new(2, &[1], &[0]).unwrap());
        assert!(pauli_mul(&z, &pauli_inv(&z)).unwrap().is_identity());
    }

    #[test]
    fn weil_rep_examples() {
        let reg = Register::qubits(1);
        let p = Prime::new(2).unwrap();
        assert_eq!(weil_rep(&PauliElement::identity(reg)), DenseOperator::identity(reg));
        let g = PauliElement::new(1, SympVector::zero(reg));
        let expected = DenseOperator::identity(reg).scalar_mul(tau_pow(p, 1));
        assert!(weil_rep(&g).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn weil_rep_is_injective_for_small_groups() {
        for d in [2u32, 3] {
            let reg = Register::new(1, d).unwrap();
            let mut mats = alloc::vec::Vec::new();
            for t in 0..i64::from(reg.d.phase_order()) {
                for a in reg.labels() {
                    mats.push(weil_rep(&PauliElement::new(t, a)));
                }
            }
            for i in 0..mats.len() {
                for j in 0..i {
                    assert!(mats[i].max_abs_diff(&mats[j]) > 1e-6);
                }
            }
        }
    }

    #[test]
    fn commutation_relation() {
        let a = SympVector::new(2, &[1], &[0]).unwrap();
        let b = SympVector::new(2, &[0], &[1]).unwrap();
        assert_eq!(commutator_phase(&a, &b).unwrap().lift(), 1);
        assert_eq!(commutator_phase(&a, &a).unwrap().lift(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, d) in [(1, 3), (2, 2), (2, 3)] {
            let reg = Register::new(n, d).unwrap();
            for _ in 0..50 {
                let a = random_label(reg, &mut rng);
                let b = random_label(reg, &mut rng);
                let wa = weyl_matrix(&a);
                let wb = weyl_matrix(&b);
                let w = omega_pow(reg.d, i64::from(commutator_phase(&a, &b).unwrap().lift()));
                let lhs = wa.matmul(&wb).unwrap();
                let rhs = wb.matmul(&wa).unwrap().scalar_mul(w);
                assert!(frob_norm(&lhs.sub(&rhs).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_character_unitarity_orthonormality() {
        for (n, d) in [(1, 2), (1, 3), (2, 2)] {
            let reg = Register::new(n, d).unwrap();
            let mats: alloc::vec::Vec<_> = reg.labels().map(|a| weyl_matrix(&a)).collect();
            for (i, w) in mats.iter().enumerate() {
                let tr = w.trace();
                let expected = if i == 0 { reg.dim() as f64 } else { 0.0 };
                assert_abs_diff_eq!((tr - c(expected, 0.0)).norm(), 0.0, epsilon = 1e-12);
                assert!(w.unitarity_defect() < 1e-12);
                for (j, v) in mats.iter().enumerate() {
                    let ip = hs_inner(w, v).unwrap();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((ip - c(expected, 0.0)).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn monomial_kernels_match_dense() {
        let reg = Register::new(2, 3).unwrap();
        let u = crate::matcore::haar_random_unitary(reg, 7);
        for a in reg.labels().step_by(7) {
            let m = WeylMonomial::new(&a);
            let w = m.to_dense();
            let dense = w.matmul(&u).unwrap().matmul(&w.adjoint()).unwrap();
            assert!(m.conjugate(&u).max_abs_diff(&dense) < 1e-13);
            assert_abs_diff_eq!((m.inner(&u) - hs_inner(&w, &u).unwrap()).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn snap_rejects_off_root_ratios() {
        let p = Prime::new(3).unwrap();
        assert!(snap_to_tau_power(p, c(0.9, 0.1)).is_err());
        assert_eq!(snap_to_tau_power(p, tau_pow(p, 2)).unwrap().value(), 2);
    }
}
