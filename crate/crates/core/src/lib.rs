//! Qudit Weyl algebra, Pauli uniformity norms, Clifford-hierarchy membership,
//! and a measurement-level simulation of the uniformity-norm tester.
//!
//! The crate is `no_std` (with `alloc`). The `std` feature is implied by
//! `parallel`, which spreads norm evaluations and tester repetitions over a
//! rayon pool; results do not depend on the number of threads.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod error;
pub mod galois;
pub mod gates;
pub mod hierarchy;
pub mod matcore;
mod par;
pub mod pauligroup;
pub mod testersim;
pub mod uniformity;

pub use error::{Error, Result};
pub use galois::{FieldScalar, PhaseExponent, Prime, Register, SympVector};
pub use matcore::{DenseOperator, UnitaryHandle};
