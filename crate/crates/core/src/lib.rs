//! Analysis toolkit for deciding what Lie algebra a set of qubit
//! interaction Hamiltonians generates, whether that algebra is universal,
//! and which encoded subspaces recover universality when it is not.
//!
//! The main entry points, roughly in dependency order:
//!
//! - [`pauli`]: exact symbolic algebra of Pauli strings and Hermitian
//!   operators, with dense realization.
//! - [`lie`]: Lie closure of a generator set, the growth of its dimension
//!   with system size, and the polynomial-growth non-universality verdict.
//! - [`decomp`]: commutants, isotypic decomposition of the state space, su
//!   tests on multiplicity spaces, and encoded-code extraction.
//! - [`models`]: the interaction families and codes under study, plus
//!   conjoining of encoded blocks and the coupling-witness search.
//! - [`angular`]: Clebsch-Gordan coefficients and coupled total-spin bases.
//! - [`sil`]: the leakage-repair unitary on two three-qubit blocks.
//! - [`synth`]: pulse exponentials, gate metrics, product formulas, and
//!   derivative-free pulse-sequence search.
//!
//! Everything is a pure function over immutable values; randomized routines
//! take explicit seeds and are reproducible.

pub mod angular;
pub mod decomp;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod models;
pub mod pauli;
pub mod sil;
pub mod synth;

pub use error::{Error, Result};
