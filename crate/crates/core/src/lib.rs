//! Finite-field constructions of mutually unbiased bases and the operator
//! systems built on them: Galois and ring Heisenberg–Weyl groups, generalized
//! Bell states and protocol simulations, the Mean King problem, discrete Weyl
//! and Wigner phase space, complex Hadamard matrices, numerical searches for
//! unbiased vectors, and a Gauss-sum prime-distinguishing function.

pub mod bellproto;
pub mod cnum;
pub mod error;
pub mod gf;
pub mod hadamard;
pub mod meanking;
pub mod mub;
pub mod numth;
pub mod phasespace;
pub mod search;
pub mod weylops;

pub use error::{Error, Result};
