//! Classical, quantum and generalized hidden Markov models of discrete
//! stochastic processes.
//!
//! Every model type in this crate can be reduced to a linear presentation
//! ([`Ghmm`]) and from there to a unique, minimal *standard* GHMM. Two models
//! generate the same process exactly when their standard GHMMs coincide,
//! which gives a decision procedure for identifiability across model classes
//! and a lower bound `ceil(sqrt(l_min))` on the memory dimension of any
//! quantum generator of the process.
//!
//! The pipeline:
//!
//! 1. [`qhmm`]: quantum generators in Kraus form (or via a unitary dilation).
//! 2. [`vectorize`]: generalized Bloch and Liouville presentations of a QHMM
//!    as a GHMM.
//! 3. [`wordlist`]: sufficient and minimal history/future wordlists.
//! 4. [`canonical`]: the HF matrix, the standard GHMM and the dimension bound.
//! 5. [`equivalence`]: three independent identifiability checks.

pub mod alphabet;
pub mod canonical;
pub mod equivalence;
mod error;
pub mod ghmm;
pub mod io;
pub mod linalg;
pub mod model;
pub mod qhmm;
mod tol;
pub mod vectorize;
pub mod wordlist;
pub mod zoo;

pub use alphabet::{Alphabet, Word};
pub use canonical::{standard_ghmm, DimensionBound, StandardGhmm};
pub use equivalence::{EquivalenceReport, Method, Verdict};
pub use error::{Error, Result};
pub use ghmm::{Ghmm, HmmFlags, SteadyState};
pub use model::Model;
pub use qhmm::{DensityMatrix, Qhmm, UnitarySpec};
pub use tol::Tolerances;
pub use wordlist::MinimalWordlists;

pub use nalgebra;
pub use num_complex::Complex64 as C64;

/// Matrix entry type shared by real (HMM, Bloch) and complex (Liouville)
/// linear presentations.
pub trait Scalar: nalgebra::ComplexField<RealField = f64> + Copy {}

impl<T> Scalar for T where T: nalgebra::ComplexField<RealField = f64> + Copy {}
