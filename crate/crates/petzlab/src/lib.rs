//! Numerical checks for recovery channels, weighted Lp norms, and trace
//! inequalities on finite-dimensional matrix algebras.
//!
//! The crate instantiates, at desk scale (dense complex matrices of
//! dimension 2..8), the objects of modular theory in standard form - the
//! modular conjugation, relative modular operators, Connes cocycles,
//! Araki-Masuda weighted Lp norms and perturbed vectors - together with
//! the entropic quantities built from them (relative entropy, sandwiched
//! Renyi divergences, fidelity, measured relative entropy) and the Petz /
//! rotated-Petz / integrated recovery channels. On top of those sit
//! inequality checkers (data processing and its improvement through the
//! recovery channel, multi-operator trace inequalities, complex
//! interpolation bounds) and a randomized campaign harness with
//! reproducible seeding and CSV reports.
//!
//! Layout:
//!
//! - [`hermlin`] - Hermitian/complex matrix core: spectral calculus,
//!   matrix functions on the support, norms, Frechet derivative of exp.
//! - [`standard_form`] - vectors as matrices, modular objects, weighted
//!   Lp norms and their variational oracle, perturbed vectors.
//! - [`divergences`] - entropies and the measured-relative-entropy
//!   ascent with certificates.
//! - [`channels`] - Kraus channels, weight densities and quadrature,
//!   recovery maps, the contraction V and the vector family Gamma.
//! - [`inequalities`] - one check per inequality, emitting [`report::CheckReport`]s.
//! - [`harness`] - instance generators, suite registry, campaign runner.

pub mod channels;
pub mod divergences;
pub mod harness;
pub mod hermlin;
pub mod inequalities;
pub mod report;
pub mod standard_form;

pub(crate) mod gl;

#[cfg(test)]
pub(crate) mod testutil;

pub use hermlin::{CMat, DensityMatrix, HermitianMatrix, MatrixError, PsdMatrix, C64};
pub use report::CheckReport;
