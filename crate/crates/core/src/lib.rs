//! Exact verification toolkit for CSP reductions and long-code tests
//! over Z3.
//!
//! The crate has three layers:
//!
//! * Combinatorial ground truth: ternary strings and function tables
//!   ([`ternary`]), weighted CSP instances with exhaustive optima
//!   ([`csp`]), and local gadget reductions with machine-checked quality
//!   ([`gadgets`]).
//! * Test distributions: the two-disequation, four-variable, and coupled
//!   rewrite outcome spaces with exact rational pass probabilities
//!   ([`coupling`]), the canonical dictator configurations
//!   ([`dictator`]), and the label cover pipeline producing CSPs over
//!   folded tables ([`longcode`]).
//! * Spectral analysis: the ternary Fourier transform ([`fourier`]), the
//!   identity checks tying enumerations to spectra ([`identities`]), and
//!   the soundness inequality chains ([`soundness`]).
//!
//! Probabilities and weights are arbitrary-precision rationals; floats
//! appear only for Fourier coefficients, with pinned tolerances on every
//! comparison.

pub mod coupling;
pub mod csp;
pub mod dictator;
pub mod error;
pub mod fourier;
pub mod gadgets;
pub mod identities;
pub mod longcode;
pub mod rational;
pub mod soundness;
pub mod ternary;

pub use error::{Error, Result};
pub use rational::Rational;
