//! Sum-rate capacity machinery for K-user interference channels.
//!
//! The crate covers two channel models:
//!
//! * [`gaussian::GaussianIC`]: real-valued Gaussian channels `Y = A X + Z` with
//!   unit-variance noise and per-user power budgets. Every quantity here has a
//!   closed form in terms of `psi(x) = 1/2 log2(1 + x)`.
//! * [`discrete::DiscreteIC`]: finite-alphabet memoryless channels given by a
//!   dense transition tensor. Sum-rate expressions are evaluated exactly on
//!   product input distributions and maximized by multi-start coordinate
//!   ascent.
//!
//! [`info`] holds the finite-alphabet entropy and mutual-information engine,
//! [`expr`] the sum-rate expression descriptors shared by both models, and
//! [`oracle`] the brute-force and analytic cross-checks used by the test and
//! verification suites.
//!
//! All logarithms are base 2, so every rate is reported in bits per channel
//! use.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete;
pub mod error;
pub mod exec;
pub mod expr;
pub mod gaussian;
pub mod info;
pub mod oracle;

pub use error::{Error, Result};
pub use exec::Exec;
