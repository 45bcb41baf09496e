//! Simulation and numerics for adaptive quadrature detection in multicarrier
//! continuous-variable QKD.
//!
//! Gaussian subcarriers travel through randomized sub-channels
//! ([`channel`]); the receiver estimates gains from pilots ([`estimation`])
//! or from spread pilot frames ([`spreading`]), and detects single symbols,
//! codewords ([`detection`]) or per-user blocks ([`multiuser`]). The
//! [`harness`] runs Monte Carlo sweeps of each and compares them with the
//! closed-form error probabilities.
//!
//! Complex amplitudes hold the position quadrature in the real part and the
//! momentum quadrature in the imaginary part. Variances are complex
//! variances `E|z|^2` unless a name says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detection;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod mathcore;
pub mod multiuser;
pub mod spreading;

pub use error::{Error, Result};
pub use mathcore::{CircularGaussian, ComplexAmplitude, RngStream};
