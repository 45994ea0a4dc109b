//! Randomized Fourier estimation (RFE) of an eigenphase under exponential
//! signal decay, with analytical sample-count bounds and a fault-tolerant
//! resource comparison against textbook quantum phase estimation.
//!
//! The crate is organised along the modelling chain:
//!
//! - [`noise`]: architecture parameters → logical error rate → depolarizing
//!   trajectory statistics → per-call decay rate `λ`.
//! - [`rfe`]: Hadamard-test sampling, Fourier accumulation and argmax decoding.
//! - [`bounds`]: the `Q`, `R`, `S`, `W` bound functions and the sufficient
//!   shot count `M`.
//! - [`ft`]: QPE resource lower bounds and the QPE/RFE cost sweep.
//! - [`experiments`]: figure campaigns and Monte Carlo validation of `M`.
//! - [`config`]: versioned JSON run configuration.

pub mod bounds;
pub mod config;
pub mod experiments;
pub mod ft;
pub mod noise;
pub mod output;
pub mod rfe;
pub mod rng;
pub mod stats;
