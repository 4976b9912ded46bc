//! Factorization of finitely supported sequences into short convolutional
//! masks, and construction of deep ReLU networks whose layers realize those
//! masks.
//!
//! The pipeline has three stages:
//!
//! 1. [`signal`]: finite sequences, 1-D convolution, and the Toeplitz-type
//!    matrices a convolutional layer applies. Depth-`J` chains of filters of
//!    length `s + 1` satisfy `T^(J) ... T^(1) = T^W` where `W` is the
//!    convolution of all masks.
//! 2. [`symbolic`]: the inverse direction. A sequence supported on
//!    `{0, ..., M}` is factorized through the roots of its symbol polynomial
//!    into masks supported on `{0, ..., s}`, using at most
//!    `ceil(M / (s - 1))` factors.
//! 3. [`network`] and [`approx`]: a ramp-ridge expansion is flattened into a
//!    single long mask, factorized, and realized exactly by a deep CNN with
//!    structured biases; approximation error is then measured against named
//!    target functions as depth grows.
//!
//! Everything is generic over the scalar type through [`scalar::Real`]; the
//! aliases below fix `f64`, which the CLI and file formats use throughout.

pub mod approx;
pub mod error;
pub mod io;
pub mod network;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod symbolic;

pub use error::{Error, Result};

/// `f64` sequence, the default for file I/O.
pub type Sequence = signal::FiniteSequence<f64>;
/// `f64` convolutional matrix.
pub type Matrix = signal::ConvMatrix<f64>;
/// `f64` polynomial.
pub type Polynomial = symbolic::RealPolynomial<f64>;
/// `f64` root multiset.
pub type Roots = symbolic::RootMultiset<f64>;
/// `f64` factorization result.
pub type Factorization = symbolic::FactorizationResult<f64>;
/// `f64` ridge expansion.
pub type Ridge = network::RidgeExpansion<f64>;
/// `f64` deep network.
pub type Network = network::DeepCnn<f64>;
/// `f64` target function.
pub type Target = approx::TargetFunction<f64>;
/// `f64` error report row.
pub type Report = approx::ErrorReport<f64>;
