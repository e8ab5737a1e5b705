//! Numerical laboratory for initial alignment (INAL) of neural networks with
//! Boolean targets: Fourier degree weights, Gaussian smoothings and Hermite
//! coefficients of activations, exact and Monte-Carlo INAL estimators,
//! cross-predictability of orbit classes, and a noisy-GD trained fully
//! connected network.

pub mod activation;
pub mod alignment;
pub mod boolfn;
pub mod crosspred;
pub mod error;
pub mod expcli;
pub mod nnet;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
