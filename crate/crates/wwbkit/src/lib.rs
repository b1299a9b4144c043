//! Weiss-Weinstein lower bounds on the mean-square error of
//! direction-of-arrival estimation for arbitrary sensor arrays.
//!
//! The crate covers both classical Gaussian observation models — the
//! unconditional (stochastic source) model, where the direction parameters
//! enter the observation covariance, and the conditional (known waveform)
//! model, where they enter the mean — and provides:
//!
//! * a general engine that assembles the bound's moment matrix G from
//!   likelihood-ratio moments for any array, prior and source count
//!   ([`gmatrix`], [`eta`], [`detlemma`]);
//! * fast single-source closed forms for arbitrary planar and linear arrays
//!   ([`closedform`]);
//! * a grid optimizer for the test points and exponents ([`optimizer`]);
//! * a Monte-Carlo benchmark pitting the bound against the empirical global
//!   MSE of a maximum a posteriori estimator ([`bench`]);
//! * brute-force oracles (dense determinants, importance-sampled moments,
//!   fine quadrature) that validate every closed form ([`oracle`],
//!   [`validate`]).
//!
//! See the `examples/` directory for runnable entry points, or the `wwbkit`
//! binary for the batch CLI (`bound`, `mse`, `validate` subcommands).

pub mod bench;
pub mod cli;
pub mod closedform;
pub mod detlemma;
pub mod error;
pub mod eta;
pub mod geometry;
pub mod gmatrix;
pub mod logdomain;
pub mod optimizer;
pub mod oracle;
pub mod prior;
pub mod scenario;
pub mod signal;
pub mod validate;

pub use error::{Result, WwbError};
pub use geometry::{steering_vector, ArrayGeometry};
pub use gmatrix::GMatrix;
pub use optimizer::{OptimizerConfig, WwbResult};
pub use prior::{Prior, PriorSpec};
pub use scenario::{load_scenario, parse_scenario, Scenario};
pub use signal::SignalModel;
