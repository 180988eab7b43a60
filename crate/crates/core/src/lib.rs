//! Star-set reachability for LSTM and CNN-LSTM sequence classifiers.
//!
//! The crate is organised bottom-up:
//!
//! - [`star`]: generalized star sets and their closed operations (affine map,
//!   Minkowski and shared-variable sums, McCormick Hadamard product, LP range
//!   queries).
//! - [`activation`]: ReLU (exact split and triangle), sigmoid and tanh
//!   (interval and secant) relaxations.
//! - [`layer`]: per-layer reachability for fully-connected, Conv1D, ReLU and
//!   LSTM layers.
//! - [`network`]: the JSON model format, concrete forward evaluation and
//!   whole-network reachability.
//! - [`perturbation`]: SFSI / SFAI / MFSI / MFAI input sets.
//! - [`verifier`]: local robustness verdicts, falsification and campaigns
//!   with PR / sumRT reports.
//! - [`cli`]: the `seqstar verify` and `seqstar inspect` front end.

pub mod activation;
pub mod cli;
pub mod error;
pub mod layer;
mod lp;
pub mod network;
pub mod perturbation;
pub mod star;
pub mod verifier;

pub use error::{Error, Result};
pub use star::{IntervalBox, Predicate, Star, StarUnion};
