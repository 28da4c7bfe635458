//! Black-box privacy auditing for small variational quantum classifiers.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: dense complex linear algebra, pure states, density matrices
//!   and the distance measures used to define neighbouring quantum inputs.
//! * [`circuit`]: a parameterised gate IR with statevector, density-matrix and
//!   Heisenberg-picture (Pauli basis) simulators, plus parameter-shift gradients.
//! * [`noise`]: depolarizing channels and the finite-shot measurement model.
//! * [`encoding`]: angle encoding, offset sampling with clipping and the
//!   offset/trace-distance bounds that make canary pairs adjacent.
//! * [`qml`]: the hybrid classifier (encode, ansatz, measure, read out) and its
//!   training loop.
//! * [`audit`]: the lifted canary audit, confidence-bound estimators, the
//!   single-canary baseline and closed-form privacy bounds.
//! * [`data`]: CSV ingestion, the bundled Iris subset and synthetic datasets.
//! * [`cli`]: configuration documents, reports and the batch commands behind
//!   the `qdp-audit` binary.

pub mod audit;
pub mod circuit;
#[cfg(feature = "cli")]
pub mod cli;
pub mod data;
pub mod encoding;
mod error;
pub mod noise;
pub mod qcore;
pub mod qml;
pub mod rng;

pub use error::{Error, Result};
