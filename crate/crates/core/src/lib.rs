//! Desk-scale laboratory for randomness and nondeterminism in gate-model
//! quantum computation: a QRAM-style program interpreter with full
//! measurement-branch enumeration, Haar random sources and the k-copy
//! symmetric block structure, ε-net coverage measurement on Hilbert spheres,
//! state-preparation complexity search, and existential decision procedures
//! over quantum witnesses.

pub mod complexity;
pub mod error;
pub mod hilbert;
pub mod qnd;
pub mod qram;
pub mod random_source;
pub mod rng;
pub mod state_net;
pub mod stats;

pub use error::{Error, Result};
