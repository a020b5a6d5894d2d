//! Automatic construction of streamliner/model portfolios for the Balanced
//! Academic Curriculum Problem.
//!
//! The toolkit generates candidate streamliner constraints from the type
//! structure of the decision variable, searches the lattice of streamliner
//! combinations with a multi-objective Monte Carlo tree search, races a
//! ranked portfolio of model encodings at every lattice node, and selects a
//! streamlined model per unseen instance with a feature-based selector.
//!
//! Modules follow the pipeline:
//!
//! - [`bacp`]: the fixed abstract problem class, instances and validation.
//! - [`streamliner`]: candidate rule generation and exact semantics.
//! - [`model`]: the ranked table of encoding recipes and compilation to
//!   kernel form.
//! - [`kernel`]: the deterministic finite-domain solver used as the
//!   evaluation backend.
//! - [`race`]: multi-level model racing with capping and statistical
//!   elimination.
//! - [`mcts`]: the lattice search, Pareto archive and multi-round driver.
//! - [`instgen`]: instance generation, features and clustering.
//! - [`selector`]: per-instance selection and the test protocol.
//! - [`pipeline`]: end-to-end commands and on-disk formats.

pub mod bacp;
pub mod error;
pub mod instgen;
pub mod kernel;
pub mod mcts;
pub mod model;
pub mod pipeline;
pub mod race;
pub mod seeds;
pub mod selector;
pub mod streamliner;

pub use error::{Error, Result};
