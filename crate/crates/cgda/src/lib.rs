//! Goal-directed action imitation over simulated environments.
//!
//! Actions are encoded as the changes they produce on the environment: a
//! trajectory of intermediate goals in a scalar feature space, generalized
//! from demonstrations. Execution searches joint space with a steady-state
//! tournament evolutionary back-end, either offline (plan fully, then move)
//! or online (perceive, localize, evolve one step, move, repeat).

pub mod error;
pub mod evolution;
pub mod model;
pub mod recognition;
pub mod report;
pub mod scenario;
pub mod simenv;
pub mod strategies;

pub use error::{Error, Result};
