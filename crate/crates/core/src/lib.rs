//! Probabilistic Condorcet election modelling over discrete option sets.
//!
//! Actors with capabilities and utilities contest pairs of options;
//! coalition strengths yield victory probabilities, and a challenge-and-contest
//! Markov chain turns those into a forecast distribution over outcomes.

pub mod coalitions;
pub mod error;
pub mod generators;
pub mod markov;
pub mod model;
pub mod search;
pub mod strategy;
pub mod voting;

pub use error::{Error, Result};
