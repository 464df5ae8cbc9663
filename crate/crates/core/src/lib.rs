//! Simulation laboratory for the simple genetic algorithm with roulette-wheel
//! selection.
//!
//! The crate implements the genetic operators exactly, computes the critical
//! parameter `pi = (f*/f_bar)(1 - p_C)(1 - p_M)^ell`, and provides the
//! stochastic machinery used to study the two regimes `pi < 1` (the best
//! chromosome is lost, mean fitness stagnates) and `pi > 1` (the best
//! chromosome persists, mean fitness grows by a factor `sqrt(pi)`):
//!
//! - [`ga`]: chromosomes, populations, selection, crossover, mutation;
//! - [`landscape`]: fitness functions, including the sharp peak;
//! - [`probability`]: stochastic order on the integers, tail bounds, Cramér
//!   transforms;
//! - [`branching`]: Galton–Watson processes and their extinction;
//! - [`lowerchain`]: the monotone Markov chain bounding the count of
//!   best-fit chromosomes from below;
//! - [`experiments`]: replicated regime protocols and dominance checks;
//! - [`tuner`]: adaptive control keeping `pi` slightly above 1.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod branching;
pub mod error;
pub mod experiments;
pub mod ga;
pub mod landscape;
pub mod lowerchain;
pub mod probability;
pub mod rng;
pub mod stats;
pub mod tuner;

pub use bits::BitString;
pub use error::{Error, Result};
pub use ga::{Chromosome, GaConfig, Operators, Population, PopulationStats};
pub use landscape::LandscapeSpec;
