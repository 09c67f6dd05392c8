//! Oracle-driven value iteration for zero-sum mean-payoff games.
//!
//! The generic procedures in [`value_iteration`] and [`dominion`] only see a
//! [`shapley::ShapleyOracle`]. Two backends implement it: turn-based
//! stochastic mean-payoff games ([`stochastic`]) and entropy games
//! ([`entropy`]).

pub mod cli;
pub mod counterexample;
pub mod dominion;
pub mod entropy;
pub mod linalg;
pub mod logexp;
pub mod numeric;
pub mod perron;
pub mod shapley;
pub mod stochastic;
pub mod value_iteration;
