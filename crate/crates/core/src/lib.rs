//! Kolmogorov-type p-Laplace equations on the group `(X, Y, t)`: geometry,
//! operators, asymptotic mean-value checks, a dynamic programming solver
//! for the tug-of-war game and a Monte Carlo engine for the game itself.

pub mod cli;
pub mod config;
pub mod domain;
pub mod dpp;
pub mod error;
pub mod exponent;
pub mod game;
pub mod geometry;
pub mod mean_value;
pub mod operators;
pub mod profile;
pub mod quadrature;
pub mod stats;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use geometry::GroupPoint;
