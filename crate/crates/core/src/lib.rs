//! Exact computations for measure-preserving dynamics.
//!
//! Circle and torus rotations, the Bernoulli shift, the baker's map and
//! rank-one cutting-and-stacking constructions, together with correlation
//! sequences, weak-limit fits, spectral estimates, progression entropy,
//! recurrence searches and Poisson suspension sampling. Set measures are exact
//! rationals; where a quantity cannot be resolved exactly (rank-one tops) it is
//! returned as rational bounds.

pub mod dynamics;
pub mod error;
pub mod koopman;
pub mod pentropy;
pub mod poisson;
pub mod rank_one;
pub mod rational;
pub mod recurrence;
pub mod spectral;
pub mod sets;
pub mod systems;

pub use error::{Error, Result};
pub use dynamics::{Model, ModelSet};
pub use rational::{Bounds, Q};
