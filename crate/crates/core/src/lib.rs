//! Disordered stochastic Kuramoto model.
//!
//! Rotators with quenched natural frequencies drawn from a finite symmetric
//! law, coupled through the mean field and driven by independent Brownian
//! noise. The crate computes the synchronized stationary profiles, the
//! linearized evolution around the invariant circle of profiles, the
//! disorder-induced drift of the center of synchronization, and simulates
//! both the particle system and the limiting Fokker-Planck equation.

pub mod asymptotics;
pub mod disorder;
pub mod error;
pub mod fp_pde;
pub mod harness;
pub mod linalg;
pub mod linops;
pub mod quadrature;
pub mod rng;
pub mod sde_sim;
pub mod spaces;
pub mod stationary;
pub mod stats;

pub use error::{Error, Result};
