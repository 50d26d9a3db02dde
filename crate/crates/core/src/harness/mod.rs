//! Configuration, manifests, figure reproduction and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod oracles;
