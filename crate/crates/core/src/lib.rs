//! Two-metaworld gravitational self-interaction laboratory.
//!
//! Every body has a hidden red partner; gravity acts only between the green
//! and red copies. The crate offers closed-form scales ([`analytic`]), the
//! uniform-sphere pair potential ([`sphere_potential`]), split-step grid
//! dynamics ([`grid`]), partial traces ([`reduced_state`]), an s-wave radial
//! solver ([`radial`]) and scenario drivers ([`experiments`]).

pub mod analytic;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod output;
pub mod radial;
pub mod reduced_state;
pub mod sphere_potential;
pub mod units;

pub use error::{Error, Result};
