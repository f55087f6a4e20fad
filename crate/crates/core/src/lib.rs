//! Deterministic open-field maze simulation: grid and place cell models, a
//! bumper/colored-wall arena with a random-walking agent, an associative
//! avoidance circuit, and rate-map analysis.

pub mod analysis;
pub mod arena;
pub mod config;
pub mod controller;
pub mod error;
pub mod export;
pub mod geometry;
pub mod learning;
pub mod spatialcells;

pub use error::{Error, Result};
pub use geometry::{Position2, Vec2};
