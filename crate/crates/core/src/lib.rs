//! Simulator and analytic-validation toolkit for two-opinion majority
//! dynamics on dense random graphs.
//!
//! A graph on `2n + delta` vertices is drawn with independent edge
//! probability `p`; the `n + delta` red vertices and `n` blue vertices then
//! update synchronously, each adopting the strict majority opinion among its
//! neighbors (ties keep the current opinion).  The crate provides:
//!
//! * a bit-packed simulator for the process ([`graph`], [`dynamics`]),
//! * exact binomial-comparison oracles in log space ([`binom`]),
//! * closed-form first-order predictions for the first two rounds and the
//!   final winner ([`analytic`]),
//! * degree-sequence models and transference checks ([`models`], [`ks`]),
//! * exact and asymptotic degree-sequence enumeration ([`enumeration`]),
//! * a reproducible experiment harness and CLI ([`harness`], [`config`],
//!   [`report`]).

pub mod analytic;
pub mod binom;
pub mod cells;
pub mod config;
pub mod dynamics;
pub mod enumeration;
pub mod error;
pub mod graph;
pub mod harness;
pub mod ks;
pub mod models;
pub mod normal;
pub mod numeric;
pub mod params;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use params::ModelParams;
