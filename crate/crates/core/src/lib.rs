//! Downlink scheduling and precoding for extremely large aperture arrays whose
//! users sit in the radiating near field.
//!
//! The crate models spherical-wavefront channels with specular paths and a
//! locally scattered diffuse part, ages them between coherence blocks, and
//! compares a greedy scheduler driven by long-term equivalent gains with
//! semi-orthogonal user selection under zero-forcing precoding.

// `!(x > 0.0)` checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod correlation;
pub mod csi;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod precoding;
pub mod rng;
pub mod scenario;
pub mod scheduling;
pub mod validation;

pub use config::SimConfig;
pub use error::{Error, Result};
