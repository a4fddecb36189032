//! File formats, reports, figures and pipeline orchestration around
//! [`sori_core`].
//!
//! - [`musicxml`]: single-part MusicXML reader.
//! - [`formats`]: F0 CSV, beat CSV and WAV input.
//! - [`report`]: JSON/CSV report schemas.
//! - [`svg`]: histogram and contour figures.
//! - [`pipeline`]: TOML manifest and the end-to-end run.

pub mod error;
pub mod formats;
pub mod musicxml;
pub mod pipeline;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
pub use sori_core as core;
