//! Analysis core for aligning monophonic vocal recordings with their
//! staff-notation transcriptions.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function over in-memory data: parsing of files, audio decoding, rendering
//! and the command line live in the `sori` companion crate.
//!
//! Modules, roughly in pipeline order:
//!
//! - [`pitch`] and [`score`]: spelled pitches, rational note events, tie merging.
//! - [`f0`] and [`yin`]: fundamental-frequency tracks, confidence/range filtering,
//!   and a YIN estimator.
//! - [`beats`]: annotated beat grids and the beat position <-> audio time mapping.
//! - [`histogram`]: F0 and note-duration pitch histograms, mode templates.
//! - [`patterns`]: note tokens, n-gram mining, per-occurrence contours,
//!   vibrato and onset-glide metrics.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod beats;
pub mod error;
pub mod f0;
pub mod histogram;
mod math;
pub mod patterns;
pub mod pitch;
pub mod score;
pub mod yin;

pub use error::{Error, Result};

/// Exact musical time in quarter-note beats.
pub type Beats = num_rational::Ratio<i64>;
