use alloc::string::String;
use alloc::vec::Vec;

use crate::Beats;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid pitch: {0}")]
    InvalidPitch(String),

    #[error("invalid time signature {numerator}/{denominator}")]
    InvalidTimeSignature { numerator: u32, denominator: u32 },

    #[error("measure {measure} holds {found} beats, expected {expected}")]
    MeasureDuration {
        measure: usize,
        expected: Beats,
        found: Beats,
    },

    #[error("note events overlap or are out of order in measure {measure}")]
    EventOrder { measure: usize },

    #[error("non-positive duration in measure {measure}")]
    NonPositiveDuration { measure: usize },

    #[error("tie started in measure {measure} is never ended")]
    DanglingTie { measure: usize },

    #[error("signal is empty")]
    EmptySignal,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("{}", format_beat_counts(.0))]
    BeatCount(Vec<BeatCountMismatch>),

    #[error("beat annotations out of order at row {row}: {reason}")]
    BeatOrder { row: usize, reason: String },

    #[error("not enough voiced data: need {needed_s:.3} s, found {found_s:.3} s")]
    NotEnoughData { needed_s: f64, found_s: f64 },

    #[error("affinity undefined for a histogram with zero total mass")]
    UndefinedAffinity,

    #[error("no {what} available for daemok `{daemok}`")]
    MissingDependency { daemok: String, what: &'static str },

    #[error("invalid note token `{0}`")]
    InvalidToken(String),
}

/// One measure whose annotated beat count differs from the jangdan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeatCountMismatch {
    pub measure: usize,
    pub found: usize,
    pub expected: usize,
}

fn format_beat_counts(list: &[BeatCountMismatch]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, m) in list.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(
            out,
            "measure {} has {} beats, expected {}",
            m.measure, m.found, m.expected
        );
    }
    out
}
