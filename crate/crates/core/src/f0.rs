//! Fundamental-frequency tracks and the confidence/range filter.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// One analysis frame. `f0_hz` is `None` for unvoiced frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Frame {
    pub time_s: f64,
    pub f0_hz: Option<f64>,
    pub confidence: f64,
}

impl F0Frame {
    pub fn voiced(time_s: f64, f0_hz: f64, confidence: f64) -> F0Frame {
        F0Frame {
            time_s,
            f0_hz: Some(f0_hz),
            confidence,
        }
    }

    pub fn unvoiced(time_s: f64, confidence: f64) -> F0Frame {
        F0Frame {
            time_s,
            f0_hz: None,
            confidence,
        }
    }

    pub fn is_voiced(&self) -> bool {
        self.f0_hz.is_some()
    }
}

/// Time-sorted frames at a constant hop.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct F0Track {
    frames: Vec<F0Frame>,
    hop_s: f64,
}

impl F0Track {
    /// Checks frame invariants: finite non-negative strictly increasing times,
    /// confidence in [0, 1], positive frequency when voiced. `hop_s` must be
    /// positive once the track holds two or more frames.
    pub fn new(frames: Vec<F0Frame>, hop_s: f64) -> Result<F0Track> {
        if frames.len() >= 2 && !(hop_s > 0.0 && hop_s.is_finite()) {
            return Err(Error::Config(format!("hop must be positive, got {hop_s}")));
        }
        let mut prev: Option<f64> = None;
        for (i, f) in frames.iter().enumerate() {
            if !(f.time_s >= 0.0 && f.time_s.is_finite()) {
                return Err(Error::Range(format!("frame {i}: bad time {}", f.time_s)));
            }
            if prev.is_some_and(|p| f.time_s <= p) {
                return Err(Error::Range(format!("frame {i}: time not increasing")));
            }
            prev = Some(f.time_s);
            if !(0.0..=1.0).contains(&f.confidence) {
                return Err(Error::Range(format!(
                    "frame {i}: confidence {} outside [0, 1]",
                    f.confidence
                )));
            }
            if let Some(hz) = f.f0_hz {
                if !(hz > 0.0 && hz.is_finite()) {
                    return Err(Error::Range(format!("frame {i}: frequency {hz} not positive")));
                }
            }
        }
        Ok(F0Track { frames, hop_s })
    }

    pub fn frames(&self) -> &[F0Frame] {
        &self.frames
    }

    pub fn hop_s(&self) -> f64 {
        self.hop_s
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn voiced_count(&self) -> usize {
        self.frames.iter().filter(|f| f.is_voiced()).count()
    }

    pub fn into_frames(self) -> Vec<F0Frame> {
        self.frames
    }
}

/// Thresholds for [`filter_track`]. Bounds are inclusive: a frame is kept
/// when `confidence >= min_confidence` and `min_hz <= f0 <= max_hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub min_confidence: f64,
    pub min_hz: f64,
    pub max_hz: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_confidence: 0.6,
            min_hz: 350.0,
            max_hz: 1000.0,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::Config(format!(
                "min_confidence {} outside [0, 1]",
                self.min_confidence
            )));
        }
        if !(self.min_hz > 0.0 && self.min_hz < self.max_hz) {
            return Err(Error::Config(format!(
                "need 0 < min_hz < max_hz, got {} and {}",
                self.min_hz, self.max_hz
            )));
        }
        Ok(())
    }

    pub fn accepts(&self, frame: &F0Frame) -> bool {
        match frame.f0_hz {
            Some(hz) => {
                frame.confidence >= self.min_confidence && hz >= self.min_hz && hz <= self.max_hz
            }
            None => false,
        }
    }
}

/// Turns rejected frames into unvoiced placeholders. Frame count, times and
/// confidences are untouched, so the result keeps the input's time base.
pub fn filter_track(track: &F0Track, config: &FilterConfig) -> F0Track {
    let frames = track
        .frames
        .iter()
        .map(|f| {
            if config.accepts(f) {
                *f
            } else {
                F0Frame::unvoiced(f.time_s, f.confidence)
            }
        })
        .collect();
    F0Track {
        frames,
        hop_s: track.hop_s,
    }
}

/// `1200 * log2(f0 / reference)`.
pub fn hz_to_cents(f0_hz: f64, reference_hz: f64) -> Result<f64> {
    if !(f0_hz > 0.0 && reference_hz > 0.0) {
        return Err(Error::Domain(format!(
            "cents need positive frequencies, got {f0_hz} and {reference_hz}"
        )));
    }
    Ok(1200.0 * math::log2(f0_hz / reference_hz))
}

/// Inverse of [`hz_to_cents`].
pub fn cents_to_hz(cents: f64, reference_hz: f64) -> f64 {
    reference_hz * math::exp2(cents / 1200.0)
}

/// Fractional MIDI number given the frequency of A4.
pub fn hz_to_midi(f0_hz: f64, a4_hz: f64) -> Result<f64> {
    Ok(69.0 + hz_to_cents(f0_hz, a4_hz)? / 100.0)
}
