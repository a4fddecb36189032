//! YIN fundamental-frequency estimation.
//!
//! For every frame the squared difference function
//! `d(tau) = sum_j (x[j] - x[j + tau])^2` is computed over a fixed
//! integration window, normalized into the cumulative-mean form
//! `d'(tau) = d(tau) * tau / sum_{k=1..tau} d(k)`, and the first lag whose
//! `d'` dips below the threshold is taken. The dip is followed down to its
//! local minimum and refined by a parabola through the neighbouring values
//! of `d`. Confidence is `1 - d'(tau)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::f0::{F0Frame, F0Track};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YinConfig {
    pub sample_rate: u32,
    pub frame_s: f64,
    pub hop_s: f64,
    pub search_min_hz: f64,
    pub search_max_hz: f64,
    pub threshold: f64,
}

impl YinConfig {
    pub const DEFAULT_FRAME_S: f64 = 0.046;
    pub const DEFAULT_HOP_S: f64 = 0.01;
    pub const DEFAULT_THRESHOLD: f64 = 0.15;
    pub const DEFAULT_SEARCH_MIN_HZ: f64 = 100.0;
    pub const DEFAULT_SEARCH_MAX_HZ: f64 = 1600.0;

    pub fn new(sample_rate: u32) -> YinConfig {
        YinConfig {
            sample_rate,
            frame_s: Self::DEFAULT_FRAME_S,
            hop_s: Self::DEFAULT_HOP_S,
            search_min_hz: Self::DEFAULT_SEARCH_MIN_HZ,
            search_max_hz: Self::DEFAULT_SEARCH_MAX_HZ,
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }

    /// Sample counts derived from the configuration, after validation.
    fn layout(&self) -> Result<Layout> {
        if self.sample_rate < 8000 {
            return Err(Error::Config(format!(
                "sample rate {} below 8000 Hz",
                self.sample_rate
            )));
        }
        if !(self.hop_s > 0.0 && self.frame_s > 0.0) {
            return Err(Error::Config("frame and hop must be positive".into()));
        }
        if !(self.search_min_hz > 0.0 && self.search_min_hz < self.search_max_hz) {
            return Err(Error::Config(format!(
                "bad search range {}..{} Hz",
                self.search_min_hz, self.search_max_hz
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        let sr = f64::from(self.sample_rate);
        let frame_len = math::round(self.frame_s * sr) as usize;
        let max_lag = math::ceil(sr / self.search_min_hz) as usize;
        let min_lag = (math::floor(sr / self.search_max_hz) as usize).max(2);
        if min_lag >= max_lag {
            return Err(Error::Config(
                "search range collapses to fewer than two lags".into(),
            ));
        }
        // The integration window must itself span at least the longest period.
        if frame_len < 2 * max_lag {
            return Err(Error::Config(format!(
                "frame of {:.4} s is shorter than two periods of {} Hz",
                self.frame_s, self.search_min_hz
            )));
        }
        Ok(Layout {
            frame_len,
            window: frame_len - max_lag,
            min_lag,
            max_lag,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    frame_len: usize,
    window: usize,
    min_lag: usize,
    max_lag: usize,
}

/// Runs YIN over a mono signal. Frame `i` starts at sample
/// `round(i * hop_s * sample_rate)` and is stamped `i * hop_s`. The final
/// partial frame is zero-padded; a signal shorter than one frame yields a
/// single zero-padded frame.
pub fn estimate_f0_yin(samples: &[f64], config: &YinConfig) -> Result<F0Track> {
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let layout = config.layout()?;
    let sr = f64::from(config.sample_rate);
    let hop_samples = config.hop_s * sr;

    let n_frames = if samples.len() <= layout.frame_len {
        1
    } else {
        1 + math::floor((samples.len() - layout.frame_len) as f64 / hop_samples) as usize
    };

    let mut scratch = Scratch::new(&layout);
    let mut frames = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let start = math::round(i as f64 * hop_samples) as usize;
        let time_s = i as f64 * config.hop_s;
        scratch.load(samples, start);
        let estimate = scratch.analyse(&layout, config.threshold);
        frames.push(match estimate {
            Some((lag, confidence)) => F0Frame::voiced(time_s, sr / lag, confidence),
            None => F0Frame::unvoiced(time_s, 0.0),
        });
    }
    F0Track::new(frames, config.hop_s)
}

struct Scratch {
    frame: Vec<f64>,
    diff: Vec<f64>,
    cmndf: Vec<f64>,
}

impl Scratch {
    fn new(layout: &Layout) -> Scratch {
        Scratch {
            frame: vec![0.0; layout.frame_len],
            diff: vec![0.0; layout.max_lag + 2],
            cmndf: vec![1.0; layout.max_lag + 2],
        }
    }

    fn load(&mut self, samples: &[f64], start: usize) {
        let avail = samples.len().saturating_sub(start).min(self.frame.len());
        self.frame[..avail].copy_from_slice(&samples[start..start + avail]);
        self.frame[avail..].iter_mut().for_each(|x| *x = 0.0);
    }

    /// Returns the refined lag (in samples) and the confidence, or `None`
    /// when no lag dips below the threshold.
    fn analyse(&mut self, layout: &Layout, threshold: f64) -> Option<(f64, f64)> {
        let (frame, diff, cmndf) = (&self.frame, &mut self.diff, &mut self.cmndf);
        let w = layout.window;
        // One lag past max_lag so the parabola has a right neighbour.
        let top = (layout.max_lag + 1).min(frame.len() - w);
        for tau in 1..=top {
            let (head, tail) = (&frame[..w], &frame[tau..tau + w]);
            diff[tau] = head
                .iter()
                .zip(tail)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }

        let mut running = 0.0;
        for tau in 1..=top {
            running += diff[tau];
            cmndf[tau] = if running > 0.0 {
                diff[tau] * tau as f64 / running
            } else {
                1.0
            };
        }

        let mut tau = layout.min_lag;
        while tau <= layout.max_lag && cmndf[tau] >= threshold {
            tau += 1;
        }
        if tau > layout.max_lag {
            return None;
        }
        while tau < top && cmndf[tau + 1] < cmndf[tau] {
            tau += 1;
        }
        let confidence = (1.0 - cmndf[tau]).clamp(0.0, 1.0);

        let mut refined = tau as f64;
        if tau > 1 && tau < top {
            let (a, b, c) = (diff[tau - 1], diff[tau], diff[tau + 1]);
            let denom = a - 2.0 * b + c;
            if denom > 0.0 {
                refined += (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
            }
        }
        Some((refined, confidence))
    }
}
