//! Vibrato and onset-glide measurements on cents contours.

use alloc::vec::Vec;

use super::contour::CentsSeries;
use crate::error::{Error, Result};
use crate::math;
use crate::score::NoteEvent;
use crate::Beats;

/// Minimum voiced material for a vibrato estimate.
pub const MIN_VIBRATO_VOICED_S: f64 = 0.3;
/// First-pass detrending window.
pub const DETREND_WINDOW_S: f64 = 0.25;
pub const DEFAULT_GLIDE_WINDOW_S: f64 = 0.3;

/// Detrended values smaller than this (in cents) count as zero when
/// looking for sign changes.
const ZERO_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibratoMetrics {
    pub rate_hz: f64,
    pub depth_cents: f64,
    pub voiced_fraction: f64,
}

/// Vibrato rate and depth by zero crossings of the detrended contour.
///
/// Each voiced run is detrended by subtracting a centered moving average.
/// A first pass uses a 0.25 s window. Its crossing rate sets the window of a
/// second pass to one vibrato period, which removes the oscillation from the
/// average completely and leaves it unattenuated in the residual; the second
/// pass is used whenever it finds crossings. Rate is the number of
/// half-cycles between the first and last crossing of each run over twice
/// their time span. Depth is the mean over full cycles of half the
/// peak-to-peak residual.
pub fn vibrato_metrics(series: &CentsSeries) -> Result<VibratoMetrics> {
    let hop = series.hop_s;
    let voiced = series.voiced_count();
    let voiced_s = voiced as f64 * hop;
    if !(hop > 0.0) || voiced_s + 1e-9 < MIN_VIBRATO_VOICED_S {
        return Err(Error::NotEnoughData {
            needed_s: MIN_VIBRATO_VOICED_S,
            found_s: if hop > 0.0 { voiced_s } else { 0.0 },
        });
    }
    let voiced_fraction = voiced as f64 / series.len() as f64;
    let runs = voiced_runs(series);

    let first = analyse_runs(&runs, DETREND_WINDOW_S / hop);
    let Some(rate1) = first.rate() else {
        return Ok(VibratoMetrics {
            rate_hz: 0.0,
            depth_cents: 0.0,
            voiced_fraction,
        });
    };
    let second = analyse_runs(&runs, 1.0 / (rate1 * hop));
    let chosen = if second.rate().is_some() { second } else { first };

    Ok(VibratoMetrics {
        rate_hz: chosen.rate().unwrap_or(0.0),
        depth_cents: chosen.depth(),
        voiced_fraction,
    })
}

struct Run {
    times: Vec<f64>,
    values: Vec<f64>,
}

fn voiced_runs(series: &CentsSeries) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut cur = Run {
        times: Vec::new(),
        values: Vec::new(),
    };
    for (t, c) in series.times.iter().zip(&series.cents) {
        match c {
            Some(v) => {
                cur.times.push(*t);
                cur.values.push(*v);
            }
            None if !cur.values.is_empty() => runs.push(core::mem::replace(
                &mut cur,
                Run {
                    times: Vec::new(),
                    values: Vec::new(),
                },
            )),
            None => {}
        }
    }
    if !cur.values.is_empty() {
        runs.push(cur);
    }
    runs
}

#[derive(Default)]
struct PassResult {
    half_cycles: usize,
    crossing_span_s: f64,
    amplitudes: Vec<f64>,
}

impl PassResult {
    fn rate(&self) -> Option<f64> {
        (self.half_cycles > 0 && self.crossing_span_s > 0.0)
            .then(|| self.half_cycles as f64 / (2.0 * self.crossing_span_s))
    }

    fn depth(&self) -> f64 {
        if self.amplitudes.is_empty() {
            0.0
        } else {
            self.amplitudes.iter().sum::<f64>() / self.amplitudes.len() as f64
        }
    }
}

/// `window` is the moving-average length in frames and may be fractional.
fn analyse_runs(runs: &[Run], window: f64) -> PassResult {
    let mut result = PassResult::default();
    let window = window.max(1.0);
    for run in runs {
        let Some((times, resid)) = detrend(run, window) else {
            continue;
        };
        let crossings = zero_crossings(&times, &resid);
        if crossings.len() >= 2 {
            result.half_cycles += crossings.len() - 1;
            result.crossing_span_s += crossings[crossings.len() - 1].0 - crossings[0].0;
        }
        cycle_amplitudes(&times, &resid, &crossings, &mut result.amplitudes);
    }
    result
}

/// Residual after subtracting a centered box average `window` frames long.
/// Only points with the whole window inside the run are returned.
fn detrend(run: &Run, window: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let half = (window - 1.0) / 2.0;
    let inner = math::floor(half) as usize;
    let edge_w = half - inner as f64;
    let reach = if edge_w > 1e-12 { inner + 1 } else { inner };
    let n = run.values.len();
    if n < 2 * reach + 1 {
        return None;
    }
    let x = &run.values;
    let norm = 2.0 * half + 1.0;
    let mut times = Vec::with_capacity(n - 2 * reach);
    let mut resid = Vec::with_capacity(n - 2 * reach);
    for i in reach..n - reach {
        let mut acc: f64 = x[i - inner..=i + inner].iter().sum();
        if reach > inner {
            acc += edge_w * (x[i - reach] + x[i + reach]);
        }
        times.push(run.times[i]);
        resid.push(x[i] - acc / norm);
    }
    Some((times, resid))
}

/// Sign changes as `(time, rising)`, with linearly interpolated times.
fn zero_crossings(times: &[f64], resid: &[f64]) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in resid.iter().enumerate() {
        if math::abs(v) <= ZERO_BAND {
            continue;
        }
        if let Some(p) = last {
            let a = resid[p];
            if (a < 0.0) != (v < 0.0) {
                let t = times[p] + (times[i] - times[p]) * a / (a - v);
                out.push((t, v > 0.0));
            }
        }
        last = Some(i);
    }
    out
}

/// Half peak-to-peak between consecutive rising crossings. Runs too short
/// for a full cycle fall back to the peak of each half-cycle.
fn cycle_amplitudes(
    times: &[f64],
    resid: &[f64],
    crossings: &[(f64, bool)],
    out: &mut Vec<f64>,
) {
    let rising: Vec<f64> = crossings.iter().filter(|c| c.1).map(|c| c.0).collect();
    if rising.len() < 2 {
        for pair in crossings.windows(2) {
            let lo = times.partition_point(|&t| t < pair[0].0);
            let hi = times.partition_point(|&t| t <= pair[1].0);
            if let Some(i) = (lo..hi).max_by(|&a, &b| resid[a].abs().total_cmp(&resid[b].abs())) {
                out.push(refine_extremum(resid, i).abs());
            }
        }
        return;
    }
    for pair in rising.windows(2) {
        let lo = times.partition_point(|&t| t < pair[0]);
        let hi = times.partition_point(|&t| t <= pair[1]);
        if hi <= lo + 1 {
            continue;
        }
        let (mut imax, mut imin) = (lo, lo);
        for i in lo..hi {
            if resid[i] > resid[imax] {
                imax = i;
            }
            if resid[i] < resid[imin] {
                imin = i;
            }
        }
        let peak = refine_extremum(resid, imax);
        let trough = refine_extremum(resid, imin);
        out.push(0.5 * (peak - trough));
    }
}

/// Parabolic vertex through an extremum and its neighbours.
fn refine_extremum(values: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= values.len() {
        return values[i];
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return b;
    }
    let shift = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    b - 0.25 * (a - c) * shift
}

/// Signed pitch change over the first `window_s` after the first voiced
/// frame: the median of all pairwise slopes in that window times `window_s`.
pub fn onset_glide(series: &CentsSeries, window_s: f64) -> Result<f64> {
    if !(window_s > 0.0) {
        return Err(Error::Config("glide window must be positive".into()));
    }
    let not_enough = |found_s: f64| Error::NotEnoughData {
        needed_s: window_s,
        found_s,
    };
    let Some(first) = series.cents.iter().position(Option::is_some) else {
        return Err(not_enough(0.0));
    };
    let t0 = series.times[first];
    let limit = t0 + window_s + 1e-9;
    let points: Vec<(f64, f64)> = series.times[first..]
        .iter()
        .zip(&series.cents[first..])
        .take_while(|(t, _)| **t <= limit)
        .filter_map(|(t, c)| c.map(|c| (*t, c)))
        .collect();
    let covered = points.last().map_or(0.0, |p| p.0 - t0);
    // The frame grid may stop up to one hop short of the exact window end.
    if points.len() < 2 || covered < window_s - series.hop_s - 1e-9 {
        return Err(not_enough(covered));
    }
    let mut slopes = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            slopes.push((points[j].1 - points[i].1) / (points[j].0 - points[i].0));
        }
    }
    Ok(math::median_in_place(&mut slopes) * window_s)
}

/// Indices of notes lasting at least `min_duration_beats` that follow a
/// rest or open the piece.
pub fn find_post_rest_long_notes(events: &[NoteEvent], min_duration_beats: Beats) -> Vec<usize> {
    events
        .iter()
        .enumerate()
        .filter(|(i, e)| {
            !e.is_rest()
                && e.duration_beats >= min_duration_beats
                && (*i == 0 || events[i - 1].is_rest())
        })
        .map(|(i, _)| i)
        .collect()
}
