//! Annotated beat grids.
//!
//! A grid holds one time per beat for a run of complete measures. Global beat
//! `g = measure * beats_per_measure + beat` maps to audio time by linear
//! interpolation between neighbouring annotations; nothing is extrapolated
//! past the first or last annotation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{BeatCountMismatch, Error, Result};
use crate::f0::{F0Frame, F0Track};
use crate::math;

/// One row of a beat annotation file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatAnnotation {
    pub measure_index: usize,
    pub beat_in_measure: usize,
    pub time_s: f64,
}

/// Rhythmic cycle the grid is validated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JangdanSpec {
    pub name: String,
    pub beats_per_measure: usize,
}

impl JangdanSpec {
    pub fn new(name: impl Into<String>, beats_per_measure: usize) -> Result<JangdanSpec> {
        if beats_per_measure == 0 {
            return Err(Error::Config("beats_per_measure must be at least 1".into()));
        }
        Ok(JangdanSpec {
            name: name.into(),
            beats_per_measure,
        })
    }

    pub fn joongmori() -> JangdanSpec {
        JangdanSpec {
            name: "joongmori".into(),
            beats_per_measure: 12,
        }
    }
}

impl Default for JangdanSpec {
    fn default() -> Self {
        Self::joongmori()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeatGrid {
    spec: JangdanSpec,
    annotations: Vec<BeatAnnotation>,
}

impl BeatGrid {
    /// Validates annotation rows given in file order.
    ///
    /// Checks, in this order: every measure present holds exactly
    /// `beats_per_measure` rows (all offending measures are reported
    /// together); measures run gaplessly from 0 and each beat index occurs
    /// once; times are finite, non-negative and strictly increasing in
    /// `(measure, beat)` order. Row numbers in errors are 1-based data rows.
    pub fn new(spec: JangdanSpec, rows: Vec<BeatAnnotation>) -> Result<BeatGrid> {
        let bpm = spec.beats_per_measure;
        if bpm == 0 {
            return Err(Error::Config("beats_per_measure must be at least 1".into()));
        }
        if rows.is_empty() {
            return Err(Error::Range("beat grid has no annotations".into()));
        }

        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for r in &rows {
            *counts.entry(r.measure_index).or_default() += 1;
        }
        let mismatches: Vec<BeatCountMismatch> = counts
            .iter()
            .filter(|(_, &n)| n != bpm)
            .map(|(&measure, &found)| BeatCountMismatch {
                measure,
                found,
                expected: bpm,
            })
            .collect();
        if !mismatches.is_empty() {
            return Err(Error::BeatCount(mismatches));
        }
        for (expected, &measure) in counts.keys().enumerate() {
            if measure != expected {
                return Err(Error::Range(format!(
                    "measures must start at 0 without gaps; measure {expected} is missing"
                )));
            }
        }

        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| (rows[i].measure_index, rows[i].beat_in_measure));
        for (slot, &i) in order.iter().enumerate() {
            let r = &rows[i];
            if r.beat_in_measure != slot % bpm {
                return Err(Error::BeatOrder {
                    row: i + 1,
                    reason: format!(
                        "measure {} has beat {} where beat {} was expected",
                        r.measure_index,
                        r.beat_in_measure,
                        slot % bpm
                    ),
                });
            }
            if !(r.time_s >= 0.0 && r.time_s.is_finite()) {
                return Err(Error::BeatOrder {
                    row: i + 1,
                    reason: format!("time {} is not a non-negative number", r.time_s),
                });
            }
            if slot > 0 {
                let prev = &rows[order[slot - 1]];
                if r.time_s <= prev.time_s {
                    return Err(Error::BeatOrder {
                        row: i + 1,
                        reason: format!(
                            "time {} does not increase past {} (measure {} beat {})",
                            r.time_s, prev.time_s, prev.measure_index, prev.beat_in_measure
                        ),
                    });
                }
            }
        }

        let annotations = order.into_iter().map(|i| rows[i]).collect();
        Ok(BeatGrid { spec, annotations })
    }

    pub fn spec(&self) -> &JangdanSpec {
        &self.spec
    }

    /// Annotations sorted by global beat index.
    pub fn annotations(&self) -> &[BeatAnnotation] {
        &self.annotations
    }

    pub fn measure_count(&self) -> usize {
        self.annotations.len() / self.spec.beats_per_measure
    }

    /// Largest valid global beat.
    pub fn last_beat(&self) -> f64 {
        (self.annotations.len() - 1) as f64
    }

    pub fn first_time(&self) -> f64 {
        self.annotations[0].time_s
    }

    pub fn last_time(&self) -> f64 {
        self.annotations[self.annotations.len() - 1].time_s
    }

    fn time_of(&self, index: usize) -> f64 {
        self.annotations[index].time_s
    }

    /// Audio time of a fractional global beat.
    pub fn time_at_beat(&self, global_beat: f64) -> Result<f64> {
        if !(global_beat >= 0.0 && global_beat <= self.last_beat()) {
            return Err(Error::Range(format!(
                "beat {global_beat} outside annotated range 0..={}",
                self.last_beat()
            )));
        }
        let k = math::floor(global_beat) as usize;
        let frac = global_beat - k as f64;
        if frac == 0.0 {
            return Ok(self.time_of(k));
        }
        let (t0, t1) = (self.time_of(k), self.time_of(k + 1));
        Ok(t0 + frac * (t1 - t0))
    }

    /// Fractional global beat at an audio time; inverse of [`time_at_beat`](Self::time_at_beat).
    pub fn beat_at_time(&self, time_s: f64) -> Result<f64> {
        if !(time_s >= self.first_time() && time_s <= self.last_time()) {
            return Err(Error::Range(format!(
                "time {time_s} s outside annotated range {}..={} s",
                self.first_time(),
                self.last_time()
            )));
        }
        // Last annotation with time <= time_s.
        let k = self.annotations.partition_point(|a| a.time_s <= time_s) - 1;
        if k + 1 == self.annotations.len() || self.time_of(k) == time_s {
            return Ok(k as f64);
        }
        let (t0, t1) = (self.time_of(k), self.time_of(k + 1));
        Ok(k as f64 + (time_s - t0) / (t1 - t0))
    }
}

/// A frame of a sliced track, tagged with its global beat position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatFrame {
    pub frame: F0Frame,
    pub beat: f64,
}

/// Frames whose time lies in `[time_at_beat(start), time_at_beat(end))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSegment {
    pub start_beat: f64,
    pub end_beat: f64,
    pub start_time_s: f64,
    pub end_time_s: f64,
    pub hop_s: f64,
    pub frames: Vec<BeatFrame>,
}

pub fn slice_track(
    track: &F0Track,
    grid: &BeatGrid,
    start_beat: f64,
    end_beat: f64,
) -> Result<TrackSegment> {
    if !(start_beat < end_beat) {
        return Err(Error::Range(format!(
            "slice start {start_beat} is not before end {end_beat}"
        )));
    }
    let t0 = grid.time_at_beat(start_beat)?;
    let t1 = grid.time_at_beat(end_beat)?;
    let frames = track.frames();
    let lo = frames.partition_point(|f| f.time_s < t0);
    let hi = frames.partition_point(|f| f.time_s < t1);
    let frames = frames[lo..hi]
        .iter()
        .map(|f| {
            Ok(BeatFrame {
                frame: *f,
                beat: grid.beat_at_time(f.time_s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackSegment {
        start_beat,
        end_beat,
        start_time_s: t0,
        end_time_s: t1,
        hop_s: track.hop_s(),
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn rows(times: &[(usize, usize, f64)]) -> Vec<BeatAnnotation> {
        times
            .iter()
            .map(|&(m, b, t)| BeatAnnotation {
                measure_index: m,
                beat_in_measure: b,
                time_s: t,
            })
            .collect()
    }

    fn regular(measures: usize, bpm: usize, step: f64) -> Vec<BeatAnnotation> {
        (0..measures * bpm)
            .map(|g| BeatAnnotation {
                measure_index: g / bpm,
                beat_in_measure: g % bpm,
                time_s: g as f64 * step,
            })
            .collect()
    }

    #[test]
    fn accepts_single_full_measure() {
        let g = BeatGrid::new(JangdanSpec::joongmori(), regular(1, 12, 0.5)).unwrap();
        assert_eq!(g.measure_count(), 1);
        assert_eq!(g.last_time(), 5.5);
    }

    #[test]
    fn counts_exhaustive_small_cases() {
        for n in [11usize, 12, 13] {
            let r: Vec<_> = (0..n)
                .map(|b| BeatAnnotation {
                    measure_index: 0,
                    beat_in_measure: b,
                    time_s: b as f64 * 0.5,
                })
                .collect();
            let res = BeatGrid::new(JangdanSpec::joongmori(), r);
            if n == 12 {
                assert!(res.is_ok());
            } else {
                let err = res.unwrap_err();
                assert_eq!(
                    err.to_string(),
                    format!("measure 0 has {n} beats, expected 12")
                );
            }
        }
    }

    #[test]
    fn lists_every_bad_measure() {
        let mut r = regular(3, 12, 0.5);
        r.remove(30);
        r.push(BeatAnnotation {
            measure_index: 0,
            beat_in_measure: 12,
            time_s: 99.0,
        });
        match BeatGrid::new(JangdanSpec::joongmori(), r) {
            Err(Error::BeatCount(list)) => {
                let ms: Vec<_> = list.iter().map(|m| m.measure).collect();
                assert_eq!(ms, vec![0, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reused_time_is_an_ordering_error() {
        let mut r = regular(2, 12, 0.5);
        r[12].time_s = 5.5;
        assert_eq!(
            BeatGrid::new(JangdanSpec::joongmori(), r).unwrap_err(),
            Error::BeatOrder {
                row: 13,
                reason: "time 5.5 does not increase past 5.5 (measure 0 beat 11)".into()
            }
        );
    }

    #[test]
    fn missing_measure_rejected() {
        let r: Vec<_> = regular(2, 12, 0.5)
            .into_iter()
            .map(|mut a| {
                a.measure_index += 1;
                a
            })
            .collect();
        assert!(matches!(
            BeatGrid::new(JangdanSpec::joongmori(), r),
            Err(Error::Range(_))
        ));
    }

    fn small_grid(times: &[f64]) -> BeatGrid {
        let spec = JangdanSpec::new("test", times.len()).unwrap();
        let r: Vec<_> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| (0, i, t))
            .collect();
        BeatGrid::new(spec, rows(&r)).unwrap()
    }

    #[test]
    fn interpolation_examples() {
        let g = small_grid(&[0.0, 0.5]);
        assert_eq!(g.time_at_beat(0.5).unwrap(), 0.25);
        assert_eq!(g.time_at_beat(1.0).unwrap(), 0.5);
        assert_eq!(g.beat_at_time(0.25).unwrap(), 0.5);
        assert_eq!(g.beat_at_time(0.5).unwrap(), 1.0);

        let g = small_grid(&[0.0, 0.4, 1.0]);
        assert!((g.time_at_beat(1.5).unwrap() - 0.7).abs() < 1e-12);
        assert!((g.beat_at_time(0.7).unwrap() - 1.5).abs() < 1e-12);
        assert!(g.time_at_beat(2.01).is_err());
        assert!(g.time_at_beat(-0.1).is_err());
        assert!(g.beat_at_time(1.2).is_err());
    }

    fn track(hop: f64, n: usize) -> F0Track {
        let frames = (0..n)
            .map(|i| F0Frame::voiced(i as f64 * hop, 440.0, 1.0))
            .collect();
        F0Track::new(frames, hop).unwrap()
    }

    #[test]
    fn slice_one_beat() {
        let g = small_grid(&[0.0, 0.5, 1.0]);
        let s = slice_track(&track(0.01, 200), &g, 0.0, 1.0).unwrap();
        assert_eq!(s.frames.len(), 50);
        assert_eq!(s.frames[0].beat, 0.0);
        assert!((s.frames[49].beat - 0.98).abs() < 1e-9);
    }

    #[test]
    fn slice_before_track_is_empty() {
        let g = small_grid(&[0.0, 0.5, 1.0]);
        let late: Vec<_> = (0..10)
            .map(|i| F0Frame::voiced(2.0 + i as f64 * 0.01, 440.0, 1.0))
            .collect();
        let t = F0Track::new(late, 0.01).unwrap();
        assert!(slice_track(&t, &g, 0.0, 2.0).unwrap().frames.is_empty());
    }

    #[test]
    fn slice_rejects_bad_interval() {
        let g = small_grid(&[0.0, 0.5, 1.0]);
        let t = track(0.01, 100);
        assert!(slice_track(&t, &g, 1.0, 1.0).is_err());
        assert!(slice_track(&t, &g, 1.5, 0.5).is_err());
        assert!(slice_track(&t, &g, 0.0, 3.0).is_err());
    }
}
