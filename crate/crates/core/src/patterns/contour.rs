use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::ToPrimitive;

use super::ngram::{NGramPattern, PatternIndex, PatternOccurrence};
use crate::beats::{slice_track, BeatGrid, TrackSegment};
use crate::error::{Error, Result};
use crate::f0::{hz_to_cents, F0Track};
use crate::Beats;

/// Pitch in cents over time; `None` marks unvoiced frames.
#[derive(Debug, Clone, PartialEq)]
pub struct CentsSeries {
    pub hop_s: f64,
    pub times: Vec<f64>,
    pub cents: Vec<Option<f64>>,
}

impl CentsSeries {
    pub fn len(&self) -> usize {
        self.cents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cents.is_empty()
    }

    pub fn voiced_count(&self) -> usize {
        self.cents.iter().filter(|c| c.is_some()).count()
    }
}

/// Converts a sliced segment into cents relative to `reference_hz`.
pub fn cents_series(segment: &TrackSegment, reference_hz: f64) -> Result<CentsSeries> {
    let mut times = Vec::with_capacity(segment.frames.len());
    let mut cents = Vec::with_capacity(segment.frames.len());
    for bf in &segment.frames {
        times.push(bf.frame.time_s);
        cents.push(match bf.frame.f0_hz {
            Some(hz) => Some(hz_to_cents(hz, reference_hz)?),
            None => None,
        });
    }
    Ok(CentsSeries {
        hop_s: segment.hop_s,
        times,
        cents,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    pub samples_per_contour: usize,
    pub reference_hz: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            samples_per_contour: 200,
            reference_hz: 440.0,
        }
    }
}

/// One occurrence's contour on a uniform normalized-beat axis `j / (len - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub daemok_id: String,
    pub start_event_index: usize,
    pub onset_beats: Beats,
    pub span_beats: Beats,
    pub values: Vec<Option<f64>>,
}

impl Contour {
    pub fn all_missing(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    pub fn label(&self) -> String {
        alloc::format!("{} @ {}", self.daemok_id, self.onset_beats)
    }
}

/// Slices the track of every occurrence of `pattern` over
/// `[onset, onset + span)` and resamples it onto `samples_per_contour`
/// points in cents. Returns an empty list when the pattern is not indexed.
pub fn occurrence_contours(
    index: &PatternIndex,
    pattern: &NGramPattern,
    grids: &BTreeMap<String, BeatGrid>,
    tracks: &BTreeMap<String, F0Track>,
    config: &ContourConfig,
) -> Result<Vec<Contour>> {
    if config.samples_per_contour < 2 {
        return Err(Error::Config("samples_per_contour must be at least 2".into()));
    }
    let Some(entry) = index.get(pattern) else {
        return Ok(Vec::new());
    };
    entry
        .occurrences
        .iter()
        .map(|occ| {
            let segment = occurrence_segment(occ, grids, tracks)?;
            let values = resample(&segment, occ, config)?;
            Ok(Contour {
                daemok_id: occ.daemok_id.clone(),
                start_event_index: occ.start_event_index,
                onset_beats: occ.onset_beats,
                span_beats: occ.span_beats,
                values,
            })
        })
        .collect()
}

/// The slice of the daemok's track covering one occurrence.
pub fn occurrence_segment(
    occ: &PatternOccurrence,
    grids: &BTreeMap<String, BeatGrid>,
    tracks: &BTreeMap<String, F0Track>,
) -> Result<TrackSegment> {
    let missing = |what| Error::MissingDependency {
        daemok: occ.daemok_id.clone(),
        what,
    };
    let grid = grids.get(&occ.daemok_id).ok_or_else(|| missing("beat grid"))?;
    let track = tracks.get(&occ.daemok_id).ok_or_else(|| missing("F0 track"))?;
    let start = beats_f64(occ.onset_beats);
    let end = beats_f64(occ.onset_beats + occ.span_beats);
    slice_track(track, grid, start, end)
}

fn beats_f64(b: Beats) -> f64 {
    b.to_f64().unwrap_or(f64::NAN)
}

/// Linear interpolation between neighbouring voiced frames. Points outside
/// the frame range hold the edge value when within one frame spacing of it.
fn resample(
    segment: &TrackSegment,
    occ: &PatternOccurrence,
    config: &ContourConfig,
) -> Result<Vec<Option<f64>>> {
    let n = config.samples_per_contour;
    let series = cents_series(segment, config.reference_hz)?;
    if series.is_empty() {
        return Ok(alloc::vec![None; n]);
    }
    let onset = beats_f64(occ.onset_beats);
    let span = beats_f64(occ.span_beats);
    let pos: Vec<f64> = segment
        .frames
        .iter()
        .map(|f| (f.beat - onset) / span)
        .collect();
    let last = pos.len() - 1;
    let first_gap = if last > 0 {
        pos[1] - pos[0]
    } else {
        segment.hop_s / (segment.end_time_s - segment.start_time_s)
    };
    let last_gap = if last > 0 {
        pos[last] - pos[last - 1]
    } else {
        first_gap
    };
    // Absorbs rounding in the edge-distance comparison.
    let slack = 1e-9;

    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let x = j as f64 / (n - 1) as f64;
        let k = pos.partition_point(|&p| p <= x);
        let value = if k == 0 {
            series.cents[0].filter(|_| pos[0] - x <= first_gap + slack)
        } else if k > last {
            series.cents[last].filter(|_| x - pos[last] <= last_gap + slack)
        } else {
            let (i0, i1) = (k - 1, k);
            match (series.cents[i0], series.cents[i1]) {
                (Some(a), Some(b)) => {
                    let w = (x - pos[i0]) / (pos[i1] - pos[i0]);
                    Some(a + w * (b - a))
                }
                (Some(a), None) if x == pos[i0] => Some(a),
                _ => None,
            }
        };
        out.push(value);
    }
    Ok(out)
}
