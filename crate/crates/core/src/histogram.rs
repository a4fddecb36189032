//! Pitch histograms from F0 frames and from notated durations, plus
//! mode-template affinity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::f0::{hz_to_midi, F0Track, FilterConfig};
use crate::math;
use crate::score::NoteEvent;
use crate::Beats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinKind {
    /// One bin per MIDI note number.
    Semitone,
    /// Twelve bins, C = 0.
    PitchClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassUnit {
    Frames,
    Beats,
}

/// Non-negative mass per bin. Score histograms also carry exact rational masses.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchHistogram {
    pub bin_kind: BinKind,
    pub unit: MassUnit,
    pub masses: BTreeMap<i32, f64>,
    pub exact: Option<BTreeMap<i32, Beats>>,
}

impl PitchHistogram {
    pub fn empty(bin_kind: BinKind, unit: MassUnit) -> PitchHistogram {
        PitchHistogram {
            bin_kind,
            unit,
            masses: BTreeMap::new(),
            exact: (unit == MassUnit::Beats).then(BTreeMap::new),
        }
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn exact_total(&self) -> Option<Beats> {
        self.exact
            .as_ref()
            .map(|m| m.values().fold(Beats::zero(), |a, &b| a + b))
    }

    pub fn mass(&self, bin: i32) -> f64 {
        self.masses.get(&bin).copied().unwrap_or(0.0)
    }

    /// Folds semitone bins into the twelve pitch classes. Identity on a
    /// pitch-class histogram.
    pub fn to_pitch_classes(&self) -> PitchHistogram {
        if self.bin_kind == BinKind::PitchClass {
            return self.clone();
        }
        let exact = self.exact.as_ref().map(|ex| {
            let mut out = BTreeMap::new();
            for (&bin, &m) in ex {
                *out.entry(bin.rem_euclid(12)).or_insert_with(Beats::zero) += m;
            }
            out
        });
        let masses = match &exact {
            Some(ex) => rational_to_float(ex),
            None => {
                let mut masses = BTreeMap::new();
                for (&bin, &m) in &self.masses {
                    *masses.entry(bin.rem_euclid(12)).or_insert(0.0) += m;
                }
                masses
            }
        };
        PitchHistogram {
            bin_kind: BinKind::PitchClass,
            unit: self.unit,
            masses,
            exact,
        }
    }

    fn bin_for(kind: BinKind, midi: i32) -> i32 {
        match kind {
            BinKind::Semitone => midi,
            BinKind::PitchClass => midi.rem_euclid(12),
        }
    }
}

/// Nearest semitone to a fractional MIDI value. Values within `1e-9` of a
/// half-semitone boundary go to the lower bin.
pub fn nearest_semitone(midi: f64) -> i32 {
    const TIE_EPS: f64 = 1e-9;
    let lower = math::floor(midi);
    let frac = midi - lower;
    if (0.5 - TIE_EPS..=0.5 + TIE_EPS).contains(&frac) {
        lower as i32
    } else {
        math::round(midi) as i32
    }
}

/// Counts voiced frames per bin. `reference_hz` is the frequency of A4.
///
/// The track is expected to be filtered already. Frames outside the default
/// filter's frequency range are still binned, with a logged warning.
pub fn f0_histogram(track: &F0Track, reference_hz: f64, bin_kind: BinKind) -> Result<PitchHistogram> {
    let range = FilterConfig::default();
    let mut hist = PitchHistogram::empty(bin_kind, MassUnit::Frames);
    let mut outside = 0usize;
    for frame in track.frames() {
        let Some(hz) = frame.f0_hz else { continue };
        if hz < range.min_hz || hz > range.max_hz {
            outside += 1;
        }
        let bin = PitchHistogram::bin_for(bin_kind, nearest_semitone(hz_to_midi(hz, reference_hz)?));
        *hist.masses.entry(bin).or_insert(0.0) += 1.0;
    }
    if outside > 0 {
        log::warn!(
            "{outside} voiced frames lie outside {}..={} Hz; was the track filtered?",
            range.min_hz,
            range.max_hz
        );
    }
    Ok(hist)
}

/// Sums notated durations per bin; rests are skipped.
pub fn score_duration_histogram(events: &[NoteEvent], bin_kind: BinKind) -> PitchHistogram {
    let mut exact: BTreeMap<i32, Beats> = BTreeMap::new();
    for e in events {
        if let Some(p) = e.pitch() {
            let bin = PitchHistogram::bin_for(bin_kind, i32::from(p.midi()));
            *exact.entry(bin).or_insert_with(Beats::zero) += e.duration_beats;
        }
    }
    PitchHistogram {
        bin_kind,
        unit: MassUnit::Beats,
        masses: rational_to_float(&exact),
        exact: Some(exact),
    }
}

fn rational_to_float(exact: &BTreeMap<i32, Beats>) -> BTreeMap<i32, f64> {
    exact
        .iter()
        .map(|(&b, m)| (b, m.to_f64().unwrap_or(f64::NAN)))
        .collect()
}

/// A scale as pitch classes relative to a tonic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeTemplate {
    pub name: String,
    pub tonic: u8,
    pub scale_degrees: Vec<u8>,
    /// Degrees that mark the mode even though they carry no extra weight in
    /// the affinity score.
    pub characteristic: Vec<u8>,
}

impl ModeTemplate {
    pub fn new(name: impl Into<String>, tonic: u8, degrees: &[u8]) -> Result<ModeTemplate> {
        if degrees.is_empty() {
            return Err(Error::Config("mode template needs at least one degree".into()));
        }
        if tonic > 11 || degrees.iter().any(|&d| d > 11) {
            return Err(Error::Config("pitch classes must lie in 0..=11".into()));
        }
        let mut scale_degrees = degrees.to_vec();
        scale_degrees.sort_unstable();
        scale_degrees.dedup();
        Ok(ModeTemplate {
            name: name.into(),
            tonic,
            scale_degrees,
            characteristic: Vec::new(),
        })
    }

    /// Ujo on D: D F G A C.
    pub fn ujo() -> ModeTemplate {
        Self::new("ujo", 2, &[0, 3, 5, 7, 10]).expect("static template")
    }

    /// Gyemyeonjo on D: D E G A C, with E marked characteristic. F is kept
    /// out of the degree set and treated as an upper neighbour of E.
    pub fn gyemyeonjo() -> ModeTemplate {
        let mut t = Self::new("gyemyeonjo", 2, &[0, 2, 5, 7, 10]).expect("static template");
        t.characteristic = alloc::vec![2];
        t
    }

    pub fn by_name(name: &str) -> Option<ModeTemplate> {
        match name.to_ascii_lowercase().as_str() {
            "ujo" => Some(Self::ujo()),
            "gyemyeonjo" => Some(Self::gyemyeonjo()),
            _ => None,
        }
    }

    /// Same template with the tonic moved by `semitones`.
    pub fn transposed(&self, semitones: i32) -> ModeTemplate {
        let mut t = self.clone();
        t.tonic = (i32::from(self.tonic) + semitones).rem_euclid(12) as u8;
        t
    }

    /// Absolute pitch classes of the scale.
    pub fn pitch_classes(&self) -> Vec<u8> {
        self.scale_degrees
            .iter()
            .map(|d| (d + self.tonic) % 12)
            .collect()
    }

    pub fn contains(&self, pitch_class: u8) -> bool {
        let rel = (i32::from(pitch_class) - i32::from(self.tonic)).rem_euclid(12) as u8;
        self.scale_degrees.contains(&rel)
    }
}

/// Share of pitch-class mass that falls on the template's scale degrees.
pub fn mode_affinity(histogram: &PitchHistogram, template: &ModeTemplate) -> Result<f64> {
    let pcs = histogram.to_pitch_classes();
    let total = pcs.total();
    if !(total > 0.0) {
        return Err(Error::UndefinedAffinity);
    }
    let inside: f64 = pcs
        .masses
        .iter()
        .filter(|(&pc, _)| template.contains(pc as u8))
        .map(|(_, m)| m)
        .sum();
    Ok(inside / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f0::F0Frame;
    use crate::pitch::Pitch;
    use crate::score::NoteKind;
    use alloc::vec;

    fn frames(hzs: &[(f64, usize)]) -> F0Track {
        let mut out = Vec::new();
        for &(hz, n) in hzs {
            for _ in 0..n {
                let t = out.len() as f64 * 0.01;
                out.push(F0Frame::voiced(t, hz, 1.0));
            }
        }
        F0Track::new(out, 0.01).unwrap()
    }

    fn ev(name: &str, beats: i64) -> NoteEvent {
        NoteEvent {
            onset_beats: Beats::zero(),
            duration_beats: Beats::from_integer(beats),
            kind: if name == "R" {
                NoteKind::Rest
            } else {
                NoteKind::Note(name.parse::<Pitch>().unwrap())
            },
            measure_index: 0,
            tied_from_previous: false,
            ties_to_next: false,
        }
    }

    #[test]
    fn single_pitch_frames() {
        let h = f0_histogram(&frames(&[(440.0, 100)]), 440.0, BinKind::Semitone).unwrap();
        assert_eq!(h.masses.len(), 1);
        assert_eq!(h.mass(69), 100.0);
    }

    #[test]
    fn semitone_split() {
        let h = f0_histogram(&frames(&[(440.0, 60), (466.16, 40)]), 440.0, BinKind::Semitone)
            .unwrap();
        assert_eq!(h.mass(69), 60.0);
        assert_eq!(h.mass(70), 40.0);
    }

    #[test]
    fn quarter_tone_tie_goes_down() {
        // Exactly 50 cents above A4.
        let q = 440.0 * libm::exp2(1.0 / 24.0);
        let h = f0_histogram(&frames(&[(q, 1)]), 440.0, BinKind::Semitone).unwrap();
        assert_eq!(h.mass(69), 1.0);
        // 452.9 Hz is about 50.03 cents up, past the boundary.
        let h = f0_histogram(&frames(&[(452.9, 1)]), 440.0, BinKind::Semitone).unwrap();
        assert_eq!(h.mass(70), 1.0);
        assert_eq!(nearest_semitone(68.5), 68);
        assert_eq!(nearest_semitone(-0.5), -1);
        assert_eq!(nearest_semitone(68.51), 69);
    }

    #[test]
    fn duration_sums() {
        let h = score_duration_histogram(&[ev("D5", 12)], BinKind::Semitone);
        assert_eq!(h.mass(74), 12.0);
        let h = score_duration_histogram(
            &[ev("D5", 3), ev("E5", 1), ev("R", 4), ev("D5", 2)],
            BinKind::Semitone,
        );
        assert_eq!(h.masses, BTreeMap::from([(74, 5.0), (76, 1.0)]));
        assert_eq!(h.exact_total(), Some(Beats::from_integer(6)));
        let pc = h.to_pitch_classes();
        assert_eq!(pc.masses, BTreeMap::from([(2, 5.0), (4, 1.0)]));
    }

    #[test]
    fn affinity_cases() {
        let ujo = ModeTemplate::ujo();
        let only_d = score_duration_histogram(&[ev("D4", 4)], BinKind::Semitone);
        assert_eq!(mode_affinity(&only_d, &ujo).unwrap(), 1.0);
        let only_ds = score_duration_histogram(&[ev("D#4", 4)], BinKind::Semitone);
        assert_eq!(mode_affinity(&only_ds, &ujo).unwrap(), 0.0);
        let mixed = score_duration_histogram(&[ev("D5", 3), ev("E5", 1)], BinKind::PitchClass);
        assert_eq!(mode_affinity(&mixed, &ujo).unwrap(), 0.75);
        let empty = PitchHistogram::empty(BinKind::Semitone, MassUnit::Frames);
        assert_eq!(mode_affinity(&empty, &ujo), Err(Error::UndefinedAffinity));
    }

    #[test]
    fn templates() {
        assert_eq!(ModeTemplate::ujo().pitch_classes(), vec![2, 5, 7, 9, 0]);
        assert_eq!(ModeTemplate::gyemyeonjo().pitch_classes(), vec![2, 4, 7, 9, 0]);
        assert!(ModeTemplate::new("x", 0, &[]).is_err());
        assert!(ModeTemplate::new("x", 0, &[12]).is_err());
        assert!(ModeTemplate::by_name("Ujo").is_some());
        assert!(ModeTemplate::by_name("pyeongjo").is_none());
    }
}
