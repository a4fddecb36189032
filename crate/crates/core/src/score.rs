//! Immutable score model: measures of rational note events.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::pitch::Pitch;
use crate::Beats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeSignature {
    numerator: u32,
    denominator: u32,
}

impl TimeSignature {
    pub fn new(numerator: u32, denominator: u32) -> Result<TimeSignature> {
        if numerator == 0 || !matches!(denominator, 1 | 2 | 4 | 8 | 16 | 32) {
            return Err(Error::InvalidTimeSignature {
                numerator,
                denominator,
            });
        }
        Ok(TimeSignature {
            numerator,
            denominator,
        })
    }

    pub fn numerator(&self) -> u32 {
        self.numerator
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    /// Length of a full measure in quarter-note beats.
    pub fn capacity(&self) -> Beats {
        Beats::new(
            i64::from(self.numerator) * 4,
            i64::from(self.denominator),
        )
    }
}

/// A sounding pitch or a rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoteKind {
    Note(Pitch),
    Rest,
}

impl NoteKind {
    pub fn pitch(&self) -> Option<&Pitch> {
        match self {
            NoteKind::Note(p) => Some(p),
            NoteKind::Rest => None,
        }
    }

    pub fn is_rest(&self) -> bool {
        matches!(self, NoteKind::Rest)
    }
}

/// One note or rest positioned on the beat axis of the whole piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteEvent {
    pub onset_beats: Beats,
    pub duration_beats: Beats,
    pub kind: NoteKind,
    pub measure_index: usize,
    pub tied_from_previous: bool,
    /// A tie leaves this note towards the next one of the same pitch.
    pub ties_to_next: bool,
}

impl NoteEvent {
    pub fn end_beats(&self) -> Beats {
        self.onset_beats + self.duration_beats
    }

    pub fn pitch(&self) -> Option<&Pitch> {
        self.kind.pitch()
    }

    pub fn is_rest(&self) -> bool {
        self.kind.is_rest()
    }
}

/// A measure's events in onset order.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub index: usize,
    /// The `number` attribute from the source, kept for messages.
    pub number: String,
    pub time_signature: TimeSignature,
    /// Pickup or otherwise intentionally incomplete measure.
    pub implicit: bool,
    pub events: Vec<NoteEvent>,
}

impl Measure {
    pub fn start_beats(&self) -> Option<Beats> {
        self.events.first().map(|e| e.onset_beats)
    }

    pub fn total_duration(&self) -> Beats {
        self.events
            .iter()
            .fold(Beats::zero(), |acc, e| acc + e.duration_beats)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    daemok_id: String,
    time_signature: TimeSignature,
    divisions: u32,
    measures: Vec<Measure>,
}

impl Score {
    /// Validates measure capacities, event ordering and durations.
    pub fn new(
        daemok_id: impl Into<String>,
        time_signature: TimeSignature,
        divisions: u32,
        measures: Vec<Measure>,
    ) -> Result<Score> {
        if divisions == 0 {
            return Err(Error::Config("divisions must be positive".into()));
        }
        let mut cursor: Option<Beats> = None;
        for m in &measures {
            for e in &m.events {
                if e.duration_beats <= Beats::zero() {
                    return Err(Error::NonPositiveDuration { measure: m.index });
                }
                if let Some(c) = cursor {
                    if e.onset_beats < c {
                        return Err(Error::EventOrder { measure: m.index });
                    }
                }
                cursor = Some(e.end_beats());
            }
            let found = m.total_duration();
            let expected = m.time_signature.capacity();
            if found != expected && !m.implicit {
                return Err(Error::MeasureDuration {
                    measure: m.index,
                    expected,
                    found,
                });
            }
        }
        Ok(Score {
            daemok_id: daemok_id.into(),
            time_signature,
            divisions,
            measures,
        })
    }

    pub fn daemok_id(&self) -> &str {
        &self.daemok_id
    }

    pub fn time_signature(&self) -> TimeSignature {
        self.time_signature
    }

    pub fn divisions(&self) -> u32 {
        self.divisions
    }

    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    /// Flattened events, optionally with tie chains merged into single notes.
    pub fn note_sequence(&self, merge_ties: bool) -> Result<Vec<NoteEvent>> {
        note_sequence(self, merge_ties)
    }
}

/// Flat, onset-sorted event list. With `merge_ties`, each tie chain becomes
/// one event carrying the summed duration of the chain.
pub fn note_sequence(score: &Score, merge_ties: bool) -> Result<Vec<NoteEvent>> {
    let flat = score.measures.iter().flat_map(|m| m.events.iter().cloned());
    let mut out: Vec<NoteEvent> = Vec::new();
    // Measure where the currently open tie chain started.
    let mut open_tie: Option<usize> = None;

    for ev in flat {
        if let Some(start_measure) = open_tie {
            let continues = ev.tied_from_previous
                && out
                    .last()
                    .and_then(|prev| prev.pitch().zip(ev.pitch()))
                    .is_some_and(|(a, b)| a.midi() == b.midi())
                && out.last().is_some_and(|p| p.end_beats() == ev.onset_beats);
            if !continues {
                return Err(Error::DanglingTie {
                    measure: start_measure,
                });
            }
            if merge_ties {
                let last = out.last_mut().expect("open tie implies a previous event");
                last.duration_beats += ev.duration_beats;
                last.ties_to_next = ev.ties_to_next;
                if !ev.ties_to_next {
                    open_tie = None;
                }
                continue;
            }
            if !ev.ties_to_next {
                open_tie = None;
            }
            out.push(ev);
            continue;
        }
        if ev.ties_to_next && !ev.is_rest() {
            open_tie = Some(ev.measure_index);
        }
        out.push(ev);
    }

    if let Some(measure) = open_tie {
        return Err(Error::DanglingTie { measure });
    }
    Ok(out)
}

/// Sum of sounding (non-rest) durations.
pub fn sounding_duration(events: &[NoteEvent]) -> Beats {
    events
        .iter()
        .filter(|e| !e.is_rest())
        .fold(Beats::zero(), |acc, e| acc + e.duration_beats)
}
