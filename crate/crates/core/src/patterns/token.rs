use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::pitch::Pitch;
use crate::score::{NoteEvent, NoteKind};
use crate::Beats;

/// A note or rest written as one word: `A4:3/2`, `R:1/1`.
///
/// Two tokens are equal when their MIDI numbers and durations match, so
/// enharmonic spellings compare equal while the spelling read in is still
/// what gets printed.
#[derive(Debug, Clone, Copy)]
pub struct NoteToken {
    pub kind: NoteKind,
    pub duration: Beats,
}

impl NoteToken {
    pub fn new(kind: NoteKind, duration: Beats) -> Result<NoteToken> {
        if duration <= Beats::zero() {
            return Err(Error::InvalidToken(format!("non-positive duration {duration}")));
        }
        Ok(NoteToken { kind, duration })
    }

    pub fn from_event(event: &NoteEvent) -> NoteToken {
        NoteToken {
            kind: event.kind,
            duration: event.duration_beats,
        }
    }

    pub fn is_rest(&self) -> bool {
        self.kind.is_rest()
    }

    /// MIDI number, `None` for rests.
    pub fn midi(&self) -> Option<u8> {
        self.kind.pitch().map(Pitch::midi)
    }

    fn key(&self) -> (Option<u8>, Beats) {
        (self.midi(), self.duration)
    }

    pub fn text(&self) -> String {
        format!("{self}")
    }
}

impl PartialEq for NoteToken {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for NoteToken {}

impl Hash for NoteToken {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for NoteToken {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NoteToken {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for NoteToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NoteKind::Note(p) => write!(f, "{p}")?,
            NoteKind::Rest => f.write_str("R")?,
        }
        // Ratio keeps lowest terms; the denominator is always written.
        write!(f, ":{}/{}", self.duration.numer(), self.duration.denom())
    }
}

impl FromStr for NoteToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<NoteToken> {
        let bad = || Error::InvalidToken(s.into());
        let (head, dur) = s.split_once(':').ok_or_else(bad)?;
        let (n, d) = dur.split_once('/').ok_or_else(bad)?;
        let n: i64 = n.parse().map_err(|_| bad())?;
        let d: i64 = d.parse().map_err(|_| bad())?;
        if d <= 0 {
            return Err(bad());
        }
        let kind = if head == "R" {
            NoteKind::Rest
        } else {
            NoteKind::Note(head.parse().map_err(|_| bad())?)
        };
        NoteToken::new(kind, Beats::new(n, d))
    }
}

/// One token per event, rests included.
pub fn tokenize(events: &[NoteEvent]) -> Vec<NoteToken> {
    events.iter().map(NoteToken::from_event).collect()
}

/// Rebuilds contiguous events from tokens, starting at beat 0 in measure 0.
pub fn detokenize(tokens: &[NoteToken]) -> Vec<NoteEvent> {
    let mut onset = Beats::zero();
    tokens
        .iter()
        .map(|t| {
            let e = NoteEvent {
                onset_beats: onset,
                duration_beats: t.duration,
                kind: t.kind,
                measure_index: 0,
                tied_from_previous: false,
                ties_to_next: false,
            };
            onset += t.duration;
            e
        })
        .collect()
}

/// Tokens of one daemok with the score position of each.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub tokens: Vec<NoteToken>,
    pub onsets: Vec<Beats>,
    pub measures: Vec<usize>,
}

impl TokenSequence {
    /// From tie-merged events. With `skip_rests`, rest tokens are dropped but
    /// the remaining tokens keep their true onsets.
    pub fn from_events(events: &[NoteEvent], skip_rests: bool) -> TokenSequence {
        let kept = events.iter().filter(|e| !(skip_rests && e.is_rest()));
        let mut seq = TokenSequence {
            tokens: Vec::new(),
            onsets: Vec::new(),
            measures: Vec::new(),
        };
        for e in kept {
            seq.tokens.push(NoteToken::from_event(e));
            seq.onsets.push(e.onset_beats);
            seq.measures.push(e.measure_index);
        }
        seq
    }

    /// Contiguous tokens from beat 0; measure information is unknown and set to 0.
    pub fn from_tokens(tokens: Vec<NoteToken>) -> TokenSequence {
        let mut onset = Beats::zero();
        let onsets = tokens
            .iter()
            .map(|t| {
                let o = onset;
                onset += t.duration;
                o
            })
            .collect();
        let measures = alloc::vec![0; tokens.len()];
        TokenSequence {
            tokens,
            onsets,
            measures,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// End beat of token `i`.
    pub fn end_of(&self, i: usize) -> Beats {
        self.onsets[i] + self.tokens[i].duration
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn b(n: i64, d: i64) -> Beats {
        Beats::new(n, d)
    }

    fn note(name: &str, dur: Beats) -> NoteEvent {
        NoteEvent {
            onset_beats: Beats::zero(),
            duration_beats: dur,
            kind: if name == "R" {
                NoteKind::Rest
            } else {
                NoteKind::Note(name.parse().unwrap())
            },
            measure_index: 0,
            tied_from_previous: false,
            ties_to_next: false,
        }
    }

    #[test]
    fn token_text() {
        let t = tokenize(&[note("A4", b(3, 2))]);
        assert_eq!(t[0].text(), "A4:3/2");
        let t = tokenize(&[note("D5", b(1, 1)), note("R", b(1, 1)), note("D5", b(2, 1))]);
        let texts: Vec<_> = t.iter().map(NoteToken::text).collect();
        assert_eq!(texts, vec!["D5:1/1", "R:1/1", "D5:2/1"]);
    }

    #[test]
    fn lowest_terms() {
        let t: NoteToken = "G4:2/4".parse().unwrap();
        assert_eq!(t.text(), "G4:1/2");
    }

    #[test]
    fn parse_errors() {
        for s in ["G4", "G4:1", "G4:1/0", "G4:0/1", "G4:-1/2", "Q4:1/1", "R:x/1"] {
            assert!(s.parse::<NoteToken>().is_err(), "{s}");
        }
    }

    #[test]
    fn enharmonic_tokens_compare_equal() {
        let a: NoteToken = "A#4:1/1".parse().unwrap();
        let b: NoteToken = "Bb4:1/1".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.text(), "A#4:1/1");
    }

    #[test]
    fn skip_rests_keeps_onsets() {
        let evs = detokenize(&[
            "D5:1/1".parse().unwrap(),
            "R:1/1".parse().unwrap(),
            "E5:2/1".parse().unwrap(),
        ]);
        let seq = TokenSequence::from_events(&evs, true);
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.onsets, vec![b(0, 1), b(2, 1)]);
    }
}
