//! Spelled pitches and their MIDI numbers.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Diatonic letter name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Step {
    /// Semitones above C within one octave.
    pub const fn semitone(self) -> i32 {
        match self {
            Step::C => 0,
            Step::D => 2,
            Step::E => 4,
            Step::F => 5,
            Step::G => 7,
            Step::A => 9,
            Step::B => 11,
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Step::C => 'C',
            Step::D => 'D',
            Step::E => 'E',
            Step::F => 'F',
            Step::G => 'G',
            Step::A => 'A',
            Step::B => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Step> {
        Some(match c {
            'C' => Step::C,
            'D' => Step::D,
            'E' => Step::E,
            'F' => Step::F,
            'G' => Step::G,
            'A' => Step::A,
            'B' => Step::B,
            _ => return None,
        })
    }
}

/// A spelled pitch. Spelling is kept as written; all comparisons that matter
/// for analysis go through [`Pitch::midi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pitch {
    step: Step,
    alter: i8,
    octave: i8,
}

impl Pitch {
    pub const MIN_ALTER: i8 = -2;
    pub const MAX_ALTER: i8 = 2;
    pub const MIN_OCTAVE: i8 = 0;
    pub const MAX_OCTAVE: i8 = 9;

    pub fn new(step: Step, alter: i8, octave: i8) -> Result<Pitch> {
        if !(Self::MIN_ALTER..=Self::MAX_ALTER).contains(&alter) {
            return Err(Error::InvalidPitch(format!("alter {alter} outside -2..=2")));
        }
        if !(Self::MIN_OCTAVE..=Self::MAX_OCTAVE).contains(&octave) {
            return Err(Error::InvalidPitch(format!("octave {octave} outside 0..=9")));
        }
        let midi = Self::midi_of(step, alter, octave);
        if !(0..=127).contains(&midi) {
            return Err(Error::InvalidPitch(format!(
                "{}{}{} maps to MIDI {midi}",
                step.letter(),
                accidental(alter),
                octave
            )));
        }
        Ok(Pitch {
            step,
            alter,
            octave,
        })
    }

    /// Sharp spelling of a MIDI note number, e.g. 70 -> A#4.
    pub fn from_midi(midi: u8) -> Result<Pitch> {
        const SHARP: [(Step, i8); 12] = [
            (Step::C, 0),
            (Step::C, 1),
            (Step::D, 0),
            (Step::D, 1),
            (Step::E, 0),
            (Step::F, 0),
            (Step::F, 1),
            (Step::G, 0),
            (Step::G, 1),
            (Step::A, 0),
            (Step::A, 1),
            (Step::B, 0),
        ];
        if midi > 127 {
            return Err(Error::InvalidPitch(format!("MIDI {midi} above 127")));
        }
        let (step, alter) = SHARP[usize::from(midi % 12)];
        let octave = (midi / 12) as i8 - 1;
        if octave < Self::MIN_OCTAVE {
            // MIDI 0..=11 sit in octave -1, which the notation subset does not spell.
            return Err(Error::InvalidPitch(format!("MIDI {midi} below octave 0")));
        }
        Pitch::new(step, alter, octave)
    }

    const fn midi_of(step: Step, alter: i8, octave: i8) -> i32 {
        (octave as i32 + 1) * 12 + step.semitone() + alter as i32
    }

    pub fn step(&self) -> Step {
        self.step
    }

    pub fn alter(&self) -> i8 {
        self.alter
    }

    pub fn octave(&self) -> i8 {
        self.octave
    }

    pub fn midi(&self) -> u8 {
        Self::midi_of(self.step, self.alter, self.octave) as u8
    }

    /// Pitch class 0..12 with C = 0.
    pub fn pitch_class(&self) -> u8 {
        self.midi() % 12
    }

    /// Scientific pitch name such as `D5`, `F#4` or `Eb5`.
    pub fn name(&self) -> String {
        format!("{self}")
    }
}

fn accidental(alter: i8) -> &'static str {
    match alter {
        -2 => "bb",
        -1 => "b",
        1 => "#",
        2 => "##",
        _ => "",
    }
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}",
            self.step.letter(),
            accidental(self.alter),
            self.octave
        )
    }
}

impl FromStr for Pitch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Pitch> {
        let bad = || Error::InvalidPitch(format!("cannot parse pitch name `{s}`"));
        let mut chars = s.chars();
        let step = chars.next().and_then(Step::from_letter).ok_or_else(bad)?;
        let rest = chars.as_str();
        let digits_at = rest
            .find(|c: char| c.is_ascii_digit() || c == '-')
            .ok_or_else(bad)?;
        let (acc, oct) = rest.split_at(digits_at);
        let alter: i8 = match acc {
            "" => 0,
            "#" => 1,
            "##" => 2,
            "b" => -1,
            "bb" => -2,
            _ => return Err(bad()),
        };
        let octave: i8 = oct.parse().map_err(|_| bad())?;
        Pitch::new(step, alter, octave)
    }
}

/// Name of a pitch class (sharp spelling), used for axis labels.
pub fn pitch_class_name(pc: u8) -> &'static str {
    const NAMES: [&str; 12] = [
        "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
    ];
    NAMES[usize::from(pc % 12)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(Pitch::new(Step::C, 0, 4).unwrap().name(), "C4");
        assert_eq!(Pitch::new(Step::F, 1, 4).unwrap().name(), "F#4");
        assert_eq!(Pitch::new(Step::E, -1, 5).unwrap().name(), "Eb5");
    }

    #[test]
    fn midi_numbers() {
        assert_eq!(Pitch::new(Step::D, 0, 5).unwrap().midi(), 74);
        assert_eq!(Pitch::new(Step::A, 0, 4).unwrap().midi(), 69);
        assert_eq!(Pitch::new(Step::C, -1, 0).unwrap().midi(), 11);
        assert_eq!(Pitch::new(Step::G, 0, 9).unwrap().midi(), 127);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Pitch::new(Step::G, 1, 9).is_err());
        assert!(Pitch::new(Step::C, 3, 4).is_err());
        assert!(Pitch::new(Step::C, 0, 10).is_err());
        assert!(Pitch::new(Step::C, 0, -1).is_err());
        assert!("H4".parse::<Pitch>().is_err());
        assert!("C".parse::<Pitch>().is_err());
        assert!("Cx4".parse::<Pitch>().is_err());
    }

    #[test]
    fn parse_flats_and_sharps() {
        let p: Pitch = "Bb4".parse().unwrap();
        assert_eq!((p.step(), p.alter(), p.octave(), p.midi()), (Step::B, -1, 4, 70));
        let p: Pitch = "F##3".parse().unwrap();
        assert_eq!(p.midi(), 55);
    }

    #[test]
    fn name_roundtrip_over_spellable_midi_range() {
        for midi in 12u8..=127 {
            let p = Pitch::from_midi(midi).unwrap();
            let back: Pitch = p.name().parse().unwrap();
            assert_eq!(back, p);
            assert_eq!(back.midi(), midi);
        }
        assert!(Pitch::from_midi(11).is_err());
    }
}
