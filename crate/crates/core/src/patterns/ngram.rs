use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use super::token::{NoteToken, TokenSequence};
use crate::error::{Error, Result};
use crate::Beats;

/// A contiguous run of tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NGramPattern {
    pub tokens: Vec<NoteToken>,
}

impl NGramPattern {
    pub fn new(tokens: Vec<NoteToken>) -> Result<NGramPattern> {
        if tokens.len() < 2 {
            return Err(Error::Config(format!(
                "a pattern needs at least 2 tokens, got {}",
                tokens.len()
            )));
        }
        Ok(NGramPattern { tokens })
    }

    /// Parses whitespace-separated tokens, e.g. `"G4:1/2 A4:1/2 C5:1/1"`.
    pub fn parse(text: &str) -> Result<NGramPattern> {
        let tokens = text
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<NoteToken>>>()?;
        NGramPattern::new(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn span_beats(&self) -> Beats {
        self.tokens
            .iter()
            .fold(Beats::zero(), |acc, t| acc + t.duration)
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.text());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternOccurrence {
    pub daemok_id: String,
    pub start_event_index: usize,
    pub onset_beats: Beats,
    /// From the first onset to the end of the last token.
    pub span_beats: Beats,
    pub crosses_measure: bool,
    pub contains_rest: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternEntry {
    pub pattern: NGramPattern,
    pub occurrences: Vec<PatternOccurrence>,
    pub support_by_daemok: BTreeMap<String, usize>,
}

impl PatternEntry {
    pub fn support(&self) -> usize {
        self.occurrences.len()
    }
}

/// Mined patterns sorted by descending support, ties broken by token text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternIndex {
    pub entries: Vec<PatternEntry>,
}

impl PatternIndex {
    pub fn get(&self, pattern: &NGramPattern) -> Option<&PatternEntry> {
        self.entries.iter().find(|e| &e.pattern == pattern)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one pattern length.
    pub fn of_length(&self, n: usize) -> impl Iterator<Item = &PatternEntry> {
        self.entries.iter().filter(move |e| e.pattern.len() == n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiningConfig {
    pub n_values: Vec<usize>,
    pub min_support: usize,
    /// Keep windows that contain a rest token.
    pub allow_rests: bool,
    /// Keep windows whose tokens start in different measures.
    pub allow_measure_crossing: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            n_values: alloc::vec![2, 3, 4, 6],
            min_support: 2,
            allow_rests: true,
            allow_measure_crossing: true,
        }
    }
}

/// Counts every contiguous window of each requested length across all
/// sequences and keeps patterns with at least `min_support` occurrences.
pub fn mine_ngrams(
    sequences: &BTreeMap<String, TokenSequence>,
    config: &MiningConfig,
) -> Result<PatternIndex> {
    if config.n_values.is_empty() {
        return Err(Error::Config("no n-gram lengths requested".into()));
    }
    if let Some(&n) = config.n_values.iter().find(|&&n| n < 2) {
        return Err(Error::Config(format!("n-gram length {n} is below 2")));
    }
    if config.min_support == 0 {
        return Err(Error::Config("min_support must be at least 1".into()));
    }

    let mut n_values = config.n_values.clone();
    n_values.sort_unstable();
    n_values.dedup();

    let longest = sequences.values().map(TokenSequence::len).max().unwrap_or(0);
    let mut found: BTreeMap<Vec<NoteToken>, Vec<PatternOccurrence>> = BTreeMap::new();

    for &n in &n_values {
        if n > longest {
            log::warn!("n = {n} exceeds every sequence length ({longest}); no {n}-grams");
            continue;
        }
        for (daemok, seq) in sequences {
            for start in 0..seq.len().saturating_sub(n - 1) {
                let window = &seq.tokens[start..start + n];
                let contains_rest = window.iter().any(NoteToken::is_rest);
                let crosses_measure = seq.measures[start] != seq.measures[start + n - 1];
                if (contains_rest && !config.allow_rests)
                    || (crosses_measure && !config.allow_measure_crossing)
                {
                    continue;
                }
                let onset = seq.onsets[start];
                found.entry(window.to_vec()).or_default().push(PatternOccurrence {
                    daemok_id: daemok.clone(),
                    start_event_index: start,
                    onset_beats: onset,
                    span_beats: seq.end_of(start + n - 1) - onset,
                    crosses_measure,
                    contains_rest,
                });
            }
        }
    }

    let mut entries: Vec<(String, PatternEntry)> = found
        .into_iter()
        .filter(|(_, occ)| occ.len() >= config.min_support)
        .map(|(tokens, occurrences)| {
            let mut support_by_daemok = BTreeMap::new();
            for o in &occurrences {
                *support_by_daemok.entry(o.daemok_id.clone()).or_insert(0) += 1;
            }
            let pattern = NGramPattern { tokens };
            (
                pattern.text(),
                PatternEntry {
                    pattern,
                    occurrences,
                    support_by_daemok,
                },
            )
        })
        .collect();
    entries.sort_by(|(ta, a), (tb, b)| b.support().cmp(&a.support()).then_with(|| ta.cmp(tb)));

    Ok(PatternIndex {
        entries: entries.into_iter().map(|(_, e)| e).collect(),
    })
}
