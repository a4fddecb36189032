//! Melodic pattern mining over tokenized note sequences, and the pitch
//! contours sung for each pattern occurrence.

mod contour;
mod expressive;
mod ngram;
mod token;

pub use contour::{
    cents_series, occurrence_contours, occurrence_segment, CentsSeries, Contour, ContourConfig,
};
pub use expressive::{
    find_post_rest_long_notes, onset_glide, vibrato_metrics, VibratoMetrics,
    DEFAULT_GLIDE_WINDOW_S,
};
pub use ngram::{
    mine_ngrams, MiningConfig, NGramPattern, PatternEntry, PatternIndex, PatternOccurrence,
};
pub use token::{detokenize, tokenize, NoteToken, TokenSequence};
