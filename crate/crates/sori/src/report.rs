//! JSON and CSV report schemas. Rationals are serialized as `"n/d"` strings
//! in lowest terms (`"3/1"` for integers) so no beat position is rounded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sori_core::f0::FilterConfig;
use sori_core::histogram::{mode_affinity, BinKind, MassUnit, ModeTemplate, PitchHistogram};
use sori_core::patterns::{Contour, PatternIndex, VibratoMetrics};
use sori_core::pitch::{pitch_class_name, Pitch};
use sori_core::score::{NoteEvent, Score};
use sori_core::Beats;

use crate::formats::fmt_decimal;

pub fn beats_text(b: Beats) -> String {
    format!("{}/{}", b.numer(), b.denom())
}

pub fn parse_beats(text: &str) -> Option<Beats> {
    let (n, d) = text.split_once('/')?;
    let d: i64 = d.trim().parse().ok()?;
    (d != 0).then_some(())?;
    Some(Beats::new(n.trim().parse().ok()?, d))
}

/// Pitch name for a semitone bin, pitch-class name for a class bin.
pub fn bin_label(kind: BinKind, bin: i32) -> String {
    match kind {
        BinKind::PitchClass => pitch_class_name(bin.rem_euclid(12) as u8).to_string(),
        BinKind::Semitone => u8::try_from(bin)
            .ok()
            .and_then(|m| Pitch::from_midi(m).ok())
            .map_or_else(|| format!("MIDI {bin}"), |p| p.name()),
    }
}

pub fn bin_kind_name(kind: BinKind) -> &'static str {
    match kind {
        BinKind::Semitone => "semitone",
        BinKind::PitchClass => "pitch_class",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteDump {
    pub daemok_id: String,
    pub divisions: u32,
    pub time_signature: String,
    pub merge_ties: bool,
    pub events: Vec<NoteRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteRecord {
    pub index: usize,
    pub measure: usize,
    pub onset: String,
    pub duration: String,
    /// Spelled pitch, `null` for rests.
    pub pitch: Option<String>,
    pub midi: Option<u8>,
    pub tied_from_previous: bool,
    pub ties_to_next: bool,
}

impl NoteRecord {
    pub fn from_event(index: usize, e: &NoteEvent) -> NoteRecord {
        NoteRecord {
            index,
            measure: e.measure_index,
            onset: beats_text(e.onset_beats),
            duration: beats_text(e.duration_beats),
            pitch: e.pitch().map(Pitch::name),
            midi: e.pitch().map(Pitch::midi),
            tied_from_previous: e.tied_from_previous,
            ties_to_next: e.ties_to_next,
        }
    }
}

pub fn note_dump(score: &Score, events: &[NoteEvent], merge_ties: bool) -> NoteDump {
    let ts = score.time_signature();
    NoteDump {
        daemok_id: score.daemok_id().to_string(),
        divisions: score.divisions(),
        time_signature: format!("{}/{}", ts.numerator(), ts.denominator()),
        merge_ties,
        events: events
            .iter()
            .enumerate()
            .map(|(i, e)| NoteRecord::from_event(i, e))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSettings {
    pub min_confidence: f64,
    pub min_hz: f64,
    pub max_hz: f64,
}

impl From<FilterConfig> for FilterSettings {
    fn from(c: FilterConfig) -> Self {
        FilterSettings {
            min_confidence: c.min_confidence,
            min_hz: c.min_hz,
            max_hz: c.max_hz,
        }
    }
}

impl From<FilterSettings> for FilterConfig {
    fn from(s: FilterSettings) -> Self {
        FilterConfig {
            min_confidence: s.min_confidence,
            min_hz: s.min_hz,
            max_hz: s.max_hz,
        }
    }
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterConfig::default().into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub daemok_id: String,
    pub bin_kind: String,
    pub reference_hz: f64,
    pub filter: FilterSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<HistogramSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<HistogramSeries>,
    pub affinities: Vec<AffinityRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSeries {
    pub unit: String,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_exact: Option<String>,
    pub bins: Vec<BinRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub bin: i32,
    pub label: String,
    pub mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityRecord {
    pub mode: String,
    pub tonic: String,
    pub degrees: Vec<String>,
    pub characteristic: Vec<String>,
    /// `null` when the histogram has no mass.
    pub f0: Option<f64>,
    pub score: Option<f64>,
}

pub fn histogram_series(h: &PitchHistogram) -> HistogramSeries {
    HistogramSeries {
        unit: match h.unit {
            MassUnit::Frames => "frames",
            MassUnit::Beats => "beats",
        }
        .to_string(),
        total: h.total(),
        total_exact: h.exact_total().map(beats_text),
        bins: h
            .masses
            .iter()
            .map(|(&bin, &mass)| BinRecord {
                bin,
                label: bin_label(h.bin_kind, bin),
                mass,
                exact: h.exact.as_ref().and_then(|x| x.get(&bin)).copied().map(beats_text),
            })
            .collect(),
    }
}

pub fn affinity_record(
    template: &ModeTemplate,
    f0: Option<&PitchHistogram>,
    score: Option<&PitchHistogram>,
) -> AffinityRecord {
    let names = |degrees: &[u8]| {
        degrees
            .iter()
            .map(|&d| pitch_class_name((d + template.tonic) % 12).to_string())
            .collect()
    };
    AffinityRecord {
        mode: template.name.clone(),
        tonic: pitch_class_name(template.tonic).to_string(),
        degrees: names(&template.scale_degrees),
        characteristic: names(&template.characteristic),
        f0: f0.and_then(|h| mode_affinity(h, template).ok()),
        score: score.and_then(|h| mode_affinity(h, template).ok()),
    }
}

/// `selected` first, then whichever built-in templates it is not.
pub fn report_templates(selected: &ModeTemplate) -> Vec<ModeTemplate> {
    let mut out = vec![selected.clone()];
    for t in [ModeTemplate::ujo(), ModeTemplate::gyemyeonjo()] {
        if t.name != selected.name {
            out.push(t);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningSettings {
    pub n_values: Vec<usize>,
    pub min_support: usize,
    pub skip_rests: bool,
    pub allow_rests: bool,
    pub allow_measure_crossing: bool,
}

impl Default for MiningSettings {
    fn default() -> Self {
        MiningSettings {
            n_values: vec![2, 3, 4, 6],
            min_support: 2,
            skip_rests: false,
            allow_rests: true,
            allow_measure_crossing: true,
        }
    }
}

impl MiningSettings {
    pub fn core(&self) -> sori_core::patterns::MiningConfig {
        sori_core::patterns::MiningConfig {
            n_values: self.n_values.clone(),
            min_support: self.min_support,
            allow_rests: self.allow_rests,
            allow_measure_crossing: self.allow_measure_crossing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternIndexReport {
    pub config: MiningSettings,
    pub daemok: Vec<String>,
    pub patterns: Vec<PatternRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub pattern: String,
    pub n: usize,
    pub span_beats: String,
    pub support: usize,
    pub support_by_daemok: BTreeMap<String, usize>,
    pub occurrences: Vec<OccurrenceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    pub daemok_id: String,
    pub start_event_index: usize,
    pub onset_beats: String,
    pub span_beats: String,
    pub crosses_measure: bool,
    pub contains_rest: bool,
}

pub fn pattern_index_report(index: &PatternIndex, config: &MiningSettings, daemok: Vec<String>) -> PatternIndexReport {
    PatternIndexReport {
        config: config.clone(),
        daemok,
        patterns: index
            .entries
            .iter()
            .map(|e| PatternRecord {
                pattern: e.pattern.text(),
                n: e.pattern.len(),
                span_beats: beats_text(e.pattern.span_beats()),
                support: e.support(),
                support_by_daemok: e.support_by_daemok.clone(),
                occurrences: e
                    .occurrences
                    .iter()
                    .map(|o| OccurrenceRecord {
                        daemok_id: o.daemok_id.clone(),
                        start_event_index: o.start_event_index,
                        onset_beats: beats_text(o.onset_beats),
                        span_beats: beats_text(o.span_beats),
                        crosses_measure: o.crosses_measure,
                        contains_rest: o.contains_rest,
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Long-format contour table: one row per sample, empty `cents` where the
/// track has no voiced estimate.
pub fn contours_csv(contours: &[Contour]) -> String {
    let mut out = String::from("daemok_id,onset_beats,start_event_index,all_missing,sample,position,cents\n");
    for c in contours {
        let last = c.values.len().saturating_sub(1).max(1) as f64;
        for (j, v) in c.values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.daemok_id,
                beats_text(c.onset_beats),
                c.start_event_index,
                c.all_missing(),
                j,
                fmt_decimal(j as f64 / last, 6, 1),
                v.map(|x| fmt_decimal(x, 3, 1)).unwrap_or_default(),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibratoReport {
    pub pattern: String,
    pub reference_hz: f64,
    pub filter: FilterSettings,
    pub glide_window_s: f64,
    pub occurrences: Vec<VibratoRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibratoRecord {
    pub daemok_id: String,
    pub onset_beats: String,
    pub start_time_s: f64,
    pub end_time_s: f64,
    pub rate_hz: Option<f64>,
    pub depth_cents: Option<f64>,
    pub voiced_fraction: Option<f64>,
    pub onset_glide_cents: Option<f64>,
    /// Why vibrato metrics are missing, if they are.
    pub vibrato_error: Option<String>,
    pub glide_error: Option<String>,
}

impl VibratoRecord {
    pub fn set_vibrato(&mut self, m: sori_core::Result<VibratoMetrics>) {
        match m {
            Ok(m) => {
                self.rate_hz = Some(round_to(m.rate_hz, 6));
                self.depth_cents = Some(round_to(m.depth_cents, 6));
                self.voiced_fraction = Some(round_to(m.voiced_fraction, 6));
            }
            Err(e) => self.vibrato_error = Some(e.to_string()),
        }
    }

    pub fn set_glide(&mut self, g: sori_core::Result<f64>) {
        match g {
            Ok(g) => self.onset_glide_cents = Some(round_to(g, 6)),
            Err(e) => self.glide_error = Some(e.to_string()),
        }
    }
}

/// Rounds to `decimals` places so reports do not expose float noise.
pub fn round_to(x: f64, decimals: i32) -> f64 {
    let k = 10f64.powi(decimals);
    (x * k).round() / k
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beats_text_round_trip() {
        for (n, d) in [(3, 1), (15, 2), (1, 3), (0, 1)] {
            let b = Beats::new(n, d);
            assert_eq!(parse_beats(&beats_text(b)), Some(b));
        }
        assert_eq!(beats_text(Beats::new(4, 2)), "2/1");
        assert_eq!(parse_beats("1/0"), None);
    }

    #[test]
    fn labels() {
        assert_eq!(bin_label(BinKind::Semitone, 74), "D5");
        assert_eq!(bin_label(BinKind::Semitone, 3), "MIDI 3");
        assert_eq!(bin_label(BinKind::PitchClass, 2), "D");
    }

    #[test]
    fn templates_put_selected_first() {
        let t = report_templates(&ModeTemplate::gyemyeonjo());
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].name, ModeTemplate::gyemyeonjo().name);
    }
}
