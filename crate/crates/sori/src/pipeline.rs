//! Manifest-driven end-to-end analysis.
//!
//! Every product is computed in memory first; files are only written once
//! all stages have succeeded, and a failed write removes what was already
//! written. Each output gets a `<name>.prov.json` sidecar with the SHA-256
//! of every input it depends on and the full settings block.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sori_core::beats::{BeatGrid, JangdanSpec};
use sori_core::f0::{filter_track, F0Track, FilterConfig};
use sori_core::histogram::{f0_histogram, score_duration_histogram, BinKind, ModeTemplate, PitchHistogram};
use sori_core::patterns::{
    cents_series, mine_ngrams, occurrence_contours, occurrence_segment, onset_glide, vibrato_metrics, Contour,
    ContourConfig, MiningConfig, NGramPattern, PatternIndex, TokenSequence,
};
use sori_core::score::{NoteEvent, Score};
use sori_core::yin::{estimate_f0_yin, YinConfig};

use crate::error::{Error, Result};
use crate::formats::{read_beats_csv, read_f0_csv, read_wav, write_f0_csv};
use crate::musicxml::parse_musicxml;
use crate::report::{
    affinity_record, beats_text, bin_kind_name, contours_csv, histogram_series, note_dump, pattern_index_report,
    report_templates, to_json, FilterSettings, HistogramReport, MiningSettings, VibratoRecord, VibratoReport,
};
use crate::svg::{render_contour_overlay, render_histogram_figure, FigureSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub settings: Settings,
    #[serde(rename = "daemok")]
    pub daemok: Vec<DaemokInputs>,
}

/// Input files for one daemok; paths are relative to the manifest.
/// Exactly one of `f0` (CSV) and `audio` (WAV) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaemokInputs {
    pub id: String,
    pub score: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<String>,
    pub beats: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinKindSetting {
    Semitone,
    PitchClass,
}

impl From<BinKindSetting> for BinKind {
    fn from(b: BinKindSetting) -> Self {
        match b {
            BinKindSetting::Semitone => BinKind::Semitone,
            BinKindSetting::PitchClass => BinKind::PitchClass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YinSettings {
    pub frame_s: f64,
    pub hop_s: f64,
    pub search_min_hz: f64,
    pub search_max_hz: f64,
    pub threshold: f64,
}

impl Default for YinSettings {
    fn default() -> Self {
        YinSettings {
            frame_s: YinConfig::DEFAULT_FRAME_S,
            hop_s: YinConfig::DEFAULT_HOP_S,
            search_min_hz: YinConfig::DEFAULT_SEARCH_MIN_HZ,
            search_max_hz: YinConfig::DEFAULT_SEARCH_MAX_HZ,
            threshold: YinConfig::DEFAULT_THRESHOLD,
        }
    }
}

impl YinSettings {
    pub fn config(&self, sample_rate: u32) -> YinConfig {
        YinConfig {
            sample_rate,
            frame_s: self.frame_s,
            hop_s: self.hop_s,
            search_min_hz: self.search_min_hz,
            search_max_hz: self.search_max_hz,
            threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Frequency of A4 used for every Hz → cents/MIDI conversion.
    pub reference_hz: f64,
    pub bin_kind: BinKindSetting,
    pub mode: String,
    pub merge_ties: bool,
    pub jangdan: String,
    pub beats_per_measure: usize,
    pub contour_samples: usize,
    pub glide_window_s: f64,
    /// Patterns to extract contours and vibrato for, in token syntax.
    pub patterns: Vec<String>,
    pub figure_width: u32,
    pub figure_height: u32,
    pub filter: FilterSettings,
    pub mining: MiningSettings,
    pub yin: YinSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            reference_hz: 440.0,
            bin_kind: BinKindSetting::Semitone,
            mode: "ujo".into(),
            merge_ties: true,
            jangdan: "joongmori".into(),
            beats_per_measure: 12,
            contour_samples: 200,
            glide_window_s: sori_core::patterns::DEFAULT_GLIDE_WINDOW_S,
            patterns: Vec::new(),
            figure_width: 960,
            figure_height: 480,
            filter: FilterSettings::default(),
            mining: MiningSettings::default(),
            yin: YinSettings::default(),
        }
    }
}

impl Settings {
    pub fn mode_template(&self) -> Result<ModeTemplate> {
        ModeTemplate::by_name(&self.mode)
            .ok_or_else(|| Error::Manifest(format!("unknown mode `{}` (expected ujo or gyemyeonjo)", self.mode)))
    }

    pub fn jangdan(&self) -> Result<JangdanSpec> {
        Ok(JangdanSpec::new(self.jangdan.clone(), self.beats_per_measure)?)
    }

    pub fn filter_config(&self) -> Result<FilterConfig> {
        let f = FilterConfig::from(self.filter);
        f.validate()?;
        Ok(f)
    }

    pub fn mining_config(&self) -> MiningConfig {
        self.mining.core()
    }

    pub fn contour_config(&self) -> ContourConfig {
        ContourConfig {
            samples_per_contour: self.contour_samples,
            reference_hz: self.reference_hz,
        }
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        if m.daemok.is_empty() {
            return Err(Error::Manifest("no [[daemok]] entries".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for d in &m.daemok {
            let safe = !d.id.is_empty()
                && d.id != "patterns"
                && !d.id.starts_with('.')
                && d.id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
            if !safe {
                return Err(Error::Manifest(format!(
                    "daemok id `{}` must be non-empty ASCII letters, digits, '-', '_' or '.'",
                    d.id
                )));
            }
            if !seen.insert(d.id.as_str()) {
                return Err(Error::Manifest(format!("duplicate daemok id `{}`", d.id)));
            }
            if d.f0.is_some() == d.audio.is_some() {
                return Err(Error::Manifest(format!(
                    "daemok `{}` needs exactly one of `f0` or `audio`",
                    d.id
                )));
            }
        }
        Ok(m)
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One input file as recorded in provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub daemok_id: String,
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Loaded and derived data for one daemok.
#[derive(Debug, Clone)]
pub struct DaemokProducts {
    pub daemok_id: String,
    pub inputs: Vec<InputRecord>,
    pub score: Score,
    pub events: Vec<NoteEvent>,
    pub raw_track: F0Track,
    pub track: F0Track,
    pub grid: BeatGrid,
    pub f0_histogram: PitchHistogram,
    pub score_histogram: PitchHistogram,
}

impl DaemokProducts {
    pub fn score_path(&self) -> &str {
        self.input("score")
    }

    pub fn f0_path(&self) -> &str {
        let f0 = self.input("f0");
        if f0.is_empty() {
            self.input("audio")
        } else {
            f0
        }
    }

    pub fn beats_path(&self) -> &str {
        self.input("beats")
    }

    fn input(&self, role: &str) -> &str {
        self.inputs
            .iter()
            .find(|i| i.role == role)
            .map_or("", |i| i.path.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ContourSet {
    pub pattern: NGramPattern,
    pub contours: Vec<Contour>,
    pub vibrato: VibratoReport,
}

#[derive(Debug, Clone)]
pub struct AnalysisBundle {
    pub settings: Settings,
    pub daemok: Vec<DaemokProducts>,
    pub pattern_index: PatternIndex,
    pub contour_sets: Vec<ContourSet>,
    /// Written files relative to the output directory, sidecars included.
    pub files: Vec<PathBuf>,
}

struct Output {
    path: PathBuf,
    stage: &'static str,
    bytes: Vec<u8>,
    inputs: Vec<InputRecord>,
}

#[derive(Serialize)]
struct Provenance<'a> {
    output: String,
    sha256: String,
    stage: &'a str,
    tool: String,
    inputs: &'a [InputRecord],
    settings: &'a Settings,
}

#[derive(Serialize)]
struct BundleSummary<'a> {
    settings: &'a Settings,
    daemok: Vec<BundleDaemok<'a>>,
    patterns: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct BundleDaemok<'a> {
    id: &'a str,
    inputs: &'a [InputRecord],
    events: usize,
    frames: usize,
    voiced_frames: usize,
    measures: usize,
}

fn stage<T>(name: &'static str, daemok: Option<&str>, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        daemok: daemok.map(str::to_string),
        source: Box::new(e),
    })
}

/// Reads the manifest at `manifest_path`, runs every stage and writes the
/// outputs under `out_dir`.
pub fn run_pipeline(manifest_path: &Path, out_dir: &Path) -> Result<AnalysisBundle> {
    let text = stage("manifest", None, read_file(manifest_path))?;
    let text = stage(
        "manifest",
        None,
        String::from_utf8(text).map_err(|e| Error::Manifest(e.to_string())),
    )?;
    let manifest = stage("manifest", None, Manifest::parse(&text))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let (mut bundle, outputs) = analyse(&manifest, base)?;
    bundle.files = stage("write", None, write_outputs(out_dir, &outputs, &bundle.settings))?;
    Ok(bundle)
}

/// All computation, no file output.
fn analyse(manifest: &Manifest, base: &Path) -> Result<(AnalysisBundle, Vec<Output>)> {
    let settings = &manifest.settings;
    let mode = stage("manifest", None, settings.mode_template())?;
    let jangdan = stage("manifest", None, settings.jangdan())?;
    let filter = stage("manifest", None, settings.filter_config())?;
    let patterns: Vec<NGramPattern> = stage(
        "manifest",
        None,
        settings
            .patterns
            .iter()
            .map(|p| NGramPattern::parse(p).map_err(Error::from))
            .collect(),
    )?;

    let mut daemok = Vec::new();
    for d in &manifest.daemok {
        daemok.push(load_daemok(d, base, settings, &jangdan, &filter)?);
    }

    let mut outputs = Vec::new();
    let bin_kind = BinKind::from(settings.bin_kind);
    for d in &daemok {
        let id = Some(d.daemok_id.as_str());
        let dir = PathBuf::from(&d.daemok_id);
        let json = to_json(&note_dump(&d.score, &d.events, settings.merge_ties));
        outputs.push(output(dir.join("notes.json"), "score", json, &d.inputs));
        outputs.push(output(dir.join("f0.filtered.csv"), "filter", write_f0_csv(&d.track), &d.inputs));

        let report = HistogramReport {
            daemok_id: d.daemok_id.clone(),
            bin_kind: bin_kind_name(bin_kind).into(),
            reference_hz: settings.reference_hz,
            filter: settings.filter,
            f0: Some(histogram_series(&d.f0_histogram)),
            score: Some(histogram_series(&d.score_histogram)),
            affinities: report_templates(&mode)
                .iter()
                .map(|t| affinity_record(t, Some(&d.f0_histogram), Some(&d.score_histogram)))
                .collect(),
        };
        outputs.push(output(dir.join("histogram.json"), "histogram", to_json(&report), &d.inputs));
        let spec = FigureSpec {
            width: settings.figure_width,
            height: settings.figure_height,
            ..FigureSpec::histogram_pair(format!("Pitch histograms: {}", d.daemok_id))
        };
        let svg = stage("report", id, render_histogram_figure(&d.f0_histogram, &d.score_histogram, &spec))?;
        outputs.push(output(dir.join("histogram.svg"), "report", svg, &d.inputs));
    }

    let all_inputs: Vec<InputRecord> = daemok.iter().flat_map(|d| d.inputs.clone()).collect();
    let sequences: BTreeMap<String, TokenSequence> = daemok
        .iter()
        .map(|d| {
            (
                d.daemok_id.clone(),
                TokenSequence::from_events(&d.events, settings.mining.skip_rests),
            )
        })
        .collect();
    let index = stage("patterns", None, mine_ngrams(&sequences, &settings.mining_config()).map_err(Error::from))?;
    let ids: Vec<String> = daemok.iter().map(|d| d.daemok_id.clone()).collect();
    let index_json = to_json(&pattern_index_report(&index, &settings.mining, ids));
    outputs.push(output("patterns.json".into(), "patterns", index_json, &all_inputs));

    let grids: BTreeMap<String, BeatGrid> = daemok.iter().map(|d| (d.daemok_id.clone(), d.grid.clone())).collect();
    let tracks: BTreeMap<String, F0Track> = daemok.iter().map(|d| (d.daemok_id.clone(), d.track.clone())).collect();
    let mut contour_sets = Vec::new();
    for (k, pattern) in patterns.iter().enumerate() {
        // Occurrences of the requested pattern regardless of the index's
        // support threshold or n values.
        let lookup = MiningConfig {
            n_values: vec![pattern.len()],
            min_support: 1,
            ..settings.mining_config()
        };
        let own = stage("contours", None, mine_ngrams(&sequences, &lookup).map_err(Error::from))?;
        let set = stage(
            "contours",
            None,
            pattern_products(pattern, &own, &grids, &tracks, settings),
        )?;
        let dir = PathBuf::from("patterns").join(format!("pattern-{}", k + 1));
        outputs.push(output(dir.join("contours.csv"), "contours", contours_csv(&set.contours), &all_inputs));
        let spec = FigureSpec {
            width: settings.figure_width,
            height: settings.figure_height,
            ..FigureSpec::contour_overlay(format!("F0 contours: {}", pattern.text()))
        };
        let svg = stage("report", None, render_contour_overlay(&set.contours, &spec))?;
        outputs.push(output(dir.join("contours.svg"), "report", svg, &all_inputs));
        outputs.push(output(dir.join("vibrato.json"), "vibrato", to_json(&set.vibrato), &all_inputs));
        contour_sets.push(set);
    }

    let summary = BundleSummary {
        settings,
        daemok: daemok
            .iter()
            .map(|d| BundleDaemok {
                id: &d.daemok_id,
                inputs: &d.inputs,
                events: d.events.len(),
                frames: d.track.len(),
                voiced_frames: d.track.voiced_count(),
                measures: d.score.measures().len(),
            })
            .collect(),
        patterns: patterns.iter().map(NGramPattern::text).collect(),
        outputs: outputs.iter().map(|o| path_text(&o.path)).collect(),
    };
    outputs.push(output("bundle.json".into(), "report", to_json(&summary), &all_inputs));

    Ok((
        AnalysisBundle {
            settings: settings.clone(),
            daemok,
            pattern_index: index,
            contour_sets,
            files: Vec::new(),
        },
        outputs,
    ))
}

fn output(path: PathBuf, stage: &'static str, text: String, inputs: &[InputRecord]) -> Output {
    Output {
        path,
        stage,
        bytes: text.into_bytes(),
        inputs: inputs.to_vec(),
    }
}

/// Forward slashes on every platform so provenance is byte-stable.
fn path_text(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn load_daemok(
    d: &DaemokInputs,
    base: &Path,
    settings: &Settings,
    jangdan: &JangdanSpec,
    filter: &FilterConfig,
) -> Result<DaemokProducts> {
    let id = Some(d.id.as_str());
    let mut inputs = Vec::new();
    let mut load = |role: &str, rel: &str| -> Result<Vec<u8>> {
        let bytes = stage("load", id, read_file(&base.join(rel)))?;
        inputs.push(InputRecord {
            daemok_id: d.id.clone(),
            role: role.into(),
            path: rel.into(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    };
    let score_bytes = load("score", &d.score)?;
    let f0_bytes = match (&d.f0, &d.audio) {
        (Some(p), _) => load("f0", p)?,
        (None, Some(p)) => load("audio", p)?,
        (None, None) => unreachable!("manifest validation requires f0 or audio"),
    };
    let beats_bytes = load("beats", &d.beats)?;

    let score = stage("score", id, parse_musicxml(&score_bytes, &d.id))?;
    let events = stage("score", id, score.note_sequence(settings.merge_ties).map_err(Error::from))?;
    let raw_track = if d.f0.is_some() {
        stage("f0", id, read_f0_csv(f0_bytes.as_slice()))?
    } else {
        let (samples, sr) = stage("f0", id, read_wav(f0_bytes.as_slice()))?;
        stage("f0", id, estimate_f0_yin(&samples, &settings.yin.config(sr)).map_err(Error::from))?
    };
    let track = filter_track(&raw_track, filter);
    let grid = stage("beats", id, read_beats_csv(beats_bytes.as_slice(), jangdan.clone()))?;
    let bin_kind = BinKind::from(settings.bin_kind);
    let f0_hist = stage(
        "histogram",
        id,
        f0_histogram(&track, settings.reference_hz, bin_kind).map_err(Error::from),
    )?;
    let score_hist = score_duration_histogram(&events, bin_kind);
    Ok(DaemokProducts {
        daemok_id: d.id.clone(),
        inputs,
        score,
        events,
        raw_track,
        track,
        grid,
        f0_histogram: f0_hist,
        score_histogram: score_hist,
    })
}

/// Contours and per-occurrence vibrato/glide for one pattern.
pub fn pattern_products(
    pattern: &NGramPattern,
    index: &PatternIndex,
    grids: &BTreeMap<String, BeatGrid>,
    tracks: &BTreeMap<String, F0Track>,
    settings: &Settings,
) -> Result<ContourSet> {
    let contours = occurrence_contours(index, pattern, grids, tracks, &settings.contour_config())?;
    let mut records = Vec::new();
    if let Some(entry) = index.get(pattern) {
        for occ in &entry.occurrences {
            let segment = occurrence_segment(occ, grids, tracks)?;
            let series = cents_series(&segment, settings.reference_hz)?;
            let mut r = VibratoRecord {
                daemok_id: occ.daemok_id.clone(),
                onset_beats: beats_text(occ.onset_beats),
                start_time_s: crate::report::round_to(segment.start_time_s, 6),
                end_time_s: crate::report::round_to(segment.end_time_s, 6),
                rate_hz: None,
                depth_cents: None,
                voiced_fraction: None,
                onset_glide_cents: None,
                vibrato_error: None,
                glide_error: None,
            };
            r.set_vibrato(vibrato_metrics(&series));
            r.set_glide(onset_glide(&series, settings.glide_window_s));
            records.push(r);
        }
    }
    Ok(ContourSet {
        pattern: pattern.clone(),
        contours,
        vibrato: VibratoReport {
            pattern: pattern.text(),
            reference_hz: settings.reference_hz,
            filter: settings.filter,
            glide_window_s: settings.glide_window_s,
            occurrences: records,
        },
    })
}

/// Writes outputs and sidecars; on any failure removes every file and
/// directory this call created.
fn write_outputs(out_dir: &Path, outputs: &[Output], settings: &Settings) -> Result<Vec<PathBuf>> {
    let mut created_files: Vec<PathBuf> = Vec::new();
    let mut created_dirs: Vec<PathBuf> = Vec::new();
    let result = (|| {
        let mut written = Vec::new();
        for o in outputs {
            let rel_sidecar = sidecar_path(&o.path);
            let prov = Provenance {
                output: path_text(&o.path),
                sha256: sha256_hex(&o.bytes),
                stage: o.stage,
                tool: format!("sori {}", env!("CARGO_PKG_VERSION")),
                inputs: &o.inputs,
                settings,
            };
            for (rel, bytes) in [(&o.path, o.bytes.clone()), (&rel_sidecar, to_json(&prov).into_bytes())] {
                let full = out_dir.join(rel);
                if let Some(parent) = full.parent() {
                    create_dirs(parent, &mut created_dirs)?;
                }
                fs::write(&full, bytes).map_err(|e| Error::io(&full, e))?;
                created_files.push(full);
                written.push(rel.clone());
            }
        }
        Ok(written)
    })();
    if result.is_err() {
        for f in created_files.iter().rev() {
            let _ = fs::remove_file(f);
        }
        for d in created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
    result
}

fn create_dirs(dir: &Path, created: &mut Vec<PathBuf>) -> Result<()> {
    let mut missing = Vec::new();
    let mut cur = Some(dir);
    while let Some(d) = cur {
        if d.as_os_str().is_empty() || d.exists() {
            break;
        }
        missing.push(d.to_path_buf());
        cur = d.parent();
    }
    for d in missing.into_iter().rev() {
        fs::create_dir(&d).map_err(|e| Error::io(&d, e))?;
        created.push(d);
    }
    Ok(())
}

pub fn sidecar_path(p: &Path) -> PathBuf {
    let mut name = p.file_name().unwrap_or_default().to_os_string();
    name.push(".prov.json");
    p.with_file_name(name)
}
