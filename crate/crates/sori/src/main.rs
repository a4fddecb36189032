use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sori::error::{Error, Result};
use sori::formats::{read_beats_csv, read_f0_csv, read_wav, write_beats_csv, write_f0_csv};
use sori::musicxml::parse_musicxml;
use sori::pipeline::{pattern_products, read_file, run_pipeline, Manifest, Settings, YinSettings};
use sori::report::{
    affinity_record, bin_kind_name, contours_csv, histogram_series, note_dump, pattern_index_report,
    report_templates, to_json, HistogramReport, MiningSettings,
};
use sori::svg::{render_contour_overlay, render_histogram_figure, FigureSpec};
use sori_core::beats::{BeatGrid, JangdanSpec};
use sori_core::f0::{filter_track, F0Track, FilterConfig};
use sori_core::histogram::{f0_histogram, score_duration_histogram, BinKind, ModeTemplate, PitchHistogram};
use sori_core::patterns::{mine_ngrams, MiningConfig, NGramPattern, TokenSequence};
use sori_core::yin::estimate_f0_yin;

/// Pansori vocal analysis: score parsing, F0 tracks, beat grids,
/// pitch histograms, n-gram patterns and vibrato metrics.
#[derive(Parser)]
#[command(name = "sori", version)]
struct Cli {
    /// Directory that relative `--out` paths (and `run` outputs) go into.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Output format, for commands that offer more than one.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score operations.
    #[command(subcommand)]
    Score(ScoreCmd),
    /// F0 track extraction, import and filtering.
    #[command(subcommand)]
    F0(F0Cmd),
    /// Beat annotation checks.
    #[command(subcommand)]
    Beats(BeatsCmd),
    /// Pitch histograms of one daemok with mode affinities.
    Histogram(HistogramArgs),
    /// N-gram mining, contours and vibrato.
    #[command(subcommand)]
    Patterns(PatternsCmd),
    /// Run the full pipeline from a manifest.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum ScoreCmd {
    /// Decode a MusicXML file and dump its note events (json or csv).
    Dump {
        #[arg(long = "in")]
        input: PathBuf,
        /// Daemok id; defaults to the file stem.
        #[arg(long)]
        id: Option<String>,
        /// Merge tie chains into single events.
        #[arg(long)]
        merge_ties: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct FilterArgs {
    #[arg(long, default_value_t = 0.6)]
    min_conf: f64,
    #[arg(long, default_value_t = 350.0)]
    min_hz: f64,
    #[arg(long, default_value_t = 1000.0)]
    max_hz: f64,
}

impl FilterArgs {
    fn config(&self) -> Result<FilterConfig> {
        let c = FilterConfig {
            min_confidence: self.min_conf,
            min_hz: self.min_hz,
            max_hz: self.max_hz,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum F0Cmd {
    /// Estimate F0 from a WAV file with YIN.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        hop: f64,
        #[arg(long, default_value_t = 0.046)]
        frame: f64,
        #[arg(long, default_value_t = 100.0)]
        search_min_hz: f64,
        #[arg(long, default_value_t = 1600.0)]
        search_max_hz: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate an F0 CSV and re-emit it normalized.
    Import {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drop low-confidence and out-of-range frames (kept as unvoiced).
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BeatsCmd {
    /// Check a `measure,beat,time` CSV against the jangdan.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 12)]
        beats_per_measure: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Bins {
    Semitone,
    PitchClass,
}

#[derive(Args)]
struct HistogramArgs {
    #[arg(long)]
    score: Option<PathBuf>,
    #[arg(long)]
    f0: Option<PathBuf>,
    #[arg(long, default_value = "ujo")]
    mode: String,
    #[arg(long, value_enum, default_value_t = Bins::Semitone)]
    bins: Bins,
    /// Frequency of A4.
    #[arg(long, default_value_t = 440.0)]
    reference_hz: f64,
    #[command(flatten)]
    filter: FilterArgs,
    /// Use the F0 CSV as-is instead of applying the filter.
    #[arg(long)]
    no_filter: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the side-by-side bar chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct DaemokSource {
    /// Pipeline manifest supplying scores, F0 and beats for every daemok.
    #[arg(long, conflicts_with_all = ["score", "f0", "beats"])]
    manifest: Option<PathBuf>,
    #[arg(long, requires_all = ["f0", "beats"])]
    score: Option<PathBuf>,
    #[arg(long)]
    f0: Option<PathBuf>,
    #[arg(long)]
    beats: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
}

#[derive(Subcommand)]
enum PatternsCmd {
    /// Mine n-grams across every MusicXML file in a directory.
    Mine {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,6")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        min_support: usize,
        /// Drop rests before tokenizing.
        #[arg(long)]
        skip_rests: bool,
        /// Discard windows containing a rest.
        #[arg(long)]
        no_rests: bool,
        /// Discard windows spanning a barline.
        #[arg(long)]
        within_measures: bool,
        /// Keep tie chains as separate tokens.
        #[arg(long)]
        no_merge_ties: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Beat-aligned F0 contours of every occurrence of a pattern.
    Contours {
        #[arg(long)]
        pattern: String,
        #[command(flatten)]
        source: DaemokSource,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the overlay figure.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Vibrato rate/depth and onset glide per occurrence of a pattern.
    Vibrato {
        #[arg(long)]
        pattern: String,
        #[command(flatten)]
        source: DaemokSource,
        #[arg(long, default_value_t = sori_core::patterns::DEFAULT_GLIDE_WINDOW_S)]
        glide_window: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    daemok: Option<&'a str>,
}

fn print_error(kind: &str, message: String, stage: Option<&str>, daemok: Option<&str>) {
    let report = ErrorReport {
        error: ErrorBody {
            kind,
            message,
            stage,
            daemok,
        },
    };
    let json = serde_json::to_string(&report).unwrap_or_else(|_| "{\"error\":{}}".into());
    eprintln!("{json}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            print_error("usage", e.render().to_string().trim().to_string(), None, None);
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (stage, daemok) = match &e {
                Error::Stage { stage, daemok, .. } => (Some(*stage), daemok.as_deref()),
                _ => (None, None),
            };
            print_error(e.kind(), e.to_string(), stage, daemok);
            ExitCode::FAILURE
        }
    }
}

struct Sink<'a> {
    out_dir: Option<&'a Path>,
}

impl Sink<'_> {
    fn resolve(&self, path: &Path) -> PathBuf {
        match self.out_dir {
            Some(d) if path.is_relative() => d.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Writes to `path` (under `--out-dir` when relative) or stdout.
    fn emit(&self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => {
                let full = self.resolve(p);
                if let Some(parent) = full.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent).map_err(|e| Error::Io {
                        path: parent.to_path_buf(),
                        source: e,
                    })?;
                }
                fs::write(&full, text).map_err(|e| Error::Io { path: full, source: e })
            }
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
        }
    }
}

fn pick_format(requested: Option<Format>, allowed: &[Format], command: &str) -> Result<Format> {
    match requested {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(Error::Format {
            format: "command line",
            message: format!(
                "`{command}` does not produce {}; choose one of {}",
                f.name(),
                allowed.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "daemok".into())
}

fn load_score(path: &Path, id: &str) -> Result<sori_core::score::Score> {
    parse_musicxml(&read_file(path)?, id)
}

fn load_f0(path: &Path) -> Result<F0Track> {
    read_f0_csv(read_file(path)?.as_slice())
}

fn load_beats(path: &Path, beats_per_measure: usize) -> Result<BeatGrid> {
    let spec = JangdanSpec::new("joongmori", beats_per_measure)?;
    read_beats_csv(read_file(path)?.as_slice(), spec)
}

fn f0_json(track: &F0Track) -> String {
    #[derive(Serialize)]
    struct Frame {
        time_s: f64,
        f0_hz: Option<f64>,
        confidence: f64,
    }
    #[derive(Serialize)]
    struct Track {
        hop_s: f64,
        frames: usize,
        voiced_frames: usize,
        data: Vec<Frame>,
    }
    to_json(&Track {
        hop_s: track.hop_s(),
        frames: track.len(),
        voiced_frames: track.voiced_count(),
        data: track
            .frames()
            .iter()
            .map(|f| Frame {
                time_s: f.time_s,
                f0_hz: f.f0_hz,
                confidence: f.confidence,
            })
            .collect(),
    })
}

fn emit_track(sink: &Sink, format: Option<Format>, out: Option<&Path>, track: &F0Track, cmd: &str) -> Result<()> {
    let text = match pick_format(format, &[Format::Csv, Format::Json], cmd)? {
        Format::Json => f0_json(track),
        _ => write_f0_csv(track),
    };
    sink.emit(out, &text)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let sink = Sink {
        out_dir: cli.out_dir.as_deref(),
    };
    match &cli.command {
        Command::Score(ScoreCmd::Dump {
            input,
            id,
            merge_ties,
            out,
        }) => {
            let id = id.clone().unwrap_or_else(|| stem(input));
            let score = load_score(input, &id)?;
            let events = score.note_sequence(*merge_ties)?;
            let dump = note_dump(&score, &events, *merge_ties);
            let text = match pick_format(cli.format, &[Format::Json, Format::Csv], "score dump")? {
                Format::Csv => {
                    let mut s = String::from("index,measure,onset,duration,pitch,midi,tied_from_previous,ties_to_next\n");
                    for e in &dump.events {
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            e.index,
                            e.measure,
                            e.onset,
                            e.duration,
                            e.pitch.as_deref().unwrap_or("R"),
                            e.midi.map(|m| m.to_string()).unwrap_or_default(),
                            e.tied_from_previous,
                            e.ties_to_next
                        ));
                    }
                    s
                }
                _ => to_json(&dump),
            };
            sink.emit(out.as_deref(), &text)
        }
        Command::F0(F0Cmd::Extract {
            input,
            hop,
            frame,
            search_min_hz,
            search_max_hz,
            out,
        }) => {
            let (samples, sr) = read_wav(read_file(input)?.as_slice())?;
            let settings = YinSettings {
                frame_s: *frame,
                hop_s: *hop,
                search_min_hz: *search_min_hz,
                search_max_hz: *search_max_hz,
                ..YinSettings::default()
            };
            let track = estimate_f0_yin(&samples, &settings.config(sr))?;
            emit_track(&sink, cli.format, out.as_deref(), &track, "f0 extract")
        }
        Command::F0(F0Cmd::Import { input, out }) => {
            let track = load_f0(input)?;
            emit_track(&sink, cli.format, out.as_deref(), &track, "f0 import")
        }
        Command::F0(F0Cmd::Filter { input, filter, out }) => {
            let track = filter_track(&load_f0(input)?, &filter.config()?);
            emit_track(&sink, cli.format, out.as_deref(), &track, "f0 filter")
        }
        Command::Beats(BeatsCmd::Validate {
            input,
            beats_per_measure,
            out,
        }) => {
            let grid = load_beats(input, *beats_per_measure)?;
            let text = match pick_format(cli.format, &[Format::Json, Format::Csv], "beats validate")? {
                Format::Csv => write_beats_csv(&grid),
                _ => {
                    #[derive(Serialize)]
                    struct Summary {
                        valid: bool,
                        beats_per_measure: usize,
                        measures: usize,
                        beats: usize,
                        first_time_s: f64,
                        last_time_s: f64,
                    }
                    to_json(&Summary {
                        valid: true,
                        beats_per_measure: *beats_per_measure,
                        measures: grid.measure_count(),
                        beats: grid.annotations().len(),
                        first_time_s: grid.first_time(),
                        last_time_s: grid.last_time(),
                    })
                }
            };
            sink.emit(out.as_deref(), &text)
        }
        Command::Histogram(args) => histogram(cli, &sink, args),
        Command::Patterns(cmd) => patterns(cli, &sink, cmd),
        Command::Run(RunArgs { manifest }) => {
            let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            let bundle = run_pipeline(manifest, &out_dir)?;
            #[derive(Serialize)]
            struct RunSummary {
                out_dir: String,
                daemok: Vec<String>,
                files: Vec<String>,
            }
            let summary = RunSummary {
                out_dir: out_dir.display().to_string(),
                daemok: bundle.daemok.iter().map(|d| d.daemok_id.clone()).collect(),
                files: bundle.files.iter().map(|f| f.display().to_string()).collect(),
            };
            sink.emit(None, &to_json(&summary))
        }
    }
}

fn histogram(cli: &Cli, sink: &Sink, args: &HistogramArgs) -> Result<()> {
    if args.score.is_none() && args.f0.is_none() {
        return Err(Error::Format {
            format: "command line",
            message: "histogram needs --score, --f0 or both".into(),
        });
    }
    let bin_kind = match args.bins {
        Bins::Semitone => BinKind::Semitone,
        Bins::PitchClass => BinKind::PitchClass,
    };
    let mode = ModeTemplate::by_name(&args.mode).ok_or_else(|| Error::Format {
        format: "command line",
        message: format!("unknown mode `{}` (expected ujo or gyemyeonjo)", args.mode),
    })?;
    let filter = args.filter.config()?;
    let id = args
        .score
        .as_deref()
        .or(args.f0.as_deref())
        .map(stem)
        .unwrap_or_default();
    let score_hist = match &args.score {
        Some(p) => Some(score_duration_histogram(&load_score(p, &id)?.note_sequence(false)?, bin_kind)),
        None => None,
    };
    let f0_hist = match &args.f0 {
        Some(p) => {
            let raw = load_f0(p)?;
            let track = if args.no_filter { raw } else { filter_track(&raw, &filter) };
            Some(f0_histogram(&track, args.reference_hz, bin_kind)?)
        }
        None => None,
    };
    let report = HistogramReport {
        daemok_id: id.clone(),
        bin_kind: bin_kind_name(bin_kind).into(),
        reference_hz: args.reference_hz,
        filter: filter.into(),
        f0: f0_hist.as_ref().map(histogram_series),
        score: score_hist.as_ref().map(histogram_series),
        affinities: report_templates(&mode)
            .iter()
            .map(|t| affinity_record(t, f0_hist.as_ref(), score_hist.as_ref()))
            .collect(),
    };
    let figure = || {
        let empty = |unit| PitchHistogram::empty(bin_kind, unit);
        let f0 = f0_hist.clone().unwrap_or_else(|| empty(sori_core::histogram::MassUnit::Frames));
        let sc = score_hist.clone().unwrap_or_else(|| empty(sori_core::histogram::MassUnit::Beats));
        render_histogram_figure(&f0, &sc, &FigureSpec::histogram_pair(format!("Pitch histograms: {id}")))
    };
    match pick_format(cli.format, &[Format::Json, Format::Svg], "histogram")? {
        Format::Svg => sink.emit(args.out.as_deref(), &figure()?)?,
        _ => sink.emit(args.out.as_deref(), &to_json(&report))?,
    }
    if let Some(svg) = &args.svg {
        sink.emit(Some(svg), &figure()?)?;
    }
    Ok(())
}

struct Loaded {
    settings: Settings,
    sequences: BTreeMap<String, TokenSequence>,
    grids: BTreeMap<String, BeatGrid>,
    tracks: BTreeMap<String, F0Track>,
}

/// Scores, filtered tracks and grids from either a manifest or one
/// `--score/--f0/--beats` trio.
fn load_sources(source: &DaemokSource) -> Result<Loaded> {
    let (settings, entries) = if let Some(m) = &source.manifest {
        let text = String::from_utf8(read_file(m)?).map_err(|e| Error::Manifest(e.to_string()))?;
        let manifest = Manifest::parse(&text)?;
        let base = m.parent().unwrap_or(Path::new(".")).to_path_buf();
        let entries = manifest
            .daemok
            .iter()
            .map(|d| {
                let f0 = d.f0.as_ref().ok_or_else(|| {
                    Error::Manifest(format!("daemok `{}`: pattern commands need an F0 CSV, not audio", d.id))
                })?;
                Ok((d.id.clone(), base.join(&d.score), base.join(f0), base.join(&d.beats)))
            })
            .collect::<Result<Vec<_>>>()?;
        (manifest.settings, entries)
    } else {
        match (&source.score, &source.f0, &source.beats) {
            (Some(s), Some(f), Some(b)) => {
                let id = source.id.clone().unwrap_or_else(|| stem(s));
                (Settings::default(), vec![(id, s.clone(), f.clone(), b.clone())])
            }
            _ => {
                return Err(Error::Format {
                    format: "command line",
                    message: "give --manifest, or all of --score, --f0 and --beats".into(),
                })
            }
        }
    };
    let filter = settings.filter_config()?;
    let jangdan = settings.jangdan()?;
    let mut loaded = Loaded {
        settings,
        sequences: BTreeMap::new(),
        grids: BTreeMap::new(),
        tracks: BTreeMap::new(),
    };
    for (id, score, f0, beats) in entries {
        let events = load_score(&score, &id)?.note_sequence(loaded.settings.merge_ties)?;
        loaded.sequences.insert(
            id.clone(),
            TokenSequence::from_events(&events, loaded.settings.mining.skip_rests),
        );
        loaded.tracks.insert(id.clone(), filter_track(&load_f0(&f0)?, &filter));
        let grid = read_beats_csv(read_file(&beats)?.as_slice(), jangdan.clone())?;
        loaded.grids.insert(id, grid);
    }
    Ok(loaded)
}

fn pattern_set(pattern: &str, source: &DaemokSource, tweak: impl FnOnce(&mut Settings)) -> Result<sori::pipeline::ContourSet> {
    let pattern = NGramPattern::parse(pattern)?;
    let mut loaded = load_sources(source)?;
    tweak(&mut loaded.settings);
    let cfg = MiningConfig {
        n_values: vec![pattern.len()],
        min_support: 1,
        ..loaded.settings.mining_config()
    };
    let index = mine_ngrams(&loaded.sequences, &cfg)?;
    pattern_products(&pattern, &index, &loaded.grids, &loaded.tracks, &loaded.settings)
}

fn patterns(cli: &Cli, sink: &Sink, cmd: &PatternsCmd) -> Result<()> {
    match cmd {
        PatternsCmd::Mine {
            scores,
            n,
            min_support,
            skip_rests,
            no_rests,
            within_measures,
            no_merge_ties,
            out,
        } => {
            pick_format(cli.format, &[Format::Json], "patterns mine")?;
            let mut files: Vec<PathBuf> = fs::read_dir(scores)
                .map_err(|e| Error::Io {
                    path: scores.clone(),
                    source: e,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file()
                        && matches!(
                            p.extension().and_then(|e| e.to_str()),
                            Some("musicxml") | Some("xml")
                        )
                })
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(Error::Format {
                    format: "command line",
                    message: format!("no .musicxml or .xml files in {}", scores.display()),
                });
            }
            let mut sequences = BTreeMap::new();
            for f in &files {
                let id = stem(f);
                let events = load_score(f, &id)?.note_sequence(!no_merge_ties)?;
                if sequences
                    .insert(id.clone(), TokenSequence::from_events(&events, *skip_rests))
                    .is_some()
                {
                    return Err(Error::Format {
                        format: "command line",
                        message: format!("two score files share the daemok id `{id}`"),
                    });
                }
            }
            let settings = MiningSettings {
                n_values: n.clone(),
                min_support: *min_support,
                skip_rests: *skip_rests,
                allow_rests: !no_rests,
                allow_measure_crossing: !within_measures,
            };
            let index = mine_ngrams(&sequences, &settings.core())?;
            let report = pattern_index_report(&index, &settings, sequences.keys().cloned().collect());
            sink.emit(out.as_deref(), &to_json(&report))
        }
        PatternsCmd::Contours {
            pattern,
            source,
            samples,
            out,
            svg,
        } => {
            let set = pattern_set(pattern, source, |s| s.contour_samples = *samples)?;
            let figure = || {
                render_contour_overlay(
                    &set.contours,
                    &FigureSpec::contour_overlay(format!("F0 contours: {}", set.pattern.text())),
                )
            };
            match pick_format(cli.format, &[Format::Csv, Format::Svg], "patterns contours")? {
                Format::Svg => sink.emit(out.as_deref(), &figure()?)?,
                _ => sink.emit(out.as_deref(), &contours_csv(&set.contours))?,
            }
            if let Some(p) = svg {
                sink.emit(Some(p), &figure()?)?;
            }
            Ok(())
        }
        PatternsCmd::Vibrato {
            pattern,
            source,
            glide_window,
            out,
        } => {
            pick_format(cli.format, &[Format::Json], "patterns vibrato")?;
            let set = pattern_set(pattern, source, |s| s.glide_window_s = *glide_window)?;
            sink.emit(out.as_deref(), &to_json(&set.vibrato))
        }
    }
}
