//! Text and audio input formats: F0 CSV, beat CSV and PCM WAV.

use std::io::Read;

use sori_core::beats::{BeatAnnotation, BeatGrid, JangdanSpec};
use sori_core::f0::{F0Frame, F0Track};

use crate::error::{Error, Result};

pub const F0_HEADER: [&str; 3] = ["time", "frequency", "confidence"];
pub const BEATS_HEADER: [&str; 3] = ["measure", "beat", "time"];

/// Allowed deviation of a frame time from the uniform `t0 + i·hop` grid.
pub const HOP_JITTER_S: f64 = 1e-3;

/// Fixed-point with trailing zeros trimmed down to `min_decimals`.
pub fn fmt_decimal(x: f64, max_decimals: usize, min_decimals: usize) -> String {
    let mut s = format!("{x:.max_decimals$}");
    if let Some(dot) = s.find('.') {
        let keep = dot + 1 + min_decimals;
        while s.len() > keep && s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s.remove(0);
    }
    s
}

fn reader(input: impl Read, format: &'static str, header: [&str; 3]) -> Result<csv::Reader<impl Read>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(input);
    let found = rdr
        .headers()
        .map_err(|e| Error::Format {
            format,
            message: e.to_string(),
        })?
        .clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::Format {
            format,
            message: format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(rdr)
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
    format: &'static str,
    row: usize,
) -> Result<T> {
    let raw = rec
        .get(i)
        .ok_or_else(|| Error::row(format, row, format!("missing `{name}` column")))?;
    raw.parse()
        .map_err(|_| Error::row(format, row, format!("cannot parse {name} `{raw}`")))
}

/// Reads an F0 CSV with header `time,frequency,confidence`. Frequency 0
/// marks an unvoiced frame. Row numbers in errors count data rows from 1.
pub fn read_f0_csv(input: impl Read) -> Result<F0Track> {
    const FMT: &str = "F0 CSV";
    let mut rdr = reader(input, FMT, F0_HEADER)?;
    let mut frames: Vec<F0Frame> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::row(FMT, row, e.to_string()))?;
        let t: f64 = field(&rec, 0, "time", FMT, row)?;
        let hz: f64 = field(&rec, 1, "frequency", FMT, row)?;
        let c: f64 = field(&rec, 2, "confidence", FMT, row)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::row(FMT, row, format!("time {t} must be finite and non-negative")));
        }
        if let Some(prev) = frames.last() {
            if t <= prev.time_s {
                return Err(Error::row(
                    FMT,
                    row,
                    format!("time {t} does not increase (previous {})", prev.time_s),
                ));
            }
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::row(FMT, row, format!("confidence {c} outside [0, 1]")));
        }
        if !(hz.is_finite() && hz >= 0.0) {
            return Err(Error::row(FMT, row, format!("frequency {hz} must be finite and ≥ 0")));
        }
        frames.push(if hz == 0.0 {
            F0Frame::unvoiced(t, c)
        } else {
            F0Frame::voiced(t, hz, c)
        });
    }
    let hop = uniform_hop(&frames)?;
    Ok(F0Track::new(frames, hop)?)
}

/// Hop estimated over the whole track, rounded to the nanosecond; every
/// frame must sit within `HOP_JITTER_S` of `t0 + i·hop`.
fn uniform_hop(frames: &[F0Frame]) -> Result<f64> {
    let n = frames.len();
    if n < 2 {
        return Ok(0.0);
    }
    let t0 = frames[0].time_s;
    let hop = ((frames[n - 1].time_s - t0) / (n - 1) as f64 * 1e9).round() / 1e9;
    for (i, f) in frames.iter().enumerate() {
        let expected = t0 + i as f64 * hop;
        if (f.time_s - expected).abs() > HOP_JITTER_S {
            return Err(Error::row(
                "F0 CSV",
                i + 1,
                format!(
                    "time {} deviates from the uniform {hop} s hop (expected {expected:.6}); gaps or uneven hops are not supported",
                    f.time_s
                ),
            ));
        }
    }
    Ok(hop)
}

pub fn write_f0_csv(track: &F0Track) -> String {
    let mut out = String::from("time,frequency,confidence\n");
    for f in track.frames() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_decimal(f.time_s, 6, 3),
            fmt_decimal(f.f0_hz.unwrap_or(0.0), 4, 1),
            fmt_decimal(f.confidence, 6, 1),
        ));
    }
    out
}

/// Reads a `measure,beat,time` CSV and validates it against `spec`.
pub fn read_beats_csv(input: impl Read, spec: JangdanSpec) -> Result<BeatGrid> {
    const FMT: &str = "beats CSV";
    let mut rdr = reader(input, FMT, BEATS_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::row(FMT, row, e.to_string()))?;
        rows.push(BeatAnnotation {
            measure_index: field(&rec, 0, "measure", FMT, row)?,
            beat_in_measure: field(&rec, 1, "beat", FMT, row)?,
            time_s: field(&rec, 2, "time", FMT, row)?,
        });
    }
    Ok(BeatGrid::new(spec, rows)?)
}

pub fn write_beats_csv(grid: &BeatGrid) -> String {
    let mut out = String::from("measure,beat,time\n");
    for a in grid.annotations() {
        out.push_str(&format!(
            "{},{},{}\n",
            a.measure_index,
            a.beat_in_measure,
            fmt_decimal(a.time_s, 6, 3)
        ));
    }
    out
}

/// Mono samples in [-1, 1] and the sample rate. Accepts 16- and 24-bit
/// integer PCM; multi-channel input is averaged to mono.
pub fn read_wav(input: impl Read) -> Result<(Vec<f64>, u32)> {
    let wav_err = |message: String| Error::Format {
        format: "WAV",
        message,
    };
    let rdr = hound::WavReader::new(input).map_err(|e| wav_err(e.to_string()))?;
    let spec = rdr.spec();
    if spec.sample_format != hound::SampleFormat::Int || !matches!(spec.bits_per_sample, 16 | 24) {
        return Err(wav_err(format!(
            "only 16/24-bit integer PCM is supported, found {}-bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let channels = usize::from(spec.channels);
    let scale = f64::from(1u32 << (spec.bits_per_sample - 1));
    let raw: Vec<i32> = rdr
        .into_samples::<i32>()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| wav_err(e.to_string()))?;
    let mono = raw
        .chunks_exact(channels)
        .map(|frame| frame.iter().map(|&s| f64::from(s)).sum::<f64>() / (channels as f64 * scale))
        .collect();
    Ok((mono, spec.sample_rate))
}
