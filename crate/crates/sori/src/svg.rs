//! Deterministic SVG figures. Output depends only on the inputs: fixed
//! number formatting, generic font families, no timestamps or ids.

use std::collections::BTreeSet;
use std::fmt::Write;

use sori_core::histogram::PitchHistogram;
use sori_core::patterns::Contour;

use crate::error::{Error, Result};
use crate::formats::fmt_decimal;
use crate::report::bin_label;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const F0_COLOR: &str = "#4c72b0";
const SCORE_COLOR: &str = "#dd8452";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    HistogramPair,
    ContourOverlay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub width: u32,
    pub height: u32,
    pub title: String,
    /// Histogram pair: the F0 and score series names. Contour overlay:
    /// optional per-contour legend entries (defaults to daemok and onset).
    pub series_labels: Vec<String>,
}

impl FigureSpec {
    pub fn histogram_pair(title: impl Into<String>) -> FigureSpec {
        FigureSpec {
            kind: FigureKind::HistogramPair,
            width: 960,
            height: 480,
            title: title.into(),
            series_labels: vec!["F0 frames".into(), "Score durations".into()],
        }
    }

    pub fn contour_overlay(title: impl Into<String>) -> FigureSpec {
        FigureSpec {
            kind: FigureKind::ContourOverlay,
            width: 960,
            height: 480,
            title: title.into(),
            series_labels: Vec::new(),
        }
    }

    fn check(&self, kind: FigureKind) -> Result<()> {
        let bad = |m: &str| Err(Error::Format {
            format: "figure spec",
            message: m.to_string(),
        });
        if self.kind != kind {
            return bad("figure kind does not match the renderer");
        }
        if self.width == 0 || self.height == 0 {
            return bad("figure dimensions must be positive");
        }
        if kind == FigureKind::HistogramPair && self.series_labels.len() != 2 {
            return bad("a histogram pair needs exactly two series labels");
        }
        Ok(())
    }
}

fn num(x: f64) -> String {
    fmt_decimal(x, 2, 0)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(spec: &FigureSpec) -> Canvas {
        let mut out = String::new();
        let (w, h) = (spec.width, spec.height);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<g class="background"><path d="M0 0H{w}V{h}H0Z" fill="white"/></g>"#);
        let mut c = Canvas { out };
        c.text(f64::from(w) / 2.0, 24.0, "middle", "title", &spec.title, Some(16));
        c
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, class: &str, text: &str, size: Option<u32>) {
        let size = size.map(|s| format!(r#" font-size="{s}""#)).unwrap_or_default();
        let _ = writeln!(
            self.out,
            r#"<text class="{class}" x="{}" y="{}" text-anchor="{anchor}"{size}>{}</text>"#,
            num(x),
            num(y),
            escape(text)
        );
    }

    fn line(&mut self, class: &str, (x1, y1): (f64, f64), (x2, y2): (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.out,
            r#"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(width)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

struct Plot {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Plot {
    fn new(spec: &FigureSpec, right_margin: f64) -> Plot {
        let (left, top, bottom) = (70.0, 48.0, 70.0);
        Plot {
            left,
            top,
            width: (f64::from(spec.width) - left - right_margin).max(10.0),
            height: (f64::from(spec.height) - top - bottom).max(10.0),
        }
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }

    fn axes(&self, c: &mut Canvas, x_label: &str, y_label: &str) {
        c.line("axis", (self.left, self.bottom()), (self.left + self.width, self.bottom()), "black", 1.0);
        c.line("axis", (self.left, self.top), (self.left, self.bottom()), "black", 1.0);
        c.text(self.left + self.width / 2.0, self.bottom() + 58.0, "middle", "axis-label", x_label, None);
        let (x, y) = (18.0, self.top + self.height / 2.0);
        let _ = writeln!(
            c.out,
            r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
            num(x),
            num(y),
            num(x),
            num(y),
            escape(y_label)
        );
    }

    fn no_data(&self, c: &mut Canvas) {
        c.text(self.left + self.width / 2.0, self.top + self.height / 2.0, "middle", "no-data", "no data", Some(14));
    }

    fn y_ticks(&self, c: &mut Canvas, lo: f64, hi: f64, fmt: impl Fn(f64) -> String) {
        for k in 0..=4 {
            let v = lo + (hi - lo) * f64::from(k) / 4.0;
            let y = self.bottom() - self.height * f64::from(k) / 4.0;
            c.line("tick", (self.left - 4.0, y), (self.left, y), "black", 1.0);
            c.text(self.left - 7.0, y + 4.0, "end", "tick-label", &fmt(v), Some(10));
        }
    }
}

/// Side-by-side bars per pitch bin: F0 frame share next to notated
/// duration share. Each series is normalized by its own total so the two
/// are comparable; data bars are the only `rect` elements.
pub fn render_histogram_figure(f0: &PitchHistogram, score: &PitchHistogram, spec: &FigureSpec) -> Result<String> {
    spec.check(FigureKind::HistogramPair)?;
    if f0.bin_kind != score.bin_kind {
        return Err(Error::IncompatibleHistogram(format!(
            "bin kinds differ ({:?} vs {:?})",
            f0.bin_kind, score.bin_kind
        )));
    }
    let mut c = Canvas::new(spec);
    let plot = Plot::new(spec, 20.0);
    plot.axes(&mut c, "pitch", "share of total");

    let bins: Vec<i32> = f0.masses.keys().chain(score.masses.keys()).copied().collect::<BTreeSet<_>>().into_iter().collect();
    let share = |h: &PitchHistogram, b: i32| {
        let t = h.total();
        if t > 0.0 {
            h.mass(b) / t
        } else {
            0.0
        }
    };
    let y_max = bins
        .iter()
        .flat_map(|&b| [share(f0, b), share(score, b)])
        .fold(0.0f64, f64::max);
    if bins.is_empty() || y_max <= 0.0 {
        plot.no_data(&mut c);
        return Ok(c.finish());
    }
    plot.y_ticks(&mut c, 0.0, y_max, |v| format!("{}%", fmt_decimal(v * 100.0, 1, 0)));

    let group = plot.width / bins.len() as f64;
    let bar = group * 0.4;
    let _ = writeln!(c.out, r#"<g class="bars">"#);
    for (i, &b) in bins.iter().enumerate() {
        let gx = plot.left + group * i as f64 + group * 0.1;
        for (k, (h, color, class)) in [(f0, F0_COLOR, "f0"), (score, SCORE_COLOR, "score")].into_iter().enumerate() {
            let height = share(h, b) / y_max * plot.height;
            let _ = writeln!(
                c.out,
                r#"<rect class="bar {class}" x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
                num(gx + bar * k as f64),
                num(plot.bottom() - height),
                num(bar),
                num(height)
            );
        }
        let (lx, ly) = (gx + bar, plot.bottom() + 14.0);
        let _ = writeln!(
            c.out,
            r#"<text class="tick-label" x="{}" y="{}" text-anchor="end" font-size="10" transform="rotate(-45 {} {})">{}</text>"#,
            num(lx),
            num(ly),
            num(lx),
            num(ly),
            escape(&bin_label(f0.bin_kind, b))
        );
    }
    let _ = writeln!(c.out, "</g>");

    let lx = plot.left + plot.width - 150.0;
    for (k, (label, color)) in spec.series_labels.iter().zip([F0_COLOR, SCORE_COLOR]).enumerate() {
        let y = plot.top + 8.0 + 16.0 * k as f64;
        c.line("legend-swatch", (lx, y), (lx + 18.0, y), color, 8.0);
        c.text(lx + 24.0, y + 4.0, "start", "legend-label", label, None);
    }
    Ok(c.finish())
}

/// Overlays pitch contours (cents against normalized beat position). Each
/// run of consecutive values becomes one polyline, so missing values break
/// the line instead of being bridged.
pub fn render_contour_overlay(contours: &[Contour], spec: &FigureSpec) -> Result<String> {
    spec.check(FigureKind::ContourOverlay)?;
    if let Some(first) = contours.first() {
        if let Some(bad) = contours.iter().find(|c| c.values.len() != first.values.len()) {
            return Err(Error::IncompatibleContour(format!(
                "contour {} has {} samples, expected {}",
                bad.label(),
                bad.values.len(),
                first.values.len()
            )));
        }
        if first.values.len() < 2 {
            return Err(Error::IncompatibleContour("contours need at least two samples".into()));
        }
    }
    let labels: Vec<String> = if spec.series_labels.is_empty() {
        contours.iter().map(Contour::label).collect()
    } else if spec.series_labels.len() == contours.len() {
        spec.series_labels.clone()
    } else {
        return Err(Error::IncompatibleContour(format!(
            "{} legend labels for {} contours",
            spec.series_labels.len(),
            contours.len()
        )));
    };

    let mut c = Canvas::new(spec);
    let plot = Plot::new(spec, 200.0);
    plot.axes(&mut c, "normalized beat position", "cents re A4");

    let (lo, hi) = contours
        .iter()
        .flat_map(|c| c.values.iter().flatten())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if contours.is_empty() || lo > hi {
        plot.no_data(&mut c);
    } else {
        let pad = ((hi - lo) * 0.05).max(25.0);
        let (lo, hi) = (lo - pad, hi + pad);
        plot.y_ticks(&mut c, lo, hi, |v| fmt_decimal(v, 0, 0));
        for k in 0..=4 {
            let x = plot.left + plot.width * f64::from(k) / 4.0;
            c.line("tick", (x, plot.bottom()), (x, plot.bottom() + 4.0), "black", 1.0);
            c.text(x, plot.bottom() + 18.0, "middle", "tick-label", &fmt_decimal(f64::from(k) / 4.0, 2, 0), Some(10));
        }
        let _ = writeln!(c.out, r#"<g class="contours" fill="none" stroke-width="1.5">"#);
        for (i, contour) in contours.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let last = (contour.values.len() - 1) as f64;
            let point = |j: usize, v: f64| {
                let x = plot.left + plot.width * j as f64 / last;
                let y = plot.bottom() - (v - lo) / (hi - lo) * plot.height;
                format!("{},{}", num(x), num(y))
            };
            let mut run: Vec<String> = Vec::new();
            for (j, v) in contour.values.iter().enumerate() {
                match v {
                    Some(v) => run.push(point(j, *v)),
                    None => flush_run(&mut c.out, &mut run, color, i),
                }
            }
            flush_run(&mut c.out, &mut run, color, i);
        }
        let _ = writeln!(c.out, "</g>");
    }

    let lx = plot.left + plot.width + 16.0;
    for (i, (label, contour)) in labels.iter().zip(contours).enumerate() {
        let y = plot.top + 8.0 + 16.0 * i as f64;
        c.line("legend-swatch", (lx, y), (lx + 18.0, y), PALETTE[i % PALETTE.len()], 3.0);
        let text = if contour.all_missing() {
            format!("{label} (no voiced data)")
        } else {
            label.clone()
        };
        c.text(lx + 24.0, y + 4.0, "start", "legend-label", &text, Some(11));
    }
    Ok(c.finish())
}

fn flush_run(out: &mut String, run: &mut Vec<String>, color: &str, series: usize) {
    if run.is_empty() {
        return;
    }
    let _ = writeln!(
        out,
        r#"<polyline class="contour series-{series}" stroke="{color}" points="{}"/>"#,
        run.join(" ")
    );
    run.clear();
}

#[cfg(test)]
mod tests {
    use super::*;
    use sori_core::histogram::{BinKind, MassUnit};
    use sori_core::Beats;

    fn hist(kind: BinKind, unit: MassUnit, bins: &[(i32, f64)]) -> PitchHistogram {
        let mut h = PitchHistogram::empty(kind, unit);
        h.masses.extend(bins.iter().copied());
        h
    }

    fn contour(values: Vec<Option<f64>>) -> Contour {
        Contour {
            daemok_id: "d1".into(),
            start_event_index: 0,
            onset_beats: Beats::new(3, 2),
            span_beats: Beats::from_integer(2),
            values,
        }
    }

    fn count(svg: &str, element: &str) -> usize {
        svg.matches(&format!("<{element} ")).count()
    }

    #[test]
    fn single_bin_pair_has_two_rects() {
        let f0 = hist(BinKind::Semitone, MassUnit::Frames, &[(74, 10.0)]);
        let sc = hist(BinKind::Semitone, MassUnit::Beats, &[(74, 3.0)]);
        let svg = render_histogram_figure(&f0, &sc, &FigureSpec::histogram_pair("t")).unwrap();
        assert_eq!(count(&svg, "rect"), 2);
        assert!(svg.contains(">D5<"));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn empty_histograms_say_no_data() {
        let f0 = hist(BinKind::Semitone, MassUnit::Frames, &[]);
        let sc = hist(BinKind::Semitone, MassUnit::Beats, &[]);
        let svg = render_histogram_figure(&f0, &sc, &FigureSpec::histogram_pair("t")).unwrap();
        assert_eq!(count(&svg, "rect"), 0);
        assert!(svg.contains(">no data<"));
        assert!(svg.contains(r#"class="axis""#));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn bin_kind_mismatch_is_rejected() {
        let f0 = hist(BinKind::Semitone, MassUnit::Frames, &[(74, 1.0)]);
        let sc = hist(BinKind::PitchClass, MassUnit::Beats, &[(2, 1.0)]);
        assert!(matches!(
            render_histogram_figure(&f0, &sc, &FigureSpec::histogram_pair("t")),
            Err(Error::IncompatibleHistogram(_))
        ));
    }

    #[test]
    fn flat_contour_is_one_horizontal_polyline() {
        let svg = render_contour_overlay(&[contour(vec![Some(500.0); 20])], &FigureSpec::contour_overlay("t")).unwrap();
        assert_eq!(count(&svg, "polyline"), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        let ys: BTreeSet<&str> = points.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert_eq!(ys.len(), 1);
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn gap_splits_polyline() {
        let mut v = vec![Some(100.0); 10];
        v[4] = None;
        v[5] = None;
        let svg = render_contour_overlay(&[contour(v)], &FigureSpec::contour_overlay("t")).unwrap();
        assert_eq!(count(&svg, "polyline"), 2);
    }

    #[test]
    fn legend_and_length_checks() {
        let cs: Vec<Contour> = (0..5).map(|k| contour(vec![Some(f64::from(k) * 10.0); 8])).collect();
        let spec = FigureSpec::contour_overlay("Pattern <F5 G5> & co");
        let a = render_contour_overlay(&cs, &spec).unwrap();
        assert_eq!(a.matches("class=\"legend-swatch\"").count(), 5);
        assert!(a.contains("d1 @ 3/2"));
        assert_eq!(a, render_contour_overlay(&cs, &spec).unwrap());
        roxmltree::Document::parse(&a).unwrap();

        let mut bad = cs.clone();
        bad[2].values.pop();
        assert!(matches!(render_contour_overlay(&bad, &spec), Err(Error::IncompatibleContour(_))));
    }

    #[test]
    fn all_missing_contour_is_flagged_not_drawn() {
        let svg = render_contour_overlay(&[contour(vec![None; 10])], &FigureSpec::contour_overlay("t")).unwrap();
        assert_eq!(count(&svg, "polyline"), 0);
        assert!(svg.contains("(no voiced data)"));
        assert!(svg.contains(">no data<"));
    }

    #[test]
    fn tiny_figure_rejected() {
        let mut spec = FigureSpec::contour_overlay("t");
        spec.width = 0;
        assert!(render_contour_overlay(&[], &spec).is_err());
    }
}
