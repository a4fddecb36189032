//! Single-part, single-voice MusicXML (partwise) reader.
//!
//! Ornaments, lyrics, directions, barlines and layout elements are skipped;
//! ornament markings do not change the decoded pitch or duration.

use log::{debug, warn};
use num_traits::Zero;
use roxmltree::{Document, Node, ParsingOptions};
use sori_core::pitch::{Pitch, Step};
use sori_core::score::{Measure, NoteEvent, NoteKind, Score, TimeSignature};
use sori_core::Beats;

use crate::error::{Error, Result};

/// Decodes an uncompressed MusicXML document.
pub fn parse_musicxml(document: &[u8], daemok_id: &str) -> Result<Score> {
    let text = std::str::from_utf8(document).map_err(|e| Error::Xml {
        line: line_of_byte(document, e.valid_up_to()),
        message: format!("document is not valid UTF-8: {e}"),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(text, opts).map_err(|e| Error::Xml {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    Reader::new(&doc).read(daemok_id)
}

fn line_of_byte(bytes: &[u8], at: usize) -> u32 {
    1 + bytes[..at].iter().filter(|&&b| b == b'\n').count() as u32
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    divisions: Option<u32>,
    time: Option<TimeSignature>,
}

impl<'a, 'input> Reader<'a, 'input> {
    fn new(doc: &'a Document<'input>) -> Self {
        Reader {
            doc,
            divisions: None,
            time: None,
        }
    }

    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn structure(&self, node: Node, message: impl Into<String>) -> Error {
        Error::Structure {
            line: self.line(node),
            message: message.into(),
        }
    }

    fn unsupported(&self, node: Node, reason: impl Into<String>) -> Error {
        Error::Unsupported {
            line: self.line(node),
            element: node.tag_name().name().to_string(),
            reason: reason.into(),
        }
    }

    fn read(mut self, daemok_id: &str) -> Result<Score> {
        let root = self.doc.root_element();
        if root.tag_name().name() != "score-partwise" {
            return Err(self.unsupported(root, "only score-partwise documents are read"));
        }
        let parts: Vec<Node> = elements(root).filter(|n| n.has_tag_name("part")).collect();
        let part = match parts.as_slice() {
            [] => return Err(self.structure(root, "document has no <part>")),
            [p] => *p,
            [_, second, ..] => {
                return Err(self.unsupported(
                    *second,
                    format!("found {} parts; only a single melodic part is read", parts.len()),
                ))
            }
        };

        let mut cursor = Beats::zero();
        let mut first_time = None;
        let mut first_divisions = None;
        let mut measures = Vec::new();
        for (index, m) in elements(part).filter(|n| n.has_tag_name("measure")).enumerate() {
            let mut events = Vec::new();
            for child in elements(m) {
                match child.tag_name().name() {
                    "attributes" => self.attributes(child)?,
                    "note" => {
                        if let Some(e) = self.note(child, index, cursor)? {
                            cursor += e.duration_beats;
                            events.push(e);
                        }
                    }
                    "backup" | "forward" => {
                        let d = self.duration(child)?;
                        if !d.is_zero() {
                            return Err(
                                self.unsupported(child, "moves the time cursor; only one voice is read")
                            );
                        }
                    }
                    other => debug!("skipping <{other}> in measure {index}"),
                }
            }
            let time = self.time.ok_or_else(|| self.structure(m, "measure before any <time>"))?;
            first_time.get_or_insert(time);
            if let Some(d) = self.divisions {
                first_divisions.get_or_insert(d);
            }
            measures.push(Measure {
                index,
                number: m.attribute("number").unwrap_or_default().to_string(),
                time_signature: time,
                implicit: m.attribute("implicit") == Some("yes"),
                events,
            });
        }
        let (Some(time), Some(divisions)) = (first_time, first_divisions) else {
            return Err(self.structure(part, "part has no measures with <divisions> and <time>"));
        };
        Ok(Score::new(daemok_id, time, divisions, measures)?)
    }

    fn attributes(&mut self, node: Node) -> Result<()> {
        for child in elements(node) {
            match child.tag_name().name() {
                "divisions" => {
                    let d: u32 = self.parse_text(child)?;
                    if d == 0 {
                        return Err(self.structure(child, "<divisions> must be positive"));
                    }
                    self.divisions = Some(d);
                }
                "time" => self.time = Some(self.time_signature(child)?),
                _ => {}
            }
        }
        Ok(())
    }

    fn time_signature(&self, node: Node) -> Result<TimeSignature> {
        if child(node, "senza-misura").is_some() {
            return Err(self.unsupported(node, "unmetered time is not supported"));
        }
        let beats = child(node, "beats").ok_or_else(|| self.structure(node, "<time> without <beats>"))?;
        let beat_type =
            child(node, "beat-type").ok_or_else(|| self.structure(node, "<time> without <beat-type>"))?;
        if node.children().filter(|n| n.has_tag_name("beats")).count() > 1 {
            return Err(self.unsupported(node, "interchangeable or composite meters are not supported"));
        }
        let num: u32 = self
            .parse_text(beats)
            .map_err(|_| self.unsupported(beats, "composite meter values are not supported"))?;
        let den: u32 = self.parse_text(beat_type)?;
        TimeSignature::new(num, den).map_err(|e| self.structure(node, e.to_string()))
    }

    fn note(&self, node: Node, measure_index: usize, onset: Beats) -> Result<Option<NoteEvent>> {
        if child(node, "grace").is_some() {
            warn!("line {}: skipping grace note", self.line(node));
            return Ok(None);
        }
        if child(node, "cue").is_some() {
            warn!("line {}: skipping cue note", self.line(node));
            return Ok(None);
        }
        if let Some(c) = child(node, "chord") {
            return Err(self.unsupported(c, "chords are not supported in a single melodic line"));
        }
        if self.divisions.is_none() {
            return Err(self.structure(node, "missing <divisions> before the first note"));
        }
        if self.time.is_none() {
            return Err(self.structure(node, "missing <time> before the first note"));
        }
        let duration = self.duration(node)?;
        if duration.is_zero() {
            return Err(self.structure(node, "note with zero <duration>"));
        }
        let kind = if child(node, "rest").is_some() {
            NoteKind::Rest
        } else if let Some(p) = child(node, "pitch") {
            NoteKind::Note(self.pitch(p)?)
        } else if let Some(u) = child(node, "unpitched") {
            return Err(self.unsupported(u, "unpitched notes are not supported"));
        } else {
            return Err(self.structure(node, "<note> has neither <pitch> nor <rest>"));
        };

        let mut tie_start = false;
        let mut tie_stop = false;
        let ties = elements(node)
            .filter(|n| n.has_tag_name("tie"))
            .chain(elements(node).filter(|n| n.has_tag_name("notations")).flat_map(|n| {
                elements(n).filter(|t| t.has_tag_name("tied"))
            }));
        for t in ties {
            match t.attribute("type") {
                Some("start") => tie_start = true,
                Some("stop") => tie_stop = true,
                _ => {}
            }
        }
        if kind.is_rest() && (tie_start || tie_stop) {
            return Err(self.structure(node, "rests cannot be tied"));
        }
        Ok(Some(NoteEvent {
            onset_beats: onset,
            duration_beats: duration,
            kind,
            measure_index,
            tied_from_previous: tie_stop,
            ties_to_next: tie_start,
        }))
    }

    fn duration(&self, node: Node) -> Result<Beats> {
        let d = child(node, "duration")
            .ok_or_else(|| self.structure(node, format!("<{}> without <duration>", node.tag_name().name())))?;
        let n: i64 = self.parse_text(d)?;
        if n < 0 {
            return Err(self.structure(d, "negative <duration>"));
        }
        let divisions = self
            .divisions
            .ok_or_else(|| self.structure(node, "missing <divisions> before the first duration"))?;
        Ok(Beats::new(n, i64::from(divisions)))
    }

    fn pitch(&self, node: Node) -> Result<Pitch> {
        let step_node = child(node, "step").ok_or_else(|| self.structure(node, "<pitch> without <step>"))?;
        let step = text(step_node)
            .chars()
            .next()
            .filter(|_| text(step_node).len() == 1)
            .and_then(Step::from_letter)
            .ok_or_else(|| self.structure(step_node, format!("invalid step `{}`", text(step_node))))?;
        let alter = match child(node, "alter") {
            None => 0,
            Some(a) => {
                let v: f64 = self.parse_text(a)?;
                if v.fract() != 0.0 {
                    return Err(self.unsupported(a, "microtonal alterations are not supported"));
                }
                v as i8
            }
        };
        let octave_node =
            child(node, "octave").ok_or_else(|| self.structure(node, "<pitch> without <octave>"))?;
        let octave: i8 = self.parse_text(octave_node)?;
        Pitch::new(step, alter, octave).map_err(|e| self.structure(node, e.to_string()))
    }

    fn parse_text<T: std::str::FromStr>(&self, node: Node) -> Result<T> {
        text(node)
            .parse()
            .map_err(|_| self.structure(node, format!("cannot parse <{}> value `{}`", node.tag_name().name(), text(node))))
    }
}

fn elements<'a, 'input>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(Node::is_element)
}

fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    elements(node).find(|n| n.has_tag_name(name))
}

fn text<'a>(node: Node<'a, '_>) -> &'a str {
    node.text().unwrap_or_default().trim()
}
