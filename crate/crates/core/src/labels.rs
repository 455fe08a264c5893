//! Cough segment annotations: one `start end cough` line per segment.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A labeled time segment, `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
}

/// Cough segments for one recording, non-overlapping and sorted by start.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelTrack {
    pub segments: Vec<Segment>,
}

impl LabelTrack {
    /// Build a track from raw segments, sorting and merging overlaps.
    pub fn from_segments(mut segments: Vec<Segment>) -> LabelTrack {
        segments.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for seg in segments {
            match merged.last_mut() {
                Some(last) if seg.start <= last.end => last.end = last.end.max(seg.end),
                _ => merged.push(seg),
            }
        }
        LabelTrack { segments: merged }
    }

    /// True when `t` falls inside any cough segment.
    pub fn contains(&self, t: f64) -> bool {
        self.segments.iter().any(|s| t >= s.start && t < s.end)
    }

    pub fn total_cough_seconds(&self) -> f64 {
        self.segments.iter().map(|s| s.end - s.start).sum()
    }

    /// Serialize in the same line format `parse_labels` reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            writeln!(out, "{:.6}\t{:.6}\tcough", s.start, s.end).unwrap();
        }
        out
    }
}

/// Parse a label file: one `<start_s>\t<end_s>\tcough` segment per line,
/// blank lines and `#` comments ignored, overlapping segments merged.
pub fn parse_labels(text: &str) -> Result<LabelTrack> {
    let mut segments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::LabelParse {
                line: line_no,
                msg: format!("expected 3 fields `start end label`, got {}", fields.len()),
            });
        }
        let start: f64 = fields[0].parse().map_err(|_| Error::LabelParse {
            line: line_no,
            msg: format!("bad start time '{}'", fields[0]),
        })?;
        let end: f64 = fields[1].parse().map_err(|_| Error::LabelParse {
            line: line_no,
            msg: format!("bad end time '{}'", fields[1]),
        })?;
        if fields[2] != "cough" {
            return Err(Error::LabelParse {
                line: line_no,
                msg: format!("unknown label '{}'", fields[2]),
            });
        }
        if start < 0.0 {
            return Err(Error::LabelParse {
                line: line_no,
                msg: format!("negative start {start}"),
            });
        }
        if end <= start {
            return Err(Error::LabelParse {
                line: line_no,
                msg: format!("end {end} must exceed start {start}"),
            });
        }
        segments.push(Segment { start, end });
    }
    Ok(LabelTrack::from_segments(segments))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_segment() {
        let track = parse_labels("0.30\t0.50\tcough").unwrap();
        assert_eq!(track.segments, vec![Segment { start: 0.30, end: 0.50 }]);
        assert!(track.contains(0.30));
        assert!(track.contains(0.49));
        assert!(!track.contains(0.50));
    }

    #[test]
    fn empty_file_gives_empty_track() {
        let track = parse_labels("").unwrap();
        assert!(track.segments.is_empty());
        let track = parse_labels("# comment only\n\n").unwrap();
        assert!(track.segments.is_empty());
    }

    #[test]
    fn rejects_inverted_segment_with_line_number() {
        match parse_labels("1.0\t0.5\tcough") {
            Err(Error::LabelParse { line: 1, .. }) => {}
            other => panic!("expected parse error at line 1, got {other:?}"),
        }
    }

    #[test]
    fn reports_failing_line() {
        let text = "0.1\t0.2\tcough\nbogus line here\n";
        match parse_labels(text) {
            Err(Error::LabelParse { line: 2, .. }) => {}
            other => panic!("expected parse error at line 2, got {other:?}"),
        }
    }

    #[test]
    fn merges_overlaps() {
        let track = parse_labels("0.1\t0.5\tcough\n0.4\t0.8\tcough\n2.0\t2.1\tcough").unwrap();
        assert_eq!(
            track.segments,
            vec![
                Segment { start: 0.1, end: 0.8 },
                Segment { start: 2.0, end: 2.1 }
            ]
        );
    }

    #[test]
    fn text_roundtrip() {
        let track = parse_labels("0.25\t0.75\tcough\n1.5\t1.75\tcough").unwrap();
        let again = parse_labels(&track.to_text()).unwrap();
        assert_eq!(track, again);
    }
}
