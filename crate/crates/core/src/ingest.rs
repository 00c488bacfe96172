//! Readers and writers for every external input: SRT subtitles, shot
//! tables, embedding tables and speaker references.
//!
//! Tabular files are comma- or tab-delimited text with a one-line header.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::{Label, Shot, SpeakerId, TimeSpan, UttId, Utterance};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed timestamp `{text}`")]
    MalformedTimestamp { line: usize, text: String },
    #[error("line {line}: cue index {index} does not follow {previous}")]
    NonMonotonicIndex { line: usize, index: u64, previous: u64 },
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("duplicate utterance id {0}")]
    DuplicateId(UttId),
    #[error("shot {index} does not start where shot {} ends", index - 1)]
    GapOrOverlapBetweenShots { index: usize },
    #[error("reference names unknown utterance id {0}")]
    UnknownUtteranceId(UttId),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// SRT

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtitleEntry {
    pub index: u64,
    pub span: TimeSpan,
    pub lines: Vec<String>,
}

impl SubtitleEntry {
    /// True when every line carries a speaker-turn dash and there are at
    /// least two lines.
    pub fn is_multi_speaker(&self) -> bool {
        self.lines.len() >= 2 && self.lines.iter().all(|l| strip_turn_dash(l).is_some())
    }
}

/// Text after a leading speaker-turn dash, if the line has one.
fn strip_turn_dash(line: &str) -> Option<&str> {
    let t = line.trim_start();
    ['-', '\u{2013}', '\u{2014}']
        .iter()
        .find_map(|d| t.strip_prefix(*d))
        .map(str::trim)
}

fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    let (hms, ms) = s.split_once([',', '.'])?;
    let mut parts = hms.split(':');
    let h: i64 = parts.next()?.trim().parse().ok()?;
    let m: i64 = parts.next()?.parse().ok()?;
    let sec: i64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || ms.len() != 3 || m >= 60 || sec >= 60 || h < 0 {
        return None;
    }
    let ms: i64 = ms.parse().ok()?;
    Some(((h * 60 + m) * 60 + sec) * 1000 + ms)
}

fn format_timestamp(ms: i64) -> String {
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, ms) = (rem / 1000, rem % 1000);
    format!("{h:02}:{m:02}:{s:02},{ms:03}")
}

/// Parses SRT text into cues. Errors carry 1-based line numbers.
pub fn parse_srt(text: &str) -> Result<Vec<SubtitleEntry>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate().peekable();
    let mut entries: Vec<SubtitleEntry> = Vec::new();

    loop {
        while lines.next_if(|(_, l)| l.trim().is_empty()).is_some() {}
        let Some((idx_line, index_text)) = lines.next() else {
            break;
        };
        let index: u64 = index_text.trim().parse().map_err(|_| IngestError::MalformedRow {
            line: idx_line + 1,
            reason: format!("expected cue index, found `{index_text}`"),
        })?;
        if let Some(prev) = entries.last() {
            if index <= prev.index {
                return Err(IngestError::NonMonotonicIndex {
                    line: idx_line + 1,
                    index,
                    previous: prev.index,
                });
            }
        }

        let (ts_line, ts_text) = lines.next().ok_or(IngestError::MalformedTimestamp {
            line: idx_line + 2,
            text: String::new(),
        })?;
        let malformed = || IngestError::MalformedTimestamp {
            line: ts_line + 1,
            text: ts_text.to_string(),
        };
        let (a, b) = ts_text.split_once("-->").ok_or_else(malformed)?;
        // Positional hints may follow the end timestamp.
        let b = b.split_whitespace().next().unwrap_or("");
        let start = parse_timestamp(a).ok_or_else(malformed)?;
        let end = parse_timestamp(b).ok_or_else(malformed)?;
        let span = TimeSpan::new(start, end).ok_or_else(malformed)?;

        let mut text_lines = Vec::new();
        while let Some((_, l)) = lines.next_if(|(_, l)| !l.trim().is_empty()) {
            text_lines.push(l.to_string());
        }
        entries.push(SubtitleEntry {
            index,
            span,
            lines: text_lines,
        });
    }
    Ok(entries)
}

pub fn serialize_srt(entries: &[SubtitleEntry]) -> String {
    let mut out = String::new();
    for (k, e) in entries.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{}", e.index);
        let _ = writeln!(
            out,
            "{} --> {}",
            format_timestamp(e.span.start_ms()),
            format_timestamp(e.span.end_ms())
        );
        for l in &e.lines {
            let _ = writeln!(out, "{l}");
        }
    }
    out
}

pub fn load_srt(path: impl AsRef<Path>) -> Result<Vec<SubtitleEntry>> {
    parse_srt(&read_text(path.as_ref())?)
}

/// Turns cues into utterances, numbered from 0 in time order.
///
/// A cue whose lines all start with a speaker-turn dash is split into one
/// utterance per line; its span is divided in proportion to the character
/// count of each line. Zero-length pieces are dropped.
pub fn subtitles_to_utterances(entries: &[SubtitleEntry]) -> Vec<Utterance> {
    let mut spans = Vec::new();
    for e in entries {
        if e.is_multi_speaker() {
            let weights: Vec<i64> = e
                .lines
                .iter()
                .map(|l| strip_turn_dash(l).unwrap_or("").chars().count() as i64)
                .collect();
            spans.extend(split_proportionally(e.span, &weights));
        } else {
            spans.push(e.span);
        }
    }
    spans.retain(|s| s.duration_ms() > 0);
    spans.sort_by_key(|s| s.start_ms());
    spans
        .into_iter()
        .enumerate()
        .map(|(i, s)| Utterance::new(i as UttId, s))
        .collect()
}

/// Splits `span` into consecutive pieces whose lengths follow `weights`.
/// Cut points are rounded to the nearest millisecond; equal weights are used
/// when all weights are zero.
fn split_proportionally(span: TimeSpan, weights: &[i64]) -> Vec<TimeSpan> {
    let mut weights = weights.to_vec();
    if weights.iter().all(|&w| w == 0) {
        weights.iter_mut().for_each(|w| *w = 1);
    }
    let total: i64 = weights.iter().sum();
    let dur = span.duration_ms();
    let mut out = Vec::with_capacity(weights.len());
    let mut acc = 0;
    let mut prev = span.start_ms();
    for w in weights {
        acc += w;
        let cut = span.start_ms() + (dur * acc * 2 + total) / (2 * total);
        out.push(TimeSpan::new(prev, cut).expect("cuts are non-decreasing"));
        prev = cut;
    }
    out
}

// ---------------------------------------------------------------------------
// Delimited tables

fn table_reader(text: &str) -> csv::Reader<&[u8]> {
    let header = text.lines().next().unwrap_or("");
    let delimiter = if header.contains('\t') { b'\t' } else { b',' };
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn rows(text: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in table_reader(text).records() {
        let rec = rec.map_err(|e| IngestError::MalformedRow {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize, what: &str) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| IngestError::MalformedRow {
        line,
        reason: format!("bad {what} `{raw}`"),
    })
}

/// Per-utterance acoustic embeddings of a fixed dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<UttId, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, id: UttId, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(IngestError::DimensionMismatch {
                line: 0,
                expected: self.dim,
                found: v.len(),
            });
        }
        if self.vectors.insert(id, v).is_some() {
            return Err(IngestError::DuplicateId(id));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: UttId) -> Option<&[f64]> {
        self.vectors.get(&id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UttId, &[f64])> {
        self.vectors.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}

/// Parses `utt_id,v1..vD`. The dimension is taken from the first row.
pub fn parse_embeddings(text: &str) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (line, rec) in rows(text)? {
        let id: UttId = field(&rec, 0, line, "utterance id")?;
        let v = (1..rec.len())
            .map(|i| field::<f64>(&rec, i, line, "component"))
            .collect::<Result<Vec<_>>>()?;
        let t = table.get_or_insert_with(|| EmbeddingTable::new(v.len()));
        t.insert(id, v).map_err(|e| match e {
            IngestError::DimensionMismatch { expected, found, .. } => {
                IngestError::DimensionMismatch { line, expected, found }
            }
            other => other,
        })?;
    }
    Ok(table.unwrap_or_default())
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    parse_embeddings(&read_text(path.as_ref())?)
}

pub fn write_embeddings(table: &EmbeddingTable) -> String {
    let mut out = String::from("utt_id");
    for k in 1..=table.dim() {
        let _ = write!(out, ",v{k}");
    }
    out.push('\n');
    for (id, v) in table.iter() {
        let _ = write!(out, "{id}");
        for x in v {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

/// Parses `index,start_ms,end_ms[,label]` and checks the shots tile time.
pub fn parse_shot_table(text: &str) -> Result<Vec<Shot>> {
    let mut shots: Vec<Shot> = Vec::new();
    for (line, rec) in rows(text)? {
        let index: usize = field(&rec, 0, line, "shot index")?;
        let start: i64 = field(&rec, 1, line, "start_ms")?;
        let end: i64 = field(&rec, 2, line, "end_ms")?;
        if index != shots.len() {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected shot index {}, found {index}", shots.len()),
            });
        }
        let span = TimeSpan::new(start, end).ok_or(IngestError::MalformedRow {
            line,
            reason: format!("shot ends before it starts ({start} > {end})"),
        })?;
        if let Some(prev) = shots.last() {
            if prev.span.end_ms() != start {
                return Err(IngestError::GapOrOverlapBetweenShots { index });
            }
        }
        let label = match rec.get(3).filter(|s| !s.is_empty()) {
            Some(_) => Some(field::<Label>(&rec, 3, line, "label")?),
            None => None,
        };
        shots.push(Shot {
            index,
            span,
            frames: None,
            label,
        });
    }
    Ok(shots)
}

pub fn load_shot_table(path: impl AsRef<Path>) -> Result<Vec<Shot>> {
    parse_shot_table(&read_text(path.as_ref())?)
}

pub fn write_shot_table(shots: &[Shot]) -> String {
    let mut out = String::from("index,start_ms,end_ms,label\n");
    for s in shots {
        let label = s.label.map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{label}", s.index, s.span.start_ms(), s.span.end_ms());
    }
    out
}

/// Reference speaker of each annotated utterance.
pub type ReferenceMap = BTreeMap<UttId, SpeakerId>;

/// Parses `utt_id,speaker`, rejecting ids absent from `known`.
pub fn parse_reference(text: &str, known: &[Utterance]) -> Result<ReferenceMap> {
    let ids: BTreeSet<UttId> = known.iter().map(|u| u.id).collect();
    let mut map = ReferenceMap::new();
    for (line, rec) in rows(text)? {
        let id: UttId = field(&rec, 0, line, "utterance id")?;
        let speaker = rec.get(1).unwrap_or("").to_string();
        if speaker.is_empty() {
            return Err(IngestError::MalformedRow {
                line,
                reason: "missing speaker".into(),
            });
        }
        if !ids.contains(&id) {
            return Err(IngestError::UnknownUtteranceId(id));
        }
        if map.insert(id, speaker).is_some() {
            return Err(IngestError::DuplicateId(id));
        }
    }
    Ok(map)
}

pub fn load_reference(path: impl AsRef<Path>, known: &[Utterance]) -> Result<ReferenceMap> {
    parse_reference(&read_text(path.as_ref())?, known)
}

pub fn write_reference(reference: &ReferenceMap) -> String {
    let mut out = String::from("utt_id,speaker\n");
    for (id, spk) in reference {
        let _ = writeln!(out, "{id},{spk}");
    }
    out
}

/// Copies reference speakers onto the utterances they annotate.
pub fn attach_reference(utterances: &mut [Utterance], reference: &ReferenceMap) {
    for u in utterances {
        u.ref_speaker = reference.get(&u.id).cloned();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span(a: i64, b: i64) -> TimeSpan {
        TimeSpan::new(a, b).unwrap()
    }

    #[test]
    fn single_cue() {
        let e = parse_srt("1\n00:00:01,000 --> 00:00:02,500\nHello\n").unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].span, span(1000, 2500));
        assert_eq!(e[0].lines, vec!["Hello"]);
    }

    #[test]
    fn empty_file() {
        assert!(parse_srt("").unwrap().is_empty());
        assert!(parse_srt("\n\n").unwrap().is_empty());
    }

    #[test]
    fn inverted_cue_is_malformed() {
        let err = parse_srt("1\n00:00:03,000 --> 00:00:02,000\nx\n").unwrap_err();
        assert!(matches!(err, IngestError::MalformedTimestamp { line: 2, .. }), "{err}");
    }

    #[test]
    fn garbage_timestamp_reports_line() {
        let text = "1\n00:00:01,000 --> 00:00:02,000\na\n\n2\n00:00:0x,000 --> 00:00:04,000\nb\n";
        let err = parse_srt(text).unwrap_err();
        assert!(matches!(err, IngestError::MalformedTimestamp { line: 6, .. }), "{err}");
    }

    #[test]
    fn non_monotonic_index() {
        let text = "2\n00:00:01,000 --> 00:00:02,000\na\n\n2\n00:00:03,000 --> 00:00:04,000\nb\n";
        let err = parse_srt(text).unwrap_err();
        assert!(matches!(err, IngestError::NonMonotonicIndex { line: 5, .. }), "{err}");
    }

    #[test]
    fn crlf_and_bom() {
        let text = "\u{feff}1\r\n00:00:01,000 --> 00:00:02,000\r\nHi\r\n\r\n";
        let e = parse_srt(text).unwrap();
        assert_eq!(e[0].lines, vec!["Hi"]);
    }

    #[test]
    fn single_speaker_maps_one_to_one() {
        let e = parse_srt("1\n00:00:01,000 --> 00:00:02,500\nHello there\n").unwrap();
        let u = subtitles_to_utterances(&e);
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].span, span(1000, 2500));
    }

    #[test]
    fn dual_speaker_split_by_characters() {
        let entry = SubtitleEntry {
            index: 1,
            span: span(0, 4000),
            lines: vec!["- abcdefghij".into(), "- abcdefghijabcdefghijabcdefghij".into()],
        };
        let u = subtitles_to_utterances(&[entry]);
        assert_eq!(u.len(), 2);
        assert_eq!(u[0].span, span(0, 1000));
        assert_eq!(u[1].span, span(1000, 4000));
        assert_eq!((u[0].id, u[1].id), (0, 1));
    }

    #[test]
    fn dash_on_second_line_only_is_not_split() {
        let entry = SubtitleEntry {
            index: 1,
            span: span(0, 4000),
            lines: vec!["Where were you?".into(), "- Out.".into()],
        };
        assert_eq!(subtitles_to_utterances(&[entry]).len(), 1);
    }

    #[test]
    fn embeddings_table() {
        let header: String = std::iter::once("utt_id".to_string())
            .chain((1..=20).map(|k| format!("v{k}")))
            .collect::<Vec<_>>()
            .join(",");
        let row = |id: u32, n: usize| {
            std::iter::once(id.to_string())
                .chain((0..n).map(|k| format!("{}.5", k)))
                .collect::<Vec<_>>()
                .join(",")
        };
        let ok = format!("{header}\n{}\n{}\n{}\n", row(0, 20), row(1, 20), row(2, 20));
        let t = parse_embeddings(&ok).unwrap();
        assert_eq!((t.len(), t.dim()), (3, 20));
        assert_eq!(t.get(1).unwrap()[3], 3.5);

        let short = format!("{header}\n{}\n{}\n", row(0, 20), row(1, 19));
        assert!(matches!(
            parse_embeddings(&short),
            Err(IngestError::DimensionMismatch {
                expected: 20,
                found: 19,
                line: 3
            })
        ));

        let dup = format!("{header}\n{}\n{}\n", row(4, 20), row(4, 20));
        assert!(matches!(parse_embeddings(&dup), Err(IngestError::DuplicateId(4))));
    }

    #[test]
    fn tab_delimited_embeddings() {
        let t = parse_embeddings("utt_id\tv1\tv2\n7\t1.0\t-2.5\n").unwrap();
        assert_eq!(t.get(7).unwrap(), &[1.0, -2.5]);
    }

    #[test]
    fn shot_table_contiguity() {
        let ok = parse_shot_table("index,start_ms,end_ms\n0,0,1000\n1,1000,2000\n").unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok[1].span, span(1000, 2000));
        assert!(ok[0].label.is_none());

        let gap = parse_shot_table("index,start_ms,end_ms\n0,0,1000\n1,1200,2000\n");
        assert!(matches!(gap, Err(IngestError::GapOrOverlapBetweenShots { index: 1 })));

        let labelled = parse_shot_table("index,start_ms,end_ms,label\n0,0,10,c4\n1,10,20,2\n").unwrap();
        assert_eq!(labelled[0].label, Some(Label(4)));
        assert_eq!(labelled[1].label, Some(Label(2)));
    }

    #[test]
    fn reference_unknown_id() {
        let utts = vec![Utterance::new(0, span(0, 10)), Utterance::new(1, span(10, 20))];
        let r = parse_reference("utt_id,speaker\n0,walter\n1,jesse\n", &utts).unwrap();
        assert_eq!(r[&1], "jesse");
        assert!(matches!(
            parse_reference("utt_id,speaker\n99,walter\n", &utts),
            Err(IngestError::UnknownUtteranceId(99))
        ));
    }

    fn arb_entries() -> impl Strategy<Value = Vec<SubtitleEntry>> {
        prop::collection::vec(
            (
                0i64..5_000,
                0i64..4_000,
                prop::collection::vec("[a-zA-Z ,.?!-]{1,30}", 1..3),
            ),
            0..8,
        )
        .prop_map(|cues| {
            let mut t = 0;
            cues.into_iter()
                .enumerate()
                .map(|(i, (gap, dur, lines))| {
                    t += gap;
                    let s = span(t, t + dur);
                    t += dur;
                    let lines = lines
                        .into_iter()
                        .map(|l| l.trim().to_string())
                        .map(|l| if l.is_empty() { "x".to_string() } else { l })
                        .collect();
                    SubtitleEntry {
                        index: i as u64 + 1,
                        span: s,
                        lines,
                    }
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn srt_round_trip(entries in arb_entries()) {
            let text = serialize_srt(&entries);
            prop_assert_eq!(parse_srt(&text).unwrap(), entries);
        }

        #[test]
        fn split_preserves_duration(start in 0i64..100_000, dur in 0i64..10_000,
                                    weights in prop::collection::vec(0i64..60, 2..5)) {
            let s = span(start, start + dur);
            let pieces = split_proportionally(s, &weights);
            prop_assert_eq!(pieces.first().unwrap().start_ms(), s.start_ms());
            prop_assert_eq!(pieces.last().unwrap().end_ms(), s.end_ms());
            prop_assert_eq!(pieces.iter().map(TimeSpan::duration_ms).sum::<i64>(), dur);
        }
    }
}
