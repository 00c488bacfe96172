//! Two-shot dialogue pattern detection over shot label sequences, and
//! assembly of dialogue scenes with the utterances they cover.
//!
//! A pair `(l1, l2)` is a pattern of the sequence when `l1 (l2 l1)+` occurs
//! contiguously in it. Besides those full alternations, shorter alternating
//! runs over the same two labels ("isolated" runs) also count towards the
//! scene's time span.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Label, Scene, Shot, TimeSpan, UttId, Utterance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pair ({0}, {1}) is not a pattern of the sequence")]
    PairNotInPatternSet(Label, Label),
    #[error("shot {0} has no label")]
    UnlabeledShot(usize),
}

pub type Result<T, E = PatternError> = std::result::Result<T, E>;

/// Inclusive shot index range.
pub type Run = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatch {
    pub pair: (Label, Label),
    /// Maximal runs matching `l1 (l2 l1)+`.
    pub match_runs: Vec<Run>,
    /// Maximal alternating runs over `{l1, l2}` of length ≥ 2 that contain
    /// no full match.
    pub isolated_runs: Vec<Run>,
}

impl PatternMatch {
    /// All runs, sorted by start.
    pub fn runs(&self) -> Vec<Run> {
        let mut all: Vec<Run> = self.match_runs.iter().chain(&self.isolated_runs).copied().collect();
        all.sort();
        all
    }
}

/// Every pair of distinct labels `(l1, l2)` such that `l1 l2 l1` occurs in
/// `labels`. Longer alternations always contain that triple, so one scan
/// suffices.
pub fn extract_patterns(labels: &[Label]) -> BTreeSet<(Label, Label)> {
    labels
        .windows(3)
        .filter(|w| w[0] == w[2] && w[0] != w[1])
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Maximal segments where labels alternate between `a` and `b`.
fn alternating_segments(labels: &[Label], a: Label, b: Label) -> Vec<Run> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        if labels[i] != a && labels[i] != b {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < labels.len() && (labels[i + 1] == a || labels[i + 1] == b) && labels[i + 1] != labels[i] {
            i += 1;
        }
        out.push((start, i));
        i += 1;
    }
    out
}

pub fn pattern_runs(labels: &[Label], pair: (Label, Label)) -> Result<PatternMatch> {
    let (l1, l2) = pair;
    if !extract_patterns(labels).contains(&pair) {
        return Err(PatternError::PairNotInPatternSet(l1, l2));
    }
    let mut result = PatternMatch {
        pair,
        match_runs: Vec::new(),
        isolated_runs: Vec::new(),
    };
    for (start, end) in alternating_segments(labels, l1, l2) {
        if end == start {
            continue;
        }
        // Within an alternating segment the match is delimited by the outermost l1.
        let first = (start..=end).find(|&k| labels[k] == l1);
        let last = (start..=end).rev().find(|&k| labels[k] == l1);
        match (first, last) {
            (Some(f), Some(l)) if l >= f + 2 => result.match_runs.push((f, l)),
            _ => result.isolated_runs.push((start, end)),
        }
    }
    Ok(result)
}

fn merge_runs(mut runs: Vec<Run>) -> Vec<Run> {
    runs.sort();
    let mut merged: Vec<Run> = Vec::new();
    for (s, e) in runs {
        match merged.last_mut() {
            Some(last) if s <= last.1 + 1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

/// Labels of `shots`, failing on the first unlabeled one.
pub fn shot_labels(shots: &[Shot]) -> Result<Vec<Label>> {
    shots
        .iter()
        .map(|s| s.label.ok_or(PatternError::UnlabeledShot(s.index)))
        .collect()
}

/// One scene per unordered label pair found in `patterns`.
///
/// The scene's time span is the union of the runs of both orientations of the
/// pair. An utterance is covered when at least `min_cover` of its duration
/// lies inside a scene; when several scenes qualify, the one with the larger
/// overlap wins, then the one whose pattern occurs first.
pub fn build_scenes(
    shots: &[Shot],
    patterns: &BTreeSet<(Label, Label)>,
    utterances: &[Utterance],
    min_cover: f64,
) -> Result<Vec<Scene>> {
    let labels = shot_labels(shots)?;

    struct Group {
        first_match: usize,
        pattern: (Label, Label),
        runs: Vec<Run>,
    }
    let mut groups: BTreeMap<(Label, Label), Group> = BTreeMap::new();
    for &pair in patterns {
        let m = pattern_runs(&labels, pair)?;
        let first_match = m.match_runs.iter().map(|r| r.0).min().unwrap_or(usize::MAX);
        let key = (pair.0.min(pair.1), pair.0.max(pair.1));
        let g = groups.entry(key).or_insert(Group {
            first_match,
            pattern: pair,
            runs: Vec::new(),
        });
        if first_match < g.first_match {
            g.first_match = first_match;
            g.pattern = pair;
        }
        g.runs.extend(m.runs());
    }
    let mut groups: Vec<Group> = groups.into_values().collect();
    groups.sort_by_key(|g| (g.first_match, g.pattern));

    let mut scenes: Vec<Scene> = groups
        .into_iter()
        .enumerate()
        .map(|(id, g)| Scene {
            id,
            pattern: g.pattern,
            intervals: merge_runs(g.runs)
                .into_iter()
                .map(|(s, e)| {
                    TimeSpan::new(shots[s].span.start_ms(), shots[e].span.end_ms()).expect("shots are ordered")
                })
                .collect(),
            utterances: Vec::new(),
        })
        .collect();

    let mut sorted: Vec<&Utterance> = utterances.iter().collect();
    sorted.sort_by_key(|u| (u.span.start_ms(), u.id));
    for u in sorted {
        let dur = u.duration_ms();
        let best = scenes
            .iter()
            .map(|s| (s.id, s.intervals.iter().map(|i| i.overlap_ms(&u.span)).sum::<i64>()))
            .filter(|&(_, ov)| ov > 0 && ov as f64 >= min_cover * dur as f64)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((id, _)) = best {
            scenes[id].utterances.push(u.id);
        }
    }
    Ok(scenes)
}

/// Descriptive statistics over non-empty scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneStats {
    pub scenes: usize,
    pub mean_speech_secs: f64,
    pub coverage_pct: f64,
    /// Present when every covered utterance has a reference speaker.
    pub speakers: Option<SpeakerStats>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeakerStats {
    pub mean: f64,
    pub std: f64,
}

pub fn scene_stats(scenes: &[Scene], utterances: &[Utterance]) -> SceneStats {
    let by_id: BTreeMap<UttId, &Utterance> = utterances.iter().map(|u| (u.id, u)).collect();
    let total_ms: i64 = utterances.iter().map(Utterance::duration_ms).sum();
    let non_empty: Vec<&Scene> = scenes.iter().filter(|s| !s.utterances.is_empty()).collect();
    if non_empty.is_empty() {
        return SceneStats {
            scenes: 0,
            mean_speech_secs: 0.0,
            coverage_pct: 0.0,
            speakers: None,
        };
    }
    let speech: Vec<i64> = non_empty
        .iter()
        .map(|s| s.utterances.iter().map(|id| by_id[id].duration_ms()).sum())
        .collect();
    let covered: i64 = speech.iter().sum();
    let n = non_empty.len() as f64;

    let speaker_counts: Option<Vec<f64>> = non_empty
        .iter()
        .map(|s| {
            s.utterances
                .iter()
                .map(|id| by_id[id].ref_speaker.as_deref())
                .collect::<Option<BTreeSet<_>>>()
                .map(|set| set.len() as f64)
        })
        .collect();
    let speakers = speaker_counts.map(|c| {
        let mean = c.iter().sum::<f64>() / n;
        let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        SpeakerStats { mean, std: var.sqrt() }
    });

    SceneStats {
        scenes: non_empty.len(),
        mean_speech_secs: covered as f64 / 1000.0 / n,
        coverage_pct: if total_ms > 0 {
            covered as f64 * 100.0 / total_ms as f64
        } else {
            0.0
        },
        speakers,
    }
}

/// One row per scene: pattern, intervals in ms and covered utterance ids.
pub fn write_scenes(scenes: &[Scene]) -> String {
    let mut out = String::from("scene,l1,l2,intervals_ms,utterances\n");
    for s in scenes {
        let intervals: Vec<String> = s
            .intervals
            .iter()
            .map(|i| format!("{}-{}", i.start_ms(), i.end_ms()))
            .collect();
        let utts: Vec<String> = s.utterances.iter().map(|u| u.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.id,
            s.pattern.0,
            s.pattern.1,
            intervals.join(";"),
            utts.join(";")
        );
    }
    out
}
