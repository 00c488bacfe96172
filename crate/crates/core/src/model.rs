//! Core domain types shared by every stage of the pipeline.
//!
//! Time is kept as integer milliseconds so that overlap sums and the
//! duration-weighted scores built on top of them are exact.

use std::collections::BTreeSet;
use std::fmt;

/// Utterance identifier, unique within an episode.
pub type UttId = u32;

/// Speaker identifier as found in reference annotations.
pub type SpeakerId = String;

/// Half-open time interval `[start, end)` in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeSpan {
    start_ms: i64,
    end_ms: i64,
}

impl TimeSpan {
    /// Returns `None` when `end < start`.
    pub fn new(start_ms: i64, end_ms: i64) -> Option<Self> {
        (end_ms >= start_ms).then_some(Self { start_ms, end_ms })
    }

    pub fn start_ms(&self) -> i64 {
        self.start_ms
    }

    pub fn end_ms(&self) -> i64 {
        self.end_ms
    }

    pub fn duration_ms(&self) -> i64 {
        self.end_ms - self.start_ms
    }

    pub fn start_secs(&self) -> f64 {
        self.start_ms as f64 / 1000.0
    }

    pub fn end_secs(&self) -> f64 {
        self.end_ms as f64 / 1000.0
    }

    pub fn duration_secs(&self) -> f64 {
        self.duration_ms() as f64 / 1000.0
    }

    /// Shared time between two spans, in milliseconds.
    pub fn overlap_ms(&self, other: &TimeSpan) -> i64 {
        let lo = self.start_ms.max(other.start_ms);
        let hi = self.end_ms.min(other.end_ms);
        (hi - lo).max(0)
    }
}

impl fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start_ms, self.end_ms)
    }
}

/// Overlapping time of two spans, in seconds.
pub fn overlap(a: &TimeSpan, b: &TimeSpan) -> f64 {
    a.overlap_ms(b) as f64 / 1000.0
}

/// A single-speaker spoken segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: UttId,
    pub span: TimeSpan,
    pub ref_speaker: Option<SpeakerId>,
}

impl Utterance {
    pub fn new(id: UttId, span: TimeSpan) -> Self {
        Self {
            id,
            span,
            ref_speaker: None,
        }
    }

    pub fn duration_ms(&self) -> i64 {
        self.span.duration_ms()
    }
}

/// Shot similarity label, printed as `c<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl Label {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl std::str::FromStr for Label {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let digits = s.strip_prefix('c').unwrap_or(s);
        digits.parse().map(Label)
    }
}

/// Inclusive frame index range of a shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRange {
    pub first: usize,
    pub last: usize,
}

impl FrameRange {
    pub fn frame_count(&self) -> usize {
        self.last + 1 - self.first
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shot {
    pub index: usize,
    pub span: TimeSpan,
    /// Known when the shot was detected from a frame stream.
    pub frames: Option<FrameRange>,
    pub label: Option<Label>,
}

/// A detected two-character dialogue scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub id: usize,
    pub pattern: (Label, Label),
    /// Sorted, non-overlapping.
    pub intervals: Vec<TimeSpan>,
    /// Covered utterances in time order.
    pub utterances: Vec<UttId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Audio,
    Video,
    Fused,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Audio => "audio",
            Modality::Video => "video",
            Modality::Fused => "fused",
        })
    }
}

/// Assignment of (some of) a scene's utterances to clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub scene: usize,
    pub modality: Modality,
    pub clusters: Vec<Vec<UttId>>,
    /// One center per cluster, when the producer designates them.
    pub centers: Option<Vec<UttId>>,
}

impl Partition {
    pub fn new(scene: usize, modality: Modality, clusters: Vec<Vec<UttId>>) -> Self {
        Self {
            scene,
            modality,
            clusters,
            centers: None,
        }
    }

    /// Cluster index of `id`, if assigned.
    pub fn cluster_of(&self, id: UttId) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&id))
    }

    pub fn members(&self) -> BTreeSet<UttId> {
        self.clusters.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Clusters pairwise disjoint and each center inside its own cluster.
    pub fn is_consistent(&self) -> bool {
        let mut seen = BTreeSet::new();
        for id in self.clusters.iter().flatten() {
            if !seen.insert(*id) {
                return false;
            }
        }
        match &self.centers {
            None => true,
            Some(centers) => {
                centers.len() == self.clusters.len()
                    && centers
                        .iter()
                        .zip(&self.clusters)
                        .all(|(c, members)| members.contains(c))
            }
        }
    }
}
