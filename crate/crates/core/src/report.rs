//! Episode-level score tables.

use std::fmt::{self, Write as _};

use crate::evaluation::SceneScore;
use crate::model::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum System {
    Audio,
    Video,
    Oracle,
    /// Fused intersections before reallocation, scored on kept speech only.
    OmMinusRa,
    /// Fused partition after reallocation.
    OmPlusRa,
    /// Weighted-sum baseline.
    Ws,
}

impl System {
    pub const ALL: [System; 6] = [
        System::Audio,
        System::Video,
        System::Oracle,
        System::OmMinusRa,
        System::OmPlusRa,
        System::Ws,
    ];

    pub fn name(self) -> &'static str {
        match self {
            System::Audio => "audio",
            System::Video => "video",
            System::Oracle => "oracle",
            System::OmMinusRa => "om-ra",
            System::OmPlusRa => "om+ra",
            System::Ws => "ws",
        }
    }

    pub fn from_name(name: &str) -> Option<System> {
        System::ALL.into_iter().find(|s| s.name() == name)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneReport {
    pub scene: usize,
    pub pattern: (Label, Label),
    pub utterances: usize,
    /// Total duration of the scene's utterances.
    pub speech_ms: i64,
    /// Duration kept by fusion before reallocation.
    pub kept_ms: i64,
    pub scores: [Option<SceneScore>; 6],
    pub flags: Vec<String>,
}

impl SceneReport {
    pub fn new(scene: usize, pattern: (Label, Label), utterances: usize, speech_ms: i64) -> Self {
        Self {
            scene,
            pattern,
            utterances,
            speech_ms,
            kept_ms: 0,
            scores: [None; 6],
            flags: Vec::new(),
        }
    }

    pub fn score(&self, s: System) -> Option<&SceneScore> {
        self.scores[s.slot()].as_ref()
    }

    pub fn set_score(&mut self, s: System, score: SceneScore) {
        self.scores[s.slot()] = Some(score);
    }

    pub fn coverage_pct(&self) -> Option<f64> {
        (self.speech_ms > 0).then(|| self.kept_ms as f64 * 100.0 / self.speech_ms as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeReport {
    pub scenes: Vec<SceneReport>,
}

impl EpisodeReport {
    /// Scored-duration-weighted DER over the scenes scored for `s`.
    pub fn single_show(&self, s: System) -> Option<f64> {
        let (err, total) = self
            .scenes
            .iter()
            .filter_map(|r| r.score(s))
            .fold((0i64, 0i64), |(e, t), sc| (e + sc.error_ms, t + sc.scored_ms));
        (total > 0).then(|| err as f64 / total as f64)
    }

    /// Share of speech kept by fusion over the scenes that have speech.
    pub fn coverage_pct(&self) -> Option<f64> {
        let (kept, total) = self
            .scenes
            .iter()
            .fold((0i64, 0i64), |(k, t), r| (k + r.kept_ms, t + r.speech_ms));
        (total > 0).then(|| kept as f64 * 100.0 / total as f64)
    }

    /// Drops the scores of every system `keep` rejects.
    pub fn retain_systems(&mut self, keep: impl Fn(System) -> bool) {
        for r in &mut self.scenes {
            for s in System::ALL {
                if !keep(s) {
                    r.scores[s.slot()] = None;
                }
            }
        }
    }

    pub fn speech_ms(&self) -> i64 {
        self.scenes.iter().map(|r| r.speech_ms).sum()
    }

    /// Fixed-width table, DER in percent.
    pub fn to_text(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{:.1}", x * 100.0));
        let cov = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<7} {:<11} {:>5} {:>9} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}  flags",
            "scene", "pattern", "utts", "speech_s", "audio", "video", "oracle", "om-ra", "cov%", "om+ra", "ws"
        );
        for r in &self.scenes {
            let d = |s: System| pct(r.score(s).map(|x| x.der));
            let _ = writeln!(
                out,
                "{:<7} {:<11} {:>5} {:>9.2} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}  {}",
                r.scene,
                format!("{}/{}", r.pattern.0, r.pattern.1),
                r.utterances,
                r.speech_ms as f64 / 1000.0,
                d(System::Audio),
                d(System::Video),
                d(System::Oracle),
                d(System::OmMinusRa),
                cov(r.coverage_pct()),
                d(System::OmPlusRa),
                d(System::Ws),
                r.flags.join("; ")
            );
        }
        let e = |s: System| pct(self.single_show(s));
        let _ = writeln!(
            out,
            "{:<7} {:<11} {:>5} {:>9.2} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
            "episode",
            "",
            self.scenes.iter().map(|r| r.utterances).sum::<usize>(),
            self.speech_ms() as f64 / 1000.0,
            e(System::Audio),
            e(System::Video),
            e(System::Oracle),
            e(System::OmMinusRa),
            cov(self.coverage_pct()),
            e(System::OmPlusRa),
            e(System::Ws)
        );
        out
    }

    /// One `key = value` line per figure; absent values are written as `na`.
    pub fn to_kv(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "na".to_string(), |x| format!("{x:.6}"));
        let mut out = String::new();
        let _ = writeln!(out, "scenes = {}", self.scenes.len());
        let _ = writeln!(out, "speech_ms = {}", self.speech_ms());
        for s in System::ALL {
            let _ = writeln!(out, "der.{s} = {}", num(self.single_show(s)));
        }
        let _ = writeln!(out, "coverage.om-ra = {}", num(self.coverage_pct()));
        for r in &self.scenes {
            let k = format!("scene.{}", r.scene);
            let _ = writeln!(out, "{k}.pattern = {},{}", r.pattern.0, r.pattern.1);
            let _ = writeln!(out, "{k}.utterances = {}", r.utterances);
            let _ = writeln!(out, "{k}.speech_ms = {}", r.speech_ms);
            let _ = writeln!(out, "{k}.kept_ms = {}", r.kept_ms);
            for s in System::ALL {
                let _ = writeln!(out, "{k}.der.{s} = {}", num(r.score(s).map(|x| x.der)));
            }
            let _ = writeln!(out, "{k}.coverage.om-ra = {}", num(r.coverage_pct()));
            let _ = writeln!(out, "{k}.flags = {}", r.flags.join("; "));
        }
        out
    }
}
