//! End-to-end diarization of one episode, scene by scene.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::clustering::{cluster_distances, weighted_distances};
use crate::dialogue_patterns::{build_scenes, extract_patterns, shot_labels};
use crate::evaluation::{der_oracle, der_scene};
use crate::features::{audio_vectors, distance_matrix, video_vectors};
use crate::fusion::{durations, fuse, write_trace, FusionResult};
use crate::ingest::{EmbeddingTable, ReferenceMap};
use crate::model::{Modality, Partition, Scene, Shot, UttId, Utterance};
use crate::report::{EpisodeReport, SceneReport, System};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiarizeOptions {
    /// Clusters per scene.
    pub p: usize,
    pub min_cover: f64,
    /// Audio weight of the weighted-sum baseline.
    pub alpha: f64,
}

impl Default for DiarizeOptions {
    fn default() -> Self {
        Self {
            p: 2,
            min_cover: 0.5,
            alpha: 0.5,
        }
    }
}

pub struct EpisodeInput<'a> {
    pub shots: &'a [Shot],
    pub utterances: &'a [Utterance],
    pub embeddings: &'a EmbeddingTable,
    pub reference: Option<&'a ReferenceMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneOutcome {
    pub scene: Scene,
    pub audio: Option<Partition>,
    pub video: Option<Partition>,
    pub fusion: Option<FusionResult>,
    pub ws: Option<Partition>,
    pub report: SceneReport,
}

impl SceneOutcome {
    pub fn trace(&self) -> Option<String> {
        let (qa, qv, f) = (self.audio.as_ref()?, self.video.as_ref()?, self.fusion.as_ref()?);
        let mut out = write_trace(qa, qv, f);
        if let Some(ws) = &self.ws {
            let clusters: Vec<String> = ws
                .clusters
                .iter()
                .map(|c| format!("{{{}}}", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            let _ = writeln!(out, "ws: {}", clusters.join(" "));
        }
        Some(out)
    }

    /// Hypothesis partition produced by `system`, if any.
    pub fn partition(&self, system: System) -> Option<Partition> {
        match system {
            System::Audio => self.audio.clone(),
            System::Video => self.video.clone(),
            System::Oracle => None,
            System::OmMinusRa => self.fusion.as_ref().map(FusionResult::kept_partition),
            System::OmPlusRa => self.fusion.as_ref().map(|f| f.partition.clone()),
            System::Ws => self.ws.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diarization {
    pub outcomes: Vec<SceneOutcome>,
    pub report: EpisodeReport,
}

/// Scenes are processed in parallel on the current rayon pool; results keep
/// scene order.
pub fn diarize(input: &EpisodeInput<'_>, opts: &DiarizeOptions) -> Result<Diarization, Error> {
    let labels = shot_labels(input.shots)?;
    let patterns = extract_patterns(&labels);
    let scenes = build_scenes(input.shots, &patterns, input.utterances, opts.min_cover)?;
    let durs = durations(input.utterances);
    let results: Vec<Result<SceneOutcome, Error>> = scenes
        .into_par_iter()
        .map(|scene| diarize_scene(scene, input, &durs, opts))
        .collect();
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let report = EpisodeReport {
        scenes: outcomes.iter().map(|o| o.report.clone()).collect(),
    };
    Ok(Diarization { outcomes, report })
}

fn diarize_scene(
    scene: Scene,
    input: &EpisodeInput<'_>,
    durs: &BTreeMap<UttId, i64>,
    opts: &DiarizeOptions,
) -> Result<SceneOutcome, Error> {
    let speech_ms = scene
        .utterances
        .iter()
        .map(|id| durs.get(id).copied().unwrap_or(0))
        .sum();
    let mut outcome = SceneOutcome {
        report: SceneReport::new(scene.id, scene.pattern, scene.utterances.len(), speech_ms),
        scene,
        audio: None,
        video: None,
        fusion: None,
        ws: None,
    };
    if outcome.scene.utterances.is_empty() {
        outcome.report.flags.push("no speech".into());
        return Ok(outcome);
    }
    let fa = audio_vectors(&outcome.scene, input.embeddings)?;
    let fv = video_vectors(&outcome.scene, input.utterances, input.shots)?;
    let (da, dv) = (distance_matrix(&fa), distance_matrix(&fv));
    let id = outcome.scene.id;

    let clustered = (|| -> Result<_, Error> {
        let qa = cluster_distances(id, Modality::Audio, &da, opts.p)?;
        let qv = cluster_distances(id, Modality::Video, &dv, opts.p)?;
        let ws = cluster_distances(id, Modality::Fused, &weighted_distances(&da, &dv, opts.alpha)?, opts.p)?;
        let fused = fuse(&qa, &qv, durs, &da)?;
        Ok((qa, qv, ws, fused))
    })();
    let (qa, qv, ws, fused) = match clustered {
        Ok(x) => x,
        Err(e) => {
            outcome.report.flags.push(format!("skipped: {e}"));
            return Ok(outcome);
        }
    };
    if fused.degenerate {
        outcome
            .report
            .flags
            .push("fusion degenerate: audio partition used".into());
    }
    let kept: BTreeSet<UttId> = fused.kept.iter().flatten().copied().collect();
    outcome.report.kept_ms = kept.iter().map(|id| durs[id]).sum();

    if let Some(reference) = input.reference {
        let full: BTreeSet<UttId> = outcome.scene.utterances.iter().copied().collect();
        let scored = [
            (System::Audio, der_scene(&qa, reference, durs, &full)),
            (System::Video, der_scene(&qv, reference, durs, &full)),
            (System::Oracle, der_oracle(&qa, &qv, reference, durs, &full)),
            (
                System::OmMinusRa,
                der_scene(&fused.kept_partition(), reference, durs, &kept),
            ),
            (System::OmPlusRa, der_scene(&fused.partition, reference, durs, &full)),
            (System::Ws, der_scene(&ws, reference, durs, &full)),
        ];
        for (system, result) in scored {
            match result {
                Ok(s) => outcome.report.set_score(system, s),
                Err(e) => outcome.report.flags.push(format!("{system} unscored: {e}")),
            }
        }
    }
    outcome.audio = Some(qa);
    outcome.video = Some(qv);
    outcome.ws = Some(ws);
    outcome.fusion = Some(fused);
    Ok(outcome)
}

/// `scene,system,utt_id,cluster` rows for every produced partition.
pub fn write_partitions(outcomes: &[SceneOutcome]) -> String {
    let mut out = String::from("scene,system,utt_id,cluster\n");
    for o in outcomes {
        for system in System::ALL {
            if let Some(p) = o.partition(system) {
                for (k, c) in p.clusters.iter().enumerate() {
                    for id in c {
                        let _ = writeln!(out, "{},{},{},{}", o.scene.id, system, id, k);
                    }
                }
            }
        }
    }
    out
}
