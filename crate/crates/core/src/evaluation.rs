//! Diarization and shot detection scoring.
//!
//! Hypothesis and reference share the subtitle segmentation, so the
//! diarization error rate reduces to speaker confusion time under the
//! optimal one-to-one cluster-to-speaker mapping.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fusion::{optimal_matching, FusionError, MatchWeightMatrix};
use crate::ingest::ReferenceMap;
use crate::model::{Partition, Shot, SpeakerId, UttId};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("utterance {0} has no reference speaker")]
    MissingReference(UttId),
    #[error("utterance {0} has no known duration")]
    UnknownUtterance(UttId),
    #[error("nothing to score in scene {0}")]
    EmptyScoredSet(usize),
    #[error(transparent)]
    Matching(#[from] FusionError),
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

/// Speaker assigned to each hypothesis cluster (`None` when unmatched).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterMapping {
    pub speakers: Vec<Option<SpeakerId>>,
    /// Duration attributed to the right speaker under this mapping.
    pub matched_ms: i64,
}

impl ClusterMapping {
    pub fn speaker_of(&self, hyp: &Partition, id: UttId) -> Option<&SpeakerId> {
        hyp.cluster_of(id).and_then(|k| self.speakers[k].as_ref())
    }
}

fn reference_of(reference: &ReferenceMap, id: UttId) -> Result<&SpeakerId> {
    reference.get(&id).ok_or(EvalError::MissingReference(id))
}

fn duration_of(durations: &BTreeMap<UttId, i64>, id: UttId) -> Result<i64> {
    durations.get(&id).copied().ok_or(EvalError::UnknownUtterance(id))
}

/// Maximum-overlap one-to-one mapping between clusters and reference
/// speakers, computed over the utterances of `hyp`.
pub fn map_clusters(
    hyp: &Partition,
    reference: &ReferenceMap,
    durations: &BTreeMap<UttId, i64>,
) -> Result<ClusterMapping> {
    let mut speakers: BTreeSet<&SpeakerId> = BTreeSet::new();
    for id in hyp.clusters.iter().flatten() {
        speakers.insert(reference_of(reference, *id)?);
    }
    let speakers: Vec<&SpeakerId> = speakers.into_iter().collect();
    let cols = speakers.len();
    let mut values = vec![0; hyp.clusters.len() * cols];
    for (i, c) in hyp.clusters.iter().enumerate() {
        for &id in c {
            let spk = reference_of(reference, id)?;
            let j = speakers.binary_search(&spk).expect("speaker collected above");
            values[i * cols + j] += duration_of(durations, id)?;
        }
    }
    let w = MatchWeightMatrix::new(hyp.clusters.len(), cols, values);
    let m = optimal_matching(&w)?;
    let mut mapped = vec![None; hyp.clusters.len()];
    for &(i, j) in &m.pairs {
        if w.get(i, j) > 0 {
            mapped[i] = Some(speakers[j].clone());
        }
    }
    Ok(ClusterMapping {
        speakers: mapped,
        matched_ms: m.total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneScore {
    pub scene: usize,
    pub der: f64,
    pub error_ms: i64,
    /// Reference speech that was scored.
    pub scored_ms: i64,
}

fn restrict(hyp: &Partition, scored: &BTreeSet<UttId>) -> Partition {
    Partition {
        clusters: hyp
            .clusters
            .iter()
            .map(|c| c.iter().copied().filter(|id| scored.contains(id)).collect())
            .collect(),
        centers: None,
        ..hyp.clone()
    }
}

fn scored_total(
    scene: usize,
    scored: &BTreeSet<UttId>,
    reference: &ReferenceMap,
    durations: &BTreeMap<UttId, i64>,
) -> Result<i64> {
    if scored.is_empty() {
        return Err(EvalError::EmptyScoredSet(scene));
    }
    let mut total = 0;
    for &id in scored {
        reference_of(reference, id)?;
        total += duration_of(durations, id)?;
    }
    if total == 0 {
        return Err(EvalError::EmptyScoredSet(scene));
    }
    Ok(total)
}

fn score(scene: usize, error_ms: i64, scored_ms: i64) -> SceneScore {
    SceneScore {
        scene,
        der: error_ms as f64 / scored_ms as f64,
        error_ms,
        scored_ms,
    }
}

/// Confusion time over `scored` divided by its duration. Scored utterances
/// the hypothesis leaves unassigned count as errors.
pub fn der_scene(
    hyp: &Partition,
    reference: &ReferenceMap,
    durations: &BTreeMap<UttId, i64>,
    scored: &BTreeSet<UttId>,
) -> Result<SceneScore> {
    let total = scored_total(hyp.scene, scored, reference, durations)?;
    let mapping = map_clusters(&restrict(hyp, scored), reference, durations)?;
    Ok(score(hyp.scene, total - mapping.matched_ms, total))
}

/// An utterance counts as correct when either modality, under its own
/// optimal mapping, names the reference speaker.
pub fn der_oracle(
    qa: &Partition,
    qv: &Partition,
    reference: &ReferenceMap,
    durations: &BTreeMap<UttId, i64>,
    scored: &BTreeSet<UttId>,
) -> Result<SceneScore> {
    let total = scored_total(qa.scene, scored, reference, durations)?;
    let (qa, qv) = (restrict(qa, scored), restrict(qv, scored));
    let ma = map_clusters(&qa, reference, durations)?;
    let mv = map_clusters(&qv, reference, durations)?;
    let mut error = 0;
    for &id in scored {
        let truth = reference_of(reference, id)?;
        let ok = ma.speaker_of(&qa, id) == Some(truth) || mv.speaker_of(&qv, id) == Some(truth);
        if !ok {
            error += duration_of(durations, id)?;
        }
    }
    Ok(score(qa.scene, error, total))
}

/// Share of the scene's speech kept, in percent.
pub fn coverage(kept: &BTreeSet<UttId>, scene: &[UttId], durations: &BTreeMap<UttId, i64>) -> Result<f64> {
    let mut total = 0;
    let mut covered = 0;
    for &id in scene {
        let d = duration_of(durations, id)?;
        total += d;
        if kept.contains(&id) {
            covered += d;
        }
    }
    Ok(if total == 0 {
        0.0
    } else {
        covered as f64 * 100.0 / total as f64
    })
}

/// Precision, recall and F1 of a detection task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionScore {
    pub true_positives: usize,
    pub hypothesised: usize,
    pub expected: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl DetectionScore {
    fn new(true_positives: usize, hypothesised: usize, expected: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(true_positives, hypothesised);
        let recall = ratio(true_positives, expected);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_positives,
            hypothesised,
            expected,
            precision,
            recall,
            f1,
        }
    }
}

/// Cut positions (frame indices) matched one-to-one within `tol_frames`,
/// greedily by increasing distance.
pub fn score_shot_cuts(hyp: &[usize], reference: &[usize], tol_frames: usize) -> DetectionScore {
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &h) in hyp.iter().enumerate() {
        for (j, &r) in reference.iter().enumerate() {
            let dist = h.abs_diff(r);
            if dist <= tol_frames {
                candidates.push((dist, j, i));
            }
        }
    }
    candidates.sort_unstable();
    let mut used_h = vec![false; hyp.len()];
    let mut used_r = vec![false; reference.len()];
    let mut tp = 0;
    for (_, j, i) in candidates {
        if !used_h[i] && !used_r[j] {
            used_h[i] = true;
            used_r[j] = true;
            tp += 1;
        }
    }
    DetectionScore::new(tp, hyp.len(), reference.len())
}

/// Per-shot similarity lists: a shot is correctly paired when its
/// hypothesised and reference lists share at least one shot.
pub fn score_shot_similarity(hyp: &[Vec<usize>], reference: &[Vec<usize>]) -> DetectionScore {
    let n = hyp.len().max(reference.len());
    let empty = Vec::new();
    let (mut tp, mut with_hyp, mut with_ref) = (0, 0, 0);
    for k in 0..n {
        let h = hyp.get(k).unwrap_or(&empty);
        let r = reference.get(k).unwrap_or(&empty);
        with_hyp += usize::from(!h.is_empty());
        with_ref += usize::from(!r.is_empty());
        tp += usize::from(h.iter().any(|x| r.contains(x)));
    }
    DetectionScore::new(tp, with_hyp, with_ref)
}

/// First frame of every shot but the first, derived from shot start times.
pub fn cut_frames(shots: &[Shot], fps: f64) -> Vec<usize> {
    shots
        .iter()
        .skip(1)
        .map(|s| match s.frames {
            Some(f) => f.first,
            None => crate::shot_analysis::ms_to_frame(s.span.start_ms(), fps),
        })
        .collect()
}

/// For each shot, the other shots carrying the same label.
pub fn similarity_lists(shots: &[Shot]) -> Vec<Vec<usize>> {
    shots
        .iter()
        .map(|s| {
            shots
                .iter()
                .filter(|o| o.index != s.index && o.label.is_some() && o.label == s.label)
                .map(|o| o.index)
                .collect()
        })
        .collect()
}

/// Hypothesis similarity lists re-expressed on the reference shots: each
/// reference shot takes the list of the hypothesis shot overlapping it most,
/// translated through the same overlap map.
pub fn align_similarity_lists(hyp: &[Shot], reference: &[Shot]) -> Vec<Vec<usize>> {
    let best = |s: &Shot, pool: &[Shot]| -> Option<usize> {
        pool.iter()
            .map(|o| (o.span.overlap_ms(&s.span), o.index))
            .filter(|&(ov, _)| ov > 0)
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, i)| i)
    };
    let hyp_to_ref: Vec<Option<usize>> = hyp.iter().map(|h| best(h, reference)).collect();
    let hyp_lists = similarity_lists(hyp);
    reference
        .iter()
        .map(|r| match best(r, hyp) {
            None => Vec::new(),
            Some(h) => {
                let mut list: Vec<usize> = hyp_lists[h]
                    .iter()
                    .filter_map(|&o| hyp_to_ref[o])
                    .filter(|&o| o != r.index)
                    .collect();
                list.sort_unstable();
                list.dedup();
                list
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Label, Modality, TimeSpan};
    use proptest::prelude::*;

    fn part(c: Vec<Vec<UttId>>) -> Partition {
        Partition::new(0, Modality::Audio, c)
    }

    fn reference(pairs: &[(UttId, &str)]) -> ReferenceMap {
        pairs.iter().map(|(i, s)| (*i, s.to_string())).collect()
    }

    fn unit(n: UttId) -> BTreeMap<UttId, i64> {
        (0..n).map(|i| (i, 1000)).collect()
    }

    fn all(n: UttId) -> BTreeSet<UttId> {
        (0..n).collect()
    }

    #[test]
    fn identity_mapping() {
        let r = reference(&[(0, "a"), (1, "a"), (2, "b"), (3, "b")]);
        let h = part(vec![vec![0, 1], vec![2, 3]]);
        let m = map_clusters(&h, &r, &unit(4)).unwrap();
        assert_eq!(m.speakers, vec![Some("a".into()), Some("b".into())]);
        assert_eq!(m.matched_ms, 4000);
        assert_eq!(der_scene(&h, &r, &unit(4), &all(4)).unwrap().der, 0.0);
    }

    #[test]
    fn swapped_labels_same_der() {
        let r = reference(&[(0, "a"), (1, "a"), (2, "b"), (3, "b")]);
        let h = part(vec![vec![2, 3], vec![0, 1]]);
        let m = map_clusters(&h, &r, &unit(4)).unwrap();
        assert_eq!(m.speakers, vec![Some("b".into()), Some("a".into())]);
        assert_eq!(der_scene(&h, &r, &unit(4), &all(4)).unwrap().der, 0.0);
    }

    #[test]
    fn one_in_four_wrong() {
        let r = reference(&[(0, "a"), (1, "a"), (2, "b"), (3, "b")]);
        let h = part(vec![vec![0, 1, 2], vec![3]]);
        let s = der_scene(&h, &r, &unit(4), &all(4)).unwrap();
        assert_eq!(s.der, 0.25);
        assert_eq!((s.error_ms, s.scored_ms), (1000, 4000));
    }

    #[test]
    fn single_speaker_scene_penalises_second_cluster() {
        let r = reference(&[(0, "a"), (1, "a"), (2, "a")]);
        let h = part(vec![vec![0, 1], vec![2]]);
        let s = der_scene(&h, &r, &unit(3), &all(3)).unwrap();
        assert!((s.der - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_reference_and_empty_set() {
        let r = reference(&[(0, "a")]);
        let h = part(vec![vec![0], vec![1]]);
        assert_eq!(
            der_scene(&h, &r, &unit(2), &all(2)),
            Err(EvalError::MissingReference(1))
        );
        assert_eq!(
            der_scene(&h, &r, &unit(2), &BTreeSet::new()),
            Err(EvalError::EmptyScoredSet(0))
        );
    }

    #[test]
    fn partial_scoring_uses_kept_set() {
        let r = reference(&[(0, "a"), (1, "a"), (2, "b"), (3, "b")]);
        let h = part(vec![vec![0, 1], vec![3]]);
        let kept: BTreeSet<UttId> = [0, 1, 3].into();
        assert_eq!(der_scene(&h, &r, &unit(4), &kept).unwrap().der, 0.0);
        // Scoring the full scene counts the unassigned utterance as an error.
        assert_eq!(der_scene(&h, &r, &unit(4), &all(4)).unwrap().der, 0.25);
    }

    #[test]
    fn oracle_or_semantics() {
        let r = reference(&[(0, "a"), (1, "a"), (2, "b"), (3, "b")]);
        let audio = part(vec![vec![0, 1], vec![2, 3]]);
        let video = part(vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(der_oracle(&audio, &video, &r, &unit(4), &all(4)).unwrap().der, 0.0);

        // Both modalities misplace utterance 2.
        let audio = part(vec![vec![0, 1, 2], vec![3]]);
        let video = part(vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(der_oracle(&audio, &video, &r, &unit(4), &all(4)).unwrap().der, 0.25);
    }

    #[test]
    fn coverage_examples() {
        let scene = [1, 2, 3, 4];
        let durs: BTreeMap<UttId, i64> = scene.iter().map(|&i| (i, 1000)).collect();
        assert_eq!(coverage(&scene.into(), &scene, &durs).unwrap(), 100.0);
        assert_eq!(coverage(&[1, 2, 4].into(), &scene, &durs).unwrap(), 75.0);
    }

    #[test]
    fn cut_scores() {
        let s = score_shot_cuts(&[10, 20, 30], &[10, 20, 30], 1);
        assert_eq!(s.f1, 1.0);
        let s = score_shot_cuts(&[], &[10, 20], 1);
        assert_eq!((s.recall, s.f1), (0.0, 0.0));
        let s = score_shot_cuts(&[11, 25], &[10, 20], 1);
        assert_eq!(s.true_positives, 1);
        assert_eq!(s.f1, 0.5);
        // Two hypotheses near one reference count once.
        let s = score_shot_cuts(&[9, 11], &[10], 1);
        assert_eq!(s.true_positives, 1);
    }

    #[test]
    fn similarity_scores() {
        let lists = vec![vec![2], vec![], vec![0]];
        assert_eq!(score_shot_similarity(&lists, &lists).f1, 1.0);
        let hyp = vec![vec![1], vec![0], vec![]];
        let s = score_shot_similarity(&hyp, &lists);
        assert_eq!((s.true_positives, s.hypothesised, s.expected), (0, 2, 2));
    }

    fn shot(index: usize, a: i64, b: i64, label: u32) -> Shot {
        Shot {
            index,
            span: TimeSpan::new(a, b).unwrap(),
            frames: None,
            label: Some(Label(label)),
        }
    }

    #[test]
    fn lists_from_labels_and_alignment() {
        let r = vec![shot(0, 0, 10, 0), shot(1, 10, 20, 1), shot(2, 20, 30, 0)];
        assert_eq!(similarity_lists(&r), vec![vec![2], vec![], vec![0]]);
        // Hypothesis splits shot 1 in two.
        let h = vec![
            shot(0, 0, 10, 5),
            shot(1, 10, 16, 6),
            shot(2, 16, 20, 7),
            shot(3, 20, 30, 5),
        ];
        let aligned = align_similarity_lists(&h, &r);
        assert_eq!(aligned, vec![vec![2], vec![], vec![0]]);
        assert_eq!(cut_frames(&r, 1000.0), vec![10, 20]);
    }

    proptest! {
        #[test]
        fn der_ignores_cluster_order(
            (assign, speakers, durs) in (2usize..9).prop_flat_map(|n| (
                prop::collection::vec(0usize..3, n),
                prop::collection::vec(0usize..3, n),
                prop::collection::vec(1i64..4000, n),
            )),
            rot in 1usize..3,
        ) {
            let n = assign.len();
            let mut clusters = vec![Vec::new(); 3];
            for (i, &k) in assign.iter().enumerate() {
                clusters[k].push(i as UttId);
            }
            let r: ReferenceMap = speakers.iter().enumerate().map(|(i, s)| (i as UttId, format!("s{s}"))).collect();
            let d: BTreeMap<UttId, i64> = durs.iter().enumerate().map(|(i, &x)| (i as UttId, x)).collect();
            let scored: BTreeSet<UttId> = (0..n as UttId).collect();
            let a = der_scene(&part(clusters.clone()), &r, &d, &scored).unwrap();
            clusters.rotate_left(rot);
            let b = der_scene(&part(clusters), &r, &d, &scored).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a.der));
        }
    }
}
