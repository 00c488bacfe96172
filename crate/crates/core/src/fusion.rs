//! Late fusion of the audio and video partitions of a scene.
//!
//! Clusters of both partitions are paired by a maximum-weight bipartite
//! matching where an edge weighs the speech time the two clusters share.
//! Matched clusters are intersected; utterances outside every intersection
//! are the cases where the modalities disagree. Those are then reassigned to
//! the nearest medoid of the intersections using audio distances only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::clustering::{self, ClusterError};
use crate::features::DistanceMatrix;
use crate::model::{Modality, Partition, UttId, Utterance};

/// Largest side accepted by the exhaustive matching solver.
pub const MAX_MATCHING_SIDE: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("partitions cover different utterance sets")]
    UniverseMismatch,
    #[error("utterance {0} has no known duration")]
    UnknownUtterance(UttId),
    #[error("matching side {0} exceeds the exhaustive limit of {MAX_MATCHING_SIDE}")]
    TooLarge(usize),
    #[error("matched intersection {0} is empty")]
    FusionDegenerate(usize),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

pub type Result<T, E = FusionError> = std::result::Result<T, E>;

/// Non-negative edge weights in milliseconds, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchWeightMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<i64>,
}

impl MatchWeightMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<i64>) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.values[i * self.cols + j]
    }

    pub fn total(&self) -> i64 {
        self.values.iter().sum()
    }
}

pub fn durations(utterances: &[Utterance]) -> BTreeMap<UttId, i64> {
    utterances.iter().map(|u| (u.id, u.duration_ms())).collect()
}

fn duration_of(durations: &BTreeMap<UttId, i64>, id: UttId) -> Result<i64> {
    durations.get(&id).copied().ok_or(FusionError::UnknownUtterance(id))
}

/// `w[i][j]` = total duration of the utterances in both `qa[i]` and `qv[j]`.
pub fn match_weights(qa: &Partition, qv: &Partition, durations: &BTreeMap<UttId, i64>) -> Result<MatchWeightMatrix> {
    if qa.members() != qv.members() {
        return Err(FusionError::UniverseMismatch);
    }
    let (rows, cols) = (qa.clusters.len(), qv.clusters.len());
    let mut values = vec![0; rows * cols];
    for (i, ca) in qa.clusters.iter().enumerate() {
        for &id in ca {
            let j = qv.cluster_of(id).expect("same universe");
            values[i * cols + j] += duration_of(durations, id)?;
        }
    }
    Ok(MatchWeightMatrix { rows, cols, values })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `(row, col)` edges sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total: i64,
}

/// Rearranges `perm` into the next lexicographic permutation; false when it
/// was the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
        return false;
    };
    let j = (i..perm.len())
        .rev()
        .find(|&j| perm[j] > perm[i - 1])
        .expect("pivot exists");
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Maximum-weight matching. With non-negative weights a perfect matching on
/// the square padding attains the optimum, so all permutations are tried;
/// ties keep the lexicographically smallest one. Edges to padding are
/// dropped from the result.
pub fn optimal_matching(w: &MatchWeightMatrix) -> Result<Matching> {
    let k = w.rows.max(w.cols);
    if k > MAX_MATCHING_SIDE {
        return Err(FusionError::TooLarge(k));
    }
    let weight = |i: usize, j: usize| if i < w.rows && j < w.cols { w.get(i, j) } else { 0 };
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_perm = perm.clone();
    let mut best = (0..k).map(|i| weight(i, perm[i])).sum::<i64>();
    while next_permutation(&mut perm) {
        let t = (0..k).map(|i| weight(i, perm[i])).sum::<i64>();
        if t > best {
            best = t;
            best_perm.clone_from(&perm);
        }
    }
    let pairs = best_perm
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < w.rows && j < w.cols)
        .map(|(i, &j)| (i, j))
        .collect();
    Ok(Matching { pairs, total: best })
}

/// Intersections of matched clusters and the utterances left outside them
/// (ascending ids). Intersections keep the order of `matching.pairs`.
pub fn intersect_and_discard(qa: &Partition, qv: &Partition, matching: &Matching) -> (Vec<Vec<UttId>>, Vec<UttId>) {
    let kept: Vec<Vec<UttId>> = matching
        .pairs
        .iter()
        .map(|&(i, j)| {
            let other: BTreeSet<UttId> = qv.clusters[j].iter().copied().collect();
            qa.clusters[i].iter().copied().filter(|id| other.contains(id)).collect()
        })
        .collect();
    let in_kept: BTreeSet<UttId> = kept.iter().flatten().copied().collect();
    let mut discarded: Vec<UttId> = qa
        .members()
        .union(&qv.members())
        .copied()
        .filter(|id| !in_kept.contains(id))
        .collect();
    discarded.sort_unstable();
    (kept, discarded)
}

/// Assigns each discarded utterance to the nearest medoid (audio distance)
/// of the kept clusters; ties go to the lower medoid id. Medoids are
/// computed once, before any reassignment. An empty kept cluster makes the
/// fusion degenerate.
pub fn reallocate(
    scene: usize,
    kept: &[Vec<UttId>],
    discarded: &[UttId],
    audio: &DistanceMatrix,
) -> Result<(Partition, Vec<(UttId, UttId)>)> {
    if let Some(k) = kept.iter().position(Vec::is_empty) {
        return Err(FusionError::FusionDegenerate(k));
    }
    let medoids = kept
        .iter()
        .map(|c| clustering::medoid(c, audio))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let pos = |id: UttId| audio.position(id).ok_or(FusionError::UnknownUtterance(id));
    let medoid_pos = medoids.iter().map(|&m| pos(m)).collect::<Result<Vec<_>>>()?;

    let mut clusters = kept.to_vec();
    let mut moves = Vec::with_capacity(discarded.len());
    for &id in discarded {
        let p = pos(id)?;
        let mut best = 0;
        for k in 1..medoids.len() {
            let (dk, db) = (audio.get(p, medoid_pos[k]), audio.get(p, medoid_pos[best]));
            if dk < db || (dk == db && medoids[k] < medoids[best]) {
                best = k;
            }
        }
        clusters[best].push(id);
        moves.push((id, medoids[best]));
    }
    let order: BTreeMap<UttId, usize> = audio.ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
    for c in &mut clusters {
        c.sort_by_key(|id| order[id]);
    }
    Ok((
        Partition {
            scene,
            modality: Modality::Fused,
            clusters,
            centers: Some(medoids),
        },
        moves,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionResult {
    pub weights: MatchWeightMatrix,
    pub matching: Matching,
    /// Non-empty intersections of matched clusters.
    pub kept: Vec<Vec<UttId>>,
    pub discarded: Vec<UttId>,
    /// `(utterance, medoid)` for every reallocated utterance.
    pub reallocations: Vec<(UttId, UttId)>,
    /// Total partition after reallocation (or the audio fallback).
    pub partition: Partition,
    /// Set when a matched intersection was empty and the audio partition
    /// was used instead.
    pub degenerate: bool,
}

impl FusionResult {
    /// Partial partition made of the intersections only.
    pub fn kept_partition(&self) -> Partition {
        Partition::new(self.partition.scene, Modality::Fused, self.kept.clone())
    }
}

/// Full fusion of one scene.
pub fn fuse(
    qa: &Partition,
    qv: &Partition,
    durations: &BTreeMap<UttId, i64>,
    audio: &DistanceMatrix,
) -> Result<FusionResult> {
    let weights = match_weights(qa, qv, durations)?;
    let matching = optimal_matching(&weights)?;
    let (kept, discarded) = intersect_and_discard(qa, qv, &matching);
    let (partition, reallocations, degenerate) = match reallocate(qa.scene, &kept, &discarded, audio) {
        Ok((p, moves)) => (p, moves, false),
        Err(FusionError::FusionDegenerate(_)) => {
            let fallback = Partition {
                modality: Modality::Fused,
                ..qa.clone()
            };
            (fallback, Vec::new(), true)
        }
        Err(e) => return Err(e),
    };
    Ok(FusionResult {
        weights,
        matching,
        kept: kept.into_iter().filter(|k| !k.is_empty()).collect(),
        discarded,
        reallocations,
        partition,
        degenerate,
    })
}

fn ids(v: &[UttId]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn clusters(c: &[Vec<UttId>]) -> String {
    c.iter().map(|x| ids(x)).collect::<Vec<_>>().join(" ")
}

/// Human-readable record of one scene's fusion.
pub fn write_trace(qa: &Partition, qv: &Partition, r: &FusionResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scene {}", qa.scene);
    let _ = writeln!(out, "audio: {}", clusters(&qa.clusters));
    let _ = writeln!(out, "video: {}", clusters(&qv.clusters));
    let _ = writeln!(out, "weights_ms:");
    for i in 0..r.weights.rows {
        let row: Vec<String> = (0..r.weights.cols).map(|j| r.weights.get(i, j).to_string()).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
    let pairs: Vec<String> = r.matching.pairs.iter().map(|(i, j)| format!("a{i}-v{j}")).collect();
    let _ = writeln!(out, "matching: {} total_ms={}", pairs.join(" "), r.matching.total);
    let _ = writeln!(out, "kept: {}", clusters(&r.kept));
    let _ = writeln!(out, "discarded: {}", ids(&r.discarded));
    for (u, m) in &r.reallocations {
        let _ = writeln!(out, "reallocate: {u} -> medoid {m}");
    }
    if r.degenerate {
        let _ = writeln!(out, "degenerate: empty intersection, audio partition used");
    }
    let _ = writeln!(out, "final: {}", clusters(&r.partition.clusters));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeSpan;
    use proptest::prelude::*;

    fn part(modality: Modality, c: Vec<Vec<UttId>>) -> Partition {
        Partition::new(0, modality, c)
    }

    fn unit(ids: &[UttId]) -> BTreeMap<UttId, i64> {
        ids.iter().map(|&i| (i, 1000)).collect()
    }

    /// Audio distances where u3 sits next to u1/u2.
    fn fig3_audio() -> DistanceMatrix {
        let pts = [(1, 0.0_f64), (2, 0.2), (3, 0.5), (4, 10.0)];
        let values = pts
            .iter()
            .flat_map(|a| pts.iter().map(move |b| (a.1 - b.1).abs()))
            .collect();
        DistanceMatrix::from_values(pts.iter().map(|p| p.0).collect(), values)
    }

    #[test]
    fn fig3_weights_matching_and_discards() {
        let qa = part(Modality::Audio, vec![vec![1, 2, 3], vec![4]]);
        let qv = part(Modality::Video, vec![vec![1, 2], vec![3, 4]]);
        let w = match_weights(&qa, &qv, &unit(&[1, 2, 3, 4])).unwrap();
        assert_eq!(w, MatchWeightMatrix::from_rows(&[vec![2000, 1000], vec![0, 1000]]));
        let m = optimal_matching(&w).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.total, 3000);
        let (kept, discarded) = intersect_and_discard(&qa, &qv, &m);
        assert_eq!(kept, vec![vec![1, 2], vec![4]]);
        assert_eq!(discarded, vec![3]);
        let (final_p, moves) = reallocate(0, &kept, &discarded, &fig3_audio()).unwrap();
        assert_eq!(final_p.clusters, vec![vec![1, 2, 3], vec![4]]);
        assert_eq!(moves, vec![(3, 1)]);
    }

    #[test]
    fn identical_partitions_give_diagonal() {
        let q = part(Modality::Audio, vec![vec![1, 2], vec![3]]);
        let w = match_weights(&q, &q, &unit(&[1, 2, 3])).unwrap();
        assert_eq!(w, MatchWeightMatrix::from_rows(&[vec![2000, 0], vec![0, 1000]]));
        let m = optimal_matching(&w).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        let (_, discarded) = intersect_and_discard(&q, &q, &m);
        assert!(discarded.is_empty());
    }

    #[test]
    fn universe_mismatch() {
        let qa = part(Modality::Audio, vec![vec![1], vec![2]]);
        let qv = part(Modality::Video, vec![vec![1], vec![3]]);
        assert_eq!(
            match_weights(&qa, &qv, &unit(&[1, 2, 3])),
            Err(FusionError::UniverseMismatch)
        );
    }

    #[test]
    fn crossed_partitions_discard_half() {
        let qa = part(Modality::Audio, vec![vec![1, 2], vec![3, 4]]);
        let qv = part(Modality::Video, vec![vec![1, 3], vec![2, 4]]);
        let w = match_weights(&qa, &qv, &unit(&[1, 2, 3, 4])).unwrap();
        let m = optimal_matching(&w).unwrap();
        // Equal weights: the identity permutation comes first.
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        let (kept, discarded) = intersect_and_discard(&qa, &qv, &m);
        assert_eq!(kept, vec![vec![1], vec![4]]);
        assert_eq!(discarded, vec![2, 3]);
    }

    #[test]
    fn empty_kept_cluster_is_degenerate() {
        let r = reallocate(0, &[vec![1, 2], vec![]], &[3, 4], &fig3_audio());
        assert_eq!(r, Err(FusionError::FusionDegenerate(1)));
    }

    #[test]
    fn nothing_to_reallocate() {
        let kept = vec![vec![1, 2], vec![4]];
        let (p, moves) = reallocate(0, &kept, &[], &fig3_audio()).unwrap();
        assert_eq!(p.clusters, kept);
        assert!(moves.is_empty());
    }

    #[test]
    fn empty_intersection_falls_back_to_audio() {
        // An empty video cluster forces a zero-weight matched edge.
        let qa = part(Modality::Audio, vec![vec![1, 2, 3], vec![4]]);
        let qv = part(Modality::Video, vec![vec![1, 2, 3, 4], vec![]]);
        let r = fuse(&qa, &qv, &unit(&[1, 2, 3, 4]), &fig3_audio()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.partition.clusters, qa.clusters);
        assert_eq!(r.partition.modality, Modality::Fused);
    }

    #[test]
    fn fuse_is_identity_on_agreement() {
        let q = part(Modality::Audio, vec![vec![1, 2, 3], vec![4]]);
        let r = fuse(&q, &q, &unit(&[1, 2, 3, 4]), &fig3_audio()).unwrap();
        assert!(!r.degenerate);
        assert!(r.discarded.is_empty());
        assert_eq!(r.partition.clusters, q.clusters);
    }

    #[test]
    fn rectangular_matrix_is_padded() {
        let w = MatchWeightMatrix::from_rows(&[vec![1, 5, 2]]);
        let m = optimal_matching(&w).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.total, 5);
    }

    #[test]
    fn trace_mentions_every_stage() {
        let qa = part(Modality::Audio, vec![vec![1, 2, 3], vec![4]]);
        let qv = part(Modality::Video, vec![vec![1, 2], vec![3, 4]]);
        let r = fuse(&qa, &qv, &unit(&[1, 2, 3, 4]), &fig3_audio()).unwrap();
        let t = write_trace(&qa, &qv, &r);
        assert!(t.contains("discarded: {3}"));
        assert!(t.contains("reallocate: 3 -> medoid 1"));
        assert!(t.contains("final: {1,2,3} {4}"));
    }

    fn random_partitions(n: usize, assign_a: &[usize], assign_v: &[usize], k: usize) -> (Partition, Partition) {
        let build = |assign: &[usize]| {
            let mut c = vec![Vec::new(); k];
            for id in 0..n {
                c[assign[id]].push(id as UttId);
            }
            c
        };
        (
            part(Modality::Audio, build(assign_a)),
            part(Modality::Video, build(assign_v)),
        )
    }

    proptest! {
        #[test]
        fn weights_conserve_duration(
            (n, k, a, v, d) in (1usize..10, 1usize..4).prop_flat_map(|(n, k)| (
                Just(n), Just(k),
                prop::collection::vec(0..k, n),
                prop::collection::vec(0..k, n),
                prop::collection::vec(1i64..5000, n),
            ))
        ) {
            let (qa, qv) = random_partitions(n, &a, &v, k);
            let durs: BTreeMap<UttId, i64> = (0..n).map(|i| (i as UttId, d[i])).collect();
            let w = match_weights(&qa, &qv, &durs).unwrap();
            prop_assert_eq!(w.total(), d.iter().sum::<i64>());
            for i in 0..k {
                let row: i64 = (0..k).map(|j| w.get(i, j)).sum();
                let expect: i64 = qa.clusters[i].iter().map(|id| durs[id]).sum();
                prop_assert_eq!(row, expect);
                let col: i64 = (0..k).map(|j| w.get(j, i)).sum();
                let expect: i64 = qv.clusters[i].iter().map(|id| durs[id]).sum();
                prop_assert_eq!(col, expect);
            }
            let m = optimal_matching(&w).unwrap();
            let (kept, discarded) = intersect_and_discard(&qa, &qv, &m);
            let mut all: Vec<UttId> = kept.iter().flatten().copied().chain(discarded).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n as UttId).collect::<Vec<_>>());
        }

        #[test]
        fn fused_partition_is_total(
            (n, a, v) in (2usize..10).prop_flat_map(|n| (
                Just(n),
                prop::collection::vec(0usize..2, n),
                prop::collection::vec(0usize..2, n),
            )),
            xs in prop::collection::vec(-5.0f64..5.0, 10),
        ) {
            let (qa, qv) = random_partitions(n, &a, &v, 2);
            let utts: Vec<Utterance> = (0..n)
                .map(|i| Utterance::new(i as UttId, TimeSpan::new(0, 1000 + i as i64).unwrap()))
                .collect();
            let values = (0..n * n).map(|k| (xs[k / n] - xs[k % n]).abs()).collect();
            let audio = DistanceMatrix::from_values((0..n as UttId).collect(), values);
            let r = fuse(&qa, &qv, &durations(&utts), &audio).unwrap();
            prop_assert!(r.partition.is_consistent());
            prop_assert_eq!(r.partition.members(), qa.members());
        }
    }
}
