//! Exact p-median clustering of a scene's utterances.
//!
//! The solver enumerates every set of `p` centers; for a fixed center set the
//! optimal assignment sends each point to its nearest center, so the
//! enumeration is globally optimal. Scenes hold a few dozen utterances at
//! most, which keeps `C(n, p)` small for `p = 2`.

use thiserror::Error;

use crate::features::{distance_matrix, DistanceMatrix, FeatureMatrix};
use crate::model::{Modality, Partition, UttId};

/// Largest `n` accepted for `p ≤ 2`.
pub const MAX_POINTS_SMALL_P: usize = 64;
/// Largest `n` accepted for `p > 2`.
pub const MAX_POINTS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("p = {p} is invalid for {n} points")]
    InvalidP { p: usize, n: usize },
    #[error("{n} points exceed the exact solver limit of {limit} for p = {p}")]
    TooLarge { n: usize, p: usize, limit: usize },
    #[error("audio and video matrices list different utterances")]
    OrderMismatch,
    #[error("empty cluster has no medoid")]
    EmptyCluster,
    #[error("utterance {0} is not in the distance matrix")]
    UnknownUtterance(UttId),
    #[error("weight alpha = {0} outside [0, 1]")]
    InvalidAlpha(f64),
}

pub type Result<T, E = ClusterError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct PMedianSolution {
    /// Center positions, ascending.
    pub centers: Vec<usize>,
    /// Center position assigned to each point.
    pub assignment: Vec<usize>,
    pub objective: f64,
}

/// Nearest center of point `j`; ties go to the lower center position.
fn nearest(d: &DistanceMatrix, j: usize, centers: &[usize]) -> usize {
    let mut best = centers[0];
    for &c in &centers[1..] {
        if d.get(j, c) < d.get(j, best) {
            best = c;
        }
    }
    best
}

fn cost(d: &DistanceMatrix, centers: &[usize]) -> f64 {
    (0..d.len()).map(|j| d.get(j, nearest(d, j, centers))).sum()
}

/// Globally optimal p-median solution. Among equal objectives the
/// lexicographically smallest center set wins.
pub fn pmedian_solve(d: &DistanceMatrix, p: usize) -> Result<PMedianSolution> {
    let n = d.len();
    if p == 0 || p > n {
        return Err(ClusterError::InvalidP { p, n });
    }
    let limit = if p <= 2 { MAX_POINTS_SMALL_P } else { MAX_POINTS };
    if n > limit {
        return Err(ClusterError::TooLarge { n, p, limit });
    }

    // Combinations in lexicographic order.
    let mut combo: Vec<usize> = (0..p).collect();
    let mut best_centers = combo.clone();
    let mut best = cost(d, &combo);
    while let Some(i) = (0..p).rev().find(|&i| combo[i] < n - p + i) {
        combo[i] += 1;
        for k in i + 1..p {
            combo[k] = combo[k - 1] + 1;
        }
        let c = cost(d, &combo);
        if c < best {
            best = c;
            best_centers.clone_from(&combo);
        }
    }

    Ok(PMedianSolution {
        assignment: assign(d, &best_centers),
        centers: best_centers,
        objective: best,
    })
}

/// Assigns each point to its nearest center.
pub fn assign(d: &DistanceMatrix, centers: &[usize]) -> Vec<usize> {
    (0..d.len()).map(|j| nearest(d, j, centers)).collect()
}

/// Groups points by center, clusters ordered like `centers`.
fn partition_from(scene: usize, modality: Modality, d: &DistanceMatrix, sol: &PMedianSolution) -> Partition {
    let ids = d.ids();
    let clusters = sol
        .centers
        .iter()
        .map(|&c| {
            (0..ids.len())
                .filter(|&j| sol.assignment[j] == c)
                .map(|j| ids[j])
                .collect()
        })
        .collect();
    Partition {
        scene,
        modality,
        clusters,
        centers: Some(sol.centers.iter().map(|&c| ids[c]).collect()),
    }
}

/// p-median clustering of one distance matrix; `p` is lowered to `n` for
/// tiny scenes.
pub fn cluster_distances(scene: usize, modality: Modality, d: &DistanceMatrix, p: usize) -> Result<Partition> {
    let p = p.min(d.len());
    let sol = pmedian_solve(d, p)?;
    Ok(partition_from(scene, modality, d, &sol))
}

pub fn cluster_scene(f: &FeatureMatrix, p: usize) -> Result<Partition> {
    cluster_distances(f.scene, f.modality, &distance_matrix(f), p)
}

/// Weighted sum of the two max-normalized modal distance matrices.
pub fn weighted_distances(da: &DistanceMatrix, dv: &DistanceMatrix, alpha: f64) -> Result<DistanceMatrix> {
    if da.ids() != dv.ids() {
        return Err(ClusterError::OrderMismatch);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ClusterError::InvalidAlpha(alpha));
    }
    let norm = |d: &DistanceMatrix| {
        let m = d.max();
        if m > 0.0 {
            d.map(|v| v / m)
        } else {
            d.map(|_| 0.0)
        }
    };
    let (na, nv) = (norm(da), norm(dv));
    let n = da.len();
    let values = (0..n * n)
        .map(|k| alpha * na.get(k / n, k % n) + (1.0 - alpha) * nv.get(k / n, k % n))
        .collect();
    Ok(DistanceMatrix::from_values(da.ids().to_vec(), values))
}

/// Joint clustering on the weighted sum of both modal distances.
pub fn cluster_scene_ws(fa: &FeatureMatrix, fv: &FeatureMatrix, alpha: f64, p: usize) -> Result<Partition> {
    if fa.ids != fv.ids {
        return Err(ClusterError::OrderMismatch);
    }
    let d = weighted_distances(&distance_matrix(fa), &distance_matrix(fv), alpha)?;
    cluster_distances(fa.scene, Modality::Fused, &d, p)
}

/// Member with the smallest summed distance to the others; ties go to the
/// lowest id.
pub fn medoid(members: &[UttId], d: &DistanceMatrix) -> Result<UttId> {
    let pos = members
        .iter()
        .map(|&id| d.position(id).ok_or(ClusterError::UnknownUtterance(id)))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, UttId)> = None;
    for (&id, &i) in members.iter().zip(&pos) {
        let s: f64 = pos.iter().map(|&j| d.get(i, j)).sum();
        let better = match best {
            None => true,
            Some((bs, bid)) => s < bs || (s == bs && id < bid),
        };
        if better {
            best = Some((s, id));
        }
    }
    best.map(|(_, id)| id).ok_or(ClusterError::EmptyCluster)
}
