//! Per-scene utterance feature matrices and their distance matrices.
//!
//! Video vectors have one component per shot label of the episode holding
//! the seconds the utterance overlaps shots with that label. Audio vectors
//! are externally extracted embeddings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ingest::EmbeddingTable;
use crate::model::{Modality, Scene, Shot, UttId, Utterance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("utterance {0} has no embedding")]
    MissingUtterance(UttId),
    #[error("scene refers to unknown utterance {0}")]
    UnknownUtterance(UttId),
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Euclidean after z-scoring every dimension over the matrix rows.
    NormalizedEuclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub scene: usize,
    pub modality: Modality,
    pub ids: Vec<UttId>,
    pub vectors: Vec<Vec<f64>>,
    pub metric: Metric,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

/// Symmetric distances between the utterances `ids`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<UttId>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full row-major table.
    ///
    /// # Panics
    /// If `values` is not `ids.len()²` long.
    pub fn from_values(ids: Vec<UttId>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), ids.len() * ids.len(), "distance table must be square");
        Self { ids, values }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[UttId] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn position(&self, id: UttId) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Element-wise map, keeping ids.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            ids: self.ids.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn scene_utterances<'a>(scene: &Scene, utterances: &'a [Utterance]) -> Result<Vec<&'a Utterance>> {
    let by_id: BTreeMap<UttId, &Utterance> = utterances.iter().map(|u| (u.id, u)).collect();
    scene
        .utterances
        .iter()
        .map(|id| by_id.get(id).copied().ok_or(FeatureError::UnknownUtterance(*id)))
        .collect()
}

/// Number of labels in the episode alphabet (highest label + 1).
pub fn alphabet_size(shots: &[Shot]) -> usize {
    shots
        .iter()
        .filter_map(|s| s.label)
        .map(|l| l.index() + 1)
        .max()
        .unwrap_or(0)
}

pub fn video_vectors(scene: &Scene, utterances: &[Utterance], shots: &[Shot]) -> Result<FeatureMatrix> {
    let m = alphabet_size(shots);
    let utts = scene_utterances(scene, utterances)?;
    let vectors = utts
        .iter()
        .map(|u| {
            let mut ms = vec![0i64; m];
            for s in shots {
                if let Some(l) = s.label {
                    ms[l.index()] += s.span.overlap_ms(&u.span);
                }
            }
            ms.into_iter().map(|x| x as f64 / 1000.0).collect()
        })
        .collect();
    Ok(FeatureMatrix {
        scene: scene.id,
        modality: Modality::Video,
        ids: scene.utterances.clone(),
        vectors,
        metric: Metric::Euclidean,
    })
}

pub fn audio_vectors(scene: &Scene, table: &EmbeddingTable) -> Result<FeatureMatrix> {
    let vectors = scene
        .utterances
        .iter()
        .map(|&id| {
            table
                .get(id)
                .map(<[f64]>::to_vec)
                .ok_or(FeatureError::MissingUtterance(id))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        scene: scene.id,
        modality: Modality::Audio,
        ids: scene.utterances.clone(),
        vectors,
        metric: Metric::NormalizedEuclidean,
    })
}

/// Population standard deviation of every column.
fn column_std(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let d = rows.first().map_or(0, Vec::len);
    (0..d)
        .map(|k| {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            (rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

pub fn distance_matrix(f: &FeatureMatrix) -> DistanceMatrix {
    let n = f.len();
    let scale: Vec<f64> = match f.metric {
        Metric::Euclidean => vec![1.0; f.dim()],
        // Zero-spread dimensions carry no information and are skipped.
        Metric::NormalizedEuclidean => column_std(&f.vectors)
            .into_iter()
            .map(|s| if s > 0.0 { 1.0 / s } else { 0.0 })
            .collect(),
    };
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = f.vectors[i]
                .iter()
                .zip(&f.vectors[j])
                .zip(&scale)
                .map(|((a, b), s)| ((a - b) * s).powi(2))
                .sum::<f64>()
                .sqrt();
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix {
        ids: f.ids.clone(),
        values,
    }
}

/// Delimited dump of a feature matrix for debugging.
pub fn write_feature_matrix(f: &FeatureMatrix) -> String {
    let mut out = String::from("utt_id");
    for k in 0..f.dim() {
        let _ = write!(out, ",x{k}");
    }
    out.push('\n');
    for (id, v) in f.ids.iter().zip(&f.vectors) {
        let _ = write!(out, "{id}");
        for x in v {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}
