//! Audiovisual speaker diarization restricted to two-character dialogue
//! scenes.
//!
//! Shots are detected and labelled from colour histograms, alternating
//! shot patterns delimit dialogue scenes, and inside each scene the audio
//! (speaker embeddings) and video (shot overlap) modalities are clustered
//! separately with an exact p-median solver, then fused by optimal matching.

pub mod clustering;
pub mod dialogue_patterns;
pub mod evaluation;
pub mod features;
pub mod fusion;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod shot_analysis;
pub mod synth;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Shot(#[from] shot_analysis::ShotError),
    #[error(transparent)]
    Pattern(#[from] dialogue_patterns::PatternError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Cluster(#[from] clustering::ClusterError),
    #[error(transparent)]
    Fusion(#[from] fusion::FusionError),
    #[error(transparent)]
    Eval(#[from] evaluation::EvalError),
}
