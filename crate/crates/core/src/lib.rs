//! Workout activity detection from four body-worn accelerometers.
//!
//! The pipeline runs: [`ingest`] recordings, [`features::extract`]
//! multi-window features every 0.5 s, reshape them with an
//! [`augment::AugmentationMode`], fit a [`model::GbdtModel`], then refine
//! predictions with [`postprocess`] and score them with [`eval`].
//! [`synth`] produces labeled cohorts for testing without real data.

pub mod augment;
pub mod config;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod model;
pub mod postprocess;
pub mod synth;

pub use augment::AugmentationMode;
pub use config::PipelineConfig;
pub use features::{extract, FeatureMatrix, WindowPlan};
pub use ingest::{ActivityLabel, LimbId, Recording, Vocabulary};
pub use model::{GbdtConfig, GbdtModel};
pub use postprocess::ProbabilityMatrix;

use thiserror::Error;

/// Any pipeline failure, tagged by the stage that produced it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Features(#[from] features::FeatureError),
    #[error(transparent)]
    Augment(#[from] augment::AugmentError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Postprocess(#[from] postprocess::PostprocessError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Process exit code of the CLI for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Ingest(_) => 3,
            Error::Features(_) => 4,
            Error::Augment(_) => 5,
            Error::Model(_) => 6,
            Error::Postprocess(_) => 7,
            Error::Eval(_) => 8,
            Error::Synth(_) => 9,
            Error::Io(_) => 10,
        }
    }
}
