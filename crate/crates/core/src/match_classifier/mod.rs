//! Supervised filtering of false fingerprint matches.
//!
//! Matches are labeled from matching lists (repetitions and cross-event
//! matches are class 0), and logistic-regression and kNN models are chosen
//! by leave-one-song-out cross-validation under the constraint that no
//! wrong match is accepted. Confirmed clusters and repetitions feed new
//! training samples back in.

mod cv;
mod features;
mod knn;
mod logreg;
mod model;
mod samples;
mod scale;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use cv::{double_cv, grid_search, select_model, songs, Classifier, CvResult, Family, Selection, INNER_FOLDS, MIN_CV_SAMPLES};
pub use features::{featurize, FeatureSubset, MatchFeatures};
pub use knn::{train_knn, KnnModel, MAX_K};
pub use logreg::{objective, train_logreg, LogRegModel, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE};
pub use model::{TrainedModel, MODEL_FORMAT, MODEL_VERSION};
pub use samples::{
    autolabel, balance, balance_indices, cluster_confirmed, confirm_cluster, expand_from_repetitions, song_of, Sample,
    SampleKind, TrainingSet,
};
pub use scale::Standardizer;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("both classes are required (class 0: {zeros}, class 1: {ones})")]
    MissingClass { zeros: usize, ones: usize },
    #[error("cross-validation needs at least 2 query songs, found {0}")]
    TooFewSongs(usize),
    #[error("cross-validation needs at least {MIN_CV_SAMPLES} samples, found {0}")]
    TooFewSamples(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("training loss became non-finite; check feature scaling")]
    NonFiniteLoss,
    #[error("model has no training points")]
    EmptyModel,
    #[error("no cross-validation results to select from")]
    NoResults,
    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },
    #[error("unsupported version {0} of the model file")]
    UnsupportedVersion(u32),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ClassifierError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ClassifierError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
