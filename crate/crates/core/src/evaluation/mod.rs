//! Scoring estimators by circular MAE, side-by-side comparison tables,
//! backbone × loss ablations, and error histograms.

mod ablation;
mod estimator;
mod plot;
mod report;
mod table;

pub use ablation::{run_ablation, AblationData, AblationOutcome};
pub use estimator::{
    learned_method_name, ClassicalEstimator, ConstantPredictor, Estimator, LearnedEstimator, UniformRandomPredictor,
};
pub use plot::{error_histogram, plot_error_histogram, render_error_histogram, HISTOGRAM_BINS};
pub use report::{evaluate, evaluate_predictions, EvalReport, FailureRecord, SampleRecord};
pub use table::{compare, method_column, Cell, ComparisonTable};

use crate::dataset::DifficultyLevel;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("method not applicable: {method} cannot estimate {level} rotations")]
    NotApplicable { method: String, level: DifficultyLevel },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("report line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: std::path::PathBuf,
        #[source]
        source: image::ImageError,
    },
}
