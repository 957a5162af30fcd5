//! Plan parsing, experiment dispatch and report emission for `koblab`.

pub mod emit;
pub mod plan;
pub mod run;

pub use emit::{emit_reports, render_bundle, RenderedFile};
pub use plan::{parse_plan, Experiment, ExperimentPlan};
pub use run::{run_plan, run_plan_with, GraphCache, ReportBundle, RunOptions};

use koblab_core::KobError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("plan error at {path:?}: {message}")]
    Parse { path: String, message: String },
    #[error("{context}: {source}")]
    Suite {
        context: String,
        #[source]
        source: KobError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
