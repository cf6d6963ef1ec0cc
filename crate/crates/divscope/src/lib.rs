//! File formats, the staged pipeline and the command-line front-end built
//! on [`divscope_core`].

pub mod formats;
pub mod pipeline;

pub use formats::FormatError;
pub use pipeline::{run_pipeline, Manifest, PipelineConfig, PipelineError, Stage};
