//! Stage implementations behind the `aspectrank` command.

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

pub use config::{Layout, PipelineConfig};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
pub use stages::ScoreAspect;
