//! Dataset manifests, raster I/O, statistics, schema validation and report
//! emission.

pub mod manifest;
pub mod raster;
pub mod report;
pub mod stats;
pub mod validate;

pub use manifest::{
    read_prediction, write_prediction, write_sample, DatasetManifest, ImageSample, ManifestEntry,
    PredictionFile, PredictionSample, Split,
};
pub use report::{emit_report, parse_table, ReportBundle, ReportFormat, TableBlock};
pub use stats::{scan_stats, StatsAccumulator, StatsReport};
pub use validate::{validate_dataset, validate_sample, Check, SampleReport, Severity, ValidateOptions, ValidationReport};
