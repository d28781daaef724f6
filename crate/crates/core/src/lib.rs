pub mod dataset_tools;
pub mod error;
pub mod evaluate;
pub mod instance_metrics;
pub mod json;
pub mod maskcore;
mod ordered;
pub mod semantic_metrics;
pub mod synth;
pub mod taxonomy;

pub use error::{Error, Result};
pub use ordered::OrderedMap;
