//! Schema checks on ground-truth samples.
//!
//! | code | rule | severity |
//! |------|------|----------|
//! | V1 | characteristic pixels lie on characterizable attributes | warning |
//! | V2 | Sparse/bald size only on Hair | error |
//! | V3 | attribute pixels lie inside a person | warning |
//! | V4 | instance ids are exactly 1..P | error |
//! | V5 | all five rasters share dimensions | error |
//! | V6 | class ids within the catalog | error |
//!
//! Warnings whose pixel count is at most `tolerance` of the region they
//! concern are suppressed; `strict` promotes the remaining ones to errors.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, ImageSample};
use crate::maskcore::Task;
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Check {
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    /// Sample could not be read.
    Io,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: Check,
    pub severity: Severity,
    pub detail: String,
    /// Offending pixels; 0 for checks that are not pixel-based (V4, V5).
    pub pixel_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub image_id: String,
    pub violations: Vec<Violation>,
}

impl SampleReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.violations.iter().any(|v| v.severity == Severity::Error)
    }

    pub fn find(&self, code: Check) -> Option<&Violation> {
        self.violations.iter().find(|v| v.code == code)
    }
}

/// Samples with at least one violation, in manifest order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: Vec<SampleReport>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.samples.iter().any(SampleReport::has_errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub strict: bool,
    pub tolerance: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            strict: false,
            tolerance: 0.001,
        }
    }
}

impl ValidateOptions {
    fn soft(&self, code: Check, detail: String, count: u64, region: u64) -> Option<Violation> {
        if count == 0 || count as f64 <= self.tolerance * region as f64 {
            return None;
        }
        Some(Violation {
            code,
            severity: if self.strict { Severity::Error } else { Severity::Warning },
            detail,
            pixel_count: count,
        })
    }
}

fn error(code: Check, detail: String, pixel_count: u64) -> Violation {
    Violation {
        code,
        severity: Severity::Error,
        detail,
        pixel_count,
    }
}

pub fn validate_sample(sample: &ImageSample, taxonomy: &Taxonomy, options: &ValidateOptions) -> SampleReport {
    let mut violations = Vec::new();

    // V5
    let dims = sample.dims();
    let mismatched: Vec<String> = sample
        .maps()
        .iter()
        .filter(|m| m.dims() != dims)
        .map(|m| format!("{} is {}x{}", m.task(), m.width(), m.height()))
        .collect();
    if !mismatched.is_empty() {
        violations.push(error(
            Check::V5,
            format!("attribute is {}x{} but {}", dims.0, dims.1, mismatched.join(", ")),
            0,
        ));
    }

    // V6
    for task in Task::SEMANTIC {
        let max = task.max_class();
        let bad = sample.map(task).data().iter().filter(|&&v| v > max).count() as u64;
        if bad > 0 {
            violations.push(error(Check::V6, format!("{task}: class ids above {max}"), bad));
        }
    }

    // V4
    let mut ids: Vec<u16> = sample.instance.data().iter().copied().filter(|&v| v != 0).collect();
    ids.sort_unstable();
    ids.dedup();
    let p = ids.last().copied().unwrap_or(0);
    if ids.len() != p as usize {
        let missing: Vec<String> = (1..=p)
            .filter(|id| ids.binary_search(id).is_err())
            .map(|id| id.to_string())
            .collect();
        violations.push(error(
            Check::V4,
            format!("instance ids skip {}", missing.join(", ")),
            0,
        ));
    }

    if mismatched.is_empty() {
        let attrs = sample.attribute.data();
        let eligible = taxonomy.characterizable_table();
        let is_eligible = |a: u16| eligible.get(a as usize).copied().unwrap_or(false);

        // V1
        for task in Task::CHARACTERISTIC {
            let chars = sample.map(task).data();
            let (mut region, mut bad) = (0u64, 0u64);
            for (&k, &a) in chars.iter().zip(attrs) {
                if k != 0 {
                    region += 1;
                    bad += !is_eligible(a) as u64;
                }
            }
            violations.extend(options.soft(
                Check::V1,
                format!("{task} labels outside characterizable attributes"),
                bad,
                region,
            ));
        }

        // V2
        let sparse = taxonomy.sparse_index();
        let hair = taxonomy.hair_index();
        let bad = sample
            .size
            .data()
            .iter()
            .zip(attrs)
            .filter(|(&s, &a)| s == sparse && a != hair)
            .count() as u64;
        if bad > 0 {
            violations.push(error(
                Check::V2,
                format!("{} outside {}", taxonomy.class_name(Task::Size, sparse), taxonomy.class_name(Task::Attribute, hair)),
                bad,
            ));
        }

        // V3
        let (mut region, mut bad) = (0u64, 0u64);
        for (&a, &i) in attrs.iter().zip(sample.instance.data()) {
            if a != 0 {
                region += 1;
                bad += (i == 0) as u64;
            }
        }
        violations.extend(options.soft(
            Check::V3,
            "attribute labels outside every person".to_owned(),
            bad,
            region,
        ));
    }

    violations.sort_by_key(|v| v.code);
    SampleReport {
        image_id: sample.image_id.clone(),
        violations,
    }
}

pub fn validate_dataset(manifest: &DatasetManifest, taxonomy: &Taxonomy, options: &ValidateOptions) -> ValidationReport {
    let samples = manifest
        .images
        .par_iter()
        .map(|entry| match manifest.load_sample(entry) {
            Ok(sample) => validate_sample(&sample, taxonomy, options),
            Err(e) => SampleReport {
                image_id: entry.id.clone(),
                violations: vec![error(Check::Io, e.to_string(), 0)],
            },
        })
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|r| !r.is_clean())
        .collect();
    ValidationReport { samples }
}
