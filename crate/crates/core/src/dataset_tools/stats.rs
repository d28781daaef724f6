//! Dataset statistics: images per label, pixels per class and people per image.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, ImageSample, Split};
use crate::error::Result;
use crate::maskcore::Task;
use crate::ordered::OrderedMap;
use crate::taxonomy::Taxonomy;

/// Integer counters that merge exactly across shards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsAccumulator {
    pub images: u64,
    pub images_per_split: BTreeMap<Split, u64>,
    /// Per semantic task, indexed by class id (0 = background).
    pub images_per_label: BTreeMap<Task, Vec<u64>>,
    pub pixels_per_class: BTreeMap<Task, Vec<u64>>,
    pub instances_total: u64,
    /// people in image → number of images
    pub people_histogram: BTreeMap<u64, u64>,
}

impl Default for StatsAccumulator {
    fn default() -> Self {
        let per_task = || {
            Task::SEMANTIC
                .iter()
                .map(|&t| (t, vec![0u64; t.max_class() as usize + 1]))
                .collect()
        };
        Self {
            images: 0,
            images_per_split: BTreeMap::new(),
            images_per_label: per_task(),
            pixels_per_class: per_task(),
            instances_total: 0,
            people_histogram: BTreeMap::new(),
        }
    }
}

impl StatsAccumulator {
    /// Counts one image. Pixels outside a task's class range are ignored here;
    /// the validator reports them.
    pub fn add_sample(&mut self, sample: &ImageSample, split: Split) {
        self.images += 1;
        *self.images_per_split.entry(split).or_default() += 1;
        for task in Task::SEMANTIC {
            let pixels = self.pixels_per_class.get_mut(&task).unwrap();
            let mut local = vec![0u64; pixels.len()];
            for &v in sample.map(task).data() {
                if let Some(c) = local.get_mut(v as usize) {
                    *c += 1;
                }
            }
            let images = self.images_per_label.get_mut(&task).unwrap();
            for (c, &n) in local.iter().enumerate() {
                pixels[c] += n;
                images[c] += (n > 0) as u64;
            }
        }
        let mut ids: Vec<u16> = sample.instance.data().iter().copied().filter(|&v| v != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        self.instances_total += ids.len() as u64;
        *self.people_histogram.entry(ids.len() as u64).or_default() += 1;
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        self.images += other.images;
        for (s, n) in &other.images_per_split {
            *self.images_per_split.entry(*s).or_default() += n;
        }
        for (t, v) in &other.images_per_label {
            for (a, b) in self.images_per_label.get_mut(t).unwrap().iter_mut().zip(v) {
                *a += b;
            }
        }
        for (t, v) in &other.pixels_per_class {
            for (a, b) in self.pixels_per_class.get_mut(t).unwrap().iter_mut().zip(v) {
                *a += b;
            }
        }
        self.instances_total += other.instances_total;
        for (k, n) in &other.people_histogram {
            *self.people_histogram.entry(*k).or_default() += n;
        }
    }

    pub fn report(&self, taxonomy: &Taxonomy, errors: Vec<String>) -> StatsReport {
        let named = |counts: &[u64], task: Task, skip: usize| -> OrderedMap<u64> {
            let catalog = taxonomy.catalog(task);
            counts
                .iter()
                .enumerate()
                .skip(skip)
                .map(|(c, &n)| (catalog.name(c as u16).to_owned(), n))
                .collect()
        };
        let images_per_label = Task::SEMANTIC
            .iter()
            .map(|&t| (t.name().to_owned(), named(&self.images_per_label[&t], t, 1)))
            .collect();
        let pixels_per_class = Task::SEMANTIC
            .iter()
            .map(|&t| (t.name().to_owned(), named(&self.pixels_per_class[&t], t, 0)))
            .collect();
        let images_per_split = Split::ALL
            .iter()
            .map(|s| (s.name().to_owned(), self.images_per_split.get(s).copied().unwrap_or(0)))
            .collect();
        let mean = if self.images == 0 {
            0.0
        } else {
            self.instances_total as f64 / self.images as f64
        };
        StatsReport {
            images: self.images,
            images_per_split,
            images_per_label,
            instances_total: self.instances_total,
            people_per_image: PeoplePerImage {
                histogram: self.people_histogram.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                mean,
            },
            pixels_per_class,
            errors,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeoplePerImage {
    pub histogram: OrderedMap<u64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub images: u64,
    pub images_per_split: OrderedMap<u64>,
    pub images_per_label: OrderedMap<OrderedMap<u64>>,
    pub instances_total: u64,
    pub people_per_image: PeoplePerImage,
    pub pixels_per_class: OrderedMap<OrderedMap<u64>>,
    /// Images that could not be read, as `image_id: reason`.
    pub errors: Vec<String>,
}

/// Scans every image of a manifest in parallel. Unreadable images are listed
/// in the report's `errors` and otherwise skipped.
pub fn scan_stats_accumulator(manifest: &DatasetManifest) -> (StatsAccumulator, Vec<String>) {
    let partials: Vec<Result<StatsAccumulator, String>> = manifest
        .images
        .par_iter()
        .map(|entry| {
            let sample = manifest.load_sample(entry).map_err(|e| format!("{}: {e}", entry.id))?;
            let mut acc = StatsAccumulator::default();
            acc.add_sample(&sample, entry.split);
            Ok(acc)
        })
        .collect();
    let mut total = StatsAccumulator::default();
    let mut errors = Vec::new();
    for p in partials {
        match p {
            Ok(acc) => total.merge(&acc),
            Err(e) => errors.push(e),
        }
    }
    (total, errors)
}

pub fn scan_stats(manifest: &DatasetManifest, taxonomy: &Taxonomy) -> StatsReport {
    let (acc, errors) = scan_stats_accumulator(manifest);
    acc.report(taxonomy, errors)
}
