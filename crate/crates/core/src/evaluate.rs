//! End-to-end evaluation.
//!
//! Each image is reduced independently (and in parallel) to confusion
//! matrices and per-class IoU evidence. The evidence is merged in image
//! order, which fixes every ingest order, and matching plus AP integration
//! run once per class over the pooled evidence. Reports are therefore
//! identical for any worker count.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset_tools::manifest::{prediction_path, read_prediction, DatasetManifest, ImageSample, PredictionSample};
use crate::dataset_tools::report::ReportBundle;
use crate::error::{Error, Result};
use crate::instance_metrics::{
    characterized_units_from_instances, image_evidence_by_class, instances_from_map, person_evidence,
    region_units_from_instances, ApConfig, ApMetric, ApReport, ClassPool, Granularity, ImageClassEvidence,
    PersonUnit, Thresholds, PERSON_CLASS, TIE_BREAK,
};
use crate::maskcore::Task;
use crate::semantic_metrics::{ConfusionMatrix, MeanPolicy, SemanticReport};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Miou,
    Apr,
    App,
    Apcr,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Miou, Metric::Apr, Metric::App, Metric::Apcr];
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "miou" => Ok(Metric::Miou),
            "apr" => Ok(Metric::Apr),
            "app" => Ok(Metric::App),
            "apcr" => Ok(Metric::Apcr),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Main,
    Naive,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Engine::Main),
            "naive" => Ok(Engine::Naive),
            other => Err(Error::InvalidConfig(format!("unknown engine `{other}`"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Main => "main",
            Engine::Naive => "naive",
        })
    }
}

/// Everything that determines a report. `workers` only affects speed and is
/// left out of the serialized form so reports compare byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Label maps scored by mIoU and AP^cr; AP^r and AP^p always use attributes.
    pub tasks: Vec<Task>,
    pub metrics: Vec<Metric>,
    pub thresholds: Thresholds,
    pub mean_policy: MeanPolicy,
    pub tie_break: String,
    pub unit_granularity: Granularity,
    pub engine: Engine,
    pub require_complete: bool,
    #[serde(skip, default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tasks: Task::SEMANTIC.to_vec(),
            metrics: Metric::ALL.to_vec(),
            thresholds: Thresholds::default(),
            mean_policy: MeanPolicy::ForegroundOnly,
            tie_break: TIE_BREAK.to_owned(),
            unit_granularity: Granularity::PerAttributeRegion,
            engine: Engine::Main,
            require_complete: false,
            workers: 1,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if let Some(t) = self.tasks.iter().find(|t| **t == Task::Instance) {
            return Err(Error::InvalidConfig(format!("`{t}` is not a semantic task")));
        }
        if self.tie_break != TIE_BREAK {
            return Err(Error::InvalidConfig(format!(
                "unsupported tie-break rule `{}`; only `{TIE_BREAK}` is implemented",
                self.tie_break
            )));
        }
        Thresholds::new(self.thresholds.as_slice().to_vec())?;
        Ok(())
    }

    fn has(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }

    /// Selected tasks in canonical order.
    pub(crate) fn semantic_tasks(&self) -> Vec<Task> {
        if !self.has(Metric::Miou) {
            return Vec::new();
        }
        Task::SEMANTIC.into_iter().filter(|t| self.tasks.contains(t)).collect()
    }

    pub(crate) fn characteristic_tasks(&self) -> Vec<Task> {
        if !self.has(Metric::Apcr) {
            return Vec::new();
        }
        Task::CHARACTERISTIC.into_iter().filter(|t| self.tasks.contains(t)).collect()
    }

    pub(crate) fn wants_region(&self) -> bool {
        self.has(Metric::Apr)
    }

    pub(crate) fn wants_person(&self) -> bool {
        self.has(Metric::App)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetadata {
    pub tool: String,
    pub version: String,
    pub engine: Engine,
    pub config: EvalConfig,
    pub images: usize,
    /// Images without a prediction file, scored as empty predictions.
    pub missing_predictions: Vec<String>,
    pub discarded_empty_pred_units: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: EvalMetadata,
    pub semantic: Vec<SemanticReport>,
    pub ap: Vec<ApReport>,
}

impl EvalReport {
    pub(crate) fn new(
        config: &EvalConfig,
        engine: Engine,
        images: usize,
        missing_predictions: Vec<String>,
        discarded_empty_pred_units: u64,
        semantic: Vec<SemanticReport>,
        ap: Vec<ApReport>,
    ) -> Self {
        Self {
            metadata: EvalMetadata {
                tool: env!("CARGO_PKG_NAME").to_owned(),
                version: env!("CARGO_PKG_VERSION").to_owned(),
                engine,
                config: config.clone(),
                images,
                missing_predictions,
                discarded_empty_pred_units,
            },
            semantic,
            ap,
        }
    }

    pub fn to_json(&self) -> String {
        crate::json::to_canonical_string(self)
    }

    pub fn bundle(&self) -> ReportBundle {
        ReportBundle {
            semantic: self.semantic.clone(),
            ap: self.ap.clone(),
            stats: None,
        }
    }

    pub fn ap_report(&self, metric: ApMetric, task: Option<Task>) -> Option<&ApReport> {
        self.ap.iter().find(|r| r.metric == metric && r.task == task)
    }

    pub fn semantic_report(&self, task: Task) -> Option<&SemanticReport> {
        self.semantic.iter().find(|r| r.task == task)
    }
}

/// One image reduced to what the merge needs. Ids and ingest orders inside
/// the evidence are local to the image.
struct ImageEvidence {
    confusion: Vec<ConfusionMatrix>,
    region: Option<Side<Vec<ImageClassEvidence>>>,
    persons: Option<Side<ImageClassEvidence>>,
    characterized: Vec<Side<Vec<ImageClassEvidence>>>,
    discarded: u64,
}

struct Side<T> {
    evidence: T,
    n_pred: usize,
    n_gt: usize,
}

fn image_evidence(
    gt: &ImageSample,
    pred: &PredictionSample,
    taxonomy: &Taxonomy,
    config: &EvalConfig,
) -> Result<ImageEvidence> {
    let dims = gt.dims();
    for map in gt.maps() {
        gt.attribute.ensure_same_dims(map)?;
    }
    if (pred.width, pred.height) != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: (pred.width, pred.height),
        });
    }
    let id = gt.image_id.as_str();

    let confusion = config
        .semantic_tasks()
        .into_iter()
        .map(|task| {
            let mut cm = ConfusionMatrix::for_task(task);
            cm.add(gt.map(task), pred.map(task))?;
            Ok(cm)
        })
        .collect::<Result<Vec<_>>>()?;

    let needs_instances = config.wants_region() || config.wants_person() || !config.characteristic_tasks().is_empty();
    let (gt_instances, pred_instances) = if needs_instances {
        (instances_from_map(&gt.instance, None)?, pred.instances.clone())
    } else {
        (Vec::new(), Vec::new())
    };

    let mut region = None;
    let mut persons = None;
    let mut discarded = 0;
    if config.wants_region() || config.wants_person() {
        let gt_units = region_units_from_instances(&gt_instances, &gt.attribute, id)?;
        let pred_units = region_units_from_instances(&pred_instances, &pred.attribute, id)?;
        if config.wants_region() {
            region = Some(Side {
                evidence: image_evidence_by_class(&pred_units, &gt_units, Task::Attribute)?,
                n_pred: pred_units.len(),
                n_gt: gt_units.len(),
            });
        }
        if config.wants_person() {
            let gp = PersonUnit::group(&gt_instances, gt_units, id);
            let pp = PersonUnit::group(&pred_instances, pred_units, id);
            let g: Vec<(usize, &PersonUnit)> = gp.iter().enumerate().collect();
            let p: Vec<(usize, &PersonUnit)> = pp.iter().enumerate().filter(|(_, u)| !u.mask.is_empty()).collect();
            discarded += (pp.len() - p.len()) as u64;
            persons = Some(Side {
                evidence: person_evidence(&p, &g)?,
                n_pred: pp.len(),
                n_gt: gp.len(),
            });
        }
    }

    let characterized = config
        .characteristic_tasks()
        .into_iter()
        .map(|task| {
            let granularity = config.unit_granularity;
            let gt_units =
                characterized_units_from_instances(&gt_instances, &gt.attribute, gt.map(task), taxonomy, granularity, id)?;
            let pred_units = characterized_units_from_instances(
                &pred_instances,
                &pred.attribute,
                pred.map(task),
                taxonomy,
                granularity,
                id,
            )?;
            Ok(Side {
                evidence: image_evidence_by_class(&pred_units, &gt_units, task)?,
                n_pred: pred_units.len(),
                n_gt: gt_units.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ImageEvidence {
        confusion,
        region,
        persons,
        characterized,
        discarded,
    })
}

/// Running offsets that turn image-local ids into global ones.
#[derive(Default, Clone, Copy)]
struct Offsets {
    pred: usize,
    gt: usize,
}

impl Offsets {
    fn shift(&self, mut e: ImageClassEvidence) -> ImageClassEvidence {
        for g in &mut e.gt_ids {
            *g += self.gt;
        }
        for p in &mut e.preds {
            p.0 += self.pred;
            p.2 += self.pred as u64;
        }
        e
    }

    fn advance<T>(&mut self, side: &Side<T>) {
        self.pred += side.n_pred;
        self.gt += side.n_gt;
    }
}

struct Accumulator {
    confusion: Vec<ConfusionMatrix>,
    region: Vec<ClassPool>,
    region_at: Offsets,
    persons: ClassPool,
    persons_at: Offsets,
    characterized: Vec<(Task, Vec<ClassPool>, Offsets)>,
    discarded: u64,
}

impl Accumulator {
    fn new(config: &EvalConfig) -> Self {
        let pools = |task: Task| vec![ClassPool::default(); task.max_class() as usize + 1];
        Self {
            confusion: config.semantic_tasks().into_iter().map(ConfusionMatrix::for_task).collect(),
            region: pools(Task::Attribute),
            region_at: Offsets::default(),
            persons: ClassPool::default(),
            persons_at: Offsets::default(),
            characterized: config
                .characteristic_tasks()
                .into_iter()
                .map(|t| (t, pools(t), Offsets::default()))
                .collect(),
            discarded: 0,
        }
    }

    fn add(&mut self, image: ImageEvidence) -> Result<()> {
        for (acc, cm) in self.confusion.iter_mut().zip(&image.confusion) {
            acc.merge_from(cm)?;
        }
        if let Some(side) = image.region {
            let at = self.region_at;
            self.region_at.advance(&side);
            for (pool, e) in self.region.iter_mut().zip(side.evidence) {
                pool.add_image(at.shift(e));
            }
        }
        if let Some(side) = image.persons {
            let at = self.persons_at;
            self.persons_at.advance(&side);
            self.persons.add_image(at.shift(side.evidence));
        }
        for ((_, pools, offsets), side) in self.characterized.iter_mut().zip(image.characterized) {
            let at = *offsets;
            offsets.advance(&side);
            for (pool, e) in pools.iter_mut().zip(side.evidence) {
                pool.add_image(at.shift(e));
            }
        }
        self.discarded += image.discarded;
        Ok(())
    }

    fn finish(mut self, config: &EvalConfig, taxonomy: &Taxonomy) -> (Vec<SemanticReport>, Vec<ApReport>, u64) {
        let thresholds = &config.thresholds;
        let semantic = self
            .confusion
            .iter()
            .map(|cm| SemanticReport::from_confusion(cm, taxonomy))
            .collect();
        let class_curves = |task: Task, pools: &mut [ClassPool]| -> Vec<(String, Option<Vec<f64>>)> {
            let catalog = taxonomy.catalog(task);
            (1..=catalog.class_count())
                .map(|c| (catalog.name(c as u16).to_owned(), pools[c].ap_per_threshold(thresholds)))
                .collect()
        };
        let mut ap = Vec::new();
        if config.wants_region() {
            ap.push(ApReport::assemble(
                ApMetric::ApR,
                Some(Task::Attribute),
                class_curves(Task::Attribute, &mut self.region),
                ApConfig::new(thresholds, None),
            ));
        }
        if config.wants_person() {
            ap.push(ApReport::assemble(
                ApMetric::ApP,
                None,
                vec![(PERSON_CLASS.to_owned(), self.persons.ap_per_threshold(thresholds))],
                ApConfig::new(thresholds, None),
            ));
        }
        for (task, pools, _) in &mut self.characterized {
            ap.push(ApReport::assemble(
                ApMetric::ApCr,
                Some(*task),
                class_curves(*task, pools),
                ApConfig::new(thresholds, Some(config.unit_granularity)),
            ));
        }
        (semantic, ap, self.discarded)
    }
}

/// Applies `f` to `0..n` on a pool of `workers` threads and returns the
/// results in index order. The first error by index wins.
fn map_images<T: Send>(workers: usize, n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = if workers <= 1 {
        (0..n).map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(&f).collect())
    };
    results.into_iter().collect()
}

fn run_main(
    n: usize,
    load: impl Fn(usize) -> Result<(ImageSample, Option<PredictionSample>)> + Sync + Send,
    taxonomy: &Taxonomy,
    config: &EvalConfig,
) -> Result<EvalReport> {
    let per_image = map_images(config.workers, n, |i| {
        let (gt, pred) = load(i)?;
        let missing = pred.is_none().then(|| gt.image_id.clone());
        let pred = match pred {
            Some(p) => p,
            None => {
                let (w, h) = gt.dims();
                PredictionSample::empty(&gt.image_id, w, h)?
            }
        };
        Ok((image_evidence(&gt, &pred, taxonomy, config)?, missing))
    })?;
    let mut acc = Accumulator::new(config);
    let mut missing = Vec::new();
    for (evidence, m) in per_image {
        acc.add(evidence)?;
        missing.extend(m);
    }
    let (semantic, ap, discarded) = acc.finish(config, taxonomy);
    Ok(EvalReport::new(config, Engine::Main, n, missing, discarded, semantic, ap))
}

/// Evaluates in-memory samples; `preds[i]` is the prediction for `gt[i]`,
/// `None` when the model produced nothing for that image.
pub fn evaluate(
    gt: &[ImageSample],
    preds: &[Option<PredictionSample>],
    taxonomy: &Taxonomy,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    if gt.len() != preds.len() {
        return Err(Error::InvalidConfig(format!(
            "{} ground-truth samples but {} prediction slots",
            gt.len(),
            preds.len()
        )));
    }
    if config.require_complete {
        if let Some(i) = preds.iter().position(Option::is_none) {
            return Err(Error::MissingPrediction(gt[i].image_id.clone()));
        }
    }
    match config.engine {
        Engine::Main => run_main(gt.len(), |i| Ok((gt[i].clone(), preds[i].clone())), taxonomy, config),
        Engine::Naive => crate::synth::naive_eval(gt, preds, taxonomy, config),
    }
}

/// Evaluates a dataset manifest against a directory of per-image prediction
/// files (`<image_id>.json`).
pub fn run_eval(manifest: &DatasetManifest, pred_dir: &Path, taxonomy: &Taxonomy, config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let load = |i: usize| -> Result<(ImageSample, Option<PredictionSample>)> {
        let entry = &manifest.images[i];
        let gt = manifest.load_sample(entry)?;
        let path = prediction_path(pred_dir, &entry.id);
        let pred = if path.exists() {
            Some(read_prediction(&path)?)
        } else if config.require_complete {
            return Err(Error::MissingPrediction(entry.id.clone()));
        } else {
            None
        };
        Ok((gt, pred))
    };
    match config.engine {
        Engine::Main => run_main(manifest.images.len(), load, taxonomy, config),
        Engine::Naive => {
            let (gt, preds): (Vec<_>, Vec<_>) = (0..manifest.images.len()).map(load).collect::<Result<Vec<_>>>()?.into_iter().unzip();
            crate::synth::naive_eval(&gt, &preds, taxonomy, config)
        }
    }
}
